use serde::{Deserialize, Serialize};

use super::graph::{metric_closure, Edge, GraphError, MetricGraph};
use crate::scalar::Scalar;

/// A ride request `(s, d, t, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub s: String,
    pub d: String,
    pub t: Scalar,
    pub p: Scalar,
}

impl Request {
    pub fn new(s: impl Into<String>, d: impl Into<String>, t: Scalar, p: Scalar) -> Self {
        Request {
            s: s.into(),
            d: d.into(),
            t,
            p,
        }
    }
}

/// Source side `V1` and destination side `V2` of a bipartite instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    #[serde(rename = "V1")]
    pub sources: Vec<String>,
    #[serde(rename = "V2")]
    pub destinations: Vec<String>,
}

impl Bipartition {
    pub fn is_source(&self, v: &str) -> bool {
        self.sources.iter().any(|x| x == v)
    }

    pub fn is_destination(&self, v: &str) -> bool {
        self.destinations.iter().any(|x| x == v)
    }
}

/// A complete problem instance as stored on disk.
///
/// `edges` are the declared edges; all travel uses their metric closure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub vertices: Vec<String>,
    pub origin: String,
    pub edges: Vec<Edge>,
    #[serde(rename = "T")]
    pub horizon: Scalar,
    #[serde(rename = "f")]
    pub segments: u32,
    #[serde(rename = "k", default, skip_serializing_if = "Option::is_none")]
    pub min_edge_factor: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<Bipartition>,
    pub requests: Vec<Request>,
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceIoError {
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Instance {
    pub fn segment_length(&self) -> Scalar {
        &self.horizon / Scalar::from_int(self.segments as i64)
    }

    pub fn metric(&self) -> Result<MetricGraph, GraphError> {
        metric_closure(&self.vertices, &self.edges)
    }

    pub fn total_revenue(&self) -> Scalar {
        self.requests.iter().map(|r| &r.p).sum()
    }

    /// True when every request has the same revenue.
    pub fn uniform_revenue(&self) -> Option<Scalar> {
        let first = self.requests.first()?;
        self.requests
            .iter()
            .all(|r| r.p == first.p)
            .then(|| first.p.clone())
    }

    /// Sorts vertices, edge endpoints, edges and bipartition sides into the
    /// canonical order. Request order is preserved since request indices are
    /// identities.
    pub fn canonicalize(&mut self) {
        self.vertices.sort();
        self.vertices.dedup();
        for e in &mut self.edges {
            *e = e.canonical();
        }
        self.edges.sort_by(|a, b| (&a.u, &a.v).cmp(&(&b.u, &b.v)));
        if let Some(bp) = &mut self.bipartition {
            bp.sources.sort();
            bp.destinations.sort();
        }
    }

    pub fn to_json(&self) -> String {
        let mut c = self.clone();
        c.canonicalize();
        let mut s = serde_json::to_string_pretty(&c).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Instance, InstanceIoError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Index-resolved request used by the algorithms.
#[derive(Debug, Clone)]
pub struct ResolvedRequest {
    pub source: usize,
    pub dest: usize,
    pub release: Scalar,
    pub revenue: Scalar,
    /// Closure distance from source to destination.
    pub length: Scalar,
}

/// An instance together with its closed metric and index-resolved requests.
#[derive(Debug, Clone)]
pub struct Prepared<'a> {
    pub instance: &'a Instance,
    pub metric: MetricGraph,
    pub origin: usize,
    pub requests: Vec<ResolvedRequest>,
}

impl<'a> Prepared<'a> {
    pub fn new(instance: &'a Instance) -> Result<Self, GraphError> {
        let metric = instance.metric()?;
        let resolve = |v: &str| {
            metric
                .index_of(v)
                .ok_or_else(|| GraphError::UnknownVertex(v.to_string()))
        };
        let origin = resolve(&instance.origin)?;
        let mut requests = Vec::with_capacity(instance.requests.len());
        for r in &instance.requests {
            let source = resolve(&r.s)?;
            let dest = resolve(&r.d)?;
            requests.push(ResolvedRequest {
                source,
                dest,
                release: r.t.clone(),
                revenue: r.p.clone(),
                length: metric.dist(source, dest).clone(),
            });
        }
        Ok(Prepared {
            instance,
            metric,
            origin,
            requests,
        })
    }

    pub fn dist(&self, a: usize, b: usize) -> &Scalar {
        self.metric.dist(a, b)
    }

    pub fn horizon(&self) -> &Scalar {
        &self.instance.horizon
    }
}
