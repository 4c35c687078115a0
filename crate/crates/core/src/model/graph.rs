use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// An undirected weighted edge as it appears in instance files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub w: Scalar,
}

impl Edge {
    pub fn new(u: impl Into<String>, v: impl Into<String>, w: Scalar) -> Self {
        Edge {
            u: u.into(),
            v: v.into(),
            w,
        }
    }

    /// Endpoints in canonical (lexicographic) order.
    pub fn canonical(&self) -> Edge {
        if self.u <= self.v {
            self.clone()
        } else {
            Edge {
                u: self.v.clone(),
                v: self.u.clone(),
                w: self.w.clone(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("DISCONNECTED: no path between `{0}` and `{1}`")]
    Disconnected(String, String),
    #[error("NONPOSITIVE_WEIGHT: edge `{0}`-`{1}` has weight {2}")]
    NonpositiveWeight(String, String, Scalar),
    #[error("UNKNOWN_VERTEX: `{0}`")]
    UnknownVertex(String),
    #[error("SELF_LOOP: edge at `{0}`")]
    SelfLoop(String),
    #[error("DUPLICATE_VERTEX: `{0}`")]
    DuplicateVertex(String),
    #[error("EMPTY_GRAPH")]
    Empty,
}

/// Complete metric over a vertex set, produced by [`metric_closure`].
///
/// Vertices are stored in canonical (lexicographic) order, so a vertex index
/// is also its rank in the tie-breaking order used everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    dist: Vec<Scalar>,
}

impl MetricGraph {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vertices(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn dist(&self, i: usize, j: usize) -> &Scalar {
        &self.dist[i * self.names.len() + j]
    }

    pub fn dist_by_name(&self, a: &str, b: &str) -> Option<&Scalar> {
        Some(self.dist(self.index_of(a)?, self.index_of(b)?))
    }

    /// Every off-diagonal pair as an edge list, canonical order.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(Edge::new(
                    self.names[i].clone(),
                    self.names[j].clone(),
                    self.dist(i, j).clone(),
                ));
            }
        }
        out
    }

    pub fn satisfies_triangle_inequality(&self) -> bool {
        let n = self.len();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if self.dist(i, j) > &(self.dist(i, k) + self.dist(k, j)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Closes a connected weighted graph into a complete metric whose weights are
/// shortest-path distances (Floyd–Warshall over exact rationals).
///
/// Parallel edges keep their smallest weight.
pub fn metric_closure(vertices: &[String], edges: &[Edge]) -> Result<MetricGraph, GraphError> {
    if vertices.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut names: Vec<String> = vertices.to_vec();
    names.sort();
    for pair in names.windows(2) {
        if pair[0] == pair[1] {
            return Err(GraphError::DuplicateVertex(pair[0].clone()));
        }
    }
    let index: HashMap<String, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    let n = names.len();
    let mut dist: Vec<Option<Scalar>> = vec![None; n * n];
    for i in 0..n {
        dist[i * n + i] = Some(Scalar::zero());
    }
    for e in edges {
        let u = *index
            .get(&e.u)
            .ok_or_else(|| GraphError::UnknownVertex(e.u.clone()))?;
        let v = *index
            .get(&e.v)
            .ok_or_else(|| GraphError::UnknownVertex(e.v.clone()))?;
        if u == v {
            return Err(GraphError::SelfLoop(e.u.clone()));
        }
        if !e.w.is_positive() {
            return Err(GraphError::NonpositiveWeight(
                e.u.clone(),
                e.v.clone(),
                e.w.clone(),
            ));
        }
        for (a, b) in [(u, v), (v, u)] {
            let slot = &mut dist[a * n + b];
            if slot.as_ref().is_none_or(|cur| &e.w < cur) {
                *slot = Some(e.w.clone());
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = dist[i * n + k].clone() else {
                continue;
            };
            for j in 0..n {
                let Some(dkj) = dist[k * n + j].as_ref() else {
                    continue;
                };
                let via = &dik + dkj;
                let slot = &mut dist[i * n + j];
                if slot.as_ref().is_none_or(|cur| &via < cur) {
                    *slot = Some(via);
                }
            }
        }
    }
    let mut closed = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            match dist[i * n + j].take() {
                Some(d) => closed.push(d),
                None => return Err(GraphError::Disconnected(names[i].clone(), names[j].clone())),
            }
        }
    }
    Ok(MetricGraph {
        names,
        index,
        dist: closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn path_gets_shortcut() {
        let g = metric_closure(
            &names(&["a", "b", "c"]),
            &[Edge::new("a", "b", 2.into()), Edge::new("b", "c", 3.into())],
        )
        .unwrap();
        assert_eq!(g.dist_by_name("a", "c").unwrap(), &Scalar::from_int(5));
        assert_eq!(g.dist_by_name("c", "a").unwrap(), &Scalar::from_int(5));
    }

    #[test]
    fn metric_triangle_unchanged() {
        let edges = vec![
            Edge::new("x", "y", 1.into()),
            Edge::new("y", "z", 1.into()),
            Edge::new("x", "z", 1.into()),
        ];
        let g = metric_closure(&names(&["x", "y", "z"]), &edges).unwrap();
        for e in &edges {
            assert_eq!(g.dist_by_name(&e.u, &e.v).unwrap(), &e.w);
        }
    }

    #[test]
    fn single_edge_unchanged() {
        let g = metric_closure(&names(&["p", "q"]), &[Edge::new("p", "q", 4.into())]).unwrap();
        assert_eq!(g.dist_by_name("p", "q").unwrap(), &Scalar::from_int(4));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            metric_closure(&names(&["a", "b", "c"]), &[Edge::new("a", "b", 1.into())]),
            Err(GraphError::Disconnected(..))
        ));
        assert!(matches!(
            metric_closure(&names(&["a", "b"]), &[Edge::new("a", "b", 0.into())]),
            Err(GraphError::NonpositiveWeight(..))
        ));
        assert!(matches!(
            metric_closure(&names(&["a", "b"]), &[Edge::new("a", "q", 1.into())]),
            Err(GraphError::UnknownVertex(_))
        ));
    }

    #[test]
    fn vertices_are_canonically_ordered() {
        let g = metric_closure(
            &names(&["b", "a"]),
            &[Edge::new("b", "a", Scalar::new(1, 2))],
        )
        .unwrap();
        assert_eq!(g.vertices(), &["a".to_string(), "b".to_string()]);
    }
}
