use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::graph::{metric_closure, GraphError};
use super::instance::Instance;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    /// `1 < f < T` does not hold.
    BadSegmentCount,
    MaxEdgeExceeded,
    MinEdgeViolated,
    /// `k` outside `(0, 1]`.
    BadMinEdgeFactor,
    UnknownVertex,
    DuplicateVertex,
    NonpositiveWeight,
    SelfLoop,
    Disconnected,
    NegativeRelease,
    ReleaseAfterHorizon,
    NonpositiveRevenue,
    SourceEqualsDestination,
    /// Vertex missing from both sides, or present on both.
    BadBipartition,
    OriginNotDestinationSide,
    SourceNotInV1,
    DestinationNotInV2,
    SameSideEdge,
    MissingEdge,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub entity: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.code, self.entity, self.detail)
    }
}

/// Every broken instance invariant; empty means valid.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn push(out: &mut Vec<Violation>, code: ViolationCode, entity: String, detail: String) {
    out.push(Violation {
        code,
        entity,
        detail,
    });
}

pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut out = Vec::new();

    let f = Scalar::from_int(inst.segments as i64);
    if !(inst.segments > 1 && f < inst.horizon) {
        push(
            &mut out,
            ViolationCode::BadSegmentCount,
            "f".into(),
            format!("need 1 < f < T, got f={} T={}", inst.segments, inst.horizon),
        );
    }
    let cap = inst.segment_length();
    let floor = inst.min_edge_factor.as_ref().map(|k| k * &cap);
    if let Some(k) = &inst.min_edge_factor {
        if !k.is_positive() || k > &Scalar::one() {
            push(
                &mut out,
                ViolationCode::BadMinEdgeFactor,
                "k".into(),
                format!("k={k} not in (0,1]"),
            );
        }
    }

    let mut seen = BTreeSet::new();
    for v in &inst.vertices {
        if !seen.insert(v.as_str()) {
            push(
                &mut out,
                ViolationCode::DuplicateVertex,
                v.clone(),
                "listed twice".into(),
            );
        }
    }
    let known = |v: &str| seen.contains(v);
    if !known(&inst.origin) {
        push(
            &mut out,
            ViolationCode::UnknownVertex,
            inst.origin.clone(),
            "origin".into(),
        );
    }

    let mut declared: BTreeMap<(String, String), Scalar> = BTreeMap::new();
    for e in &inst.edges {
        let label = format!("{}-{}", e.u, e.v);
        let mut ok = true;
        for x in [&e.u, &e.v] {
            if !known(x) {
                push(
                    &mut out,
                    ViolationCode::UnknownVertex,
                    x.clone(),
                    format!("edge {label}"),
                );
                ok = false;
            }
        }
        if e.u == e.v {
            push(
                &mut out,
                ViolationCode::SelfLoop,
                label.clone(),
                "self loop".into(),
            );
            ok = false;
        }
        if !e.w.is_positive() {
            push(
                &mut out,
                ViolationCode::NonpositiveWeight,
                label.clone(),
                format!("w={}", e.w),
            );
            ok = false;
        }
        if e.w > cap {
            push(
                &mut out,
                ViolationCode::MaxEdgeExceeded,
                label.clone(),
                format!("w={} > T/f={}", e.w, cap),
            );
        }
        if let Some(floor) = &floor {
            if &e.w < floor {
                push(
                    &mut out,
                    ViolationCode::MinEdgeViolated,
                    label.clone(),
                    format!("w={} < kT/f={}", e.w, floor),
                );
            }
        }
        if ok {
            let c = e.canonical();
            declared.insert((c.u, c.v), c.w);
        }
    }

    for (i, r) in inst.requests.iter().enumerate() {
        let ent = format!("request {i}");
        for x in [&r.s, &r.d] {
            if !known(x) {
                push(
                    &mut out,
                    ViolationCode::UnknownVertex,
                    x.clone(),
                    ent.clone(),
                );
            }
        }
        if r.s == r.d {
            push(
                &mut out,
                ViolationCode::SourceEqualsDestination,
                ent.clone(),
                format!("s=d={}", r.s),
            );
        }
        if r.t.is_negative() {
            push(
                &mut out,
                ViolationCode::NegativeRelease,
                ent.clone(),
                format!("t={}", r.t),
            );
        }
        if r.t > inst.horizon {
            push(
                &mut out,
                ViolationCode::ReleaseAfterHorizon,
                ent.clone(),
                format!("t={} > T={}", r.t, inst.horizon),
            );
        }
        if !r.p.is_positive() {
            push(
                &mut out,
                ViolationCode::NonpositiveRevenue,
                ent.clone(),
                format!("p={}", r.p),
            );
        }
    }

    if let Some(bp) = &inst.bipartition {
        let v1: BTreeSet<&str> = bp.sources.iter().map(String::as_str).collect();
        let v2: BTreeSet<&str> = bp.destinations.iter().map(String::as_str).collect();
        for v in &inst.vertices {
            let (a, b) = (v1.contains(v.as_str()), v2.contains(v.as_str()));
            if a == b {
                push(
                    &mut out,
                    ViolationCode::BadBipartition,
                    v.clone(),
                    if a { "labeled V1 and V2" } else { "unlabeled" }.into(),
                );
            }
        }
        for x in v1.iter().chain(v2.iter()) {
            if !known(x) {
                push(
                    &mut out,
                    ViolationCode::UnknownVertex,
                    x.to_string(),
                    "bipartition".into(),
                );
            }
        }
        if !v2.contains(inst.origin.as_str()) {
            push(
                &mut out,
                ViolationCode::OriginNotDestinationSide,
                inst.origin.clone(),
                "origin must be in V2".into(),
            );
        }
        for (i, r) in inst.requests.iter().enumerate() {
            if !v1.contains(r.s.as_str()) {
                push(
                    &mut out,
                    ViolationCode::SourceNotInV1,
                    format!("request {i}"),
                    r.s.clone(),
                );
            }
            if !v2.contains(r.d.as_str()) {
                push(
                    &mut out,
                    ViolationCode::DestinationNotInV2,
                    format!("request {i}"),
                    r.d.clone(),
                );
            }
        }
        for (u, v) in declared.keys() {
            if v1.contains(u.as_str()) == v1.contains(v.as_str()) {
                push(
                    &mut out,
                    ViolationCode::SameSideEdge,
                    format!("{u}-{v}"),
                    "edges must join V1 and V2".into(),
                );
            }
        }
        for a in &v1 {
            for b in &v2 {
                if a == b {
                    continue;
                }
                let key = if a < b {
                    (a.to_string(), b.to_string())
                } else {
                    (b.to_string(), a.to_string())
                };
                if !declared.contains_key(&key) {
                    push(
                        &mut out,
                        ViolationCode::MissingEdge,
                        format!("{a}-{b}"),
                        "complete bipartite graph required".into(),
                    );
                }
            }
        }
    }

    // Closed distances of the pairs a server may need to cross in one move.
    let structurally_sound = !out.iter().any(|v| {
        matches!(
            v.code,
            ViolationCode::UnknownVertex
                | ViolationCode::DuplicateVertex
                | ViolationCode::SelfLoop
                | ViolationCode::NonpositiveWeight
        )
    });
    if structurally_sound && !inst.vertices.is_empty() {
        match metric_closure(&inst.vertices, &inst.edges) {
            Ok(metric) => {
                let n = metric.len();
                for i in 0..n {
                    for j in i + 1..n {
                        let (a, b) = (metric.name(i), metric.name(j));
                        let relevant = match &inst.bipartition {
                            Some(bp) => bp.is_source(a) != bp.is_source(b),
                            None => true,
                        };
                        let d = metric.dist(i, j);
                        if relevant
                            && d > &cap
                            && !declared.contains_key(&(a.to_string(), b.to_string()))
                        {
                            push(
                                &mut out,
                                ViolationCode::MaxEdgeExceeded,
                                format!("{a}-{b}"),
                                format!("closed distance {d} > T/f={cap}"),
                            );
                        }
                    }
                }
            }
            Err(GraphError::Disconnected(a, b)) => {
                push(
                    &mut out,
                    ViolationCode::Disconnected,
                    format!("{a}-{b}"),
                    "no connecting path".into(),
                );
            }
            Err(e) => push(
                &mut out,
                ViolationCode::Disconnected,
                "graph".into(),
                e.to_string(),
            ),
        }
    }

    ValidationReport { violations: out }
}
