//! Reduction from general instances to complete bipartite ones, schedule
//! transport in both directions, and per-window capacity.
//!
//! Each vertex `u` splits into a source copy `u:1` and a destination copy
//! `u:2` joined by an edge of weight `eps`; every other cross pair keeps the
//! original closed distance. The horizon grows by `delta = T * eps`.

use serde::{Deserialize, Serialize};

use crate::model::{
    validate_schedule, Action, Bipartition, Edge, GraphError, Instance, Prepared, Request, Schedule,
};
use crate::oracle::realize_order;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BipartiteError {
    #[error("EPSILON_TOO_LARGE: delta={delta} must be positive and below the smallest edge {min_edge}")]
    EpsilonTooLarge { delta: Scalar, min_edge: Scalar },
    #[error("INVALID_INSTANCE: {0}")]
    InvalidInstance(#[from] GraphError),
    #[error("INFEASIBLE_INPUT: {0}")]
    InfeasibleInput(String),
    #[error("BAD_K: k={0} not in (0,1]")]
    BadK(Scalar),
}

pub fn source_copy(v: &str) -> String {
    format!("{v}:1")
}

pub fn dest_copy(v: &str) -> String {
    format!("{v}:2")
}

/// Original vertex and side (1 or 2) of a split vertex name.
pub fn split_copy(name: &str) -> Option<(&str, u8)> {
    let (base, side) = name.rsplit_once(':')?;
    match side {
        "1" => Some((base, 1)),
        "2" => Some((base, 2)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub instance: Instance,
    pub epsilon: Scalar,
    pub delta: Scalar,
}

/// Largest `g` such that every closed distance, release time and `T` is an
/// integer multiple of `g`.
pub fn time_granularity(inst: &Instance) -> Result<Scalar, GraphError> {
    let prep = Prepared::new(inst)?;
    let mut g = inst.horizon.clone();
    for i in 0..prep.metric.len() {
        for j in i + 1..prep.metric.len() {
            g = g.gcd(prep.dist(i, j));
        }
    }
    for r in &inst.requests {
        g = g.gcd(&r.t);
    }
    Ok(g)
}

/// Default `eps`: half the time granularity, spread over the horizon. With
/// integral data this keeps `delta` below one time unit, which is what makes
/// the optimum transfer back exactly.
pub fn default_epsilon(inst: &Instance) -> Result<Scalar, GraphError> {
    Ok(time_granularity(inst)? / (Scalar::from_int(2) * &inst.horizon))
}

pub fn to_bipartite(inst: &Instance, eps: Option<&Scalar>) -> Result<Reduction, BipartiteError> {
    let metric = inst.metric()?;
    let eps = match eps {
        Some(e) => e.clone(),
        None => default_epsilon(inst)?,
    };
    let delta = &inst.horizon * &eps;
    let n = metric.len();
    let min_edge = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| metric.dist(i, j).clone())
        .min()
        .unwrap_or_else(|| inst.horizon.clone());
    if !delta.is_positive() || delta >= min_edge {
        return Err(BipartiteError::EpsilonTooLarge { delta, min_edge });
    }

    let mut edges = Vec::new();
    for i in 0..n {
        let u = metric.name(i);
        edges.push(Edge::new(source_copy(u), dest_copy(u), eps.clone()));
        for j in 0..n {
            if i != j {
                edges.push(Edge::new(source_copy(u), dest_copy(metric.name(j)), metric.dist(i, j).clone()));
            }
        }
    }
    let v1: Vec<String> = metric.vertices().iter().map(|v| source_copy(v)).collect();
    let v2: Vec<String> = metric.vertices().iter().map(|v| dest_copy(v)).collect();
    let horizon = &inst.horizon + &delta;
    let k = &eps * Scalar::from_int(inst.segments as i64) / &horizon;
    let instance = Instance {
        vertices: v1.iter().chain(&v2).cloned().collect(),
        origin: dest_copy(&inst.origin),
        edges,
        horizon,
        segments: inst.segments,
        min_edge_factor: Some(k),
        bipartition: Some(Bipartition { sources: v1, destinations: v2 }),
        requests: inst
            .requests
            .iter()
            .map(|r| Request::new(source_copy(&r.s), dest_copy(&r.d), r.t.clone(), r.p.clone()))
            .collect(),
    };
    Ok(Reduction { instance, epsilon: eps, delta })
}

fn require_feasible(inst: &Instance, sched: &Schedule) -> Result<(), BipartiteError> {
    let v = validate_schedule(inst, sched).map_err(|e| BipartiteError::InfeasibleInput(e.to_string()))?;
    match v.violation {
        None => Ok(()),
        Some(x) => Err(BipartiteError::InfeasibleInput(format!("action {}: {}", x.action, x.rule))),
    }
}

/// Carries a general schedule into the reduced instance. Every serve that
/// starts on a destination copy first crosses the `eps` edge, and everything
/// after it slides by `eps`.
pub fn lift_schedule(general: &Instance, red: &Reduction, sched: &Schedule) -> Result<Schedule, BipartiteError> {
    require_feasible(general, sched)?;
    let eps = &red.epsilon;
    let mut out = Schedule::new();
    let mut at = general.origin.clone();
    let mut side = 2u8;
    let mut shift = Scalar::zero();
    for a in &sched.actions {
        match a {
            Action::Move { to, start, .. } => {
                let (from_name, to_name) = if side == 2 {
                    (dest_copy(&at), source_copy(to))
                } else {
                    (source_copy(&at), dest_copy(to))
                };
                out.push(Action::Move { from: from_name, to: to_name, start: start + &shift });
                side = 3 - side;
                at = to.clone();
            }
            Action::Serve { request, start } => {
                if side == 2 {
                    out.push(Action::Move { from: dest_copy(&at), to: source_copy(&at), start: start + &shift });
                    shift += eps;
                }
                out.push(Action::Serve { request: *request, start: start + &shift });
                at = general.requests[*request].d.clone();
                side = 2;
            }
            Action::Idle { start, duration } => {
                out.push(Action::Idle { start: start + &shift, duration: duration.clone() });
            }
        }
    }
    Ok(out)
}

/// Carries a reduced-instance schedule back. `eps` hops are dropped and every
/// later action moves earlier by the time they took; if the result still runs
/// past `T` the served requests are replayed as early as possible.
pub fn project_schedule(general: &Instance, red: &Reduction, sched: &Schedule) -> Result<Schedule, BipartiteError> {
    require_feasible(&red.instance, sched)?;
    let prep = Prepared::new(general)?;
    let eps = &red.epsilon;
    let base = |name: &str| -> Result<(String, u8), BipartiteError> {
        split_copy(name)
            .map(|(b, s)| (b.to_string(), s))
            .ok_or_else(|| BipartiteError::InfeasibleInput(format!("`{name}` is not a split vertex")))
    };
    let mut out = Schedule::new();
    let mut clock = Scalar::zero();
    let mut lead = Scalar::zero();
    for a in &sched.actions {
        match a {
            Action::Move { from, to, start } => {
                let ((x, i), (y, j)) = (base(from)?, base(to)?);
                if x == y {
                    lead += eps;
                    continue;
                }
                let s = (start - &lead).max(clock.clone());
                let (xi, yi) = (prep.metric.index_of(&x), prep.metric.index_of(&y));
                let (Some(xi), Some(yi)) = (xi, yi) else {
                    return Err(GraphError::UnknownVertex(x).into());
                };
                clock = &s + prep.dist(xi, yi);
                out.push(Action::Move { from: x, to: y, start: s });
                // Same-side moves pay an extra eps through the closure.
                if i == j {
                    lead += eps;
                }
            }
            Action::Serve { request, start } => {
                let r = &prep.requests[*request];
                let s = (start - &lead).max(clock.clone()).max(r.release.clone());
                clock = &s + &r.length;
                out.push(Action::Serve { request: *request, start: s });
            }
            Action::Idle { start, duration } => {
                let s = (start - &lead).max(clock.clone());
                let e = start + duration - &lead;
                if e > s {
                    let duration = &e - &s;
                    out.push(Action::Idle { start: s, duration });
                    clock = e;
                }
            }
        }
    }
    let feasible = validate_schedule(general, &out).map(|v| v.feasible).unwrap_or(false);
    if feasible {
        return Ok(out);
    }
    let compact = realize_order(general, &sched.served())?;
    require_feasible(general, &compact).map_err(|e| {
        BipartiteError::InfeasibleInput(format!("projection does not fit the original horizon: {e}"))
    })?;
    Ok(compact)
}

/// Most requests any schedule can complete in one window when every edge is
/// at least `kT/f`: `ceil(1/k)`.
pub fn per_window_capacity(k: &Scalar) -> Result<u64, BipartiteError> {
    if !k.is_positive() || k > &Scalar::one() {
        return Err(BipartiteError::BadK(k.clone()));
    }
    k.recip().ceil().try_into().map_err(|_| BipartiteError::BadK(k.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;
    use crate::oracle::optimal_offline;

    fn pair() -> Instance {
        Instance {
            vertices: vec!["a".into(), "b".into()],
            origin: "a".into(),
            edges: vec![Edge::new("a", "b", 4.into())],
            horizon: 16.into(),
            segments: 4,
            min_edge_factor: None,
            bipartition: None,
            requests: vec![Request::new("a", "b", 1.into(), 3.into())],
        }
    }

    #[test]
    fn two_vertices_become_four() {
        let red = to_bipartite(&pair(), None).unwrap();
        assert_eq!(red.instance.vertices.len(), 4);
        assert_eq!(red.instance.requests.len(), 1);
        assert_eq!(red.epsilon, Scalar::new(1, 32));
        assert_eq!(red.instance.horizon, Scalar::new(33, 2));
        assert!(validate_instance(&red.instance).is_valid(), "{}", validate_instance(&red.instance));
    }

    #[test]
    fn epsilon_bound() {
        let err = to_bipartite(&pair(), Some(&Scalar::new(1, 4))).unwrap_err();
        assert!(matches!(err, BipartiteError::EpsilonTooLarge { .. }));
        assert!(to_bipartite(&pair(), Some(&Scalar::zero())).is_err());
    }

    #[test]
    fn round_trip_single_serve() {
        let inst = pair();
        let red = to_bipartite(&inst, None).unwrap();
        let opt = optimal_offline(&inst, None).unwrap();
        let lifted = lift_schedule(&inst, &red, &opt.schedule).unwrap();
        let v = validate_schedule(&red.instance, &lifted).unwrap();
        assert!(v.feasible);
        let orig_end = validate_schedule(&inst, &opt.schedule).unwrap().completion;
        assert!(v.completion <= orig_end + Scalar::from_int(2) * &red.epsilon);
        assert_eq!(project_schedule(&inst, &red, &lifted).unwrap(), opt.schedule);
        assert_eq!(lift_schedule(&inst, &red, &Schedule::new()).unwrap(), Schedule::new());
    }

    #[test]
    fn capacity() {
        assert_eq!(per_window_capacity(&Scalar::one()).unwrap(), 1);
        assert_eq!(per_window_capacity(&Scalar::new(1, 2)).unwrap(), 2);
        assert_eq!(per_window_capacity(&Scalar::new(2, 5)).unwrap(), 3);
        assert!(per_window_capacity(&Scalar::zero()).is_err());
        assert!(per_window_capacity(&Scalar::new(3, 2)).is_err());
    }
}
