//! Exact offline optimum by depth-first branch-and-bound.
//!
//! A schedule is determined by the order in which requests are served: the
//! server drives to the next source right away and waits there for the
//! release if it is early. Arriving early never hurts in a metric, so this
//! loses no optimal schedule.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::model::{Action, GraphError, Instance, Prepared, Schedule};
use crate::scalar::Scalar;

pub const DEFAULT_SEARCH_CAP: usize = 16;
const MASK_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("TOO_LARGE: {requests} requests exceed the search cap of {cap}")]
    TooLarge { requests: usize, cap: usize },
    #[error("INVALID_INSTANCE: {0}")]
    InvalidInstance(#[from] GraphError),
    #[error("OVERFLOW: instance data does not fit the integer lattice")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub schedule: Schedule,
    pub revenue: Scalar,
    /// Served requests in order.
    pub order: Vec<usize>,
    pub horizon: Scalar,
}

/// Optimal revenue among schedules finishing by `horizon` (default `T`),
/// with the default request cap.
pub fn optimal_offline(inst: &Instance, horizon: Option<&Scalar>) -> Result<OptResult, OracleError> {
    optimal_offline_capped(inst, horizon, DEFAULT_SEARCH_CAP)
}

pub fn optimal_offline_capped(
    inst: &Instance,
    horizon: Option<&Scalar>,
    cap: usize,
) -> Result<OptResult, OracleError> {
    let n = inst.requests.len();
    if n > cap.min(MASK_BITS) {
        return Err(OracleError::TooLarge { requests: n, cap: cap.min(MASK_BITS) });
    }
    let prep = Prepared::new(inst)?;
    let horizon = horizon.cloned().unwrap_or_else(|| inst.horizon.clone());
    let lat = Lattice::new(&prep, &horizon)?;
    let mut s = BranchAndBound {
        lat: &lat,
        best_rev: -1,
        best: Vec::new(),
        path: Vec::new(),
        memo: HashMap::new(),
    };
    s.dfs(lat.origin, 0, 0, 0);
    let order: Vec<usize> = s.best.iter().map(|(r, _)| *r).collect();
    let schedule = build_schedule(&prep, &order);
    let revenue = order.iter().map(|&r| &prep.requests[r].revenue).sum();
    Ok(OptResult { schedule, revenue, order, horizon })
}

/// Integer image of the instance: times scaled by one common denominator,
/// revenues by another.
struct Lattice {
    n: usize,
    dist: Vec<i128>,
    nv: usize,
    origin: usize,
    horizon: i128,
    source: Vec<usize>,
    dest: Vec<usize>,
    release: Vec<i128>,
    length: Vec<i128>,
    revenue: Vec<i128>,
    /// Everything; reaching it ends the search.
    total: i128,
}

fn lcm_of<'a>(xs: impl Iterator<Item = &'a Scalar>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

fn scaled(x: &Scalar, den: &BigInt) -> Result<i128, OracleError> {
    let v = x.numer() * (den / x.denom());
    // Keep headroom for sums over at most 64 terms.
    v.to_i64().map(i128::from).ok_or(OracleError::Overflow)
}

impl Lattice {
    fn new(prep: &Prepared<'_>, horizon: &Scalar) -> Result<Self, OracleError> {
        let nv = prep.metric.len();
        let mut times: Vec<&Scalar> = vec![horizon];
        for i in 0..nv {
            for j in 0..nv {
                times.push(prep.dist(i, j));
            }
        }
        times.extend(prep.requests.iter().map(|r| &r.release));
        let tden = lcm_of(times.into_iter());
        let rden = lcm_of(prep.requests.iter().map(|r| &r.revenue));
        let mut dist = Vec::with_capacity(nv * nv);
        for i in 0..nv {
            for j in 0..nv {
                dist.push(scaled(prep.dist(i, j), &tden)?);
            }
        }
        let rs = &prep.requests;
        let revenue: Vec<i128> = rs.iter().map(|r| scaled(&r.revenue, &rden)).collect::<Result<_, _>>()?;
        Ok(Lattice {
            n: rs.len(),
            dist,
            nv,
            origin: prep.origin,
            horizon: scaled(horizon, &tden)?,
            source: rs.iter().map(|r| r.source).collect(),
            dest: rs.iter().map(|r| r.dest).collect(),
            release: rs.iter().map(|r| scaled(&r.release, &tden)).collect::<Result<_, _>>()?,
            length: rs.iter().map(|r| scaled(&r.length, &tden)).collect::<Result<_, _>>()?,
            total: revenue.iter().sum(),
            revenue,
        })
    }

    fn d(&self, a: usize, b: usize) -> i128 {
        self.dist[a * self.nv + b]
    }

    /// Completion time of serving `r` next from `pos` at `time`, if in time.
    fn finish(&self, pos: usize, time: i128, r: usize) -> Option<(i128, i128)> {
        let start = (time + self.d(pos, self.source[r])).max(self.release[r]);
        let end = start + self.length[r];
        (end <= self.horizon).then_some((start, end))
    }
}

struct BranchAndBound<'a> {
    lat: &'a Lattice,
    best_rev: i128,
    best: Vec<(usize, i128)>,
    path: Vec<(usize, i128)>,
    memo: HashMap<(u64, usize), i128>,
}

impl BranchAndBound<'_> {
    fn dfs(&mut self, pos: usize, time: i128, mask: u64, rev: i128) {
        if rev > self.best_rev {
            self.best_rev = rev;
            self.best = self.path.clone();
        }
        let lat = self.lat;
        let mut bound = rev;
        for r in 0..lat.n {
            if mask & (1 << r) == 0 && lat.finish(pos, time, r).is_some() {
                bound += lat.revenue[r];
            }
        }
        if bound <= self.best_rev {
            return;
        }
        match self.memo.get(&(mask, pos)) {
            Some(&t) if t <= time => return,
            _ => {
                self.memo.insert((mask, pos), time);
            }
        }
        // Earliest completion first: good incumbents turn up sooner.
        let mut next: Vec<(i128, usize, i128)> = (0..lat.n)
            .filter(|r| mask & (1 << r) == 0)
            .filter_map(|r| lat.finish(pos, time, r).map(|(start, end)| (end, r, start)))
            .collect();
        next.sort_unstable();
        for (end, r, start) in next {
            if self.best_rev == lat.total {
                return;
            }
            self.path.push((r, start));
            self.dfs(lat.dest[r], end, mask | (1 << r), rev + lat.revenue[r]);
            self.path.pop();
        }
    }
}

/// Move-then-wait schedule serving `order` as early as possible. Feasibility
/// against the horizon is not checked.
pub fn realize_order(inst: &Instance, order: &[usize]) -> Result<Schedule, GraphError> {
    Ok(build_schedule(&Prepared::new(inst)?, order))
}

fn build_schedule(prep: &Prepared<'_>, order: &[usize]) -> Schedule {
    let mut sched = Schedule::new();
    let mut pos = prep.origin;
    let mut now = Scalar::zero();
    for &id in order {
        let r = &prep.requests[id];
        if pos != r.source {
            sched.push(Action::Move {
                from: prep.metric.name(pos).to_string(),
                to: prep.metric.name(r.source).to_string(),
                start: now.clone(),
            });
            now = &now + prep.dist(pos, r.source);
        }
        if r.release > now {
            sched.push(Action::Idle { start: now.clone(), duration: &r.release - &now });
            now = r.release.clone();
        }
        sched.push(Action::Serve { request: id, start: now.clone() });
        now = &now + &r.length;
        pos = r.dest;
    }
    sched
}

/// Reference search: every service order, exact rationals, no pruning.
/// Exponential; meant for cross-checking on small instances.
pub fn exhaustive_offline(inst: &Instance, horizon: Option<&Scalar>) -> Result<OptResult, OracleError> {
    let prep = Prepared::new(inst)?;
    let horizon = horizon.cloned().unwrap_or_else(|| inst.horizon.clone());
    #[allow(clippy::too_many_arguments)]
    fn go(
        prep: &Prepared<'_>,
        horizon: &Scalar,
        pos: usize,
        now: &Scalar,
        used: &mut Vec<bool>,
        path: &mut Vec<usize>,
        rev: &Scalar,
        best: &mut (Scalar, Vec<usize>),
    ) {
        if rev > &best.0 {
            *best = (rev.clone(), path.clone());
        }
        for (i, r) in prep.requests.iter().enumerate() {
            if used[i] {
                continue;
            }
            let arrive = now + prep.dist(pos, r.source);
            let start = if arrive < r.release { r.release.clone() } else { arrive };
            let end = &start + &r.length;
            if &end > horizon {
                continue;
            }
            used[i] = true;
            path.push(i);
            go(prep, horizon, r.dest, &end, used, path, &(rev + &r.revenue), best);
            path.pop();
            used[i] = false;
        }
    }
    let mut best = (Scalar::zero(), Vec::new());
    let mut used = vec![false; prep.requests.len()];
    go(&prep, &horizon, prep.origin, &Scalar::zero(), &mut used, &mut Vec::new(), &Scalar::zero(), &mut best);
    let schedule = build_schedule(&prep, &best.1);
    Ok(OptResult { schedule, revenue: best.0, order: best.1, horizon })
}
