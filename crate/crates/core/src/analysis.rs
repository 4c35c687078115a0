//! Window bookkeeping and instance-wise checks of the competitive bounds.
//!
//! The proof-device schedules here (the one-window shift, the echo of the
//! optimum, the greedy singleton run) are window-indexed request sets, not
//! feasible schedules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bipartite::per_window_capacity;
use crate::model::{
    revenue_profile, validate_instance, Instance, Prepared, ProfileError, RevenueProfile, Schedule, SegmentClock,
    ValidationReport,
};
use crate::oracle::{optimal_offline_capped, OptResult, OracleError, DEFAULT_SEARCH_CAP};
use crate::sbp::{run_sbp, SbpError, SbpRun};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("HYPOTHESIS_VIOLATED: {0}")]
    HypothesisViolated(String),
    #[error("INCONSISTENT_INPUTS: {0}")]
    InconsistentInputs(String),
    #[error("INVALID_INSTANCE: {0}")]
    InvalidInstance(ValidationReport),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sbp(#[from] SbpError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

pub type WindowSets = Vec<BTreeSet<usize>>;

fn clock_of(inst: &Instance) -> SegmentClock {
    SegmentClock::new(inst.horizon.clone(), inst.segments)
}

fn revenue_of(inst: &Instance, set: &BTreeSet<usize>) -> Scalar {
    set.iter().map(|&r| &inst.requests[r].p).sum()
}

/// Requests completed in each window, from a revenue profile.
pub fn window_sets(profile: &RevenueProfile) -> WindowSets {
    let f = profile.requests_by_segment.len();
    (0..f.div_ceil(2))
        .map(|i| {
            let mut s: BTreeSet<usize> = profile.requests_by_segment[2 * i].iter().copied().collect();
            if let Some(b) = profile.requests_by_segment.get(2 * i + 1) {
                s.extend(b);
            }
            s
        })
        .collect()
}

/// Window `i` of the result is window `i+1` of the input; the first input
/// window is dropped.
pub fn shift_one_window(windows: &[BTreeSet<usize>]) -> WindowSets {
    windows.iter().skip(1).cloned().collect()
}

/// Cells of one window of the decomposition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCells {
    /// The optimum's richer segment of the window (earlier one on ties).
    pub s_star: BTreeSet<usize>,
    /// The optimum's other segment.
    pub j_star: BTreeSet<usize>,
    /// Shifted-run window set.
    pub s_prime: BTreeSet<usize>,
    pub a: BTreeSet<usize>,
    pub x_star: BTreeSet<usize>,
    pub y_star: BTreeSet<usize>,
    pub x: BTreeSet<usize>,
    pub y: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDecomposition {
    /// Windows `1..=ceil(f/2)-1`.
    pub windows: Vec<WindowCells>,
}

impl WindowDecomposition {
    /// `(sum |X*_w|, sum |Y_w|)` over `w <= i` for every prefix `i`.
    pub fn prefix_counts(&self) -> Vec<(usize, usize)> {
        let (mut xs, mut ys) = (0, 0);
        self.windows
            .iter()
            .map(|c| {
                xs += c.x_star.len();
                ys += c.y.len();
                (xs, ys)
            })
            .collect()
    }
}

fn disjoint_family(name: &str, sets: &[&BTreeSet<usize>]) -> Result<(), AnalysisError> {
    let mut seen = BTreeSet::new();
    for s in sets {
        for r in *s {
            if !seen.insert(*r) {
                return Err(AnalysisError::InconsistentInputs(format!("request {r} appears twice in {name}")));
            }
        }
    }
    Ok(())
}

pub fn decompose_windows(
    inst: &Instance,
    opt: &RevenueProfile,
    shifted: &[BTreeSet<usize>],
) -> Result<WindowDecomposition, AnalysisError> {
    let segs: Vec<BTreeSet<usize>> =
        opt.requests_by_segment.iter().map(|s| s.iter().copied().collect()).collect();
    disjoint_family("the optimum", &segs.iter().collect::<Vec<_>>())?;
    disjoint_family("the shifted run", &shifted.iter().collect::<Vec<_>>())?;

    let m = (inst.segments as usize).div_ceil(2).saturating_sub(1);
    let empty = BTreeSet::new();
    let mut cells: Vec<WindowCells> = Vec::with_capacity(m);
    for i in 0..m {
        let (first, second) = (&segs[2 * i], &segs[2 * i + 1]);
        let (s_star, j_star) = if revenue_of(inst, second) > revenue_of(inst, first) {
            (second.clone(), first.clone())
        } else {
            (first.clone(), second.clone())
        };
        cells.push(WindowCells {
            s_star,
            j_star,
            s_prime: shifted.get(i).unwrap_or(&empty).clone(),
            ..Default::default()
        });
    }
    let mut prime_before = BTreeSet::new();
    let mut star_before = BTreeSet::new();
    for c in &mut cells {
        c.a = c.s_star.intersection(&c.s_prime).copied().collect();
        c.x_star = c.s_star.intersection(&prime_before).copied().collect();
        c.y_star = c.s_star.iter().filter(|r| !prime_before.contains(*r) && !c.s_prime.contains(*r)).copied().collect();
        c.x = c.s_prime.intersection(&star_before).copied().collect();
        c.y = c.s_prime.iter().filter(|r| !star_before.contains(*r) && !c.s_star.contains(*r)).copied().collect();
        prime_before.extend(c.s_prime.iter().copied());
        star_before.extend(c.s_star.iter().copied());
    }
    Ok(WindowDecomposition { windows: cells })
}

/// Highest-revenue member of a set, lowest id on ties.
fn best_of(inst: &Instance, set: &BTreeSet<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for &r in set {
        if best.is_none_or(|b| inst.requests[r].p > inst.requests[b].p) {
            best = Some(r);
        }
    }
    best
}

/// Window 1 empty; window `i` holds the best request the optimum completed
/// in window `i-1`.
pub fn opt_echo_schedule(inst: &Instance, opt: &Schedule) -> Result<WindowSets, AnalysisError> {
    let windows = window_sets(&revenue_profile(inst, opt)?);
    let mut out = vec![BTreeSet::new(); windows.len()];
    for i in 1..windows.len() {
        if let Some(r) = best_of(inst, &windows[i - 1]) {
            out[i].insert(r);
        }
    }
    Ok(out)
}

/// One request per window, chosen at the window start: the highest-revenue
/// request released and unserved by then that the server can reach in the
/// first segment and serve in the second. A trailing one-segment window
/// must fit both in its single segment.
pub fn greedy_singleton_schedule(inst: &Instance) -> Result<WindowSets, AnalysisError> {
    let report = validate_instance(inst);
    if !report.is_valid() {
        return Err(AnalysisError::InvalidInstance(report));
    }
    let prep = Prepared::new(inst).map_err(|e| AnalysisError::InconsistentInputs(e.to_string()))?;
    let clock = clock_of(inst);
    let seg = clock.segment_length();
    let mut out = vec![BTreeSet::new(); clock.windows() as usize];
    let mut served = BTreeSet::new();
    let mut pos = prep.origin;
    for (i, slot) in out.iter_mut().enumerate() {
        let start = clock.window_start(i as u32 + 1);
        let single = clock.window_segments(i as u32 + 1).1.is_none();
        let fits = |r: usize| {
            let (hop, len) = (prep.dist(pos, prep.requests[r].source), &prep.requests[r].length);
            if single { &(hop + len) <= seg } else { hop <= seg && len <= seg }
        };
        let avail: BTreeSet<usize> = (0..inst.requests.len())
            .filter(|&r| !served.contains(&r) && prep.requests[r].release <= start && fits(r))
            .collect();
        if let Some(r) = best_of(inst, &avail) {
            served.insert(r);
            slot.insert(r);
            pos = prep.requests[r].dest;
        }
    }
    Ok(out)
}

/// Revenues of all requests in a window-set sequence, descending, padded
/// with zeros to `len`.
fn sorted_revenues(inst: &Instance, sets: &[BTreeSet<usize>], len: usize) -> Vec<Scalar> {
    let mut v: Vec<Scalar> = sets.iter().flatten().map(|&r| inst.requests[r].p.clone()).collect();
    v.sort_by(|a, b| b.cmp(a));
    v.resize(len.max(v.len()), Scalar::zero());
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BoundId {
    Thm4,
    Thm6,
    Thm7,
    Thm8,
    Lem3,
    Lem8,
    Lem9,
}

impl BoundId {
    pub const ALL: [BoundId; 7] =
        [BoundId::Thm4, BoundId::Thm6, BoundId::Thm7, BoundId::Thm8, BoundId::Lem3, BoundId::Lem8, BoundId::Lem9];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::Thm4 => "THM4",
            BoundId::Thm6 => "THM6",
            BoundId::Thm7 => "THM7",
            BoundId::Thm8 => "THM8",
            BoundId::Lem3 => "LEM3",
            BoundId::Lem8 => "LEM8",
            BoundId::Lem9 => "LEM9",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown bound `{s}`"))
    }
}

/// One inequality `lhs <= rhs` evaluated exactly on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: BoundId,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub slack: Scalar,
    pub holds: bool,
    /// Constituents of both sides.
    pub terms: BTreeMap<String, Scalar>,
}

impl BoundReport {
    fn new(bound: BoundId, lhs: Scalar, rhs: Scalar, terms: BTreeMap<String, Scalar>) -> Self {
        let slack = &rhs - &lhs;
        BoundReport { bound, holds: !slack.is_negative(), lhs, rhs, slack, terms }
    }

    pub const CSV_HEADER: [&'static str; 6] = ["bound", "instance", "lhs", "rhs", "slack", "holds"];

    pub fn csv_record(&self, instance_id: &str) -> [String; 6] {
        [
            self.bound.to_string(),
            instance_id.to_string(),
            self.lhs.to_string(),
            self.rhs.to_string(),
            self.slack.to_string(),
            self.holds.to_string(),
        ]
    }
}

fn terms<const N: usize>(pairs: [(&str, Scalar); N]) -> BTreeMap<String, Scalar> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Common revenue when all requests share one; zero for an empty list.
fn uniform_p(inst: &Instance) -> Option<Scalar> {
    if inst.requests.is_empty() {
        Some(Scalar::zero())
    } else {
        inst.uniform_revenue()
    }
}

/// Checks a bound's hypotheses without running anything.
pub fn check_hypotheses(inst: &Instance, bound: BoundId) -> Result<(), AnalysisError> {
    let need_uniform = || {
        uniform_p(inst)
            .map(|_| ())
            .ok_or_else(|| AnalysisError::HypothesisViolated(format!("{bound} needs uniform revenues")))
    };
    let need_bipartite = || {
        if inst.bipartition.is_none() || inst.min_edge_factor.is_none() {
            return Err(AnalysisError::HypothesisViolated(format!(
                "{bound} needs a bipartite instance with a minimum edge factor k"
            )));
        }
        Ok(())
    };
    match bound {
        BoundId::Thm6 => need_uniform(),
        BoundId::Thm7 => need_bipartite().and_then(|_| need_uniform()),
        BoundId::Thm8 => need_bipartite(),
        _ => Ok(()),
    }
}

/// Everything the checks need about one instance, computed once.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub instance: Instance,
    pub sbp: SbpRun,
    pub opt: OptResult,
    pub opt_profile: RevenueProfile,
}

/// Everything needed to replay a failed check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub instance: Instance,
    pub sbp_schedule: Schedule,
    pub opt_schedule: Schedule,
    pub report: BoundReport,
}

impl Evaluation {
    pub fn new(inst: &Instance) -> Result<Self, AnalysisError> {
        Self::with_cap(inst, DEFAULT_SEARCH_CAP)
    }

    pub fn with_cap(inst: &Instance, cap: usize) -> Result<Self, AnalysisError> {
        let report = validate_instance(inst);
        if !report.is_valid() {
            return Err(AnalysisError::InvalidInstance(report));
        }
        let sbp = run_sbp(inst)?;
        let opt = optimal_offline_capped(inst, None, cap)?;
        let opt_profile = revenue_profile(inst, &opt.schedule)?;
        Ok(Evaluation { instance: inst.clone(), sbp, opt, opt_profile })
    }

    fn mu(&self) -> usize {
        (self.instance.segments as usize).div_ceil(2)
    }

    fn capacity(&self) -> Result<Scalar, AnalysisError> {
        let k = self.instance.min_edge_factor.as_ref().expect("hypothesis checked");
        let r = per_window_capacity(k).map_err(|e| AnalysisError::HypothesisViolated(e.to_string()))?;
        Ok(Scalar::from_int(r as i64))
    }

    pub fn check(&self, bound: BoundId) -> Result<BoundReport, AnalysisError> {
        check_hypotheses(&self.instance, bound)?;
        let inst = &self.instance;
        let f = inst.segments;
        let sbp = self.sbp.profile.total.clone();
        let opt = self.opt.revenue.clone();
        let report = match bound {
            BoundId::Thm4 | BoundId::Thm6 => {
                let c = self.opt_profile.segment(f - 1) + self.opt_profile.segment(f);
                let (mult, extra) = if bound == BoundId::Thm4 {
                    (5, Scalar::zero())
                } else {
                    let p = uniform_p(inst).expect("hypothesis checked");
                    (4, Scalar::from_int(2 * self.mu() as i64) * p)
                };
                let rhs = Scalar::from_int(mult) * &sbp + &extra + &c;
                BoundReport::new(bound, opt.clone(), rhs, terms([("sbp", sbp), ("opt", opt), ("c", c), ("additive", extra)]))
            }
            BoundId::Thm7 => {
                let r = self.capacity()?;
                let p = uniform_p(inst).expect("hypothesis checked");
                let rhs = &r * &sbp + &r * &p;
                BoundReport::new(bound, opt.clone(), rhs, terms([("sbp", sbp), ("opt", opt), ("r", r), ("p", p)]))
            }
            BoundId::Thm8 => {
                let r = self.capacity()?;
                let c = self.opt_profile.window(self.mu() as u32).clone();
                let rhs = &r * &sbp + &c;
                BoundReport::new(bound, opt.clone(), rhs, terms([("sbp", sbp), ("opt", opt), ("r", r), ("c", c)]))
            }
            BoundId::Lem3 => {
                let shifted = shift_one_window(&window_sets(&self.sbp.profile));
                let dec = decompose_windows(inst, &self.opt_profile, &shifted)?;
                let prefixes = dec.prefix_counts();
                let worst = prefixes
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, (x, y))| *y as i64 - *x as i64)
                    .map(|(i, (x, y))| (i + 1, *x, *y))
                    .unwrap_or((0, 0, 0));
                BoundReport::new(
                    bound,
                    Scalar::from_int(worst.1 as i64),
                    Scalar::from_int(worst.2 as i64),
                    terms([("prefix", Scalar::from_int(worst.0 as i64)), ("windows", Scalar::from_int(prefixes.len() as i64))]),
                )
            }
            BoundId::Lem8 => {
                let echo = opt_echo_schedule(inst, &self.opt.schedule)?;
                let greedy = greedy_singleton_schedule(inst)?;
                let n = self.mu();
                let o1 = sorted_revenues(inst, &echo, n);
                let o2 = sorted_revenues(inst, &greedy, n);
                let len = o1.len().max(o2.len());
                let at = |v: &[Scalar], z: usize| v.get(z).cloned().unwrap_or_else(Scalar::zero);
                let z = (0..len).min_by_key(|&z| at(&o2, z) - at(&o1, z)).unwrap_or(0);
                BoundReport::new(
                    bound,
                    at(&o1, z),
                    at(&o2, z),
                    terms([
                        ("z", Scalar::from_int(z as i64 + 1)),
                        ("echo_total", o1.iter().sum()),
                        ("greedy_total", o2.iter().sum()),
                    ]),
                )
            }
            BoundId::Lem9 => {
                let greedy = greedy_singleton_schedule(inst)?;
                let g: Scalar = greedy.iter().map(|s| revenue_of(inst, s)).sum();
                BoundReport::new(bound, g.clone(), sbp.clone(), terms([("greedy", g), ("sbp", sbp)]))
            }
        };
        Ok(report)
    }

    pub fn counterexample(&self, report: &BoundReport) -> Counterexample {
        Counterexample {
            instance: self.instance.clone(),
            sbp_schedule: self.sbp.schedule.clone(),
            opt_schedule: self.opt.schedule.clone(),
            report: report.clone(),
        }
    }
}

/// Evaluates one bound on one instance, running both the online algorithm
/// and the exact optimum.
pub fn check_bound(inst: &Instance, bound: BoundId) -> Result<BoundReport, AnalysisError> {
    check_hypotheses(inst, bound)?;
    Evaluation::new(inst)?.check(bound)
}
