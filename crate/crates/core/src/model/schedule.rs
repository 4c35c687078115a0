use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::clock::SegmentClock;
use super::graph::GraphError;
use super::instance::{Instance, Prepared};
use crate::scalar::Scalar;

/// One atomic server action. Durations are implied by the instance metric for
/// moves and serves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Action {
    Move {
        from: String,
        to: String,
        start: Scalar,
    },
    Serve {
        request: usize,
        start: Scalar,
    },
    Idle {
        start: Scalar,
        duration: Scalar,
    },
}

impl Action {
    pub fn start(&self) -> &Scalar {
        match self {
            Action::Move { start, .. }
            | Action::Serve { start, .. }
            | Action::Idle { start, .. } => start,
        }
    }

    fn shifted(&self, delta: &Scalar) -> Action {
        let mut a = self.clone();
        match &mut a {
            Action::Move { start, .. }
            | Action::Serve { start, .. }
            | Action::Idle { start, .. } => *start = &*start + delta,
        }
        a
    }
}

/// A timed action sequence starting at the origin.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub actions: Vec<Action>,
}

impl Schedule {
    pub fn new() -> Self {
        Schedule::default()
    }

    pub fn push(&mut self, a: Action) {
        self.actions.push(a);
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Requests served, in order.
    pub fn served(&self) -> Vec<usize> {
        self.actions
            .iter()
            .filter_map(|a| match a {
                Action::Serve { request, .. } => Some(*request),
                _ => None,
            })
            .collect()
    }

    pub fn shift(&self, delta: &Scalar) -> Schedule {
        Schedule {
            actions: self.actions.iter().map(|a| a.shifted(delta)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScheduleRule {
    /// Action does not start where the previous one ended.
    LocationMismatch,
    /// Action starts before the previous one ended.
    TimeOverlap,
    NegativeStart,
    RequestNotReleased,
    DuplicateServe,
    /// Action ends after `T`.
    ExceedsHorizon,
    /// Move to the current vertex or idle without positive duration.
    DegenerateAction,
}

impl fmt::Display for ScheduleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleViolation {
    pub action: usize,
    pub rule: ScheduleRule,
}

/// Outcome of replaying a schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleVerdict {
    pub feasible: bool,
    pub violation: Option<ScheduleViolation>,
    pub revenue: Scalar,
    pub completion: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("UNKNOWN_REQUEST: action {action} references request {request}")]
    UnknownRequest { action: usize, request: usize },
    #[error("UNKNOWN_VERTEX: action {action} references `{vertex}`")]
    UnknownVertex { action: usize, vertex: String },
    #[error("INVALID_INSTANCE: {0}")]
    InvalidInstance(#[from] GraphError),
}

/// A served request with its completion time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub request: usize,
    pub start: Scalar,
    pub end: Scalar,
}

struct Replay {
    verdict: ScheduleVerdict,
    completions: Vec<Completion>,
}

fn replay(
    prep: &Prepared<'_>,
    sched: &Schedule,
    horizon: &Scalar,
) -> Result<Replay, ScheduleError> {
    let mut pos = prep.origin;
    let mut clock = Scalar::zero();
    let mut served = BTreeSet::new();
    let mut revenue = Scalar::zero();
    let mut completions = Vec::new();
    let mut violation = None;

    // Dangling references are reported as errors even after a violation.
    for (i, a) in sched.actions.iter().enumerate() {
        match a {
            Action::Move { from, to, .. } => {
                for v in [from, to] {
                    if prep.metric.index_of(v).is_none() {
                        return Err(ScheduleError::UnknownVertex {
                            action: i,
                            vertex: v.clone(),
                        });
                    }
                }
            }
            Action::Serve { request, .. } if *request >= prep.requests.len() => {
                return Err(ScheduleError::UnknownRequest {
                    action: i,
                    request: *request,
                });
            }
            _ => {}
        }
    }

    for (i, a) in sched.actions.iter().enumerate() {
        let fail = |rule| Some(ScheduleViolation { action: i, rule });
        let start = a.start();
        if start.is_negative() {
            violation = fail(ScheduleRule::NegativeStart);
            break;
        }
        if start < &clock {
            violation = fail(ScheduleRule::TimeOverlap);
            break;
        }
        let end = match a {
            Action::Move { from, to, start } => {
                let u = prep.metric.index_of(from).expect("checked");
                let v = prep.metric.index_of(to).expect("checked");
                if u != pos {
                    violation = fail(ScheduleRule::LocationMismatch);
                    break;
                }
                if u == v {
                    violation = fail(ScheduleRule::DegenerateAction);
                    break;
                }
                pos = v;
                start + prep.dist(u, v)
            }
            Action::Serve { request, start } => {
                let r = &prep.requests[*request];
                if r.source != pos {
                    violation = fail(ScheduleRule::LocationMismatch);
                    break;
                }
                if start < &r.release {
                    violation = fail(ScheduleRule::RequestNotReleased);
                    break;
                }
                if !served.insert(*request) {
                    violation = fail(ScheduleRule::DuplicateServe);
                    break;
                }
                pos = r.dest;
                let end = start + &r.length;
                revenue += &r.revenue;
                completions.push(Completion {
                    request: *request,
                    start: start.clone(),
                    end: end.clone(),
                });
                end
            }
            Action::Idle { start, duration } => {
                if !duration.is_positive() {
                    violation = fail(ScheduleRule::DegenerateAction);
                    break;
                }
                start + duration
            }
        };
        if &end > horizon {
            violation = fail(ScheduleRule::ExceedsHorizon);
            break;
        }
        clock = end;
    }

    let feasible = violation.is_none();
    if !feasible {
        revenue = Scalar::zero();
        completions.clear();
    }
    Ok(Replay {
        verdict: ScheduleVerdict {
            feasible,
            violation,
            revenue,
            completion: clock,
        },
        completions,
    })
}

/// Replays `sched` against `inst` and reports the first broken rule.
pub fn validate_schedule(
    inst: &Instance,
    sched: &Schedule,
) -> Result<ScheduleVerdict, ScheduleError> {
    let prep = Prepared::new(inst)?;
    Ok(replay(&prep, sched, &inst.horizon)?.verdict)
}

/// Same as [`validate_schedule`] but against an earlier deadline.
pub fn validate_schedule_until(
    inst: &Instance,
    sched: &Schedule,
    horizon: &Scalar,
) -> Result<ScheduleVerdict, ScheduleError> {
    let prep = Prepared::new(inst)?;
    Ok(replay(&prep, sched, horizon)?.verdict)
}

/// Revenue attributed to segments and windows by serve completion time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevenueProfile {
    pub by_segment: Vec<Scalar>,
    pub by_window: Vec<Scalar>,
    pub total: Scalar,
    /// Requests completed in each segment, in serve order.
    pub requests_by_segment: Vec<Vec<usize>>,
}

impl RevenueProfile {
    pub fn segment(&self, j: u32) -> &Scalar {
        &self.by_segment[j as usize - 1]
    }

    pub fn window(&self, i: u32) -> &Scalar {
        &self.by_window[i as usize - 1]
    }

    /// Requests completed in window `i`.
    pub fn window_requests(&self, i: u32) -> Vec<usize> {
        let a = 2 * i as usize - 2;
        let mut out = self.requests_by_segment[a].clone();
        if let Some(second) = self.requests_by_segment.get(a + 1) {
            out.extend(second);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("INFEASIBLE_SCHEDULE: {0:?}")]
    InfeasibleSchedule(Option<ScheduleViolation>),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

impl From<GraphError> for ProfileError {
    fn from(e: GraphError) -> Self {
        ProfileError::Schedule(ScheduleError::InvalidInstance(e))
    }
}

/// Completion records of a feasible schedule.
pub fn completions(inst: &Instance, sched: &Schedule) -> Result<Vec<Completion>, ProfileError> {
    let prep = Prepared::new(inst)?;
    let r = replay(&prep, sched, &inst.horizon)?;
    if !r.verdict.feasible {
        return Err(ProfileError::InfeasibleSchedule(r.verdict.violation));
    }
    Ok(r.completions)
}

pub fn revenue_profile(inst: &Instance, sched: &Schedule) -> Result<RevenueProfile, ProfileError> {
    let done = completions(inst, sched)?;
    Ok(profile_from_completions(inst, &done))
}

pub(crate) fn profile_from_completions(inst: &Instance, done: &[Completion]) -> RevenueProfile {
    let clock = SegmentClock::new(inst.horizon.clone(), inst.segments);
    let f = inst.segments as usize;
    let mut by_segment = vec![Scalar::zero(); f];
    let mut requests_by_segment = vec![Vec::new(); f];
    for c in done {
        let j = clock
            .segment_of(&c.end)
            .expect("feasible completion lies in (0, T]") as usize;
        by_segment[j - 1] += &inst.requests[c.request].p;
        requests_by_segment[j - 1].push(c.request);
    }
    let by_window = (1..=clock.windows())
        .map(|i| {
            let (a, b) = clock.window_segments(i);
            let mut w = by_segment[a as usize - 1].clone();
            if let Some(b) = b {
                w += &by_segment[b as usize - 1];
            }
            w
        })
        .collect();
    let total = by_segment.iter().sum();
    RevenueProfile {
        by_segment,
        by_window,
        total,
        requests_by_segment,
    }
}
