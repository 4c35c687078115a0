//! Segmented Best Path.
//!
//! Time is cut into `f` segments of length `T/f`. At the start of every
//! planning segment the server picks the richest chain of released requests
//! that fits in one segment, drives to its first source, and serves the chain
//! during the following segment. With odd `f` the first segment is skipped.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::model::{
    revenue_profile, Action, GraphError, Instance, MetricGraph, Phase, Prepared, ProfileError, RevenueProfile,
    Schedule, SegmentClock,
};
use crate::online::{Command, OnlinePolicy, View};
use crate::scalar::Scalar;

/// A released, unserved request seen as a directed edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxEdge {
    pub request: usize,
    pub source: usize,
    pub dest: usize,
    pub length: Scalar,
    pub revenue: Scalar,
}

/// Outstanding requests at one decision instant over the closed metric.
#[derive(Debug, Clone)]
pub struct AuxiliaryGraph<'m> {
    metric: &'m MetricGraph,
    edges: Vec<AuxEdge>,
}

impl<'m> AuxiliaryGraph<'m> {
    /// Edges are kept in request-id order.
    pub fn new(metric: &'m MetricGraph, mut edges: Vec<AuxEdge>) -> Self {
        edges.sort_by_key(|e| e.request);
        AuxiliaryGraph { metric, edges }
    }

    /// Requests released by `instant` and not in `served`.
    pub fn at_instant(prep: &'m Prepared<'_>, served: &BTreeSet<usize>, instant: &Scalar) -> Self {
        let edges = prep
            .requests
            .iter()
            .enumerate()
            .filter(|(i, r)| &r.release <= instant && !served.contains(i))
            .map(|(i, r)| AuxEdge {
                request: i,
                source: r.source,
                dest: r.dest,
                length: r.length.clone(),
                revenue: r.revenue.clone(),
            })
            .collect();
        AuxiliaryGraph::new(&prep.metric, edges)
    }

    pub fn edges(&self) -> &[AuxEdge] {
        &self.edges
    }

    pub fn metric(&self) -> &MetricGraph {
        self.metric
    }
}

/// An ordered request chain with its connecting empty moves.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ServePlan {
    pub requests: Vec<usize>,
    pub duration: Scalar,
    pub revenue: Scalar,
}

impl ServePlan {
    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }
}

/// Plan preference: more revenue, then fewer requests, then the
/// lexicographically smaller id sequence. `Greater` means `a` is preferred.
pub fn compare_plans(a: &ServePlan, b: &ServePlan) -> Ordering {
    a.revenue
        .cmp(&b.revenue)
        .then_with(|| b.requests.len().cmp(&a.requests.len()))
        .then_with(|| b.requests.cmp(&a.requests))
}

struct Search<'a> {
    aux: &'a AuxiliaryGraph<'a>,
    budget: &'a Scalar,
    used: Vec<bool>,
    chain: Vec<usize>,
    best: ServePlan,
}

impl Search<'_> {
    fn extend(&mut self, at: usize, elapsed: &Scalar, revenue: &Scalar) {
        let candidate = ServePlan {
            requests: self.chain.iter().map(|&i| self.aux.edges[i].request).collect(),
            duration: elapsed.clone(),
            revenue: revenue.clone(),
        };
        if compare_plans(&candidate, &self.best) == Ordering::Greater {
            self.best = candidate;
        }
        let left = self.budget - elapsed;
        let reachable: Scalar = (0..self.aux.edges.len())
            .filter(|&i| !self.used[i] && self.aux.edges[i].length <= left)
            .map(|i| &self.aux.edges[i].revenue)
            .sum();
        if revenue + &reachable < self.best.revenue {
            return;
        }
        for i in 0..self.aux.edges.len() {
            if self.used[i] {
                continue;
            }
            let e = &self.aux.edges[i];
            let step = self.aux.metric.dist(at, e.source) + &e.length;
            if step > left {
                continue;
            }
            self.used[i] = true;
            self.chain.push(i);
            let t = elapsed + &step;
            let r = revenue + &e.revenue;
            self.extend(e.dest, &t, &r);
            self.chain.pop();
            self.used[i] = false;
        }
    }
}

/// Best chain of outstanding requests whose serve times plus connecting moves
/// fit in `segment` time. Exhaustive over all chains; chains may revisit
/// vertices.
pub fn max_revenue_request_set(aux: &AuxiliaryGraph<'_>, segment: &Scalar) -> ServePlan {
    let mut s = Search {
        aux,
        budget: segment,
        used: vec![false; aux.edges.len()],
        chain: Vec::new(),
        best: ServePlan::default(),
    };
    for i in 0..aux.edges.len() {
        let e = &aux.edges[i];
        if &e.length > segment {
            continue;
        }
        s.used[i] = true;
        s.chain.push(i);
        s.extend(e.dest, &e.length.clone(), &e.revenue.clone());
        s.chain.pop();
        s.used[i] = false;
    }
    s.best
}

/// One planning decision of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub plan_segment: u32,
    pub instant: Scalar,
    pub plan: ServePlan,
}

#[derive(Debug, Clone)]
pub struct SbpRun {
    pub schedule: Schedule,
    pub profile: RevenueProfile,
    pub plans: Vec<PlanRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SbpError {
    #[error("INVALID_INSTANCE: {0}")]
    InvalidInstance(#[from] GraphError),
    #[error("INVALID_INSTANCE: {0}")]
    Profile(#[from] ProfileError),
}

/// Replays the algorithm on a fully specified instance.
pub fn run_sbp(inst: &Instance) -> Result<SbpRun, SbpError> {
    let prep = Prepared::new(inst)?;
    let clock = SegmentClock::new(inst.horizon.clone(), inst.segments);
    let mut sched = Schedule::new();
    let mut served = BTreeSet::new();
    let mut plans = Vec::new();
    let mut pos = prep.origin;
    let mut now = Scalar::zero();

    let idle_until = |sched: &mut Schedule, now: &mut Scalar, until: &Scalar| {
        if until > now {
            sched.push(Action::Idle { start: now.clone(), duration: until - &*now });
            *now = until.clone();
        }
    };

    for phase in clock.phases() {
        idle_until(&mut sched, &mut now, &phase.plan_start);
        let aux = AuxiliaryGraph::at_instant(&prep, &served, &phase.plan_start);
        let plan = max_revenue_request_set(&aux, clock.segment_length());
        plans.push(PlanRecord { plan_segment: phase.plan_segment, instant: phase.plan_start.clone(), plan: plan.clone() });
        if plan.is_empty() {
            continue;
        }
        for (k, &id) in plan.requests.iter().enumerate() {
            let r = &prep.requests[id];
            if pos != r.source {
                sched.push(Action::Move {
                    from: prep.metric.name(pos).to_string(),
                    to: prep.metric.name(r.source).to_string(),
                    start: now.clone(),
                });
                now = &now + prep.dist(pos, r.source);
            }
            if k == 0 {
                idle_until(&mut sched, &mut now, &phase.serve_start);
            }
            sched.push(Action::Serve { request: id, start: now.clone() });
            now = &now + &r.length;
            pos = r.dest;
            served.insert(id);
        }
    }
    idle_until(&mut sched, &mut now, &inst.horizon);
    let profile = revenue_profile(inst, &sched)?;
    Ok(SbpRun { schedule: sched, profile, plans })
}

/// The same algorithm as an online policy.
#[derive(Debug, Clone, Default)]
pub struct SbpPolicy {
    next_phase: usize,
    active: Option<(Phase, VecDeque<usize>)>,
}

impl SbpPolicy {
    pub fn new() -> Self {
        SbpPolicy::default()
    }

    fn plan(view: &View<'_>) -> Vec<usize> {
        // Rebuild a local metric over what the server can see.
        let vis: Vec<String> = view.visible_vertices().into_iter().collect();
        let open = view.open_requests();
        let idx = |v: &str| vis.binary_search_by(|x| x.as_str().cmp(v)).expect("visible");
        let n = vis.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push(crate::model::Edge::new(vis[i].clone(), vis[j].clone(), view.dist(&vis[i], &vis[j])));
            }
        }
        let metric = crate::model::metric_closure(&vis, &edges).expect("visible subgraph is complete");
        let aux_edges = open
            .iter()
            .map(|&id| {
                let r = view.request(id);
                AuxEdge {
                    request: id,
                    source: idx(&r.s),
                    dest: idx(&r.d),
                    length: view.dist(&r.s, &r.d),
                    revenue: r.p.clone(),
                }
            })
            .collect();
        let aux = AuxiliaryGraph::new(&metric, aux_edges);
        max_revenue_request_set(&aux, view.clock().segment_length()).requests
    }
}

impl OnlinePolicy for SbpPolicy {
    fn name(&self) -> &str {
        "sbp"
    }

    fn decide(&mut self, view: &View<'_>) -> Command {
        let clock = view.clock();
        let phases = clock.phases();
        let now = view.now();
        while self.next_phase < phases.len() && &phases[self.next_phase].plan_start < now {
            self.next_phase += 1;
        }
        if self.next_phase < phases.len() && &phases[self.next_phase].plan_start == now {
            let phase = phases[self.next_phase].clone();
            self.next_phase += 1;
            let chain: VecDeque<usize> = Self::plan(view).into();
            self.active = (!chain.is_empty()).then_some((phase, chain));
        }
        if let Some((phase, chain)) = &mut self.active {
            let id = *chain.front().expect("non-empty");
            let src = view.request(id).s.clone();
            if src != view.position() {
                return Command::Move { to: src };
            }
            if now < &phase.serve_start {
                return Command::Idle { until: phase.serve_start.clone() };
            }
            chain.pop_front();
            if chain.is_empty() {
                self.active = None;
            }
            return Command::Serve { request: id };
        }
        match phases.get(self.next_phase) {
            Some(p) => Command::Idle { until: p.plan_start.clone() },
            None if now < view.horizon() => Command::Idle { until: view.horizon().clone() },
            None => Command::Wait,
        }
    }

    fn box_clone(&self) -> Box<dyn OnlinePolicy> {
        Box::new(self.clone())
    }
}
