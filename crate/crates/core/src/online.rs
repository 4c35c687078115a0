//! Event-driven simulation of an online policy against a (possibly adaptive)
//! request source.
//!
//! The engine owns the clock. At every decision instant the policy sees only
//! what has been released so far and commits to one atomic action; moves and
//! serves always run to completion.

use std::collections::BTreeSet;

use crate::model::{
    Action, GraphError, Instance, MetricGraph, Request, Schedule, SegmentClock,
};
use crate::scalar::Scalar;

/// What a policy may ask the server to do next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Move { to: String },
    Serve { request: usize },
    /// Stay put until the given instant.
    Idle { until: Scalar },
    /// Stay put until something happens (a release, a segment boundary).
    Wait,
}

pub trait OnlinePolicy {
    fn name(&self) -> &str;
    fn decide(&mut self, view: &View<'_>) -> Command;
    fn box_clone(&self) -> Box<dyn OnlinePolicy>;
}

impl Clone for Box<dyn OnlinePolicy> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// Never moves.
#[derive(Debug, Clone, Default)]
pub struct IdlePolicy;

impl OnlinePolicy for IdlePolicy {
    fn name(&self) -> &str {
        "idle"
    }

    fn decide(&mut self, _view: &View<'_>) -> Command {
        Command::Wait
    }

    fn box_clone(&self) -> Box<dyn OnlinePolicy> {
        Box::new(self.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("ILLEGAL_COMMAND: policy `{policy}` at time {at}: {reason}")]
    IllegalCommand { policy: String, at: Scalar, reason: String },
    #[error("CAUSALITY: request released at {release} decided at {at}")]
    Causality { at: Scalar, release: Scalar },
    #[error("INVALID_INSTANCE: {0}")]
    InvalidInstance(#[from] GraphError),
    #[error("ADVERSARY: {0}")]
    Adversary(String),
    #[error("STEP_LIMIT: simulation exceeded {0} decisions")]
    StepLimit(usize),
}

/// Read-only snapshot handed to the policy.
pub struct View<'a> {
    engine: &'a Engine,
}

impl<'a> View<'a> {
    pub fn now(&self) -> &Scalar {
        &self.engine.now
    }

    pub fn position(&self) -> &str {
        &self.engine.position
    }

    pub fn origin(&self) -> &str {
        &self.engine.world.origin
    }

    pub fn horizon(&self) -> &Scalar {
        &self.engine.world.horizon
    }

    pub fn segments(&self) -> u32 {
        self.engine.world.segments
    }

    pub fn clock(&self) -> SegmentClock {
        SegmentClock::new(self.engine.world.horizon.clone(), self.engine.world.segments)
    }

    /// Released requests not yet served, by id.
    pub fn open_requests(&self) -> Vec<usize> {
        let e = self.engine;
        (0..e.world.requests.len())
            .filter(|i| e.world.requests[*i].t <= e.now && !e.served.contains(i))
            .collect()
    }

    /// A released request. Panics for ids that are not yet released.
    pub fn request(&self, id: usize) -> &Request {
        let r = &self.engine.world.requests[id];
        assert!(r.t <= self.engine.now, "request {id} is not released yet");
        r
    }

    pub fn is_served(&self, id: usize) -> bool {
        self.engine.served.contains(&id)
    }

    /// Vertices the server knows about: origin, visited, and endpoints of
    /// released requests.
    pub fn visible_vertices(&self) -> BTreeSet<String> {
        self.engine.visible()
    }

    pub fn dist(&self, a: &str, b: &str) -> Scalar {
        let vis = self.engine.visible();
        assert!(vis.contains(a) && vis.contains(b), "distance to unseen vertex");
        self.engine.metric.dist_by_name(a, b).expect("visible vertex").clone()
    }
}

/// Hooks through which an adversary reacts to the policy.
pub trait Adversary {
    /// Instants at which the adversary wants to act, not yet handled.
    fn pending_ticks(&self) -> Vec<Scalar> {
        Vec::new()
    }

    /// Called once per pending tick, in time order; must retire the tick.
    fn on_tick(&mut self, _at: &Scalar, _ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        Ok(())
    }

    /// Called right after the policy commits an action.
    fn on_commit(&mut self, _action: &Action, _ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        Ok(())
    }
}

/// Releases nothing beyond the initial world.
#[derive(Debug, Clone, Default)]
pub struct StaticAdversary;

impl Adversary for StaticAdversary {}

pub struct AdversaryCtx<'a> {
    world: &'a mut Instance,
    schedule: &'a Schedule,
    at: Scalar,
    dirty: bool,
    snapshot: Option<&'a Engine>,
}

impl<'a> AdversaryCtx<'a> {
    /// Logical instant of the decision being made.
    pub fn at(&self) -> &Scalar {
        &self.at
    }

    pub fn world(&self) -> &Instance {
        self.world
    }

    /// Mutable access for graph changes; requests should go through
    /// [`AdversaryCtx::release`].
    pub fn world_mut(&mut self) -> &mut Instance {
        self.dirty = true;
        self.world
    }

    pub fn schedule(&self) -> &Schedule {
        self.schedule
    }

    /// Adds a request; its release may not precede the decision instant.
    pub fn release(&mut self, r: Request) -> Result<usize, EngineError> {
        if r.t < self.at {
            return Err(EngineError::Causality { at: self.at.clone(), release: r.t });
        }
        self.dirty = true;
        self.world.requests.push(r);
        Ok(self.world.requests.len() - 1)
    }

    /// Runs a copy of the policy from the current state to the horizon with
    /// no further releases.
    pub fn lookahead(&self) -> Result<Schedule, EngineError> {
        let snap = self.snapshot.ok_or_else(|| EngineError::Adversary("lookahead unavailable".into()))?;
        Ok(snap.clone().run(&mut StaticAdversary)?.schedule)
    }
}

/// Result of a simulation: the world as finally released and what the policy did.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub instance: Instance,
    pub schedule: Schedule,
    pub revenue: Scalar,
}

const STEP_LIMIT: usize = 1_000_000;

#[derive(Clone)]
pub struct Engine {
    world: Instance,
    metric: MetricGraph,
    policy: Box<dyn OnlinePolicy>,
    now: Scalar,
    position: String,
    served: BTreeSet<usize>,
    visited: BTreeSet<String>,
    schedule: Schedule,
    revenue: Scalar,
}

impl Engine {
    pub fn new(world: Instance, policy: Box<dyn OnlinePolicy>) -> Result<Self, EngineError> {
        let metric = world.metric()?;
        if metric.index_of(&world.origin).is_none() {
            return Err(GraphError::UnknownVertex(world.origin.clone()).into());
        }
        let position = world.origin.clone();
        Ok(Engine {
            world,
            metric,
            policy,
            now: Scalar::zero(),
            visited: BTreeSet::from([position.clone()]),
            position,
            served: BTreeSet::new(),
            schedule: Schedule::new(),
            revenue: Scalar::zero(),
        })
    }

    fn visible(&self) -> BTreeSet<String> {
        let mut out = self.visited.clone();
        for r in self.world.requests.iter().filter(|r| r.t <= self.now) {
            out.insert(r.s.clone());
            out.insert(r.d.clone());
        }
        out
    }

    fn illegal(&self, reason: impl Into<String>) -> EngineError {
        EngineError::IllegalCommand {
            policy: self.policy.name().to_string(),
            at: self.now.clone(),
            reason: reason.into(),
        }
    }

    fn refresh(&mut self) -> Result<(), EngineError> {
        self.metric = self.world.metric()?;
        Ok(())
    }

    fn next_event(&self, ticks: &[Scalar]) -> Scalar {
        let clock = SegmentClock::new(self.world.horizon.clone(), self.world.segments);
        let mut best = self.world.horizon.clone();
        let mut consider = |t: &Scalar| {
            if t > &self.now && t < &best {
                best = t.clone();
            }
        };
        for r in &self.world.requests {
            consider(&r.t);
        }
        for t in ticks {
            consider(t);
        }
        if let Some(j) = clock.segment_of(&self.now) {
            let mut b = clock.segment_end(j);
            if b == self.now {
                b = clock.segment_end(j + 1);
            }
            consider(&b);
        }
        best
    }

    fn process_ticks(&mut self, adv: &mut dyn Adversary) -> Result<(), EngineError> {
        loop {
            let mut due: Vec<Scalar> = adv.pending_ticks().into_iter().filter(|t| t <= &self.now).collect();
            due.sort();
            let Some(at) = due.into_iter().next() else { return Ok(()) };
            let snapshot = self.clone();
            let mut ctx = AdversaryCtx {
                world: &mut self.world,
                schedule: &self.schedule,
                at: at.clone(),
                dirty: false,
                snapshot: Some(&snapshot),
            };
            adv.on_tick(&at, &mut ctx)?;
            let dirty = ctx.dirty;
            if adv.pending_ticks().contains(&at) {
                return Err(EngineError::Adversary(format!("tick {at} was not retired")));
            }
            if dirty {
                self.refresh()?;
            }
        }
    }

    fn commit(&mut self, cmd: Command, ticks: &[Scalar]) -> Result<Option<Action>, EngineError> {
        let horizon = self.world.horizon.clone();
        let action = match cmd {
            Command::Move { to } => {
                if !self.visible().contains(&to) {
                    return Err(self.illegal(format!("move to unseen vertex `{to}`")));
                }
                if to == self.position {
                    return Err(self.illegal("move to current vertex"));
                }
                let d = self.metric.dist_by_name(&self.position, &to).expect("visible").clone();
                let end = &self.now + &d;
                if end > horizon {
                    return Err(self.illegal("move ends after the horizon"));
                }
                let a = Action::Move { from: self.position.clone(), to: to.clone(), start: self.now.clone() };
                self.visited.insert(to.clone());
                self.position = to;
                self.now = end;
                a
            }
            Command::Serve { request } => {
                let Some(r) = self.world.requests.get(request).filter(|r| r.t <= self.now) else {
                    return Err(self.illegal(format!("request {request} is not released")));
                };
                if self.served.contains(&request) {
                    return Err(self.illegal(format!("request {request} already served")));
                }
                if r.s != self.position {
                    return Err(self.illegal(format!("request {request} starts elsewhere")));
                }
                let end = &self.now + self.metric.dist_by_name(&r.s, &r.d).expect("known");
                if end > horizon {
                    return Err(self.illegal("serve ends after the horizon"));
                }
                let a = Action::Serve { request, start: self.now.clone() };
                self.revenue += &r.p;
                self.position = r.d.clone();
                self.visited.insert(r.d.clone());
                self.served.insert(request);
                self.now = end;
                a
            }
            Command::Idle { until } => {
                if until <= self.now || until > horizon {
                    return Err(self.illegal(format!("idle until {until}")));
                }
                let a = Action::Idle { start: self.now.clone(), duration: &until - &self.now };
                self.now = until;
                a
            }
            Command::Wait => {
                if self.now >= horizon {
                    return Ok(None);
                }
                let until = self.next_event(ticks);
                let a = Action::Idle { start: self.now.clone(), duration: &until - &self.now };
                self.now = until;
                a
            }
        };
        self.schedule.push(action.clone());
        Ok(Some(action))
    }

    /// Drives the policy until the horizon.
    pub fn run(mut self, adv: &mut dyn Adversary) -> Result<RunOutcome, EngineError> {
        for _ in 0..STEP_LIMIT {
            self.process_ticks(adv)?;
            if self.now >= self.world.horizon {
                return Ok(self.finish());
            }
            let mut policy = std::mem::replace(&mut self.policy, Box::new(IdlePolicy));
            let cmd = policy.decide(&View { engine: &self });
            self.policy = policy;
            let ticks = adv.pending_ticks();
            let start = self.now.clone();
            let Some(action) = self.commit(cmd, &ticks)? else {
                return Ok(self.finish());
            };
            let mut ctx = AdversaryCtx {
                world: &mut self.world,
                schedule: &self.schedule,
                at: start,
                dirty: false,
                snapshot: None,
            };
            adv.on_commit(&action, &mut ctx)?;
            if ctx.dirty {
                self.refresh()?;
            }
        }
        Err(EngineError::StepLimit(STEP_LIMIT))
    }

    fn finish(self) -> RunOutcome {
        RunOutcome { instance: self.world, schedule: self.schedule, revenue: self.revenue }
    }
}

/// Runs `policy` on a fully known instance whose requests appear at their
/// release times.
pub fn run_policy(inst: &Instance, policy: Box<dyn OnlinePolicy>) -> Result<RunOutcome, EngineError> {
    Engine::new(inst.clone(), policy)?.run(&mut StaticAdversary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schedule, Edge};

    fn line() -> Instance {
        Instance {
            vertices: vec!["a".into(), "b".into(), "c".into()],
            origin: "a".into(),
            edges: vec![Edge::new("a", "b", 2.into()), Edge::new("b", "c", 2.into()), Edge::new("a", "c", 3.into())],
            horizon: 12.into(),
            segments: 4,
            min_edge_factor: None,
            bipartition: None,
            requests: vec![Request::new("b", "c", 1.into(), 1.into())],
        }
    }

    #[derive(Clone)]
    struct Greedy;

    impl OnlinePolicy for Greedy {
        fn name(&self) -> &str {
            "greedy"
        }
        fn decide(&mut self, view: &View<'_>) -> Command {
            match view.open_requests().first() {
                Some(&id) if view.request(id).s == view.position() => Command::Serve { request: id },
                Some(&id) => Command::Move { to: view.request(id).s.clone() },
                None => Command::Wait,
            }
        }
        fn box_clone(&self) -> Box<dyn OnlinePolicy> {
            Box::new(self.clone())
        }
    }

    #[test]
    fn idle_policy_earns_nothing() {
        let out = run_policy(&line(), Box::new(IdlePolicy)).unwrap();
        assert!(out.revenue.is_zero());
        assert!(validate_schedule(&out.instance, &out.schedule).unwrap().feasible);
    }

    #[test]
    fn greedy_serves_after_release() {
        let out = run_policy(&line(), Box::new(Greedy)).unwrap();
        assert_eq!(out.revenue, Scalar::one());
        let v = validate_schedule(&out.instance, &out.schedule).unwrap();
        assert!(v.feasible, "{v:?}");
        // Woken at the release instant, not before.
        assert_eq!(out.schedule.actions[1], Action::Move { from: "a".into(), to: "b".into(), start: 1.into() });
    }

    #[test]
    fn unseen_vertices_are_rejected() {
        #[derive(Clone)]
        struct Peek;
        impl OnlinePolicy for Peek {
            fn name(&self) -> &str {
                "peek"
            }
            fn decide(&mut self, _: &View<'_>) -> Command {
                Command::Move { to: "c".into() }
            }
            fn box_clone(&self) -> Box<dyn OnlinePolicy> {
                Box::new(self.clone())
            }
        }
        let err = run_policy(&line(), Box::new(Peek)).unwrap_err();
        assert!(matches!(err, EngineError::IllegalCommand { .. }));
    }
}
