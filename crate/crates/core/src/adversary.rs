//! Lower-bound instance families: a static two-row construction against the
//! segmented algorithm (`gen_fig1`), and two adaptive adversaries that react to the
//! committed actions of any online policy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{validate_instance, Action, Edge, Instance, Request, Schedule, ValidationReport};
use crate::online::{Adversary, AdversaryCtx, Engine, EngineError, OnlinePolicy};
use crate::oracle::{optimal_offline_capped, realize_order, OracleError, DEFAULT_SEARCH_CAP};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdversaryError {
    #[error("BAD_PARAMS: {0}")]
    BadParams(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("INVALID_WORLD: {0}")]
    InvalidWorld(ValidationReport),
}

fn bad(msg: impl Into<String>) -> AdversaryError {
    AdversaryError::BadParams(msg.into())
}

/// Complete graph under construction: every pair sits at a default distance
/// unless fixed explicitly.
#[derive(Debug, Clone)]
struct Sketch {
    default: Scalar,
    vertices: Vec<String>,
    fixed: BTreeMap<(String, String), Scalar>,
}

impl Sketch {
    fn new(default: Scalar, vertices: &[&str]) -> Self {
        let mut s = Sketch { default, vertices: Vec::new(), fixed: BTreeMap::new() };
        for v in vertices {
            s.vertex(v);
        }
        s
    }

    fn vertex(&mut self, v: &str) {
        if !self.vertices.iter().any(|x| x == v) {
            self.vertices.push(v.to_string());
        }
    }

    fn set(&mut self, a: &str, b: &str, w: Scalar) {
        self.vertex(a);
        self.vertex(b);
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.fixed.insert(key, w);
    }

    fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                let w = self.fixed.get(&key).unwrap_or(&self.default).clone();
                out.push(Edge::new(a.clone(), b.clone(), w));
            }
        }
        out
    }

    fn install(&self, world: &mut Instance) {
        world.vertices = self.vertices.clone();
        world.edges = self.edges();
    }
}

// ---------------------------------------------------------------------------
// Two-row family: a top row the segmented algorithm crawls along one request
// per window, and a bottom chain it never has time for.

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fig1Params {
    /// Even segment count, at least 4.
    pub f: u32,
    /// Half a segment; `T = 2hf`.
    pub h: Scalar,
    #[serde(rename = "B")]
    pub b: Scalar,
    pub eps: Scalar,
}

impl Fig1Params {
    /// Length of the bottom chain, `floor((3hf - 4h - f + 2) / (2(h+1)))`.
    pub fn m(&self) -> i64 {
        let f = Scalar::from_int(self.f as i64);
        let h = &self.h;
        let num = Scalar::from_int(3) * h * &f - Scalar::from_int(4) * h - &f + Scalar::from_int(2);
        let den = Scalar::from_int(2) * (h + Scalar::one());
        (num / den).floor().try_into().unwrap_or(i64::MAX)
    }

    pub fn horizon(&self) -> Scalar {
        Scalar::from_int(2 * self.f as i64) * &self.h
    }

    /// Revenue the segmented algorithm collects: `eps + (f/2 - 1)(B + eps)`.
    pub fn sbp_revenue(&self) -> Scalar {
        &self.eps + Scalar::from_int(self.f as i64 / 2 - 1) * (&self.b + &self.eps)
    }

    /// Revenue of the witness: `mB + (2B + eps)(f - 4)/2`.
    pub fn witness_revenue(&self) -> Scalar {
        Scalar::from_int(self.m()) * &self.b
            + (Scalar::from_int(2) * &self.b + &self.eps) * Scalar::from_int((self.f as i64 - 4) / 2)
    }

    /// Time by which the witness finishes, `(2f - 4)h`.
    pub fn witness_deadline(&self) -> Scalar {
        Scalar::from_int(2 * self.f as i64 - 4) * &self.h
    }

    fn check(&self) -> Result<(), AdversaryError> {
        if self.f < 4 || self.f % 2 == 1 {
            return Err(bad(format!("f={} must be even and greater than 2", self.f)));
        }
        if self.h <= Scalar::one() {
            return Err(bad(format!("h={} must exceed 1", self.h)));
        }
        if !self.b.is_positive() {
            return Err(bad(format!("B={} must be positive", self.b)));
        }
        if !self.eps.is_positive() || self.eps >= Scalar::one() {
            return Err(bad(format!("eps={} must lie in (0,1)", self.eps)));
        }
        if self.m() < 1 {
            return Err(bad(format!("m={} must be at least 1", self.m())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fig1 {
    pub instance: Instance,
    /// The bottom-row-then-top-row schedule ending at `u_{f-2}`.
    pub witness: Schedule,
    pub m: i64,
}

pub fn gen_fig1(p: &Fig1Params) -> Result<Fig1, AdversaryError> {
    p.check()?;
    let f = p.f as usize;
    let m = p.m() as usize;
    let h = &p.h;
    let one = Scalar::one();
    let u = |i: usize| format!("u{i}");
    let v = |i: usize| format!("v{i}");

    let mut names = vec!["o".to_string()];
    names.extend((1..=f).map(u));
    names.extend((1..=m).map(v));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut g = Sketch::new(h.clone(), &refs);
    g.set("o", "u1", one.clone());
    g.set("o", "v1", one.clone());
    for i in 1..f {
        g.set(&u(i), &u(i + 1), if i % 2 == 1 { one.clone() } else { h.clone() });
    }
    for i in 1..m {
        g.set(&v(i), &v(i + 1), h + &one);
    }
    g.set(&v(m), "u2", h + &one);

    let b_eps = &p.b + &p.eps;
    let four_h = Scalar::from_int(4) * h;
    let mut requests = vec![Request::new("u1", "u2", Scalar::zero(), p.eps.clone())];
    let top_fast = requests.len();
    for i in 1..f / 2 {
        let t = Scalar::from_int(i as i64) * &four_h;
        requests.push(Request::new(u(2 * i + 1), u(2 * i + 2), t, b_eps.clone()));
    }
    let top_slow = requests.len();
    for i in 1..f / 2 {
        let t = Scalar::from_int(i as i64) * &four_h + &one;
        requests.push(Request::new(u(2 * i), u(2 * i + 1), t, p.b.clone()));
    }
    let bottom = requests.len();
    for i in 1..m {
        requests.push(Request::new(v(i), v(i + 1), one.clone(), p.b.clone()));
    }
    requests.push(Request::new(v(m), "u2", one.clone(), p.b.clone()));

    let mut instance = Instance {
        vertices: Vec::new(),
        origin: "o".into(),
        edges: Vec::new(),
        horizon: p.horizon(),
        segments: p.f,
        min_edge_factor: None,
        bipartition: None,
        requests,
    };
    g.install(&mut instance);

    // o, v1..vm, u2, ..., u_{f-2}: the whole bottom chain, then both top
    // requests of every pair k = 1..f/2-2.
    let mut order: Vec<usize> = (bottom..bottom + m).collect();
    for k in 1..f / 2 - 1 {
        order.push(top_slow + k - 1);
        order.push(top_fast + k - 1);
    }
    let witness = realize_order(&instance, &order).map_err(|e| bad(e.to_string()))?;
    Ok(Fig1 { instance, witness, m: m as i64 })
}

// ---------------------------------------------------------------------------
// Adaptive duels

/// Record of one duel between an online policy and an adaptive adversary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryTranscript {
    pub adversary: String,
    pub policy: String,
    /// Which branch of the adversary's case analysis fired.
    pub case: String,
    /// Every request that ended up released.
    pub instance: Instance,
    pub schedule: Schedule,
    pub policy_revenue: Scalar,
    pub opt_horizon: Scalar,
    pub opt_schedule: Schedule,
    pub opt_revenue: Scalar,
    /// `opt / policy`, absent when the policy earned nothing.
    pub ratio: Option<Scalar>,
}

fn finish_duel(
    adversary: &str,
    policy: String,
    case: String,
    run: crate::online::RunOutcome,
    opt_horizon: Scalar,
    cap: usize,
) -> Result<AdversaryTranscript, AdversaryError> {
    let mut instance = run.instance;
    let report = validate_instance(&instance);
    if !report.is_valid() {
        return Err(AdversaryError::InvalidWorld(report));
    }
    instance.canonicalize();
    let opt = optimal_offline_capped(&instance, Some(&opt_horizon), cap)?;
    let ratio = run.revenue.is_positive().then(|| &opt.revenue / &run.revenue);
    Ok(AdversaryTranscript {
        adversary: adversary.into(),
        policy,
        case,
        instance,
        schedule: run.schedule,
        policy_revenue: run.revenue,
        opt_horizon,
        opt_schedule: opt.schedule,
        opt_revenue: opt.revenue,
        ratio,
    })
}

fn first_move<'a>(sched: &'a Schedule, targets: &[&str], not_before: &Scalar) -> Option<(&'a Scalar, &'a str)> {
    sched.actions.iter().find_map(|a| match a {
        Action::Move { to, start, .. } if start >= not_before && targets.contains(&to.as_str()) => {
            Some((start, to.as_str()))
        }
        _ => None,
    })
}

fn any_move_from(sched: &Schedule, not_before: &Scalar) -> Option<(Scalar, String)> {
    sched.actions.iter().find_map(|a| match a {
        Action::Move { to, start, .. } if start >= not_before => Some((start.clone(), to.clone())),
        _ => None,
    })
}

fn served_any(sched: &Schedule, ids: &[usize]) -> bool {
    sched.served().iter().any(|r| ids.contains(r))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LastWindowParams {
    #[serde(rename = "T")]
    pub horizon: Scalar,
    pub f: u32,
    pub uniform: bool,
    /// Payoff revenue, or payoff chain length when uniform.
    pub k: u32,
    /// Payoff delay after the bait release; defaults to `T/(2f)`.
    pub delta: Option<Scalar>,
    pub search_cap: usize,
}

impl Default for LastWindowParams {
    fn default() -> Self {
        LastWindowParams {
            horizon: Scalar::from_int(40),
            f: 4,
            uniform: false,
            k: 100,
            delta: None,
            search_cap: DEFAULT_SEARCH_CAP,
        }
    }
}

struct LastWindow {
    params: LastWindowParams,
    sketch: Sketch,
    seg: Scalar,
    bait_time: Scalar,
    delta: Scalar,
    ticks: BTreeSet<Scalar>,
    case: &'static str,
}

impl Adversary for LastWindow {
    fn pending_ticks(&self) -> Vec<Scalar> {
        self.ticks.iter().cloned().collect()
    }

    fn on_tick(&mut self, at: &Scalar, ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        self.ticks.remove(at);
        if first_move(ctx.schedule(), &["s"], &Scalar::zero()).is_none() {
            self.case = "ignored-bait";
            return Ok(());
        }
        self.case = "took-bait";
        let t = &self.bait_time + &self.delta;
        let k = self.params.k as i64;
        let mut payoff = Vec::new();
        if self.params.uniform {
            let step = &self.seg / Scalar::from_int(k);
            let c = |i: i64| if i == 0 { "o".to_string() } else { format!("c{i}") };
            for i in 0..=k {
                for j in i + 1..=k {
                    self.sketch.set(&c(i), &c(j), &step * Scalar::from_int(j - i));
                }
            }
            for i in 1..=k {
                payoff.push(Request::new(c(i - 1), c(i), t.clone(), Scalar::one()));
            }
        } else {
            self.sketch.vertex("b");
            payoff.push(Request::new("o", "b", t, Scalar::from_int(k)));
        }
        self.sketch.install(ctx.world_mut());
        for r in payoff {
            ctx.release(r)?;
        }
        Ok(())
    }
}

/// Bait in the last two segments; a payoff elsewhere if the policy bites.
pub fn adaptive_last_window(
    policy: Box<dyn OnlinePolicy>,
    params: &LastWindowParams,
) -> Result<AdversaryTranscript, AdversaryError> {
    let horizon = params.horizon.clone();
    if params.f < 2 || Scalar::from_int(params.f as i64) >= horizon {
        return Err(bad(format!("need 2 <= f < T, got f={} T={}", params.f, horizon)));
    }
    if params.k < 1 {
        return Err(bad("k must be at least 1"));
    }
    let seg = &horizon / Scalar::from_int(params.f as i64);
    let delta = params.delta.clone().unwrap_or_else(|| &seg / Scalar::from_int(2));
    if !delta.is_positive() || delta > seg {
        return Err(bad(format!("delta={delta} must lie in (0, T/f]")));
    }
    let bait_time = &horizon - Scalar::from_int(2) * &seg;
    let sketch = Sketch::new(seg.clone(), &["o", "s", "d"]);
    let mut world = Instance {
        vertices: Vec::new(),
        origin: "o".into(),
        edges: Vec::new(),
        horizon: horizon.clone(),
        segments: params.f,
        min_edge_factor: None,
        bipartition: None,
        requests: vec![Request::new("s", "d", bait_time.clone(), Scalar::one())],
    };
    sketch.install(&mut world);
    let name = policy.name().to_string();
    let mut adv = LastWindow {
        params: params.clone(),
        sketch,
        seg,
        ticks: BTreeSet::from([&bait_time + &delta]),
        bait_time,
        delta,
        case: "ignored-bait",
    };
    let run = Engine::new(world, policy)?.run(&mut adv)?;
    finish_duel("last-window", name, adv.case.into(), run, horizon, params.search_cap)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstHorizonParams {
    /// Segment length; `T = 5X` with five segments.
    #[serde(rename = "X")]
    pub x: Scalar,
    pub uniform: bool,
    /// Chain length of the uniform construction.
    pub k: u32,
    /// Small revenue of the nonuniform construction.
    pub eps: Scalar,
    /// Uniform slack, in `(0, X/(2k))`; defaults to `X/(4k)`.
    pub delta: Option<Scalar>,
    pub search_cap: usize,
}

impl Default for FirstHorizonParams {
    fn default() -> Self {
        FirstHorizonParams {
            x: Scalar::from_int(6),
            uniform: false,
            k: 4,
            eps: Scalar::new(1, 100),
            delta: None,
            search_cap: DEFAULT_SEARCH_CAP,
        }
    }
}

/// Reacts to when and where the policy first heads for one of the two
/// opening requests. `lag` is the small offset used throughout: 1 in the
/// nonuniform construction, `delta` in the uniform one.
struct FirstHorizon {
    uniform: bool,
    x: Scalar,
    k: i64,
    eps: Scalar,
    lag: Scalar,
    sketch: Sketch,
    ticks: BTreeSet<Scalar>,
    case: Option<&'static str>,
    /// Set once the late batch of the third case is out.
    tail_done: bool,
}

impl FirstHorizon {
    fn x(&self, n: i64) -> Scalar {
        Scalar::from_int(n) * &self.x
    }

    /// Sources of the two opening requests.
    fn sources(&self) -> [&'static str; 2] {
        if self.uniform { ["a1", "b1"] } else { ["a1", "a2"] }
    }

    fn publish(&self, ctx: &mut AdversaryCtx<'_>, reqs: Vec<Request>) -> Result<(), EngineError> {
        self.sketch.install(ctx.world_mut());
        for r in reqs {
            ctx.release(r)?;
        }
        Ok(())
    }

    /// Second-case release; `went` is the opening source the policy chose.
    fn second_case(&mut self, early: bool, went: &str, ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        let x = self.x.clone();
        let t = if early { self.x(2) } else { self.x(2) + &self.lag };
        let r = if self.uniform {
            let l = if went == "a1" { "b" } else { "a" };
            let (p, q, s) = (format!("{l}2"), format!("{l}3"), format!("{l}4"));
            if early {
                self.sketch.vertex(&q);
                Request::new(p, q, t, Scalar::one())
            } else {
                self.sketch.set(&p, &q, self.lag.clone());
                self.sketch.set(&q, &s, &x - &self.lag);
                Request::new(q, s, t, Scalar::one())
            }
        } else {
            let o = if went == "a1" { 2 } else { 1 };
            let (b, c, d) = (format!("b{o}"), format!("c{o}"), format!("d{o}"));
            if early {
                self.sketch.vertex(&c);
                Request::new(b, c, t, self.eps.clone())
            } else {
                self.sketch.set(&b, &c, Scalar::one());
                self.sketch.set(&c, &d, &x - Scalar::one());
                Request::new(c, d, t, self.eps.clone())
            }
        };
        self.publish(ctx, vec![r])
    }

    fn third_case_open(&mut self, ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        let t = &self.x + &self.lag;
        let mut reqs = Vec::new();
        if self.uniform {
            let step = &self.x / Scalar::from_int(self.k);
            for l in ["c", "d"] {
                for i in 0..=self.k {
                    for j in i + 1..=self.k {
                        self.sketch.set(&format!("{l}{i}"), &format!("{l}{j}"), &step * Scalar::from_int(j - i));
                    }
                }
                for i in 1..=self.k {
                    reqs.push(Request::new(format!("{l}{}", i - 1), format!("{l}{i}"), t.clone(), Scalar::one()));
                }
            }
        } else {
            for i in [3, 4] {
                self.sketch.vertex(&format!("a{i}"));
                self.sketch.vertex(&format!("b{i}"));
                reqs.push(Request::new(format!("a{i}"), format!("b{i}"), t.clone(), Scalar::one()));
            }
        }
        self.ticks.insert(self.x(3) - &self.lag);
        self.publish(ctx, reqs)
    }

    /// Nonuniform fifth request on branch `i`.
    fn fifth(&mut self, i: u32, ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        let (b, c, d) = (format!("b{i}"), format!("c{i}"), format!("d{i}"));
        self.sketch.set(&b, &c, &self.x - Scalar::from_int(2));
        self.sketch.set(&c, &d, Scalar::one());
        self.tail_done = true;
        let r = Request::new(c, d, self.x(3) - Scalar::one(), Scalar::one());
        self.publish(ctx, vec![r])
    }

    /// Uniform closing chain of length `w` released at `3X - w`, hanging off
    /// the end of the chain the policy did not head for.
    fn closing_chain(&mut self, w: Scalar, anchor: &str, ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        let link = &self.x - &self.lag - &w;
        let step = &w / Scalar::from_int(self.k);
        // A zero-length link means the chain starts at the anchor itself.
        let merged = link.is_zero();
        let e = |i: i64| if i == 0 && merged { anchor.to_string() } else { format!("e{i}") };
        for i in 0..=self.k {
            for j in i + 1..=self.k {
                self.sketch.set(&e(i), &e(j), &step * Scalar::from_int(j - i));
            }
        }
        if !merged {
            self.sketch.set("e0", anchor, link);
        }
        let t = self.x(3) - &w;
        let reqs = (1..=self.k).map(|i| Request::new(e(i - 1), e(i), t.clone(), Scalar::one())).collect();
        self.tail_done = true;
        self.publish(ctx, reqs)
    }

    fn chain_end(&self, l: &str) -> String {
        format!("{l}{}", self.k)
    }
}

impl Adversary for FirstHorizon {
    fn pending_ticks(&self) -> Vec<Scalar> {
        self.ticks.iter().cloned().collect()
    }

    fn on_tick(&mut self, at: &Scalar, ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        self.ticks.remove(at);
        let x = self.x.clone();
        let srcs = self.sources();
        let first = first_move(ctx.schedule(), &srcs, &Scalar::zero()).map(|(t, to)| (t.clone(), to.to_string()));

        if *at == &x + &self.lag {
            if self.case.is_none() && matches!(&first, Some((t, _)) if *t == x) {
                self.case = Some("case-3");
                return self.third_case_open(ctx);
            }
        } else if *at == self.x(2) {
            if let (None, Some((t, to))) = (self.case, &first) {
                if *t > x && *t < self.x(2) {
                    self.case = Some("case-2a");
                    return self.second_case(true, to, ctx);
                }
            }
        } else if *at == self.x(2) + &self.lag {
            if self.case.is_some() {
                return Ok(());
            }
            let (label, went) = match first {
                Some((t, to)) if t == self.x(2) => ("case-2b", to),
                Some((_, to)) => ("case-2c", to),
                None => {
                    // Nothing committed yet: ask what the policy would do
                    // if nothing else ever arrived.
                    let la = ctx.lookahead()?;
                    match first_move(&la, &srcs, &Scalar::zero()) {
                        Some((_, to)) => ("case-2c", to.to_string()),
                        None => return Ok(()),
                    }
                }
            };
            self.case = Some(label);
            return self.second_case(false, &went, ctx);
        } else if *at == self.x(3) - &self.lag && self.case == Some("case-3") && !self.tail_done {
            let opened = served_any(ctx.schedule(), &[0, 1]);
            if self.uniform {
                self.case = Some(if opened { "case-3a" } else { "case-3b-ii" });
                let anchor = self.chain_end("d");
                return self.closing_chain(self.lag.clone(), &anchor, ctx);
            }
            let mv = any_move_from(ctx.schedule(), &self.x(2));
            let branch = match (&mv, opened) {
                (_, true) => {
                    self.case = Some("case-3a");
                    4
                }
                (Some((_, to)), false) => {
                    self.case = Some("case-3b-i");
                    if to.ends_with('4') { 3 } else { 4 }
                }
                (None, false) => {
                    self.case = Some("case-3b-ii");
                    4
                }
            };
            return self.fifth(branch, ctx);
        }
        Ok(())
    }

    fn on_commit(&mut self, action: &Action, ctx: &mut AdversaryCtx<'_>) -> Result<(), EngineError> {
        if !self.uniform || self.case != Some("case-3") || self.tail_done {
            return Ok(());
        }
        let Action::Move { to, start, .. } = action else { return Ok(()) };
        if *start < self.x(2) || *start >= self.x(3) - &self.lag || served_any(ctx.schedule(), &[0, 1]) {
            return Ok(());
        }
        self.case = Some("case-3b-i");
        let w = self.x(3) - start - &self.lag;
        let anchor = if to.starts_with('d') { self.chain_end("c") } else { self.chain_end("d") };
        self.closing_chain(w, &anchor, ctx)
    }
}

/// Five segments; requests chosen so the policy cannot match the optimum
/// over the first `3X` time units.
pub fn adaptive_first_horizon(
    policy: Box<dyn OnlinePolicy>,
    params: &FirstHorizonParams,
) -> Result<AdversaryTranscript, AdversaryError> {
    let x = params.x.clone();
    let k = params.k as i64;
    let lag = if params.uniform {
        if k < 1 {
            return Err(bad("k must be at least 1"));
        }
        if x <= Scalar::one() {
            return Err(bad(format!("X={x} must exceed 1")));
        }
        let cap = &x / Scalar::from_int(2 * k);
        let d = params.delta.clone().unwrap_or_else(|| &x / Scalar::from_int(4 * k));
        if !d.is_positive() || d >= cap {
            return Err(bad(format!("delta={d} must lie in (0, X/(2k)) = (0, {cap})")));
        }
        d
    } else {
        if x < Scalar::from_int(3) {
            return Err(bad(format!("X={x} must be at least 3")));
        }
        if !params.eps.is_positive() || params.eps >= Scalar::one() {
            return Err(bad(format!("eps={} must lie in (0,1)", params.eps)));
        }
        Scalar::one()
    };

    let (sketch, opening) = if params.uniform {
        (
            Sketch::new(x.clone(), &["a0", "a1", "a2", "b1", "b2"]),
            vec![
                Request::new("a1", "a2", x.clone(), Scalar::one()),
                Request::new("b1", "b2", x.clone(), Scalar::one()),
            ],
        )
    } else {
        (
            Sketch::new(x.clone(), &["a0", "a1", "b1", "a2", "b2"]),
            vec![
                Request::new("a1", "b1", x.clone(), params.eps.clone()),
                Request::new("a2", "b2", x.clone(), params.eps.clone()),
            ],
        )
    };
    let mut world = Instance {
        vertices: Vec::new(),
        origin: "a0".into(),
        edges: Vec::new(),
        horizon: Scalar::from_int(5) * &x,
        segments: 5,
        min_edge_factor: None,
        bipartition: None,
        requests: opening,
    };
    sketch.install(&mut world);
    let two_x = Scalar::from_int(2) * &x;
    let mut adv = FirstHorizon {
        uniform: params.uniform,
        eps: params.eps.clone(),
        k,
        ticks: BTreeSet::from([&x + &lag, two_x.clone(), &two_x + &lag]),
        lag,
        x: x.clone(),
        sketch,
        case: None,
        tail_done: false,
    };
    let name = policy.name().to_string();
    let run = Engine::new(world, policy)?.run(&mut adv)?;
    let case = adv.case.unwrap_or("case-1").to_string();
    finish_duel("first-horizon", name, case, run, Scalar::from_int(3) * x, params.search_cap)
}
