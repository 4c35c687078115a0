use roldarp_core::adversary::{
    adaptive_first_horizon, adaptive_last_window, gen_fig1, AdversaryError, AdversaryTranscript, Fig1Params,
    FirstHorizonParams, LastWindowParams,
};
use roldarp_core::online::{Command, IdlePolicy, OnlinePolicy, View};
use roldarp_core::sbp::{run_sbp, SbpPolicy};
use roldarp_core::{validate_instance, validate_schedule, validate_schedule_until, Action, Scalar};

fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

/// Sits still until `start`, then chases the richest open request.
#[derive(Clone)]
struct LateGreedy {
    start: Scalar,
}

impl OnlinePolicy for LateGreedy {
    fn name(&self) -> &str {
        "late-greedy"
    }

    fn decide(&mut self, view: &View<'_>) -> Command {
        if view.now() < &self.start {
            return Command::Idle { until: self.start.clone() };
        }
        let fits = |id: usize| {
            let r = view.request(id);
            let end = view.now() + view.dist(view.position(), &r.s) + view.dist(&r.s, &r.d);
            &end <= view.horizon()
        };
        let open: Vec<usize> = view.open_requests().into_iter().filter(|&id| fits(id)).collect();
        let Some(best) = open.iter().copied().max_by(|a, b| view.request(*a).p.cmp(&view.request(*b).p).then(b.cmp(a)))
        else {
            return Command::Wait;
        };
        let r = view.request(best);
        if view.position() == r.s {
            Command::Serve { request: best }
        } else {
            Command::Move { to: r.s.clone() }
        }
    }

    fn box_clone(&self) -> Box<dyn OnlinePolicy> {
        Box::new(self.clone())
    }
}

fn check_transcript(t: &AdversaryTranscript) {
    let report = validate_instance(&t.instance);
    assert!(report.is_valid(), "{}: {report}", t.case);
    let v = validate_schedule(&t.instance, &t.schedule).unwrap();
    assert!(v.feasible, "{}: {:?}", t.case, v.violation);
    assert_eq!(v.revenue, t.policy_revenue);
    let o = validate_schedule_until(&t.instance, &t.opt_schedule, &t.opt_horizon).unwrap();
    assert!(o.feasible && o.revenue == t.opt_revenue);
    let json = serde_json::to_value(t).unwrap();
    assert_eq!(json["case"], t.case.as_str());
}

#[test]
fn two_row_ratio_for_ten_segments() {
    let eps = Scalar::new(1, 1000);
    let p = Fig1Params { f: 10, h: int(30), b: int(1), eps: eps.clone() };
    let g = gen_fig1(&p).unwrap();
    assert_eq!(g.m, 12);
    let sbp = run_sbp(&g.instance).unwrap().profile.total;
    let w = validate_schedule(&g.instance, &g.witness).unwrap().revenue;
    let want = (int(18) + int(3) * &eps) / (int(4) + int(5) * &eps);
    assert_eq!(&w / &sbp, want);
    let f5 = Fig1Params { f: 5, ..p };
    assert!(matches!(gen_fig1(&f5), Err(AdversaryError::BadParams(_))));
}

#[test]
fn last_window_uniform_chain() {
    let p = LastWindowParams { uniform: true, k: 5, ..Default::default() };
    let t = adaptive_last_window(Box::new(SbpPolicy::new()), &p).unwrap();
    check_transcript(&t);
    assert_eq!(t.opt_revenue, int(5));
    assert!(t.policy_revenue <= int(1));
}

#[test]
fn last_window_transcripts_are_valid() {
    for uniform in [false, true] {
        for start in [0, 5, 25, 31, 35] {
            let p = LastWindowParams { uniform, k: 4, ..Default::default() };
            let t = adaptive_last_window(Box::new(LateGreedy { start: int(start) }), &p).unwrap();
            check_transcript(&t);
            if t.case == "took-bait" {
                assert!(t.opt_revenue >= int(4) * &t.policy_revenue, "{uniform} {start}: {t:?}");
            }
        }
        check_transcript(&adaptive_last_window(Box::new(IdlePolicy), &LastWindowParams { uniform, ..Default::default() }).unwrap());
    }
}

#[test]
fn first_horizon_against_many_policies() {
    let eps = Scalar::new(1, 100);
    let mut cases = std::collections::BTreeSet::new();
    for uniform in [false, true] {
        let p = FirstHorizonParams { uniform, eps: eps.clone(), ..Default::default() };
        for start in [Scalar::zero(), int(3), int(5), int(6), Scalar::new(13, 2), int(7), int(9), int(11), int(12), int(13)] {
            let t = adaptive_first_horizon(Box::new(LateGreedy { start: start.clone() }), &p).unwrap();
            check_transcript(&t);
            // Ratio at least 2/(1+eps) whatever the policy does.
            assert!(
                &t.opt_revenue * (int(1) + &eps) >= int(2) * &t.policy_revenue,
                "{uniform} start={start} {}: alg {} opt {}",
                t.case,
                t.policy_revenue,
                t.opt_revenue
            );
            cases.insert(t.case.clone());
        }
    }
    let want = ["case-2a", "case-2b", "case-2c", "case-3a", "case-3b-i"];
    assert_eq!(cases, want.iter().map(|s| s.to_string()).collect());
}

#[test]
fn moves_only_after_the_policy_commits() {
    // The schedule is the policy's own: every move starts where the last action ended.
    let t = adaptive_first_horizon(Box::new(SbpPolicy::new()), &FirstHorizonParams::default()).unwrap();
    let mut at = t.instance.origin.clone();
    for a in &t.schedule.actions {
        if let Action::Move { from, to, .. } = a {
            assert_eq!(from, &at);
            at = to.clone();
        }
        if let Action::Serve { request, .. } = a {
            at = t.instance.requests[*request].d.clone();
        }
    }
}
