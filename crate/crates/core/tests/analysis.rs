use std::collections::BTreeSet;

use proptest::prelude::*;

use roldarp_core::adversary::{gen_fig1, Fig1Params};
use roldarp_core::analysis::{
    check_bound, decompose_windows, greedy_singleton_schedule, opt_echo_schedule, shift_one_window, window_sets,
    BoundId, Evaluation,
};
use roldarp_core::bipartite::{lift_schedule, per_window_capacity, project_schedule, to_bipartite};
use roldarp_core::oracle::optimal_offline;
use roldarp_core::random::{gen_random, RandomParams};
use roldarp_core::{
    completions, validate_instance, validate_schedule, Edge, Instance, Request, RevenueProfile, Scalar, Schedule,
    SegmentClock,
};

fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

fn flat_profile(f: usize, segs: Vec<Vec<usize>>, inst: &Instance) -> RevenueProfile {
    let by_segment: Vec<Scalar> = segs.iter().map(|s| s.iter().map(|&r| inst.requests[r].p.clone()).sum()).collect();
    let by_window = (0..f.div_ceil(2))
        .map(|i| by_segment[2 * i].clone() + by_segment.get(2 * i + 1).cloned().unwrap_or_else(Scalar::zero))
        .collect();
    RevenueProfile { total: by_segment.iter().sum(), by_segment, by_window, requests_by_segment: segs }
}

fn six_requests() -> Instance {
    gen_random(&RandomParams { requests: 6, segments: 6, seed: 3, ..Default::default() }).unwrap()
}

#[test]
fn decomposition_of_identical_runs() {
    let inst = six_requests();
    let opt = flat_profile(6, vec![vec![0], vec![], vec![1, 2], vec![], vec![3], vec![]], &inst);
    let dec = decompose_windows(&inst, &opt, &[set(&[0]), set(&[1, 2])]).unwrap();
    for (i, c) in dec.windows.iter().enumerate() {
        assert_eq!(c.a, c.s_star, "window {}", i + 1);
        assert!(c.x.is_empty() && c.y.is_empty() && c.x_star.is_empty() && c.y_star.is_empty());
    }
    let apart = decompose_windows(&inst, &opt, &[set(&[4]), set(&[5])]).unwrap();
    for c in &apart.windows {
        assert!(c.a.is_empty() && c.x.is_empty() && c.x_star.is_empty());
        assert_eq!(c.y_star, c.s_star);
        assert_eq!(c.y, c.s_prime);
    }
}

#[test]
fn shift_of_three_windows() {
    assert_eq!(shift_one_window(&[set(&[0]), set(&[1]), set(&[2])]), vec![set(&[1]), set(&[2])]);
}

#[test]
fn echo_of_empty_optimum_is_empty() {
    let inst = six_requests();
    let echo = opt_echo_schedule(&inst, &Schedule::new()).unwrap();
    assert!(echo.iter().all(BTreeSet::is_empty));
}

#[test]
fn lone_request_goes_to_its_first_window() {
    let inst = Instance {
        vertices: vec!["a".into(), "b".into()],
        origin: "a".into(),
        edges: vec![Edge::new("a", "b", int(2))],
        horizon: int(12),
        segments: 6,
        min_edge_factor: None,
        bipartition: None,
        requests: vec![Request::new("a", "b", int(3), int(1))],
    };
    // Released at 3, the next window starts at 4.
    assert_eq!(greedy_singleton_schedule(&inst).unwrap(), vec![set(&[]), set(&[0]), set(&[])]);
}

#[test]
fn worst_case_family_satisfies_the_main_bound() {
    let g = gen_fig1(&Fig1Params { f: 10, h: int(30), b: int(1), eps: Scalar::new(1, 1000) }).unwrap();
    let ev = Evaluation::with_cap(&g.instance, 32).unwrap();
    let r = ev.check(BoundId::Thm4).unwrap();
    assert!(r.holds, "{r:?}");
    assert!(ev.opt.revenue >= validate_schedule(&g.instance, &g.witness).unwrap().revenue);
}

#[test]
fn greedy_never_beats_the_algorithm() {
    for seed in 0..50 {
        let inst = gen_random(&RandomParams { seed, requests: 1 + (seed % 8) as usize, vertices: 5, ..Default::default() })
            .unwrap();
        let r = check_bound(&inst, BoundId::Lem9).unwrap();
        assert!(r.holds, "seed {seed}: {r:?}");
    }
}

fn two_vertex(w: i64, releases: &[(i64, i64, bool)]) -> Instance {
    Instance {
        vertices: vec!["v0".into(), "v1".into()],
        origin: "v0".into(),
        edges: vec![Edge::new("v0", "v1", int(w))],
        horizon: int(20),
        segments: 5,
        min_edge_factor: None,
        bipartition: None,
        requests: releases
            .iter()
            .map(|&(t, p, out)| if out { Request::new("v0", "v1", int(t), int(p)) } else { Request::new("v1", "v0", int(t), int(p)) })
            .collect(),
    }
}

/// f = 5: the algorithm's last plan is at 12, but a greedy run that picks
/// at window starts still sees the request released at 16.
#[test]
fn odd_segment_count_breaks_greedy_comparison() {
    let inst = two_vertex(3, &[(9, 1, true), (17, 9, true), (16, 9, true)]);
    let r = check_bound(&inst, BoundId::Lem9).unwrap();
    assert!(!r.holds);
    assert_eq!((r.lhs, r.rhs), (int(9), int(1)));
    // The two greedy readings coincide for even f, where it holds.
    let even = Instance { segments: 4, ..inst };
    assert!(check_bound(&even, BoundId::Lem9).unwrap().holds);
}

/// Same f = 5 layout: the echo of the optimum's second window is only
/// matched because the greedy run may use the trailing one-segment window.
#[test]
fn trailing_window_feeds_sorted_dominance() {
    let inst = two_vertex(1, &[(20, 3, true), (8, 2, true), (13, 7, false)]);
    let g = greedy_singleton_schedule(&inst).unwrap();
    assert_eq!(g, vec![set(&[]), set(&[1]), set(&[2])]);
    assert!(check_bound(&inst, BoundId::Lem8).unwrap().holds);
}

/// f = 3: the optimum finishes its only good request at 8, the echo moves it
/// to the one-segment window (8, 12], and nothing fits there from `o`.
#[test]
fn odd_segment_count_breaks_sorted_dominance() {
    let text = r#"{"vertices":["d1","o","s1"],"origin":"o",
        "edges":[{"u":"d1","v":"s1","w":"3"},{"u":"o","v":"s1","w":"4"}],
        "T":"12","f":3,"k":"1/2","bipartition":{"V1":["s1"],"V2":["d1","o"]},
        "requests":[{"s":"s1","d":"d1","t":"8","p":"4"},{"s":"s1","d":"d1","t":"7","p":"4"},
                    {"s":"s1","d":"d1","t":"12","p":"2"},{"s":"s1","d":"o","t":"4","p":"7"}]}"#;
    let inst = Instance::from_json(text).unwrap();
    let r = check_bound(&inst, BoundId::Lem8).unwrap();
    assert!(!r.holds);
    assert_eq!((r.lhs, r.rhs), (int(7), int(0)));
}

/// f = 3: the only plan is at 4, the request appears at 5, and the optimum
/// finishes it in the first window, outside the additive term.
#[test]
fn odd_segment_count_breaks_the_capacity_bound() {
    let text = r#"{"vertices":["d1","o","s1"],"origin":"o",
        "edges":[{"u":"d1","v":"s1","w":"2"},{"u":"o","v":"s1","w":"2"}],
        "T":"12","f":3,"k":"1/2","bipartition":{"V1":["s1"],"V2":["d1","o"]},
        "requests":[{"s":"s1","d":"d1","t":"12","p":"2"},{"s":"s1","d":"o","t":"5","p":"1"}]}"#;
    let inst = Instance::from_json(text).unwrap();
    let r = check_bound(&inst, BoundId::Thm8).unwrap();
    assert!(!r.holds);
    assert_eq!((r.lhs, r.rhs), (int(1), int(0)));
}

#[test]
fn unit_factor_bound() {
    for seed in 0..20 {
        let p = RandomParams { seed, uniform: true, vertices: 4, requests: 6, bipartite_k: Some(Scalar::one()), ..Default::default() };
        let inst = gen_random(&p).unwrap();
        let r = check_bound(&inst, BoundId::Thm7).unwrap();
        assert_eq!(r.terms["r"], int(1));
        assert!(r.holds && r.lhs <= &r.terms["sbp"] + int(1), "seed {seed}: {r:?}");
    }
}

#[test]
fn reduction_on_three_vertices() {
    let p = RandomParams { vertices: 3, requests: 4, seed: 11, ..Default::default() };
    let inst = gen_random(&p).unwrap();
    let red = to_bipartite(&inst, None).unwrap();
    assert_eq!(red.instance.horizon, &inst.horizon + &red.delta);
    assert_eq!(optimal_offline(&inst, None).unwrap().revenue, optimal_offline(&red.instance, None).unwrap().revenue);
}

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (any::<u64>(), 2usize..6, 1usize..8, prop::sample::select(vec![3u32, 4, 5, 6, 8]), 4u32..7, prop::bool::ANY, 0u8..4)
        .prop_map(|(seed, vertices, requests, segments, segment_length, uniform, kind)| {
            let bipartite_k = match kind {
                0 | 1 => None,
                2 => Some(Scalar::new(1, 2)),
                _ => Some(Scalar::new(2, 5)),
            };
            let vertices = if bipartite_k.is_some() { vertices.max(3) } else { vertices };
            gen_random(&RandomParams { seed, vertices, requests, segments, segment_length, uniform, bipartite_k })
                .unwrap()
        })
}

/// Prefix counts straight from the definitions, using window indices.
fn lemma3_by_definition(inst: &Instance, ev: &Evaluation) -> Vec<(usize, usize)> {
    let mu = (inst.segments as usize).div_ceil(2);
    let m = mu - 1;
    let win_of_shifted = |r: usize| {
        let w = window_sets(&ev.sbp.profile);
        (1..w.len()).find(|&i| w[i].contains(&r))
    };
    let seg_of_opt = |r: usize| ev.opt_profile.requests_by_segment.iter().position(|s| s.contains(&r)).map(|j| j + 1);
    let rich = |i: usize| {
        let (a, b) = (ev.opt_profile.segment(2 * i as u32 - 1), ev.opt_profile.segment(2 * i as u32));
        if b > a { 2 * i } else { 2 * i - 1 }
    };
    let in_s_star = |r: usize, i: usize| seg_of_opt(r) == Some(rich(i));
    let in_s_prime = |r: usize, i: usize| win_of_shifted(r) == Some(i);
    let n = inst.requests.len();
    let mut out = Vec::new();
    let (mut xs, mut ys) = (0, 0);
    for i in 1..=m {
        xs += (0..n).filter(|&r| in_s_star(r, i) && (1..i).any(|w| in_s_prime(r, w))).count();
        ys += (0..n).filter(|&r| in_s_prime(r, i) && !(1..=i).any(|w| in_s_star(r, w))).count();
        out.push((xs, ys));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn cells_partition_their_windows(inst in instance_strategy()) {
        let ev = Evaluation::new(&inst).unwrap();
        let shifted = shift_one_window(&window_sets(&ev.sbp.profile));
        let dec = decompose_windows(&inst, &ev.opt_profile, &shifted).unwrap();
        for c in &dec.windows {
            let parts = [&c.a, &c.x_star, &c.y_star];
            prop_assert_eq!(parts.iter().map(|p| p.len()).sum::<usize>(), c.s_star.len());
            prop_assert_eq!(parts.iter().flat_map(|p| p.iter().copied()).collect::<BTreeSet<_>>(), c.s_star.clone());
            let parts = [&c.a, &c.x, &c.y];
            prop_assert_eq!(parts.iter().map(|p| p.len()).sum::<usize>(), c.s_prime.len());
            prop_assert_eq!(parts.iter().flat_map(|p| p.iter().copied()).collect::<BTreeSet<_>>(), c.s_prime.clone());
        }
        prop_assert_eq!(dec.prefix_counts(), lemma3_by_definition(&inst, &ev));
    }

    #[test]
    fn bounds_hold_and_checks_are_pure(inst in instance_strategy()) {
        let ev = Evaluation::new(&inst).unwrap();
        for b in BoundId::ALL {
            if let Ok(r) = ev.check(b) {
                // With odd f these three can fail; see the pinned cases.
                let odd_only = matches!(b, BoundId::Thm8 | BoundId::Lem8 | BoundId::Lem9);
                let expected = !(odd_only && inst.segments % 2 == 1);
                prop_assert!(r.holds || !expected, "{}: {:?}\n{}", b, r, inst.to_json());
                prop_assert_eq!(Evaluation::new(&inst).unwrap().check(b).unwrap(), r);
            }
        }
    }

    #[test]
    fn echo_greedy_algorithm_chain(inst in instance_strategy()) {
        let ev = Evaluation::new(&inst).unwrap();
        let rev = |sets: &[BTreeSet<usize>]| -> Scalar { sets.iter().flatten().map(|&r| inst.requests[r].p.clone()).sum() };
        let echo = rev(&opt_echo_schedule(&inst, &ev.opt.schedule).unwrap());
        let greedy = rev(&greedy_singleton_schedule(&inst).unwrap());
        prop_assume!(inst.segments % 2 == 0);
        prop_assert!(echo <= greedy && greedy <= ev.sbp.profile.total, "{} {} {}", echo, greedy, ev.sbp.profile.total);
    }

    #[test]
    fn window_capacity_on_bipartite_optima(inst in instance_strategy()) {
        prop_assume!(inst.bipartition.is_some());
        let cap = per_window_capacity(inst.min_edge_factor.as_ref().unwrap()).unwrap() as usize;
        let opt = optimal_offline(&inst, None).unwrap();
        let clock = SegmentClock::new(inst.horizon.clone(), inst.segments);
        let mut per_window = vec![0usize; clock.windows() as usize];
        for c in completions(&inst, &opt.schedule).unwrap() {
            per_window[clock.window_of(&c.end).unwrap() as usize - 1] += 1;
        }
        prop_assert!(per_window.iter().all(|&n| n <= cap), "{:?} > {}", per_window, cap);
    }

    #[test]
    fn reduction_round_trips(inst in instance_strategy()) {
        prop_assume!(inst.bipartition.is_none() && inst.requests.len() <= 6);
        let red = to_bipartite(&inst, None).unwrap();
        prop_assert!(validate_instance(&red.instance).is_valid());
        let opt = optimal_offline(&inst, None).unwrap();
        prop_assert_eq!(&optimal_offline(&red.instance, None).unwrap().revenue, &opt.revenue);
        let lifted = lift_schedule(&inst, &red, &opt.schedule).unwrap();
        let v = validate_schedule(&red.instance, &lifted).unwrap();
        let orig = validate_schedule(&inst, &opt.schedule).unwrap();
        prop_assert!(v.feasible);
        prop_assert_eq!(&v.revenue, &orig.revenue);
        prop_assert!(v.completion <= &orig.completion + &red.delta);
        prop_assert_eq!(project_schedule(&inst, &red, &lifted).unwrap(), opt.schedule);
    }
}
