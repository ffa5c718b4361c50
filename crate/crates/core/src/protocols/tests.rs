//! Protocol behavior tests: deterministic traces in the q=1 regime, the
//! survival branches, and the structural invariants (color monotonicity,
//! disjoint territories, survivor guarantees).

use super::*;
use crate::engine::{
    run_to_completion, EngineConfig, EventKind, ReportValue, RunRecord, SchedulerPolicy,
};
use crate::graph::{default_endpoints, generate_graph, st_numbering, GraphSpec, NodeId};
use crate::harness::Arena;
use crate::traversal::{build_traversal_pair, normalize_property1, partition_viable, Interval};
use std::sync::Arc;

fn arena(spec: &GraphSpec, seed: u64) -> Arena {
    let g = generate_graph(spec, seed).unwrap();
    let (s, t) = default_endpoints(&g);
    let o = st_numbering(&g, s, t).unwrap();
    let tp = build_traversal_pair(&g, &o).unwrap();
    let tp = normalize_property1(&g, &tp);
    let partition = partition_viable(&tp);
    Arena { graph: Arc::new(g), tp: Arc::new(tp), partition }
}

#[allow(clippy::too_many_arguments)]
fn run(
    a: &Arena,
    id: ProtocolId,
    hole_rank: usize,
    q: f64,
    p: f64,
    delta: f64,
    policy: SchedulerPolicy,
    seed: u64,
    target: Option<Interval>,
) -> RunRecord {
    let params = ProtocolParams::new(p, delta).unwrap();
    let bundle =
        build_bundle(id, &a.graph, &a.tp, &a.partition, params, target, hole_rank).unwrap();
    let mut cfg = EngineConfig::new(
        a.graph.clone(),
        a.tp.clone(),
        a.tp.node(hole_rank),
        q,
        id.whiteboard_mode(),
        policy,
        seed,
    );
    cfg.record_transcript = true;
    run_to_completion(&cfg, bundle).unwrap()
}

fn colors(rec: &RunRecord, a: &Arena) -> Vec<u64> {
    (1..=a.tp.n())
        .map(|r| rec.final_boards[a.tp.node(r)].get(COLOR_KEY).unwrap_or(0))
        .collect()
}

#[test]
fn coloring_ring4_black_hole_trace() {
    let a = arena(&GraphSpec::Ring(4), 0);
    // rbhole at v3, q = 1: both agents die, no output, and the final
    // coloring is c(v1)=3, c(v2)=2, c(v3)=0, c(v4)=2
    let rec = run(&a, ProtocolId::Coloring, 3, 1.0, 1.0, 0.5, SchedulerPolicy::RoundRobin, 7, None);
    assert!(rec.outcome.is_none());
    assert_eq!(rec.survivors(), 0);
    assert!(!rec.survived_crossing);
    assert_eq!(colors(&rec, &a), vec![3, 2, 0, 2]);
}

#[test]
fn coloring_ring4_survival_branch_terminates() {
    let a = arena(&GraphSpec::Ring(4), 0);
    let rec = run(&a, ProtocolId::Coloring, 3, 0.0, 0.5, 0.5, SchedulerPolicy::RoundRobin, 7, None);
    let scored = rec.outcome.expect("no deaths, someone meets the other's colors");
    assert!(matches!(scored.value, ReportValue::Node { .. }));
    assert!(rec.agents[scored.agent as usize].alive_at(a.tp.homebase()));
}

#[test]
fn coloring_failure_lemma_on_rings_and_completes() {
    for spec in [GraphSpec::Ring(7), GraphSpec::Ring(8), GraphSpec::Complete(6)] {
        let a = arena(&spec, 0);
        let n = a.tp.n();
        for g in 2..=n {
            let rec =
                run(&a, ProtocolId::Coloring, g, 1.0, 1.0, 0.3, SchedulerPolicy::Random, 3, None);
            assert!(rec.outcome.is_none(), "{spec:?} g={g}: q=1 coloring cannot terminate");
            let c = colors(&rec, &a);
            assert!(c[g - 1] < 3, "{spec:?} g={g}: c(v_g) < 3");
            for j in 1..=n {
                if j + 1 < g || j > g + 1 {
                    assert_eq!(c[j - 1], 3, "{spec:?} g={g}: c(v_{j}) = 3");
                }
            }
            if g > 1 {
                assert!(c[g - 2] >= 2, "{spec:?} g={g}: c(v_(g-1)) >= 2");
            }
            if g < n {
                assert!(c[g] >= 2, "{spec:?} g={g}: c(v_(g+1)) >= 2");
            }
        }
    }
}

#[test]
fn coloring_colors_never_decrease() {
    for seed in 0..10u64 {
        let a = arena(&GraphSpec::RandomBiconnected { n: 10, m: 16 }, 5);
        let rec =
            run(&a, ProtocolId::Coloring, 4, 0.4, 0.4, 0.2, SchedulerPolicy::Random, seed, None);
        let mut cur = vec![0u64; a.graph.node_count()];
        for e in rec.transcript.as_ref().unwrap() {
            if let EventKind::WbWrite { node, key, value } = e.kind {
                if key == COLOR_KEY {
                    assert!(value >= cur[node], "seed {seed}: color decreased at {node}");
                    cur[node] = value;
                }
            }
        }
    }
}

#[test]
fn coloring_move_envelope() {
    for (spec, q) in [
        (GraphSpec::Ring(16), 1.0),
        (GraphSpec::Ring(16), 0.5),
        (GraphSpec::Complete(9), 0.5),
    ] {
        let a = arena(&spec, 0);
        let p = if q == 0.0 { 0.5 } else { q };
        let params = ProtocolParams::new(p, 0.1).unwrap();
        let delta = params.delta_visits();
        for seed in 0..20u64 {
            let rec = run(&a, ProtocolId::Coloring, 3, q, p, 0.1, SchedulerPolicy::Random, seed, None);
            let bound = 20 * (delta as u64 * a.tp.n() as u64 + a.tp.size as u64);
            assert!(
                rec.total_moves <= bound,
                "{spec:?} seed {seed}: {} > {bound}",
                rec.total_moves
            );
        }
    }
}

#[test]
fn ring_bhs_exhaustive_small_rings() {
    for n in [3, 4, 5, 8, 12] {
        let a = arena(&GraphSpec::Ring(n), 0);
        for g in 2..=n {
            for policy in [
                SchedulerPolicy::Random,
                SchedulerPolicy::RoundRobin,
                SchedulerPolicy::AdversarySlow { victim: (g % 2) as u32 },
            ] {
                let rec = run(&a, ProtocolId::RingBhs, g, 1.0, 1.0, 1.0, policy, 13, None);
                let scored = rec.outcome.unwrap_or_else(|| panic!("n={n} g={g}: no output"));
                assert_eq!(
                    scored.value,
                    ReportValue::Node { node: a.tp.node(g) },
                    "n={n} g={g} {policy:?}"
                );
                assert!(rec.deaths() <= 1, "n={n} g={g}: at most the probe dies");
                assert!(rec.agents[scored.agent as usize].alive_at(a.tp.homebase()));
            }
        }
    }
}

#[test]
fn ring_bhs_move_bound() {
    let a = arena(&GraphSpec::Ring(16), 0);
    let bound = (40.0 * 16.0 * 16f64.log2()) as u64;
    for g in 2..=16 {
        for seed in 0..5u64 {
            let rec = run(&a, ProtocolId::RingBhs, g, 1.0, 1.0, 1.0, SchedulerPolicy::Random, seed, None);
            assert!(rec.total_moves <= bound, "g={g}: {} > {bound}", rec.total_moves);
        }
    }
}

#[test]
fn reduction_ring8_exhaustive_black_hole() {
    let a = arena(&GraphSpec::Ring(8), 0);
    for g in 2..=8 {
        for policy in [
            SchedulerPolicy::Random,
            SchedulerPolicy::RoundRobin,
            SchedulerPolicy::AdversarySlow { victim: (g % 6) as u32 },
        ] {
            let rec = run(&a, ProtocolId::Reduction, g, 1.0, 1.0, 1.0, policy, 5, None);
            let scored = rec.outcome.unwrap_or_else(|| panic!("g={g} {policy:?}: no output"));
            assert_eq!(scored.value, ReportValue::Node { node: a.tp.node(g) }, "g={g} {policy:?}");
            assert!(rec.agents[scored.agent as usize].alive_at(a.tp.homebase()));
            assert_eq!(rec.agents.len(), 6, "2t + 2 agents with t = 2");
        }
    }
}

#[test]
fn reduction_wrapped_agents_freeze_at_the_hole() {
    // in a no-luck run, no wrapped agent that entered v_g acts elsewhere after
    let a = arena(&GraphSpec::Ring(8), 0);
    for g in 2..=8 {
        let rec = run(&a, ProtocolId::Reduction, g, 1.0, 1.0, 1.0, SchedulerPolicy::Random, 2, None);
        assert!(!rec.survived_crossing);
        let hole = a.tp.node(g);
        let t = rec.transcript.as_ref().unwrap();
        for agent in 0..rec.agents.len() as u32 {
            if rec.agents[agent as usize].team == "coloring" {
                continue;
            }
            if let Some(pos) = t
                .iter()
                .position(|e| e.agent == agent && matches!(e.kind, EventKind::Arrive { node } if node == hole))
            {
                for e in &t[pos + 1..] {
                    if e.agent == agent {
                        match e.kind {
                            EventKind::Arrive { node } | EventKind::WbWrite { node, .. }
                            | EventKind::WbRead { node, .. } | EventKind::Suspend { node }
                            | EventKind::Wake { node } => {
                                assert_eq!(node, hole, "g={g}: trapped agent acted at {node}")
                            }
                            EventKind::Depart { from, .. } => {
                                assert_eq!(from, hole, "g={g}: trapped agent departed {from}")
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn reducer_k9_black_hole_trace() {
    let a = arena(&GraphSpec::Complete(9), 0);
    // partition is {v1,v2},{v3,v4},{v5,v6},{v7,v8},{v9}; hole at v5 sits in U3
    let got: Vec<_> = a.partition.intervals.iter().map(|u| (u.lo, u.hi)).collect();
    assert_eq!(got, vec![(1, 2), (3, 4), (5, 6), (7, 8), (9, 9)]);
    let rec = run(&a, ProtocolId::Reducer, 5, 1.0, 1.0, 1.0, SchedulerPolicy::RoundRobin, 3, None);
    let scored = rec.outcome.unwrap();
    assert_eq!(scored.value, ReportValue::Interval { lo: 5, hi: 6 });
    assert!(rec.deaths() <= 1, "at most the prober of U3 dies");
    assert!(rec.agents[scored.agent as usize].alive_at(a.tp.homebase()));
}

#[test]
fn reducer_single_interval_reports_immediately() {
    let a = arena(&GraphSpec::Ring(6), 0);
    let single = crate::traversal::IntervalPartition {
        intervals: vec![Interval {
            lo: 1,
            hi: a.tp.n(),
            weight: crate::traversal::interval_weight(&a.tp, 1, a.tp.n()).unwrap(),
        }],
    };
    let bundle = super::reducer::bundle(a.graph.clone(), a.tp.clone(), single, 2);
    let cfg = EngineConfig::new(
        a.graph.clone(),
        a.tp.clone(),
        a.tp.node(4),
        1.0,
        crate::engine::WhiteboardMode::HomebaseOnly,
        SchedulerPolicy::RoundRobin,
        1,
    );
    let rec = run_to_completion(&cfg, bundle).unwrap();
    assert_eq!(
        rec.outcome.unwrap().value,
        ReportValue::Interval { lo: 1, hi: a.tp.n() }
    );
    assert_eq!(rec.total_moves, 0, "degenerate single interval costs no moves");
}

#[test]
fn reducer_territories_disjoint_outside_homebase() {
    for q in [1.0, 0.5] {
        let a = arena(&GraphSpec::Complete(9), 0);
        for seed in 0..10u64 {
            let rec = run(&a, ProtocolId::Reducer, 6, q, q.max(0.5), 0.2, SchedulerPolicy::Random, seed, None);
            let t = rec.transcript.as_ref().unwrap();
            let mut visited: Vec<std::collections::BTreeSet<NodeId>> =
                vec![Default::default(); 2];
            for e in t {
                if let EventKind::Arrive { node } = e.kind {
                    visited[e.agent as usize].insert(node);
                }
            }
            let both: Vec<_> = visited[0].intersection(&visited[1]).copied().collect();
            for node in both {
                assert_eq!(node, a.tp.homebase(), "q={q} seed {seed}: overlap at {node}");
            }
        }
    }
}

#[test]
fn reducer_delta_visit_crosses_the_hole_boundary() {
    // q = 0: everything survives; the agent that validates the hole's
    // interval must cross its boundary at least 2Δ times. The hole sits in
    // U1 so its interval is validated before the final report.
    let a = arena(&GraphSpec::Complete(9), 0);
    let delta = 4u32;
    let params = ProtocolParams::new(0.5, 0.1).unwrap();
    assert_eq!(params.delta_visits(), delta);
    let rec = run(&a, ProtocolId::Reducer, 2, 0.0, 0.5, 0.1, SchedulerPolicy::RoundRobin, 9, None);
    let hole = a.tp.node(2);
    let t = rec.transcript.as_ref().unwrap();
    let crossings = t
        .iter()
        .filter(|e| match e.kind {
            EventKind::Arrive { node } => node == hole,
            EventKind::Depart { from, .. } => from == hole,
            _ => false,
        })
        .count() as u32;
    assert!(crossings >= 2 * delta, "crossings {crossings} < 2Δ = {}", 2 * delta);
}

#[test]
fn algo1_ring8_binary_search_trace() {
    let a = arena(&GraphSpec::Ring(8), 0);
    let u = Interval { lo: 3, hi: 6, weight: 0 };
    let rec = run(&a, ProtocolId::Algo1, 5, 1.0, 1.0, 1.0, SchedulerPolicy::RoundRobin, 3, Some(u));
    let scored = rec.outcome.unwrap();
    assert_eq!(scored.value, ReportValue::Node { node: a.tp.node(5) });
    let used = rec.agents.iter().filter(|ag| ag.moves > 0).count();
    assert_eq!(used, 3, "stage 1 consumes two agents, stage 2 one more");
    assert!(rec.agents[scored.agent as usize].alive_at(a.tp.homebase()));
}

#[test]
fn algo1_singleton_interval_immediate() {
    let a = arena(&GraphSpec::Ring(8), 0);
    let u = Interval { lo: 4, hi: 4, weight: 0 };
    let rec = run(&a, ProtocolId::Algo1, 4, 1.0, 1.0, 1.0, SchedulerPolicy::Random, 1, Some(u));
    assert_eq!(rec.outcome.unwrap().value, ReportValue::Node { node: a.tp.node(4) });
    assert_eq!(rec.total_moves, 0);
}

#[test]
fn algo1_pool_sizing() {
    assert_eq!(pool_size_of(1), 2);
    assert_eq!(pool_size_of(2), 3);
    assert_eq!(pool_size_of(6), 5);
    assert_eq!(pool_size_of(8), 5);
    assert_eq!(pool_size_of(9), 6);
}

fn pool_size_of(r: usize) -> usize {
    super::algo1::pool_size(r)
}

#[test]
fn algo2_ring8_trace() {
    let a = arena(&GraphSpec::Ring(8), 0);
    let u = Interval { lo: 3, hi: 6, weight: 0 };
    let rec = run(&a, ProtocolId::Algo2, 5, 1.0, 1.0, 1.0, SchedulerPolicy::RoundRobin, 3, Some(u));
    let scored = rec.outcome.unwrap();
    assert_eq!(scored.value, ReportValue::Node { node: a.tp.node(5) });
    assert!(rec.deaths() <= 1);
    assert!(rec.agents[scored.agent as usize].alive_at(a.tp.homebase()));
}

#[test]
fn algo2_singleton_interval_immediate() {
    let a = arena(&GraphSpec::Ring(8), 0);
    let u = Interval { lo: 5, hi: 5, weight: 0 };
    let rec = run(&a, ProtocolId::Algo2, 5, 1.0, 1.0, 1.0, SchedulerPolicy::Random, 1, Some(u));
    assert_eq!(rec.outcome.unwrap().value, ReportValue::Node { node: a.tp.node(5) });
    assert_eq!(rec.total_moves, 0);
}

#[test]
fn wbfree_variants_black_hole_exhaustive_k7() {
    let a = arena(&GraphSpec::Complete(7), 0);
    for id in [ProtocolId::WbfreeFewAgents, ProtocolId::WbfreeFewMoves] {
        for g in 2..=7 {
            for policy in [SchedulerPolicy::Random, SchedulerPolicy::RoundRobin] {
                let rec = run(&a, id, g, 1.0, 1.0, 1.0, policy, 11, None);
                let scored = rec.outcome.unwrap_or_else(|| panic!("{id} g={g}: no output"));
                assert_eq!(scored.value, ReportValue::Node { node: a.tp.node(g) }, "{id} g={g}");
                assert!(rec.agents[scored.agent as usize].alive_at(a.tp.homebase()));
            }
        }
    }
}

#[test]
fn wbfree_agent_budgets() {
    let a = arena(&GraphSpec::Complete(9), 0);
    let rec = run(&a, ProtocolId::WbfreeFewAgents, 5, 1.0, 1.0, 1.0, SchedulerPolicy::Random, 1, None);
    assert_eq!(rec.agents.len(), 4, "few-agents uses exactly 2 + 2");
    let rec = run(&a, ProtocolId::WbfreeFewMoves, 5, 1.0, 1.0, 1.0, SchedulerPolicy::Random, 1, None);
    let budget = ((a.tp.radius as f64).log2().ceil() as usize) + 4;
    assert!(rec.agents.len() <= budget.max(4), "few-moves within log budget");
}

#[test]
fn protocols_requiring_rings_reject_other_arenas() {
    let a = arena(&GraphSpec::Complete(5), 0);
    let params = ProtocolParams::new(1.0, 0.5).unwrap();
    for id in [ProtocolId::Reduction, ProtocolId::RingBhs] {
        assert!(build_bundle(id, &a.graph, &a.tp, &a.partition, params, None, 2).is_err());
    }
}

#[test]
fn delta_visit_values() {
    assert_eq!(delta_visits(1.0, 0.3).unwrap(), 0);
    assert_eq!(delta_visits(0.5, 0.5).unwrap(), 1);
    // ceil(ln 0.1 / ln 0.5) = ceil(3.3219) = 4
    assert_eq!(delta_visits(0.5, 0.1).unwrap(), 4);
    assert_eq!(delta_visits(0.5, 1.0).unwrap(), 0);
    assert_eq!(delta_visits(0.5, 0.25).unwrap(), 2, "exact power boundary");
    assert!(delta_visits(0.0, 0.5).is_err());
    assert!(delta_visits(0.5, 0.0).is_err());
    assert!(delta_visits(1.5, 0.5).is_err());
    assert!(delta_visits(0.5, 1.5).is_err());
}

#[test]
fn delta_visit_guarantee() {
    let mut rng = crate::rng::SplitMix64::new(31);
    for _ in 0..2000 {
        let p = 0.01 + 0.99 * rng.next_f64();
        let d = (rng.next_f64()).clamp(1e-6, 1.0);
        let k = delta_visits(p, d).unwrap();
        assert!((1.0 - p).powi(k as i32) <= d * (1.0 + 1e-6), "p={p} d={d} k={k}");
        if k > 0 {
            assert!(
                (1.0 - p).powi(k as i32 - 1) > d * (1.0 - 1e-6),
                "k not minimal: p={p} d={d} k={k}"
            );
        }
    }
}

#[test]
fn protocol_id_roundtrip() {
    for id in ProtocolId::ALL {
        assert_eq!(id.as_str().parse::<ProtocolId>().unwrap(), id);
    }
    assert!("presto".parse::<ProtocolId>().is_err());
}

#[test]
fn algo1_stage_roles_touch_disjoint_territory() {
    // single-stage run at q = 0: the two role agents may only share the
    // homebase (access paths and halves live on opposite sides of the pivot)
    let a = arena(&GraphSpec::Complete(9), 0);
    let u = Interval { lo: 4, hi: 5, weight: 0 };
    let rec = run(&a, ProtocolId::Algo1, 4, 0.0, 0.5, 0.1, SchedulerPolicy::RoundRobin, 2, Some(u));
    assert!(rec.outcome.is_some());
    let t = rec.transcript.as_ref().unwrap();
    let movers: Vec<u32> = {
        let mut ids: Vec<u32> = t
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Depart { .. }))
            .map(|e| e.agent)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    assert_eq!(movers.len(), 2, "one stage staffs exactly two roles");
    let mut visited: Vec<std::collections::BTreeSet<NodeId>> = vec![Default::default(); 2];
    for e in t {
        if let EventKind::Arrive { node } = e.kind {
            if let Some(slot) = movers.iter().position(|&m| m == e.agent) {
                visited[slot].insert(node);
            }
        }
    }
    for node in visited[0].intersection(&visited[1]) {
        assert_eq!(*node, a.tp.homebase(), "stage halves overlap at {node}");
    }
}

#[test]
fn engine_rejects_bad_configs() {
    let a = arena(&GraphSpec::Ring(4), 0);
    let params = ProtocolParams::new(1.0, 1.0).unwrap();
    let bundle =
        build_bundle(ProtocolId::RingBhs, &a.graph, &a.tp, &a.partition, params, None, 2).unwrap();
    // hole at the homebase is invalid
    let cfg = EngineConfig::new(
        a.graph.clone(),
        a.tp.clone(),
        a.tp.homebase(),
        1.0,
        crate::engine::WhiteboardMode::AllNodes,
        SchedulerPolicy::Random,
        1,
    );
    assert!(matches!(
        run_to_completion(&cfg, bundle),
        Err(crate::error::EngineError::InvalidConfig(_))
    ));
}
