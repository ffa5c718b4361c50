//! Long randomized bug hunt across the config space (not part of the
//! committed suites; run ad hoc).

use rbhs_core::engine::SchedulerPolicy;
use rbhs_core::harness::*;
use rbhs_core::rng::SplitMix64;
use rbhs_core::{GraphSpec, ProtocolId};

fn main() {
    let mut bad = 0u32;

    // true cross product: every (n, placement, victim) for adversary-slow
    for n in [3usize, 4, 5, 7, 9, 12] {
        let arena = Arena::prepare(&ArenaSource::Spec(GraphSpec::Ring(n)), 1).unwrap();
        for proto in [ProtocolId::RingBhs, ProtocolId::Reduction] {
            let agents = if proto == ProtocolId::Reduction { 6 } else { 2 };
            for hole_rank in 2..=n {
                for victim in 0..agents {
                    let params = rbhs_core::ProtocolParams::new(1.0, 1.0).unwrap();
                    let bundle = rbhs_core::protocols::build_bundle(
                        proto, &arena.graph, &arena.tp, &arena.partition, params, None, hole_rank,
                    )
                    .unwrap();
                    let cfg = rbhs_core::EngineConfig::new(
                        arena.graph.clone(),
                        arena.tp.clone(),
                        arena.tp.node(hole_rank),
                        1.0,
                        proto.whiteboard_mode(),
                        SchedulerPolicy::AdversarySlow { victim },
                        99,
                    );
                    match rbhs_core::run_to_completion(&cfg, bundle) {
                        Err(e) => {
                            println!("{proto} n={n} g={hole_rank} victim={victim}: {e}");
                            bad += 1;
                        }
                        Ok(rec) => {
                            let ok = matches!(
                                rec.outcome.map(|o| o.value),
                                Some(rbhs_core::ReportValue::Node { node }) if node == arena.tp.node(hole_rank)
                            );
                            if !ok || rec.survivors() < 1 {
                                println!("{proto} n={n} g={hole_rank} victim={victim}: wrong/none");
                                bad += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    println!("victim cross product done, bad = {bad}");

    // extreme coin biases and random configs
    let mut rng = SplitMix64::new(0xCAFE);
    let mut trials_total = 0u64;
    for round in 0..120u64 {
        let (spec, ring_ok) = match rng.index(5) {
            0 => (GraphSpec::Ring(4 + rng.index(29)), true),
            1 => (GraphSpec::Complete(4 + rng.index(13)), false),
            2 => (GraphSpec::Grid(3 + rng.index(2), 3 + rng.index(3)), false),
            _ => {
                let n = 5 + rng.index(28);
                let m = (n + rng.index(2 * n)).min(n * (n - 1) / 2);
                (GraphSpec::RandomBiconnected { n, m }, false)
            }
        };
        let protos: &[ProtocolId] = if ring_ok {
            &[
                ProtocolId::Reduction,
                ProtocolId::RingBhs,
                ProtocolId::WbfreeFewAgents,
                ProtocolId::WbfreeFewMoves,
                ProtocolId::Reducer,
                ProtocolId::Algo1,
                ProtocolId::Algo2,
                ProtocolId::Coloring,
            ]
        } else {
            &[
                ProtocolId::WbfreeFewAgents,
                ProtocolId::WbfreeFewMoves,
                ProtocolId::Reducer,
                ProtocolId::Algo1,
                ProtocolId::Algo2,
                ProtocolId::Coloring,
            ]
        };
        let proto = protos[rng.index(protos.len())];
        let q = [0.05, 0.2, 0.5, 0.8, 0.95, 1.0][rng.index(6)];
        let p = if q == 1.0 { 1.0 } else { (q * (0.3 + 0.7 * rng.next_f64())).max(0.01) };
        let delta = [0.02, 0.1, 0.3, 1.0][rng.index(4)];
        let trials = 150;
        let cfg = ExperimentConfig {
            arena: ArenaSource::Spec(spec.clone()),
            protocol: proto,
            p,
            q_true: q,
            delta,
            trials,
            seed: 31_000 + round,
            scheduler: SchedulerChoice::All,
            placement: Placement::Random,
            guarantee_mode: true,
        };
        match run_experiment(&cfg, 8) {
            Err(e) => {
                println!("round {round} {spec}/{proto} p={p:.2} q={q}: {e}");
                bad += 1;
            }
            Ok(r) => {
                trials_total += r.trials;
                // survivor guarantees: all homebase-only searches at any q,
                // composites at any q, the ring search in its true-black-hole
                // regime; standalone coloring may legally lose both agents
                let survivor_guaranteed = match proto {
                    ProtocolId::Coloring => false,
                    ProtocolId::RingBhs => q == 1.0,
                    _ => true,
                };
                if survivor_guaranteed && r.min_survivors < 1 {
                    println!("round {round} {spec}/{proto} q={q}: zero survivors somewhere");
                    bad += 1;
                }
                let composite = matches!(
                    proto,
                    ProtocolId::Reduction
                        | ProtocolId::WbfreeFewAgents
                        | ProtocolId::WbfreeFewMoves
                );
                if q == 1.0 && composite && (r.no_output_count > 0 || r.wrong_count > 0) {
                    println!("round {round} {spec}/{proto} q=1: inexact");
                    bad += 1;
                }
                if survivor_guaranteed && !composite && proto != ProtocolId::RingBhs
                    && r.no_output_count > 0
                {
                    println!("round {round} {spec}/{proto} q={q}: search yielded no output");
                    bad += 1;
                }
            }
        }
    }
    println!("random campaign done: {trials_total} trials, bad = {bad}");

    // larger arenas, exact regime
    for n in [24usize, 32, 48] {
        let cfg = ExperimentConfig {
            arena: ArenaSource::Spec(GraphSpec::Ring(n)),
            protocol: ProtocolId::Reduction,
            p: 1.0,
            q_true: 1.0,
            delta: 1.0,
            trials: ((n - 1) * 3) as u64,
            seed: 5,
            scheduler: SchedulerChoice::All,
            placement: Placement::Exhaustive,
            guarantee_mode: true,
        };
        let r = run_experiment(&cfg, 8).unwrap();
        if r.wrong_count + r.no_output_count > 0 {
            println!("ring:{n} reduction q=1: inexact");
            bad += 1;
        }
    }
    let cfg = ExperimentConfig {
        arena: ArenaSource::Spec(GraphSpec::Complete(16)),
        protocol: ProtocolId::WbfreeFewMoves,
        p: 1.0,
        q_true: 1.0,
        delta: 1.0,
        trials: 45,
        seed: 6,
        scheduler: SchedulerChoice::All,
        placement: Placement::Exhaustive,
        guarantee_mode: true,
    };
    let r = run_experiment(&cfg, 8).unwrap();
    if r.wrong_count + r.no_output_count > 0 {
        println!("complete:16 wbfree-fm q=1: inexact");
        bad += 1;
    }
    println!("large arenas done, bad = {bad}");
    std::process::exit(if bad == 0 { 0 } else { 1 });
}
