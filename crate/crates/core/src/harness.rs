//! Monte Carlo experiment harness: seeded trial matrices over placements and
//! scheduler policies, per-trial classification against ground truth, and
//! deterministic aggregate reports.

use crate::engine::{
    run_to_completion, EngineConfig, ReportValue, RunRecord, SchedulerPolicy, Transcript,
};
use crate::error::HarnessError;
use crate::graph::{default_endpoints, generate_graph, st_numbering, Graph, GraphSpec, NodeId};
use crate::protocols::{build_bundle, ProtocolId, ProtocolParams};
use crate::rng::{trial_seed, SplitMix64};
use crate::traversal::{
    build_traversal_pair, normalize_property1, partition_viable, IntervalPartition, TraversalPair,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ArenaSource {
    /// Generated from a descriptor with the experiment's master seed.
    Spec(GraphSpec),
    /// An explicit graph (e.g. parsed from an edge list).
    Graph { label: String, graph: Graph },
}

impl ArenaSource {
    pub fn label(&self) -> String {
        match self {
            ArenaSource::Spec(s) => s.to_string(),
            ArenaSource::Graph { label, .. } => label.clone(),
        }
    }
}

/// Fully prepared arena shared by every trial of an experiment.
#[derive(Debug, Clone)]
pub struct Arena {
    pub graph: Arc<Graph>,
    pub tp: Arc<TraversalPair>,
    pub partition: IntervalPartition,
}

impl Arena {
    pub fn prepare(source: &ArenaSource, seed: u64) -> Result<Arena, HarnessError> {
        let graph = match source {
            ArenaSource::Spec(spec) => generate_graph(spec, seed)?,
            ArenaSource::Graph { graph, .. } => {
                if !graph.is_biconnected() {
                    return Err(crate::error::GraphError::NotBiconnected.into());
                }
                graph.clone()
            }
        };
        let (s, t) = default_endpoints(&graph);
        let ordering = st_numbering(&graph, s, t)?;
        let tp = build_traversal_pair(&graph, &ordering)?;
        let tp = normalize_property1(&graph, &tp);
        let partition = partition_viable(&tp);
        Ok(Arena { graph: Arc::new(graph), tp: Arc::new(tp), partition })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerChoice {
    Random,
    RoundRobin,
    AdversarySlow,
    /// Cycle through all three policies across the trial matrix.
    All,
}

impl SchedulerChoice {
    fn policies(&self) -> Vec<SchedulerChoice> {
        match self {
            SchedulerChoice::All => vec![
                SchedulerChoice::Random,
                SchedulerChoice::RoundRobin,
                SchedulerChoice::AdversarySlow,
            ],
            one => vec![*one],
        }
    }

    fn to_policy(self, victim: u32) -> SchedulerPolicy {
        match self {
            SchedulerChoice::Random => SchedulerPolicy::Random,
            SchedulerChoice::RoundRobin => SchedulerPolicy::RoundRobin,
            SchedulerChoice::AdversarySlow => SchedulerPolicy::AdversarySlow { victim },
            SchedulerChoice::All => unreachable!("expanded before use"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchedulerChoice::Random => "random",
            SchedulerChoice::RoundRobin => "round-robin",
            SchedulerChoice::AdversarySlow => "adversary-slow",
            SchedulerChoice::All => "all",
        }
    }
}

impl std::str::FromStr for SchedulerChoice {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(SchedulerChoice::Random),
            "round-robin" => Ok(SchedulerChoice::RoundRobin),
            "adversary-slow" => Ok(SchedulerChoice::AdversarySlow),
            "all" => Ok(SchedulerChoice::All),
            _ => Err(HarnessError::InvalidParams(format!("unknown scheduler '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    Fixed(NodeId),
    /// Cycle through every non-homebase node.
    Exhaustive,
    /// Per-trial seeded draw.
    Random,
}

impl std::str::FromStr for Placement {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Placement::Exhaustive),
            "random" => Ok(Placement::Random),
            other => other
                .parse::<usize>()
                .map(Placement::Fixed)
                .map_err(|_| HarnessError::InvalidParams(format!("bad placement '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub arena: ArenaSource,
    pub protocol: ProtocolId,
    /// Kill-probability lower bound the protocol assumes.
    pub p: f64,
    /// The hole's actual coin bias.
    pub q_true: f64,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub scheduler: SchedulerChoice,
    pub placement: Placement,
    /// When set, reject configs with `q_true < p`: the probabilistic
    /// guarantees only hold when p is a true lower bound on the coin bias.
    pub guarantee_mode: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidParams("trials must be >= 1".into()));
        }
        ProtocolParams::new(self.p, self.delta)?;
        if !(0.0..=1.0).contains(&self.q_true) {
            return Err(HarnessError::InvalidParams(format!(
                "q_true {} not in [0,1]",
                self.q_true
            )));
        }
        if self.guarantee_mode && self.q_true < self.p {
            return Err(HarnessError::InvalidParams(format!(
                "guarantee mode requires q_true >= p, got q={} < p={}",
                self.q_true, self.p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OutcomeKind {
    Node { node: NodeId },
    Interval { lo: usize, hi: usize },
    NoOutput,
}

/// One classified run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: u64,
    pub seed: u64,
    pub placement: NodeId,
    pub policy: String,
    pub outcome: OutcomeKind,
    pub correct: bool,
    pub wrong: bool,
    pub no_output: bool,
    pub total_moves: u64,
    pub team_moves: BTreeMap<String, u64>,
    pub agents_spawned: usize,
    pub deaths: usize,
    pub survivors: usize,
    pub reporter_alive_at_home: bool,
    pub survived_crossing: bool,
    pub delta_used: u32,
    pub events: u64,
}

/// Classifies a finished run's report.
pub fn classify(record: &RunRecord) -> OutcomeKind {
    match record.outcome {
        None => OutcomeKind::NoOutput,
        Some(r) => match r.value {
            ReportValue::Node { node } => OutcomeKind::Node { node },
            ReportValue::Interval { lo, hi } => OutcomeKind::Interval { lo, hi },
        },
    }
}

impl OutcomeKind {
    pub fn is_correct(&self, tp: &TraversalPair, hole: NodeId) -> bool {
        match *self {
            OutcomeKind::Node { node } => node == hole,
            OutcomeKind::Interval { lo, hi } => {
                let r = tp.rank(hole);
                lo <= r && r <= hi
            }
            OutcomeKind::NoOutput => false,
        }
    }
}

/// The Δ actually used by a protocol run, for reporting and envelopes.
pub fn delta_used(protocol: ProtocolId, params: ProtocolParams, radius: usize) -> u32 {
    match protocol {
        ProtocolId::RingBhs => 0,
        ProtocolId::Coloring | ProtocolId::Reduction | ProtocolId::Reducer | ProtocolId::Algo2 => {
            params.delta_visits()
        }
        ProtocolId::Algo1 => crate::protocols::algo1::stage_delta(params.p, params.delta, radius),
        ProtocolId::WbfreeFewAgents => params.delta_visits_for(params.delta / 2.0),
        ProtocolId::WbfreeFewMoves => {
            let half = params.delta / 2.0;
            params
                .delta_visits_for(half)
                .max(crate::protocols::algo1::stage_delta(params.p, half, radius))
        }
    }
}

/// Asymptotic envelope base (no constant) per protocol, used for the fitted
/// constants in reports.
pub fn envelope_base(protocol: ProtocolId, n: usize, s: usize, r: usize, delta: u32) -> f64 {
    let (n, s, r, d) = (n as f64, s as f64, r as f64, delta as f64);
    let log2r = r.log2().max(0.0);
    let log2n = n.log2().max(1.0);
    match protocol {
        ProtocolId::Coloring => (d * n + s).max(1.0),
        ProtocolId::Reducer => (s + d * n).max(1.0),
        ProtocolId::Algo1 => (r * log2r + d * r).max(1.0),
        ProtocolId::Algo2 => (r * r + d * r).max(1.0),
        ProtocolId::RingBhs => n * log2n,
        ProtocolId::Reduction => 40.0 * n * log2n + s + d * n,
        ProtocolId::WbfreeFewAgents => (s + d * n + r * r).max(1.0),
        ProtocolId::WbfreeFewMoves => (s + d * n + r * log2r).max(1.0),
    }
}

fn placement_candidates(arena: &Arena) -> Vec<NodeId> {
    let home = arena.tp.homebase();
    (0..arena.graph.node_count()).filter(|&v| v != home).collect()
}

/// Runs one trial of the matrix. Deterministic in `(cfg, arena, index)`.
pub fn run_one_trial(
    cfg: &ExperimentConfig,
    arena: &Arena,
    index: u64,
    record_transcript: bool,
) -> Result<(TrialReport, Option<Transcript>), HarnessError> {
    let seed = trial_seed(cfg.seed, index);
    let params = ProtocolParams::new(cfg.p, cfg.delta)?;
    let candidates = placement_candidates(arena);
    let policies = cfg.scheduler.policies();

    let placement = match cfg.placement {
        Placement::Fixed(v) => {
            if v == arena.tp.homebase() || v >= arena.graph.node_count() {
                return Err(HarnessError::InvalidParams(format!("bad fixed placement {v}")));
            }
            v
        }
        Placement::Exhaustive => candidates[(index as usize) % candidates.len()],
        Placement::Random => {
            let mut r = SplitMix64::new(seed ^ 0xD1CE);
            candidates[r.index(candidates.len())]
        }
    };
    let policy_choice = match cfg.placement {
        Placement::Exhaustive => {
            policies[(index as usize / candidates.len()) % policies.len()]
        }
        _ => policies[(index as usize) % policies.len()],
    };

    let bundle = build_bundle(
        cfg.protocol,
        &arena.graph,
        &arena.tp,
        &arena.partition,
        params,
        None,
        arena.tp.rank(placement),
    )?;
    let victim = (index % bundle.agent_count() as u64) as u32;
    let policy = policy_choice.to_policy(victim);

    let mut engine_cfg = EngineConfig::new(
        arena.graph.clone(),
        arena.tp.clone(),
        placement,
        cfg.q_true,
        cfg.protocol.whiteboard_mode(),
        policy,
        seed,
    );
    engine_cfg.record_transcript = record_transcript;

    let record = run_to_completion(&engine_cfg, bundle)
        .map_err(|source| HarnessError::TrialFailed { seed, source })?;

    let outcome = classify(&record);
    let correct = outcome.is_correct(&arena.tp, placement);
    let no_output = matches!(outcome, OutcomeKind::NoOutput);
    let wrong = !correct && !no_output;
    let reporter_alive_at_home = record
        .outcome
        .map(|r| record.agents[r.agent as usize].alive_at(arena.tp.homebase()))
        .unwrap_or(false);
    let mut team_moves = BTreeMap::new();
    for a in &record.agents {
        *team_moves.entry(a.team.clone()).or_insert(0) += a.moves;
    }

    let report = TrialReport {
        index,
        seed,
        placement,
        policy: policy_choice.name().to_string(),
        outcome,
        correct,
        wrong,
        no_output,
        total_moves: record.total_moves,
        team_moves,
        agents_spawned: record.agents.len(),
        deaths: record.deaths(),
        survivors: record.survivors(),
        reporter_alive_at_home,
        survived_crossing: record.survived_crossing,
        delta_used: delta_used(cfg.protocol, params, arena.tp.radius),
        events: record.events_processed,
    };
    Ok((report, record.transcript))
}

/// Runs the full trial matrix, in parallel when `threads > 1`. Results are
/// identical regardless of thread count.
pub fn run_trials(
    cfg: &ExperimentConfig,
    arena: &Arena,
    threads: usize,
) -> Result<Vec<TrialReport>, HarnessError> {
    cfg.validate()?;
    let total = cfg.trials as usize;
    let threads = threads.clamp(1, total.max(1));
    let mut slots: Vec<Option<Result<TrialReport, HarnessError>>> =
        (0..total).map(|_| None).collect();

    if threads <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(run_one_trial(cfg, arena, i as u64, false).map(|(t, _)| t));
        }
    } else {
        let chunk = total.div_ceil(threads);
        std::thread::scope(|scope| {
            for (c, piece) in slots.chunks_mut(chunk).enumerate() {
                scope.spawn(move || {
                    for (j, slot) in piece.iter_mut().enumerate() {
                        let i = (c * chunk + j) as u64;
                        *slot = Some(run_one_trial(cfg, arena, i, false).map(|(t, _)| t));
                    }
                });
            }
        });
    }

    slots
        .into_iter()
        .map(|s| s.expect("every trial slot filled"))
        .collect()
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(wrong: u64, n: u64, z: f64) -> Result<(f64, f64), HarnessError> {
    if n == 0 {
        return Err(HarnessError::InvalidParams("wilson interval needs n >= 1".into()));
    }
    if wrong > n {
        return Err(HarnessError::InvalidParams("wrong > n".into()));
    }
    let nf = n as f64;
    let phat = wrong as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = (z / denom) * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // at the extremes the closed form is exactly 0 or 1; keep it that way
    // through the floating-point dust
    let lo = if wrong == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if wrong == n { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownCell {
    pub policy: String,
    pub placement: String,
    pub trials: u64,
    pub correct: u64,
    pub wrong: u64,
    pub no_output: u64,
    pub error_rate: f64,
    pub moves_mean: f64,
    pub moves_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub arena: String,
    pub protocol: ProtocolId,
    pub n: usize,
    pub edges: usize,
    pub size: usize,
    pub radius: usize,
    pub interval_count: usize,
    pub p: f64,
    pub q_true: f64,
    pub delta: f64,
    pub seed: u64,
    pub scheduler: String,
    pub trials: u64,
    pub correct_count: u64,
    pub wrong_count: u64,
    pub no_output_count: u64,
    pub error_rate: f64,
    pub wilson95: (f64, f64),
    /// Wrong rate conditioned on producing an output; reported, not part of
    /// the asserted guarantees.
    pub conditional_error_rate: f64,
    pub moves_mean: f64,
    pub moves_max: u64,
    pub agents_max_used: usize,
    pub min_survivors: usize,
    pub fitted_constant: f64,
    pub breakdown: Vec<BreakdownCell>,
}

pub fn summarize(
    cfg: &ExperimentConfig,
    arena: &Arena,
    trials: &[TrialReport],
) -> Result<ExperimentReport, HarnessError> {
    let total = trials.len() as u64;
    let wrong_count = trials.iter().filter(|t| t.wrong).count() as u64;
    let correct_count = trials.iter().filter(|t| t.correct).count() as u64;
    let no_output_count = trials.iter().filter(|t| t.no_output).count() as u64;
    let error_rate = wrong_count as f64 / total as f64;
    let decided = correct_count + wrong_count;
    let conditional_error_rate = if decided > 0 {
        wrong_count as f64 / decided as f64
    } else {
        0.0
    };
    let moves_mean =
        trials.iter().map(|t| t.total_moves as f64).sum::<f64>() / total as f64;
    let moves_max = trials.iter().map(|t| t.total_moves).max().unwrap_or(0);
    let fitted_constant = trials
        .iter()
        .map(|t| {
            t.total_moves as f64
                / envelope_base(
                    cfg.protocol,
                    arena.graph.node_count(),
                    arena.tp.size,
                    arena.tp.radius,
                    t.delta_used,
                )
        })
        .fold(0.0f64, f64::max);

    let mut cells: BTreeMap<(String, String), Vec<&TrialReport>> = BTreeMap::new();
    for t in trials {
        let placement = match cfg.placement {
            Placement::Random => "random".to_string(),
            _ => format!("v{}", arena.tp.rank(t.placement)),
        };
        cells.entry((t.policy.clone(), placement)).or_default().push(t);
    }
    let breakdown = cells
        .into_iter()
        .map(|((policy, placement), ts)| {
            let n = ts.len() as u64;
            let wrong = ts.iter().filter(|t| t.wrong).count() as u64;
            BreakdownCell {
                policy,
                placement,
                trials: n,
                correct: ts.iter().filter(|t| t.correct).count() as u64,
                wrong,
                no_output: ts.iter().filter(|t| t.no_output).count() as u64,
                error_rate: wrong as f64 / n as f64,
                moves_mean: ts.iter().map(|t| t.total_moves as f64).sum::<f64>() / n as f64,
                moves_max: ts.iter().map(|t| t.total_moves).max().unwrap_or(0),
            }
        })
        .collect();

    Ok(ExperimentReport {
        arena: cfg.arena.label(),
        protocol: cfg.protocol,
        n: arena.graph.node_count(),
        edges: arena.graph.edge_count(),
        size: arena.tp.size,
        radius: arena.tp.radius,
        interval_count: arena.partition.len(),
        p: cfg.p,
        q_true: cfg.q_true,
        delta: cfg.delta,
        seed: cfg.seed,
        scheduler: cfg.scheduler.name().to_string(),
        trials: total,
        correct_count,
        wrong_count,
        no_output_count,
        error_rate,
        wilson95: wilson_interval(wrong_count, total, 1.96)?,
        conditional_error_rate,
        moves_mean,
        moves_max,
        agents_max_used: trials.iter().map(|t| t.agents_spawned).max().unwrap_or(0),
        min_survivors: trials.iter().map(|t| t.survivors).min().unwrap_or(0),
        fitted_constant,
        breakdown,
    })
}

/// End-to-end: prepare the arena, run the matrix, aggregate.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let arena = Arena::prepare(&cfg.arena, cfg.seed)?;
    let trials = run_trials(cfg, &arena, threads)?;
    summarize(cfg, &arena, &trials)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Serializes a report: JSON verbatim, or CSV with one row per
/// (policy, placement) cell plus a totals row.
pub fn emit_report<W: Write>(
    report: &ExperimentReport,
    format: ReportFormat,
    out: &mut W,
) -> Result<(), HarnessError> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            out.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            writeln!(
                out,
                "policy,placement,trials,correct,wrong,no_output,error_rate,moves_mean,moves_max"
            )?;
            for c in &report.breakdown {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    c.policy,
                    c.placement,
                    c.trials,
                    c.correct,
                    c.wrong,
                    c.no_output,
                    c.error_rate,
                    c.moves_mean,
                    c.moves_max
                )?;
            }
            writeln!(
                out,
                "total,,{},{},{},{},{},{},{}",
                report.trials,
                report.correct_count,
                report.wrong_count,
                report.no_output_count,
                report.error_rate,
                report.moves_mean,
                report.moves_max
            )?;
        }
    }
    Ok(())
}

/// Self-contained transcript file header: everything needed to re-run the
/// trial and compare event-by-event.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub graph: Graph,
    pub arena_label: String,
    pub protocol: ProtocolId,
    pub p: f64,
    pub q_true: f64,
    pub delta: f64,
    pub master_seed: u64,
    pub trial_index: u64,
    pub scheduler: SchedulerChoice,
    pub placement: Placement,
}

/// Runs trial `index` of `cfg` with transcript recording and writes a JSONL
/// document: header line, then one event per line.
pub fn write_transcript<W: Write>(
    cfg: &ExperimentConfig,
    index: u64,
    out: &mut W,
) -> Result<TrialReport, HarnessError> {
    cfg.validate()?;
    let arena = Arena::prepare(&cfg.arena, cfg.seed)?;
    let (trial, transcript) = run_one_trial(cfg, &arena, index, true)?;
    let header = TranscriptHeader {
        graph: (*arena.graph).clone(),
        arena_label: cfg.arena.label(),
        protocol: cfg.protocol,
        p: cfg.p,
        q_true: cfg.q_true,
        delta: cfg.delta,
        master_seed: cfg.seed,
        trial_index: index,
        scheduler: cfg.scheduler,
        placement: cfg.placement,
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for ev in transcript.expect("recording was requested") {
        writeln!(out, "{}", serde_json::to_string(&ev)?)?;
    }
    Ok(trial)
}

/// Re-runs a transcript document against its embedded config and verifies
/// the event log matches byte for byte. Returns the number of events on
/// success.
pub fn replay_transcript(text: &str) -> Result<usize, HarnessError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: TranscriptHeader = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| HarnessError::InvalidParams("empty transcript".into()))?,
    )?;
    let cfg = ExperimentConfig {
        arena: ArenaSource::Graph { label: header.arena_label.clone(), graph: header.graph.clone() },
        protocol: header.protocol,
        p: header.p,
        q_true: header.q_true,
        delta: header.delta,
        trials: header.trial_index + 1,
        seed: header.master_seed,
        scheduler: header.scheduler,
        placement: header.placement,
        guarantee_mode: false,
    };
    let arena = Arena::prepare(&cfg.arena, cfg.seed)?;
    let (_, transcript) = run_one_trial(&cfg, &arena, header.trial_index, true)?;
    let replayed = transcript.expect("recording was requested");
    let expected: Vec<String> = lines.map(str::to_string).collect();
    if replayed.len() != expected.len() {
        return Err(HarnessError::InvalidParams(format!(
            "replay produced {} events, transcript has {}",
            replayed.len(),
            expected.len()
        )));
    }
    for (i, (ev, line)) in replayed.iter().zip(expected.iter()).enumerate() {
        let got = serde_json::to_string(ev)?;
        if got != *line {
            return Err(HarnessError::InvalidParams(format!(
                "replay diverges at event {i}: got {got}, transcript has {line}"
            )));
        }
    }
    Ok(replayed.len())
}

/// Document emitted by the `tp` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TpDocument {
    pub ordering: Vec<NodeId>,
    pub homebase: NodeId,
    pub terminal: NodeId,
    pub pi_l: Vec<NodeId>,
    pub pi_r: Vec<NodeId>,
    pub size: usize,
    pub radius: usize,
    pub partition: Vec<(usize, usize, usize)>,
}

impl TpDocument {
    pub fn from_arena(arena: &Arena) -> Self {
        TpDocument {
            ordering: arena.tp.ordering.perm.clone(),
            homebase: arena.tp.homebase(),
            terminal: arena.tp.ordering.terminal,
            pi_l: arena.tp.pi_l.clone(),
            pi_r: arena.tp.pi_r.clone(),
            size: arena.tp.size,
            radius: arena.tp.radius,
            partition: arena
                .partition
                .intervals
                .iter()
                .map(|u| (u.lo, u.hi, u.weight))
                .collect(),
        }
    }
}
