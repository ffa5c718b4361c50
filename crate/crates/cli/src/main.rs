//! `rbhs`: seeded experiments, traversal-pair inspection, transcript replay,
//! and the acceptance suite for the rB-hole search simulator.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rbhs_core::acceptance::{run_battery, DEFAULT_SEED};
use rbhs_core::harness::{
    emit_report, replay_transcript, run_experiment, write_transcript, Arena, ArenaSource,
    ExperimentConfig, Placement, ReportFormat, SchedulerChoice, TpDocument,
};
use rbhs_core::{parse_graph, GraphSpec, ProtocolId};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "rbhs", version, about = "rB-hole search: protocols, simulator, Monte Carlo harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte Carlo experiment and emit a report.
    Run(RunArgs),
    /// Compute the traversal pair and viable partition for an arena.
    Tp(TpArgs),
    /// Re-verify a recorded transcript against its embedded config.
    Replay(ReplayArgs),
    /// Run the full acceptance battery; exits nonzero on any failure.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Generator descriptor (ring:16, complete:9, grid:3x4,
    /// random-biconnected:12,20) or a path to an edge-list file.
    #[arg(long)]
    graph: String,
    /// coloring | reduction | reducer | algo1 | algo2 | wbfree-few-agents |
    /// wbfree-few-moves | ring-bhs
    #[arg(long)]
    protocol: ProtocolArg,
    /// Assumed lower bound on the kill probability.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Actual kill probability of the hole.
    #[arg(long = "q-true", default_value_t = 1.0)]
    q_true: f64,
    /// Error budget.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Master seed (RBHS_SEED overrides).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// random | round-robin | adversary-slow | all
    #[arg(long, default_value = "random")]
    scheduler: String,
    /// exhaustive | random | a fixed node id
    #[arg(long, default_value = "random")]
    placement: String,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv
    #[arg(long, default_value = "json")]
    format: String,
    /// Record trial 0's event log to this JSONL path (replayable).
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Worker threads for the trial matrix.
    #[arg(long)]
    jobs: Option<usize>,
    /// Allow q_true < p (outside the guarantee regime).
    #[arg(long, default_value_t = false)]
    no_guarantee_check: bool,
}

#[derive(Clone)]
struct ProtocolArg(ProtocolId);

impl std::str::FromStr for ProtocolArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<ProtocolId>().map(ProtocolArg).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct TpArgs {
    #[arg(long)]
    graph: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    transcript: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn arena_source(arg: &str) -> Result<ArenaSource> {
    if let Ok(spec) = arg.parse::<GraphSpec>() {
        return Ok(ArenaSource::Spec(spec));
    }
    let path = Path::new(arg);
    if !path.exists() {
        bail!("'{arg}' is neither a generator descriptor nor an existing edge-list file");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
    let graph = parse_graph(&text)?;
    Ok(ArenaSource::Graph { label: arg.to_string(), graph })
}

fn seed_override(seed: u64) -> u64 {
    std::env::var("RBHS_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(seed)
}

fn write_out(out: &Option<PathBuf>, body: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let cfg = ExperimentConfig {
        arena: arena_source(&args.graph)?,
        protocol: args.protocol.0,
        p: args.p,
        q_true: args.q_true,
        delta: args.delta,
        trials: args.trials,
        seed: seed_override(args.seed),
        scheduler: args.scheduler.parse::<SchedulerChoice>()?,
        placement: args.placement.parse::<Placement>()?,
        guarantee_mode: !args.no_guarantee_check,
    };
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));

    if let Some(path) = &args.transcript {
        let mut buf = Vec::new();
        write_transcript(&cfg, 0, &mut buf)?;
        fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))?;
    }

    let report = run_experiment(&cfg, jobs)?;
    let format = match args.format.as_str() {
        "json" => ReportFormat::Json,
        "csv" => ReportFormat::Csv,
        other => bail!("unknown format '{other}'"),
    };
    let mut buf = Vec::new();
    emit_report(&report, format, &mut buf)?;
    write_out(&args.out, &buf)?;
    Ok(0)
}

fn cmd_tp(args: TpArgs) -> Result<i32> {
    let arena = Arena::prepare(&arena_source(&args.graph)?, seed_override(args.seed))?;
    let doc = TpDocument::from_arena(&arena);
    let mut body = serde_json::to_vec_pretty(&doc)?;
    body.push(b'\n');
    write_out(&args.out, &body)?;
    Ok(0)
}

fn cmd_replay(args: ReplayArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.transcript)
        .with_context(|| format!("reading {}", args.transcript.display()))?;
    match replay_transcript(&text) {
        Ok(events) => {
            println!("replay ok: {events} events reproduced byte-identically");
            Ok(0)
        }
        Err(e) => {
            eprintln!("replay failed: {e}");
            Ok(1)
        }
    }
}

fn cmd_suite(args: SuiteArgs) -> Result<i32> {
    let seed = seed_override(args.seed);
    let results = run_battery(seed);
    let mut all = true;
    for r in &results {
        println!("{}", r.line());
        all &= r.passed;
    }
    Ok(if all { 0 } else { 1 })
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Tp(a) => cmd_tp(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Suite(a) => cmd_suite(a),
    };
    match code {
        Ok(c) => std::process::exit(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
