//! `dcop`: generate instances, solve them, run experiment sweeps and penalty diagnostics.
//!
//! Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use dcop_core::benchmarks::{generate, GeneratorParams};
use dcop_core::engine::{run, RunOptions};
use dcop_core::experiment::{run_experiment, ExperimentConfig, ExperimentError, HarnessOptions};
use dcop_core::{instance, AlgorithmConfig, Problem};

#[derive(Parser)]
#[command(name = "dcop", version, about = "Distributed constraint optimization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance.
    Generate(GenerateArgs),
    /// Run one algorithm on an instance and write its per-round trace.
    Solve(SolveArgs),
    /// Run an experiment config and write per-round aggregates.
    Experiment(SweepArgs),
    /// Like `experiment`, with penalty statistics (gdba and dgls only).
    Diagnose(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long = "domain")]
    domain_size: Option<usize>,
    #[arg(long)]
    cost_lo: Option<u32>,
    #[arg(long)]
    cost_hi: Option<u32>,
    #[arg(long)]
    exact_edges: bool,
    #[arg(long)]
    m0: Option<usize>,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    meetings: Option<usize>,
    #[arg(long)]
    persons: Option<usize>,
    #[arg(long)]
    travel_lo: Option<u32>,
    #[arg(long)]
    travel_hi: Option<u32>,
    #[arg(long)]
    meetings_per_person: Option<usize>,
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long)]
    weight_lo: Option<u32>,
    #[arg(long)]
    weight_hi: Option<u32>,
}

/// Algorithm selection by flags, e.g. `--algo dgls --manner M --gamma 0.5 --scope col`.
#[derive(Args, Default)]
struct AlgoArgs {
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    allow_sideways: bool,
    #[arg(long)]
    offer_p: Option<f64>,
    #[arg(long)]
    manner: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    scope: Option<String>,
    #[arg(long)]
    violation: Option<String>,
    #[arg(long)]
    evaporate_on_qlm_only: bool,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    damp_direction: Option<String>,
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the round-0 row.
    #[arg(long)]
    include_initial: bool,
    #[arg(long)]
    penalties: bool,
    #[arg(long)]
    messages: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Replaces the config's algorithm list with a single algorithm.
    #[command(flatten)]
    algo: AlgoArgs,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Aggregated CSV path; falls back to the config's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "DCOP_THREADS")]
    threads: Option<usize>,
    /// Also write unaggregated per-run rows here.
    #[arg(long)]
    per_run_output: Option<PathBuf>,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Experiment(args) => cmd_sweep(args, false),
        Command::Diagnose(args) => cmd_sweep(args, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn insert<T: Into<Value>>(map: &mut Map<String, Value>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v.into());
    }
}

fn family_name(raw: &str) -> String {
    match raw.replace('-', "_").as_str() {
        "wgc" => "weighted_graph_coloring".to_string(),
        "meeting" | "meetings" => "meeting_scheduling".to_string(),
        other => other.to_string(),
    }
}

fn generator_params(args: &GenerateArgs) -> Result<GeneratorParams, Failure> {
    let mut map = Map::new();
    map.insert("family".into(), family_name(&args.family).into());
    insert(&mut map, "n", args.n);
    insert(&mut map, "density", args.density);
    insert(&mut map, "domain_size", args.domain_size);
    insert(&mut map, "cost_lo", args.cost_lo);
    insert(&mut map, "cost_hi", args.cost_hi);
    insert(&mut map, "exact_edges", args.exact_edges.then_some(true));
    insert(&mut map, "m0", args.m0);
    insert(&mut map, "m1", args.m1);
    insert(&mut map, "rows", args.rows);
    insert(&mut map, "cols", args.cols);
    insert(&mut map, "slots", args.slots);
    insert(&mut map, "meetings", args.meetings);
    insert(&mut map, "persons", args.persons);
    insert(&mut map, "travel_lo", args.travel_lo);
    insert(&mut map, "travel_hi", args.travel_hi);
    insert(&mut map, "meetings_per_person", args.meetings_per_person);
    insert(&mut map, "colors", args.colors);
    insert(&mut map, "weight_lo", args.weight_lo);
    insert(&mut map, "weight_hi", args.weight_hi);
    let params: GeneratorParams = serde_json::from_value(Value::Object(map)).map_err(|e| usage(anyhow!("{e}")))?;
    params.validate().map_err(usage)?;
    Ok(params)
}

fn cmd_generate(args: GenerateArgs) -> Outcome {
    let params = generator_params(&args)?;
    let problem: Problem = generate(&params, args.seed).map_err(runtime)?;
    let degrees: Vec<usize> = (0..problem.n_agents()).map(|a| problem.degree(a)).collect();
    let summary = format!(
        "{} instance: {} agents, {} edges, degree min {} mean {:.2} max {}",
        params.family(),
        problem.n_agents(),
        problem.edges().len(),
        degrees.iter().min().unwrap_or(&0),
        degrees.iter().sum::<usize>() as f64 / degrees.len().max(1) as f64,
        degrees.iter().max().unwrap_or(&0),
    );
    match &args.out {
        Some(path) => {
            instance::save(&problem, path).with_context(|| format!("writing {}", path.display())).map_err(runtime)?;
            println!("{summary}");
        }
        None => {
            instance::write(&problem, io::stdout().lock()).map_err(runtime)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

impl AlgoArgs {
    fn is_set(&self) -> bool {
        self.algo.is_some()
    }

    fn has_keys(&self) -> bool {
        self.p.is_some()
            || self.allow_sideways
            || self.offer_p.is_some()
            || self.manner.is_some()
            || self.gamma.is_some()
            || self.scope.is_some()
            || self.violation.is_some()
            || self.evaporate_on_qlm_only
            || self.lambda.is_some()
            || self.damp_direction.is_some()
            || self.noise.is_some()
    }

    fn to_config(&self) -> Result<AlgorithmConfig, Failure> {
        let Some(algo) = &self.algo else {
            return Err(usage(anyhow!("--algo is required")));
        };
        let mut map = Map::new();
        map.insert("algo".into(), json!(algo.to_lowercase()));
        insert(&mut map, "p", self.p);
        insert(&mut map, "allow_sideways", self.allow_sideways.then_some(true));
        insert(&mut map, "offer_p", self.offer_p);
        insert(&mut map, "manner", self.manner.clone());
        insert(&mut map, "gamma", self.gamma);
        insert(&mut map, "scope", self.scope.clone());
        insert(&mut map, "violation", self.violation.clone());
        insert(&mut map, "evaporate_on_qlm_only", self.evaporate_on_qlm_only.then_some(true));
        insert(&mut map, "lambda", self.lambda);
        insert(&mut map, "damp_direction", self.damp_direction.clone());
        insert(&mut map, "noise", self.noise);
        let config: AlgorithmConfig =
            serde_json::from_value(Value::Object(map)).map_err(|e| usage(anyhow!("algorithm {algo}: {e}")))?;
        config.validate().map_err(usage)?;
        Ok(config)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).with_context(|| format!("creating {}", path.display())).map_err(runtime)
}

fn cmd_solve(args: SolveArgs) -> Outcome {
    let algo = args.algo.to_config()?;
    if args.rounds == 0 {
        return Err(usage(anyhow!("--rounds must be at least 1")));
    }
    if args.penalties && !algo.has_penalties() {
        return Err(usage(anyhow!("{} keeps no penalties", algo.label())));
    }
    let problem: Problem =
        instance::load(&args.instance).with_context(|| format!("reading {}", args.instance.display())).map_err(runtime)?;
    let opts = RunOptions::new(args.rounds, args.seed).penalties(args.penalties).messages(args.messages);
    let trace = run(&problem, algo.factory(), &opts).map_err(runtime)?;
    let summary = format!("{}: best_so_far {} after {} rounds", algo.label(), trace.final_best(), args.rounds);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            trace.write_csv(&mut w, args.include_initial).and_then(|_| w.flush()).map_err(runtime)?;
            println!("{summary}");
        }
        None => {
            trace.write_csv(io::stdout().lock(), args.include_initial).map_err(runtime)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn load_config(args: &SweepArgs) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))
        .map_err(runtime)?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| usage(anyhow!("{}: {e}", args.config.display())))?;
    if args.algo.is_set() {
        config.algorithms = vec![args.algo.to_config()?];
    } else if args.algo.has_keys() {
        return Err(usage(anyhow!("algorithm keys given without --algo")));
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(rounds) = args.rounds {
        config.rounds = rounds;
    }
    Ok(config)
}

fn cmd_sweep(args: SweepArgs, diagnose: bool) -> Outcome {
    let config = load_config(&args)?;
    let opts = HarnessOptions { threads: args.threads, diagnose };
    let result = run_experiment(&config, opts).map_err(|e| match e {
        ExperimentError::Invalid(_) | ExperimentError::Config(_) | ExperimentError::NoPenalties(_) => usage(e),
        ExperimentError::Generator { .. } if config.benchmark.validate().is_err() => usage(e),
        other => runtime(other),
    })?;
    match args.out.as_ref().or(config.output.as_ref()) {
        Some(path) => {
            let mut w = create(path)?;
            result.write_aggregate_csv(&mut w).and_then(|_| w.flush()).map_err(runtime)?;
        }
        None => result.write_aggregate_csv(io::stdout().lock()).map_err(runtime)?,
    }
    if let Some(path) = &args.per_run_output {
        let mut w = create(path)?;
        result.write_per_run_csv(&mut w).and_then(|_| w.flush()).map_err(runtime)?;
    }
    for (algo, rows) in result.aggregate() {
        if let Some(last) = rows.last() {
            eprintln!("{}: mean best_so_far {} at round {} over {} runs", algo.label(), last.mean_best_so_far, last.round, last.runs);
        }
    }
    Ok(())
}
