//! Experiment harness: instances x repeats x algorithms, aggregated per round.
//!
//! Instance `k` is generated with seed `split(master_seed, k)`; repeat `r` of it
//! runs with seed `split(split(master_seed, k), r)`, the same for every algorithm.
//! Runs may execute on any number of threads; results are gathered in canonical
//! order (algorithm, instance, repeat) so every output is identical regardless of
//! scheduling.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithm::{AlgorithmConfig, ConfigError};
use crate::benchmarks::{generate, GeneratorError, GeneratorParams};
use crate::engine::{run, split, AnytimeTrace, EngineError, PenaltyStats, RunOptions};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: GeneratorParams,
    pub instances: usize,
    pub repeats_per_instance: usize,
    pub rounds: usize,
    pub algorithms: Vec<AlgorithmConfig>,
    pub master_seed: u64,
    /// Default destination of the aggregated CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("instance {instance}: {source}")]
    Generator { instance: usize, source: GeneratorError },
    #[error("{label} on instance {instance}, repeat {repeat}: {source}")]
    Run { label: String, instance: usize, repeat: usize, source: EngineError },
    #[error("penalty diagnostics need gdba or dgls, got {0}")]
    NoPenalties(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.instances == 0 || self.repeats_per_instance == 0 || self.rounds == 0 {
            return Err(ExperimentError::Invalid("instances, repeats_per_instance and rounds must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(ExperimentError::Invalid("no algorithms listed".into()));
        }
        self.benchmark.validate().map_err(|source| ExperimentError::Generator { instance: 0, source })?;
        for a in &self.algorithms {
            a.validate()?;
        }
        Ok(())
    }

    pub fn runs_per_algorithm(&self) -> usize {
        self.instances * self.repeats_per_instance
    }
}

pub fn instance_seed(master_seed: u64, instance: usize) -> u64 {
    split(master_seed, instance as u64)
}

pub fn run_seed(master_seed: u64, instance: usize, repeat: usize) -> u64 {
    split(instance_seed(master_seed, instance), repeat as u64)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HarnessOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Record penalty statistics (requires every algorithm to be gdba or dgls).
    pub diagnose: bool,
}

/// Series of one run, round 0 first.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub instance: usize,
    pub repeat: usize,
    pub current_cost: Vec<f64>,
    pub best_so_far: Vec<f64>,
    pub penalty: Option<Vec<PenaltyStats>>,
}

impl RunSeries {
    fn from_trace(instance: usize, repeat: usize, trace: &AnytimeTrace) -> Self {
        let penalty: Option<Vec<PenaltyStats>> = trace.all_records().map(|r| r.penalty).collect();
        Self {
            instance,
            repeat,
            current_cost: trace.all_records().map(|r| r.current_cost).collect(),
            best_so_far: trace.all_records().map(|r| r.best_so_far).collect(),
            penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRuns {
    pub algorithm: AlgorithmConfig,
    pub runs: Vec<RunSeries>,
}

/// Aggregate over the runs of one algorithm at one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub round: usize,
    pub mean_best_so_far: f64,
    pub std_best_so_far: f64,
    pub runs: usize,
    pub penalty: Option<PenaltyStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rounds: usize,
    pub diagnose: bool,
    pub algorithms: Vec<AlgorithmRuns>,
}

pub const AGGREGATE_CSV_HEADER: &str = "algorithm,config_id,round,mean_best_so_far,std_best_so_far,runs";
const PENALTY_COLUMNS: &str = ",penalty_mean,penalty_niqr,penalty_cv";
pub const PER_RUN_CSV_HEADER: &str = "algorithm,config_id,instance,repeat,round,current_cost,best_so_far";

pub fn run_experiment(config: &ExperimentConfig, opts: HarnessOptions) -> Result<ExperimentResult, ExperimentError> {
    config.validate()?;
    if opts.diagnose {
        if let Some(a) = config.algorithms.iter().find(|a| !a.has_penalties()) {
            return Err(ExperimentError::NoPenalties(a.label()));
        }
    }
    match opts.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| ExperimentError::Pool(e.to_string()))?;
            pool.install(|| execute(config, opts.diagnose))
        }
        None => execute(config, opts.diagnose),
    }
}

fn execute(config: &ExperimentConfig, diagnose: bool) -> Result<ExperimentResult, ExperimentError> {
    let problems: Vec<Problem<f64>> = (0..config.instances)
        .into_par_iter()
        .map(|k| {
            generate(&config.benchmark, instance_seed(config.master_seed, k))
                .map_err(|source| ExperimentError::Generator { instance: k, source })
        })
        .collect::<Result<_, _>>()?;

    let tasks: Vec<(usize, usize, usize)> = (0..config.algorithms.len())
        .flat_map(|a| (0..config.instances).flat_map(move |k| (0..config.repeats_per_instance).map(move |r| (a, k, r))))
        .collect();
    let series: Vec<RunSeries> = tasks
        .par_iter()
        .map(|&(a, k, r)| {
            let algorithm = &config.algorithms[a];
            let opts = RunOptions::new(config.rounds, run_seed(config.master_seed, k, r)).penalties(diagnose);
            let trace = run(&problems[k], algorithm.factory(), &opts).map_err(|source| ExperimentError::Run {
                label: algorithm.label(),
                instance: k,
                repeat: r,
                source,
            })?;
            Ok(RunSeries::from_trace(k, r, &trace))
        })
        .collect::<Result<_, ExperimentError>>()?;

    let per_algo = config.runs_per_algorithm();
    let mut chunks = series.into_iter();
    let algorithms = config
        .algorithms
        .iter()
        .map(|&algorithm| AlgorithmRuns { algorithm, runs: chunks.by_ref().take(per_algo).collect() })
        .collect();
    Ok(ExperimentResult { rounds: config.rounds, diagnose, algorithms })
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    // sample standard deviation; a single run has none
    let std = if n > 1 { (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, std)
}

impl AlgorithmRuns {
    /// Per-round aggregates for rounds `first..=rounds`.
    pub fn aggregate(&self, first: usize, rounds: usize) -> Vec<AggregateRow> {
        (first..=rounds)
            .map(|t| {
                let (mean, std) = mean_std(self.runs.iter().map(|r| r.best_so_far[t]));
                let penalty = self
                    .runs
                    .iter()
                    .map(|r| r.penalty.as_ref().map(|p| p[t]))
                    .collect::<Option<Vec<_>>>()
                    .map(|stats| {
                        let n = stats.len() as f64;
                        PenaltyStats {
                            mean: stats.iter().map(|s| s.mean).sum::<f64>() / n,
                            normalized_iqr: stats.iter().map(|s| s.normalized_iqr).sum::<f64>() / n,
                            cv: stats.iter().map(|s| s.cv).sum::<f64>() / n,
                            empty: stats.iter().all(|s| s.empty),
                        }
                    });
                AggregateRow { round: t, mean_best_so_far: mean, std_best_so_far: std, runs: self.runs.len(), penalty }
            })
            .collect()
    }
}

impl ExperimentResult {
    /// First aggregated round: 0 in diagnose mode (to show the all-zero start), 1 otherwise.
    pub fn first_round(&self) -> usize {
        usize::from(!self.diagnose)
    }

    pub fn aggregate(&self) -> Vec<(&AlgorithmConfig, Vec<AggregateRow>)> {
        self.algorithms.iter().map(|a| (&a.algorithm, a.aggregate(self.first_round(), self.rounds))).collect()
    }

    pub fn write_aggregate_csv(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "{AGGREGATE_CSV_HEADER}")?;
        if self.diagnose {
            write!(w, "{PENALTY_COLUMNS}")?;
        }
        writeln!(w)?;
        for (algo, rows) in self.aggregate() {
            let (name, id) = (algo.name(), algo.config_id());
            for row in rows {
                write!(w, "{name},\"{id}\",{},{},{},{}", row.round, row.mean_best_so_far, row.std_best_so_far, row.runs)?;
                if let Some(p) = row.penalty.filter(|_| self.diagnose) {
                    write!(w, ",{},{},{}", p.mean, p.normalized_iqr, p.cv)?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_aggregate_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("ascii output")
    }

    /// Unaggregated rows, one per (algorithm, instance, repeat, round).
    pub fn write_per_run_csv(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "{PER_RUN_CSV_HEADER}")?;
        if self.diagnose {
            write!(w, "{PENALTY_COLUMNS}")?;
        }
        writeln!(w)?;
        for a in &self.algorithms {
            let (name, id) = (a.algorithm.name(), a.algorithm.config_id());
            for run in &a.runs {
                for t in self.first_round()..=self.rounds {
                    write!(w, "{name},\"{id}\",{},{},{t},{},{}", run.instance, run.repeat, run.current_cost[t], run.best_so_far[t])?;
                    if let Some(p) = run.penalty.as_ref().filter(|_| self.diagnose) {
                        write!(w, ",{},{},{}", p[t].mean, p[t].normalized_iqr, p[t].cv)?;
                    }
                    writeln!(w)?;
                }
            }
        }
        Ok(())
    }
}
