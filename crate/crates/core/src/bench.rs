//! Seeded multi-trial benchmarks and their CSV/JSON output.
//!
//! Trial `t` runs every requested algorithm with seed `base_seed + t`, so all
//! algorithms of a trial consume the same sample sequence. Trials run on a
//! worker pool; reports come back ordered by trial, then by algorithm as
//! requested.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::FactorizationHeuristic;
use crate::planners::{self, PlanResult, PlannerParams};
use crate::scenario::Scenario;

/// How `edges` is counted in every report.
pub const EDGE_COUNT_CONVENTION: &str =
    "directed: an undirected standard edge counts twice, a one-way standard edge or a splitting edge once";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "rrg")]
    Rrg,
    #[serde(rename = "factrrg")]
    FactRrg,
    #[serde(rename = "prmstar")]
    PrmStar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Rrg, Algorithm::FactRrg, Algorithm::PrmStar];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Rrg => "rrg",
            Algorithm::FactRrg => "factrrg",
            Algorithm::PrmStar => "prmstar",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| {
                Error::Setup(format!(
                    "unknown algorithm {s:?}; expected rrg, factrrg or prmstar"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub params: PlannerParams,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            params: PlannerParams::default(),
            algorithms: vec![Algorithm::Rrg, Algorithm::FactRrg],
            trials: 20,
            base_seed: 0,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub run_id: String,
    pub algorithm: Algorithm,
    pub trial: usize,
    pub seed: u64,
    pub cost_trace: Vec<(usize, Option<f64>)>,
    pub final_cost: Option<f64>,
    pub nodes: usize,
    pub edges: usize,
    pub splitting_edges: usize,
    pub iterations: usize,
    pub iter_ms_mean: f64,
    pub iter_ms_std: f64,
    /// Hash of the first logged samples; equal within a trial when paired seeding holds.
    pub sample_fingerprint: u64,
    /// Set when the trial could not run; all counts are then zero.
    pub error: Option<String>,
}

/// FNV-1a over the bit patterns of every logged coordinate.
pub fn sample_fingerprint(result: &PlanResult) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for s in &result.samples {
        for c in s.coords() {
            for b in c.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    h
}

impl TrialReport {
    fn failed(algorithm: Algorithm, trial: usize, seed: u64, error: &Error) -> Self {
        TrialReport {
            run_id: format!("{}-{}", algorithm.id(), trial),
            algorithm,
            trial,
            seed,
            cost_trace: Vec::new(),
            final_cost: None,
            nodes: 0,
            edges: 0,
            splitting_edges: 0,
            iterations: 0,
            iter_ms_mean: 0.0,
            iter_ms_std: 0.0,
            sample_fingerprint: 0,
            error: Some(error.to_string()),
        }
    }

    fn from_result(algorithm: Algorithm, trial: usize, seed: u64, r: &PlanResult) -> Self {
        TrialReport {
            run_id: format!("{}-{}", algorithm.id(), trial),
            algorithm,
            trial,
            seed,
            cost_trace: r.cost_trace.clone(),
            final_cost: r.final_cost(),
            nodes: r.stats.nodes,
            edges: r.stats.edges,
            splitting_edges: r.stats.splitting_edges,
            iterations: r.iterations,
            iter_ms_mean: r.iter_ms_mean,
            iter_ms_std: r.iter_ms_std,
            sample_fingerprint: sample_fingerprint(r),
            error: None,
        }
    }
}

/// Run one algorithm for one trial and keep the full result.
pub fn run_trial(
    scenario: &Scenario,
    config: &BenchConfig,
    heuristic: &dyn FactorizationHeuristic,
    algorithm: Algorithm,
    trial: usize,
) -> Result<PlanResult> {
    let seed = config.base_seed.wrapping_add(trial as u64);
    planners::run(algorithm, scenario, &config.params, heuristic, seed)
}

pub fn run_benchmark(scenario: &Scenario, config: &BenchConfig) -> Result<Vec<TrialReport>> {
    run_benchmark_with(scenario, config, &|_, _| {})
}

/// `run_benchmark`, handing every successful run's full result to `inspect`
/// (from worker threads) before it is dropped.
pub fn run_benchmark_with(
    scenario: &Scenario,
    config: &BenchConfig,
    inspect: &(dyn Fn(&TrialReport, &PlanResult) + Sync),
) -> Result<Vec<TrialReport>> {
    if config.trials == 0 {
        return Err(Error::Setup("at least one trial is required".into()));
    }
    if config.algorithms.is_empty() {
        return Err(Error::Setup("no algorithm selected".into()));
    }
    config.params.validate()?;
    let heuristic = scenario.heuristic()?;
    let tasks: Vec<(usize, Algorithm)> = (0..config.trials)
        .flat_map(|t| config.algorithms.iter().map(move |&a| (t, a)))
        .collect();
    let work = || {
        tasks
            .par_iter()
            .map(|&(trial, algorithm)| {
                let seed = config.base_seed.wrapping_add(trial as u64);
                match run_trial(scenario, config, heuristic.as_ref(), algorithm, trial) {
                    Ok(result) => {
                        let report = TrialReport::from_result(algorithm, trial, seed, &result);
                        inspect(&report, &result);
                        report
                    }
                    Err(e) => TrialReport::failed(algorithm, trial, seed, &e),
                }
            })
            .collect::<Vec<_>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Setup(e.to_string()))?;
    Ok(pool.install(work))
}

/// Mean and sample standard deviation; `(NaN, NaN)` for no values, std 0 for one.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub trials: usize,
    pub solved: usize,
    pub final_cost_mean: f64,
    pub final_cost_std: f64,
    pub edges_mean: f64,
    pub edges_std: f64,
    pub splitting_edges_mean: f64,
    pub nodes_mean: f64,
    pub ms_per_iter_mean: f64,
    pub ms_per_iter_std: f64,
}

/// Per-algorithm aggregates, in order of first appearance. Final costs are
/// averaged over solved trials; failed trials are excluded throughout.
pub fn summarize(reports: &[TrialReport]) -> Vec<AlgorithmSummary> {
    let mut order: Vec<Algorithm> = Vec::new();
    for r in reports {
        if !order.contains(&r.algorithm) {
            order.push(r.algorithm);
        }
    }
    order
        .into_iter()
        .map(|a| {
            let ok: Vec<&TrialReport> = reports
                .iter()
                .filter(|r| r.algorithm == a && r.error.is_none())
                .collect();
            let costs: Vec<f64> = ok.iter().filter_map(|r| r.final_cost).collect();
            let col = |f: fn(&TrialReport) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let (final_cost_mean, final_cost_std) = mean_std(&costs);
            let (edges_mean, edges_std) = mean_std(&col(|r| r.edges as f64));
            let (ms_per_iter_mean, ms_per_iter_std) = mean_std(&col(|r| r.iter_ms_mean));
            AlgorithmSummary {
                algorithm: a,
                trials: reports.iter().filter(|r| r.algorithm == a).count(),
                solved: costs.len(),
                final_cost_mean,
                final_cost_std,
                edges_mean,
                edges_std,
                splitting_edges_mean: mean_std(&col(|r| r.splitting_edges as f64)).0,
                nodes_mean: mean_std(&col(|r| r.nodes as f64)).0,
                ms_per_iter_mean,
                ms_per_iter_std,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct Versions {
    factplan: &'static str,
    trace_format: u32,
}

#[derive(Debug, Clone, Serialize)]
struct Meta<'a> {
    scenario: &'a Scenario,
    config: &'a BenchConfig,
    edge_count_convention: &'static str,
    versions: Versions,
    /// Trials that failed, with their error.
    failures: Vec<(&'a str, &'a str)>,
}

fn io_err(e: impl fmt::Display) -> Error {
    Error::Setup(format!("cannot write results: {e}"))
}

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Write `trace.csv`, `summary.csv` and `meta.json` into `out_dir`.
pub fn emit_results(
    reports: &[TrialReport],
    scenario: &Scenario,
    config: &BenchConfig,
    out_dir: &Path,
) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(io_err)?;

    let mut w = csv::Writer::from_path(out_dir.join("trace.csv")).map_err(io_err)?;
    w.write_record(["run_id", "algorithm", "seed", "iteration", "best_cost"])
        .map_err(io_err)?;
    for r in reports {
        for &(it, cost) in &r.cost_trace {
            let cost = cost.map(|c| c.to_string()).unwrap_or_default();
            w.write_record([
                &r.run_id,
                r.algorithm.id(),
                &r.seed.to_string(),
                &it.to_string(),
                &cost,
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;

    let mut w = csv::Writer::from_path(out_dir.join("summary.csv")).map_err(io_err)?;
    w.write_record([
        "algorithm",
        "trials",
        "solved",
        "final_cost_mean",
        "final_cost_std",
        "edges_mean",
        "edges_std",
        "splitting_edges_mean",
        "nodes_mean",
        "ms_per_iter_mean",
        "ms_per_iter_std",
    ])
    .map_err(io_err)?;
    for s in summarize(reports) {
        w.write_record([
            s.algorithm.id().to_string(),
            s.trials.to_string(),
            s.solved.to_string(),
            fmt_float(s.final_cost_mean),
            fmt_float(s.final_cost_std),
            fmt_float(s.edges_mean),
            fmt_float(s.edges_std),
            fmt_float(s.splitting_edges_mean),
            fmt_float(s.nodes_mean),
            fmt_float(s.ms_per_iter_mean),
            fmt_float(s.ms_per_iter_std),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let meta = Meta {
        scenario,
        config,
        edge_count_convention: EDGE_COUNT_CONVENTION,
        versions: Versions {
            factplan: env!("CARGO_PKG_VERSION"),
            trace_format: 1,
        },
        failures: reports
            .iter()
            .filter_map(|r| r.error.as_deref().map(|e| (r.run_id.as_str(), e)))
            .collect(),
    };
    let text = serde_json::to_string_pretty(&meta).map_err(io_err)?;
    fs::write(out_dir.join("meta.json"), text + "\n").map_err(io_err)?;
    Ok(())
}
