//! `plan`: run benchmarks, tabulate sample-complexity gains, self-check.

mod grid;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use factplan::bench::{self, Algorithm, BenchConfig, TrialReport};
use factplan::planners::PlanResult;
use factplan::{HeuristicSpec, PlannerParams, RadiusMode, Scenario};

use crate::grid::GainGrid;

#[derive(Parser)]
#[command(
    name = "plan",
    version,
    about = "Factorized multi-agent sampling-based planning benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run paired trials and write trace.csv, summary.csv and meta.json.
    Run(RunArgs),
    /// Tabulate sample counts and factorization gain over a parameter grid.
    Gain {
        /// `key=values;...` with keys f, agents, disp, p, d, mu; values are
        /// comma lists or start:stop:step ranges.
        #[arg(long, default_value = "f=0:1:0.1;agents=2,3,5;disp=0.7;p=0.7;d=2;mu=1")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the geometric, hyperpath and epsilon oracle checks.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicKind {
    Cone,
    Never,
}

#[derive(Clone, Copy, ValueEnum)]
enum RadiusArg {
    PerBlock,
    Largest,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file, or `builtin:cross4` / `builtin:two_lanes`.
    #[arg(long)]
    scenario: String,
    /// Comma-separated list of rrg, factrrg, prmstar.
    #[arg(long, value_delimiter = ',', default_value = "rrg,factrrg")]
    algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 20, conflicts_with = "full")]
    trials: usize,
    /// 100 trials instead of the default 20.
    #[arg(long)]
    full: bool,
    /// Trial t runs with seed `seed + t`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's heuristic.
    #[arg(long, value_enum)]
    heuristic: Option<HeuristicKind>,
    /// Cone half-angle in radians.
    #[arg(long)]
    cone_angle: Option<f64>,
    #[arg(long, value_enum, default_value = "per-block")]
    radius_mode: RadiusArg,
    /// Stop once the graph exceeds this many nodes and a solution exists; 0 disables.
    #[arg(long, default_value_t = 1000)]
    stop_nodes: usize,
    /// Keep only the first N agents of the scenario.
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long, default_value_t = PlannerParams::default().max_iterations)]
    max_iters: usize,
    /// PRM* sample budget.
    #[arg(long, default_value_t = PlannerParams::default().prm_samples)]
    samples: usize,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write every run's final graph to `<out>/graphs/<run_id>.txt`.
    #[arg(long)]
    dump_graph: bool,
}

/// A failure reported as one JSON object on stderr.
struct Failure {
    code: &'static str,
    message: String,
}

impl Failure {
    fn new(code: &'static str, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<factplan::Error> for Failure {
    fn from(e: factplan::Error) -> Self {
        let code = match e {
            factplan::Error::Domain(_) => "domain",
            factplan::Error::Setup(_) => "setup",
            _ => "planner",
        };
        Failure::new(code, e)
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new("io", format!("{}: {e}", path.display()))
}

fn load_scenario(arg: &str) -> Result<Scenario, Failure> {
    match arg.strip_prefix("builtin:") {
        Some("cross4") => Ok(Scenario::builtin_cross4()),
        Some("two_lanes") => Ok(Scenario::builtin_two_lanes()),
        Some(other) => Err(Failure::new(
            "validation",
            format!("unknown builtin scenario {other:?}; expected cross4 or two_lanes"),
        )),
        None => Scenario::load(arg).map_err(|e| Failure::new(e.code(), e)),
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(k) = args.agents {
        scenario = scenario
            .with_agents(k)
            .map_err(|e| Failure::new(e.code(), e))?;
    }
    let scenario_angle = match scenario.heuristic {
        HeuristicSpec::Cone { half_angle } => Some(half_angle),
        HeuristicSpec::Never => None,
    };
    let heuristic = match (args.heuristic, args.cone_angle) {
        (Some(HeuristicKind::Never), Some(_)) => {
            return Err(Failure::new(
                "usage",
                "--cone-angle only applies to the cone heuristic",
            ))
        }
        (Some(HeuristicKind::Never), None) => HeuristicSpec::Never,
        (Some(HeuristicKind::Cone), angle) => HeuristicSpec::Cone {
            half_angle: angle
                .or(scenario_angle)
                .unwrap_or(factplan::factorization::DEFAULT_HALF_ANGLE),
        },
        (None, Some(half_angle)) => HeuristicSpec::Cone { half_angle },
        (None, None) => scenario.heuristic,
    };
    scenario = scenario.with_heuristic(heuristic);

    let config = BenchConfig {
        params: PlannerParams {
            stop_nodes: (args.stop_nodes > 0).then_some(args.stop_nodes),
            max_iterations: args.max_iters,
            radius_mode: match args.radius_mode {
                RadiusArg::PerBlock => RadiusMode::PerBlock,
                RadiusArg::Largest => RadiusMode::Largest,
            },
            prm_samples: args.samples,
            ..PlannerParams::default()
        },
        algorithms: args.algo,
        trials: if args.full { 100 } else { args.trials },
        base_seed: args.seed,
        jobs: args.jobs,
    };

    let graphs = args.out.join("graphs");
    if args.dump_graph {
        fs::create_dir_all(&graphs).map_err(|e| io_failure(&graphs, e))?;
    }
    let dump = |report: &TrialReport, result: &PlanResult| {
        if args.dump_graph {
            let path = graphs.join(format!("{}.txt", report.run_id));
            // a failed dump is reported but does not abort the other trials
            if let Err(e) = fs::File::create(&path)
                .and_then(|f| result.graph.write_dump(std::io::BufWriter::new(f)))
            {
                eprintln!("{}", error_json("io", &format!("{}: {e}", path.display())));
            }
        }
    };
    let reports = bench::run_benchmark_with(&scenario, &config, &dump)?;
    bench::emit_results(&reports, &scenario, &config, &args.out)?;

    for s in bench::summarize(&reports) {
        println!(
            "{}: solved {}/{}, final cost {:.4} (std {:.4}), edges {:.0}, {:.4} ms/iter",
            s.algorithm,
            s.solved,
            s.trials,
            s.final_cost_mean,
            s.final_cost_std,
            s.edges_mean,
            s.ms_per_iter_mean
        );
    }
    for r in reports.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", r.run_id, r.error.as_deref().unwrap_or_default());
    }
    if reports.iter().all(|r| r.error.is_some()) {
        return Err(Failure::new("trials", "every trial failed; see meta.json"));
    }
    Ok(())
}

fn gain(spec: &str, out: &Path) -> Result<(), Failure> {
    let grid: GainGrid = spec.parse().map_err(|e| Failure::new("usage", e))?;
    let rows = grid::rows(&grid)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    let mut w = csv::Writer::from_path(out).map_err(|e| io_failure(out, e))?;
    w.write_record(grid::HEADER)
        .map_err(|e| io_failure(out, e))?;
    for row in &rows {
        w.write_record(row).map_err(|e| io_failure(out, e))?;
    }
    w.flush().map_err(|e| io_failure(out, e))?;
    println!("wrote {} grid points to {}", rows.len(), out.display());
    Ok(())
}

fn verify() -> Result<(), Failure> {
    let outcomes = factplan::verify::run_all();
    for c in &outcomes {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            "verify",
            format!("failed checks: {}", failed.join(", ")),
        ))
    }
}

fn error_json(code: &str, message: &str) -> String {
    serde_json::json!({ "error": { "code": code, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Gain { grid, out } => gain(&grid, &out),
        Command::Verify => verify(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", error_json(f.code, &f.message));
            ExitCode::FAILURE
        }
    }
}
