//! `qterm-lab`: reproducible experiment runner for the tilted-risk
//! laboratory. Every subcommand reads a JSON scenario, fans seeded trials
//! over a worker pool, and writes JSONL trial records plus a CSV summary.

mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use qterm_core::search::Backend;
use runner::{CliError, CliResult, RunConfig, EXIT_SCENARIO};
use scenario::Scenario;

#[derive(Parser)]
#[command(name = "qterm-lab", version, about = "Tilted-risk laboratory experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Number of trials (overrides the scenario).
    #[arg(long)]
    trials: Option<usize>,
    /// Run seed (overrides the scenario).
    #[arg(long)]
    seed: Option<u64>,
    /// Tilt override.
    #[arg(long)]
    gamma: Option<f64>,
    /// Accuracy override.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Confidence override.
    #[arg(long)]
    delta: Option<f64>,
    /// Output directory (default: $QTERM_LAB_OUT, then ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit plot-friendly (x, y) series.
    #[arg(long)]
    plot_data: bool,
    /// Worker threads for the trial pool.
    #[arg(long)]
    workers: Option<usize>,
    /// Decision backend where applicable.
    #[arg(long)]
    backend: Option<Backend>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Bound kind (chernoff_unit, chernoff_bounded, naive_expectation,
    /// exponential_expectation, hoeffding_wor, hoeffding_multi,
    /// hoeffding_batched, pac_term).
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    expected_sum: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Deviation scale for epsilon-style bounds.
    #[arg(long)]
    epsilon_dev: Option<f64>,
    /// Deviation scale for the bounded Chernoff form.
    #[arg(long)]
    delta_dev: Option<f64>,
    /// Deviation scale for Hoeffding-style bounds.
    #[arg(long)]
    t_dev: Option<f64>,
    /// Interval floor.
    #[arg(long)]
    a: Option<f64>,
    /// Interval ceiling.
    #[arg(long)]
    b: Option<f64>,
    /// Exponent of the exponentiated-outcome bound.
    #[arg(long)]
    c: Option<f64>,
    /// Covering number of the class.
    #[arg(long)]
    covering: Option<u64>,
    /// Tilt of the PAC bound.
    #[arg(long)]
    gamma_cov: Option<f64>,
    #[arg(long)]
    m_pops: Option<usize>,
    #[arg(long)]
    k_batches: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Tilted risk sweeps over classical losses or hypothesis classes.
    Risk(CommonArgs),
    /// Threshold search on a planted product state.
    Search(CommonArgs),
    /// Block binary-search hypothesis selection.
    Learn(CommonArgs),
    /// Two-stage agnostic selection over an epsilon-net.
    Agnostic(CommonArgs),
    /// Evaluate a closed-form tail bound.
    Bounds(BoundsArgs),
    /// Finite-class uniform tilted-risk deviation experiment.
    Pac(CommonArgs),
    /// Tilted Hamiltonian risk sweep.
    Qtr(CommonArgs),
    /// Monte Carlo tail verification of a bound.
    Mc(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn out_dir(common: &CommonArgs) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("QTERM_LAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn install_workers(common: &CommonArgs) -> CliResult<()> {
    if let Some(workers) = common.workers {
        if workers == 0 {
            return Err(CliError {
                code: EXIT_SCENARIO,
                message: "--workers must be positive".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError { code: EXIT_SCENARIO, message: e.to_string() })?;
    }
    Ok(())
}

fn load_scenario(common: &CommonArgs, subcommand: &str) -> CliResult<Scenario> {
    let path = common.scenario.as_ref().ok_or_else(|| CliError {
        code: EXIT_SCENARIO,
        message: format!("--scenario is required by `{subcommand}`"),
    })?;
    let mut scenario = Scenario::load(path)
        .map_err(|e| CliError { code: EXIT_SCENARIO, message: format!("{e:#}") })?;
    if let Some(tilt) = scenario.tilt.as_mut() {
        if let Some(g) = common.gamma {
            tilt.gamma = g;
        }
        if let Some(eps) = common.epsilon {
            tilt.epsilon = eps;
        }
        if let Some(d) = common.delta {
            tilt.delta = d;
        }
    }
    if let Some(pac) = scenario.pac.as_mut() {
        if let Some(g) = common.gamma {
            pac.gamma = g;
        }
        if let Some(eps) = common.epsilon {
            pac.epsilon = eps;
        }
    }
    Ok(scenario)
}

fn config(common: &CommonArgs, scenario: Option<&Scenario>, subcommand: &'static str) -> RunConfig {
    RunConfig {
        subcommand,
        out_dir: out_dir(common),
        seed: common.seed.or(scenario.map(|s| s.seed)).unwrap_or(0),
        trials: common.trials.or(scenario.map(|s| s.trials)).unwrap_or(1),
        plot_data: common.plot_data,
        backend: common.backend,
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let started = Instant::now();
    match cli.command {
        Command::Risk(common) => {
            install_workers(&common)?;
            let scenario = load_scenario(&common, "risk")?;
            let cfg = config(&common, Some(&scenario), "risk");
            let output = runner::run_risk(&scenario, &cfg)?;
            runner::emit(&scenario.name, &cfg, output, started)
        }
        Command::Search(common) => {
            install_workers(&common)?;
            let scenario = load_scenario(&common, "search")?;
            let cfg = config(&common, Some(&scenario), "search");
            let output = runner::run_search(&scenario, &cfg)?;
            runner::emit(&scenario.name, &cfg, output, started)
        }
        Command::Learn(common) => {
            install_workers(&common)?;
            let scenario = load_scenario(&common, "learn")?;
            let cfg = config(&common, Some(&scenario), "learn");
            let output = runner::run_learn(&scenario, &cfg)?;
            runner::emit(&scenario.name, &cfg, output, started)
        }
        Command::Agnostic(common) => {
            install_workers(&common)?;
            let scenario = load_scenario(&common, "agnostic")?;
            let cfg = config(&common, Some(&scenario), "agnostic");
            let output = runner::run_agnostic(&scenario, &cfg)?;
            runner::emit(&scenario.name, &cfg, output, started)
        }
        Command::Pac(common) => {
            install_workers(&common)?;
            let scenario = load_scenario(&common, "pac")?;
            let cfg = config(&common, Some(&scenario), "pac");
            let output = runner::run_pac(&scenario, &cfg)?;
            runner::emit(&scenario.name, &cfg, output, started)
        }
        Command::Qtr(common) => {
            install_workers(&common)?;
            let scenario = load_scenario(&common, "qtr")?;
            let cfg = config(&common, Some(&scenario), "qtr");
            let output = runner::run_qtr(&scenario, &cfg)?;
            runner::emit(&scenario.name, &cfg, output, started)
        }
        Command::Mc(common) => {
            install_workers(&common)?;
            let scenario = load_scenario(&common, "mc")?;
            let cfg = config(&common, Some(&scenario), "mc");
            let output = runner::run_mc(&scenario, &cfg)?;
            runner::emit(&scenario.name, &cfg, output, started)
        }
        Command::Bounds(args) => {
            install_workers(&args.common)?;
            let (name, spec, cfg) = if let Some(kind) = &args.kind {
                let flags = runner::BoundFlagValues {
                    kind: kind.clone(),
                    expected_sum: args.expected_sum,
                    n: args.n,
                    epsilon_dev: args.epsilon_dev,
                    delta_dev: args.delta_dev,
                    t_dev: args.t_dev,
                    a: args.a,
                    b: args.b,
                    c: args.c,
                    covering: args.covering,
                    gamma_cov: args.gamma_cov,
                    m_pops: args.m_pops,
                    k_batches: args.k_batches,
                    l: args.l,
                };
                let spec = runner::bound_from_flags(&flags)
                    .map_err(|e| CliError { code: EXIT_SCENARIO, message: format!("{e:#}") })?;
                let cfg = config(&args.common, None, "bounds");
                (kind.clone(), spec, cfg)
            } else {
                let scenario = load_scenario(&args.common, "bounds")?;
                let spec = scenario.bound.clone().ok_or_else(|| CliError {
                    code: EXIT_SCENARIO,
                    message: "scenario field `bound`: required by `bounds`".into(),
                })?;
                let cfg = config(&args.common, Some(&scenario), "bounds");
                (scenario.name.clone(), spec, cfg)
            };
            let output = runner::run_bounds(&name, &spec, &cfg)?;
            runner::emit(&name, &cfg, output, started)
        }
    }
}
