//! Trial engine and per-subcommand runners: every experiment fans its
//! trials over a worker pool with one ChaCha stream per trial, collects the
//! records in trial order, and emits JSONL trials, a CSV summary, and
//! optional plot data.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use qterm_core::bounds::{
    agnostic_error_budget, eval_bound, pac_sup_gap, tail_event, BoundSpec, CoveringSpec,
    UnifExponent,
};
use qterm_core::learner::{agnostic_learn, exact_tilted_mu, learn, LearnerParams};
use qterm_core::qtr::{partition_function, qtr, qtr_limit, TiltedHamiltonianModel};
use qterm_core::risk::{erm, term, LossVector, TiltConfig};
use qterm_core::search::{threshold_search, Backend, SearchParams, ThresholdedHypothesis};
use qterm_core::sim::ProductSample;
use qterm_core::operator::DensityOperator;

use crate::scenario::Scenario;

/// The RNG contract stamped into every summary: one ChaCha12 generator per
/// trial, seeded with the run seed and set to stream = trial index.
pub const RNG_STAMP: &str = "chacha12/stream-per-trial";

pub const EXIT_SCENARIO: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_VACUOUS: u8 = 3;

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

fn scenario_err(e: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_SCENARIO, message: e.to_string() }
}

fn precondition_err(e: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_PRECONDITION, message: e.to_string() }
}

fn vacuous_err(e: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_VACUOUS, message: e.to_string() }
}

/// Map library failures onto exit codes: violated run preconditions exit 2,
/// everything else is a scenario/runtime error.
fn core_err(e: qterm_core::Error) -> CliError {
    use qterm_core::Error as E;
    match e {
        E::PreconditionViolated { .. }
        | E::InvalidParameter { .. }
        | E::InsufficientPopulation { .. }
        | E::InsufficientUnconsumed { .. }
        | E::EmptyHypotheses
        | E::SampleExhausted { .. } => precondition_err(e),
        other => scenario_err(other),
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub trials: usize,
    pub plot_data: bool,
    pub backend: Option<Backend>,
}

#[derive(Serialize)]
struct Envelope<'a, D: Serialize> {
    scenario: &'a str,
    subcommand: &'a str,
    seed: u64,
    trial: u64,
    stream: u64,
    data: D,
}

/// Everything a subcommand produces before emission.
pub struct RunOutput {
    pub records: Vec<serde_json::Value>,
    pub summary: Vec<(String, String)>,
    pub plot: Option<(Vec<String>, Vec<Vec<f64>>)>,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Run `trials` independent closures over the worker pool, in stream order.
fn parallel_trials<D, F>(trials: usize, seed: u64, f: F) -> CliResult<Vec<D>>
where
    D: Send,
    F: Fn(u64, &mut ChaCha12Rng) -> Result<D, CliError> + Sync,
{
    let mut results: Vec<(u64, D)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            f(t, &mut rng).map(|d| (t, d))
        })
        .collect::<Result<_, _>>()?;
    results.sort_by_key(|(t, _)| *t);
    Ok(results.into_iter().map(|(_, d)| d).collect())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

fn file_stem(scenario: &str, sub: &str, seed: u64) -> String {
    format!("{}__{}__seed{}", sanitize(scenario), sub, seed)
}

/// Refuses to run a (scenario, subcommand, seed) triple into a directory
/// that already holds its trial stream: identical seeds across shards would
/// silently duplicate records.
fn check_collision(out_dir: &Path, stem: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| scenario_err(format!("creating {}: {e}", out_dir.display())))?;
    let trials_path = out_dir.join(format!("{stem}.trials.jsonl"));
    if trials_path.exists() {
        return Err(scenario_err(format!(
            "seed collision: {} already exists; rerun with a fresh seed or output directory",
            trials_path.display()
        )));
    }
    Ok(trials_path)
}

pub fn emit(
    scenario_name: &str,
    cfg: &RunConfig,
    output: RunOutput,
    started: Instant,
) -> CliResult<()> {
    let stem = file_stem(scenario_name, cfg.subcommand, cfg.seed);
    let trials_path = check_collision(&cfg.out_dir, &stem)?;

    let mut jsonl = String::new();
    for (i, data) in output.records.iter().enumerate() {
        let envelope = Envelope {
            scenario: scenario_name,
            subcommand: cfg.subcommand,
            seed: cfg.seed,
            trial: i as u64,
            stream: i as u64,
            data,
        };
        jsonl.push_str(&serde_json::to_string(&envelope).map_err(scenario_err)?);
        jsonl.push('\n');
    }
    std::fs::write(&trials_path, jsonl)
        .map_err(|e| scenario_err(format!("writing {}: {e}", trials_path.display())))?;

    let mut header = vec![
        "scenario".to_string(),
        "subcommand".to_string(),
        "seed".to_string(),
        "trials".to_string(),
        "version".to_string(),
        "rng".to_string(),
        "wall_clock_ms".to_string(),
    ];
    let mut row = vec![
        scenario_name.to_string(),
        cfg.subcommand.to_string(),
        cfg.seed.to_string(),
        output.records.len().to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
        RNG_STAMP.to_string(),
        started.elapsed().as_millis().to_string(),
    ];
    for (k, v) in &output.summary {
        header.push(k.clone());
        row.push(v.clone());
    }
    let summary_path = cfg.out_dir.join(format!("{stem}.summary.csv"));
    std::fs::write(&summary_path, format!("{}\n{}\n", header.join(","), row.join(",")))
        .map_err(|e| scenario_err(format!("writing {}: {e}", summary_path.display())))?;

    if let Some((columns, rows)) = output.plot {
        if cfg.plot_data {
            let mut csv = columns.join(",");
            csv.push('\n');
            for r in rows {
                let line: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
                csv.push_str(&line.join(","));
                csv.push('\n');
            }
            let plot_path = cfg.out_dir.join(format!("{stem}.plot.csv"));
            std::fs::write(&plot_path, csv)
                .map_err(|e| scenario_err(format!("writing {}: {e}", plot_path.display())))?;
        }
    }
    Ok(())
}

fn sweep_grid(scenario: &Scenario, fallback_gamma: f64) -> CliResult<Vec<f64>> {
    match &scenario.sweep {
        Some(sweep) => sweep.grid().map_err(scenario_err),
        None => Ok(vec![fallback_gamma]),
    }
}

// ---------------------------------------------------------------------------
// risk
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RiskRow {
    gamma: f64,
    erm: f64,
    term: f64,
}

#[derive(Serialize)]
struct QuantumRiskRow {
    gamma: f64,
    label: String,
    mu: f64,
    risk: f64,
}

pub fn run_risk(scenario: &Scenario, cfg: &RunConfig) -> CliResult<RunOutput> {
    let gamma0 = scenario.tilt.as_ref().map(|t| t.gamma).unwrap_or(0.0);
    let grid = sweep_grid(scenario, gamma0)?;
    let mut records = Vec::new();
    let mut plot_rows = Vec::new();

    if let Some(values) = &scenario.losses {
        let losses = LossVector::new(values.clone()).map_err(core_err)?;
        for &gamma in &grid {
            let row = RiskRow { gamma, erm: erm(&losses), term: term(&losses, gamma) };
            plot_rows.push(vec![gamma, row.term]);
            records.push(serde_json::to_value(row).map_err(scenario_err)?);
        }
    } else if scenario.hypotheses.is_some() && scenario.states.is_some() {
        let width = scenario.tilt.as_ref().map(|t| t.l).unwrap_or(64).max(1);
        let mut rng = trial_rng(cfg.seed, 0);
        let states = scenario
            .states
            .as_ref()
            .unwrap()
            .build(scenario.dim, width, &mut rng)
            .map_err(scenario_err)?;
        let ensemble = scenario.ensemble(width, &mut rng).map_err(scenario_err)?;
        for &gamma in &grid {
            for c in 0..ensemble.m() {
                let mu = exact_tilted_mu(&states, ensemble.list(c), gamma).map_err(core_err)?;
                let row = QuantumRiskRow {
                    gamma,
                    label: ensemble.label(c).to_string(),
                    mu,
                    risk: 1.0 - mu,
                };
                if c == 0 {
                    plot_rows.push(vec![gamma, row.risk]);
                }
                records.push(serde_json::to_value(row).map_err(scenario_err)?);
            }
        }
    } else {
        return Err(scenario_err(
            "scenario field `losses` (or `states` + `hypotheses`): required by `risk`",
        ));
    }

    let summary = vec![("sweep_points".to_string(), grid.len().to_string())];
    Ok(RunOutput {
        records,
        summary,
        plot: Some((vec!["gamma".into(), "tilted_risk".into()], plot_rows)),
    })
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SearchTrial {
    accepted: Option<usize>,
    label: Option<String>,
    precondition_ok: bool,
    scans: usize,
    observed_mean: Option<f64>,
    exact_mean: Option<f64>,
    sound: Option<bool>,
}

pub fn run_search(scenario: &Scenario, cfg: &RunConfig) -> CliResult<RunOutput> {
    let section = scenario
        .search
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `search`: required by `search`"))?;
    let specs = scenario
        .hypotheses
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `hypotheses`: required by `search`"))?;
    let thetas: Vec<f64> = specs
        .iter()
        .map(|h| {
            h.theta.ok_or_else(|| {
                scenario_err("scenario field `hypotheses.theta`: required by `search`")
            })
        })
        .collect::<CliResult<_>>()?;
    let backend = cfg.backend.or(section.backend).unwrap_or(Backend::Oracle);
    let n = section.n;
    let params = SearchParams {
        epsilon: section.epsilon,
        c1: scenario.tilt.as_ref().map(|t| t.c1).unwrap_or(qterm_core::risk::DEFAULT_C1),
        c2: scenario.tilt.as_ref().map(|t| t.c2).unwrap_or(qterm_core::risk::DEFAULT_C2),
        enforce_precondition: section.enforce_precondition,
    };
    let states_ctor = scenario
        .states
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `states`: required by `search`"))?;

    let trials = parallel_trials(cfg.trials, cfg.seed, |_t, rng| {
        let states = states_ctor.build(scenario.dim, n, rng).map_err(scenario_err)?;
        let ensemble = scenario.ensemble(n, rng).map_err(scenario_err)?;
        let hypotheses: Vec<ThresholdedHypothesis<f64>> = (0..ensemble.m())
            .map(|c| {
                ThresholdedHypothesis::new(ensemble.list(c).clone(), thetas[c]).map_err(core_err)
            })
            .collect::<CliResult<_>>()?;
        let mut sample = ProductSample::new(states.clone());
        let outcome =
            threshold_search(&mut sample, &hypotheses, &params, backend, rng).map_err(core_err)?;
        let (label, observed, exact, sound) = match outcome.accepted {
            Some(c) => {
                let exact = exact_tilted_mu(&states, ensemble.list(c), 0.0).map_err(core_err)?;
                (
                    Some(ensemble.label(c).to_string()),
                    outcome.scans.last().map(|s| s.observed_mean),
                    Some(exact),
                    Some(exact >= thetas[c] - section.epsilon),
                )
            }
            None => (None, None, None, None),
        };
        Ok(SearchTrial {
            accepted: outcome.accepted,
            label,
            precondition_ok: outcome.precondition_ok,
            scans: outcome.scans.len(),
            observed_mean: observed,
            exact_mean: exact,
            sound,
        })
    })?;

    let accepted = trials.iter().filter(|t| t.accepted.is_some()).count();
    let unsound = trials.iter().filter(|t| t.sound == Some(false)).count();
    let rate = accepted as f64 / trials.len().max(1) as f64;
    let violation_rate = unsound as f64 / accepted.max(1) as f64;
    let records = trials
        .into_iter()
        .map(|t| serde_json::to_value(t).map_err(scenario_err))
        .collect::<CliResult<_>>()?;
    Ok(RunOutput {
        records,
        summary: vec![
            ("acceptance_rate".into(), format!("{rate}")),
            ("soundness_violation_rate".into(), format!("{violation_rate}")),
        ],
        plot: None,
    })
}

// ---------------------------------------------------------------------------
// learn / agnostic
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LearnTrial {
    c_star: usize,
    label: String,
    mu_hat: f64,
    theta_final: f64,
    random_pick: bool,
    gap_best: f64,
    gap_self: f64,
    rounds: usize,
    failure: bool,
    transcript: Vec<qterm_core::learner::RoundRecord<f64>>,
}

fn learner_setup(scenario: &Scenario) -> CliResult<(TiltConfig<f64>, usize)> {
    let tilt = scenario.tilt().map_err(scenario_err)?.clone();
    tilt.validate().map_err(core_err)?;
    let m = scenario.hypotheses.as_ref().map(|h| h.len()).unwrap_or(0);
    if m == 0 {
        return Err(scenario_err("scenario field `hypotheses`: required by `learn`"));
    }
    Ok((tilt, m))
}

pub fn run_learn(scenario: &Scenario, cfg: &RunConfig) -> CliResult<RunOutput> {
    let (tilt, m) = learner_setup(scenario)?;
    let params = LearnerParams::new(tilt, m).map_err(core_err)?;
    let backend = cfg.backend.unwrap_or(Backend::Oracle);
    let width = params.n_required;
    let epsilon = params.tilt.epsilon;
    let states_ctor = scenario
        .states
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `states`: required by `learn`"))?;

    let trials = parallel_trials(cfg.trials, cfg.seed, |_t, rng| {
        let states = states_ctor.build(scenario.dim, width, rng).map_err(scenario_err)?;
        let ensemble = scenario.ensemble(width, rng).map_err(scenario_err)?;
        let exact: Vec<f64> = (0..ensemble.m())
            .map(|c| exact_tilted_mu(&states, ensemble.list(c), params.tilt.gamma))
            .collect::<qterm_core::Result<_>>()
            .map_err(core_err)?;
        let best = exact.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sample = ProductSample::new(states);
        let out = learn(&mut sample, &ensemble, &params, backend, rng).map_err(core_err)?;
        let gap_best = (out.mu_hat - best).abs();
        let gap_self = (out.mu_hat - exact[out.c_star]).abs();
        Ok(LearnTrial {
            c_star: out.c_star,
            label: ensemble.label(out.c_star).to_string(),
            mu_hat: out.mu_hat,
            theta_final: out.theta_final,
            random_pick: out.random_pick,
            gap_best,
            gap_self,
            rounds: out.transcript.len(),
            failure: gap_best >= epsilon || gap_self >= epsilon,
            transcript: out.transcript,
        })
    })?;

    let failures = trials.iter().filter(|t| t.failure).count();
    let rate = failures as f64 / trials.len().max(1) as f64;
    let summary = vec![
        ("failure_rate".into(), format!("{rate}")),
        ("delta".into(), format!("{}", params.tilt.delta)),
        ("n_required".into(), params.n_required.to_string()),
        (
            "random_picks".into(),
            trials.iter().filter(|t| t.random_pick).count().to_string(),
        ),
    ];
    let records = trials
        .into_iter()
        .map(|t| serde_json::to_value(t).map_err(scenario_err))
        .collect::<CliResult<_>>()?;
    Ok(RunOutput { records, summary, plot: None })
}

#[derive(Serialize)]
struct AgnosticTrial {
    c_star: usize,
    label: String,
    mu_hat: f64,
    net_size: usize,
    gap_best: f64,
    within_three_eps: bool,
    random_pick: bool,
}

pub fn run_agnostic(scenario: &Scenario, cfg: &RunConfig) -> CliResult<RunOutput> {
    let (tilt, m) = learner_setup(scenario)?;
    let section = scenario
        .agnostic
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `agnostic`: required by `agnostic`"))?;
    let params = LearnerParams::new(tilt.clone(), m).map_err(core_err)?;
    let backend = cfg.backend.unwrap_or(Backend::Oracle);
    let width = params.n_required;
    let epsilon = tilt.epsilon;

    // The budget must bite before any trial runs; a vacuous budget verifies
    // nothing. Finite classes are their own covers at every scale.
    let form = if section.squared_unif_exponent {
        UnifExponent::Lemma
    } else {
        UnifExponent::Statement
    };
    let budget = agnostic_error_budget(&tilt, &CoveringSpec::finite_class(m), m, form)
        .map_err(core_err)?;
    if budget >= 1.0 {
        return Err(vacuous_err(format!(
            "agnostic error budget {budget} is vacuous; enlarge l or relax the targets"
        )));
    }

    let states_ctor = scenario
        .states
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `states`: required by `agnostic`"))?;

    let trials = parallel_trials(cfg.trials, cfg.seed, |_t, rng| {
        let states = states_ctor.build(scenario.dim, width, rng).map_err(scenario_err)?;
        let ensemble = scenario.ensemble(width, rng).map_err(scenario_err)?;
        let classical = states_ctor
            .build(scenario.dim, section.classical_len, rng)
            .map_err(scenario_err)?;
        let exact: Vec<f64> = (0..ensemble.m())
            .map(|c| exact_tilted_mu(&states, ensemble.list(c), tilt.gamma))
            .collect::<qterm_core::Result<_>>()
            .map_err(core_err)?;
        let best = exact.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sample = ProductSample::new(states);
        let out = agnostic_learn(&mut sample, &ensemble, &classical, &params, backend, rng)
            .map_err(core_err)?;
        let gap_best = (out.result.mu_hat - best).abs();
        Ok(AgnosticTrial {
            c_star: out.result.c_star,
            label: ensemble.label(out.result.c_star).to_string(),
            mu_hat: out.result.mu_hat,
            net_size: out.net.size(),
            gap_best,
            within_three_eps: gap_best <= 3.0 * epsilon,
            random_pick: out.result.random_pick,
        })
    })?;

    let hits = trials.iter().filter(|t| t.within_three_eps).count();
    let success = hits as f64 / trials.len().max(1) as f64;
    let summary = vec![
        ("success_rate".into(), format!("{success}")),
        ("error_budget".into(), format!("{budget}")),
        ("required_success".into(), format!("{}", 1.0 - budget)),
        ("net_size".into(), trials.first().map(|t| t.net_size).unwrap_or(0).to_string()),
    ];
    let records = trials
        .into_iter()
        .map(|t| serde_json::to_value(t).map_err(scenario_err))
        .collect::<CliResult<_>>()?;
    Ok(RunOutput { records, summary, plot: None })
}

// ---------------------------------------------------------------------------
// bounds / mc / pac
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BoundsRecord<'a> {
    spec: &'a BoundSpec<f64>,
    value: f64,
    vacuous: bool,
}

pub fn run_bounds(
    scenario_name: &str,
    spec: &BoundSpec<f64>,
    cfg: &RunConfig,
) -> CliResult<RunOutput> {
    let evaluated = eval_bound(spec).map_err(core_err)?;
    if evaluated.vacuous {
        return Err(vacuous_err(format!(
            "bound evaluates to {} >= 1; refusing to verify a vacuous bound",
            evaluated.value
        )));
    }
    let record = BoundsRecord { spec, value: evaluated.value, vacuous: evaluated.vacuous };
    let report = serde_json::json!({
        "scenario": scenario_name,
        "spec": spec,
        "value": evaluated.value,
        "vacuous": evaluated.vacuous,
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let report_path = cfg
        .out_dir
        .join(format!("{}.report.json", file_stem(scenario_name, cfg.subcommand, cfg.seed)));
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| scenario_err(format!("creating {}: {e}", cfg.out_dir.display())))?;
    std::fs::write(&report_path, serde_json::to_string_pretty(&report).map_err(scenario_err)?)
        .map_err(|e| scenario_err(format!("writing {}: {e}", report_path.display())))?;
    Ok(RunOutput {
        records: vec![serde_json::to_value(record).map_err(scenario_err)?],
        summary: vec![("bound_value".into(), format!("{}", evaluated.value))],
        plot: None,
    })
}

#[derive(Serialize)]
struct McTrial {
    deviation: f64,
    threshold: f64,
    event: bool,
}

pub fn run_mc(scenario: &Scenario, cfg: &RunConfig) -> CliResult<RunOutput> {
    let spec = scenario
        .bound
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `bound`: required by `mc`"))?;
    let sampler = scenario
        .sampler
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `sampler`: required by `mc`"))?;
    qterm_core::bounds::validate_pair(spec, sampler).map_err(core_err)?;
    let evaluated = eval_bound(spec).map_err(core_err)?;
    if evaluated.vacuous {
        return Err(vacuous_err(format!(
            "bound evaluates to {} >= 1; refusing to verify a vacuous bound",
            evaluated.value
        )));
    }

    let trials = parallel_trials(cfg.trials, cfg.seed, |_t, rng| {
        let obs = tail_event(spec, sampler, rng).map_err(core_err)?;
        Ok(McTrial { deviation: obs.deviation, threshold: obs.threshold, event: obs.event })
    })?;
    let events = trials.iter().filter(|t| t.event).count();
    let empirical = events as f64 / trials.len().max(1) as f64;
    let slack = 3.0 * (evaluated.value / trials.len().max(1) as f64).sqrt();
    let summary = vec![
        ("empirical_frequency".into(), format!("{empirical}")),
        ("theoretical_bound".into(), format!("{}", evaluated.value)),
        ("dominated".into(), format!("{}", empirical <= evaluated.value + slack)),
    ];
    let plot = Some((
        vec!["trials".into(), "empirical".into(), "theoretical".into()],
        vec![vec![trials.len() as f64, empirical, evaluated.value]],
    ));
    let records = trials
        .into_iter()
        .map(|t| serde_json::to_value(t).map_err(scenario_err))
        .collect::<CliResult<_>>()?;
    Ok(RunOutput { records, summary, plot })
}

#[derive(Serialize)]
struct PacTrial {
    sup_gap: f64,
    event: bool,
}

pub fn run_pac(scenario: &Scenario, cfg: &RunConfig) -> CliResult<RunOutput> {
    let section = scenario
        .pac
        .as_ref()
        .ok_or_else(|| scenario_err("scenario field `pac`: required by `pac`"))?;
    for sampler in &section.losses {
        sampler.validate().map_err(core_err)?;
    }
    if !(section.gamma > 0.0 && section.gamma < section.epsilon) {
        return Err(precondition_err(format!(
            "pac tilt {} must lie in (0, epsilon = {})",
            section.gamma, section.epsilon
        )));
    }
    let spec = BoundSpec::PacTerm {
        covering: section.losses.len() as u64,
        n: section.n,
        epsilon: section.epsilon,
        gamma: section.gamma,
    };
    let evaluated = eval_bound(&spec).map_err(core_err)?;
    if evaluated.vacuous {
        return Err(vacuous_err(format!(
            "bound evaluates to {} >= 1; refusing to verify a vacuous bound",
            evaluated.value
        )));
    }

    let trials = parallel_trials(cfg.trials, cfg.seed, |_t, rng| {
        let sup = pac_sup_gap(&section.losses, section.n, section.gamma, rng).map_err(core_err)?;
        Ok(PacTrial { sup_gap: sup, event: sup >= section.epsilon })
    })?;
    let events = trials.iter().filter(|t| t.event).count();
    let empirical = events as f64 / trials.len().max(1) as f64;
    let summary = vec![
        ("empirical_frequency".into(), format!("{empirical}")),
        ("theoretical_bound".into(), format!("{}", evaluated.value)),
        ("dominated".into(), format!("{}", empirical <= evaluated.value)),
    ];
    let records = trials
        .into_iter()
        .map(|t| serde_json::to_value(t).map_err(scenario_err))
        .collect::<CliResult<_>>()?;
    Ok(RunOutput { records, summary, plot: None })
}

// ---------------------------------------------------------------------------
// qtr
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct QtrRow {
    gamma: f64,
    partition: f64,
    qtr: f64,
}

pub fn run_qtr(scenario: &Scenario, cfg: &RunConfig) -> CliResult<RunOutput> {
    let section =
        scenario.qtr.as_ref().ok_or_else(|| scenario_err("scenario field `qtr`: missing"))?;
    let hamiltonian = scenario.hamiltonian().map_err(scenario_err)?;
    let mut rng = trial_rng(cfg.seed, 0);
    let states = section.state.build(scenario.dim, 1, &mut rng).map_err(scenario_err)?;
    let state: DensityOperator<f64> = states.get(0).clone();
    let model = TiltedHamiltonianModel::new(hamiltonian, state).map_err(core_err)?;
    let grid = sweep_grid(scenario, 1.0)?;

    let mut records = Vec::new();
    let mut plot_rows = Vec::new();
    for &gamma in &grid {
        let partition = partition_function(&model, gamma);
        let value =
            if gamma == 0.0 { qtr_limit(&model) } else { qtr(&model, gamma).map_err(core_err)? };
        plot_rows.push(vec![gamma, partition, value]);
        records.push(
            serde_json::to_value(QtrRow { gamma, partition, qtr: value }).map_err(scenario_err)?,
        );
    }
    let summary = vec![
        ("sweep_points".into(), grid.len().to_string()),
        ("zero_tilt_limit".into(), format!("{}", qtr_limit(&model))),
    ];
    Ok(RunOutput {
        records,
        summary,
        plot: Some((vec!["gamma".into(), "partition".into(), "qtr".into()], plot_rows)),
    })
}

// ---------------------------------------------------------------------------
// bound spec from flags
// ---------------------------------------------------------------------------

pub struct BoundFlagValues {
    pub kind: String,
    pub expected_sum: Option<f64>,
    pub n: Option<usize>,
    pub epsilon_dev: Option<f64>,
    pub delta_dev: Option<f64>,
    pub t_dev: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub covering: Option<u64>,
    pub gamma_cov: Option<f64>,
    pub m_pops: Option<usize>,
    pub k_batches: Option<usize>,
    pub l: Option<usize>,
}

pub fn bound_from_flags(flags: &BoundFlagValues) -> anyhow::Result<BoundSpec<f64>> {
    fn need<T: Copy>(v: Option<T>, name: &str) -> anyhow::Result<T> {
        v.ok_or_else(|| anyhow!("--{name} is required for this bound kind"))
    }
    let f = flags;
    let spec = match f.kind.as_str() {
        "chernoff_unit" => BoundSpec::ChernoffUnit {
            expected_sum: need(f.expected_sum, "expected-sum")?,
            epsilon: need(f.epsilon_dev, "epsilon-dev")?,
        },
        "chernoff_bounded" => BoundSpec::ChernoffBounded {
            n: need(f.n, "n")?,
            delta_dev: need(f.delta_dev, "delta-dev")?,
            lo: need(f.a, "a")?,
            hi: need(f.b, "b")?,
        },
        "naive_expectation" => BoundSpec::NaiveExpectation {
            n: need(f.n, "n")?,
            epsilon: need(f.epsilon_dev, "epsilon-dev")?,
        },
        "exponential_expectation" => BoundSpec::ExponentialExpectation {
            n: need(f.n, "n")?,
            epsilon: need(f.epsilon_dev, "epsilon-dev")?,
            c: need(f.c, "c")?,
        },
        "hoeffding_wor" => BoundSpec::HoeffdingWor {
            n: need(f.n, "n")?,
            t_dev: need(f.t_dev, "t-dev")?,
            lo: need(f.a, "a")?,
            hi: need(f.b, "b")?,
        },
        "hoeffding_multi" => BoundSpec::HoeffdingMulti {
            populations: need(f.m_pops, "m-pops")?,
            l: need(f.l, "l")?,
            t_dev: need(f.t_dev, "t-dev")?,
            lo: need(f.a, "a")?,
            hi: need(f.b, "b")?,
        },
        "hoeffding_batched" => BoundSpec::HoeffdingBatched {
            batches: need(f.k_batches, "k-batches")?,
            populations: need(f.m_pops, "m-pops")?,
            l: need(f.l, "l")?,
            t_dev: need(f.t_dev, "t-dev")?,
            lo: need(f.a, "a")?,
            hi: need(f.b, "b")?,
        },
        "pac_term" => BoundSpec::PacTerm {
            covering: need(f.covering, "covering")?,
            n: need(f.n, "n")?,
            epsilon: need(f.epsilon_dev, "epsilon-dev")?,
            gamma: need(f.gamma_cov, "gamma-cov")?,
        },
        other => bail!("unknown bound kind `{other}`"),
    };
    Ok(spec)
}
