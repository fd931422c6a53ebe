//! Repeated seeded runs, success statistics and method comparisons.
//!
//! Success is judged on cost alone: a run succeeds when its best cost is
//! within `tolerance` of the oracle optimum, so any of several degenerate
//! optima counts. The budget unit is the number of cost evaluations.

use crate::aqc::{evolve, measure, AqcConfig, AqcSpec, Evolution};
use crate::problems::io::{format_instance, read_instance};
use crate::problems::{GeneratorSpec, Instance, Problem, SpinConfiguration};
use crate::qts::{qts_anneal, QtsParams};
use crate::sa::{parallel_tempering, simulated_annealing, PtParams, SaParams};
use crate::sqa::{qa_col, sqa_generic, SqaParams};
use crate::{rng_from_seed, with_problem, AnnealResult, Error, Result, TracePoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

/// Largest relative difference in evaluation budgets tolerated by [`compare_methods`].
pub const BUDGET_PARITY: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemSource {
    File(PathBuf),
    Generator(GeneratorSpec),
}

/// A solver and its parameters. Any `seed` given here is ignored: run `i`
/// of an experiment uses `base_seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MethodConfig {
    Sa(SaParams),
    Pt(PtParams),
    Sqa(SqaParams),
    Qts(QtsParams),
    Aqc(AqcConfig),
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Sa(_) => "sa",
            MethodConfig::Pt(_) => "pt",
            MethodConfig::Sqa(_) => "sqa",
            MethodConfig::Qts(_) => "qts",
            MethodConfig::Aqc(_) => "aqc",
        }
    }

    /// Scheduled evaluations per run, ignoring early termination; `None` for
    /// methods whose cost is data dependent.
    pub fn nominal_evaluations(&self, problem_size: usize) -> Option<u64> {
        let n = problem_size as u64;
        match self {
            MethodConfig::Sa(p) => Some(1 + p.sweeps * p.moves_per_sweep.map_or(n, |m| m as u64)),
            MethodConfig::Pt(p) => {
                let k = p.temperatures.len() as u64;
                Some(k + p.sweeps * k * p.moves_per_sweep.map_or(n, |m| m as u64))
            }
            MethodConfig::Sqa(p) => {
                let per_step = (p.replicas * p.sweep_multiplier) as u64 * n;
                Some(p.replicas as u64 + p.gamma.max_steps() * per_step)
            }
            MethodConfig::Qts(_) | MethodConfig::Aqc(_) => None,
        }
    }

    /// The same method with its run length changed so that the nominal
    /// evaluation count is as close as possible to `budget`. Schedules are
    /// stretched, keeping their shape and end points.
    pub fn with_budget(&self, problem_size: usize, budget: u64) -> Result<Self> {
        let n = problem_size as u64;
        let scaled = |overhead: u64, per_unit: u64| -> Result<u64> {
            if budget <= overhead {
                return Err(Error::InvalidConfig(format!("budget {budget} is below the start-up cost {overhead}")));
            }
            Ok((((budget - overhead) as f64 / per_unit as f64).round() as u64).max(1))
        };
        let stretch = |s: &crate::schedule::Schedule, old: u64, new: u64| {
            let steps = (s.max_steps() as f64 * new as f64 / old as f64).round().max(1.0) as u64;
            s.stretched(steps)
        };
        Ok(match self {
            MethodConfig::Sa(p) => {
                let sweeps = scaled(1, p.moves_per_sweep.map_or(n, |m| m as u64))?;
                MethodConfig::Sa(SaParams { sweeps, schedule: stretch(&p.schedule, p.sweeps, sweeps)?, ..p.clone() })
            }
            MethodConfig::Pt(p) => {
                let k = p.temperatures.len() as u64;
                let sweeps = scaled(k, k * p.moves_per_sweep.map_or(n, |m| m as u64))?;
                MethodConfig::Pt(PtParams { sweeps, ..p.clone() })
            }
            MethodConfig::Sqa(p) => {
                let steps = scaled(p.replicas as u64, (p.replicas * p.sweep_multiplier) as u64 * n)?;
                MethodConfig::Sqa(SqaParams { gamma: p.gamma.stretched(steps)?, ..p.clone() })
            }
            other => {
                return Err(Error::Incompatible(format!(
                    "budget matching supports sa, pt and sqa, not {}",
                    other.name()
                )))
            }
        })
    }
}

fn default_tolerance() -> f64 {
    1e-6
}

/// One experiment, as a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub problem: ProblemSource,
    pub method: MethodConfig,
    /// When present, `bench` compares `method` against this one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<MethodConfig>,
    /// Evaluation budget per run both compared methods are rescaled to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_budget: Option<u64>,
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Overrides the oracle optimum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_cost: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub write_traces: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidConfig("tolerance must be non-negative".into()));
        }
        Ok(())
    }

    /// The same experiment with a different method.
    pub fn with_method(&self, method: MethodConfig) -> Self {
        Self { method, baseline: None, ..self.clone() }
    }
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub best_cost: f64,
    pub evaluations: u64,
    pub accepted_moves: u64,
    pub tunnel_jumps: u64,
    pub wall_ms: f64,
    #[serde(skip)]
    pub best_config: serde_json::Value,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub success_count: usize,
    pub repetitions: usize,
    pub success_rate: f64,
    pub wilson_ci_95: (f64, f64),
    pub residual_mean: f64,
    pub residual_std: f64,
    pub oracle_cost: f64,
    pub tolerance: f64,
    pub mean_evaluations: f64,
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Pooled two-proportion z statistic for `p1 - p2`.
pub fn two_proportion_z(s1: usize, n1: usize, s2: usize, n2: usize) -> f64 {
    let (p1, p2) = (s1 as f64 / n1 as f64, s2 as f64 / n2 as f64);
    let pooled = (s1 + s2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let diff = p1 - p2;
    if se == 0.0 {
        return if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
    }
    diff / se
}

fn nonempty(records: &[RunRecord]) -> Result<()> {
    if records.is_empty() {
        Err(Error::InvalidParameter("no run records".into()))
    } else {
        Ok(())
    }
}

/// Mean and population standard deviation of `best_cost - oracle_cost`.
///
/// Shortfalls below the oracle within rounding are clamped to zero; a run
/// that clearly beats the oracle means the oracle is wrong and is an error.
pub fn residual_energy(records: &[RunRecord], oracle_cost: f64) -> Result<(f64, f64)> {
    nonempty(records)?;
    let slack = 1e-6 * (1.0 + oracle_cost.abs());
    let mut residuals = Vec::with_capacity(records.len());
    for r in records {
        let d = r.best_cost - oracle_cost;
        if d < -slack {
            return Err(Error::InvalidConfig(format!(
                "run {} reached {} below the oracle optimum {oracle_cost}",
                r.run, r.best_cost
            )));
        }
        residuals.push(d.max(0.0));
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

pub fn success_probability(records: &[RunRecord], oracle_cost: f64, tol: f64) -> Result<SummaryStats> {
    nonempty(records)?;
    let success_count = records.iter().filter(|r| r.best_cost <= oracle_cost + tol).count();
    let n = records.len();
    let (residual_mean, residual_std) = residual_energy(records, oracle_cost)?;
    Ok(SummaryStats {
        success_count,
        repetitions: n,
        success_rate: success_count as f64 / n as f64,
        wilson_ci_95: wilson_interval(success_count, n, Z_95),
        residual_mean,
        residual_std,
        oracle_cost,
        tolerance: tol,
        mean_evaluations: records.iter().map(|r| r.evaluations as f64).sum::<f64>() / n as f64,
    })
}

/// A configuration bound to its instance and oracle.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub instance: Instance,
    /// Optimal cost from the config, the generator's construction, or enumeration.
    pub oracle: Option<f64>,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (instance, known) = match &config.problem {
            ProblemSource::File(path) => (read_instance(path)?, None),
            ProblemSource::Generator(spec) => {
                let g = spec.generate()?;
                (g.instance, g.known_optimum)
            }
        };
        let oracle = match (config.oracle_cost, known) {
            (Some(c), _) | (None, Some(c)) => Some(c),
            (None, None) => match instance.exact_optimum() {
                Ok(o) => Some(o.cost),
                Err(Error::SearchSpaceTooLarge(_)) => None,
                Err(e) => return Err(e),
            },
        };
        check_compatible(&config.method, &instance)?;
        if let Some(b) = &config.baseline {
            check_compatible(b, &instance)?;
        }
        Ok(Self { config, instance, oracle })
    }

    pub fn oracle(&self) -> Result<f64> {
        self.oracle.ok_or_else(|| {
            Error::MissingOracle(format!(
                "the {} instance is too large to enumerate and has no known optimum; set `oracle_cost`",
                self.instance.kind()
            ))
        })
    }

    /// Runs every repetition (concurrently); records come back in run order.
    pub fn run(&self) -> Result<Vec<RunRecord>> {
        let evolved = match &self.config.method {
            MethodConfig::Aqc(cfg) => Some(evolve_instance(&self.instance, cfg)?),
            _ => None,
        };
        (0..self.config.repetitions)
            .into_par_iter()
            .map(|i| {
                let seed = self.config.base_seed.wrapping_add(i as u64);
                run_one(&self.instance, &self.config.method, i, seed, evolved.as_ref())
            })
            .collect()
    }

    pub fn summarize(&self, records: &[RunRecord]) -> Result<SummaryStats> {
        success_probability(records, self.oracle()?, self.config.tolerance)
    }
}

fn check_compatible(method: &MethodConfig, instance: &Instance) -> Result<()> {
    if matches!(method, MethodConfig::Aqc(_)) && !matches!(instance, Instance::Ising(_)) {
        return Err(Error::Incompatible(format!("aqc needs an Ising instance, got {}", instance.kind())));
    }
    Ok(())
}

fn evolve_instance(instance: &Instance, cfg: &AqcConfig) -> Result<Evolution> {
    let Instance::Ising(ising) = instance else {
        return Err(Error::Incompatible(format!("aqc needs an Ising instance, got {}", instance.kind())));
    };
    evolve(&AqcSpec::new(ising.clone(), cfg.clone())?)
}

fn record<C: Serialize>(run: usize, seed: u64, r: AnnealResult<C>, start: Instant) -> Result<RunRecord> {
    Ok(RunRecord {
        run,
        seed,
        best_cost: r.best_cost,
        evaluations: r.evaluations,
        accepted_moves: r.accepted_moves,
        tunnel_jumps: r.tunnel_jumps,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        best_config: serde_json::to_value(&r.best_config)?,
        trace: r.trace,
    })
}

/// Executes one run of `method` with `seed`.
pub fn run_one(
    instance: &Instance,
    method: &MethodConfig,
    run: usize,
    seed: u64,
    evolved: Option<&Evolution>,
) -> Result<RunRecord> {
    let start = Instant::now();
    match method {
        MethodConfig::Sa(p) => {
            let p = SaParams { seed, ..p.clone() };
            with_problem!(instance, prob => record(run, seed, simulated_annealing(prob, &p)?, start))
        }
        MethodConfig::Pt(p) => {
            let p = PtParams { seed, ..p.clone() };
            with_problem!(instance, prob => record(run, seed, parallel_tempering(prob, &p)?, start))
        }
        MethodConfig::Sqa(p) => {
            let p = SqaParams { seed, ..p.clone() };
            match instance {
                Instance::Graph(g) => record(run, seed, qa_col(g, &p)?, start),
                _ => with_problem!(instance, prob => record(run, seed, sqa_generic(prob, &p)?, start)),
            }
        }
        MethodConfig::Qts(p) => {
            let p = QtsParams { seed, ..p.clone() };
            with_problem!(instance, prob => record(run, seed, qts_anneal(prob, &p)?, start))
        }
        MethodConfig::Aqc(cfg) => {
            let Instance::Ising(ising) = instance else {
                return Err(Error::Incompatible(format!("aqc needs an Ising instance, got {}", instance.kind())));
            };
            let owned;
            let evolution = match evolved {
                Some(e) => e,
                None => {
                    owned = evolve_instance(instance, cfg)?;
                    &owned
                }
            };
            let index = measure(&evolution.state, &mut rng_from_seed(seed))?;
            let config = SpinConfiguration::from_index(index, ising.n());
            let cost = ising.cost(&config);
            Ok(RunRecord {
                run,
                seed,
                best_cost: cost,
                evaluations: 1,
                accepted_moves: 0,
                tunnel_jumps: 0,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
                best_config: serde_json::to_value(&config)?,
                trace: Vec::new(),
            })
        }
    }
}

/// Runs an experiment end to end.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    Experiment::prepare(config.clone())?.run()
}

/// Side-by-side result of two methods on the same instance.
#[derive(Debug, Clone, Serialize)]
pub struct MethodReport {
    pub method: MethodConfig,
    pub stats: SummaryStats,
    pub nominal_evaluations: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub a: MethodReport,
    pub b: MethodReport,
    /// `b.success_rate - a.success_rate`.
    pub rate_difference: f64,
    /// Two-proportion z statistic for `b` beating `a`.
    pub z: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub report: Comparison,
    pub a: Vec<RunRecord>,
    pub b: Vec<RunRecord>,
}

/// Runs `a` and `b` on the same instance with equal repetitions and
/// compares their success rates.
///
/// With `matched_budget`, both methods are first rescaled to that many
/// evaluations per run. Budgets are compared on scheduled evaluations when
/// both methods have a fixed schedule and on measured means otherwise; a
/// difference above 1% aborts the comparison.
pub fn compare_methods(
    a: &ExperimentConfig,
    b: &ExperimentConfig,
    matched_budget: Option<u64>,
) -> Result<ComparisonRun> {
    let mut ea = Experiment::prepare(a.clone())?;
    let mut eb = Experiment::prepare(b.clone())?;
    if format_instance(&ea.instance) != format_instance(&eb.instance) {
        return Err(Error::Incompatible("the two configurations target different instances".into()));
    }
    if a.repetitions != b.repetitions {
        return Err(Error::InvalidConfig("compared experiments need equal repetitions".into()));
    }
    let size = ea.instance.size();
    if let Some(budget) = matched_budget {
        ea.config.method = ea.config.method.with_budget(size, budget)?;
        eb.config.method = eb.config.method.with_budget(size, budget)?;
    }
    let (na, nb) = (ea.config.method.nominal_evaluations(size), eb.config.method.nominal_evaluations(size));
    if let (Some(x), Some(y)) = (na, nb) {
        parity(x as f64, y as f64)?;
    }
    let (ra, rb) = (ea.run()?, eb.run()?);
    let (sa, sb) = (ea.summarize(&ra)?, eb.summarize(&rb)?);
    if na.is_none() || nb.is_none() {
        parity(sa.mean_evaluations, sb.mean_evaluations)?;
    }
    let z = two_proportion_z(sb.success_count, sb.repetitions, sa.success_count, sa.repetitions);
    let report = Comparison {
        rate_difference: sb.success_rate - sa.success_rate,
        z,
        a: MethodReport { method: ea.config.method, stats: sa, nominal_evaluations: na },
        b: MethodReport { method: eb.config.method, stats: sb, nominal_evaluations: nb },
    };
    Ok(ComparisonRun { report, a: ra, b: rb })
}

fn parity(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > BUDGET_PARITY * a.max(b) {
        return Err(Error::BudgetMismatch { a, b });
    }
    Ok(())
}

/// `run,seed,best_cost,evaluations,wall_ms` CSV.
pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("run,seed,best_cost,evaluations,wall_ms\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{:.3}", r.run, r.seed, r.best_cost, r.evaluations, r.wall_ms);
    }
    out
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    name: Option<&'a str>,
    instance: &'static str,
    method: &'a MethodConfig,
    base_seed: u64,
    stats: Option<&'a SummaryStats>,
    best_cost: f64,
}

#[derive(Serialize)]
struct Metadata {
    created_unix_s: u64,
    total_wall_ms: f64,
    threads: usize,
}

/// Writes `summary.json`, `runs.csv`, optional `trace_<i>.csv` files and a
/// `metadata.json` sidecar. Everything except the sidecar and the `wall_ms`
/// column is a deterministic function of the configuration.
pub fn write_outputs(
    dir: &Path,
    experiment: &Experiment,
    records: &[RunRecord],
    stats: Option<&SummaryStats>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let best = records.iter().map(|r| r.best_cost).fold(f64::INFINITY, f64::min);
    let summary = SummaryFile {
        name: experiment.config.name.as_deref(),
        instance: experiment.instance.kind(),
        method: &experiment.config.method,
        base_seed: experiment.config.base_seed,
        stats,
        best_cost: best,
    };
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    std::fs::write(dir.join("runs.csv"), runs_csv(records))?;
    if experiment.config.write_traces {
        for r in records {
            let mut buf = Vec::new();
            AnnealResult {
                best_config: (),
                best_cost: r.best_cost,
                trace: r.trace.clone(),
                accepted_moves: 0,
                uphill_accepted: 0,
                evaluations: 0,
                tunnel_jumps: 0,
            }
            .write_trace_csv(&mut buf)?;
            std::fs::write(dir.join(format!("trace_{}.csv", r.run)), buf)?;
        }
    }
    let meta = Metadata {
        created_unix_s: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        total_wall_ms: records.iter().map(|r| r.wall_ms).sum(),
        threads: rayon::current_num_threads(),
    };
    std::fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}
