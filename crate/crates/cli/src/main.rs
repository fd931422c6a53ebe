//! `qanneal`: generate instances, run the annealers, query exact oracles and
//! drive benchmark experiments.
//!
//! Exit status: 0 on success, 1 on runtime or domain errors, 2 on usage and
//! configuration errors.

use anyhow::{anyhow, Context};
use clap::{ColorChoice, Parser, Subcommand, ValueEnum};
use qanneal::aqc::{evolution_csv, evolve, gap_csv, minimum_gap, AqcConfig, AqcSpec};
use qanneal::harness::{compare_methods, write_outputs, Experiment, ExperimentConfig};
use qanneal::problems::io::{read_instance, write_instance};
use qanneal::problems::{BarrierProfile, BarrierSpec, CouplingDistribution, GeneratorSpec, Instance, Topology};
use qanneal::qts::{qts_anneal, QtsParams};
use qanneal::sa::{parallel_tempering, simulated_annealing, PtParams, SaParams};
use qanneal::sqa::{qa_col, sqa_generic, SqaParams};
use qanneal::{with_problem, AnnealResult};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qanneal", version, about = "Classical and quantum-inspired annealing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance file.
    Gen(GenArgs),
    /// Run one annealer on an instance.
    Solve(SolveArgs),
    /// Enumerate the exact optimum of a small instance.
    Exact(ExactArgs),
    /// Scan the spectral gap along the adiabatic path.
    Gap(AqcArgs),
    /// Integrate the Schrödinger equation along the adiabatic path.
    Evolve(AqcArgs),
    /// Run an experiment (or a two-method comparison) from a JSON config.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Ising,
    Graph,
    Tsp,
    Rastrigin,
    Barrier,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Complete,
    Grid2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum CouplingArg {
    #[value(name = "pm_j", alias = "pmj")]
    PmJ,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    ThinTall,
    WideShallow,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodKind {
    Sa,
    Pt,
    Sqa,
    Qts,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Spins (ising) or vertices (graph).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "complete")]
    topology: TopologyArg,
    #[arg(long, value_enum, default_value = "pm_j")]
    couplings: CouplingArg,
    /// Colors of the planted graph.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.25)]
    edge_prob: f64,
    #[arg(long)]
    cities: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Lattice step of the Rastrigin walker.
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long, value_enum, default_value = "thin-tall")]
    profile: ProfileArg,
    #[arg(long)]
    wells: Option<usize>,
    #[arg(long)]
    barrier_width: Option<usize>,
    #[arg(long)]
    barrier_height: Option<f64>,
    #[arg(long)]
    depth: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: MethodKind,
    #[arg(long)]
    instance: PathBuf,
    /// Method parameters as JSON; its `seed` is replaced by `--seed`.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving `result.json` and `trace.csv`.
    #[arg(long, default_value = "out/solve")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct ExactArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Accepted for uniformity; enumeration is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct AqcArgs {
    /// Ising instance.
    #[arg(long)]
    instance: PathBuf,
    /// Evolution settings as JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors that exit with status 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    Usage(e.into()).into()
}

fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stderr().is_terminal()
}

fn main() -> ExitCode {
    let colored = color_enabled();
    let choice = if colored { ColorChoice::Auto } else { ColorChoice::Never };
    let mut command = <Cli as clap::CommandFactory>::command().color(choice);
    let matches = command.try_get_matches_from_mut(std::env::args_os());
    let cli = match matches.and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            if !rendered.contains("Usage:") {
                // value errors omit the usage line; show the subcommand's
                let sub = std::env::args().nth(1).unwrap_or_default();
                let usage = match command.find_subcommand_mut(&sub) {
                    Some(s) => s.render_usage(),
                    None => command.render_usage(),
                };
                eprintln!("{usage}");
            }
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let prefix = if colored { "\x1b[1;31merror:\x1b[0m" } else { "error:" };
            let missing_oracle = matches!(e.downcast_ref::<qanneal::Error>(), Some(qanneal::Error::MissingOracle(_)));
            let code = if e.downcast_ref::<Usage>().is_some() || missing_oracle { 2 } else { 1 };
            eprintln!("{prefix} {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Exact(a) => exact(a),
        Command::Gap(a) => gap(a),
        Command::Evolve(a) => evolve_cmd(a),
        Command::Bench(a) => bench(a),
    }
}

fn require<T>(value: Option<T>, flag: &str, problem: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| usage(anyhow!("--{flag} is required for --problem {problem}")))
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    println!("seed={}", a.seed);
    let spec = match a.problem {
        ProblemKind::Ising => GeneratorSpec::Ising {
            n: require(a.n, "n", "ising")?,
            topology: match a.topology {
                TopologyArg::Complete => Topology::Complete,
                TopologyArg::Grid2d => Topology::Grid2d,
            },
            couplings: match a.couplings {
                CouplingArg::PmJ => CouplingDistribution::PlusMinusJ,
                CouplingArg::Gaussian => CouplingDistribution::Gaussian,
            },
            seed: a.seed,
        },
        ProblemKind::Graph => {
            GeneratorSpec::Graph { n: require(a.n, "n", "graph")?, k: a.k, edge_prob: a.edge_prob, seed: a.seed }
        }
        ProblemKind::Tsp => GeneratorSpec::Tsp { cities: require(a.cities, "cities", "tsp")?, seed: a.seed },
        ProblemKind::Rastrigin => GeneratorSpec::Rastrigin { dim: require(a.dim, "dim", "rastrigin")?, step: a.step },
        ProblemKind::Barrier => {
            let base = BarrierSpec::for_profile(match a.profile {
                ProfileArg::ThinTall => BarrierProfile::ThinTall,
                ProfileArg::WideShallow => BarrierProfile::WideShallow,
            });
            GeneratorSpec::Barrier(BarrierSpec {
                wells: a.wells.unwrap_or(base.wells),
                barrier_width: a.barrier_width.unwrap_or(base.barrier_width),
                barrier_height: a.barrier_height.unwrap_or(base.barrier_height),
                depth: a.depth.unwrap_or(base.depth),
                ..base
            })
        }
    };
    let generated = spec.generate().map_err(usage)?;
    write_instance(&a.out, &generated.instance).with_context(|| format!("writing {}", a.out.display()))?;
    println!("wrote {} instance to {}", generated.instance.kind(), a.out.display());
    Ok(())
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    read_instance(path).with_context(|| format!("reading instance {}", path.display()))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| usage(anyhow!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SolveReport<'a, C> {
    method: &'static str,
    problem: &'static str,
    seed: u64,
    best_cost: f64,
    best_config: &'a C,
    evaluations: u64,
    accepted_moves: u64,
    uphill_accepted: u64,
    tunnel_jumps: u64,
}

fn emit<C: Serialize>(
    method: &'static str,
    instance: &Instance,
    seed: u64,
    out: &Path,
    r: AnnealResult<C>,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let report = SolveReport {
        method,
        problem: instance.kind(),
        seed,
        best_cost: r.best_cost,
        best_config: &r.best_config,
        evaluations: r.evaluations,
        accepted_moves: r.accepted_moves,
        uphill_accepted: r.uphill_accepted,
        tunnel_jumps: r.tunnel_jumps,
    };
    std::fs::write(out.join("result.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let mut trace = Vec::new();
    r.write_trace_csv(&mut trace)?;
    std::fs::write(out.join("trace.csv"), trace)?;
    println!("best_cost={}", r.best_cost);
    println!("wrote {} and {}", out.join("result.json").display(), out.join("trace.csv").display());
    Ok(())
}

fn solve(a: SolveArgs) -> anyhow::Result<()> {
    println!("seed={}", a.seed);
    let instance = load_instance(&a.instance)?;
    let (seed, out) = (a.seed, a.out.as_path());
    match a.method {
        MethodKind::Sa => {
            let p = SaParams { seed, ..load_json(&a.config)? };
            with_problem!(&instance, prob => emit("sa", &instance, seed, out, simulated_annealing(prob, &p)?))
        }
        MethodKind::Pt => {
            let p = PtParams { seed, ..load_json(&a.config)? };
            with_problem!(&instance, prob => emit("pt", &instance, seed, out, parallel_tempering(prob, &p)?))
        }
        MethodKind::Sqa => {
            let p = SqaParams { seed, ..load_json(&a.config)? };
            match &instance {
                Instance::Graph(g) => emit("sqa", &instance, seed, out, qa_col(g, &p)?),
                _ => with_problem!(&instance, prob => emit("sqa", &instance, seed, out, sqa_generic(prob, &p)?)),
            }
        }
        MethodKind::Qts => {
            let p = QtsParams { seed, ..load_json(&a.config)? };
            with_problem!(&instance, prob => emit("qts", &instance, seed, out, qts_anneal(prob, &p)?))
        }
    }
}

fn exact(a: ExactArgs) -> anyhow::Result<()> {
    let instance = load_instance(&a.instance)?;
    let summary = instance.exact_optimum().map_err(|e| match e {
        qanneal::Error::SearchSpaceTooLarge(m) => {
            anyhow!("{m}; exhaustive search grows as 2^N and is refused beyond the cap")
        }
        e => e.into(),
    })?;
    #[derive(Serialize)]
    struct Report {
        seed: u64,
        problem: &'static str,
        #[serde(flatten)]
        summary: qanneal::problems::ExactSummary,
    }
    let report = Report { seed: a.seed, problem: instance.kind(), summary };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn aqc_spec(a: &AqcArgs) -> anyhow::Result<AqcSpec> {
    let instance = load_instance(&a.instance)?;
    let Instance::Ising(ising) = instance else {
        return Err(qanneal::Error::Incompatible(format!(
            "gap and evolve need an Ising instance, got {}",
            instance.kind()
        ))
        .into());
    };
    let config: AqcConfig = load_json(&a.spec)?;
    Ok(AqcSpec::new(ising, config)?)
}

fn gap(a: AqcArgs) -> anyhow::Result<()> {
    println!("seed={}", a.seed);
    let spec = aqc_spec(&a)?;
    let scan = minimum_gap(&spec, spec.config().resolution)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("gap.csv"));
    std::fs::write(&out, gap_csv(&scan)).with_context(|| format!("writing {}", out.display()))?;
    println!("g_min={:.6} s_star={}", scan.g_min, scan.s_star);
    println!("wrote {}", out.display());
    Ok(())
}

fn evolve_cmd(a: AqcArgs) -> anyhow::Result<()> {
    println!("seed={}", a.seed);
    let spec = aqc_spec(&a)?;
    let ev = evolve(&spec)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("evolution.csv"));
    std::fs::write(&out, evolution_csv(&ev.trace)).with_context(|| format!("writing {}", out.display()))?;
    println!("ground_prob={:.6} max_norm_drift={:.3e}", ev.final_ground_probability(), ev.max_norm_drift);
    println!("wrote {}", out.display());
    Ok(())
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| usage(anyhow!("{}: {e}", a.config.display())))?;
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    println!("seed={}", cfg.base_seed);
    let dir = a
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.name.as_deref().unwrap_or("bench")));

    let Some(baseline) = cfg.baseline.clone() else {
        let exp = Experiment::prepare(cfg).map_err(prepare_error)?;
        exp.oracle()?;
        let records = exp.run()?;
        let stats = exp.summarize(&records)?;
        write_outputs(&dir, &exp, &records, Some(&stats))?;
        println!(
            "{}: {}/{} successes, rate {:.3} (95% CI {:.3}-{:.3}), mean residual {:.4}",
            exp.config.method.name(),
            stats.success_count,
            stats.repetitions,
            stats.success_rate,
            stats.wilson_ci_95.0,
            stats.wilson_ci_95.1,
            stats.residual_mean
        );
        println!("wrote {}", dir.display());
        return Ok(());
    };

    let base = cfg.with_method(baseline);
    let subject = ExperimentConfig { baseline: None, ..cfg.clone() };
    Experiment::prepare(base.clone()).map_err(prepare_error)?.oracle()?;
    let run = compare_methods(&base, &subject, cfg.matched_budget)?;
    for (tag, config, records) in [("a", &base, &run.a), ("b", &subject, &run.b)] {
        let mut exp = Experiment::prepare(config.clone())?;
        if let Some(budget) = cfg.matched_budget {
            exp.config.method = exp.config.method.with_budget(exp.instance.size(), budget)?;
        }
        let stats = exp.summarize(records)?;
        write_outputs(&dir.join(format!("{tag}_{}", config.method.name())), &exp, records, Some(&stats))?;
    }
    std::fs::write(dir.join("comparison.json"), serde_json::to_string_pretty(&run.report)? + "\n")?;
    let r = &run.report;
    println!(
        "{} {:.3} vs {} {:.3}: difference {:+.3}, z = {:.2}",
        r.a.method.name(),
        r.a.stats.success_rate,
        r.b.method.name(),
        r.b.stats.success_rate,
        r.rate_difference,
        r.z
    );
    println!("wrote {}", dir.display());
    Ok(())
}

/// Binding a config to its instance: a bad generator or incompatible method
/// is a configuration error, an unreadable file a runtime one.
fn prepare_error(e: qanneal::Error) -> anyhow::Error {
    match e {
        qanneal::Error::Io(_) => e.into(),
        e => usage(e),
    }
}
