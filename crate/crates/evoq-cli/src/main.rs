//! `evoq` — seeded derivative-free optimization experiments on benchmark
//! and quantum-circuit landscapes, with a 2-D slice/persistence pipeline.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use evoq::bench::{BaseFunction, CompositionConfig, ComponentConfig, ProblemConfig};
use evoq::exp::{
    run_batch_each, summary_to_csv, trace_to_csv, ExperimentConfig, SummaryRow,
};
use evoq::objective::{sphere, Objective};
use evoq::optim::{Algorithm, OptimizerConfig};
use evoq::rng::{derive_seed, rng_from_seed};
use evoq::topo::{diagram_to_csv, field_to_csv, grid_eval, h0_persistence, slice_basis, SliceSpec};
use evoq::vqa::IsingVqaObjective;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const EXIT_CONFIG: i32 = 1;
const EXIT_RUNTIME: i32 = 2;

/// Error carrying the process exit code.
struct CliError {
    code: i32,
    message: String,
}

type CliResult<T> = Result<T, CliError>;

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn runtime_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

impl From<evoq::error::Error> for CliError {
    fn from(e: evoq::error::Error) -> Self {
        use evoq::error::Error::*;
        match e {
            InvalidArgument(_) | Config(_) | Json(_) => config_error(e.to_string()),
            InvalidState(_) | NotFound(_) | Io(_) => runtime_error(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "evoq",
    version,
    about = "Seeded optimizer experiments, benchmark landscapes, an Ising-circuit objective, and landscape-slice topology"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded multi-run experiments; writes per-run trace CSVs and a summary CSV
    Optimize(OptimizeArgs),
    /// Evaluate a 2-D slice between two parameter vectors; writes field and persistence-diagram CSVs
    Slice(SliceArgs),
    /// Run fast built-in invariant checks
    Selftest,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Problem: vqe | sphere | rastrigin | schaffer | levy | composition | <path.json>
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated tags: classic_de,lshade,nlshade_rsp,lsrtde,agsk,qensemble
    #[arg(long)]
    optimizer: Option<String>,
    /// Objective evaluations per run
    #[arg(long)]
    budget: Option<u64>,
    /// Independent seeded runs per optimizer
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run r uses base_seed + r
    #[arg(long)]
    seed: Option<u64>,
    /// Shot count for the noisy regime, or "exact"
    #[arg(long)]
    shots: Option<String>,
    /// Problem dimension (vqe: parameter count, i.e. 2 x qubits)
    #[arg(long)]
    dim: Option<usize>,
    /// Worker threads across runs
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment config; explicit CLI flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    /// JSON file holding the first anchor (array of parameter values)
    start: PathBuf,
    /// JSON file holding the second anchor
    end: PathBuf,
    /// Problem evaluated over the slice (same forms as optimize)
    #[arg(long, default_value = "vqe")]
    problem: String,
    /// Shot count or "exact"
    #[arg(long, default_value = "exact")]
    shots: String,
    /// Grid resolution per axis (odd, >= 3)
    #[arg(long, default_value_t = 201)]
    resolution: usize,
    /// Half-extent of the second axis in parameter units
    #[arg(long)]
    extent: Option<f64>,
    /// Seed for the slice basis and problem instance
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

/// Problem description shared by the config file and the CLI flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ProblemSpec {
    Vqe {
        n_qubits: usize,
    },
    Sphere {
        dimension: usize,
        half_width: f64,
    },
    Bench {
        #[serde(flatten)]
        config: ProblemConfig,
    },
    Composition {
        #[serde(flatten)]
        config: CompositionConfig,
    },
}

impl ProblemSpec {
    fn label(&self) -> String {
        match self {
            ProblemSpec::Vqe { n_qubits } => format!("vqe({n_qubits} qubits)"),
            ProblemSpec::Sphere { dimension, .. } => format!("sphere(d={dimension})"),
            ProblemSpec::Bench { config } => {
                format!("{}(d={})", config.base.name(), config.dimension)
            }
            ProblemSpec::Composition { config } => {
                format!("composition({} parts, d={})", config.components.len(), config.dimension)
            }
        }
    }

    fn dimension(&self) -> usize {
        match self {
            ProblemSpec::Vqe { n_qubits } => 2 * n_qubits,
            ProblemSpec::Sphere { dimension, .. } => *dimension,
            ProblemSpec::Bench { config } => config.dimension,
            ProblemSpec::Composition { config } => config.dimension,
        }
    }

    /// Builds a fresh objective. `run_seed` feeds only the shot-noise
    /// stream; deterministic landscapes ignore it.
    fn make_objective(
        &self,
        shots: Option<u32>,
        run_seed: u64,
    ) -> evoq::error::Result<Box<dyn Objective>> {
        match self {
            ProblemSpec::Vqe { n_qubits } => Ok(Box::new(IsingVqaObjective::new(
                *n_qubits,
                shots,
                derive_seed(run_seed, 1),
            )?)),
            ProblemSpec::Sphere {
                dimension,
                half_width,
            } => Ok(Box::new(sphere(*dimension, *half_width))),
            ProblemSpec::Bench { config } => Ok(Box::new(config.build()?)),
            ProblemSpec::Composition { config } => Ok(Box::new(config.build()?)),
        }
    }
}

/// Full experiment document: problem + optimizer roster + batch settings.
/// CLI flags override any field.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct HarnessConfig {
    #[serde(default = "default_problem")]
    problem: ProblemSpec,
    #[serde(default = "default_optimizers")]
    optimizers: Vec<OptimizerConfig>,
    #[serde(default = "default_runs")]
    runs: usize,
    #[serde(default = "default_budget")]
    budget: u64,
    #[serde(default = "default_base_seed")]
    base_seed: u64,
    #[serde(default)]
    checkpoints: Option<Vec<u64>>,
    #[serde(default = "default_workers")]
    workers: usize,
    /// None = exact expectation values; Some(n) = n-shot Gaussian noise.
    #[serde(default)]
    shots: Option<u32>,
    #[serde(default = "default_out")]
    out: PathBuf,
}

fn default_problem() -> ProblemSpec {
    ProblemSpec::Vqe { n_qubits: 10 }
}
fn default_optimizers() -> Vec<OptimizerConfig> {
    vec![
        OptimizerConfig::new(Algorithm::ClassicDe),
        OptimizerConfig::new(Algorithm::Lshade),
        OptimizerConfig::new(Algorithm::Lsrtde),
    ]
}
fn default_runs() -> usize {
    20
}
fn default_budget() -> u64 {
    100_000
}
fn default_base_seed() -> u64 {
    1
}
fn default_workers() -> usize {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("results")
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            problem: default_problem(),
            optimizers: default_optimizers(),
            runs: default_runs(),
            budget: default_budget(),
            base_seed: default_base_seed(),
            checkpoints: None,
            workers: default_workers(),
            shots: None,
            out: default_out(),
        }
    }
}

fn parse_shots(text: &str) -> CliResult<Option<u32>> {
    if text == "exact" {
        return Ok(None);
    }
    match text.parse::<u32>() {
        Ok(n) if n >= 1 => Ok(Some(n)),
        _ => Err(config_error(format!(
            "--shots takes a positive integer or \"exact\", got '{text}'"
        ))),
    }
}

/// Builds a problem spec from a name or a JSON spec file. `dim` adjusts
/// name-built problems (for vqe it is the parameter count, 2 per qubit).
fn parse_problem(text: &str, dim: Option<usize>, instance_seed: u64) -> CliResult<ProblemSpec> {
    let bench = |base: BaseFunction| -> ProblemSpec {
        ProblemSpec::Bench {
            config: ProblemConfig {
                base,
                dimension: dim.unwrap_or(10),
                seed: instance_seed,
                scale: None,
                shift: None,
                optimum_value: 0.0,
                bounds: (-100.0, 100.0),
            },
        }
    };
    match text {
        "vqe" => {
            let d = dim.unwrap_or(20);
            if d < 4 || d % 2 != 0 {
                return Err(config_error(format!(
                    "vqe needs an even parameter count >= 4, got --dim {d}"
                )));
            }
            Ok(ProblemSpec::Vqe { n_qubits: d / 2 })
        }
        "sphere" => Ok(ProblemSpec::Sphere {
            dimension: dim.unwrap_or(10),
            half_width: 100.0,
        }),
        "rastrigin" => Ok(bench(BaseFunction::Rastrigin)),
        "schaffer" => Ok(bench(BaseFunction::SchafferF3)),
        "levy" => Ok(bench(BaseFunction::Levy)),
        "composition" => Ok(ProblemSpec::Composition {
            config: CompositionConfig {
                dimension: dim.unwrap_or(10),
                seed: instance_seed,
                components: vec![
                    ComponentConfig {
                        base: BaseFunction::Rastrigin,
                        sigma: 10.0,
                        lambda: 1.0,
                        bias: 0.0,
                        shift: None,
                    },
                    ComponentConfig {
                        base: BaseFunction::Levy,
                        sigma: 20.0,
                        lambda: 10.0,
                        bias: 100.0,
                        shift: None,
                    },
                    ComponentConfig {
                        base: BaseFunction::SchafferF3,
                        sigma: 30.0,
                        lambda: 1.0,
                        bias: 200.0,
                        shift: None,
                    },
                ],
                optimum_value: 0.0,
                bounds: (-100.0, 100.0),
            },
        }),
        path => {
            let raw = std::fs::read_to_string(path).map_err(|e| {
                config_error(format!("cannot read problem file '{path}': {e}"))
            })?;
            let spec: ProblemSpec = serde_json::from_str(&raw).map_err(|e| {
                config_error(format!("problem file '{path}' is not a valid spec: {e}"))
            })?;
            Ok(spec)
        }
    }
}

fn apply_dim(spec: &mut ProblemSpec, dim: usize) -> CliResult<()> {
    match spec {
        ProblemSpec::Vqe { n_qubits } => {
            if dim < 4 || dim % 2 != 0 {
                return Err(config_error(format!(
                    "vqe needs an even parameter count >= 4, got --dim {dim}"
                )));
            }
            *n_qubits = dim / 2;
        }
        ProblemSpec::Sphere { dimension, .. } => *dimension = dim,
        ProblemSpec::Bench { config } => config.dimension = dim,
        ProblemSpec::Composition { config } => config.dimension = dim,
    }
    Ok(())
}

fn load_harness_config(args: &OptimizeArgs) -> CliResult<HarnessConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let raw = std::fs::read_to_string(path).map_err(|e| {
                config_error(format!("cannot read config '{}': {e}", path.display()))
            })?;
            serde_json::from_str(&raw).map_err(|e| {
                config_error(format!("config '{}' is invalid: {e}", path.display()))
            })?
        }
        None => HarnessConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(text) = &args.problem {
        cfg.problem = parse_problem(text, args.dim, cfg.base_seed)?;
    } else if let Some(dim) = args.dim {
        apply_dim(&mut cfg.problem, dim)?;
    }
    if let Some(tags) = &args.optimizer {
        cfg.optimizers = tags
            .split(',')
            .map(|t| Algorithm::parse(t.trim()).map(OptimizerConfig::new))
            .collect::<evoq::error::Result<Vec<_>>>()
            .map_err(CliError::from)?;
    }
    if let Some(budget) = args.budget {
        cfg.budget = budget;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(text) = &args.shots {
        cfg.shots = parse_shots(text)?;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    validate_harness_config(&cfg)?;
    Ok(cfg)
}

fn validate_harness_config(cfg: &HarnessConfig) -> CliResult<()> {
    if cfg.runs == 0 {
        return Err(config_error("runs must be >= 1"));
    }
    if cfg.budget == 0 {
        return Err(config_error("budget must be >= 1"));
    }
    if cfg.optimizers.is_empty() {
        return Err(config_error("optimizer list is empty"));
    }
    if let Some(points) = &cfg.checkpoints {
        if points.is_empty() {
            return Err(config_error("checkpoint list is empty"));
        }
        for w in points.windows(2) {
            if w[1] <= w[0] {
                return Err(config_error("checkpoints must be strictly ascending"));
            }
        }
        if *points.last().unwrap() > cfg.budget {
            return Err(config_error("last checkpoint exceeds the budget"));
        }
    }
    let dimension = cfg.problem.dimension();
    for opt in &cfg.optimizers {
        let n_init = opt.resolved_n_init(dimension);
        if cfg.budget < n_init as u64 {
            return Err(config_error(format!(
                "budget {} cannot cover {}'s initial population of {n_init}",
                cfg.budget,
                opt.algorithm.name()
            )));
        }
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content)
        .map_err(|e| runtime_error(format!("cannot write '{}': {e}", path.display())))
}

fn cmd_optimize(args: OptimizeArgs) -> CliResult<()> {
    let cfg = load_harness_config(&args)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| {
        config_error(format!(
            "cannot create output directory '{}': {e}",
            cfg.out.display()
        ))
    })?;
    let exp = ExperimentConfig {
        runs: cfg.runs,
        budget: cfg.budget,
        base_seed: cfg.base_seed,
        checkpoints: cfg.checkpoints.clone(),
        workers: cfg.workers,
    };
    let regime = match cfg.shots {
        None => "exact".to_string(),
        Some(n) => format!("{n}-shot"),
    };
    println!(
        "problem {} | {} regime | budget {} | {} runs | base seed {}",
        cfg.problem.label(),
        regime,
        cfg.budget,
        cfg.runs,
        cfg.base_seed
    );
    let mut rows = Vec::new();
    for opt in &cfg.optimizers {
        let name = opt.algorithm.name();
        let factory = |i: usize| {
            cfg.problem
                .make_objective(cfg.shots, cfg.base_seed + i as u64)
        };
        let outcomes = run_batch_each(opt, factory, &exp).map_err(CliError::from)?;
        let mut records = Vec::new();
        for (i, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(record) => {
                    let path = cfg.out.join(format!("trace_{name}_run{i:02}.csv"));
                    write_file(&path, &trace_to_csv(&record.trace))?;
                    records.push(record);
                }
                Err(e) => eprintln!("warning: {name} run {i} failed: {e}"),
            }
        }
        let row = SummaryRow::from_records(name, &records);
        println!(
            "{:<12} mean best {:>12.6}  +/- {:>10.3e}  mean time {:>8.3}s  ({} / {} runs)",
            row.optimizer,
            row.mean_best,
            row.std_best,
            row.mean_time_s,
            records.len(),
            cfg.runs
        );
        rows.push(row);
    }
    let summary_path = cfg.out.join("summary.csv");
    write_file(&summary_path, &summary_to_csv(&rows))?;
    println!("wrote {}", summary_path.display());
    Ok(())
}

fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read '{}': {e}", path.display())))?;
    let v: Vec<f64> = serde_json::from_str(&raw).map_err(|e| {
        config_error(format!(
            "'{}' must be a JSON array of numbers: {e}",
            path.display()
        ))
    })?;
    if v.is_empty() {
        return Err(config_error(format!("'{}' is empty", path.display())));
    }
    Ok(v)
}

fn cmd_slice(args: SliceArgs) -> CliResult<()> {
    let anchor_a = read_vector(&args.start)?;
    let anchor_b = read_vector(&args.end)?;
    if anchor_a.len() != anchor_b.len() {
        return Err(config_error(format!(
            "anchor dimensions differ: {} vs {}",
            anchor_a.len(),
            anchor_b.len()
        )));
    }
    let shots = parse_shots(&args.shots)?;
    let spec = parse_problem(&args.problem, Some(anchor_a.len()), args.seed)?;
    if spec.dimension() != anchor_a.len() {
        return Err(config_error(format!(
            "problem dimension {} does not match anchors of dimension {}",
            spec.dimension(),
            anchor_a.len()
        )));
    }
    let mut objective = spec.make_objective(shots, args.seed).map_err(CliError::from)?;
    let mut slice = SliceSpec::new(anchor_a.clone(), anchor_b.clone())
        .and_then(|s| s.with_resolution(args.resolution))
        .map_err(CliError::from)?;
    if let Some(extent) = args.extent {
        slice = slice.with_extent(extent).map_err(CliError::from)?;
    }
    let mut rng = rng_from_seed(derive_seed(args.seed, 2));
    let (d1, d2) = slice_basis(&anchor_a, &anchor_b, &mut rng).map_err(CliError::from)?;
    let field = grid_eval(&slice, &d1, &d2, objective.as_mut()).map_err(CliError::from)?;
    let pairs = h0_persistence(&field);
    std::fs::create_dir_all(&args.out).map_err(|e| {
        config_error(format!(
            "cannot create output directory '{}': {e}",
            args.out.display()
        ))
    })?;
    let field_path = args.out.join("field.csv");
    let diagram_path = args.out.join("diagram.csv");
    write_file(&field_path, &field_to_csv(&field))?;
    write_file(&diagram_path, &diagram_to_csv(&pairs))?;
    let finite = pairs.iter().filter(|p| !p.is_essential()).count();
    println!(
        "field {}x{} | min value {:.6} | {} persistence pairs ({} finite)",
        field.rows(),
        field.cols(),
        field.min_value(),
        pairs.len(),
        finite
    );
    let mut by_persistence: Vec<_> = pairs.iter().filter(|p| !p.is_essential()).collect();
    by_persistence.sort_by(|a, b| b.persistence().total_cmp(&a.persistence()));
    for pair in by_persistence.iter().take(5) {
        println!(
            "  basin born {:.6}, dies {:.6}, barrier {:.6}",
            pair.birth,
            pair.death,
            pair.persistence()
        );
    }
    println!("wrote {} and {}", field_path.display(), diagram_path.display());
    Ok(())
}

struct Check {
    label: &'static str,
    passed: bool,
}

fn check(label: &'static str, passed: bool) -> Check {
    Check { label, passed }
}

fn cmd_selftest() -> CliResult<()> {
    use evoq::sha;
    let mut checks = Vec::new();

    let schedule = sha::PopulationSchedule::new(100, 4, 10_000, sha::ScheduleKind::Linear)
        .map_err(CliError::from)?;
    checks.push(check("linear shrink midpoint 100->4 = 52", schedule.size_at(5_000) == 52));
    let schedule = sha::PopulationSchedule::new(100, 4, 10_000, sha::ScheduleKind::Nonlinear)
        .map_err(CliError::from)?;
    checks.push(check(
        "nonlinear shrink midpoint 100->4 = 32",
        schedule.size_at(5_000) == 32,
    ));
    let lehmer = sha::weighted_lehmer_mean(&[1.0, 2.0], &[5.0, 5.0]);
    checks.push(check(
        "weighted Lehmer mean of {1,2} = 5/3",
        lehmer.is_some_and(|v| (v - 5.0 / 3.0).abs() < 1e-9),
    ));
    checks.push(check(
        "success-rate F center at SR=0 is 0.4",
        (sha::srtde_mf(0.0) - 0.4).abs() < 1e-9,
    ));
    checks.push(check(
        "success-rate F center at SR=1 is ~0.649977",
        (sha::srtde_mf(1.0) - 0.649977).abs() < 1e-5,
    ));

    let junior = evoq::optim::agsk_junior_step(&[0.0], &[1.0], &[2.0], 0.5);
    checks.push(check("junior step scalar example = 1.5", junior == vec![1.5]));
    let senior = evoq::optim::agsk_senior_step(&[0.0], &[1.0], &[0.5], 0.5);
    checks.push(check("senior step scalar example = 0.0", senior == vec![0.0]));

    let mut q = evoq::optim::QTable::new(4, 3);
    evoq::optim::q_update(&mut q, 2, 1, 1.0, 3, 0.5, 0.9);
    checks.push(check(
        "single TD update on zero table = 0.5",
        (q.get(2, 1) - 0.5).abs() < 1e-12,
    ));

    let mut vqe = IsingVqaObjective::new(10, None, 0).map_err(CliError::from)?;
    let ground = vqe.exact_energy(&vec![0.0; 20]).map_err(CliError::from)?;
    checks.push(check(
        "10-qubit circuit at zero angles gives energy -9",
        (ground - (-9.0)).abs() < 1e-12,
    ));

    let field = evoq::topo::ScalarField2D::from_rows(vec![vec![0.0, 2.0, 1.0, 3.0]])
        .map_err(CliError::from)?;
    let pairs = h0_persistence(&field);
    checks.push(check(
        "persistence of [0,2,1,3] = {(0,inf),(1,2)}",
        pairs.len() == 2
            && pairs[0].birth == 0.0
            && pairs[0].is_essential()
            && pairs[1].birth == 1.0
            && pairs[1].death == 2.0,
    ));

    let opt = OptimizerConfig::new(Algorithm::Lshade);
    let mut obj = sphere(5, 100.0);
    let record = evoq::optim::run(&opt, &mut obj, 20_000, 3, &[20_000]).map_err(CliError::from)?;
    checks.push(check(
        "adaptive DE reaches <1e-6 on 5-d sphere in 20k evals",
        record.final_best.fitness < 1e-6,
    ));

    let mut failed = 0;
    for c in &checks {
        println!("{} {}", if c.passed { "ok  " } else { "FAIL" }, c.label);
        if !c.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(runtime_error(format!("{failed} selftest check(s) failed")));
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => e.exit(),
            _ => {
                let _ = e.print();
                std::process::exit(EXIT_CONFIG);
            }
        },
    };
    let result = match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Slice(args) => cmd_slice(args),
        Command::Selftest => cmd_selftest(),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
