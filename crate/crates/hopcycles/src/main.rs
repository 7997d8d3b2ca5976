//! Command-line front-end: learn → classify → simulate → verify, plus
//! enumeration, parameter sweeps and the built-in reproduction suite.
//!
//! Exit codes: 0 success, 2 configuration error, 3 non-admissible input,
//! 4 integration failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hopcycles::dynamics::{
    integrate_with_floor, Formulation, ModelParams, SystemSpec, Trajectory,
};
use hopcycles::golden::{build_params, builtin_cases, run_all, GoldenConfig, X0Policy};
use hopcycles::patterns::{build_consecutive_sigma, canonical_generators, GeneratorVector};
use hopcycles::ratlinalg::{dim_w_eta, solve_learning, CouplingForm};
use hopcycles::stability::{predict_cycle, predicted_sigma, CycleType, PredictionReport};
use hopcycles::trace::{analyze, sweep, SweepRow, TraceResult, DEFAULT_GAMMA, DEFAULT_THRESHOLD};
use hopcycles::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hopcycles",
    about = "Learning-rule synthesis and heteroclinic-cycle analysis for Hopfield firing-rate networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the coupling matrix J from a binary generator string
    Learn(LearnArgs),
    /// Classify the cycle supported by (η, n) under the given parameters
    Classify(RunArgs),
    /// Integrate the network and write the trajectory as CSV
    Simulate(RunArgs),
    /// Run prediction and simulation together and report their agreement
    Verify(RunArgs),
    /// Enumerate generator classes of period p (up to rotation and sign flip)
    Enumerate(EnumerateArgs),
    /// Sweep ε or λ over a grid and report the regime per cell
    Sweep(SweepArgs),
    /// Run the built-in reproduction cases
    Golden(GoldenArgs),
}

#[derive(Args)]
struct LearnArgs {
    /// generator as a sign string, e.g. "+++---"
    #[arg(long, allow_hyphen_values = true)]
    eta: String,
    /// window length n (number of neurons)
    #[arg(long)]
    n: usize,
    /// output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormulationArg {
    Tanh,
    Logistic,
}

/// Flags shared by classify / simulate / verify. A `--config` file, when
/// given, replaces every model and integrator flag.
#[derive(Args)]
struct RunArgs {
    /// generator as a sign string, e.g. "+++---"
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// window length n (number of neurons)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "tanh")]
    formulation: FormulationArg,
    /// gain λ
    #[arg(long, default_value_t = 3.4)]
    lambda: f64,
    /// diagonal coupling weight c₀ (tanh formulation)
    #[arg(long, default_value_t = 0.6)]
    c0: f64,
    /// regularization truncation order q (odd)
    #[arg(long, default_value_t = 9)]
    q: u32,
    /// logit regularization ε (logistic formulation; overrides --q there)
    #[arg(long)]
    eps: Option<f64>,
    /// external input I (logistic formulation)
    #[arg(short = 'I', long = "input")]
    input_i: Option<f64>,
    #[arg(long, default_value_t = 0.002)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 300.0)]
    t_end: f64,
    /// record every `stride`-th step
    #[arg(long, default_value_t = 10)]
    stride: usize,
    /// initial condition: near-vertex:<pattern>, random:<seed>, or values:x1,x2,...
    #[arg(long)]
    x0: Option<String>,
    /// minimum distance kept from non-initial cube faces
    #[arg(long = "face-floor")]
    face_floor: Option<f64>,
    /// commitment threshold for the sign-pattern trace
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// JSON run configuration; replaces all model/integrator flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// period p of the generators to enumerate
    #[arg(long)]
    p: usize,
    /// window length n (defaults per generator to dim W_η)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 3.4)]
    lambda: f64,
    #[arg(long, default_value_t = 0.6)]
    c0: f64,
    #[arg(long, default_value_t = 9)]
    q: u32,
    /// worker threads (library default when absent)
    #[arg(long)]
    workers: Option<usize>,
    /// output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    Lambda,
    Epsilon,
}

#[derive(Args)]
struct SweepArgs {
    /// base run configuration (JSON, same schema as --config elsewhere)
    #[arg(long)]
    config: PathBuf,
    /// which parameter the grid varies
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// number of grid points (≥ 2, endpoints included)
    #[arg(long, default_value_t = 11)]
    steps: usize,
    /// worker threads (library default when absent)
    #[arg(long)]
    workers: Option<usize>,
    /// output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GoldenArgs {
    /// run only cases whose name contains this substring
    #[arg(long)]
    filter: Option<String>,
    /// worker threads (library default when absent)
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Learn(args) => cmd_learn(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Golden(args) => cmd_golden(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let kind = match &e {
                Error::NotAdmissible(_) => "non_admissible",
                Error::IntegrationFailure { .. } => "integration_failure",
                _ => "config_error",
            };
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "kind": kind })
            );
            match e {
                Error::NotAdmissible(_) => ExitCode::from(3),
                Error::IntegrationFailure { .. } => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn init_workers(workers: Option<usize>) -> Result<()> {
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidArgument("--workers must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LearnReport {
    eta: String,
    n: usize,
    p: usize,
    admissible: bool,
    dim_w_eta: usize,
    form: CouplingForm,
    companion_row: Option<Vec<String>>,
    companion_non_unique: bool,
    /// exact rational entries of J, row by row
    j_rows: Vec<Vec<String>>,
    j_float: Vec<Vec<f64>>,
}

fn cmd_learn(args: LearnArgs) -> Result<ExitCode> {
    let eta = GeneratorVector::parse(&args.eta)?;
    let sigma = build_consecutive_sigma(&eta, args.n)?;
    let coupling = solve_learning(&sigma)?;
    let report = LearnReport {
        eta: eta.to_sign_string(),
        n: args.n,
        p: eta.period(),
        admissible: true,
        dim_w_eta: dim_w_eta(&eta),
        form: coupling.form,
        companion_row: coupling
            .companion_row
            .as_ref()
            .map(|r| r.iter().map(hopcycles::ratlinalg::format_rat).collect()),
        companion_non_unique: coupling.companion_non_unique,
        j_rows: coupling.j.to_string_rows(),
        j_float: coupling.to_f64_rows(),
    };
    emit(&args.out, &pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))
}

/// Build the effective run configuration: the config file, when present,
/// replaces the flags wholesale.
fn effective_config(args: &RunArgs) -> Result<GoldenConfig> {
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())));
    }
    let eta = args
        .eta
        .clone()
        .ok_or_else(|| Error::Config("--eta is required without --config".into()))?;
    let n = args
        .n
        .ok_or_else(|| Error::Config("--n is required without --config".into()))?;
    let (formulation, c0, q, epsilon, input_i) = match args.formulation {
        FormulationArg::Tanh => (Formulation::TanhCube, Some(args.c0), Some(args.q), None, None),
        FormulationArg::Logistic => {
            let input_i = args
                .input_i
                .ok_or_else(|| Error::Config("logistic formulation requires --input".into()))?;
            match args.eps {
                Some(eps) => (Formulation::LogisticCube, None, None, Some(eps), Some(input_i)),
                None => (Formulation::LogisticCube, None, Some(args.q), None, Some(input_i)),
            }
        }
    };
    let x0 = parse_x0(args.x0.as_deref(), &eta, n)?;
    Ok(GoldenConfig {
        formulation,
        eta: Some(eta),
        n: Some(n),
        j: None,
        lambda: args.lambda,
        c0,
        q,
        epsilon,
        input_i,
        x0,
        t_end: args.t_end,
        dt: args.dt,
        stride: args.stride,
        face_floor: args.face_floor,
        threshold: Some(args.threshold),
        horizons: None,
    })
}

/// `near-vertex:<pattern>`, `random:<seed>`, or `values:x1,x2,...`; the
/// default starts near the vertex given by the first n entries of η.
fn parse_x0(arg: Option<&str>, eta: &str, n: usize) -> Result<X0Policy> {
    let Some(s) = arg else {
        let signs: String = eta.chars().filter(|c| !c.is_whitespace()).take(n).collect();
        if signs.chars().count() < n {
            return Err(Error::Config(
                "default x0 needs η with at least n entries; pass --x0 explicitly".into(),
            ));
        }
        return Ok(X0Policy::NearVertex { pattern: signs, delta: 0.01 });
    };
    if let Some(pattern) = s.strip_prefix("near-vertex:") {
        return Ok(X0Policy::NearVertex { pattern: pattern.to_string(), delta: 0.01 });
    }
    if let Some(seed) = s.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::Config(format!("bad seed in --x0 {s}")))?;
        // the cube bounds are resolved later; sample in (0,1) and rescale then
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        return Ok(X0Policy::Values { values });
    }
    if let Some(list) = s.strip_prefix("values:") {
        let values: std::result::Result<Vec<f64>, _> =
            list.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let values = values.map_err(|_| Error::Config(format!("bad coordinate in --x0 {s}")))?;
        return Ok(X0Policy::Values { values });
    }
    Err(Error::Config(format!(
        "--x0 must be near-vertex:<pattern>, random:<seed>, or values:x1,...  (got {s})"
    )))
}

/// Unit-cube random samples rescaled to the formulation's cube.
fn rescale_x0(values: &[f64], spec: &SystemSpec) -> Vec<f64> {
    let (lo, hi) = spec.cube();
    values.iter().map(|&v| lo + v * (hi - lo)).collect()
}

struct PreparedRun {
    prediction: Option<PredictionReport>,
    spec: SystemSpec,
    x0: Vec<f64>,
    cfg: GoldenConfig,
}

fn prepare(cfg: GoldenConfig, raw_unit_x0: bool) -> Result<PreparedRun> {
    let params = build_params(&cfg)?;
    let (prediction, j_float) = if let (Some(eta_s), Some(n)) = (&cfg.eta, cfg.n) {
        let eta = GeneratorVector::parse(eta_s)?;
        let report = predict_cycle(&eta, n, &params)?;
        if !report.admissible {
            return Err(Error::NotAdmissible(format!(
                "dim W_η = {} exceeds the window n = {n} (rank Σ = {})",
                report.dim_w_eta, report.rank_sigma
            )));
        }
        let sigma = build_consecutive_sigma(&eta, n)?;
        let j = solve_learning(&sigma)?.to_f64_rows();
        (Some(report), j)
    } else if let Some(j) = &cfg.j {
        (None, j.clone())
    } else {
        return Err(Error::Config("config needs either (eta, n) or an explicit j".into()));
    };
    let spec = SystemSpec::new(cfg.formulation, j_float, params)?;
    let x0 = match (&cfg.x0, raw_unit_x0) {
        (X0Policy::Values { values }, true) => rescale_x0(values, &spec),
        (policy, _) => hopcycles::golden::resolve_x0(policy, &spec)?,
    };
    Ok(PreparedRun { prediction, spec, x0, cfg })
}

fn run_trajectory(run: &PreparedRun) -> Result<Trajectory> {
    integrate_with_floor(
        &run.spec,
        &run.x0,
        run.cfg.t_end,
        run.cfg.dt,
        run.cfg.stride,
        run.cfg.face_floor,
    )
}

fn cmd_classify(args: RunArgs) -> Result<ExitCode> {
    let cfg = effective_config(&args)?;
    let params = build_params(&cfg)?;
    let (Some(eta_s), Some(n)) = (&cfg.eta, cfg.n) else {
        return Err(Error::Config("classify needs a generator (η, n)".into()));
    };
    let eta = GeneratorVector::parse(eta_s)?;
    let report = predict_cycle(&eta, n, &params)?;
    let admissible = report.admissible;
    emit(&args.out, &pretty(&report)?)?;
    if admissible {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(Error::NotAdmissible(format!(
            "dim W_η = {} exceeds the window n = {n}",
            report.dim_w_eta
        )))
    }
}

fn cmd_simulate(args: RunArgs) -> Result<ExitCode> {
    let rescale = args.x0.as_deref().is_some_and(|s| s.starts_with("random:"));
    let run = prepare(effective_config(&args)?, rescale)?;
    let traj = run_trajectory(&run)?;
    let n = run.spec.n;
    let mut csv = String::from("t");
    for i in 1..=n {
        csv.push_str(&format!(",x{i}"));
    }
    csv.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        csv.push_str(&format!("{t:.6}"));
        for v in x {
            csv.push_str(&format!(",{v:.12}"));
        }
        csv.push('\n');
    }
    emit(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyReport {
    prediction: PredictionReport,
    trace: TraceResult,
    /// simulation follows the predicted consecutive cycle
    trace_matches_cycle: bool,
    /// prediction (cycle_type ≠ none) and observation agree
    agreement: bool,
}

fn cmd_verify(args: RunArgs) -> Result<ExitCode> {
    let rescale = args.x0.as_deref().is_some_and(|s| s.starts_with("random:"));
    let run = prepare(effective_config(&args)?, rescale)?;
    let Some(prediction) = run.prediction.clone() else {
        return Err(Error::Config("verify needs a generator (η, n)".into()));
    };
    let traj = run_trajectory(&run)?;
    let eta = GeneratorVector::parse(&prediction.eta)?;
    let sigma = predicted_sigma(&eta, prediction.n)?;
    let threshold = run.cfg.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let trace = analyze(&traj, Some(&sigma), threshold, DEFAULT_GAMMA)?;
    let trace_matches_cycle = trace.matched_cycle.is_some();
    let agreement = trace_matches_cycle == (prediction.cycle_type != CycleType::None);
    let report = VerifyReport { prediction, trace, trace_matches_cycle, agreement };
    emit(&args.out, &pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<ExitCode> {
    use rayon::prelude::*;
    init_workers(args.workers)?;
    let params = ModelParams::tanh(args.lambda, args.c0, args.q)?;
    let generators = canonical_generators(args.p);
    let rows: Vec<String> = generators
        .par_iter()
        .map(|eta| -> Result<String> {
            let n = args.n.unwrap_or_else(|| dim_w_eta(eta));
            let report = predict_cycle(eta, n, &params)?;
            let cycle = match report.cycle_type {
                CycleType::Edge => "edge",
                CycleType::NonEdge => "non_edge",
                CycleType::None => "none",
            };
            Ok(format!(
                "{},{},{},{},{},{}",
                eta.to_sign_string(),
                n,
                report.dim_w_eta,
                report.admissible,
                report.adjacent_switches,
                cycle
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("eta,n,dim_w_eta,admissible,adjacent_switches,cycle_type\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    emit(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    init_workers(args.workers)?;
    if args.steps < 2 {
        return Err(Error::InvalidArgument("--steps must be ≥ 2".into()));
    }
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let base: GoldenConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let grid: Vec<f64> = (0..args.steps)
        .map(|i| args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64)
        .collect();
    let mut cells: Vec<(f64, SystemSpec)> = Vec::with_capacity(grid.len());
    let mut x0_shared: Option<Vec<f64>> = None;
    for &value in &grid {
        let mut cfg = base.clone();
        match args.param {
            SweepParam::Lambda => cfg.lambda = value,
            SweepParam::Epsilon => {
                if cfg.epsilon.is_none() {
                    return Err(Error::Config(
                        "epsilon sweep needs a logit-ε base configuration".into(),
                    ));
                }
                cfg.epsilon = Some(value);
            }
        }
        let run = prepare(cfg, false)?;
        x0_shared.get_or_insert(run.x0);
        cells.push((value, run.spec));
    }
    let x0 = x0_shared.expect("grid is non-empty");
    let threshold = base.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let rows: Vec<SweepRow> = sweep(&cells, &x0, base.t_end, base.dt, base.stride, threshold, DEFAULT_GAMMA)?;
    let mut csv = String::from("value,regime,dwell_growth_ratio,period_estimate,error\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.value,
            serde_json::to_value(&r.regime)
                .map_err(|e| Error::Config(e.to_string()))?
                .as_str()
                .unwrap_or("unknown"),
            r.dwell_growth_ratio.map_or(String::new(), |v| format!("{v:.4}")),
            r.period_estimate.map_or(String::new(), |v| format!("{v:.4}")),
            r.error.clone().unwrap_or_default()
        ));
    }
    emit(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_golden(args: GoldenArgs) -> Result<ExitCode> {
    init_workers(args.workers)?;
    let mut cases = builtin_cases()?;
    if let Some(filter) = &args.filter {
        cases.retain(|c| c.name.contains(filter.as_str()));
        if cases.is_empty() {
            return Err(Error::InvalidArgument(format!("no case matches {filter}")));
        }
    }
    let outcomes = run_all(&cases);
    let mut all_pass = true;
    for outcome in &outcomes {
        match outcome {
            Ok(o) if o.passed => println!("PASS {}", o.name),
            Ok(o) => {
                all_pass = false;
                println!("FAIL {}", o.name);
                for f in &o.failures {
                    println!("     {f}");
                }
            }
            Err(e) => {
                all_pass = false;
                println!("FAIL (error) {e}");
            }
        }
    }
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}
