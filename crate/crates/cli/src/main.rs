//! `sis` classifies, solves, simulates and sweeps simplicial SIS models.
//!
//! Exit codes: 2 for validation/flag/file errors, 3 when an equilibrium is
//! requested outside the bistable/endemic domains, 4 when a trajectory
//! escapes the unit box, 1 for other runtime failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use simplicial_sis::analysis::{
    beta2_bistable_threshold, classify_theory, classify_theory_higher, scalar_classify, Domain,
    DomainClassification,
};
use simplicial_sis::equilibrium::{endemic_iterate, DomainHint};
use simplicial_sis::generate::binary_model;
use simplicial_sis::model::{ScalarSis, SimplicialSis, StateVector};
use simplicial_sis::modelfile::{load_model, save_model, LoadedModel};
use simplicial_sis::sim::{integrate, IntegratorConfig};
use simplicial_sis::sweep::{sweep, GridSpec, SweepMode};
use simplicial_sis::SisError;

#[derive(Parser)]
#[command(name = "sis", version, about = "Simplicial SIS epidemics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a model into its epidemic domain from the theory conditions.
    Classify(ClassifyArgs),
    /// Compute the endemic equilibrium by monotone fixed-point iteration.
    Equilibrium(EquilibriumArgs),
    /// Integrate a trajectory and export it as CSV.
    Simulate(SimulateArgs),
    /// Classify a (beta1, beta2) grid and export the epidemic diagram.
    Sweep(SweepArgs),
    /// Closed-form analysis of the scalar model.
    Scalar(ScalarArgs),
    /// Generate a seeded random binary model file.
    Gen(GenArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model file (JSON).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Override the pairwise infection rate from the file.
    #[arg(long)]
    beta1: Option<f64>,
    /// Override the higher-order infection rate from the file.
    #[arg(long)]
    beta2: Option<f64>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Recovery rate; with --beta1/--beta2 and no --model, classify the
    /// scalar model instead.
    #[arg(long)]
    gamma: Option<f64>,
    /// Emit the classification as JSON instead of key:value lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EquilibriumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sup-norm step tolerance of the fixed-point iteration.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Write the iteration trace (iter,x1..xn,step) to this CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial state: zeros | ones | half | comma-separated values.
    #[arg(long, default_value = "half")]
    x0: String,
    /// Fixed integration step.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Integration horizon.
    #[arg(long, default_value_t = 500.0)]
    t_end: f64,
    /// Record every k-th step.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Attach a monitor column (`lyapunov`).
    #[arg(long)]
    monitor: Option<String>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Grid as `b1lo:b1hi:n1,b2lo:b2hi:n2`; a default grid is derived from
    /// the model when omitted.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Theory)]
    mode: ModeArg,
    /// Worker threads for cell evaluation (the output is identical for any
    /// worker count).
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Integration step for empirical classification.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Integration horizon for empirical classification.
    #[arg(long, default_value_t = 500.0)]
    t_end: f64,
    /// Diagram CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG heatmap output path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Theory,
    Empirical,
    Both,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Theory => SweepMode::Theory,
            ModeArg::Empirical => SweepMode::Empirical,
            ModeArg::Both => SweepMode::Both,
        }
    }
}

#[derive(Args)]
struct ScalarArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    beta1: f64,
    #[arg(long)]
    beta2: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Number of groups (at least 2).
    #[arg(long)]
    n: usize,
    /// Bernoulli density of the binary matrices.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// RNG seed; identical seeds give identical files.
    #[arg(long)]
    seed: u64,
    /// Uniform recovery rate (Gamma = gamma * I).
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    beta1: f64,
    #[arg(long, default_value_t = 1.0)]
    beta2: f64,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<SisError> for CliError {
    fn from(e: SisError) -> Self {
        let code = match &e {
            SisError::NegativeEntry { .. }
            | SisError::NonFiniteEntry { .. }
            | SisError::NotIrreducible { .. }
            | SisError::NonpositiveWeight { .. }
            | SisError::NonpositiveRate { .. }
            | SisError::NotMetzler { .. }
            | SisError::OutOfDomain { .. }
            | SisError::InvalidStructure(_)
            | SisError::BadModelFile(_) => 2,
            SisError::DomainEscape { .. } => 4,
            _ => 1,
        };
        CliError::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SIS_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Equilibrium(args) => cmd_equilibrium(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Scalar(args) => cmd_scalar(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

/// Compact deterministic float formatting for the reports: 12 significant
/// decimals, trailing zeros trimmed, scientific notation outside a sane
/// magnitude window.
fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if (1e-4..1e16).contains(&a) {
        let mut s = format!("{v:.12}");
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
        s
    } else {
        format!("{v:e}")
    }
}

fn load(path: &Path) -> Result<LoadedModel<f64>, CliError> {
    Ok(load_model::<f64>(path)?)
}

fn load_with_overrides(args: &ModelArgs) -> Result<LoadedModel<f64>, CliError> {
    let path = args
        .model
        .as_ref()
        .ok_or_else(|| CliError::new(2, "--model is required"))?;
    let loaded = load(path)?;
    match loaded {
        LoadedModel::Simplicial(m) => {
            let beta1 = args.beta1.unwrap_or_else(|| m.beta1());
            let beta2 = args.beta2.unwrap_or_else(|| m.beta2());
            Ok(LoadedModel::Simplicial(m.with_rates(beta1, beta2)?))
        }
        LoadedModel::HigherOrder(h) => {
            if args.beta1.is_some() || args.beta2.is_some() {
                return Err(CliError::new(
                    2,
                    "rate overrides are only supported for simplicial model files",
                ));
            }
            Ok(LoadedModel::HigherOrder(h))
        }
    }
}

fn require_simplicial(
    loaded: LoadedModel<f64>,
    what: &str,
) -> Result<SimplicialSis<f64>, CliError> {
    match loaded {
        LoadedModel::Simplicial(m) => Ok(m),
        LoadedModel::HigherOrder(_) => Err(CliError::new(
            2,
            format!("{what} requires a simplicial model file"),
        )),
    }
}

fn print_classification(c: &DomainClassification<f64>, beta2_hat: Option<Option<f64>>) {
    println!("domain: {}", c.domain);
    println!("reproduction_number: {}", fmt_sig(c.reproduction_number));
    println!("rho_df: {}", fmt_sig(c.disease_free_lhs));
    match c.bistable_margin {
        Some(m) => println!("bistable_margin: {}", fmt_sig(m)),
        None => println!("bistable_margin: n/a"),
    }
    if let Some(hat) = beta2_hat {
        match hat {
            Some(v) => println!("beta2_hat: {}", fmt_sig(v)),
            None => println!("beta2_hat: n/a"),
        }
    }
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), CliError> {
    if args.model.model.is_none() {
        // Scalar mode from flags.
        let (Some(gamma), Some(beta1), Some(beta2)) =
            (args.gamma, args.model.beta1, args.model.beta2)
        else {
            return Err(CliError::new(
                2,
                "classify needs --model, or --gamma/--beta1/--beta2 for the scalar model",
            ));
        };
        return scalar_report(gamma, beta1, beta2, args.json);
    }
    match load_with_overrides(&args.model)? {
        LoadedModel::Simplicial(m) => {
            let c = classify_theory(&m)?;
            let hat = if c.reproduction_number < 1.0 {
                beta2_bistable_threshold(m.template(), m.beta1())
                    .ok()
                    .flatten()
            } else {
                None
            };
            if args.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "model": "simplicial",
                        "n": m.n(),
                        "classification": c,
                        "beta2_hat": hat,
                    })
                );
            } else {
                println!("model: simplicial");
                println!("n: {}", m.n());
                print_classification(&c, Some(hat));
            }
        }
        LoadedModel::HigherOrder(h) => {
            let c = classify_theory_higher(&h)?;
            if args.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "model": "higher-order",
                        "n": h.n(),
                        "classification": c,
                    })
                );
            } else {
                println!("model: higher-order");
                println!("n: {}", h.n());
                print_classification(&c, None);
            }
        }
    }
    Ok(())
}

fn scalar_report(gamma: f64, beta1: f64, beta2: f64, json: bool) -> Result<(), CliError> {
    let d = scalar_classify(&ScalarSis::new(gamma, beta1, beta2)?);
    if json {
        println!(
            "{}",
            serde_json::json!({ "model": "scalar", "diagnostics": d })
        );
        return Ok(());
    }
    println!("model: scalar");
    println!("domain: {}", d.domain);
    println!("v_c: {}", fmt_sig(d.v_c));
    match d.nu_minus {
        Some(v) => println!("nu_minus: {}", fmt_sig(v)),
        None => println!("nu_minus: n/a"),
    }
    match d.nu_plus {
        Some(v) => println!("nu_plus: {}", fmt_sig(v)),
        None => println!("nu_plus: n/a"),
    }
    Ok(())
}

fn cmd_scalar(args: ScalarArgs) -> Result<(), CliError> {
    scalar_report(args.gamma, args.beta1, args.beta2, args.json)
}

fn cmd_equilibrium(args: EquilibriumArgs) -> Result<(), CliError> {
    let m = require_simplicial(load_with_overrides(&args.model)?, "equilibrium")?;
    let c = classify_theory(&m)?;
    let hint = match c.domain {
        Domain::Bistable => DomainHint::Bistable,
        Domain::Endemic => DomainHint::Endemic,
        other => {
            return Err(CliError::new(
                3,
                format!("no endemic iteration in the {other} domain"),
            ))
        }
    };
    let (res, trace) = endemic_iterate(&m, hint, args.tol, args.max_iter)?;
    println!("domain: {}", c.domain);
    println!("converged: {}", res.converged);
    println!("iterations: {}", res.iterations);
    println!("residual: {}", fmt_sig(res.residual));
    println!("stability: {}", res.stability.as_str());
    println!(
        "xstar: {}",
        res.xstar
            .as_slice()
            .iter()
            .map(|&v| fmt_sig(v))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if let Some(path) = args.trace {
        let mut out = String::from("iter");
        for i in 1..=m.n() {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",step\n");
        for (k, it) in trace.iterates.iter().enumerate() {
            out.push_str(&k.to_string());
            for v in it {
                out.push_str(&format!(",{:.16e}", v));
            }
            if k == 0 {
                out.push(',');
            } else {
                out.push_str(&format!(",{:.16e}", trace.steps[k - 1]));
            }
            out.push('\n');
        }
        std::fs::write(&path, out).map_err(|e| CliError::new(1, e.to_string()))?;
    }
    Ok(())
}

fn parse_x0(spec: &str, n: usize) -> Result<StateVector<f64>, CliError> {
    let v = match spec {
        "zeros" => vec![0.0; n],
        "ones" => vec![1.0; n],
        "half" => vec![0.5; n],
        list => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::new(2, format!("bad --x0 entry {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    if v.len() != n {
        return Err(CliError::new(
            2,
            format!("--x0 has {} entries, model has {n}", v.len()),
        ));
    }
    Ok(StateVector::new(v)?)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cfg = IntegratorConfig {
        dt: args.dt,
        t_end: args.t_end,
        record_stride: args.stride,
        ..IntegratorConfig::default()
    };
    let loaded = load_with_overrides(&args.model)?;
    let mut traj = match &loaded {
        LoadedModel::Simplicial(m) => integrate(m, &parse_x0(&args.x0, m.n())?, &cfg)?,
        LoadedModel::HigherOrder(h) => integrate(h, &parse_x0(&args.x0, h.n())?, &cfg)?,
    };
    match args.monitor.as_deref() {
        None => {}
        Some("lyapunov") => match &loaded {
            LoadedModel::Simplicial(m) => traj.attach_lyapunov(m)?,
            LoadedModel::HigherOrder(_) => {
                return Err(CliError::new(
                    2,
                    "--monitor lyapunov requires a simplicial model",
                ))
            }
        },
        Some(other) => {
            return Err(CliError::new(2, format!("unknown monitor {other:?}")));
        }
    }
    match args.out {
        Some(path) => traj.export_csv(&path)?,
        None => {
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)
                .map_err(|e| CliError::new(1, e.to_string()))?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<GridSpec<f64>, CliError> {
    let parse_axis = |axis: &str| -> Result<(f64, f64, usize), CliError> {
        let parts: Vec<&str> = axis.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::new(
                2,
                format!("bad grid axis {axis:?}, expected lo:hi:count"),
            ));
        }
        let lo = parts[0]
            .parse::<f64>()
            .map_err(|_| CliError::new(2, format!("bad grid bound {:?}", parts[0])))?;
        let hi = parts[1]
            .parse::<f64>()
            .map_err(|_| CliError::new(2, format!("bad grid bound {:?}", parts[1])))?;
        let count = parts[2]
            .parse::<usize>()
            .map_err(|_| CliError::new(2, format!("bad grid count {:?}", parts[2])))?;
        Ok((lo, hi, count))
    };
    let (b1, b2) = spec
        .split_once(',')
        .ok_or_else(|| CliError::new(2, "grid must be b1lo:b1hi:n1,b2lo:b2hi:n2"))?;
    let (b1lo, b1hi, n1) = parse_axis(b1)?;
    let (b2lo, b2hi, n2) = parse_axis(b2)?;
    Ok(GridSpec {
        beta1_range: (b1lo, b1hi),
        beta2_range: (b2lo, b2hi),
        resolution: (n1, n2),
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let m = require_simplicial(load_with_overrides(&args.model)?, "sweep")?;
    let tpl = m.template();
    let grid = match &args.grid {
        Some(spec) => parse_grid(spec)?,
        None => {
            // Default epidemic-diagram window: beta1 up to twice the endemic
            // threshold, beta2 up to twice the bistable threshold at beta1=0.
            let rho = tpl
                .gamma_inv_a()
                .spectral_radius(simplicial_sis::scalar::default_tol::<f64>())?;
            let b1hi = 2.0 / rho;
            let b2hi = beta2_bistable_threshold(tpl, 0.0)
                .ok()
                .flatten()
                .map_or(1.0, |hat| (2.0 * hat).max(1e-3));
            GridSpec {
                beta1_range: (0.0, b1hi),
                beta2_range: (0.0, b2hi),
                resolution: (60, 60),
            }
        }
    };
    let cfg = IntegratorConfig {
        dt: args.dt,
        t_end: args.t_end,
        ..IntegratorConfig::default()
    };
    let diagram = sweep(tpl, &grid, &cfg, args.mode.into(), args.workers.max(1))?;
    diagram.export_csv(&args.out)?;
    if let Some(svg) = &args.svg {
        diagram.export_svg(svg)?;
    }
    println!("cells: {}", diagram.cells.len());
    println!("csv: {}", args.out.display());
    if let Some(svg) = &args.svg {
        println!("svg: {}", svg.display());
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    if args.n < 2 {
        return Err(CliError::new(2, "gen needs --n of at least 2"));
    }
    if !(0.0..=1.0).contains(&args.density) {
        return Err(CliError::new(2, "--density must lie in [0, 1]"));
    }
    let m = binary_model::<f64>(
        args.n,
        args.density,
        args.seed,
        args.gamma,
        args.beta1,
        args.beta2,
    )?;
    save_model(&m, &args.out)?;
    println!("model: {}", args.out.display());
    Ok(())
}
