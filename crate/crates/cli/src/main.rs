//! `hawkes`: simulate Hawkes event streams, fit kernels by centered least
//! squares, and compute population limits by spectral quadrature.
//!
//! Exit codes: 0 success, 2 invalid arguments or input, 3 degenerate Gram
//! matrix, 4 I/O failure.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hawkes_core::asymptotics::{
    closed_loop_check, closed_loop_lyapunov_residual, conditioning_study_with_options, pseudo_true_with_options,
};
use hawkes_core::estimate::estimate_from_stream;
use hawkes_core::quadrature::QuadratureOptions;
use hawkes_core::{
    BasisFamily, EventStream64, HawkesError, HawkesModel64, KernelBasis64, KernelSpectrum, SpectralModel64,
    StateSpaceModel64,
};
use log::{info, warn};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "hawkes",
    version,
    about = "Hawkes kernel identification in an orthonormal Laguerre basis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an event stream from an exponential or basis-expanded kernel.
    Simulate(SimulateArgs),
    /// Fit kernel weights and background rate to an event stream.
    Estimate(EstimateArgs),
    /// Population Gram matrix, pseudo-true parameters, or a conditioning sweep.
    Asymptotics(AsymptoticsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum KernelKind {
    Exp,
    Laguerre,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BasisArg {
    Laguerre,
    Erlang,
}

impl From<BasisArg> for BasisFamily {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Laguerre => BasisFamily::Laguerre,
            BasisArg::Erlang => BasisFamily::Erlang,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    kernel: KernelKind,
    /// Background rate.
    #[arg(long)]
    c0: f64,
    /// Branching ratio of the exponential kernel.
    #[arg(long, required_if_eq("kernel", "exp"))]
    gamma: Option<f64>,
    /// Decay rate of the exponential kernel or of the Laguerre basis.
    #[arg(long)]
    beta: f64,
    /// Comma-separated Laguerre weights.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_if_eq("kernel", "laguerre")
    )]
    alpha: Option<Vec<f64>>,
    /// Laguerre order; defaults to the number of weights.
    #[arg(long = "P")]
    order: Option<usize>,
    /// Observation horizon.
    #[arg(long = "T")]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream file; a `<out>.json` parameter sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Event stream file.
    stream: PathBuf,
    #[arg(long, value_enum, default_value_t = BasisArg::Laguerre)]
    basis: BasisArg,
    #[arg(long = "P")]
    order: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AsymptoticsArgs {
    /// Branching ratio of the exponential truth.
    #[arg(long, conflicts_with = "mixture", required_unless_present = "mixture")]
    gamma: Option<f64>,
    /// Basis decay rate.
    #[arg(long)]
    beta: f64,
    /// Decay rate of the exponential truth; defaults to `--beta`.
    #[arg(long, conflicts_with = "mixture")]
    kernel_beta: Option<f64>,
    /// Out-of-class truth `Σ a/(s+b)`, given as `a:b,a:b,...`.
    #[arg(long, value_delimiter = ',')]
    mixture: Option<Vec<String>>,
    /// Stationary event rate.
    #[arg(long)]
    lambda: f64,
    /// Model order `N`, or an inclusive range `a:b` with `--study`.
    #[arg(long = "P")]
    order: String,
    /// Sweep the orders and compare Laguerre and Erlang conditioning.
    #[arg(long)]
    study: bool,
    #[arg(long, value_enum, default_value_t = BasisArg::Laguerre)]
    basis: BasisArg,
    /// Absolute quadrature tolerance per entry.
    #[arg(long, default_value_t = 1e-9)]
    quad_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(HawkesError),
    Io(PathBuf, io::Error),
}

impl From<HawkesError> for CliError {
    fn from(e: HawkesError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(HawkesError::DegenerateGram { .. }) => 3,
            CliError::Core(HawkesError::Io(_)) | CliError::Io(..) => 4,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HAWKES_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Asymptotics(a) => cmd_asymptotics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Runs `write` against `--out` if given, standard output otherwise.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::Io(path.to_path_buf(), e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::Io("<stdout>".into(), e))
        }
    }
}

fn emit_json(out: Option<&Path>, value: &Value) -> CliResult {
    emit(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let (model, params) = match a.kernel {
        KernelKind::Exp => {
            if a.alpha.is_some() || a.order.is_some() {
                return Err(CliError::Usage(
                    "--alpha and --P apply only to --kernel laguerre".into(),
                ));
            }
            let gamma = a.gamma.expect("required by clap");
            let model = HawkesModel64::exponential(a.c0, gamma, a.beta)?;
            (
                model,
                json!({ "kernel": "exp", "c0": a.c0, "gamma": gamma, "beta": a.beta }),
            )
        }
        KernelKind::Laguerre => {
            if a.gamma.is_some() {
                return Err(CliError::Usage("--gamma applies only to --kernel exp".into()));
            }
            let alpha = a.alpha.expect("required by clap");
            let order = a.order.unwrap_or(alpha.len());
            if order != alpha.len() {
                return Err(CliError::Usage(format!(
                    "--P {order} does not match {} weights in --alpha",
                    alpha.len()
                )));
            }
            let basis = KernelBasis64::laguerre(a.beta, order)?;
            let model = HawkesModel64::with_basis(a.c0, alpha.clone().into(), basis)?;
            (
                model,
                json!({ "kernel": "laguerre", "c0": a.c0, "alpha": alpha, "beta": a.beta, "P": order }),
            )
        }
    };
    info!("simulating {params} on [0, {}] with seed {}", a.horizon, a.seed);
    let stream = model.simulate(a.horizon, a.seed)?;
    info!("{} events", stream.len());
    emit(a.out.as_deref(), |w| {
        stream.write_to(&mut *w).map_err(|e| match e {
            HawkesError::Io(e) => e,
            other => io::Error::other(other.to_string()),
        })
    })?;
    if let Some(out) = &a.out {
        let mut meta = params;
        meta["T"] = json!(a.horizon);
        meta["seed"] = json!(a.seed);
        meta["n_events"] = json!(stream.len());
        meta["branching_ratio"] = json!(model.branching_ratio());
        meta["stationary_rate"] = json!(model.stationary_rate());
        emit_json(Some(&sidecar_path(out)), &meta)?;
    }
    Ok(())
}

fn read_stream(path: &Path) -> CliResult<EventStream64> {
    let file = File::open(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    EventStream64::read_from(BufReader::new(file)).map_err(|e| match e {
        HawkesError::Io(e) => CliError::Io(path.to_path_buf(), e),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

fn cmd_estimate(a: EstimateArgs) -> CliResult {
    let basis = KernelBasis64::new(a.basis.into(), a.beta, a.order)?;
    let stream = read_stream(&a.stream)?;
    let est = estimate_from_stream(&stream, &basis)?;
    let warnings: Vec<String> = est.warnings().iter().map(ToString::to_string).collect();
    for w in &warnings {
        warn!("{w}");
    }
    let value = json!({
        "basis": { "family": basis.family(), "beta": basis.beta(), "P": basis.order() },
        "alpha_hat": est.alpha_hat.to_vec(),
        "c_hat": est.c_hat,
        "gamma_hat": est.gamma_hat,
        "lambda_hat": est.lambda_hat,
        "n_events": est.diagnostics.n_events,
        "horizon": est.diagnostics.horizon,
        "cond_R": est.diagnostics.condition_number,
        "warnings": warnings,
    });
    emit_json(a.out.as_deref(), &value)
}

fn parse_orders(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("--P expects N or a:b with 1 <= a <= b, got `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match s.split_once(':') {
        Some((lo, hi)) => (num(lo)?, num(hi)?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn parse_mixture(terms: &[String]) -> CliResult<Vec<(f64, f64)>> {
    terms
        .iter()
        .map(|t| {
            let bad = || CliError::Usage(format!("--mixture terms must look like a:b, got `{t}`"));
            let (a, b) = t.split_once(':').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn spectral_model(a: &AsymptoticsArgs) -> CliResult<(SpectralModel64, Value)> {
    let (kernel, desc) = match (&a.mixture, a.gamma) {
        (Some(terms), _) => {
            let terms = parse_mixture(terms)?;
            let desc = json!({ "mixture": terms.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>() });
            (KernelSpectrum::ExponentialMixture(terms), desc)
        }
        (None, Some(gamma)) => {
            let beta = a.kernel_beta.unwrap_or(a.beta);
            if !(beta > 0.0) {
                return Err(CliError::Usage(format!("--kernel-beta must be > 0, got {beta}")));
            }
            (
                KernelSpectrum::Exponential { gamma, beta },
                json!({ "exponential": { "gamma": gamma, "beta": beta } }),
            )
        }
        (None, None) => unreachable!("clap requires --gamma or --mixture"),
    };
    Ok((SpectralModel64::new(kernel, a.lambda)?, desc))
}

fn quad_options(tol: f64) -> CliResult<QuadratureOptions<f64>> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--quad-tol must be > 0, got {tol}")));
    }
    Ok(QuadratureOptions {
        abs_tol: tol,
        ..QuadratureOptions::default()
    })
}

fn cmd_asymptotics(a: AsymptoticsArgs) -> CliResult {
    let orders = parse_orders(&a.order)?;
    let opts = quad_options(a.quad_tol)?;
    let (spec, truth) = spectral_model(&a)?;
    if a.study {
        return run_study(&a, &spec, truth, &orders, opts);
    }
    let [order] = orders[..] else {
        return Err(CliError::Usage("a range of orders requires --study".into()));
    };
    let basis = KernelBasis64::new(a.basis.into(), a.beta, order)?;
    let res = pseudo_true_with_options(&spec, &basis, opts)?;
    let model = StateSpaceModel64::new(basis);
    let cl = closed_loop_check(&res, &model)?;
    let residual = closed_loop_lyapunov_residual(&res, &model)?;
    if !cl.is_hurwitz {
        warn!("closed-loop matrix A + B α*ᵀ is not Hurwitz");
    }
    let value = json!({
        "truth": truth,
        "lambda": res.lambda,
        "gamma": spec.gamma(),
        "basis": { "family": basis.family(), "beta": basis.beta(), "P": order },
        "R_star": res.r_star.outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
        "R_star_cross": res.r_star_cross.to_vec(),
        "alpha_star": res.alpha_star.to_vec(),
        "c_star": res.c_star,
        "gamma_star": res.gamma_star,
        "eig_min": res.eig_min,
        "eig_max": res.eig_max,
        "cond": res.cond,
        "quadrature_error": res.quadrature_error,
        "closed_loop": {
            "eigenvalues": cl.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "is_hurwitz": cl.is_hurwitz,
            "lyapunov_residual": residual,
        },
    });
    emit_json(a.out.as_deref(), &value)
}

fn run_study(
    a: &AsymptoticsArgs,
    spec: &SpectralModel64,
    truth: Value,
    orders: &[usize],
    opts: QuadratureOptions<f64>,
) -> CliResult {
    if a.basis != BasisArg::Laguerre {
        warn!("--basis is ignored with --study; both bases are reported");
    }
    let rows = conditioning_study_with_options(spec, a.beta, orders, opts)?;
    let meta = json!({
        "truth": truth,
        "gamma": spec.gamma(),
        "beta": a.beta,
        "lambda": spec.lambda(),
        "quad_abs_tol": opts.abs_tol,
        "max_reportable_condition": hawkes_core::asymptotics::MAX_REPORTABLE_CONDITION,
    });
    let to_stdout = a.out.is_none();
    emit(a.out.as_deref(), |w| {
        if to_stdout {
            writeln!(w, "# {meta}")?;
        }
        writeln!(
            w,
            "P,cond_laguerre,cond_erlang,bound_laguerre,bound_erlang,sigma_min_sq_L,sigma_max_sq_L"
        )?;
        for r in &rows {
            let cond_erlang = r
                .cond_erlang
                .map_or_else(|| "indefinite-in-double".to_string(), |c| format!("{c:.16e}"));
            writeln!(
                w,
                "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.order,
                r.cond_laguerre,
                cond_erlang,
                r.bound_laguerre,
                r.bound_erlang,
                r.sigma_min_sq_l,
                r.sigma_max_sq_l
            )?;
        }
        Ok(())
    })?;
    if let Some(out) = &a.out {
        emit_json(Some(&sidecar_path(out)), &meta)?;
    }
    Ok(())
}
