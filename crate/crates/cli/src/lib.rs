//! Command-line front end: phase synthesis, response curves and algorithm runners.

pub mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use qsvt::algorithms::{
    eigenvalue_threshold, order_finding_demo, qsvt_search, PhaseEstimator, ThresholdParams,
};
use qsvt::block_encoding::{embed_general, matrix_from_json, matrix_to_json, spectral_norm, MatrixJson};
use qsvt::phase_solver::{residual, solve_phases, Family, SolverOptions};
use qsvt::poly_approx::{
    eigenvalue_threshold_poly, inverse_poly, jacobi_anger_cos, jacobi_anger_sin, matrix_inversion_poly,
    phase_estimation_poly, rect_poly, sign_poly, ApproxSpec, ChebyshevPoly, DEFAULT_DEGREE_CAP,
};
use qsvt::qsp_core::{linspace, response_curve, PhaseSequence, SignalKind};
use qsvt::qsvt_engine::{transformed_block, QsvtProgram};
use qsvt::{ComplexMatrix, ComplexVector, Mode, QsvtError};
use serde_json::json;

pub use svg::{emit_svg, Channel, SvgStyle};

/// Environment variable that redirects relative output paths.
pub const OUTPUT_DIR_ENV: &str = "QSVT_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] QsvtError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot plot an empty curve")]
    EmptyCurve,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qsvt", version, about = "QSP phase synthesis and QSVT algorithm simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize phases for a named family or a polynomial file.
    Phases(PhasesArgs),
    /// Sample the response of a phase sequence as CSV and/or SVG.
    Response(ResponseArgs),
    /// Build a target polynomial and write its JSON and a CSV sampling.
    Poly(PolyArgs),
    /// Apply a phase sequence to a matrix by QSVT.
    Qsvt(QsvtArgs),
    /// Unstructured search over 2^q items.
    Search(SearchArgs),
    /// Decide whether a Hamiltonian has an eigenvalue below a threshold.
    Threshold(ThresholdArgs),
    /// Estimate an eigenphase bit by bit.
    Qpe(QpeArgs),
    /// Find the multiplicative order of x modulo N.
    Factor(FactorArgs),
    /// Block-encode e^{-iHt}.
    Hamsim(HamsimArgs),
    /// Block-encode A^{-1} and optionally solve A x = b.
    Invert(InvertArgs),
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// Use exact probabilities instead of sampling.
    #[arg(long, conflicts_with = "seed")]
    pub exact: bool,
    /// Seed for sampled mode.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ModeArgs {
    fn mode(&self) -> CliResult<Mode> {
        match (self.exact, self.seed) {
            (true, _) => Ok(Mode::Exact),
            (false, Some(s)) => Ok(Mode::Sampled(s)),
            (false, None) => Err(CliError::Usage("sampled mode needs --seed (or pass --exact)".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct PhasesArgs {
    /// Family name, e.g. fpsearch, poly_sign, invert, hamsim_cos.
    #[arg(long, required_unless_present = "poly", conflicts_with = "poly")]
    pub family: Option<String>,
    /// Family arguments as `key=value` pairs separated by commas.
    #[arg(long, default_value = "")]
    pub args: String,
    /// Polynomial JSON file to solve for instead of a family.
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Residual tolerance for the solver.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResponseArgs {
    /// Phase sequence JSON file.
    #[arg(long)]
    pub phases: PathBuf,
    #[arg(long, default_value_t = 400)]
    pub npts: usize,
    /// Grid start; defaults to -1 (0 for Wz sequences).
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    /// Grid end; defaults to 1 (2 pi for Wz sequences).
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Channels to plot, comma separated from re, im, abs2.
    #[arg(long, default_value = "re,im,abs2")]
    pub channels: String,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    /// sign, threshold, phase_estimation, jacobi_cos, jacobi_sin, inverse, rect,
    /// matrix_inversion, or any phase family except fpsearch.
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value = "")]
    pub args: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 400)]
    pub npts: usize,
}

#[derive(Debug, Args)]
pub struct QsvtArgs {
    /// Matrix JSON file.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Phase sequence JSON file.
    #[arg(long)]
    pub phases: PathBuf,
    /// Subnormalization; defaults to max(1, ||A||).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub qubits: u32,
    #[arg(long)]
    pub marked: u64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Transition width; defaults to 1/sqrt(N).
    #[arg(long)]
    pub gap: Option<f64>,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Initial state as a one-column matrix JSON; defaults to uniform.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_th: f64,
    #[arg(long)]
    pub delta_lambda: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub zeta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct QpeArgs {
    /// Phase of the 1x1 unitary e^{2 pi i phi}.
    #[arg(long, conflicts_with = "matrix")]
    pub phi: Option<f64>,
    /// Unitary matrix JSON file (with --state).
    #[arg(long, requires = "state")]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    /// Overall failure budget, used when --epsilon is absent.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub gap: f64,
    /// Full estimate with per-step trace as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long = "modulus", short = 'N')]
    pub modulus: u64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct HamsimArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Shift the spectrum to be positive first (doubles the evolution time).
    #[arg(long)]
    pub shift: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Right-hand side as a one-column matrix JSON.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Phases(a) => phases(a, out),
        Command::Response(a) => response(a, out),
        Command::Poly(a) => poly(a, out),
        Command::Qsvt(a) => qsvt_cmd(a, out),
        Command::Search(a) => {
            let rec = qsvt_search(a.qubits, a.marked, a.delta, a.gap, a.mode.mode()?)?;
            emit(out, None, &rec.to_json())
        }
        Command::Threshold(a) => threshold(a, out),
        Command::Qpe(a) => qpe(a, out),
        Command::Factor(a) => {
            let rec = order_finding_demo(a.x, a.modulus, a.delta, a.mode.mode()?)?;
            emit(out, None, &rec.to_json())
        }
        Command::Hamsim(a) => hamsim(a, out),
        Command::Invert(a) => invert(a, out),
    }
}

/// Resolves a relative output path against `QSVT_OUTPUT_DIR` when it is set.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<PathBuf> {
    let full = output_path(path);
    let io = |source| CliError::Io { path: full.clone(), source };
    if let Some(parent) = full.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(&full, contents).map_err(io)?;
    Ok(full)
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Writes `text` to `file` when given, otherwise to stdout.
fn emit(out: &mut dyn Write, file: Option<&Path>, text: &str) -> CliResult<()> {
    let stdout_err = |source| CliError::Io { path: PathBuf::from("<stdout>"), source };
    match file {
        Some(p) => {
            let full = write_file(p, text)?;
            writeln!(out, "wrote {}", full.display()).map_err(stdout_err)
        }
        None => writeln!(out, "{}", text.trim_end()).map_err(stdout_err),
    }
}

/// Parses `k=v,k=v` into a map.
pub fn parse_kv(s: &str) -> CliResult<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got '{part}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("'{v}' is not a number")))?;
        map.insert(k.trim().to_string(), v);
    }
    Ok(map)
}

fn phases(a: &PhasesArgs, out: &mut dyn Write) -> CliResult<()> {
    let opts = SolverOptions { residual_tol: a.tol, ..SolverOptions::default() };
    let seq = match (&a.family, &a.poly) {
        (Some(name), _) => Family::parse(name, &parse_kv(&a.args)?)?.phases(&opts)?,
        (None, Some(path)) => {
            let p = ChebyshevPoly::from_json(&read_file(path)?)?;
            let seq = solve_phases(&p, &opts)?;
            debug_assert!(residual(&seq, &p) <= a.tol);
            seq
        }
        (None, None) => return Err(CliError::Usage("pass --family or --poly".into())),
    };
    emit(out, a.out.as_deref(), &seq.to_json())
}

/// CSV with header `a,re,im,abs2` and 17 significant digits.
pub fn response_csv(curve: &[(f64, Complex64)]) -> String {
    let mut s = String::from("a,re,im,abs2\n");
    for (a, z) in curve {
        s.push_str(&format!("{a:.16e},{:.16e},{:.16e},{:.16e}\n", z.re, z.im, z.norm_sqr()));
    }
    s
}

fn response(a: &ResponseArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.npts < 2 {
        return Err(CliError::Usage("--npts must be at least 2".into()));
    }
    let seq = PhaseSequence::from_json(&read_file(&a.phases)?)?;
    let (lo0, hi0) = if seq.convention.signal == SignalKind::Wz { (0.0, 2.0 * std::f64::consts::PI) } else { (-1.0, 1.0) };
    let curve = response_curve(&seq, &linspace(a.lo.unwrap_or(lo0), a.hi.unwrap_or(hi0), a.npts))?;
    if a.csv.is_none() && a.svg.is_none() {
        return emit(out, None, &response_csv(&curve));
    }
    if let Some(p) = &a.csv {
        emit(out, Some(p), &response_csv(&curve))?;
    }
    if let Some(p) = &a.svg {
        let channels = a
            .channels
            .split(',')
            .map(|c| Channel::parse(c).ok_or_else(|| CliError::Usage(format!("unknown channel '{c}'"))))
            .collect::<CliResult<Vec<_>>>()?;
        let style = SvgStyle { channels, title: Some(format!("{} phases, {}", seq.phases.len(), seq.convention)), ..SvgStyle::default() };
        emit(out, Some(p), &emit_svg(&curve, &style)?)?;
    }
    Ok(())
}

fn build_poly(name: &str, args: &BTreeMap<String, f64>) -> CliResult<ChebyshevPoly> {
    let allowed: &[&str] = match name {
        "sign" | "phase_estimation" => &["epsilon", "delta"],
        "threshold" => &["epsilon", "delta", "c"],
        "jacobi_cos" | "jacobi_sin" => &["t", "epsilon"],
        "inverse" | "rect" | "matrix_inversion" => &["epsilon", "kappa"],
        _ => return Ok(Family::parse(name, args)?.target()?),
    };
    if let Some(bad) = args.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("polynomial '{name}' has no argument '{bad}'")));
    }
    let get = |k: &str, d: f64| args.get(k).copied().unwrap_or(d);
    let spec = ApproxSpec::new(get("epsilon", 0.1), get("delta", 0.2));
    let cap = DEFAULT_DEGREE_CAP;
    Ok(match name {
        "sign" => sign_poly(&spec, cap)?,
        "phase_estimation" => phase_estimation_poly(&spec, cap)?,
        "threshold" => eigenvalue_threshold_poly(&spec.with_shift(get("c", 0.5)), cap)?,
        "jacobi_cos" => jacobi_anger_cos(get("t", 5.0), get("epsilon", 0.1))?,
        "jacobi_sin" => jacobi_anger_sin(get("t", 5.0), get("epsilon", 0.1))?,
        "inverse" => inverse_poly(get("epsilon", 0.1), get("kappa", 2.0))?,
        "rect" => rect_poly(get("epsilon", 0.1), get("kappa", 2.0), cap)?,
        _ => matrix_inversion_poly(get("epsilon", 0.1), get("kappa", 2.0), cap)?,
    })
}

fn poly(a: &PolyArgs, out: &mut dyn Write) -> CliResult<()> {
    let p = build_poly(&a.family, &parse_kv(&a.args)?)?;
    emit(out, a.out.as_deref(), &p.to_json())?;
    if let Some(path) = &a.csv {
        if a.npts < 2 {
            return Err(CliError::Usage("--npts must be at least 2".into()));
        }
        let mut s = String::from("x,p\n");
        for x in linspace(-1.0, 1.0, a.npts) {
            s.push_str(&format!("{x:.16e},{:.16e}\n", p.eval(x)));
        }
        emit(out, Some(path), &s)?;
    }
    Ok(())
}

fn load_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    Ok(matrix_from_json(&read_file(path)?)?)
}

fn load_vector(path: &Path) -> CliResult<ComplexVector> {
    let m = load_matrix(path)?;
    if m.ncols() != 1 {
        return Err(CliError::Usage(format!("{}: a state must be a single column", path.display())));
    }
    Ok(m.column(0).into_owned())
}

fn matrix_value(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixJson::from(m)).expect("matrices always serialize")
}

fn qsvt_cmd(a: &QsvtArgs, out: &mut dyn Write) -> CliResult<()> {
    let m = load_matrix(&a.matrix)?;
    let seq = PhaseSequence::from_json(&read_file(&a.phases)?)?;
    let alpha = a.alpha.unwrap_or_else(|| spectral_norm(&m).max(1.0));
    let prog = QsvtProgram::new(embed_general(&m, alpha)?, &seq)?;
    emit(out, a.out.as_deref(), &matrix_to_json(&transformed_block(&prog)?))
}

fn threshold(a: &ThresholdArgs, out: &mut dyn Write) -> CliResult<()> {
    let h = load_matrix(&a.matrix)?;
    let psi = match &a.state {
        Some(p) => load_vector(p)?,
        None => {
            let n = h.nrows();
            ComplexVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0))
        }
    };
    let params = ThresholdParams {
        alpha: a.alpha,
        lambda_th: a.lambda_th,
        delta_lambda: a.delta_lambda,
        zeta: a.zeta,
        delta: a.delta,
        epsilon: a.epsilon,
    };
    let rec = eigenvalue_threshold(&h, params, &psi, a.mode.mode()?)?;
    emit(out, None, &rec.to_json())
}

fn qpe(a: &QpeArgs, out: &mut dyn Write) -> CliResult<()> {
    let (u, state) = match (a.phi, &a.matrix, &a.state) {
        (Some(phi), None, _) => (
            ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phi)),
            ComplexVector::from_element(1, Complex64::new(1.0, 0.0)),
        ),
        (None, Some(m), Some(s)) => (load_matrix(m)?, load_vector(s)?),
        _ => return Err(CliError::Usage("pass --phi, or --matrix with --state".into())),
    };
    let mode = a.mode.mode()?;
    let eps = a.epsilon.unwrap_or_else(|| PhaseEstimator::epsilon_for(a.delta, a.n).min(0.4));
    let est = PhaseEstimator::new(eps, a.gap, &SolverOptions::default())?.run(&u, &state, a.n, mode, &[])?;
    let bits: String = est.theta_bits.iter().map(|b| char::from(b'0' + b)).collect();
    let io = |source| CliError::Io { path: PathBuf::from("<stdout>"), source };
    writeln!(out, "theta={}", est.value).map_err(io)?;
    writeln!(out, "bits={}.{}", &bits[..1], &bits[1..]).map_err(io)?;
    writeln!(out, "queries={}", est.queries).map_err(io)?;
    if let Some(p) = &a.out {
        let text = serde_json::to_string_pretty(&est).expect("estimates always serialize");
        emit(out, Some(p), &text)?;
    }
    Ok(())
}

fn hamsim(a: &HamsimArgs, out: &mut dyn Write) -> CliResult<()> {
    let h = load_matrix(&a.matrix)?;
    let sim = qsvt::algorithms::hamiltonian_simulation(&h, a.alpha, a.t, a.epsilon, a.shift)?;
    let body = json!({
        "t": a.t,
        "epsilon": a.epsilon,
        "alpha": a.alpha,
        "shifted": sim.shifted,
        "k_prime": sim.k_prime,
        "queries": sim.queries,
        "operator": matrix_value(&sim.encoding.encoded_operator()),
    });
    emit(out, a.out.as_deref(), &serde_json::to_string_pretty(&body).expect("json values serialize"))
}

fn invert(a: &InvertArgs, out: &mut dyn Write) -> CliResult<()> {
    let m = load_matrix(&a.matrix)?;
    let inv = qsvt::algorithms::matrix_inversion(&m, a.kappa, a.epsilon)?;
    let mut body = json!({
        "kappa": a.kappa,
        "epsilon": a.epsilon,
        "degree": inv.degree,
        "inverse": matrix_value(&inv.encoding.encoded_operator()),
    });
    if let Some(p) = &a.rhs {
        let x = inv.solve(&load_vector(p)?)?;
        body["solution"] = matrix_value(&ComplexMatrix::from_column_slice(x.len(), 1, x.as_slice()));
    }
    emit(out, a.out.as_deref(), &serde_json::to_string_pretty(&body).expect("json values serialize"))
}
