//! Phase finding for target polynomials, plus the closed-form fixed-point
//! amplitude amplification family and the named target families.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{QsvtError, Result};
use crate::poly_approx::{
    chebyshev_fit, eigenstate_filter_poly, erf_fit, gibbs_poly, inverse_poly, jacobi_anger, normalize_to,
    relu_poly, ChebyshevPoly, Parity, TrigPart, CERT_GRID,
};
use crate::qsp_core::{linspace, response, Convention, Layout, PhaseSequence};

/// Number of grid points used for the post-hoc residual.
pub const RESIDUAL_GRID: usize = 1001;

/// Peak amplitude used for the named target families.
pub const FAMILY_SUP: f64 = 0.9;

/// Knobs for [`solve_phases`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Required sup-norm error of `Re(response) - target` on the residual grid.
    pub residual_tol: f64,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iterations: 300, residual_tol: 1e-10, restarts: 4, rng_seed: 0 }
    }
}

/// Response `<0|U|0>` and its derivative with respect to every phase, for
/// `U = S(phi_0) W(a) S(phi_1) ... W(a) S(phi_d)` in the `Wx` convention.
fn entry_and_gradient(phases: &[f64], a: f64, grad: &mut [Complex64]) -> Complex64 {
    let d = phases.len() - 1;
    let s = (1.0 - a * a).max(0.0).sqrt();
    let w = [[Complex64::new(a, 0.0), Complex64::new(0.0, s)], [Complex64::new(0.0, s), Complex64::new(a, 0.0)]];
    let e: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();

    // Row vectors e0^T L_k and column vectors R_k e0.
    let mut left = vec![[Complex64::new(0.0, 0.0); 2]; d + 1];
    left[0] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    for k in 0..d {
        let v = [left[k][0] * e[k], left[k][1] * e[k].conj()];
        left[k + 1] = [v[0] * w[0][0] + v[1] * w[1][0], v[0] * w[0][1] + v[1] * w[1][1]];
    }
    let mut right = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let i = Complex64::new(0.0, 1.0);
    for k in (0..=d).rev() {
        let (l, m) = (left[k], e[k]);
        grad[k] = l[0] * i * m * right[0] - l[1] * i * m.conj() * right[1];
        if k > 0 {
            let v = [m * right[0], m.conj() * right[1]];
            right = [w[0][0] * v[0] + w[0][1] * v[1], w[1][0] * v[0] + w[1][1] * v[1]];
        }
    }
    left[d][0] * e[d]
}

fn collocation_points(d: usize) -> Vec<f64> {
    let n = d + 1;
    let mut xs: Vec<f64> = (0..n).map(|j| (PI * (2 * j + 1) as f64 / (2 * n) as f64).cos()).collect();
    xs.push(1.0);
    xs.push(-1.0);
    xs
}

/// Objective `sum_j (Re P(x_j) - f(x_j))^2` over the collocation points and
/// its gradient with respect to the full phase list.
pub fn objective_and_gradient(phases: &[f64], target: &ChebyshevPoly) -> (f64, Vec<f64>) {
    let d = phases.len() - 1;
    let mut g = vec![Complex64::new(0.0, 0.0); d + 1];
    let mut grad = vec![0.0; d + 1];
    let mut obj = 0.0;
    for x in collocation_points(d) {
        let r = entry_and_gradient(phases, x, &mut g).re - target.eval(x);
        obj += r * r;
        for (gk, dk) in grad.iter_mut().zip(&g) {
            *gk += 2.0 * r * dk.re;
        }
    }
    (obj, grad)
}

fn expand_symmetric(red: &[f64], d: usize) -> Vec<f64> {
    (0..=d).map(|k| red[k.min(d - k)]).collect()
}

struct Problem {
    d: usize,
    xs: Vec<f64>,
    fx: Vec<f64>,
}

impl Problem {
    fn residuals(&self, red: &[f64], jac: Option<&mut DMatrix<f64>>) -> DVector<f64> {
        let phases = expand_symmetric(red, self.d);
        let mut g = vec![Complex64::new(0.0, 0.0); self.d + 1];
        let mut r = DVector::zeros(self.xs.len());
        let mut jac = jac;
        for (j, (&x, &f)) in self.xs.iter().zip(&self.fx).enumerate() {
            r[j] = entry_and_gradient(&phases, x, &mut g).re - f;
            if let Some(jm) = jac.as_deref_mut() {
                for c in 0..red.len() {
                    jm[(j, c)] = 0.0;
                }
                for (k, gk) in g.iter().enumerate() {
                    jm[(j, k.min(self.d - k))] += gk.re;
                }
            }
        }
        r
    }

    /// Levenberg-Marquardt from `start`.
    fn solve(&self, start: Vec<f64>, max_iterations: usize) -> Vec<f64> {
        let n = start.len();
        let mut red = start;
        let mut jac = DMatrix::zeros(self.xs.len(), n);
        let mut r = self.residuals(&red, Some(&mut jac));
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        for _ in 0..max_iterations {
            if r.amax() < 1e-15 {
                break;
            }
            let jt = jac.transpose();
            let jtj = &jt * &jac;
            let rhs = -(&jt * &r);
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = jtj.clone();
                for i in 0..n {
                    a[(i, i)] += lambda;
                }
                let step = match a.cholesky() {
                    Some(ch) => ch.solve(&rhs),
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                };
                let trial: Vec<f64> = red.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
                let rt = self.residuals(&trial, None);
                let ct = rt.norm_squared();
                if ct < cost {
                    red = trial;
                    lambda = (lambda / 10.0).max(1e-15);
                    accepted = true;
                    break;
                }
                lambda *= 10.0;
            }
            if !accepted {
                break;
            }
            let previous = cost;
            r = self.residuals(&red, Some(&mut jac));
            cost = r.norm_squared();
            if previous - cost <= 1e-32 {
                break;
            }
        }
        red
    }
}

/// Largest `|Re(response(a)) - target(a)|` over a 1001-point grid on `[-1, 1]`.
pub fn residual(seq: &PhaseSequence, target: &ChebyshevPoly) -> f64 {
    linspace(-1.0, 1.0, RESIDUAL_GRID)
        .into_iter()
        .map(|a| match response(seq, a) {
            Ok(v) => (v.re - target.eval(a)).abs(),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Finds `(Wx, Sz, ++)` phases whose response has real part equal to `target`.
///
/// Works on palindromic phase lists, so the unknowns are the first
/// `floor(d/2) + 1` phases. The first attempt starts from
/// `(pi/4, 0, ..., 0, pi/4)`, where the real part vanishes identically;
/// later attempts perturb that start with seeded noise of size `1e-2`.
pub fn solve_phases(target: &ChebyshevPoly, options: &SolverOptions) -> Result<PhaseSequence> {
    if target.parity() == Parity::None {
        return Err(QsvtError::Parity("target must be even or odd".into()));
    }
    if options.restarts == 0 || !(options.residual_tol > 0.0) {
        return Err(QsvtError::Domain("need restarts >= 1 and residual_tol > 0".into()));
    }
    let sup = target.sup_on_grid(CERT_GRID);
    if sup > 1.0 + 1e-9 {
        return Err(QsvtError::TargetNotBounded { sup });
    }
    if sup >= 1.0 - 1e-12 {
        // Exact solutions on the boundary exist (Chebyshev polynomials); try
        // them first, then fall back to a slightly shrunk target.
        if let Ok(seq) = solve_bounded(target, options) {
            return Ok(seq);
        }
        return solve_bounded(&target.scaled(1.0 - 1e-8), options);
    }
    solve_bounded(target, options)
}

fn solve_bounded(target: &ChebyshevPoly, options: &SolverOptions) -> Result<PhaseSequence> {
    let mut d = target.degree();
    if Parity::of_degree(d) != target.parity() {
        d += 1;
    }
    let xs = collocation_points(d);
    let fx = xs.iter().map(|&x| target.eval(x)).collect();
    let problem = Problem { d, xs, fx };
    let nr = d / 2 + 1;
    let mut base = vec![0.0; nr];
    base[0] = FRAC_PI_4;

    let mut rng = ChaCha8Rng::seed_from_u64(options.rng_seed);
    let mut best = f64::INFINITY;
    for attempt in 0..options.restarts {
        let mut start = base.clone();
        if attempt > 0 {
            for p in &mut start {
                *p += 1e-2 * rng.random_range(-1.0..1.0);
            }
        }
        let red = problem.solve(start, options.max_iterations);
        let seq = PhaseSequence::new(expand_symmetric(&red, d), Convention::wx_plus())?;
        let res = residual(&seq, target);
        if res <= options.residual_tol {
            return Ok(seq);
        }
        best = best.min(res);
    }
    Err(QsvtError::NoConvergence { best_residual: best })
}

/// Parameters of the fixed-point amplitude amplification sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointParams {
    pub d: usize,
    pub delta: f64,
    /// `2d + 1`.
    pub l: usize,
    /// `1 / cosh(acosh(1/delta) / L)`.
    pub gamma: f64,
}

impl FixedPointParams {
    pub fn new(d: usize, delta: f64) -> Result<Self> {
        if d == 0 || !(delta > 0.0 && delta < 1.0) {
            return Err(QsvtError::Domain("need d >= 1 and 0 < delta < 1".into()));
        }
        let l = 2 * d + 1;
        let gamma = 1.0 / ((1.0 / delta).acosh() / l as f64).cosh();
        Ok(FixedPointParams { d, delta, l, gamma })
    }

    /// Smallest amplitude above which `|P|^2 >= 1 - delta^2` is guaranteed.
    pub fn threshold(&self) -> f64 {
        (1.0 - self.gamma * self.gamma).sqrt()
    }
}

/// The `2d` phases of the fixed-point search sequence.
///
/// They are interleaved amplitude-amplification phases: evaluated as the
/// reflection sequence `(0, phi_1, ..., phi_2d, 0)` in `<0|.|0>`, which gives
/// `|P(a)|^2 = 1 - delta^2 T_L(sqrt(1-a^2)/gamma)^2`.
pub fn fixed_point_phases(params: &FixedPointParams) -> PhaseSequence {
    let d = params.d;
    let l = params.l as f64;
    let root = (1.0 - params.gamma * params.gamma).sqrt();
    let alpha: Vec<f64> = (0..d)
        .map(|k| -(FRAC_PI_2 - (root * (2.0 * PI * (k + 1) as f64 / l).tan()).atan()))
        .collect();
    let mut phases = vec![0.0; 2 * d];
    for k in 0..d {
        phases[2 * k] = alpha[d - k - 1];
        phases[2 * k + 1] = alpha[k];
    }
    let mut seq = PhaseSequence::new(phases, Convention::reflection()).expect("finite phases");
    seq.layout = Layout::AmplitudeAmplification;
    seq
}

/// Named target families with their default parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    FpSearch { d: usize, delta: f64 },
    PolySign { d: usize, k: f64 },
    Invert { kappa: f64, epsilon: f64 },
    HamSim { t: f64, epsilon: f64, part: TrigPart },
    PolyThresh { d: usize, k: f64 },
    PolyPhase { d: usize, k: f64 },
    EFilter { d: usize, delta_lambda: f64 },
    Gibbs { d: usize, beta: f64 },
    Relu { d: usize, delta: f64, k: f64 },
}

/// Every family name accepted by [`Family::parse`].
pub const FAMILY_NAMES: [&str; 11] = [
    "fpsearch",
    "poly_sign",
    "invert",
    "hamsim",
    "hamsim_cos",
    "hamsim_sin",
    "poly_thresh",
    "poly_phase",
    "efilter",
    "gibbs",
    "relu",
];

impl Family {
    /// Parses a family name and `key=value` arguments; missing keys take defaults.
    pub fn parse(name: &str, args: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str, default: f64| args.get(k).copied().unwrap_or(default);
        let deg = |default: usize| -> Result<usize> {
            let v = get("d", default as f64);
            if v < 0.0 || v.fract() != 0.0 {
                return Err(QsvtError::Domain(format!("degree {v} must be a non-negative integer")));
            }
            Ok(v as usize)
        };
        let allowed: &[&str] = match name {
            "fpsearch" => &["d", "delta"],
            "poly_sign" | "poly_thresh" | "poly_phase" => &["d", "k"],
            "invert" => &["kappa", "epsilon"],
            "hamsim" => &["t", "epsilon", "sin"],
            "hamsim_cos" | "hamsim_sin" => &["t", "epsilon"],
            "efilter" => &["d", "delta"],
            "gibbs" => &["d", "beta"],
            "relu" => &["d", "delta", "k"],
            _ => return Err(QsvtError::Domain(format!("unknown family '{name}'"))),
        };
        if let Some(bad) = args.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(QsvtError::Domain(format!("family '{name}' has no argument '{bad}'")));
        }
        Ok(match name {
            "fpsearch" => Family::FpSearch { d: deg(10)?, delta: get("delta", 0.5) },
            "poly_sign" => Family::PolySign { d: deg(19)?, k: get("k", 10.0) },
            "invert" => Family::Invert { kappa: get("kappa", 3.0), epsilon: get("epsilon", 0.3) },
            "hamsim" | "hamsim_cos" | "hamsim_sin" => {
                let sin = name == "hamsim_sin" || get("sin", 0.0) != 0.0;
                Family::HamSim {
                    t: get("t", 5.0),
                    epsilon: get("epsilon", 0.1),
                    part: if sin { TrigPart::Sin } else { TrigPart::Cos },
                }
            }
            "poly_thresh" => Family::PolyThresh { d: deg(18)?, k: get("k", 10.0) },
            "poly_phase" => Family::PolyPhase { d: deg(18)?, k: get("k", 10.0) },
            "efilter" => Family::EFilter { d: deg(30)?, delta_lambda: get("delta", 0.3) },
            "gibbs" => Family::Gibbs { d: deg(20)?, beta: get("beta", 3.5) },
            _ => Family::Relu { d: deg(20)?, delta: get("delta", 0.6), k: get("k", 15.0) },
        })
    }

    /// Target polynomial, scaled down to a peak of [`FAMILY_SUP`] when larger.
    pub fn target(&self) -> Result<ChebyshevPoly> {
        let p = match *self {
            Family::FpSearch { .. } => {
                return Err(QsvtError::Domain("fpsearch is a closed-form phase family".into()))
            }
            Family::PolySign { d, k } => {
                if d % 2 == 0 {
                    return Err(QsvtError::Parity("poly_sign needs odd d".into()));
                }
                erf_fit(d, k)
            }
            Family::Invert { kappa, epsilon } => inverse_poly(epsilon, kappa)?,
            Family::HamSim { t, epsilon, part } => jacobi_anger(t, epsilon, part)?,
            Family::PolyThresh { d, k } => even_target(d, move |x| 0.5 * (erf(k * (x + 0.5)) - erf(k * (x - 0.5))))?,
            Family::PolyPhase { d, k } => even_target(d, move |x| {
                -1.0 + erf(k * (FRAC_1_SQRT_2 + x)) + erf(k * (FRAC_1_SQRT_2 - x))
            })?,
            Family::EFilter { d, delta_lambda } => {
                if d % 2 != 0 {
                    return Err(QsvtError::Parity("efilter needs even d".into()));
                }
                eigenstate_filter_poly(d / 2, delta_lambda)?
            }
            Family::Gibbs { d, beta } => gibbs_poly(beta, d)?.poly,
            Family::Relu { d, delta, k } => relu_poly(delta, k, d)?.poly,
        };
        Ok(normalize_to(&p, FAMILY_SUP))
    }

    /// Phases for the family: closed form for `fpsearch`, solved otherwise.
    pub fn phases(&self, options: &SolverOptions) -> Result<PhaseSequence> {
        match *self {
            Family::FpSearch { d, delta } => Ok(fixed_point_phases(&FixedPointParams::new(d, delta)?)),
            _ => solve_phases(&self.target()?, options),
        }
    }
}

fn even_target<F: Fn(f64) -> f64>(d: usize, f: F) -> Result<ChebyshevPoly> {
    if d % 2 != 0 {
        return Err(QsvtError::Parity(format!("degree {d} must be even")));
    }
    Ok(chebyshev_fit(f, d, Parity::Even))
}
