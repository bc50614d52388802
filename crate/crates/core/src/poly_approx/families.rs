use std::f64::consts::{E, FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use super::special::{bessel_j, solve_truncation};
use super::{chebyshev_fit, chebyshev_interpolate, ChebyshevPoly, FitResult, Parity, CERT_GRID};
use crate::error::{QsvtError, Result};
use crate::qsp_core::linspace;

/// Default largest degree tried while certifying a family.
pub const DEFAULT_DEGREE_CAP: usize = 512;

/// Relative headroom left below 1 when a construction has to be rescaled.
/// Keeps targets away from the numerically singular boundary of the phase solver.
pub const SUP_MARGIN: f64 = 1e-4;

/// Parameters shared by the approximation families. Unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxSpec {
    pub epsilon: f64,
    pub delta_gap: f64,
    pub shift_c: f64,
    pub kappa: f64,
    pub time_t: f64,
    pub beta: f64,
    /// Overrides the erf steepness when positive.
    pub steepness_k: f64,
}

impl ApproxSpec {
    pub fn new(epsilon: f64, delta_gap: f64) -> Self {
        ApproxSpec {
            epsilon,
            delta_gap,
            shift_c: 0.0,
            kappa: 1.0,
            time_t: 0.0,
            beta: 0.0,
            steepness_k: 0.0,
        }
    }

    pub fn with_shift(mut self, c: f64) -> Self {
        self.shift_c = c;
        self
    }

    fn steepness(&self, eps: f64) -> f64 {
        if self.steepness_k > 0.0 {
            self.steepness_k
        } else {
            erf_steepness(eps, self.delta_gap)
        }
    }
}

/// `k = (sqrt 2 / Delta) sqrt(ln(2 / (pi eps^2)))`.
pub fn erf_steepness(epsilon: f64, delta_gap: f64) -> f64 {
    std::f64::consts::SQRT_2 / delta_gap * (2.0 / (PI * epsilon * epsilon)).ln().sqrt()
}

/// Largest epsilon for which the erf construction applies.
pub fn max_sign_epsilon() -> f64 {
    (2.0 / (E * PI)).sqrt()
}

fn cert_grid() -> Vec<f64> {
    linspace(-1.0, 1.0, CERT_GRID)
}

fn cap_sup(p: ChebyshevPoly, grid: &[f64]) -> ChebyshevPoly {
    let sup = grid.iter().map(|&x| p.eval(x).abs()).fold(0.0, f64::max);
    if sup > 1.0 - SUP_MARGIN {
        p.scaled((1.0 - SUP_MARGIN) / sup)
    } else {
        p
    }
}

fn valid_degree(n: i64, parity: Parity) -> bool {
    n >= 0
        && match parity {
            Parity::Even => n % 2 == 0,
            Parity::Odd => n % 2 == 1,
            Parity::None => true,
        }
}

/// Smallest degree in `[1, cap]` for which `build` certifies, found by
/// doubling followed by bisection.
fn search_degree<F>(what: &str, parity: Parity, cap: usize, mut build: F) -> Result<ChebyshevPoly>
where
    F: FnMut(usize) -> Option<ChebyshevPoly>,
{
    let step = if parity == Parity::None { 1 } else { 2 };
    let fit = |n: i64| if valid_degree(n, parity) { n } else { n - 1 };
    let cap = fit(cap as i64);
    let exceeded = || QsvtError::DegreeCapExceeded { what: what.to_string(), cap: cap.max(0) as usize };
    if cap < 0 {
        return Err(exceeded());
    }
    let mut lo = fit(1) - step;
    let mut n = fit(7).min(cap);
    let (mut hi, mut best) = loop {
        if let Some(p) = build(n as usize) {
            break (n, p);
        }
        if n == cap {
            return Err(exceeded());
        }
        lo = n;
        n = fit(2 * n + 1).min(cap);
    };
    while hi - lo > step {
        let mut mid = fit((lo + hi) / 2);
        if mid <= lo {
            mid += step;
        }
        if mid >= hi {
            break;
        }
        match build(mid as usize) {
            Some(p) => {
                hi = mid;
                best = p;
            }
            None => lo = mid,
        }
    }
    Ok(best)
}

/// Fine Chebyshev expansion of `erf(k (x - c))`.
fn erf_expansion(k: f64, c: f64, cap: usize) -> Vec<f64> {
    let m = (16.0 * k).ceil().max(2.0 * cap as f64).clamp(2048.0, 16384.0) as usize;
    chebyshev_interpolate(|x| erf(k * (x - c)), m)
}

fn check_sign_spec(spec: &ApproxSpec, eps: f64) -> Result<()> {
    if !(eps > 0.0) || eps > max_sign_epsilon() + 1e-12 {
        return Err(QsvtError::Domain(format!(
            "epsilon {eps} outside (0, sqrt(2/(e pi))]"
        )));
    }
    if !(spec.delta_gap > 0.0) {
        return Err(QsvtError::Domain("delta_gap must be positive".into()));
    }
    Ok(())
}

/// Certified approximation of `sign(x - c)`.
///
/// For `c = 0` the result is odd. Otherwise it has no parity and is only
/// required to be bounded by one on `[-1, 1]`.
pub fn sign_poly(spec: &ApproxSpec, degree_cap: usize) -> Result<ChebyshevPoly> {
    let eps = spec.epsilon;
    check_sign_spec(spec, eps)?;
    let c = spec.shift_c;
    let parity = if c == 0.0 { Parity::Odd } else { Parity::None };
    let fine = erf_expansion(spec.steepness(eps), c, degree_cap);
    let grid = cert_grid();
    let half = spec.delta_gap / 2.0;
    search_degree("sign", parity, degree_cap, |n| {
        let p = cap_sup(ChebyshevPoly::projected(fine[..=n].to_vec(), parity), &grid);
        let ok = grid.iter().all(|&x| {
            let v = p.eval(x);
            v.abs() <= 1.0 && ((x - c).abs() < half || (v - (x - c).signum()).abs() <= eps)
        });
        ok.then_some(p)
    })
}

/// Symmetrized step: close to `+1` for `|x| < c` and `-1` for `|x| > c`.
fn symmetric_step_poly(spec: &ApproxSpec, c: f64, degree_cap: usize) -> Result<ChebyshevPoly> {
    let eps = spec.epsilon;
    check_sign_spec(spec, eps / 2.0)?;
    let half = spec.delta_gap / 2.0;
    if !(c - half > 0.0 && c + half < 1.0) {
        return Err(QsvtError::Domain(format!(
            "step window [{}, {}] must lie inside (0, 1)",
            c - half,
            c + half
        )));
    }
    let fine = erf_expansion(spec.steepness(eps / 2.0), c, degree_cap);
    let grid = cert_grid();
    search_degree("threshold", Parity::None, degree_cap, |n| {
        let q = cap_sup(ChebyshevPoly::projected(fine[..=n].to_vec(), Parity::None), &grid);
        // (-1 + eps/4 + P(c - x) + P(c + x)) / (1 + eps/4) with P(c - x) = -q(x).
        let sum = q.add(&q.reflected()).scaled(-1.0).shifted(-1.0 + eps / 4.0);
        let p = ChebyshevPoly::projected(sum.scaled(1.0 / (1.0 + eps / 4.0)).coeffs().to_vec(), Parity::Even);
        let p = cap_sup(p, &grid);
        let ok = grid.iter().all(|&x| {
            let v = p.eval(x);
            let ax = x.abs();
            v.abs() <= 1.0 && ((ax - c).abs() < half || (v - (c - ax).signum()).abs() <= eps)
        });
        ok.then_some(p)
    })
}

/// Even polynomial close to `+1` below `lambda_th / alpha` and `-1` above it.
pub fn eigenvalue_threshold_poly(spec: &ApproxSpec, degree_cap: usize) -> Result<ChebyshevPoly> {
    let c = spec.shift_c;
    if !(c > 0.0 && c < 1.0) {
        return Err(QsvtError::Domain(format!("threshold {c} outside (0, 1)")));
    }
    symmetric_step_poly(spec, c, degree_cap)
}

/// Even polynomial switching from `+1` to `-1` at `1/sqrt(2)`.
pub fn phase_estimation_poly(spec: &ApproxSpec, degree_cap: usize) -> Result<ChebyshevPoly> {
    if spec.epsilon > max_sign_epsilon() + 1e-12 {
        return Err(QsvtError::Domain(format!("epsilon {} above sqrt(2/(e pi))", spec.epsilon)));
    }
    symmetric_step_poly(spec, FRAC_1_SQRT_2, degree_cap)
}

/// Which half of the Jacobi-Anger expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigPart {
    Cos,
    Sin,
}

/// Truncated Jacobi-Anger expansion of `cos(t x)` or `sin(t x)`, rescaled by `1/(1+eps)`.
pub fn jacobi_anger(t: f64, epsilon: f64, part: TrigPart) -> Result<ChebyshevPoly> {
    if !t.is_finite() {
        return Err(QsvtError::Domain("time must be finite".into()));
    }
    let k_prime = if t == 0.0 {
        if !(epsilon > 0.0 && epsilon < 1.0 / E) {
            return Err(QsvtError::Domain(format!("epsilon {epsilon} outside (0, 1/e)")));
        }
        0
    } else {
        solve_truncation(t.abs(), epsilon)?.k_prime
    };
    let ta = t.abs();
    let scale = 1.0 / (1.0 + epsilon);
    let sign_k = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let p = match part {
        TrigPart::Cos => {
            let mut c = vec![0.0; 2 * k_prime + 1];
            c[0] = bessel_j(0, ta);
            for k in 1..=k_prime {
                c[2 * k] = 2.0 * sign_k(k) * bessel_j(2 * k as i64, ta);
            }
            ChebyshevPoly::projected(c, Parity::Even)
        }
        TrigPart::Sin => {
            let mut c = vec![0.0; 2 * k_prime + 2];
            for k in 0..=k_prime {
                c[2 * k + 1] = 2.0 * sign_k(k) * bessel_j(2 * k as i64 + 1, ta);
            }
            let p = ChebyshevPoly::projected(c, Parity::Odd);
            if t < 0.0 {
                p.scaled(-1.0)
            } else {
                p
            }
        }
    };
    Ok(p.scaled(scale))
}

pub fn jacobi_anger_cos(t: f64, epsilon: f64) -> Result<ChebyshevPoly> {
    jacobi_anger(t, epsilon, TrigPart::Cos)
}

pub fn jacobi_anger_sin(t: f64, epsilon: f64) -> Result<ChebyshevPoly> {
    jacobi_anger(t, epsilon, TrigPart::Sin)
}

/// `b(eps, kappa) = ceil(kappa^2 ln(kappa/eps))`.
pub fn inverse_b(epsilon: f64, kappa: f64) -> usize {
    (kappa * kappa * (kappa / epsilon).ln()).ceil() as usize
}

/// `D(eps, kappa) = ceil(sqrt(b ln(4b/eps)))`.
pub fn inverse_d(epsilon: f64, kappa: f64) -> usize {
    let b = inverse_b(epsilon, kappa) as f64;
    (b * (4.0 * b / epsilon).ln()).sqrt().ceil() as usize
}

/// Odd polynomial with `|P(x) - 1/x| <= 2 eps` for `|x| >= 1/kappa`.
pub fn inverse_poly(epsilon: f64, kappa: f64) -> Result<ChebyshevPoly> {
    if !(epsilon > 0.0 && epsilon < 0.5) || !(kappa >= 1.0) {
        return Err(QsvtError::Domain(format!("need 0 < eps < 1/2 and kappa >= 1 (eps={epsilon}, kappa={kappa})")));
    }
    let b = inverse_b(epsilon, kappa);
    let d = inverse_d(epsilon, kappa);
    // Binomial weights 2^{-2b} C(2b, b+i) in log space, then suffix sums from the small end.
    let ln2b = ln_gamma(2.0 * b as f64 + 1.0);
    let w: Vec<f64> = (0..=b)
        .map(|i| {
            let lc = ln2b - ln_gamma((b + i) as f64 + 1.0) - ln_gamma((b - i) as f64 + 1.0);
            (lc - 2.0 * b as f64 * std::f64::consts::LN_2).exp()
        })
        .collect();
    let mut tail = vec![0.0; b + 2];
    for i in (1..=b).rev() {
        tail[i] = tail[i + 1] + w[i];
    }
    let mut coeffs = vec![0.0; 2 * d + 2];
    for j in 0..=d {
        let s = if j < b { tail[j + 1] } else { 0.0 };
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[2 * j + 1] = 4.0 * sign * s;
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(QsvtError::OverflowGuard("binomial tail".into()));
    }
    let p = ChebyshevPoly::projected(coeffs, Parity::Odd);
    let ok = cert_grid().into_iter().all(|x| {
        let v = p.eval(x);
        v.abs() <= 4.0 * d as f64 && (x.abs() < 1.0 / kappa || (v - 1.0 / x).abs() <= 2.0 * epsilon)
    });
    if !ok {
        return Err(QsvtError::CertificationFailed(format!("inverse polynomial eps={epsilon} kappa={kappa}")));
    }
    Ok(p)
}

fn rect_from_step(q: &ChebyshevPoly, epsilon: f64) -> ChebyshevPoly {
    let half_sum = q.add(&q.reflected()).scaled(0.5).shifted(1.0);
    ChebyshevPoly::projected(half_sum.scaled(1.0 / (1.0 + epsilon / 2.0)).coeffs().to_vec(), Parity::Even)
}

fn rect_ok(p: &ChebyshevPoly, epsilon: f64, kappa: f64, grid: &[f64]) -> bool {
    grid.iter().all(|&x| {
        let v = p.eval(x);
        let ax = x.abs();
        v.abs() <= 1.0
            && (ax < 1.0 / kappa || (1.0 - epsilon..=1.0).contains(&v))
            && (ax > 0.5 / kappa || (0.0..=epsilon).contains(&v))
    })
}

fn rect_step_expansion(epsilon: f64, kappa: f64, degree_cap: usize) -> Result<Vec<f64>> {
    let spec = ApproxSpec::new(epsilon, 0.25 / kappa);
    check_sign_spec(&spec, epsilon)?;
    Ok(erf_expansion(spec.steepness(epsilon), 0.75 / kappa, degree_cap))
}

/// Even rectangle: `[0, eps]` on `|x| <= 1/(2 kappa)`, `[1 - eps, 1]` on `|x| >= 1/kappa`.
pub fn rect_poly(epsilon: f64, kappa: f64, degree_cap: usize) -> Result<ChebyshevPoly> {
    if !(epsilon > 0.0 && epsilon < 0.5) || !(kappa >= 1.0) {
        return Err(QsvtError::Domain("need 0 < eps < 1/2 and kappa >= 1".into()));
    }
    let fine = rect_step_expansion(epsilon, kappa, degree_cap)?;
    let grid = cert_grid();
    search_degree("rect", Parity::None, degree_cap, |n| {
        let q = cap_sup(ChebyshevPoly::projected(fine[..=n].to_vec(), Parity::None), &grid);
        let p = rect_from_step(&q, epsilon);
        rect_ok(&p, epsilon, kappa, &grid).then_some(p)
    })
}

/// `eps' = min(2 eps / (5 kappa), kappa / (2 D(eps/4, 2 kappa)))`.
pub fn matrix_inversion_rect_epsilon(epsilon: f64, kappa: f64) -> f64 {
    (2.0 * epsilon / (5.0 * kappa)).min(kappa / (2.0 * inverse_d(epsilon / 4.0, 2.0 * kappa) as f64))
}

/// Odd polynomial approximating `1/(2 kappa x)` to within `eps/(2 kappa)` on `|x| in [1/kappa, 1]`.
pub fn matrix_inversion_poly(epsilon: f64, kappa: f64, degree_cap: usize) -> Result<ChebyshevPoly> {
    if !(epsilon > 0.0 && epsilon / kappa < 0.5) || !(kappa >= 1.0) {
        return Err(QsvtError::Domain("need 0 < eps/kappa < 1/2 and kappa >= 1".into()));
    }
    let inv = inverse_poly(epsilon / 4.0, 2.0 * kappa)?.scaled(0.5 / kappa);
    let eps_r = matrix_inversion_rect_epsilon(epsilon, kappa);
    let fine = rect_step_expansion(eps_r, kappa, degree_cap)?;
    let grid = cert_grid();
    search_degree("matrix inversion", Parity::None, degree_cap, |n| {
        let q = cap_sup(ChebyshevPoly::projected(fine[..=n].to_vec(), Parity::None), &grid);
        let rect = rect_from_step(&q, eps_r);
        if !rect_ok(&rect, eps_r, kappa, &grid) {
            return None;
        }
        let p = inv.mul(&rect);
        let ok = grid.iter().all(|&x| {
            let v = p.eval(x);
            v.abs() <= 1.0
                && (x.abs() < 1.0 / kappa || (v - 0.5 / (kappa * x)).abs() <= epsilon / (2.0 * kappa))
        });
        ok.then_some(p)
    })
}

fn chebyshev_t_value(k: usize, y: f64) -> f64 {
    if y.abs() <= 1.0 {
        (k as f64 * y.acos()).cos()
    } else {
        let v = (k as f64 * y.abs().acosh()).cosh();
        if y < 0.0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Eigenstate filter `T_k(-1 + 2 (x^2 - dl^2)/(1 - dl^2)) / T_k(-1 - 2 dl^2/(1 - dl^2))`.
pub fn eigenstate_filter_poly(k: usize, delta_lambda: f64) -> Result<ChebyshevPoly> {
    if k == 0 || !(delta_lambda > 0.0 && delta_lambda < 1.0) {
        return Err(QsvtError::Domain("need k >= 1 and 0 < delta_lambda < 1".into()));
    }
    let d2 = delta_lambda * delta_lambda;
    let den = chebyshev_t_value(k, -1.0 - 2.0 * d2 / (1.0 - d2));
    let f = |x: f64| chebyshev_t_value(k, -1.0 + 2.0 * (x * x - d2) / (1.0 - d2)) / den;
    Ok(ChebyshevPoly::projected(chebyshev_interpolate(f, 2 * k), Parity::Even))
}

fn even_fit<F: Fn(f64) -> f64>(f: F, degree: usize) -> Result<FitResult> {
    if degree % 2 != 0 {
        return Err(QsvtError::Parity(format!("degree {degree} must be even")));
    }
    let p = chebyshev_fit(&f, degree, Parity::Even);
    let sup = p.sup_on_grid(CERT_GRID);
    let p = if sup > 1.0 { p.scaled(1.0 / sup) } else { p };
    let residual = super::grid_residual(&p, &f);
    Ok(FitResult { poly: p, residual })
}

/// Even fit of `e^{-beta |x|}`.
pub fn gibbs_poly(beta: f64, degree: usize) -> Result<FitResult> {
    if !(beta > 0.0) {
        return Err(QsvtError::Domain("beta must be positive".into()));
    }
    even_fit(|x| (-beta * x.abs()).exp(), degree)
}

/// Even fit of the softplus `ln(1 + e^{k(|x| - delta)}) / k`.
pub fn relu_poly(delta: f64, steepness: f64, degree: usize) -> Result<FitResult> {
    if !(steepness > 0.0) {
        return Err(QsvtError::Domain("steepness must be positive".into()));
    }
    even_fit(
        |x| {
            let z = steepness * (x.abs() - delta);
            // Stable softplus.
            (z.max(0.0) + (-z.abs()).exp().ln_1p()) / steepness
        },
        degree,
    )
}

/// Fixed-degree odd fit of `erf(k x)`.
pub fn erf_fit(degree: usize, k: f64) -> ChebyshevPoly {
    chebyshev_fit(|x| erf(k * x), degree, Parity::Odd)
}
