use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_unit_state, hadamard_test_plus, Mode, RunRecord};
use crate::block_encoding::{phase_oracle_from_power, unitarity_defect, ComplexMatrix, ComplexVector};
use crate::error::{QsvtError, Result};
use crate::phase_solver::{solve_phases, SolverOptions};
use crate::poly_approx::{max_sign_epsilon, phase_estimation_poly, ApproxSpec, ChebyshevPoly, DEFAULT_DEGREE_CAP};
use crate::qsp_core::PhaseSequence;
use crate::qsvt_engine::QsvtProgram;

/// Largest admissible transition width: `2 (cos(3 pi / 16) - 1/sqrt(2))`.
pub fn max_phase_window() -> f64 {
    2.0 * ((3.0 * PI / 16.0).cos() - FRAC_1_SQRT_2)
}

/// Additive phase error tolerated for a given window:
/// `1/8 - 3 gamma / 2` with `gamma = 1/4 - acos(1/sqrt(2) + Delta/2) / pi`.
pub fn phase_error_budget(delta_gap: f64) -> f64 {
    let gamma = 0.25 - (FRAC_1_SQRT_2 + delta_gap / 2.0).acos() / PI;
    0.125 - 1.5 * gamma
}

/// One bit-extraction step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeIteration {
    /// Power index; `-1` marks the final ones-place step.
    pub j: i32,
    /// Value of `theta` used to build `A_j(theta)`.
    pub theta: f64,
    /// `||A_j(theta) psi||`, the singular value for an eigenvector input.
    pub sigma: f64,
    /// Probability of reading bit 1.
    pub p_one: f64,
    /// Bit an exact sign function would give (`1` iff `sigma < 1/sqrt(2)`).
    pub ideal_bit: u8,
    /// Probability of the other bit.
    pub p_fail: f64,
    pub bit: u8,
}

/// Result of phase estimation: `theta = theta_0 . theta_1 ... theta_n` in binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub theta_bits: Vec<u8>,
    pub n: usize,
    /// `sum_k theta_bits[k] 2^-k`, in `[0, 2)`.
    pub value: f64,
    pub trace: Vec<PeIteration>,
    pub queries: u64,
}

/// Phase estimation with a prepared sign polynomial, reusable across runs.
#[derive(Debug, Clone)]
pub struct PhaseEstimator {
    pub epsilon: f64,
    pub delta_gap: f64,
    pub poly: ChebyshevPoly,
    phases: PhaseSequence,
}

/// Principal square root of a unitary, with eigenphases taken in `[0, 2 pi)`.
pub fn unitary_sqrt(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(QsvtError::NotUnitary { defect });
    }
    let (q, t) = u.clone().schur().unpack();
    let n = u.nrows();
    let roots = ComplexVector::from_iterator(
        n,
        (0..n).map(|i| {
            let mut arg = t[(i, i)].arg();
            if arg < -1e-9 {
                arg += 2.0 * PI;
            }
            Complex64::from_polar(1.0, arg.max(0.0) / 2.0)
        }),
    );
    Ok(&q * ComplexMatrix::from_diagonal(&roots) * q.adjoint())
}

impl PhaseEstimator {
    pub fn new(epsilon: f64, delta_gap: f64, options: &SolverOptions) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= max_sign_epsilon()) {
            return Err(QsvtError::Domain(format!("epsilon {epsilon} outside (0, sqrt(2/(e pi))]")));
        }
        if !(delta_gap > 0.0 && delta_gap < max_phase_window()) {
            return Err(QsvtError::Domain(format!(
                "Delta {delta_gap} outside (0, {:.6})",
                max_phase_window()
            )));
        }
        let poly = phase_estimation_poly(&ApproxSpec::new(epsilon, delta_gap), DEFAULT_DEGREE_CAP)?;
        let phases = solve_phases(&poly, options)?;
        Ok(PhaseEstimator { epsilon, delta_gap, poly, phases })
    }

    /// Accuracy satisfying the union bound over `n + 1` steps: `sqrt(2 delta / (n + 1))`.
    pub fn epsilon_for(delta: f64, n: usize) -> f64 {
        (2.0 * delta / (n as f64 + 1.0)).sqrt()
    }

    pub fn degree(&self) -> usize {
        self.phases.degree()
    }

    /// Estimates the phase of `u` on `state` to `n` bits.
    ///
    /// `errors[k]` multiplies the oracle of the `k`-th step by `e^{2 pi i errors[k]}`
    /// (steps run `j = n-1, ..., 0` and then the ones-place step); missing
    /// entries mean no error.
    pub fn run(
        &self,
        u: &ComplexMatrix,
        state: &ComplexVector,
        n: usize,
        mode: Mode,
        errors: &[f64],
    ) -> Result<PhaseEstimate> {
        let mut rng = mode.rng();
        self.run_with(u, state, n, rng.as_mut(), errors)
    }

    pub(crate) fn run_with(
        &self,
        u: &ComplexMatrix,
        state: &ComplexVector,
        n: usize,
        mut rng: Option<&mut ChaCha8Rng>,
        errors: &[f64],
    ) -> Result<PhaseEstimate> {
        if n == 0 || n > 52 {
            return Err(QsvtError::Domain(format!("n = {n} outside 1..=52")));
        }
        let defect = unitarity_defect(u);
        if defect > 1e-10 {
            return Err(QsvtError::NotUnitary { defect });
        }
        if state.len() != u.nrows() {
            return Err(QsvtError::Dimension("state length must match the unitary".into()));
        }
        check_unit_state(state)?;

        // powers[j] = U^(2^j); the ones-place step uses the principal square root.
        let mut powers = vec![u.clone()];
        for j in 1..n {
            let p = &powers[j - 1] * &powers[j - 1];
            powers.push(p);
        }
        let steps: Vec<(i32, ComplexMatrix)> = (0..n as i32)
            .rev()
            .map(|j| (j, powers[j as usize].clone()))
            .chain(std::iter::once((-1, unitary_sqrt(u)?)))
            .collect();

        let mut psi = state.clone();
        let mut theta = 0.0f64;
        let mut trace = Vec::with_capacity(n + 1);
        for (k, (j, upow)) in steps.into_iter().enumerate() {
            theta /= 2.0;
            let err = errors.get(k).copied().unwrap_or(0.0);
            let upow = upow * Complex64::from_polar(1.0, 2.0 * PI * err);
            let prog = QsvtProgram::new(phase_oracle_from_power(&upow, theta)?, &self.phases)?;
            let sigma = ((&psi + &upow * &psi * Complex64::from_polar(1.0, -2.0 * PI * theta)) * Complex64::new(0.5, 0.0)).norm();
            let m_psi = prog.block_action(&psi);
            let p_one = hadamard_test_plus(&psi, &m_psi);
            let bit = match rng.as_deref_mut() {
                None => u8::from(p_one > 0.5),
                Some(r) => u8::from(r.random::<f64>() < p_one),
            };
            let ideal_bit = u8::from(sigma < FRAC_1_SQRT_2);
            let p_fail = if ideal_bit == 1 { 1.0 - p_one } else { p_one };
            trace.push(PeIteration { j, theta, sigma, p_one, ideal_bit, p_fail, bit });
            // Collapse onto the branch that was read.
            let next = if bit == 1 { &psi + &m_psi } else { &psi - &m_psi };
            let norm = next.norm();
            if norm > 1e-300 {
                psi = next / Complex64::new(norm, 0.0);
            }
            theta += 0.5 * f64::from(bit);
        }
        // theta now reads 0.theta_0 theta_1 ... theta_n; undo the last halving.
        let value = 2.0 * theta;
        let mut theta_bits = vec![trace[n].bit];
        theta_bits.extend(trace[..n].iter().rev().map(|t| t.bit));
        Ok(PhaseEstimate { theta_bits, n, value, trace, queries: ((n + 1) * self.degree()) as u64 })
    }
}

/// One-shot phase estimation.
pub fn qsvt_phase_estimation(
    u: &ComplexMatrix,
    state: &ComplexVector,
    n: usize,
    epsilon: f64,
    delta_gap: f64,
    mode: Mode,
) -> Result<PhaseEstimate> {
    PhaseEstimator::new(epsilon, delta_gap, &SolverOptions::default())?.run(u, state, n, mode, &[])
}

/// Convergents `p/q` of the continued fraction of `x` in `[0, 1)` with `q <= max_den`.
pub fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut frac = x;
    for _ in 0..64 {
        let a = frac.floor();
        let ai = a as u64;
        let h = ai.saturating_mul(h1).saturating_add(h0);
        let k = ai.saturating_mul(k1).saturating_add(k0);
        if k > max_den {
            break;
        }
        out.push((h, k));
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let rem = frac - a;
        if rem < 1e-12 {
            break;
        }
        frac = 1.0 / rem;
    }
    out
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Permutation matrix of `|y> -> |x y mod N>` on `N` basis states.
pub fn modular_multiplication(x: u64, modulus: u64) -> Result<ComplexMatrix> {
    if !(2..=64).contains(&modulus) {
        return Err(QsvtError::Domain(format!("modulus {modulus} outside 2..=64")));
    }
    if x == 0 || x >= modulus || gcd(x, modulus) != 1 {
        return Err(QsvtError::Domain(format!("x = {x} must be a unit modulo {modulus}")));
    }
    let n = modulus as usize;
    let mut m = ComplexMatrix::zeros(n, n);
    for y in 0..modulus {
        m[(((x * y) % modulus) as usize, y as usize)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Settings for the order-finding demo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFindingOptions {
    pub retries: usize,
    pub delta_gap: f64,
}

impl Default for OrderFindingOptions {
    fn default() -> Self {
        OrderFindingOptions { retries: 5, delta_gap: 0.2 }
    }
}

/// Prepared order finding for one modulus size.
#[derive(Debug, Clone)]
pub struct OrderFinder {
    pub bits: usize,
    pub delta: f64,
    pub options: OrderFindingOptions,
    estimator: PhaseEstimator,
}

impl OrderFinder {
    /// Uses `n = ceil(2 log2 N + 1)` bits and `epsilon = sqrt(2 delta / (n + 1))`
    /// (capped at the sign-approximation limit).
    pub fn new(modulus: u64, delta: f64, options: OrderFindingOptions) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(QsvtError::Domain(format!("delta {delta} outside (0, 1)")));
        }
        if options.retries == 0 {
            return Err(QsvtError::Domain("need at least one attempt".into()));
        }
        let bits = (2.0 * (modulus as f64).log2() + 1.0 - 1e-12).ceil() as usize;
        let eps = PhaseEstimator::epsilon_for(delta, bits).min(0.4);
        let estimator = PhaseEstimator::new(eps, options.delta_gap, &SolverOptions::default())?;
        Ok(OrderFinder { bits, delta, options, estimator })
    }

    pub fn run(&self, x: u64, modulus: u64, mode: Mode) -> Result<RunRecord> {
        let u = modular_multiplication(x, modulus)?;
        let mut start = ComplexVector::zeros(modulus as usize);
        start[1] = Complex64::new(1.0, 0.0);
        let mut rec = RunRecord::new("factor", mode);
        rec.param("x", x);
        rec.param("N", modulus);
        rec.param("delta", self.delta);
        rec.param("bits", self.bits as u64);
        rec.param("epsilon", self.estimator.epsilon);
        rec.param("Delta", self.options.delta_gap);
        rec.param("degree", self.estimator.degree() as u64);
        let mut rng = mode.rng();
        let attempts = if rng.is_some() { self.options.retries } else { 1 };
        for attempt in 1..=attempts {
            let est = self.estimator.run_with(&u, &start, self.bits, rng.as_mut(), &[])?;
            rec.queries += est.queries;
            let theta = est.value.fract();
            rec.shots.push((theta * (1u64 << self.bits) as f64).round() as u64);
            let found = convergents(theta, modulus)
                .into_iter()
                .map(|(_, q)| q)
                .find(|&q| q > 0 && mod_pow(x, q, modulus) == 1);
            if let Some(r) = found {
                rec.decision = json!({ "order": r, "attempts": attempt, "theta": theta });
                return Ok(rec);
            }
        }
        Err(QsvtError::OrderNotFound { attempts })
    }
}

/// One-shot order finding: prepares and runs.
pub fn order_finding_demo(x: u64, modulus: u64, delta: f64, mode: Mode) -> Result<RunRecord> {
    OrderFinder::new(modulus, delta, OrderFindingOptions::default())?.run(x, modulus, mode)
}
