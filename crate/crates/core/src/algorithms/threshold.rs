use rand::Rng;
use serde_json::json;

use super::{bernoulli_decide, bernoulli_sample_count, check_unit_state, hadamard_test_plus, Mode, RunRecord};
use crate::block_encoding::{hermitian_defect, qubitize_hermitian, shift_positive, ComplexMatrix, ComplexVector};
use crate::error::{QsvtError, Result};
use crate::phase_solver::{solve_phases, SolverOptions};
use crate::poly_approx::{eigenvalue_threshold_poly, ApproxSpec, ChebyshevPoly, DEFAULT_DEGREE_CAP};
use crate::qsvt_engine::QsvtProgram;

/// Parameters of an eigenvalue threshold test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    pub alpha: f64,
    pub lambda_th: f64,
    pub delta_lambda: f64,
    /// Lower bound on the overlap of the input with the low-energy space.
    pub zeta: f64,
    /// Failure budget.
    pub delta: f64,
    /// Polynomial accuracy; `zeta / 4` when `None`.
    pub epsilon: Option<f64>,
}

/// A prepared threshold test for one Hamiltonian.
#[derive(Debug, Clone)]
pub struct ThresholdProblem {
    pub params: ThresholdParams,
    pub epsilon: f64,
    /// Whether the encoding was shifted to make the spectrum non-negative.
    pub shifted: bool,
    /// Threshold and window in the units of the encoded operator.
    pub center: f64,
    pub window: f64,
    pub repetitions: u64,
    /// `p(0)` at or below this is the all-high case.
    pub high_bound: f64,
    /// `p(0)` at or above this is the exists-low case.
    pub low_bound: f64,
    pub poly: ChebyshevPoly,
    program: QsvtProgram,
}

impl ThresholdProblem {
    pub fn new(h: &ComplexMatrix, params: ThresholdParams, options: &SolverOptions) -> Result<Self> {
        let ThresholdParams { alpha, lambda_th, delta_lambda, zeta, delta, epsilon } = params;
        if !(zeta > 0.0 && zeta <= 1.0) || !(delta > 0.0 && delta < 1.0) || !(delta_lambda > 0.0) {
            return Err(QsvtError::Domain("need 0 < zeta <= 1, 0 < delta < 1 and Delta_lambda > 0".into()));
        }
        let defect = hermitian_defect(h);
        if defect > 1e-10 {
            return Err(QsvtError::NotHermitian { defect });
        }
        let base = qubitize_hermitian(h, alpha)?;
        let min_eig = ((h + h.adjoint()) * nalgebra::Complex::new(0.5, 0.0)).symmetric_eigenvalues().min();
        let shifted = min_eig < 0.0;
        let (encoding, center, window) = if shifted {
            (shift_positive(&base)?, (lambda_th / alpha + 1.0) / 2.0, delta_lambda / alpha)
        } else {
            (base, lambda_th / alpha, 2.0 * delta_lambda / alpha)
        };
        let eps_default = epsilon.is_none();
        let epsilon = epsilon.unwrap_or(zeta / 4.0);
        let high_bound = 0.5 * epsilon * epsilon;
        let low_bound = zeta * zeta * (1.0 - epsilon);
        if !(high_bound < low_bound) {
            return Err(QsvtError::Domain(format!("epsilon {epsilon} too large to separate the cases for zeta {zeta}")));
        }
        let repetitions = if eps_default {
            (9.0 / (2.0 * zeta.powi(4)) * (1.0 / delta).ln() - 1e-9).ceil().max(1.0) as u64
        } else {
            bernoulli_sample_count(high_bound, low_bound, delta)?
        };
        let spec = ApproxSpec::new(epsilon, window).with_shift(center);
        let poly = eigenvalue_threshold_poly(&spec, DEFAULT_DEGREE_CAP)?;
        let phases = solve_phases(&poly, options)?;
        let program = QsvtProgram::new(encoding, &phases)?;
        Ok(ThresholdProblem {
            params,
            epsilon,
            shifted,
            center,
            window,
            repetitions,
            high_bound,
            low_bound,
            poly,
            program,
        })
    }

    pub fn degree(&self) -> usize {
        self.program.degree()
    }

    /// Exact probability of reading `0` in one repetition.
    pub fn p_zero(&self, psi: &ComplexVector) -> Result<f64> {
        check_unit_state(psi)?;
        let n = self.program.bases().1.ncols();
        if psi.len() != n {
            return Err(QsvtError::Dimension(format!("state has length {}, expected {n}", psi.len())));
        }
        Ok(hadamard_test_plus(psi, &self.program.block_action(psi)))
    }

    /// Runs the repetitions and decides whether a low eigenvalue exists.
    pub fn run(&self, psi: &ComplexVector, mode: Mode) -> Result<RunRecord> {
        let p0 = self.p_zero(psi)?;
        let p = &self.params;
        let mut rec = RunRecord::new("threshold", mode);
        rec.param("alpha", p.alpha);
        rec.param("lambda_th", p.lambda_th);
        rec.param("delta_lambda", p.delta_lambda);
        rec.param("zeta", p.zeta);
        rec.param("delta", p.delta);
        rec.param("epsilon", self.epsilon);
        rec.param("shifted", self.shifted);
        rec.param("degree", self.degree() as u64);
        rec.param("repetitions", self.repetitions);
        rec.queries = self.repetitions * self.degree() as u64;
        let exists_low = match mode.rng() {
            None => {
                rec.queries = self.degree() as u64;
                bernoulli_decide_prob(p0, self.high_bound, self.low_bound)
            }
            Some(mut rng) => {
                let mut zeros = 0;
                for _ in 0..self.repetitions {
                    let outcome = u64::from(rng.random::<f64>() >= p0);
                    zeros += 1 - outcome;
                    rec.shots.push(outcome);
                }
                bernoulli_decide(zeros, self.repetitions, self.high_bound, self.low_bound)
            }
        };
        rec.decision = json!({ "exists_low": exists_low, "p_zero": p0 });
        Ok(rec)
    }
}

fn bernoulli_decide_prob(p: f64, a: f64, b: f64) -> bool {
    (p - b).abs() < (p - a).abs()
}

/// One-shot threshold run.
pub fn eigenvalue_threshold(h: &ComplexMatrix, params: ThresholdParams, psi: &ComplexVector, mode: Mode) -> Result<RunRecord> {
    ThresholdProblem::new(h, params, &SolverOptions::default())?.run(psi, mode)
}
