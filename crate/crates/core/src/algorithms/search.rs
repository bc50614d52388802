use rand::Rng;
use serde_json::json;

use super::{Mode, RunRecord};
use crate::block_encoding::{grover_signal, ComplexVector};
use crate::error::{QsvtError, Result};
use crate::phase_solver::{solve_phases, SolverOptions};
use crate::poly_approx::{sign_poly, ApproxSpec, DEFAULT_DEGREE_CAP};
use crate::qsvt_engine::QsvtProgram;

/// Attempts before the repeat-until-success loop gives up.
pub const SEARCH_ATTEMPT_CAP: usize = 1000;

/// Search over `N = 2^n_qubits` items with the sign polynomial applied to the
/// 2x2 reflection signal. Preparing once lets repeated runs share phases.
#[derive(Debug, Clone)]
pub struct SearchProgram {
    pub n_items: u64,
    pub delta: f64,
    pub delta_gap: f64,
    program: QsvtProgram,
    /// `(U_phi + U_-phi)/2` applied to the start vector: `[marked, rest]`.
    output: ComplexVector,
}

impl SearchProgram {
    /// `delta_gap` defaults to `1/sqrt(N)` and must not exceed `2/sqrt(N)`.
    pub fn new(n_qubits: u32, delta: f64, delta_gap: Option<f64>, options: &SolverOptions) -> Result<Self> {
        if !(1..=62).contains(&n_qubits) {
            return Err(QsvtError::Domain(format!("n_qubits {n_qubits} outside 1..=62")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(QsvtError::Domain(format!("delta {delta} outside (0, 1)")));
        }
        let n_items = 1u64 << n_qubits;
        let root = (n_items as f64).sqrt();
        let delta_gap = delta_gap.unwrap_or(1.0 / root);
        if !(delta_gap > 0.0 && delta_gap <= 2.0 / root + 1e-15) {
            return Err(QsvtError::Domain(format!("Delta {delta_gap} must lie in (0, 2/sqrt(N)]")));
        }
        let poly = sign_poly(&ApproxSpec::new(delta / 2.0, delta_gap), DEFAULT_DEGREE_CAP)?;
        let phases = solve_phases(&poly, options)?;
        let program = QsvtProgram::new(grover_signal(n_items as usize, None)?, &phases)?;
        let start = ComplexVector::from_vec(vec![1.0.into(), 0.0.into()]);
        let output = program.apply_real_part(&start);
        Ok(SearchProgram { n_items, delta, delta_gap, program, output })
    }

    pub fn degree(&self) -> usize {
        self.program.degree()
    }

    /// Real amplitude left on the marked item after the transform.
    pub fn marked_amplitude(&self) -> f64 {
        self.output[0].re
    }

    /// Probability that the auxiliary qubit reads `+`.
    pub fn success_probability(&self) -> f64 {
        self.output.norm_squared()
    }

    /// Runs the repeat-until-`+` loop. In exact mode the marked item is
    /// reported directly with its amplitude.
    pub fn run(&self, marked: u64, mode: Mode) -> Result<RunRecord> {
        if marked >= self.n_items {
            return Err(QsvtError::Domain(format!("marked {marked} >= N = {}", self.n_items)));
        }
        let mut rec = RunRecord::new("search", mode);
        rec.param("n_items", self.n_items);
        rec.param("marked", marked);
        rec.param("delta", self.delta);
        rec.param("Delta", self.delta_gap);
        rec.param("degree", self.degree() as u64);
        let d = self.degree() as u64;
        let Some(mut rng) = mode.rng() else {
            rec.queries = d;
            rec.decision = json!({ "found": marked, "marked_amplitude": self.marked_amplitude() });
            return Ok(rec);
        };
        let p_plus = self.success_probability();
        let p_marked = self.output[0].norm_sqr() / p_plus.max(f64::MIN_POSITIVE);
        for attempt in 1..=SEARCH_ATTEMPT_CAP {
            rec.queries += d;
            if rng.random::<f64>() >= p_plus {
                // Auxiliary read `-`: record and retry.
                rec.shots.push(0);
                continue;
            }
            rec.shots.push(1);
            let found = if rng.random::<f64>() < p_marked {
                marked
            } else {
                // Uniform over the unmarked items.
                let k = rng.random_range(0..self.n_items - 1);
                if k >= marked {
                    k + 1
                } else {
                    k
                }
            };
            rec.decision = json!({ "found": found, "attempts": attempt });
            return Ok(rec);
        }
        Err(QsvtError::GiveUp { iterations: SEARCH_ATTEMPT_CAP })
    }
}

/// One-shot search run: prepares the program and runs it once.
pub fn qsvt_search(n_qubits: u32, marked: u64, delta: f64, delta_gap: Option<f64>, mode: Mode) -> Result<RunRecord> {
    SearchProgram::new(n_qubits, delta, delta_gap, &SolverOptions::default())?.run(marked, mode)
}
