use num_complex::Complex64;

use crate::block_encoding::{
    embed_general, qubitize_hermitian, shift_positive, spectral_norm, BlockEncoding, ComplexMatrix, ComplexVector,
};
use crate::error::{QsvtError, Result};
use crate::phase_solver::{solve_phases, SolverOptions};
use crate::poly_approx::{jacobi_anger_cos, jacobi_anger_sin, matrix_inversion_poly, solve_truncation, ChebyshevPoly, DEFAULT_DEGREE_CAP};
use crate::qsvt_engine::{real_part_encoding, QsvtProgram};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Output of Hamiltonian simulation.
#[derive(Debug, Clone)]
pub struct HamiltonianSimulation {
    /// Encodes `(C - i S) / 2` with `alpha = 2`, so `encoded_operator()`
    /// approximates `e^{-iHt}` (times a global phase when shifted).
    pub encoding: BlockEncoding,
    pub k_prime: usize,
    pub cos_poly: ChebyshevPoly,
    pub sin_poly: ChebyshevPoly,
    /// Total encoding applications: `2k' + (2k' + 1)`.
    pub queries: usize,
    pub shifted: bool,
}

/// `e^{-iHt}` from cosine and sine QSVT programs joined by a one-qubit
/// linear combination.
///
/// With `shift = false` the programs act on the qubitized encoding of `H/alpha`
/// directly: definite-parity transforms of a Hermitian encoding are its
/// eigenvalue transforms. With `shift = true` they act on the encoding of
/// `(H/alpha + I)/2` for time `2 alpha t`, which adds the global phase `e^{-i alpha t}`.
pub fn hamiltonian_simulation(h: &ComplexMatrix, alpha: f64, t: f64, epsilon: f64, shift: bool) -> Result<HamiltonianSimulation> {
    if !(epsilon > 0.0 && epsilon < (-1.0f64).exp()) {
        return Err(QsvtError::Domain(format!("epsilon {epsilon} outside (0, 1/e)")));
    }
    let base = qubitize_hermitian(h, alpha)?;
    let (encoding, tau) = if shift { (shift_positive(&base)?, 2.0 * alpha * t) } else { (base, alpha * t) };
    let eps = epsilon / 4.0;
    let k_prime = if tau == 0.0 { 0 } else { solve_truncation(tau.abs(), eps)?.k_prime };
    let cos_poly = jacobi_anger_cos(tau, eps)?;
    let sin_poly = jacobi_anger_sin(tau, eps)?;
    let options = SolverOptions::default();
    let cos_prog = QsvtProgram::new(encoding.clone(), &solve_phases(&cos_poly, &options)?)?;
    let sin_prog = QsvtProgram::new(encoding, &solve_phases(&sin_poly, &options)?)?;
    let queries = cos_prog.degree() + sin_prog.degree();
    let ce = real_part_encoding(&cos_prog)?;
    let se = real_part_encoding(&sin_prog)?;
    // Both blocks sit under the same projector: (|+><+| (x) Pi) on each side.
    let n = ce.dim();
    let mut u = ComplexMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(&ce.unitary);
    u.view_mut((n, n), (n, n)).copy_from(&(&se.unitary * Complex64::new(0.0, -1.0)));
    let half = &ce.proj_right * c(0.5);
    let mut p = ComplexMatrix::zeros(2 * n, 2 * n);
    for (r, k) in [(0, 0), (0, n), (n, 0), (n, n)] {
        p.view_mut((r, k), (n, n)).copy_from(&half);
    }
    let encoding = BlockEncoding::new(u, p.clone(), p, 2.0)?;
    Ok(HamiltonianSimulation { encoding, k_prime, cos_poly, sin_poly, queries, shifted: shift })
}

/// Output of matrix inversion.
#[derive(Debug, Clone)]
pub struct MatrixInversion {
    /// Block approximates `A^{-1} / (2 kappa)`; `alpha = 2 kappa`, so
    /// `encoded_operator()` approximates `A^{-1}`.
    pub encoding: BlockEncoding,
    pub poly: ChebyshevPoly,
    pub degree: usize,
    pub kappa: f64,
}

impl MatrixInversion {
    /// `A^{-1} b / ||A^{-1} b||` as produced by the encoding.
    pub fn solve(&self, b: &ComplexVector) -> Result<ComplexVector> {
        let op = self.encoding.encoded_operator();
        if b.len() != op.ncols() {
            return Err(QsvtError::Dimension("right-hand side has the wrong length".into()));
        }
        let x = op * b;
        let norm = x.norm();
        if norm == 0.0 {
            return Err(QsvtError::Domain("zero right-hand side".into()));
        }
        Ok(x / c(norm))
    }
}

/// QSVT with the inversion polynomial on the encoding of `A^dagger`.
pub fn matrix_inversion(a: &ComplexMatrix, kappa: f64, epsilon: f64) -> Result<MatrixInversion> {
    if !a.is_square() {
        return Err(QsvtError::Dimension("matrix inversion needs a square matrix".into()));
    }
    if !(kappa >= 1.0) {
        return Err(QsvtError::Domain(format!("kappa {kappa} must be at least 1")));
    }
    let sv = a.clone().singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo < 1.0 / kappa - 1e-9 || hi > 1.0 + 1e-9 {
        return Err(QsvtError::ConditionViolated(format!(
            "singular values span [{lo}, {hi}], outside [1/kappa, 1] = [{}, 1]",
            1.0 / kappa
        )));
    }
    let poly = matrix_inversion_poly(epsilon, kappa, DEFAULT_DEGREE_CAP)?;
    let phases = solve_phases(&poly, &SolverOptions::default())?;
    let adj = a.adjoint();
    let prog = QsvtProgram::new(embed_general(&adj, 1.0_f64.max(spectral_norm(&adj)))?, &phases)?;
    let inner = real_part_encoding(&prog)?;
    let encoding = BlockEncoding::new(inner.unitary, inner.proj_right, inner.proj_left, 2.0 * kappa)?;
    Ok(MatrixInversion { degree: prog.degree(), encoding, poly, kappa })
}
