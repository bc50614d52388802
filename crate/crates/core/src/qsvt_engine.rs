//! Quantum singular value transformation of block encodings.
//!
//! Phases are given in `Wx` form; the engine converts them to the reflection
//! convention and lifts each single-qubit step to an alternating product of
//! `U`, `U^dag` and projector phases. Read right to left, the product applies
//! `Pi_{psi_d}`, then `U`, then `Pi~_{psi_{d-1}}`, then `U^dag`, and so on.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::block_encoding::{
    block_bases, check_projector, extract_block, hermitian_defect, hermitian_function, projector_phase,
    BlockEncoding, ComplexMatrix, ComplexVector,
};
use crate::error::{QsvtError, Result};
use crate::poly_approx::{ChebyshevPoly, Parity};
use crate::qsp_core::{convert_convention, Basis, Convention, Layout, PhaseSequence, SignalKind};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A block encoding paired with the phases to apply to it.
#[derive(Debug, Clone)]
pub struct QsvtProgram {
    pub encoding: BlockEncoding,
    /// Canonical `(Wx, Sz, ++)` phases.
    pub phases: PhaseSequence,
    pub parity: Parity,
    reflection: Vec<f64>,
    reflection_neg: Vec<f64>,
    u_dag: ComplexMatrix,
    diag_right: Option<Vec<bool>>,
    diag_left: Option<Vec<bool>>,
    basis_left: ComplexMatrix,
    basis_right: ComplexMatrix,
}

fn to_reflection(phases: &[f64]) -> Result<Vec<f64>> {
    let seq = PhaseSequence::new(phases.to_vec(), Convention::wx())?;
    Ok(convert_convention(&seq, Convention::reflection())?.phases)
}

fn diagonal_mask(p: &ComplexMatrix) -> Option<Vec<bool>> {
    let n = p.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && p[(i, j)] != c(0.0) {
                return None;
            }
        }
    }
    Some((0..n).map(|i| p[(i, i)].re > 0.5).collect())
}

impl QsvtProgram {
    /// Accepts `Wx` phases in either basis (the real part of the response is
    /// the same) or reflection phases in the `00` basis.
    pub fn new(encoding: BlockEncoding, phases: &PhaseSequence) -> Result<Self> {
        if phases.layout != Layout::Standard {
            return Err(QsvtError::InvalidConvention("QSVT needs a standard phase layout".into()));
        }
        let wx = match phases.convention.signal {
            SignalKind::Wx => phases.phases.clone(),
            SignalKind::Reflection if phases.convention.basis == Basis::ZeroZero => {
                convert_convention(phases, Convention::wx())?.phases
            }
            _ => {
                return Err(QsvtError::InvalidConvention(format!(
                    "QSVT accepts Wx or reflection/00 phases, got {}",
                    phases.convention
                )))
            }
        };
        let canonical = PhaseSequence::new(wx, Convention::wx_plus())?;
        let d = canonical.degree();
        let neg: Vec<f64> = canonical.phases.iter().map(|p| -p).collect();
        let (basis_left, basis_right) = block_bases(&encoding);
        Ok(QsvtProgram {
            basis_left,
            basis_right,
            reflection: to_reflection(&canonical.phases)?,
            reflection_neg: to_reflection(&neg)?,
            parity: Parity::of_degree(d),
            u_dag: encoding.unitary.adjoint(),
            diag_right: diagonal_mask(&encoding.proj_right),
            diag_left: diagonal_mask(&encoding.proj_left),
            phases: canonical,
            encoding,
        })
    }

    pub fn degree(&self) -> usize {
        self.phases.degree()
    }

    /// Projector that carries phase `psi_k`: `Pi` when `d - k` is even, `Pi~` otherwise.
    fn projector_for(&self, k: usize) -> (&ComplexMatrix, &Option<Vec<bool>>) {
        if (self.degree() - k) % 2 == 0 {
            (&self.encoding.proj_right, &self.diag_right)
        } else {
            (&self.encoding.proj_left, &self.diag_left)
        }
    }

    fn unitary_for(&self, psi: &[f64]) -> Result<ComplexMatrix> {
        let d = self.degree();
        let (p, _) = self.projector_for(d);
        let mut m = projector_phase(p, psi[d])?;
        for step in 1..=d {
            m = if step % 2 == 1 { &self.encoding.unitary * m } else { &self.u_dag * m };
            let (p, _) = self.projector_for(d - step);
            m = projector_phase(p, psi[d - step])? * m;
        }
        Ok(m)
    }

    fn apply_projector_phase(&self, k: usize, phi: f64, v: &mut ComplexVector) {
        let (p, mask) = self.projector_for(k);
        let e = Complex64::from_polar(1.0, phi);
        match mask {
            Some(mask) => {
                for (x, &inside) in v.iter_mut().zip(mask) {
                    *x *= if inside { e } else { e.conj() };
                }
            }
            None => {
                let pv = p * &*v;
                *v *= e.conj();
                *v += pv * (e - e.conj());
            }
        }
    }

    fn apply_sequence(&self, psi: &[f64], state: &ComplexVector) -> ComplexVector {
        let d = self.degree();
        let mut v = state.clone();
        self.apply_projector_phase(d, psi[d], &mut v);
        for step in 1..=d {
            v = if step % 2 == 1 { &self.encoding.unitary * v } else { &self.u_dag * v };
            self.apply_projector_phase(d - step, psi[d - step], &mut v);
        }
        v
    }

    /// `(U_phi + U_{-phi}) / 2` applied to a full-space vector.
    ///
    /// This equals the action of the auxiliary-qubit construction after both
    /// the input and output auxiliary qubit are fixed to `|+>`.
    pub fn apply_real_part(&self, state: &ComplexVector) -> ComplexVector {
        (self.apply_sequence(&self.reflection, state) + self.apply_sequence(&self.reflection_neg, state)) * c(0.5)
    }

    /// Output projector of the transformed block: `Pi` for even degree, `Pi~` for odd.
    pub fn output_projector(&self) -> &ComplexMatrix {
        self.projector_for(0).0
    }

    /// Maps coordinates in the range of `Pi` to coordinates in the range of the
    /// output projector through the real-part transform.
    pub fn block_action(&self, coords: &ComplexVector) -> ComplexVector {
        let out_basis = if self.parity == Parity::Even { &self.basis_right } else { &self.basis_left };
        out_basis.adjoint() * self.apply_real_part(&(&self.basis_right * coords))
    }

    /// Range bases of `(Pi~, Pi)` as column matrices.
    pub fn bases(&self) -> (&ComplexMatrix, &ComplexMatrix) {
        (&self.basis_left, &self.basis_right)
    }
}

/// Full QSVT unitary `U_phi` on the encoding's space.
pub fn qsvt_unitary(prog: &QsvtProgram) -> Result<ComplexMatrix> {
    prog.unitary_for(&prog.reflection)
}

/// `U_{-phi}`, whose block holds the complex conjugate polynomial.
pub fn qsvt_unitary_conjugate(prog: &QsvtProgram) -> Result<ComplexMatrix> {
    prog.unitary_for(&prog.reflection_neg)
}

fn stack_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = ComplexMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

fn plus_projector(p: &ComplexMatrix) -> ComplexMatrix {
    let half = p * c(0.5);
    let n = p.nrows();
    let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
    for (r, k) in [(0, 0), (0, n), (n, 0), (n, n)] {
        out.view_mut((r, k), (n, n)).copy_from(&half);
    }
    out
}

/// Block encoding of `Re(P)^{(SV)}(A)` via one auxiliary qubit (most significant):
/// unitary `|0><0| (x) U_phi + |1><1| (x) U_{-phi}`, projectors `|+><+| (x) Pi`
/// on the input side and `|+><+| (x) Pi` or `|+><+| (x) Pi~` on the output side.
pub fn real_part_encoding(prog: &QsvtProgram) -> Result<BlockEncoding> {
    let u = stack_diag(&qsvt_unitary(prog)?, &qsvt_unitary_conjugate(prog)?);
    let right = plus_projector(&prog.encoding.proj_right);
    let left = plus_projector(prog.output_projector());
    BlockEncoding::new(u, right, left, 1.0)
}

/// Matrix of the transformed block: `Re(P)` applied to the singular values,
/// in the range bases of the projectors.
pub fn transformed_block(prog: &QsvtProgram) -> Result<ComplexMatrix> {
    Ok(extract_block(&real_part_encoding(prog)?))
}

/// Brute-force singular value transform: `W P(S) V^dag` for odd `P`, `V P(S) V^dag` for even.
pub fn svd_oracle(a: &ComplexMatrix, poly: &ChebyshevPoly) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(QsvtError::Dimension("svd_oracle expects a square matrix".into()));
    }
    let svd = a.clone().svd(true, true);
    let w = svd.u.expect("left vectors requested");
    let v = svd.v_t.expect("right vectors requested").adjoint();
    let n = a.nrows();
    let ps = DMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        svd.singular_values.iter().map(|&s| c(poly.eval(s))),
    ));
    match poly.parity() {
        Parity::Odd => Ok(w * ps * v.adjoint()),
        Parity::Even => Ok(&v * ps * v.adjoint()),
        Parity::None => Err(QsvtError::Parity("svd_oracle needs a definite parity".into())),
    }
}

/// `sum_lambda P(lambda) |lambda><lambda|`.
pub fn eigen_oracle(h: &ComplexMatrix, poly: &ChebyshevPoly) -> Result<ComplexMatrix> {
    let defect = hermitian_defect(h);
    if defect > 1e-10 {
        return Err(QsvtError::NotHermitian { defect });
    }
    let hs = (h + h.adjoint()) * c(0.5);
    Ok(hermitian_function(&hs, |x| poly.eval(x)))
}

fn check_unit(v: &ComplexMatrix) -> Result<()> {
    let norm = v.norm();
    if v.ncols() != 1 || (norm - 1.0).abs() > 1e-10 {
        return Err(QsvtError::NotUnit { norm });
    }
    Ok(())
}

/// `<A0| (U B_{phi_1} U^dag A_{phi_2}) ... (U B_{phi_{d-1}} U^dag A_{phi_d}) U |B0>`
/// with `A_phi = exp(i phi |A0><A0|)` and `B_phi = exp(i phi |B0><B0|)`.
pub fn amplitude_amplification_matrix_element(
    u: &ComplexMatrix,
    a0: &ComplexMatrix,
    b0: &ComplexMatrix,
    phases: &[f64],
) -> Result<Complex64> {
    check_unit(a0)?;
    check_unit(b0)?;
    if phases.len() % 2 != 0 {
        return Err(QsvtError::Domain("amplitude amplification needs an even phase count".into()));
    }
    if !u.is_square() || u.nrows() != a0.nrows() || u.nrows() != b0.nrows() {
        return Err(QsvtError::Dimension("U, A0 and B0 must share a dimension".into()));
    }
    let a0v = a0.column(0).into_owned();
    let b0v = b0.column(0).into_owned();
    let reflect = |v: &ComplexVector, axis: &ComplexVector, phi: f64| -> ComplexVector {
        let ov = axis.dotc(v);
        v + axis * (ov * (Complex64::from_polar(1.0, phi) - 1.0))
    };
    let ud = u.adjoint();
    let mut v = u * &b0v;
    for pair in phases.chunks(2).rev() {
        v = reflect(&v, &a0v, pair[1]);
        v = &ud * v;
        v = reflect(&v, &b0v, pair[0]);
        v = u * v;
    }
    Ok(a0v.dotc(&v))
}

/// Checks that a projector-like matrix is valid; re-exported for callers building programs by hand.
pub fn validate_projector(p: &ComplexMatrix) -> Result<()> {
    check_projector(p)
}
