//! Unitary block encodings of matrices and the projector plumbing around them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsvtError, Result};

/// Dense complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

/// Largest encoding dimension the library will build.
pub const MAX_DIM: usize = 1 << 10;

const UNITARY_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Conjugate transpose.
pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Largest entry magnitude.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - ComplexMatrix::identity(u.nrows(), u.ncols())))
}

/// `max |H - H^dagger|`.
pub fn hermitian_defect(h: &ComplexMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(h - h.adjoint()))
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Checks that `p` is an orthogonal projector.
pub fn check_projector(p: &ComplexMatrix) -> Result<()> {
    if !p.is_square() {
        return Err(QsvtError::NotProjector { defect: f64::INFINITY });
    }
    let defect = max_abs(&(p * p - p)).max(hermitian_defect(p));
    if defect > UNITARY_TOL {
        return Err(QsvtError::NotProjector { defect });
    }
    Ok(())
}

/// Diagonal projector onto the first `rank` basis states of a `dim`-dimensional space.
pub fn leading_projector(dim: usize, rank: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |i, j| if i == j && i < rank { c(1.0) } else { c(0.0) })
}

/// `H` as a Hermitian operator together with its eigenbasis.
fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = h.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function<F: Fn(f64) -> f64>(h: &ComplexMatrix, f: F) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(vals.len(), vals.iter().map(|&l| c(f(l)))));
    &vecs * d * vecs.adjoint()
}

fn stack(tl: &ComplexMatrix, tr: &ComplexMatrix, bl: &ComplexMatrix, br: &ComplexMatrix) -> ComplexMatrix {
    let (r1, c1) = tl.shape();
    let (r2, c2) = br.shape();
    let mut m = ComplexMatrix::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(tl);
    m.view_mut((0, c1), (r1, c2)).copy_from(tr);
    m.view_mut((r1, 0), (r2, c1)).copy_from(bl);
    m.view_mut((r1, c1), (r2, c2)).copy_from(br);
    m
}

/// A unitary with two projectors marking the block that holds `A / alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoding {
    pub unitary: ComplexMatrix,
    pub proj_right: ComplexMatrix,
    pub proj_left: ComplexMatrix,
    /// The encoded operator is `alpha` times the extracted block.
    pub alpha: f64,
}

impl BlockEncoding {
    /// Validates unitarity, projector structure and the block norm.
    pub fn new(unitary: ComplexMatrix, proj_right: ComplexMatrix, proj_left: ComplexMatrix, alpha: f64) -> Result<Self> {
        let d = unitary.nrows();
        if d > MAX_DIM {
            return Err(QsvtError::Dimension(format!("dimension {d} exceeds {MAX_DIM}")));
        }
        if proj_right.shape() != (d, d) || proj_left.shape() != (d, d) || !unitary.is_square() {
            return Err(QsvtError::Dimension("unitary and projectors must share a square shape".into()));
        }
        let defect = unitarity_defect(&unitary);
        if defect > UNITARY_TOL * (d as f64).max(1.0) {
            return Err(QsvtError::NotUnitary { defect });
        }
        check_projector(&proj_right)?;
        check_projector(&proj_left)?;
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(QsvtError::Domain(format!("alpha {alpha} must be positive")));
        }
        Ok(BlockEncoding { unitary, proj_right, proj_left, alpha })
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// `alpha` times the extracted block.
    pub fn encoded_operator(&self) -> ComplexMatrix {
        extract_block(self) * c(self.alpha)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&EncodingJson::from(self)).expect("encodings always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: EncodingJson = serde_json::from_str(s)?;
        BlockEncoding::new(j.unitary.try_into()?, j.proj_right.try_into()?, j.proj_left.try_into()?, j.alpha)
    }
}

/// Row-major JSON form `{"rows", "cols", "re", "im"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = QsvtError;
    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.rows * j.cols;
        if j.re.len() != n || (j.im.len() != n && !j.im.is_empty()) {
            return Err(QsvtError::Dimension(format!("expected {n} entries for a {}x{} matrix", j.rows, j.cols)));
        }
        if j.re.iter().chain(&j.im).any(|x| !x.is_finite()) {
            return Err(QsvtError::Domain("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix::from_fn(j.rows, j.cols, |r, k| {
            let i = r * j.cols + k;
            Complex64::new(j.re[i], j.im.get(i).copied().unwrap_or(0.0))
        }))
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixJson::from(m)).expect("matrices always serialize")
}

/// Parses the matrix JSON format; a missing `im` array means a real matrix.
pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix> {
    #[derive(Deserialize)]
    struct Loose {
        rows: usize,
        cols: usize,
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    }
    let l: Loose = serde_json::from_str(s)?;
    MatrixJson { rows: l.rows, cols: l.cols, re: l.re, im: l.im }.try_into()
}

#[derive(Serialize, Deserialize)]
struct EncodingJson {
    unitary: MatrixJson,
    proj_right: MatrixJson,
    proj_left: MatrixJson,
    alpha: f64,
}

impl From<&BlockEncoding> for EncodingJson {
    fn from(b: &BlockEncoding) -> Self {
        EncodingJson {
            unitary: (&b.unitary).into(),
            proj_right: (&b.proj_right).into(),
            proj_left: (&b.proj_left).into(),
            alpha: b.alpha,
        }
    }
}

/// `[[H/alpha, sqrt(I - (H/alpha)^2)], [sqrt(I - (H/alpha)^2), -H/alpha]]`.
///
/// The index qubit is the most significant one, so the block sits in the
/// leading `N x N` corner and `Pi = Pi~ = |0><0| (x) I`.
pub fn qubitize_hermitian(h: &ComplexMatrix, alpha: f64) -> Result<BlockEncoding> {
    let defect = hermitian_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(QsvtError::NotHermitian { defect });
    }
    let norm = spectral_norm(h);
    if !(alpha > 0.0) || norm / alpha > 1.0 + 1e-12 {
        return Err(QsvtError::ScaleTooSmall { alpha, norm });
    }
    let n = h.nrows();
    // Symmetrize so the eigensolver sees an exactly Hermitian input.
    let hs = (h + h.adjoint()) * c(0.5 / alpha);
    let s = hermitian_function(&hs, |l| (1.0 - l * l).max(0.0).sqrt());
    let u = stack(&hs, &s, &s, &(-&hs));
    let p = leading_projector(2 * n, n);
    BlockEncoding::new(u, p.clone(), p, alpha)
}

/// SVD completion of a square `A / alpha`:
/// `[[A, W sqrt(1-S^2) W^dag], [V sqrt(1-S^2) V^dag, -A^dag]]` with `A = W S V^dag`.
pub fn embed_general(a: &ComplexMatrix, alpha: f64) -> Result<BlockEncoding> {
    if !a.is_square() {
        return Err(QsvtError::Dimension("embed_general needs a square matrix".into()));
    }
    let norm = spectral_norm(a);
    if !(alpha > 0.0) || norm / alpha > 1.0 + 1e-12 {
        return Err(QsvtError::ScaleTooSmall { alpha, norm });
    }
    let n = a.nrows();
    let a = a * c(1.0 / alpha);
    let svd = a.clone().svd(true, true);
    let w = svd.u.expect("left vectors requested");
    let v = svd.v_t.expect("right vectors requested").adjoint();
    let comp = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        svd.singular_values.iter().map(|&s| c((1.0 - s * s).max(0.0).sqrt())),
    ));
    let top = &w * &comp * w.adjoint();
    let bottom = &v * &comp * v.adjoint();
    let u = stack(&a, &top, &bottom, &(-a.adjoint()));
    let p = leading_projector(2 * n, n);
    BlockEncoding::new(u, p.clone(), p, alpha)
}

/// Encodes `(I + H/alpha) / 2` with one extra index qubit (most significant).
///
/// The circuit is `(Had (x) I)(|0><0| (x) I + |1><1| (x) U)(Had (x) I)` with
/// projector `|0><0| (x) Pi`.
pub fn shift_positive(be: &BlockEncoding) -> Result<BlockEncoding> {
    if max_abs(&(&be.proj_left - &be.proj_right)) > UNITARY_TOL {
        return Err(QsvtError::Domain("shift_positive needs an encoding with equal projectors".into()));
    }
    let d = be.dim();
    let id = ComplexMatrix::identity(d, d);
    let plus = (&id + &be.unitary) * c(0.5);
    let minus = (&id - &be.unitary) * c(0.5);
    let u = stack(&plus, &minus, &minus, &plus);
    let z = ComplexMatrix::zeros(d, d);
    let p = stack(&be.proj_right, &z, &z, &z);
    BlockEncoding::new(u, p.clone(), p, 1.0)
}

/// `U^(2^j)` by repeated squaring.
pub fn unitary_power_of_two(u: &ComplexMatrix, j: u32) -> ComplexMatrix {
    let mut m = u.clone();
    for _ in 0..j {
        m = &m * &m;
    }
    m
}

/// Encoding of `A_j(theta) = (I + e^{-2 pi i theta} U^{2^j}) / 2`.
pub fn phase_oracle_block(u: &ComplexMatrix, j: u32, theta: f64) -> Result<BlockEncoding> {
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(QsvtError::NotUnitary { defect });
    }
    phase_oracle_from_power(&unitary_power_of_two(u, j), theta)
}

/// Same as [`phase_oracle_block`] with `U^{2^j}` supplied by the caller.
pub fn phase_oracle_from_power(u_pow: &ComplexMatrix, theta: f64) -> Result<BlockEncoding> {
    let n = u_pow.nrows();
    let id = ComplexMatrix::identity(n, n);
    let v = u_pow * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * theta);
    let plus = (&id + &v) * c(0.5);
    let minus = (&id - &v) * c(0.5);
    let u = stack(&plus, &minus, &minus, &plus);
    let p = leading_projector(2 * n, n);
    BlockEncoding::new(u, p.clone(), p, 1.0)
}

/// The search signal `[[a, s], [s, -a]]` with `a = 1/sqrt(N)` unless overridden.
pub fn grover_signal(n: usize, a_override: Option<f64>) -> Result<BlockEncoding> {
    if n < 2 {
        return Err(QsvtError::Domain("search space needs N >= 2".into()));
    }
    let a = a_override.unwrap_or(1.0 / (n as f64).sqrt());
    if !(0.0..=1.0).contains(&a) {
        return Err(QsvtError::Domain(format!("amplitude {a} outside [0, 1]")));
    }
    let s = (1.0 - a * a).sqrt();
    let u = ComplexMatrix::from_row_slice(2, 2, &[c(a), c(s), c(s), c(-a)]);
    let p = leading_projector(2, 1);
    BlockEncoding::new(u, p.clone(), p, 1.0)
}

/// `e^{i phi (2 Pi - I)}`: `e^{i phi}` on the range of `Pi`, `e^{-i phi}` elsewhere.
pub fn projector_phase(proj: &ComplexMatrix, phi: f64) -> Result<ComplexMatrix> {
    check_projector(proj)?;
    let e = Complex64::from_polar(1.0, phi);
    let n = proj.nrows();
    Ok(proj * (e - e.conj()) + ComplexMatrix::identity(n, n) * e.conj())
}

/// Orthonormal basis of the range of a projector, built by Gram-Schmidt on
/// the projected computational basis vectors in ascending order.
pub fn range_basis(proj: &ComplexMatrix) -> Vec<ComplexVector> {
    let n = proj.nrows();
    let mut basis: Vec<ComplexVector> = Vec::new();
    for i in 0..n {
        let mut v = proj.column(i).into_owned();
        for b in &basis {
            let ov = b.dotc(&v);
            v -= b * ov;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / c(norm));
        }
    }
    basis
}

fn basis_matrix(basis: &[ComplexVector], dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, basis.len());
    for (k, b) in basis.iter().enumerate() {
        m.set_column(k, b);
    }
    m
}

/// Matrix of `Pi~ U Pi` in the range bases of the two projectors.
pub fn extract_block(be: &BlockEncoding) -> ComplexMatrix {
    let d = be.dim();
    let left = basis_matrix(&range_basis(&be.proj_left), d);
    let right = basis_matrix(&range_basis(&be.proj_right), d);
    left.adjoint() * &be.unitary * right
}

/// Range bases of `(Pi~, Pi)` as column matrices.
pub fn block_bases(be: &BlockEncoding) -> (ComplexMatrix, ComplexMatrix) {
    let d = be.dim();
    (basis_matrix(&range_basis(&be.proj_left), d), basis_matrix(&range_basis(&be.proj_right), d))
}
