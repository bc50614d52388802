//! Fixtures shared by the criterion benches in `benches/`.

use qsvt::{ComplexMatrix, ComplexVector};
use num_complex::Complex64;

/// Deterministic Hermitian test matrix with spectral norm below one.
pub fn hermitian_fixture(n: usize) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        let t = (i * 7 + j * 3) as f64;
        Complex64::new(t.sin(), (t * 0.5).cos() * if i == j { 0.0 } else { 1.0 })
    });
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let scale = qsvt::block_encoding::spectral_norm(&h) * 1.25;
    h.unscale(scale)
}

/// Diagonal unitary with eigenphases `k / n` and the uniform state.
pub fn phase_fixture(n: usize) -> (ComplexMatrix, ComplexVector) {
    let u = ComplexMatrix::from_diagonal(&ComplexVector::from_fn(n, |k, _| {
        Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
    }));
    let mut psi = ComplexVector::zeros(n);
    psi[1 % n] = Complex64::new(1.0, 0.0);
    (u, psi)
}
