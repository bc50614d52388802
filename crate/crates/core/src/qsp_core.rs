//! Single-qubit signal processing: conventions, sequence evaluation and
//! conversions between equivalent conventions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsvtError, Result};

/// A 2x2 special unitary matrix.
pub type Su2Matrix = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);
const DOMAIN_SLACK: f64 = 1e-12;

/// Form of the signal rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// `[[a, i s], [i s, a]]` with `s = sqrt(1 - a^2)`.
    Wx,
    /// `[[a, s], [s, -a]]`.
    Reflection,
    /// `diag(e^{i theta/2}, e^{-i theta/2})`, input is the angle `theta`.
    Wz,
}

/// Form of the signal-processing rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessingKind {
    /// `e^{i phi Z}`.
    Sz,
    /// `e^{i phi X}`.
    Sx,
}

/// Matrix element read out as the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "00")]
    ZeroZero,
    #[serde(rename = "++")]
    PlusPlus,
}

#[derive(Deserialize)]
struct RawConvention {
    signal: SignalKind,
    processing: ProcessingKind,
    basis: Basis,
}

/// A validated (signal, processing, basis) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConvention")]
pub struct Convention {
    pub signal: SignalKind,
    pub processing: ProcessingKind,
    pub basis: Basis,
}

impl TryFrom<RawConvention> for Convention {
    type Error = QsvtError;
    fn try_from(r: RawConvention) -> Result<Self> {
        Convention::new(r.signal, r.processing, r.basis)
    }
}

impl Convention {
    /// Builds a convention, rejecting combinations that do not form a sequence family.
    pub fn new(signal: SignalKind, processing: ProcessingKind, basis: Basis) -> Result<Self> {
        let ok = matches!(
            (signal, processing, basis),
            (SignalKind::Wx, ProcessingKind::Sz, _)
                | (SignalKind::Reflection, ProcessingKind::Sz, _)
                | (SignalKind::Wz, ProcessingKind::Sx, Basis::ZeroZero)
        );
        if ok {
            Ok(Convention { signal, processing, basis })
        } else {
            Err(QsvtError::InvalidConvention(format!(
                "{signal:?}/{processing:?}/{basis:?} is not a supported combination"
            )))
        }
    }

    /// `Wx` signal, `Sz` processing, `<0|.|0>` readout. Phase solver output uses this.
    pub const fn wx() -> Self {
        Convention { signal: SignalKind::Wx, processing: ProcessingKind::Sz, basis: Basis::ZeroZero }
    }

    pub const fn wx_plus() -> Self {
        Convention { signal: SignalKind::Wx, processing: ProcessingKind::Sz, basis: Basis::PlusPlus }
    }

    pub const fn reflection() -> Self {
        Convention {
            signal: SignalKind::Reflection,
            processing: ProcessingKind::Sz,
            basis: Basis::ZeroZero,
        }
    }

    pub const fn wz() -> Self {
        Convention { signal: SignalKind::Wz, processing: ProcessingKind::Sx, basis: Basis::ZeroZero }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.basis {
            Basis::ZeroZero => "00",
            Basis::PlusPlus => "++",
        };
        write!(f, "{:?}/{:?}/{}", self.signal, self.processing, b)
    }
}

/// How the stored phases map onto the operator product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// `S(phi_0) W S(phi_1) ... W S(phi_d)`.
    #[default]
    Standard,
    /// Interleaved amplitude-amplification phases: the stored list is padded
    /// with a zero phase at both ends before evaluation, so `n` stored phases
    /// give a polynomial of degree `n + 1`.
    AmplitudeAmplification,
}

impl Layout {
    fn is_standard(&self) -> bool {
        *self == Layout::Standard
    }
}

#[derive(Deserialize)]
struct RawSequence {
    convention: Convention,
    phases: Vec<f64>,
    #[serde(default)]
    layout: Layout,
}

/// Ordered phase angles together with the convention they are meant for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct PhaseSequence {
    pub convention: Convention,
    pub phases: Vec<f64>,
    #[serde(default, skip_serializing_if = "Layout::is_standard")]
    pub layout: Layout,
}

impl TryFrom<RawSequence> for PhaseSequence {
    type Error = QsvtError;
    fn try_from(r: RawSequence) -> Result<Self> {
        let mut s = PhaseSequence::new(r.phases, r.convention)?;
        s.layout = r.layout;
        Ok(s)
    }
}

impl PhaseSequence {
    pub fn new(phases: Vec<f64>, convention: Convention) -> Result<Self> {
        if phases.is_empty() {
            return Err(QsvtError::Domain("a phase sequence needs at least one phase".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(QsvtError::Domain("phases must be finite".into()));
        }
        Ok(PhaseSequence { convention, phases, layout: Layout::Standard })
    }

    /// Polynomial degree of the response.
    pub fn degree(&self) -> usize {
        match self.layout {
            Layout::Standard => self.phases.len() - 1,
            Layout::AmplitudeAmplification => self.phases.len() + 1,
        }
    }

    /// Phases in standard layout, padding interleaved lists.
    pub fn standard_phases(&self) -> Vec<f64> {
        match self.layout {
            Layout::Standard => self.phases.clone(),
            Layout::AmplitudeAmplification => {
                let mut v = Vec::with_capacity(self.phases.len() + 2);
                v.push(0.0);
                v.extend_from_slice(&self.phases);
                v.push(0.0);
                v
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("phase sequences always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_unit_interval(a: f64) -> Result<f64> {
    if !a.is_finite() || a.abs() > 1.0 + DOMAIN_SLACK {
        return Err(QsvtError::Domain(format!("signal value {a} outside [-1, 1]")));
    }
    Ok(a.clamp(-1.0, 1.0))
}

/// Signal operator for input `a` (an angle for `Wz`).
pub fn signal_operator(a: f64, convention: Convention) -> Result<Su2Matrix> {
    let c = |x: f64| Complex64::new(x, 0.0);
    match convention.signal {
        SignalKind::Wx => {
            let a = check_unit_interval(a)?;
            let s = (1.0 - a * a).sqrt();
            Ok(Su2Matrix::new(c(a), I * s, I * s, c(a)))
        }
        SignalKind::Reflection => {
            let a = check_unit_interval(a)?;
            let s = (1.0 - a * a).sqrt();
            Ok(Su2Matrix::new(c(a), c(s), c(s), c(-a)))
        }
        SignalKind::Wz => {
            if !a.is_finite() {
                return Err(QsvtError::Domain("angle must be finite".into()));
            }
            let e = Complex64::from_polar(1.0, a / 2.0);
            Ok(Su2Matrix::new(e, c(0.0), c(0.0), e.conj()))
        }
    }
}

/// Signal-processing rotation by `phi`.
pub fn processing_operator(phi: f64, convention: Convention) -> Su2Matrix {
    let zero = Complex64::new(0.0, 0.0);
    match convention.processing {
        ProcessingKind::Sz => {
            let e = Complex64::from_polar(1.0, phi);
            Su2Matrix::new(e, zero, zero, e.conj())
        }
        ProcessingKind::Sx => {
            let (s, c) = phi.sin_cos();
            Su2Matrix::new(Complex64::new(c, 0.0), I * s, I * s, Complex64::new(c, 0.0))
        }
    }
}

/// Full product `S(phi_0) W S(phi_1) ... W S(phi_d)` at input `a`.
pub fn evaluate_sequence(seq: &PhaseSequence, a: f64) -> Result<Su2Matrix> {
    let w = signal_operator(a, seq.convention)?;
    let phases = seq.standard_phases();
    let mut u = processing_operator(phases[0], seq.convention);
    for &phi in &phases[1..] {
        u = u * w * processing_operator(phi, seq.convention);
    }
    Ok(u)
}

/// Reads the response matrix element in the given basis.
pub fn readout(u: &Su2Matrix, basis: Basis) -> Complex64 {
    match basis {
        Basis::ZeroZero => u[(0, 0)],
        Basis::PlusPlus => (u[(0, 0)] + u[(0, 1)] + u[(1, 0)] + u[(1, 1)]) * 0.5,
    }
}

/// Response polynomial value at `a`.
pub fn response(seq: &PhaseSequence, a: f64) -> Result<Complex64> {
    Ok(readout(&evaluate_sequence(seq, a)?, seq.convention.basis))
}

/// Response values over a grid of inputs.
pub fn response_curve(seq: &PhaseSequence, grid: &[f64]) -> Result<Vec<(f64, Complex64)>> {
    grid.iter().map(|&a| Ok((a, response(seq, a)?))).collect()
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn wx_to_reflection(phases: &[f64]) -> Vec<f64> {
    let d = phases.len() - 1;
    let mut out = phases.to_vec();
    if d == 0 {
        return out;
    }
    out[0] += (2.0 * d as f64 - 1.0) * FRAC_PI_4;
    out[d] -= FRAC_PI_4;
    for p in &mut out[1..d] {
        *p -= FRAC_PI_2;
    }
    out
}

fn reflection_to_wx(phases: &[f64]) -> Vec<f64> {
    let d = phases.len() - 1;
    let mut out = phases.to_vec();
    if d == 0 {
        return out;
    }
    out[0] -= (2.0 * d as f64 - 1.0) * FRAC_PI_4;
    out[d] += FRAC_PI_4;
    for p in &mut out[1..d] {
        *p += FRAC_PI_2;
    }
    out
}

/// Rewrites a phase list for another convention with the same response.
///
/// Supported: `Wx <-> Reflection` in the `00` basis for every degree and in
/// the `++` basis for even degree; `Wx/++ <-> Wz/00`, where the `Wz` input
/// angle `theta` corresponds to `a = cos(theta / 2)`; and compositions of those.
pub fn convert_convention(seq: &PhaseSequence, target: Convention) -> Result<PhaseSequence> {
    if seq.convention == target {
        return Ok(seq.clone());
    }
    let unsupported = || {
        QsvtError::UnsupportedConversion(format!(
            "{} -> {} (degree {})",
            seq.convention,
            target,
            seq.degree()
        ))
    };
    if seq.layout != Layout::Standard {
        return Err(unsupported());
    }
    let d = seq.phases.len() - 1;
    let parity_ok = |basis: Basis| basis == Basis::ZeroZero || d % 2 == 0;

    // Route through Wx. A Wz/00 sequence is the Hadamard conjugate of Wx/++.
    let src = seq.convention;
    let (wx_phases, hub_basis) = match src.signal {
        SignalKind::Wx => (seq.phases.clone(), src.basis),
        SignalKind::Reflection if parity_ok(src.basis) => (reflection_to_wx(&seq.phases), src.basis),
        SignalKind::Wz => (seq.phases.clone(), Basis::PlusPlus),
        _ => return Err(unsupported()),
    };
    let out = match target.signal {
        SignalKind::Wx if hub_basis == target.basis => wx_phases,
        SignalKind::Reflection if hub_basis == target.basis && parity_ok(target.basis) => {
            wx_to_reflection(&wx_phases)
        }
        SignalKind::Wz if hub_basis == Basis::PlusPlus => wx_phases,
        _ => return Err(unsupported()),
    };
    PhaseSequence::new(out, target)
}

/// Chebyshev components of a `Wx` sequence.
///
/// Returns `(p, q)` with `<0|U|0> = sum_k p[k] T_k(a)` and
/// `<0|U|1> = i sqrt(1-a^2) sum_{k>=1} q[k] U_{k-1}(a)`; `q[0]` is always zero.
pub fn chebyshev_components(seq: &PhaseSequence) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if seq.convention.signal != SignalKind::Wx {
        return Err(QsvtError::InvalidConvention("components need a Wx sequence".into()));
    }
    let d = seq.degree();
    let n = d + 1;
    let mut p = vec![Complex64::new(0.0, 0.0); n];
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
        let u = evaluate_sequence(seq, theta.cos())?;
        // <0|U|1> = i sin(theta) Q(cos theta) and sin(theta) U_{k-1}(cos theta) = sin(k theta).
        let qs = u[(0, 1)] / I;
        for k in 0..n {
            let w = if k == 0 { 1.0 } else { 2.0 } / n as f64;
            p[k] += u[(0, 0)] * ((k as f64 * theta).cos() * w);
            if k > 0 {
                q[k] += qs * ((k as f64 * theta).sin() * 2.0 / n as f64);
            }
        }
    }
    Ok((p, q))
}

/// Real Laurent polynomials `F` and `G` in `w = e^{i theta / 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentPair {
    /// Degree bound; coefficient vectors run over powers `-d ..= d`.
    pub degree: usize,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl LaurentPair {
    fn eval(coeffs: &[f64], d: usize, w: Complex64) -> Complex64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| w.powi(i as i32 - d as i32) * c)
            .sum()
    }

    pub fn f_at(&self, w: Complex64) -> Complex64 {
        Self::eval(&self.f, self.degree, w)
    }

    pub fn g_at(&self, w: Complex64) -> Complex64 {
        Self::eval(&self.g, self.degree, w)
    }

    /// Coefficient of `w^k` in `F`.
    pub fn f_coeff(&self, k: i64) -> f64 {
        self.f[(k + self.degree as i64) as usize]
    }

    pub fn g_coeff(&self, k: i64) -> f64 {
        self.g[(k + self.degree as i64) as usize]
    }

    /// Largest `|F(w)F(1/w) + G(w)G(1/w) - 1|` over `samples` points of the unit circle.
    pub fn unitarity_defect(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|j| {
                let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / samples as f64);
                let wi = w.inv();
                (self.f_at(w) * self.f_at(wi) + self.g_at(w) * self.g_at(wi) - 1.0).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Maps Chebyshev components `(p, q)` of a `Wx` sequence to the Laurent pair
/// of the equivalent `Wz` sequence.
///
/// `p` and `q` must share a length `d + 1`; `q[0]` must vanish, `p` must have
/// the parity of `d` and `q` the opposite index parity of `U_{k-1}`.
pub fn laurent_from_pq(p: &[Complex64], q: &[Complex64]) -> Result<LaurentPair> {
    if p.is_empty() || p.len() != q.len() {
        return Err(QsvtError::Dimension("p and q need equal, non-zero length".into()));
    }
    let d = p.len() - 1;
    let tol = 1e-9;
    if q[0].norm() > tol {
        return Err(QsvtError::Parity("q[0] must be zero".into()));
    }
    for k in 0..=d {
        if (k % 2) != (d % 2) && (p[k].norm() > tol || q[k].norm() > tol) {
            return Err(QsvtError::Parity(format!(
                "coefficient {k} breaks the parity of degree {d}"
            )));
        }
    }
    let mut f = vec![0.0; 2 * d + 1];
    let mut g = vec![0.0; 2 * d + 1];
    // Off-parity inputs passed the tolerance check; leave them exactly zero.
    if d % 2 == 0 {
        f[d] = p[0].re;
        g[d] = p[0].im;
    }
    for k in (1..=d).filter(|k| k % 2 == d % 2) {
        f[d + k] = 0.5 * (p[k] + q[k]).re;
        f[d - k] = 0.5 * (p[k] - q[k]).re;
        g[d + k] = 0.5 * (p[k] - q[k]).im;
        g[d - k] = 0.5 * (p[k] + q[k]).im;
    }
    Ok(LaurentPair { degree: d, f, g })
}
