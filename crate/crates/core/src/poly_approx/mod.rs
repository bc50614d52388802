//! Chebyshev-basis polynomials and the certified approximation families
//! used by the algorithms.

mod families;
mod special;

pub use families::*;
pub use special::{bessel_j, solve_truncation, TruncationSpec};

use serde::{Deserialize, Serialize};

use crate::error::{QsvtError, Result};
use crate::qsp_core::linspace;

/// Number of equally spaced points used to certify bounds on `[-1, 1]`.
pub const CERT_GRID: usize = 4096;

/// Parity class of a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    /// Parity of a given degree.
    pub fn of_degree(d: usize) -> Parity {
        if d % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn allows(self, k: usize) -> bool {
        match self {
            Parity::Even => k % 2 == 0,
            Parity::Odd => k % 2 == 1,
            Parity::None => true,
        }
    }
}

#[derive(Deserialize)]
struct RawPoly {
    parity: Parity,
    coeffs: Vec<f64>,
}

/// Real polynomial `sum_k coeffs[k] T_k(x)` with a declared parity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoly")]
pub struct ChebyshevPoly {
    parity: Parity,
    coeffs: Vec<f64>,
}

impl TryFrom<RawPoly> for ChebyshevPoly {
    type Error = QsvtError;
    fn try_from(r: RawPoly) -> Result<Self> {
        ChebyshevPoly::new(r.coeffs, r.parity)
    }
}

impl ChebyshevPoly {
    /// Wraps coefficients, rejecting any that contradict `parity`.
    pub fn new(coeffs: Vec<f64>, parity: Parity) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(QsvtError::Domain("coefficients must be finite".into()));
        }
        if let Some(k) = (0..coeffs.len()).find(|&k| !parity.allows(k) && coeffs[k] != 0.0) {
            return Err(QsvtError::Parity(format!(
                "coefficient {k} is non-zero for a {parity:?} polynomial"
            )));
        }
        let mut p = ChebyshevPoly { parity, coeffs };
        p.trim();
        Ok(p)
    }

    /// Zeroes the coefficients that do not match `parity`.
    pub fn projected(mut coeffs: Vec<f64>, parity: Parity) -> Self {
        for (k, c) in coeffs.iter_mut().enumerate() {
            if !parity.allows(k) {
                *c = 0.0;
            }
        }
        let mut p = ChebyshevPoly { parity, coeffs };
        p.trim();
        p
    }

    /// The zero polynomial of the given parity.
    pub fn zero(parity: Parity) -> Self {
        ChebyshevPoly { parity, coeffs: vec![0.0] }
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = c + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    pub fn scaled(&self, s: f64) -> Self {
        ChebyshevPoly::projected(self.coeffs.iter().map(|c| c * s).collect(), self.parity)
    }

    /// `p(-x)`.
    pub fn reflected(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
            .collect();
        ChebyshevPoly::projected(c, self.parity)
    }

    fn join_parity(a: Parity, b: Parity, product: bool) -> Parity {
        match (a, b) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (x, y) if product => {
                if x == y {
                    Parity::Even
                } else {
                    Parity::Odd
                }
            }
            (x, y) if x == y => x,
            _ => Parity::None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + other.coeffs.get(k).unwrap_or(&0.0))
            .collect();
        ChebyshevPoly::projected(c, Self::join_parity(self.parity, other.parity, false))
    }

    /// Adds a constant.
    pub fn shifted(&self, c0: f64) -> Self {
        let mut c = self.coeffs.clone();
        c[0] += c0;
        let parity = if self.parity == Parity::Odd && c0 != 0.0 { Parity::None } else { self.parity };
        ChebyshevPoly::projected(c, parity)
    }

    /// Product using `T_m T_n = (T_{m+n} + T_{|m-n|}) / 2`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (m, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (n, &b) in other.coeffs.iter().enumerate() {
                let h = 0.5 * a * b;
                c[m + n] += h;
                c[m.abs_diff(n)] += h;
            }
        }
        ChebyshevPoly::projected(c, Self::join_parity(self.parity, other.parity, true))
    }

    /// Keeps only terms up to degree `n`.
    pub fn truncated(&self, n: usize) -> Self {
        let c = self.coeffs[..self.coeffs.len().min(n + 1)].to_vec();
        ChebyshevPoly::projected(c, self.parity)
    }

    /// Largest `|p(x)|` over an equispaced grid of `n` points on `[-1, 1]`.
    pub fn sup_on_grid(&self, n: usize) -> f64 {
        linspace(-1.0, 1.0, n).into_iter().map(|x| self.eval(x).abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polynomials always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Chebyshev interpolation coefficients of `f` at `n + 1` first-kind nodes.
pub fn chebyshev_interpolate<F: Fn(f64) -> f64>(f: F, n: usize) -> Vec<f64> {
    let m = n + 1;
    let period = 4 * m;
    let table: Vec<f64> = (0..period)
        .map(|i| (std::f64::consts::PI * i as f64 / (2 * m) as f64).cos())
        .collect();
    let values: Vec<f64> = (0..m).map(|j| f(table[2 * j + 1])).collect();
    (0..m)
        .map(|k| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * table[(k * (2 * j + 1)) % period])
                .sum();
            if k == 0 {
                s / m as f64
            } else {
                2.0 * s / m as f64
            }
        })
        .collect()
}

/// A fixed-degree fit together with its grid residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub poly: ChebyshevPoly,
    /// Largest deviation from the target on the certification grid.
    pub residual: f64,
}

/// Near-best degree-`d` fit of `f` with the given parity, obtained by
/// truncating a much finer interpolant.
pub fn chebyshev_fit<F: Fn(f64) -> f64>(f: F, d: usize, parity: Parity) -> ChebyshevPoly {
    let fine = chebyshev_interpolate(&f, (8 * (d + 1)).max(1024));
    ChebyshevPoly::projected(fine[..=d].to_vec(), parity)
}

/// Largest deviation over the grid plus the origin, where the even targets have their cusps.
pub(crate) fn grid_residual<F: Fn(f64) -> f64>(p: &ChebyshevPoly, f: F) -> f64 {
    linspace(-1.0, 1.0, CERT_GRID)
        .into_iter()
        .chain(std::iter::once(0.0))
        .map(|x| (p.eval(x) - f(x)).abs())
        .fold(0.0, f64::max)
}

/// Scales `p` down so its grid supremum is at most `bound`; never scales up.
pub fn normalize_to(p: &ChebyshevPoly, bound: f64) -> ChebyshevPoly {
    let sup = p.sup_on_grid(CERT_GRID);
    if sup > bound {
        p.scaled(bound / sup)
    } else {
        p.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clenshaw_matches_definition() {
        let p = ChebyshevPoly::new(vec![0.5, 0.0, -0.25, 0.0, 0.125], Parity::Even).unwrap();
        for &x in &[-0.9f64, -0.3, 0.0, 0.4, 1.0] {
            let t = x.acos();
            let want = 0.5 - 0.25 * (2.0 * t).cos() + 0.125 * (4.0 * t).cos();
            assert!((p.eval(x) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn parity_mismatch_rejected() {
        assert!(ChebyshevPoly::new(vec![0.0, 1.0, 0.1], Parity::Odd).is_err());
    }

    #[test]
    fn product_matches_pointwise() {
        let a = ChebyshevPoly::new(vec![0.0, 0.3, 0.0, -0.2], Parity::Odd).unwrap();
        let b = ChebyshevPoly::new(vec![0.1, 0.0, 0.7], Parity::Even).unwrap();
        let c = a.mul(&b);
        assert_eq!(c.parity(), Parity::Odd);
        for &x in &[-0.8, 0.1, 0.6] {
            assert!((c.eval(x) - a.eval(x) * b.eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let c = chebyshev_interpolate(|x| 4.0 * x * x * x - 3.0 * x, 5);
        let want = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
