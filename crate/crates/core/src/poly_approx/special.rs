use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{QsvtError, Result};

/// Bessel function of the first kind `J_n(t)` for integer order.
///
/// Uses the trapezoid rule on the periodic integral
/// `(1/2pi) int_0^{2pi} cos(n tau - t sin tau) dtau`, which converges
/// geometrically once the node count exceeds `|n| + |t|`.
pub fn bessel_j(n: i64, t: f64) -> f64 {
    let m = 2 * (n.unsigned_abs() as usize + t.abs().ceil() as usize) + 64;
    let h = 2.0 * PI / m as f64;
    let s: f64 = (0..m)
        .map(|j| {
            let tau = j as f64 * h;
            (n as f64 * tau - t * tau.sin()).cos()
        })
        .sum();
    s / m as f64
}

/// Solution of the implicit truncation equation together with `k'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// `e/2 |t|`
    pub t_arg: f64,
    /// `5/4 epsilon`
    pub eps_arg: f64,
    /// `r` with `(t_arg / r)^r = eps_arg` and `r > t_arg`.
    pub r_value: f64,
    pub k_prime: usize,
}

/// Root of `(t/r)^r = eps` on `(t, inf)`.
pub fn solve_r(t: f64, eps: f64) -> Result<f64> {
    if !(t > 0.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(QsvtError::Domain(format!("need t > 0 and 0 < eps < 1 (t={t}, eps={eps})")));
    }
    let target = (1.0 / eps).ln();
    let h = |r: f64| r * (r / t).ln() - target;
    let mut lo = t;
    let mut hi = 2.0 * t + target;
    let mut grow = 0;
    while h(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 || !hi.is_finite() {
            return Err(QsvtError::Convergence("could not bracket r(t, eps)".into()));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    if (hi - lo) > 1e-12 * r {
        return Err(QsvtError::Convergence("bisection stalled".into()));
    }
    Ok(r)
}

/// Truncation index for Jacobi-Anger expansions at time `t` and error `epsilon`.
pub fn solve_truncation(t: f64, epsilon: f64) -> Result<TruncationSpec> {
    if !(epsilon > 0.0 && epsilon < 1.0 / E) {
        return Err(QsvtError::Domain(format!("epsilon {epsilon} outside (0, 1/e)")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(QsvtError::Domain(format!("time {t} must be positive")));
    }
    let t_arg = E / 2.0 * t;
    let eps_arg = 1.25 * epsilon;
    let r_value = solve_r(t_arg, eps_arg)?;
    Ok(TruncationSpec { t_arg, eps_arg, r_value, k_prime: (0.5 * r_value).floor() as usize })
}
