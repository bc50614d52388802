//! End-to-end simulations: search, eigenvalue thresholding, phase
//! estimation, order finding, Hamiltonian simulation and matrix inversion.
//!
//! Every stochastic routine takes a [`Mode`]. In exact mode decisions follow
//! the more likely outcome of each measurement; in sampled mode outcomes are
//! drawn from a `ChaCha8Rng` seeded with the given value, so runs replay
//! bit for bit.

mod phase_estimation;
mod search;
mod simulation;
mod threshold;

pub use phase_estimation::*;
pub use search::*;
pub use simulation::*;
pub use threshold::*;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::block_encoding::ComplexVector;
use crate::error::{QsvtError, Result};

/// How measurements are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Take the more likely outcome; no randomness.
    Exact,
    /// Sample outcomes from a generator seeded with this value.
    Sampled(u64),
}

impl Mode {
    pub fn seed(self) -> Option<u64> {
        match self {
            Mode::Exact => None,
            Mode::Sampled(s) => Some(s),
        }
    }

    pub(crate) fn rng(self) -> Option<ChaCha8Rng> {
        self.seed().map(ChaCha8Rng::seed_from_u64)
    }
}

/// Record of one algorithm run with a full parameter echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub params: BTreeMap<String, Value>,
    /// `None` in exact mode.
    pub seed: Option<u64>,
    pub shots: Vec<u64>,
    pub decision: Value,
    /// Applications of the block encoding (or of the controlled oracle).
    pub queries: u64,
}

impl RunRecord {
    pub(crate) fn new(algorithm: &str, mode: Mode) -> Self {
        RunRecord {
            algorithm: algorithm.to_string(),
            params: BTreeMap::new(),
            seed: mode.seed(),
            shots: Vec::new(),
            decision: Value::Null,
            queries: 0,
        }
    }

    pub(crate) fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.insert(key.to_string(), v.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Number of samples that separates Bernoulli means `a < b` with error at most `delta`:
/// `ceil(2 ln(1/delta) / (b - a)^2)`.
pub fn bernoulli_sample_count(a_mean: f64, b_mean: f64, delta: f64) -> Result<u64> {
    if !(0.0 <= a_mean && a_mean < b_mean && b_mean <= 1.0) {
        return Err(QsvtError::Domain(format!("need 0 <= a < b <= 1, got a={a_mean}, b={b_mean}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(QsvtError::Domain(format!("delta {delta} outside (0, 1)")));
    }
    let x = 2.0 * (1.0 / delta).ln() / (b_mean - a_mean).powi(2);
    // Absorb rounding so that exact integers are not bumped up.
    Ok((x - 1e-9).ceil().max(1.0) as u64)
}

/// Decides between two Bernoulli means from a sample by the nearer mean.
pub fn bernoulli_decide(successes: u64, trials: u64, a_mean: f64, b_mean: f64) -> bool {
    let f = successes as f64 / trials as f64;
    (f - b_mean).abs() < (f - a_mean).abs()
}

fn check_unit_state(psi: &ComplexVector) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(QsvtError::NotUnit { norm });
    }
    Ok(())
}

/// Outcome probabilities after a controlled transform `M`, a Hadamard and a
/// computational-basis measurement: the `+` branch keeps `(psi + M psi) / 2`.
pub(crate) fn hadamard_test_plus(psi: &ComplexVector, m_psi: &ComplexVector) -> f64 {
    let num = (psi + m_psi).norm_squared();
    let den = 2.0 * (psi.norm_squared() + m_psi.norm_squared());
    (num / den).clamp(0.0, 1.0)
}
