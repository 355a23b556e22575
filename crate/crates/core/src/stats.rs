//! Small estimator helpers shared by the Monte Carlo routines.

use serde::{Deserialize, Serialize};

/// A proportion estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { estimate: value, stderr: 0.0 }
    }

    pub fn binomial(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self { estimate: f64::NAN, stderr: f64::NAN };
        }
        let p = successes as f64 / trials as f64;
        Self { estimate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt() }
    }

    /// Scales both the estimate and its error by a constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        Self { estimate: self.estimate * factor, stderr: self.stderr * factor.abs() }
    }
}

/// Absolute z-score of the difference of two independent estimates.
/// Two exact, equal values give 0; exact but different values give infinity.
pub fn z_score(a: Estimate, b: Estimate) -> f64 {
    let diff = (a.estimate - b.estimate).abs();
    let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        diff / se
    }
}
