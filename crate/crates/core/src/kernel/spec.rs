//! JSON model specifications.
//!
//! ```json
//! {"family": "dk", "a": [0.1, 0.3, 0.6]}
//! {"family": "noisy_voter", "M": 3, "q": [0.05, 0.05, 0.0], "alpha": 0.3, "beta": 0.3, "gamma": 0.3}
//! {"family": "competition", "M": 2, "p": [0.05, 0.05], "alpha": [0.7], "beta": [0.7]}
//! {"family": "convex_g", "M": 2, "g": [[1.0, 0.25, 0.0]]}
//! {"family": "raw", "M": 2, "p": [ ... 16 entries, row-major over (i, j, k, m) ... ]}
//! ```

use serde::{Deserialize, Serialize};

use super::{competition_kernel, convex_g_kernel, domany_kinzel_kernel, noisy_voter_kernel, Kernel};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Dk {
        a: [f64; 3],
    },
    NoisyVoter {
        #[serde(rename = "M")]
        states: usize,
        q: Vec<f64>,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    Competition {
        #[serde(rename = "M")]
        states: usize,
        p: Vec<f64>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    },
    ConvexG {
        #[serde(rename = "M")]
        states: usize,
        g: Vec<Vec<f64>>,
    },
    Raw {
        #[serde(rename = "M")]
        states: usize,
        p: Vec<f64>,
    },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Dk { .. } => "dk",
            ModelSpec::NoisyVoter { .. } => "noisy_voter",
            ModelSpec::Competition { .. } => "competition",
            ModelSpec::ConvexG { .. } => "convex_g",
            ModelSpec::Raw { .. } => "raw",
        }
    }

    pub fn build(&self) -> Result<Kernel> {
        match self {
            ModelSpec::Dk { a } => domany_kinzel_kernel(a[0], a[1], a[2]),
            ModelSpec::NoisyVoter { states, q, alpha, beta, gamma } => {
                noisy_voter_kernel(*states, q, *alpha, *beta, *gamma)
            }
            ModelSpec::Competition { states, p, alpha, beta } => competition_kernel(*states, p, alpha, beta),
            ModelSpec::ConvexG { states, g } => convex_g_kernel(*states, g),
            ModelSpec::Raw { states, p } => Kernel::from_table(*states, p.clone()),
        }
    }
}
