//! Dual processes for multi-state nearest-neighbour probabilistic cellular
//! automata (PCA).
//!
//! A PCA on `{1..M}^Z` updates every site synchronously and independently
//! given the current configuration, with probability `p[i][j][k][m]` of moving
//! to state `m` when the left neighbour, the site itself and the right
//! neighbour are in states `i`, `j`, `k`. This crate
//!
//! * builds and validates such kernels ([`kernel`]), including the noisy voter,
//!   Domany-Kinzel, competition and convex-`g` families;
//! * simulates them forward on a periodic ring ([`lattice`]);
//! * solves for `(H, d)`-duals in the voter class ([`dual::voter`]) and the
//!   monotone class ([`dual::monotone`]) and evolves the dual set processes;
//! * verifies the duality identity `PH = H(DQ)^T` exhaustively on small rings
//!   ([`duality`]);
//! * evaluates sufficient ergodicity conditions and estimates equilibrium
//!   cylinder probabilities through absorption of the killed dual chain
//!   ([`ergodicity`]).
//!
//! States are labelled `1..=M` throughout the public API.

pub mod dual;
pub mod duality;
pub mod ergodicity;
mod error;
pub mod kernel;
pub mod lattice;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use kernel::{Kernel, ModelSpec, StateRelabeling, ValidationReport};
pub use lattice::{Cylinder, RingConfig};
pub use rng::RandomStream;

/// Tolerance for probability tables: clamping window and row-sum slack.
pub const PROB_TOL: f64 = 1e-12;

/// Tolerance for the structural class checks (pattern constancy and the
/// solvability inequalities) applied to user-supplied kernels.
pub const CLASS_TOL: f64 = 1e-9;
