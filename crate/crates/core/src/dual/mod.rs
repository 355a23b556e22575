//! Dual set-valued processes and the shared interface used by the
//! verification and estimation routines.

pub mod monotone;
pub mod voter;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lattice::{Cylinder, RingConfig};
use crate::rng::StepDraws;
use crate::{Error, Result};

pub use monotone::{
    check_monotone_class, d_monotone, h_monotone, solve_monotone_dual, step_monotone_dual, CumulantTable, LevelDual,
    MonotoneClassReport, MonotoneDualParams, MonotoneDualState,
};
pub use voter::{
    check_voter_class, d_voter, h_voter, moves_from_patterns, solve_voter_dual, step_voter_dual, MoveProbs,
    OpinionDual, PatternValues, VoterClassReport, VoterDualParams, VoterDualState,
};

/// Which duality function and dual dynamics to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualClass {
    /// `H(x, A) = 1` iff `x(z) = i` on every `A_i`; coalescing branching dual.
    Voter,
    /// `H(x, A) = 1` iff `x(z) <= k` on every `A_k`; nested-chain dual.
    Monotone,
}

impl fmt::Display for DualClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DualClass::Voter => "voter",
            DualClass::Monotone => "monotone",
        })
    }
}

/// Where dual sites live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Line,
    Ring(usize),
}

impl Topology {
    #[inline]
    pub fn wrap(self, site: i64) -> i64 {
        match self {
            Topology::Line => site,
            Topology::Ring(l) => site.rem_euclid(l as i64),
        }
    }
}

/// Read access to a configuration at integer sites.
pub trait Configuration {
    fn state_at(&self, site: i64) -> Result<u8>;
}

impl Configuration for RingConfig {
    fn state_at(&self, site: i64) -> Result<u8> {
        Ok(self.get(site))
    }
}

/// Finite window `x(origin), …, x(origin + len - 1)` of a configuration on
/// the line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineWindow {
    pub origin: i64,
    pub cells: Vec<u8>,
}

impl Configuration for LineWindow {
    fn state_at(&self, site: i64) -> Result<u8> {
        let offset = site - self.origin;
        if offset < 0 || offset >= self.cells.len() as i64 {
            return Err(Error::OutsideWindow(site));
        }
        Ok(self.cells[offset as usize])
    }
}

/// Absorption status of a dual state.
#[derive(Debug, Clone, Copy, PartialEq, Hash, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualStatus {
    Active,
    /// All sets empty; `d = 1` and `H ≡ 1`.
    AbsorbedEmpty,
    /// Opinion sets overlap; `H ≡ 0`.
    AbsorbedConflict,
    /// Only frozen opinions are present; their sites never move.
    Frozen,
}

impl DualStatus {
    pub fn is_absorbing(self) -> bool {
        self != DualStatus::Active
    }
}

/// One named structural check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Failing checks with `required = false` are reported but do not
    /// exclude the kernel from the class.
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: DualClass,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ClassReport {
    pub(crate) fn new(class: DualClass, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed || !c.required);
        Self { class, passed, checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub(crate) fn first_required_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.required && !c.passed)
    }
}

/// A dual chain `ξ` together with its duality function `H` and weight `d`.
pub trait DualProcess: Sync {
    type State: Clone + Send + Sync + fmt::Debug;

    fn class(&self) -> DualClass;

    /// Alphabet size `M` of the primal process.
    fn states(&self) -> usize;

    /// `d(A)`.
    fn weight(&self, state: &Self::State) -> f64;

    /// `H(x, A)`.
    fn duality(&self, x: &dyn Configuration, state: &Self::State) -> Result<bool>;

    fn status(&self, state: &Self::State) -> DualStatus;

    /// One step of `ξ` (absorbing states are returned unchanged).
    fn step(&self, state: &Self::State, draws: &mut StepDraws, topology: Topology) -> Self::State;

    /// The state with every site reduced onto `topology`.
    fn place(&self, state: &Self::State, topology: Topology) -> Self::State;

    /// The event `{x : H(x, A) = 1}` on a ring of the given length, or
    /// `None` when it is empty.
    fn cylinder(&self, state: &Self::State, length: usize) -> Option<Cylinder>;
}

/// Sampling table over the positive-probability outcomes of a move
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct OutcomeSampler<T> {
    cumulative: Vec<f64>,
    outcomes: Vec<T>,
}

impl<T: Copy> OutcomeSampler<T> {
    pub(crate) fn new(weighted: impl IntoIterator<Item = (f64, T)>) -> Self {
        let mut cumulative = Vec::new();
        let mut outcomes = Vec::new();
        let mut acc = 0.0;
        for (w, o) in weighted {
            if w > 0.0 {
                acc += w;
                cumulative.push(acc);
                outcomes.push(o);
            }
        }
        Self { cumulative, outcomes }
    }

    #[inline]
    pub(crate) fn draw(&self, u: f64) -> T {
        let total = *self.cumulative.last().expect("move distribution has no mass");
        let target = u * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        self.outcomes[idx.min(self.outcomes.len() - 1)]
    }
}
