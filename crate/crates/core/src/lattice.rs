//! Forward simulation of a PCA on a periodic ring `Z_L`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::Kernel;
use crate::rng::{Channel, RandomStream, StepDraws};
use crate::stats::Estimate;
use crate::{Error, Result};

/// A configuration on a ring of length `L >= 3`, states `1..=M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRing")]
pub struct RingConfig {
    states: usize,
    cells: Vec<u8>,
}

#[derive(Deserialize)]
struct RawRing {
    states: usize,
    cells: Vec<u8>,
}

impl TryFrom<RawRing> for RingConfig {
    type Error = Error;

    fn try_from(raw: RawRing) -> Result<Self> {
        Self::new(raw.states, raw.cells)
    }
}

impl RingConfig {
    pub fn new(states: usize, cells: Vec<u8>) -> Result<Self> {
        if cells.len() < 3 {
            return Err(Error::InvalidParameters(format!("ring length {} is below 3", cells.len())));
        }
        if let Some(bad) = cells.iter().find(|&&c| c == 0 || c as usize > states) {
            return Err(Error::InvalidParameters(format!("cell state {bad} outside 1..={states}")));
        }
        Ok(Self { states, cells })
    }

    pub fn uniform_state(states: usize, length: usize, state: u8) -> Result<Self> {
        Self::new(states, vec![state; length])
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// State at `site`, reduced modulo `L`.
    #[inline]
    pub fn get(&self, site: i64) -> u8 {
        self.cells[site.rem_euclid(self.cells.len() as i64) as usize]
    }

    pub fn satisfies(&self, cylinder: &Cylinder) -> bool {
        cylinder.constraints.iter().all(|c| c.values.contains(&self.get(c.site)))
    }
}

/// One constraint `x(site) ∈ values` of a cylinder event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteConstraint {
    pub site: i64,
    pub values: Vec<u8>,
}

/// Finite-coordinate event `{x : x(z) ∈ V_z for every constraint}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawCylinder")]
pub struct Cylinder {
    constraints: Vec<SiteConstraint>,
}

#[derive(Deserialize)]
struct RawCylinder {
    constraints: Vec<SiteConstraint>,
}

impl TryFrom<RawCylinder> for Cylinder {
    type Error = Error;

    fn try_from(raw: RawCylinder) -> Result<Self> {
        Self::new(raw.constraints)
    }
}

impl Cylinder {
    pub fn new(constraints: Vec<SiteConstraint>) -> Result<Self> {
        for (n, c) in constraints.iter().enumerate() {
            if c.values.is_empty() {
                return Err(Error::InvalidParameters(format!("site {} has an empty value set", c.site)));
            }
            if constraints[..n].iter().any(|o| o.site == c.site) {
                return Err(Error::InvalidParameters(format!("site {} constrained twice", c.site)));
            }
        }
        Ok(Self { constraints })
    }

    /// The always-true cylinder.
    pub fn full() -> Self {
        Self::default()
    }

    pub fn constraints(&self) -> &[SiteConstraint] {
        &self.constraints
    }
}

/// How each replica's initial configuration is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    Fixed(RingConfig),
    /// Independent sites with the given distribution over `1..=M`.
    Product {
        length: usize,
        weights: Vec<f64>,
    },
}

impl InitialCondition {
    pub fn uniform(states: usize, length: usize) -> Self {
        Self::Product { length, weights: vec![1.0 / states as f64; states] }
    }

    pub fn length(&self) -> usize {
        match self {
            InitialCondition::Fixed(c) => c.len(),
            InitialCondition::Product { length, .. } => *length,
        }
    }

    fn check(&self, states: usize) -> Result<()> {
        match self {
            InitialCondition::Fixed(c) if c.states() != states => Err(Error::InvalidParameters(format!(
                "initial configuration has {} states, kernel has {states}",
                c.states()
            ))),
            InitialCondition::Fixed(_) => Ok(()),
            InitialCondition::Product { length, weights } => {
                if *length < 3 {
                    return Err(Error::InvalidParameters(format!("ring length {length} is below 3")));
                }
                if weights.len() != states || weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::InvalidParameters(format!(
                        "product measure needs {states} nonnegative weights, got {weights:?}"
                    )));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameters(format!("product weights sum to {total}")));
                }
                Ok(())
            }
        }
    }

    /// Initial configuration of `replica`.
    pub fn sample(&self, states: usize, stream: &RandomStream, replica: u64) -> RingConfig {
        match self {
            InitialCondition::Fixed(c) => c.clone(),
            InitialCondition::Product { length, weights } => {
                let draws = stream.replica(Channel::Initial, replica).step(0);
                let cells = (0..*length)
                    .map(|z| {
                        let u = draws.at(z as u64);
                        let mut acc = 0.0;
                        for (m, w) in weights.iter().enumerate() {
                            acc += w;
                            if u < acc {
                                return m as u8 + 1;
                            }
                        }
                        // rounding at the top of the CDF: last state with positive weight
                        weights.iter().rposition(|&w| w > 0.0).unwrap_or(states - 1) as u8 + 1
                    })
                    .collect();
                RingConfig { states, cells }
            }
        }
    }
}

#[inline]
fn step_into(kernel: &Kernel, prev: &[u8], next: &mut [u8], draws: &StepDraws) {
    let n = prev.len();
    let m = kernel.states();
    let (mm, m1) = (m * m, m);
    let offset = mm + m1 + 1;
    for z in 0..n {
        let left = prev[if z == 0 { n - 1 } else { z - 1 }] as usize;
        let centre = prev[z] as usize;
        let right = prev[if z + 1 == n { 0 } else { z + 1 }] as usize;
        let row = left * mm + centre * m1 + right - offset;
        next[z] = kernel.sample_row(row, draws.at(z as u64));
    }
}

/// One synchronous update: site `z` draws from row
/// `p[c(z-1)][c(z)][c(z+1)][·]` of the pre-update configuration using the
/// uniform at index `z` of `draws`.
pub fn step_ring(config: &RingConfig, kernel: &Kernel, draws: &StepDraws) -> RingConfig {
    assert_eq!(config.states, kernel.states(), "kernel and configuration alphabets differ");
    let mut next = vec![0; config.len()];
    step_into(kernel, &config.cells, &mut next, draws);
    RingConfig { states: config.states, cells: next }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub steps: u64,
    pub replicas: u64,
    pub seed: u64,
    /// Keep a snapshot every this many steps (step 0 included).
    pub snapshot_every: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub config: RingConfig,
}

/// Final configurations of independent replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub states: usize,
    pub length: usize,
    pub steps: u64,
    pub finals: Vec<RingConfig>,
    /// Per replica, empty unless snapshots were requested.
    pub snapshots: Vec<Vec<Snapshot>>,
}

impl SampleSet {
    pub fn replicas(&self) -> usize {
        self.finals.len()
    }
}

/// Runs `replicas` independent trajectories for `steps` synchronous updates.
/// Replica `r` at step `t` uses the stream keyed `(seed, r, t)`, so the
/// output does not depend on the number of worker threads.
pub fn simulate(init: &InitialCondition, kernel: &Kernel, config: &SimulationConfig) -> Result<SampleSet> {
    if config.replicas == 0 {
        return Err(Error::InvalidParameters("replicas must be at least 1".into()));
    }
    if config.snapshot_every == Some(0) {
        return Err(Error::InvalidParameters("snapshot interval must be positive".into()));
    }
    let states = kernel.states();
    init.check(states)?;
    let stream = RandomStream::new(config.seed);
    let runs: Vec<(RingConfig, Vec<Snapshot>)> = (0..config.replicas)
        .into_par_iter()
        .map(|replica| {
            let start = init.sample(states, &stream, replica);
            let forward = stream.replica(Channel::Forward, replica);
            let mut snapshots = Vec::new();
            let mut cur = start.cells;
            let mut next = vec![0u8; cur.len()];
            for t in 0..config.steps {
                if let Some(every) = config.snapshot_every {
                    if t % every == 0 {
                        snapshots.push(Snapshot { step: t, config: RingConfig { states, cells: cur.clone() } });
                    }
                }
                step_into(kernel, &cur, &mut next, &forward.step(t));
                std::mem::swap(&mut cur, &mut next);
            }
            if let Some(every) = config.snapshot_every {
                if config.steps.is_multiple_of(every) {
                    snapshots.push(Snapshot { step: config.steps, config: RingConfig { states, cells: cur.clone() } });
                }
            }
            (RingConfig { states, cells: cur }, snapshots)
        })
        .collect();
    let (finals, snapshots) = runs.into_iter().unzip();
    Ok(SampleSet { states, length: init.length(), steps: config.steps, finals, snapshots })
}

/// Fraction of replicas whose final configuration lies in the cylinder,
/// with its binomial standard error.
pub fn empirical_cylinder_prob(samples: &SampleSet, cylinder: &Cylinder) -> Result<Estimate> {
    if samples.finals.is_empty() {
        return Err(Error::EmptySamples);
    }
    let hits = samples.finals.iter().filter(|c| c.satisfies(cylinder)).count();
    Ok(Estimate::binomial(hits as u64, samples.finals.len() as u64))
}
