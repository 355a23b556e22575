//! Voter-class duality.
//!
//! For opinions `m = 1..M-1` (state `M` is the background) the dual is a
//! tuple of finite sets `A_1..A_{M-1}`; `H(x, A) = 1` iff `x(z) = i` for
//! every `z ∈ A_i`, and `d(A) = Π d_i^{|A_i|}`. Each singleton `{z} ⊆ A_m`
//! is independently replaced by a block `B_m(z) ⊆ {z-1, z, z+1}` drawn from
//! eight move probabilities `π_m`, and `A_m` becomes the union of its blocks.
//! Overlapping sets are absorbing.
//!
//! A kernel admits this dual iff, for each `m`, `p[i][j][k][m]` depends only
//! on which of the three neighbourhood positions hold `m` (eight pattern
//! values `p_m, p_mkk, p_kmk, p_kkm, p_mmk, p_mkm, p_kmm, p_mmm`), and these
//! values satisfy seven ordering inequalities that keep `π_m` nonnegative.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Check, ClassReport, Configuration, DualClass, DualProcess, DualStatus, OutcomeSampler, Topology};
use crate::duality::EnumerableDual;
use crate::kernel::Kernel;
use crate::lattice::{Cylinder, SiteConstraint};
use crate::rng::StepDraws;
use crate::{Error, Result, CLASS_TOL};

/// Position patterns of opinion `m` in the neighbourhood, in the order
/// `∅, ℓ, c, r, ℓc, ℓr, cr, ℓcr`.
pub const PATTERNS: [&str; 8] = ["none", "l", "c", "r", "lc", "lr", "cr", "lcr"];

/// Block offsets relative to `z` for each pattern.
const BLOCKS: [&[i64]; 8] = [&[], &[-1], &[0], &[1], &[-1, 0], &[-1, 1], &[0, 1], &[-1, 0, 1]];

#[inline]
fn pattern_index(left: bool, centre: bool, right: bool) -> usize {
    match (left, centre, right) {
        (false, false, false) => 0,
        (true, false, false) => 1,
        (false, true, false) => 2,
        (false, false, true) => 3,
        (true, true, false) => 4,
        (true, false, true) => 5,
        (false, true, true) => 6,
        (true, true, true) => 7,
    }
}

/// The eight move probabilities of one opinion's singletons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveProbs {
    pub empty: f64,
    pub left: f64,
    pub centre: f64,
    pub right: f64,
    pub left_centre: f64,
    pub left_right: f64,
    pub centre_right: f64,
    pub all: f64,
}

impl MoveProbs {
    pub fn from_array(v: [f64; 8]) -> Self {
        Self {
            empty: v[0],
            left: v[1],
            centre: v[2],
            right: v[3],
            left_centre: v[4],
            left_right: v[5],
            centre_right: v[6],
            all: v[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [self.empty, self.left, self.centre, self.right, self.left_centre, self.left_right, self.centre_right, self.all]
    }

    pub fn sum(&self) -> f64 {
        self.to_array().iter().sum()
    }

    /// Expected block size `E|B_m(z)|`.
    pub fn mean_offspring(&self) -> f64 {
        self.to_array().iter().zip(BLOCKS).map(|(p, b)| p * b.len() as f64).sum()
    }
}

/// Dual parameters for one opinion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionDual {
    pub opinion: u8,
    /// `d_m = p[m][m][m][m]`.
    pub weight: f64,
    pub moves: MoveProbs,
}

/// Solved voter-class dual: weights `d_m` and moves `π_m` for `m = 1..M-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoterDualParams {
    pub states: usize,
    pub opinions: Vec<OpinionDual>,
    /// Opinions whose sites never move.
    pub frozen: Vec<u8>,
    #[serde(skip)]
    samplers: Vec<OutcomeSampler<u8>>,
}

impl VoterDualParams {
    /// Assembles parameters from explicit weights and moves. Used by the
    /// solver and for perturbation experiments.
    pub fn new(states: usize, opinions: Vec<OpinionDual>, frozen: Vec<u8>) -> Result<Self> {
        if opinions.len() + 1 != states {
            return Err(Error::InvalidParameters(format!("{} opinions given for {states} states", opinions.len())));
        }
        for (idx, o) in opinions.iter().enumerate() {
            if o.opinion as usize != idx + 1 {
                return Err(Error::InvalidParameters(format!("opinion {} out of order", o.opinion)));
            }
            if !(o.weight > 0.0 && o.weight <= 1.0) {
                return Err(Error::InvalidParameters(format!("d_{} = {} not in (0, 1]", o.opinion, o.weight)));
            }
            let v = o.moves.to_array();
            if v.iter().any(|p| !(0.0..=1.0).contains(p)) || (o.moves.sum() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameters(format!(
                    "moves of opinion {} are not a probability vector: {v:?}",
                    o.opinion
                )));
            }
        }
        let samplers =
            opinions.iter().map(|o| OutcomeSampler::new(o.moves.to_array().into_iter().zip(0u8..))).collect();
        Ok(Self { states, opinions, frozen, samplers })
    }

    pub fn opinions(&self) -> usize {
        self.states - 1
    }

    pub fn opinion(&self, m: u8) -> &OpinionDual {
        &self.opinions[m as usize - 1]
    }

    /// A dual state from explicit sets `A_1..A_{M-1}` (status computed).
    pub fn state(&self, sets: Vec<BTreeSet<i64>>) -> Result<VoterDualState> {
        if sets.len() != self.opinions() {
            return Err(Error::InvalidParameters(format!("{} sets given, expected {}", sets.len(), self.opinions())));
        }
        Ok(self.classify(sets))
    }

    /// The state with the single site `site` in `A_opinion`.
    pub fn singleton(&self, opinion: u8, site: i64) -> VoterDualState {
        let mut sets = vec![BTreeSet::new(); self.opinions()];
        sets[opinion as usize - 1].insert(site);
        self.classify(sets)
    }

    fn classify(&self, sets: Vec<BTreeSet<i64>>) -> VoterDualState {
        let status = status_of(&sets, &self.frozen);
        VoterDualState { sets, status }
    }
}

fn status_of(sets: &[BTreeSet<i64>], frozen: &[u8]) -> DualStatus {
    for (a, sa) in sets.iter().enumerate() {
        for sb in &sets[a + 1..] {
            if !sa.is_disjoint(sb) {
                return DualStatus::AbsorbedConflict;
            }
        }
    }
    if sets.iter().all(|s| s.is_empty()) {
        return DualStatus::AbsorbedEmpty;
    }
    let only_frozen = sets.iter().enumerate().all(|(m, s)| s.is_empty() || frozen.contains(&(m as u8 + 1)));
    if only_frozen {
        DualStatus::Frozen
    } else {
        DualStatus::Active
    }
}

/// A voter-class dual state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VoterDualState {
    pub sets: Vec<BTreeSet<i64>>,
    pub status: DualStatus,
}

impl VoterDualState {
    pub fn total_size(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().all(|s| s.is_empty())
    }
}

/// Pattern values `p_{·,m}` (class means) for one opinion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternValues {
    pub opinion: u8,
    /// In [`PATTERNS`] order.
    pub values: [f64; 8],
    /// `max - min` within each pattern class.
    pub spread: [f64; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterClassReport {
    #[serde(flatten)]
    pub summary: ClassReport,
    pub patterns: Vec<PatternValues>,
    /// Opinions with `p[m][m][m][m] > 0`.
    pub reachable: Vec<bool>,
    /// The frozen index set: opinions whose dual sites never move.
    pub frozen: Vec<u8>,
}

fn pattern_values(kernel: &Kernel, m: u8) -> PatternValues {
    let w = kernel.states() as u8;
    let mut members: [Vec<f64>; 8] = Default::default();
    for i in 1..=w {
        for j in 1..=w {
            for k in 1..=w {
                members[pattern_index(i == m, j == m, k == m)].push(kernel.p(i, j, k, m));
            }
        }
    }
    let mut values = [0.0; 8];
    let mut spread = [0.0; 8];
    for (idx, vals) in members.iter().enumerate() {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread[idx] = hi - lo;
        values[idx] = if hi == lo { lo } else { vals.iter().sum::<f64>() / vals.len() as f64 };
    }
    PatternValues { opinion: m, values, spread }
}

/// The seven solvability inequalities as `(label, lhs - rhs)`.
fn inequality_slacks(v: &[f64; 8]) -> [(&'static str, f64); 7] {
    let [n, l, c, r, lc, lr, cr, lcr] = *v;
    [
        ("p_mkk >= p_m", l - n),
        ("p_kmk >= p_m", c - n),
        ("p_kkm >= p_m", r - n),
        ("p_mmk >= p_mkk + p_kmk - p_m", lc - (l + c - n)),
        ("p_mkm >= p_mkk + p_kkm - p_m", lr - (l + r - n)),
        ("p_kmm >= p_kmk + p_kkm - p_m", cr - (c + r - n)),
        ("p_mmm + p_mkk + p_kmk + p_kkm >= p_kmm + p_mkm + p_mmk + p_m", (lcr + l + c + r) - (cr + lr + lc + n)),
    ]
}

fn is_frozen(v: &[f64; 8]) -> bool {
    let [n, l, c, r, lc, lr, cr, lcr] = *v;
    [n, l, r, lr].iter().all(|x| x.abs() <= CLASS_TOL) && [c, lc, cr].iter().all(|x| (x - lcr).abs() <= CLASS_TOL)
}

/// Checks pattern constancy, the seven inequalities and reachability of each
/// opinion `m < M`, and reports the frozen opinions.
pub fn check_voter_class(kernel: &Kernel) -> VoterClassReport {
    let w = kernel.states() as u8;
    let mut checks = Vec::new();
    let mut patterns = Vec::new();
    let mut reachable = Vec::new();
    let mut frozen = Vec::new();
    for m in 1..w {
        let pv = pattern_values(kernel, m);
        for (idx, name) in PATTERNS.iter().enumerate() {
            let spread = pv.spread[idx];
            checks.push(Check {
                name: format!("m={m}: pattern {name} constant"),
                passed: spread <= CLASS_TOL,
                required: true,
                detail: format!("spread {spread:.3e}"),
            });
        }
        for (n, (label, slack)) in inequality_slacks(&pv.values).iter().enumerate() {
            checks.push(Check {
                name: format!("m={m}: inequality {}", n + 1),
                passed: *slack >= -CLASS_TOL,
                required: true,
                detail: format!("{label}: slack {slack:.3e}"),
            });
        }
        let d = pv.values[7];
        reachable.push(d > 0.0);
        checks.push(Check {
            name: format!("m={m}: reachable"),
            passed: d > 0.0,
            required: false,
            detail: format!("p_mmm,m = {d}"),
        });
        if is_frozen(&pv.values) && d > 0.0 {
            frozen.push(m);
        }
        patterns.push(pv);
    }
    VoterClassReport { summary: ClassReport::new(DualClass::Voter, checks), patterns, reachable, frozen }
}

/// Closed-form moves from the eight pattern values, or `None` when
/// `p_mmm,m = 0`. Negative entries within the class tolerance are clamped.
pub fn moves_from_patterns(values: &[f64; 8]) -> Option<MoveProbs> {
    let [n, l, c, r, lc, lr, cr, lcr] = *values;
    let d = lcr;
    if d <= 0.0 {
        return None;
    }
    let raw =
        [n, l - n, c - n, r - n, lc + n - l - c, lr + n - l - r, cr + n - c - r, lcr + l + c + r - cr - lr - lc - n];
    Some(MoveProbs::from_array(raw.map(|x| (x / d).max(0.0))))
}

/// Solves the linear system for `(d, π)` in closed form.
pub fn solve_voter_dual(kernel: &Kernel) -> Result<VoterDualParams> {
    let report = check_voter_class(kernel);
    if let Some(fail) = report.summary.first_required_failure() {
        if fail.name.contains("inequality") {
            return Err(Error::NoDual(format!("{} ({})", fail.name, fail.detail)));
        }
        return Err(Error::NotInClass { class: "voter", reason: format!("{} ({})", fail.name, fail.detail) });
    }
    let mut opinions = Vec::new();
    for pv in &report.patterns {
        let m = pv.opinion;
        let d = pv.values[7];
        if d <= 0.0 {
            return Err(Error::Unreachable { state: m });
        }
        let moves = if report.frozen.contains(&m) {
            MoveProbs::from_array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        } else {
            moves_from_patterns(&pv.values).expect("d > 0 checked above")
        };
        opinions.push(OpinionDual { opinion: m, weight: d, moves });
    }
    VoterDualParams::new(kernel.states(), opinions, report.frozen)
}

/// `H(x, A)` for the voter class.
pub fn h_voter(x: &dyn Configuration, state: &VoterDualState) -> Result<bool> {
    if state.status == DualStatus::AbsorbedConflict {
        return Ok(false);
    }
    for (idx, set) in state.sets.iter().enumerate() {
        let m = idx as u8 + 1;
        for &z in set {
            if x.state_at(z)? != m {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `d(A) = Π d_i^{|A_i|}`.
pub fn d_voter(state: &VoterDualState, params: &VoterDualParams) -> f64 {
    state.sets.iter().zip(&params.opinions).map(|(s, o)| o.weight.powi(s.len() as i32)).product()
}

/// One step of the coalescing branching dual.
pub fn step_voter_dual(
    state: &VoterDualState,
    params: &VoterDualParams,
    draws: &mut StepDraws,
    topology: Topology,
) -> VoterDualState {
    if state.status != DualStatus::Active {
        return state.clone();
    }
    let mut next = vec![BTreeSet::new(); params.opinions()];
    for (idx, set) in state.sets.iter().enumerate() {
        let sampler = &params.samplers[idx];
        for &z in set {
            let block = BLOCKS[sampler.draw(draws.next_f64()) as usize];
            for &o in block {
                next[idx].insert(topology.wrap(z + o));
            }
        }
    }
    params.classify(next)
}

impl DualProcess for VoterDualParams {
    type State = VoterDualState;

    fn class(&self) -> DualClass {
        DualClass::Voter
    }

    fn states(&self) -> usize {
        self.states
    }

    fn weight(&self, state: &VoterDualState) -> f64 {
        d_voter(state, self)
    }

    fn duality(&self, x: &dyn Configuration, state: &VoterDualState) -> Result<bool> {
        h_voter(x, state)
    }

    fn status(&self, state: &VoterDualState) -> DualStatus {
        state.status
    }

    fn step(&self, state: &VoterDualState, draws: &mut StepDraws, topology: Topology) -> VoterDualState {
        step_voter_dual(state, self, draws, topology)
    }

    fn place(&self, state: &VoterDualState, topology: Topology) -> VoterDualState {
        let sets = state.sets.iter().map(|s| s.iter().map(|&z| topology.wrap(z)).collect()).collect();
        self.classify(sets)
    }

    fn cylinder(&self, state: &VoterDualState, length: usize) -> Option<Cylinder> {
        let placed = self.place(state, Topology::Ring(length));
        if placed.status == DualStatus::AbsorbedConflict {
            return None;
        }
        let mut constraints: Vec<SiteConstraint> = placed
            .sets
            .iter()
            .enumerate()
            .flat_map(|(idx, s)| s.iter().map(move |&z| SiteConstraint { site: z, values: vec![idx as u8 + 1] }))
            .collect();
        constraints.sort_by_key(|c| c.site);
        Some(Cylinder::new(constraints).expect("disjoint sets give distinct sites"))
    }
}

/// Site labels are bit masks over opinions (bit `m-1` set iff the site is in
/// `A_m`); a site with two bits is a conflict.
impl EnumerableDual for VoterDualParams {
    fn site_labels(&self) -> usize {
        1 << self.opinions()
    }

    fn combine(&self, a: u8, b: u8) -> u8 {
        a | b
    }

    fn is_absorbing(&self, labels: &[u8]) -> bool {
        if labels.iter().any(|l| l.count_ones() > 1) || labels.iter().all(|&l| l == 0) {
            return true;
        }
        labels.iter().all(|&l| l == 0 || self.frozen.contains(&(l.trailing_zeros() as u8 + 1)))
    }

    fn site_moves(&self, label: u8) -> Vec<Vec<(f64, Vec<(i64, u8)>)>> {
        (0..self.opinions())
            .filter(|b| label & (1 << b) != 0)
            .map(|b| {
                let bit = 1u8 << b;
                self.opinions[b]
                    .moves
                    .to_array()
                    .iter()
                    .zip(BLOCKS)
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(&p, block)| (p, block.iter().map(|&o| (o, bit)).collect()))
                    .collect()
            })
            .collect()
    }

    fn duality_labels(&self, x: &[u8], labels: &[u8]) -> bool {
        labels.iter().zip(x).all(|(&l, &s)| match l.count_ones() {
            0 => true,
            1 => s == l.trailing_zeros() as u8 + 1,
            _ => false,
        })
    }

    fn weight_labels(&self, labels: &[u8]) -> f64 {
        let mut d = 1.0;
        for &l in labels {
            for (b, o) in self.opinions.iter().enumerate() {
                if l & (1 << b) != 0 {
                    d *= o.weight;
                }
            }
        }
        d
    }
}
