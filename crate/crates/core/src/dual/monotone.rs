//! Monotone-class duality.
//!
//! For middle-independent kernels (`p[i][j][k][m] = p_{ik,m}`) on the ordered
//! alphabet `1 < … < M`, the dual is a nested chain `A_1 ⊆ … ⊆ A_{M-1}`
//! with `H(x, A) = 1` iff `x(z) ≤ k` for every `z ∈ A_k`. A site belongs to
//! level `k` when `k` is the smallest index with `z ∈ A_k`, so a chain is the
//! same thing as a finite map from sites to levels.
//!
//! A site at level `k` moves independently: it dies (`π_k^∅`), sends its left
//! neighbour to level `m` (`π^ℓ_{k,m}`), its right neighbour to level `n`
//! (`π^r_{k,n}`) or both (`π_{k,mn}`). Sites reached more than once keep the
//! lowest level, which keeps the chain nested.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Check, ClassReport, Configuration, DualClass, DualProcess, DualStatus, OutcomeSampler, Topology};
use crate::duality::EnumerableDual;
use crate::kernel::Kernel;
use crate::lattice::{Cylinder, SiteConstraint};
use crate::rng::StepDraws;
use crate::{Error, Result, CLASS_TOL};

/// Cumulants `S^k_{i,j} = Σ_{m ≤ k} p_{ij,m}` for `i, j ∈ 1..=M`, `k ∈ 0..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantTable {
    states: usize,
    values: Vec<f64>,
}

impl CumulantTable {
    /// Built from the `j = 1` slice of the kernel (callers check middle
    /// independence separately).
    pub fn new(kernel: &Kernel) -> Self {
        let w = kernel.states();
        let mut values = vec![0.0; w * w * (w + 1)];
        for i in 1..=w as u8 {
            for j in 1..=w as u8 {
                let mut acc = 0.0;
                for k in 1..=w as u8 {
                    acc += kernel.p(i, 1, j, k);
                    values[Self::index(w, i, j, k)] = acc;
                }
            }
        }
        Self { states: w, values }
    }

    fn index(w: usize, i: u8, j: u8, k: u8) -> usize {
        ((i as usize - 1) * w + j as usize - 1) * (w + 1) + k as usize
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// `S^k_{i,j}`.
    #[inline]
    pub fn s(&self, i: u8, j: u8, k: u8) -> f64 {
        self.values[Self::index(self.states, i, j, k)]
    }
}

/// Dual parameters of one level `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDual {
    pub level: u8,
    /// `d_k = S^k_{1,1}`.
    pub weight: f64,
    pub empty: f64,
    /// `left[m-1] = π^ℓ_{k,m}`.
    pub left: Vec<f64>,
    /// `right[n-1] = π^r_{k,n}`.
    pub right: Vec<f64>,
    /// `both[m-1][n-1] = π_{k,mn}`.
    pub both: Vec<Vec<f64>>,
}

impl LevelDual {
    pub fn total(&self) -> f64 {
        self.empty
            + self.left.iter().sum::<f64>()
            + self.right.iter().sum::<f64>()
            + self.both.iter().flatten().sum::<f64>()
    }

    /// Outcomes as `(probability, left level, right level)`; level 0 means
    /// the neighbour is not entered.
    pub fn outcomes(&self) -> Vec<(f64, u8, u8)> {
        let mut out = vec![(self.empty, 0, 0)];
        for (m, &p) in self.left.iter().enumerate() {
            out.push((p, m as u8 + 1, 0));
        }
        for (n, &p) in self.right.iter().enumerate() {
            out.push((p, 0, n as u8 + 1));
        }
        for (m, row) in self.both.iter().enumerate() {
            for (n, &p) in row.iter().enumerate() {
                out.push((p, m as u8 + 1, n as u8 + 1));
            }
        }
        out
    }

    /// `d_k [π^∅ + Σ_{m≥i} π^ℓ + Σ_{n≥j} π^r + Σ_{m≥i,n≥j} π_{mn}]`, which
    /// must reproduce `S^k_{i,j}`.
    pub fn telescoped(&self, i: u8, j: u8) -> f64 {
        let (i, j) = (i as usize, j as usize);
        let l: f64 = self.left.iter().skip(i - 1).sum();
        let r: f64 = self.right.iter().skip(j - 1).sum();
        let b: f64 = self.both.iter().skip(i - 1).flat_map(|row| row.iter().skip(j - 1)).sum();
        self.weight * (self.empty + l + r + b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneDualParams {
    pub states: usize,
    pub levels: Vec<LevelDual>,
    #[serde(skip)]
    samplers: Vec<OutcomeSampler<(u8, u8)>>,
}

impl MonotoneDualParams {
    pub fn new(states: usize, levels: Vec<LevelDual>) -> Result<Self> {
        if states < 2 || levels.len() + 1 != states {
            return Err(Error::InvalidParameters(format!("{} levels given for {states} states", levels.len())));
        }
        let n = states - 1;
        for (idx, lv) in levels.iter().enumerate() {
            let k = idx + 1;
            if lv.level as usize != k {
                return Err(Error::InvalidParameters(format!("level {} out of order", lv.level)));
            }
            if !(lv.weight > 0.0 && lv.weight <= 1.0) {
                return Err(Error::InvalidParameters(format!("d_{k} = {} not in (0, 1]", lv.weight)));
            }
            if lv.left.len() != n || lv.right.len() != n || lv.both.len() != n || lv.both.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidParameters(format!("level {k} move tables have the wrong shape")));
            }
            if lv.outcomes().iter().any(|(p, _, _)| !(0.0..=1.0).contains(p)) || (lv.total() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameters(format!(
                    "level {k} moves are not a probability vector (total {})",
                    lv.total()
                )));
            }
        }
        let samplers = levels
            .iter()
            .map(|lv| OutcomeSampler::new(lv.outcomes().into_iter().map(|(p, a, b)| (p, (a, b)))))
            .collect();
        Ok(Self { states, levels, samplers })
    }

    pub fn level(&self, k: u8) -> &LevelDual {
        &self.levels[k as usize - 1]
    }

    /// A dual state from a site → level map.
    pub fn state(&self, levels: BTreeMap<i64, u8>) -> Result<MonotoneDualState> {
        if let Some((z, &k)) = levels.iter().find(|(_, &k)| k == 0 || k as usize >= self.states) {
            return Err(Error::InvalidParameters(format!("site {z} has level {k}, expected 1..={}", self.states - 1)));
        }
        Ok(MonotoneDualState::from_levels(levels))
    }

    /// A dual state from an explicit chain `A_1 ⊆ … ⊆ A_{M-1}`.
    pub fn chain(&self, sets: &[Vec<i64>]) -> Result<MonotoneDualState> {
        if sets.len() + 1 != self.states {
            return Err(Error::InvalidParameters(format!("{} sets given, expected {}", sets.len(), self.states - 1)));
        }
        let mut levels = BTreeMap::new();
        for (idx, set) in sets.iter().enumerate() {
            for &z in set {
                levels.entry(z).or_insert(idx as u8 + 1);
            }
            if idx > 0 {
                if let Some(z) = sets[idx - 1].iter().find(|z| !set.contains(z)) {
                    return Err(Error::InvalidParameters(format!(
                        "chain is not nested: site {z} in A_{idx} but not in A_{}",
                        idx + 1
                    )));
                }
            }
        }
        Ok(MonotoneDualState::from_levels(levels))
    }
}

/// A nested chain stored as the level of each of its sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MonotoneDualState {
    pub levels: BTreeMap<i64, u8>,
    pub status: DualStatus,
}

impl MonotoneDualState {
    fn from_levels(levels: BTreeMap<i64, u8>) -> Self {
        let status = if levels.is_empty() { DualStatus::AbsorbedEmpty } else { DualStatus::Active };
        Self { levels, status }
    }

    pub fn empty() -> Self {
        Self::from_levels(BTreeMap::new())
    }

    /// `A_k`, in increasing site order.
    pub fn set(&self, k: u8) -> Vec<i64> {
        self.levels.iter().filter(|(_, &l)| l <= k).map(|(&z, _)| z).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneClassReport {
    #[serde(flatten)]
    pub summary: ClassReport,
    pub cumulants: CumulantTable,
}

/// Checks middle independence, monotonicity of `S` in both neighbours,
/// supermodularity and reachability of state 1.
pub fn check_monotone_class(kernel: &Kernel) -> MonotoneClassReport {
    let w = kernel.states() as u8;
    let mut checks = Vec::new();

    let mut worst = (0.0f64, [1u8, 1, 1]);
    for i in 1..=w {
        for k in 1..=w {
            for m in 1..=w {
                let vals = (1..=w).map(|j| kernel.p(i, j, k, m));
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                if hi - lo > worst.0 {
                    worst = (hi - lo, [i, k, m]);
                }
            }
        }
    }
    let [i, k, m] = worst.1;
    checks.push(Check {
        name: "middle independence".into(),
        passed: worst.0 <= CLASS_TOL,
        required: true,
        detail: format!("max spread {:.3e} at p[{i}][.][{k}][{m}]", worst.0),
    });

    let s = CumulantTable::new(kernel);
    for k in 1..w {
        let mut mono = (f64::INFINITY, String::new());
        let mut superm = (f64::INFINITY, String::new());
        for i in 1..=w {
            for j in 1..=w {
                if i < w {
                    let slack = s.s(i, j, k) - s.s(i + 1, j, k);
                    if slack < mono.0 {
                        mono = (slack, format!("S^{k}_{{{i},{j}}} - S^{k}_{{{},{j}}}", i + 1));
                    }
                }
                if j < w {
                    let slack = s.s(i, j, k) - s.s(i, j + 1, k);
                    if slack < mono.0 {
                        mono = (slack, format!("S^{k}_{{{i},{j}}} - S^{k}_{{{i},{}}}", j + 1));
                    }
                }
                if i < w && j < w {
                    let slack = s.s(i, j, k) - s.s(i + 1, j, k) - s.s(i, j + 1, k) + s.s(i + 1, j + 1, k);
                    if slack < superm.0 {
                        superm = (slack, format!("cell (k={k}, m={i}, n={j})"));
                    }
                }
            }
        }
        checks.push(Check {
            name: format!("k={k}: monotone"),
            passed: mono.0 >= -CLASS_TOL,
            required: true,
            detail: format!("min slack {:.3e} at {}", mono.0, mono.1),
        });
        checks.push(Check {
            name: format!("k={k}: supermodular"),
            passed: superm.0 >= -CLASS_TOL,
            required: true,
            detail: format!("min slack {:.3e} at {}", superm.0, superm.1),
        });
    }
    let p111 = s.s(1, 1, 1);
    checks.push(Check {
        name: "state 1 reachable".into(),
        passed: p111 > 0.0,
        required: false,
        detail: format!("p_11,1 = {p111}"),
    });
    MonotoneClassReport { summary: ClassReport::new(DualClass::Monotone, checks), cumulants: s }
}

/// Closed-form dual parameters from the cumulants.
pub fn solve_monotone_dual(kernel: &Kernel) -> Result<MonotoneDualParams> {
    let report = check_monotone_class(kernel);
    if let Some(fail) = report.summary.first_required_failure() {
        let reason = format!("{} ({})", fail.name, fail.detail);
        return Err(if fail.name == "middle independence" {
            Error::NotInClass { class: "monotone", reason }
        } else {
            Error::NoDual(reason)
        });
    }
    let s = &report.cumulants;
    let w = kernel.states() as u8;
    if s.s(1, 1, 1) <= 0.0 {
        return Err(Error::Unreachable { state: 1 });
    }
    let levels = (1..w)
        .map(|k| {
            let d = s.s(1, 1, k);
            let f = |x: f64| (x / d).max(0.0);
            LevelDual {
                level: k,
                weight: d,
                empty: f(s.s(w, w, k)),
                left: (1..w).map(|m| f(s.s(m, w, k) - s.s(m + 1, w, k))).collect(),
                right: (1..w).map(|n| f(s.s(w, n, k) - s.s(w, n + 1, k))).collect(),
                both: (1..w)
                    .map(|m| {
                        (1..w)
                            .map(|n| f(s.s(m, n, k) - s.s(m + 1, n, k) - s.s(m, n + 1, k) + s.s(m + 1, n + 1, k)))
                            .collect()
                    })
                    .collect(),
            }
        })
        .collect();
    MonotoneDualParams::new(kernel.states(), levels)
}

/// `H(x, A)`: every site at level `k` holds a state `≤ k`.
pub fn h_monotone(x: &dyn Configuration, state: &MonotoneDualState) -> Result<bool> {
    for (&z, &k) in &state.levels {
        if x.state_at(z)? > k {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `d(A) = Π_k d_k^{|A_k ∖ A_{k-1}|}`.
pub fn d_monotone(state: &MonotoneDualState, params: &MonotoneDualParams) -> f64 {
    state.levels.values().map(|&k| params.level(k).weight).product()
}

fn enter(next: &mut BTreeMap<i64, u8>, site: i64, level: u8) {
    next.entry(site).and_modify(|l| *l = (*l).min(level)).or_insert(level);
}

pub fn step_monotone_dual(
    state: &MonotoneDualState,
    params: &MonotoneDualParams,
    draws: &mut StepDraws,
    topology: Topology,
) -> MonotoneDualState {
    if state.status != DualStatus::Active {
        return state.clone();
    }
    let mut next = BTreeMap::new();
    for (&z, &k) in &state.levels {
        let (l, r) = params.samplers[k as usize - 1].draw(draws.next_f64());
        if l > 0 {
            enter(&mut next, topology.wrap(z - 1), l);
        }
        if r > 0 {
            enter(&mut next, topology.wrap(z + 1), r);
        }
    }
    MonotoneDualState::from_levels(next)
}

impl DualProcess for MonotoneDualParams {
    type State = MonotoneDualState;

    fn class(&self) -> DualClass {
        DualClass::Monotone
    }

    fn states(&self) -> usize {
        self.states
    }

    fn weight(&self, state: &MonotoneDualState) -> f64 {
        d_monotone(state, self)
    }

    fn duality(&self, x: &dyn Configuration, state: &MonotoneDualState) -> Result<bool> {
        h_monotone(x, state)
    }

    fn status(&self, state: &MonotoneDualState) -> DualStatus {
        state.status
    }

    fn step(&self, state: &MonotoneDualState, draws: &mut StepDraws, topology: Topology) -> MonotoneDualState {
        step_monotone_dual(state, self, draws, topology)
    }

    fn place(&self, state: &MonotoneDualState, topology: Topology) -> MonotoneDualState {
        let mut next = BTreeMap::new();
        for (&z, &k) in &state.levels {
            enter(&mut next, topology.wrap(z), k);
        }
        MonotoneDualState::from_levels(next)
    }

    fn cylinder(&self, state: &MonotoneDualState, length: usize) -> Option<Cylinder> {
        let placed = self.place(state, Topology::Ring(length));
        let constraints =
            placed.levels.iter().map(|(&z, &k)| SiteConstraint { site: z, values: (1..=k).collect() }).collect();
        Some(Cylinder::new(constraints).expect("levels give distinct sites"))
    }
}

/// Site labels are levels, with 0 for sites outside `A_{M-1}`.
impl EnumerableDual for MonotoneDualParams {
    fn site_labels(&self) -> usize {
        self.states
    }

    fn combine(&self, a: u8, b: u8) -> u8 {
        match (a, b) {
            (0, x) | (x, 0) => x,
            (a, b) => a.min(b),
        }
    }

    fn is_absorbing(&self, labels: &[u8]) -> bool {
        labels.iter().all(|&l| l == 0)
    }

    fn site_moves(&self, label: u8) -> Vec<Vec<(f64, Vec<(i64, u8)>)>> {
        if label == 0 {
            return Vec::new();
        }
        let outcomes = self
            .level(label)
            .outcomes()
            .into_iter()
            .filter(|(p, _, _)| *p > 0.0)
            .map(|(p, l, r)| {
                let mut v = Vec::new();
                if l > 0 {
                    v.push((-1, l));
                }
                if r > 0 {
                    v.push((1, r));
                }
                (p, v)
            })
            .collect();
        vec![outcomes]
    }

    fn duality_labels(&self, x: &[u8], labels: &[u8]) -> bool {
        labels.iter().zip(x).all(|(&l, &s)| l == 0 || s <= l)
    }

    fn weight_labels(&self, labels: &[u8]) -> f64 {
        labels.iter().filter(|&&l| l > 0).map(|&l| self.level(l).weight).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{competition_kernel, convex_g_kernel, domany_kinzel_kernel};
    use crate::lattice::RingConfig;
    use crate::rng::{Channel, RandomStream};

    fn convex_g3() -> Kernel {
        convex_g_kernel(3, &[vec![0.6, 0.35, 0.2, 0.1, 0.05], vec![0.9, 0.6, 0.4, 0.25, 0.15]]).unwrap()
    }

    fn assert_telescopes(kernel: &Kernel, params: &MonotoneDualParams) {
        let s = CumulantTable::new(kernel);
        let w = kernel.states() as u8;
        for lv in &params.levels {
            assert!((lv.total() - 1.0).abs() < 1e-12);
            for i in 1..=w {
                for j in 1..=w {
                    // i = M or j = M drop the corresponding sums entirely
                    let got = lv.telescoped(i.min(w), j.min(w));
                    assert!((got - s.s(i, j, lv.level)).abs() < 1e-12, "k={} i={i} j={j}", lv.level);
                }
            }
        }
    }

    #[test]
    fn competition_dual() {
        let k = competition_kernel(2, &[0.05, 0.05], &[0.7], &[0.7]).unwrap();
        let r = check_monotone_class(&k);
        assert!(r.summary.passed, "{:?}", r.summary.failures().collect::<Vec<_>>());
        let p = solve_monotone_dual(&k).unwrap();
        assert!((p.level(1).weight - 0.95).abs() < 1e-15);
        assert_telescopes(&k, &p);

        let k3 = competition_kernel(3, &[0.02, 0.03, 0.05], &[0.6, 0.8], &[0.7, 0.9]).unwrap();
        assert!(check_monotone_class(&k3).summary.passed);
        assert_telescopes(&k3, &solve_monotone_dual(&k3).unwrap());
    }

    #[test]
    fn convex_g_round_trip() {
        let k = convex_g3();
        let s = CumulantTable::new(&k);
        let g = [[0.6, 0.35, 0.2, 0.1, 0.05], [0.9, 0.6, 0.4, 0.25, 0.15]];
        for kk in 1..=2u8 {
            for i in 1..=3u8 {
                for j in 1..=3u8 {
                    let want = g[kk as usize - 1][(i + j) as usize - 2];
                    assert!((s.s(i, j, kk) - want).abs() < 1e-12);
                }
            }
            assert!((s.s(2, 3, 3) - 1.0).abs() < 1e-12);
        }
        let p = solve_monotone_dual(&k).unwrap();
        assert!((p.level(1).weight - 0.6).abs() < 1e-15);
        assert!((p.level(2).weight - 0.9).abs() < 1e-15);
        assert_telescopes(&k, &p);
    }

    #[test]
    fn domany_kinzel_as_monotone() {
        let k = domany_kinzel_kernel(0.1, 0.3, 0.6).unwrap();
        let p = solve_monotone_dual(&k).unwrap();
        assert!((p.level(1).weight - 0.6).abs() < 1e-15);
        // a1 > (a0 + a2)/2 breaks supermodularity
        let k = domany_kinzel_kernel(0.1, 0.4, 0.6).unwrap();
        let err = solve_monotone_dual(&k).unwrap_err();
        assert!(matches!(err, Error::NoDual(ref m) if m.contains("supermodular")), "{err}");
    }

    #[test]
    fn middle_dependence_rejected() {
        let k = Kernel::from_fn(3, |_, j, _, m| if j == m { 0.8 } else { 0.1 }).unwrap();
        let r = check_monotone_class(&k);
        assert!(!r.summary.check("middle independence").unwrap().passed);
        assert!(matches!(solve_monotone_dual(&k), Err(Error::NotInClass { .. })));
    }

    #[test]
    fn unreachable_bottom_state() {
        let k = Kernel::from_fn(2, |_, _, _, m| (m == 2) as u8 as f64).unwrap();
        assert!(matches!(solve_monotone_dual(&k), Err(Error::Unreachable { state: 1 })));
    }

    #[test]
    fn classical_regime() {
        let k = Kernel::from_fn(3, |_, _, _, m| (m == 1) as u8 as f64).unwrap();
        let p = solve_monotone_dual(&k).unwrap();
        assert!(p.levels.iter().all(|l| l.weight == 1.0));
    }

    #[test]
    fn h_and_d() {
        let p = solve_monotone_dual(&competition_kernel(2, &[0.05, 0.05], &[0.7], &[0.7]).unwrap()).unwrap();
        let empty = MonotoneDualState::empty();
        assert_eq!(empty.status, DualStatus::AbsorbedEmpty);
        assert_eq!(d_monotone(&empty, &p), 1.0);
        let a = p.chain(&[vec![0]]).unwrap();
        assert!(h_monotone(&RingConfig::new(2, vec![1, 2, 2]).unwrap(), &a).unwrap());
        assert!(!h_monotone(&RingConfig::new(2, vec![2, 1, 1]).unwrap(), &a).unwrap());
        let two = p.chain(&[vec![0, 3]]).unwrap();
        assert!((d_monotone(&two, &p) - 0.9025).abs() < 1e-15);

        let p3 = solve_monotone_dual(&convex_g3()).unwrap();
        let a = p3.chain(&[vec![], vec![0]]).unwrap();
        assert!(h_monotone(&RingConfig::new(3, vec![2, 3, 3]).unwrap(), &a).unwrap());
        assert!(!h_monotone(&RingConfig::new(3, vec![3, 1, 1]).unwrap(), &a).unwrap());
        let chain = p3.chain(&[vec![0], vec![0, 1]]).unwrap();
        assert!((d_monotone(&chain, &p3) - 0.6 * 0.9).abs() < 1e-15);
        // A_2 = A_1 contributes nothing at level 2
        let flat = p3.chain(&[vec![0], vec![0]]).unwrap();
        assert!((d_monotone(&flat, &p3) - 0.6).abs() < 1e-15);
        assert!(p3.chain(&[vec![0, 1], vec![0]]).is_err());
    }

    #[test]
    fn all_empty_moves_kill_in_one_step() {
        let n = 2;
        let mut level = LevelDual {
            level: 1,
            weight: 0.5,
            empty: 1.0,
            left: vec![0.0; n],
            right: vec![0.0; n],
            both: vec![vec![0.0; n]; n],
        };
        let mut level2 = level.clone();
        level2.level = 2;
        level.level = 1;
        let p = MonotoneDualParams::new(3, vec![level, level2]).unwrap();
        let s = p.chain(&[vec![0, 2], vec![0, 2, 9]]).unwrap();
        let mut draws = RandomStream::new(0).replica(Channel::Dual, 0).step(0);
        let next = step_monotone_dual(&s, &p, &mut draws, Topology::Line);
        assert_eq!(next.status, DualStatus::AbsorbedEmpty);
        assert_eq!(step_monotone_dual(&next, &p, &mut draws, Topology::Line), next);
    }

    #[test]
    fn m2_moves_match_voter_dual() {
        let k = domany_kinzel_kernel(0.1, 0.3, 0.6).unwrap();
        let mono = solve_monotone_dual(&k).unwrap();
        let voter = super::super::solve_voter_dual(&k).unwrap();
        let lv = mono.level(1);
        let mv = voter.opinion(1).moves;
        assert!((lv.weight - voter.opinion(1).weight).abs() < 1e-15);
        assert!((lv.empty - mv.empty).abs() < 1e-15);
        assert!((lv.left[0] - mv.left).abs() < 1e-15);
        assert!((lv.right[0] - mv.right).abs() < 1e-15);
        assert!((lv.both[0][0] - mv.left_right).abs() < 1e-15);
    }
}
