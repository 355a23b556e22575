//! Exhaustive verification of `(H, d)`-duality on small rings.
//!
//! On the ring `Z_L` both processes are finite Markov chains: the PCA with
//! matrix `P` over `W^L`, and the dual with matrix `Q` over per-site label
//! vectors. Duality reads `P H = H (D Q)^T` with `D = diag(d)`; iterating,
//! `P^s H = H ((D Q)^s)^T`. Killing the dual with probability `1 - d` into
//! a cemetery `℘` (where `H = 0`) turns this into classical duality
//! `P H̃ = H̃ Q̃^T`.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{DualClass, DualProcess, Topology};
use crate::kernel::Kernel;
use crate::lattice::RingConfig;
use crate::rng::{Channel, RandomStream};
use crate::stats::{z_score, Estimate};
use crate::{Error, Result};

/// Size limits for dense enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_states: u128,
    /// Entries of any single dense matrix (8 bytes each).
    pub max_dense_entries: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Self { max_states: 200_000, max_dense_entries: 1 << 26 }
    }
}

impl Caps {
    fn admit(&self, what: &'static str, states: u128, other_dim: u128) -> Result<()> {
        if states > self.max_states {
            return Err(Error::CapExceeded { what, size: states, cap: self.max_states });
        }
        let entries = states.saturating_mul(other_dim);
        if entries > self.max_dense_entries {
            return Err(Error::CapExceeded { what, size: entries, cap: self.max_dense_entries });
        }
        Ok(())
    }
}

/// A finite Markov chain with labelled states.
///
/// Configuration labels are the cells (`1..=M`); dual labels are per-site
/// dual labels; the cemetery of a killed chain is labelled by an empty vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    pub labels: Vec<Vec<u8>>,
    pub matrix: Array2<f64>,
}

impl FiniteChain {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.matrix.sum_axis(Axis(1)).iter().fold(0.0, |acc, s| acc.max((s - 1.0).abs()))
    }

    pub fn entries_in_unit_interval(&self) -> bool {
        self.matrix.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

fn mixed_radix_len(radix: usize, length: usize) -> u128 {
    (radix as u128).saturating_pow(length as u32)
}

fn digits(mut index: usize, radix: usize, length: usize) -> Vec<u8> {
    (0..length)
        .map(|_| {
            let d = index % radix;
            index /= radix;
            d as u8
        })
        .collect()
}

fn encode(labels: &[u8], radix: usize) -> usize {
    labels.iter().rev().fold(0, |acc, &l| acc * radix + l as usize)
}

/// Index of a ring configuration in [`build_pca_matrix`]'s enumeration
/// (site 0 is the least significant digit).
pub fn config_index(config: &RingConfig) -> usize {
    encode(&config.cells().iter().map(|c| c - 1).collect::<Vec<_>>(), config.states())
}

/// The transition matrix of the PCA on the ring `Z_L`.
pub fn build_pca_matrix(kernel: &Kernel, length: usize, caps: &Caps) -> Result<FiniteChain> {
    if length < 3 {
        return Err(Error::InvalidParameters(format!("ring length {length} is below 3")));
    }
    let w = kernel.states();
    let n = mixed_radix_len(w, length);
    caps.admit("configurations", n, n)?;
    let n = n as usize;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let cells: Vec<u8> = digits(x, w, length).iter().map(|d| d + 1).collect();
            let mut row = vec![1.0];
            for z in (0..length).rev() {
                let left = cells[(z + length - 1) % length];
                let right = cells[(z + 1) % length];
                let probs = kernel.row(left, cells[z], right);
                row = row.iter().flat_map(|&acc| probs.iter().map(move |&p| acc * p)).collect();
            }
            row
        })
        .collect();
    let mut matrix = Array2::zeros((n, n));
    for (x, row) in rows.into_iter().enumerate() {
        matrix.row_mut(x).assign(&Array1::from(row));
    }
    let labels = (0..n).map(|x| digits(x, w, length).iter().map(|d| d + 1).collect()).collect();
    Ok(FiniteChain { labels, matrix })
}

/// A dual whose states on a finite ring can be written as one label per
/// site, with label 0 meaning "not in any set".
pub trait EnumerableDual: DualProcess {
    /// Number of distinct site labels.
    fn site_labels(&self) -> usize;

    /// Label of a site reached by two blocks.
    fn combine(&self, a: u8, b: u8) -> u8;

    /// States whose row of `Q` is the identity.
    fn is_absorbing(&self, labels: &[u8]) -> bool;

    /// Independent move distributions attached to a site carrying `label`.
    /// Each outcome lists `(offset, label)` contributions to the next state.
    fn site_moves(&self, label: u8) -> Vec<Vec<(f64, Vec<(i64, u8)>)>>;

    /// `H(x, A)` with `x` given by its cells.
    fn duality_labels(&self, x: &[u8], labels: &[u8]) -> bool;

    /// `d(A)`.
    fn weight_labels(&self, labels: &[u8]) -> f64;
}

/// The dual chain on `Z_L`, its transitions obtained by convolving the
/// independent per-singleton move distributions site by site.
pub fn build_dual_chain<D: EnumerableDual>(params: &D, length: usize, caps: &Caps) -> Result<FiniteChain> {
    if length < 3 {
        return Err(Error::InvalidParameters(format!("ring length {length} is below 3")));
    }
    let k = params.site_labels();
    let n = mixed_radix_len(k, length);
    caps.admit("dual states", n, n)?;
    let n = n as usize;
    let topology = Topology::Ring(length);
    let rows: Vec<BTreeMap<usize, f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let labels = digits(a, k, length);
            if params.is_absorbing(&labels) {
                return BTreeMap::from([(a, 1.0)]);
            }
            let mut dist: BTreeMap<Vec<u8>, f64> = BTreeMap::from([(vec![0u8; length], 1.0)]);
            for (z, &label) in labels.iter().enumerate() {
                if label == 0 {
                    continue;
                }
                for moves in params.site_moves(label) {
                    let mut next = BTreeMap::new();
                    for (state, p) in &dist {
                        for (q, contributions) in &moves {
                            let mut s = state.clone();
                            for &(offset, l) in contributions {
                                let site = topology.wrap(z as i64 + offset) as usize;
                                s[site] = params.combine(s[site], l);
                            }
                            *next.entry(s).or_insert(0.0) += p * q;
                        }
                    }
                    dist = next;
                }
            }
            dist.into_iter().map(|(s, p)| (encode(&s, k), p)).collect()
        })
        .collect();
    let mut matrix = Array2::zeros((n, n));
    for (a, row) in rows.into_iter().enumerate() {
        for (b, p) in row {
            matrix[[a, b]] += p;
        }
    }
    let labels = (0..n).map(|a| digits(a, k, length)).collect();
    Ok(FiniteChain { labels, matrix })
}

/// The killed chain `ξ̃`: row `y` is `d(y) Q[y, ·]` plus `1 - d(y)` on the
/// cemetery, which is the last state and absorbing.
pub fn build_tilde_chain(q: &FiniteChain, d: &[f64]) -> Result<FiniteChain> {
    if d.len() != q.len() {
        return Err(Error::InvalidParameters(format!("{} weights for {} states", d.len(), q.len())));
    }
    if let Some((y, w)) = d.iter().enumerate().find(|(_, w)| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidParameters(format!("d = {w} at state {y} is not in [0, 1]")));
    }
    let n = q.len();
    let mut matrix = Array2::zeros((n + 1, n + 1));
    for y in 0..n {
        for b in 0..n {
            matrix[[y, b]] = d[y] * q.matrix[[y, b]];
        }
        matrix[[y, n]] = 1.0 - d[y];
    }
    matrix[[n, n]] = 1.0;
    let mut labels = q.labels.clone();
    labels.push(Vec::new());
    Ok(FiniteChain { labels, matrix })
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// `P`, `Q`, `H` and `D` for one dual on one ring.
#[derive(Debug, Clone)]
pub struct DualityInstance {
    pub class: DualClass,
    pub length: usize,
    pub p: FiniteChain,
    pub q: FiniteChain,
    pub h: Array2<f64>,
    pub d: Array1<f64>,
    /// Dual states whose row of `Q` is the identity.
    pub absorbing: Vec<bool>,
}

impl DualityInstance {
    pub fn build<D: EnumerableDual>(kernel: &Kernel, params: &D, length: usize, caps: &Caps) -> Result<Self> {
        if kernel.states() != params.states() {
            return Err(Error::InvalidParameters(format!(
                "kernel has {} states, dual parameters {}",
                kernel.states(),
                params.states()
            )));
        }
        let p = build_pca_matrix(kernel, length, caps)?;
        let q = build_dual_chain(params, length, caps)?;
        caps.admit("duality matrix", p.len() as u128, q.len() as u128)?;
        let mut h = Array2::zeros((p.len(), q.len()));
        for (x, cells) in p.labels.iter().enumerate() {
            for (a, labels) in q.labels.iter().enumerate() {
                if params.duality_labels(cells, labels) {
                    h[[x, a]] = 1.0;
                }
            }
        }
        let d = q.labels.iter().map(|l| params.weight_labels(l)).collect();
        let absorbing = q.labels.iter().map(|l| params.is_absorbing(l)).collect();
        Ok(Self { class: params.class(), length, p, q, h, d, absorbing })
    }

    /// `Q^T D`, so that `H (D Q)^T = H · dq_t()`.
    fn dq_t(&self) -> Array2<f64> {
        let mut m = self.q.matrix.t().to_owned();
        for (mut col, &w) in m.axis_iter_mut(Axis(1)).zip(self.d.iter()) {
            col *= w;
        }
        m
    }

    /// `max |P H - H (D Q)^T|`.
    pub fn verify_one_step(&self) -> f64 {
        max_abs_diff(&self.p.matrix.dot(&self.h), &self.h.dot(&self.dq_t()))
    }

    /// Residuals of `P^s H = H ((D Q)^s)^T` for `s = 1..=s_max`.
    pub fn verify_multi_step(&self, s_max: usize) -> Vec<f64> {
        let dq_t = self.dq_t();
        let mut lhs = self.h.clone();
        let mut rhs = self.h.clone();
        (1..=s_max)
            .map(|_| {
                lhs = self.p.matrix.dot(&lhs);
                rhs = rhs.dot(&dq_t);
                max_abs_diff(&lhs, &rhs)
            })
            .collect()
    }

    /// Residual at a single `s` (zero at `s = 0`).
    pub fn multi_step_residual(&self, s: usize) -> f64 {
        self.verify_multi_step(s).last().copied().unwrap_or(0.0)
    }

    pub fn tilde_chain(&self) -> Result<FiniteChain> {
        build_tilde_chain(&self.q, self.d.as_slice().expect("contiguous weights"))
    }

    /// `max |P H̃ - H̃ Q̃^T|` with `H̃(·, ℘) = 0`.
    pub fn tilde_residual(&self) -> Result<f64> {
        let tilde = self.tilde_chain()?;
        let (nx, ny) = self.h.dim();
        let mut h_tilde = Array2::zeros((nx, ny + 1));
        h_tilde.slice_mut(ndarray::s![.., ..ny]).assign(&self.h);
        let lhs = self.p.matrix.dot(&h_tilde);
        let rhs = h_tilde.dot(&tilde.matrix.t());
        Ok(max_abs_diff(&lhs, &rhs))
    }

    pub fn report(&self, s_max: usize) -> Result<VerificationReport> {
        let tilde = self.tilde_chain()?;
        Ok(VerificationReport {
            class: self.class,
            length: self.length,
            configurations: self.p.len(),
            dual_states: self.q.len(),
            absorbing_dual_states: self.absorbing.iter().filter(|&&a| a).count(),
            max_residual_one_step: self.verify_one_step(),
            max_residual_per_s: self.verify_multi_step(s_max),
            tilde_residual: self.tilde_residual()?,
            max_row_sum_error: self
                .p
                .max_row_sum_error()
                .max(self.q.max_row_sum_error())
                .max(tilde.max_row_sum_error()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub class: DualClass,
    pub length: usize,
    pub configurations: usize,
    pub dual_states: usize,
    pub absorbing_dual_states: usize,
    pub max_residual_one_step: f64,
    /// Entry `s - 1` holds the residual at `s`.
    pub max_residual_per_s: Vec<f64>,
    pub tilde_residual: f64,
    pub max_row_sum_error: f64,
}

/// Sampled one-step duality `E_x H(η_1, A) = d(A) E_A H(x, ξ_1)` on a ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McDualityCheck {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub z: f64,
}

pub fn mc_duality_check<D: DualProcess>(
    kernel: &Kernel,
    params: &D,
    x: &RingConfig,
    state: &D::State,
    replicas: u64,
    seed: u64,
) -> Result<McDualityCheck> {
    if replicas == 0 {
        return Err(Error::InvalidParameters("replicas must be at least 1".into()));
    }
    if kernel.states() != params.states() || x.states() != kernel.states() {
        return Err(Error::InvalidParameters("kernel, dual and configuration alphabets differ".into()));
    }
    let topology = Topology::Ring(x.len());
    let state = params.place(state, topology);
    let stream = RandomStream::new(seed);
    let forward_hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let next = crate::lattice::step_ring(x, kernel, &stream.replica(Channel::Forward, r).step(0));
            params.duality(&next, &state).map(u64::from)
        })
        .sum::<Result<u64>>()?;
    let dual_hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut draws = stream.replica(Channel::Dual, r).step(0);
            let next = params.step(&state, &mut draws, topology);
            params.duality(x, &next).map(u64::from)
        })
        .sum::<Result<u64>>()?;
    let lhs = Estimate::binomial(forward_hits, replicas);
    let rhs = Estimate::binomial(dual_hits, replicas).scaled(params.weight(&state));
    Ok(McDualityCheck { lhs, rhs, z: z_score(lhs, rhs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{solve_monotone_dual, solve_voter_dual, MoveProbs, OpinionDual, VoterDualParams};
    use crate::kernel::{competition_kernel, convex_g_kernel, domany_kinzel_kernel, noisy_voter_kernel};

    fn dk() -> Kernel {
        domany_kinzel_kernel(0.1, 0.3, 0.6).unwrap()
    }

    #[test]
    fn pca_matrix_shape_and_entries() {
        let p = build_pca_matrix(&dk(), 3, &Caps::default()).unwrap();
        assert_eq!(p.matrix.dim(), (8, 8));
        assert!(p.max_row_sum_error() < 1e-12);
        assert!(p.entries_in_unit_interval());
        let ones = config_index(&RingConfig::uniform_state(2, 3, 1).unwrap());
        assert!((p.matrix[[ones, ones]] - 0.216).abs() < 1e-15);
    }

    #[test]
    fn deterministic_kernel_gives_permutation() {
        // every site copies its left neighbour: a rotation
        let k = Kernel::from_fn(2, |i, _, _, m| (i == m) as u8 as f64).unwrap();
        let p = build_pca_matrix(&k, 4, &Caps::default()).unwrap();
        for row in p.matrix.rows() {
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
        }
        for col in p.matrix.columns() {
            assert_eq!(col.sum(), 1.0);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let caps = Caps { max_states: 100, max_dense_entries: 1 << 26 };
        assert!(matches!(build_pca_matrix(&dk(), 7, &caps), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn dual_rows_for_domany_kinzel() {
        let params = solve_voter_dual(&dk()).unwrap();
        let q = build_dual_chain(&params, 5, &Caps::default()).unwrap();
        assert!(q.max_row_sum_error() < 1e-12);
        let idx = |sites: &[usize]| {
            let mut l = vec![0u8; 5];
            for &s in sites {
                l[s] = 1;
            }
            encode(&l, 2)
        };
        assert_eq!(q.matrix[[idx(&[]), idx(&[])]], 1.0);
        // {0} on Z_5: -1 wraps to 4
        let a = idx(&[0]);
        assert!((q.matrix[[a, idx(&[])]] - 1.0 / 6.0).abs() < 1e-15);
        assert!((q.matrix[[a, idx(&[4])]] - 1.0 / 3.0).abs() < 1e-15);
        assert!((q.matrix[[a, idx(&[1])]] - 1.0 / 3.0).abs() < 1e-15);
        assert!((q.matrix[[a, idx(&[1, 4])]] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn pure_death_goes_to_empty() {
        let killer = VoterDualParams::new(
            2,
            vec![OpinionDual {
                opinion: 1,
                weight: 0.3,
                moves: MoveProbs::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            }],
            vec![],
        )
        .unwrap();
        let q = build_dual_chain(&killer, 3, &Caps::default()).unwrap();
        for a in 0..q.len() {
            assert_eq!(q.matrix[[a, 0]], 1.0);
        }
    }

    #[test]
    fn exact_duality_on_small_rings() {
        let caps = Caps::default();
        let voter = solve_voter_dual(&dk()).unwrap();
        for l in [3, 4] {
            let inst = DualityInstance::build(&dk(), &voter, l, &caps).unwrap();
            assert!(inst.verify_one_step() < 1e-12);
            assert!(inst.tilde_residual().unwrap() < 1e-12);
            assert!(inst.multi_step_residual(3) < 1e-10);
            assert_eq!(inst.multi_step_residual(0), 0.0);
            assert_eq!(inst.verify_multi_step(1)[0], inst.verify_one_step());
        }
        let nv = noisy_voter_kernel(3, &[0.05, 0.05, 0.0], 0.3, 0.3, 0.3).unwrap();
        let inst = DualityInstance::build(&nv, &solve_voter_dual(&nv).unwrap(), 3, &caps).unwrap();
        assert!(inst.verify_one_step() < 1e-12);
        let comp = competition_kernel(2, &[0.05, 0.05], &[0.7], &[0.7]).unwrap();
        let inst = DualityInstance::build(&comp, &solve_monotone_dual(&comp).unwrap(), 4, &caps).unwrap();
        assert!(inst.verify_one_step() < 1e-12);
        let g = convex_g_kernel(3, &[vec![0.6, 0.35, 0.2, 0.1, 0.05], vec![0.9, 0.6, 0.4, 0.25, 0.15]]).unwrap();
        let inst = DualityInstance::build(&g, &solve_monotone_dual(&g).unwrap(), 3, &caps).unwrap();
        assert!(inst.verify_one_step() < 1e-12);
        assert!(inst.tilde_residual().unwrap() < 1e-12);
    }

    #[test]
    fn classical_case_has_identity_weights() {
        let k = noisy_voter_kernel(2, &[0.0, 0.0], 0.5, 0.0, 0.5).unwrap();
        let params = solve_voter_dual(&k).unwrap();
        let inst = DualityInstance::build(&k, &params, 4, &Caps::default()).unwrap();
        assert!(inst.d.iter().all(|&w| w == 1.0));
        assert!(max_abs_diff(&inst.p.matrix.dot(&inst.h), &inst.h.dot(&inst.q.matrix.t())) < 1e-12);
    }

    #[test]
    fn perturbation_is_detected() {
        let params = solve_voter_dual(&dk()).unwrap();
        let mut moves = params.opinion(1).moves.to_array();
        moves[1] += 0.01;
        let total: f64 = moves.iter().sum();
        let moves = moves.map(|p| p / total);
        let bad = VoterDualParams::new(
            2,
            vec![OpinionDual { opinion: 1, weight: 0.6, moves: MoveProbs::from_array(moves) }],
            vec![],
        )
        .unwrap();
        let inst = DualityInstance::build(&dk(), &bad, 5, &Caps::default()).unwrap();
        assert!(inst.verify_one_step() > 1e-3);
    }

    #[test]
    fn tilde_chain_edge_cases() {
        let params = solve_voter_dual(&dk()).unwrap();
        let q = build_dual_chain(&params, 3, &Caps::default()).unwrap();
        let ones = vec![1.0; q.len()];
        let t = build_tilde_chain(&q, &ones).unwrap();
        let n = q.len();
        assert_eq!(t.matrix.slice(ndarray::s![..n, ..n]), q.matrix);
        assert!(t.matrix.column(n).iter().take(n).all(|&v| v == 0.0));
        let zeros = vec![0.0; q.len()];
        let t = build_tilde_chain(&q, &zeros).unwrap();
        assert!(t.matrix.column(n).iter().all(|&v| v == 1.0));
        assert!(build_tilde_chain(&q, &vec![1.5; q.len()]).is_err());
    }

    #[test]
    fn sampled_duality_agrees_with_exact() {
        let k = dk();
        let params = solve_voter_dual(&k).unwrap();
        let x = RingConfig::new(2, vec![1, 2, 1, 1, 2]).unwrap();
        let a = params.state(vec![[0i64, 2].into_iter().collect()]).unwrap();
        let check = mc_duality_check(&k, &params, &x, &a, 20_000, 5).unwrap();
        let inst = DualityInstance::build(&k, &params, 5, &Caps::default()).unwrap();
        let exact = inst.p.matrix.row(config_index(&x)).dot(&inst.h.column(encode(&[1, 0, 1, 0, 0], 2)));
        assert!((check.lhs.estimate - exact).abs() < 4.0 * check.lhs.stderr);
        assert!((check.rhs.estimate - exact).abs() < 4.0 * check.rhs.stderr);

        let empty = params.state(vec![Default::default()]).unwrap();
        let c = mc_duality_check(&k, &params, &x, &empty, 3, 0).unwrap();
        assert_eq!((c.lhs.estimate, c.rhs.estimate), (1.0, 1.0));
        let nv = noisy_voter_kernel(3, &[0.05, 0.05, 0.0], 0.3, 0.3, 0.3).unwrap();
        let nvp = solve_voter_dual(&nv).unwrap();
        let conflict = nvp.state(vec![[1i64].into_iter().collect(), [1i64].into_iter().collect()]).unwrap();
        let x3 = RingConfig::new(3, vec![1, 1, 2, 3]).unwrap();
        let c = mc_duality_check(&nv, &nvp, &x3, &conflict, 3, 0).unwrap();
        assert_eq!((c.lhs.estimate, c.rhs.estimate), (0.0, 0.0));
    }
}
