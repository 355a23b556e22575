//! Ergodicity criteria and dual-based equilibrium estimates.
//!
//! When every absorbing dual state other than the empty one has `d < 1`,
//! the unique equilibrium satisfies `ν̂(A) = P_A(ξ̃ reaches ∅ before ℘)`,
//! where `ξ̃` is the dual killed with probability `1 - d` at each step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{check_monotone_class, check_voter_class, moves_from_patterns, DualProcess, DualStatus, Topology};
use crate::kernel::{relabel_states, Kernel, StateRelabeling};
use crate::lattice::{empirical_cylinder_prob, simulate, InitialCondition, SimulationConfig};
use crate::rng::{Channel, RandomStream};
use crate::stats::{z_score, Estimate};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Ergodic,
    NotErgodic,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityVerdict {
    pub verdict: Verdict,
    pub conditions: Vec<Condition>,
    /// The condition (or counter-structure) the verdict rests on.
    pub witness: Option<String>,
}

impl ErgodicityVerdict {
    fn from_sufficient(conditions: Vec<Condition>) -> Self {
        let witness = conditions.iter().find(|c| c.holds).map(|c| c.name.clone());
        let verdict = if witness.is_some() { Verdict::Ergodic } else { Verdict::Unknown };
        Self { verdict, conditions, witness }
    }

    pub fn satisfied(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| c.holds)
    }
}

/// Voter-class criterion with state `M` as background. Conditions i–iii are
/// exact; condition iv is replaced by the sufficient branching bound (a
/// single spontaneous opinion whose dual blocks have mean size below one).
/// Non-ergodicity is reported when no opinion below `M` appears
/// spontaneously and some pure state `j < M` never flips to `M`.
pub fn check_corvoter1(kernel: &Kernel) -> Result<ErgodicityVerdict> {
    let report = check_voter_class(kernel);
    if let Some(fail) = report.summary.first_required_failure() {
        return Err(Error::NotInClass { class: "voter", reason: format!("{} ({})", fail.name, fail.detail) });
    }
    let w = kernel.states() as u8;
    let spont: Vec<f64> = report.patterns.iter().map(|pv| pv.values[0]).collect();
    let to_bg = |i: u8| kernel.p(i, i, i, w);
    let positive: Vec<u8> = (1..w).filter(|&m| spont[m as usize - 1] > 0.0).collect();

    let cond_i = (1..w).all(|i| to_bg(i) > 0.0);
    let cond_ii = positive.len() >= 2;
    let iii_witness = positive.iter().copied().find(|&m| to_bg(m) > 0.0);
    let surrogate = match positive.as_slice() {
        [m] if to_bg(*m) == 0.0 => {
            let pv = &report.patterns[*m as usize - 1];
            moves_from_patterns(&pv.values).map(|mv| (*m, mv.mean_offspring()))
        }
        _ => None,
    };
    let mut conditions = vec![
        Condition {
            name: "i".into(),
            holds: cond_i,
            detail: format!("p_iii,M for i < M: {:?}", (1..w).map(to_bg).collect::<Vec<_>>()),
        },
        Condition { name: "ii".into(), holds: cond_ii, detail: format!("spontaneous p_m for m < M: {spont:?}") },
        Condition {
            name: "iii".into(),
            holds: iii_witness.is_some(),
            detail: match iii_witness {
                Some(m) => format!("m = {m}: p_m = {}, p_mmm,M = {}", spont[m as usize - 1], to_bg(m)),
                None => "no m with p_m > 0 and p_mmm,M > 0".into(),
            },
        },
        Condition {
            name: "iv (branching bound)".into(),
            holds: surrogate.is_some_and(|(_, mean)| mean < 1.0),
            detail: match surrogate {
                Some((m, mean)) => format!("m = {m}: mean block size {mean}"),
                None => "not applicable".into(),
            },
        },
    ];
    let mut verdict = ErgodicityVerdict::from_sufficient(conditions.clone());
    let blocked: Vec<u8> = (1..w).filter(|&j| to_bg(j) == 0.0).collect();
    if positive.is_empty() && !blocked.is_empty() {
        conditions.push(Condition {
            name: "necessity (a)".into(),
            holds: true,
            detail: format!(
                "no spontaneous opinion below M and pure state {} never flips to M: δ_M and δ_{} are both invariant",
                blocked[0], blocked[0]
            ),
        });
        verdict = ErgodicityVerdict { verdict: Verdict::NotErgodic, witness: Some("necessity (a)".into()), conditions };
    }
    Ok(verdict)
}

/// Applies [`check_corvoter1`] with each state in turn as the background
/// (states are swapped with `M`). Orientations outside the voter class are
/// listed as failed conditions.
pub fn check_voter_orientations(kernel: &Kernel) -> Result<ErgodicityVerdict> {
    let w = kernel.states() as u8;
    let mut conditions = Vec::new();
    let mut ergodic = None;
    let mut not_ergodic = None;
    let mut any_in_class = false;
    for bg in (1..=w).rev() {
        let sigma = StateRelabeling::swap(w as usize, bg, w)?;
        let relabelled = relabel_states(kernel, &sigma)?;
        let tag = format!("background {bg}");
        match check_corvoter1(&relabelled) {
            Ok(v) => {
                any_in_class = true;
                for c in &v.conditions {
                    conditions.push(Condition {
                        name: format!("{tag}: {}", c.name),
                        holds: c.holds,
                        detail: c.detail.clone(),
                    });
                }
                let witness = v.witness.map(|wt| format!("{tag}: {wt}"));
                match v.verdict {
                    Verdict::Ergodic if ergodic.is_none() => ergodic = witness,
                    Verdict::NotErgodic if not_ergodic.is_none() => not_ergodic = witness,
                    _ => {}
                }
            }
            Err(e) => {
                conditions.push(Condition { name: format!("{tag}: voter class"), holds: false, detail: e.to_string() })
            }
        }
    }
    if !any_in_class {
        return Err(Error::NotInClass {
            class: "voter",
            reason: "no choice of background state puts the kernel in the voter class".into(),
        });
    }
    let (verdict, witness) = match (ergodic, not_ergodic) {
        (Some(w), _) => (Verdict::Ergodic, Some(w)),
        (None, Some(w)) => (Verdict::NotErgodic, Some(w)),
        (None, None) => (Verdict::Unknown, None),
    };
    Ok(ErgodicityVerdict { verdict, conditions, witness })
}

/// The five sufficient conditions for the Domany-Kinzel model.
pub fn check_cordkm(a0: f64, a1: f64, a2: f64) -> Result<ErgodicityVerdict> {
    if !(0.0 <= a0 && a0 <= a1 && a1 <= a2 && a2 <= 1.0) {
        return Err(Error::InvalidParameters(format!("expected 0 <= a0 <= a1 <= a2 <= 1, got ({a0}, {a1}, {a2})")));
    }
    let cond = |name: &str, holds: bool, detail: &str| Condition { name: name.into(), holds, detail: detail.into() };
    let mut verdict = ErgodicityVerdict::from_sufficient(vec![
        cond("i", a0 + a2 >= 2.0 * a1 && a2 < 1.0, "a0 + a2 >= 2 a1 and a2 < 1"),
        cond("ii", a0 + a2 < 2.0 * a1 && a0 > 0.0, "a0 + a2 < 2 a1 and a0 > 0"),
        cond("iii", a0 > 0.0 && a2 < 1.0, "a0 > 0 and a2 < 1"),
        cond("iv", a0 == 0.0 && a1 < 0.5 && a2 < 1.0, "a0 = 0, a1 < 1/2 and a2 < 1"),
        cond("v", a0 > 0.0 && a1 > 0.5 && a2 == 1.0, "a0 > 0, a1 > 1/2 and a2 = 1"),
    ]);
    // the later conditions are the sharper ones; cite the last that holds
    verdict.witness = verdict.conditions.iter().rev().find(|c| c.holds).map(|c| c.name.clone());
    Ok(verdict)
}

/// Monotone-class criterion: ergodic if `p_11,M > 0`.
pub fn check_corvoter3(kernel: &Kernel) -> Result<ErgodicityVerdict> {
    let report = check_monotone_class(kernel);
    if let Some(fail) = report.summary.first_required_failure() {
        return Err(Error::NotInClass { class: "monotone", reason: format!("{} ({})", fail.name, fail.detail) });
    }
    let w = kernel.states() as u8;
    let p = kernel.p(1, 1, 1, w);
    Ok(ErgodicityVerdict::from_sufficient(vec![Condition {
        name: "p_11,M > 0".into(),
        holds: p > 0.0,
        detail: format!("p_11,M = {p}"),
    }]))
}

/// Combines verdicts: any proof of ergodicity wins, then any proof of
/// non-ergodicity, else unknown.
pub fn combine_verdicts(verdicts: impl IntoIterator<Item = (String, ErgodicityVerdict)>) -> ErgodicityVerdict {
    let mut conditions = Vec::new();
    let mut ergodic = None;
    let mut not_ergodic = None;
    for (source, v) in verdicts {
        for c in v.conditions {
            conditions.push(Condition { name: format!("{source}: {}", c.name), ..c });
        }
        let witness = v.witness.map(|w| format!("{source}: {w}"));
        match v.verdict {
            Verdict::Ergodic if ergodic.is_none() => ergodic = witness,
            Verdict::NotErgodic if not_ergodic.is_none() => not_ergodic = witness,
            _ => {}
        }
    }
    let (verdict, witness) = match (ergodic, not_ergodic) {
        (Some(w), _) => (Verdict::Ergodic, Some(w)),
        (None, Some(w)) => (Verdict::NotErgodic, Some(w)),
        (None, None) => (Verdict::Unknown, None),
    };
    ErgodicityVerdict { verdict, conditions, witness }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOptions {
    pub replicas: u64,
    pub max_steps: u64,
    pub seed: u64,
    pub topology: Topology,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self { replicas: 100_000, max_steps: 1_000_000, seed: 0, topology: Topology::Line }
    }
}

/// Outcome counts of the killed dual chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingEstimate {
    /// `successes / (successes + failures)`.
    pub estimate: f64,
    pub stderr: f64,
    /// Reached the empty state.
    pub successes: u64,
    /// Killed into the cemetery, or stuck in an absorbing state with `d < 1`.
    pub failures: u64,
    /// Stuck in a frozen absorbing state with `d = 1`; excluded from the
    /// estimate because `H` is not constant there.
    pub frozen: u64,
    /// Still running at `max_steps`.
    pub censored: u64,
    pub censored_fraction: f64,
    pub replicas: u64,
    pub max_steps: u64,
}

impl HittingEstimate {
    pub fn as_estimate(&self) -> Estimate {
        Estimate { estimate: self.estimate, stderr: self.stderr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Success,
    Failure,
    Frozen,
    Censored,
}

fn run_killed<D: DualProcess>(
    params: &D,
    start: &D::State,
    opts: &EquilibriumOptions,
    stream: &RandomStream,
    r: u64,
) -> Outcome {
    let dual = stream.replica(Channel::Dual, r);
    let survival = stream.replica(Channel::Survival, r);
    let mut state = params.place(start, opts.topology);
    for t in 0..=opts.max_steps {
        let d = params.weight(&state);
        match params.status(&state) {
            DualStatus::AbsorbedEmpty => return Outcome::Success,
            DualStatus::AbsorbedConflict => return Outcome::Failure,
            DualStatus::Frozen if d >= 1.0 => return Outcome::Frozen,
            DualStatus::Frozen => return Outcome::Failure,
            DualStatus::Active => {}
        }
        if t == opts.max_steps {
            break;
        }
        if d < 1.0 && survival.step(t).at(0) >= d {
            return Outcome::Failure;
        }
        state = params.step(&state, &mut dual.step(t), opts.topology);
    }
    Outcome::Censored
}

/// Estimates `ν̂(A)` as the probability that the killed dual started at `A`
/// reaches the empty state.
pub fn estimate_equilibrium<D: DualProcess>(
    params: &D,
    start: &D::State,
    opts: &EquilibriumOptions,
) -> Result<HittingEstimate> {
    if opts.replicas == 0 || opts.max_steps == 0 {
        return Err(Error::InvalidParameters("replicas and max_steps must be at least 1".into()));
    }
    let stream = RandomStream::new(opts.seed);
    let counts = (0..opts.replicas)
        .into_par_iter()
        .map(|r| {
            let mut c = [0u64; 4];
            c[run_killed(params, start, opts, &stream, r) as usize] += 1;
            c
        })
        .reduce(|| [0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    let [successes, failures, frozen, censored] = counts;
    let e = Estimate::binomial(successes, successes + failures);
    Ok(HittingEstimate {
        estimate: e.estimate,
        stderr: e.stderr,
        successes,
        failures,
        frozen,
        censored,
        censored_fraction: censored as f64 / opts.replicas as f64,
        replicas: opts.replicas,
        max_steps: opts.max_steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckOptions {
    pub length: usize,
    pub steps: u64,
    pub forward_replicas: u64,
    /// Product initial measures, one weight vector over `1..=M` each.
    pub initial_measures: Vec<Vec<f64>>,
    pub dual: EquilibriumOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckRow {
    pub cylinder: usize,
    pub dual: HittingEstimate,
    /// One per initial measure.
    pub forward: Vec<Estimate>,
    pub max_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub rows: Vec<CrosscheckRow>,
    pub max_z: f64,
    pub warning: Option<String>,
}

fn max_pairwise_z(estimates: &[Estimate]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            let z = z_score(*a, *b);
            worst = if z.is_nan() { f64::NAN } else { worst.max(z) };
        }
    }
    worst
}

/// Compares `ν̂(A)` from the killed dual with forward-simulation estimates
/// of the matching cylinder from several initial measures.
pub fn crosscheck_equilibrium<D: DualProcess>(
    kernel: &Kernel,
    params: &D,
    cylinders: &[D::State],
    opts: &CrosscheckOptions,
    verdict: Verdict,
) -> Result<CrosscheckReport> {
    if opts.initial_measures.len() < 2 {
        return Err(Error::InvalidParameters("at least two initial measures are needed".into()));
    }
    if kernel.states() != params.states() {
        return Err(Error::InvalidParameters("kernel and dual alphabets differ".into()));
    }
    // distinct seeds per measure: shared uniforms would couple the runs
    // until they coalesce, making the forward estimates identical
    let samples = opts
        .initial_measures
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let init = InitialCondition::Product { length: opts.length, weights: w.clone() };
            simulate(
                &init,
                kernel,
                &SimulationConfig {
                    steps: opts.steps,
                    replicas: opts.forward_replicas,
                    seed: opts.dual.seed.wrapping_add(1 + i as u64),
                    snapshot_every: None,
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (idx, a) in cylinders.iter().enumerate() {
        let dual = estimate_equilibrium(params, a, &opts.dual)?;
        let forward = match params.cylinder(a, opts.length) {
            Some(cyl) => samples.iter().map(|s| empirical_cylinder_prob(s, &cyl)).collect::<Result<Vec<_>>>()?,
            None => vec![Estimate::exact(0.0); samples.len()],
        };
        let mut all = vec![dual.as_estimate()];
        all.extend(forward.iter().copied());
        rows.push(CrosscheckRow { cylinder: idx, dual, forward, max_z: max_pairwise_z(&all) });
    }
    let max_z = rows.iter().map(|r| r.max_z).fold(0.0, f64::max);
    let warning = (verdict != Verdict::Ergodic)
        .then(|| "ergodicity not established: forward estimates may depend on the initial measure".to_string());
    Ok(CrosscheckReport { rows, max_z, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{solve_voter_dual, MoveProbs, OpinionDual, VoterDualParams};
    use crate::kernel::{competition_kernel, convex_g_kernel, domany_kinzel_kernel, noisy_voter_kernel};

    #[test]
    fn cordkm_examples() {
        let v = check_cordkm(0.0, 0.4, 0.9).unwrap();
        assert_eq!(v.verdict, Verdict::Ergodic);
        assert_eq!(v.witness.as_deref(), Some("iv"));
        let v = check_cordkm(0.1, 0.3, 0.6).unwrap();
        assert_eq!(v.verdict, Verdict::Ergodic);
        let held: Vec<_> = v.satisfied().map(|c| c.name.as_str()).collect();
        assert_eq!(held, vec!["i", "iii"]);
        assert_eq!(v.witness.as_deref(), Some("iii"));
        assert_eq!(check_cordkm(0.0, 0.6, 0.9).unwrap().verdict, Verdict::Unknown);
        assert!(check_cordkm(0.3, 0.2, 0.6).is_err());
    }

    #[test]
    fn noisy_voter_verdicts() {
        for q in [[0.05, 0.0, 0.0], [0.0, 0.05, 0.0], [0.0, 0.0, 0.05], [0.02, 0.03, 0.0]] {
            let k = noisy_voter_kernel(3, &q, 0.3, 0.35, 0.3).unwrap();
            assert_eq!(check_voter_orientations(&k).unwrap().verdict, Verdict::Ergodic, "{q:?}");
        }
        let k = noisy_voter_kernel(3, &[0.0; 3], 0.3, 0.4, 0.3).unwrap();
        let v = check_corvoter1(&k).unwrap();
        assert_eq!(v.verdict, Verdict::NotErgodic);
        assert_eq!(check_voter_orientations(&k).unwrap().verdict, Verdict::NotErgodic);
    }

    #[test]
    fn branching_bound() {
        // a2 = 1: occupied pure state never empties, only opinion 1 is
        // spontaneous, and blocks have mean size 2 a2 - 2 a1
        let v = check_corvoter1(&domany_kinzel_kernel(0.05, 0.4, 1.0).unwrap()).unwrap();
        let iv = v.conditions.iter().find(|c| c.name.starts_with("iv")).unwrap();
        assert!(!iv.holds, "{}", iv.detail);
        assert_eq!(v.verdict, Verdict::Unknown);

        let v = check_corvoter1(&domany_kinzel_kernel(0.05, 0.6, 1.0).unwrap());
        assert!(v.is_err(), "a1 > (a0 + a2)/2 is outside the class");
        let v = check_voter_orientations(&domany_kinzel_kernel(0.05, 0.6, 1.0).unwrap()).unwrap();
        assert_eq!(v.verdict, Verdict::Ergodic);
    }

    #[test]
    fn monotone_verdicts() {
        let k = competition_kernel(3, &[0.02, 0.03, 0.05], &[0.6, 0.8], &[0.7, 0.9]).unwrap();
        assert_eq!(check_corvoter3(&k).unwrap().verdict, Verdict::Ergodic);
        let k = competition_kernel(2, &[0.05, 0.0], &[0.7], &[0.7]).unwrap();
        assert_eq!(check_corvoter3(&k).unwrap().verdict, Verdict::Unknown);
        let g = convex_g_kernel(3, &[vec![0.6, 0.35, 0.2, 0.1, 0.05], vec![0.9, 0.6, 0.4, 0.25, 0.15]]).unwrap();
        assert_eq!(check_corvoter3(&g).unwrap().verdict, Verdict::Ergodic);
        let mid = Kernel::from_fn(2, |_, j, _, m| if j == m { 0.9 } else { 0.1 }).unwrap();
        assert!(check_corvoter3(&mid).is_err());
    }

    #[test]
    fn equilibrium_edge_cases() {
        let params = solve_voter_dual(&domany_kinzel_kernel(0.1, 0.3, 0.6).unwrap()).unwrap();
        let opts = EquilibriumOptions { replicas: 100, max_steps: 1000, ..Default::default() };
        let empty = params.state(vec![Default::default()]).unwrap();
        let e = estimate_equilibrium(&params, &empty, &opts).unwrap();
        assert_eq!((e.estimate, e.stderr, e.successes), (1.0, 0.0, 100));

        let dead = VoterDualParams::new(
            2,
            vec![OpinionDual {
                opinion: 1,
                weight: 1e-300,
                moves: MoveProbs::from_array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            }],
            vec![],
        )
        .unwrap();
        let e = estimate_equilibrium(&dead, &dead.singleton(1, 0), &opts).unwrap();
        assert_eq!((e.estimate, e.failures), (0.0, 100));
    }

    #[test]
    fn censoring_and_frozen_are_tallied() {
        // d = 1 and the set never dies: every replica hits the cap
        let still = VoterDualParams::new(
            2,
            vec![OpinionDual {
                opinion: 1,
                weight: 1.0,
                moves: MoveProbs::from_array([0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]),
            }],
            vec![],
        )
        .unwrap();
        let opts = EquilibriumOptions { replicas: 10, max_steps: 50, ..Default::default() };
        let e = estimate_equilibrium(&still, &still.singleton(1, 0), &opts).unwrap();
        assert_eq!((e.censored, e.censored_fraction), (10, 1.0));
        assert!(e.estimate.is_nan());

        let k = noisy_voter_kernel(3, &[0.0, 0.0, 0.0], 0.0, 1.0, 0.0).unwrap();
        let p = solve_voter_dual(&k).unwrap();
        assert_eq!(p.frozen, vec![1, 2]);
        let e = estimate_equilibrium(&p, &p.singleton(1, 0), &opts).unwrap();
        assert_eq!(e.frozen, 10);
    }

    #[test]
    fn dual_estimate_is_monotone_in_the_set() {
        let params = solve_voter_dual(&domany_kinzel_kernel(0.1, 0.3, 0.6).unwrap()).unwrap();
        let opts = EquilibriumOptions { replicas: 20_000, max_steps: 10_000, seed: 9, ..Default::default() };
        let one = estimate_equilibrium(&params, &params.singleton(1, 0), &opts).unwrap();
        let two = estimate_equilibrium(&params, &params.state(vec![[0i64, 1].into_iter().collect()]).unwrap(), &opts)
            .unwrap();
        assert!(two.estimate <= one.estimate + 3.0 * (one.stderr.hypot(two.stderr)));
        assert!(two.estimate < one.estimate);
    }

    #[test]
    fn crosscheck_small_instance() {
        let k = noisy_voter_kernel(2, &[0.1, 0.1], 0.3, 0.2, 0.3).unwrap();
        let params = solve_voter_dual(&k).unwrap();
        let opts = CrosscheckOptions {
            length: 30,
            steps: 60,
            forward_replicas: 2000,
            initial_measures: vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            dual: EquilibriumOptions { replicas: 20_000, max_steps: 10_000, seed: 4, ..Default::default() },
        };
        let empty = params.state(vec![Default::default()]).unwrap();
        let report =
            crosscheck_equilibrium(&k, &params, &[params.singleton(1, 0), empty], &opts, Verdict::Ergodic).unwrap();
        assert!(report.warning.is_none());
        assert!(report.rows[0].max_z < 4.0, "{:?}", report.rows[0]);
        assert!(report.rows[1].forward.iter().all(|e| e.estimate == 1.0));
        assert_eq!(report.rows[1].dual.estimate, 1.0);
    }

    #[test]
    fn non_ergodic_crosscheck_separates_pure_starts() {
        let k = noisy_voter_kernel(2, &[0.0, 0.0], 0.3, 0.4, 0.3).unwrap();
        let params = solve_voter_dual(&k).unwrap();
        let opts = CrosscheckOptions {
            length: 20,
            steps: 10,
            forward_replicas: 200,
            initial_measures: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            dual: EquilibriumOptions { replicas: 100, max_steps: 100, seed: 1, ..Default::default() },
        };
        let report =
            crosscheck_equilibrium(&k, &params, &[params.singleton(1, 0)], &opts, Verdict::NotErgodic).unwrap();
        assert!(report.warning.is_some());
        let f = &report.rows[0].forward;
        assert_eq!((f[0].estimate, f[1].estimate), (1.0, 0.0));
    }
}
