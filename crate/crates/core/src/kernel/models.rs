//! The named model families.

use super::Kernel;
use crate::{Error, Result, PROB_TOL};

fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameters(format!("{name} = {v} is not in [0, 1]")));
    }
    Ok(())
}

/// Multi-opinion noisy voter model:
/// `p[i][j][k][m] = α·1{i=m} + β·1{j=m} + γ·1{k=m} + q_m`.
pub fn noisy_voter_kernel(states: usize, q: &[f64], alpha: f64, beta: f64, gamma: f64) -> Result<Kernel> {
    if q.len() != states {
        return Err(Error::InvalidParameters(format!("q has {} entries, expected {states}", q.len())));
    }
    for (m, &qm) in q.iter().enumerate() {
        check_probability(&format!("q_{}", m + 1), qm)?;
    }
    for (name, w) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !(w >= 0.0) {
            return Err(Error::InvalidParameters(format!("{name} = {w} is negative")));
        }
    }
    let total = alpha + beta + gamma + q.iter().sum::<f64>();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidParameters(format!("alpha + beta + gamma + sum(q) = {total}, expected 1")));
    }
    Kernel::from_fn(states, |i, j, k, m| {
        let ind = |s: u8| if s == m { 1.0 } else { 0.0 };
        alpha * ind(i) + beta * ind(j) + gamma * ind(k) + q[m as usize - 1]
    })
}

/// Domany-Kinzel model. Internal state 1 is the occupied state `1` and
/// internal state 2 the empty state `0`; the probability of becoming occupied
/// is `a_n` where `n` counts occupied sites among the two neighbours.
pub fn domany_kinzel_kernel(a0: f64, a1: f64, a2: f64) -> Result<Kernel> {
    let a = [a0, a1, a2];
    for (n, &v) in a.iter().enumerate() {
        check_probability(&format!("a_{n}"), v)?;
    }
    Kernel::from_fn(2, |i, _, k, m| {
        let occupied = (i == 1) as usize + (k == 1) as usize;
        if m == 1 {
            a[occupied]
        } else {
            1.0 - a[occupied]
        }
    })
}

/// Multi-species competition model. `p` holds the spontaneous appearance
/// probabilities `p_1..p_M`; `alpha` and `beta` hold `α_2..α_M` and
/// `β_2..β_M`. The kernel ignores the middle coordinate.
///
/// With left neighbour `a` and right neighbour `b`, the non-spontaneous mass
/// `1 - Σp` goes to `a` when `a = b`; to `b` with probability `α_b` (else to
/// `a`) when `a < b`; to `a` with probability `β_a` (else to `b`) when `a > b`.
pub fn competition_kernel(states: usize, p: &[f64], alpha: &[f64], beta: &[f64]) -> Result<Kernel> {
    if p.len() != states {
        return Err(Error::InvalidParameters(format!("p has {} entries, expected {states}", p.len())));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if v.len() + 1 != states {
            return Err(Error::InvalidParameters(format!(
                "{name} has {} entries, expected {} (indices 2..={states})",
                v.len(),
                states - 1
            )));
        }
    }
    for (m, &pm) in p.iter().enumerate() {
        check_probability(&format!("p_{}", m + 1), pm)?;
    }
    let total: f64 = p.iter().sum();
    if total > 1.0 + PROB_TOL {
        return Err(Error::InvalidParameters(format!("sum of p is {total} > 1")));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        for (idx, &x) in v.iter().enumerate() {
            if !(0.5..=1.0).contains(&x) {
                return Err(Error::InvalidParameters(format!("{name}_{} = {x} is not in [1/2, 1]", idx + 2)));
            }
        }
        for (idx, w) in v.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::InvalidParameters(format!(
                    "{name} must be nondecreasing: {name}_{} = {} > {name}_{} = {}",
                    idx + 2,
                    w[0],
                    idx + 3,
                    w[1]
                )));
            }
        }
    }
    let rest = 1.0 - total;
    Kernel::from_fn(states, |a, _, b, m| {
        let spontaneous = p[m as usize - 1];
        let contested = match a.cmp(&b) {
            std::cmp::Ordering::Equal => (m == a) as u8 as f64,
            std::cmp::Ordering::Less => {
                let win = alpha[b as usize - 2];
                if m == b {
                    win
                } else if m == a {
                    1.0 - win
                } else {
                    0.0
                }
            }
            std::cmp::Ordering::Greater => {
                let win = beta[a as usize - 2];
                if m == a {
                    win
                } else if m == b {
                    1.0 - win
                } else {
                    0.0
                }
            }
        };
        spontaneous + rest * contested
    })
}

/// Monotone model with cumulants `S^k_{i,j} = g_k(i + j)`. Row `k - 1` of
/// `g` holds `g_k(2), …, g_k(2M)` for `k = 1..M-1`.
pub fn convex_g_kernel(states: usize, g: &[Vec<f64>]) -> Result<Kernel> {
    if states < 2 || g.len() + 1 != states {
        return Err(Error::InvalidParameters(format!(
            "g has {} rows, expected M-1 = {}",
            g.len(),
            states.saturating_sub(1)
        )));
    }
    let width = 2 * states - 1;
    for (k, row) in g.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidParameters(format!(
                "g_{} has {} values, expected {width} (l = 2..={})",
                k + 1,
                row.len(),
                2 * states
            )));
        }
        for (l, &v) in row.iter().enumerate() {
            check_probability(&format!("g_{}({})", k + 1, l + 2), v)?;
        }
    }
    for k in 1..g.len() {
        for l in 0..width {
            if g[k][l] < g[k - 1][l] - PROB_TOL {
                return Err(Error::InvalidParameters(format!(
                    "g must be nondecreasing in k: g_{}({}) = {} < g_{}({}) = {}",
                    k + 1,
                    l + 2,
                    g[k][l],
                    k,
                    l + 2,
                    g[k - 1][l]
                )));
            }
        }
    }
    for (k, row) in g.iter().enumerate() {
        for l in 0..width - 2 {
            if 0.5 * (row[l] + row[l + 2]) < row[l + 1] - PROB_TOL {
                return Err(Error::InvalidParameters(format!(
                    "g_{} is not convex at l = {}: (g({}) + g({}))/2 = {} < g({}) = {}",
                    k + 1,
                    l + 2,
                    l + 2,
                    l + 4,
                    0.5 * (row[l] + row[l + 2]),
                    l + 3,
                    row[l + 1]
                )));
            }
        }
    }
    let cumulant = |k: u8, i: u8, j: u8| -> f64 {
        match k as usize {
            0 => 0.0,
            k if k == states => 1.0,
            k => g[k - 1][(i + j) as usize - 2],
        }
    };
    let w = states as u8;
    for i in 1..=w {
        for j in 1..=w {
            for m in 1..=w {
                let v = cumulant(m, i, j) - cumulant(m - 1, i, j);
                if v < -PROB_TOL {
                    return Err(Error::InvalidParameters(format!("recovered p[{i}][.][{j}][{m}] = {v} is negative")));
                }
            }
            if i < w {
                for k in 1..w {
                    if cumulant(k, i + 1, j) > cumulant(k, i, j) + PROB_TOL {
                        return Err(Error::InvalidParameters(format!(
                            "S must be nonincreasing: g_{k}({}) > g_{k}({})",
                            i + 1 + j,
                            i + j
                        )));
                    }
                }
            }
        }
    }
    Kernel::from_fn(states, |i, _, k, m| cumulant(m, i, k) - cumulant(m - 1, i, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noisy_voter_values() {
        let k = noisy_voter_kernel(3, &[0.05, 0.05, 0.0], 0.3, 0.3, 0.3).unwrap();
        assert!((k.p(1, 1, 1, 1) - 0.95).abs() < 1e-15);
        assert!((k.p(2, 1, 3, 1) - 0.35).abs() < 1e-15);
        assert!((k.p(2, 3, 2, 3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn noisy_voter_identity_dynamics() {
        let k = noisy_voter_kernel(2, &[0.0, 0.0], 0.0, 1.0, 0.0).unwrap();
        for i in 1..=2 {
            for j in 1..=2 {
                for l in 1..=2 {
                    for m in 1..=2 {
                        assert_eq!(k.p(i, j, l, m), (j == m) as u8 as f64);
                    }
                }
            }
        }
    }

    #[test]
    fn noisy_voter_rejects_bad_sum() {
        let err = noisy_voter_kernel(3, &[0.5, 0.5, 0.5], 0.3, 0.3, 0.3).unwrap_err();
        assert!(err.to_string().contains("2.4"), "{err}");
    }

    #[test]
    fn domany_kinzel_identification() {
        let k = domany_kinzel_kernel(0.1, 0.3, 0.6).unwrap();
        for j in 1..=2 {
            assert_eq!(k.p(1, j, 2, 1), 0.3);
            assert_eq!(k.p(2, j, 1, 1), 0.3);
            assert_eq!(k.p(1, j, 1, 1), 0.6);
            assert_eq!(k.p(2, j, 2, 1), 0.1);
        }
        let dead = domany_kinzel_kernel(0.0, 0.0, 0.0).unwrap();
        let full = domany_kinzel_kernel(1.0, 1.0, 1.0).unwrap();
        for row in dead.table().chunks(2) {
            assert_eq!(row, &[0.0, 1.0]);
        }
        for row in full.table().chunks(2) {
            assert_eq!(row, &[1.0, 0.0]);
        }
        assert!(domany_kinzel_kernel(0.1, 1.2, 0.3).is_err());
    }

    #[test]
    fn competition_values() {
        let k = competition_kernel(2, &[0.05, 0.05], &[0.7], &[0.7]).unwrap();
        for j in 1..=2 {
            assert!((k.p(1, j, 2, 2) - 0.68).abs() < 1e-15);
            assert!((k.p(2, j, 1, 2) - 0.68).abs() < 1e-15);
            assert!((k.p(1, j, 1, 1) - 0.95).abs() < 1e-15);
            assert!((k.p(2, j, 2, 2) - 0.95).abs() < 1e-15);
        }
        let neutral = competition_kernel(2, &[0.0, 0.0], &[0.5], &[0.5]).unwrap();
        assert_eq!(neutral.p(1, 1, 2, 1), neutral.p(2, 1, 1, 1));
        assert_eq!(neutral.p(1, 1, 2, 1), 0.5);
    }

    #[test]
    fn competition_preconditions() {
        assert!(competition_kernel(2, &[0.05, 0.05], &[0.4], &[0.7]).is_err());
        assert!(competition_kernel(3, &[0.05, 0.05, 0.0], &[0.8, 0.7], &[0.7, 0.7]).is_err());
        assert!(competition_kernel(2, &[0.6, 0.6], &[0.7], &[0.7]).is_err());
        assert!(competition_kernel(3, &[0.05, 0.05], &[0.7, 0.8], &[0.7, 0.8]).is_err());
    }

    #[test]
    fn convex_g_values_and_errors() {
        let g1: Vec<f64> = (2..=4).map(|l| (((4 - l) as f64) / 2.0).powi(2).clamp(0.0, 1.0)).collect();
        assert_eq!(g1, vec![1.0, 0.25, 0.0]);
        let k = convex_g_kernel(2, &[g1]).unwrap();
        assert_eq!(k.p(1, 2, 1, 1), 1.0);
        assert_eq!(k.p(1, 1, 2, 1), 0.25);
        assert_eq!(k.p(2, 1, 2, 2), 1.0);

        let fixed = convex_g_kernel(3, &[vec![1.0; 5], vec![1.0; 5]]).unwrap();
        for row in fixed.table().chunks(3) {
            assert_eq!(row, &[1.0, 0.0, 0.0]);
        }

        let err = convex_g_kernel(2, &[vec![0.0, 0.5, 0.0]]).unwrap_err();
        assert!(err.to_string().contains("not convex at l = 2"), "{err}");
        let err = convex_g_kernel(3, &[vec![0.9; 5], vec![0.5; 5]]).unwrap_err();
        assert!(err.to_string().contains("nondecreasing in k"), "{err}");
        // convex but increasing in l: recovered S would increase with i + j
        let err = convex_g_kernel(2, &[vec![0.0, 0.1, 0.3]]).unwrap_err();
        assert!(err.to_string().contains("nonincreasing"), "{err}");
    }
}
