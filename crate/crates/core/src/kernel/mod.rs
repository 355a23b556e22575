//! Nearest-neighbour PCA transition kernels.
//!
//! A kernel over `W = {1..M}` is the table `p[i][j][k][m]`, the probability
//! that a site whose left neighbour, own state and right neighbour are
//! `(i, j, k)` takes state `m` at the next step. The table is stored
//! row-major over `(i, j, k, m)`, which is also the flattened layout of the
//! `raw` model spec.

mod models;
mod spec;

pub use models::{competition_kernel, convex_g_kernel, domany_kinzel_kernel, noisy_voter_kernel};
pub use spec::ModelSpec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, PROB_TOL};

/// Largest supported alphabet; state sets are carried as `u64` bit masks.
pub const MAX_STATES: usize = 63;

/// Validated, immutable PCA kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    states: usize,
    table: Vec<f64>,
    cumulative: Vec<f64>,
    clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowViolation {
    /// Neighbourhood `(i, j, k)`, 1-based.
    pub row: [u8; 3],
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryViolation {
    /// Entry `(i, j, k, m)`, 1-based.
    pub entry: [u8; 4],
    pub value: f64,
}

/// Outcome of checking a raw probability table against the kernel invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub states: usize,
    pub valid: bool,
    pub shape_error: Option<String>,
    pub row_sum_violations: Vec<RowViolation>,
    /// Entries outside `[-tol, 1 + tol]`, or not finite.
    pub out_of_range: Vec<EntryViolation>,
    /// Entries within tolerance outside `[0, 1]`; clamped on construction.
    pub clamped: Vec<EntryViolation>,
}

impl ValidationReport {
    pub fn has_clamps(&self) -> bool {
        !self.clamped.is_empty()
    }

    fn first_failure(&self) -> String {
        if let Some(e) = &self.shape_error {
            return e.clone();
        }
        if let Some(v) = self.out_of_range.first() {
            return format!("entry p{:?} = {} is not a probability", v.entry, v.value);
        }
        if let Some(r) = self.row_sum_violations.first() {
            return format!("row {:?} sums to {}", r.row, r.sum);
        }
        "ok".into()
    }
}

#[inline]
pub(crate) fn row_index(states: usize, i: u8, j: u8, k: u8) -> usize {
    ((i as usize - 1) * states + (j as usize - 1)) * states + (k as usize - 1)
}

fn entry_label(states: usize, flat: usize) -> [u8; 4] {
    let m = flat % states;
    let k = (flat / states) % states;
    let j = (flat / states / states) % states;
    let i = flat / states / states / states;
    [i as u8 + 1, j as u8 + 1, k as u8 + 1, m as u8 + 1]
}

/// Checks a flattened `(i, j, k, m)` table against the kernel invariants:
/// entries in `[0, 1]` up to a clamping window of `1e-12`, and every row
/// summing to 1 within `1e-12` after clamping.
pub fn validate_kernel(states: usize, table: &[f64]) -> ValidationReport {
    let mut report = ValidationReport {
        states,
        valid: false,
        shape_error: None,
        row_sum_violations: Vec::new(),
        out_of_range: Vec::new(),
        clamped: Vec::new(),
    };
    if !(2..=MAX_STATES).contains(&states) {
        report.shape_error = Some(format!("state count {states} outside 2..={MAX_STATES}"));
        return report;
    }
    let expected = states.pow(4);
    if table.len() != expected {
        report.shape_error = Some(format!("table has {} entries, expected M^4 = {expected}", table.len()));
        return report;
    }
    for (row, chunk) in table.chunks(states).enumerate() {
        let mut sum = 0.0;
        for (m, &v) in chunk.iter().enumerate() {
            let flat = row * states + m;
            let clamped = if !v.is_finite() || v < -PROB_TOL || v > 1.0 + PROB_TOL {
                report.out_of_range.push(EntryViolation { entry: entry_label(states, flat), value: v });
                continue;
            } else if v < 0.0 || v > 1.0 {
                report.clamped.push(EntryViolation { entry: entry_label(states, flat), value: v });
                v.clamp(0.0, 1.0)
            } else {
                v
            };
            sum += clamped;
        }
        if (sum - 1.0).abs() > PROB_TOL {
            let l = entry_label(states, row * states);
            report.row_sum_violations.push(RowViolation { row: [l[0], l[1], l[2]], sum });
        }
    }
    report.valid = report.out_of_range.is_empty() && report.row_sum_violations.is_empty();
    report
}

impl Kernel {
    /// Builds a kernel from a flattened `(i, j, k, m)` table, applying the
    /// clamping policy of [`validate_kernel`].
    pub fn from_table(states: usize, table: Vec<f64>) -> Result<Self> {
        let report = validate_kernel(states, &table);
        if !report.valid {
            return Err(Error::InvalidKernel(report.first_failure()));
        }
        let clamped = report.has_clamps();
        let table: Vec<f64> = table.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let mut cumulative = vec![0.0; table.len()];
        for (row, out) in table.chunks(states).zip(cumulative.chunks_mut(states)) {
            let mut acc = 0.0;
            for (c, &v) in out.iter_mut().zip(row) {
                acc += v;
                *c = acc;
            }
        }
        Ok(Self { states, table, cumulative, clamped })
    }

    /// Builds a kernel by evaluating `f(i, j, k, m)` on every 1-based index.
    pub fn from_fn(states: usize, mut f: impl FnMut(u8, u8, u8, u8) -> f64) -> Result<Self> {
        if !(2..=MAX_STATES).contains(&states) {
            return Err(Error::InvalidKernel(format!("state count {states} outside 2..={MAX_STATES}")));
        }
        let w = states as u8;
        let mut table = Vec::with_capacity(states.pow(4));
        for i in 1..=w {
            for j in 1..=w {
                for k in 1..=w {
                    for m in 1..=w {
                        table.push(f(i, j, k, m));
                    }
                }
            }
        }
        Self::from_table(states, table)
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// `p[i][j][k][m]`, 1-based.
    #[inline]
    pub fn p(&self, i: u8, j: u8, k: u8, m: u8) -> f64 {
        self.table[row_index(self.states, i, j, k) * self.states + m as usize - 1]
    }

    /// Distribution of the next state for neighbourhood `(i, j, k)`.
    pub fn row(&self, i: u8, j: u8, k: u8) -> &[f64] {
        let r = row_index(self.states, i, j, k) * self.states;
        &self.table[r..r + self.states]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Whether any entry was clamped into `[0, 1]` on construction.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    pub fn validate(&self) -> ValidationReport {
        validate_kernel(self.states, &self.table)
    }

    /// Inverse-CDF sample of the next state given a uniform `u` in `[0, 1)`.
    #[inline]
    pub fn sample(&self, i: u8, j: u8, k: u8, u: f64) -> u8 {
        self.sample_row(row_index(self.states, i, j, k), u)
    }

    #[inline(always)]
    pub(crate) fn sample_row(&self, row: usize, u: f64) -> u8 {
        let cum = &self.cumulative[row * self.states..(row + 1) * self.states];
        for (m, &c) in cum[..self.states - 1].iter().enumerate() {
            if u < c {
                return m as u8 + 1;
            }
        }
        self.states as u8
    }

    /// Whether `p[i][j][k][m]` is independent of the middle coordinate `j`
    /// within `tol`.
    pub fn is_middle_independent(&self, tol: f64) -> bool {
        let w = self.states as u8;
        (1..=w).all(|i| {
            (1..=w).all(|k| {
                (1..=w).all(|m| {
                    let first = self.p(i, 1, k, m);
                    (2..=w).all(|j| (self.p(i, j, k, m) - first).abs() <= tol)
                })
            })
        })
    }
}

/// A permutation `σ` of `{1..M}`, stored as the images `σ(1), …, σ(M)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRelabeling {
    images: Vec<u8>,
}

impl StateRelabeling {
    pub fn new(images: Vec<u8>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &s in &images {
            let idx = s as usize;
            if idx == 0 || idx > n || seen[idx - 1] {
                return Err(Error::InvalidParameters(format!("relabeling {images:?} is not a permutation of 1..={n}")));
            }
            seen[idx - 1] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(states: usize) -> Self {
        Self { images: (1..=states as u8).collect() }
    }

    /// Transposition of two states.
    pub fn swap(states: usize, a: u8, b: u8) -> Result<Self> {
        let mut images: Vec<u8> = (1..=states as u8).collect();
        if a == 0 || b == 0 || a as usize > states || b as usize > states {
            return Err(Error::InvalidParameters(format!("swap({a}, {b}) outside 1..={states}")));
        }
        images.swap(a as usize - 1, b as usize - 1);
        Ok(Self { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, state: u8) -> u8 {
        self.images[state as usize - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (i, &s) in self.images.iter().enumerate() {
            images[s as usize - 1] = i as u8 + 1;
        }
        Self { images }
    }
}

/// Relabels the alphabet: `p'[σi][σj][σk][σm] = p[i][j][k][m]`.
pub fn relabel_states(kernel: &Kernel, sigma: &StateRelabeling) -> Result<Kernel> {
    if sigma.len() != kernel.states() {
        return Err(Error::InvalidParameters(format!(
            "relabeling acts on {} states, kernel has {}",
            sigma.len(),
            kernel.states()
        )));
    }
    let inv = sigma.inverse();
    Kernel::from_fn(kernel.states(), |i, j, k, m| kernel.p(inv.apply(i), inv.apply(j), inv.apply(k), inv.apply(m)))
}
