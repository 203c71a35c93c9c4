//! Stuart-Kendall τc and Kendall τb.
//!
//! Both come from `S = P - Q`, concordant minus discordant pairs, counted
//! in O(n log n): sort by `(x, y)`, count inversions of `y` with a merge
//! sort, and correct for tied pairs.

use crate::error::{Error, Result};

/// Pair counts needed by the τ variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub n: u64,
    /// Concordant minus discordant pairs.
    pub s: i64,
    /// Pairs tied in x (including those also tied in y).
    pub ties_x: u64,
    pub ties_y: u64,
    pub distinct_x: u64,
    pub distinct_y: u64,
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Insufficient(
            "rank correlation needs at least two observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN in rank correlation input"));
    }
    Ok(())
}

/// Sum of `t(t-1)/2` over runs of equal keys in a sorted sequence, plus the number of runs.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> (u64, u64) {
    let (mut pairs, mut runs, mut run) = (0u64, 0u64, 0u64);
    for i in 0..sorted.len() {
        if i > 0 && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            pairs += run * (run + 1) / 2;
            runs += 1;
            run = 0;
        }
    }
    (pairs + run * (run + 1) / 2, runs)
}

/// Sort `v` and return how many pairs were out of order.
fn inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let (a, b) = v.split_at_mut(n / 2);
    let mut count = inversions(a) + inversions(b);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if b[j] < a[i] {
            merged.push(b[j]);
            count += (a.len() - i) as u64;
            j += 1;
        } else {
            merged.push(a[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&a[i..]);
    merged.extend_from_slice(&b[j..]);
    v.copy_from_slice(&merged);
    count
}

pub fn pair_counts(x: &[f64], y: &[f64]) -> Result<PairCounts> {
    check(x, y)?;
    let n = x.len() as u64;
    // Adding 0.0 turns -0.0 into 0.0, so the total order below treats them as one value.
    let mut xy: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    xy.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = xy.iter().map(|p| p.0).collect();
    let (ties_x, distinct_x) = tied_pairs(&xs);
    let (ties_xy, _) = tied_pairs(&xy);
    let mut ys: Vec<f64> = xy.iter().map(|p| p.1).collect();
    let discordant = inversions(&mut ys);
    let (ties_y, distinct_y) = tied_pairs(&ys);
    let total = n * (n - 1) / 2;
    let s = total as i64 - ties_x as i64 - ties_y as i64 + ties_xy as i64 - 2 * discordant as i64;
    Ok(PairCounts {
        n,
        s,
        ties_x,
        ties_y,
        distinct_x,
        distinct_y,
    })
}

impl PairCounts {
    /// `2m S / (n² (m - 1))` with `m` the smaller number of distinct values.
    pub fn tau_c(&self) -> Result<f64> {
        let m = self.distinct_x.min(self.distinct_y);
        if m < 2 {
            return Err(Error::Undefined("τc of a constant sequence".into()));
        }
        let (m, n) = (m as f64, self.n as f64);
        Ok(2.0 * m * self.s as f64 / (n * n * (m - 1.0)))
    }

    pub fn tau_b(&self) -> Result<f64> {
        let total = self.n * (self.n - 1) / 2;
        let d = ((total - self.ties_x) as f64 * (total - self.ties_y) as f64).sqrt();
        if d == 0.0 {
            return Err(Error::Undefined("τb of a constant sequence".into()));
        }
        Ok(self.s as f64 / d)
    }
}

/// Stuart-Kendall τc.
pub fn tau_c(x: &[f64], y: &[f64]) -> Result<f64> {
    pair_counts(x, y)?.tau_c()
}

/// Kendall τb; equals τa when neither sequence has ties.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    pair_counts(x, y)?.tau_b()
}
