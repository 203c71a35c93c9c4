//! Paired bootstrap for the difference of two τc values against the same labels.

use rand::Rng;

use super::tau::tau_c;
use crate::error::{Error, Result};
use crate::seed::rng_from;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapCi {
    /// `τc(a, y) - τc(b, y)` on the full sample.
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// Resamples where both τc were defined.
    pub used: usize,
}

/// Percentile interval at `level` from `reps` resamples of the observations.
pub fn tau_c_difference_ci(
    a: &[f64],
    b: &[f64],
    y: &[f64],
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCi> {
    if a.len() != y.len() || b.len() != y.len() {
        return Err(Error::invalid("score and label sequences differ in length"));
    }
    if !(level > 0.0 && level < 1.0) || reps == 0 {
        return Err(Error::invalid("need reps > 0 and a level in (0, 1)"));
    }
    let estimate = tau_c(a, y)? - tau_c(b, y)?;
    let n = y.len();
    let mut rng = rng_from(seed);
    let mut diffs = Vec::with_capacity(reps);
    let (mut ra, mut rb, mut ry) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..reps {
        for k in 0..n {
            let i = rng.random_range(0..n);
            ra[k] = a[i];
            rb[k] = b[i];
            ry[k] = y[i];
        }
        if let (Ok(x), Ok(z)) = (tau_c(&ra, &ry), tau_c(&rb, &ry)) {
            diffs.push(x - z);
        }
    }
    if diffs.is_empty() {
        return Err(Error::Undefined("τc undefined on every resample".into()));
    }
    diffs.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (diffs.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        diffs[lo] + (diffs[hi] - diffs[lo]) * (pos - lo as f64)
    };
    let tail = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        estimate,
        lower: q(tail),
        upper: q(1.0 - tail),
        used: diffs.len(),
    })
}
