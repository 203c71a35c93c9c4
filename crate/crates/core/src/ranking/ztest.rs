//! Two-sided pooled two-proportion z-test.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZTest {
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
    pub significant: bool,
}

/// Compare `hits1 / n1` with `hits2 / n2` under the pooled null proportion.
/// When the pooled standard error is zero (both rates 0 or both 1) the
/// proportions are identical and `z = 0`.
pub fn two_proportion_ztest(hits1: u64, n1: u64, hits2: u64, n2: u64, alpha: f64) -> Result<ZTest> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("both samples need at least one trial"));
    }
    if hits1 > n1 || hits2 > n2 {
        return Err(Error::invalid("more hits than trials"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie strictly between 0 and 1"));
    }
    let (h1, n1, h2, n2) = (hits1 as f64, n1 as f64, hits2 as f64, n2 as f64);
    let pooled = (h1 + h2) / (n1 + n2);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let z = if se == 0.0 {
        0.0
    } else {
        (h1 / n1 - h2 / n2) / se
    };
    let normal = Normal::standard();
    let p_value = 2.0 * normal.sf(z.abs());
    Ok(ZTest {
        z,
        p_value,
        significant: p_value < alpha,
    })
}
