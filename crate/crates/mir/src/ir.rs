//! The increment-ratio statistic.
//!
//! For a window length `ell`, the series is reduced to windowed increment
//! sums A_k = sum_{t=k+1..k+ell} (x[t+ell] - x[t]); the statistic averages
//! |A_k + A_{k+ell}| / (|A_k| + |A_{k+ell}|) over all admissible k. A term
//! with A_k = A_{k+ell} = 0 counts as 1: equal signs, degenerately.
//!
//! Everything is computed from one pass of prefix sums, O(n) per scale
//! independent of the window length.

use crate::error::{Error, Result};

/// Windowed second differences of the prefix sums: out[k] = A_k for
/// k = 0..n-2*ell. Shared by the statistic and by the tests' naive oracle.
fn increment_sums(x: &[f64], ell: usize) -> Vec<f64> {
    let n = x.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, &v) in x.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..=n - 2 * ell)
        .map(|k| prefix[k + 2 * ell] - 2.0 * prefix[k + ell] + prefix[k])
        .collect()
}

/// The increment ratio of `x` at window length `ell`.
///
/// Needs `x.len() >= 3*ell + 1` so that at least one ratio term exists.
pub fn ir_stat(x: &[f64], ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::BadParameter { name: "ell", value: 0.0, reason: "window must be >= 1" });
    }
    let n = x.len();
    let needed = 3 * ell + 1;
    if n < needed {
        return Err(Error::SeriesTooShort { n, needed });
    }
    let a = increment_sums(x, ell);
    let count = n - 3 * ell;
    let mut acc = 0.0;
    for k in 0..count {
        let (ak, bk) = (a[k], a[k + ell]);
        let denom = ak.abs() + bk.abs();
        acc += if denom == 0.0 { 1.0 } else { (ak + bk).abs() / denom };
    }
    Ok(acc / count as f64)
}

/// Increment ratios at window lengths `m, 2m, ..., p*m`.
pub fn ir_multiscale(x: &[f64], m: usize, p: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::BadParameter { name: "p", value: 0.0, reason: "need at least one scale" });
    }
    (1..=p).map(|j| ir_stat(x, j * m)).collect()
}
