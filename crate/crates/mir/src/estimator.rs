//! Adaptive multiscale estimation of the memory parameter.
//!
//! The pipeline inverts the link function at scales m, 2m, ..., pm, pools
//! the per-scale estimates by generalized least squares under the plug-in
//! covariance, scans a logarithmic grid of base scales for the one whose
//! residuals look most like the asymptotic regime, then nudges the winner
//! up by a log log correction before producing the final estimate, its
//! standard error, and a confidence interval.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::asymcov::GammaTable;
use crate::error::{Error, Result};
use crate::ir::ir_multiscale;
use crate::lambda::{lambda0_inverse, lambda0_prime};
use crate::stattest::normal_quantile;

/// Fewest ratio terms required at the largest scale p*m.
pub const MIN_TERMS: usize = 20;

/// Memory parameters at and beyond this have no central limit theorem, so
/// reports there carry a point estimate but no interval.
pub const CLT_LIMIT: f64 = 1.25;

/// Per-scale estimates at one base scale.
#[derive(Debug, Clone)]
pub struct DhatProfile {
    /// Link-inverted estimates at scales m, 2m, ..., pm.
    pub dhat: Vec<f64>,
    /// The raw ratio statistics they came from.
    pub ir: Vec<f64>,
    /// True when any ratio fell outside the attainable range of the link
    /// and its estimate was clamped to the domain edge.
    pub clamped: bool,
}

/// One probed base scale in the selection scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub alpha: f64,
    pub m: usize,
    pub q: f64,
}

/// Everything the adaptive estimator decided and why.
#[derive(Debug, Clone)]
pub struct EstimationReport {
    pub n: usize,
    pub p: usize,
    /// Adaptive estimate of the memory parameter.
    pub d_tilde: f64,
    /// Scale exponent picked by the scan and its corrected version.
    pub alpha_hat: f64,
    pub alpha_tilde: f64,
    /// Base scale actually used, floor(N^alpha_tilde) after feasibility.
    pub m_tilde: usize,
    pub profile: DhatProfile,
    /// Standard error and central confidence interval; absent when the
    /// estimate sits where no limit theorem backs an interval.
    pub se: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub level: f64,
    pub scan: Vec<ScanPoint>,
    /// Scan candidates were dropped to keep enough ratio terms.
    pub truncated_scan: bool,
    /// Two scan candidates tied exactly; the smaller exponent won.
    pub tied_scan: bool,
    /// The corrected exponent overshot the feasible range and was pulled
    /// back to the largest workable scale.
    pub alpha_clamped: bool,
}

/// Link-inverted estimates at scales m, 2m, ..., pm.
pub fn dhat_profile(x: &[f64], m: usize, p: usize) -> Result<DhatProfile> {
    let ir = ir_multiscale(x, m, p)?;
    let mut clamped = false;
    let dhat = ir
        .iter()
        .map(|&v| {
            let inv = lambda0_inverse(v);
            clamped |= inv.clamped;
            inv.d
        })
        .collect();
    Ok(DhatProfile { dhat, ir, clamped })
}

/// Plug-in covariance of the per-scale estimates: the tabulated ratio
/// covariance at `d`, scaled by the inverse squared link slope. Lookups
/// saturate at the tabulated domain ends.
pub fn sigma_hat(d: f64, table: &GammaTable) -> Result<DMatrix<f64>> {
    let (lo, hi) = table.domain();
    let dc = d.clamp(lo, hi);
    let slope = lambda0_prime(dc);
    Ok(table.gamma(dc)? / (slope * slope))
}

fn cholesky_with_ridge(
    sigma: &DMatrix<f64>,
) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = sigma.clone().cholesky() {
        return Ok(c);
    }
    let p = sigma.nrows();
    let ridge = 1e-8 * sigma.trace() / p as f64;
    let bumped = sigma + DMatrix::identity(p, p) * ridge;
    bumped.cholesky().ok_or(Error::NotPositiveDefinite { what: "plug-in covariance" })
}

/// Covariance-weighted mean of the per-scale estimates.
pub fn gls_estimate(dhat: &[f64], sigma: &DMatrix<f64>) -> Result<f64> {
    let p = dhat.len();
    if sigma.nrows() != p || sigma.ncols() != p {
        return Err(Error::BadParameter {
            name: "sigma",
            value: sigma.nrows() as f64,
            reason: "covariance dimension must match the estimate count",
        });
    }
    let chol = cholesky_with_ridge(sigma)?;
    let ones = DVector::from_element(p, 1.0);
    let d = DVector::from_column_slice(dhat);
    let w = chol.solve(&ones);
    Ok(w.dot(&d) / w.dot(&ones))
}

/// Pseudo-generalized squared distance between the per-scale estimates and
/// their pooled value at base scale floor(N^alpha).
pub fn qn(alpha: f64, x: &[f64], p: usize, table: &GammaTable) -> Result<f64> {
    let n = x.len();
    let m = (n as f64).powf(alpha).floor() as usize;
    qn_at_m(m, x, p, table)
}

fn qn_at_m(m: usize, x: &[f64], p: usize, table: &GammaTable) -> Result<f64> {
    let profile = dhat_profile(x, m.max(1), p)?;
    if p == 1 {
        return Ok(0.0);
    }
    let sigma = sigma_hat(profile.dhat[0], table)?;
    let d_tilde = gls_estimate(&profile.dhat, &sigma)?;
    let resid = DVector::from_iterator(p, profile.dhat.iter().map(|v| v - d_tilde));
    let chol = cholesky_with_ridge(&sigma)?;
    Ok(resid.dot(&chol.solve(&resid)))
}

/// The logarithmic scale grid: exponents k/log N for integer k >= 2, i.e.
/// base scales floor(e^k), kept while the largest window still leaves
/// MIN_TERMS ratio terms. Returns (alpha, m) pairs and whether any raw
/// candidate had to be dropped.
fn alpha_grid(n: usize, p: usize) -> (Vec<(f64, usize)>, bool) {
    let logn = (n as f64).ln();
    let kmax = (n as f64 / p as f64).ln();
    let mut grid = Vec::new();
    let mut truncated = false;
    let mut k = 2.0;
    while k <= kmax {
        let m = k.exp().floor() as usize;
        if n >= 3 * p * m + MIN_TERMS {
            grid.push((k / logn, m));
        } else {
            truncated = true;
        }
        k += 1.0;
    }
    (grid, truncated)
}

/// Scan the scale grid for the exponent with the smallest pooled residual.
/// Ties break toward the smaller exponent. Returns the winner, the full
/// scan log, and the (truncated, tied) flags.
pub fn select_alpha(
    x: &[f64],
    p: usize,
    table: &GammaTable,
) -> Result<(f64, Vec<ScanPoint>, bool, bool)> {
    let n = x.len();
    let (grid, truncated) = alpha_grid(n, p);
    if grid.is_empty() {
        return Err(Error::InfeasibleWindow { n, p, min_terms: MIN_TERMS });
    }
    let scan: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&(alpha, m)| Ok(ScanPoint { alpha, m, q: qn_at_m(m, x, p, table)? }))
        .collect::<Result<_>>()?;
    let mut best = scan[0];
    let mut tied = false;
    for pt in &scan[1..] {
        if pt.q < best.q {
            best = *pt;
        } else if pt.q == best.q {
            tied = true;
        }
    }
    Ok((best.alpha, scan, truncated, tied))
}

/// The full adaptive pipeline.
///
/// `p` defaults to the sample-size stepwise rule; `level` is the two-sided
/// type-I error of the reported interval. The table must cover at least
/// `p` scales; a larger one is restricted.
pub fn adaptive_estimate(
    x: &[f64],
    level: f64,
    p_override: Option<usize>,
    table: &GammaTable,
) -> Result<EstimationReport> {
    let n = x.len();
    if n < 50 {
        return Err(Error::SeriesTooShort { n, needed: 50 });
    }
    if !(level > 0.0 && level < 0.5) {
        return Err(Error::BadParameter {
            name: "level",
            value: level,
            reason: "type-I error must lie in (0, 0.5)",
        });
    }
    let p = p_override.unwrap_or_else(|| crate::stattest::select_p(n));
    if p < 3 {
        return Err(Error::BadParameter {
            name: "p",
            value: p as f64,
            reason: "the adaptive correction needs at least three scales",
        });
    }
    let restricted;
    let table = if table.p() == p {
        table
    } else {
        restricted = table.restrict(p)?;
        &restricted
    };

    let (alpha_hat, scan, truncated_scan, tied_scan) = select_alpha(x, p, table)?;
    let logn = (n as f64).ln();
    let correction =
        6.0 * alpha_hat / ((p as f64 - 2.0) * (1.0 - alpha_hat)) * logn.ln() / logn;
    let alpha_tilde_raw = alpha_hat + correction;
    let m_max = (n - MIN_TERMS) / (3 * p);
    let m_raw = ((n as f64).powf(alpha_tilde_raw).floor() as usize).max(1);
    let (m_tilde, alpha_clamped) =
        if m_raw > m_max { (m_max.max(1), true) } else { (m_raw, false) };
    let alpha_tilde =
        if alpha_clamped { (m_tilde as f64).ln() / logn } else { alpha_tilde_raw };

    let profile = dhat_profile(x, m_tilde, p)?;
    let sigma = sigma_hat(profile.dhat[0], table)?;
    let d_tilde = gls_estimate(&profile.dhat, &sigma)?;

    let no_clt = d_tilde >= CLT_LIMIT;
    let (se, ci) = if no_clt {
        (None, None)
    } else {
        let s = table.sigma_d(d_tilde.clamp(table.domain().0, table.domain().1))?
            * (n as f64).powf((alpha_tilde - 1.0) / 2.0);
        let q = normal_quantile(1.0 - level / 2.0);
        (Some(s), Some((d_tilde - q * s, d_tilde + q * s)))
    };

    Ok(EstimationReport {
        n,
        p,
        d_tilde,
        alpha_hat,
        alpha_tilde,
        m_tilde,
        profile,
        se,
        ci,
        level,
        scan,
        truncated_scan,
        tied_scan,
        alpha_clamped,
    })
}
