//! Asymptotic covariance of the multiscale increment-ratio vector.
//!
//! The scaled ratio statistics at window sizes m, 2m, ..., pm are jointly
//! asymptotically Gaussian; the entries of their limiting covariance are
//! time-shift integrals of increment-ratio cross moments under the limit
//! processes from [`zcov`]. This module computes those entries directly,
//! estimates them from simulation for validation, and ships precomputed
//! tables with shape-preserving interpolation for the estimator hot path.

pub mod inner;
pub mod zcov;

mod empirical;
mod table;

pub use empirical::gamma_empirical;
pub use table::{GammaTable, TableMethod};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lambda::{lambda0, rho};

/// Discretization of the time-shift integral.
#[derive(Debug, Clone, Copy)]
pub struct SigmaOptions {
    /// Half-width of the integration range in window units.
    pub tau_max: f64,
    /// Trapezoid step.
    pub tau_step: f64,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self { tau_max: 50.0, tau_step: 0.05 }
    }
}

/// One covariance entry plus a power-law estimate of the truncated tail
/// (reported, never added).
#[derive(Debug, Clone, Copy)]
pub struct SigmaEntry {
    pub value: f64,
    pub tail_estimate: f64,
}

/// Centered cross moment of the two ratio kernels at time shift `tau`,
/// routing the geometrically degenerate shifts to their exact reductions.
fn centered_cross(d: f64, i: usize, j: usize, tau: f64, lam0sq: f64) -> Result<f64> {
    if i == j {
        let fi = i as f64;
        if tau.abs() < 1e-9 {
            return Ok(inner::expect_ratio_square(rho(d)) - lam0sq);
        }
        if (tau.abs() - fi).abs() < 1e-9 {
            // abutting windows share one endpoint sum: a three-variable chain
            let ts = [0.0, fi, 2.0 * fi];
            let s3 = nalgebra::Matrix3::from_fn(|r, c| zcov::zcov(d, i, i, ts[r], ts[c]));
            return Ok(inner::expect_ratio_chain(&s3)? - lam0sq);
        }
    }
    let s4 = zcov::pair_sigma(d, i, j, tau);
    Ok(inner::expect_ratio_product(&s4)? - lam0sq)
}

/// Consecutive near-zero evaluations after which the shift integral stops
/// early; the abandoned mass is below 1e-11 of the running peak.
const STOP_RUN: usize = 40;

fn stop_threshold(peak: f64) -> f64 {
    1e-13 * peak.max(1e-3)
}

/// Entry (i, j) of the asymptotic covariance of the scaled ratio vector:
/// the integral over time shifts of the centered cross moment.
pub fn sigma_entry(d: f64, i: usize, j: usize, opts: &SigmaOptions) -> Result<SigmaEntry> {
    if i == 0 || j == 0 {
        return Err(Error::BadParameter {
            name: "scale",
            value: 0.0,
            reason: "scale multipliers start at 1",
        });
    }
    if !(d > -0.5 && d < 1.25) {
        return Err(Error::BadParameter {
            name: "d",
            value: d,
            reason: "memory parameter must lie in (-0.5, 1.25)",
        });
    }
    if !(opts.tau_step > 0.0 && opts.tau_max >= opts.tau_step) {
        return Err(Error::BadParameter {
            name: "tau_step",
            value: opts.tau_step,
            reason: "need 0 < tau_step <= tau_max",
        });
    }
    let h = opts.tau_step;
    let n = (opts.tau_max / h).round() as usize;
    let lam0 = lambda0(d);
    let lam0sq = lam0 * lam0;

    let f0 = centered_cross(d, i, j, 0.0, lam0sq)?;
    let mut acc = f0;
    let mut peak = f0.abs();
    let mut low_run = 0usize;
    let mut edge_tau = 0.0;
    let mut edge_mag = f0.abs();

    if i == j {
        // the centered moment is even in the shift
        for k in 1..=n {
            let tau = k as f64 * h;
            let f = centered_cross(d, i, j, tau, lam0sq)?;
            acc += if k == n { f } else { 2.0 * f };
            peak = peak.max(f.abs());
            edge_tau = tau;
            edge_mag = 2.0 * f.abs();
            low_run = if f.abs() < stop_threshold(peak) { low_run + 1 } else { 0 };
            if low_run >= STOP_RUN {
                break;
            }
        }
    } else {
        for k in 1..=n {
            let tau = k as f64 * h;
            let fp = centered_cross(d, i, j, tau, lam0sq)?;
            let fm = centered_cross(d, i, j, -tau, lam0sq)?;
            let w = if k == n { 0.5 } else { 1.0 };
            acc += w * (fp + fm);
            let m = fp.abs().max(fm.abs());
            peak = peak.max(m);
            edge_tau = tau;
            edge_mag = fp.abs() + fm.abs();
            low_run = if m < stop_threshold(peak) { low_run + 1 } else { 0 };
            if low_run >= STOP_RUN {
                break;
            }
        }
    }

    // the centered moment decays like |tau|^(4d - 6); integrate that bound
    // past the last evaluated shift
    let tail_estimate = if edge_tau > 0.0 { edge_mag * edge_tau / (5.0 - 4.0 * d) } else { 0.0 };
    Ok(SigmaEntry { value: h * acc, tail_estimate })
}

/// Upper triangle (row-major, i <= j) of the p x p asymptotic covariance,
/// plus the largest tail estimate across entries.
pub fn gamma_upper(d: f64, p: usize, opts: &SigmaOptions) -> Result<(Vec<f64>, f64)> {
    if p == 0 {
        return Err(Error::BadParameter {
            name: "p",
            value: 0.0,
            reason: "need at least one scale",
        });
    }
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    let mut worst_tail = 0.0f64;
    for i in 1..=p {
        for j in i..=p {
            let e = sigma_entry(d, i, j, opts)?;
            out.push(e.value);
            worst_tail = worst_tail.max(e.tail_estimate);
        }
    }
    Ok((out, worst_tail))
}

/// Symmetric matrix assembled from an upper triangle.
pub fn matrix_from_upper(p: usize, upper: &[f64]) -> DMatrix<f64> {
    debug_assert_eq!(upper.len(), p * (p + 1) / 2);
    let mut m = DMatrix::zeros(p, p);
    let mut idx = 0;
    for i in 0..p {
        for j in i..p {
            m[(i, j)] = upper[idx];
            m[(j, i)] = upper[idx];
            idx += 1;
        }
    }
    m
}

/// The p x p asymptotic covariance of the scaled ratio vector at memory
/// parameter `d`, computed entry by entry.
pub fn gamma_matrix(d: f64, p: usize, opts: &SigmaOptions) -> Result<DMatrix<f64>> {
    let (upper, _) = gamma_upper(d, p, opts)?;
    Ok(matrix_from_upper(p, &upper))
}
