//! Stationarity and nonstationarity decisions built on the adaptive
//! estimate.
//!
//! Both tests compare the estimate against 1/2 with a band whose width is
//! the plug-in asymptotic standard error at the boundary; the threshold
//! variant moves the boundary to any d0 in the estimable range, which at
//! d0 = 0 becomes a test for long memory.

use crate::asymcov::GammaTable;
use crate::error::{Error, Result};
use crate::estimator::EstimationReport;

/// What is being tested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestKind {
    /// H0: d <= 1/2 (the series side is stationary).
    Stationarity,
    /// H0: d >= 1/2.
    Nonstationarity,
    /// H0: d <= d0.
    Threshold(f64),
}

/// Outcome of one test.
#[derive(Debug, Clone)]
pub struct TestDecision {
    pub kind: TestKind,
    /// The adaptive estimate the decision is based on.
    pub statistic: f64,
    /// Boundary of the acceptance region on the estimate's scale.
    pub threshold: f64,
    pub level: f64,
    pub accept: bool,
    /// One-sided tail probability under the boundary null; asymptotic,
    /// plug-in variance.
    pub p_value: f64,
    pub n: usize,
    pub p: usize,
    pub alpha_tilde: f64,
}

/// Scale count as a stepwise function of the sample size.
pub fn select_p(n: usize) -> usize {
    match n {
        _ if n < 120 => 5,
        _ if n < 800 => 10,
        _ if n < 10000 => 15,
        _ => 20,
    }
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal distribution function.
///
/// Rational initial guess polished by one Newton step on the CDF; absolute
/// error well under 1e-8 across (0, 1).  The upper half folds onto the
/// lower by symmetry so the Newton residual Phi(x) - q is always formed
/// from two small numbers rather than two numbers near 1.
pub fn normal_quantile(q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "quantile argument {q} outside (0, 1)");
    if q > 0.5 {
        -quantile_lower_half(1.0 - q)
    } else {
        quantile_lower_half(q)
    }
}

fn quantile_lower_half(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if q < P_LOW {
        let u = (-2.0 * q.ln()).sqrt();
        (((((C[0] * u + C[1]) * u + C[2]) * u + C[3]) * u + C[4]) * u + C[5])
            / ((((D[0] * u + D[1]) * u + D[2]) * u + D[3]) * u + 1.0)
    } else {
        let u = q - 0.5;
        let r = u * u;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * u
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    x - (normal_cdf(x) - q) / pdf
}

fn check_report(report: &EstimationReport) -> Result<()> {
    if report.se.is_none() {
        return Err(Error::BadParameter {
            name: "d_tilde",
            value: report.d_tilde,
            reason: "no limit theorem backs a test at this estimate",
        });
    }
    Ok(())
}

fn boundary_band(report: &EstimationReport, d0: f64, table: &GammaTable) -> Result<f64> {
    let sig = table.restrict(report.p)?.sigma_d(d0)?;
    Ok(sig * (report.n as f64).powf((report.alpha_tilde - 1.0) / 2.0))
}

/// Accept stationarity unless the estimate clears 1/2 by more than the
/// boundary band.
pub fn stationarity_test(
    report: &EstimationReport,
    level: f64,
    table: &GammaTable,
) -> Result<TestDecision> {
    let d = threshold_test(report, 0.5, level, table)?;
    Ok(TestDecision { kind: TestKind::Stationarity, ..d })
}

/// Mirror image: accept nonstationarity unless the estimate falls below
/// 1/2 by more than the boundary band.
pub fn nonstationarity_test(
    report: &EstimationReport,
    level: f64,
    table: &GammaTable,
) -> Result<TestDecision> {
    check_report(report)?;
    let band = boundary_band(report, 0.5, table)?;
    let q = normal_quantile(1.0 - level);
    let threshold = 0.5 - band * q;
    Ok(TestDecision {
        kind: TestKind::Nonstationarity,
        statistic: report.d_tilde,
        threshold,
        level,
        accept: report.d_tilde >= threshold,
        p_value: normal_cdf((report.d_tilde - 0.5) / band),
        n: report.n,
        p: report.p,
        alpha_tilde: report.alpha_tilde,
    })
}

/// One-sided test of d <= d0 against d > d0 at any boundary in the
/// estimable range.
pub fn threshold_test(
    report: &EstimationReport,
    d0: f64,
    level: f64,
    table: &GammaTable,
) -> Result<TestDecision> {
    if !(-0.5..1.25).contains(&d0) {
        return Err(Error::BadParameter {
            name: "d0",
            value: d0,
            reason: "test boundary must lie in (-0.5, 1.25)",
        });
    }
    check_report(report)?;
    if !(level > 0.0 && level < 0.5) {
        return Err(Error::BadParameter {
            name: "level",
            value: level,
            reason: "type-I error must lie in (0, 0.5)",
        });
    }
    let (lo, hi) = table.domain();
    let band = boundary_band(report, d0.clamp(lo, hi), table)?;
    let q = normal_quantile(1.0 - level);
    let threshold = d0 + band * q;
    Ok(TestDecision {
        kind: TestKind::Threshold(d0),
        statistic: report.d_tilde,
        threshold,
        level,
        accept: report.d_tilde <= threshold,
        p_value: 1.0 - normal_cdf((report.d_tilde - d0) / band),
        n: report.n,
        p: report.p,
        alpha_tilde: report.alpha_tilde,
    })
}
