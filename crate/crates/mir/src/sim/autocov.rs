//! Autocovariance sequences of the stationary model families.
//!
//! Throughout, gamma(k) is normalized against the spectral density f by
//! gamma(k) = integral of f(x) e^{ikx} over [-pi, pi], so white noise of
//! variance v has f = v / (2 pi).

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use std::f64::consts::PI;

fn check_var(var: f64) -> Result<()> {
    if var > 0.0 && var.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter { name: "var", value: var, reason: "variance must be positive" })
    }
}

/// Fractionally integrated noise of order d in [-1/2, 1/2): lag zero in
/// closed gamma-function form, then the two-term ratio recursion.
pub fn arfima00_autocov(d: f64, var: f64, nlags: usize) -> Result<Vec<f64>> {
    check_var(var)?;
    if !(-0.5..0.5).contains(&d) {
        return Err(Error::BadParameter {
            name: "d",
            value: d,
            reason: "stationary branch needs -0.5 <= d < 0.5",
        });
    }
    let mut g = Vec::with_capacity(nlags);
    if nlags == 0 {
        return Ok(g);
    }
    g.push(var * (libm::lgamma(1.0 - 2.0 * d) - 2.0 * libm::lgamma(1.0 - d)).exp());
    for k in 1..nlags {
        let kf = k as f64;
        let next = g[k - 1] * (kf - 1.0 + d) / (kf - d);
        g.push(next);
    }
    Ok(g)
}

/// Fractional Gaussian noise increments with Hurst index h in (0, 1).
pub fn fgn_autocov(h: f64, var: f64, nlags: usize) -> Result<Vec<f64>> {
    check_var(var)?;
    if !(0.0 < h && h < 1.0) {
        return Err(Error::BadParameter {
            name: "h",
            value: h,
            reason: "Hurst index must lie in (0, 1)",
        });
    }
    let a = 2.0 * h;
    let g = (0..nlags)
        .map(|k| {
            if k == 0 {
                return var;
            }
            let kf = k as f64;
            if k <= 1000 {
                0.5 * var * ((kf + 1.0).powf(a) - 2.0 * kf.powf(a) + (kf - 1.0).powf(a))
            } else {
                // second difference of k^a cancels catastrophically at long
                // lags; switch to its expansion in 1/k^2
                let u2 = 1.0 / (kf * kf);
                let c2 = a * (a - 1.0);
                let c4 = c2 * (a - 2.0) * (a - 3.0) / 12.0;
                let c6 = c4 * (a - 4.0) * (a - 5.0) / 30.0;
                0.5 * var * kf.powf(a) * (u2 * (c2 + u2 * (c4 + u2 * c6)))
            }
        })
        .collect();
    Ok(g)
}

/// Smallest root modulus of 1 + c1 z + ... + ck z^k, via the companion
/// matrix of the monic rescaling.
fn min_root_modulus(coeffs: &[f64]) -> f64 {
    let p = coeffs.len();
    let cp = coeffs[p - 1];
    let mut m = nalgebra::DMatrix::<f64>::zeros(p, p);
    for i in 1..p {
        m[(i, i - 1)] = 1.0;
    }
    m[(0, p - 1)] = -1.0 / cp;
    for i in 1..p {
        m[(i, p - 1)] = -coeffs[i - 1] / cp;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
}

fn trim_trailing_zeros(v: &[f64]) -> &[f64] {
    let mut n = v.len();
    while n > 0 && v[n - 1] == 0.0 {
        n -= 1;
    }
    &v[..n]
}

/// Moving-average representation of the causal ARMA filter
/// (1 + ma.B) / (1 + ar.B); errors if the autoregressive polynomial has a
/// root on or inside the unit circle. Weights are kept until the last
/// max(p, 1) of them drop below 1e-17 of the largest seen.
pub fn arma_ma_weights(ar: &[f64], ma: &[f64]) -> Result<Vec<f64>> {
    let ar = trim_trailing_zeros(ar);
    let ma = trim_trailing_zeros(ma);
    if !ar.is_empty() {
        let modulus = min_root_modulus(ar);
        if !(modulus > 1.0 + 1e-12) {
            return Err(Error::UnstableFilter { modulus });
        }
    }
    let mut psi = vec![1.0];
    psi.extend_from_slice(ma);
    if ar.is_empty() {
        return Ok(psi);
    }
    let (p, q) = (ar.len(), ma.len());
    let mut peak = 1.0f64;
    // psi_j = theta_j - sum_i ar_i psi_{j-i}
    for j in 1..=(1usize << 21) {
        let mut v = if j <= q { ma[j - 1] } else { 0.0 };
        for i in 1..=p.min(j) {
            v -= ar[i - 1] * psi[j - i];
        }
        if j <= q {
            psi[j] = v;
        } else {
            psi.push(v);
        }
        peak = peak.max(v.abs());
        if j > q + p && psi[psi.len() - p..].iter().all(|w| w.abs() < 1e-17 * peak) {
            return Ok(psi);
        }
    }
    Err(Error::Numeric {
        what: "arma_ma_weights",
        detail: format!(
            "filter did not decay within 2^21 terms (smallest root modulus {:.6})",
            min_root_modulus(ar)
        ),
    })
}

/// out[l] = sum_a w[a] w[a+l], via FFT when the direct product is large.
fn weight_autocorr(w: &[f64]) -> Vec<f64> {
    let l = w.len();
    if l.saturating_mul(l) <= (1 << 22) {
        let mut out = vec![0.0; l];
        for (lag, slot) in out.iter_mut().enumerate() {
            *slot = (0..l - lag).map(|a| w[a] * w[a + lag]).sum();
        }
        return out;
    }
    use rustfft::{num_complex::Complex, FftPlanner};
    let size = (2 * l).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> =
        w.iter().map(|&v| Complex::new(v, 0.0)).chain(std::iter::repeat(Complex::ZERO)).take(size).collect();
    planner.plan_fft_forward(size).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    buf[..l].iter().map(|z| z.re / size as f64).collect()
}

/// Autocovariance of the filtered series psi(B) Y given that of Y.
/// `gy` must extend to nlags + psi.len() - 1 entries.
fn filter_autocov(psi: &[f64], gy: &[f64], nlags: usize) -> Vec<f64> {
    let l = psi.len();
    assert!(gy.len() >= nlags + l - 1, "need {} base lags, got {}", nlags + l - 1, gy.len());
    let c = weight_autocorr(psi);
    let mut out = vec![0.0; nlags];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = c[0] * gy[k];
        for (lag, &cl) in c.iter().enumerate().skip(1) {
            acc += cl * (gy[k + lag] + gy[k.abs_diff(lag)]);
        }
        *slot = acc;
    }
    out
}

/// Full ARFIMA autocovariance: fractional integration of order d pushed
/// through the ARMA filter (1 + ma.B)/(1 + ar.B).
pub fn arfima_autocov(d: f64, ar: &[f64], ma: &[f64], var: f64, nlags: usize) -> Result<Vec<f64>> {
    let psi = arma_ma_weights(ar, ma)?;
    if psi.len() == 1 {
        return arfima00_autocov(d, var, nlags);
    }
    let base = arfima00_autocov(d, var, nlags + psi.len() - 1)?;
    Ok(filter_autocov(&psi, &base, nlags))
}

/// integral of x^{-a} cos(kx) over [0, pi], for a < 1: a power-series head
/// below the first oscillation, then Gauss-Legendre panels one period wide.
pub(crate) fn cos_power_moment(a: f64, k: usize, rule: &GaussLegendre) -> f64 {
    debug_assert!(a < 1.0);
    if k == 0 {
        return PI.powf(1.0 - a) / (1.0 - a);
    }
    let kf = k as f64;
    let eps = 1.0 / kf;
    let e1a = eps.powf(1.0 - a);
    let ke2 = (kf * eps) * (kf * eps);
    let mut s = 1.0; // (k eps)^{2m} / (2m)!
    let mut head = 0.0;
    for m in 0..40u32 {
        let t = s * e1a / (2.0 * f64::from(m) + 1.0 - a);
        head += if m % 2 == 0 { t } else { -t };
        if s * e1a < 1e-18 {
            break;
        }
        s *= ke2 / ((2.0 * f64::from(m) + 1.0) * (2.0 * f64::from(m) + 2.0));
    }
    let panels = ((PI - eps) * kf / PI).ceil().max(1.0) as usize;
    let width = (PI - eps) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = eps + p as f64 * width;
        acc += rule.integrate(lo, lo + width, |x| x.powf(-a) * (kf * x).cos());
    }
    head + acc
}

/// Autocovariance for the spectral density (var/2pi) |x|^{-2d} (1 + c1 |x|^beta).
pub fn powerlaw_autocov(d: f64, c1: f64, beta: f64, var: f64, nlags: usize) -> Result<Vec<f64>> {
    check_var(var)?;
    if !(-0.5..0.5).contains(&d) {
        return Err(Error::BadParameter {
            name: "d",
            value: d,
            reason: "stationary branch needs -0.5 <= d < 0.5",
        });
    }
    if !(0.0 < beta && beta <= 2.0) {
        return Err(Error::BadParameter {
            name: "beta",
            value: beta,
            reason: "perturbation exponent must lie in (0, 2]",
        });
    }
    if 1.0 + c1 * PI.powf(beta) <= 0.0 {
        return Err(Error::BadParameter {
            name: "c1",
            value: c1,
            reason: "density must stay positive on (0, pi]",
        });
    }
    let rule = GaussLegendre::new(12);
    Ok((0..nlags)
        .map(|k| {
            var / PI * (cos_power_moment(2.0 * d, k, &rule) + c1 * cos_power_moment(2.0 * d - beta, k, &rule))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn fractional_noise_matches_frozen_values() {
        // reference: gamma-function closed form evaluated in extended precision
        let g = arfima00_autocov(0.25, 1.0, 4).unwrap();
        assert_relative_eq!(g[0], 1.180340599016096, max_relative = 1e-13);
        assert_relative_eq!(g[1], 0.393446866338699, max_relative = 1e-13);
        let g = arfima00_autocov(-0.3, 2.0, 3).unwrap();
        assert_relative_eq!(g[0], 2.218663602752488, max_relative = 1e-13);
    }

    #[test]
    fn fractional_noise_obeys_the_lag_recursion() {
        for d in [-0.45, -0.1, 0.0, 0.2, 0.49] {
            let g = arfima00_autocov(d, 1.3, 200).unwrap();
            for k in 1..200 {
                let kf = k as f64;
                assert_relative_eq!(g[k], g[k - 1] * (kf - 1.0 + d) / (kf - d), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn white_noise_special_cases() {
        let g = arfima00_autocov(0.0, 1.7, 5).unwrap();
        assert_abs_diff_eq!(g[0], 1.7, epsilon = 1e-14);
        for k in 1..5 {
            assert_abs_diff_eq!(g[k], 0.0, epsilon = 1e-14);
        }
        let g = fgn_autocov(0.5, 1.7, 5).unwrap();
        assert_abs_diff_eq!(g[0], 1.7, epsilon = 1e-14);
        for k in 1..5 {
            assert_abs_diff_eq!(g[k], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn fgn_series_tail_is_continuous_with_the_closed_form() {
        for h in [0.1, 0.3, 0.55, 0.75, 0.95] {
            let g = fgn_autocov(h, 1.0, 1203).unwrap();
            // recompute lag 1001 by the closed form the code abandons there
            let a = 2.0 * h;
            let k = 1001f64;
            let closed = 0.5 * ((k + 1.0).powf(a) - 2.0 * k.powf(a) + (k - 1.0).powf(a));
            assert_relative_eq!(g[1001], closed, max_relative = 1e-8);
        }
    }

    #[test]
    fn ma_weights_for_known_filters() {
        // pure MA copies the coefficients
        let psi = arma_ma_weights(&[], &[0.7, -0.2]).unwrap();
        assert_eq!(psi, vec![1.0, 0.7, -0.2]);
        // X_t = 0.5 X_{t-1} + e_t  =>  psi_j = 0.5^j
        let psi = arma_ma_weights(&[-0.5], &[]).unwrap();
        for (j, &w) in psi.iter().enumerate().take(30) {
            assert_relative_eq!(w, 0.5f64.powi(j as i32), max_relative = 1e-12);
        }
        // ARMA(1,1): psi_1 = theta - phi, then geometric
        let psi = arma_ma_weights(&[-0.3], &[0.7]).unwrap();
        assert_abs_diff_eq!(psi[1], 1.0, epsilon = 1e-15);
        for j in 2..psi.len().min(20) {
            assert_relative_eq!(psi[j], psi[j - 1] * 0.3, max_relative = 1e-12);
        }
    }

    #[test]
    fn unstable_and_borderline_filters_are_rejected() {
        assert!(matches!(arma_ma_weights(&[-1.0], &[]), Err(Error::UnstableFilter { .. })));
        assert!(matches!(arma_ma_weights(&[-2.0], &[]), Err(Error::UnstableFilter { .. })));
        // root at 1/0.9 outside the circle: fine
        assert!(arma_ma_weights(&[-0.9], &[]).is_ok());
    }

    #[test]
    fn filtered_autocov_matches_direct_summation() {
        // AR(1) on white noise: gamma(k) = phi^k / (1 - phi^2)
        let g = arfima_autocov(0.0, &[-0.6], &[], 1.0, 10).unwrap();
        for (k, &v) in g.iter().enumerate() {
            let exact = 0.6f64.powi(k as i32) / (1.0 - 0.36);
            assert_relative_eq!(v, exact, max_relative = 1e-12);
        }
        // MA(1) on white noise
        let g = arfima_autocov(0.0, &[], &[0.4], 2.0, 4).unwrap();
        assert_relative_eq!(g[0], 2.0 * 1.16, max_relative = 1e-14);
        assert_relative_eq!(g[1], 2.0 * 0.4, max_relative = 1e-14);
        assert_abs_diff_eq!(g[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn powerlaw_lag_zero_closed_form() {
        for (d, c1, beta) in [(0.2, 5.0, 0.5), (-0.3, 1.0, 2.0), (0.45, 0.0, 1.0)] {
            let g = powerlaw_autocov(d, c1, beta, 1.0, 1).unwrap();
            let exact = 1.0 / PI
                * (PI.powf(1.0 - 2.0 * d) / (1.0 - 2.0 * d)
                    + c1 * PI.powf(1.0 - 2.0 * d + beta) / (1.0 - 2.0 * d + beta));
            assert_relative_eq!(g[0], exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn powerlaw_matches_frozen_quadrature_values() {
        // reference: adaptive oscillatory quadrature of the density
        let g = powerlaw_autocov(0.2, 5.0, 0.5, 1.0, 11).unwrap();
        assert_relative_eq!(g[1], 0.011851728224900, max_relative = 1e-9);
        assert_relative_eq!(g[10], 0.051484375889376, max_relative = 1e-9);
    }
}
