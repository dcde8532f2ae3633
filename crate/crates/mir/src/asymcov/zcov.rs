//! Covariance kernel of the limiting window-increment processes.
//!
//! At scale j the windowed increment sums of the series converge to a
//! stationary Gaussian process Z_j, normalized here so that
//! Var(Z_j(0)) = j^(2d+1). One surface covers three regimes: weighted
//! fractional-noise sums below d = 1/2, length-j averaging windows of the
//! integrated path above it, and a logarithmic boundary kernel at exactly
//! 1/2 that both sides approach continuously. In every regime
//! Corr(Z_j(t), Z_j(t+j)) is the same scale-free function of d that drives
//! the estimator's link function.

use nalgebra::Matrix4;

/// Width of the band around d = 1/2 handled by the boundary kernel.
const HALF_BAND: f64 = 1e-6;

/// Cov(Z_i(u), Z_j(v)) for memory parameter d in (-1/2, 3/2).
pub fn zcov(d: f64, i: usize, j: usize, u: f64, v: f64) -> f64 {
    debug_assert!(i >= 1 && j >= 1, "scales are positive integers");
    let (fi, fj) = (i as f64, j as f64);
    if (d - 0.5).abs() <= HALF_BAND {
        zcov_boundary(fi, fj, u - v)
    } else if d < 0.5 {
        zcov_stationary(d, fi, fj, u - v)
    } else {
        zcov_integrated(d, fi, fj, u - v)
    }
}

/// Second differences of fractional Brownian motion: nine power terms with
/// weights (1, -2, 1) against (1, -2, 1).
fn zcov_stationary(d: f64, i: f64, j: f64, delta: f64) -> f64 {
    let twoh = 2.0 * d + 1.0;
    let c2 = 1.0 / (4.0 - 4f64.powf(d + 0.5));
    let off_s = [2.0 * i, i, 0.0];
    let off_t = [2.0 * j, j, 0.0];
    let w = [1.0, -2.0, 1.0];
    let mut acc = 0.0;
    for (a, &sa) in off_s.iter().enumerate() {
        for (b, &tb) in off_t.iter().enumerate() {
            acc += w[a] * w[b] * (delta + sa - tb).abs().powf(twoh);
        }
    }
    -(c2 / 2.0) * acc
}

/// Length-i and length-j averaging windows of increments of fractional
/// Brownian motion: a double second difference of the fourth-order
/// antiderivative of the power kernel.
fn zcov_integrated(d: f64, i: f64, j: f64, delta: f64) -> f64 {
    let q = 2.0 * d + 1.0; // 2H + 2 with H = d - 1/2
    let k = (q - 1.0) * q;
    let c2 = k / (4f64.powf(d + 0.5) - 4.0);
    let phi = |x: f64| x.abs().powf(q) / k;
    let comb = |x: f64| phi(x + i) - phi(x) - phi(x + i - j) + phi(x - j);
    (c2 / 2.0) * (comb(delta + i) + comb(delta - j) - comb(delta + i - j) - comb(delta))
}

fn eta(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x * x.abs().ln()
    }
}

/// The d = 1/2 kernel: the x^2 log|x| combination both power regimes tend
/// to, with the closed constant 1 / (8 log 2).
fn zcov_boundary(i: f64, j: f64, delta: f64) -> f64 {
    let comb = |x: f64| eta(x + i) - eta(x) - eta(x + i - j) + eta(x - j);
    (comb(delta + i) + comb(delta - j) - comb(delta + i - j) - comb(delta)) / (8.0 * 2f64.ln())
}

/// Covariance of the quadruple (Z_i(0), Z_i(i), Z_j(tau), Z_j(tau + j)):
/// the two increment pairs whose ratio statistics the cross-scale
/// asymptotics average.
pub fn pair_sigma(d: f64, i: usize, j: usize, tau: f64) -> Matrix4<f64> {
    let (fi, fj) = (i as f64, j as f64);
    let times = [(i, 0.0), (i, fi), (j, tau), (j, tau + fj)];
    let mut m = Matrix4::zeros();
    for (r, &(si, ti)) in times.iter().enumerate() {
        for (c, &(sj, tj)) in times.iter().enumerate().skip(r) {
            let v = zcov(d, si, sj, ti, tj);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::rho;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    const D_GRID: [f64; 9] = [-0.49, -0.2, 0.2, 0.4999, 0.5, 0.5001, 0.8, 1.2, 1.24];

    #[test]
    fn variance_normalization_holds_in_all_regimes() {
        for d in D_GRID {
            for j in [1usize, 2, 5, 20] {
                let var = zcov(d, j, j, 0.0, 0.0);
                let want = (j as f64).powf(2.0 * d + 1.0);
                assert_relative_eq!(var, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn within_pair_correlation_is_rho_at_every_scale() {
        for d in D_GRID {
            for j in [1usize, 3, 7, 20] {
                let corr = zcov(d, j, j, 0.0, j as f64) / zcov(d, j, j, 0.0, 0.0);
                assert_relative_eq!(corr, rho(d), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn power_regimes_meet_the_boundary_kernel() {
        // average of the two power branches straddling 1/2 kills the linear
        // term; what remains must be the boundary value
        let h = 2e-6;
        for (i, j, delta) in [(1usize, 1usize, 0.0), (2, 3, 1.5), (5, 2, -4.25), (20, 20, 7.0)] {
            let below = zcov(0.5 - h, i, j, delta, 0.0);
            let above = zcov(0.5 + h, i, j, delta, 0.0);
            let at = zcov(0.5, i, j, delta, 0.0);
            let scale = zcov(0.5, i, i, 0.0, 0.0).max(zcov(0.5, j, j, 0.0, 0.0));
            assert_abs_diff_eq!(0.5 * (below + above), at, epsilon = 1e-6 * scale);
        }
    }

    #[test]
    fn kernel_matches_frozen_reference_values() {
        // frozen from extended-precision evaluation; the integrated branch is
        // additionally pinned by direct 2-D quadrature of the window integral
        let cases = [
            (0.2, 1, 1, 3.0, -0.013890210112391871),
            (-0.3, 2, 5, -1.5, -0.23556459055097246),
            (0.45, 4, 4, 10.0, -0.8846204384249595),
            (0.9, 1, 1, 3.0, -0.038413714027269501),
            (1.2, 2, 5, -1.5, 19.055382759560613),
            (0.6, 3, 1, 0.25, -0.089020694575316696),
            (0.5, 1, 1, 3.0, -0.045477823609188438),
            (0.5, 2, 5, -1.5, -1.9520459396958077),
        ];
        for (d, i, j, delta, want) in cases {
            assert_relative_eq!(zcov(d, i, j, delta, 0.0), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn quadruple_covariance_lays_out_the_right_entries() {
        let (d, i, j, tau) = (0.3, 2usize, 5usize, 3.5);
        let m = pair_sigma(d, i, j, tau);
        assert_eq!(m[(0, 0)], zcov(d, i, i, 0.0, 0.0));
        assert_eq!(m[(0, 1)], zcov(d, i, i, 0.0, 2.0));
        assert_eq!(m[(2, 3)], zcov(d, j, j, tau, tau + 5.0));
        assert_eq!(m[(1, 2)], zcov(d, i, j, 2.0, tau));
        assert_eq!(m, m.transpose());
    }

    /// Correlations of finite-scale window sums computed straight from the
    /// closed-form noise autocovariance, sharing no code with the kernel.
    /// Each window is a difference of adjacent length-l block sums of the
    /// observed series; above d = 1/2 the observed series is the cumulative
    /// sum of the noise, which turns the block weights into suffix sums.
    fn window_corrs(d: f64, l: usize) -> (f64, f64) {
        let integrated = d >= 0.5;
        let base = if integrated { d - 1.0 } else { d };
        let n = 4 * l + l / 2 + 2;
        let g = crate::sim::arfima00_autocov(base, 1.0, n).unwrap();
        let block = |start: usize, len: usize| {
            let mut w = vec![0.0f64; n];
            w[start + len..start + 2 * len].iter_mut().for_each(|v| *v += 1.0);
            w[start..start + len].iter_mut().for_each(|v| *v -= 1.0);
            if integrated {
                for s in (0..n - 1).rev() {
                    w[s] += w[s + 1];
                }
            }
            w
        };
        let cv = |a: &[f64], b: &[f64]| {
            let mut acc = 0.0;
            for (s, &ws) in a.iter().enumerate() {
                if ws == 0.0 {
                    continue;
                }
                for (t, &wt) in b.iter().enumerate() {
                    acc += ws * wt * g[s.abs_diff(t)];
                }
            }
            acc
        };
        let (wa, wb, wc) = (block(0, l), block(l, l), block(l / 2, 2 * l));
        let within = cv(&wa, &wb) / (cv(&wa, &wa) * cv(&wb, &wb)).sqrt();
        let cross = cv(&wa, &wc) / (cv(&wa, &wa) * cv(&wc, &wc)).sqrt();
        (within, cross)
    }

    #[test]
    fn kernel_limits_match_exact_finite_scale_window_sums() {
        // tolerances sit ~3x above the measured l = 256 discretization error,
        // which shrinks like a power of l in every regime
        for (d, tol_w, tol_c) in [
            (-0.2, 3e-3, 4e-3),
            (0.3, 1e-4, 3e-5),
            (0.5, 5e-5, 3e-6),
            (1.1, 2e-5, 8e-6),
            (1.24, 2e-5, 8e-6),
        ] {
            let (within, cross) = window_corrs(d, 256);
            let pred_c =
                zcov(d, 1, 2, 0.0, 0.5) / (zcov(d, 1, 1, 0.0, 0.0) * zcov(d, 2, 2, 0.0, 0.0)).sqrt();
            assert_abs_diff_eq!(within, rho(d), epsilon = tol_w);
            assert_abs_diff_eq!(cross, pred_c, epsilon = tol_c);
        }
    }

    /// The obvious competing kernel at d = 1/2 takes unit-lag second
    /// differences of x^2 log|x| regardless of window scale.
    fn unit_lag_variant(i: f64, j: f64, delta: f64) -> f64 {
        let h = |x: f64| 0.5 * (eta(x - 1.0) + eta(x + 1.0) - 2.0 * eta(x));
        (-h(delta + i - j) + h(delta + i) + h(delta - j) - h(delta)) / (4.0 * 2f64.ln())
    }

    #[test]
    fn boundary_kernel_beats_the_unit_lag_variant() {
        // both candidates coincide when every window has unit scale, so the
        // scale-one anchor cannot separate them
        for tau in [0.0, 0.7, 1.0, 2.3] {
            assert_relative_eq!(
                unit_lag_variant(1.0, 1.0, tau),
                zcov(0.5, 1, 1, tau, 0.0),
                max_relative = 1e-12
            );
        }
        // the exact window sums do: the variant predicts a scale-dependent
        // within-pair correlation and a very different cross-scale one
        let (_, cross) = window_corrs(0.5, 256);
        let kernel_c =
            zcov(0.5, 1, 2, 0.0, 0.5) / (zcov(0.5, 1, 1, 0.0, 0.0) * zcov(0.5, 2, 2, 0.0, 0.0)).sqrt();
        let variant_c = unit_lag_variant(1.0, 2.0, -0.5)
            / (unit_lag_variant(1.0, 1.0, 0.0) * unit_lag_variant(2.0, 2.0, 0.0)).sqrt();
        assert!((cross - kernel_c).abs() < 1e-5);
        assert!((cross - variant_c).abs() > 0.2);
        let variant_within2 = unit_lag_variant(2.0, 2.0, 2.0) / unit_lag_variant(2.0, 2.0, 0.0);
        assert!((variant_within2 - rho(0.5)).abs() > 0.1);
    }

    proptest! {
        #[test]
        fn kernel_is_shift_invariant_and_exchange_symmetric(
            d in -0.49f64..1.24,
            i in 1usize..12,
            j in 1usize..12,
            tau in -30.0f64..30.0,
            shift in -20.0f64..20.0,
        ) {
            let a = zcov(d, i, j, 0.0, tau);
            let b = zcov(d, i, j, shift, tau + shift);
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
            let c = zcov(d, j, i, tau, 0.0);
            prop_assert!((a - c).abs() <= 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn quadruple_covariance_is_positive_semidefinite(
            d in -0.49f64..1.24,
            i in 1usize..10,
            j in 1usize..10,
            tau in -25.0f64..25.0,
        ) {
            let m = pair_sigma(d, i, j, tau);
            let eig = m.symmetric_eigenvalues();
            let trace = m.trace();
            for k in 0..4 {
                prop_assert!(eig[k] >= -1e-9 * trace, "eig {} at d={d} i={i} j={j} tau={tau}", eig[k]);
            }
        }
    }
}
