//! Expectations of the increment-ratio kernel over correlated Gaussian
//! vectors.
//!
//! The kernel `|x + y| / (|x| + |y|)` is homogeneous of degree zero, so all
//! expectations reduce to integrals over directions. For a pair of pairs the
//! 4-D Gaussian integral collapses to a double integral over two angles with
//! a closed-form radial factor; degenerate geometries (the two pairs
//! coincide, or they share one coordinate) get their own lower-dimensional
//! reductions. Monte Carlo and tensor Gauss-Hermite evaluators are provided
//! as independent slow checks.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Matrix3, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quad::{hermite_gauss, GaussLegendre};
use crate::rng::GaussianRng;

/// |x + y| / (|x| + |y|), with the 0/0 case counted as full agreement.
pub fn ratio_kernel(x: f64, y: f64) -> f64 {
    let den = x.abs() + y.abs();
    if den == 0.0 {
        1.0
    } else {
        (x + y).abs() / den
    }
}

/// Escalation ladder: smallest admissible eigenvalue of the scaled
/// covariance against the Gauss-Legendre points spent per smooth arc.
const TIERS: [(f64, usize); 5] = [
    (1e-2, 24),
    (1e-3, 48),
    (1e-4, 96),
    (1e-6, 192),
    (1e-12, 384),
];

/// Angular grid over [0, pi) split at the kinks of the direction kernel
/// g(t) = |cos t + sin t| / (|cos t| + |sin t|), which sits at pi/2 and
/// 3 pi/4 inside that range. Weights carry the g factor.
struct ThetaGrid {
    ct: Vec<f64>,
    st: Vec<f64>,
    wg: Vec<f64>,
}

fn build_theta_grid(per_arc: usize) -> ThetaGrid {
    let rule = GaussLegendre::new(per_arc);
    let breaks = [0.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let mut ct = Vec::with_capacity(3 * per_arc);
    let mut st = Vec::with_capacity(3 * per_arc);
    let mut wg = Vec::with_capacity(3 * per_arc);
    for w in breaks.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[0] + w[1]);
        for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let theta = mid + half * x;
            let (s, c) = theta.sin_cos();
            ct.push(c);
            st.push(s);
            wg.push(half * wt * ratio_kernel(c, s));
        }
    }
    ThetaGrid { ct, st, wg }
}

fn theta_grid(tier: usize) -> &'static ThetaGrid {
    static GRIDS: OnceLock<Vec<ThetaGrid>> = OnceLock::new();
    &GRIDS.get_or_init(|| TIERS.iter().map(|&(_, n)| build_theta_grid(n)).collect())[tier]
}

/// Eigen-based inverse and determinant of a small symmetric matrix; errors
/// out when the smallest eigenvalue falls below `floor` times the largest.
/// Returns (inverse, determinant, relative smallest eigenvalue).
macro_rules! inv_det_impl {
    ($name:ident, $mat:ty, $n:literal) => {
        fn $name(m: &$mat, floor: f64, what: &'static str) -> Result<($mat, f64, f64)> {
            let eig = SymmetricEigen::new(*m);
            let max = eig.eigenvalues.max();
            let min = eig.eigenvalues.min();
            if !(max > 0.0) || min <= floor * max {
                return Err(Error::NotPositiveDefinite { what });
            }
            let mut det = 1.0;
            let mut inv_diag = eig.eigenvalues;
            for k in 0..$n {
                det *= eig.eigenvalues[k];
                inv_diag[k] = 1.0 / eig.eigenvalues[k];
            }
            let inv =
                eig.eigenvectors * <$mat>::from_diagonal(&inv_diag) * eig.eigenvectors.transpose();
            Ok((inv, det, min / max))
        }
    };
}

inv_det_impl!(inv_det4, Matrix4<f64>, 4);
inv_det_impl!(inv_det3, Matrix3<f64>, 3);

/// E[ g(X1, Y1) g(X2, Y2) ] for a zero-mean Gaussian quadruple with
/// covariance `sigma`, coordinates ordered (X1, Y1, X2, Y2). The resolution
/// ladder reacts to the conditioning of `sigma`; exactly degenerate
/// geometries are rejected and belong to [`expect_ratio_square`] or
/// [`expect_ratio_chain`].
pub fn expect_ratio_product(sigma: &Matrix4<f64>) -> Result<f64> {
    // joint rescaling of each pair leaves the kernel untouched and puts the
    // diagonal near one before conditioning is judged
    let s1 = sigma[(0, 0)].max(sigma[(1, 1)]);
    let s2 = sigma[(2, 2)].max(sigma[(3, 3)]);
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::NotPositiveDefinite { what: "pair covariance diagonal" });
    }
    let (r1, r2) = (s1.sqrt().recip(), s2.sqrt().recip());
    let d = nalgebra::Vector4::new(r1, r1, r2, r2);
    let scaled = Matrix4::from_fn(|r, c| sigma[(r, c)] * d[r] * d[c]);
    let (m, det, rel_min) = inv_det4(&scaled, 1e-12, "pair covariance")?;
    let tier = TIERS
        .iter()
        .position(|&(lo, _)| rel_min >= lo)
        .ok_or(Error::NotPositiveDefinite { what: "pair covariance (near-singular)" })?;
    Ok(angular4(&m, det, theta_grid(tier)))
}

/// Same integral at a pinned number of points per arc; the adaptive entry
/// point is [`expect_ratio_product`].
pub fn expect_ratio_product_resolved(sigma: &Matrix4<f64>, per_arc: usize) -> Result<f64> {
    let s1 = sigma[(0, 0)].max(sigma[(1, 1)]);
    let s2 = sigma[(2, 2)].max(sigma[(3, 3)]);
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::NotPositiveDefinite { what: "pair covariance diagonal" });
    }
    let (r1, r2) = (s1.sqrt().recip(), s2.sqrt().recip());
    let d = nalgebra::Vector4::new(r1, r1, r2, r2);
    let scaled = Matrix4::from_fn(|r, c| sigma[(r, c)] * d[r] * d[c]);
    let (m, det, _) = inv_det4(&scaled, 1e-12, "pair covariance")?;
    Ok(angular4(&m, det, &build_theta_grid(per_arc)))
}

/// Double angular integral with the closed radial factor. Folding both
/// angles to [0, pi) pairs +b with -b, so one arccos serves four quadrant
/// combinations.
fn angular4(m: &Matrix4<f64>, det: f64, grid: &ThetaGrid) -> f64 {
    let n = grid.ct.len();
    let mut a = vec![0.0; n];
    let mut sa = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut sc = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for k in 0..n {
        let (ct, st) = (grid.ct[k], grid.st[k]);
        a[k] = m[(0, 0)] * ct * ct + 2.0 * m[(0, 1)] * ct * st + m[(1, 1)] * st * st;
        c[k] = m[(2, 2)] * ct * ct + 2.0 * m[(2, 3)] * ct * st + m[(3, 3)] * st * st;
        sa[k] = a[k].sqrt();
        sc[k] = c[k].sqrt();
        p[k] = ct * m[(0, 2)] + st * m[(1, 2)];
        q[k] = ct * m[(0, 3)] + st * m[(1, 3)];
    }
    let mut acc = 0.0;
    for k1 in 0..n {
        let (a1, sa1, p1, q1, w1) = (a[k1], sa[k1], p[k1], q[k1], grid.wg[k1]);
        let mut row = 0.0;
        for k2 in 0..n {
            let b = p1 * grid.ct[k2] + q1 * grid.st[k2];
            let dd = a1 * c[k2] - b * b;
            let t = (b / (sa1 * sc[k2])).clamp(-1.0, 1.0);
            // I(a,b,c) + I(a,-b,c) in one arccos
            let s = 2.0 / dd - b / (dd * dd.sqrt()) * (2.0 * t.acos() - PI);
            row += grid.wg[k2] * s;
        }
        acc += w1 * row;
    }
    acc / (2.0 * PI * PI * det.sqrt())
}

/// E[ g(X, Y)^2 ] for a unit-variance pair with correlation `r`.
pub fn expect_ratio_square(r: f64) -> f64 {
    if r >= 1.0 - 1e-12 {
        return 1.0;
    }
    if r <= -1.0 + 1e-12 {
        return 0.0;
    }
    let rule = GaussLegendre::new(64);
    let breaks = [0.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        acc += rule.integrate(w[0], w[1], |theta| {
            let (s, c) = theta.sin_cos();
            let g = ratio_kernel(c, s);
            g * g / (1.0 - r * (2.0 * theta).sin())
        });
    }
    // the integrand has period pi, the constant collects the radial part
    (1.0 - r * r).sqrt() / PI * acc
}

/// E[ g(X1, X2) g(X2, X3) ] for a zero-mean Gaussian triple sharing the
/// middle coordinate, covariance `sigma`. This is the exact form of the
/// pair-of-pairs expectation when the two windows abut.
pub fn expect_ratio_chain(sigma: &Matrix3<f64>) -> Result<f64> {
    let top = sigma.diagonal().max();
    if !(top > 0.0) {
        return Err(Error::NotPositiveDefinite { what: "chain covariance diagonal" });
    }
    let scaled = sigma / top;
    let (m, det, rel_min) = inv_det3(&scaled, 1e-12, "chain covariance")?;
    let (n_theta, n_phi) = if rel_min < 1e-2 { (48, 16) } else { (24, 8) };
    let theta_rule = GaussLegendre::new(n_theta);
    let phi_rule = GaussLegendre::new(n_phi);

    // the sphere kinks on six fixed meridians plus the trace of the plane
    // x2 + x3 = 0, which crosses a latitude only when |cot theta| <= 1
    let base = [0.0, PI / 2.0, 3.0 * PI / 4.0, PI, 3.0 * PI / 2.0, 7.0 * PI / 4.0];
    let theta_breaks = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let mut acc = 0.0;
    for tw in theta_breaks.windows(2) {
        let half = 0.5 * (tw[1] - tw[0]);
        let mid = 0.5 * (tw[0] + tw[1]);
        for (&xt, &wt) in theta_rule.nodes.iter().zip(&theta_rule.weights) {
            let theta = mid + half * xt;
            let (sth, cth) = theta.sin_cos();
            let mut kinks: Vec<f64> = base.to_vec();
            let s0 = -cth / sth;
            if s0.abs() <= 1.0 {
                let r = s0.asin();
                kinks.push(if r < 0.0 { r + 2.0 * PI } else { r });
                kinks.push(PI - r);
            }
            kinks.sort_by(f64::total_cmp);
            let mut inner = 0.0;
            for seg in 0..kinks.len() {
                let (lo, hi) = if seg + 1 == kinks.len() {
                    (kinks[seg], kinks[0] + 2.0 * PI)
                } else {
                    (kinks[seg], kinks[seg + 1])
                };
                inner += phi_rule.integrate(lo, hi, |phi| {
                    let (sph, cph) = phi.sin_cos();
                    let w = nalgebra::Vector3::new(sth * cph, sth * sph, cth);
                    let qf = (m * w).dot(&w);
                    ratio_kernel(w[0], w[1]) * ratio_kernel(w[1], w[2]) / (qf * qf.sqrt())
                });
            }
            acc += half * wt * sth * inner;
        }
    }
    Ok(acc / (4.0 * PI * det.sqrt()))
}

/// Monte Carlo estimate of the pair-of-pairs expectation. Accepts
/// semi-definite covariances, so it also cross-checks the degenerate
/// reductions.
pub fn expect_ratio_product_mc(sigma: &Matrix4<f64>, samples: u64, seed: u64) -> Result<f64> {
    let eig = SymmetricEigen::new(*sigma);
    let max = eig.eigenvalues.max();
    if !(max > 0.0) || eig.eigenvalues.min() < -1e-9 * max {
        return Err(Error::NotPositiveDefinite { what: "pair covariance" });
    }
    let mut b = eig.eigenvectors;
    for k in 0..4 {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        b.column_mut(k).scale_mut(s);
    }
    let mut rng = GaussianRng::seed_from(seed);
    let mut acc = 0.0;
    for _ in 0..samples {
        let z = nalgebra::Vector4::new(
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
        );
        let x = b * z;
        acc += ratio_kernel(x[0], x[1]) * ratio_kernel(x[2], x[3]);
    }
    Ok(acc / samples as f64)
}

/// Tensor Gauss-Hermite estimate after eigen-whitening. The kernel's kink
/// at the origin caps this at roughly first-order convergence in the rule
/// size, so it serves as a slow independent reference, not a tight oracle.
pub fn expect_ratio_product_gh(sigma: &Matrix4<f64>, order: usize) -> Result<f64> {
    let eig = SymmetricEigen::new(*sigma);
    let max = eig.eigenvalues.max();
    if !(max > 0.0) || eig.eigenvalues.min() < -1e-9 * max {
        return Err(Error::NotPositiveDefinite { what: "pair covariance" });
    }
    let mut b = eig.eigenvectors;
    for k in 0..4 {
        let s = (2.0 * eig.eigenvalues[k].max(0.0)).sqrt();
        b.column_mut(k).scale_mut(s);
    }
    let (t, w) = hermite_gauss(order);
    let mut acc = 0.0;
    for k1 in 0..order {
        let v1 = b.column(0) * t[k1];
        for k2 in 0..order {
            let v2 = v1 + b.column(1) * t[k2];
            let w12 = w[k1] * w[k2];
            for k3 in 0..order {
                let v3 = v2 + b.column(2) * t[k3];
                let w123 = w12 * w[k3];
                let mut row = 0.0;
                for k4 in 0..order {
                    let x = v3 + b.column(3) * t[k4];
                    row += w[k4] * ratio_kernel(x[0], x[1]) * ratio_kernel(x[2], x[3]);
                }
                acc += w123 * row;
            }
        }
    }
    Ok(acc / (PI * PI))
}
