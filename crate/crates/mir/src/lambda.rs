//! Limit functions of the increment ratio.
//!
//! `rho` maps the memory parameter to the correlation between consecutive
//! standardized window increments, `lambda` maps a correlation to the
//! expected ratio of a Gaussian pair, and their composition `lambda0` is the
//! link function the estimators invert.

use std::f64::consts::PI;

/// Correlation between consecutive standardized window increments for
/// memory parameter `d` in (-1/2, 3/2).
///
/// The closed form has a removable singularity at d = 1/2; inside a 1e-6
/// neighbourhood the quotient is replaced by its first-order expansion.
pub fn rho(d: f64) -> f64 {
    let t = d - 0.5;
    let l9 = 9f64.ln();
    let l4 = 4f64.ln();
    if t.abs() <= 1e-6 {
        let at_half = 9.0 * 3f64.ln() / (8.0 * 2f64.ln()) - 2.0;
        let slope = 1.125 * l9 * (l9 - l4) / (2.0 * l4);
        return at_half + slope * t;
    }
    -2.0 + 1.125 * f64::exp_m1(t * l9) / f64::exp_m1(t * l4)
}

/// Expected increment ratio `E|X+Y| / (|X|+|Y|)` of a standard Gaussian
/// pair with correlation `r`.
pub fn lambda(r: f64) -> f64 {
    // endpoints are limits: the closed form divides by 1 - r
    if r >= 1.0 - 1e-12 {
        return 1.0;
    }
    if r <= -1.0 + 1e-12 {
        return 0.0;
    }
    let s = ((1.0 + r) / (1.0 - r)).sqrt();
    2.0 / PI * s.atan() + s / PI * (2.0 / (1.0 + r)).ln()
}

/// Expected increment ratio as a function of the memory parameter.
pub fn lambda0(d: f64) -> f64 {
    lambda(rho(d))
}

/// Derivative of [`lambda0`], fourth-order central difference with h = 1e-5.
pub fn lambda0_prime(d: f64) -> f64 {
    let h = 1e-5;
    (-lambda0(d + 2.0 * h) + 8.0 * lambda0(d + h) - 8.0 * lambda0(d - h) + lambda0(d - 2.0 * h))
        / (12.0 * h)
}

/// Preimage under [`lambda0`], with a flag set when the input lay outside
/// the attainable range and was clamped to the nearer endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverted {
    pub d: f64,
    pub clamped: bool,
}

/// Inverts [`lambda0`] over d in [-0.499, 1.499] by bisection to 1e-10.
pub fn lambda0_inverse(v: f64) -> Inverted {
    const LO: f64 = -0.499;
    const HI: f64 = 1.499;
    if v <= lambda0(LO) {
        return Inverted { d: LO, clamped: true };
    }
    if v >= lambda0(HI) {
        return Inverted { d: HI, clamped: true };
    }
    let (mut lo, mut hi) = (LO, HI);
    // lambda0 is strictly increasing, so plain bisection suffices
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if lambda0(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Inverted { d: 0.5 * (lo + hi), clamped: false }
}
