//! Small quadrature toolkit: Gauss-Legendre rules, panel sums, trapezoids.

use std::f64::consts::PI;

/// Legendre polynomial P_n and its derivative at x, by upward recurrence.
fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton from the Chebyshev-like initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_and_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_and_deriv(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over [a, b] with this rule mapped affinely.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    }

    /// Integral over consecutive panels `breaks[0] .. breaks.last()`.
    pub fn integrate_panels(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            acc += self.integrate(w[0], w[1], &mut f);
        }
        acc
    }
}

/// Gauss-Hermite rule for the weight exp(-x^2) on the whole line, via the
/// Jacobi matrix of the Hermite recurrence (Golub-Welsch).
pub fn hermite_gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Composite trapezoid over [a, b] with `n` equal intervals.
pub fn trapezoid_uniform(a: f64, b: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    assert!(n >= 1);
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for k in 1..n {
        acc += f(a + h * k as f64);
    }
    acc * h
}
