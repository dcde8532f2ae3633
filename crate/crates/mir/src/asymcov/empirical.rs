//! Simulation-based estimate of the ratio-vector covariance.
//!
//! Validates the analytic entries and offers a slower route to tables for
//! configurations outside the shipped grid.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ir::ir_multiscale;
use crate::model::Model;
use crate::rng::mix_seed;
use crate::sim::simulate;

/// Sample covariance of the scaled multiscale ratio vector over `reps`
/// independent fractional-noise paths of length `n` with memory `d`. The
/// base window is floor(n^0.3); the scaling sqrt(n / m) matches the central
/// limit normalization, so entries estimate the same limit as
/// [`super::sigma_entry`].
pub fn gamma_empirical(d: f64, p: usize, n: usize, reps: usize, seed: u64) -> Result<DMatrix<f64>> {
    if reps < 2 {
        return Err(Error::BadParameter {
            name: "reps",
            value: reps as f64,
            reason: "sample covariance needs at least two replicates",
        });
    }
    let model = Model::fractional_noise(d);
    model.validate()?;
    let m = (n as f64).powf(0.3).floor() as usize;
    if m == 0 || n < 3 * p * m + 20 {
        return Err(Error::InfeasibleWindow { n, p, min_terms: 20 });
    }

    let vecs: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<f64>> {
            let x = simulate(&model, n, mix_seed(seed, &[rep as u64]))?;
            ir_multiscale(&x, m, p)
        })
        .collect::<Result<_>>()?;

    let scale = n as f64 / m as f64;
    let r = reps as f64;
    let mut mean = vec![0.0; p];
    for v in &vecs {
        for (mu, &x) in mean.iter_mut().zip(v) {
            *mu += x / r;
        }
    }
    let mut cov = DMatrix::zeros(p, p);
    for v in &vecs {
        for i in 0..p {
            for j in i..p {
                cov[(i, j)] += (v[i] - mean[i]) * (v[j] - mean[j]);
            }
        }
    }
    for i in 0..p {
        for j in i..p {
            let c = cov[(i, j)] * scale / (r - 1.0);
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymcov::{gamma_matrix, SigmaOptions};

    #[test]
    fn deterministic_for_a_fixed_seed() {
        let a = gamma_empirical(0.2, 2, 4000, 8, 99).unwrap();
        let b = gamma_empirical(0.2, 2, 4000, 8, 99).unwrap();
        assert_eq!(a, b);
        let c = gamma_empirical(0.2, 2, 4000, 8, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn agrees_with_the_analytic_entries_at_sampling_accuracy() {
        let est = gamma_empirical(0.2, 3, 20_000, 220, 31).unwrap();
        let opts = SigmaOptions::default();
        let exact = gamma_matrix(0.2, 3, &opts).unwrap();
        for i in 0..3 {
            let rel = (est[(i, i)] - exact[(i, i)]).abs() / exact[(i, i)];
            assert!(
                rel < 0.3,
                "diagonal {} off by {:.0}%: est {} vs {}",
                i + 1,
                100.0 * rel,
                est[(i, i)],
                exact[(i, i)]
            );
        }
        let num = (&est - &exact).norm();
        assert!(num / exact.norm() < 0.35, "relative deviation {num}");
    }

    #[test]
    fn refuses_impossible_window_layouts() {
        assert!(matches!(
            gamma_empirical(0.2, 20, 200, 4, 1),
            Err(Error::InfeasibleWindow { .. })
        ));
        assert!(gamma_empirical(0.2, 2, 4000, 1, 1).is_err());
    }
}
