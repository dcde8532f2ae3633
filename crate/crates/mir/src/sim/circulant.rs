//! Exact stationary Gaussian sampling by circulant embedding.
//!
//! The covariance out to lag M/2 is wrapped into a circulant of size M
//! whose eigenvalues come from one FFT; a complex Gaussian vector shaped by
//! the eigenvalue square roots then transforms back into two independent
//! exact sample paths. Embeddings of long-memory covariances can have a few
//! slightly negative eigenvalues; those are clipped to zero when they are
//! within a 1e-8 relative tolerance, and the defect is recorded.

use crate::error::{Error, Result};
use crate::rng::GaussianRng;
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use std::sync::Arc;

/// What the embedding had to do to become positive semidefinite.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingReport {
    /// Circulant size actually used.
    pub size: usize,
    /// Most negative eigenvalue seen at that size (0 if none).
    pub min_eigenvalue: f64,
    /// Number of eigenvalues clipped to zero.
    pub clipped: usize,
    /// Sum of clipped magnitudes over the sum of all magnitudes.
    pub clipped_mass: f64,
}

pub struct CirculantEmbedding {
    size: usize,
    /// sqrt(max(eig, 0) / (2 size)), ready to shape complex normals.
    amp: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    pub report: EmbeddingReport,
}

impl CirculantEmbedding {
    /// Embedding able to produce exact samples of length `n` from the
    /// stationary covariance `autocov(nlags)[k] = gamma(k)`. Starts at the
    /// smallest power of two at least 2n and doubles, up to 16n, until the
    /// eigenvalue defect is inside tolerance.
    pub fn new(
        n: usize,
        autocov: impl Fn(usize) -> Result<Vec<f64>>,
    ) -> Result<Self> {
        assert!(n >= 2, "need at least two samples");
        let mut planner = FftPlanner::new();
        let mut size = (2 * n).next_power_of_two();
        let cap = (16 * n).next_power_of_two();
        loop {
            let g = autocov(size / 2 + 1)?;
            let mut buf: Vec<Complex<f64>> = Vec::with_capacity(size);
            buf.extend(g.iter().map(|&v| Complex::new(v, 0.0)));
            buf.extend(g[1..size / 2].iter().rev().map(|&v| Complex::new(v, 0.0)));
            debug_assert_eq!(buf.len(), size);
            let fft = planner.plan_fft_forward(size);
            fft.process(&mut buf);
            let max_eig = buf.iter().map(|z| z.re).fold(0.0, f64::max);
            let min_eig = buf.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let tol = 1e-8 * max_eig;
            if min_eig < -tol {
                if size < cap {
                    size *= 2;
                    continue;
                }
                return Err(Error::EmbeddingFailed { min_eig, tol, size });
            }
            let clipped = buf.iter().filter(|z| z.re < 0.0).count();
            let neg_mass: f64 = buf.iter().filter(|z| z.re < 0.0).map(|z| -z.re).sum();
            let total_mass: f64 = buf.iter().map(|z| z.re.abs()).sum();
            let amp = buf
                .iter()
                .map(|z| (z.re.max(0.0) / (2.0 * size as f64)).sqrt())
                .collect();
            return Ok(Self {
                size,
                amp,
                fft,
                report: EmbeddingReport {
                    size,
                    min_eigenvalue: min_eig.min(0.0),
                    clipped,
                    clipped_mass: if total_mass > 0.0 { neg_mass / total_mass } else { 0.0 },
                },
            });
        }
    }

    /// Largest sample length this embedding can produce.
    pub fn max_len(&self) -> usize {
        self.size / 2
    }

    /// Two independent exact paths of length `n`, from 2*size normal draws.
    pub fn sample_pair(&self, rng: &mut GaussianRng, n: usize) -> (Vec<f64>, Vec<f64>) {
        assert!(n <= self.max_len(), "embedding built for {} samples, asked {n}", self.max_len());
        let mut buf: Vec<Complex<f64>> = self
            .amp
            .iter()
            .map(|&a| {
                let re = rng.standard_normal();
                let im = rng.standard_normal();
                Complex::new(a * re, a * im)
            })
            .collect();
        self.fft.process(&mut buf);
        let s = std::f64::consts::SQRT_2;
        (
            buf[..n].iter().map(|z| s * z.re).collect(),
            buf[..n].iter().map(|z| s * z.im).collect(),
        )
    }

    /// One exact path of length `n`. Half the draws go unused; when
    /// throughput matters use [`Self::sample_pair`].
    pub fn sample(&self, rng: &mut GaussianRng, n: usize) -> Vec<f64> {
        self.sample_pair(rng, n).0
    }
}
