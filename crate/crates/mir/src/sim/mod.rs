//! Exact simulation of the supported Gaussian models.

pub mod autocov;
pub mod circulant;

pub use autocov::{arfima00_autocov, arfima_autocov, arma_ma_weights, fgn_autocov, powerlaw_autocov};
pub use circulant::{CirculantEmbedding, EmbeddingReport};

use crate::error::Result;
use crate::model::Model;
use crate::rng::GaussianRng;

/// Autocovariance of a stationary model out to `nlags` lags. Models with
/// memory at or above 1/2 have none; take their [`Model::stationary_base`]
/// first. Unlike [`Model::validate`], the closed boundary d = -1/2 is
/// admitted here: it is the base of d = 1/2 models.
pub fn autocov(model: &Model, nlags: usize) -> Result<Vec<f64>> {
    match model {
        Model::Arfima { d, ar, ma, var } => arfima_autocov(*d, ar, ma, *var, nlags),
        Model::Fgn { h, var } => fgn_autocov(*h, *var, nlags),
        Model::PowerLaw { d, c1, beta, var } => powerlaw_autocov(*d, *c1, *beta, *var, nlags),
    }
}

/// One exact sample path of length `n` under `model`, keyed by `seed`.
///
/// Models with memory parameter at or above 1/2 are realized as cumulative
/// sums of an exactly simulated increment series one order of integration
/// down; the increment ratio does not depend on the arbitrary level this
/// fixes.
pub fn simulate(model: &Model, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = GaussianRng::seed_from(seed);
    simulate_with(model, n, &mut rng)
}

/// As [`simulate`], drawing from a caller-managed stream.
pub fn simulate_with(model: &Model, n: usize, rng: &mut GaussianRng) -> Result<Vec<f64>> {
    model.validate()?;
    let (base, integrate) = model.stationary_base();
    let emb = CirculantEmbedding::new(n, |nlags| autocov(&base, nlags))?;
    let mut x = emb.sample(rng, n);
    if integrate {
        for t in 1..n {
            x[t] += x[t - 1];
        }
    }
    Ok(x)
}
