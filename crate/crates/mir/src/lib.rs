//! Estimation of the memory parameter of fractionally integrated Gaussian
//! time series from multiscale increment ratios.
//!
//! The increment ratio of a series measures how often, and how strongly,
//! consecutive windowed increments point the same way. Its expectation is a
//! smooth invertible function of the memory parameter `d`, which makes the
//! statistic usable as an estimator over the whole range `-0.5 < d < 1.25`,
//! covering stationary, nonstationary, and mildly explosive regimes without
//! differencing the data first.
//!
//! What the crate provides:
//!
//! * [`ir`]: the increment-ratio statistic itself, in O(n) per scale.
//! * [`lambda`]: the limit functions linking ratio expectations to `d`.
//! * [`estimator`]: pointwise, pooled (GLS across scales), and adaptive
//!   estimators with standard errors and confidence intervals.
//! * [`stattest`]: tests of stationarity (`d <= 1/2`) and of
//!   nonstationarity (`d >= 1/2`) built on the pooled estimator.
//! * [`sim`]: exact Gaussian simulation of ARFIMA, fractional Gaussian
//!   noise, and perturbed power-law spectra via circulant embedding.
//! * [`asymcov`]: the asymptotic covariance of the ratio vector across
//!   scales, the precomputed coefficient tables, and their construction.
//! * [`theory`]: numerical verification of the integral identities and
//!   constants the asymptotics rest on.
//! * [`mc`]: a deterministic Monte Carlo harness for bias/RMSE/size studies.
//!
//! Examples under `examples/` exercise each capability end to end; the thin
//! `mir` binary exposes the same functionality as subcommands.

pub mod analysis;
pub mod asymcov;
pub mod config;
pub mod error;
pub mod estimator;
pub mod ir;
pub mod lambda;
pub mod mc;
pub mod model;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod stattest;
pub mod theory;

pub use error::{Error, Result};
