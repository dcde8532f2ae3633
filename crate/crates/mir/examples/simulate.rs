//! Draw exact Gaussian paths from the three model families and check the
//! sample autocovariance against the model autocovariance.
//!
//! ```text
//! cargo run --release --example simulate
//! ```

use mir::model::Model;
use mir::rng::{mix_seed, GaussianRng};
use mir::sim::{autocov, simulate, simulate_with};

fn sample_acov(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    (0..n - lag).map(|t| (x[t] - mean) * (x[t + lag] - mean)).sum::<f64>() / n as f64
}

fn main() -> mir::Result<()> {
    let models: Vec<Model> = vec![
        "arfima(d=0.3, ar=[-0.5], ma=[0.2])".parse()?,
        "fgn(h=0.8)".parse()?,
        "powerlaw(d=0.2, c1=5, beta=0.5)".parse()?,
    ];

    let n = 200_000;
    let seed = 42;
    for (k, model) in models.iter().enumerate() {
        // One independent stream per model, all reproducible from one master seed.
        let x = simulate(model, n, mix_seed(seed, &[k as u64]))?;
        let acv = autocov(model, 4)?;
        println!("{model}  (memory parameter {:+.2})", model.memory());
        println!("  first values: {:+.4} {:+.4} {:+.4}", x[0], x[1], x[2]);
        for lag in 0..=4 {
            println!(
                "  lag {lag}: model acov {:+.5}, sample acov {:+.5}",
                acv[lag],
                sample_acov(&x, lag)
            );
        }
    }

    // Nonstationary models integrate a stationary base, so their sample
    // variance grows with the horizon instead of settling.
    let rw: Model = "arfima(d=1.0)".parse()?;
    let x = simulate(&rw, 4096, seed)?;
    let half = sample_acov(&x[..2048], 0);
    let full = sample_acov(&x, 0);
    println!("{rw}\n  sample variance: {half:.1} over 2048 points, {full:.1} over 4096");

    // simulate_with draws from a caller-owned stream: consecutive calls
    // continue the stream, so the two halves below differ.
    let mut rng = GaussianRng::seed_from(seed);
    let wn: Model = "arfima(d=0)".parse()?;
    let a = simulate_with(&wn, 4, &mut rng)?;
    let b = simulate_with(&wn, 4, &mut rng)?;
    println!("{wn}\n  stream a: {a:+.3?}\n  stream b: {b:+.3?}");
    Ok(())
}
