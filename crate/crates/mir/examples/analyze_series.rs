//! The observed-series workflow end to end: ingest a file, transform,
//! split at breakpoints, estimate and test each piece, render a report.
//!
//! The input here is a synthetic price history written to a temp file so
//! the example is self-contained; point `input` at any one-column file or
//! CSV to analyze real data.
//!
//! ```text
//! cargo run --release --example analyze_series
//! ```

use std::fs;

use mir::analysis::{
    analyze, transform, AnalysisConfig, ReportFormat, Transform, TransformSpec,
};
use mir::model::Model;
use mir::sim::simulate;

fn main() -> mir::Result<()> {
    // Prices: exponential of an integrated long-memory return process, so
    // log returns carry d = 0.3 and the level series itself carries d = 1.3.
    let model: Model = "arfima(d=0.3)".parse()?;
    let r = simulate(&model, 2_000, 99)?;
    let mut level = 0.0;
    let prices: Vec<f64> = r
        .iter()
        .map(|v| {
            level += v / 20.0;
            100.0 * level.exp()
        })
        .collect();

    let dir = std::env::temp_dir().join("mir_analyze_example");
    fs::create_dir_all(&dir)?;

    // First pass: reduce prices to log returns and save them, the same
    // reduction `transforms = returns` performs inside a report run.
    let returns = transform(&prices, &Transform::Returns)?;
    let returns_path = dir.join("returns.txt");
    fs::write(&returns_path, returns.iter().map(|v| format!("{v:.17e}\n")).collect::<String>())?;

    // Second pass: analyze the returns file directly, in two halves, both
    // as-is and through a power-transform search over |r|^theta.
    let config = AnalysisConfig {
        breakpoints: vec![1, 1000, 2000],
        transforms: vec![
            TransformSpec::Fixed(Transform::Identity),
            TransformSpec::Fixed(Transform::Abs),
            TransformSpec::PowerSearch(vec![0.5, 1.0, 1.5, 2.0]),
        ],
        ..AnalysisConfig::new(returns_path)
    };
    let report = analyze(&config)?;
    println!("{}", report.render(ReportFormat::Markdown));

    // The same run driven by a config file, as `mir analyze --config` does.
    let conf_path = dir.join("analyze.conf");
    fs::write(
        &conf_path,
        format!(
            "input = {}\ntransforms = identity\nlevel = 0.05\nformat = csv\n",
            config.input.display()
        ),
    )?;
    let from_file = AnalysisConfig::parse(&fs::read_to_string(&conf_path)?)?;
    println!("{}", analyze(&from_file)?.render(from_file.format));
    Ok(())
}
