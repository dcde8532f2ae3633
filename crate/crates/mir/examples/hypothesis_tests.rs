//! Run the one-sided boundary tests on a stationary and a nonstationary
//! path and print the decisions side by side.
//!
//! The stationarity test keeps its null when the estimate stays below the
//! d = 1/2 boundary band; the nonstationarity test mirrors it from above;
//! the threshold test moves the boundary to any d0.
//!
//! ```text
//! cargo run --release --example hypothesis_tests
//! ```

use mir::asymcov::GammaTable;
use mir::estimator::adaptive_estimate;
use mir::model::Model;
use mir::sim::simulate;
use mir::stattest::{nonstationarity_test, stationarity_test, threshold_test, TestDecision};

fn show(label: &str, t: &TestDecision) {
    println!(
        "  {label:>18}: {}  (statistic {:+.4} vs threshold {:+.4}, p = {:.3})",
        if t.accept { "accept H0" } else { "reject H0" },
        t.statistic,
        t.threshold,
        t.p_value
    );
}

fn main() -> mir::Result<()> {
    let table = GammaTable::builtin(20)?;
    let level = 0.05;
    let n = 10_000;

    for d in [0.25, 0.85] {
        let model: Model = format!("arfima(d={d})").parse()?;
        let x = simulate(&model, n, 11)?;
        let report = adaptive_estimate(&x, level, None, table)?;
        println!(
            "{model}: n = {n}, d_tilde = {:+.4} (se {:.4})",
            report.d_tilde,
            report.se.unwrap()
        );
        show("stationary?", &stationarity_test(&report, level, table)?);
        show("nonstationary?", &nonstationarity_test(&report, level, table)?);
        show("d <= 0.5?", &threshold_test(&report, 0.5, level, table)?);
        show("d <= 0.0?", &threshold_test(&report, 0.0, level, table)?);
    }

    // Near the boundary both one-sided tests can accept: each null contains
    // d = 1/2, so neither side has evidence against it.
    let x = simulate(&"arfima(d=0.5)".parse()?, n, 11)?;
    let report = adaptive_estimate(&x, level, None, table)?;
    println!("arfima(d=0.5): d_tilde = {:+.4}", report.d_tilde);
    show("stationary?", &stationarity_test(&report, level, table)?);
    show("nonstationary?", &nonstationarity_test(&report, level, table)?);
    Ok(())
}
