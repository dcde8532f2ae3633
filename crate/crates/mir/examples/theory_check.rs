//! Evaluate the analytic identity battery and poke at the link functions
//! that connect window correlations to the memory parameter.
//!
//! ```text
//! cargo run --release --example theory_check
//! ```

use mir::lambda::{lambda0, lambda0_inverse, rho, Inverted};
use mir::theory::verification_report;

fn main() -> mir::Result<()> {
    // The battery recomputes each identity from scratch and reports the
    // measured error next to its bound; `mir verify` prints the same table.
    let checks = verification_report()?;
    for c in &checks {
        println!(
            "{}  {:<58}  error {:9.3e}  bound {:.0e}",
            if c.pass() { "PASS" } else { "FAIL" },
            c.name,
            c.error,
            c.bound
        );
    }

    // The estimator works by inverting d -> lambda0(d); a few round trips.
    println!("\nd -> window correlation -> expected ratio -> d again:");
    for d in [-0.3, 0.0, 0.5, 0.9, 1.2] {
        let v = lambda0(d);
        let back = match lambda0_inverse(v) {
            Inverted::Inside(b) => format!("{b:+.6}"),
            Inverted::Below => "below range".into(),
            Inverted::Above => "above range".into(),
        };
        println!("  d = {d:+.2}  rho = {:+.6}  lambda0 = {v:.6}  inverse {back}", rho(d));
    }

    let failed = checks.iter().filter(|c| !c.pass()).count();
    if failed > 0 {
        return Err(mir::Error::Numeric {
            what: "identity battery",
            detail: format!("{failed} checks failed"),
        });
    }
    Ok(())
}
