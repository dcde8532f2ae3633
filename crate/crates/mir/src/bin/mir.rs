//! Command-line front end: simulate model paths, estimate the memory
//! parameter of a series file, run the boundary tests, build coefficient
//! tables, drive Monte Carlo benches, check the analytic identity battery,
//! and run the observed-series workflow.
//!
//! Every failure prints one line `mir: error[<code>]: <message>` on stderr
//! and exits nonzero; identical inputs and flags produce identical bytes.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mir::analysis::{analyze, AnalysisConfig, ColumnSel};
use mir::asymcov::{gamma_empirical, gamma_upper, GammaTable, SigmaOptions, TableMethod};
use mir::error::Result;
use mir::estimator::{adaptive_estimate, EstimationReport};
use mir::mc::{emit, run_experiment, BenchFormat, ExperimentSpec};
use mir::model::Model;
use mir::rng::mix_seed;
use mir::stattest::{nonstationarity_test, stationarity_test, threshold_test, TestKind};
use mir::theory::verification_report;

#[derive(Parser)]
#[command(
    name = "mir",
    version,
    about = "Memory-parameter estimation for fractionally integrated Gaussian series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// H0: the series side is stationary (d <= 1/2)
    Stat,
    /// H0: the series side is nonstationary (d >= 1/2)
    Nonstat,
    /// H0: d <= d0 for a chosen boundary
    Threshold,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an exact Gaussian path of a model and write one value per line
    Simulate {
        /// Model text, e.g. "arfima(d=0.3, ar=[-0.5])" or "fgn(h=0.7)"
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the memory parameter of a series file
    Estimate {
        /// Input file: one column of numbers, or a CSV with a header
        #[arg(long = "in")]
        input: PathBuf,
        /// Column name or zero-based index for CSV input
        #[arg(long)]
        column: Option<String>,
        /// Scale count override; chosen from the sample size when omitted
        #[arg(long)]
        p: Option<usize>,
        /// Coefficient table file; the built-in table when omitted
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Test a boundary hypothesis about the memory parameter
    Test {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        column: Option<String>,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Boundary for --kind threshold
        #[arg(long, required_if_eq("kind", "threshold"))]
        d0: Option<f64>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Build a coefficient table over a grid of memory values
    GammaTable {
        #[arg(long)]
        p: usize,
        /// analytic (quadrature) or empirical (simulation)
        #[arg(long, default_value = "analytic")]
        method: String,
        #[arg(long)]
        out: PathBuf,
        /// Grid start
        #[arg(long, default_value_t = -0.49)]
        from: f64,
        /// Grid end
        #[arg(long, default_value_t = 1.24)]
        to: f64,
        /// Grid step
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Path length per replicate (empirical method)
        #[arg(long, default_value_t = 16384)]
        n: usize,
        /// Replicates per node (empirical method)
        #[arg(long, default_value_t = 400)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a Monte Carlo experiment described by a config file
    Bench {
        /// Flat key = value experiment description
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Check the analytic identity battery and print measured errors
    Verify,
    /// Run the observed-series workflow described by a config file
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
}

fn column_sel(column: Option<&str>) -> Option<ColumnSel> {
    column.map(|c| match c.parse::<usize>() {
        Ok(i) => ColumnSel::Index(i),
        Err(_) => ColumnSel::Name(c.to_string()),
    })
}

fn load_table(path: Option<&PathBuf>) -> Result<GammaTable> {
    match path {
        Some(p) => GammaTable::parse(&fs::read_to_string(p)?),
        None => Ok(GammaTable::builtin(20)?.clone()),
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn estimate_series(
    input: &PathBuf,
    column: Option<&str>,
    p: Option<usize>,
    gamma: Option<&PathBuf>,
    level: f64,
) -> Result<(EstimationReport, GammaTable)> {
    let x = mir::analysis::ingest(input, column_sel(column).as_ref())?;
    let table = load_table(gamma)?;
    let report = adaptive_estimate(&x, level, p, &table)?;
    Ok((report, table))
}

fn render_estimate(r: &EstimationReport) -> String {
    let opt = |v: Option<f64>| v.map_or("nan".to_string(), |v| format!("{v:.17e}"));
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(", ");
    format!(
        "n = {}\np = {}\nd_tilde = {:.17e}\nse = {}\nci_lo = {}\nci_hi = {}\n\
         level = {}\nalpha_hat = {:.17e}\nalpha_tilde = {:.17e}\nm_tilde = {}\n\
         no_clt = {}\nalpha_clamped = {}\ntruncated_scan = {}\ntied_scan = {}\n\
         dhat = {}\nir = {}\n",
        r.n,
        r.p,
        r.d_tilde,
        opt(r.se),
        opt(r.ci.map(|c| c.0)),
        opt(r.ci.map(|c| c.1)),
        r.level,
        r.alpha_hat,
        r.alpha_tilde,
        r.m_tilde,
        r.se.is_none(),
        r.alpha_clamped,
        r.truncated_scan,
        r.tied_scan,
        list(&r.profile.dhat),
        list(&r.profile.ir),
    )
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate { model, n, seed, out } => {
            let model: Model = model.parse()?;
            let x = mir::sim::simulate(&model, n, seed)?;
            let mut text = String::with_capacity(26 * x.len());
            for v in x {
                text.push_str(&format!("{v:.17e}\n"));
            }
            write_out(out.as_ref(), &text)?;
        }
        Command::Estimate { input, column, p, gamma, level } => {
            let (report, _) = estimate_series(&input, column.as_deref(), p, gamma.as_ref(), level)?;
            print!("{}", render_estimate(&report));
        }
        Command::Test { input, column, kind, d0, p, gamma, level } => {
            let (report, table) =
                estimate_series(&input, column.as_deref(), p, gamma.as_ref(), level)?;
            let decision = match kind {
                KindArg::Stat => stationarity_test(&report, level, &table)?,
                KindArg::Nonstat => nonstationarity_test(&report, level, &table)?,
                KindArg::Threshold => {
                    threshold_test(&report, d0.expect("required_if_eq"), level, &table)?
                }
            };
            let kind_name = match decision.kind {
                TestKind::Stationarity => "stationarity",
                TestKind::Nonstationarity => "nonstationarity",
                TestKind::Threshold(_) => "threshold",
            };
            print!(
                "kind = {kind_name}\n{}accept = {}\nstatistic = {:.17e}\n\
                 threshold = {:.17e}\np_value = {:.17e}\nlevel = {}\nn = {}\np = {}\n",
                match decision.kind {
                    TestKind::Threshold(d0) => format!("d0 = {d0}\n"),
                    _ => String::new(),
                },
                decision.accept,
                decision.statistic,
                decision.threshold,
                decision.p_value,
                decision.level,
                decision.n,
                decision.p,
            );
        }
        Command::GammaTable { p, method, out, from, to, step, n, reps, seed } => {
            let method: TableMethod = method.parse()?;
            let lo = (from * 100.0).round() as i64;
            let hi = (to * 100.0).round() as i64;
            let by = (step * 100.0).round() as i64;
            if by < 1 || hi < lo {
                return Err(mir::Error::BadParameter {
                    name: "step",
                    value: step,
                    reason: "grid needs from <= to and step >= 0.01",
                });
            }
            let opts = SigmaOptions::default();
            let grid: Vec<f64> = (lo..=hi).step_by(by as usize).map(|c| c as f64 / 100.0).collect();
            let mut nodes = Vec::with_capacity(grid.len());
            for (k, &d) in grid.iter().enumerate() {
                let t0 = std::time::Instant::now();
                let row = match method {
                    TableMethod::Analytic => gamma_upper(d, p, &opts)?.0,
                    TableMethod::Empirical => {
                        let g = gamma_empirical(d, p, n, reps, mix_seed(seed, &[k as u64]))?;
                        let mut upper = Vec::with_capacity(p * (p + 1) / 2);
                        for i in 0..p {
                            for j in i..p {
                                upper.push(g[(i, j)]);
                            }
                        }
                        upper
                    }
                };
                nodes.push((d, row));
                eprintln!(
                    "node {}/{} d={d:+.2} in {:.1}s",
                    k + 1,
                    grid.len(),
                    t0.elapsed().as_secs_f64()
                );
            }
            let table = GammaTable::new(p, method, nodes)?;
            fs::write(&out, table.render())?;
            eprintln!("wrote {}", out.display());
        }
        Command::Bench { spec, out, format } => {
            let spec = ExperimentSpec::parse(&fs::read_to_string(&spec)?)?;
            let table = run_experiment(&spec)?;
            let format = match format {
                FormatArg::Csv => BenchFormat::Csv,
                FormatArg::Markdown => BenchFormat::Markdown,
            };
            write_out(out.as_ref(), &emit(&table, format))?;
        }
        Command::Verify => {
            let checks = verification_report()?;
            let failed = checks.iter().filter(|c| !c.pass()).count();
            for c in &checks {
                println!(
                    "{}  {}  error={:.3e}  bound={:.3e}",
                    if c.pass() { "PASS" } else { "FAIL" },
                    c.name,
                    c.error,
                    c.bound
                );
            }
            println!("identities: {} checked, {} failed", checks.len(), failed);
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Analyze { config } => {
            let config = AnalysisConfig::parse(&fs::read_to_string(&config)?)?;
            let report = analyze(&config)?;
            write_out(config.out.as_ref(), &report.render(config.format))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mir: error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
