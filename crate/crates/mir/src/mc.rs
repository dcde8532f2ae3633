//! Monte Carlo harness: repeated simulate/estimate/test cycles over a
//! grid of models and sample sizes, aggregated into a result table with
//! Monte Carlo standard errors.
//!
//! Replication seeds are derived by hashing (master seed, model index,
//! sample size, replication index), so results do not depend on execution
//! order and parallel runs reproduce serial ones byte for byte.

use crate::asymcov::GammaTable;
use crate::config::{split_top_level, Config};
use crate::error::{Error, Result};
use crate::estimator::{adaptive_estimate, MIN_TERMS};
use crate::model::Model;
use crate::rng::mix_seed;
use crate::sim::simulate;
use crate::stattest::{nonstationarity_test, select_p, stationarity_test};
use std::fmt::Write as _;
use std::time::Instant;

/// Which aggregate columns a run should fill; unrequested ones hold NaN.
#[derive(Debug, Clone, Copy)]
pub struct Outputs {
    pub rmse: bool,
    pub test_frequencies: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { rmse: true, test_frequencies: true }
    }
}

/// A full experiment: the model/size grid and the replication protocol.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub models: Vec<Model>,
    pub lengths: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub level: f64,
    /// worker threads; 0 means one per available core
    pub threads: usize,
    /// write measured wall time per row; disable for byte-stable output
    pub record_wall: bool,
    pub outputs: Outputs,
}

impl ExperimentSpec {
    pub fn new(models: Vec<Model>, lengths: Vec<usize>, replications: usize, seed: u64) -> Self {
        ExperimentSpec {
            models,
            lengths,
            replications,
            seed,
            level: 0.05,
            threads: 0,
            record_wall: true,
            outputs: Outputs::default(),
        }
    }

    /// Reads the flat `key = value` experiment description used by the
    /// bench front end.
    ///
    /// Keys: `models` and `lengths` (required, comma-separated),
    /// `replications` (default 100), `seed` (default 1), `level`
    /// (default 0.05), `threads` (default 0, one per core), `wall`
    /// (default false so file-driven runs are byte-stable), `outputs`
    /// (default `rmse, test-frequencies`).
    pub fn parse(text: &str) -> Result<ExperimentSpec> {
        let cfg = Config::parse(text)?;
        cfg.expect_keys(&[
            "models", "lengths", "replications", "seed", "level", "threads", "wall", "outputs",
        ])?;
        let models: Vec<Model> = split_top_level(cfg.require("models")?)
            .into_iter()
            .map(str::parse)
            .collect::<Result<_>>()?;
        let lengths: Vec<usize> = split_top_level(cfg.require("lengths")?)
            .into_iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Parse(format!("lengths: `{s}` is not a sample size")))
            })
            .collect::<Result<_>>()?;
        if models.is_empty() || lengths.is_empty() {
            return Err(Error::Parse("models and lengths must be nonempty".into()));
        }
        let mut spec = ExperimentSpec::new(
            models,
            lengths,
            cfg.typed("replications")?.unwrap_or(100),
            cfg.typed("seed")?.unwrap_or(1),
        );
        if let Some(level) = cfg.typed("level")? {
            spec.level = level;
        }
        if let Some(threads) = cfg.typed("threads")? {
            spec.threads = threads;
        }
        spec.record_wall = cfg.typed("wall")?.unwrap_or(false);
        if let Some(list) = cfg.get("outputs") {
            let mut outputs = Outputs { rmse: false, test_frequencies: false };
            for item in split_top_level(list) {
                match item {
                    "rmse" => outputs.rmse = true,
                    "test-frequencies" => outputs.test_frequencies = true,
                    other => {
                        return Err(Error::Parse(format!(
                            "outputs: unknown column group `{other}`"
                        )))
                    }
                }
            }
            if !(outputs.rmse || outputs.test_frequencies) {
                return Err(Error::Parse("outputs: need at least one column group".into()));
            }
            spec.outputs = outputs;
        }
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::BadParameter {
                name: "replications",
                value: self.replications as f64,
                reason: "standard errors need at least two replications",
            });
        }
        if !(self.level > 0.0 && self.level < 0.5) {
            return Err(Error::BadParameter {
                name: "level",
                value: self.level,
                reason: "type-I error must lie in (0, 0.5)",
            });
        }
        for model in &self.models {
            model.validate()?;
            for &n in &self.lengths {
                // the adaptive scan starts at the window exponent 2/ln n,
                // i.e. window 7; that candidate must survive the length
                // filter or the estimator has nothing to select from
                let p = select_p(n);
                if (n as f64 / p as f64).ln() < 2.0 || n < 3 * p * 7 + MIN_TERMS {
                    return Err(Error::InfeasibleWindow { n, p, min_terms: MIN_TERMS });
                }
            }
        }
        Ok(())
    }
}

/// One aggregated (model, sample size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub model: String,
    pub n: usize,
    pub replications: usize,
    pub rmse: f64,
    pub mean_d: f64,
    pub se_rmse: f64,
    /// frequency of acceptance by the stationarity test
    pub acc_s: f64,
    /// frequency of rejection by the nonstationarity test
    pub rej_t: f64,
    pub failures: usize,
    pub wall_ms: u64,
}

impl BenchRow {
    /// Binomial MC standard error of the stationarity acceptance rate.
    pub fn se_acc_s(&self) -> f64 {
        binom_se(self.acc_s, self.replications - self.failures)
    }

    /// Binomial MC standard error of the nonstationarity rejection rate.
    pub fn se_rej_t(&self) -> f64 {
        binom_se(self.rej_t, self.replications - self.failures)
    }
}

fn binom_se(freq: f64, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        (freq * (1.0 - freq) / n as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<BenchRow>,
    pub seed: u64,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchFormat {
    Csv,
    Markdown,
}

enum RepOutcome {
    Done { err: f64, d: f64, acc_s: bool, rej_t: bool },
    Failed,
}

/// One replication: simulate, estimate, test.
///
/// An estimate at or beyond the upper end of the estimable range carries no
/// limit theorem, so the tests cannot run; such a replication is still
/// evidence, not a failure: it counts as rejected by the stationarity test
/// and accepted by the nonstationarity test.
fn one_rep(model: &Model, n: usize, seed: u64, level: f64, table: &GammaTable) -> RepOutcome {
    let x = match simulate(model, n, seed) {
        Ok(x) => x,
        Err(_) => return RepOutcome::Failed,
    };
    let report = match adaptive_estimate(&x, level, None, table) {
        Ok(r) => r,
        Err(_) => return RepOutcome::Failed,
    };
    let err = report.d_tilde - model.memory();
    if report.se.is_none() {
        return RepOutcome::Done { err, d: report.d_tilde, acc_s: false, rej_t: false };
    }
    let acc_s = match stationarity_test(&report, level, table) {
        Ok(t) => t.accept,
        Err(_) => return RepOutcome::Failed,
    };
    let rej_t = match nonstationarity_test(&report, level, table) {
        Ok(t) => !t.accept,
        Err(_) => return RepOutcome::Failed,
    };
    RepOutcome::Done { err, d: report.d_tilde, acc_s, rej_t }
}

/// Runs the replication grid and aggregates each (model, sample size) cell.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let threads = if spec.threads == 0 {
        std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1)
    } else {
        spec.threads
    };
    let mut rows = Vec::with_capacity(spec.models.len() * spec.lengths.len());
    for (mi, model) in spec.models.iter().enumerate() {
        for &n in &spec.lengths {
            let start = Instant::now();
            let table = GammaTable::builtin(select_p(n))?;
            let run = |rep: usize| {
                let seed = mix_seed(spec.seed, &[mi as u64, n as u64, rep as u64]);
                one_rep(model, n, seed, spec.level, table)
            };
            let r = spec.replications;
            let outcomes: Vec<RepOutcome> = if threads <= 1 {
                (0..r).map(run).collect()
            } else {
                // independent chunks keyed by replication index; merge in
                // index order so thread count cannot change the reduction
                let chunk = r.div_ceil(threads);
                let mut parts: Vec<Vec<RepOutcome>> = Vec::new();
                std::thread::scope(|scope| {
                    let handles: Vec<_> = (0..r)
                        .step_by(chunk)
                        .map(|lo| {
                            let hi = (lo + chunk).min(r);
                            scope.spawn(move || (lo..hi).map(run).collect::<Vec<_>>())
                        })
                        .collect();
                    for h in handles {
                        parts.push(h.join().expect("replication worker panicked"));
                    }
                });
                parts.into_iter().flatten().collect()
            };
            rows.push(aggregate(model, n, &outcomes, spec, start));
        }
    }
    Ok(ResultTable { rows, seed: spec.seed, level: spec.level })
}

fn aggregate(
    model: &Model,
    n: usize,
    outcomes: &[RepOutcome],
    spec: &ExperimentSpec,
    start: Instant,
) -> BenchRow {
    let mut errs = Vec::new();
    let mut ds = Vec::new();
    let (mut acc, mut rej) = (0usize, 0usize);
    for o in outcomes {
        if let RepOutcome::Done { err, d, acc_s, rej_t } = o {
            errs.push(*err);
            ds.push(*d);
            acc += usize::from(*acc_s);
            rej += usize::from(*rej_t);
        }
    }
    let k = errs.len();
    let (rmse, mean_d, se_rmse) = if spec.outputs.rmse && k >= 2 {
        let msq = errs.iter().map(|e| e * e).sum::<f64>() / k as f64;
        let rmse = msq.sqrt();
        let var_msq =
            errs.iter().map(|e| (e * e - msq).powi(2)).sum::<f64>() / (k as f64 - 1.0);
        // delta method through the square root
        let se = if rmse > 0.0 { (var_msq / k as f64).sqrt() / (2.0 * rmse) } else { 0.0 };
        (rmse, ds.iter().sum::<f64>() / k as f64, se)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    let (acc_s, rej_t) = if spec.outputs.test_frequencies && k > 0 {
        (acc as f64 / k as f64, rej as f64 / k as f64)
    } else {
        (f64::NAN, f64::NAN)
    };
    BenchRow {
        model: model.to_string(),
        n,
        replications: outcomes.len(),
        rmse,
        mean_d,
        se_rmse,
        acc_s,
        rej_t,
        failures: outcomes.len() - k,
        wall_ms: if spec.record_wall { start.elapsed().as_millis() as u64 } else { 0 },
    }
}

const CSV_HEADER: &str = "model,N,R,rmse,mean_d,se_rmse,acc_S,rej_T,failures,wall_ms";

/// Six significant digits; round-trips through `str::parse::<f64>` back to
/// the same rendering.
fn sig6(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.5e}")
    }
}

/// Renders the table; CSV follows the fixed schema, markdown adds binomial
/// standard errors next to the frequencies.
pub fn emit(table: &ResultTable, format: BenchFormat) -> String {
    let mut out = String::new();
    match format {
        BenchFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in &table.rows {
                writeln!(
                    out,
                    "\"{}\",{},{},{},{},{},{},{},{},{}",
                    r.model,
                    r.n,
                    r.replications,
                    sig6(r.rmse),
                    sig6(r.mean_d),
                    sig6(r.se_rmse),
                    sig6(r.acc_s),
                    sig6(r.rej_t),
                    r.failures,
                    r.wall_ms
                )
                .expect("string write");
            }
        }
        BenchFormat::Markdown => {
            let _ = writeln!(out, "MC table: seed = {}, level = {}", table.seed, table.level);
            out.push_str("| model | N | R | rmse | mean d | acc S | rej T | fail | ms |\n");
            out.push_str("|---|---|---|---|---|---|---|---|---|\n");
            for r in &table.rows {
                writeln!(
                    out,
                    "| {} | {} | {} | {:.4} ± {:.4} | {:.4} | {:.3} ± {:.3} | {:.3} ± {:.3} | {} | {} |",
                    r.model,
                    r.n,
                    r.replications,
                    r.rmse,
                    r.se_rmse,
                    r.mean_d,
                    r.acc_s,
                    r.se_acc_s(),
                    r.rej_t,
                    r.se_rej_t(),
                    r.failures,
                    r.wall_ms
                )
                .expect("string write");
            }
        }
    }
    out
}

/// Parses text produced by [`emit`] with [`BenchFormat::Csv`].
pub fn parse_csv(text: &str) -> Result<ResultTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header `{CSV_HEADER}`, found {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let body = line.strip_prefix('"').ok_or_else(|| {
            Error::Parse(format!("line {lineno}: model field must be quoted"))
        })?;
        let (model, rest) = body.split_once('"').ok_or_else(|| {
            Error::Parse(format!("line {lineno}: unterminated model field"))
        })?;
        let rest = rest.strip_prefix(',').ok_or_else(|| {
            Error::Parse(format!("line {lineno}: expected comma after model field"))
        })?;
        let fields: Vec<&str> = rest.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse(format!(
                "line {lineno}: expected 9 numeric fields, found {}",
                fields.len()
            )));
        }
        let num = |idx: usize| -> Result<f64> {
            fields[idx]
                .parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: bad number `{}`", fields[idx])))
        };
        let int = |idx: usize| -> Result<usize> {
            fields[idx]
                .parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: bad count `{}`", fields[idx])))
        };
        rows.push(BenchRow {
            model: model.to_string(),
            n: int(0)?,
            replications: int(1)?,
            rmse: num(2)?,
            mean_d: num(3)?,
            se_rmse: num(4)?,
            acc_s: num(5)?,
            rej_t: num(6)?,
            failures: int(7)?,
            wall_ms: int(8)? as u64,
        });
    }
    Ok(ResultTable { rows, seed: 0, level: f64::NAN })
}
