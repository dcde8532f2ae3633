//! Build, restrict, and inspect covariance tables for the multiscale
//! estimator.
//!
//! Building the full default grid takes on the order of an hour, so the
//! builder keeps a plain-text work file of finished nodes and resumes from
//! it if interrupted:
//!
//! ```text
//! cargo run --release --example gamma_table -- build --p 20 \
//!     --work /tmp/p20.lines --out gamma_p20.tbl
//! cargo run --release --example gamma_table -- restrict \
//!     --in gamma_p20.tbl --p 5 --out gamma_p5.tbl
//! cargo run --release --example gamma_table -- show --in gamma_p20.tbl --d 0.3
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use mir::asymcov::{gamma_upper, GammaTable, SigmaOptions, TableMethod};

struct Args(BTreeMap<String, String>);

impl Args {
    fn parse(it: impl Iterator<Item = String>) -> Result<(String, Args), String> {
        let mut it = it.peekable();
        let mode = it.next().ok_or("usage: gamma_table <build|restrict|show> ...")?;
        let mut map = BTreeMap::new();
        while let Some(key) = it.next() {
            let key = key.strip_prefix("--").ok_or(format!("expected --flag, got '{key}'"))?;
            let val = it.next().ok_or(format!("--{key} needs a value"))?;
            map.insert(key.to_string(), val);
        }
        Ok((mode, Args(map)))
    }

    fn get(&self, key: &str) -> Result<&str, String> {
        self.0.get(key).map(String::as_str).ok_or(format!("missing --{key}"))
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("bad --{key} '{v}'")),
        }
    }
}

/// Grid in exact hundredths so resume keys never drift.
fn centi_grid(from: f64, to: f64) -> Vec<i64> {
    let lo = (from * 100.0).round() as i64;
    let hi = (to * 100.0).round() as i64;
    (lo..=hi).collect()
}

fn build(args: &Args) -> Result<(), String> {
    let p: usize = args.num("p", 20)?;
    let from: f64 = args.num("from", -0.49)?;
    let to: f64 = args.num("to", 1.24)?;
    let work = args.get("work")?;
    let out = args.get("out")?;
    let opts = SigmaOptions::default();

    let mut done: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    if let Ok(text) = fs::read_to_string(work) {
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut vals = line.split_whitespace().map(str::parse::<f64>);
            let d = vals.next().ok_or("empty work line")?.map_err(|e| e.to_string())?;
            let row: Result<Vec<f64>, _> = vals.collect();
            let row = row.map_err(|e| e.to_string())?;
            if row.len() == p * (p + 1) / 2 {
                done.insert((d * 100.0).round() as i64, row);
            }
        }
        eprintln!("resuming: {} nodes already in {work}", done.len());
    }

    let grid = centi_grid(from, to);
    let mut wf = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(work)
        .map_err(|e| e.to_string())?;
    for (k, &c) in grid.iter().enumerate() {
        if done.contains_key(&c) {
            continue;
        }
        let d = c as f64 / 100.0;
        let t0 = std::time::Instant::now();
        let (row, worst_tail) = gamma_upper(d, p, &opts).map_err(|e| e.to_string())?;
        let mut line = format!("{d:.6}");
        for v in &row {
            line.push_str(&format!(" {v:.17e}"));
        }
        writeln!(wf, "{line}").map_err(|e| e.to_string())?;
        wf.flush().map_err(|e| e.to_string())?;
        eprintln!(
            "node {}/{} d={d:+.2} in {:.1}s (worst tail {worst_tail:.2e})",
            k + 1,
            grid.len(),
            t0.elapsed().as_secs_f64()
        );
        done.insert(c, row);
    }

    let nodes: Vec<(f64, Vec<f64>)> =
        done.into_iter().map(|(c, row)| (c as f64 / 100.0, row)).collect();
    let table = GammaTable::new(p, TableMethod::Analytic, nodes).map_err(|e| e.to_string())?;
    fs::write(out, table.render()).map_err(|e| e.to_string())?;
    eprintln!("wrote {out}");
    Ok(())
}

fn restrict(args: &Args) -> Result<(), String> {
    let p: usize = args.num("p", 5)?;
    let input = fs::read_to_string(args.get("in")?).map_err(|e| e.to_string())?;
    let table = GammaTable::parse(&input).map_err(|e| e.to_string())?;
    let small = table.restrict(p).map_err(|e| e.to_string())?;
    fs::write(args.get("out")?, small.render()).map_err(|e| e.to_string())?;
    Ok(())
}

fn show(args: &Args) -> Result<(), String> {
    let input = fs::read_to_string(args.get("in")?).map_err(|e| e.to_string())?;
    let table = GammaTable::parse(&input).map_err(|e| e.to_string())?;
    let d: f64 = args.num("d", 0.0)?;
    let g = table.gamma(d).map_err(|e| e.to_string())?;
    println!("p = {}, grid {:?} nodes, d = {d}", table.p(), table.grid().len());
    for i in 0..table.p() {
        let row: Vec<String> = (0..table.p()).map(|j| format!("{:+.6}", g[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }
    println!("sigma_p({d}) = {:.6}", table.sigma_d(d).map_err(|e| e.to_string())?);
    Ok(())
}

fn main() -> ExitCode {
    let r = match Args::parse(std::env::args().skip(1)) {
        Ok((mode, args)) => match mode.as_str() {
            "build" => build(&args),
            "restrict" => restrict(&args),
            "show" => show(&args),
            other => Err(format!("unknown mode '{other}'")),
        },
        Err(e) => Err(e),
    };
    if let Err(e) = r {
        eprintln!("gamma_table: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
