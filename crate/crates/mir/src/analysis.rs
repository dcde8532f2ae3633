//! Workflow for observed series: read a column of numbers, rewrite it
//! (log returns, absolute values, squares, fractional powers), cut it at
//! user-supplied breakpoints, and run the estimator and both boundary
//! tests on every segment.
//!
//! Transforms apply to the ingested column independently. A typical
//! volatility study therefore runs twice: once on the price file with
//! `transforms = returns` to export the return series, then on that
//! series with `transforms = identity, abs, square, power-search` to
//! compare memory across magnitude scales.

use crate::asymcov::GammaTable;
use crate::config::{split_top_level, Config};
use crate::error::{Error, Result};
use crate::estimator::{adaptive_estimate, EstimationReport};
use crate::stattest::{nonstationarity_test, stationarity_test, TestDecision};
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Pointwise rewrite of a series.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Identity,
    /// log x_{t+1} - log x_t; needs strictly positive input.
    Returns,
    Abs,
    Square,
    /// |x|^theta for theta in (0, 3].
    Power(f64),
}

/// What a configuration row asks for: one fixed rewrite, or a scan of
/// |x|^theta over a grid keeping the exponent with the largest memory
/// estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    Fixed(Transform),
    PowerSearch(Vec<f64>),
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 3.0 {
        Ok(())
    } else {
        Err(Error::BadParameter {
            name: "theta",
            value: theta,
            reason: "power exponent must lie in (0, 3]",
        })
    }
}

/// Exponents 0.05, 0.10, ..., 3.00, matching the two-decimal resolution
/// the scan reports.
pub fn default_theta_grid() -> Vec<f64> {
    (1..=60).map(|k| k as f64 / 20.0).collect()
}

pub fn transform(x: &[f64], kind: &Transform) -> Result<Vec<f64>> {
    match kind {
        Transform::Identity => Ok(x.to_vec()),
        Transform::Returns => {
            if x.len() < 2 {
                return Err(Error::SeriesTooShort { n: x.len(), needed: 2 });
            }
            if let Some(&bad) = x.iter().find(|v| **v <= 0.0) {
                return Err(Error::BadParameter {
                    name: "price",
                    value: bad,
                    reason: "log returns need strictly positive inputs",
                });
            }
            Ok(x.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
        }
        Transform::Abs => Ok(x.iter().map(|v| v.abs()).collect()),
        Transform::Square => Ok(x.iter().map(|v| v * v).collect()),
        Transform::Power(theta) => {
            check_theta(*theta)?;
            // integer exponents take the exact product path so that
            // power(1) == abs and power(2) == square bit for bit
            let f: fn(f64, f64) -> f64 = if *theta == 1.0 {
                |v, _| v.abs()
            } else if *theta == 2.0 {
                |v, _| v * v
            } else {
                |v, t| v.abs().powf(t)
            };
            Ok(x.iter().map(|&v| f(v, *theta)).collect())
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => write!(f, "identity"),
            Transform::Returns => write!(f, "returns"),
            Transform::Abs => write!(f, "abs"),
            Transform::Square => write!(f, "square"),
            Transform::Power(t) => write!(f, "power({t})"),
        }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformSpec::Fixed(t) => t.fmt(f),
            TransformSpec::PowerSearch(_) => write!(f, "power-search"),
        }
    }
}

impl FromStr for TransformSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<TransformSpec> {
        let s = s.trim();
        match s {
            "identity" => return Ok(TransformSpec::Fixed(Transform::Identity)),
            "returns" => return Ok(TransformSpec::Fixed(Transform::Returns)),
            "abs" => return Ok(TransformSpec::Fixed(Transform::Abs)),
            "square" => return Ok(TransformSpec::Fixed(Transform::Square)),
            "power-search" => return Ok(TransformSpec::PowerSearch(default_theta_grid())),
            _ => {}
        }
        if let Some(body) = s.strip_prefix("power-search(").and_then(|r| r.strip_suffix(')')) {
            let grid: Vec<f64> = split_top_level(body)
                .into_iter()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Parse(format!("power-search: `{t}` is not a number")))
                })
                .collect::<Result<_>>()?;
            if grid.is_empty() {
                return Err(Error::Parse("power-search: empty exponent grid".into()));
            }
            for &t in &grid {
                check_theta(t)?;
            }
            return Ok(TransformSpec::PowerSearch(grid));
        }
        if let Some(body) = s.strip_prefix("power(").and_then(|r| r.strip_suffix(')')) {
            let theta: f64 = body
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("power: `{body}` is not a number")))?;
            check_theta(theta)?;
            return Ok(TransformSpec::Fixed(Transform::Power(theta)));
        }
        Err(Error::Parse(format!(
            "unknown transform `{s}` (expected identity, returns, abs, square, \
             power(t), power-search)"
        )))
    }
}

/// Which column of the input file holds the series.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSel {
    Index(usize),
    Name(String),
}

/// Parses a single-column file or a comma-separated table. A file whose
/// first cell is not a number is taken to start with a header row.
/// Blank lines, blank cells, and non-finite values are errors carrying
/// their line number.
pub fn parse_series(text: &str, column: Option<&ColumnSel>) -> Result<Vec<f64>> {
    let mut lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .collect();
    while lines.last().is_some_and(|(_, l)| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }

    let head_cells: Vec<&str> = lines[0].1.split(',').map(str::trim).collect();
    let has_header = head_cells.first().is_none_or(|c| c.parse::<f64>().is_err());

    let col = match (has_header, column) {
        (_, Some(ColumnSel::Index(i))) => *i,
        (true, Some(ColumnSel::Name(name))) => head_cells
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "column `{name}` not found in header ({})",
                    head_cells.join(", ")
                ))
            })?,
        (false, Some(ColumnSel::Name(name))) => {
            return Err(Error::Parse(format!(
                "column `{name}` requested but the file has no header row"
            )))
        }
        (_, None) => 0,
    };

    let mut values = Vec::with_capacity(lines.len());
    for &(ln, line) in lines.iter().skip(usize::from(has_header)) {
        if line.trim().is_empty() {
            return Err(Error::Parse(format!("line {ln}: blank line inside the data")));
        }
        let cells: Vec<&str> = line.split(',').collect();
        let cell = cells
            .get(col)
            .ok_or_else(|| {
                Error::Parse(format!("line {ln}: only {} columns, need column {col}", cells.len()))
            })?
            .trim();
        if cell.is_empty() {
            return Err(Error::Parse(format!("line {ln}: blank value")));
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| Error::Parse(format!("line {ln}: `{cell}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("line {ln}: non-finite value `{cell}`")));
        }
        values.push(v);
    }
    if values.len() < 50 {
        return Err(Error::SeriesTooShort { n: values.len(), needed: 50 });
    }
    Ok(values)
}

pub fn ingest(path: &Path, column: Option<&ColumnSel>) -> Result<Vec<f64>> {
    parse_series(&fs::read_to_string(path)?, column)
}

/// One exponent of a power scan and the memory estimate it produced;
/// `None` where the estimator failed (that exponent is skipped).
#[derive(Debug, Clone)]
pub struct ThetaPoint {
    pub theta: f64,
    pub d_tilde: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ThetaScan {
    /// Exponent with the largest estimate; ties go to the smaller one.
    pub theta: f64,
    pub profile: Vec<ThetaPoint>,
}

pub fn theta_search(
    x: &[f64],
    grid: &[f64],
    level: f64,
    p: Option<usize>,
    table: &GammaTable,
) -> Result<ThetaScan> {
    if grid.is_empty() {
        return Err(Error::Parse("power-search: empty exponent grid".into()));
    }
    for &t in grid {
        check_theta(t)?;
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut profile = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &theta in &grid {
        let series = transform(x, &Transform::Power(theta))?;
        match adaptive_estimate(&series, level, p, table) {
            Ok(rep) => {
                if best.is_none_or(|(_, d)| rep.d_tilde > d) {
                    best = Some((theta, rep.d_tilde));
                }
                profile.push(ThetaPoint { theta, d_tilde: Some(rep.d_tilde) });
            }
            Err(_) => profile.push(ThetaPoint { theta, d_tilde: None }),
        }
    }
    match best {
        Some((theta, _)) => Ok(ThetaScan { theta, profile }),
        None => Err(Error::Numeric {
            what: "theta_search",
            detail: "estimation failed at every grid exponent".into(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Both,
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub input: PathBuf,
    pub column: Option<ColumnSel>,
    pub transforms: Vec<TransformSpec>,
    /// 1-based cut positions; empty means one segment spanning everything.
    pub breakpoints: Vec<usize>,
    pub level: f64,
    pub p: Option<usize>,
    /// Coefficient table file; the built-in table when absent.
    pub gamma: Option<PathBuf>,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
}

impl AnalysisConfig {
    pub fn new(input: impl Into<PathBuf>) -> AnalysisConfig {
        AnalysisConfig {
            input: input.into(),
            column: None,
            transforms: vec![TransformSpec::Fixed(Transform::Identity)],
            breakpoints: Vec::new(),
            level: 0.05,
            p: None,
            gamma: None,
            format: ReportFormat::Both,
            out: None,
        }
    }

    /// Reads the flat `key = value` description used by the analysis
    /// front end. Keys: `input` (required), `column`, `transforms`,
    /// `breakpoints`, `level`, `p`, `gamma`, `format`, `out`.
    pub fn parse(text: &str) -> Result<AnalysisConfig> {
        let cfg = Config::parse(text)?;
        cfg.expect_keys(&[
            "input", "column", "transforms", "breakpoints", "level", "p", "gamma", "format",
            "out",
        ])?;
        let mut out = AnalysisConfig::new(cfg.require("input")?);
        if let Some(col) = cfg.get("column") {
            out.column = Some(match col.parse::<usize>() {
                Ok(i) => ColumnSel::Index(i),
                Err(_) => ColumnSel::Name(col.to_string()),
            });
        }
        if let Some(list) = cfg.get("transforms") {
            out.transforms = split_top_level(list)
                .into_iter()
                .map(str::parse)
                .collect::<Result<_>>()?;
            if out.transforms.is_empty() {
                return Err(Error::Parse("transforms: need at least one".into()));
            }
        }
        if let Some(list) = cfg.get("breakpoints") {
            out.breakpoints = split_top_level(list)
                .into_iter()
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::Parse(format!("breakpoints: `{s}` is not an index")))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(level) = cfg.typed("level")? {
            out.level = level;
        }
        out.p = cfg.typed("p")?;
        out.gamma = cfg.get("gamma").map(PathBuf::from);
        if let Some(f) = cfg.get("format") {
            out.format = match f {
                "markdown" => ReportFormat::Markdown,
                "csv" => ReportFormat::Csv,
                "both" => ReportFormat::Both,
                other => {
                    return Err(Error::Parse(format!(
                        "format: unknown `{other}` (markdown, csv, both)"
                    )))
                }
            };
        }
        out.out = cfg.get("out").map(PathBuf::from);
        Ok(out)
    }
}

/// Turns 1-based cut positions into 0-based half-open index ranges.
/// `(1, k, N)` gives the two ranges `[0, k-1)` and `[k-1, N)`.
fn segments(breaks: &[usize], n: usize) -> Result<Vec<(usize, usize)>> {
    if breaks.is_empty() {
        return Ok(vec![(0, n)]);
    }
    if breaks.len() < 2 {
        return Err(Error::Parse(
            "breakpoints: need at least two positions (start and end)".into(),
        ));
    }
    if breaks[0] < 1 {
        return Err(Error::Parse("breakpoints: positions are 1-based".into()));
    }
    if !breaks.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Parse("breakpoints must increase strictly".into()));
    }
    let last = *breaks.last().unwrap();
    if last > n {
        return Err(Error::Parse(format!(
            "breakpoints: position {last} exceeds the series length {n}"
        )));
    }
    let k = breaks.len();
    let mut out = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let start = breaks[i] - 1;
        let end = if i == k - 2 { breaks[i + 1] } else { breaks[i + 1] - 1 };
        if end - start < 50 {
            return Err(Error::SeriesTooShort { n: end - start, needed: 50 });
        }
        out.push((start, end));
    }
    Ok(out)
}

/// Test outcome as reported per segment; `BeyondClt` marks estimates at
/// or above the upper end of the estimable range, where neither boundary
/// test is backed by a limit theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Accept { p_value: f64 },
    Reject { p_value: f64 },
    BeyondClt,
}

impl Verdict {
    fn of(d: &TestDecision) -> Verdict {
        if d.accept {
            Verdict::Accept { p_value: d.p_value }
        } else {
            Verdict::Reject { p_value: d.p_value }
        }
    }

    pub fn accepted(&self) -> Option<bool> {
        match self {
            Verdict::Accept { .. } => Some(true),
            Verdict::Reject { .. } => Some(false),
            Verdict::BeyondClt => None,
        }
    }

    fn label(&self) -> String {
        let short = |p: f64| {
            if p < 0.001 {
                "p<0.001".to_string()
            } else {
                format!("p={p:.3}")
            }
        };
        match self {
            Verdict::Accept { p_value } => format!("accept ({})", short(*p_value)),
            Verdict::Reject { p_value } => format!("reject ({})", short(*p_value)),
            Verdict::BeyondClt => "beyond-clt".into(),
        }
    }

    fn csv_cells(&self) -> (String, String) {
        match self {
            Verdict::Accept { p_value } => ("accept".into(), num(*p_value)),
            Verdict::Reject { p_value } => ("reject".into(), num(*p_value)),
            Verdict::BeyondClt => ("beyond-clt".into(), "nan".into()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisRow {
    /// 1-based inclusive bounds of the segment in the input series.
    pub segment: (usize, usize),
    /// Rendered transform label.
    pub transform: String,
    pub report: EstimationReport,
    pub stationarity: Verdict,
    pub nonstationarity: Verdict,
    /// Standardized third moment of the transformed segment.
    pub skewness: f64,
    /// Raw standardized fourth moment (3 for a Gaussian), not excess.
    pub kurtosis: f64,
    /// Winning exponent; power-search rows only.
    pub theta: Option<f64>,
    pub theta_profile: Option<Vec<ThetaPoint>>,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub level: f64,
    pub rows: Vec<AnalysisRow>,
}

fn sample_moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let c = v - mean;
        let c2 = c * c;
        m2 += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        v.to_string()
    }
}

fn estimate_and_test(
    series: &[f64],
    config: &AnalysisConfig,
    table: &GammaTable,
) -> Result<(EstimationReport, Verdict, Verdict)> {
    let report = adaptive_estimate(series, config.level, config.p, table)?;
    if report.se.is_none() {
        return Ok((report, Verdict::BeyondClt, Verdict::BeyondClt));
    }
    let s = stationarity_test(&report, config.level, table)?;
    let t = nonstationarity_test(&report, config.level, table)?;
    Ok((report, Verdict::of(&s), Verdict::of(&t)))
}

/// Runs the whole configured workflow on an already-loaded series.
pub fn analyze_series(x: &[f64], config: &AnalysisConfig) -> Result<AnalysisReport> {
    if config.transforms.is_empty() {
        return Err(Error::Parse("transforms: need at least one".into()));
    }
    let loaded;
    let table: &GammaTable = match &config.gamma {
        Some(path) => {
            loaded = GammaTable::parse(&fs::read_to_string(path)?)?;
            &loaded
        }
        None => GammaTable::builtin(20)?,
    };
    let mut rows = Vec::new();
    for &(start, end) in &segments(&config.breakpoints, x.len())? {
        let base = &x[start..end];
        for spec in &config.transforms {
            let (series, theta, theta_profile) = match spec {
                TransformSpec::Fixed(kind) => (transform(base, kind)?, None, None),
                TransformSpec::PowerSearch(grid) => {
                    let scan = theta_search(base, grid, config.level, config.p, table)?;
                    let series = transform(base, &Transform::Power(scan.theta))?;
                    (series, Some(scan.theta), Some(scan.profile))
                }
            };
            let (report, stationarity, nonstationarity) =
                estimate_and_test(&series, config, table)?;
            let (skewness, kurtosis) = sample_moments(&series);
            rows.push(AnalysisRow {
                segment: (start + 1, end),
                transform: spec.to_string(),
                report,
                stationarity,
                nonstationarity,
                skewness,
                kurtosis,
                theta,
                theta_profile,
            });
        }
    }
    Ok(AnalysisReport { level: config.level, rows })
}

/// Loads the configured input file and analyzes it.
pub fn analyze(config: &AnalysisConfig) -> Result<AnalysisReport> {
    let x = ingest(&config.input, config.column.as_ref())?;
    analyze_series(&x, config)
}

const CSV_HEADER: &str = "segment_start,segment_end,transform,n,d_tilde,se,ci_lo,ci_hi,\
                          stationarity,p_stationarity,nonstationarity,p_nonstationarity,\
                          skewness,kurtosis,theta";

impl AnalysisReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let (sv, sp) = row.stationarity.csv_cells();
            let (tv, tp) = row.nonstationarity.csv_cells();
            let (lo, hi) = row.report.ci.map_or((f64::NAN, f64::NAN), |c| c);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{sv},{sp},{tv},{tp},{},{},{}",
                row.segment.0,
                row.segment.1,
                row.transform,
                row.report.n,
                num(row.report.d_tilde),
                num(row.report.se.unwrap_or(f64::NAN)),
                num(lo),
                num(hi),
                num(row.skewness),
                num(row.kurtosis),
                num(row.theta.unwrap_or(f64::NAN)),
            )
            .expect("string writes cannot fail");
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        writeln!(out, "level = {}\n", self.level).unwrap();
        writeln!(
            out,
            "| segment | transform | n | d | se | ci | stationary | nonstationary \
             | skew | kurt | theta |"
        )
        .unwrap();
        writeln!(out, "|---|---|---:|---:|---:|---|---|---|---:|---:|---:|").unwrap();
        for row in &self.rows {
            let se = row.report.se.map_or("".into(), |s| format!("{s:.4}"));
            let ci = row
                .report
                .ci
                .map_or("".into(), |(lo, hi)| format!("[{lo:.4}, {hi:.4}]"));
            let theta = row.theta.map_or("".into(), |t| t.to_string());
            writeln!(
                out,
                "| {}..{} | {} | {} | {:.4} | {} | {} | {} | {} | {:.2} | {:.2} | {} |",
                row.segment.0,
                row.segment.1,
                row.transform,
                row.report.n,
                row.report.d_tilde,
                se,
                ci,
                row.stationarity.label(),
                row.nonstationarity.label(),
                row.skewness,
                row.kurtosis,
                theta,
            )
            .unwrap();
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Markdown => self.to_markdown(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Both => format!("{}\n{}", self.to_markdown(), self.to_csv()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use crate::sim::simulate;
    use crate::stattest::threshold_test;

    fn wn(n: usize, seed: u64) -> Vec<f64> {
        simulate(&Model::fractional_noise(0.0), n, seed).unwrap()
    }

    #[test]
    fn series_parsing_accepts_plain_and_csv_input() {
        let plain: String = (0..100).map(|i| format!("{}.5\n", i)).collect();
        assert_eq!(parse_series(&plain, None).unwrap().len(), 100);

        let csv: String = std::iter::once("date,close,volume\n".to_string())
            .chain((0..60).map(|i| format!("day{i},{system},{i}\n", system = i * 2)))
            .collect();
        let by_name = parse_series(&csv, Some(&ColumnSel::Name("close".into()))).unwrap();
        let by_index = parse_series(&csv, Some(&ColumnSel::Index(1))).unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!(by_name[3], 6.0);
    }

    #[test]
    fn series_parsing_rejects_bad_rows_with_line_numbers() {
        let mut text: String = (0..6).map(|i| format!("{i}\n")).collect();
        text.push_str("abc\n");
        text.extend((7..60).map(|i| format!("{i}\n")));
        let err = parse_series(&text, None).unwrap_err().to_string();
        assert!(err.contains("line 7") && err.contains("abc"), "{err}");

        let blank: String = "1\n2\n\n4\n".into();
        let err = parse_series(&blank, None).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");

        let nan: String = (0..5).map(|i| format!("{i}\n")).collect::<String>() + "nan\n1\n";
        let err = parse_series(&nan, None).unwrap_err().to_string();
        assert!(err.contains("line 6"), "{err}");

        let short: String = (0..10).map(|i| format!("{i}\n")).collect();
        assert!(matches!(
            parse_series(&short, None),
            Err(Error::SeriesTooShort { n: 10, needed: 50 })
        ));

        let err = parse_series("a,b\n1,2\n", Some(&ColumnSel::Name("c".into())))
            .unwrap_err()
            .to_string();
        assert!(err.contains("`c`"), "{err}");
        let err = parse_series("1,2\n3\n", Some(&ColumnSel::Index(1))).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err =
            parse_series("1\n2\n", Some(&ColumnSel::Name("x".into()))).unwrap_err().to_string();
        assert!(err.contains("no header"), "{err}");
    }

    #[test]
    fn transforms_match_their_definitions() {
        let flat = vec![3.25; 80];
        let r = transform(&flat, &Transform::Returns).unwrap();
        assert_eq!(r.len(), 79);
        assert!(r.iter().all(|&v| v == 0.0));

        let x: Vec<f64> = (0..64).map(|i| ((i * 37 % 13) as f64 - 6.0) / 3.0).collect();
        assert_eq!(
            transform(&x, &Transform::Power(2.0)).unwrap(),
            transform(&x, &Transform::Square).unwrap()
        );
        assert_eq!(
            transform(&x, &Transform::Power(1.0)).unwrap(),
            transform(&x, &Transform::Abs).unwrap()
        );
        assert_eq!(transform(&x, &Transform::Identity).unwrap(), x);

        assert!(transform(&[1.0, 0.0, 2.0], &Transform::Returns).is_err());
        assert!(transform(&x, &Transform::Power(0.0)).is_err());
        assert!(transform(&x, &Transform::Power(3.5)).is_err());
    }

    #[test]
    fn default_grid_covers_the_unit_steps() {
        let grid = default_theta_grid();
        assert_eq!(grid.len(), 60);
        assert_eq!(grid[0], 0.05);
        assert_eq!(*grid.last().unwrap(), 3.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        for w in grid.windows(2) {
            assert!((w[1] - w[0] - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_search_is_scale_invariant() {
        let x = simulate(&Model::fractional_noise(0.3), 1500, 41).unwrap();
        let tripled: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let grid = [0.5, 1.0, 1.5, 2.0];
        let table = GammaTable::builtin(20).unwrap();
        let a = theta_search(&x, &grid, 0.05, None, table).unwrap();
        let b = theta_search(&tripled, &grid, 0.05, None, table).unwrap();
        // |cx|^t = c^t |x|^t, and the ratio statistic ignores constant
        // factors, so only floating-point rounding separates the scans
        assert_eq!(a.theta, b.theta);
        for (pa, pb) in a.profile.iter().zip(&b.profile) {
            let (da, db) = (pa.d_tilde.unwrap(), pb.d_tilde.unwrap());
            assert!((da - db).abs() < 1e-9, "theta {}: {da} vs {db}", pa.theta);
        }
    }

    #[test]
    fn white_noise_power_profile_brackets_zero() {
        let x = wn(2000, 7);
        let table = GammaTable::builtin(20).unwrap();
        for theta in default_theta_grid() {
            let series = transform(&x, &Transform::Power(theta)).unwrap();
            let rep = adaptive_estimate(&series, 0.05, None, table).unwrap();
            let se = rep.se.unwrap();
            assert!(
                rep.d_tilde.abs() <= 3.0 * se,
                "theta {theta}: d {} breaches 3se {}",
                rep.d_tilde,
                3.0 * se
            );
        }
    }

    #[test]
    fn breakpoints_cut_where_told() {
        assert_eq!(segments(&[], 700).unwrap(), vec![(0, 700)]);
        assert_eq!(segments(&[1, 300, 700], 700).unwrap(), vec![(0, 299), (299, 700)]);
        assert_eq!(segments(&[101, 400], 700).unwrap(), vec![(100, 400)]);

        assert!(segments(&[1], 700).is_err());
        assert!(segments(&[0, 300], 700).is_err());
        assert!(segments(&[1, 300, 300], 700).is_err());
        assert!(segments(&[1, 701], 700).is_err());
        assert!(matches!(
            segments(&[1, 30, 700], 700),
            Err(Error::SeriesTooShort { n: 29, needed: 50 })
        ));
    }

    #[test]
    fn configs_parse_and_reject_typos() {
        let cfg = AnalysisConfig::parse(
            "input = prices.csv\n\
             column = close\n\
             transforms = returns, power(0.5), power-search(0.5, 1.5)\n\
             breakpoints = 1, 250, 500\n\
             level = 0.1\n\
             p = 10\n\
             format = csv\n",
        )
        .unwrap();
        assert_eq!(cfg.column, Some(ColumnSel::Name("close".into())));
        assert_eq!(cfg.transforms.len(), 3);
        assert_eq!(cfg.transforms[1], TransformSpec::Fixed(Transform::Power(0.5)));
        assert_eq!(cfg.transforms[2], TransformSpec::PowerSearch(vec![0.5, 1.5]));
        assert_eq!(cfg.breakpoints, vec![1, 250, 500]);
        assert_eq!(cfg.level, 0.1);
        assert_eq!(cfg.p, Some(10));
        assert_eq!(cfg.format, ReportFormat::Csv);

        assert_eq!(
            AnalysisConfig::parse("input = a\ncolumn = 2\n").unwrap().column,
            Some(ColumnSel::Index(2))
        );
        let defaults = AnalysisConfig::parse("input = a\n").unwrap();
        assert_eq!(defaults.transforms, vec![TransformSpec::Fixed(Transform::Identity)]);
        assert_eq!(defaults.level, 0.05);
        assert_eq!(defaults.format, ReportFormat::Both);

        for bad in [
            "transforms = returns\n",
            "input = a\ninputt = b\n",
            "input = a\ntransforms = cube\n",
            "input = a\ntransforms = power(9)\n",
            "input = a\ntransforms = power-search()\n",
            "input = a\nbreakpoints = 1, two\n",
            "input = a\nformat = html\n",
        ] {
            assert!(AnalysisConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exp_prices_recover_the_driving_noise() {
        let z = wn(501, 11);
        let mut prices = Vec::with_capacity(501);
        let mut acc = 0.0;
        for v in z {
            acc += v;
            prices.push((acc / 10.0).exp());
        }
        let mut config = AnalysisConfig::new("unused");
        config.transforms = vec![TransformSpec::Fixed(Transform::Returns)];
        let report = analyze_series(&prices, &config).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.report.n, 500);
        assert!(matches!(row.stationarity, Verdict::Accept { .. }), "{:?}", row.stationarity);
        assert!(row.report.d_tilde.abs() < 0.25, "{}", row.report.d_tilde);
    }

    #[test]
    fn long_memory_proxy_keeps_its_label() {
        let x = simulate(&Model::fractional_noise(0.3), 1200, 5).unwrap();
        let config = AnalysisConfig::new("unused");
        let report = analyze_series(&x, &config).unwrap();
        assert!(matches!(report.rows[0].stationarity, Verdict::Accept { .. }));

        let table = GammaTable::builtin(20).unwrap();
        let rep = adaptive_estimate(&x, 0.05, None, table).unwrap();
        let t = threshold_test(&rep, 0.0, 0.05, table).unwrap();
        assert!(!t.accept, "memory at d=0.3 should clear the d0=0 boundary");
    }

    #[test]
    fn report_layouts_cover_every_cell() {
        let x = wn(600, 13);
        let mut config = AnalysisConfig::new("unused");
        config.breakpoints = vec![1, 300, 600];
        config.transforms = vec![
            TransformSpec::Fixed(Transform::Identity),
            TransformSpec::PowerSearch(vec![0.5, 1.0, 2.0]),
        ];
        let report = analyze_series(&x, &config).unwrap();
        assert_eq!(report.rows.len(), 4);

        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], CSV_HEADER);
        for row in report.rows.iter().filter(|r| r.transform == "power-search") {
            assert!(row.theta.is_some());
            assert_eq!(row.theta_profile.as_ref().unwrap().len(), 3);
        }

        let md = report.to_markdown();
        assert_eq!(md.lines().filter(|l| l.starts_with("| 1..299")).count(), 2);
        assert_eq!(md.lines().filter(|l| l.starts_with("| 300..600")).count(), 2);
        assert_eq!(report.render(ReportFormat::Both), format!("{md}\n{csv}"));
    }

    #[test]
    fn moment_estimators_match_hand_values() {
        let (skew, kurt) = sample_moments(&[0.0, 0.0, 0.0, 4.0]);
        assert!((skew - 2.0 / 3.0_f64.sqrt()).abs() < 1e-15);
        assert!((kurt - 7.0 / 3.0).abs() < 1e-15);

        let (skew, _) = sample_moments(&[-1.0, 1.0]);
        assert_eq!(skew, 0.0);

        let (skew, kurt) = sample_moments(&[2.0; 10]);
        assert!(skew.is_nan() && kurt.is_nan());
    }
}
