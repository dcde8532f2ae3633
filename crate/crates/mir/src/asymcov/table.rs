//! Precomputed covariance tables with shape-preserving interpolation.
//!
//! A table stores the upper triangle of the p x p ratio-vector covariance on
//! a grid of memory parameters. The text format is line oriented: a version
//! line, a header carrying p, the production method and a fingerprint of the
//! data lines, then one line per grid node (the node's d followed by the
//! p(p+1)/2 entries). Entries are interpolated in d by a monotone cubic and
//! the assembled matrix gets a tiny eigenvalue floor so downstream solves
//! never meet an exactly singular matrix.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lambda::lambda0_prime;

use super::matrix_from_upper;

pub const TABLE_VERSION_LINE: &str = "#mir-gamma-table v1";

/// Relative eigenvalue floor applied to interpolated matrices.
const EIG_FLOOR: f64 = 1e-10;

/// How a table's entries were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMethod {
    /// Direct evaluation of the shift integrals.
    Analytic,
    /// Sample covariance over simulated paths.
    Empirical,
}

impl fmt::Display for TableMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableMethod::Analytic => "analytic",
            TableMethod::Empirical => "empirical",
        })
    }
}

impl FromStr for TableMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(TableMethod::Analytic),
            "empirical" => Ok(TableMethod::Empirical),
            other => Err(Error::Parse(format!("unknown table method '{other}'"))),
        }
    }
}

fn fnv1a64(chunks: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for chunk in chunks {
        for &b in chunk.as_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= b'\n' as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Covariance entries of the scaled ratio vector on a grid of memory
/// parameters, with interpolation between nodes.
#[derive(Debug, Clone)]
pub struct GammaTable {
    p: usize,
    method: TableMethod,
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl GammaTable {
    pub fn new(p: usize, method: TableMethod, nodes: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if p == 0 {
            return Err(Error::BadParameter {
                name: "p",
                value: 0.0,
                reason: "need at least one scale",
            });
        }
        if nodes.len() < 2 {
            return Err(Error::Parse("a table needs at least two grid nodes".into()));
        }
        let want = p * (p + 1) / 2;
        let mut grid = Vec::with_capacity(nodes.len());
        let mut rows = Vec::with_capacity(nodes.len());
        for (d, row) in nodes {
            if row.len() != want {
                return Err(Error::Parse(format!(
                    "node d={d} carries {} entries, expected {want}",
                    row.len()
                )));
            }
            if let Some(&prev) = grid.last() {
                if d <= prev {
                    return Err(Error::Parse(format!(
                        "grid must increase strictly, got {prev} then {d}"
                    )));
                }
            }
            grid.push(d);
            rows.push(row);
        }
        Ok(Self { p, method, grid, rows })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn method(&self) -> TableMethod {
        self.method
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Closed interval of memory parameters the table covers.
    pub fn domain(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    /// Raw upper triangle stored at grid node `k`.
    pub fn node_upper(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let version = lines.next().unwrap_or("");
        if version.trim_end() != TABLE_VERSION_LINE {
            return Err(Error::TableFormat {
                line: 1,
                msg: format!("expected version line '{TABLE_VERSION_LINE}'"),
            });
        }
        let header = lines.next().unwrap_or("").trim_end();
        let mut p = None;
        let mut method = None;
        let mut fingerprint = None;
        for tok in header.split_whitespace() {
            let (key, val) = tok.split_once('=').ok_or_else(|| Error::TableFormat {
                line: 2,
                msg: format!("malformed header token '{tok}'"),
            })?;
            match key {
                "p" => {
                    p = Some(val.parse::<usize>().map_err(|_| Error::TableFormat {
                        line: 2,
                        msg: format!("bad p '{val}'"),
                    })?)
                }
                "method" => method = Some(val.parse::<TableMethod>()?),
                "fingerprint" => {
                    fingerprint =
                        Some(u64::from_str_radix(val, 16).map_err(|_| Error::TableFormat {
                            line: 2,
                            msg: format!("bad fingerprint '{val}'"),
                        })?)
                }
                other => {
                    return Err(Error::TableFormat {
                        line: 2,
                        msg: format!("unknown header key '{other}'"),
                    })
                }
            }
        }
        let (Some(p), Some(method), Some(fingerprint)) = (p, method, fingerprint) else {
            return Err(Error::TableFormat {
                line: 2,
                msg: "header must carry p=, method= and fingerprint=".into(),
            });
        };

        let mut nodes = Vec::new();
        let mut data_lines = Vec::new();
        for (idx, raw) in lines.enumerate() {
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut vals = Vec::with_capacity(1 + p * (p + 1) / 2);
            for tok in line.split_whitespace() {
                vals.push(tok.parse::<f64>().map_err(|_| Error::TableFormat {
                    line: idx + 3,
                    msg: format!("unparseable number '{tok}'"),
                })?);
            }
            if vals.len() != 1 + p * (p + 1) / 2 {
                return Err(Error::TableFormat {
                    line: idx + 3,
                    msg: format!(
                        "expected {} values, found {}",
                        1 + p * (p + 1) / 2,
                        vals.len()
                    ),
                });
            }
            let d = vals[0];
            nodes.push((d, vals.split_off(1)));
            data_lines.push(line);
        }
        let got = fnv1a64(&data_lines);
        if got != fingerprint {
            return Err(Error::TableFormat {
                line: 2,
                msg: format!(
                    "fingerprint mismatch: header {fingerprint:016x}, data {got:016x} (corrupt or edited table)"
                ),
            });
        }
        Self::new(p, method, nodes)
    }

    pub fn render(&self) -> String {
        let data_lines: Vec<String> = self
            .grid
            .iter()
            .zip(&self.rows)
            .map(|(d, row)| {
                let mut line = format!("{d:.6}");
                for v in row {
                    line.push(' ');
                    line.push_str(&format!("{v:.17e}"));
                }
                line
            })
            .collect();
        let refs: Vec<&str> = data_lines.iter().map(String::as_str).collect();
        let fp = fnv1a64(&refs);
        let mut out = String::new();
        out.push_str(TABLE_VERSION_LINE);
        out.push('\n');
        out.push_str(&format!("p={} method={} fingerprint={fp:016x}\n", self.p, self.method));
        for line in data_lines {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Table for the leading `p2` scales: covariances do not depend on how
    /// many larger scales sit beside them, so a bigger table contains every
    /// smaller one.
    pub fn restrict(&self, p2: usize) -> Result<GammaTable> {
        if p2 == 0 || p2 > self.p {
            return Err(Error::BadParameter {
                name: "p",
                value: p2 as f64,
                reason: "restriction cannot exceed the stored scale count",
            });
        }
        let nodes = self
            .grid
            .iter()
            .zip(&self.rows)
            .map(|(&d, row)| {
                let mut sub = Vec::with_capacity(p2 * (p2 + 1) / 2);
                let mut idx = 0;
                for i in 0..self.p {
                    for j in i..self.p {
                        if i < p2 && j < p2 {
                            sub.push(row[idx]);
                        }
                        idx += 1;
                    }
                }
                (d, sub)
            })
            .collect();
        GammaTable::new(p2, self.method, nodes)
    }

    fn bracket(&self, d: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(d >= lo && d <= hi) {
            return Err(Error::TableDomain { d, lo, hi });
        }
        // rightmost interval start not beyond d
        let k = self.grid.partition_point(|&g| g <= d);
        Ok(k.saturating_sub(1).min(self.grid.len() - 2))
    }

    /// Interpolated covariance matrix at memory parameter `d`, floored to
    /// stay comfortably positive definite.
    pub fn gamma(&self, d: f64) -> Result<DMatrix<f64>> {
        let k = self.bracket(d)?;
        let upper: Vec<f64> = (0..self.p * (self.p + 1) / 2)
            .map(|e| pchip_eval(&self.grid, &self.rows, e, k, d))
            .collect();
        let m = matrix_from_upper(self.p, &upper);
        Ok(floor_eigenvalues(m))
    }

    /// Asymptotic standard deviation multiplier of the pooled estimator at
    /// memory parameter `d`: the reciprocal of the link slope times the
    /// precision mass of the covariance.
    pub fn sigma_d(&self, d: f64) -> Result<f64> {
        let g = self.gamma(d)?;
        let chol = g
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite { what: "interpolated covariance table" })?;
        let ones = DMatrix::from_element(self.p, 1, 1.0);
        let x = chol.solve(&ones);
        let mass: f64 = x.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::Numeric {
                what: "precision mass",
                detail: format!("non-positive precision mass {mass} at d={d}"),
            });
        }
        Ok(1.0 / (lambda0_prime(d) * mass.sqrt()))
    }

    /// Shipped table for p in {5, 10, 15, 20}.
    pub fn builtin(p: usize) -> Result<&'static GammaTable> {
        static T5: OnceLock<GammaTable> = OnceLock::new();
        static T10: OnceLock<GammaTable> = OnceLock::new();
        static T15: OnceLock<GammaTable> = OnceLock::new();
        static T20: OnceLock<GammaTable> = OnceLock::new();
        let (cell, text): (&OnceLock<GammaTable>, &str) = match p {
            5 => (&T5, include_str!("../../data/gamma_p5.tbl")),
            10 => (&T10, include_str!("../../data/gamma_p10.tbl")),
            15 => (&T15, include_str!("../../data/gamma_p15.tbl")),
            20 => (&T20, include_str!("../../data/gamma_p20.tbl")),
            other => {
                return Err(Error::BadParameter {
                    name: "p",
                    value: other as f64,
                    reason: "shipped tables cover p in {5, 10, 15, 20}",
                })
            }
        };
        Ok(cell.get_or_init(|| {
            GammaTable::parse(text).expect("shipped covariance table is well-formed")
        }))
    }
}

/// Fritsch-Carlson slope at an interior node from the two flanking secants.
fn fc_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    if s0 * s1 <= 0.0 {
        0.0
    } else {
        let w0 = 2.0 * h1 + h0;
        let w1 = h1 + 2.0 * h0;
        (w0 + w1) / (w0 / s0 + w1 / s1)
    }
}

/// One-sided endpoint slope, clamped to preserve shape.
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if m * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && m.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        m
    }
}

/// Monotone cubic through one entry's values, evaluated in interval `k`.
fn pchip_eval(grid: &[f64], rows: &[Vec<f64>], entry: usize, k: usize, d: f64) -> f64 {
    let n = grid.len();
    let y = |i: usize| rows[i][entry];
    let h = |i: usize| grid[i + 1] - grid[i];
    let sec = |i: usize| (y(i + 1) - y(i)) / h(i);

    let mk = if k == 0 {
        if n == 2 {
            sec(0)
        } else {
            end_slope(h(0), h(1), sec(0), sec(1))
        }
    } else {
        fc_slope(h(k - 1), h(k), sec(k - 1), sec(k))
    };
    let mk1 = if k + 2 == n {
        if n == 2 {
            sec(0)
        } else {
            end_slope(h(n - 2), h(n - 3), sec(n - 2), sec(n - 3))
        }
    } else {
        fc_slope(h(k), h(k + 1), sec(k), sec(k + 1))
    };

    let hk = h(k);
    let t = (d - grid[k]) / hk;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y(k) + h10 * hk * mk + h01 * y(k + 1) + h11 * hk * mk1
}

/// Clamp eigenvalues from below at a small fraction of the mean diagonal.
fn floor_eigenvalues(m: DMatrix<f64>) -> DMatrix<f64> {
    let p = m.nrows();
    let floor = EIG_FLOOR * m.trace() / p as f64;
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= floor) {
        return m;
    }
    let mut vals = eig.eigenvalues;
    for v in vals.iter_mut() {
        *v = v.max(floor);
    }
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}
