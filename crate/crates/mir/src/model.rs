//! Model descriptions and their text form.
//!
//! The text grammar is `name(key=value, key=[v, v], ...)`:
//!
//! * `arfima(d=0.3, ar=[-0.5], ma=[0.7], var=1)` - fractional integration
//!   of order `d` driven through an ARMA filter. Polynomials are written
//!   `1 + c1 B + ... + ck B^k`, so `ar=[-0.5]` means X_t - 0.5 X_{t-1}.
//! * `fgn(h=0.7, var=1)` - fractional Gaussian noise increments.
//! * `powerlaw(d=0.2, c1=5, beta=0.5, var=1)` - spectral density
//!   proportional to |x|^{-2d} (1 + c1 |x|^beta) on [-pi, pi].
//!
//! `ar`, `ma` default to empty, `c1` to 0, `beta` to 1, `var` to 1.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Arfima { d: f64, ar: Vec<f64>, ma: Vec<f64>, var: f64 },
    Fgn { h: f64, var: f64 },
    PowerLaw { d: f64, c1: f64, beta: f64, var: f64 },
}

impl Model {
    /// Plain fractionally integrated noise of order `d`, unit innovation
    /// variance.
    pub fn fractional_noise(d: f64) -> Model {
        Model::Arfima { d, ar: Vec::new(), ma: Vec::new(), var: 1.0 }
    }

    /// The memory parameter the model realizes.
    pub fn memory(&self) -> f64 {
        match self {
            Model::Arfima { d, .. } | Model::PowerLaw { d, .. } => *d,
            Model::Fgn { h, .. } => h - 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, reason: &'static str| {
            Err(Error::BadParameter { name, value, reason })
        };
        match self {
            Model::Arfima { d, .. } | Model::PowerLaw { d, .. }
                if !(-0.5 < *d && *d < 1.25) =>
            {
                bad("d", *d, "memory parameter must lie in (-0.5, 1.25)")
            }
            Model::Arfima { var, .. } | Model::PowerLaw { var, .. } | Model::Fgn { var, .. }
                if !(*var > 0.0 && var.is_finite()) =>
            {
                bad("var", *var, "innovation variance must be positive")
            }
            Model::Fgn { h, .. } if !(0.0 < *h && *h < 1.0) => {
                bad("h", *h, "Hurst index must lie in (0, 1)")
            }
            Model::PowerLaw { c1, beta, .. } => {
                if !(0.0 < *beta && *beta <= 2.0) {
                    return bad("beta", *beta, "perturbation exponent must lie in (0, 2]");
                }
                if 1.0 + c1 * std::f64::consts::PI.powf(*beta) <= 0.0 {
                    return bad("c1", *c1, "density must stay positive on (0, pi]");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The stationary model whose exact cumulative sums realize `self`,
    /// plus whether that integration step is needed. Models with memory
    /// below 1/2 are their own base.
    pub fn stationary_base(&self) -> (Model, bool) {
        match self {
            Model::Arfima { d, ar, ma, var } if *d >= 0.5 => (
                Model::Arfima { d: d - 1.0, ar: ar.clone(), ma: ma.clone(), var: *var },
                true,
            ),
            Model::PowerLaw { d, c1, beta, var } if *d >= 0.5 => {
                (Model::PowerLaw { d: d - 1.0, c1: *c1, beta: *beta, var: *var }, true)
            }
            other => (other.clone(), false),
        }
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn fmt_list(vs: &[f64]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| fmt_num(*v)).collect();
    format!("[{}]", parts.join(","))
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Arfima { d, ar, ma, var } => {
                write!(f, "arfima(d={}", fmt_num(*d))?;
                if !ar.is_empty() {
                    write!(f, ",ar={}", fmt_list(ar))?;
                }
                if !ma.is_empty() {
                    write!(f, ",ma={}", fmt_list(ma))?;
                }
                if *var != 1.0 {
                    write!(f, ",var={}", fmt_num(*var))?;
                }
                write!(f, ")")
            }
            Model::Fgn { h, var } => {
                write!(f, "fgn(h={}", fmt_num(*h))?;
                if *var != 1.0 {
                    write!(f, ",var={}", fmt_num(*var))?;
                }
                write!(f, ")")
            }
            Model::PowerLaw { d, c1, beta, var } => {
                write!(f, "powerlaw(d={},c1={},beta={}", fmt_num(*d), fmt_num(*c1), fmt_num(*beta))?;
                if *var != 1.0 {
                    write!(f, ",var={}", fmt_num(*var))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Key-value arguments inside the parentheses, top-level commas only.
fn split_args(body: &str) -> Result<Vec<(&str, &str)>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let body = body.trim();
    if body.is_empty() {
        return Ok(out);
    }
    let mut pieces = Vec::new();
    for (i, ch) in body.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::Parse(format!("unbalanced ']' in '{body}'")))?;
            }
            ',' if depth == 0 => {
                pieces.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced '[' in '{body}'")));
    }
    pieces.push(&body[start..]);
    for piece in pieces {
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{}'", piece.trim())))?;
        out.push((k.trim(), v.trim()));
    }
    Ok(out)
}

fn parse_num(v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Parse(format!("'{v}' is not a number")))
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("'{v}' is not a [..] list")))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|s| parse_num(s.trim())).collect()
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Model> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::Parse(format!("'{s}' is missing '(': expected name(key=value,...)")))?;
        let close = s
            .rfind(')')
            .filter(|&i| i == s.len() - 1 && i > open)
            .ok_or_else(|| Error::Parse(format!("'{s}' must end with ')'")))?;
        let name = s[..open].trim();
        let args = split_args(&s[open + 1..close])?;
        let mut seen: Vec<&str> = Vec::new();
        for (k, _) in &args {
            if seen.contains(k) {
                return Err(Error::Parse(format!("duplicate key '{k}'")));
            }
            seen.push(k);
        }
        let get = |key: &str| args.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let require = |key: &str| {
            get(key).ok_or_else(|| Error::Parse(format!("{name} requires '{key}='")))
        };
        let reject_unknown = |allowed: &[&str]| -> Result<()> {
            for (k, _) in &args {
                if !allowed.contains(k) {
                    return Err(Error::Parse(format!(
                        "unknown key '{k}' for {name}; allowed: {}",
                        allowed.join(", ")
                    )));
                }
            }
            Ok(())
        };
        let model = match name {
            "arfima" => {
                reject_unknown(&["d", "ar", "ma", "var"])?;
                Model::Arfima {
                    d: parse_num(require("d")?)?,
                    ar: get("ar").map(parse_list).transpose()?.unwrap_or_default(),
                    ma: get("ma").map(parse_list).transpose()?.unwrap_or_default(),
                    var: get("var").map(parse_num).transpose()?.unwrap_or(1.0),
                }
            }
            "fgn" => {
                reject_unknown(&["h", "var"])?;
                Model::Fgn {
                    h: parse_num(require("h")?)?,
                    var: get("var").map(parse_num).transpose()?.unwrap_or(1.0),
                }
            }
            "powerlaw" => {
                reject_unknown(&["d", "c1", "beta", "var"])?;
                Model::PowerLaw {
                    d: parse_num(require("d")?)?,
                    c1: get("c1").map(parse_num).transpose()?.unwrap_or(0.0),
                    beta: get("beta").map(parse_num).transpose()?.unwrap_or(1.0),
                    var: get("var").map(parse_num).transpose()?.unwrap_or(1.0),
                }
            }
            other => {
                return Err(Error::Parse(format!(
                    "unknown model '{other}'; expected arfima, fgn, or powerlaw"
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_forms() {
        let m: Model = "arfima(d=0.3,ar=[-0.5],ma=[0.7],var=1)".parse().unwrap();
        assert_eq!(
            m,
            Model::Arfima { d: 0.3, ar: vec![-0.5], ma: vec![0.7], var: 1.0 }
        );
        let m: Model = "fgn(h=0.7)".parse().unwrap();
        assert_eq!(m, Model::Fgn { h: 0.7, var: 1.0 });
        let m: Model = "powerlaw(d=0.2, c1=5, beta=0.5)".parse().unwrap();
        assert_eq!(m, Model::PowerLaw { d: 0.2, c1: 5.0, beta: 0.5, var: 1.0 });
    }

    #[test]
    fn tolerates_spaces_and_defaults() {
        let m: Model = "  arfima( d = -0.2 )  ".parse().unwrap();
        assert_eq!(m, Model::fractional_noise(-0.2));
        let m: Model = "arfima(d=0.1,ar=[])".parse().unwrap();
        assert_eq!(m, Model::fractional_noise(0.1));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "arfima",
            "arfima(d=0.3",
            "arfima()",
            "arfima(d=x)",
            "arfima(d=0.3,q=1)",
            "arfima(d=0.3,d=0.4)",
            "arfima(d=0.3,ar=0.5)",
            "arfima(d=0.3,ar=[0.5)",
            "spam(d=0.3)",
            "fgn(h=1.5)",
            "arfima(d=1.3)",
            "arfima(d=0.3,var=-1)",
            "powerlaw(d=0.2,beta=3)",
            "powerlaw(d=0.2,c1=-9,beta=2)",
        ] {
            assert!(bad.parse::<Model>().is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "arfima(d=0.3,ar=[-0.5],ma=[0.7])",
            "arfima(d=-0.2)",
            "arfima(d=1.2,var=2.5)",
            "fgn(h=0.25)",
            "powerlaw(d=0.2,c1=5,beta=0.5)",
        ] {
            let m: Model = text.parse().unwrap();
            let shown = m.to_string();
            assert_eq!(shown.parse::<Model>().unwrap(), m);
            assert_eq!(shown, text);
        }
    }

    #[test]
    fn memory_and_base_split_integration_correctly() {
        let m: Model = "arfima(d=0.8)".parse().unwrap();
        assert_eq!(m.memory(), 0.8);
        let (base, integrate) = m.stationary_base();
        assert!(integrate);
        assert_eq!(base.memory(), 0.8 - 1.0);
        let m: Model = "fgn(h=0.9)".parse().unwrap();
        assert_eq!(m.memory(), 0.4);
        assert!(!m.stationary_base().1);
        let m: Model = "arfima(d=0.49)".parse().unwrap();
        assert!(!m.stationary_base().1);
    }
}
