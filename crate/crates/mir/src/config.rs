//! Flat `key = value` configuration text shared by the bench and analysis
//! front ends.
//!
//! One assignment per line. `#` starts a comment, blank lines are skipped,
//! keys must be unique. Values keep their raw text; list-valued keys are
//! split on commas that sit outside parentheses and brackets, so model
//! descriptions keep their internal commas.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Item {
    key: String,
    value: String,
    line: usize,
}

/// Parsed assignments in file order.
#[derive(Debug, Clone)]
pub struct Config {
    items: Vec<Item>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut items: Vec<Item> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if body.trim().is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {line}: expected `key = value`, got `{}`",
                    body.trim()
                )));
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {line}: empty key")));
            }
            if let Some(prev) = items.iter().find(|it| it.key == key) {
                return Err(Error::Parse(format!(
                    "line {line}: key `{key}` already set on line {}",
                    prev.line
                )));
            }
            items.push(Item { key, value: v.trim().to_string(), line });
        }
        Ok(Config { items })
    }

    fn find(&self, key: &str) -> Option<&Item> {
        self.items.iter().find(|it| it.key == key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.find(key).map(|it| it.value.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing required key `{key}`")))
    }

    /// Rejects keys outside `allowed`, citing the offending line.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        for it in &self.items {
            if !allowed.contains(&it.key.as_str()) {
                return Err(Error::Parse(format!(
                    "line {}: unknown key `{}` (expected one of: {})",
                    it.line,
                    it.key,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Scalar value parsed as `T`; absent keys give `None`, unparsable
    /// values an error citing the line.
    pub fn typed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some(it) = self.find(key) else { return Ok(None) };
        it.value.parse().map(Some).map_err(|_| {
            Error::Parse(format!(
                "line {}: cannot parse `{}` as {} for key `{}`",
                it.line,
                it.value,
                std::any::type_name::<T>(),
                it.key
            ))
        })
    }
}

/// Splits on commas at nesting depth zero and trims the pieces; empty
/// pieces (as from a trailing comma) are dropped.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out.retain(|t| !t.is_empty());
    out
}
