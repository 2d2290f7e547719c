//! Flat `key = value` configuration files with dotted section prefixes.
//!
//! ```text
//! # comment
//! experiment = solve-linear
//! domain.nodes = 64
//! time.final = 4
//! ```
//!
//! Lists are comma separated. Numbers accept `pi` and `<number>*pi`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug)]
pub struct RawConfig {
    path: PathBuf,
    entries: BTreeMap<String, Entry>,
    used: RefCell<BTreeSet<String>>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.').all(|part| {
            !part.is_empty()
                && part
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        })
}

pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s == "pi" {
        return Some(std::f64::consts::PI);
    }
    if let Some(head) = s.strip_suffix("*pi") {
        return head
            .trim()
            .parse::<f64>()
            .ok()
            .map(|v| v * std::f64::consts::PI);
    }
    s.parse::<f64>().ok()
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: String| CliError::Syntax {
                path: path.to_path_buf(),
                line,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_key(key) {
                return Err(syntax(format!("invalid key `{key}`")));
            }
            if value.is_empty() {
                return Err(syntax(format!("empty value for `{key}`")));
            }
            if let Some(prev) = entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            ) {
                return Err(syntax(format!(
                    "duplicate key `{key}` (first set on line {})",
                    prev.line
                )));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Directory relative paths in the config are resolved against.
    pub fn base_dir(&self) -> PathBuf {
        self.path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    }

    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, e)| (k.clone(), e.value.clone()))
            .collect()
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let e = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(&e.value)
    }

    pub fn field_error(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Field {
            field: key.to_string(),
            line: self.entries.get(key).map(|e| e.line),
            message: message.into(),
        }
    }

    fn parse_with<T>(
        &self,
        key: &str,
        what: &str,
        f: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => f(v)
                .map(Some)
                .ok_or_else(|| self.field_error(key, format!("expected {what}, got `{v}`"))),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, "a number", |v| {
            parse_number(v).filter(|x| x.is_finite())
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn req_f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn opt_parse<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        self.parse_with(key, what, |v| v.parse().ok())
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self
            .opt_parse(key, "a nonnegative integer")?
            .unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.opt_parse(key, "true or false")?.unwrap_or(default))
    }

    pub fn opt_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parse_with(key, "a comma-separated list of numbers", |v| {
            v.split(',')
                .map(|p| parse_number(p).filter(|x| x.is_finite()))
                .collect()
        })
    }

    pub fn opt_usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.parse_with(key, "a comma-separated list of integers", |v| {
            v.split(',').map(|p| p.trim().parse().ok()).collect()
        })
    }

    pub fn opt_str(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    /// One of `choices`, or `default` when absent.
    pub fn choice<'a>(
        &self,
        key: &str,
        choices: &[&'a str],
        default: Option<&'a str>,
    ) -> Result<&'a str> {
        match self.raw(key) {
            None => default.ok_or_else(|| self.missing(key)),
            Some(v) => choices.iter().find(|c| **c == v).copied().ok_or_else(|| {
                self.field_error(
                    key,
                    format!("expected one of {}, got `{v}`", choices.join(", ")),
                )
            }),
        }
    }

    pub fn missing(&self, key: &str) -> CliError {
        CliError::Field {
            field: key.to_string(),
            line: None,
            message: "required field is missing".into(),
        }
    }

    /// Fails on keys that no stage looked at.
    pub fn check_all_used(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            None => Ok(()),
            Some((k, _)) => Err(self.field_error(k, "unknown or unused field for this experiment")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RawConfig> {
        RawConfig::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn parses_sections_comments_and_lists() {
        let c = parse("# header\nexperiment = oracle-check\n\ndomain.length = pi  # trailing\noracle.orders = 0.25, 0.5,0.75\n").unwrap();
        assert_eq!(c.raw("experiment"), Some("oracle-check"));
        assert_eq!(c.req_f64("domain.length").unwrap(), std::f64::consts::PI);
        assert_eq!(
            c.opt_f64_list("oracle.orders").unwrap(),
            Some(vec![0.25, 0.5, 0.75])
        );
        c.check_all_used().unwrap();
    }

    #[test]
    fn numbers_accept_pi_multiples() {
        assert_eq!(parse_number("2*pi"), Some(2.0 * std::f64::consts::PI));
        assert_eq!(parse_number(" 1e-3 "), Some(1e-3));
        assert_eq!(parse_number("two"), None);
    }

    #[test]
    fn errors_carry_line_and_field() {
        let e = parse("a = 1\nnot a pair\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse("a = 1\na = 2\n").unwrap_err().to_string();
        assert!(e.contains("duplicate key `a`"), "{e}");
        let c = parse("x = 1\ntime.steps = many\n").unwrap();
        let e = c.usize_or("time.steps", 3).unwrap_err().to_string();
        assert!(e.contains("`time.steps`") && e.contains("line 2"), "{e}");
        let e = c.check_all_used().unwrap_err().to_string();
        assert!(e.contains("`x`") && e.contains("line 1"), "{e}");
    }

    #[test]
    fn choice_rejects_unknown_values() {
        let c = parse("kappa.kind = cubic\n").unwrap();
        let e = c
            .choice("kappa.kind", &["constant", "sin"], None)
            .unwrap_err()
            .to_string();
        assert!(e.contains("constant, sin"), "{e}");
    }
}
