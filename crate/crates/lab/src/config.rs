//! Flat key-value experiment configuration with dotted keys, e.g.
//! `qne.n_per_eval = 1000`. Lines starting with `#` are comments.
//! Every lookup records the resolved value (default or explicit) so the
//! run manifest carries the complete effective configuration.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Configuration or guard failure with source diagnostics.
#[derive(Debug)]
pub enum LabError {
    Config {
        field: String,
        line: Option<usize>,
        message: String,
    },
    TooFewTrials {
        got: usize,
        need: usize,
    },
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config {
                field,
                line,
                message,
            } => match line {
                Some(l) => write!(f, "config error at line {l}, field `{field}`: {message}"),
                None => write!(f, "config error, field `{field}`: {message}"),
            },
            LabError::TooFewTrials { got, need } => {
                write!(f, "too few trials: got {got}, need at least {need}")
            }
        }
    }
}

impl std::error::Error for LabError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed configuration plus a record of every resolved lookup.
#[derive(Debug, Default)]
pub struct FlatConfig {
    entries: BTreeMap<String, Entry>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl FlatConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| LabError::Config {
                field: stripped.to_string(),
                line: Some(line),
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(LabError::Config {
                    field: String::new(),
                    line: Some(line),
                    message: "empty key".into(),
                });
            }
            entries.insert(
                key,
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(Self {
            entries,
            resolved: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config {
            field: path.display().to_string(),
            line: None,
            message: format!("cannot read config file: {e}"),
        })?;
        Self::parse(&text)
    }

    /// Merge explicit overrides of the form `key=value`.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), LabError> {
        for ov in overrides {
            let (key, value) = ov.split_once('=').ok_or_else(|| LabError::Config {
                field: ov.clone(),
                line: None,
                message: "override must be `key=value`".into(),
            })?;
            self.entries.insert(
                key.trim().to_string(),
                Entry {
                    value: value.trim().to_string(),
                    line: 0,
                },
            );
        }
        Ok(())
    }

    fn note(&self, key: &str, value: &str) {
        self.resolved
            .borrow_mut()
            .insert(key.to_string(), value.to_string());
    }

    /// All keys resolved so far with their effective values.
    pub fn resolved_map(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        let v = self
            .entries
            .get(key)
            .map(|e| e.value.clone())
            .unwrap_or_else(|| default.to_string());
        self.note(key, &v);
        v
    }

    fn parse_with<T, F>(&self, key: &str, default: T, f: F) -> Result<T, LabError>
    where
        T: ToString,
        F: Fn(&str) -> Option<T>,
    {
        match self.entries.get(key) {
            None => {
                self.note(key, &default.to_string());
                Ok(default)
            }
            Some(e) => match f(&e.value) {
                Some(v) => {
                    self.note(key, &e.value);
                    Ok(v)
                }
                None => Err(LabError::Config {
                    field: key.to_string(),
                    line: Some(e.line),
                    message: format!("cannot parse value `{}`", e.value),
                }),
            },
        }
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64, LabError> {
        self.parse_with(key, default, |s| s.parse().ok())
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize, LabError> {
        self.parse_with(key, default, |s| s.parse().ok())
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64, LabError> {
        self.parse_with(key, default, |s| s.parse().ok())
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool, LabError> {
        self.parse_with(key, default, |s| match s {
            "true" | "1" | "yes" => Some(true),
            "false" | "0" | "no" => Some(false),
            _ => None,
        })
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, LabError> {
        let shown = default
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",");
        match self.entries.get(key) {
            None => {
                self.note(key, &shown);
                Ok(default.to_vec())
            }
            Some(e) => {
                let parsed: Option<Vec<f64>> = e
                    .value
                    .split(',')
                    .map(|s| s.trim().parse().ok())
                    .collect();
                match parsed {
                    Some(v) if !v.is_empty() => {
                        self.note(key, &e.value);
                        Ok(v)
                    }
                    _ => Err(LabError::Config {
                        field: key.to_string(),
                        line: Some(e.line),
                        message: format!("cannot parse list `{}`", e.value),
                    }),
                }
            }
        }
    }

    pub fn get_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, LabError> {
        let floats: Vec<f64> = default.iter().map(|&x| x as f64).collect();
        let v = self.get_f64_list(key, &floats)?;
        Ok(v.into_iter().map(|x| x.round() as usize).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dotted_keys_and_comments() {
        let cfg = FlatConfig::parse(
            "# a comment\nqne.n_per_eval = 1000\nsweep.trials=50 # inline\n\n",
        )
        .unwrap();
        assert_eq!(cfg.get_usize("qne.n_per_eval", 1).unwrap(), 1000);
        assert_eq!(cfg.get_usize("sweep.trials", 1).unwrap(), 50);
        assert_eq!(cfg.get_usize("missing", 7).unwrap(), 7);
        let resolved = cfg.resolved_map();
        assert_eq!(resolved.get("missing").unwrap(), "7");
    }

    #[test]
    fn reports_line_and_field_on_errors() {
        let err = FlatConfig::parse("valid = 1\nbroken line\n").unwrap_err();
        match err {
            LabError::Config { line, .. } => assert_eq!(line, Some(2)),
            _ => panic!("wrong error kind"),
        }
        let cfg = FlatConfig::parse("sweep.trials = soon\n").unwrap();
        let err = cfg.get_usize("sweep.trials", 1).unwrap_err();
        match err {
            LabError::Config { field, line, .. } => {
                assert_eq!(field, "sweep.trials");
                assert_eq!(line, Some(1));
            }
            _ => panic!("wrong error kind"),
        }
    }

    #[test]
    fn lists_parse() {
        let cfg = FlatConfig::parse("sweep.n_list = 100, 316,1000\n").unwrap();
        assert_eq!(
            cfg.get_usize_list("sweep.n_list", &[1]).unwrap(),
            vec![100, 316, 1000]
        );
    }
}
