//! Report artifacts: CSV tables with lossless float formatting, JSON
//! summaries, and the run manifest that makes every result replayable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Format a double with 17 significant digits; parsing the text
/// recovers the exact bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// RFC-4180 field escaping: quote when the field contains a comma,
/// quote, or newline; double embedded quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV payload.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .header
                .iter()
                .map(|h| csv_field(h))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(
                &row.iter()
                    .map(|f| csv_field(f))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
        }
        out
    }
}

/// Outcome of one experiment command.
#[derive(Debug)]
pub struct ExperimentReport {
    pub kind: String,
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
    pub passed: bool,
}

/// Everything needed to replay a run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub master_seed: u64,
    pub threads: usize,
    pub started_unix_secs: u64,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl ExperimentReport {
    /// Write CSV tables, the JSON summary, and the manifest into
    /// `out_dir`; returns the written file paths. Result files contain
    /// no timestamps, so identical manifests reproduce identical bytes.
    pub fn write(
        &self,
        out_dir: &Path,
        command: &str,
        master_seed: u64,
        threads: usize,
        config: BTreeMap<String, String>,
    ) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(out_dir)?;
        let mut outputs = Vec::new();
        for t in &self.tables {
            let path = out_dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, t.to_csv())?;
            outputs.push(path);
        }
        let summary_path = out_dir.join("summary.json");
        let mut summary = self.summary.clone();
        if let serde_json::Value::Object(map) = &mut summary {
            map.insert("kind".into(), serde_json::json!(self.kind));
            map.insert("passed".into(), serde_json::json!(self.passed));
        }
        std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
        outputs.push(summary_path);

        let manifest = RunManifest {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            threads,
            started_unix_secs: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            outputs: outputs
                .iter()
                .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
                .collect(),
        };
        let manifest_path = out_dir.join("manifest.json");
        std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
        outputs.push(manifest_path);
        Ok(outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_roundtrips_bits() {
        for &x in &[
            0.08228287850505178,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            -2.5e300,
            0.1 + 0.2,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(x.to_bits(), back.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn table_renders() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), fmt_f64(0.5)]);
        let csv = t.to_csv();
        assert!(csv.starts_with("a,b\n"));
        assert!(csv.lines().count() == 2);
    }
}
