//! CSV and JSON manifest emission.
//!
//! CSV: `,` separator, `.` decimal point, mandatory header row, floats with
//! 17 significant digits. Every row is stamped with the experiment id and
//! config hash; the wall-time column comes last so reruns are byte-identical
//! up to it.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::json;

use crate::params::Params;

/// 17 significant digits, locale-independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Report {
    command: String,
    config_hash: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    summary: serde_json::Value,
    started: Instant,
}

impl Report {
    pub fn new(command: &str, params: &Params, header: &[&str]) -> Report {
        Report {
            command: command.to_string(),
            config_hash: params.config_hash(command),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: json!({}),
            started: Instant::now(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn set_summary(&mut self, summary: serde_json::Value) {
        self.summary = summary;
    }

    /// Writes `<out>/<command>.csv` and `<out>/<command>_manifest.json`;
    /// returns the CSV path.
    pub fn write(&self, params: &Params) -> Result<PathBuf> {
        let dir = params.out_dir();
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output dir {}", dir.display()))?;
        let wall_ms = self.started.elapsed().as_secs_f64() * 1e3;
        let csv_path = dir.join(format!("{}.csv", self.command));
        let mut csv = String::new();
        csv.push_str("experiment,config_hash,");
        csv.push_str(&self.header.join(","));
        csv.push_str(",wall_time_ms\n");
        for row in &self.rows {
            csv.push_str(&self.command);
            csv.push(',');
            csv.push_str(&self.config_hash);
            csv.push(',');
            csv.push_str(&row.join(","));
            csv.push(',');
            csv.push_str(&fmt_f64(wall_ms));
            csv.push('\n');
        }
        std::fs::write(&csv_path, csv)
            .with_context(|| format!("cannot write {}", csv_path.display()))?;

        let manifest = json!({
            "command": self.command,
            "config": params,
            "config_hash": self.config_hash,
            "seed": params.seed,
            "versions": {
                "rsf-cli": env!("CARGO_PKG_VERSION"),
                "rsf-core": rsf_core_version(),
            },
            "timings": { "total_ms": wall_ms },
            "csv": csv_path.file_name().unwrap().to_str(),
            "rows": self.rows.len(),
            "summary": self.summary,
        });
        let manifest_path = dir.join(format!("{}_manifest.json", self.command));
        std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("cannot write {}", manifest_path.display()))?;
        Ok(csv_path)
    }
}

fn rsf_core_version() -> &'static str {
    // Workspace crates are version-locked together.
    env!("CARGO_PKG_VERSION")
}

/// Reads a CSV written by [`Report::write`] back as (header, rows).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .context("empty CSV")?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect();
    Ok((header, rows))
}
