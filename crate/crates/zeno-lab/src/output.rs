//! Deterministic emission of data series: CSV/JSON writers with fixed
//! formatting and iteration order, plus the run manifest.
//!
//! Data files contain no timestamps or machine-dependent fields; identical
//! configs produce byte-identical output. The manifest carries run metadata
//! (config echo, truncation, convergence, version, timestamp) separately.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{RateSeries, SweepResult, TransitionAnalysis};
use crate::config::{ExperimentConfig, OutputFormat};
use crate::dynamics::SurvivalSeries;
use crate::error::Result;

/// Full-precision scientific notation (17 significant digits) so downstream
/// regression tests can diff files exactly.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{:.16e}", x)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

/// Survival series with per-interval rates: columns (n, t, P, lambda_n, w_n).
/// Row count is N + 1; the final row has no following interval and leaves the
/// rate fields empty.
pub fn write_survival(
    dir: &Path,
    name: &str,
    series: &SurvivalSeries,
    rates: &RateSeries,
    format: OutputFormat,
) -> Result<PathBuf> {
    match format {
        OutputFormat::Csv => {
            let mut text = String::from("n,t,P,lambda_n,w_n\n");
            for (n, (&t, &p)) in series.times.iter().zip(&series.probs).enumerate() {
                let (l, w) = match rates.lambdas.get(n) {
                    Some(&l) => (fmt_float(l), fmt_float(rates.scaled[n])),
                    None => (String::new(), String::new()),
                };
                text.push_str(&format!("{n},{},{},{l},{w}\n", fmt_float(t), fmt_float(p)));
            }
            let path = dir.join(format!("{name}.csv"));
            write_text(&path, &text)?;
            Ok(path)
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                t: f64,
                p: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                lambda_n: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                w_n: Option<f64>,
            }
            let rows: Vec<Row> = series
                .times
                .iter()
                .zip(&series.probs)
                .enumerate()
                .map(|(n, (&t, &p))| Row {
                    n,
                    t,
                    p,
                    lambda_n: rates.lambdas.get(n).copied(),
                    w_n: rates.scaled.get(n).copied(),
                })
                .collect();
            let path = dir.join(format!("{name}.json"));
            write_json(&path, &rows)?;
            Ok(path)
        }
    }
}

/// Sweep matrix as rows (tau, N, Lambda), N-major then τ ascending.
pub fn write_sweep(
    dir: &Path,
    name: &str,
    sweep: &SweepResult,
    format: OutputFormat,
) -> Result<PathBuf> {
    match format {
        OutputFormat::Csv => {
            let mut text = String::from("tau,N,Lambda\n");
            for (i, &n) in sweep.n_list.iter().enumerate() {
                for (j, &tau) in sweep.taus.iter().enumerate() {
                    text.push_str(&format!(
                        "{},{n},{}\n",
                        fmt_float(tau),
                        fmt_float(sweep.lambda[i][j])
                    ));
                }
            }
            let path = dir.join(format!("{name}.csv"));
            write_text(&path, &text)?;
            Ok(path)
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Cell {
                tau: f64,
                n: usize,
                lambda: f64,
            }
            let mut rows = Vec::new();
            for (i, &n) in sweep.n_list.iter().enumerate() {
                for (j, &tau) in sweep.taus.iter().enumerate() {
                    rows.push(Cell {
                        tau,
                        n,
                        lambda: sweep.lambda[i][j],
                    });
                }
            }
            let path = dir.join(format!("{name}.json"));
            write_json(&path, &rows)?;
            Ok(path)
        }
    }
}

/// Per-N transition lists as JSON.
pub fn write_transitions(
    dir: &Path,
    name: &str,
    transitions: &[TransitionAnalysis],
) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.json"));
    write_json(&path, &transitions)?;
    Ok(path)
}

/// A generic numeric table: header + rows, CSV or JSON record list.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path, name: &str, format: OutputFormat) -> Result<PathBuf> {
        match format {
            OutputFormat::Csv => {
                let mut text = self.columns.join(",");
                text.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
                let path = dir.join(format!("{name}.csv"));
                write_text(&path, &text)?;
                Ok(path)
            }
            OutputFormat::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, &v)| {
                                let num = serde_json::Number::from_f64(v)
                                    .unwrap_or_else(|| serde_json::Number::from(0));
                                (
                                    c.to_string(),
                                    if v.is_nan() {
                                        serde_json::Value::Null
                                    } else {
                                        serde_json::Value::Number(num)
                                    },
                                )
                            })
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                let path = dir.join(format!("{name}.json"));
                write_json(&path, &rows)?;
                Ok(path)
            }
        }
    }
}

/// Run metadata: the one output that may carry a timestamp.
#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub outputs: Vec<String>,
    /// Truncation each run finished with, keyed by output stem.
    pub n_max_used: serde_json::Map<String, serde_json::Value>,
    pub converged: bool,
    pub issues: Vec<String>,
    pub version: &'static str,
    pub generated_at: String,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, config: &'a ExperimentConfig) -> Self {
        Self {
            command,
            config,
            outputs: Vec::new(),
            n_max_used: serde_json::Map::new(),
            converged: true,
            issues: Vec::new(),
            version: env!("CARGO_PKG_VERSION"),
            generated_at: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(
            path.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
        );
    }

    pub fn record_n_max(&mut self, stem: &str, n_max: usize) {
        self.n_max_used
            .insert(stem.to_string(), serde_json::Value::from(n_max));
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}
