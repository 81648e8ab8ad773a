//! Experiment reports and their CSV / JSON serialization.
//!
//! A report written as CSV becomes a directory of files sharing the experiment id
//! as prefix: `<id>_meta.csv` (configuration and scalar metrics),
//! `<id>_table_N<d>.csv` per convergence table and `<id>_<name>.csv` per data set.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown output format '{other}' (expected csv, json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub elements: usize,
    pub error: f64,
    /// `log2(e_{K/2} / e_K)`; absent on the coarsest row.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Builds a table from `(K, error)` pairs of a doubling chain.
    pub fn from_errors(degree: usize, errors: &[(usize, f64)]) -> Self {
        let rows = errors
            .iter()
            .enumerate()
            .map(|(i, &(elements, error))| {
                let rate = (i > 0 && elements == 2 * errors[i - 1].0)
                    .then(|| (errors[i - 1].1 / error).log2());
                ConvergenceRow { elements, error, rate }
            })
            .collect();
        Self { degree, rows }
    }

    pub fn finest_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }

    pub fn error_at(&self, elements: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.elements == elements).map(|r| r.error)
    }
}

/// A named table of columns, used for profiles `(x, var1, …)` and time series `(t, …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataSet {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub tables: Vec<ConvergenceTable>,
    pub datasets: Vec<DataSet>,
    pub metrics: BTreeMap<String, f64>,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self { experiment: experiment.into(), ..Self::default() }
    }

    pub fn with_config(mut self, key: &str, value: impl ToString) -> Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set_config(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn set_metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn dataset(&self, name: &str) -> Option<&DataSet> {
        self.datasets.iter().find(|d| d.name == name)
    }

    pub fn table(&self, degree: usize) -> Option<&ConvergenceTable> {
        self.tables.iter().find(|t| t.degree == degree)
    }

    /// Checks that every recorded number is finite.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |what: String| Err(ExperimentError::NonFinite(what));
        for (k, v) in &self.metrics {
            if !v.is_finite() {
                return bad(format!("metric {k}"));
            }
        }
        for t in &self.tables {
            for r in &t.rows {
                if !r.error.is_finite() || r.rate.is_some_and(|x| !x.is_finite()) {
                    return bad(format!("table N={} K={}", t.degree, r.elements));
                }
            }
        }
        for d in &self.datasets {
            if d.rows.iter().flatten().any(|v| !v.is_finite()) {
                return bad(format!("data set {}", d.name));
            }
        }
        if !self.wall_clock_seconds.is_finite() {
            return bad("wall clock".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ExperimentError> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, ExperimentError> {
        Ok(serde_json::from_str(s)?)
    }

    /// Writes the report into `dir` and returns the created files.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, ExperimentError> {
        self.validate()?;
        fs::create_dir_all(dir)?;
        match format {
            OutputFormat::Json => {
                let path = dir.join(format!("{}.json", self.experiment));
                fs::write(&path, self.to_json()?)?;
                Ok(vec![path])
            }
            OutputFormat::Csv => self.write_csv(dir),
        }
    }

    fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        let mut files = Vec::new();
        let id = &self.experiment;

        let path = dir.join(format!("{id}_meta.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["kind", "key", "value"])?;
        w.write_record(["experiment", "id", id.as_str()])?;
        w.write_record(["wall_clock", "seconds", &fmt_f64(self.wall_clock_seconds)])?;
        for (k, v) in &self.config {
            w.write_record(["config", k.as_str(), v.as_str()])?;
        }
        for (k, v) in &self.metrics {
            w.write_record(["metric", k.as_str(), &fmt_f64(*v)])?;
        }
        for t in &self.tables {
            w.write_record(["table", "degree", &t.degree.to_string()])?;
        }
        for d in &self.datasets {
            w.write_record(["dataset", "name", d.name.as_str()])?;
        }
        w.flush()?;
        files.push(path);

        for t in &self.tables {
            let path = dir.join(format!("{id}_table_N{}.csv", t.degree));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["K", "error", "rate"])?;
            for r in &t.rows {
                let rate = r.rate.map(fmt_f64).unwrap_or_default();
                w.write_record([r.elements.to_string(), fmt_f64(r.error), rate])?;
            }
            w.flush()?;
            files.push(path);
        }
        for d in &self.datasets {
            let path = dir.join(format!("{id}_{}.csv", d.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&d.columns)?;
            for row in &d.rows {
                w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
            }
            w.flush()?;
            files.push(path);
        }
        Ok(files)
    }

    /// Reads a report back from the files written by [`ExperimentReport::write`].
    pub fn read(dir: &Path, experiment: &str, format: OutputFormat) -> Result<Self, ExperimentError> {
        match format {
            OutputFormat::Json => Self::from_json(&fs::read_to_string(dir.join(format!("{experiment}.json")))?),
            OutputFormat::Csv => Self::read_csv(dir, experiment),
        }
    }

    fn read_csv(dir: &Path, id: &str) -> Result<Self, ExperimentError> {
        let mut report = Self::new(id);
        let mut degrees = Vec::new();
        let mut names = Vec::new();
        let mut r = csv::Reader::from_path(dir.join(format!("{id}_meta.csv")))?;
        for rec in r.records() {
            let rec = rec?;
            let (kind, key, value) = (&rec[0], &rec[1], &rec[2]);
            match kind {
                "experiment" => report.experiment = value.to_string(),
                "wall_clock" => report.wall_clock_seconds = parse_f64(value)?,
                "config" => {
                    report.config.insert(key.to_string(), value.to_string());
                }
                "metric" => {
                    report.metrics.insert(key.to_string(), parse_f64(value)?);
                }
                "table" => degrees.push(value.parse::<usize>().map_err(|e| ExperimentError::Parse(e.to_string()))?),
                "dataset" => names.push(value.to_string()),
                other => return Err(ExperimentError::Parse(format!("unknown meta record '{other}'"))),
            }
        }
        for degree in degrees {
            let mut r = csv::Reader::from_path(dir.join(format!("{id}_table_N{degree}.csv")))?;
            let mut rows = Vec::new();
            for rec in r.records() {
                let rec = rec?;
                let elements = rec[0].parse().map_err(|e: std::num::ParseIntError| ExperimentError::Parse(e.to_string()))?;
                let rate = if rec[2].is_empty() { None } else { Some(parse_f64(&rec[2])?) };
                rows.push(ConvergenceRow { elements, error: parse_f64(&rec[1])?, rate });
            }
            report.tables.push(ConvergenceTable { degree, rows });
        }
        for name in names {
            let mut r = csv::Reader::from_path(dir.join(format!("{id}_{name}.csv")))?;
            let columns = r.headers()?.iter().map(String::from).collect();
            let mut rows = Vec::new();
            for rec in r.records() {
                rows.push(rec?.iter().map(parse_f64).collect::<Result<Vec<_>, _>>()?);
            }
            report.datasets.push(DataSet { name, columns, rows });
        }
        Ok(report)
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Result<f64, ExperimentError> {
    s.trim().parse().map_err(|e: std::num::ParseFloatError| ExperimentError::Parse(format!("'{s}': {e}")))
}
