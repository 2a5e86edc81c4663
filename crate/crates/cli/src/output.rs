//! Result files: JSON lines, summary CSV and the resolved configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use msalab::msa::McEstimate;
use msalab::report::fmt17;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One row of `<kind>.summary.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub event: String,
    pub side: u32,
    pub n: usize,
    pub d: usize,
    pub g: f64,
    pub m: Option<f64>,
    pub estimate: McEstimate,
    pub seed: u64,
}

pub const SUMMARY_COLUMNS: [&str; 13] = [
    "event", "L", "N", "d", "g", "m", "trials", "hits", "p_hat", "ci_lo", "ci_hi", "grid_meta",
    "seed",
];

impl SummaryRow {
    fn fields(&self) -> Vec<String> {
        let e = &self.estimate;
        vec![
            self.event.clone(),
            self.side.to_string(),
            self.n.to_string(),
            self.d.to_string(),
            fmt17(self.g),
            self.m.map(fmt17).unwrap_or_default(),
            e.trials.to_string(),
            e.hits.to_string(),
            fmt17(e.p_hat),
            fmt17(e.ci95.0),
            fmt17(e.ci95.1),
            e.grid_meta.clone(),
            self.seed.to_string(),
        ]
    }
}

/// Everything one experiment produces.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub records: Vec<Value>,
    pub summary: Vec<SummaryRow>,
    /// Extra CSV tables as `(file name, header, rows)`.
    pub tables: Vec<(String, Vec<String>, Vec<Vec<String>>)>,
    /// Plain-text side files as `(file name, body)`.
    pub files: Vec<(String, String)>,
    /// Set when the experiment ran but its check failed.
    pub failure: Option<String>,
}

impl Artifacts {
    pub fn record<T: Serialize>(&mut self, kind: &str, body: &T) {
        let mut v = serde_json::to_value(body).expect("record serializes");
        match v {
            Value::Object(ref mut map) => {
                map.insert("record".into(), json!(kind));
            }
            other => v = json!({ "record": kind, "value": other }),
        }
        self.records.push(v);
    }
}

pub struct Writer {
    dir: PathBuf,
    stem: String,
    hash: String,
}

impl Writer {
    pub fn new(dir: &Path, config: &ExperimentConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            stem: config.kind().name().to_string(),
            hash: config.hash(),
        })
    }

    pub fn comment(&self) -> String {
        format!("# msalab {} config_sha256={}\n", VERSION, self.hash)
    }

    fn write(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(body.as_bytes())?;
        Ok(path)
    }

    pub fn write_all(&self, config: &ExperimentConfig, a: &Artifacts) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        let resolved = format!("{}{}", self.comment(), config.to_toml());
        written.push(self.write("resolved_config.toml", &resolved)?);

        let mut lines = String::new();
        let header = json!({
            "record": "header",
            "tool": "msalab",
            "version": VERSION,
            "config_sha256": self.hash,
            "kind": self.stem,
        });
        for v in std::iter::once(&header).chain(&a.records) {
            lines.push_str(&serde_json::to_string(v).expect("json"));
            lines.push('\n');
        }
        written.push(self.write(&format!("{}.jsonl", self.stem), &lines)?);

        if !a.summary.is_empty() {
            let rows: Vec<Vec<String>> = a.summary.iter().map(SummaryRow::fields).collect();
            let header: Vec<String> = SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect();
            let body = self.csv(&header, &rows)?;
            written.push(self.write(&format!("{}.summary.csv", self.stem), &body)?);
        }
        for (name, header, rows) in &a.tables {
            let body = self.csv(header, rows)?;
            written.push(self.write(name, &body)?);
        }
        for (name, body) in &a.files {
            written.push(self.write(name, &format!("{}{}", self.comment(), body))?);
        }
        Ok(written)
    }

    fn csv(&self, header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(self.comment().into_bytes());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }
}
