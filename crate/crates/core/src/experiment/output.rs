//! Result files: 17-significant-digit JSON and CSV, content hashing and verification.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::ExperimentConfig;
use crate::error::{CqecError, Result};

pub const SCHEMA_VERSION: &str = "cqec-result/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub index: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Only present when explicitly requested; it breaks byte-identical re-runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Provenance {
    pub fn current() -> Self {
        Self { tool: "cqec".into(), version: env!("CARGO_PKG_VERSION").into(), wall_time_s: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: String,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Map<String, Value>>,
    pub failures: Vec<RowFailure>,
    pub metadata: Map<String, Value>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_hash: Option<String>,
}

impl ExperimentResult {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Sets `content_hash` from the canonical form of everything else.
    pub fn seal(&mut self) -> Result<()> {
        self.content_hash = None;
        let body = canonical_json(&serde_json::to_value(&*self)?)?;
        self.content_hash = Some(content_hash(&body));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Vec<&Value> {
        self.rows.iter().map(|r| r.get(name).unwrap_or(&Value::Null)).collect()
    }

    pub fn column_f64(&self, name: &str) -> Vec<Option<f64>> {
        self.column(name).into_iter().map(Value::as_f64).collect()
    }
}

/// Every float as `d.ddddddddddddddddde±x`: 17 significant digits, exact round trip.
pub fn fmt_number(x: f64) -> String {
    format!("{x:.16e}")
}

struct Sig17(PrettyFormatter<'static>);

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_number(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-digit floats and a trailing newline.
pub fn canonical_json(v: &Value) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    v.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn content_hash(text: &str) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(text.as_bytes())))
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => fmt_number(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flat table: header row of `columns`, then one record per row.
pub fn to_csv(columns: &[String], rows: &[Map<String, Value>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CqecError::Io(io::Error::other(e));
    w.write_record(columns).map_err(csv_err)?;
    for row in rows {
        w.write_record(columns.iter().map(|c| csv_cell(row.get(c).unwrap_or(&Value::Null)))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CqecError::Io(io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 cells"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Structured,
    Table,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = CqecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured" => Ok(Self::Structured),
            "table" => Ok(Self::Table),
            "both" => Ok(Self::Both),
            _ => Err(CqecError::Config(format!("unknown format '{s}'"))),
        }
    }
}

/// Seals `result` and writes `<out>.json` and/or `<out>.csv`; returns the paths written.
pub fn write_outputs(result: &mut ExperimentResult, out: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    result.seal()?;
    let mut written = Vec::new();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    if matches!(format, OutputFormat::Structured | OutputFormat::Both) {
        let p = out.with_extension("json");
        std::fs::write(&p, canonical_json(&serde_json::to_value(&*result)?)?)?;
        written.push(p);
    }
    if matches!(format, OutputFormat::Table | OutputFormat::Both) {
        let p = out.with_extension("csv");
        std::fs::write(&p, to_csv(&result.columns, &result.rows)?)?;
        written.push(p);
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub stored_hash: String,
    pub computed_hash: String,
    /// `Some(matches)` when a sibling CSV was found.
    pub csv_matches: Option<bool>,
    pub result: ExperimentResult,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.stored_hash == self.computed_hash && self.csv_matches != Some(false)
    }
}

/// Re-hashes a JSON result file and compares its sibling CSV against the rows.
pub fn verify_file(path: &Path) -> Result<VerifyReport> {
    let text = std::fs::read_to_string(path)?;
    let mut v: Value = serde_json::from_str(&text)?;
    let stored = v
        .as_object_mut()
        .and_then(|o| o.shift_remove("content_hash"))
        .and_then(|h| h.as_str().map(str::to_owned))
        .ok_or_else(|| CqecError::Config(format!("{} has no content_hash", path.display())))?;
    let schema = v.get("schema_version").and_then(Value::as_str).unwrap_or_default();
    if schema != SCHEMA_VERSION {
        return Err(CqecError::Config(format!("unsupported schema '{schema}'")));
    }
    let computed = content_hash(&canonical_json(&v)?);
    let result: ExperimentResult = serde_json::from_value(v)?;
    let csv_path = path.with_extension("csv");
    let csv_matches = if csv_path.exists() && csv_path != path {
        Some(std::fs::read_to_string(&csv_path)? == to_csv(&result.columns, &result.rows)?)
    } else {
        None
    };
    Ok(VerifyReport { stored_hash: stored, computed_hash: computed, csv_matches, result })
}
