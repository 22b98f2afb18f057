//! Experiment configuration, canonical JSON reports, CSV tables and the
//! content-addressed report cache.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::input::{read_text, InputError};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CACHE_ENV: &str = "HFL_CACHE_DIR";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report value at `{0}` is not a finite number")]
    NonFinite(String),
    #[error("unknown table `{name}` (available: {available})")]
    UnknownTable { name: String, available: String },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// An input file with the hash of its contents at load time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRef {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Subcommand path, e.g. `flow run`.
    pub kind: String,
    pub inputs: BTreeMap<String, InputRef>,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ExperimentConfig {
    pub fn new(kind: impl Into<String>, seed: u64) -> Self {
        ExperimentConfig {
            kind: kind.into(),
            inputs: BTreeMap::new(),
            params: BTreeMap::new(),
            seed,
            jobs: None,
            out: None,
        }
    }

    /// Records `path` and hashes its contents; returns the text.
    pub fn add_input(&mut self, name: &str, path: &Path) -> Result<String, InputError> {
        let text = read_text(path)?;
        self.inputs.insert(
            name.to_string(),
            InputRef {
                path: path.to_path_buf(),
                sha256: sha256_hex(text.as_bytes()),
            },
        );
        Ok(text)
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.params.insert(name.to_string(), v);
        self
    }

    /// Hash of everything that determines the results: kind, input
    /// contents, parameters and seed. `jobs` and `out` are left out.
    pub fn cache_key(&self) -> String {
        let inputs: BTreeMap<&String, &String> =
            self.inputs.iter().map(|(k, v)| (k, &v.sha256)).collect();
        let canonical = serde_json::json!({
            "version": ARTIFACT_VERSION,
            "kind": self.kind,
            "inputs": inputs,
            "params": self.params,
            "seed": self.seed,
        });
        sha256_hex(canonical.to_string().as_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

/// A named outcome together with the truncation parameters it depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub outcome: String,
    pub params: BTreeMap<String, Value>,
}

impl Verdict {
    pub fn new(name: &str, outcome: impl Into<String>) -> Self {
        Verdict {
            name: name.to_string(),
            outcome: outcome.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub results: Value,
    pub verdicts: Vec<Verdict>,
    pub tables: BTreeMap<String, Table>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig) -> Self {
        RunReport {
            tool: "hfl".into(),
            version: ARTIFACT_VERSION.into(),
            config,
            results: Value::Object(Default::default()),
            verdicts: Vec::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) -> Result<&mut Self, ReportError> {
        let v = serde_json::to_value(value)?;
        self.results
            .as_object_mut()
            .expect("results is an object")
            .insert(key.to_string(), v);
        Ok(self)
    }

    pub fn verdict(&mut self, v: Verdict) -> &mut Self {
        self.verdicts.push(v);
        self
    }

    pub fn table(&mut self, name: &str, table: Table) -> &mut Self {
        self.tables.insert(name.to_string(), table);
        self
    }

    /// Canonical pretty JSON. Objects are key-sorted; `serde_json` writes
    /// non-finite floats as `null`, and reports never contain `null`
    /// otherwise, so any `null` is rejected as a non-finite number.
    pub fn to_json(&self) -> Result<String, ReportError> {
        let value = serde_json::to_value(self)?;
        if let Some(path) = find_null(&value, String::new()) {
            return Err(ReportError::NonFinite(path));
        }
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }
}

fn find_null(v: &Value, path: String) -> Option<String> {
    match v {
        Value::Null => Some(if path.is_empty() { ".".into() } else { path }),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, x)| find_null(x, format!("{path}[{i}]"))),
        Value::Object(map) => map.iter().find_map(|(k, x)| {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            find_null(x, p)
        }),
        _ => None,
    }
}

/// 17 significant digits; integral values of moderate size print as
/// integers.
pub fn format_number(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.16e}")
    }
}

/// RFC 4180 CSV of one report table, header row first.
pub fn emit_csv(report: &RunReport, name: &str) -> Result<String, ReportError> {
    let table = report.tables.get(name).ok_or_else(|| ReportError::UnknownTable {
        name: name.to_string(),
        available: report.tables.keys().cloned().collect::<Vec<_>>().join(", "),
    })?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        let fields: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(x) => format_number(*x),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        w.write_record(&fields)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Io {
        path: PathBuf::from("<csv>"),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// Writes `contents` to `path` through a temporary sibling and a rename,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ReportError> {
    let io = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Append-only store of canonical reports keyed by [`ExperimentConfig::cache_key`].
#[derive(Clone, Debug)]
pub struct ReportCache {
    dir: PathBuf,
}

impl ReportCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReportCache { dir: dir.into() }
    }

    /// The cache named by `HFL_CACHE_DIR`, if set and non-empty.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(ReportCache::new)
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<String> {
        fs::read_to_string(self.path(key)).ok()
    }

    /// Stores `json` unless an entry already exists.
    pub fn store(&self, key: &str, json: &str) -> Result<(), ReportError> {
        let path = self.path(key);
        if path.exists() {
            return Ok(());
        }
        write_atomic(&path, json.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut cfg = ExperimentConfig::new("energy nstep", 7);
        cfg.param("n", 3).param("tol", 1e-8);
        let mut r = RunReport::new(cfg);
        r.result("energy", 0.1 + 0.2).unwrap();
        let mut t = Table::new(&["n", "ratio", "label"]);
        t.push(vec![1.into(), 0.5.into(), "a, b".into()]);
        t.push(vec![2.into(), (1.0 / 3.0).into(), "\"q\"".into()]);
        r.table("growth", t);
        r.verdict(Verdict::new("harmonic", "pass").with("R", 4));
        r
    }

    #[test]
    fn config_round_trips() {
        let cfg = sample().config;
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.cache_key(), cfg.cache_key());
    }

    #[test]
    fn cache_key_ignores_jobs_and_out() {
        let a = sample().config;
        let mut b = a.clone();
        b.jobs = Some(3);
        b.out = Some("x".into());
        assert_eq!(a.cache_key(), b.cache_key());
        let mut c = a.clone();
        c.seed = 8;
        assert_ne!(a.cache_key(), c.cache_key());
    }

    #[test]
    fn report_json_is_stable_and_round_trips() {
        let a = sample().to_json().unwrap();
        assert_eq!(a, sample().to_json().unwrap());
        let back: RunReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn non_finite_is_rejected() {
        let mut r = sample();
        r.result("bad", vec![1.0, f64::NAN]).unwrap();
        match r.to_json() {
            Err(ReportError::NonFinite(p)) => assert_eq!(p, "results.bad[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_schema_and_precision() {
        let csv = emit_csv(&sample(), "growth").unwrap();
        let lines: Vec<&str> = csv.split("\r\n").collect();
        assert_eq!(lines[0], "n,ratio,label");
        assert_eq!(lines[1], "1,5.0000000000000000e-1,\"a, b\"");
        assert_eq!(lines[2], "2,3.3333333333333331e-1,\"\"\"q\"\"\"");
        let third: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(third, 1.0 / 3.0);
        assert!(matches!(emit_csv(&sample(), "nope"), Err(ReportError::UnknownTable { .. })));
    }

    #[test]
    fn cache_is_append_only() {
        let dir = std::env::temp_dir().join(format!("hfl-cache-test-{}", std::process::id()));
        let cache = ReportCache::new(&dir);
        cache.store("k", "first").unwrap();
        cache.store("k", "second").unwrap();
        assert_eq!(cache.load("k").as_deref(), Some("first"));
        assert_eq!(cache.load("missing"), None);
        fs::remove_dir_all(dir).unwrap();
    }
}
