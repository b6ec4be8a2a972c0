//! Output plumbing: run manifests, CSV tables and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "isrs-egn";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Inputs that identify a run. The hash covers everything except the timestamp.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: String,
    pub method: String,
    pub config: Value,
    pub parameters: Value,
    pub timestamp: String,
    pub hash: String,
}

impl Manifest {
    pub fn new(command: &str, method: &str, config: Value, parameters: Value) -> Self {
        let identity = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": command,
            "method": method,
            "config": config,
            "parameters": parameters,
        });
        let digest = Sha256::digest(identity.to_string().as_bytes());
        let hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        let timestamp = time::OffsetDateTime::now_utc()
            .format(&time::format_description::well_known::Rfc3339)
            .unwrap_or_default();
        Self {
            command: command.into(),
            method: method.into(),
            config,
            parameters,
            timestamp,
            hash,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "method": self.method,
            "timestamp": self.timestamp,
            "manifest_sha256": self.hash,
            "parameters": self.parameters,
            "config": self.config,
        })
    }
}

/// A CSV table with `#` comment lines ahead of the header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(manifest: &Manifest, columns: &[&'static str]) -> Self {
        Self {
            comments: vec![
                format!("{TOOL} {VERSION} {}", manifest.command),
                format!("manifest_sha256={}", manifest.hash),
                format!("timestamp={}", manifest.timestamp),
            ],
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as JSON objects; empty cells become `null`, numeric cells numbers.
    pub fn to_json_rows(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), cell_value(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

fn cell_value(v: &str) -> Value {
    if v.is_empty() {
        return Value::Null;
    }
    if let Ok(i) = v.parse::<i64>() {
        return json!(i);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => json!(x),
        _ => json!(v),
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes `contents` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path
        .file_name()
        .with_context(|| format!("{} is not a file path", path.display()))?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Where a command's primary output goes.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn new(out: Option<&Path>) -> Self {
        match out {
            Some(p) => Sink::File(p.to_path_buf()),
            None => Sink::Stdout,
        }
    }

    /// Writes the primary output plus optional sidecars (`(suffix, body)`);
    /// sidecars are skipped on stdout. Nothing is renamed into place until
    /// every body has been rendered.
    pub fn emit(&self, body: &str, sidecars: &[(&str, String)]) -> Result<()> {
        match self {
            Sink::Stdout => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes())?;
                stdout.flush()?;
            }
            Sink::File(path) => {
                for (suffix, text) in sidecars {
                    write_atomic(&sibling(path, suffix), text)?;
                }
                write_atomic(path, body)?;
            }
        }
        Ok(())
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> Manifest {
        Manifest::new("evaluate", "segment", json!({"a": 1}), json!({"coi": "all"}))
    }

    #[test]
    fn hash_ignores_timestamp() {
        let a = manifest();
        let mut b = manifest();
        b.timestamp = "2000-01-01T00:00:00Z".into();
        assert_eq!(a.hash, Manifest::new("evaluate", "segment", json!({"a": 1}), json!({"coi": "all"})).hash);
        assert_eq!(a.hash.len(), 64);
        assert_ne!(a.hash, Manifest::new("evaluate", "integral", json!({"a": 1}), json!({"coi": "all"})).hash);
        assert_eq!(b.hash, a.hash);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&manifest(), &["x", "y"]);
        t.push(vec!["1".into(), "".into()]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[1].starts_with("# manifest_sha256="));
        assert_eq!(lines[3], "x,y");
        assert_eq!(lines[4], "1,");
        assert_eq!(t.to_json_rows(), json!([{"x": 1, "y": null}]));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("out.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        let names: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn number_format_round_trips() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1e-30).parse::<f64>().unwrap(), 1e-30);
        assert_eq!(opt_num(None), "");
    }
}
