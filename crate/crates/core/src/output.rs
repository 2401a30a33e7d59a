//! CSV and JSON writers.
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! reader never sees a half-written table. Floats use Rust's shortest
//! round-trip formatting, which makes reruns byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Origin of an output file: the fully resolved configuration and master seed.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(config: &impl Serialize, seed: u64) -> Self {
        Self {
            tool: "holomimo".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }

    /// The single `#` comment line heading every CSV file.
    pub fn header_line(&self) -> String {
        format!("# {} {} seed={} config={}", self.tool, self.version, self.seed, self.config)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Minimal RFC 4180 table builder.
#[derive(Debug, Clone)]
pub struct CsvTable {
    buf: String,
    width: usize,
}

impl CsvTable {
    pub fn new(provenance: &Provenance, columns: &[&str]) -> Self {
        let mut buf = provenance.header_line();
        buf.push_str("\r\n");
        let mut t = Self { buf, width: columns.len() };
        t.push_row(columns.iter().map(|c| c.to_string()));
        t
    }

    pub fn push_row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().map(|f| quote(&f)).collect();
        assert_eq!(fields.len(), self.width, "row width must match the header");
        let _ = write!(self.buf, "{}\r\n", fields.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.buf.as_bytes())
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = PathBuf::from(path);
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
