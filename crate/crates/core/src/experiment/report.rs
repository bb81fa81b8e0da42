use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Name of the column appended to every CSV written by a run.
pub const HASH_COLUMN: &str = "config_hash";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A named table written as `<name>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Num(x) => Some(*x),
                Cell::Int(n) => Some(*n as f64),
                _ => None,
            })
            .collect()
    }

    /// CSV text with a trailing hash column; `.` decimals, shortest
    /// round-trip float formatting, newline-terminated.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        writeln!(out, ",{HASH_COLUMN}").unwrap();
        for row in &self.rows {
            for cell in row {
                write!(out, "{cell},").unwrap();
            }
            writeln!(out, "{config_hash}").unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunMetadata {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

/// Output of one experiment: tables, extra text files and a short summary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub metadata: RunMetadata,
    pub tables: Vec<Table>,
    /// Additional files (name, contents), such as count records.
    pub attachments: Vec<(String, String)>,
    pub summary: Vec<String>,
}

impl RunReport {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        Self {
            metadata: RunMetadata {
                experiment: experiment.to_string(),
                config_hash,
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            tables: Vec::new(),
            attachments: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn metadata_text(&self) -> String {
        let m = &self.metadata;
        format!(
            "experiment = \"{}\"\nconfig_hash = \"{}\"\nseed = {}\nversion = \"{}\"\n",
            m.experiment, m.config_hash, m.seed, m.version
        )
    }

    /// Write every table as CSV plus `<experiment>_run.toml` with the run
    /// metadata; returns the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, t.to_csv(&self.metadata.config_hash))?;
            written.push(path);
        }
        for (name, text) in &self.attachments {
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            written.push(path);
        }
        let path = dir.join(format!("{}_run.toml", self.metadata.experiment));
        std::fs::write(&path, self.metadata_text())?;
        written.push(path);
        Ok(written)
    }
}

/// Check that every CSV in `dir` carries one and the same config hash in its
/// last column. Returns the hash, or `None` when there are no CSV files.
pub fn audit_run_dir(dir: &Path) -> Result<Option<String>> {
    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
    {
        let text = std::fs::read_to_string(&path)?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header.rsplit(',').next() != Some(HASH_COLUMN) {
            return Err(Error::invalid(format!(
                "{} has no {HASH_COLUMN} column",
                path.display()
            )));
        }
        for line in lines {
            let hash = line.rsplit(',').next().unwrap_or_default().to_string();
            seen.entry(hash).or_insert_with(|| path.clone());
        }
    }
    match seen.len() {
        0 => Ok(None),
        1 => Ok(seen.into_keys().next()),
        _ => Err(Error::invalid(format!(
            "mixed config hashes in {}: {}",
            dir.display(),
            seen.iter()
                .map(|(h, p)| format!("{h} ({})", p.display()))
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", &["angle_deg", "value", "flag", "label"]);
        t.push(vec![0.0.into(), 0.1.into(), true.into(), "+".into()]);
        t.push(vec![5.0.into(), 1e-20.into(), false.into(), "aH+bV".into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv("abc");
        assert_eq!(
            csv,
            "angle_deg,value,flag,label,config_hash\n0,0.1,true,+,abc\n5,0.00000000000000000001,false,aH+bV,abc\n"
        );
    }

    #[test]
    fn floats_round_trip() {
        let x = 0.1 + 0.2;
        let mut t = Table::new("t", &["x"]);
        t.push(vec![x.into()]);
        let csv = t.to_csv("h");
        let field = csv.lines().nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn audit_detects_mixed_hashes() {
        let dir = std::env::temp_dir().join(format!("polmem-audit-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let mut report = RunReport::new("demo", "aaaa".into(), 1);
        report.tables.push(sample());
        report.write_to(&dir).unwrap();
        assert_eq!(audit_run_dir(&dir).unwrap().as_deref(), Some("aaaa"));
        std::fs::write(dir.join("other.csv"), sample().to_csv("bbbb")).unwrap();
        let err = audit_run_dir(&dir).unwrap_err().to_string();
        assert!(err.contains("aaaa") && err.contains("bbbb"), "{err}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn column_lookup() {
        let t = sample();
        assert_eq!(t.column("angle_deg").unwrap(), vec![0.0, 5.0]);
        assert!(t.column("label").is_none());
        assert!(t.column("missing").is_none());
    }
}
