//! Result tables, their CSV/JSON encodings, and golden snapshots.
//!
//! Numbers are written with 12 significant digits (`{:.11e}`) in both
//! formats and lines end in `\n`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::{GroupGeometry, ParameterGrid};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn render_csv(&self) -> String {
        match self {
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            other => other.render(),
        }
    }

    fn render_json(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format_num(*x),
            Cell::Num(x) => serde_json::to_string(&format_num(*x)).expect("string serialises"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serialises"),
        }
    }

    fn parse(s: &str) -> Cell {
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        if let Ok(x) = s.parse::<f64>() {
            return Cell::Num(x);
        }
        match s {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => Cell::Text(s.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// 12 significant digits.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub schema_version: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            schema_version: SCHEMA_VERSION.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from the header in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose `pass` column is `false`.
    pub fn failing_rows(&self) -> Vec<&[Cell]> {
        match self.column("pass") {
            Some(i) => self.rows.iter().filter(|r| r[i] == Cell::Bool(false)).map(|r| r.as_slice()).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render_csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let q = |s: &str| serde_json::to_string(s).expect("string serialises");
        let _ = write!(out, "{{\n  \"schema_version\": {},\n  \"name\": {},\n  \"columns\": [", q(&self.schema_version), q(&self.name));
        let cols: Vec<String> = self.columns.iter().map(|c| q(c)).collect();
        out.push_str(&cols.join(", "));
        out.push_str("],\n  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
            let cells: Vec<String> = row.iter().map(Cell::render_json).collect();
            out.push_str(&cells.join(", "));
            out.push(']');
        }
        out.push_str(if self.rows.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        out
    }

    pub fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Parses the output of [`ResultTable::to_csv`].
    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.split_terminator('\n');
        let header = lines.next().ok_or_else(|| Error::Config("empty CSV".into()))?;
        let columns: Vec<String> = split_csv_line(header)?;
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let cells: Vec<Cell> = split_csv_line(line)?.iter().map(|s| Cell::parse(s)).collect();
            if cells.len() != columns.len() {
                return Err(Error::Config(format!("CSV row {} has {} cells, header has {}", n + 1, cells.len(), columns.len())));
            }
            rows.push(cells);
        }
        Ok(Self { name: name.into(), schema_version: SCHEMA_VERSION.into(), columns, rows })
    }

    pub fn write(&self, dir: &Path, fmt: Format) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.{}", self.name, fmt.extension()));
        std::fs::write(&path, self.render(fmt))?;
        Ok(path)
    }
}

fn split_csv_line(line: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(std::mem::take(&mut cur)),
            (c, _) => cur.push(c),
        }
    }
    if quoted {
        return Err(Error::Config(format!("unterminated quote in CSV line {line:?}")));
    }
    out.push(cur);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenSnapshot {
    pub name: String,
    pub grid_hash: String,
    pub values: BTreeMap<String, GoldenEntry>,
}

impl GoldenSnapshot {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad golden file {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Measured value with the tolerance it should be blessed with.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub key: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Measured {
    pub fn new(key: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { key: key.into(), value, tolerance }
    }
}

pub fn snapshot_from(name: &str, grid_hash: &str, measured: &[Measured]) -> GoldenSnapshot {
    GoldenSnapshot {
        name: name.into(),
        grid_hash: grid_hash.into(),
        values: measured
            .iter()
            .map(|m| (m.key.clone(), GoldenEntry { value: m.value, tolerance: m.tolerance }))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GoldenReport {
    pub checked: usize,
    pub misses: Vec<String>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.misses.is_empty()
    }
}

/// Relative-error comparison of every measured key against the snapshot.
pub fn compare_golden(measured: &[Measured], grid_hash: &str, golden: &GoldenSnapshot) -> GoldenReport {
    let mut report = GoldenReport::default();
    if golden.grid_hash != grid_hash {
        report.misses.push(format!(
            "grid changed: snapshot {} was taken on grid {}, current grid is {}",
            golden.name, golden.grid_hash, grid_hash
        ));
        return report;
    }
    for m in measured {
        report.checked += 1;
        match golden.values.get(&m.key) {
            None => report.misses.push(format!("unknown key {}", m.key)),
            Some(g) => {
                let err = if g.value == 0.0 { m.value.abs() } else { ((m.value - g.value) / g.value).abs() };
                if !(err <= g.tolerance) {
                    report.misses.push(format!(
                        "{}: {} vs golden {} (relative error {:.3e} > {:.1e})",
                        m.key,
                        format_num(m.value),
                        format_num(g.value),
                        err,
                        g.tolerance
                    ));
                }
            }
        }
    }
    for key in golden.values.keys() {
        if !measured.iter().any(|m| &m.key == key) {
            report.misses.push(format!("missing key {key}"));
        }
    }
    report
}

/// Short SHA-256 fingerprint of the grid and geometry a run used.
pub fn grid_hash(grid: &ParameterGrid, geometry: &GroupGeometry, extra: &str) -> String {
    let mut canon = String::new();
    let list = |v: &[f64]| v.iter().map(|x| format_num(*x)).collect::<Vec<_>>().join(",");
    let _ = writeln!(canon, "p={}", list(&grid.p_values));
    let _ = writeln!(canon, "frac={}", list(&grid.alpha_fractions));
    let _ = writeln!(canon, "d={:?}", grid.d_values);
    let g = geometry;
    let _ = writeln!(
        canon,
        "geom={},{},{},{},{},{},{}",
        g.d,
        format_num(g.growth_rate),
        format_num(g.b),
        format_num(g.c_heat),
        format_num(g.c_delta),
        format_num(g.c_chi),
        format_num(g.c_delta_chi_inv)
    );
    canon.push_str(extra);
    hex::encode(&Sha256::digest(canon.as_bytes())[..8])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let mut t = ResultTable::new("demo", &["p", "label", "value", "pass"]);
        t.push(vec![2u32.into(), "a,b".into(), (1.0 / 3.0).into(), true.into()]);
        t
    }

    #[test]
    fn csv_shape() {
        let empty = ResultTable::new("e", &["a", "b"]);
        assert_eq!(empty.to_csv(), "a,b\n");
        let t = table();
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv, "p,label,value,pass\n2,\"a,b\",3.33333333333e-1,true\n");
    }

    #[test]
    fn csv_round_trip() {
        let t = table();
        let back = ResultTable::from_csv("demo", &t.to_csv()).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows[0][0], Cell::Int(2));
        assert_eq!(back.rows[0][1], Cell::Text("a,b".into()));
        assert!((back.rows[0][2].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(back.rows[0][3], Cell::Bool(true));
    }

    #[test]
    fn json_is_valid() {
        let v: serde_json::Value = serde_json::from_str(&table().to_json()).unwrap();
        assert_eq!(v["schema_version"], "1");
        assert_eq!(v["rows"][0][1], "a,b");
        let e: serde_json::Value = serde_json::from_str(&ResultTable::new("e", &["a"]).to_json()).unwrap();
        assert_eq!(e["rows"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn failing_rows_listed() {
        let mut t = table();
        t.push(vec![3u32.into(), "c".into(), 0.5.into(), false.into()]);
        assert_eq!(t.failing_rows().len(), 1);
    }

    #[test]
    fn golden_comparisons() {
        let m = vec![Measured::new("x", 1.0, 1e-3), Measured::new("y", 2.0, 1e-3)];
        let g = snapshot_from("s", "h", &m);
        assert!(compare_golden(&m, "h", &g).passed());
        let off = vec![Measured::new("x", 1.002, 1e-3), Measured::new("y", 2.0, 1e-3)];
        let r = compare_golden(&off, "h", &g);
        assert_eq!(r.misses.len(), 1);
        assert!(r.misses[0].starts_with("x:"));
        let extra = vec![Measured::new("x", 1.0, 1e-3), Measured::new("y", 2.0, 1e-3), Measured::new("z", 0.0, 1.0)];
        assert!(compare_golden(&extra, "h", &g).misses[0].contains("unknown key z"));
        let r = compare_golden(&m, "other", &g);
        assert!(r.misses[0].starts_with("grid changed"));
    }

    #[test]
    fn golden_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("embedconst-golden-{}", std::process::id()));
        let path = dir.join("g.json");
        let g = snapshot_from("s", "h", &[Measured::new("x", 0.1 + 0.2, 1e-9)]);
        g.save(&path).unwrap();
        assert_eq!(GoldenSnapshot::load(&path).unwrap(), g);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn hash_sensitive_to_grid() {
        let g = GroupGeometry::default();
        let a = grid_hash(&ParameterGrid::default(), &g, "");
        let b = grid_hash(&ParameterGrid::default().refined(), &g, "");
        assert_ne!(a, b);
        assert_eq!(a, grid_hash(&ParameterGrid::default(), &g, ""));
        assert_eq!(a.len(), 16);
    }
}
