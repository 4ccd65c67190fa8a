//! Deterministic report emission: JSON with every float printed at 17
//! significant digits, CSV sweep tables with a stable column order, and a
//! human summary with one PASS/FAIL line per check. Identical inputs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "Infinity" } else { "-Infinity" }.to_string();
    }
    format!("{v:.16e}")
}

/// Order-preserving JSON value; objects keep insertion order so report
/// layout is fixed by construction.
#[derive(Debug, Clone)]
pub enum Json {
    Bool(bool),
    Int(i64),
    F64(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn object() -> Json {
        Json::Object(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) {
        match self {
            Json::Object(entries) => entries.push((key.to_string(), value)),
            _ => panic!("push on non-object"),
        }
    }

    pub fn str(v: impl Into<String>) -> Json {
        Json::Str(v.into())
    }

    pub fn floats(values: &[f64]) -> Json {
        Json::Array(values.iter().map(|&v| Json::F64(v)).collect())
    }

    fn write(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        let pad_inner = "  ".repeat(indent + 1);
        match self {
            Json::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Json::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Json::F64(v) => {
                if v.is_finite() {
                    let _ = write!(out, "{}", fmt_f64(*v));
                } else {
                    // JSON has no Inf/NaN literals; quote them
                    let _ = write!(out, "\"{}\"", fmt_f64(*v));
                }
            }
            Json::Str(s) => {
                let _ = write!(out, "{}", escape(s));
            }
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&pad_inner);
                    item.write(out, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad);
                out.push(']');
            }
            Json::Object(entries) => {
                if entries.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (key, value)) in entries.iter().enumerate() {
                    out.push_str(&pad_inner);
                    let _ = write!(out, "{}: ", escape(key));
                    value.write(out, indent + 1);
                    if i + 1 < entries.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad);
                out.push('}');
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One CSV cell; floats go through the 17-digit format.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    F64(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::F64(v) => fmt_f64(*v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// One verified inequality or identity with its gate.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// true: pass iff value ≤ threshold; false: pass iff value ≥ threshold
    pub upper_bound: bool,
    pub passed: bool,
}

impl Check {
    pub fn upper(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            upper_bound: true,
            passed: value <= threshold,
        }
    }

    pub fn lower(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            upper_bound: false,
            passed: value >= threshold,
        }
    }

    pub fn to_json(&self) -> Json {
        let mut obj = Json::object();
        obj.push("name", Json::str(&self.name));
        obj.push("value", Json::F64(self.value));
        obj.push("threshold", Json::F64(self.threshold));
        obj.push(
            "comparison",
            Json::str(if self.upper_bound { "<=" } else { ">=" }),
        );
        obj.push("passed", Json::Bool(self.passed));
        obj
    }

    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {}: value {} {} threshold {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            fmt_f64(self.value),
            if self.upper_bound { "<=" } else { ">=" },
            fmt_f64(self.threshold),
        )
    }
}

/// Assembled experiment output ready for the disk.
pub struct Report {
    pub kind: String,
    pub seed: u64,
    pub detail: Json,
    pub tables: Vec<CsvTable>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Write report.json, one CSV per table and summary.txt under `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut root = Json::object();
        root.push("kind", Json::str(&self.kind));
        root.push("seed", Json::Int(self.seed as i64));
        root.push(
            "checks",
            Json::Array(self.checks.iter().map(Check::to_json).collect()),
        );
        root.push("detail", self.detail.clone());
        fs::write(dir.join("report.json"), root.render())?;
        for table in &self.tables {
            fs::write(dir.join(format!("{}.csv", table.name)), table.render())?;
        }
        let mut summary = String::new();
        let _ = writeln!(summary, "experiment: {}", self.kind);
        let _ = writeln!(summary, "seed: {}", self.seed);
        for check in &self.checks {
            let _ = writeln!(summary, "{}", check.summary_line());
        }
        let _ = writeln!(
            summary,
            "overall: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        );
        fs::write(dir.join("summary.txt"), summary)?;
        Ok(())
    }
}
