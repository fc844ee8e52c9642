//! Tabular results and their CSV / JSON serialisation.
//!
//! Floats are printed with 12 significant digits; columns keep their
//! declared order in both formats.

use std::io::Write;

use serde_json::{Map, Value as Json};

use crate::error::Result;
use crate::verify::{VerificationReport, RATIO_COLUMNS};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Format `x` with `digits` significant digits, `%g` style.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mant.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_sig(*v, SIGNIFICANT_DIGITS),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Cell::Int(v) => Json::from(*v),
            Cell::Float(v) => {
                let rounded: f64 = format_sig(*v, SIGNIFICANT_DIGITS).parse().unwrap_or(f64::NAN);
                serde_json::Number::from_f64(rounded).map(Json::Number).unwrap_or(Json::Null)
            }
            Cell::Text(s) => Json::from(s.clone()),
        }
    }
}

/// Named columns and rows of cells, plus free-form metadata for JSON output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, Cell)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), meta: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.to_json());
        }
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    obj.insert(c.clone(), v.to_json());
                }
                Json::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("meta".into(), Json::Object(meta));
        root.insert("rows".into(), Json::Array(rows));
        let mut s = serde_json::to_string_pretty(&Json::Object(root)).expect("serialisable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

impl VerificationReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&RATIO_COLUMNS);
        for r in &self.rows {
            t.push(vec![
                r.x.into(),
                r.p.into(),
                r.nu.into(),
                r.i_total.into(),
                r.i_major.into(),
                r.i_minor.into(),
                r.r.into(),
                r.minor_ratio.into(),
                r.sup_minor.into(),
                r.sup_major_resid.into(),
            ]);
        }
        t.meta("p", self.meta.p);
        t.meta("nu", self.meta.nu);
        t.meta("tol", self.meta.tol);
        t.meta("grid_sizes", self.rows.iter().map(|r| r.grid_n.to_string()).collect::<Vec<_>>().join(" ").as_str());
        t
    }
}

/// Write the rendered table to `path`, or to `stdout` when `path` is `None`.
pub fn emit_report(table: &Table, format: Format, path: Option<&std::path::Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = table.render(format);
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}
