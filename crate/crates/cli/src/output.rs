//! Rendering: CSV tables with 12 significant digits and schema-tagged JSON.

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub const SCHEMA_PREFIX: &str = "lattice-defect";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_sig12(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Usage(format!("csv encoding failed: {e}"));
        w.write_record(&self.headers).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Usage(format!("csv encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj = self
                        .headers
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Result of one subcommand, renderable as JSON and possibly as CSV.
#[derive(Debug, Clone)]
pub struct Output {
    pub schema: &'static str,
    pub data: Value,
    pub table: Option<Table>,
    pub default_format: Format,
    /// Bare text printed when no format is requested.
    pub plain: Option<String>,
}

impl Output {
    pub fn report<T: Serialize>(schema: &'static str, data: &T, table: Option<Table>) -> Self {
        Self {
            schema,
            data: serde_json::to_value(data).expect("report types serialize"),
            table,
            default_format: Format::Json,
            plain: None,
        }
    }

    pub fn table(schema: &'static str, table: Table) -> Self {
        Self {
            schema,
            data: table.to_json(),
            table: Some(table),
            default_format: Format::Csv,
            plain: None,
        }
    }

    /// Replace the JSON payload while keeping CSV as the default rendering.
    pub fn with_data<T: Serialize>(mut self, data: &T) -> Self {
        self.data = serde_json::to_value(data).expect("report types serialize");
        self
    }

    pub fn with_plain(mut self, text: String) -> Self {
        self.plain = Some(text);
        self
    }

    pub fn render(&self, format: Option<Format>) -> Result<String, CliError> {
        if let (None, Some(text)) = (format, &self.plain) {
            return Ok(text.clone());
        }
        match format.unwrap_or(self.default_format) {
            Format::Json => Ok(json_envelope(self.schema, &self.data)),
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => Err(CliError::Usage(format!(
                    "{} output has no CSV form; use --format json",
                    self.schema
                ))),
            },
        }
    }
}

pub fn schema_id(name: &str) -> String {
    format!("{SCHEMA_PREFIX}/{name}/v1")
}

pub fn json_envelope(schema: &str, data: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&json!({ "schema": schema_id(schema), "data": data }))
        .expect("json values serialize");
    s.push('\n');
    s
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside 1e-4 ≤ |x| < 1e12.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mant),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
