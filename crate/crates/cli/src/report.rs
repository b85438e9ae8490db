//! Output records and their text, CSV and JSON renderings.

use serde_json::{json, Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    Str(String),
    Bool(bool),
    Matrix(Vec<Vec<f64>>),
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// An ordered list of named fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.0.push((key.into(), value.into()));
    }
}

/// Everything one command prints.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: Record,
    pub results: Vec<Record>,
    pub residuals: Record,
    /// Extra lines printed after the records in text mode.
    pub notes: Vec<String>,
    /// Render text mode as one aligned row per record.
    pub tabular: bool,
}

/// Ten significant digits; scientific notation with a lowercase `e` outside
/// `[1e-6, 1e6)`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.000000000".into();
    }
    let mag = x.abs();
    if !(1e-6..1e6).contains(&mag) {
        return format!("{x:.9e}");
    }
    let exp = mag.log10().floor() as i32;
    let decimals = (9 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding may carry into a new leading digit (9.99999999996 -> 10.000000000)
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > 10 && decimals > 0 {
        let decimals = decimals - 1;
        let s = format!("{x:.decimals$}");
        if s.trim_start_matches('-').parse::<f64>().is_ok_and(|v| v >= 1e6) {
            return format!("{x:.9e}");
        }
        return s;
    }
    s
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(f) => fmt_num(*f),
        Value::Str(s) => s.clone(),
        Value::Bool(b) => if *b { "pass" } else { "fail" }.to_string(),
        Value::Matrix(rows) => rows
            .iter()
            .map(|r| r.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn csv_value(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Matrix(rows) => rows
            .iter()
            .map(|r| r.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(";"),
        Value::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        other => text_value(other),
    }
}

fn json_value(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Float(f) => json!(f),
        Value::Str(s) => json!(s),
        Value::Bool(b) => json!(b),
        Value::Matrix(rows) => json!(rows),
    }
}

fn json_record(r: &Record) -> Json {
    let mut map = Map::new();
    for (k, v) in &r.0 {
        map.insert(k.clone(), json_value(v));
    }
    Json::Object(map)
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_table(&self) -> String {
        let Some(first) = self.results.first() else {
            return String::new();
        };
        let mut rows: Vec<Vec<String>> = vec![first.0.iter().map(|(k, _)| k.clone()).collect()];
        rows.extend(self.results.iter().map(|r| r.0.iter().map(|(_, v)| text_value(v)).collect()));
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r.get(c).map_or(0, String::len)).max().unwrap_or(0))
            .collect();
        rows.iter()
            .map(|r| {
                let line: Vec<String> = r.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
                line.join("  ").trim_end().to_string() + "\n"
            })
            .collect()
    }

    fn render_text(&self) -> String {
        if self.tabular {
            let mut out = self.render_table();
            for note in &self.notes {
                out.push_str(note);
                out.push('\n');
            }
            return out;
        }
        let width = self
            .results
            .iter()
            .flat_map(|r| r.0.iter().map(|(k, _)| k.len()))
            .max()
            .unwrap_or(0);
        let mut blocks = Vec::new();
        for r in &self.results {
            let mut lines = Vec::new();
            for (k, v) in &r.0 {
                let rendered = text_value(v);
                if matches!(v, Value::Matrix(_)) {
                    lines.push(format!("{k}:"));
                    lines.extend(rendered.lines().map(|l| format!("  {l}")));
                } else {
                    lines.push(format!("{k:<width$}  {rendered}"));
                }
            }
            blocks.push(lines.join("\n"));
        }
        let mut out = blocks.join("\n\n");
        for note in &self.notes {
            out.push('\n');
            out.push_str(note);
        }
        out.push('\n');
        out
    }

    fn render_csv(&self) -> String {
        let Some(first) = self.results.first() else {
            return String::new();
        };
        let mut out = first.0.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in &self.results {
            out.push_str(&r.0.iter().map(|(_, v)| csv_value(v)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let doc = json!({
            "command": self.command,
            "config": json_record(&self.config),
            "results": self.results.iter().map(json_record).collect::<Vec<_>>(),
            "residuals": json_record(&self.residuals),
            "version": env!("CARGO_PKG_VERSION"),
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("JSON values are always serializable");
        out.push('\n');
        out
    }
}
