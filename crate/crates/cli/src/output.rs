//! Tables with a metadata header, written as CSV or JSON.
//!
//! Both encodings print every real with 17 significant digits, so a CSV
//! and a JSON file from the same run carry identical numbers.

use std::io::Write;

use janossy_core::fmt::real;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(x) => real(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x) if x.is_finite() => Value::Number(real_number(*x)),
            Cell::Real(_) => Value::Null,
            Cell::Int(i) => Value::from(*i),
            Cell::Text(t) => Value::String(t.clone()),
        }
    }
}

fn real_number(x: f64) -> Number {
    // arbitrary_precision keeps the digits exactly as formatted
    real(x).parse().expect("formatted finite reals are valid JSON numbers")
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(t: &str) -> Self {
        Cell::Text(t.to_string())
    }
}

/// One output file: resolved configuration, diagnostics, and rows.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub diagnostics: Vec<(String, Cell)>,
    pub tables: Vec<Table>,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

impl Document {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), ..Default::default() }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.into(), value.to_string()));
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.diagnostics.push((key.into(), value.into()));
        self
    }

    fn header_line(&self) -> String {
        let mut line = format!("# janossy {} command={}", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in &self.config {
            line.push_str(&format!(" {k}={v}"));
        }
        match self.seed {
            Some(seed) => line.push_str(&format!(" seed={seed}")),
            None => line.push_str(" seed=none"),
        }
        line
    }

    pub fn write<W: Write>(&self, out: &mut W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{}", self.header_line())?;
        for (k, v) in &self.diagnostics {
            writeln!(out, "# {k}={}", v.csv())?;
        }
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            if self.tables.len() > 1 {
                writeln!(out, "# table={}", table.name)?;
            }
            writeln!(out, "{}", table.columns.join(","))?;
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Ok(())
    }

    fn write_json<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let mut root = Map::new();
        root.insert("header".into(), Value::String(self.header_line()));
        root.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        root.insert("command".into(), Value::String(self.command.clone()));
        let config: Map<String, Value> = self.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        root.insert("config".into(), Value::Object(config));
        root.insert("seed".into(), self.seed.map(Value::from).unwrap_or(Value::Null));
        let diagnostics: Map<String, Value> = self.diagnostics.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        root.insert("diagnostics".into(), Value::Object(diagnostics));
        let tables: Vec<Value> = self
            .tables
            .iter()
            .map(|t| {
                let mut m = Map::new();
                m.insert("name".into(), Value::String(t.name.clone()));
                m.insert("columns".into(), Value::Array(t.columns.iter().cloned().map(Value::String).collect()));
                let rows = t.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                m.insert("rows".into(), Value::Array(rows));
                Value::Object(m)
            })
            .collect();
        root.insert("tables".into(), Value::Array(tables));
        serde_json::to_writer_pretty(&mut *out, &Value::Object(root))?;
        writeln!(out)
    }
}
