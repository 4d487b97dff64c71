use std::io::{IsTerminal, Write};

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Format {
    /// Human tables on a terminal, JSON otherwise.
    pub fn resolve(requested: Option<Format>) -> Format {
        requested.unwrap_or_else(|| if std::io::stdout().is_terminal() { Format::Table } else { Format::Json })
    }
}

/// Rows for the CSV and table renderings.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn key_values(pairs: Vec<(&str, String)>) -> Self {
        let mut t = Table::new(["field", "value"]);
        for (k, v) in pairs {
            t.push([k.to_string(), v]);
        }
        t
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_aligned(&self, out: &mut dyn Write) -> Result<()> {
        let width = |s: &str| s.chars().count();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| width(h)).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i < widths.len() {
                    widths[i] = widths[i].max(width(cell));
                }
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c}{}", " ".repeat(widths.get(i).copied().unwrap_or(0).saturating_sub(width(c)))))
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(&self.headers))?;
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        writeln!(out, "{}", rule.join("  "))?;
        for row in &self.rows {
            writeln!(out, "{}", line(row))?;
        }
        Ok(())
    }
}

/// Provenance attached to every JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct RunInfo {
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub config: Value,
}

/// A command's result: the JSON body plus a tabular view of it.
pub struct Report {
    pub body: Value,
    pub table: Table,
}

impl Report {
    pub fn new(body: impl Serialize, table: Table) -> Result<Self> {
        Ok(Report { body: serde_json::to_value(body)?, table })
    }

    /// JSON with the run information under `run`; non-object bodies go under `result`.
    pub fn to_json(&self, run: &RunInfo) -> Result<Value> {
        let mut map = Map::new();
        map.insert("run".into(), serde_json::to_value(run)?);
        match &self.body {
            Value::Object(o) => map.extend(o.clone()),
            other => {
                map.insert("result".into(), other.clone());
            }
        }
        Ok(Value::Object(map))
    }

    pub fn emit(&self, format: Format, run: &RunInfo, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json(run)?)?;
                writeln!(out)?;
            }
            Format::Csv => self.table.write_csv(out)?,
            Format::Table => self.table.write_aligned(out)?,
        }
        Ok(())
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn complex(re: f64, im: f64) -> String {
    let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let (re, im) = (clean(re), clean(im));
    match (re == 0.0, im == 0.0) {
        (_, true) => num(re),
        (true, false) => format!("{}i", num(im)),
        (false, false) if im < 0.0 => format!("{}-{}i", num(re), num(-im)),
        _ => format!("{}+{}i", num(re), num(im)),
    }
}
