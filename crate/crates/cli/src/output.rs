//! CSV and JSON Lines tables with a self-describing header.

use std::io::{self, Write};
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

/// 17 significant digits, so every value reads back bit-exact.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    pub fn to_text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) if x.is_finite() => Value::Number(
                Number::from_str(&format_float(*x)).expect("formatted float is valid JSON"),
            ),
            Cell::Float(_) => Value::Null,
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// A finished command result ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub config: Vec<(&'static str, Cell)>,
    /// Run summary written after the config in the header.
    pub result: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn write(&self, format: Format, w: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# qpt {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# command = {}", self.command)?;
        writeln!(w, "# [config]")?;
        for (k, v) in &self.config {
            writeln!(w, "# {k} = {}", v.to_text())?;
        }
        if !self.result.is_empty() {
            writeln!(w, "# [result]")?;
            for (k, v) in &self.result {
                writeln!(w, "# {k} = {}", v.to_text())?;
            }
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_text).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    fn write_json(&self, w: &mut impl Write) -> io::Result<()> {
        let object = |pairs: &mut dyn Iterator<Item = (String, Value)>| {
            Value::Object(pairs.collect::<Map<_, _>>())
        };
        let header = object(
            &mut [
                ("qpt".to_string(), Value::from(env!("CARGO_PKG_VERSION"))),
                ("command".to_string(), Value::from(self.command)),
                (
                    "config".to_string(),
                    object(
                        &mut self
                            .config
                            .iter()
                            .map(|(k, v)| (k.to_string(), v.to_json())),
                    ),
                ),
                (
                    "result".to_string(),
                    object(&mut self.result.iter().map(|(k, v)| (k.clone(), v.to_json()))),
                ),
                ("columns".to_string(), Value::from(self.columns.clone())),
            ]
            .into_iter(),
        );
        writeln!(
            w,
            "{}",
            Value::Object([("header".to_string(), header)].into_iter().collect())
        )?;
        for row in &self.rows {
            let obj = object(
                &mut self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.to_json())),
            );
            writeln!(w, "{obj}")?;
        }
        Ok(())
    }
}
