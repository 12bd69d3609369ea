//! Versioned report envelope and its JSON, table and CSV renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA: &str = "dbeq/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Table,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}', expected one of json, table, csv"
            ))),
        }
    }
}

/// Rows for the tabular formats. Verbs without a natural table fall back to
/// flattened `key,value` pairs of the JSON body.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    verb: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    game: Option<&'a str>,
    data: &'a Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub verb: String,
    pub game: Option<String>,
    pub data: Value,
    pub table: Option<Table>,
}

impl Report {
    pub fn new(verb: &str, game: Option<&str>, data: impl Serialize) -> Result<Self> {
        let data = serde_json::to_value(data).map_err(|e| Error::InvalidParameter(format!("report encoding: {e}")))?;
        Ok(Report {
            verb: verb.to_string(),
            game: game.map(str::to_string),
            data,
            table: None,
        })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let env = Envelope {
                    schema: SCHEMA,
                    verb: &self.verb,
                    game: self.game.as_deref(),
                    data: &self.data,
                };
                let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => render_csv(&self.rows()),
            Format::Table => render_table(&self.rows()),
        }
    }

    fn rows(&self) -> Table {
        if let Some(t) = &self.table {
            return t.clone();
        }
        let mut t = Table::new(&["key", "value"]);
        t.push(vec!["schema".into(), SCHEMA.into()]);
        t.push(vec!["verb".into(), self.verb.clone()]);
        if let Some(g) = &self.game {
            t.push(vec!["game".into(), g.clone()]);
        }
        flatten(&self.data, String::new(), &mut t.rows);
        t
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(v: &Value, prefix: String, out: &mut Vec<Vec<String>>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                flatten(x, join(k), out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (k, x) in xs.iter().enumerate() {
                flatten(x, join(&k.to_string()), out);
            }
        }
        Value::Array(xs) => out.push(vec![prefix, xs.iter().map(scalar).collect::<Vec<_>>().join(" ")]),
        other => out.push(vec![prefix, scalar(other)]),
    }
}

fn render_csv(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header).expect("in-memory write");
    for r in &t.rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn render_table(t: &Table) -> String {
    let cols = t.header.len();
    let mut width: Vec<usize> = t.header.iter().map(|h| h.chars().count()).collect();
    for r in &t.rows {
        for (k, c) in r.iter().enumerate().take(cols) {
            width[k] = width[k].max(c.chars().count());
        }
    }
    let mut s = String::new();
    let mut line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(s, "{}", padded.join("  ").trim_end());
    };
    line(&t.header);
    line(&width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for r in &t.rows {
        line(r);
    }
    s
}
