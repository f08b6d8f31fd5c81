//! Report model shared by all subcommands, with CSV and JSON writers.
//!
//! Floats are written with 17 significant digits so they round-trip
//! exactly; non-finite values and absent cells become JSON `null` or an
//! empty CSV field.

use std::io::Write;

use ftoc_core::report::CheckReport;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::Num)
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v).unwrap_or_default(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

/// `{:.16e}`: 17 significant digits. `None` for NaN and infinities.
pub fn format_number(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) => match format_number(*v) {
                Some(text) => RawValue::from_string(text)
                    .map_err(serde::ser::Error::custom)?
                    .serialize(s),
                None => s.serialize_none(),
            },
            Cell::Int(i) => s.serialize_u64(*i),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Null => s.serialize_none(),
        }
    }
}

/// Ordered key/value pairs, serialized as a JSON object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(&'static str, Cell)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Cell>) -> Self {
        self.0.push((key, value.into()));
        self
    }

    pub fn push(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.0.push((key, value.into()));
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

struct Invariant<'a>(&'a CheckReport);

impl Serialize for Invariant<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let c = self.0;
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("name", &c.name)?;
        map.serialize_entry("pass", &c.pass)?;
        map.serialize_entry("measured_gap", &Cell::Num(c.measured_gap))?;
        map.serialize_entry("threshold", &Cell::Num(c.threshold))?;
        map.end()
    }
}

struct Rows<'a>(&'a Report);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for row in &self.0.rows {
            let record = Record(self.0.columns.iter().copied().zip(row.iter().cloned()).collect());
            seq.serialize_element(&record)?;
        }
        seq.end()
    }
}

/// One command's result: a fixed column layout, its rows and the
/// invariants checked along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub config: Record,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub invariants: Vec<CheckReport>,
}

impl Report {
    pub fn new(command: &'static str, config: Record, columns: &[&'static str]) -> Self {
        Report {
            command,
            config,
            columns: columns.to_vec(),
            rows: Vec::new(),
            invariants: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|c| c.pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckReport> {
        self.invariants.iter().filter(|c| !c.pass)
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        let mut out = out;
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out).map_err(serde_json::Error::io)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("command", self.command)?;
        map.serialize_entry("config", &self.config)?;
        map.serialize_entry("rows", &Rows(self))?;
        let invariants: Vec<Invariant> = self.invariants.iter().map(Invariant).collect();
        map.serialize_entry("invariants", &invariants)?;
        map.end()
    }
}
