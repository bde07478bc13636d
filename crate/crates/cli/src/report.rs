//! Rendering of command results as JSON, CSV or aligned text.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    /// Exact form: floats use the shortest representation that round-trips.
    fn exact(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn readable(&self) -> String {
        match self {
            Cell::Float(v) if *v != 0.0 && !(1e-4..1e9).contains(&v.abs()) => format!("{v:.6e}"),
            other => other.exact(),
        }
    }

    fn is_numeric(&self) -> bool {
        !matches!(self, Cell::Text(_))
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::exact))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    /// Columns padded to a common width; numbers right-aligned.
    pub fn text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::readable).collect())
            .collect();
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].chars().count())
                    .chain([self.header[j].len()])
                    .max()
                    .unwrap()
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: Vec<(String, bool)>| {
            let parts: Vec<String> = items
                .into_iter()
                .zip(&widths)
                .map(|((s, right), &w)| {
                    if right {
                        format!("{s:>w$}")
                    } else {
                        format!("{s:<w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        let numeric: Vec<bool> = (0..self.header.len())
            .map(|j| self.rows.iter().all(|r| r[j].is_numeric()))
            .collect();
        line(
            &mut out,
            self.header
                .iter()
                .zip(&numeric)
                .map(|(h, &n)| (h.to_string(), n))
                .collect(),
        );
        for (row, raw) in cells.into_iter().zip(&self.rows) {
            line(
                &mut out,
                row.into_iter()
                    .zip(raw)
                    .map(|(s, c)| (s, c.is_numeric()))
                    .collect(),
            );
        }
        out
    }
}

/// A command result in all three renderings.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub table: Table,
    /// Lines printed above the table in text mode.
    pub preamble: Vec<String>,
}

impl Report {
    pub fn new<T: Serialize>(json: &T, table: Table) -> Self {
        Self {
            json: serde_json::to_value(json).expect("report types serialise"),
            table,
            preamble: Vec::new(),
        }
    }

    pub fn with_preamble(mut self, lines: Vec<String>) -> Self {
        self.preamble = lines;
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.json).expect("JSON values serialise");
                s.push('\n');
                s
            }
            Format::Csv => self.table.csv(),
            Format::Text => {
                let mut s = String::new();
                for l in &self.preamble {
                    s.push_str(l);
                    s.push('\n');
                }
                s.push_str(&self.table.text());
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["n", "value", "note"]);
        t.push(vec![10u64.into(), 0.32.into(), "a".into()]);
        t
    }

    #[test]
    fn single_row_csv() {
        assert_eq!(sample().csv(), "n,value,note\n10,0.32,a\n");
    }

    #[test]
    fn csv_floats_round_trip() {
        let mut t = Table::new(&["v"]);
        t.push(vec![0.1654767001144887.into()]);
        t.push(vec![5.02e-8.into()]);
        let text = t.csv();
        let vals: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(vals, vec![0.1654767001144887, 5.02e-8]);
    }

    #[test]
    fn text_is_aligned() {
        let mut t = sample();
        t.push(vec![1000u64.into(), 1.5e-9.into(), "bb".into()]);
        let text = t.text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("  10"));
        assert!(lines[2].contains("1.500000e-9"));
    }
}
