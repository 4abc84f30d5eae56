//! The ε × p grid format shared by the embedded reference tables and the
//! `table` command.
//!
//! CSV: first column `eps`, one column per exponent `p`, one row per ε.
//! Labels are written in shortest round-trip form (`1e-2`, `1.1`).

use std::fmt::Display;
use std::io::Write;

use crate::error::{invalid, Error, Result};

/// Values indexed by `(ε, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    eps: Vec<f64>,
    p: Vec<f64>,
    cells: Vec<Vec<T>>,
}

impl<T> Grid<T> {
    pub fn new(eps: Vec<f64>, p: Vec<f64>, cells: Vec<Vec<T>>) -> Result<Self> {
        if cells.len() != eps.len() || cells.iter().any(|row| row.len() != p.len()) {
            return Err(invalid(format!(
                "grid shape mismatch: {} eps x {} p labels",
                eps.len(),
                p.len()
            )));
        }
        Ok(Grid { eps, p, cells })
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        self.cells.get(i)?.get(j)
    }

    /// Cell for the given labels, matching within a relative `1e-12`.
    pub fn lookup(&self, eps: f64, p: f64) -> Option<&T> {
        let i = self.eps.iter().position(|&e| same_label(e, eps))?;
        let j = self.p.iter().position(|&q| same_label(q, p))?;
        self.get(i, j)
    }

    pub fn map<U>(&self, mut f: impl FnMut(usize, usize, &T) -> U) -> Grid<U> {
        Grid {
            eps: self.eps.clone(),
            p: self.p.clone(),
            cells: self
                .cells
                .iter()
                .enumerate()
                .map(|(i, row)| row.iter().enumerate().map(|(j, v)| f(i, j, v)).collect())
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &T)> {
        self.cells
            .iter()
            .zip(&self.eps)
            .flat_map(move |(row, &e)| row.iter().zip(&self.p).map(move |(v, &p)| (e, p, v)))
    }
}

fn same_label(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

pub fn eps_label(eps: f64) -> String {
    format!("{eps:e}")
}

pub fn p_label(p: f64) -> String {
    format!("{p}")
}

fn parse_label(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| invalid(format!("bad {what} label '{s}': {e}")))
}

/// Parses an integer grid in the CSV layout above.
pub fn read_grid_csv(text: &str) -> Result<Grid<i64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("eps") {
        return Err(invalid("grid CSV must start with an 'eps' column"));
    }
    let p = headers
        .iter()
        .skip(1)
        .map(|h| parse_label(h, "p"))
        .collect::<Result<Vec<_>>>()?;
    let mut eps = Vec::new();
    let mut cells = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        eps.push(parse_label(&record[0], "eps")?);
        let row = record
            .iter()
            .skip(1)
            .map(|c| {
                c.parse::<i64>()
                    .map_err(|e| invalid(format!("bad cell '{c}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        cells.push(row);
    }
    Grid::new(eps, p, cells)
}

pub fn write_grid_csv<T: Display>(grid: &Grid<T>, out: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["eps".to_string()];
    header.extend(grid.p().iter().map(|&p| p_label(p)));
    wtr.write_record(&header).map_err(csv_err)?;
    for (row, &e) in grid.rows().iter().zip(grid.eps()) {
        let mut rec = vec![eps_label(e)];
        rec.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Configuration(e.to_string()))
}

/// Markdown table laid out like the printed reference tables (`ε \ p`).
pub fn grid_markdown<T: Display>(grid: &Grid<T>) -> String {
    let mut s = String::from("| ε \\ p |");
    for &p in grid.p() {
        s.push_str(&format!(" {} |", p_label(p)));
    }
    s.push_str("\n|---|");
    s.push_str(&"---:|".repeat(grid.p().len()));
    s.push('\n');
    for (row, &e) in grid.rows().iter().zip(grid.eps()) {
        s.push_str(&format!("| {} |", eps_label(e)));
        for v in row {
            s.push_str(&format!(" {v} |"));
        }
        s.push('\n');
    }
    s
}

fn csv_err(e: csv::Error) -> Error {
    Error::Configuration(format!("csv: {e}"))
}
