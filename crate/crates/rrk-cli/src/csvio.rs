//! CSV emission and parsing with a canonical number format.
//!
//! Floats are always written with 17 significant digits (`{:.16e}`), so
//! parse -> re-emit of any file produced here is byte-identical. Lines end
//! with LF; the first line is the header.

use std::fmt::Write as _;

/// One CSV cell: an integer, a float, or an empty field.
#[derive(Debug, Clone, PartialEq)]
pub enum CsvValue {
    Int(i64),
    Float(f64),
    Blank,
}

impl CsvValue {
    fn emit(&self, out: &mut String) {
        match self {
            CsvValue::Int(v) => {
                let _ = write!(out, "{v}");
            }
            CsvValue::Float(v) => {
                let _ = write!(out, "{}", format_float(*v));
            }
            CsvValue::Blank => {}
        }
    }
}

/// Canonical float formatting: 17 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A parsed or assembled CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<CsvValue>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<CsvValue>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.emit(&mut out);
            }
            out.push('\n');
        }
        out
    }

    /// Parses a table emitted by [`CsvTable::emit`] (or any comma-separated
    /// numeric file with a header row). Never panics on malformed input;
    /// returns a description of the first offending cell instead.
    pub fn parse(text: &str) -> Result<CsvTable, String> {
        let mut lines = text.split('\n');
        let header_line = lines.next().ok_or("empty input")?;
        if header_line.is_empty() {
            return Err("empty header".into());
        }
        let header: Vec<String> = header_line.split(',').map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue; // trailing newline
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(format!(
                    "line {}: {} cells, expected {}",
                    lineno + 2,
                    cells.len(),
                    header.len()
                ));
            }
            let mut row = Vec::with_capacity(cells.len());
            for cell in cells {
                row.push(parse_cell(cell).map_err(|e| format!("line {}: {e}", lineno + 2))?);
            }
            rows.push(row);
        }
        Ok(CsvTable { header, rows })
    }
}

fn parse_cell(cell: &str) -> Result<CsvValue, String> {
    if cell.is_empty() {
        return Ok(CsvValue::Blank);
    }
    let looks_integral = {
        let digits = cell.strip_prefix('-').unwrap_or(cell);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if looks_integral {
        if let Ok(v) = cell.parse::<i64>() {
            return Ok(CsvValue::Int(v));
        }
    }
    cell.parse::<f64>()
        .map(CsvValue::Float)
        .map_err(|_| format!("cell `{cell}` is not numeric"))
}
