//! Rectangular result tables and their CSV form.

use std::fmt;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Real(f64),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Real(x) => f.write_str(&format_real(*x)),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(schema: &str, columns: Vec<String>) -> Self {
        Self {
            schema: schema.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`; text cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// RFC 4180 CSV with CRLF line endings.
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string)).map_err(io_error)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    /// Reads a table written by [`to_csv`](Self::to_csv). Cells that parse
    /// as numbers come back as reals.
    pub fn from_csv(schema: &str, bytes: &[u8]) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(bytes);
        let columns = r.headers().map_err(io_error)?.iter().map(String::from).collect();
        let mut table = Self::new(schema, columns);
        for rec in r.records() {
            let rec = rec.map_err(io_error)?;
            table.push(
                rec.iter()
                    .map(|s| match s.parse::<f64>() {
                        Ok(x) => Cell::Real(x),
                        Err(_) => Cell::Text(s.into()),
                    })
                    .collect(),
            );
        }
        Ok(table)
    }
}

fn io_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(format_real(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(format_real(f64::NAN), "NaN");
    }

    #[test]
    fn csv_uses_crlf_and_header() {
        let mut t = ResultTable::new("demo", vec!["name".into(), "x".into()]);
        t.push(vec!["a,b".into(), 0.5.into()]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "name,x\r\n\"a,b\",5.0000000000000000e-1\r\n");
        let back = ResultTable::from_csv("demo", text.as_bytes()).unwrap();
        assert_eq!(back.column("x").unwrap(), vec![0.5]);
    }

    #[test]
    fn empty_table_still_has_a_header() {
        let t = ResultTable::new("demo", vec!["t".into()]);
        assert_eq!(t.to_csv().unwrap(), b"t\r\n");
    }
}
