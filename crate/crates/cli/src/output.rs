//! Tabular output: CSV with a header row, and a whitespace `.dat` variant.

use std::io::Write;

use sha2::{Digest, Sha256};

/// Column names and string-formatted rows, all rows as wide as the header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed numeric cells of a column; blank cells are skipped.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| r[i].parse::<f64>().ok())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W, banner: Option<&str>) -> std::io::Result<()> {
        self.write_delimited(w, banner, b',', "")
    }

    /// Space-separated with a `#`-prefixed header; blank cells become `?`,
    /// gnuplot's conventional missing-value marker.
    pub fn write_dat<W: Write>(&self, w: W, banner: Option<&str>) -> std::io::Result<()> {
        self.write_delimited(w, banner, b' ', "?")
    }

    fn write_delimited<W: Write>(
        &self,
        mut w: W,
        banner: Option<&str>,
        delimiter: u8,
        blank: &str,
    ) -> std::io::Result<()> {
        if let Some(b) = banner {
            writeln!(w, "# {b}")?;
        }
        let mut header = self.header.clone();
        if delimiter == b' ' {
            header[0] = format!("#{}", header[0]);
        }
        let mut out = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(w);
        out.write_record(&header)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| if c.is_empty() { blank } else { c }))?;
        }
        out.flush()
    }
}

/// Shortest round-trip scientific form, stable across platforms.
pub fn float(x: f64) -> String {
    format!("{x:e}")
}

/// First 8 bytes of SHA-256 over the little-endian coordinate bits.
pub fn xi_hash(coords: &[f64]) -> String {
    let mut h = Sha256::new();
    for c in coords {
        h.update(c.to_le_bytes());
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}
