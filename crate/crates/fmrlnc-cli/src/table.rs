//! Long-format result tables: each row carries the experiment parameters,
//! a statistic name, its value, and (for Monte Carlo statistics) a standard
//! error. Serialized as UTF-8 CSV with LF line endings and a header row.

use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use fmrlnc::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl ResultTable {
    pub fn new(header: &[&str]) -> ResultTable {
        ResultTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<S: Display>(&mut self, cells: Vec<S>) {
        assert_eq!(cells.len(), self.header.len(), "row width must match header");
        let row: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        for cell in &row {
            assert!(
                !cell.contains(',') && !cell.contains('\n') && !cell.contains('"'),
                "cell {cell:?} needs quoting; keep values CSV-plain"
            );
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::validation(format!("cannot create {}: {e}", path.display())))?;
        file.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::validation(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}
