//! Numeric CSV files: comma separated, an optional single header row, one
//! time step per row.

use std::io::{Read, Write};
use std::path::Path;

use crate::base::Matrix;
use crate::error::{RcnError, Result};

/// Parsed CSV contents.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Option<Vec<String>>,
    pub data: Matrix,
}

pub fn read_csv_from<R: Read>(reader: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut values = Vec::new();
    let mut width = None;
    for (i, record) in rdr.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| RcnError::Parse {
            line,
            message: e.to_string(),
        })?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => {
                let w = *width.get_or_insert(row.len());
                if row.len() != w {
                    return Err(RcnError::Parse {
                        line,
                        message: format!("expected {w} fields, found {}", row.len()),
                    });
                }
                if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
                    return Err(RcnError::Parse {
                        line,
                        message: format!("field {} is not finite", bad + 1),
                    });
                }
                values.extend(row);
            }
            Err(_) if i == 0 => {
                header = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
                width = Some(record.len());
            }
            Err(e) => {
                return Err(RcnError::Parse {
                    line,
                    message: e.to_string(),
                })
            }
        }
    }
    let cols = width.ok_or_else(|| RcnError::Empty("csv".into()))?;
    let rows = values.len() / cols.max(1);
    let data = Matrix::new(rows, cols, values)?;
    Ok(CsvTable { header, data })
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let file = std::fs::File::open(path)?;
    read_csv_from(std::io::BufReader::new(file))
}

pub fn write_csv_to<W: Write>(mut writer: W, header: Option<&[&str]>, data: &Matrix) -> Result<()> {
    if let Some(h) = header {
        writeln!(writer, "{}", h.join(","))?;
    }
    let mut line = String::new();
    for row in data.row_iter() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            // Shortest representation that round-trips exactly.
            line.push_str(&format!("{v:?}"));
        }
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, header: Option<&[&str]>, data: &Matrix) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(std::io::BufWriter::new(file), header, data)
}
