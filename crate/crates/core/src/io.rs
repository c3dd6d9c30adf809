//! Matrix persistence: a fixed little-endian binary layout and plain CSV.
//!
//! Binary layout: the six magic bytes `MVCE1\0`, then `n` and `d` as `u64`
//! little-endian, then `n * d` IEEE-754 doubles little-endian, row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

pub const MAGIC: [u8; 6] = [0x4D, 0x56, 0x43, 0x45, 0x31, 0x00];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Binary,
    Csv { header: bool },
}

impl MatrixFormat {
    /// `.csv` files are CSV without a header; anything else is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv { header: false },
            _ => MatrixFormat::Binary,
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        MatrixFormat::Binary => read_binary(reader).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        }),
        MatrixFormat::Csv { header } => read_csv(reader, header),
    }
}

pub fn save_matrix(x: &DataMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        MatrixFormat::Binary => write_binary(x, &mut w),
        MatrixFormat::Csv { .. } => write_csv(x, &mut w),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

pub fn write_binary<W: Write>(x: &DataMatrix, w: &mut W) -> std::io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&(x.nrows() as u64).to_le_bytes())?;
    w.write_all(&(x.ncols() as u64).to_le_bytes())?;
    for v in x.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<DataMatrix> {
    let io = |e| Error::io("<binary stream>", e);
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic).map_err(io)?;
    if magic != MAGIC {
        return Err(Error::Format {
            line: 0,
            column: 0,
            message: "bad magic bytes, not an MVCE matrix file".into(),
        });
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(io)?;
    let n = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word).map_err(io)?;
    let d = u64::from_le_bytes(word) as usize;
    let len = n.checked_mul(d).ok_or_else(|| {
        Error::Dimension(format!("header claims {n}x{d}, which overflows"))
    })?;
    let mut values = Vec::with_capacity(len);
    for k in 0..len {
        r.read_exact(&mut word).map_err(|e| Error::Format {
            line: k / d.max(1),
            column: k % d.max(1),
            message: format!("truncated payload: {e}"),
        })?;
        values.push(f64::from_le_bytes(word));
    }
    DataMatrix::new(n, d, values)
}

/// Shortest representation that parses back to the same bits.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv<W: Write>(x: &DataMatrix, w: &mut W) -> std::io::Result<()> {
    let mut line = String::new();
    for row in x.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_f64(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Reads comma-separated doubles. Line numbers in errors are 1-based and
/// count the header line when present.
pub fn read_csv<R: Read>(r: R, header: bool) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut values = Vec::new();
    let mut d = None;
    let mut n = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        match d {
            None => d = Some(record.len()),
            Some(d) if d != record.len() => {
                return Err(Error::Format {
                    line,
                    column: record.len().min(d) + 1,
                    message: format!("ragged row: {} fields, expected {d}", record.len()),
                })
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Format {
                line,
                column: j + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            values.push(v);
        }
        n += 1;
    }
    let d = d.ok_or_else(|| Error::Format {
        line: 1,
        column: 1,
        message: "no data rows".into(),
    })?;
    DataMatrix::new(n, d, values)
}
