//! CSV tables and binary PGM images.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::experiments::ImageGrid;
use crate::{Error, Result};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Scientific notation with 6 significant digits, e.g. `2.17585e-01`.
    Real(f64),
    /// Two decimals, e.g. `1.00`; `-` when absent.
    Order(Option<f64>),
    Int(usize),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Real(v) => sci6(*v),
            Cell::Order(Some(v)) => format!("{v:.2}"),
            Cell::Order(None) => "-".to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// `x` with 6 significant digits and a signed two-digit exponent.
pub fn sci6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.5e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::DimensionMismatch {
                expected: self.header.len(),
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wtr.write_record(&self.header)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(Cell::render))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    table.write_to(BufWriter::new(File::create(path)?))
}

/// Header and rows of a CSV file, cells as strings.
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// 8-bit intensities: `[min, max]` maps affinely onto `[0, 255]` with rounding; a
/// constant grid maps to 0.
pub fn quantize(grid: &ImageGrid) -> Vec<u8> {
    let (lo, hi) = grid.range();
    let span = hi - lo;
    grid.data
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect()
}

/// Binary (P5) PGM bytes, rows top to bottom.
pub fn pgm_bytes(grid: &ImageGrid) -> Result<Vec<u8>> {
    if grid.width * grid.height != grid.data.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.width * grid.height,
            actual: grid.data.len(),
        });
    }
    let mut out = format!("P5\n{} {}\n255\n", grid.width, grid.height).into_bytes();
    out.extend(quantize(grid));
    Ok(out)
}

pub fn write_pgm(grid: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let bytes = pgm_bytes(grid)?;
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&bytes)?;
    f.flush()?;
    Ok(())
}

/// Parses a P5 image with maxval 255 into `(width, height, pixels)`.
pub fn read_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |m: &str| Error::InvalidParameter(format!("malformed PGM: {m}"));
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("magic is not P5"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("non-numeric header field"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(bad("maxval must be 255"));
    }
    let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?;
    if data.len() != w * h {
        return Err(bad("raster size does not match header"));
    }
    Ok((w, h, data.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format() {
        assert_eq!(sci6(0.217585), "2.17585e-01");
        assert_eq!(sci6(1.0), "1.00000e+00");
        assert_eq!(sci6(-1.32618e-4), "-1.32618e-04");
        assert_eq!(sci6(0.0), "0.00000e+00");
        assert_eq!(sci6(6.02e123), "6.02000e+123");
        assert_eq!(Cell::Order(Some(0.996)).render(), "1.00");
        assert_eq!(Cell::Order(None).render(), "-");
    }

    #[test]
    fn header_only_table() {
        let t = Table::new(["h", "err"]);
        assert_eq!(t.to_csv_string(), "h,err\n");
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut t = Table::new(["a", "b"]);
        assert!(t.push(vec![Cell::Int(1)]).is_err());
    }

    #[test]
    fn pgm_cases() {
        let g = ImageGrid {
            width: 2,
            height: 2,
            data: vec![0.0, 1.0, 1.0, 0.0],
        };
        let b = pgm_bytes(&g).unwrap();
        assert_eq!(&b[..11], b"P5\n2 2\n255\n");
        assert_eq!(&b[11..], &[0, 255, 255, 0]);
        assert_eq!(read_pgm(&b).unwrap(), (2, 2, vec![0, 255, 255, 0]));

        let c = ImageGrid {
            width: 3,
            height: 1,
            data: vec![0.7; 3],
        };
        assert_eq!(quantize(&c), vec![0, 0, 0]);

        let big = ImageGrid {
            width: 129,
            height: 129,
            data: vec![0.0; 129 * 129],
        };
        assert!(pgm_bytes(&big).unwrap().starts_with(b"P5\n129 129\n255\n"));
        assert!(read_pgm(b"P6\n1 1\n255\n\0").is_err());
    }
}
