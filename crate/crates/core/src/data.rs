//! Row-major point matrix and headerless numeric CSV I/O.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// `m` points in `d` dimensions stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    m: usize,
    d: usize,
}

impl DataMatrix {
    /// Builds a matrix from a flat row-major buffer. Rejects empty input,
    /// ragged lengths and non-finite components.
    pub fn from_flat(values: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Data("dimension must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::Data("no rows".into()));
        }
        if !values.len().is_multiple_of(d) {
            return Err(Error::Data(format!(
                "buffer length {} is not a multiple of dimension {d}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        let m = values.len() / d;
        Ok(Self { values, m, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Data("no rows".into()))?;
        let d = first.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(values, d)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }
}

/// Formats a value with 17 significant digits so it parses back bit-exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses headerless comma-separated numeric text. With `strip_label` the
/// last column is returned separately as integer labels.
pub fn parse_csv(text: &str, strip_label: bool) -> Result<(DataMatrix, Option<Vec<i64>>)> {
    let mut values = Vec::new();
    let mut labels = strip_label.then(Vec::new);
    let mut width: Option<usize> = None;
    let mut row = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let n = cells.len();
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(Error::Parse {
                    row,
                    column: n.min(w),
                    message: format!("expected {w} columns, found {n}"),
                })
            }
            _ => {}
        }
        let feature_cols = if strip_label { n - 1 } else { n };
        if feature_cols == 0 {
            return Err(Error::Parse {
                row,
                column: 0,
                message: "no feature columns".into(),
            });
        }
        for (column, cell) in cells[..feature_cols].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            values.push(v);
        }
        if let Some(labels) = labels.as_mut() {
            let cell = cells[n - 1];
            let label = cell
                .parse::<i64>()
                .or_else(|_| {
                    cell.parse::<f64>()
                        .ok()
                        .filter(|f| f.fract() == 0.0)
                        .map(|f| f as i64)
                        .ok_or(())
                })
                .map_err(|_| Error::Parse {
                    row,
                    column: n - 1,
                    message: format!("label is not an integer: {cell:?}"),
                })?;
            labels.push(label);
        }
        row += 1;
    }
    let Some(w) = width else {
        return Err(Error::Data("no rows".into()));
    };
    let d = if strip_label { w - 1 } else { w };
    Ok((DataMatrix::from_flat(values, d)?, labels))
}

pub fn read_csv(path: &Path, strip_label: bool) -> Result<(DataMatrix, Option<Vec<i64>>)> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_csv(&text, strip_label)
}

/// Writes rows of a flat row-major buffer, optionally with a trailing label.
pub fn write_csv(path: &Path, flat: &[f64], d: usize, labels: Option<&[usize]>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::io(path, e);
    for (i, r) in flat.chunks_exact(d).enumerate() {
        let mut line = r.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",");
        if let Some(l) = labels {
            line.push(',');
            line.push_str(&l[i].to_string());
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// One integer per line.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for l in labels {
        writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(row, l)| {
            l.parse().map_err(|_| Error::Parse {
                row,
                column: 0,
                message: format!("not a label: {l:?}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(matches!(parse_csv("", false), Err(Error::Data(m)) if m == "no rows"));
        assert!(matches!(parse_csv("\n\n", false), Err(Error::Data(_))));
        assert!(matches!(
            parse_csv("1,2\n3\n", false),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn non_numeric_cell_names_position() {
        let err = parse_csv("1,2\n3,abc\n", false).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_csv("1,NaN\n", false).is_err());
    }

    #[test]
    fn strips_trailing_label() {
        let (m, labels) = parse_csv("0.5,1.5,3\n2,3,1\n", true).unwrap();
        assert_eq!((m.m(), m.d()), (2, 2));
        assert_eq!(m.row(1), &[2.0, 3.0]);
        assert_eq!(labels.unwrap(), vec![3, 1]);
    }

    #[test]
    fn seventeen_digit_round_trip() {
        let vals = [0.1, -1.0 / 3.0, 1e-300, 123_456_789.123_456_78, f64::MAX, -0.0];
        for v in vals {
            let back: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn from_flat_validates() {
        assert!(DataMatrix::from_flat(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(DataMatrix::from_flat(vec![1.0, f64::INFINITY], 2).is_err());
        assert!(DataMatrix::from_flat(vec![1.0], 0).is_err());
        let m = DataMatrix::from_flat(vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(m.rows().count(), 2);
    }
}
