//! Plain-text point-set and matrix files.
//!
//! Point sets: a header `dim=<d> count=<n>` followed by one point per line.
//! Matrices: a header `rows=<m> cols=<n>` followed by one row per line.
//! Values are whitespace separated and written with Rust's shortest
//! round-trip float formatting, so write-then-read is bit exact.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::PointSet;
use crate::{Error, Result};

fn parse_header(line: &str, line_no: usize, keys: [&str; 2]) -> Result<[usize; 2]> {
    let mut out = [None, None];
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected key=value, found `{tok}`"),
        })?;
        let slot = keys.iter().position(|&key| key == k).ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("unexpected header key `{k}`"),
        })?;
        out[slot] = Some(v.parse::<usize>().map_err(|e| Error::Parse {
            line: line_no,
            msg: format!("bad value for `{k}`: {e}"),
        })?);
    }
    match out {
        [Some(a), Some(b)] => Ok([a, b]),
        _ => Err(Error::Parse {
            line: line_no,
            msg: format!("header must contain `{}=` and `{}=`", keys[0], keys[1]),
        }),
    }
}

fn parse_row(line: &str, line_no: usize, width: usize, out: &mut Vec<f64>) -> Result<()> {
    let before = out.len();
    for tok in line.split_whitespace() {
        out.push(tok.parse::<f64>().map_err(|e| Error::Parse {
            line: line_no,
            msg: format!("bad number `{tok}`: {e}"),
        })?);
    }
    if out.len() - before != width {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected {width} values, found {}", out.len() - before),
        });
    }
    Ok(())
}

/// Reads a `rows=<m> cols=<n>`-style block whose header keys are `keys`.
fn read_block<R: BufRead>(
    lines: &mut std::iter::Enumerate<std::io::Lines<R>>,
    keys: [&str; 2],
    header_prefix: Option<&str>,
) -> Result<(usize, usize, Vec<f64>)> {
    let (idx, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let header = header?;
    let body = match header_prefix {
        Some(prefix) => header.strip_prefix(prefix).ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: format!("expected header starting with `{prefix}`"),
        })?,
        None => header.as_str(),
    };
    let [count, width] = parse_header(body, idx + 1, keys)?;
    let mut values = Vec::with_capacity(count * width);
    for _ in 0..count {
        let (idx, line) = lines.next().ok_or(Error::Parse {
            line: idx + 1,
            msg: format!("expected {count} data lines"),
        })?;
        parse_row(&line?, idx + 1, width, &mut values)?;
    }
    Ok((count, width, values))
}

fn write_row<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b" ")?;
        }
        let short = v.to_string();
        if short.len() > 24 {
            write!(w, "{v:e}")?;
        } else {
            w.write_all(short.as_bytes())?;
        }
        first = false;
    }
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_points<W: Write>(mut w: W, points: &PointSet) -> Result<()> {
    writeln!(w, "dim={} count={}", points.dim(), points.len())?;
    for p in points.iter() {
        write_row(&mut w, p.iter().copied())?;
    }
    Ok(())
}

pub fn read_points<R: BufRead>(r: R, label: impl Into<String>) -> Result<PointSet> {
    let mut lines = r.lines().enumerate();
    let (count, dim, coords) = read_block(&mut lines, ["count", "dim"], None)?;
    debug_assert_eq!(coords.len(), count * dim);
    PointSet::new(dim, coords, label)
}

pub fn write_matrix<W: Write>(mut w: W, a: &DMatrix<f64>) -> Result<()> {
    write_matrix_block(&mut w, None, a)
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut lines = r.lines().enumerate();
    let (m, n, values) = read_block(&mut lines, ["rows", "cols"], None)?;
    Ok(DMatrix::from_row_slice(m, n, &values))
}

/// Writes `[<name> ]rows=<m> cols=<n>` followed by the rows.
pub(crate) fn write_matrix_block<W: Write>(
    w: &mut W,
    name: Option<&str>,
    a: &DMatrix<f64>,
) -> Result<()> {
    if let Some(name) = name {
        write!(w, "{name} ")?;
    }
    writeln!(w, "rows={} cols={}", a.nrows(), a.ncols())?;
    for i in 0..a.nrows() {
        write_row(w, a.row(i).iter().copied())?;
    }
    Ok(())
}

/// Reads a sequence of named blocks, in order.
pub(crate) fn read_named_blocks<R: BufRead>(r: R, names: &[&str]) -> Result<Vec<DMatrix<f64>>> {
    let mut lines = r.lines().enumerate();
    names
        .iter()
        .map(|name| {
            let prefix = format!("{name} ");
            let (m, n, values) = read_block(&mut lines, ["rows", "cols"], Some(&prefix))?;
            Ok(DMatrix::from_row_slice(m, n, &values))
        })
        .collect()
}

pub fn save_points(path: impl AsRef<Path>, points: &PointSet) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_points(f, points)
}

pub fn load_points(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_points(f, path.display().to_string())
}

pub fn save_matrix(path: impl AsRef<Path>, a: &DMatrix<f64>) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_matrix(f, a)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_matrix(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_file_layout() {
        let p = PointSet::from_points(&[vec![0.1, 2.0], vec![-3.5, 1e-300]], "x").unwrap();
        let mut buf = Vec::new();
        write_points(&mut buf, &p).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "dim=2 count=2\n0.1 2\n-3.5 1e-300\n");
        let back = read_points(buf.as_slice(), "x").unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn matrix_header_order_is_free() {
        let a = read_matrix("cols=2 rows=1\n1 2.5\n".as_bytes()).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(1, 2, &[1.0, 2.5]));
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(read_matrix("rows=2 cols=2\n1 2\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_matrix("rows=1 cols=2\n1 x\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_points("dim=2\n".as_bytes(), ""), Err(Error::Parse { line: 1, .. })));
        assert!(read_matrix("rows=1 cols=2\n1 2 3\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn matrix_round_trip_is_bit_exact(
            (m, n, vals) in (1usize..5, 1usize..5).prop_flat_map(|(m, n)| {
                (Just(m), Just(n), proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, m * n))
            })
        ) {
            let a = DMatrix::from_row_slice(m, n, &vals);
            let mut buf = Vec::new();
            write_matrix(&mut buf, &a).unwrap();
            let back = read_matrix(buf.as_slice()).unwrap();
            let bits = |x: &DMatrix<f64>| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&a));
        }
    }
}
