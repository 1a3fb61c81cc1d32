//! Dataset loaders.
//!
//! Dense CSV: one point per row, `d` feature columns followed by a label
//! column in {-1, +1}. No header; lines starting with `#` are comments.
//!
//! Sparse: `<label> <index>:<value> <index>:<value> ...` per line, indices
//! 1-based and strictly increasing, whitespace separated. Blank lines and
//! `#` comments (full-line or trailing) are ignored. Omitted indices are zero.
//! See `docs/formats.md` for the full grammar.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::{Dataset, Label, LabeledPoint};
use crate::error::{Error, Result};

fn parse_label(tok: &str, line: usize) -> Result<Label> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad label {tok:?}") })?;
    if v == 1.0 {
        Ok(Label::Pos)
    } else if v == -1.0 {
        Ok(Label::Neg)
    } else {
        Err(Error::InvalidLabel(tok.to_string()))
    }
}

fn point(x: Vec<f64>, y: Label, line: usize) -> Result<LabeledPoint> {
    LabeledPoint::new(x, y).map_err(|e| match e {
        Error::ZeroVector => Error::Parse { line, msg: "zero feature vector".into() },
        other => other,
    })
}

pub fn read_dense_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() < 2 {
            return Err(Error::Parse { line, msg: "need at least one feature and a label".into() });
        }
        let x = rec
            .iter()
            .take(rec.len() - 1)
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad feature {f:?}") }))
            .collect::<Result<Vec<_>>>()?;
        let y = parse_label(&rec[rec.len() - 1], line)?;
        points.push(point(x, y, line)?);
    }
    Dataset::new(points)
}

/// Label, `(index, value)` pairs and source line.
type SparseRow = (Label, Vec<(usize, f64)>, usize);

/// Parses the sparse format. `dim` fixes the dimension; otherwise the
/// largest index seen is used.
pub fn read_sparse<R: BufRead>(reader: R, dim: Option<usize>) -> Result<Dataset> {
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut max_index = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let y = parse_label(toks.next().unwrap(), lineno)?;
        let mut feats = Vec::new();
        let mut last = 0;
        for tok in toks {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: lineno, msg: format!("expected index:value, got {tok:?}") })?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad index {idx:?}") })?;
            let val: f64 = val
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad value {val:?}") })?;
            if idx == 0 || idx <= last {
                return Err(Error::Parse { line: lineno, msg: format!("indices must be 1-based and increasing, got {idx}") });
            }
            last = idx;
            feats.push((idx, val));
        }
        max_index = max_index.max(last);
        rows.push((y, feats, lineno));
    }
    let dim = match dim {
        Some(d) if d < max_index => {
            return Err(Error::DimensionMismatch { expected: d, found: max_index });
        }
        Some(d) => d,
        None => max_index,
    };
    let mut points = Vec::with_capacity(rows.len());
    for (y, feats, lineno) in rows {
        let mut x = vec![0.0; dim];
        for (idx, val) in feats {
            x[idx - 1] = val;
        }
        points.push(point(x, y, lineno)?);
    }
    Dataset::new(points)
}

pub fn load_dense_csv(path: &Path) -> Result<Dataset> {
    read_dense_csv(open(path)?)
}

pub fn load_sparse(path: &Path, dim: Option<usize>) -> Result<Dataset> {
    read_sparse(BufReader::new(open(path)?), dim)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::DatasetUnavailable(path.to_path_buf()),
        _ => e.into(),
    })
}
