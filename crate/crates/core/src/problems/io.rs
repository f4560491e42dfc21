//! Data-file loaders: numeric CSV and svmlight/libsvm.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vecmath::DenseMatrix;

/// Reads a rectangular numeric CSV into a feature matrix plus a label vector
/// extracted from `label_column` (0-based). A single non-numeric first row is
/// treated as a header and skipped.
pub fn load_csv(path: &Path, label_column: usize) -> Result<(DenseMatrix, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let p = path.display().to_string();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let mut parsed = Vec::with_capacity(fields.len());
        let mut bad_col = None;
        for (ci, f) in fields.iter().enumerate() {
            match f.trim().parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    bad_col = Some(ci);
                    break;
                }
            }
        }
        if let Some(ci) = bad_col {
            // a non-numeric first row is a header
            if lineno == 0 && rows.is_empty() {
                continue;
            }
            return Err(Error::ParseError {
                path: p,
                row: lineno + 1,
                col: Some(ci + 1),
                msg: format!("non-numeric cell {:?}", fields[ci].trim()),
            });
        }
        match width {
            None => width = Some(parsed.len()),
            Some(w) if w != parsed.len() => {
                return Err(Error::RaggedRows {
                    path: p,
                    row: lineno + 1,
                    got: parsed.len(),
                    expected: w,
                })
            }
            _ => {}
        }
        rows.push(parsed);
    }
    let width = width.ok_or_else(|| Error::ParseError {
        path: p.clone(),
        row: 0,
        col: None,
        msg: "empty file".into(),
    })?;
    if label_column >= width {
        return Err(Error::ParseError {
            path: p,
            row: 1,
            col: Some(label_column + 1),
            msg: format!("label column {label_column} out of range, width {width}"),
        });
    }
    let mut labels = Vec::with_capacity(rows.len());
    let mut feats = Vec::with_capacity(rows.len());
    for mut row in rows {
        labels.push(row.remove(label_column));
        feats.push(row);
    }
    Ok((DenseMatrix::from_rows(feats), labels))
}

/// Reads a rectangular numeric CSV as a bare matrix (no label column).
pub fn load_matrix_csv(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let p = path.display().to_string();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parsed = Vec::new();
        for (ci, f) in line.split(',').enumerate() {
            match f.trim().parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) if lineno == 0 && rows.is_empty() => {
                    parsed.clear();
                    break; // header row
                }
                Err(_) => {
                    return Err(Error::ParseError {
                        path: p,
                        row: lineno + 1,
                        col: Some(ci + 1),
                        msg: format!("non-numeric cell {:?}", f.trim()),
                    })
                }
            }
        }
        if parsed.is_empty() {
            continue;
        }
        match width {
            None => width = Some(parsed.len()),
            Some(w) if w != parsed.len() => {
                return Err(Error::RaggedRows {
                    path: p,
                    row: lineno + 1,
                    got: parsed.len(),
                    expected: w,
                })
            }
            _ => {}
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::ParseError {
            path: p,
            row: 0,
            col: None,
            msg: "empty file".into(),
        });
    }
    Ok(DenseMatrix::from_rows(rows))
}

/// Reads an svmlight-format file (`label idx:val idx:val ...`, 1-based
/// strictly ascending indices) into a dense matrix plus {-1, +1} labels.
/// Labels given as 0/1 are mapped to -1/+1.
pub fn load_libsvm(path: &Path) -> Result<(DenseMatrix, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let p = path.display().to_string();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_idx = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label_tok = parts.next().expect("nonempty line");
        let raw: f64 = label_tok.parse().map_err(|_| Error::ParseError {
            path: p.clone(),
            row: lineno + 1,
            col: Some(1),
            msg: format!("bad label {label_tok:?}"),
        })?;
        let label = match raw {
            v if v == 1.0 => 1.0,
            v if v == -1.0 => -1.0,
            v if v == 0.0 => -1.0, // 0/1 convention
            v => {
                return Err(Error::ParseError {
                    path: p,
                    row: lineno + 1,
                    col: Some(1),
                    msg: format!("label {v} is not in {{-1, 0, +1}}"),
                })
            }
        };
        let mut entries = Vec::new();
        let mut prev_idx = 0usize;
        for tok in parts {
            let (is, vs) = tok.split_once(':').ok_or_else(|| Error::ParseError {
                path: p.clone(),
                row: lineno + 1,
                col: None,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: usize = is.parse().map_err(|_| Error::ParseError {
                path: p.clone(),
                row: lineno + 1,
                col: None,
                msg: format!("bad index {is:?}"),
            })?;
            let val: f64 = vs.parse().map_err(|_| Error::ParseError {
                path: p.clone(),
                row: lineno + 1,
                col: None,
                msg: format!("bad value {vs:?}"),
            })?;
            if idx == 0 || idx <= prev_idx {
                return Err(Error::NonAscendingIndex {
                    path: p,
                    row: lineno + 1,
                    index: idx,
                    prev: prev_idx,
                });
            }
            prev_idx = idx;
            max_idx = max_idx.max(idx);
            entries.push((idx - 1, val));
        }
        labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::ParseError {
            path: p,
            row: 0,
            col: None,
            msg: "empty file".into(),
        });
    }
    let mut m = DenseMatrix::zeros(rows.len(), max_idx);
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            m.set(i, j, v);
        }
    }
    Ok((m, labels))
}

/// Writes a numeric matrix (with an optional label column appended) as CSV
/// with LF line endings. Values print in shortest round-trip form, so the
/// same data always serializes to the same bytes.
pub fn write_csv(path: &Path, matrix: &DenseMatrix, labels: Option<&[f64]>) -> Result<()> {
    let mut out = String::new();
    for i in 0..matrix.rows() {
        let mut first = true;
        for v in matrix.row(i) {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        if let Some(ls) = labels {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{}", ls[i]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
