//! Matrix Market coordinate files (real/integer, general/symmetric) and
//! plain-text vectors.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numkit::SparseMatrix;

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse {
            line: 1,
            msg: "missing %%MatrixMarket matrix header".into(),
        });
    }
    if fields[2] != "coordinate" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported format '{}'", fields[2]),
        });
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported field '{}'", fields[3]),
        });
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unsupported symmetry '{other}'"),
            })
        }
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Error::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(bad("expected 'rows cols nnz'"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| bad("bad size line"));
                size = Some((p(parts[0])?, p(parts[1])?, p(parts[2])?));
                triplets.reserve(p(parts[2])?);
            }
            Some((rows, cols, _)) => {
                if parts.len() != 3 {
                    return Err(bad("expected 'row col value'"));
                }
                let i: usize = parts[0].parse().map_err(|_| bad("bad row index"))?;
                let j: usize = parts[1].parse().map_err(|_| bad("bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| bad("bad value"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(bad("index out of range"));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or(Error::Parse {
        line: 1,
        msg: "missing size line".into(),
    })?;
    let stored = if symmetric {
        triplets.iter().filter(|(i, j, _)| i <= j).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(Error::Parse {
            line: 2,
            msg: format!("header announces {nnz} entries, found {stored}"),
        });
    }
    SparseMatrix::from_triplets(&triplets, rows, cols)
}

/// Serializes as `coordinate real general` with 17 significant digits.
pub fn to_matrix_market(a: &SparseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", a.n_rows(), a.n_cols(), a.nnz()));
    for i in 0..a.n_rows() {
        for (j, v) in a.row(i) {
            out.push_str(&format!("{} {} {:.16e}\n", i + 1, j + 1, v));
        }
    }
    out
}

/// Reads whitespace-separated numbers. `%` comment lines are skipped, as is
/// the size line of a Matrix Market `array` file.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut array_header = false;
    let mut size_skipped = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.to_lowercase().starts_with("%%matrixmarket") {
            array_header = true;
            continue;
        }
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if array_header && !size_skipped {
            size_skipped = true;
            continue;
        }
        for tok in line.split_whitespace() {
            out.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("bad number '{tok}'"),
            })?);
        }
    }
    Ok(out)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}
