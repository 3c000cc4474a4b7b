//! MacKay alist format.
//!
//! ```text
//! n_cols n_rows
//! max_col_degree max_row_degree
//! <n_cols column degrees>
//! <n_rows row degrees>
//! <n_cols lines: 1-based row indices per column, zero-padded>
//! <n_rows lines: 1-based column indices per row, zero-padded>
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::ParityCheckMatrix;
use crate::{Error, Result};

pub fn load_alist(path: impl AsRef<Path>) -> Result<ParityCheckMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_alist(&text, path)
}

pub fn save_alist(h: &ParityCheckMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_alist(h)).map_err(|e| Error::io(path, e))
}

pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let cols: Vec<&[usize]> = (0..h.n_cols()).map(|c| h.col(c)).collect();
    let rows: Vec<&[usize]> = h.rows().iter().map(Vec::as_slice).collect();
    let max_col = cols.iter().map(|c| c.len()).max().unwrap_or(0);
    let max_row = rows.iter().map(|r| r.len()).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{} {}", h.n_cols(), h.n_rows());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(cols.iter().map(|c| c.len())));
    let _ = writeln!(out, "{}", join(rows.iter().map(|r| r.len())));
    for (lists, width) in [(&cols, max_col), (&rows, max_row)] {
        for list in lists.iter() {
            let padded = list
                .iter()
                .map(|&i| i + 1)
                .chain(std::iter::repeat(0))
                .take(width);
            let _ = writeln!(out, "{}", join(padded));
        }
    }
    out
}

fn join(it: impl Iterator<Item = usize>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    path: PathBuf,
    last: usize,
}

impl Lines<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    /// Next non-blank line as integers, with its 1-based line number.
    fn numbers(&mut self) -> Result<(usize, Vec<usize>)> {
        loop {
            let Some((i, text)) = self.inner.next() else {
                return Err(self.err(self.last + 1, "unexpected end of file"));
            };
            self.last = i + 1;
            if text.trim().is_empty() {
                continue;
            }
            let values = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| self.err(i + 1, format!("not a count or index: {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, values));
        }
    }

    fn exact(&mut self, n: usize, what: &str) -> Result<(usize, Vec<usize>)> {
        let (line, v) = self.numbers()?;
        if v.len() != n {
            return Err(self.err(line, format!("expected {n} {what}, found {}", v.len())));
        }
        Ok((line, v))
    }

    /// One adjacency line: `degree` 1-based indices below `bound`, then zero padding.
    fn adjacency(&mut self, degree: usize, bound: usize) -> Result<Vec<usize>> {
        let (line, v) = self.numbers()?;
        if v.len() < degree {
            return Err(self.err(line, format!("expected {degree} indices, found {}", v.len())));
        }
        let (idx, pad) = v.split_at(degree);
        if pad.iter().any(|&p| p != 0) {
            return Err(self.err(line, "more nonzero indices than the declared degree"));
        }
        idx.iter()
            .map(|&i| {
                if i == 0 || i > bound {
                    Err(self.err(line, format!("index {i} outside 1..={bound}")))
                } else {
                    Ok(i - 1)
                }
            })
            .collect()
    }
}

/// Parses alist text; `path` is only used in error messages.
pub fn parse_alist(text: &str, path: impl AsRef<Path>) -> Result<ParityCheckMatrix> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
        path: path.as_ref().to_path_buf(),
        last: 0,
    };
    let (_, dims) = lines.exact(2, "dimensions")?;
    let (n_cols, n_rows) = (dims[0], dims[1]);
    let (line, max) = lines.exact(2, "maximum degrees")?;
    let (col_deg_line, col_deg) = lines.exact(n_cols, "column degrees")?;
    let (row_deg_line, row_deg) = lines.exact(n_rows, "row degrees")?;
    if col_deg.iter().max().copied().unwrap_or(0) > max[0] {
        return Err(lines.err(col_deg_line, "column degree above declared maximum"));
    }
    if row_deg.iter().max().copied().unwrap_or(0) > max[1] {
        return Err(lines.err(row_deg_line, "row degree above declared maximum"));
    }
    if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
        return Err(lines.err(line, "column and row degrees count different edge totals"));
    }

    let mut cols = Vec::with_capacity(n_cols);
    for &d in &col_deg {
        let mut c = lines.adjacency(d, n_rows)?;
        c.sort_unstable();
        cols.push(c);
    }
    let mut rows = Vec::with_capacity(n_rows);
    for &d in &row_deg {
        rows.push(lines.adjacency(d, n_cols)?);
    }
    let end = lines.last;

    let h = ParityCheckMatrix::new(n_cols, rows).map_err(|e| lines.err(end, e.to_string()))?;
    if (0..n_cols).any(|c| h.col(c) != cols[c].as_slice()) {
        return Err(lines.err(end, "column lists disagree with row lists"));
    }
    Ok(h)
}
