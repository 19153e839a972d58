use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{DuplicatePolicy, SparseGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Pattern,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Storage {
    General,
    Symmetric,
}

fn parse_header(line: &str) -> Result<(Field, Storage)> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(Error::parse(
            1,
            "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(Error::UnsupportedField(format!("object `{}`", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::UnsupportedField(format!("format `{}`", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "pattern" => Field::Pattern,
        "integer" => Field::Integer,
        other => return Err(Error::UnsupportedField(format!("field `{other}`"))),
    };
    let storage = match tokens[4].as_str() {
        "general" => Storage::General,
        "symmetric" => Storage::Symmetric,
        other => return Err(Error::UnsupportedField(format!("symmetry `{other}`"))),
    };
    Ok((field, storage))
}

fn parse_index(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{token}`")))
}

/// Parses a Matrix Market coordinate stream into a canonical graph.
///
/// `pattern` duplicates collapse to weight 1, `integer` duplicates are
/// summed. `symmetric` storage always mirrors off-diagonal entries; with
/// `symmetrize` the same happens for `general` storage, otherwise a
/// `general` matrix must already be symmetric.
pub fn read_matrix_market<R: BufRead>(reader: R, symmetrize: bool) -> Result<SparseGraph> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (field, storage) = match lines.next() {
        Some((_, line)) => parse_header(&line?)?,
        None => return Err(Error::parse(1, "empty input")),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut declared = 0usize;
    let mut entries: Vec<(usize, usize, u32)> = Vec::new();
    let mut last_line = 1;

    for (lineno, line) in lines {
        let line = line?;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let Some((rows, _)) = size else {
            let rows = parse_index(tokens.next(), lineno, "row count")?;
            let cols = parse_index(tokens.next(), lineno, "column count")?;
            declared = parse_index(tokens.next(), lineno, "entry count")?;
            if tokens.next().is_some() {
                return Err(Error::parse(lineno, "trailing tokens on size line"));
            }
            if rows != cols {
                return Err(Error::parse(
                    lineno,
                    format!("adjacency matrix must be square, got {rows}x{cols}"),
                ));
            }
            size = Some((rows, cols));
            entries.reserve(declared.min(1 << 24));
            continue;
        };

        if entries.len() == declared {
            return Err(Error::parse(
                lineno,
                format!("more entries than the declared {declared}"),
            ));
        }
        let r = parse_index(tokens.next(), lineno, "row index")?;
        let c = parse_index(tokens.next(), lineno, "column index")?;
        for (idx, what) in [(r, "row"), (c, "column")] {
            if idx == 0 || idx > rows {
                return Err(Error::Bounds {
                    what,
                    index: idx,
                    limit: rows,
                });
            }
        }
        let w = match field {
            Field::Pattern => 1,
            Field::Integer => {
                let token = tokens
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "missing integer value"))?;
                let value: i64 = token
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("invalid integer `{token}`")))?;
                if value < 0 {
                    return Err(Error::parse(
                        lineno,
                        format!("negative weight {value} is not a valid adjacency entry"),
                    ));
                }
                u32::try_from(value).map_err(|_| Error::parse(lineno, format!("weight {value} exceeds u32")))?
            }
        };
        if tokens.next().is_some() {
            return Err(Error::parse(lineno, "trailing tokens on entry line"));
        }
        entries.push((r - 1, c - 1, w));
    }

    let Some((n, _)) = size else {
        return Err(Error::parse(last_line, "missing size line"));
    };
    if entries.len() != declared {
        return Err(Error::parse(
            last_line,
            format!("expected {declared} entries, found {}", entries.len()),
        ));
    }
    let policy = match field {
        Field::Pattern => DuplicatePolicy::Binary,
        Field::Integer => DuplicatePolicy::Sum,
    };
    SparseGraph::from_entries(n, entries, policy, symmetrize || storage == Storage::Symmetric)
}

pub fn load_matrix_market(path: impl AsRef<Path>, symmetrize: bool) -> Result<SparseGraph> {
    read_matrix_market(BufReader::new(File::open(path)?), symmetrize)
}

/// Writes `general` storage with both directed entries, sorted by
/// `(row, col)`. Binary graphs use the `pattern` field.
pub fn write_matrix_market<W: Write>(g: &SparseGraph, writer: W) -> Result<()> {
    write_matrix_market_with_comments(g, writer, &[])
}

/// Like [`write_matrix_market`], with `%`-prefixed comment lines after the
/// header.
pub fn write_matrix_market_with_comments<W: Write>(g: &SparseGraph, writer: W, comments: &[String]) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let binary = g.is_binary();
    let field = if binary { "pattern" } else { "integer" };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general")?;
    for c in comments {
        if c.contains('\n') {
            return Err(Error::Data("comment spans several lines".into()));
        }
        writeln!(w, "% {c}")?;
    }
    writeln!(w, "{} {} {}", g.n(), g.n(), g.nnz())?;
    for u in 0..g.n() {
        for (v, weight) in g.neighbors(u) {
            if binary {
                writeln!(w, "{} {}", u + 1, v + 1)?;
            } else {
                writeln!(w, "{} {} {}", u + 1, v + 1, weight)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix_market(g: &SparseGraph, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market(g, File::create(path)?)
}
