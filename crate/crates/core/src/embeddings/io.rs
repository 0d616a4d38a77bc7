//! word2vec text format: a `count dim` header, then `word v1 … vd` per line.
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every stored `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{EmbeddingError, EmbeddingModel};

pub fn write_text<W: Write>(model: &EmbeddingModel, mut out: W) -> Result<(), EmbeddingError> {
    writeln!(out, "{} {}", model.len(), model.dim())?;
    for (id, word) in model.vocab().words().iter().enumerate() {
        out.write_all(word.as_bytes())?;
        for v in model.vector(id as u32) {
            write!(out, " {v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_text(model: &EmbeddingModel, path: &Path) -> Result<(), EmbeddingError> {
    write_text(model, BufWriter::new(File::create(path)?))
}

pub fn read_text<R: BufRead>(input: R) -> Result<EmbeddingModel, EmbeddingError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| EmbeddingError::MalformedHeader("empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse = |s: &str| s.parse::<usize>().ok();
    let (count, dim) = match fields[..] {
        [c, d] => match (parse(c), parse(d)) {
            (Some(c), Some(d)) => (c, d),
            _ => return Err(EmbeddingError::MalformedHeader(header.clone())),
        },
        _ => return Err(EmbeddingError::MalformedHeader(header.clone())),
    };
    if dim == 0 {
        return Err(EmbeddingError::DimZero);
    }

    let mut rows = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ').filter(|s| !s.is_empty());
        let word = parts.next().unwrap_or_default().to_string();
        let values = parts
            .map(|s| s.parse::<f64>().map_err(|_| EmbeddingError::BadNumber { line: lineno, value: s.into() }))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != dim {
            return Err(EmbeddingError::RowDimMismatch { line: lineno, expected: dim, found: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(EmbeddingError::BadNumber { line: lineno, value: bad.to_string() });
        }
        rows.push((word, values));
    }
    if rows.len() != count {
        return Err(EmbeddingError::CountMismatch { expected: count, found: rows.len() });
    }
    // from_vectors reports 1-based row numbers; shift past the header.
    EmbeddingModel::from_vectors(rows).map_err(|e| match e {
        EmbeddingError::DuplicateWord { line, word } => EmbeddingError::DuplicateWord { line: line + 1, word },
        other => other,
    })
}

pub fn load_text(path: &Path) -> Result<EmbeddingModel, EmbeddingError> {
    read_text(BufReader::new(File::open(path)?))
}
