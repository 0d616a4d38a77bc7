//! Tokenization, normalization, annotated-document parsing, vocabulary
//! construction and sliding-window segmentation.

mod annotate;
mod tokenize;
mod vocab;
mod window;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use annotate::{
    entity_spans, parse_annotated, read_conll, serialize_annotated, write_conll, AnnotatedDocument,
    ConllDocument, EntitySpan,
};
pub use tokenize::{normalize, tokenize, Token};
pub use vocab::{Vocabulary, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};
pub use window::{slide_windows, window_starts, Window, DEFAULT_WINDOW_LEN};

use crate::labels::LabelSchema;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("unbalanced PHI tag at byte {offset}")]
    UnbalancedTag { offset: usize },
    #[error("unknown PHI category `{category}` at byte {offset}")]
    UnknownCategory { category: String, offset: usize },
    #[error("nested PHI tag at byte {offset}")]
    NestedTag { offset: usize },
    #[error("malformed PHI tag at byte {offset}")]
    MalformedTag { offset: usize },
    #[error("malformed token/label line at byte {offset}")]
    MalformedConll { offset: usize },
    #[error("unknown label {label:?} at byte {offset}")]
    UnknownConllLabel { label: String, offset: usize },
    #[error("corpus contains no tokens")]
    EmptyCorpus,
}

/// A document-level failure while loading a corpus from disk.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: CorpusError },
}

/// Annotated `.txt` files under `path` (or `path` itself if it is a file),
/// sorted by file name. The document id is the file stem.
pub fn corpus_files(path: &Path) -> Result<Vec<PathBuf>, LoadError> {
    let io = |source| LoadError::Io { path: path.to_path_buf(), source };
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(io)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_corpus(path: &Path, schema: &LabelSchema) -> Result<Vec<AnnotatedDocument>, LoadError> {
    corpus_files(path)?
        .into_iter()
        .map(|file| {
            let raw = std::fs::read_to_string(&file)
                .map_err(|source| LoadError::Io { path: file.clone(), source })?;
            let doc_id = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            parse_annotated(&doc_id, &raw, schema)
                .map_err(|source| LoadError::Parse { path: file.clone(), source })
        })
        .collect()
}
