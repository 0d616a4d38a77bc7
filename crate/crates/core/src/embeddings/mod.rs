//! Word embeddings: CBOW training with negative sampling, word2vec text I/O,
//! analogy evaluation, the data-size quality study and two-source lookup.

mod analogy;
mod cbow;
mod compose;
mod io;
mod model;
pub mod stats;
mod study;

use thiserror::Error;

pub use analogy::{
    analogy, analogy_quality, cosine, parse_questions, AnalogyQuality, AnalogyQuestion,
};
pub use cbow::{train_cbow, train_cbow_on_documents, CbowConfig, CbowExample, NegativeSampler};
pub use compose::{ComposedLookup, SourceCounts, VectorSource};
pub use io::{load_text, read_text, save_text, write_text};
pub use model::EmbeddingModel;
pub use study::{datasize_study, ModelSummary, PairComparison, StudyConfig, StudyReport};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("corpus contains no trainable positions")]
    EmptyCorpus,
    #[error("vector dimension must be positive")]
    DimZero,
    #[error("cosine of an all-zero vector")]
    ZeroVector,
    #[error("`{0}` is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("no analogy question is answerable by the model")]
    NoAnswerableQuestions,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: expected {expected} values, found {found}")]
    RowDimMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: bad number `{value}`")]
    BadNumber { line: usize, value: String },
    #[error("line {line}: duplicate word `{word}`")]
    DuplicateWord { line: usize, word: String },
    #[error("header declares {expected} words, file has {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("question line {line}: expected four words")]
    MalformedQuestion { line: usize },
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
