//! Clinical text de-identification: corpus handling, CBOW embeddings, an
//! LSTM window tagger, window merging and token-level scoring.

pub mod corpus;
pub mod embeddings;
pub mod evalmerge;
pub mod labels;
pub mod rng;
pub mod seqlabel;
pub mod synth;

pub use corpus::{AnnotatedDocument, CorpusError, Token, Vocabulary, Window};
pub use embeddings::{ComposedLookup, EmbeddingError, EmbeddingModel, VectorSource};
pub use evalmerge::{Counts, EvalError, EvalReport, MatchMode, WindowPrediction};
pub use labels::{Category, LabelError, LabelId, LabelKind, LabelSchema, Position, CODE_WIDTH};
pub use seqlabel::{LstmTagger, TaggerConfig, TaggerError};
pub use synth::{GenConfig, SynthDocument};
