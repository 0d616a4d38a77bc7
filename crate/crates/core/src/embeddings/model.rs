use super::EmbeddingError;
use crate::corpus::{Vocabulary, PAD_ID, UNK_ID};

/// Vocabulary plus dense input (projection) and output vectors.
///
/// Models read from a vector file carry only input vectors; `output` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) vocab: Vocabulary,
    pub(crate) dim: usize,
    pub(crate) input: Vec<f64>,
    pub(crate) output: Vec<f64>,
}

impl EmbeddingModel {
    pub(crate) fn new(vocab: Vocabulary, dim: usize, input: Vec<f64>, output: Vec<f64>) -> Self {
        debug_assert_eq!(input.len(), vocab.len() * dim);
        debug_assert!(output.is_empty() || output.len() == input.len());
        EmbeddingModel { vocab, dim, input, output }
    }

    /// Builds an input-only model from explicit `(word, vector)` rows. Words
    /// are stored verbatim; reserved rows missing from the input get zeros.
    pub fn from_vectors<I>(rows: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let (words, vectors): (Vec<String>, Vec<Vec<f64>>) = rows.into_iter().unzip();
        let dim = vectors.first().map(Vec::len).ok_or(EmbeddingError::DimZero)?;
        if dim == 0 {
            return Err(EmbeddingError::DimZero);
        }
        let (vocab, ids) = Vocabulary::from_words(words.iter().cloned());
        let mut input = vec![0.0; vocab.len() * dim];
        for (line, ((word, vector), id)) in words.iter().zip(&vectors).zip(ids).enumerate() {
            if vector.len() != dim {
                return Err(EmbeddingError::RowDimMismatch { line: line + 1, expected: dim, found: vector.len() });
            }
            let id = id.ok_or_else(|| EmbeddingError::DuplicateWord { line: line + 1, word: word.clone() })?;
            input[id as usize * dim..(id as usize + 1) * dim].copy_from_slice(vector);
        }
        Ok(EmbeddingModel::new(vocab, dim, input, Vec::new()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, id: u32) -> &[f64] {
        let at = id as usize * self.dim;
        &self.input[at..at + self.dim]
    }

    pub fn output_vector(&self, id: u32) -> Option<&[f64]> {
        let at = id as usize * self.dim;
        self.output.get(at..at + self.dim)
    }

    pub fn input_matrix(&self) -> &[f64] {
        &self.input
    }

    pub fn output_matrix(&self) -> &[f64] {
        &self.output
    }

    /// Id of a real (non-reserved) word: exact match first, then normalized.
    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.vocab.get(word).filter(|&id| id != UNK_ID && id != PAD_ID)
    }

    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.word_id(word).map(|id| self.vector(id))
    }

    pub fn unk_vector(&self) -> &[f64] {
        self.vector(UNK_ID)
    }
}
