use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorSource {
    Primary,
    Fallback,
    Unknown,
}

/// How many lookups each source answered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub primary: u64,
    pub fallback: u64,
    pub unknown: u64,
}

impl SourceCounts {
    pub fn total(&self) -> u64 {
        self.primary + self.fallback + self.unknown
    }

    fn record(&mut self, source: VectorSource) {
        match source {
            VectorSource::Primary => self.primary += 1,
            VectorSource::Fallback => self.fallback += 1,
            VectorSource::Unknown => self.unknown += 1,
        }
    }
}

/// Resolves words against a primary model, then an optional fallback model,
/// and finally the primary model's unknown-word vector.
#[derive(Debug, Clone)]
pub struct ComposedLookup<'a> {
    primary: &'a EmbeddingModel,
    fallback: Option<&'a EmbeddingModel>,
    counts: SourceCounts,
}

impl<'a> ComposedLookup<'a> {
    /// Fails if the fallback's dimension differs from the primary's.
    pub fn new(
        primary: &'a EmbeddingModel,
        fallback: Option<&'a EmbeddingModel>,
    ) -> Result<Self, EmbeddingError> {
        if let Some(fb) = fallback {
            if fb.dim() != primary.dim() {
                return Err(EmbeddingError::DimMismatch { expected: primary.dim(), found: fb.dim() });
            }
        }
        Ok(ComposedLookup { primary, fallback, counts: SourceCounts::default() })
    }

    pub fn dim(&self) -> usize {
        self.primary.dim()
    }

    pub fn primary(&self) -> &'a EmbeddingModel {
        self.primary
    }

    /// Resolution without touching the counters.
    pub fn peek(&self, word: &str) -> (&'a [f64], VectorSource) {
        if let Some(v) = self.primary.lookup(word) {
            return (v, VectorSource::Primary);
        }
        if let Some(v) = self.fallback.and_then(|fb| fb.lookup(word)) {
            return (v, VectorSource::Fallback);
        }
        (self.primary.unk_vector(), VectorSource::Unknown)
    }

    pub fn resolve(&mut self, word: &str) -> (&'a [f64], VectorSource) {
        let (v, source) = self.peek(word);
        self.counts.record(source);
        (v, source)
    }

    pub fn counts(&self) -> SourceCounts {
        self.counts
    }

    pub fn reset_counts(&mut self) {
        self.counts = SourceCounts::default();
    }
}
