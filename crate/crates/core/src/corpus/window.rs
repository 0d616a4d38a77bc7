use std::ops::Range;
use std::sync::Arc;

use super::annotate::{entity_spans, AnnotatedDocument};
use super::vocab::{Vocabulary, PAD_ID};
use crate::labels::{LabelId, LabelSchema};

pub const DEFAULT_WINDOW_LEN: usize = 15;

/// A fixed-length slice of a document, padded past its end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub doc_id: Arc<str>,
    /// Index of the source document in the corpus it was cut from.
    pub doc_index: usize,
    /// Position of the first token in the document.
    pub start: usize,
    /// Number of real (non-padding) positions, `<= input_ids.len()`.
    pub filled: usize,
    pub input_ids: Vec<u32>,
    pub label_ids: Vec<LabelId>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.input_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input_ids.is_empty()
    }

    /// Document positions of the real tokens in this window.
    pub fn token_indices(&self) -> Range<usize> {
        self.start..self.start + self.filled
    }
}

/// Start positions of the windows covering a document of `len` tokens.
///
/// Starts advance by `stride`; when the stride does not land exactly on the
/// last full window, one extra window ending at the document's last token is
/// added so every token is covered.
pub fn window_starts(len: usize, n: usize, stride: usize) -> Vec<usize> {
    assert!(n >= 1 && stride >= 1, "window length and stride must be positive");
    if len <= n {
        return vec![0];
    }
    let last = len - n;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// Cuts a document into windows of `n` tokens. Entities not fully inside a
/// window have their in-window labels rewritten to `O`.
pub fn slide_windows(
    doc: &AnnotatedDocument,
    doc_index: usize,
    vocab: &Vocabulary,
    schema: &LabelSchema,
    n: usize,
    stride: usize,
) -> Vec<Window> {
    let doc_id: Arc<str> = Arc::from(doc.doc_id.as_str());
    let ids = vocab.encode(doc.token_texts());
    let entities = entity_spans(&doc.labels, schema);
    let m = doc.len();

    window_starts(m, n, stride)
        .into_iter()
        .map(|start| {
            let end = (start + n).min(m);
            let mut input_ids = ids[start..end].to_vec();
            let mut label_ids = doc.labels[start..end].to_vec();
            for e in &entities {
                let overlaps = e.start < end && e.end > start;
                let contained = e.start >= start && e.end <= end;
                if overlaps && !contained {
                    for pos in e.start.max(start)..e.end.min(end) {
                        label_ids[pos - start] = schema.outside();
                    }
                }
            }
            let filled = end - start;
            input_ids.resize(n, PAD_ID);
            label_ids.resize(n, schema.outside());
            Window { doc_id: doc_id.clone(), doc_index, start, filled, input_ids, label_ids }
        })
        .collect()
}
