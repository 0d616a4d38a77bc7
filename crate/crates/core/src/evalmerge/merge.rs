use super::EvalError;
use crate::labels::{LabelId, LabelSchema};

/// Labels predicted for one window, aligned with its token positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPrediction {
    pub start: usize,
    /// Number of real (non-padding) positions.
    pub filled: usize,
    pub labels: Vec<LabelId>,
}

/// Every `(label, window_start)` vote cast for one token position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelVotes {
    pub position: usize,
    pub votes: Vec<(LabelId, usize)>,
}

/// Resolves conflicting votes for one token:
///
/// 1. all votes agree: keep that label;
/// 2. a mix of `O` and PHI labels: drop the `O` votes;
/// 3. several distinct PHI labels remain: take the one with the largest code index.
///
/// Returns `None` for an empty vote set.
pub fn merge_votes(votes: &[LabelId], schema: &LabelSchema) -> Option<LabelId> {
    let first = *votes.first()?;
    if votes.iter().all(|&v| v == first) {
        return Some(first);
    }
    votes
        .iter()
        .copied()
        .filter(|&v| schema.is_phi(v))
        .max()
        .or(Some(schema.outside()))
}

impl LabelVotes {
    pub fn merge(&self, schema: &LabelSchema) -> Option<LabelId> {
        let labels: Vec<LabelId> = self.votes.iter().map(|(l, _)| *l).collect();
        merge_votes(&labels, schema)
    }
}

/// Collects votes per position; padding positions and positions at or past
/// `doc_len` are ignored.
pub fn collect_votes(predictions: &[WindowPrediction], doc_len: usize) -> Vec<LabelVotes> {
    let mut votes: Vec<LabelVotes> = (0..doc_len).map(|position| LabelVotes { position, votes: Vec::new() }).collect();
    for p in predictions {
        for (offset, &label) in p.labels.iter().take(p.filled).enumerate() {
            if let Some(slot) = votes.get_mut(p.start + offset) {
                slot.votes.push((label, p.start));
            }
        }
    }
    votes
}

/// Per-token merge, `None` where no window covers the token.
pub fn merge_partial(predictions: &[WindowPrediction], doc_len: usize, schema: &LabelSchema) -> Vec<Option<LabelId>> {
    collect_votes(predictions, doc_len).iter().map(|v| v.merge(schema)).collect()
}

/// Per-token merge over a full cover of the document.
pub fn merge_document(
    predictions: &[WindowPrediction],
    doc_len: usize,
    schema: &LabelSchema,
) -> Result<Vec<LabelId>, EvalError> {
    merge_partial(predictions, doc_len, schema)
        .into_iter()
        .enumerate()
        .map(|(position, l)| l.ok_or(EvalError::UncoveredToken { position }))
        .collect()
}
