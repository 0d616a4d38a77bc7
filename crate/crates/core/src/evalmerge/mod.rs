//! Merging overlapping window predictions back onto tokens, token-level
//! scoring, and de-identified text rendering.

mod merge;
mod score;

use thiserror::Error;

pub use merge::{collect_votes, merge_document, merge_partial, merge_votes, LabelVotes, WindowPrediction};
pub use score::{score, score_covered, Counts, EvalReport, MacroAverage, MatchMode, ReportRow};

use crate::corpus::{AnnotatedDocument, Window};
use crate::labels::{LabelId, LabelSchema};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("token {position} is not covered by any window")]
    UncoveredToken { position: usize },
    #[error("gold has {gold} labels but prediction has {pred}")]
    LengthMismatch { gold: usize, pred: usize },
}

/// Merges the predictions of a window subset per document and scores every
/// token covered by at least one of those windows against the document's
/// original gold labels.
pub fn score_windows(
    docs: &[AnnotatedDocument],
    windows: &[&Window],
    predictions: &[WindowPrediction],
    schema: &LabelSchema,
    mode: MatchMode,
) -> EvalReport {
    let mut by_doc: Vec<Vec<WindowPrediction>> = vec![Vec::new(); docs.len()];
    for (w, p) in windows.iter().zip(predictions) {
        by_doc[w.doc_index].push(p.clone());
    }
    let mut report = EvalReport::default();
    for (doc, preds) in docs.iter().zip(&by_doc) {
        if preds.is_empty() {
            continue;
        }
        let merged = merge_partial(preds, doc.len(), schema);
        report += score_covered(&doc.labels, &merged, schema, mode).expect("merge yields one label per token");
    }
    report
}

/// Replaces predicted PHI with `[CATEGORY]`. Consecutive tokens of the same
/// category collapse into one placeholder spanning them.
pub fn deidentify(doc: &AnnotatedDocument, labels: &[LabelId], schema: &LabelSchema) -> String {
    let mut out = String::with_capacity(doc.text.len());
    let mut cursor = 0;
    let mut prev = None;
    for (token, &label) in doc.tokens.iter().zip(labels) {
        let category = schema.category(label);
        if let Some(c) = category {
            if prev != Some(c) {
                out.push_str(&doc.text[cursor..token.start]);
                out.push('[');
                out.push_str(c.tag());
                out.push(']');
            }
            cursor = token.end;
        }
        prev = category;
    }
    out.push_str(&doc.text[cursor..]);
    out
}
