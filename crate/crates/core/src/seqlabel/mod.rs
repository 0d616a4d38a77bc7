//! Single-layer unidirectional LSTM window tagger with a per-step dense head.

mod adam;
mod checkpoint;
mod lstm;
mod params;
mod split;
mod train;

use rand::Rng;
use thiserror::Error;

pub use adam::Adam;
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CheckpointError};
pub use lstm::{
    backward, backward_into, bce_loss, cross_entropy_loss, forward, loss, lstm_step, ForwardCache, OutputMode,
    PROB_CLAMP,
};
pub use params::{Gate, LstmDims, LstmParams};
pub use split::{SplitFractions, SplitMode, TrainSplit};
pub use train::{evaluate, train, train_with, EpochReport, Evaluation, TrainOutcome, TrainingData};

use crate::corpus::{slide_windows, AnnotatedDocument};
use crate::embeddings::ComposedLookup;
use crate::evalmerge::{merge_document, WindowPrediction};
use crate::labels::{one_hot, LabelId, LabelSchema, CODE_WIDTH};

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimMismatch { what: &'static str, expected: usize, found: usize },
    #[error("training split is empty")]
    EmptyTrainingSet,
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerConfig {
    pub hidden: usize,
    /// Window length in tokens.
    pub window: usize,
    pub stride: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub lr: f64,
    /// Weights start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub split: SplitFractions,
    pub split_mode: SplitMode,
    pub output: OutputMode,
    pub seed: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            hidden: 200,
            window: 15,
            stride: 1,
            dropout: 0.2,
            epochs: 10,
            lr: 1e-3,
            init_scale: 0.08,
            split: SplitFractions::default(),
            split_mode: SplitMode::Windows,
            output: OutputMode::SigmoidBce,
            seed: 1,
        }
    }
}

/// Trained (or freshly initialized) tagger with its optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTagger {
    pub params: LstmParams,
    pub window: usize,
    pub dropout: f64,
    pub output: OutputMode,
    pub schema_fingerprint: u64,
    pub optimizer: Adam,
}

impl LstmTagger {
    pub fn new(input_dim: usize, config: &TaggerConfig, schema: &LabelSchema) -> Self {
        let dims = LstmDims { input: input_dim, hidden: config.hidden, labels: CODE_WIDTH };
        let params = LstmParams::init(dims, config.init_scale, config.seed);
        LstmTagger {
            optimizer: Adam::new(dims.param_count(), config.lr),
            params,
            window: config.window,
            dropout: config.dropout,
            output: config.output,
            schema_fingerprint: schema.fingerprint(),
        }
    }

    pub fn dims(&self) -> LstmDims {
        self.params.dims()
    }

    /// Inference-mode probabilities (`steps × 17`) for one window of vectors.
    pub fn probabilities(&self, xs: &[f64]) -> Result<Vec<f64>, TaggerError> {
        Ok(forward(&self.params, xs, None, self.output)?.into_probs())
    }

    /// Inverted-dropout mask for `steps` positions, or `None` when dropout is off.
    pub fn dropout_mask(&self, steps: usize, rng: &mut impl Rng) -> Option<Vec<f64>> {
        if self.dropout <= 0.0 {
            return None;
        }
        let keep = 1.0 - self.dropout;
        let scale = 1.0 / keep;
        Some(
            (0..steps * self.dims().hidden)
                .map(|_| if rng.gen::<f64>() < self.dropout { 0.0 } else { scale })
                .collect(),
        )
    }

    /// Decoded labels for every window of `doc`.
    pub fn predict(
        &self,
        doc: &AnnotatedDocument,
        lookup: &mut ComposedLookup<'_>,
        schema: &LabelSchema,
        stride: usize,
    ) -> Result<Vec<WindowPrediction>, TaggerError> {
        let d = self.dims().input;
        if lookup.dim() != d {
            return Err(TaggerError::DimMismatch { what: "embeddings", expected: d, found: lookup.dim() });
        }
        let vectors = document_vectors(doc, lookup);
        let windows = slide_windows(doc, 0, lookup.primary().vocab(), schema, self.window, stride);
        let mut xs = Vec::new();
        windows
            .iter()
            .map(|w| {
                window_inputs(&vectors, d, w.start, w.filled, self.window, &mut xs);
                let probs = self.probabilities(&xs)?;
                let labels = probs.chunks_exact(CODE_WIDTH).map(|p| schema.decode_id(p)).collect();
                Ok(WindowPrediction { start: w.start, filled: w.filled, labels })
            })
            .collect()
    }

    /// Per-token labels: [`predict`](Self::predict) followed by the merge rules.
    pub fn tag(
        &self,
        doc: &AnnotatedDocument,
        lookup: &mut ComposedLookup<'_>,
        schema: &LabelSchema,
        stride: usize,
    ) -> Result<Vec<LabelId>, TaggerError> {
        if doc.is_empty() {
            return Ok(Vec::new());
        }
        let preds = self.predict(doc, lookup, schema, stride)?;
        Ok(merge_document(&preds, doc.len(), schema).expect("windows cover every token"))
    }
}

/// Row-major `len × dim` vectors for a document's tokens.
pub fn document_vectors(doc: &AnnotatedDocument, lookup: &mut ComposedLookup<'_>) -> Vec<f64> {
    let mut out = Vec::with_capacity(doc.len() * lookup.dim());
    for token in &doc.tokens {
        out.extend_from_slice(lookup.resolve(&token.text).0);
    }
    out
}

/// Fills `out` with `n` rows starting at token `start`; rows past `filled`
/// (padding) are zero.
pub(crate) fn window_inputs(vectors: &[f64], dim: usize, start: usize, filled: usize, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(&vectors[start * dim..(start + filled) * dim]);
    out.resize(n * dim, 0.0);
}

/// One-hot targets, `labels.len() × 17`.
pub fn window_targets(labels: &[LabelId]) -> Vec<f64> {
    labels.iter().flat_map(|&l| one_hot(l)).collect()
}
