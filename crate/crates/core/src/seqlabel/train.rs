use rand::seq::SliceRandom;

use super::lstm::{backward_into, forward, loss};
use super::params::LstmParams;
use super::split::TrainSplit;
use super::{document_vectors, window_inputs, window_targets, LstmTagger, TaggerConfig, TaggerError};
use crate::corpus::{slide_windows, AnnotatedDocument, Window};
use crate::embeddings::ComposedLookup;
use crate::evalmerge::{score_windows, EvalReport, MatchMode, WindowPrediction};
use crate::labels::{LabelSchema, CODE_WIDTH};
use crate::rng::{stream, Stage};

/// Windows of a corpus with their token vectors resolved once up front.
#[derive(Debug, Clone)]
pub struct TrainingData<'a> {
    pub docs: &'a [AnnotatedDocument],
    pub windows: Vec<Window>,
    vectors: Vec<Vec<f64>>,
    dim: usize,
    window_len: usize,
}

impl<'a> TrainingData<'a> {
    pub fn new(
        docs: &'a [AnnotatedDocument],
        lookup: &mut ComposedLookup<'_>,
        schema: &LabelSchema,
        window_len: usize,
        stride: usize,
    ) -> Self {
        let vocab = lookup.primary().vocab();
        let windows = docs
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_empty())
            .flat_map(|(i, d)| slide_windows(d, i, vocab, schema, window_len, stride))
            .collect();
        let vectors = docs.iter().map(|d| document_vectors(d, lookup)).collect();
        TrainingData { docs, windows, vectors, dim: lookup.dim(), window_len }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Input rows (`n × d`) of window `index`.
    pub fn inputs(&self, index: usize, out: &mut Vec<f64>) {
        let w = &self.windows[index];
        window_inputs(&self.vectors[w.doc_index], self.dim, w.start, w.filled, self.window_len, out);
    }

    pub fn targets(&self, index: usize) -> Vec<f64> {
        window_targets(&self.windows[index].label_ids)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean training loss over the epoch's updates, measured with dropout on.
    pub train_loss: f64,
    pub validation_loss: f64,
    /// Micro F-measure over all categories on the validation windows.
    pub validation_f: f64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Mean window loss in inference mode.
    pub loss: f64,
    pub report: EvalReport,
    pub predictions: Vec<WindowPrediction>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub tagger: LstmTagger,
    pub split: TrainSplit,
    pub initial_validation_loss: f64,
    pub history: Vec<EpochReport>,
}

/// Inference over a subset of windows: mean loss, decoded predictions, and a
/// report over every token those windows cover.
pub fn evaluate(
    tagger: &LstmTagger,
    data: &TrainingData<'_>,
    indices: &[usize],
    schema: &LabelSchema,
    mode: MatchMode,
) -> Result<Evaluation, TaggerError> {
    let mut xs = Vec::new();
    let mut total = 0.0;
    let mut predictions = Vec::with_capacity(indices.len());
    for &i in indices {
        data.inputs(i, &mut xs);
        let cache = forward(&tagger.params, &xs, None, tagger.output)?;
        total += loss(&cache, &data.targets(i))?;
        let w = &data.windows[i];
        let labels = cache.probs().chunks_exact(CODE_WIDTH).map(|p| schema.decode_id(p)).collect();
        predictions.push(WindowPrediction { start: w.start, filled: w.filled, labels });
    }
    let windows: Vec<&Window> = indices.iter().map(|&i| &data.windows[i]).collect();
    let report = score_windows(data.docs, &windows, &predictions, schema, mode);
    let loss = if indices.is_empty() { 0.0 } else { total / indices.len() as f64 };
    Ok(Evaluation { loss, report, predictions })
}

pub fn train(
    data: &TrainingData<'_>,
    schema: &LabelSchema,
    config: &TaggerConfig,
) -> Result<TrainOutcome, TaggerError> {
    train_with(data, schema, config, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with(
    data: &TrainingData<'_>,
    schema: &LabelSchema,
    config: &TaggerConfig,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<TrainOutcome, TaggerError> {
    if data.window_len() != config.window {
        return Err(TaggerError::DimMismatch { what: "window length", expected: config.window, found: data.window_len() });
    }
    let split = TrainSplit::new(&data.windows, &config.split, config.split_mode, config.seed);
    if split.train.is_empty() {
        return Err(TaggerError::EmptyTrainingSet);
    }
    let mut tagger = LstmTagger::new(data.dim(), config, schema);
    let initial_validation_loss = evaluate(&tagger, data, &split.validation, schema, MatchMode::Category)?.loss;

    let mut shuffle_rng = stream(config.seed, Stage::TaggerShuffle);
    let mut dropout_rng = stream(config.seed, Stage::Dropout);
    let mut grads = LstmParams::zeros(tagger.dims());
    let mut order = split.train.clone();
    let mut xs = Vec::new();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for &i in &order {
            data.inputs(i, &mut xs);
            let targets = data.targets(i);
            let mask = tagger.dropout_mask(config.window, &mut dropout_rng);
            let cache = forward(&tagger.params, &xs, mask.as_deref(), tagger.output)?;
            total += loss(&cache, &targets)?;
            grads.as_mut_slice().fill(0.0);
            backward_into(&tagger.params, &cache, &targets, &mut grads)?;
            tagger.optimizer.step(tagger.params.as_mut_slice(), grads.as_slice());
        }
        let val = evaluate(&tagger, data, &split.validation, schema, MatchMode::Category)?;
        let report = EpochReport {
            epoch,
            train_loss: total / order.len() as f64,
            validation_loss: val.loss,
            validation_f: val.report.all().f_measure(),
        };
        on_epoch(&report);
        history.push(report);
    }
    Ok(TrainOutcome { tagger, split, initial_validation_loss, history })
}
