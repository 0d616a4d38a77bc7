//! Embedding quality as a function of training-data size.
//!
//! Documents are shuffled once; model `k` is trained on the first
//! `fractions[k]` share of them (cumulative subsets). The question set is
//! fixed to those the smallest subset's model can answer, and consecutive
//! models are compared with a paired t-test over per-question cosines.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::stats::paired_t_test;
use super::{analogy_quality, train_cbow_on_documents, AnalogyQuestion, CbowConfig, EmbeddingError};
use crate::corpus::AnnotatedDocument;
use crate::rng::{stream, Stage};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub fractions: Vec<f64>,
    pub min_count: u64,
    pub cbow: CbowConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { fractions: vec![0.25, 0.5, 0.75, 1.0], min_count: 2, cbow: CbowConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub fraction: f64,
    pub documents: usize,
    pub vocab_size: usize,
    pub mean_cosine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub from: f64,
    pub to: f64,
    pub t: f64,
    pub p_two_sided: f64,
    pub dof: usize,
    pub degenerate_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub models: Vec<ModelSummary>,
    pub comparisons: Vec<PairComparison>,
    /// Indices (into the input question list) of the fixed question set.
    pub questions: Vec<usize>,
    /// `per_question[k][j]`: cosine of model `k` on fixed question `j`.
    pub per_question: Vec<Vec<f64>>,
}

impl StudyReport {
    /// Tab-separated tables: one row per model, then one row per comparison.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fraction\tdocuments\tvocab\tmean_cosine\n");
        for m in &self.models {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", m.fraction, m.documents, m.vocab_size, m.mean_cosine));
        }
        out.push_str("\nfrom\tto\tt\tdof\tp_value\n");
        for c in &self.comparisons {
            out.push_str(&format!("{}\t{}\t{}\t{}\t{:e}\n", c.from, c.to, c.t, c.dof, c.p_two_sided));
        }
        out
    }
}

pub fn datasize_study(
    docs: &[AnnotatedDocument],
    questions: &[AnalogyQuestion],
    config: &StudyConfig,
) -> Result<StudyReport, EmbeddingError> {
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut stream(config.cbow.seed, Stage::StudySplit));

    let mut models = Vec::with_capacity(config.fractions.len());
    for &fraction in &config.fractions {
        let take = ((fraction.clamp(0.0, 1.0) * docs.len() as f64).ceil() as usize).clamp(1, docs.len().max(1));
        let subset: Vec<AnnotatedDocument> = order[..take.min(order.len())].iter().map(|&i| docs[i].clone()).collect();
        let model = train_cbow_on_documents(&subset, config.min_count, &config.cbow)?;
        models.push((fraction, take, model));
    }
    let smallest = models
        .iter()
        .min_by(|a, b| a.1.cmp(&b.1))
        .ok_or(EmbeddingError::NoAnswerableQuestions)?;
    let fixed: Vec<usize> = analogy_quality(&smallest.2, questions)?.scores.iter().map(|(i, _)| *i).collect();
    let fixed_questions: Vec<AnalogyQuestion> = fixed.iter().map(|&i| questions[i].clone()).collect();

    let mut summaries = Vec::new();
    let mut per_question = Vec::new();
    for (fraction, documents, model) in &models {
        let quality = analogy_quality(model, &fixed_questions)?;
        if quality.skipped > 0 {
            return Err(EmbeddingError::NoAnswerableQuestions);
        }
        summaries.push(ModelSummary {
            fraction: *fraction,
            documents: *documents,
            vocab_size: model.len(),
            mean_cosine: quality.mean,
        });
        per_question.push(quality.scores.iter().map(|(_, s)| *s).collect::<Vec<_>>());
    }

    let mut comparisons = Vec::new();
    for k in 1..models.len() {
        let test = paired_t_test(&per_question[k - 1], &per_question[k])?;
        comparisons.push(PairComparison {
            from: models[k - 1].0,
            to: models[k].0,
            t: test.t,
            p_two_sided: test.p_two_sided,
            dof: test.dof,
            degenerate_variance: test.degenerate_variance,
        });
    }
    Ok(StudyReport { models: summaries, comparisons, questions: fixed, per_question })
}
