//! Oracles and fixtures shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::time::{Duration, Instant};

use deid_core::corpus::parse_annotated;
use deid_core::embeddings::{train_cbow_on_documents, CbowConfig, CbowExample, ComposedLookup};
use deid_core::evalmerge::{EvalReport, MatchMode};
use deid_core::labels::{Category, LabelId, LabelSchema};
use deid_core::seqlabel::{
    backward, evaluate, forward, loss, train, write_checkpoint, EpochReport, LstmDims, LstmParams, OutputMode,
    TaggerConfig, TrainingData,
};
use deid_core::synth::{generate, GenConfig};
use deid_core::AnnotatedDocument;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared on an absolute scale.
pub const REL_FLOOR: f64 = 1e-6;

pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Largest relative error between backpropagated and central-difference
/// gradients on a random `d = h = 3`, `n = 4`, width-17 network.
pub fn lstm_gradient_error(seed: u64, mode: OutputMode, with_mask: bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = LstmDims { input: 3, hidden: 3, labels: 17 };
    let steps = 4;
    let params = LstmParams::from_vec(dims, uniform(&mut rng, dims.param_count(), 0.5)).unwrap();
    let xs = uniform(&mut rng, steps * dims.input, 1.0);
    let mut targets = vec![0.0; steps * 17];
    for t in 0..steps {
        targets[t * 17 + rng.gen_range(0..17)] = 1.0;
    }
    let mask: Option<Vec<f64>> = with_mask
        .then(|| (0..steps * dims.hidden).map(|_| if rng.gen_bool(0.2) { 0.0 } else { 1.25 }).collect());

    let f = |p: &LstmParams| loss(&forward(p, &xs, mask.as_deref(), mode).unwrap(), &targets).unwrap();
    let cache = forward(&params, &xs, mask.as_deref(), mode).unwrap();
    let grads = backward(&params, &cache, &targets).unwrap();

    let mut worst: f64 = 0.0;
    let mut probe = params.clone();
    for i in 0..params.as_slice().len() {
        let base = params.as_slice()[i];
        probe.as_mut_slice()[i] = base + FD_STEP;
        let up = f(&probe);
        probe.as_mut_slice()[i] = base - FD_STEP;
        let down = f(&probe);
        probe.as_mut_slice()[i] = base;
        worst = worst.max(rel_error(grads.as_slice()[i], (up - down) / (2.0 * FD_STEP)));
    }
    worst
}

/// Largest relative error of the negative-sampling gradient on a 5-word
/// vocabulary with `d = 4`.
pub fn cbow_gradient_error(seed: u64) -> f64 {
    let (vocab, dim) = (5u32, 4usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut input = uniform(&mut rng, vocab as usize * dim, 0.5);
    let mut output = uniform(&mut rng, vocab as usize * dim, 0.5);
    let center = rng.gen_range(0..vocab);
    let context: Vec<u32> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..vocab)).collect();
    let negatives: Vec<u32> = (0..3)
        .map(|_| loop {
            let n = rng.gen_range(0..vocab);
            if n != center {
                break n;
            }
        })
        .collect();
    let ex = CbowExample { context, center, negatives };
    let (_, d_in, d_out) = ex.gradient(&input, &output, dim);

    let mut worst: f64 = 0.0;
    for i in 0..input.len() {
        let base = input[i];
        input[i] = base + FD_STEP;
        let up = ex.loss(&input, &output, dim);
        input[i] = base - FD_STEP;
        let down = ex.loss(&input, &output, dim);
        input[i] = base;
        worst = worst.max(rel_error(d_in[i], (up - down) / (2.0 * FD_STEP)));
    }
    for i in 0..output.len() {
        let base = output[i];
        output[i] = base + FD_STEP;
        let up = ex.loss(&input, &output, dim);
        output[i] = base - FD_STEP;
        let down = ex.loss(&input, &output, dim);
        output[i] = base;
        worst = worst.max(rel_error(d_out[i], (up - down) / (2.0 * FD_STEP)));
    }
    worst
}

/// Label names by code index; slots 12 to 15 carry no label.
pub const CODE_NAMES: [Option<&str>; 17] = [
    Some("BODOC"),
    Some("IODOC"),
    Some("BOP"),
    Some("IOP"),
    Some("BOD"),
    Some("IOD"),
    Some("BOL"),
    Some("IOL"),
    Some("BOH"),
    Some("IOH"),
    Some("BOPH"),
    Some("IOPH"),
    None,
    None,
    None,
    None,
    Some("O"),
];

fn is_phi_name(code: u8) -> bool {
    CODE_NAMES[code as usize].is_some_and(|n| n.starts_with("BO") || n.starts_with("IO"))
}

/// Brute-force reading of the merge rules on raw code indices.
pub fn oracle_merge(votes: &[u8]) -> u8 {
    let mut distinct = votes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() == 1 {
        return distinct[0];
    }
    let mut best = None;
    for &v in &distinct {
        if is_phi_name(v) && best.is_none_or(|b| v > b) {
            best = Some(v);
        }
    }
    best.unwrap_or(16)
}

/// All multisets of `size` codes from `0..17`, as non-decreasing sequences.
pub fn multisets(size: usize) -> Vec<Vec<u8>> {
    fn go(start: u8, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for v in start..17 {
            prefix.push(v);
            go(v, left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(0, size, &mut Vec::new(), &mut out);
    out
}

fn category_of_name(code: u8) -> Option<&'static str> {
    let name = CODE_NAMES[code as usize]?;
    name.strip_prefix("BO").or_else(|| name.strip_prefix("IO"))
}

/// `(tp, fp, fn)` per category code ("DOC", "P", "D", "L", "H", "PH").
pub fn oracle_counts(gold: &[u8], pred: &[u8], exact: bool) -> Vec<(&'static str, u64, u64, u64)> {
    ["D", "DOC", "H", "L", "P", "PH"]
        .into_iter()
        .map(|c| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for (&g, &p) in gold.iter().zip(pred) {
                let gc = category_of_name(g) == Some(c);
                let pc = category_of_name(p) == Some(c);
                let same = if exact { g == p } else { category_of_name(g) == category_of_name(p) };
                if gc && same {
                    tp += 1;
                }
                if pc && !same {
                    fp += 1;
                }
                if gc && !same {
                    fn_ += 1;
                }
            }
            (c, tp, fp, fn_)
        })
        .collect()
}

pub fn oracle_prf(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64) {
    let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Random inline-tag document: `len` filler tokens with entities of length
/// `1..=max_entity` dropped in at random.
pub fn random_document(rng: &mut ChaCha8Rng, len: usize, max_entity: usize) -> AnnotatedDocument {
    let mut raw = String::new();
    let mut i = 0;
    while i < len {
        if rng.gen_bool(0.3) {
            let elen = rng.gen_range(1..=max_entity).min(len - i);
            let cat = Category::ALL[rng.gen_range(0..6)];
            raw.push_str(&format!("<PHI TYPE=\"{}\">", cat.tag()));
            let words: Vec<String> = (0..elen).map(|k| format!("e{}", i + k)).collect();
            raw.push_str(&words.join(" "));
            raw.push_str("</PHI> ");
            i += elen;
        } else {
            raw.push_str(&format!("w{i} "));
            i += 1;
        }
    }
    parse_annotated("random", &raw, &LabelSchema::default()).unwrap()
}

pub fn random_codes(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let assigned: Vec<u8> = (0..17u8).filter(|&c| CODE_NAMES[c as usize].is_some()).collect();
    (0..len).map(|_| assigned[rng.gen_range(0..assigned.len())]).collect()
}

pub fn to_ids(codes: &[u8]) -> Vec<LabelId> {
    codes.iter().map(|&c| LabelId(c)).collect()
}

/// Settings of the end-to-end synthetic run.
pub const PIPELINE_EMBED_DIM: usize = 50;
pub const PIPELINE_HIDDEN: usize = 50;

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub checkpoint: Vec<u8>,
    pub test_report: EvalReport,
    pub history: Vec<EpochReport>,
    pub elapsed: Duration,
}

/// Synthetic corpus, CBOW embeddings, tagger training and a merged,
/// token-level evaluation of the test windows.
pub fn run_pipeline(seed: u64) -> PipelineRun {
    let started = Instant::now();
    let schema = LabelSchema::default();
    let corpus = generate(&GenConfig { seed, ..GenConfig::default() }).unwrap();
    let docs: Vec<AnnotatedDocument> = corpus.iter().map(|d| d.parse(&schema)).collect();

    let cbow = CbowConfig { dim: PIPELINE_EMBED_DIM, seed, ..CbowConfig::default() };
    let model = train_cbow_on_documents(&docs, 2, &cbow).unwrap();
    let mut lookup = ComposedLookup::new(&model, None).unwrap();

    let config = TaggerConfig { hidden: PIPELINE_HIDDEN, seed, ..TaggerConfig::default() };
    let data = TrainingData::new(&docs, &mut lookup, &schema, config.window, config.stride);
    let outcome = train(&data, &schema, &config).unwrap();
    let test = evaluate(&outcome.tagger, &data, &outcome.split.test, &schema, MatchMode::Category).unwrap();

    let mut checkpoint = Vec::new();
    write_checkpoint(&outcome.tagger, &mut checkpoint).unwrap();
    PipelineRun { checkpoint, test_report: test.report, history: outcome.history, elapsed: started.elapsed() }
}
