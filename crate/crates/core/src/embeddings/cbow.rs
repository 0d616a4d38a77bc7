//! Continuous bag-of-words training with negative sampling.
//!
//! For a center word `c` with context ids `C`, the projection is the mean
//! `h = (1/|C|) Σ v_in[j]` and the per-example loss is
//!
//! ```text
//! L = -ln σ(h·v_out[c]) - Σ_k ln σ(-h·v_out[n_k])
//! ```
//!
//! over `k` noise words drawn from the unigram distribution raised to 0.75.
//! Training is plain SGD in corpus order with a linearly decaying rate and is
//! bit-reproducible for a given seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{EmbeddingError, EmbeddingModel};
use crate::corpus::{AnnotatedDocument, Vocabulary, PAD_ID};
use crate::rng::{stream, Stage};

#[derive(Debug, Clone, PartialEq)]
pub struct CbowConfig {
    pub dim: usize,
    /// Context words taken on each side of the center.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub seed: u64,
}

impl Default for CbowConfig {
    fn default() -> Self {
        CbowConfig { dim: 200, window: 5, negatives: 5, epochs: 5, lr0: 0.025, seed: 1 }
    }
}

const UNIGRAM_POWER: f64 = 0.75;
const LR_FLOOR: f64 = 1e-4;

/// Draws word ids with probability proportional to `count^0.75`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(UNIGRAM_POWER);
                acc
            })
            .collect();
        NegativeSampler { cumulative }
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.last().is_none_or(|&t| t <= 0.0)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        let total = *self.cumulative.last().expect("non-empty sampler");
        let u = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) as u32
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `-ln σ(x)`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    (-x).max(0.0) + (-x.abs()).exp().ln_1p()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn row(m: &[f64], id: u32, dim: usize) -> &[f64] {
    &m[id as usize * dim..(id as usize + 1) * dim]
}

fn row_mut(m: &mut [f64], id: u32, dim: usize) -> &mut [f64] {
    &mut m[id as usize * dim..(id as usize + 1) * dim]
}

/// Computes `h`, the loss, `dL/dh` into `dh` and, per target, the scalar
/// `g` with `dL/dv_out[target] = g·h`. `targets` holds `(id, label)` and is
/// overwritten with `(id, g)`.
fn example_terms(
    input: &[f64],
    output: &[f64],
    dim: usize,
    context: &[u32],
    targets: &mut [(u32, f64)],
    h: &mut [f64],
    dh: &mut [f64],
) -> f64 {
    h.fill(0.0);
    for &j in context {
        for (a, b) in h.iter_mut().zip(row(input, j, dim)) {
            *a += b;
        }
    }
    let inv = 1.0 / context.len() as f64;
    h.iter_mut().for_each(|a| *a *= inv);

    dh.fill(0.0);
    let mut loss = 0.0;
    for (id, label) in targets.iter_mut() {
        let out = row(output, *id, dim);
        let score = dot(h, out);
        loss += if *label > 0.5 { neg_log_sigmoid(score) } else { neg_log_sigmoid(-score) };
        let g = sigmoid(score) - *label;
        for (a, b) in dh.iter_mut().zip(out) {
            *a += g * b;
        }
        *label = g;
    }
    loss
}

/// One training example: the center word, its context and drawn noise words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbowExample {
    pub context: Vec<u32>,
    pub center: u32,
    pub negatives: Vec<u32>,
}

impl CbowExample {
    fn targets(&self) -> Vec<(u32, f64)> {
        std::iter::once((self.center, 1.0))
            .chain(self.negatives.iter().map(|&n| (n, 0.0)))
            .collect()
    }

    pub fn loss(&self, input: &[f64], output: &[f64], dim: usize) -> f64 {
        let mut h = vec![0.0; dim];
        let mut dh = vec![0.0; dim];
        example_terms(input, output, dim, &self.context, &mut self.targets(), &mut h, &mut dh)
    }

    /// Loss with dense gradients w.r.t. the full input and output matrices.
    pub fn gradient(&self, input: &[f64], output: &[f64], dim: usize) -> (f64, Vec<f64>, Vec<f64>) {
        let mut h = vec![0.0; dim];
        let mut dh = vec![0.0; dim];
        let mut targets = self.targets();
        let loss = example_terms(input, output, dim, &self.context, &mut targets, &mut h, &mut dh);
        let mut d_in = vec![0.0; input.len()];
        let mut d_out = vec![0.0; output.len()];
        let inv = 1.0 / self.context.len() as f64;
        for &j in &self.context {
            for (a, b) in row_mut(&mut d_in, j, dim).iter_mut().zip(&dh) {
                *a += inv * b;
            }
        }
        for (id, g) in targets {
            for (a, b) in row_mut(&mut d_out, id, dim).iter_mut().zip(&h) {
                *a += g * b;
            }
        }
        (loss, d_in, d_out)
    }
}

/// Initial input vectors are uniform in `[-0.5/dim, 0.5/dim)`; output vectors
/// and the padding row start at zero.
fn initial_matrices(vocab: &Vocabulary, dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream(seed, Stage::CbowInit);
    let scale = 1.0 / dim as f64;
    let mut input: Vec<f64> = (0..vocab.len() * dim).map(|_| (rng.gen::<f64>() - 0.5) * scale).collect();
    row_mut(&mut input, PAD_ID, dim).fill(0.0);
    (input, vec![0.0; vocab.len() * dim])
}

/// Trains CBOW vectors over id-encoded sentences.
pub fn train_cbow(
    sentences: &[Vec<u32>],
    vocab: Vocabulary,
    config: &CbowConfig,
) -> Result<EmbeddingModel, EmbeddingError> {
    let dim = config.dim;
    if dim == 0 {
        return Err(EmbeddingError::DimZero);
    }
    let positions: usize = sentences.iter().map(Vec::len).sum();
    if positions == 0 {
        return Err(EmbeddingError::EmptyCorpus);
    }
    let (mut input, mut output) = initial_matrices(&vocab, dim, config.seed);
    let sampler = NegativeSampler::new(vocab.counts());
    let mut rng: ChaCha8Rng = stream(config.seed, Stage::CbowSampling);

    let total_steps = (config.epochs * positions) as f64;
    let mut step = 0usize;
    let mut context = Vec::with_capacity(2 * config.window);
    let mut targets = Vec::with_capacity(config.negatives + 1);
    let mut h = vec![0.0; dim];
    let mut dh = vec![0.0; dim];

    for _ in 0..config.epochs {
        for sentence in sentences {
            for (t, &center) in sentence.iter().enumerate() {
                let lr = config.lr0 * (1.0 - (1.0 - LR_FLOOR) * step as f64 / total_steps);
                step += 1;

                context.clear();
                let lo = t.saturating_sub(config.window);
                let hi = (t + config.window + 1).min(sentence.len());
                context.extend((lo..hi).filter(|&j| j != t).map(|j| sentence[j]));
                if context.is_empty() {
                    continue;
                }

                targets.clear();
                targets.push((center, 1.0));
                if !sampler.is_empty() {
                    for _ in 0..config.negatives {
                        let noise = sampler.sample(&mut rng);
                        if noise != center {
                            targets.push((noise, 0.0));
                        }
                    }
                }

                example_terms(&input, &output, dim, &context, &mut targets, &mut h, &mut dh);
                for &(id, g) in &targets {
                    for (o, x) in row_mut(&mut output, id, dim).iter_mut().zip(&h) {
                        *o -= lr * g * x;
                    }
                }
                let scale = lr / context.len() as f64;
                for &j in &context {
                    for (v, d) in row_mut(&mut input, j, dim).iter_mut().zip(&dh) {
                        *v -= scale * d;
                    }
                }
            }
        }
    }
    Ok(EmbeddingModel::new(vocab, dim, input, output))
}

/// Builds the vocabulary over `docs` and trains on their token sequences.
pub fn train_cbow_on_documents(
    docs: &[AnnotatedDocument],
    min_count: u64,
    config: &CbowConfig,
) -> Result<EmbeddingModel, EmbeddingError> {
    let vocab = Vocabulary::build(docs.iter().map(|d| d.token_texts()), min_count)
        .map_err(|_| EmbeddingError::EmptyCorpus)?;
    let sentences: Vec<Vec<u32>> = docs.iter().map(|d| vocab.encode(d.token_texts())).collect();
    train_cbow(&sentences, vocab, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn alternating_vocab(len: usize) -> (Vocabulary, Vec<Vec<u32>>) {
        let words: Vec<&str> = (0..len).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
        let vocab = Vocabulary::build([words.iter().copied()], 2).unwrap();
        let ids = vocab.encode(words.iter().copied());
        (vocab, vec![ids])
    }

    #[test]
    fn no_updates_leaves_initialization() {
        let (vocab, sentences) = alternating_vocab(100);
        let config = CbowConfig { dim: 8, negatives: 0, epochs: 0, ..Default::default() };
        let model = train_cbow(&sentences, vocab.clone(), &config).unwrap();
        let (input, output) = initial_matrices(&vocab, 8, config.seed);
        assert_eq!(model.input, input);
        assert_eq!(model.output, output);
        assert!(model.vector(PAD_ID).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn deterministic_for_seed() {
        let (vocab, sentences) = alternating_vocab(500);
        let config = CbowConfig { dim: 8, epochs: 2, ..Default::default() };
        let a = train_cbow(&sentences, vocab.clone(), &config).unwrap();
        let b = train_cbow(&sentences, vocab.clone(), &config).unwrap();
        assert_eq!(a, b);
        let c = train_cbow(&sentences, vocab, &CbowConfig { seed: 99, ..config }).unwrap();
        assert_ne!(a.input, c.input);
    }

    #[test]
    fn learns_alternating_sentence() {
        let (vocab, sentences) = alternating_vocab(10_000);
        let config = CbowConfig { dim: 10, epochs: 1, ..Default::default() };
        let model = train_cbow(&sentences[..], vocab.clone(), &config).unwrap();

        // Held-out positions: a fresh alternating stretch scored with the
        // trained matrices. The true center must beat every other real word.
        let held_out: Vec<u32> = (0..1_000).map(|i| vocab.id(if i % 2 == 0 { "a" } else { "b" })).collect();
        let mut wins = 0;
        let mut total = 0;
        for t in config.window..held_out.len() - config.window {
            let context: Vec<u32> = (t - config.window..=t + config.window)
                .filter(|&j| j != t)
                .map(|j| held_out[j])
                .collect();
            let mut h = vec![0.0; config.dim];
            for &j in &context {
                for (a, b) in h.iter_mut().zip(model.vector(j)) {
                    *a += b / context.len() as f64;
                }
            }
            let score = |id: u32| dot(&h, model.output_vector(id).unwrap());
            let center = held_out[t];
            let others = (2..vocab.len() as u32).filter(|&w| w != center);
            total += 1;
            if others.into_iter().all(|w| score(center) > score(w)) {
                wins += 1;
            }
        }
        assert!(wins as f64 >= 0.95 * total as f64, "{wins}/{total}");
    }

    #[test]
    fn sampler_follows_smoothed_unigram() {
        let sampler = NegativeSampler::new(&[0, 16, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = [0usize; 4];
        for _ in 0..80_000 {
            hits[sampler.sample(&mut rng) as usize] += 1;
        }
        assert_eq!(hits[0], 0);
        assert_eq!(hits[3], 0);
        // 16^0.75 = 8, so word 1 is drawn eight times as often as word 2.
        let ratio = hits[1] as f64 / hits[2] as f64;
        assert!((ratio - 8.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn empty_and_zero_dim() {
        let (vocab, _) = alternating_vocab(10);
        assert!(matches!(
            train_cbow(&[vec![]], vocab.clone(), &CbowConfig::default()),
            Err(EmbeddingError::EmptyCorpus)
        ));
        assert!(matches!(
            train_cbow(&[vec![2, 3]], vocab, &CbowConfig { dim: 0, ..Default::default() }),
            Err(EmbeddingError::DimZero)
        ));
    }

    #[test]
    fn stable_log_sigmoid() {
        assert!((neg_log_sigmoid(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(neg_log_sigmoid(800.0) < 1e-300);
        assert!((neg_log_sigmoid(-800.0) - 800.0).abs() < 1e-9);
    }
}
