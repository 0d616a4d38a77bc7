use super::{EmbeddingError, EmbeddingModel};
use crate::corpus::Vocabulary;

/// `w1 : w2 :: w4 : w3`, i.e. `v(w1) - v(w2) + v(w4)` should land near `v(w3)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub w1: String,
    pub w2: String,
    pub w3: String,
    pub w4: String,
}

impl AnalogyQuestion {
    pub fn new(w1: &str, w2: &str, w3: &str, w4: &str) -> Self {
        AnalogyQuestion { w1: w1.into(), w2: w2.into(), w3: w3.into(), w4: w4.into() }
    }
}

/// One question per line as `w1 w2 w3 w4`. Blank lines, `#` comments and
/// `:` section headers are skipped.
pub fn parse_questions(text: &str) -> Result<Vec<AnalogyQuestion>, EmbeddingError> {
    let mut questions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(':') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let [w1, w2, w3, w4] = words[..] else {
            return Err(EmbeddingError::MalformedQuestion { line: i + 1 });
        };
        questions.push(AnalogyQuestion::new(w1, w2, w3, w4));
    }
    Ok(questions)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimMismatch { expected: u.len(), found: v.len() });
    }
    let (mut uv, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((uv / (uu * vv).sqrt()).clamp(-1.0, 1.0))
}

fn offset_vector(model: &EmbeddingModel, w1: u32, w2: u32, w4: u32) -> Vec<f64> {
    model
        .vector(w1)
        .iter()
        .zip(model.vector(w2))
        .zip(model.vector(w4))
        .map(|((a, b), c)| a - b + c)
        .collect()
}

fn require(model: &EmbeddingModel, word: &str) -> Result<u32, EmbeddingError> {
    model.word_id(word).ok_or_else(|| EmbeddingError::OutOfVocabulary(word.to_string()))
}

/// The `top_k` words closest to `v(w1) - v(w2) + v(w4)` by cosine, excluding
/// the three query words and the reserved tokens.
pub fn analogy(
    model: &EmbeddingModel,
    w1: &str,
    w2: &str,
    w4: &str,
    top_k: usize,
) -> Result<Vec<(String, f64)>, EmbeddingError> {
    let ids = [require(model, w1)?, require(model, w2)?, require(model, w4)?];
    let target = offset_vector(model, ids[0], ids[1], ids[2]);
    let mut scored: Vec<(u32, f64)> = (0..model.len() as u32)
        .filter(|id| !Vocabulary::is_reserved(*id) && !ids.contains(id))
        .filter_map(|id| cosine(&target, model.vector(id)).ok().map(|c| (id, c)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored
        .into_iter()
        .take(top_k)
        .map(|(id, c)| (model.vocab().word(id).to_string(), c))
        .collect())
}

/// Mean of `cosine(v(w1) - v(w2) + v(w4), v(w3))` over answerable questions.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyQuality {
    pub mean: f64,
    /// `(question index, cosine)` for every answered question.
    pub scores: Vec<(usize, f64)>,
    /// Questions with a word outside the vocabulary (or a zero offset vector).
    pub skipped: usize,
}

pub fn analogy_quality(
    model: &EmbeddingModel,
    questions: &[AnalogyQuestion],
) -> Result<AnalogyQuality, EmbeddingError> {
    let mut scores = Vec::new();
    let mut skipped = 0;
    for (i, q) in questions.iter().enumerate() {
        let ids = [&q.w1, &q.w2, &q.w3, &q.w4].map(|w| model.word_id(w));
        let [Some(a), Some(b), Some(c), Some(d)] = ids else {
            skipped += 1;
            continue;
        };
        match cosine(&offset_vector(model, a, b, d), model.vector(c)) {
            Ok(score) => scores.push((i, score)),
            Err(_) => skipped += 1,
        }
    }
    if scores.is_empty() {
        return Err(EmbeddingError::NoAnswerableQuestions);
    }
    let mean = scores.iter().map(|(_, s)| s).sum::<f64>() / scores.len() as f64;
    Ok(AnalogyQuality { mean, scores, skipped })
}
