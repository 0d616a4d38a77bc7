use std::collections::HashMap;

use super::tokenize::normalize;
use super::CorpusError;

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const PAD_TOKEN: &str = "<PAD>";
pub const UNK_TOKEN: &str = "<UNK>";

/// Word ↔ id mapping with corpus frequencies.
///
/// Ids 0 and 1 are always [`PAD_TOKEN`] and [`UNK_TOKEN`]. The unknown word's
/// count is the number of corpus tokens that fell below `min_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Counts normalized words over `sentences` and keeps those seen at
    /// least `min_count` times. Ids are ordered by descending count, then
    /// lexicographically.
    pub fn build<'a, S, W>(sentences: S, min_count: u64) -> Result<Self, CorpusError>
    where
        S: IntoIterator<Item = W>,
        W: IntoIterator<Item = &'a str>,
    {
        let mut freq: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for sentence in sentences {
            for word in sentence {
                *freq.entry(normalize(word)).or_default() += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut kept: Vec<(String, u64)> = Vec::new();
        let mut unk = 0;
        for (word, count) in freq {
            if count >= min_count.max(1) && word != PAD_TOKEN && word != UNK_TOKEN {
                kept.push((word, count));
            } else {
                unk += count;
            }
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut vocab = Vocabulary::reserved(unk);
        for (word, count) in kept {
            vocab.push(word, count);
        }
        Ok(vocab)
    }

    fn reserved(unk_count: u64) -> Self {
        let mut vocab = Vocabulary { words: Vec::new(), counts: Vec::new(), index: HashMap::new() };
        vocab.push(PAD_TOKEN.to_string(), 0);
        vocab.push(UNK_TOKEN.to_string(), unk_count);
        vocab
    }

    fn push(&mut self, word: String, count: u64) -> u32 {
        let id = self.words.len() as u32;
        self.index.insert(word.clone(), id);
        self.words.push(word);
        self.counts.push(count);
        id
    }

    /// A vocabulary over externally supplied words (e.g. loaded vectors),
    /// with unknown counts. Returns the id assigned to each input word, or
    /// `None` for a duplicate. Reserved tokens map to their fixed ids.
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> (Self, Vec<Option<u32>>) {
        let mut vocab = Vocabulary::reserved(0);
        let mut seen_reserved = [false; 2];
        let ids = words
            .into_iter()
            .map(|word| match word.as_str() {
                PAD_TOKEN | UNK_TOKEN => {
                    let id = if word == PAD_TOKEN { PAD_ID } else { UNK_ID };
                    let seen = std::mem::replace(&mut seen_reserved[id as usize], true);
                    (!seen).then_some(id)
                }
                _ if vocab.index.contains_key(&word) => None,
                _ => Some(vocab.push(word, 0)),
            })
            .collect();
        (vocab, ids)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Exact lookup, then lookup of the normalized form.
    pub fn get(&self, word: &str) -> Option<u32> {
        self.index
            .get(word)
            .or_else(|| self.index.get(&normalize(word)))
            .copied()
            .filter(|&id| id != PAD_ID)
    }

    /// Like [`get`](Self::get), falling back to the unknown-word id.
    pub fn id(&self, word: &str) -> u32 {
        self.get(word).unwrap_or(UNK_ID)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn is_reserved(id: u32) -> bool {
        id == PAD_ID || id == UNK_ID
    }

    /// Maps a token sequence to ids.
    pub fn encode<'a, I: IntoIterator<Item = &'a str>>(&self, words: I) -> Vec<u32> {
        words.into_iter().map(|w| self.id(w)).collect()
    }
}
