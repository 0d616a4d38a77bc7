use rand::seq::SliceRandom;

use crate::corpus::Window;
use crate::rng::{stream, Stage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions { train: 0.56, validation: 0.19, test: 0.25 }
    }
}

/// What the random partition is drawn over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SplitMode {
    /// Individual windows; overlapping windows of one document can land in
    /// different partitions.
    #[default]
    Windows,
    /// Whole documents; all windows of a document share a partition.
    Documents,
}

/// Disjoint window index sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

fn cut(len: usize, fractions: &SplitFractions) -> (usize, usize) {
    let total = fractions.train + fractions.validation + fractions.test;
    let n_train = ((fractions.train / total) * len as f64).round() as usize;
    let n_val = ((fractions.validation / total) * len as f64).round() as usize;
    let n_train = n_train.min(len);
    (n_train, (n_train + n_val).min(len))
}

impl TrainSplit {
    pub fn new(windows: &[Window], fractions: &SplitFractions, mode: SplitMode, seed: u64) -> Self {
        let mut rng = stream(seed, Stage::DataSplit);
        match mode {
            SplitMode::Windows => {
                let mut order: Vec<usize> = (0..windows.len()).collect();
                order.shuffle(&mut rng);
                let (a, b) = cut(order.len(), fractions);
                TrainSplit { train: order[..a].to_vec(), validation: order[a..b].to_vec(), test: order[b..].to_vec() }
            }
            SplitMode::Documents => {
                let n_docs = windows.iter().map(|w| w.doc_index + 1).max().unwrap_or(0);
                let mut docs: Vec<usize> = (0..n_docs).collect();
                docs.shuffle(&mut rng);
                let (a, b) = cut(n_docs, fractions);
                let mut part = vec![0u8; n_docs];
                for (rank, &d) in docs.iter().enumerate() {
                    part[d] = if rank < a { 0 } else if rank < b { 1 } else { 2 };
                }
                let mut split = TrainSplit::default();
                for (i, w) in windows.iter().enumerate() {
                    match part[w.doc_index] {
                        0 => split.train.push(i),
                        1 => split.validation.push(i),
                        _ => split.test.push(i),
                    }
                }
                split
            }
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
