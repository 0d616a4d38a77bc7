//! Seeded random streams. Every stage of the pipeline draws from its own
//! ChaCha stream derived from one user seed, so changing how much one stage
//! consumes never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    SynthGen = 1,
    CbowInit = 2,
    CbowSampling = 3,
    StudySplit = 4,
    DataSplit = 5,
    TaggerInit = 6,
    TaggerShuffle = 7,
    Dropout = 8,
}

pub fn stream(seed: u64, stage: Stage) -> ChaCha8Rng {
    stream_indexed(seed, stage, 0)
}

/// A stream for item `index` of `stage` (e.g. one synthetic document).
pub fn stream_indexed(seed: u64, stage: Stage, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stage as u64) << 32) | index as u64);
    rng
}
