//! Binary checkpoint container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic "DEIDLSTM" | version u32 | byte-order mark u32 (0x01020304)
//! d u32 | h u32 | n u32 | labels u32 | output mode u8 | dropout f64
//! schema fingerprint u64 | adam lr f64 | adam t u64 | parameter count u64
//! parameters f64 × count | adam m f64 × count | adam v f64 × count
//! ```
//!
//! Parameters follow the flat layout of [`LstmParams`]: `W_x`, `W_h`, `b`
//! (gates stacked i, f, o, g, each matrix row-major), then `W_y`, `b_y`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::adam::Adam;
use super::lstm::OutputMode;
use super::params::{LstmDims, LstmParams};
use super::LstmTagger;
use crate::labels::CODE_WIDTH;

const MAGIC: &[u8; 8] = b"DEIDLSTM";
const VERSION: u32 = 1;
const BYTE_ORDER_MARK: u32 = 0x0102_0304;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a tagger checkpoint")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("unexpected byte order mark {0:#010x}")]
    ByteOrder(u32),
    #[error("header field {field}: expected {expected}, found {found}")]
    HeaderMismatch { field: &'static str, expected: String, found: String },
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint has trailing bytes")]
    TrailingData,
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for CheckpointError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            CheckpointError::Truncated
        } else {
            CheckpointError::Io(e)
        }
    }
}

fn put_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64s(w: &mut impl Write, vs: &[f64]) -> io::Result<()> {
    for v in vs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N], CheckpointError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn get_u32(r: &mut impl Read) -> Result<u32, CheckpointError> {
    Ok(u32::from_le_bytes(get(r)?))
}

fn get_u64(r: &mut impl Read) -> Result<u64, CheckpointError> {
    Ok(u64::from_le_bytes(get(r)?))
}

fn get_f64(r: &mut impl Read) -> Result<f64, CheckpointError> {
    Ok(f64::from_le_bytes(get(r)?))
}

fn get_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>, CheckpointError> {
    (0..count).map(|_| get_f64(r)).collect()
}

fn mismatch(field: &'static str, expected: impl ToString, found: impl ToString) -> CheckpointError {
    CheckpointError::HeaderMismatch { field, expected: expected.to_string(), found: found.to_string() }
}

pub fn write_checkpoint(tagger: &LstmTagger, w: &mut impl Write) -> io::Result<()> {
    let dims = tagger.dims();
    w.write_all(MAGIC)?;
    put_u32(w, VERSION)?;
    put_u32(w, BYTE_ORDER_MARK)?;
    for v in [dims.input, dims.hidden, tagger.window, dims.labels] {
        put_u32(w, v as u32)?;
    }
    w.write_all(&[match tagger.output {
        OutputMode::SigmoidBce => 0,
        OutputMode::SoftmaxCe => 1,
    }])?;
    w.write_all(&tagger.dropout.to_le_bytes())?;
    put_u64(w, tagger.schema_fingerprint)?;
    w.write_all(&tagger.optimizer.lr.to_le_bytes())?;
    put_u64(w, tagger.optimizer.t)?;
    put_u64(w, dims.param_count() as u64)?;
    put_f64s(w, tagger.params.as_slice())?;
    put_f64s(w, &tagger.optimizer.m)?;
    put_f64s(w, &tagger.optimizer.v)?;
    w.flush()
}

/// Reads a checkpoint and checks it was trained against the label schema
/// with fingerprint `schema_fingerprint`.
pub fn read_checkpoint(r: &mut impl Read, schema_fingerprint: u64) -> Result<LstmTagger, CheckpointError> {
    if &get::<8>(r)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let bom = get_u32(r)?;
    if bom != BYTE_ORDER_MARK {
        return Err(CheckpointError::ByteOrder(bom));
    }
    let d = get_u32(r)? as usize;
    let h = get_u32(r)? as usize;
    let n = get_u32(r)? as usize;
    let labels = get_u32(r)? as usize;
    if labels != CODE_WIDTH {
        return Err(mismatch("labels", CODE_WIDTH, labels));
    }
    if d == 0 || h == 0 || n == 0 {
        return Err(mismatch("dimensions", "positive", format!("d={d} h={h} n={n}")));
    }
    let output = match get::<1>(r)?[0] {
        0 => OutputMode::SigmoidBce,
        1 => OutputMode::SoftmaxCe,
        other => return Err(mismatch("output mode", "0 or 1", other)),
    };
    let dropout = get_f64(r)?;
    if !(0.0..1.0).contains(&dropout) {
        return Err(mismatch("dropout", "[0, 1)", dropout));
    }
    let fingerprint = get_u64(r)?;
    if fingerprint != schema_fingerprint {
        return Err(mismatch("schema fingerprint", format!("{schema_fingerprint:016x}"), format!("{fingerprint:016x}")));
    }
    let lr = get_f64(r)?;
    let t = get_u64(r)?;
    let dims = LstmDims { input: d, hidden: h, labels };
    let count = get_u64(r)?;
    if count != dims.param_count() as u64 {
        return Err(mismatch("parameter count", dims.param_count(), count));
    }
    let count = count as usize;
    let params = LstmParams::from_vec(dims, get_f64s(r, count)?).expect("length checked");
    let mut optimizer = Adam::new(count, lr);
    optimizer.t = t;
    optimizer.m = get_f64s(r, count)?;
    optimizer.v = get_f64s(r, count)?;
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(CheckpointError::TrailingData);
    }
    Ok(LstmTagger { params, window: n, dropout, output, schema_fingerprint: fingerprint, optimizer })
}

pub fn save_checkpoint(tagger: &LstmTagger, path: impl AsRef<Path>) -> io::Result<()> {
    write_checkpoint(tagger, &mut BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint(path: impl AsRef<Path>, schema_fingerprint: u64) -> Result<LstmTagger, CheckpointError> {
    let file = File::open(path).map_err(CheckpointError::Io)?;
    read_checkpoint(&mut BufReader::new(file), schema_fingerprint)
}
