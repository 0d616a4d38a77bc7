use std::ops::Range;

use rand::Rng;

use crate::rng::{stream, Stage};

/// Shape of a single-layer LSTM tagger with a per-step dense head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmDims {
    pub input: usize,
    pub hidden: usize,
    pub labels: usize,
}

/// Gate order inside the stacked gate matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    Cell = 3,
}

impl LstmDims {
    fn w_x(&self) -> Range<usize> {
        0..4 * self.hidden * self.input
    }

    fn w_h(&self) -> Range<usize> {
        let s = self.w_x().end;
        s..s + 4 * self.hidden * self.hidden
    }

    fn b(&self) -> Range<usize> {
        let s = self.w_h().end;
        s..s + 4 * self.hidden
    }

    fn w_y(&self) -> Range<usize> {
        let s = self.b().end;
        s..s + self.labels * self.hidden
    }

    fn b_y(&self) -> Range<usize> {
        let s = self.w_y().end;
        s..s + self.labels
    }

    pub fn param_count(&self) -> usize {
        self.b_y().end
    }
}

/// All tagger weights in one flat buffer, in the order
/// `W_x (4h×d) | W_h (4h×h) | b (4h) | W_y (L×h) | b_y (L)`, row-major.
/// The stacked gate blocks are ordered input, forget, output, cell.
///
/// The same type holds gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    dims: LstmDims,
    data: Vec<f64>,
}

macro_rules! block {
    ($get:ident, $get_mut:ident) => {
        pub fn $get(&self) -> &[f64] {
            &self.data[self.dims.$get()]
        }

        pub fn $get_mut(&mut self) -> &mut [f64] {
            let r = self.dims.$get();
            &mut self.data[r]
        }
    };
}

impl LstmParams {
    pub fn zeros(dims: LstmDims) -> Self {
        LstmParams { dims, data: vec![0.0; dims.param_count()] }
    }

    /// Weights uniform in `[-scale, scale]`, forget-gate bias 1, all other biases 0.
    pub fn init(dims: LstmDims, scale: f64, seed: u64) -> Self {
        let mut rng = stream(seed, Stage::TaggerInit);
        let mut p = LstmParams::zeros(dims);
        for r in [dims.w_x(), dims.w_h(), dims.w_y()] {
            for w in &mut p.data[r] {
                *w = rng.gen_range(-scale..=scale);
            }
        }
        p.gate_bias_mut(Gate::Forget).fill(1.0);
        p
    }

    pub fn from_vec(dims: LstmDims, data: Vec<f64>) -> Option<Self> {
        (data.len() == dims.param_count()).then_some(LstmParams { dims, data })
    }

    pub fn dims(&self) -> LstmDims {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    block!(w_x, w_x_mut);
    block!(w_h, w_h_mut);
    block!(b, b_mut);
    block!(w_y, w_y_mut);
    block!(b_y, b_y_mut);

    /// `W` for one gate (h×d).
    pub fn gate_input_weights(&self, gate: Gate) -> &[f64] {
        let n = self.dims.hidden * self.dims.input;
        &self.w_x()[gate as usize * n..(gate as usize + 1) * n]
    }

    /// `U` for one gate (h×h).
    pub fn gate_recurrent_weights(&self, gate: Gate) -> &[f64] {
        let n = self.dims.hidden * self.dims.hidden;
        &self.w_h()[gate as usize * n..(gate as usize + 1) * n]
    }

    pub fn gate_bias(&self, gate: Gate) -> &[f64] {
        let h = self.dims.hidden;
        &self.b()[gate as usize * h..(gate as usize + 1) * h]
    }

    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.dims.hidden;
        &mut self.b_mut()[gate as usize * h..(gate as usize + 1) * h]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Order-sensitive checksum over the raw bits of every parameter.
    pub fn checksum(&self) -> u64 {
        self.data.iter().fold(0xcbf2_9ce4_8422_2325u64, |acc, v| {
            (acc ^ v.to_bits()).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }
}
