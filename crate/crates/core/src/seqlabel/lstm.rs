//! LSTM cell, unrolled forward pass and backpropagation through time.
//!
//! ```text
//! i = σ(W_i x + U_i h' + b_i)     f = σ(W_f x + U_f h' + b_f)
//! o = σ(W_o x + U_o h' + b_o)     g = tanh(W_g x + U_g h' + b_g)
//! c = f ⊙ c' + i ⊙ g              h = o ⊙ tanh(c)
//! y = act(W_y dropout(h) + b_y)
//! ```
//!
//! `act` is 17 independent sigmoids scored with binary cross entropy, or a
//! softmax scored with categorical cross entropy.

use super::params::{LstmDims, LstmParams};
use super::TaggerError;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the loss.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    /// Element-wise sigmoid outputs, mean binary cross entropy over all cells.
    #[default]
    SigmoidBce,
    /// Softmax over labels, categorical cross entropy averaged over steps.
    SoftmaxCe,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `out += M v` for row-major `M` with `v.len()` columns.
#[inline]
fn matvec_add(out: &mut [f64], m: &[f64], v: &[f64]) {
    let cols = v.len();
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += Mᵀ u` for row-major `M` with `u.len()` rows.
#[inline]
fn matvec_t_add(out: &mut [f64], m: &[f64], u: &[f64]) {
    let cols = out.len();
    for (&ui, row) in u.iter().zip(m.chunks_exact(cols)) {
        if ui != 0.0 {
            for (o, a) in out.iter_mut().zip(row) {
                *o += ui * a;
            }
        }
    }
}

/// `M += u vᵀ`.
#[inline]
fn outer_add(m: &mut [f64], u: &[f64], v: &[f64]) {
    let cols = v.len();
    for (&ui, row) in u.iter().zip(m.chunks_exact_mut(cols)) {
        if ui != 0.0 {
            for (a, b) in row.iter_mut().zip(v) {
                *a += ui * b;
            }
        }
    }
}

/// Writes activated gates `[i | f | o | g]` (4h) for one step.
fn gates(params: &LstmParams, x: &[f64], h_prev: &[f64], out: &mut [f64]) {
    let h = params.dims().hidden;
    out.copy_from_slice(params.b());
    matvec_add(out, params.w_x(), x);
    matvec_add(out, params.w_h(), h_prev);
    for v in &mut out[..3 * h] {
        *v = sigmoid(*v);
    }
    for v in &mut out[3 * h..] {
        *v = v.tanh();
    }
}

/// One LSTM step. Returns `(h, c)`.
pub fn lstm_step(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    params: &LstmParams,
) -> Result<(Vec<f64>, Vec<f64>), TaggerError> {
    let dims = params.dims();
    check_len("x", dims.input, x.len())?;
    check_len("h_prev", dims.hidden, h_prev.len())?;
    check_len("c_prev", dims.hidden, c_prev.len())?;
    let hd = dims.hidden;
    let mut a = vec![0.0; 4 * hd];
    gates(params, x, h_prev, &mut a);
    let (i, rest) = a.split_at(hd);
    let (f, rest) = rest.split_at(hd);
    let (o, g) = rest.split_at(hd);
    let c: Vec<f64> = (0..hd).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let h = (0..hd).map(|k| o[k] * c[k].tanh()).collect();
    Ok((h, c))
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), TaggerError> {
    if expected == found {
        Ok(())
    } else {
        Err(TaggerError::DimMismatch { what, expected, found })
    }
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    steps: usize,
    dims: LstmDims,
    mode: OutputMode,
    xs: Vec<f64>,
    /// `(steps + 1) × h`; row 0 is the zero initial state.
    hs: Vec<f64>,
    cs: Vec<f64>,
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
    mask: Option<Vec<f64>>,
    dropped: Vec<f64>,
    probs: Vec<f64>,
}

impl ForwardCache {
    /// `steps × labels` output probabilities.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `h_t` for `t` in `0..steps`.
    pub fn hidden(&self, t: usize) -> &[f64] {
        let h = self.dims.hidden;
        &self.hs[(t + 1) * h..(t + 2) * h]
    }

    pub fn cell(&self, t: usize) -> &[f64] {
        let h = self.dims.hidden;
        &self.cs[(t + 1) * h..(t + 2) * h]
    }
}

/// Runs the window `xs` (`steps × d`, row-major) from a zero state.
///
/// `mask` (`steps × h`) multiplies each hidden state before the head; pass
/// `None` for inference. Masks carry the inverted-dropout scale already.
pub fn forward(
    params: &LstmParams,
    xs: &[f64],
    mask: Option<&[f64]>,
    mode: OutputMode,
) -> Result<ForwardCache, TaggerError> {
    let dims = params.dims();
    let (d, h, l) = (dims.input, dims.hidden, dims.labels);
    if d == 0 || !xs.len().is_multiple_of(d) {
        return Err(TaggerError::DimMismatch { what: "window", expected: d, found: xs.len() });
    }
    let steps = xs.len() / d;
    if let Some(m) = mask {
        check_len("dropout mask", steps * h, m.len())?;
    }

    let mut cache = ForwardCache {
        steps,
        dims,
        mode,
        xs: xs.to_vec(),
        hs: vec![0.0; (steps + 1) * h],
        cs: vec![0.0; (steps + 1) * h],
        gates: vec![0.0; steps * 4 * h],
        tanh_c: vec![0.0; steps * h],
        mask: mask.map(<[f64]>::to_vec),
        dropped: vec![0.0; steps * h],
        probs: vec![0.0; steps * l],
    };

    for t in 0..steps {
        let x = &xs[t * d..(t + 1) * d];
        let (hs_prev, hs_next) = cache.hs.split_at_mut((t + 1) * h);
        let h_prev = &hs_prev[t * h..];
        let a = &mut cache.gates[t * 4 * h..(t + 1) * 4 * h];
        gates(params, x, h_prev, a);

        let (cs_prev, cs_next) = cache.cs.split_at_mut((t + 1) * h);
        let c_prev = &cs_prev[t * h..];
        let c = &mut cs_next[..h];
        let h_t = &mut hs_next[..h];
        let tc = &mut cache.tanh_c[t * h..(t + 1) * h];
        let dropped = &mut cache.dropped[t * h..(t + 1) * h];
        for k in 0..h {
            let (i, f, o, g) = (a[k], a[h + k], a[2 * h + k], a[3 * h + k]);
            c[k] = f * c_prev[k] + i * g;
            tc[k] = c[k].tanh();
            h_t[k] = o * tc[k];
            dropped[k] = match mask {
                Some(m) => h_t[k] * m[t * h + k],
                None => h_t[k],
            };
        }

        let y = &mut cache.probs[t * l..(t + 1) * l];
        y.copy_from_slice(params.b_y());
        matvec_add(y, params.w_y(), dropped);
        match mode {
            OutputMode::SigmoidBce => y.iter_mut().for_each(|v| *v = sigmoid(*v)),
            OutputMode::SoftmaxCe => {
                let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for v in y.iter_mut() {
                    *v = (*v - max).exp();
                    sum += *v;
                }
                y.iter_mut().for_each(|v| *v /= sum);
            }
        }
    }
    Ok(cache)
}

/// Mean element-wise binary cross entropy with clamped probabilities.
pub fn bce_loss(probs: &[f64], targets: &[f64]) -> Result<f64, TaggerError> {
    check_len("targets", probs.len(), targets.len())?;
    if probs.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = probs
        .iter()
        .zip(targets)
        .map(|(&p, &t)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// Categorical cross entropy averaged over steps.
pub fn cross_entropy_loss(probs: &[f64], targets: &[f64], labels: usize) -> Result<f64, TaggerError> {
    check_len("targets", probs.len(), targets.len())?;
    let steps = probs.len() / labels;
    if steps == 0 {
        return Ok(0.0);
    }
    let total: f64 = probs
        .iter()
        .zip(targets)
        .filter(|(_, &t)| t != 0.0)
        .map(|(&p, &t)| -t * p.max(PROB_CLAMP).ln())
        .sum();
    Ok(total / steps as f64)
}

/// The loss matching `cache`'s output mode.
pub fn loss(cache: &ForwardCache, targets: &[f64]) -> Result<f64, TaggerError> {
    match cache.mode {
        OutputMode::SigmoidBce => bce_loss(&cache.probs, targets),
        OutputMode::SoftmaxCe => cross_entropy_loss(&cache.probs, targets, cache.dims.labels),
    }
}

/// Exact gradient of [`loss`] w.r.t. every parameter, accumulated into `grads`.
pub fn backward_into(
    params: &LstmParams,
    cache: &ForwardCache,
    targets: &[f64],
    grads: &mut LstmParams,
) -> Result<(), TaggerError> {
    let dims = params.dims();
    let (d, h, l) = (dims.input, dims.hidden, dims.labels);
    let steps = cache.steps;
    check_len("targets", steps * l, targets.len())?;

    let mut dz = vec![0.0; l];
    let mut dh = vec![0.0; h];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut da = vec![0.0; 4 * h];

    for t in (0..steps).rev() {
        let y = &cache.probs[t * l..(t + 1) * l];
        let tgt = &targets[t * l..(t + 1) * l];
        match cache.mode {
            OutputMode::SigmoidBce => {
                let scale = 1.0 / (steps * l) as f64;
                for k in 0..l {
                    // The clamp is flat outside its range.
                    let inside = y[k] > PROB_CLAMP && y[k] < 1.0 - PROB_CLAMP;
                    dz[k] = if inside { (y[k] - tgt[k]) * scale } else { 0.0 };
                }
            }
            OutputMode::SoftmaxCe => {
                let mass: f64 = tgt.iter().sum();
                let scale = 1.0 / steps as f64;
                for k in 0..l {
                    dz[k] = (mass * y[k] - tgt[k]) * scale;
                }
            }
        }
        let dropped = &cache.dropped[t * h..(t + 1) * h];
        outer_add(grads.w_y_mut(), &dz, dropped);
        for (g, v) in grads.b_y_mut().iter_mut().zip(&dz) {
            *g += v;
        }

        dh.fill(0.0);
        matvec_t_add(&mut dh, params.w_y(), &dz);
        if let Some(mask) = &cache.mask {
            for (v, m) in dh.iter_mut().zip(&mask[t * h..(t + 1) * h]) {
                *v *= m;
            }
        }
        for (v, n) in dh.iter_mut().zip(&dh_next) {
            *v += n;
        }

        let a = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
        let tc = &cache.tanh_c[t * h..(t + 1) * h];
        let c_prev = &cache.cs[t * h..(t + 1) * h];
        for k in 0..h {
            let (i, f, o, g) = (a[k], a[h + k], a[2 * h + k], a[3 * h + k]);
            let d_o = dh[k] * tc[k];
            let dc = dh[k] * o * (1.0 - tc[k] * tc[k]) + dc_next[k];
            da[k] = dc * g * i * (1.0 - i);
            da[h + k] = dc * c_prev[k] * f * (1.0 - f);
            da[2 * h + k] = d_o * o * (1.0 - o);
            da[3 * h + k] = dc * i * (1.0 - g * g);
            dc_next[k] = dc * f;
        }

        let x = &cache.xs[t * d..(t + 1) * d];
        let h_prev = &cache.hs[t * h..(t + 1) * h];
        outer_add(grads.w_x_mut(), &da, x);
        outer_add(grads.w_h_mut(), &da, h_prev);
        for (g, v) in grads.b_mut().iter_mut().zip(&da) {
            *g += v;
        }
        dh_next.fill(0.0);
        matvec_t_add(&mut dh_next, params.w_h(), &da);
    }
    Ok(())
}

pub fn backward(
    params: &LstmParams,
    cache: &ForwardCache,
    targets: &[f64],
) -> Result<LstmParams, TaggerError> {
    let mut grads = LstmParams::zeros(params.dims());
    backward_into(params, cache, targets, &mut grads)?;
    Ok(grads)
}
