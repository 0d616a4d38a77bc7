mod common;

use common::*;
use deid_core::seqlabel::{backward, forward, LstmDims, LstmParams, OutputMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lstm_bce_gradients_match_finite_differences() {
    for seed in 100..110 {
        let err = lstm_gradient_error(seed, OutputMode::SigmoidBce, seed % 2 == 0);
        assert!(err < 1e-4, "seed {seed}: {err:e}");
    }
}

#[test]
fn lstm_softmax_gradients_match_finite_differences() {
    for seed in 0..10 {
        let err = lstm_gradient_error(seed, OutputMode::SoftmaxCe, seed % 2 == 0);
        assert!(err < 1e-4, "seed {seed}: {err:e}");
    }
}

#[test]
fn cbow_gradients_match_finite_differences() {
    for seed in 100..140 {
        let err = cbow_gradient_error(seed);
        assert!(err < 1e-5, "seed {seed}: {err:e}");
    }
}

#[test]
fn head_bias_gradient_is_mean_residual() {
    // With the loss averaged over all steps × 17 cells, the b_y gradient is
    // the per-step residual summed over steps and divided by steps × 17.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dims = LstmDims { input: 3, hidden: 4, labels: 17 };
    let data = (0..dims.param_count()).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let params = LstmParams::from_vec(dims, data).unwrap();
    let steps = 5;
    let xs: Vec<f64> = (0..steps * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut targets = vec![0.0; steps * 17];
    for t in 0..steps {
        targets[t * 17 + rng.gen_range(0..17)] = 1.0;
    }
    let cache = forward(&params, &xs, None, OutputMode::SigmoidBce).unwrap();
    let grads = backward(&params, &cache, &targets).unwrap();
    for k in 0..17 {
        let residual: f64 = (0..steps).map(|t| cache.probs()[t * 17 + k] - targets[t * 17 + k]).sum();
        let expected = residual / (steps * 17) as f64;
        assert!((grads.b_y()[k] - expected).abs() < 1e-15, "label {k}");
    }
}

#[test]
fn zero_perturbation_leaves_loss_unchanged() {
    let dims = LstmDims { input: 3, hidden: 3, labels: 17 };
    let params = LstmParams::init(dims, 0.08, 5);
    let xs = vec![0.3; 12];
    let a = forward(&params, &xs, None, OutputMode::SigmoidBce).unwrap();
    let mut shifted = params.clone();
    for v in shifted.as_mut_slice() {
        *v += 0.0;
    }
    let b = forward(&shifted, &xs, None, OutputMode::SigmoidBce).unwrap();
    assert_eq!(a.probs(), b.probs());
}
