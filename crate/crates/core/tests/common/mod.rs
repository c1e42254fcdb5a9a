//! Oracles shared by the integration tests.
#![allow(dead_code)]

use lorenz_reservoir::linalg::Matrix;
use lorenz_reservoir::lorenz::{self, LorenzParams, Sampler};
use lorenz_reservoir::reservoir::{self, Reservoir, TrainedModel};
use lorenz_reservoir::seed;

/// Largest Lyapunov exponent from the average log-growth of a small
/// separation, renormalised every sample.
pub fn lyapunov_estimate(seed_value: u64, samples: usize) -> f64 {
    let p = LorenzParams::default();
    let mut rng = seed::rng(seed_value);
    let start = lorenz::generate_raw(&p, lorenz::random_initial_state(&mut rng), 1, 50.0).unwrap()[0];
    let d0 = 1e-8;
    let mut a = Sampler::new(p, start).unwrap();
    let mut b_state = [start[0] + d0, start[1], start[2]];
    let mut sum = 0.0;
    for _ in 0..samples {
        let mut b = Sampler::new(p, b_state).unwrap();
        a.next_sample().unwrap();
        b.next_sample().unwrap();
        let (sa, sb) = (a.state(), b.state());
        let d = (0..3).map(|i| (sa[i] - sb[i]).powi(2)).sum::<f64>().sqrt();
        sum += (d / d0).ln();
        b_state = std::array::from_fn(|i| sa[i] + (sb[i] - sa[i]) * d0 / d);
    }
    sum / (samples as f64 * p.dt_sample)
}

/// One explicit output-feedback step `x ← tanh(W_int x + W_in ŷ)` with
/// `ŷ = Wᵀ[x; 1]`, without folding the readout into the coupling.
pub fn feedback_step(res: &Reservoir, w: &Matrix, x: &[f64]) -> Vec<f64> {
    let y = reservoir::readout(x, w);
    let a = res.w_int().mul_vec(x);
    let b = res.w_in().mul_vec(&y);
    a.iter().zip(&b).map(|(p, q)| (p + q).tanh()).collect()
}

/// `tanh(W_a x + b)`.
pub fn autonomous_step(model: &TrainedModel, x: &[f64]) -> Vec<f64> {
    let v = model.w_a.mul_vec(x);
    v.iter().zip(&model.bias).map(|(p, q)| (p + q).tanh()).collect()
}
