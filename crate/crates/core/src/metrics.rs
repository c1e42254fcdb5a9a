//! Evaluation measures for open-loop and closed-loop predictions.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorenz::{fmt_full, AffineScaler, LorenzParams, Sampler, State, LYAPUNOV_EXPONENT};

pub const VPT_THRESHOLD: f64 = 0.4;
pub const ADEV_CUBE: f64 = 0.1;
pub const PSD_SMOOTHING: usize = 20;
pub const PSD_MIN_LEN: usize = 64;

/// Root of the squared error normalised by `K · var(y)` (population variance).
pub fn nrmse(targets: &[f64], outputs: &[f64]) -> Result<f64> {
    if targets.len() != outputs.len() {
        return Err(Error::contract(format!(
            "{} targets vs {} outputs",
            targets.len(),
            outputs.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::contract("nrmse of an empty sequence"));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    // K · var(y) is the centred sum of squares.
    let spread: f64 = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
    if !(spread > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let err: f64 = targets
        .iter()
        .zip(outputs)
        .map(|(y, o)| (y - o) * (y - o))
        .sum();
    Ok((err / spread).sqrt())
}

/// NRMSE of each of the three components.
pub fn nrmse3(targets: &[State], outputs: &[State]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let y: Vec<f64> = targets.iter().map(|s| s[i]).collect();
        let p: Vec<f64> = outputs.iter().map(|s| s[i]).collect();
        *o = nrmse(&y, &p)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VptResult {
    /// Valid prediction time in model-time units.
    pub t_vpt: f64,
    /// The same time in Lyapunov times.
    pub t_vpt_lyapunov: f64,
    /// Whether the error ever reached the threshold within the horizon.
    pub crossed: bool,
}

impl VptResult {
    fn at_step(step: usize, dt: f64, crossed: bool) -> Self {
        let t = step as f64 * dt;
        VptResult {
            t_vpt: t,
            t_vpt_lyapunov: t * LYAPUNOV_EXPONENT,
            crossed,
        }
    }
}

/// `⟨|y − ⟨y⟩|²⟩` over the whole target.
fn mean_square_spread(targets: &[State]) -> f64 {
    let n = targets.len() as f64;
    let mut mean = [0.0; 3];
    for s in targets {
        for i in 0..3 {
            mean[i] += s[i];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    targets
        .iter()
        .map(|s| (0..3).map(|i| (s[i] - mean[i]).powi(2)).sum::<f64>())
        .sum::<f64>()
        / n
}

fn sq_dist(a: &State, b: &State) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

/// Per-step normalised error `δ(k) = |y(k) − ŷ(k)|² / ⟨|y − ⟨y⟩|²⟩`.
pub fn vpt_errors(targets: &[State], predictions: &[State]) -> Vec<f64> {
    let spread = mean_square_spread(targets);
    targets
        .iter()
        .zip(predictions)
        .map(|(y, p)| sq_dist(y, p) / spread)
        .collect()
}

/// Valid prediction time: `dt` times the first step at which δ reaches
/// `threshold`. Runs that never cross report the full horizon.
///
/// A prediction shorter than the target (a diverged run) counts as crossing
/// at its first missing step; non-finite errors count as crossings.
pub fn vpt(targets: &[State], predictions: &[State], dt: f64, threshold: f64) -> VptResult {
    let horizon = targets.len();
    let spread = mean_square_spread(targets);
    for (k, y) in targets.iter().enumerate() {
        let Some(p) = predictions.get(k) else {
            return VptResult::at_step(k, dt, true);
        };
        let delta = sq_dist(y, p) / spread;
        if !(delta < threshold) {
            return VptResult::at_step(k, dt, true);
        }
    }
    VptResult::at_step(horizon, dt, false)
}

fn cells(traj: &[State], cube: f64) -> HashSet<[i64; 3]> {
    traj.iter()
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .map(|s| std::array::from_fn(|i| (s[i] / cube).floor() as i64))
        .collect()
}

/// Attractor deviation: number of phase-space cubes visited by exactly one
/// of the two trajectories.
pub fn adev(pred: &[State], truth: &[State], cube: f64) -> usize {
    let a = cells(pred, cube);
    let b = cells(truth, cube);
    a.symmetric_difference(&b).count()
}

/// Smoothed one-sided power spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
        .collect()
}

/// `|FFT(window · z)|²` over all `L` bins, unsmoothed.
pub fn windowed_spectrum(z: &[f64]) -> Vec<f64> {
    let window = hamming(z.len());
    let mut buf: Vec<Complex<f64>> = z
        .iter()
        .zip(&window)
        .map(|(v, w)| Complex::new(v * w, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

/// Centred moving average over `width` points, truncated at the edges
/// (index `i` averages `i − width/2 ..= i + width/2 − 1` where available).
pub fn moving_average(v: &[f64], width: usize) -> Vec<f64> {
    let n = v.len();
    let half = width / 2;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + v[i];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + width - half).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Hamming-windowed periodogram of `z`, one-sided (`0 ..= Nyquist`) and
/// smoothed with a 20-point running average.
pub fn psd(z: &[f64], dt: f64) -> Result<Psd> {
    if z.len() < PSD_MIN_LEN {
        return Err(Error::contract(format!(
            "PSD needs at least {PSD_MIN_LEN} samples, got {}",
            z.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::contract("sampling interval must be positive"));
    }
    let len = z.len();
    let spectrum = windowed_spectrum(z);
    let bins = len / 2 + 1;
    let frequencies = (0..bins).map(|k| k as f64 / (len as f64 * dt)).collect();
    let power = moving_average(&spectrum[..bins], PSD_SMOOTHING);
    Ok(Psd { frequencies, power })
}

/// Writes `f,S` rows.
pub fn write_psd_csv(path: &Path, psd: &Psd) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "f,S")?;
        for (f, s) in psd.frequencies.iter().zip(&psd.power) {
            writeln!(w, "{},{}", fmt_full(*f), fmt_full(*s))?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

/// Thresholds for closed-loop classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    /// Components must stay strictly below this magnitude.
    pub bound: f64,
    /// Length of the window inspected for fixed-point collapse.
    pub window: usize,
    /// A window whose per-component range is below this is a fixed point.
    pub eps: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            bound: 2.0,
            window: 100,
            eps: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResult {
    pub bounded: bool,
    /// Steps before the run diverged or settled onto a fixed point.
    pub oscillatory_steps: usize,
    /// First step that left the bound (or was missing/non-finite).
    pub diverged_at: Option<usize>,
    /// First step of the flat window that signalled a fixed point.
    pub collapsed_at: Option<usize>,
}

impl ClassifyResult {
    /// Bounded and never collapsed within the horizon.
    pub fn oscillatory(&self, horizon: usize) -> bool {
        self.bounded && self.oscillatory_steps >= horizon
    }
}

/// Classifies a closed-loop trajectory of expected length `horizon`.
pub fn classify(traj: &[State], horizon: usize, params: &ClassifyParams) -> ClassifyResult {
    let mut diverged_at = traj
        .iter()
        .position(|s| !s.iter().all(|v| v.is_finite() && v.abs() < params.bound));
    if diverged_at.is_none() && traj.len() < horizon {
        diverged_at = Some(traj.len());
    }

    let window = params.window.max(1);
    let mut collapsed_at = None;
    if traj.len() >= window {
        for end in window - 1..traj.len() {
            let start = end + 1 - window;
            let flat = (0..3).all(|i| {
                let (lo, hi) = traj[start..=end]
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                        (lo.min(s[i]), hi.max(s[i]))
                    });
                hi - lo < params.eps
            });
            if flat {
                collapsed_at = Some(start);
                break;
            }
        }
    }

    let oscillatory_steps = [diverged_at, collapsed_at]
        .into_iter()
        .flatten()
        .fold(horizon.min(traj.len()), usize::min);
    ClassifyResult {
        bounded: diverged_at.is_none(),
        oscillatory_steps,
        diverged_at,
        collapsed_at,
    }
}

/// VPT of the true Lorenz system started from the reservoir's first
/// prediction: the prediction is mapped back to raw units, integrated, and
/// compared against `target` sample by sample.
pub fn true_lorenz_vpt(
    first_prediction: &State,
    target: &[State],
    scaler: &AffineScaler,
    params: &LorenzParams,
    threshold: f64,
) -> Result<VptResult> {
    let dt = params.dt_sample;
    if target.is_empty() {
        return Ok(VptResult::at_step(0, dt, false));
    }
    let spread = mean_square_spread(target);
    let mut sampler = Sampler::new(*params, scaler.invert(first_prediction))?;
    for (k, y) in target.iter().enumerate() {
        let raw = if k + 1 == target.len() {
            sampler.state()
        } else {
            sampler.next_sample()?
        };
        let delta = sq_dist(y, &scaler.apply(&raw)) / spread;
        if !(delta < threshold) {
            return Ok(VptResult::at_step(k, dt, true));
        }
    }
    Ok(VptResult::at_step(target.len(), dt, false))
}
