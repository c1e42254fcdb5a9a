//! Lorenz-63 data generation: RK4 integration, subsampling, rescaling to the
//! unit cube, and the washout/train/test split used for reservoir training.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// A point in Lorenz phase space (raw or rescaled coordinates).
pub type State = [f64; 3];

/// Largest Lyapunov exponent of the standard Lorenz system, used to convert
/// model time into Lyapunov times.
pub const LYAPUNOV_EXPONENT: f64 = 0.91;

/// Any raw component beyond this magnitude aborts integration.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Model time integrated and discarded after a random initial condition.
pub const DEFAULT_TRANSIENT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// RK4 integration step.
    pub h: f64,
    /// Sampling interval; an integer multiple of `h`.
    pub dt_sample: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            c1: 10.0,
            c2: 28.0,
            c3: 8.0 / 3.0,
            h: 1e-3,
            dt_sample: 0.1,
        }
    }
}

impl LorenzParams {
    /// Number of RK4 steps per sample.
    pub fn steps_per_sample(&self) -> Result<usize> {
        if !(self.h > 0.0) || !(self.dt_sample > 0.0) {
            return Err(Error::contract(format!(
                "h and dt_sample must be positive (h = {}, dt_sample = {})",
                self.h, self.dt_sample
            )));
        }
        let ratio = self.dt_sample / self.h;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio {
            return Err(Error::contract(format!(
                "dt_sample {} is not an integer multiple of h {}",
                self.dt_sample, self.h
            )));
        }
        Ok(steps as usize)
    }

    /// Non-trivial equilibrium `(√(c3(c2−1)), √(c3(c2−1)), c2−1)`.
    pub fn fixed_point(&self) -> State {
        let r = (self.c3 * (self.c2 - 1.0)).sqrt();
        [r, r, self.c2 - 1.0]
    }
}

pub fn lorenz_derivative(s: &State, p: &LorenzParams) -> State {
    let [x, y, z] = *s;
    [
        p.c1 * y - p.c1 * x,
        x * (p.c2 - z) - y,
        x * y - p.c3 * z,
    ]
}

#[inline]
fn axpy(s: &State, a: f64, k: &State) -> State {
    [s[0] + a * k[0], s[1] + a * k[1], s[2] + a * k[2]]
}

#[inline]
fn rk4(s: &State, h: f64, p: &LorenzParams) -> State {
    let k1 = lorenz_derivative(s, p);
    let k2 = lorenz_derivative(&axpy(s, 0.5 * h, &k1), p);
    let k3 = lorenz_derivative(&axpy(s, 0.5 * h, &k2), p);
    let k4 = lorenz_derivative(&axpy(s, h, &k3), p);
    let w = h / 6.0;
    [
        s[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// One classical fourth-order Runge-Kutta step of size `h`.
pub fn rk4_step(s: &State, h: f64, p: &LorenzParams) -> Result<State> {
    if !(h > 0.0) {
        return Err(Error::contract(format!("RK4 step must be positive, got {h}")));
    }
    Ok(rk4(s, h, p))
}

/// Lazily integrates the Lorenz system and yields one state per sampling
/// interval, starting with the current state.
#[derive(Debug, Clone)]
pub struct Sampler {
    params: LorenzParams,
    steps_per_sample: usize,
    state: State,
    steps_taken: usize,
}

impl Sampler {
    pub fn new(params: LorenzParams, initial: State) -> Result<Self> {
        let steps_per_sample = params.steps_per_sample()?;
        if !initial.iter().all(|v| v.is_finite()) {
            return Err(Error::contract("initial state is not finite"));
        }
        Ok(Sampler {
            params,
            steps_per_sample,
            state: initial,
            steps_taken: 0,
        })
    }

    pub fn state(&self) -> State {
        self.state
    }

    /// Advances by `n` integration steps.
    pub fn advance_steps(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.state = rk4(&self.state, self.params.h, &self.params);
            self.steps_taken += 1;
            if !self
                .state
                .iter()
                .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_BOUND)
            {
                return Err(Error::IntegrationDiverged {
                    step: self.steps_taken,
                });
            }
        }
        Ok(())
    }

    /// Discards `time` units of model time (rounded to whole steps).
    pub fn skip_time(&mut self, time: f64) -> Result<()> {
        if !(time >= 0.0) {
            return Err(Error::contract(format!("transient time must be >= 0, got {time}")));
        }
        self.advance_steps((time / self.params.h).round() as usize)
    }

    /// Returns the current state and advances one sampling interval.
    pub fn next_sample(&mut self) -> Result<State> {
        let out = self.state;
        self.advance_steps(self.steps_per_sample)?;
        Ok(out)
    }
}

/// Integrates from `initial`, discards `transient_time`, then records
/// `n_samples` states spaced `dt_sample` apart.
pub fn generate_raw(
    params: &LorenzParams,
    initial: State,
    n_samples: usize,
    transient_time: f64,
) -> Result<Vec<State>> {
    if n_samples == 0 {
        return Err(Error::contract("n_samples must be >= 1"));
    }
    let mut sampler = Sampler::new(*params, initial)?;
    sampler.skip_time(transient_time)?;
    let mut out = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        if i + 1 == n_samples {
            // No need to integrate past the final recorded sample.
            out.push(sampler.state());
        } else {
            out.push(sampler.next_sample()?);
        }
    }
    Ok(out)
}

/// Initial condition drawn uniformly from `[−10,10]×[−10,10]×[5,30]`.
pub fn random_initial_state(rng: &mut seed::Rng) -> State {
    [
        rng.gen_range(-10.0..=10.0),
        rng.gen_range(-10.0..=10.0),
        rng.gen_range(5.0..=30.0),
    ]
}

/// Per-component affine map from raw Lorenz units onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineScaler {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl AffineScaler {
    pub fn apply(&self, raw: &State) -> State {
        std::array::from_fn(|i| (raw[i] - self.min[i]) / (self.max[i] - self.min[i]))
    }

    pub fn invert(&self, scaled: &State) -> State {
        std::array::from_fn(|i| self.min[i] + scaled[i] * (self.max[i] - self.min[i]))
    }

    pub fn apply_all(&self, raw: &[State]) -> Vec<State> {
        raw.iter().map(|s| self.apply(s)).collect()
    }
}

/// Fits per-component min/max of `raw`.
pub fn fit_scaler(raw: &[State]) -> Result<AffineScaler> {
    if raw.is_empty() {
        return Err(Error::contract("cannot fit a scaler to an empty sequence"));
    }
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for s in raw {
        for i in 0..3 {
            min[i] = min[i].min(s[i]);
            max[i] = max[i].max(s[i]);
        }
    }
    for i in 0..3 {
        if !(max[i] > min[i]) {
            return Err(Error::DegenerateScaler {
                component: i,
                value: min[i],
            });
        }
    }
    Ok(AffineScaler { min, max })
}

/// A rescaled, uniformly sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub points: Vec<State>,
    pub scaler: AffineScaler,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Generates a fresh trajectory from a random initial condition drawn
    /// from `seed`, rescaled with a caller-supplied scaler.
    pub fn random_start(
        params: &LorenzParams,
        seed: u64,
        n_samples: usize,
        scaler: AffineScaler,
    ) -> Result<Trajectory> {
        let mut rng = seed::rng(seed);
        let initial = random_initial_state(&mut rng);
        let raw = generate_raw(params, initial, n_samples, DEFAULT_TRANSIENT)?;
        Ok(Trajectory {
            dt: params.dt_sample,
            points: scaler.apply_all(&raw),
            scaler,
        })
    }
}

/// Washout, training and testing segments cut from one contiguous trajectory.
///
/// Targets are the inputs shifted one sample ahead: `train_targets[k] ==
/// train_inputs[k + 1]`, and the last training target is the first test input.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dt: f64,
    pub seed: u64,
    pub scaler: AffineScaler,
    pub washout: Vec<State>,
    pub train_inputs: Vec<State>,
    pub train_targets: Vec<State>,
    pub test_inputs: Vec<State>,
    pub test_targets: Vec<State>,
}

impl Dataset {
    /// Washout followed by training inputs, the sequence fed during harvesting.
    pub fn harvest_inputs(&self) -> Vec<State> {
        let mut v = Vec::with_capacity(self.washout.len() + self.train_inputs.len());
        v.extend_from_slice(&self.washout);
        v.extend_from_slice(&self.train_inputs);
        v
    }
}

/// Generates `k_washout + k_train + k_test + 1` samples from a random initial
/// condition, fits the scaler on the whole series and splits it.
pub fn build_dataset(
    params: &LorenzParams,
    seed: u64,
    k_washout: usize,
    k_train: usize,
    k_test: usize,
) -> Result<Dataset> {
    if k_washout == 0 || k_train == 0 || k_test == 0 {
        return Err(Error::contract(
            "washout, training and testing lengths must all be >= 1",
        ));
    }
    let mut rng = seed::rng(seed);
    let initial = random_initial_state(&mut rng);
    let total = k_washout + k_train + k_test + 1;
    let raw = generate_raw(params, initial, total, DEFAULT_TRANSIENT)?;
    let scaler = fit_scaler(&raw)?;
    let scaled = scaler.apply_all(&raw);

    let train_start = k_washout;
    let test_start = train_start + k_train;
    let end = test_start + k_test;
    Ok(Dataset {
        dt: params.dt_sample,
        seed,
        scaler,
        washout: scaled[..train_start].to_vec(),
        train_inputs: scaled[train_start..test_start].to_vec(),
        train_targets: scaled[train_start + 1..test_start + 1].to_vec(),
        test_inputs: scaled[test_start..end].to_vec(),
        test_targets: scaled[test_start + 1..end + 1].to_vec(),
    })
}

/// JSON sidecar describing how a trajectory CSV was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerSidecar {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub h: f64,
    pub dt_sample: f64,
    pub seed: u64,
    /// Which samples the min/max were taken over.
    pub fit_on: String,
}

/// Full-precision (17 significant digits) CSV value.
pub(crate) fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `k,X,Y,Z` rows.
pub fn write_trajectory_csv(path: &Path, points: &[State]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "k,X,Y,Z")?;
        for (k, p) in points.iter().enumerate() {
            writeln!(w, "{k},{},{},{}", fmt_full(p[0]), fmt_full(p[1]), fmt_full(p[2]))?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<State>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.into(),
        source: e,
    })?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<(usize, f64, f64, f64)>() {
        let (_, x, y, z) = rec.map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
        out.push([x, y, z]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn derivative_hand_cases() {
        let p = LorenzParams::default();
        assert_eq!(lorenz_derivative(&[0.0; 3], &p), [0.0; 3]);
        let d = lorenz_derivative(&[1.0, 2.0, 3.0], &p);
        assert_abs_diff_eq!(d[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], 23.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[2], -6.0, epsilon = 1e-12);
        for v in lorenz_derivative(&p.fixed_point(), &p) {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rk4_preserves_origin_and_rejects_zero_step() {
        let p = LorenzParams::default();
        assert_eq!(rk4_step(&[0.0; 3], 1e-3, &p).unwrap(), [0.0; 3]);
        assert!(matches!(rk4_step(&[1.0; 3], 0.0, &p), Err(Error::Contract(_))));
    }

    #[test]
    fn rk4_matches_fine_step_composition() {
        let p = LorenzParams::default();
        let coarse = rk4_step(&[1.0; 3], 1e-3, &p).unwrap();
        let mut fine = [1.0; 3];
        for _ in 0..100 {
            fine = rk4_step(&fine, 1e-5, &p).unwrap();
        }
        // one-step local error is O(h^5) with rates near 30
        for i in 0..3 {
            assert_abs_diff_eq!(coarse[i], fine[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn sampling_interval_must_be_multiple_of_step() {
        let p = LorenzParams {
            dt_sample: 0.1005,
            ..Default::default()
        };
        assert!(p.steps_per_sample().is_err());
        assert_eq!(LorenzParams::default().steps_per_sample().unwrap(), 100);
    }

    #[test]
    fn single_sample_from_origin() {
        let p = LorenzParams::default();
        assert_eq!(generate_raw(&p, [0.0; 3], 1, 0.0).unwrap(), vec![[0.0; 3]]);
        assert!(generate_raw(&p, [0.0; 3], 0, 0.0).is_err());
    }

    #[test]
    fn divergence_guard_trips() {
        // Unstable parameters blow up quickly.
        let p = LorenzParams {
            c1: -50.0,
            ..Default::default()
        };
        assert!(matches!(
            generate_raw(&p, [1.0, 1.0, 1.0], 1000, 0.0),
            Err(Error::IntegrationDiverged { .. })
        ));
    }

    #[test]
    fn scaler_maps_to_unit_interval() {
        let raw = [[-20.0, 0.0, 1.0], [20.0, 4.0, 3.0]];
        let s = fit_scaler(&raw).unwrap();
        assert_eq!(s.min[0], -20.0);
        assert_eq!(s.max[0], 20.0);
        assert_eq!(s.apply(&[0.0, 2.0, 2.0]), [0.5, 0.5, 0.5]);
        let back = s.invert(&s.apply(&[3.7, 1.1, 2.9]));
        for (a, b) in back.iter().zip([3.7, 1.1, 2.9]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_component_is_an_error() {
        let raw = [[1.0, 2.0, 3.0], [2.0, 2.0, 4.0]];
        assert!(matches!(
            fit_scaler(&raw),
            Err(Error::DegenerateScaler { component: 1, .. })
        ));
    }

    #[test]
    fn dataset_segments_are_aligned() {
        let p = LorenzParams::default();
        let d = build_dataset(&p, 3, 50, 200, 80).unwrap();
        assert_eq!(d.washout.len(), 50);
        assert_eq!(d.train_inputs.len(), 200);
        assert_eq!(d.train_targets.len(), 200);
        assert_eq!(d.test_inputs.len(), 80);
        assert_eq!(d.test_targets.len(), 80);
        for k in 0..199 {
            assert_eq!(d.train_targets[k], d.train_inputs[k + 1]);
        }
        assert_eq!(d.train_targets[199], d.test_inputs[0]);
        for k in 0..79 {
            assert_eq!(d.test_targets[k], d.test_inputs[k + 1]);
        }
        let other = build_dataset(&p, 4, 50, 200, 80).unwrap();
        assert_ne!(d.train_inputs, other.train_inputs);
    }
}
