//! Echo-state reservoirs with tanh nodes, their readout training, and the
//! autonomous system obtained by feeding the readout back as input.
//!
//! Open loop the reservoir follows `x ← tanh(W_int x + W_in u)`. After the
//! readout `ŷ = [x, 1]ᵀ W` is trained, substituting `u = ŷ` folds the readout
//! into the coupling and gives the closed-loop map
//! `x ← tanh(W_a x + b)` with `W_a = W_int + W_in Ŵᵀ` (Ŵ is `W` without its
//! bias row) and `b = W_in w_bias`.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Identity coupling: every node only feeds back on itself.
    Uncoupled,
    /// Unidirectional ring (cyclic shift matrix).
    Ring,
    /// Dense coupling with entries uniform on `[0, 1]`.
    Random,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Uncoupled, Topology::Ring, Topology::Random];

    pub fn name(self) -> &'static str {
        match self {
            Topology::Uncoupled => "uncoupled",
            Topology::Ring => "ring",
            Topology::Random => "random",
        }
    }

    /// Stable numeric label for seed derivation.
    pub fn seed_label(self) -> u64 {
        match self {
            Topology::Uncoupled => 1,
            Topology::Ring => 2,
            Topology::Random => 3,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uncoupled" | "identity" => Ok(Topology::Uncoupled),
            "ring" => Ok(Topology::Ring),
            "random" => Ok(Topology::Random),
            other => Err(Error::Config(format!(
                "unknown topology {other:?} (expected uncoupled, ring or random)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub nodes: usize,
    pub inputs: usize,
    pub topology: Topology,
    /// Target spectral radius of the internal coupling.
    pub rho_r: f64,
    /// Input weights are uniform on `[−input_scale, input_scale]`.
    pub input_scale: f64,
    pub weight_seed: u64,
}

impl Default for ReservoirSpec {
    fn default() -> Self {
        ReservoirSpec {
            nodes: 20,
            inputs: 3,
            topology: Topology::Uncoupled,
            rho_r: 0.2,
            input_scale: 1.0,
            weight_seed: 0,
        }
    }
}

impl ReservoirSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 || self.inputs == 0 {
            return Err(Error::Config("node and input counts must be >= 1".into()));
        }
        if !(self.rho_r >= 0.0) || !self.rho_r.is_finite() {
            return Err(Error::Config(format!("rho_R must be >= 0, got {}", self.rho_r)));
        }
        if !(self.input_scale >= 0.0) || !self.input_scale.is_finite() {
            return Err(Error::Config(format!(
                "input scale must be >= 0, got {}",
                self.input_scale
            )));
        }
        Ok(())
    }
}

/// Internal coupling matrix plus how many random draws had to be discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub weights: Matrix,
    pub redraws: u32,
}

fn ring_shift(n: usize) -> Matrix {
    // ones on the subdiagonal and in the top-right corner
    Matrix::from_fn(n, n, |i, j| if (j + 1) % n == i { 1.0 } else { 0.0 })
}

/// Builds `W_int` with spectral radius `rho_r` for the given topology.
pub fn build_coupling(topology: Topology, nodes: usize, rho_r: f64, seed: u64) -> Result<Coupling> {
    if nodes == 0 {
        return Err(Error::contract("node count must be >= 1"));
    }
    if !(rho_r >= 0.0) || !rho_r.is_finite() {
        return Err(Error::contract(format!("rho_R must be >= 0, got {rho_r}")));
    }
    if rho_r == 0.0 {
        return Ok(Coupling {
            weights: Matrix::zeros(nodes, nodes),
            redraws: 0,
        });
    }
    match topology {
        Topology::Uncoupled => Ok(Coupling {
            weights: Matrix::identity(nodes).scaled(rho_r),
            redraws: 0,
        }),
        Topology::Ring => Ok(Coupling {
            weights: ring_shift(nodes).scaled(rho_r),
            redraws: 0,
        }),
        Topology::Random => {
            let mut redraws = 0u32;
            loop {
                let mut rng = seed::rng(seed::derive(seed, &[u64::from(redraws)]));
                let raw = Matrix::from_fn(nodes, nodes, |_, _| rng.gen_range(0.0..=1.0));
                let radius = linalg::spectral_radius(&raw)?;
                if radius > 0.0 && radius.is_finite() {
                    return Ok(Coupling {
                        weights: raw.scaled(rho_r / radius),
                        redraws,
                    });
                }
                log::warn!("random coupling draw {redraws} has zero spectral radius, redrawing");
                redraws += 1;
            }
        }
    }
}

/// I.i.d. uniform input weights on `[−scale, scale]`.
pub fn build_input_weights(nodes: usize, inputs: usize, scale: f64, seed: u64) -> Matrix {
    if scale == 0.0 {
        return Matrix::zeros(nodes, inputs);
    }
    let mut rng = seed::rng(seed);
    Matrix::from_fn(nodes, inputs, |_, _| rng.gen_range(-scale..=scale))
}

/// A driven tanh network. Single-threaded mutable state.
#[derive(Debug, Clone)]
pub struct Reservoir {
    w_int: Matrix,
    w_in: Matrix,
    state: Vec<f64>,
    scratch: Vec<f64>,
    coupling_redraws: u32,
}

impl Reservoir {
    pub fn new(spec: &ReservoirSpec) -> Result<Self> {
        spec.validate()?;
        let coupling = build_coupling(
            spec.topology,
            spec.nodes,
            spec.rho_r,
            seed::derive(spec.weight_seed, &[seed::stream::COUPLING]),
        )?;
        let w_in = build_input_weights(
            spec.nodes,
            spec.inputs,
            spec.input_scale,
            seed::derive(spec.weight_seed, &[seed::stream::INPUT_WEIGHTS]),
        );
        let mut r = Reservoir::from_parts(coupling.weights, w_in)?;
        r.coupling_redraws = coupling.redraws;
        Ok(r)
    }

    /// Reservoir with explicit weights and a zero state.
    pub fn from_parts(w_int: Matrix, w_in: Matrix) -> Result<Self> {
        if !w_int.is_square() || w_in.rows() != w_int.rows() || w_in.cols() == 0 {
            return Err(Error::contract(format!(
                "incompatible coupling {}x{} and input weights {}x{}",
                w_int.rows(),
                w_int.cols(),
                w_in.rows(),
                w_in.cols()
            )));
        }
        let m = w_int.rows();
        Ok(Reservoir {
            w_int,
            w_in,
            state: vec![0.0; m],
            scratch: vec![0.0; m],
            coupling_redraws: 0,
        })
    }

    pub fn nodes(&self) -> usize {
        self.w_int.rows()
    }

    pub fn inputs(&self) -> usize {
        self.w_in.cols()
    }

    pub fn w_int(&self) -> &Matrix {
        &self.w_int
    }

    pub fn w_in(&self) -> &Matrix {
        &self.w_in
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn coupling_redraws(&self) -> u32 {
        self.coupling_redraws
    }

    pub fn reset(&mut self) {
        self.state.fill(0.0);
    }

    pub fn set_state(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.state.len() {
            return Err(Error::contract(format!(
                "state has {} entries, reservoir has {} nodes",
                x.len(),
                self.state.len()
            )));
        }
        self.state.copy_from_slice(x);
        Ok(())
    }

    /// `x ← tanh(W_int x + W_in u)`; returns the new state.
    pub fn step(&mut self, input: &[f64]) -> &[f64] {
        assert_eq!(
            input.len(),
            self.inputs(),
            "input length does not match reservoir"
        );
        self.w_int.mul_vec_into(&self.state, &mut self.scratch);
        for (i, s) in self.scratch.iter_mut().enumerate() {
            *s = (*s + dot(self.w_in.row(i), input)).tanh();
        }
        std::mem::swap(&mut self.state, &mut self.scratch);
        &self.state
    }
}

/// Time-ordered reservoir responses with a trailing bias column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix(Matrix);

impl StateMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.rows() == 0
    }
}

/// Feeds all `inputs` and keeps the states that follow input `washout + k`.
///
/// The reservoir is expected to start from the zero state; whatever state it
/// holds is forgotten after a long enough washout anyway.
pub fn harvest<I: AsRef<[f64]>>(
    reservoir: &mut Reservoir,
    inputs: &[I],
    washout: usize,
) -> Result<StateMatrix> {
    if inputs.len() <= washout {
        return Err(Error::contract(format!(
            "{} inputs leave nothing after a washout of {washout}",
            inputs.len()
        )));
    }
    let m = reservoir.nodes();
    let mut s = Matrix::zeros(inputs.len() - washout, m + 1);
    for (k, u) in inputs.iter().enumerate() {
        let x = reservoir.step(u.as_ref());
        if k >= washout {
            let row = s.row_mut(k - washout);
            row[..m].copy_from_slice(x);
            row[m] = 1.0;
        }
    }
    Ok(StateMatrix(s))
}

/// Ridge-regressed readout `W` of shape `(N+1) × q`; the last row holds the
/// bias weights.
pub fn train_readout<T: AsRef<[f64]>>(
    states: &StateMatrix,
    targets: &[T],
    lambda: f64,
) -> Result<Matrix> {
    let y = Matrix::from_rows(targets)?;
    linalg::ridge_solve(states.matrix(), &y, lambda)
}

/// `ŷ = [x, 1]ᵀ W`, written into `out`.
pub fn readout_into(x: &[f64], w: &Matrix, out: &mut [f64]) {
    let n = x.len();
    debug_assert_eq!(w.rows(), n + 1);
    out.copy_from_slice(w.row(n));
    for (j, xj) in x.iter().enumerate() {
        for (o, wji) in out.iter_mut().zip(w.row(j)) {
            *o += xj * wji;
        }
    }
}

pub fn readout(x: &[f64], w: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; w.cols()];
    readout_into(x, w, &mut out);
    out
}

fn check_readout(reservoir: &Reservoir, w: &Matrix) -> Result<()> {
    if w.rows() != reservoir.nodes() + 1 {
        return Err(Error::contract(format!(
            "readout has {} rows, expected {}",
            w.rows(),
            reservoir.nodes() + 1
        )));
    }
    Ok(())
}

/// Drives the reservoir with the true inputs and emits one readout per step.
pub fn predict_open_loop<I: AsRef<[f64]>>(
    reservoir: &mut Reservoir,
    w: &Matrix,
    inputs: &[I],
) -> Result<Matrix> {
    check_readout(reservoir, w)?;
    let mut out = Matrix::zeros(inputs.len(), w.cols());
    for (k, u) in inputs.iter().enumerate() {
        let x = reservoir.step(u.as_ref());
        readout_into(x, w, out.row_mut(k));
    }
    Ok(out)
}

/// Folds a trained readout into the coupling: returns `(W_a, b)`.
pub fn build_autonomous(w_int: &Matrix, w_in: &Matrix, w: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let m = w_int.rows();
    let q = w.cols();
    if !w_int.is_square() || w_in.rows() != m || w.rows() != m + 1 {
        return Err(Error::contract(format!(
            "shape mismatch: W_int {}x{}, W_in {}x{}, W {}x{}",
            w_int.rows(),
            w_int.cols(),
            w_in.rows(),
            w_in.cols(),
            w.rows(),
            w.cols()
        )));
    }
    if w_in.cols() != q {
        return Err(Error::contract(format!(
            "closing the loop needs as many outputs as inputs ({} vs {})",
            q,
            w_in.cols()
        )));
    }
    let bias = w.row(m);
    let b: Vec<f64> = (0..m).map(|i| dot(w_in.row(i), bias)).collect();
    let w_a = Matrix::from_fn(m, m, |i, n| w_int[(i, n)] + dot(w_in.row(i), w.row(n)));
    Ok((w_a, b))
}

/// Readout plus the derived autonomous system.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub readout: Matrix,
    pub w_a: Matrix,
    pub bias: Vec<f64>,
    pub rho_a: f64,
}

impl TrainedModel {
    pub fn new(reservoir: &Reservoir, readout: Matrix) -> Result<Self> {
        let (w_a, bias) = build_autonomous(reservoir.w_int(), reservoir.w_in(), &readout)?;
        let rho_a = linalg::spectral_radius(&w_a)?;
        Ok(TrainedModel {
            readout,
            w_a,
            bias,
            rho_a,
        })
    }

    pub fn nodes(&self) -> usize {
        self.w_a.rows()
    }

    pub fn outputs(&self) -> usize {
        self.readout.cols()
    }
}

/// Outputs of an autonomous run. `diverged_at` marks the step at which the
/// state stopped being finite; `outputs` then holds only the steps before it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopRun {
    pub outputs: Matrix,
    pub diverged_at: Option<usize>,
}

impl ClosedLoopRun {
    pub fn len(&self) -> usize {
        self.outputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.rows() == 0
    }

    /// Rows as 3-vectors; panics unless the model has three outputs.
    pub fn states(&self) -> Vec<[f64; 3]> {
        assert_eq!(self.outputs.cols(), 3, "closed-loop run is not three-dimensional");
        (0..self.outputs.rows())
            .map(|k| {
                let r = self.outputs.row(k);
                [r[0], r[1], r[2]]
            })
            .collect()
    }
}

/// Iterates `x ← tanh(W_a x + b)` from `state`, emitting `[x, 1]ᵀ W` before
/// each update, so the first output is the one-step prediction from the
/// synchronised state.
pub fn run_closed_loop(model: &TrainedModel, state: &[f64], n_steps: usize) -> Result<ClosedLoopRun> {
    let m = model.nodes();
    if state.len() != m {
        return Err(Error::contract(format!(
            "state has {} entries, model has {m} nodes",
            state.len()
        )));
    }
    let q = model.outputs();
    let mut x = state.to_vec();
    let mut next = vec![0.0; m];
    let mut out = Vec::with_capacity(n_steps * q);
    let mut y = vec![0.0; q];
    let mut diverged_at = None;
    for k in 0..n_steps {
        if !x.iter().all(|v| v.is_finite()) {
            diverged_at = Some(k);
            break;
        }
        readout_into(&x, &model.readout, &mut y);
        out.extend_from_slice(&y);
        model.w_a.mul_vec_into(&x, &mut next);
        for (n, b) in next.iter_mut().zip(&model.bias) {
            *n = (*n + b).tanh();
        }
        std::mem::swap(&mut x, &mut next);
    }
    let rows = out.len() / q.max(1);
    Ok(ClosedLoopRun {
        outputs: Matrix::from_row_major(rows, q, out)?,
        diverged_at,
    })
}

/// Serialised form of a trained reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "M")]
    pub nodes: usize,
    pub p: usize,
    pub q: usize,
    pub topology: Topology,
    #[serde(rename = "rho_R")]
    pub rho_r: f64,
    pub lambda: f64,
    pub input_scale: f64,
    pub seeds: ModelSeeds,
    #[serde(rename = "W_int")]
    pub w_int: Matrix,
    #[serde(rename = "W_in")]
    pub w_in: Matrix,
    #[serde(rename = "W")]
    pub readout: Matrix,
    #[serde(rename = "W_a")]
    pub w_a: Matrix,
    pub b: Vec<f64>,
    pub rho_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSeeds {
    pub weight_seed: u64,
    pub master_seed: u64,
    pub realization_index: u64,
    pub coupling_redraws: u32,
}

impl ModelFile {
    pub fn new(
        spec: &ReservoirSpec,
        lambda: f64,
        seeds: ModelSeeds,
        reservoir: &Reservoir,
        model: &TrainedModel,
    ) -> Self {
        ModelFile {
            nodes: reservoir.nodes(),
            p: reservoir.inputs(),
            q: model.outputs(),
            topology: spec.topology,
            rho_r: spec.rho_r,
            lambda,
            input_scale: spec.input_scale,
            seeds,
            w_int: reservoir.w_int().clone(),
            w_in: reservoir.w_in().clone(),
            readout: model.readout.clone(),
            w_a: model.w_a.clone(),
            b: model.bias.clone(),
            rho_a: model.rho_a,
        }
    }
}
