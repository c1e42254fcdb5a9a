//! Experiment orchestration: one seeded realization of the full pipeline,
//! sweeps over topologies and spectral radii, aggregation and export.

mod export;
mod stats;
mod sweep;

pub use export::{export, read_records, write_json, write_records, write_summary, SweepMeta};
pub use stats::{aggregate, percentile, CellSummary, Quantiles, SweepSummary};
pub use sweep::{cell_seed, reference_adev, rho_grid, run_sweep, SweepConfig, SweepResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorenz::{self, Dataset, LorenzParams, State, Trajectory};
use crate::metrics::{self, ClassifyParams, ClassifyResult, VptResult};
use crate::reservoir::{
    self, ModelFile, ModelSeeds, Reservoir, ReservoirSpec, Topology, TrainedModel,
};
use crate::seed;

/// Everything needed to reproduce one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub spec: ReservoirSpec,
    pub lambda: f64,
    /// Washout length `K_B`.
    pub washout: usize,
    /// Training length `K_T`.
    pub train: usize,
    /// Open-loop test length.
    pub test: usize,
    /// Closed-loop prediction steps.
    pub horizon: usize,
    /// Open-loop steps used to synchronise the reservoir to the prediction target.
    pub sync_steps: usize,
    /// Seeds the Lorenz data together with `realization_index`.
    pub master_seed: u64,
    pub realization_index: u64,
    pub lorenz: LorenzParams,
    pub classify: ClassifyParams,
    pub vpt_threshold: f64,
    pub adev_cube: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: ReservoirSpec::default(),
            lambda: 1e-6,
            washout: 10_000,
            train: 10_000,
            test: 5_000,
            horizon: 5_000,
            sync_steps: 1_000,
            master_seed: 0,
            realization_index: 0,
            lorenz: LorenzParams::default(),
            classify: ClassifyParams::default(),
            vpt_threshold: metrics::VPT_THRESHOLD,
            adev_cube: metrics::ADEV_CUBE,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.spec.inputs != 3 {
            return Err(Error::Config("the Lorenz task needs 3 reservoir inputs".into()));
        }
        for (name, v) in [
            ("washout", self.washout),
            ("train", self.train),
            ("test", self.test),
            ("horizon", self.horizon),
            ("sync", self.sync_steps),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} length must be >= 1")));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        self.lorenz
            .steps_per_sample()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn training_seed(&self) -> u64 {
        seed::derive(
            self.master_seed,
            &[self.realization_index, seed::stream::TRAINING_DATA],
        )
    }

    pub fn prediction_seed(&self) -> u64 {
        seed::derive(
            self.master_seed,
            &[self.realization_index, seed::stream::PREDICTION_DATA],
        )
    }
}

/// Lorenz data for one realization: the training/testing dataset and the
/// independent trajectory used as the closed-loop reference.
#[derive(Debug, Clone)]
pub struct RealizationData {
    pub dataset: Dataset,
    /// `sync_steps + horizon` samples, rescaled with the dataset's scaler.
    pub prediction: Trajectory,
}

impl RealizationData {
    pub fn generate(config: &RunConfig) -> Result<Self> {
        let dataset = lorenz::build_dataset(
            &config.lorenz,
            config.training_seed(),
            config.washout,
            config.train,
            config.test,
        )?;
        let prediction = Trajectory::random_start(
            &config.lorenz,
            config.prediction_seed(),
            config.sync_steps + config.horizon,
            dataset.scaler,
        )?;
        Ok(RealizationData {
            dataset,
            prediction,
        })
    }

    fn matches(&self, config: &RunConfig) -> bool {
        self.dataset.seed == config.training_seed()
            && self.dataset.washout.len() == config.washout
            && self.dataset.train_inputs.len() == config.train
            && self.dataset.test_inputs.len() == config.test
            && self.prediction.len() == config.sync_steps + config.horizon
    }
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub topology: Topology,
    pub rho_index: usize,
    #[serde(rename = "rho_R")]
    pub rho_r: f64,
    pub realization_index: u64,
    pub nrmse_x: f64,
    pub nrmse_y: f64,
    pub nrmse_z: f64,
    /// Closed-loop valid prediction time (model time).
    pub vpt: f64,
    pub vpt_lyapunov: f64,
    pub bounded: bool,
    pub oscillatory: bool,
    pub oscillatory_steps: usize,
    /// Only present for bounded runs.
    pub adev: Option<usize>,
    pub rho_a: f64,
    pub true_lorenz_vpt: f64,
    /// Empty for successful realizations.
    pub failure: String,
}

impl MetricsRecord {
    pub fn is_failure(&self) -> bool {
        !self.failure.is_empty()
    }

    fn failed(config: &RunConfig, rho_index: usize, reason: String) -> Self {
        MetricsRecord {
            topology: config.spec.topology,
            rho_index,
            rho_r: config.spec.rho_r,
            realization_index: config.realization_index,
            nrmse_x: f64::NAN,
            nrmse_y: f64::NAN,
            nrmse_z: f64::NAN,
            vpt: f64::NAN,
            vpt_lyapunov: f64::NAN,
            bounded: false,
            oscillatory: false,
            oscillatory_steps: 0,
            adev: None,
            rho_a: f64::NAN,
            true_lorenz_vpt: f64::NAN,
            failure: reason,
        }
    }
}

/// Full output of one realization, including the trained model and the
/// closed-loop time series.
#[derive(Debug, Clone)]
pub struct Realization {
    pub reservoir: Reservoir,
    pub model: TrainedModel,
    pub nrmse: [f64; 3],
    /// Reference trajectory over the prediction horizon.
    pub target: Vec<State>,
    /// Closed-loop output; shorter than `target` if the state went non-finite.
    pub predicted: Vec<State>,
    pub classification: ClassifyResult,
    pub vpt: VptResult,
    pub true_lorenz_vpt: VptResult,
    pub adev: Option<usize>,
}

impl Realization {
    pub fn record(&self, config: &RunConfig, rho_index: usize) -> MetricsRecord {
        MetricsRecord {
            topology: config.spec.topology,
            rho_index,
            rho_r: config.spec.rho_r,
            realization_index: config.realization_index,
            nrmse_x: self.nrmse[0],
            nrmse_y: self.nrmse[1],
            nrmse_z: self.nrmse[2],
            vpt: self.vpt.t_vpt,
            vpt_lyapunov: self.vpt.t_vpt_lyapunov,
            bounded: self.classification.bounded,
            oscillatory: self.classification.oscillatory(config.horizon),
            oscillatory_steps: self.classification.oscillatory_steps,
            adev: self.adev,
            rho_a: self.model.rho_a,
            true_lorenz_vpt: self.true_lorenz_vpt.t_vpt,
            failure: String::new(),
        }
    }

    pub fn model_file(&self, config: &RunConfig) -> ModelFile {
        ModelFile::new(
            &config.spec,
            config.lambda,
            ModelSeeds {
                weight_seed: config.spec.weight_seed,
                master_seed: config.master_seed,
                realization_index: config.realization_index,
                coupling_redraws: self.reservoir.coupling_redraws(),
            },
            &self.reservoir,
            &self.model,
        )
    }
}

/// Runs the whole pipeline: train on the dataset, score open loop on the
/// test segment, synchronise on the prediction trajectory, run closed loop
/// and compute every closed-loop measure.
pub fn simulate(config: &RunConfig, data: &RealizationData) -> Result<Realization> {
    config.validate()?;
    if !data.matches(config) {
        return Err(Error::contract("realization data was generated for a different config"));
    }
    let dataset = &data.dataset;

    let mut res = Reservoir::new(&config.spec)?;
    let states = reservoir::harvest(&mut res, &dataset.harvest_inputs(), config.washout)?;
    let readout = reservoir::train_readout(&states, &dataset.train_targets, config.lambda)?;
    drop(states);

    // The reservoir is already synchronised with the test segment, which
    // continues the training inputs.
    let open = reservoir::predict_open_loop(&mut res, &readout, &dataset.test_inputs)?;
    let open: Vec<State> = (0..open.rows())
        .map(|k| {
            let r = open.row(k);
            [r[0], r[1], r[2]]
        })
        .collect();
    let nrmse = metrics::nrmse3(&dataset.test_targets, &open)?;

    let model = TrainedModel::new(&res, readout)?;

    let (sync, target) = data.prediction.points.split_at(config.sync_steps);
    res.reset();
    for u in sync {
        res.step(u);
    }
    let run = reservoir::run_closed_loop(&model, res.state(), config.horizon)?;
    let predicted = run.states();
    let first = reservoir::readout(res.state(), &model.readout);

    let classification = metrics::classify(&predicted, config.horizon, &config.classify);
    let dt = config.lorenz.dt_sample;
    let vpt = metrics::vpt(target, &predicted, dt, config.vpt_threshold);
    let adev = classification
        .bounded
        .then(|| metrics::adev(&predicted, target, config.adev_cube));
    let true_lorenz_vpt = metrics::true_lorenz_vpt(
        &[first[0], first[1], first[2]],
        target,
        &dataset.scaler,
        &config.lorenz,
        config.vpt_threshold,
    )?;

    Ok(Realization {
        reservoir: res,
        model,
        nrmse,
        target: target.to_vec(),
        predicted,
        classification,
        vpt,
        true_lorenz_vpt,
        adev,
    })
}

/// Runs one realization and summarises it. Failures become a record with
/// the reason instead of an error.
pub fn run_realization(config: &RunConfig) -> MetricsRecord {
    run_realization_with(config, None, 0)
}

pub(crate) fn run_realization_with(
    config: &RunConfig,
    data: Option<&RealizationData>,
    rho_index: usize,
) -> MetricsRecord {
    let result = match data {
        Some(d) => simulate(config, d),
        None => RealizationData::generate(config).and_then(|d| simulate(config, &d)),
    };
    match result {
        Ok(r) => r.record(config, rho_index),
        Err(e) => {
            log::warn!(
                "realization {} ({}, rho_R = {}) failed: {e}",
                config.realization_index,
                config.spec.topology,
                config.spec.rho_r
            );
            MetricsRecord::failed(config, rho_index, e.to_string())
        }
    }
}
