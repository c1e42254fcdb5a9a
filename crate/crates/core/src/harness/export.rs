use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{MetricsRecord, RunConfig, SweepConfig, SweepSummary};
use crate::error::{Error, Result};
use crate::lorenz;
use crate::reservoir::Topology;
use crate::seed;

/// Everything needed to interpret (and rerun) a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub software: String,
    pub version: String,
    pub prng: String,
    pub master_seed: u64,
    pub topologies: Vec<Topology>,
    pub rho_grid: Vec<f64>,
    pub realizations: u64,
    pub config: RunConfig,
    pub choices: Choices,
    /// ADev between two independent true trajectories over the horizon.
    pub reference_adev: Option<usize>,
}

/// Settings that are fixed in code rather than configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choices {
    pub input_weight_distribution: String,
    pub random_coupling: String,
    pub scaler_fit: String,
    pub initial_condition_box: [[f64; 2]; 3],
    pub transient_time: f64,
    pub vpt_rule: String,
    pub psd_smoothing: String,
    pub data_sharing: String,
}

impl Default for Choices {
    fn default() -> Self {
        Choices {
            input_weight_distribution: "uniform on [-input_scale, input_scale]".into(),
            random_coupling: "dense, entries uniform on [0,1], rescaled to rho_R".into(),
            scaler_fit: "per-component min/max of the full washout+train+test series".into(),
            initial_condition_box: [[-10.0, 10.0], [-10.0, 10.0], [5.0, 30.0]],
            transient_time: lorenz::DEFAULT_TRANSIENT,
            vpt_rule: "first step with delta >= threshold".into(),
            psd_smoothing: "centred 20-point moving average, truncated at edges".into(),
            data_sharing: "Lorenz data seeded per realization index, weights per cell".into(),
        }
    }
}

impl SweepMeta {
    pub fn new(config: &SweepConfig, reference_adev: Option<usize>) -> Self {
        SweepMeta {
            software: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            prng: seed::PRNG_NAME.into(),
            master_seed: config.base.master_seed,
            topologies: config.topologies.clone(),
            rho_grid: config.rho_grid.clone(),
            realizations: config.realizations,
            config: config.base.clone(),
            choices: Choices::default(),
            reference_adev,
        }
    }
}

/// Flattened summary row.
#[derive(Debug, Serialize, Deserialize)]
struct SummaryRow {
    topology: Topology,
    rho_index: usize,
    #[serde(rename = "rho_R")]
    rho_r: f64,
    count: usize,
    failed: usize,
    nrmse_x_mean: f64,
    nrmse_x_std: f64,
    nrmse_y_mean: f64,
    nrmse_y_std: f64,
    nrmse_z_mean: f64,
    nrmse_z_std: f64,
    rho_a_mean: f64,
    rho_a_std: f64,
    vpt_p25: f64,
    vpt_median: f64,
    vpt_p75: f64,
    true_lorenz_vpt_p25: f64,
    true_lorenz_vpt_median: f64,
    true_lorenz_vpt_p75: f64,
    adev_p25: Option<f64>,
    adev_median: Option<f64>,
    adev_p75: Option<f64>,
    oscillatory_steps_p25: Option<f64>,
    oscillatory_steps_median: Option<f64>,
    oscillatory_steps_p75: Option<f64>,
    bounded_fraction: f64,
    oscillatory_fraction: f64,
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.into(),
        source,
    }
}

pub fn write_records(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    rdr.deserialize()
        .collect::<std::result::Result<Vec<MetricsRecord>, _>>()
        .map_err(csv_err(path))
}

pub fn write_summary(path: &Path, summary: &SweepSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for c in &summary.cells {
        w.serialize(SummaryRow {
            topology: c.topology,
            rho_index: c.rho_index,
            rho_r: c.rho_r,
            count: c.count,
            failed: c.failed,
            nrmse_x_mean: c.nrmse[0].mean,
            nrmse_x_std: c.nrmse[0].std,
            nrmse_y_mean: c.nrmse[1].mean,
            nrmse_y_std: c.nrmse[1].std,
            nrmse_z_mean: c.nrmse[2].mean,
            nrmse_z_std: c.nrmse[2].std,
            rho_a_mean: c.rho_a.mean,
            rho_a_std: c.rho_a.std,
            vpt_p25: c.vpt.p25,
            vpt_median: c.vpt.median,
            vpt_p75: c.vpt.p75,
            true_lorenz_vpt_p25: c.true_lorenz_vpt.p25,
            true_lorenz_vpt_median: c.true_lorenz_vpt.median,
            true_lorenz_vpt_p75: c.true_lorenz_vpt.p75,
            adev_p25: c.adev.map(|q| q.p25),
            adev_median: c.adev.map(|q| q.median),
            adev_p75: c.adev.map(|q| q.p75),
            oscillatory_steps_p25: c.oscillatory_steps.map(|q| q.p25),
            oscillatory_steps_median: c.oscillatory_steps.map(|q| q.median),
            oscillatory_steps_p75: c.oscillatory_steps.map(|q| q.p75),
            bounded_fraction: c.bounded_fraction,
            oscillatory_fraction: c.oscillatory_fraction,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Writes `records.csv`, `summary.csv` and (when given) `meta.json` into
/// the directory `out`, creating it if needed. Returns the written paths.
pub fn export(
    records: &[MetricsRecord],
    summary: &SweepSummary,
    meta: Option<&SweepMeta>,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = vec![out.join("records.csv"), out.join("summary.csv")];
    write_records(&written[0], records)?;
    write_summary(&written[1], summary)?;
    if let Some(meta) = meta {
        let p = out.join("meta.json");
        write_json(&p, meta)?;
        written.push(p);
    }
    Ok(written)
}
