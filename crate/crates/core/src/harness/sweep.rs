use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregate, run_realization_with, MetricsRecord, RealizationData, RunConfig, SweepSummary};
use crate::error::{Error, Result};
use crate::lorenz::{self, LorenzParams};
use crate::metrics;
use crate::reservoir::Topology;
use crate::seed;

/// A sweep over `topologies × rho_grid × realizations`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub topologies: Vec<Topology>,
    pub rho_grid: Vec<f64>,
    pub realizations: u64,
    /// Template for every cell. Its topology, `rho_r`, `weight_seed` and
    /// `realization_index` are overwritten per cell; `master_seed` is the
    /// sweep seed.
    pub base: RunConfig,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Ordered by topology, then grid index, then realization.
    pub records: Vec<MetricsRecord>,
    pub summary: SweepSummary,
}

/// `min, min + step, …` up to and including `max` (within rounding).
pub fn rho_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min >= 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::Config(format!(
            "invalid rho range [{min}, {max}]"
        )));
    }
    if !(step > 0.0) {
        return Err(Error::Config(format!("rho step must be positive, got {step}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    // round away representation noise such as 0.30000000000000004
    Ok((0..n)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Weight seed of one sweep cell.
pub fn cell_seed(master: u64, topology: Topology, rho_index: usize, realization: u64) -> u64 {
    seed::derive(
        master,
        &[topology.seed_label(), rho_index as u64, realization],
    )
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.topologies.is_empty() {
            return Err(Error::Config("no topologies selected".into()));
        }
        if self.rho_grid.is_empty() {
            return Err(Error::Config("rho grid is empty".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("need at least one realization".into()));
        }
        self.base.validate()
    }

    /// The configuration of one cell.
    pub fn cell(&self, topology: Topology, rho_index: usize, realization: u64) -> RunConfig {
        let mut c = self.base.clone();
        c.spec.topology = topology;
        c.spec.rho_r = self.rho_grid[rho_index];
        c.spec.weight_seed = cell_seed(self.base.master_seed, topology, rho_index, realization);
        c.realization_index = realization;
        c
    }

    fn realization_records(&self, realization: u64) -> Vec<MetricsRecord> {
        let template = self.cell(self.topologies[0], 0, realization);
        let data = match RealizationData::generate(&template) {
            Ok(d) => Some(d),
            Err(e) => {
                log::warn!("data generation for realization {realization} failed: {e}");
                None
            }
        };
        let mut out = Vec::with_capacity(self.topologies.len() * self.rho_grid.len());
        for &t in &self.topologies {
            for r in 0..self.rho_grid.len() {
                let cfg = self.cell(t, r, realization);
                let rec = match &data {
                    Some(d) => run_realization_with(&cfg, Some(d), r),
                    None => MetricsRecord::failed(&cfg, r, "data generation failed".into()),
                };
                out.push(rec);
            }
        }
        log::debug!("realization {realization} done");
        out
    }
}

/// Runs every cell of the sweep on `threads` workers (all cores if `None`).
///
/// Each realization index generates its Lorenz data once and reuses it for
/// every topology and grid point; reservoir weights come from per-cell
/// seeds. Output is independent of the thread count.
pub fn run_sweep(config: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("thread count must be >= 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    log::info!(
        "sweep: {} topologies x {} rho values x {} realizations",
        config.topologies.len(),
        config.rho_grid.len(),
        config.realizations
    );
    let per_realization: Vec<Vec<MetricsRecord>> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|i| config.realization_records(i))
            .collect()
    });

    // Reorder from realization-major to topology/rho-major.
    let cells = config.topologies.len() * config.rho_grid.len();
    let mut records = Vec::with_capacity(cells * per_realization.len());
    for cell in 0..cells {
        for recs in &per_realization {
            records.push(recs[cell].clone());
        }
    }
    let summary = aggregate(&records);
    Ok(SweepResult { records, summary })
}

/// ADev between two independent true Lorenz trajectories of `len` samples,
/// rescaled with a scaler fitted on the first one. This is the floor a
/// perfect surrogate would reach.
pub fn reference_adev(params: &LorenzParams, seed: u64, len: usize, cube: f64) -> Result<usize> {
    let mut rng_a = seed::rng(seed::derive(seed, &[1]));
    let mut rng_b = seed::rng(seed::derive(seed, &[2]));
    let a = lorenz::generate_raw(
        params,
        lorenz::random_initial_state(&mut rng_a),
        len,
        lorenz::DEFAULT_TRANSIENT,
    )?;
    let b = lorenz::generate_raw(
        params,
        lorenz::random_initial_state(&mut rng_b),
        len,
        lorenz::DEFAULT_TRANSIENT,
    )?;
    let scaler = lorenz::fit_scaler(&a)?;
    Ok(metrics::adev(
        &scaler.apply_all(&a),
        &scaler.apply_all(&b),
        cube,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn grid_endpoints() {
        let g = rho_grid(0.0, 1.0, 0.025).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[3], 0.075);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(rho_grid(0.3, 0.3, 0.1).unwrap(), vec![0.3]);
        assert!(rho_grid(0.5, 0.1, 0.1).is_err());
        assert!(rho_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cell_seeds_do_not_collide() {
        let mut seen = HashSet::new();
        for t in Topology::ALL {
            for r in 0..41 {
                for i in 0..100 {
                    assert!(seen.insert(cell_seed(7, t, r, i)));
                }
            }
        }
    }
}
