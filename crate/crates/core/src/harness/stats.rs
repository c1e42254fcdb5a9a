use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsRecord;
use crate::reservoir::Topology;

/// Linearly interpolated percentile (`p` in `[0, 1]`) of unsorted data.
/// Returns `None` for empty input.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_percentile(&v, p)
}

fn sorted_percentile(v: &[f64], p: f64) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(v[lo] + (v[hi] - v[lo]) * frac)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Quantiles {
            p25: sorted_percentile(&v, 0.25)?,
            median: sorted_percentile(&v, 0.5)?,
            p75: sorted_percentile(&v, 0.75)?,
        })
    }

    pub fn iqr(&self) -> f64 {
        self.p75 - self.p25
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(MeanStd {
            mean,
            std: var.sqrt(),
        })
    }
}

/// Statistics of one `(topology, rho_R)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub topology: Topology,
    pub rho_index: usize,
    pub rho_r: f64,
    pub count: usize,
    pub failed: usize,
    pub nrmse: [MeanStd; 3],
    pub rho_a: MeanStd,
    pub vpt: Quantiles,
    pub true_lorenz_vpt: Quantiles,
    /// Over bounded runs only; `None` if no run stayed bounded.
    pub adev: Option<Quantiles>,
    /// Over bounded runs only.
    pub oscillatory_steps: Option<Quantiles>,
    pub bounded_fraction: f64,
    pub oscillatory_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Sorted by topology, then grid index.
    pub cells: Vec<CellSummary>,
}

impl SweepSummary {
    pub fn cell(&self, topology: Topology, rho_index: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.topology == topology && c.rho_index == rho_index)
    }

    /// Cells of one topology in grid order.
    pub fn series(&self, topology: Topology) -> Vec<&CellSummary> {
        self.cells.iter().filter(|c| c.topology == topology).collect()
    }
}

/// Groups records by `(topology, rho_index)` and summarises each group.
/// Failed realizations are counted but excluded from the statistics; cells
/// with no successful realization are dropped with a warning.
pub fn aggregate(records: &[MetricsRecord]) -> SweepSummary {
    let mut groups: BTreeMap<(Topology, usize), Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.topology, r.rho_index)).or_default().push(r);
    }
    let mut cells = Vec::with_capacity(groups.len());
    for ((topology, rho_index), mut group) in groups {
        // permutation invariance: fix the summation order
        group.sort_by_key(|r| r.realization_index);
        let ok: Vec<&MetricsRecord> = group.iter().copied().filter(|r| !r.is_failure()).collect();
        if ok.is_empty() {
            log::warn!("no successful realizations for {topology} at grid index {rho_index}");
            continue;
        }
        let col = |f: fn(&MetricsRecord) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let bounded: Vec<&&MetricsRecord> = ok.iter().filter(|r| r.bounded).collect();
        let adev: Vec<f64> = bounded
            .iter()
            .filter_map(|r| r.adev.map(|a| a as f64))
            .collect();
        let osc: Vec<f64> = bounded.iter().map(|r| r.oscillatory_steps as f64).collect();
        let n = ok.len() as f64;
        cells.push(CellSummary {
            topology,
            rho_index,
            rho_r: ok[0].rho_r,
            count: ok.len(),
            failed: group.len() - ok.len(),
            nrmse: [
                MeanStd::of(&col(|r| r.nrmse_x)).unwrap(),
                MeanStd::of(&col(|r| r.nrmse_y)).unwrap(),
                MeanStd::of(&col(|r| r.nrmse_z)).unwrap(),
            ],
            rho_a: MeanStd::of(&col(|r| r.rho_a)).unwrap(),
            vpt: Quantiles::of(&col(|r| r.vpt)).unwrap(),
            true_lorenz_vpt: Quantiles::of(&col(|r| r.true_lorenz_vpt)).unwrap(),
            adev: Quantiles::of(&adev),
            oscillatory_steps: Quantiles::of(&osc),
            bounded_fraction: bounded.len() as f64 / n,
            oscillatory_fraction: ok.iter().filter(|r| r.oscillatory).count() as f64 / n,
        });
    }
    SweepSummary { cells }
}
