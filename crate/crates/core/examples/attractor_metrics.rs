//! Long-term climate measures: attractor deviation and power spectra.
//!
//! Compares a closed-loop prediction with its reference trajectory by the
//! number of 0.1-sized phase-space cubes visited by only one of them, and
//! by the smoothed power spectral density of the Z component.
//!
//! ```bash
//! cargo run --release --example attractor_metrics
//! ```

use lorenz_reservoir::harness::{reference_adev, simulate, RealizationData, RunConfig};
use lorenz_reservoir::metrics;

fn main() -> lorenz_reservoir::Result<()> {
    let mut config = RunConfig { master_seed: 9, ..RunConfig::default() };
    config.spec.rho_r = 0.05;

    let floor = reference_adev(&config.lorenz, 9, config.horizon, config.adev_cube)?;
    println!("ADev between two true trajectories: {floor}");

    for realization in 0..6 {
        config.realization_index = realization;
        config.spec.weight_seed = realization;
        let data = RealizationData::generate(&config)?;
        let r = simulate(&config, &data)?;
        match r.adev {
            Some(a) => {
                let z = |s: &[[f64; 3]]| s.iter().map(|p| p[2]).collect::<Vec<f64>>();
                let pred = metrics::psd(&z(&r.predicted), config.lorenz.dt_sample)?;
                let truth = metrics::psd(&z(&r.target), config.lorenz.dt_sample)?;
                // skip the mean (DC) part of the spectrum
                let peak = |p: &metrics::Psd| {
                    let i = (0..p.power.len())
                        .filter(|&i| p.frequencies[i] > 0.5)
                        .max_by(|&a, &b| p.power[a].total_cmp(&p.power[b]))
                        .unwrap();
                    p.frequencies[i]
                };
                println!(
                    "realization {realization}: ADev {a:>4}, Z spectral peak {:.3} (truth {:.3})",
                    peak(&pred),
                    peak(&truth)
                );
            }
            None => println!("realization {realization}: left the bounded region, no ADev"),
        }
    }
    Ok(())
}
