//! The extreme-learning-machine limit.
//!
//! With zero spectral radius every coupling matrix vanishes, so the three
//! topologies sharing one weight seed become the same memoryless network
//! and give identical results.
//!
//! ```bash
//! cargo run --release --example elm_limit
//! ```

use lorenz_reservoir::harness::{run_realization, RunConfig};
use lorenz_reservoir::reservoir::Topology;

fn main() {
    let mut config = RunConfig { master_seed: 5, ..RunConfig::default() };
    config.spec.rho_r = 0.0;
    config.spec.weight_seed = 77;

    let records: Vec<_> = Topology::ALL
        .iter()
        .map(|&t| {
            config.spec.topology = t;
            run_realization(&config)
        })
        .collect();
    for r in &records {
        println!(
            "{:<9} nrmse_x {:.6e} vpt {:.2} rho_a {:.6} bounded {}",
            r.topology.name(),
            r.nrmse_x,
            r.vpt,
            r.rho_a,
            r.bounded
        );
    }
    let same = records.windows(2).all(|w| {
        w[0].nrmse_x.to_bits() == w[1].nrmse_x.to_bits()
            && w[0].rho_a.to_bits() == w[1].rho_a.to_bits()
            && w[0].vpt == w[1].vpt
            && w[0].adev == w[1].adev
    });
    println!("identical across topologies: {same}");
}
