//! Run a trained reservoir as an autonomous surrogate of the Lorenz system.
//!
//! Trains one realization, folds the readout back into the coupling
//! (`W_a = W_int + W_in W^T`, bias `b`), synchronises on a fresh trajectory,
//! iterates the autonomous map and reports boundedness, valid prediction
//! time and the true-Lorenz VPT obtained from the same initial error.
//!
//! ```bash
//! cargo run --release --example closed_loop_surrogate -- 5
//! ```

use lorenz_reservoir::harness::{simulate, RealizationData, RunConfig};
use lorenz_reservoir::reservoir::Topology;

fn main() -> lorenz_reservoir::Result<()> {
    let realization: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("integer"));
    let mut config = RunConfig {
        master_seed: 2024,
        realization_index: realization,
        ..RunConfig::default()
    };
    config.spec.topology = Topology::Uncoupled;
    config.spec.rho_r = 0.1;
    config.spec.weight_seed = realization;

    let data = RealizationData::generate(&config)?;
    let r = simulate(&config, &data)?;
    println!("rho_a (spectral radius of W_a): {:.4}", r.model.rho_a);
    println!(
        "bounded {}, oscillatory steps {}, collapsed at {:?}",
        r.classification.bounded, r.classification.oscillatory_steps, r.classification.collapsed_at
    );
    println!(
        "VPT {:.2} ({:.2} Lyapunov times); true Lorenz from the same start: {:.2}",
        r.vpt.t_vpt, r.vpt.t_vpt_lyapunov, r.true_lorenz_vpt.t_vpt
    );
    println!("  k      X       Xhat      Z       Zhat");
    for k in (0..40).step_by(4) {
        let (y, p) = (r.target[k], r.predicted[k]);
        println!("{k:>3} {:8.4} {:8.4} {:8.4} {:8.4}", y[0], p[0], y[2], p[2]);
    }
    Ok(())
}
