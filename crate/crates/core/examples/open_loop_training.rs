//! Train a readout and score one-step-ahead prediction.
//!
//! Drives a 20-node reservoir with Lorenz data, discards the washout,
//! fits the readout by ridge regression and reports the open-loop NRMSE of
//! each component on the test segment.
//!
//! ```bash
//! cargo run --release --example open_loop_training -- ring 0.3
//! ```

use lorenz_reservoir::lorenz::{self, LorenzParams};
use lorenz_reservoir::metrics;
use lorenz_reservoir::reservoir::{self, Reservoir, ReservoirSpec, Topology};

fn main() -> lorenz_reservoir::Result<()> {
    let mut args = std::env::args().skip(1);
    let topology: Topology = args.next().as_deref().unwrap_or("uncoupled").parse()?;
    let rho_r: f64 = args.next().map_or(0.2, |s| s.parse().expect("rho must be a number"));

    let data = lorenz::build_dataset(&LorenzParams::default(), 3, 10_000, 10_000, 5_000)?;
    let spec = ReservoirSpec {
        topology,
        rho_r,
        weight_seed: 11,
        ..ReservoirSpec::default()
    };
    let mut res = Reservoir::new(&spec)?;

    let states = reservoir::harvest(&mut res, &data.harvest_inputs(), data.washout.len())?;
    let w = reservoir::train_readout(&states, &data.train_targets, 1e-6)?;
    println!("{topology} reservoir, rho_R = {rho_r}: readout {}x{}", w.rows(), w.cols());

    let out = reservoir::predict_open_loop(&mut res, &w, &data.test_inputs)?;
    let predicted: Vec<[f64; 3]> = (0..out.rows()).map(|k| {
        let r = out.row(k);
        [r[0], r[1], r[2]]
    }).collect();
    let [x, y, z] = metrics::nrmse3(&data.test_targets, &predicted)?;
    println!("open-loop NRMSE  X {x:.5}  Y {y:.5}  Z {z:.5}");
    Ok(())
}
