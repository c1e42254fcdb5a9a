//! Generate Lorenz-63 training data.
//!
//! Integrates the system with RK4, samples it every `dt_sample`, fits the
//! min/max scaler and splits the series into washout, training and test
//! segments. Optionally writes the rescaled series as CSV.
//!
//! ```bash
//! cargo run --release --example lorenz_data -- /tmp/lorenz.csv
//! ```

use lorenz_reservoir::lorenz::{self, LorenzParams};
use lorenz_reservoir::seed;

fn main() -> lorenz_reservoir::Result<()> {
    let params = LorenzParams::default();
    println!(
        "Lorenz-63: c1 = {}, c2 = {}, c3 = {:.4}, h = {}, dt = {} ({} steps per sample)",
        params.c1,
        params.c2,
        params.c3,
        params.h,
        params.dt_sample,
        params.steps_per_sample()?
    );

    let data = lorenz::build_dataset(&params, 42, 1_000, 2_000, 500)?;
    println!(
        "washout {}, train {}, test {} samples",
        data.washout.len(),
        data.train_inputs.len(),
        data.test_inputs.len()
    );
    println!("scaler min {:?}", data.scaler.min);
    println!("scaler max {:?}", data.scaler.max);
    println!("first training input  {:?}", data.train_inputs[0]);
    println!("its target (next step) {:?}", data.train_targets[0]);

    // Independent trajectories rescaled with the training scaler, as used
    // for closed-loop reference targets.
    let reference = lorenz::Trajectory::random_start(&params, seed::derive(42, &[1]), 300, data.scaler)?;
    let max_z = reference.points.iter().map(|s| s[2]).fold(f64::MIN, f64::max);
    println!("reference trajectory: {} samples, max Z = {max_z:.3}", reference.len());

    if let Some(path) = std::env::args().nth(1) {
        lorenz::write_trajectory_csv(path.as_ref(), &reference.points)?;
        println!("wrote {path}");
    }
    Ok(())
}
