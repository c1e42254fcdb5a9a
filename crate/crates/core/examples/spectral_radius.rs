//! Coupling matrices, eigenvalues and ridge regression.
//!
//! Builds the three coupling topologies at a target spectral radius,
//! confirms it with the Hessenberg QR eigen solver, and solves a small
//! Tikhonov-regularised least-squares problem.
//!
//! ```bash
//! cargo run --release --example spectral_radius
//! ```

use lorenz_reservoir::linalg::{self, Matrix};
use lorenz_reservoir::reservoir::{build_coupling, Topology};

fn main() -> lorenz_reservoir::Result<()> {
    for topology in Topology::ALL {
        let c = build_coupling(topology, 20, 0.4, 7)?;
        println!(
            "{topology:>9}: spectral radius {:.12} (redraws {})",
            linalg::spectral_radius(&c.weights)?,
            c.redraws
        );
    }

    let rotation = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]])?;
    println!("eigenvalues of a quarter rotation: {:?}", linalg::eigenvalues(&rotation)?);

    // y = 2 s0 - s1 + 0.5, recovered from noisy-free samples
    let s = Matrix::from_fn(50, 3, |i, j| match j {
        0 => (i as f64 * 0.37).sin(),
        1 => (i as f64 * 0.11).cos(),
        _ => 1.0,
    });
    let y = Matrix::from_fn(50, 1, |i, _| 2.0 * s[(i, 0)] - s[(i, 1)] + 0.5);
    for lambda in [0.0, 1e-6, 1e-2, 1.0] {
        let w = linalg::ridge_solve(&s, &y, lambda)?;
        println!("lambda {lambda:>6}: w = {:?}, |w| = {:.6}", w.column(0), w.norm());
    }
    Ok(())
}
