//! Small echo-state reservoirs as surrogate models of the Lorenz-63 attractor.
//!
//! The crate covers the whole experiment: Lorenz data generation
//! ([`lorenz`]), reservoirs of three coupling topologies with ridge-trained
//! readouts and their closed-loop autonomous form ([`reservoir`]), short-
//! and long-term prediction measures ([`metrics`]), seeded sweeps over the
//! initial spectral radius ([`harness`]), and the small dense kernels they
//! rest on ([`linalg`]).
//!
//! ```no_run
//! use lorenz_reservoir::harness::{run_realization, RunConfig};
//! use lorenz_reservoir::reservoir::Topology;
//!
//! let mut config = RunConfig::default();
//! config.spec.topology = Topology::Uncoupled;
//! config.spec.rho_r = 0.2;
//! let record = run_realization(&config);
//! println!("bounded: {}, VPT: {:.2}", record.bounded, record.vpt);
//! ```

pub mod cli;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lorenz;
pub mod metrics;
pub mod reservoir;
pub mod seed;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use lorenz::{LorenzParams, State, Trajectory};
pub use reservoir::{Reservoir, ReservoirSpec, Topology, TrainedModel};
