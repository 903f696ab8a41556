//! Outage-constrained throughput of a smart-meter link sharing a cellular uplink.
//!
//! * [`analytic`] - success probability and throughput over a Poisson interferer field
//! * [`optimizer`] - unconstrained and power/outage constrained optima, parameter sweeps
//! * [`field`] - Monte Carlo simulation of the interferer field
//! * [`reconstruction`] - sample erasures, interpolation and RMSD statistics
#![no_std]

extern crate alloc;

pub mod analytic;
pub mod error;
pub mod field;
pub mod grid;
pub mod optimizer;
pub mod reconstruction;
pub mod roots;

pub use analytic::{
    kappa, spectral_efficiency, success_probability, throughput, Constraints, LinkParams, Network,
    OperatingPoint,
};
pub use error::{Error, Result};
pub use field::{empirical_psuc, sample_field, sir, Estimate, FarField, FieldRealization, SimConfig, Sir};
pub use optimizer::{
    approx_throughput, constrained_optimum, sweep, unconstrained_beta, unconstrained_outage, Branch,
    ConstrainedSolution, SolverOptions, SweepAxis, SweepPoint, UnconstrainedSolution,
};
pub use reconstruction::{
    draw_erasures, exact_rmsd, reconstruct, rmsd_statistics, rmsd_sweep, DemandSeries,
    ErasurePattern, ExactRmsd, Histogram, ReconstructionReport, RmsdStatistics,
};
