//! Speciation-based multi-swarm PSO for dynamic optimization problems,
//! a conical moving-peaks benchmark with offline-error tracking, and the
//! statistics and experiment harness used to compare runs.

pub mod algorithm;
pub mod harness;
pub mod mechanisms;
pub mod problem;
pub mod stats;
pub mod swarm;

pub use algorithm::{run_pspso, run_restart_baseline, RunError, RunResult};
pub use mechanisms::{AlgoConfig, PopulationState};
pub use problem::{
    Benchmark, ChangeSchedule, DynamicLandscape, LandscapeParams, Objective, SearchSpace,
};
pub use swarm::{Particle, PsoParams, Subswarm, VelocityForm};
