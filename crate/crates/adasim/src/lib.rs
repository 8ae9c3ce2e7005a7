//! Closed-loop ADAS resilience simulator.
//!
//! Emulates adversarial-patch perception attacks on ACC/ALC as faults injected
//! at the perception output, and runs layered safety interventions against
//! them: a TTC-based phased AEBS with FCW, a firmware command clamp, a
//! simulated human driver, and a CUSUM-gated predictor fallback. Campaigns
//! sweep fault types, scenarios, initial gaps, driver reaction times and road
//! friction, and aggregate accident/prevention/trigger metrics into CSV and
//! markdown reports.
//!
//! Entry points:
//! - [`runner::run_single`] executes one closed-loop run from a [`runner::RunSpec`].
//! - [`campaign`] expands a grid, runs it in parallel, and aggregates.
//! - The `sim` binary exposes `run`, `campaign`, `report` and
//!   `train-predictor` subcommands; the `examples/` directory shows one
//!   runnable program per capability.

pub mod campaign;
pub mod control;
pub mod error;
pub mod geometry;
pub mod hazard;
pub mod mitigation;
pub mod perception;
pub mod runner;
pub mod safety;
pub mod scenario;
pub mod units;
pub mod vehicle;
pub mod world;

pub use error::SimError;
