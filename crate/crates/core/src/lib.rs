//! Bias-field digitized counterdiabatic optimization (BF-DCQO) for Ising spin
//! glasses on an exact statevector simulator.
//!
//! Modules, bottom-up:
//!
//! * [`instances`] spin-glass problems, generators, exact enumeration, WMIS.
//! * [`schedule`] the annealing schedule and closed-form CD coefficient.
//! * [`circuit`] gate IR, native decompositions, pruning and layering.
//! * [`builder`] state preparation and Trotterized circuits.
//! * [`simulator`] statevector evolution, sampling, expectations.
//! * [`runner`] the measurement-feedback loop and baseline algorithms.
//! * [`metrics`] and [`sweep`] derived metrics and the ensemble harness.

pub mod builder;
pub mod circuit;
pub mod dense;
pub mod error;
pub mod instances;
pub mod metrics;
pub mod optimize;
pub mod rng;
pub mod runner;
pub mod schedule;
pub mod simulator;
pub mod sweep;

pub use error::{Error, Result};
