//! Photon-number model of the optical Maxwell's-demon charging scheme.
//!
//! Two optical modes with a number-diagonal joint distribution are each
//! tapped by a beam splitter whose reflected port feeds an inefficient
//! click/no-click counter. The demon flips the capacitor polarity according
//! to the click pattern; the figure of merit is the expected photon-number
//! difference delivered by the transmitted beams.
//!
//! * [`state`] builds truncated joint photon-number distributions.
//! * [`channel`] applies the splitter + counter measurement.
//! * [`merit`] evaluates and optimizes the polarity strategy.
//! * [`analytic`] holds closed-form expressions used as cross-checks.
//! * [`optimizer`] maximizes the figure of merit over the demon's parameters.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod channel;
mod error;
pub mod merit;
mod numeric;
pub mod optimizer;
pub mod state;

pub use channel::{DemonParams, Outcome, OutcomeReport, OutcomeReports, OutcomeStats};
pub use error::{Error, Result};
pub use merit::{PassivityReason, PassivityVerdict, PolarityStrategy};
pub use optimizer::{Objective, OptimizationResult, OptimizerConfig, StateFamily, StrategyMode};
pub use state::{JointNumberState, LatticeEntry, ModePmf, ThermalSpec};

/// Default truncation tolerance for geometric tails.
pub const DEFAULT_EPS_TAIL: f64 = 1e-12;
