//! Calculators and simulation for pre- and post-selected quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`hilbert`]: dense finite-dimensional states, operators and observables.
//! - [`tsvf`]: analytic Born, ABL and weak-value calculators over a
//!   [`tsvf::TwoStateVector`].
//! - [`scenarios`]: canned experiments (spin sequences, singlet relations,
//!   three boxes).
//! - [`simulate`]: a seeded, parallel Monte Carlo engine that runs a
//!   scenario trial by trial and post-selects on the final outcome, plus an
//!   exact weak-measurement pointer calculation.
//! - [`stats`]: frequency tables, Wilson intervals and chi-square tests that
//!   compare simulated ensembles with the analytic predictions.

pub mod error;
pub mod hilbert;
pub mod scenarios;
pub mod simulate;
pub mod stats;
pub mod tsvf;

pub use error::{Error, Result};
pub use hilbert::{LinearOperator, Observable, StateVector, C64};
pub use scenarios::{Relation, Scenario};
pub use simulate::{EnsembleRecord, MeasurementEvent, PointerReport, TimeLabel, TrialRecord};
pub use stats::FrequencyReport;
pub use tsvf::{OutcomeDistribution, TwoStateVector};
