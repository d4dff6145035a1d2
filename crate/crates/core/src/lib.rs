//! gravcat-core: simulation library for the gravitational force signal a
//! classical probe records from a mesoscopic cat state, under canonical
//! quantum theory and the objective-collapse theory roster.
//!
//! Modules:
//! - [`constants`] / [`params`] / [`protocol`]: physical constants, collapse
//!   parameters, experiment presets and validation
//! - [`force`]: Newtonian force/energy formulas and 1-D reduced densities
//! - [`rates`]: closed-form collapse/decoherence rates and derived reports
//! - [`two_site`]: reduced double-well dynamics emitting force records
//! - [`grid`]: 1-D wavefunction machinery (cat states, hit law, sampling)
//! - [`sn`]: radial Schrödinger–Newton solver and collapse thresholds
//! - [`verdict`] / [`scenario`]: signal classification and scenario runs

// validation uses `!(x > 0.0)` so NaN fails closed; the partial_cmp form the
// lint suggests obscures that
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod force;
pub mod grid;
pub mod params;
pub mod protocol;
pub mod rates;
pub mod scenario;
pub mod sn;
pub mod two_site;
pub mod verdict;

pub use constants::PhysicalConstants;
pub use error::{CoreError, Result};
pub use params::CollapseParams;
pub use protocol::{ExperimentProtocol, ProtocolName, Violation};
pub use rates::{RateReport, TheoryId, ALL_THEORIES};
pub use scenario::{run_scenario, EngineKind, ScenarioResult};
pub use two_site::{EnsembleSummary, EventKind, ForceRecord};
pub use verdict::{classify_verdict, verdict_table, SignalClass, Verdict, VerdictCell};
