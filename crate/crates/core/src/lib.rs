//! Simulation and statistics for current-on/current-off tests of the Pauli
//! exclusion principle with electrons.
//!
//! The pipeline runs from an injected current to the expected number of
//! anomalous X-rays ([`sensitivity`]), through synthetic spectra and their
//! live-time normalized subtraction ([`spectrum`]), to an upper limit on the
//! violation probability β²/2 ([`limits`], [`coverage`]). [`transport`]
//! holds Monte Carlo checks of the closed forms and [`quon`] evaluates the
//! q-deformed commutation algebra on small Fock spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod coverage;
pub mod error;
pub mod limits;
pub mod physics;
pub mod quon;
pub mod rng;
pub mod scenario;
pub mod sensitivity;
pub mod spectrum;
pub mod spectrum_io;
pub mod transport;

pub use config::{parse_config, ScenarioConfig};
pub use coverage::{coverage_study, CoverageResult};
pub use error::{Error, ErrorClass, Result};
pub use limits::{LimitMethod, LimitResult, LimitSettings};
pub use physics::{Material, PhysicalConstants, StripGeometry};
pub use scenario::Scenario;
pub use sensitivity::{RunPlan, SensitivityReport};
pub use spectrum::{BackgroundModel, DetectorModel, ResidualSpectrum, Spectrum};
pub use transport::{McConfig, McEstimate};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
