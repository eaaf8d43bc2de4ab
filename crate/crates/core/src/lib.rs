//! Simulator for single-photon interaction-free measurement.
//!
//! The crate models one photon (and, for nested schemes, one object
//! particle) over a handful of discrete optical modes:
//!
//! - [`amplitude`]: states with an absorption ledger that keeps every
//!   terminated branch, so explosion probabilities are exact.
//! - [`optics`]: beam splitters, mirrors, phase shifts, absorbers, detectors,
//!   and the circuit stepper; Mach–Zehnder builders.
//! - [`tsvf`]: backward-evolving states, ABL probabilities and trace maps.
//! - [`composite`]: photon ⊗ object simulations with coincidence absorption.
//! - [`protocols`]: bomb test (single and iterated), Zeno cavities,
//!   Fabry–Perot cavity, negative-result updates and irradiation metrics.
//! - [`scenario`]: TOML scenario files.

pub mod amplitude;
pub mod composite;
pub mod error;
pub mod optics;
pub mod protocols;
pub mod scenario;
pub mod table;
pub mod tsvf;

pub use amplitude::{make_state, AbsorptionRecord, ModeSpace, PureState};
pub use error::{IfmError, Result};
