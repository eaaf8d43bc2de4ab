//! Optical elements and the circuit stepper.

mod circuit;
pub(crate) mod element;
pub mod mzi;

pub use circuit::{measure, run_circuit, run_with, Circuit, CircuitRun, OutcomeDistribution};
pub use element::{apply_element, DetectorSet, ElementKind, OpticalElement};
pub use mzi::{build_mzi, build_open_interferometer, Interferometer, MatchingCondition, MziSpec, SecondSplitter};
