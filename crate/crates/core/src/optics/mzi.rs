//! Mach–Zehnder layouts.
//!
//! Four modes: the two arms `upper` and `lower`, and the detector lines `d1`
//! and `d2`. The photon enters along `upper`. Time steps are
//!
//! ```text
//! 0            first splitter (upper, lower)
//! 1            one mirror per arm
//! 2 .. 2+L     arm slots (object on the lower arm, compensating phase on the upper)
//! 2+L          second splitter (empty step when removed)
//! 3+L          output couplers: lower -> d1, upper -> d2
//! 4+L          detectors D1 (d1) and D2 (d2)
//! ```
//!
//! With the splitter convention of this crate the matched interferometer
//! sends every photon out of the `lower` port, so `D2` is the dark port.

use std::f64::consts::PI;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex64;

use crate::amplitude::{make_state, ModeSpace, PureState};
use crate::error::{IfmError, Result};

use super::circuit::Circuit;
use super::element::{DetectorSet, OpticalElement};

pub const UPPER: &str = "upper";
pub const LOWER: &str = "lower";
pub const D1_LINE: &str = "d1";
pub const D2_LINE: &str = "d2";
pub const BRIGHT: &str = "D1";
pub const DARK: &str = "D2";

pub fn mzi_space() -> Arc<ModeSpace> {
    Arc::new(ModeSpace::new([UPPER, LOWER, D1_LINE, D2_LINE]).expect("static labels"))
}

/// Photon at the input port.
pub fn mzi_input(space: &Arc<ModeSpace>) -> PureState {
    make_state(Arc::clone(space), UPPER).expect("upper exists")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondSplitter {
    /// `R2 = 1 − R1` with the compensating phase.
    Matched,
    Reflectivity(f64),
    /// Open interferometer (delayed-choice configuration).
    Removed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MziSpec {
    pub first_reflectivity: f64,
    pub second: SecondSplitter,
    /// Transmission amplitude of an object in the lower arm.
    pub object: Option<Complex64>,
    pub arm_slots: usize,
    pub object_slot: usize,
}

impl Default for MziSpec {
    fn default() -> Self {
        Self {
            first_reflectivity: 0.5,
            second: SecondSplitter::Matched,
            object: None,
            arm_slots: 3,
            object_slot: 1,
        }
    }
}

/// How the second splitter and the upper-arm phase were chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingCondition {
    pub second_reflectivity: Option<f64>,
    pub compensating_phase: f64,
    /// True when the empty interferometer leaves the dark port exactly empty.
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    pub circuit: Circuit,
    pub matching: MatchingCondition,
    /// Time slices (see `tsvf`) during which the photon is inside the arms.
    pub arm_slices: RangeInclusive<usize>,
    pub object_step: Option<usize>,
}

impl Interferometer {
    pub fn input(&self) -> PureState {
        mzi_input(self.circuit.space())
    }
}

/// Phase for the upper arm that makes the two paths into the `upper` output
/// port arrive in antiphase. Each path picks up `i` per reflection at a
/// splitter and `i` per mirror.
fn compensating_phase() -> f64 {
    let i = Complex64::new(0.0, 1.0);
    // upper arm: transmit, mirror, transmit; lower arm: reflect, mirror, reflect
    let upper_path = i;
    let lower_path = i * i * i;
    let phi = (-lower_path).arg() - upper_path.arg();
    let wrapped = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped.abs() < 1e-15 {
        0.0
    } else {
        wrapped
    }
}

impl MziSpec {
    pub fn build(&self) -> Result<Interferometer> {
        let r1 = self.first_reflectivity;
        if !(0.0..=1.0).contains(&r1) {
            return Err(IfmError::InvalidParameter(format!(
                "first reflectivity {r1} outside [0, 1]"
            )));
        }
        if self.arm_slots == 0 || self.object_slot >= self.arm_slots {
            return Err(IfmError::InvalidParameter(format!(
                "object slot {} not inside {} arm slots",
                self.object_slot, self.arm_slots
            )));
        }
        let phase = compensating_phase();
        let (second_reflectivity, matched) = match self.second {
            SecondSplitter::Matched => (Some(1.0 - r1), true),
            SecondSplitter::Reflectivity(r2) => {
                if !(0.0..=1.0).contains(&r2) {
                    return Err(IfmError::InvalidParameter(format!(
                        "second reflectivity {r2} outside [0, 1]"
                    )));
                }
                (Some(r2), ((1.0 - r1) - r2).abs() < 1e-12)
            }
            SecondSplitter::Removed => (None, false),
        };

        let space = mzi_space();
        let slots = self.arm_slots;
        let mut steps = Vec::with_capacity(slots + 5);
        steps.push(vec![OpticalElement::beam_splitter("bs1", UPPER, LOWER, r1)]);
        steps.push(vec![
            OpticalElement::mirror("mirror_upper", UPPER),
            OpticalElement::mirror("mirror_lower", LOWER),
        ]);
        let mut object_step = None;
        for slot in 0..slots {
            let mut step = Vec::new();
            if slot == 0 && phase != 0.0 {
                step.push(OpticalElement::phase_shift("arm_phase", UPPER, phase));
            }
            if slot == self.object_slot {
                if let Some(t) = self.object {
                    step.push(OpticalElement::absorber("object", LOWER, t));
                    object_step = Some(steps.len());
                }
            }
            steps.push(step);
        }
        steps.push(match second_reflectivity {
            Some(r2) => vec![OpticalElement::beam_splitter("bs2", UPPER, LOWER, r2)],
            None => Vec::new(),
        });
        steps.push(vec![
            OpticalElement::beam_splitter("out_d1", LOWER, D1_LINE, 1.0),
            OpticalElement::beam_splitter("out_d2", UPPER, D2_LINE, 1.0),
        ]);
        steps.push(vec![OpticalElement::detectors(
            "detectors",
            DetectorSet::new([(BRIGHT, D1_LINE), (DARK, D2_LINE)])?,
        )]);

        Ok(Interferometer {
            circuit: Circuit::new(space, steps)?,
            matching: MatchingCondition {
                second_reflectivity,
                compensating_phase: phase,
                matched,
            },
            arm_slices: 1..=2 + slots,
            object_step,
        })
    }
}

/// Mach–Zehnder interferometer with first reflectivity `r1`. `r2 = None`
/// picks the matched second splitter; `object` places an absorber with that
/// transmission amplitude in the lower arm.
pub fn build_mzi(r1: f64, r2: Option<f64>, object: Option<Complex64>) -> Result<Interferometer> {
    MziSpec {
        first_reflectivity: r1,
        second: r2.map_or(SecondSplitter::Matched, SecondSplitter::Reflectivity),
        object,
        ..MziSpec::default()
    }
    .build()
}

/// Interferometer with the second splitter taken out.
pub fn build_open_interferometer(r1: f64) -> Result<Interferometer> {
    MziSpec {
        first_reflectivity: r1,
        second: SecondSplitter::Removed,
        ..MziSpec::default()
    }
    .build()
}
