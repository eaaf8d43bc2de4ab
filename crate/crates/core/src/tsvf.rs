//! Two-state-vector analysis of a circuit.
//!
//! The forward state is the pre-selected input evolved through the circuit;
//! the backward state is the post-selected detector mode evolved through the
//! adjoint steps in reverse order. Both live on the same grid of time slices:
//! slice `0` is the input, slice `k + 1` follows step `k`.
//!
//! Absorbers enter the backward evolution through the adjoint of their live
//! map (multiplication by `conj(t)`); absorbed branches never reach a
//! detector, so the post-selection excludes them.

use std::sync::Arc;

use num_complex::Complex64;

use crate::amplitude::{ModeSpace, PureState, CONDITIONING_FLOOR};
use crate::error::{IfmError, Result};
use crate::optics::Circuit;
use crate::table::{Cell, Table};

/// Amplitudes indexed by time slice, then mode.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    space: Arc<ModeSpace>,
    slices: Vec<Vec<Complex64>>,
}

impl AmplitudeGrid {
    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, t: usize) -> &[Complex64] {
        &self.slices[t]
    }

    pub fn get(&self, mode: &str, t: usize) -> Result<Complex64> {
        Ok(self.slices[t][self.space.index_of(mode)?])
    }
}

/// Live forward amplitudes at every slice.
pub fn forward_grid(circuit: &Circuit, input: &PureState) -> Result<AmplitudeGrid> {
    circuit.check_input(input)?;
    let mut amps = input.amplitudes().to_vec();
    let mut slices = Vec::with_capacity(circuit.len() + 1);
    slices.push(amps.clone());
    for step in circuit.resolved_steps() {
        for el in step {
            el.forward(&mut amps);
        }
        slices.push(amps.clone());
    }
    Ok(AmplitudeGrid {
        space: Arc::clone(circuit.space()),
        slices,
    })
}

fn detector_index(circuit: &Circuit, detector: &str) -> Result<usize> {
    let set = circuit
        .detectors()
        .ok_or_else(|| IfmError::UnknownDetector(detector.to_string()))?;
    circuit.space().index_of(set.mode_of(detector)?)
}

fn backward_from(circuit: &Circuit, mode: usize) -> AmplitudeGrid {
    let n = circuit.len();
    let mut amps = vec![Complex64::new(0.0, 0.0); circuit.space().size()];
    amps[mode] = Complex64::new(1.0, 0.0);
    let mut slices = vec![Vec::new(); n + 1];
    slices[n] = amps.clone();
    for (k, step) in circuit.resolved_steps().iter().enumerate().rev() {
        for el in step.iter().rev() {
            el.adjoint(&mut amps);
        }
        slices[k] = amps.clone();
    }
    AmplitudeGrid {
        space: Arc::clone(circuit.space()),
        slices,
    }
}

/// Backward-evolving state of a click at `postselected`.
///
/// Fails when the forward run from `input` cannot reach that detector.
pub fn backward_propagate(
    circuit: &Circuit,
    input: &PureState,
    postselected: &str,
) -> Result<AmplitudeGrid> {
    two_state(circuit, input, postselected).map(|r| r.backward)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateRecord {
    pub forward: AmplitudeGrid,
    pub backward: AmplitudeGrid,
    /// `⟨backward|forward⟩`, identical on every slice.
    pub overlap: Complex64,
}

pub fn two_state(circuit: &Circuit, input: &PureState, postselected: &str) -> Result<TwoStateRecord> {
    let mode = detector_index(circuit, postselected)?;
    let forward = forward_grid(circuit, input)?;
    let last = forward.n_slices() - 1;
    let probability = forward.slice(last)[mode].norm_sqr();
    if probability < CONDITIONING_FLOOR {
        return Err(IfmError::PostSelectionImpossible {
            detector: postselected.to_string(),
            probability,
        });
    }
    let backward = backward_from(circuit, mode);
    let overlap = inner(backward.slice(last), forward.slice(last));
    Ok(TwoStateRecord {
        forward,
        backward,
        overlap,
    })
}

fn inner(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}

impl TwoStateRecord {
    pub fn n_slices(&self) -> usize {
        self.forward.n_slices()
    }

    pub fn overlap_at(&self, t: usize) -> Complex64 {
        inner(self.backward.slice(t), self.forward.slice(t))
    }

    pub fn postselection_probability(&self) -> f64 {
        self.overlap.norm_sqr()
    }

    pub fn trace_map(&self) -> TraceMap {
        let values = self
            .forward
            .slices
            .iter()
            .zip(&self.backward.slices)
            .map(|(f, b)| f.iter().zip(b).map(|(x, y)| (y.conj() * x).norm()).collect())
            .collect();
        TraceMap {
            space: Arc::clone(&self.forward.space),
            values,
        }
    }

    /// ABL probability of finding the photon in `projector` at slice `t`.
    pub fn abl(&self, t: usize, projector: &[&str]) -> Result<f64> {
        if t >= self.n_slices() {
            return Err(IfmError::InvalidParameter(format!(
                "slice {t} outside 0..{}",
                self.n_slices()
            )));
        }
        let mut mask = vec![false; self.forward.space.size()];
        for label in projector {
            mask[self.forward.space.index_of(label)?] = true;
        }
        abl_rule(self.forward.slice(t), self.backward.slice(t), |i| mask[i])
    }
}

/// ABL rule for the dichotomic pair `{P, 1 − P}` where `P` projects onto the
/// basis indices selected by `in_projector`.
pub fn abl_rule(
    forward: &[Complex64],
    backward: &[Complex64],
    in_projector: impl Fn(usize) -> bool,
) -> Result<f64> {
    let mut inside = Complex64::new(0.0, 0.0);
    let mut outside = Complex64::new(0.0, 0.0);
    for (i, (f, b)) in forward.iter().zip(backward).enumerate() {
        let term = b.conj() * f;
        if in_projector(i) {
            inside += term;
        } else {
            outside += term;
        }
    }
    let (p_in, p_out) = (inside.norm_sqr(), outside.norm_sqr());
    let denom = p_in + p_out;
    if denom < CONDITIONING_FLOOR {
        return Err(IfmError::AblUndefined(denom));
    }
    Ok(p_in / denom)
}

/// `|forward · backward|` per mode and slice. A zero entry means the photon
/// can leave no local record at that place and time.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMap {
    space: Arc<ModeSpace>,
    values: Vec<Vec<f64>>,
}

impl TraceMap {
    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn n_slices(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, mode: &str, t: usize) -> Result<f64> {
        Ok(self.values[t][self.space.index_of(mode)?])
    }

    /// One row per mode, one column per slice.
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(
            std::iter::once("mode".to_string()).chain((0..self.n_slices()).map(|t| format!("t{t}"))),
        );
        for (m, label) in self.space.labels().iter().enumerate() {
            let mut row: Vec<Cell> = vec![label.as_str().into()];
            row.extend(self.values.iter().map(|slice| Cell::Num(slice[m])));
            table.push(row);
        }
        table
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }
}

pub fn trace_map(circuit: &Circuit, input: &PureState, postselected: &str) -> Result<TraceMap> {
    Ok(two_state(circuit, input, postselected)?.trace_map())
}

pub fn abl_probability(
    circuit: &Circuit,
    input: &PureState,
    postselected: &str,
    slice: usize,
    projector: &[&str],
) -> Result<f64> {
    two_state(circuit, input, postselected)?.abl(slice, projector)
}
