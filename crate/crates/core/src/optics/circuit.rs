use std::collections::HashSet;
use std::sync::Arc;

use crate::amplitude::{ModeSpace, PureState};
use crate::error::{IfmError, Result};

use super::element::{apply_resolved, DetectorSet, ElementKind, OpticalElement, Resolved};

/// Timed sequence of optical elements. Elements within one step act on
/// disjoint modes, so their order inside the step does not matter.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    space: Arc<ModeSpace>,
    steps: Vec<Vec<OpticalElement>>,
    resolved: Vec<Vec<Resolved>>,
}

impl Circuit {
    pub fn new(space: Arc<ModeSpace>, steps: Vec<Vec<OpticalElement>>) -> Result<Self> {
        let mut resolved = Vec::with_capacity(steps.len());
        for (i, step) in steps.iter().enumerate() {
            let mut touched = HashSet::new();
            let mut row = Vec::with_capacity(step.len());
            for el in step {
                for mode in el.modes() {
                    if !touched.insert(mode) {
                        return Err(IfmError::OverlappingElements {
                            step: i,
                            mode: mode.to_string(),
                        });
                    }
                }
                row.push(el.resolve(&space)?);
            }
            resolved.push(row);
        }
        Ok(Self {
            space,
            steps,
            resolved,
        })
    }

    pub fn empty(space: Arc<ModeSpace>) -> Self {
        Self {
            space,
            steps: Vec::new(),
            resolved: Vec::new(),
        }
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn steps(&self) -> &[Vec<OpticalElement>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The last detector declaration in the circuit, if any.
    pub fn detectors(&self) -> Option<&DetectorSet> {
        self.steps.iter().rev().flatten().find_map(|el| match &el.kind {
            ElementKind::Detectors(set) => Some(set),
            _ => None,
        })
    }

    /// Runs `self` then `other`. Both must share a mode space.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if self.space.labels() != other.space.labels() {
            return Err(IfmError::SpaceMismatch("circuits use different modes".into()));
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        let mut resolved = self.resolved.clone();
        resolved.extend(other.resolved.iter().cloned());
        Ok(Circuit {
            space: Arc::clone(&self.space),
            steps,
            resolved,
        })
    }

    pub(crate) fn resolved_steps(&self) -> &[Vec<Resolved>] {
        &self.resolved
    }

    pub(crate) fn check_input(&self, input: &PureState) -> Result<()> {
        if input.space().labels() != self.space.labels() {
            return Err(IfmError::SpaceMismatch(format!(
                "input modes {:?} vs circuit modes {:?}",
                input.space().labels(),
                self.space.labels()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitRun {
    pub final_state: PureState,
    /// State after every step; `trajectory[k]` follows step `k`.
    pub trajectory: Vec<PureState>,
}

pub fn run_circuit(circuit: &Circuit, input: &PureState) -> Result<CircuitRun> {
    let mut trajectory = Vec::with_capacity(circuit.len());
    let final_state = run_with(circuit, input, |_, state| trajectory.push(state.clone()))?;
    Ok(CircuitRun {
        final_state,
        trajectory,
    })
}

/// Runs the circuit, handing the state after each step to `observe` instead
/// of storing a trajectory.
pub fn run_with(
    circuit: &Circuit,
    input: &PureState,
    mut observe: impl FnMut(usize, &PureState),
) -> Result<PureState> {
    circuit.check_input(input)?;
    let mut state = input.clone();
    for (k, (step, resolved)) in circuit.steps.iter().zip(&circuit.resolved).enumerate() {
        for (el, r) in step.iter().zip(resolved) {
            apply_resolved(&mut state, &el.id, *r, k);
        }
        observe(k, &state);
    }
    Ok(state)
}

/// Probabilities of every way a run can end.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub detector_probs: Vec<(String, f64)>,
    pub explosion_prob: f64,
    /// Live probability sitting on modes no detector watches.
    pub residual_prob: f64,
}

impl OutcomeDistribution {
    pub fn get(&self, detector: &str) -> Option<f64> {
        self.detector_probs
            .iter()
            .find(|(n, _)| n == detector)
            .map(|(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.detector_probs.iter().map(|(_, p)| p).sum::<f64>()
            + self.explosion_prob
            + self.residual_prob
    }
}

pub fn measure(state: &PureState, detectors: &DetectorSet) -> Result<OutcomeDistribution> {
    let mut detector_probs = Vec::with_capacity(detectors.len());
    let mut seen = 0.0;
    for (name, mode) in detectors.iter() {
        let p = state.probability(mode)?;
        seen += p;
        detector_probs.push((name.to_string(), p));
    }
    Ok(OutcomeDistribution {
        detector_probs,
        explosion_prob: state.explosion_measure(),
        residual_prob: (state.live_probability() - seen).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::amplitude::make_state;

    fn space() -> Arc<ModeSpace> {
        Arc::new(ModeSpace::new(["a", "b", "c"]).unwrap())
    }

    #[test]
    fn empty_circuit_is_identity() {
        let input = make_state(space(), "b").unwrap();
        let run = run_circuit(&Circuit::empty(space()), &input).unwrap();
        assert_eq!(run.final_state, input);
        assert!(run.trajectory.is_empty());
    }

    #[test]
    fn overlapping_elements_rejected() {
        let err = Circuit::new(
            space(),
            vec![vec![
                OpticalElement::beam_splitter("bs", "a", "b", 0.5),
                OpticalElement::mirror("m", "b"),
            ]],
        )
        .unwrap_err();
        assert_eq!(err, IfmError::OverlappingElements { step: 0, mode: "b".into() });
    }

    #[test]
    fn unknown_mode_rejected_at_construction() {
        let err = Circuit::new(space(), vec![vec![OpticalElement::mirror("m", "z")]]).unwrap_err();
        assert_eq!(err, IfmError::UnknownMode("z".into()));
    }

    #[test]
    fn mismatched_input_rejected() {
        let other = Arc::new(ModeSpace::new(["x"]).unwrap());
        let input = make_state(other, "x").unwrap();
        assert!(matches!(
            run_circuit(&Circuit::empty(space()), &input),
            Err(IfmError::SpaceMismatch(_))
        ));
    }

    #[test]
    fn residual_on_unwatched_mode() {
        let state = make_state(space(), "c").unwrap();
        let det = DetectorSet::new([("D1", "a"), ("D2", "b")]).unwrap();
        let out = measure(&state, &det).unwrap();
        assert_eq!(out.get("D1"), Some(0.0));
        assert_eq!(out.get("D2"), Some(0.0));
        assert_eq!(out.residual_prob, 1.0);
        assert_eq!(out.explosion_prob, 0.0);
    }

    #[test]
    fn trajectory_records_each_step() {
        let c = Circuit::new(
            space(),
            vec![
                vec![OpticalElement::beam_splitter("bs", "a", "b", 0.5)],
                vec![OpticalElement::absorber("obj", "b", Complex64::new(0.5, 0.0))],
                vec![],
            ],
        )
        .unwrap();
        let run = run_circuit(&c, &make_state(space(), "a").unwrap()).unwrap();
        assert_eq!(run.trajectory.len(), 3);
        assert_eq!(run.trajectory[1], run.trajectory[2]);
        assert_eq!(run.final_state.ledger()[0].time_step, 1);
        for s in &run.trajectory {
            assert!((s.total_probability() - 1.0).abs() < 1e-12);
        }
    }
}
