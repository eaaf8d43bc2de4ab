use num_complex::Complex64;

use crate::amplitude::{AbsorptionRecord, ModeSpace, PureState, CONSERVATION_TOL};
use crate::error::{IfmError, Result};

/// Named detectors, each reading one mode. Insertion order is kept.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorSet {
    entries: Vec<(String, String)>,
}

impl DetectorSet {
    pub fn new<I, N, M>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (N, M)>,
        N: Into<String>,
        M: Into<String>,
    {
        let mut set = DetectorSet::default();
        for (name, mode) in entries {
            set.insert(name.into(), mode.into())?;
        }
        Ok(set)
    }

    fn insert(&mut self, name: String, mode: String) -> Result<()> {
        if self.entries.iter().any(|(n, _)| *n == name) {
            return Err(IfmError::InvalidParameter(format!(
                "detector `{name}` declared twice"
            )));
        }
        if let Some((first, _)) = self.entries.iter().find(|(_, m)| *m == mode) {
            return Err(IfmError::DuplicateDetectorMode {
                first: first.clone(),
                second: name,
                mode,
            });
        }
        self.entries.push((name, mode));
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(n, m)| (n.as_str(), m.as_str()))
    }

    pub fn mode_of(&self, detector: &str) -> Result<&str> {
        self.entries
            .iter()
            .find(|(n, _)| n == detector)
            .map(|(_, m)| m.as_str())
            .ok_or_else(|| IfmError::UnknownDetector(detector.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    /// Symmetric splitter: `[[√(1−R), i√R], [i√R, √(1−R)]]` on `(a, b)`.
    BeamSplitter { a: String, b: String, reflectivity: f64 },
    /// Multiplies the mode amplitude by `i`.
    Mirror { mode: String },
    PhaseShift { mode: String, phase: f64 },
    /// Keeps `transmission` of the amplitude live; the rest goes to the ledger.
    Absorber { mode: String, transmission: Complex64 },
    /// Declares detectors; acts as the identity on the state.
    Detectors(DetectorSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElement {
    pub id: String,
    pub kind: ElementKind,
}

impl OpticalElement {
    pub fn beam_splitter(
        id: impl Into<String>,
        a: impl Into<String>,
        b: impl Into<String>,
        reflectivity: f64,
    ) -> Self {
        Self {
            id: id.into(),
            kind: ElementKind::BeamSplitter {
                a: a.into(),
                b: b.into(),
                reflectivity,
            },
        }
    }

    pub fn mirror(id: impl Into<String>, mode: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind: ElementKind::Mirror { mode: mode.into() },
        }
    }

    pub fn phase_shift(id: impl Into<String>, mode: impl Into<String>, phase: f64) -> Self {
        Self {
            id: id.into(),
            kind: ElementKind::PhaseShift {
                mode: mode.into(),
                phase,
            },
        }
    }

    pub fn absorber(id: impl Into<String>, mode: impl Into<String>, transmission: Complex64) -> Self {
        Self {
            id: id.into(),
            kind: ElementKind::Absorber {
                mode: mode.into(),
                transmission,
            },
        }
    }

    /// Opaque object: every amplitude reaching it is absorbed.
    pub fn bomb(id: impl Into<String>, mode: impl Into<String>) -> Self {
        Self::absorber(id, mode, Complex64::new(0.0, 0.0))
    }

    pub fn detectors(id: impl Into<String>, set: DetectorSet) -> Self {
        Self {
            id: id.into(),
            kind: ElementKind::Detectors(set),
        }
    }

    /// Mode labels this element acts on.
    pub fn modes(&self) -> Vec<&str> {
        match &self.kind {
            ElementKind::BeamSplitter { a, b, .. } => vec![a, b],
            ElementKind::Mirror { mode }
            | ElementKind::PhaseShift { mode, .. }
            | ElementKind::Absorber { mode, .. } => vec![mode],
            ElementKind::Detectors(set) => set.iter().map(|(_, m)| m).collect(),
        }
    }

    /// Checks parameters and binds mode labels to indices of `space`.
    pub(crate) fn resolve(&self, space: &ModeSpace) -> Result<Resolved> {
        Ok(match &self.kind {
            ElementKind::BeamSplitter { a, b, reflectivity } => {
                if !(0.0..=1.0).contains(reflectivity) {
                    return Err(IfmError::InvalidParameter(format!(
                        "{}: reflectivity {reflectivity} outside [0, 1]",
                        self.id
                    )));
                }
                if a == b {
                    return Err(IfmError::InvalidParameter(format!(
                        "{}: beam splitter needs two distinct modes",
                        self.id
                    )));
                }
                Resolved::BeamSplitter {
                    a: space.index_of(a)?,
                    b: space.index_of(b)?,
                    t: (1.0 - reflectivity).sqrt(),
                    r: reflectivity.sqrt(),
                }
            }
            ElementKind::Mirror { mode } => Resolved::Phase {
                mode: space.index_of(mode)?,
                factor: Complex64::new(0.0, 1.0),
            },
            ElementKind::PhaseShift { mode, phase } => {
                if !phase.is_finite() {
                    return Err(IfmError::InvalidParameter(format!(
                        "{}: phase must be finite",
                        self.id
                    )));
                }
                Resolved::Phase {
                    mode: space.index_of(mode)?,
                    factor: Complex64::from_polar(1.0, *phase),
                }
            }
            ElementKind::Absorber { mode, transmission } => {
                let t = *transmission;
                if !t.re.is_finite() || !t.im.is_finite() || t.norm() > 1.0 + CONSERVATION_TOL {
                    return Err(IfmError::InvalidParameter(format!(
                        "{}: absorber transmission {t} must satisfy |t| <= 1",
                        self.id
                    )));
                }
                Resolved::Absorber {
                    mode: space.index_of(mode)?,
                    t,
                    leak: (1.0 - t.norm_sqr()).max(0.0).sqrt(),
                }
            }
            ElementKind::Detectors(set) => {
                for (_, mode) in set.iter() {
                    space.index_of(mode)?;
                }
                Resolved::Identity
            }
        })
    }
}

/// Element bound to mode indices, ready to act on amplitude vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Resolved {
    BeamSplitter { a: usize, b: usize, t: f64, r: f64 },
    Phase { mode: usize, factor: Complex64 },
    Absorber { mode: usize, t: Complex64, leak: f64 },
    Identity,
}

impl Resolved {
    /// Applies the element in place. Returns the mode index and removed
    /// amplitude when an absorber took something out of the live state.
    pub(crate) fn forward(&self, amps: &mut [Complex64]) -> Option<(usize, Complex64)> {
        match *self {
            Resolved::BeamSplitter { a, b, t, r } => {
                let (x, y) = (amps[a], amps[b]);
                let ir = Complex64::new(0.0, r);
                amps[a] = x * t + y * ir;
                amps[b] = x * ir + y * t;
                None
            }
            Resolved::Phase { mode, factor } => {
                amps[mode] *= factor;
                None
            }
            Resolved::Absorber { mode, t, leak } => {
                let x = amps[mode];
                amps[mode] = x * t;
                let removed = x * leak;
                (removed.norm_sqr() > 0.0).then_some((mode, removed))
            }
            Resolved::Identity => None,
        }
    }

    /// Adjoint of the live-sector map, used for backward evolution.
    pub(crate) fn adjoint(&self, amps: &mut [Complex64]) {
        match *self {
            Resolved::BeamSplitter { a, b, t, r } => {
                let (x, y) = (amps[a], amps[b]);
                let mir = Complex64::new(0.0, -r);
                amps[a] = x * t + y * mir;
                amps[b] = x * mir + y * t;
            }
            Resolved::Phase { mode, factor } => amps[mode] *= factor.conj(),
            Resolved::Absorber { mode, t, .. } => amps[mode] *= t.conj(),
            Resolved::Identity => {}
        }
    }
}

/// Applies one element to a state, recording any absorbed branch under
/// `time_step`.
pub fn apply_element(
    state: &PureState,
    element: &OpticalElement,
    time_step: usize,
) -> Result<PureState> {
    let resolved = element.resolve(state.space())?;
    let mut next = state.clone();
    apply_resolved(&mut next, &element.id, resolved, time_step);
    Ok(next)
}

pub(crate) fn apply_resolved(state: &mut PureState, id: &str, el: Resolved, time_step: usize) {
    if let Some((_, removed)) = el.forward(state.amplitudes_mut()) {
        state.push_record(AbsorptionRecord::new(id, time_step, removed));
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;
    use std::sync::Arc;

    use super::*;
    use crate::amplitude::make_state;

    fn space() -> Arc<ModeSpace> {
        Arc::new(ModeSpace::new(["a", "b"]).unwrap())
    }

    fn close(x: Complex64, y: Complex64) -> bool {
        (x - y).norm() < 1e-15
    }

    #[test]
    fn balanced_splitter_convention() {
        let s = make_state(space(), "a").unwrap();
        let out = apply_element(&s, &OpticalElement::beam_splitter("bs", "a", "b", 0.5), 0).unwrap();
        assert!(close(out.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(out.amplitudes()[1], Complex64::new(0.0, FRAC_1_SQRT_2)));
    }

    #[test]
    fn opaque_absorber_moves_half_into_ledger() {
        let s = make_state(space(), "a").unwrap();
        let s = apply_element(&s, &OpticalElement::beam_splitter("bs", "a", "b", 0.5), 0).unwrap();
        let s = apply_element(&s, &OpticalElement::bomb("bomb", "b"), 1).unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::new(0.0, 0.0));
        assert_eq!(s.ledger().len(), 1);
        let rec = &s.ledger()[0];
        assert_eq!(rec.element_id, "bomb");
        assert_eq!(rec.time_step, 1);
        assert!((rec.measure - 0.5).abs() < 1e-15);
        assert!((s.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transparent_absorber_is_identity() {
        let s = make_state(space(), "a").unwrap();
        let s = apply_element(&s, &OpticalElement::beam_splitter("bs", "a", "b", 0.3), 0).unwrap();
        let out = apply_element(&s, &OpticalElement::absorber("obj", "b", Complex64::new(1.0, 0.0)), 1)
            .unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn semi_transparent_absorber_conserves() {
        let s = make_state(space(), "b").unwrap();
        let t = Complex64::from_polar(0.6, 0.4);
        let out = apply_element(&s, &OpticalElement::absorber("obj", "b", t), 2).unwrap();
        assert!((out.probability("b").unwrap() - 0.36).abs() < 1e-15);
        assert!((out.explosion_measure() - 0.64).abs() < 1e-15);
    }

    #[test]
    fn mirror_and_phase() {
        let s = make_state(space(), "a").unwrap();
        let m = apply_element(&s, &OpticalElement::mirror("m", "a"), 0).unwrap();
        assert!(close(m.amplitudes()[0], Complex64::new(0.0, 1.0)));
        let p = apply_element(&s, &OpticalElement::phase_shift("p", "a", std::f64::consts::PI), 0)
            .unwrap();
        assert!(close(p.amplitudes()[0], Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn invalid_elements_rejected() {
        let s = make_state(space(), "a").unwrap();
        let bad = [
            OpticalElement::beam_splitter("bs", "a", "z", 0.5),
            OpticalElement::beam_splitter("bs", "a", "a", 0.5),
            OpticalElement::beam_splitter("bs", "a", "b", 1.2),
            OpticalElement::absorber("x", "a", Complex64::new(1.1, 0.0)),
            OpticalElement::phase_shift("p", "a", f64::NAN),
        ];
        for el in &bad {
            assert!(apply_element(&s, el, 0).is_err(), "{el:?}");
        }
        assert_eq!(
            apply_element(&s, &OpticalElement::mirror("m", "q"), 0).unwrap_err(),
            IfmError::UnknownMode("q".into())
        );
    }

    #[test]
    fn adjoint_undoes_unitaries() {
        let sp = space();
        let els = [
            OpticalElement::beam_splitter("bs", "a", "b", 0.27),
            OpticalElement::mirror("m", "b"),
            OpticalElement::phase_shift("p", "a", 1.1),
        ];
        let mut v = vec![Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.9)];
        let orig = v.clone();
        for el in &els {
            el.resolve(&sp).unwrap().forward(&mut v);
        }
        for el in els.iter().rev() {
            el.resolve(&sp).unwrap().adjoint(&mut v);
        }
        for (x, y) in v.iter().zip(&orig) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn detector_set_rejects_shared_modes() {
        let err = DetectorSet::new([("D1", "a"), ("D2", "a")]).unwrap_err();
        assert!(matches!(err, IfmError::DuplicateDetectorMode { .. }));
        assert!(DetectorSet::new([("D1", "a"), ("D1", "b")]).is_err());
        let set = DetectorSet::new([("D1", "a"), ("D2", "b")]).unwrap();
        assert_eq!(set.mode_of("D2").unwrap(), "b");
        assert!(matches!(set.mode_of("D3"), Err(IfmError::UnknownDetector(_))));
    }
}
