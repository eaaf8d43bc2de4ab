//! Two particles, each with its own modes: a photon (factor A) and an object
//! particle (factor B) that can itself be sent through an interferometer.
//!
//! The only coupling between them is coincidence absorption: when both
//! occupy a declared pair of modes in the same step, that joint amplitude is
//! moved to the ledger.

use std::sync::Arc;

use num_complex::Complex64;

use crate::amplitude::{AbsorptionRecord, ModeSpace, PureState, CONDITIONING_FLOOR};
use crate::error::{IfmError, Result};
use crate::optics::element::Resolved;
use crate::optics::mzi::{MziSpec, DARK, LOWER};
use crate::optics::{Circuit, DetectorSet, OpticalElement};
use crate::table::{Cell, Table};
use crate::tsvf::abl_rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    A,
    B,
}

/// Joint amplitudes over ordered mode pairs, row-major in `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    space_a: Arc<ModeSpace>,
    space_b: Arc<ModeSpace>,
    amplitudes: Vec<Complex64>,
    ledger: Vec<AbsorptionRecord>,
}

pub fn tensor(sa: &PureState, sb: &PureState) -> Result<CompositeState> {
    if !sa.ledger().is_empty() || !sb.ledger().is_empty() {
        return Err(IfmError::LedgerNotEmpty);
    }
    let amplitudes = sa
        .amplitudes()
        .iter()
        .flat_map(|a| sb.amplitudes().iter().map(move |b| a * b))
        .collect();
    Ok(CompositeState {
        space_a: Arc::clone(sa.space()),
        space_b: Arc::clone(sb.space()),
        amplitudes,
        ledger: Vec::new(),
    })
}

impl CompositeState {
    pub fn space(&self, which: Factor) -> &Arc<ModeSpace> {
        match which {
            Factor::A => &self.space_a,
            Factor::B => &self.space_b,
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, mode_a: &str, mode_b: &str) -> Result<Complex64> {
        Ok(self.amplitudes[self.pair_index(mode_a, mode_b)?])
    }

    pub fn ledger(&self) -> &[AbsorptionRecord] {
        &self.ledger
    }

    pub fn live_probability(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn explosion_measure(&self) -> f64 {
        self.ledger.iter().map(|r| r.measure).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.live_probability() + self.explosion_measure()
    }

    /// Live probability per mode of one factor, summed over the other.
    pub fn marginal(&self, which: Factor) -> Vec<f64> {
        let nb = self.space_b.size();
        let mut out = vec![0.0; self.space(which).size()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let k = match which {
                Factor::A => i / nb,
                Factor::B => i % nb,
            };
            out[k] += a.norm_sqr();
        }
        out
    }

    fn pair_index(&self, mode_a: &str, mode_b: &str) -> Result<usize> {
        Ok(self.space_a.index_of(mode_a)? * self.space_b.size() + self.space_b.index_of(mode_b)?)
    }
}

/// Applies a single-particle resolved element to one factor, returning the
/// pair indices and amplitudes removed by absorbers.
fn act_local(
    amps: &mut [Complex64],
    nb: usize,
    which: Factor,
    el: &Resolved,
) -> Vec<(usize, Complex64)> {
    let na = amps.len() / nb;
    let mut removed = Vec::new();
    match which {
        Factor::B => {
            for ia in 0..na {
                let row = &mut amps[ia * nb..(ia + 1) * nb];
                if let Some((ib, r)) = el.forward(row) {
                    removed.push((ia * nb + ib, r));
                }
            }
        }
        Factor::A => {
            let mut col = vec![Complex64::new(0.0, 0.0); na];
            for ib in 0..nb {
                for ia in 0..na {
                    col[ia] = amps[ia * nb + ib];
                }
                if let Some((ia, r)) = el.forward(&mut col) {
                    removed.push((ia * nb + ib, r));
                }
                for ia in 0..na {
                    amps[ia * nb + ib] = col[ia];
                }
            }
        }
    }
    removed
}

fn act_local_adjoint(amps: &mut [Complex64], nb: usize, which: Factor, el: &Resolved) {
    let na = amps.len() / nb;
    match which {
        Factor::B => {
            for ia in 0..na {
                el.adjoint(&mut amps[ia * nb..(ia + 1) * nb]);
            }
        }
        Factor::A => {
            let mut col = vec![Complex64::new(0.0, 0.0); na];
            for ib in 0..nb {
                for ia in 0..na {
                    col[ia] = amps[ia * nb + ib];
                }
                el.adjoint(&mut col);
                for ia in 0..na {
                    amps[ia * nb + ib] = col[ia];
                }
            }
        }
    }
}

/// Lifts a single-particle element onto one factor of the joint state.
pub fn apply_local(
    state: &CompositeState,
    which: Factor,
    element: &OpticalElement,
    step: usize,
) -> Result<CompositeState> {
    let resolved = element.resolve(state.space(which))?;
    let mut next = state.clone();
    let nb = next.space_b.size();
    for (_, amp) in act_local(&mut next.amplitudes, nb, which, &resolved) {
        next.ledger.push(AbsorptionRecord::new(element.id.clone(), step, amp));
    }
    Ok(next)
}

fn coincidence_id(mode_a: &str, mode_b: &str) -> String {
    format!("coincidence:{mode_a}:{mode_b}")
}

/// Moves the amplitude on `(mode_a, mode_b)` into the ledger.
pub fn coincidence_absorb(
    state: &CompositeState,
    overlap: (&str, &str),
    step: usize,
) -> Result<CompositeState> {
    let idx = state.pair_index(overlap.0, overlap.1)?;
    let mut next = state.clone();
    let amp = std::mem::take(&mut next.amplitudes[idx]);
    if amp.norm_sqr() > 0.0 {
        next.ledger.push(AbsorptionRecord::new(
            coincidence_id(overlap.0, overlap.1),
            step,
            amp,
        ));
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompositeOp {
    Local(Factor, OpticalElement),
    Coincidence { a: String, b: String },
}

#[derive(Debug, Clone)]
enum ResolvedOp {
    Local(Factor, Resolved, String),
    Coincidence(usize, String),
}

/// Interleaved two-particle timeline. Within a step, local elements act
/// first and coincidence absorbers last.
#[derive(Debug, Clone)]
pub struct CompositeCircuit {
    space_a: Arc<ModeSpace>,
    space_b: Arc<ModeSpace>,
    steps: Vec<Vec<CompositeOp>>,
    resolved: Vec<Vec<ResolvedOp>>,
    detectors_a: DetectorSet,
    detectors_b: DetectorSet,
}

/// Shared working area of the two particles.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlap {
    pub step: usize,
    pub mode_a: String,
    pub mode_b: String,
}

impl CompositeCircuit {
    /// Runs step `k` of `a` and step `k` of `b` together, followed by any
    /// overlap declared at `k`.
    pub fn interleave(a: &Circuit, b: &Circuit, overlaps: &[Overlap]) -> Result<Self> {
        let n = a.len().max(b.len());
        let mut steps: Vec<Vec<CompositeOp>> = vec![Vec::new(); n];
        for (k, step) in a.steps().iter().enumerate() {
            steps[k].extend(step.iter().cloned().map(|el| CompositeOp::Local(Factor::A, el)));
        }
        for (k, step) in b.steps().iter().enumerate() {
            steps[k].extend(step.iter().cloned().map(|el| CompositeOp::Local(Factor::B, el)));
        }
        for ov in overlaps {
            if ov.step >= n {
                return Err(IfmError::InvalidParameter(format!(
                    "overlap step {} beyond the {n}-step timeline",
                    ov.step
                )));
            }
            steps[ov.step].push(CompositeOp::Coincidence {
                a: ov.mode_a.clone(),
                b: ov.mode_b.clone(),
            });
        }
        let detectors_a = a.detectors().cloned().unwrap_or_default();
        let detectors_b = b.detectors().cloned().unwrap_or_default();
        Self::new(
            Arc::clone(a.space()),
            Arc::clone(b.space()),
            steps,
            detectors_a,
            detectors_b,
        )
    }

    pub fn new(
        space_a: Arc<ModeSpace>,
        space_b: Arc<ModeSpace>,
        steps: Vec<Vec<CompositeOp>>,
        detectors_a: DetectorSet,
        detectors_b: DetectorSet,
    ) -> Result<Self> {
        let nb = space_b.size();
        let mut resolved = Vec::with_capacity(steps.len());
        for step in &steps {
            let mut row = Vec::with_capacity(step.len());
            for op in step {
                row.push(match op {
                    CompositeOp::Local(which, el) => {
                        let space = match which {
                            Factor::A => &space_a,
                            Factor::B => &space_b,
                        };
                        ResolvedOp::Local(*which, el.resolve(space)?, el.id.clone())
                    }
                    CompositeOp::Coincidence { a, b } => ResolvedOp::Coincidence(
                        space_a.index_of(a)? * nb + space_b.index_of(b)?,
                        coincidence_id(a, b),
                    ),
                });
            }
            resolved.push(row);
        }
        for (_, m) in detectors_a.iter() {
            space_a.index_of(m)?;
        }
        for (_, m) in detectors_b.iter() {
            space_b.index_of(m)?;
        }
        Ok(Self {
            space_a,
            space_b,
            steps,
            resolved,
            detectors_a,
            detectors_b,
        })
    }

    pub fn steps(&self) -> &[Vec<CompositeOp>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn check_input(&self, input: &CompositeState) -> Result<()> {
        if input.space_a.labels() != self.space_a.labels()
            || input.space_b.labels() != self.space_b.labels()
        {
            return Err(IfmError::SpaceMismatch(
                "composite input does not match circuit modes".into(),
            ));
        }
        Ok(())
    }

    /// State after every step, starting with the input.
    pub fn run(&self, input: &CompositeState) -> Result<Vec<CompositeState>> {
        self.check_input(input)?;
        let nb = self.space_b.size();
        let mut state = input.clone();
        let mut states = Vec::with_capacity(self.len() + 1);
        states.push(state.clone());
        for (k, step) in self.resolved.iter().enumerate() {
            for op in step {
                match op {
                    ResolvedOp::Local(which, el, id) => {
                        for (_, amp) in act_local(&mut state.amplitudes, nb, *which, el) {
                            state.ledger.push(AbsorptionRecord::new(id.clone(), k, amp));
                        }
                    }
                    ResolvedOp::Coincidence(idx, id) => {
                        let amp = std::mem::take(&mut state.amplitudes[*idx]);
                        if amp.norm_sqr() > 0.0 {
                            state.ledger.push(AbsorptionRecord::new(id.clone(), k, amp));
                        }
                    }
                }
            }
            states.push(state.clone());
        }
        Ok(states)
    }

    pub fn measure(&self, state: &CompositeState) -> Result<JointOutcome> {
        let mut probs = Vec::new();
        let mut seen = 0.0;
        for (da, ma) in self.detectors_a.iter() {
            for (db, mb) in self.detectors_b.iter() {
                let p = state.amplitude(ma, mb)?.norm_sqr();
                seen += p;
                probs.push(((da.to_string(), db.to_string()), p));
            }
        }
        Ok(JointOutcome {
            probs,
            explosion_prob: state.explosion_measure(),
            residual_prob: (state.live_probability() - seen).max(0.0),
        })
    }

    /// Forward and backward joint amplitudes for a coincidence of detector
    /// `post_a` on the photon and `post_b` on the object.
    pub fn two_state(
        &self,
        input: &CompositeState,
        post_a: &str,
        post_b: &str,
    ) -> Result<CompositeTwoState> {
        self.check_input(input)?;
        let nb = self.space_b.size();
        let target = self.space_a.index_of(self.detectors_a.mode_of(post_a)?)? * nb
            + self.space_b.index_of(self.detectors_b.mode_of(post_b)?)?;

        let mut amps = input.amplitudes.clone();
        let mut forward = Vec::with_capacity(self.len() + 1);
        forward.push(amps.clone());
        for step in &self.resolved {
            for op in step {
                match op {
                    ResolvedOp::Local(which, el, _) => {
                        act_local(&mut amps, nb, *which, el);
                    }
                    ResolvedOp::Coincidence(idx, _) => amps[*idx] = Complex64::new(0.0, 0.0),
                }
            }
            forward.push(amps.clone());
        }
        let probability = amps[target].norm_sqr();
        if probability < CONDITIONING_FLOOR {
            return Err(IfmError::PostSelectionImpossible {
                detector: format!("{post_a}&{post_b}"),
                probability,
            });
        }

        let mut back = vec![Complex64::new(0.0, 0.0); amps.len()];
        back[target] = Complex64::new(1.0, 0.0);
        let mut backward = vec![Vec::new(); self.len() + 1];
        backward[self.len()] = back.clone();
        for (k, step) in self.resolved.iter().enumerate().rev() {
            for op in step.iter().rev() {
                match op {
                    ResolvedOp::Local(which, el, _) => act_local_adjoint(&mut back, nb, *which, el),
                    ResolvedOp::Coincidence(idx, _) => back[*idx] = Complex64::new(0.0, 0.0),
                }
            }
            backward[k] = back.clone();
        }
        let overlap = backward[self.len()]
            .iter()
            .zip(&forward[self.len()])
            .map(|(b, f)| b.conj() * f)
            .sum();
        Ok(CompositeTwoState {
            space_a: Arc::clone(&self.space_a),
            space_b: Arc::clone(&self.space_b),
            forward,
            backward,
            overlap,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeTwoState {
    space_a: Arc<ModeSpace>,
    space_b: Arc<ModeSpace>,
    pub forward: Vec<Vec<Complex64>>,
    pub backward: Vec<Vec<Complex64>>,
    pub overlap: Complex64,
}

impl CompositeTwoState {
    pub fn postselection_probability(&self) -> f64 {
        self.overlap.norm_sqr()
    }

    /// ABL probability at slice `t` for the projector selecting the pairs
    /// `(a, b)` for which `select(a_label, b_label)` holds.
    pub fn abl(&self, t: usize, select: impl Fn(&str, &str) -> bool) -> Result<f64> {
        if t >= self.forward.len() {
            return Err(IfmError::InvalidParameter(format!(
                "slice {t} outside 0..{}",
                self.forward.len()
            )));
        }
        let nb = self.space_b.size();
        abl_rule(&self.forward[t], &self.backward[t], |i| {
            select(self.space_a.label(i / nb), self.space_b.label(i % nb))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcome {
    /// Probability of each (photon detector, object detector) coincidence.
    pub probs: Vec<((String, String), f64)>,
    pub explosion_prob: f64,
    pub residual_prob: f64,
}

impl JointOutcome {
    pub fn get(&self, det_a: &str, det_b: &str) -> Option<f64> {
        self.probs
            .iter()
            .find(|((a, b), _)| a == det_a && b == det_b)
            .map(|(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().map(|(_, p)| p).sum::<f64>() + self.explosion_prob + self.residual_prob
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["photon", "object", "probability"]);
        for ((a, b), p) in &self.probs {
            t.push(vec![a.as_str().into(), b.as_str().into(), Cell::Num(*p)]);
        }
        t.push(vec!["explosion".into(), "explosion".into(), Cell::Num(self.explosion_prob)]);
        t.push(vec!["residual".into(), "residual".into(), Cell::Num(self.residual_prob)]);
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }
}

/// Nested interaction-free measurement: the photon's lower arm and the
/// object particle's lower arm meet in one working area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedConfig {
    pub reflectivity: f64,
    /// When false the particles never interact.
    pub coupled: bool,
}

impl Default for NestedConfig {
    fn default() -> Self {
        Self {
            reflectivity: 0.5,
            coupled: true,
        }
    }
}

/// ABL probabilities given that both dark ports fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalReport {
    pub object_in_working_area: f64,
    pub photon_in_working_area: f64,
    pub both_in_working_area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedReport {
    pub config: NestedConfig,
    pub joint: JointOutcome,
    /// Probability that both dark ports fire.
    pub p_both_dark: f64,
    /// `None` when the dark-dark coincidence cannot happen.
    pub conditional: Option<ConditionalReport>,
    /// Time slice at which the working-area projectors are evaluated.
    pub working_slice: usize,
}

/// The photon/object pair used by [`nested_ifm`], exposed for inspection.
pub struct NestedSetup {
    pub circuit: CompositeCircuit,
    pub input: CompositeState,
    pub working_step: usize,
}

pub fn nested_setup(cfg: NestedConfig) -> Result<NestedSetup> {
    let r = cfg.reflectivity;
    if !(r > 0.0 && r < 1.0) {
        return Err(IfmError::InvalidParameter(format!(
            "nested reflectivity {r} must lie in (0, 1)"
        )));
    }
    let spec = MziSpec {
        first_reflectivity: r,
        ..MziSpec::default()
    };
    let photon = spec.build()?;
    let object = spec.build()?;
    let working_step = 2 + spec.object_slot;
    let overlaps = if cfg.coupled {
        vec![Overlap {
            step: working_step,
            mode_a: LOWER.into(),
            mode_b: LOWER.into(),
        }]
    } else {
        Vec::new()
    };
    let circuit = CompositeCircuit::interleave(&photon.circuit, &object.circuit, &overlaps)?;
    let input = tensor(&photon.input(), &object.input())?;
    Ok(NestedSetup {
        circuit,
        input,
        working_step,
    })
}

/// Runs two interleaved matched interferometers sharing a working area and
/// reports joint statistics plus the conditional working-area probabilities.
///
/// Post-selection is on both dark ports (`D2`), the informative outcome of
/// each interferometer.
pub fn nested_ifm(cfg: NestedConfig) -> Result<NestedReport> {
    let setup = nested_setup(cfg)?;
    let states = setup.circuit.run(&setup.input)?;
    let joint = setup.circuit.measure(states.last().expect("input slice"))?;
    let p_both_dark = joint.get(DARK, DARK).unwrap_or(0.0);
    let working_slice = setup.working_step;

    let conditional = match setup.circuit.two_state(&setup.input, DARK, DARK) {
        Ok(rec) => Some(ConditionalReport {
            object_in_working_area: rec.abl(working_slice, |_, b| b == LOWER)?,
            photon_in_working_area: rec.abl(working_slice, |a, _| a == LOWER)?,
            both_in_working_area: rec.abl(working_slice, |a, b| a == LOWER && b == LOWER)?,
        }),
        Err(IfmError::PostSelectionImpossible { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(NestedReport {
        config: cfg,
        joint,
        p_both_dark,
        conditional,
        working_slice,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::amplitude::make_state;

    fn space() -> Arc<ModeSpace> {
        Arc::new(ModeSpace::new(["u", "l"]).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = tensor(&make_state(space(), "u").unwrap(), &make_state(space(), "l").unwrap()).unwrap();
        assert_eq!(s.amplitudes(), &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    }

    #[test]
    fn tensor_of_superposition() {
        let sup = PureState::from_amplitudes(space(), vec![c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)])
            .unwrap();
        let s = tensor(&sup, &make_state(space(), "u").unwrap()).unwrap();
        assert_eq!(s.amplitude("u", "u").unwrap(), c(FRAC_1_SQRT_2, 0.));
        assert_eq!(s.amplitude("l", "u").unwrap(), c(FRAC_1_SQRT_2, 0.));
        assert_eq!(s.amplitude("u", "l").unwrap(), c(0., 0.));
    }

    #[test]
    fn tensor_rejects_ledgered_input() {
        let s = make_state(space(), "l").unwrap();
        let s = crate::optics::apply_element(&s, &OpticalElement::bomb("b", "l"), 0).unwrap();
        assert_eq!(
            tensor(&s, &make_state(space(), "u").unwrap()).unwrap_err(),
            IfmError::LedgerNotEmpty
        );
    }

    #[test]
    fn zero_phase_is_identity() {
        let s = tensor(&make_state(space(), "u").unwrap(), &make_state(space(), "l").unwrap()).unwrap();
        let out = apply_local(&s, Factor::A, &OpticalElement::phase_shift("p", "u", 0.0), 0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn local_splitter_matches_product() {
        let a = make_state(space(), "u").unwrap();
        let b = PureState::from_amplitudes(space(), vec![c(0.6, 0.), c(0., 0.8)]).unwrap();
        let bs = OpticalElement::beam_splitter("bs", "u", "l", 0.3);
        let lifted = apply_local(&tensor(&a, &b).unwrap(), Factor::A, &bs, 0).unwrap();
        let direct = tensor(&crate::optics::apply_element(&a, &bs, 0).unwrap(), &b).unwrap();
        for (x, y) in lifted.amplitudes().iter().zip(direct.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn absorber_on_b_ledgers_only_b_pairs() {
        // A in (u+l)/√2, B in (u+l)/√2; bomb on B's l removes (u,l) and (l,l)
        let sup = PureState::from_amplitudes(space(), vec![c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)])
            .unwrap();
        let s = tensor(&sup, &sup).unwrap();
        let out = apply_local(&s, Factor::B, &OpticalElement::bomb("bomb", "l"), 4).unwrap();
        assert_eq!(out.ledger().len(), 2);
        assert!(out.ledger().iter().all(|r| (r.measure - 0.25).abs() < 1e-15 && r.time_step == 4));
        assert_eq!(out.amplitude("u", "l").unwrap(), c(0., 0.));
        assert_eq!(out.amplitude("l", "l").unwrap(), c(0., 0.));
        assert!((out.amplitude("l", "u").unwrap().norm_sqr() - 0.25).abs() < 1e-15);
        assert!((out.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincidence_moves_only_the_pair() {
        let sup = PureState::from_amplitudes(space(), vec![c(FRAC_1_SQRT_2, 0.), c(0., FRAC_1_SQRT_2)])
            .unwrap();
        let s = tensor(&sup, &sup).unwrap();
        let out = coincidence_absorb(&s, ("l", "l"), 2).unwrap();
        assert!((out.explosion_measure() - 0.25).abs() < 1e-15);
        assert_eq!(out.amplitude("l", "l").unwrap(), c(0., 0.));
        assert_eq!(out.amplitude("u", "l").unwrap(), s.amplitude("u", "l").unwrap());
        let again = coincidence_absorb(&out, ("l", "l"), 2).unwrap();
        assert_eq!(again, out);
        assert!(coincidence_absorb(&s, ("x", "l"), 0).is_err());
    }

    #[test]
    fn nested_half_reflectivity() {
        let rep = nested_ifm(NestedConfig::default()).unwrap();
        assert!((rep.p_both_dark - 1.0 / 16.0).abs() < 1e-12);
        assert!((rep.joint.explosion_prob - 0.25).abs() < 1e-12);
        assert!((rep.joint.total() - 1.0).abs() < 1e-12);
        let cond = rep.conditional.unwrap();
        assert!((cond.object_in_working_area - 1.0).abs() < 1e-10);
        assert!((cond.photon_in_working_area - 1.0).abs() < 1e-10);
        assert!(cond.both_in_working_area.abs() < 1e-10);
    }

    #[test]
    fn uncoupled_particles_never_both_dark() {
        let rep = nested_ifm(NestedConfig {
            coupled: false,
            ..NestedConfig::default()
        })
        .unwrap();
        assert!(rep.p_both_dark < 1e-30);
        assert!(rep.conditional.is_none());
        assert_eq!(rep.joint.explosion_prob, 0.0);
    }

    #[test]
    fn nested_rejects_degenerate_reflectivity() {
        for r in [0.0, 1.0, -0.5] {
            assert!(nested_ifm(NestedConfig { reflectivity: r, coupled: true }).is_err());
        }
    }

    #[test]
    fn joint_csv() {
        let csv = nested_ifm(NestedConfig::default()).unwrap().joint.to_csv();
        assert!(csv.starts_with("photon,object,probability\n"));
        assert!(csv.contains("D2,D2,0.0625\n"));
        assert_eq!(csv.lines().count(), 7);
    }
}
