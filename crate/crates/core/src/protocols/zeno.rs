//! Two coupled cavities: each cycle rotates the photon from the left cavity
//! towards the right one by `theta`, then an object in the right cavity (if
//! any) takes its share. With `theta = π/(2N)` the empty system transfers the
//! photon completely after `N` cycles, while an opaque object pins it in the
//! left cavity with probability `cos^(2N)(π/(2N))`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;

use super::EfficiencyReport;
use crate::amplitude::{make_state, ModeSpace};
use crate::error::{IfmError, Result};
use crate::optics::{run_with, Circuit, OpticalElement};

pub const LEFT: &str = "left";
pub const RIGHT: &str = "right";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoConfig {
    pub cycles: usize,
    /// Coupling angle per cycle, radians.
    pub theta: f64,
    /// Transmission amplitude of the object in the right cavity.
    pub object: Option<Complex64>,
}

impl ZenoConfig {
    /// Empty cavities, `theta = π/(2N)`.
    pub fn new(cycles: usize) -> Self {
        Self {
            cycles,
            theta: FRAC_PI_2 / cycles.max(1) as f64,
            object: None,
        }
    }

    /// Opaque object in the right cavity.
    pub fn blocked(cycles: usize) -> Self {
        Self::new(cycles).with_object(Complex64::new(0.0, 0.0))
    }

    pub fn with_object(mut self, t: Complex64) -> Self {
        self.object = Some(t);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.cycles == 0 {
            return Err(IfmError::InvalidParameter("Zeno scheme needs N >= 1".into()));
        }
        if !(self.theta > 0.0 && self.theta <= FRAC_PI_2) {
            return Err(IfmError::InvalidParameter(format!(
                "coupling angle {} outside (0, π/2]",
                self.theta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleAmplitudes {
    pub cycle: usize,
    pub left: Complex64,
    pub right: Complex64,
    /// Absorbed probability accumulated up to and including this cycle.
    pub absorbed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZenoRun {
    pub config: ZenoConfig,
    /// Success is finding the photon in the left cavity at the end.
    pub report: EfficiencyReport,
    pub p_left: f64,
    pub p_right: f64,
    pub trace: Vec<CycleAmplitudes>,
}

fn cavity_space() -> Arc<ModeSpace> {
    Arc::new(ModeSpace::new([LEFT, RIGHT]).expect("static labels"))
}

/// Coupling step then object step, repeated `cycles` times.
pub fn zeno_circuit(cfg: &ZenoConfig) -> Result<Circuit> {
    cfg.validate()?;
    let coupling = cfg.theta.sin().powi(2);
    let mut steps = Vec::with_capacity(2 * cfg.cycles);
    for k in 0..cfg.cycles {
        steps.push(vec![OpticalElement::beam_splitter(
            format!("coupler{k}"),
            LEFT,
            RIGHT,
            coupling,
        )]);
        if let Some(t) = cfg.object {
            steps.push(vec![OpticalElement::absorber("object", RIGHT, t)]);
        }
    }
    Circuit::new(cavity_space(), steps)
}

pub fn zeno_ifm(cfg: &ZenoConfig) -> Result<ZenoRun> {
    let circuit = zeno_circuit(cfg)?;
    let input = make_state(Arc::clone(circuit.space()), LEFT)?;
    let per_cycle = if cfg.object.is_some() { 2 } else { 1 };
    let mut trace = Vec::with_capacity(cfg.cycles);
    let fin = run_with(&circuit, &input, |k, s| {
        if (k + 1) % per_cycle == 0 {
            trace.push(CycleAmplitudes {
                cycle: (k + 1) / per_cycle,
                left: s.amplitudes()[0],
                right: s.amplitudes()[1],
                absorbed: s.explosion_measure(),
            });
        }
    })?;
    let p_left = fin.probability(LEFT)?;
    let p_right = fin.probability(RIGHT)?;
    Ok(ZenoRun {
        config: *cfg,
        report: EfficiencyReport::new(p_left, fin.explosion_measure(), p_right)?,
        p_left,
        p_right,
        trace,
    })
}

/// Smallest cycle count whose opaque-object explosion probability is below
/// `target`, found by doubling then bisection (explosion falls monotonically
/// with N).
pub fn cycles_for_explosion_below(target: f64) -> Result<usize> {
    if !(target > 0.0 && target < 1.0) {
        return Err(IfmError::InvalidParameter(format!(
            "target {target} must lie in (0, 1)"
        )));
    }
    let explosion = |n: usize| zeno_ifm(&ZenoConfig::blocked(n)).map(|r| r.report.p_explosion);
    let mut hi = 1;
    while explosion(hi)? >= target {
        hi *= 2;
        if hi > 1 << 24 {
            return Err(IfmError::InvalidParameter(format!("target {target} too small")));
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if explosion(mid)? < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
