//! Named end-to-end protocols and their figures of merit.

mod cavity;
mod dicke;
mod ev;
mod irradiation;
mod negative_result;
mod zeno;

pub use cavity::{paul_pavicic, CavityConfig, CavityOutcome};
pub use dicke::{dicke_energy_shift, half_well_overlaps, DickeShift};
pub use ev::{
    efficiency_frontier, ev_iterated, ev_iterated_monte_carlo, ev_report, ev_single_shot, Frontier,
    MonteCarloEstimate,
};
pub use irradiation::{irradiation_metric, IrradiationProtocol};
pub use negative_result::{negative_result_update, sector_space, uniform_sectors};
pub use zeno::{
    cycles_for_explosion_below, zeno_circuit, zeno_ifm, CycleAmplitudes, ZenoConfig, ZenoRun, LEFT,
    RIGHT,
};

use crate::amplitude::CONSERVATION_TOL;
use crate::error::{IfmError, Result};

/// Outcome split of one protocol run.
///
/// A run either detects the object without absorption (`p_success`),
/// absorbs the photon (`p_explosion`), or ends in an outcome that says
/// nothing about the object (`p_inconclusive`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    pub p_success: f64,
    pub p_explosion: f64,
    pub p_inconclusive: f64,
}

impl EfficiencyReport {
    pub fn new(p_success: f64, p_explosion: f64, p_inconclusive: f64) -> Result<Self> {
        let parts = [p_success, p_explosion, p_inconclusive];
        if parts.iter().any(|p| !p.is_finite() || *p < -CONSERVATION_TOL) {
            return Err(IfmError::InvalidParameter(format!(
                "outcome probabilities must be non-negative, got {parts:?}"
            )));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > CONSERVATION_TOL {
            return Err(IfmError::InvalidParameter(format!(
                "outcome probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            p_success: p_success.max(0.0),
            p_explosion: p_explosion.max(0.0),
            p_inconclusive: p_inconclusive.max(0.0),
        })
    }

    /// `p_success / (p_success + p_explosion)`; `None` when no run is
    /// conclusive.
    pub fn efficiency(&self) -> Option<f64> {
        let conclusive = self.p_success + self.p_explosion;
        (conclusive > CONSERVATION_TOL).then(|| self.p_success / conclusive)
    }

    pub fn total(&self) -> f64 {
        self.p_success + self.p_explosion + self.p_inconclusive
    }
}
