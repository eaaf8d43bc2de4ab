//! Single Fabry–Perot cavity between two identical mirrors, driven on
//! resonance by a flat pulse lasting `M` round trips.
//!
//! Time is binned in round trips. In bin `n` the input amplitude `x_n`
//! (`1/√M` for `n < M`, zero afterwards) meets the left-moving intracavity
//! amplitude `b_n` at the entrance mirror:
//!
//! ```text
//! reflected   y_n = i r x_n + τ b_n
//! injected    a_n = τ x_n + i r b_n
//! transmitted τ a_n                      (empty cavity)
//! returning   b_(n+1) = −i r a_n         (round-trip phase −1 on resonance)
//! ```
//!
//! with `τ = √(1 − r²)`. An object inside absorbs `a_n` outright. Each bin is
//! a distinct time mode, so output probabilities add bin by bin.

use num_complex::Complex64;

use crate::amplitude::CONSERVATION_TOL;
use crate::error::{IfmError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    /// Amplitude reflection coefficient of each mirror.
    pub mirror_reflectivity: f64,
    /// Pulse length in round trips.
    pub round_trips: usize,
    pub object_present: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityOutcome {
    pub p_reflect: f64,
    pub p_transmit: f64,
    pub p_absorb: f64,
    /// Time bins simulated until the cavity had drained.
    pub bins: usize,
}

impl CavityOutcome {
    pub fn total(&self) -> f64 {
        self.p_reflect + self.p_transmit + self.p_absorb
    }
}

/// Intracavity probability below which the cavity counts as empty.
const DRAINED: f64 = 1e-34;

pub fn paul_pavicic(cfg: &CavityConfig) -> Result<CavityOutcome> {
    let r = cfg.mirror_reflectivity;
    if !(0.0..1.0).contains(&r) {
        return Err(IfmError::InvalidParameter(format!(
            "mirror reflectivity {r} outside [0, 1)"
        )));
    }
    if cfg.round_trips == 0 {
        return Err(IfmError::InvalidParameter("round trips must be >= 1".into()));
    }
    let m = cfg.round_trips;
    let tau = (1.0 - r * r).sqrt();
    let ir = Complex64::new(0.0, r);
    let pulse = Complex64::new(1.0 / (m as f64).sqrt(), 0.0);

    let (mut p_reflect, mut p_transmit, mut p_absorb) = (0.0, 0.0, 0.0);
    let mut back = Complex64::new(0.0, 0.0);
    let mut n = 0;
    loop {
        let x = if n < m { pulse } else { Complex64::new(0.0, 0.0) };
        p_reflect += (ir * x + back * tau).norm_sqr();
        let inside = x * tau + ir * back;
        if cfg.object_present {
            p_absorb += inside.norm_sqr();
            back = Complex64::new(0.0, 0.0);
        } else {
            p_transmit += (inside * tau).norm_sqr();
            back = -ir * inside;
        }
        n += 1;
        if n >= m && back.norm_sqr() < DRAINED {
            break;
        }
    }
    let out = CavityOutcome {
        p_reflect,
        p_transmit,
        p_absorb,
        bins: n,
    };
    debug_assert!((out.total() - 1.0).abs() < CONSERVATION_TOL * 10.0);
    Ok(out)
}
