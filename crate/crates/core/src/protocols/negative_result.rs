use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;

use crate::amplitude::{ModeSpace, PureState, CONDITIONING_FLOOR};
use crate::error::{IfmError, Result};
use crate::optics::{apply_element, OpticalElement};

/// Conditions `state` on a detector covering `covered` seeing nothing.
///
/// Returns the updated state and the probability of the null result.
pub fn negative_result_update(state: &PureState, covered: &[&str]) -> Result<(PureState, f64)> {
    let distinct: HashSet<&str> = covered.iter().copied().collect();
    if distinct.is_empty() {
        return Err(IfmError::InvalidParameter("detector covers no modes".into()));
    }
    let space = state.space();
    for label in &distinct {
        space.index_of(label)?;
    }
    if distinct.len() == space.size() {
        return Err(IfmError::InvalidParameter(
            "detector covers every mode; a null result is impossible".into(),
        ));
    }
    let before = state.live_probability();
    if before <= CONDITIONING_FLOOR {
        return Err(IfmError::MeasureZero(before));
    }
    let mut absorbed = state.clone();
    for label in covered {
        absorbed = apply_element(&absorbed, &OpticalElement::bomb("detector", *label), 0)?;
    }
    let cond = absorbed.renormalize_live()?;
    Ok((cond.state, cond.probability / before))
}

/// Modes `sector0 .. sector{n-1}` for a discretized spherical wave.
pub fn sector_space(sectors: usize) -> Result<Arc<ModeSpace>> {
    Ok(Arc::new(ModeSpace::new((0..sectors).map(|k| format!("sector{k}")))?))
}

/// Spherical wave spread evenly over `sectors` angular sectors.
pub fn uniform_sectors(sectors: usize) -> Result<PureState> {
    let space = sector_space(sectors)?;
    let amp = Complex64::new(1.0 / (sectors as f64).sqrt(), 0.0);
    PureState::from_amplitudes(space, vec![amp; sectors])
}
