//! Single-excitation states over a discrete set of optical modes.
//!
//! A [`PureState`] holds one complex amplitude per live mode together with an
//! append-only ledger of branches that were terminated by absorbers. The sum
//! of live probability and ledger measure is conserved by every element in
//! the crate, so "explosion" probabilities are read straight off the ledger
//! instead of being inferred from a loss of norm.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{IfmError, Result};

/// Tolerance used for probability-conservation checks.
pub const CONSERVATION_TOL: f64 = 1e-12;

/// Tolerance used for derived probabilities (closed forms, cross-checks).
pub const ANALYTIC_TOL: f64 = 1e-9;

/// Probabilities below this are treated as zero when conditioning.
pub const CONDITIONING_FLOOR: f64 = 1e-15;

/// An ordered set of distinct mode labels.
#[derive(Clone, PartialEq, Eq)]
pub struct ModeSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl ModeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(IfmError::EmptyModeSpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(IfmError::DuplicateMode(label.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| IfmError::UnknownMode(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }
}

impl fmt::Debug for ModeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ModeSpace").field(&self.labels).finish()
    }
}

/// A terminated branch: amplitude removed from the live state by an absorber.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionRecord {
    pub element_id: String,
    pub time_step: usize,
    pub amplitude: Complex64,
    pub measure: f64,
}

impl AbsorptionRecord {
    pub fn new(element_id: impl Into<String>, time_step: usize, amplitude: Complex64) -> Self {
        Self {
            element_id: element_id.into(),
            time_step,
            amplitude,
            measure: amplitude.norm_sqr(),
        }
    }
}

/// Live amplitudes plus the ledger of absorbed branches.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: Arc<ModeSpace>,
    amplitudes: Vec<Complex64>,
    ledger: Vec<AbsorptionRecord>,
}

/// Result of conditioning a state on "nothing was absorbed".
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub state: PureState,
    /// Probability of the event conditioned on (the live weight before scaling).
    pub probability: f64,
}

impl Conditioned {
    /// Factor the live amplitudes were multiplied by.
    pub fn scale(&self) -> f64 {
        1.0 / self.probability.sqrt()
    }
}

/// Photon prepared in a single mode.
pub fn make_state(space: Arc<ModeSpace>, occupied: &str) -> Result<PureState> {
    let idx = space.index_of(occupied)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.size()];
    amplitudes[idx] = Complex64::new(1.0, 0.0);
    Ok(PureState {
        space,
        amplitudes,
        ledger: Vec::new(),
    })
}

impl PureState {
    /// Builds a state from raw amplitudes. The caller is responsible for the
    /// normalization; finiteness and length are checked.
    pub fn from_amplitudes(space: Arc<ModeSpace>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.size() {
            return Err(IfmError::SpaceMismatch(format!(
                "{} amplitudes for {} modes",
                amplitudes.len(),
                space.size()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(IfmError::InvalidParameter(
                "amplitudes must be finite".into(),
            ));
        }
        Ok(Self {
            space,
            amplitudes,
            ledger: Vec::new(),
        })
    }

    /// Equal-weight superposition over `occupied`, all phases zero.
    pub fn uniform(space: Arc<ModeSpace>, occupied: &[&str]) -> Result<Self> {
        if occupied.is_empty() {
            return Err(IfmError::InvalidParameter(
                "uniform state needs at least one mode".into(),
            ));
        }
        let weight = 1.0 / (occupied.len() as f64).sqrt();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.size()];
        for label in occupied {
            amplitudes[space.index_of(label)?] = Complex64::new(weight, 0.0);
        }
        Ok(Self {
            space,
            amplitudes,
            ledger: Vec::new(),
        })
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: &str) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.index_of(label)?])
    }

    pub fn probability(&self, label: &str) -> Result<f64> {
        self.amplitude(label).map(|a| a.norm_sqr())
    }

    pub fn ledger(&self) -> &[AbsorptionRecord] {
        &self.ledger
    }

    pub fn live_probability(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.live_probability() + self.explosion_measure()
    }

    /// Summed measure of every absorbed branch.
    pub fn explosion_measure(&self) -> f64 {
        self.ledger.iter().map(|r| r.measure).sum()
    }

    /// Drops the ledger and rescales the live part to unit norm.
    pub fn renormalize_live(&self) -> Result<Conditioned> {
        let live = self.live_probability();
        if live <= CONDITIONING_FLOOR {
            return Err(IfmError::MeasureZero(live));
        }
        let scale = 1.0 / live.sqrt();
        let amplitudes = self.amplitudes.iter().map(|a| a * scale).collect();
        Ok(Conditioned {
            state: PureState {
                space: Arc::clone(&self.space),
                amplitudes,
                ledger: Vec::new(),
            },
            probability: live,
        })
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub(crate) fn push_record(&mut self, record: AbsorptionRecord) {
        self.ledger.push(record);
    }
}

/// Free-function form of [`PureState::total_probability`].
pub fn total_probability(state: &PureState) -> f64 {
    state.total_probability()
}

/// Free-function form of [`PureState::explosion_measure`].
pub fn explosion_measure(state: &PureState) -> f64 {
    state.explosion_measure()
}

/// Free-function form of [`PureState::renormalize_live`].
pub fn renormalize_live(state: &PureState) -> Result<Conditioned> {
    state.renormalize_live()
}
