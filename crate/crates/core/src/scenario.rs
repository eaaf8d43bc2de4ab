//! TOML scenario files.
//!
//! ```toml
//! name = "bomb test"
//! modes = ["upper", "lower", "d1", "d2"]
//! input = "upper"
//! postselect = "D2"            # optional, used by trace maps
//! steps = [
//!   [{ kind = "beam_splitter", id = "bs1", a = "upper", b = "lower", reflectivity = 0.5 }],
//!   [{ kind = "mirror", id = "m1", mode = "upper" }, { kind = "mirror", id = "m2", mode = "lower" }],
//!   [{ kind = "absorber", id = "bomb", mode = "lower", transmission = 0.0 }],
//!   [{ kind = "phase_shift", id = "p", mode = "upper", phase = 0.0 }],
//!   [{ kind = "detectors", id = "det", map = [["D1", "d1"], ["D2", "d2"]] }],
//! ]
//! ```
//!
//! `transmission` is either a real number or a `[re, im]` pair. A second
//! particle goes in a `[partner]` table with its own `modes`, `input` and
//! `steps`; `[[overlap]]` entries (`step`, `a`, `b`) declare where the two
//! particles annihilate in coincidence.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{make_state, ModeSpace, PureState};
use crate::composite::{tensor, CompositeCircuit, CompositeState, Overlap};
use crate::error::{IfmError, Result};
use crate::optics::{Circuit, DetectorSet, ElementKind, OpticalElement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ComplexDoc {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Complex64> for ComplexDoc {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            ComplexDoc::Real(c.re)
        } else {
            ComplexDoc::Pair([c.re, c.im])
        }
    }
}

impl From<ComplexDoc> for Complex64 {
    fn from(d: ComplexDoc) -> Self {
        match d {
            ComplexDoc::Real(re) => Complex64::new(re, 0.0),
            ComplexDoc::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ElementDoc {
    BeamSplitter {
        id: String,
        a: String,
        b: String,
        reflectivity: f64,
    },
    Mirror {
        id: String,
        mode: String,
    },
    PhaseShift {
        id: String,
        mode: String,
        phase: f64,
    },
    Absorber {
        id: String,
        mode: String,
        transmission: ComplexDoc,
    },
    Detectors {
        id: String,
        map: Vec<[String; 2]>,
    },
}

impl From<&OpticalElement> for ElementDoc {
    fn from(el: &OpticalElement) -> Self {
        let id = el.id.clone();
        match &el.kind {
            ElementKind::BeamSplitter { a, b, reflectivity } => ElementDoc::BeamSplitter {
                id,
                a: a.clone(),
                b: b.clone(),
                reflectivity: *reflectivity,
            },
            ElementKind::Mirror { mode } => ElementDoc::Mirror {
                id,
                mode: mode.clone(),
            },
            ElementKind::PhaseShift { mode, phase } => ElementDoc::PhaseShift {
                id,
                mode: mode.clone(),
                phase: *phase,
            },
            ElementKind::Absorber { mode, transmission } => ElementDoc::Absorber {
                id,
                mode: mode.clone(),
                transmission: (*transmission).into(),
            },
            ElementKind::Detectors(set) => ElementDoc::Detectors {
                id,
                map: set
                    .iter()
                    .map(|(n, m)| [n.to_string(), m.to_string()])
                    .collect(),
            },
        }
    }
}

impl TryFrom<ElementDoc> for OpticalElement {
    type Error = IfmError;

    fn try_from(doc: ElementDoc) -> Result<Self> {
        Ok(match doc {
            ElementDoc::BeamSplitter {
                id,
                a,
                b,
                reflectivity,
            } => OpticalElement::beam_splitter(id, a, b, reflectivity),
            ElementDoc::Mirror { id, mode } => OpticalElement::mirror(id, mode),
            ElementDoc::PhaseShift { id, mode, phase } => OpticalElement::phase_shift(id, mode, phase),
            ElementDoc::Absorber {
                id,
                mode,
                transmission,
            } => OpticalElement::absorber(id, mode, transmission.into()),
            ElementDoc::Detectors { id, map } => {
                OpticalElement::detectors(id, DetectorSet::new(map.into_iter().map(|[n, m]| (n, m)))?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleDoc {
    modes: Vec<String>,
    input: String,
    steps: Vec<Vec<ElementDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverlapDoc {
    step: usize,
    a: String,
    b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    modes: Vec<String>,
    input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    postselect: Option<String>,
    steps: Vec<Vec<ElementDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partner: Option<ParticleDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    overlap: Vec<OverlapDoc>,
}

/// A single-particle circuit with its input port.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub circuit: Circuit,
    pub input: String,
}

impl Particle {
    pub fn input_state(&self) -> PureState {
        make_state(Arc::clone(self.circuit.space()), &self.input).expect("validated on load")
    }

    fn from_doc(modes: Vec<String>, input: String, steps: Vec<Vec<ElementDoc>>) -> Result<Self> {
        let space = Arc::new(ModeSpace::new(modes)?);
        space.index_of(&input)?;
        let steps = steps
            .into_iter()
            .map(|step| step.into_iter().map(OpticalElement::try_from).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(Self {
            circuit: Circuit::new(space, steps)?,
            input,
        })
    }

    fn to_doc_parts(&self) -> (Vec<String>, String, Vec<Vec<ElementDoc>>) {
        (
            self.circuit.space().labels().to_vec(),
            self.input.clone(),
            self.circuit
                .steps()
                .iter()
                .map(|s| s.iter().map(ElementDoc::from).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub photon: Particle,
    pub postselect: Option<String>,
    pub partner: Option<Particle>,
    pub overlaps: Vec<Overlap>,
}

impl Scenario {
    pub fn from_circuit(circuit: Circuit, input: &str) -> Result<Self> {
        circuit.space().index_of(input)?;
        Ok(Self {
            name: None,
            photon: Particle {
                circuit,
                input: input.to_string(),
            },
            postselect: None,
            partner: None,
            overlaps: Vec::new(),
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: ScenarioDoc = toml::from_str(text).map_err(|e| IfmError::Scenario(e.to_string()))?;
        let photon = Particle::from_doc(doc.modes, doc.input, doc.steps)?;
        let partner = doc
            .partner
            .map(|p| Particle::from_doc(p.modes, p.input, p.steps))
            .transpose()?;
        if partner.is_none() && !doc.overlap.is_empty() {
            return Err(IfmError::Scenario("overlap declared without a partner".into()));
        }
        let overlaps = doc
            .overlap
            .into_iter()
            .map(|o| Overlap {
                step: o.step,
                mode_a: o.a,
                mode_b: o.b,
            })
            .collect();
        let scenario = Self {
            name: doc.name,
            photon,
            postselect: doc.postselect,
            partner,
            overlaps,
        };
        if let Some(det) = &scenario.postselect {
            scenario
                .photon
                .circuit
                .detectors()
                .ok_or_else(|| IfmError::UnknownDetector(det.clone()))?
                .mode_of(det)?;
        }
        // validates overlap modes and steps
        scenario.composite()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        let (modes, input, steps) = self.photon.to_doc_parts();
        let doc = ScenarioDoc {
            name: self.name.clone(),
            modes,
            input,
            postselect: self.postselect.clone(),
            steps,
            partner: self.partner.as_ref().map(|p| {
                let (modes, input, steps) = p.to_doc_parts();
                ParticleDoc { modes, input, steps }
            }),
            overlap: self
                .overlaps
                .iter()
                .map(|o| OverlapDoc {
                    step: o.step,
                    a: o.mode_a.clone(),
                    b: o.mode_b.clone(),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("scenario documents always serialize")
    }

    /// Joint circuit and product input when a partner particle is declared.
    pub fn composite(&self) -> Result<Option<(CompositeCircuit, CompositeState)>> {
        let Some(partner) = &self.partner else {
            return Ok(None);
        };
        let circuit =
            CompositeCircuit::interleave(&self.photon.circuit, &partner.circuit, &self.overlaps)?;
        let input = tensor(&self.photon.input_state(), &partner.input_state())?;
        Ok(Some((circuit, input)))
    }
}
