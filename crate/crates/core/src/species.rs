//! Ion species model and the ion-definition file format.
//!
//! A species file is TOML with three tables:
//!
//! ```toml
//! [species]
//! name = "43Ca+"
//! twice_I = 7
//! g_I = 2.0498e-4
//! charge_number = 1
//! mass_amu = 42.958766
//!
//! [[levels]]
//! label = "S1/2"
//! twice_J = 1
//! g_J = 2.0
//! A_MHz = -806.402071
//! B_MHz = 0.0
//!
//! [[transitions]]
//! lower = "S1/2"
//! upper = "D3/2"
//! frequency_THz = 409.2
//! ```
//!
//! Optional keys are `theta_au` and `alpha2J_au` on levels and
//! `delta_alpha0_au` on transitions. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angular::HalfInt;
use crate::error::{Error, Result};
use crate::units::{HZ_PER_MHZ, HZ_PER_THZ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct FineStructureLevel {
    pub label: String,
    pub j: HalfInt,
    pub g_j: f64,
    /// Magnetic-dipole hyperfine constant, Hz.
    pub hyperfine_a: f64,
    /// Electric-quadrupole hyperfine constant, Hz.
    pub hyperfine_b: f64,
    /// Quadrupole moment Θ(J), atomic units.
    pub quadrupole_moment: Option<f64>,
    /// Tensor polarizability α₂, atomic units.
    pub tensor_polarizability: Option<f64>,
}

impl FineStructureLevel {
    pub fn require_tensor_polarizability(&self) -> Result<f64> {
        self.tensor_polarizability.ok_or_else(|| Error::MissingConstant {
            level: self.label.clone(),
            field: "alpha2J_au",
        })
    }

    pub fn require_quadrupole_moment(&self) -> Result<f64> {
        self.quadrupole_moment.ok_or_else(|| Error::MissingConstant {
            level: self.label.clone(),
            field: "theta_au",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClockTransition {
    pub lower: LevelId,
    pub upper: LevelId,
    /// Optical clock frequency, Hz.
    pub frequency: f64,
    /// Differential scalar polarizability, atomic units.
    pub delta_alpha0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    pub nuclear_spin: HalfInt,
    /// Nuclear g-factor in Bohr magnetons, entering the Hamiltonian as +g_I μ_B B I_z.
    pub g_i: f64,
    pub charge_number: u32,
    pub mass_amu: f64,
    pub levels: Vec<FineStructureLevel>,
    pub transitions: Vec<ClockTransition>,
}

/// Zero-field hyperfine energy of level F, Hz.
///
/// The quadrupole term is dropped when I < 1 or J < 1.
pub fn hyperfine_energy(level: &FineStructureLevel, i: HalfInt, f: HalfInt) -> Result<f64> {
    let j = level.j;
    if !HalfInt::coupled_range(i, j).any(|x| x == f) {
        return Err(Error::InvalidF { i, j, f });
    }
    let (ii, jj) = (i.casimir(), j.casimir());
    let k = f.casimir() - ii - jj;
    let mut energy = 0.5 * level.hyperfine_a * k;
    if i.twice() >= 2 && j.twice() >= 2 {
        let (iv, jv) = (i.value(), j.value());
        energy += level.hyperfine_b * (1.5 * k * (k + 1.0) - 2.0 * ii * jj)
            / (4.0 * iv * (2.0 * iv - 1.0) * jv * (2.0 * jv - 1.0));
    }
    Ok(energy)
}

impl IonSpecies {
    pub fn level(&self, id: LevelId) -> &FineStructureLevel {
        &self.levels[id.0]
    }

    pub fn level_id(&self, label: &str) -> Result<LevelId> {
        self.levels
            .iter()
            .position(|l| l.label == label)
            .map(LevelId)
            .ok_or_else(|| Error::Input(format!("species {} has no level `{label}`", self.name)))
    }

    /// Allowed F values of a level, ascending.
    pub fn f_values(&self, id: LevelId) -> Vec<HalfInt> {
        HalfInt::coupled_range(self.nuclear_spin, self.level(id).j).collect()
    }

    pub fn hyperfine_energy(&self, id: LevelId, f: HalfInt) -> Result<f64> {
        hyperfine_energy(self.level(id), self.nuclear_spin, f)
    }

    /// Resolves a transition by index (`"0"`), by `"lower:upper"` labels or by
    /// upper-level label alone.
    pub fn transition(&self, selector: Option<&str>) -> Result<&ClockTransition> {
        let Some(sel) = selector else {
            return self
                .transitions
                .first()
                .ok_or_else(|| Error::Input(format!("species {} defines no transitions", self.name)));
        };
        if let Ok(idx) = sel.parse::<usize>() {
            return self
                .transitions
                .get(idx)
                .ok_or_else(|| Error::Input(format!("transition index {idx} out of range")));
        }
        let found = match sel.split_once(':') {
            Some((lo, up)) => {
                let (lo, up) = (self.level_id(lo.trim())?, self.level_id(up.trim())?);
                self.transitions.iter().find(|t| t.lower == lo && t.upper == up)
            }
            None => {
                let up = self.level_id(sel.trim())?;
                self.transitions.iter().find(|t| t.upper == up)
            }
        };
        found.ok_or_else(|| Error::Input(format!("no transition matches `{sel}`")))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: SpeciesDoc = toml::from_str(text).map_err(|e| Error::Schema {
            path: e
                .span()
                .map(|s| {
                    let before = &text[..s.start];
                    let line = before.matches('\n').count() + 1;
                    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
                    format!("line {line}, column {column}")
                })
                .unwrap_or_else(|| "document".into()),
            message: e.message().to_string(),
        })?;
        Self::from_doc(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Schema { path: p, message } => Error::Schema {
                path: format!("{}: {p}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_doc()).expect("species document is always serializable")
    }

    fn to_doc(&self) -> SpeciesDoc {
        SpeciesDoc {
            species: SpeciesHeader {
                name: self.name.clone(),
                twice_i: self.nuclear_spin.twice(),
                g_i: self.g_i,
                charge_number: i64::from(self.charge_number),
                mass_amu: self.mass_amu,
            },
            levels: self
                .levels
                .iter()
                .map(|l| LevelDoc {
                    label: l.label.clone(),
                    twice_j: l.j.twice(),
                    g_j: l.g_j,
                    a_mhz: l.hyperfine_a / HZ_PER_MHZ,
                    b_mhz: l.hyperfine_b / HZ_PER_MHZ,
                    theta_au: l.quadrupole_moment,
                    alpha2j_au: l.tensor_polarizability,
                })
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionDoc {
                    lower: self.level(t.lower).label.clone(),
                    upper: self.level(t.upper).label.clone(),
                    frequency_thz: t.frequency / HZ_PER_THZ,
                    delta_alpha0_au: t.delta_alpha0,
                })
                .collect(),
        }
    }

    fn from_doc(doc: SpeciesDoc) -> Result<Self> {
        let schema = |path: String, message: String| Error::Schema { path, message };
        let h = &doc.species;
        if h.twice_i < 0 {
            return Err(schema("species.twice_I".into(), "nuclear spin must be non-negative".into()));
        }
        if !h.g_i.is_finite() {
            return Err(schema("species.g_I".into(), "must be finite".into()));
        }
        if h.charge_number < 1 || h.charge_number > i64::from(u32::MAX) {
            return Err(schema("species.charge_number".into(), "must be a positive integer".into()));
        }
        if !(h.mass_amu.is_finite() && h.mass_amu > 0.0) {
            return Err(schema("species.mass_amu".into(), "must be positive".into()));
        }
        if doc.levels.len() < 2 {
            return Err(schema("levels".into(), "at least two levels are required".into()));
        }
        let nuclear_spin = HalfInt::from_twice(h.twice_i);

        let mut levels = Vec::with_capacity(doc.levels.len());
        for (k, l) in doc.levels.iter().enumerate() {
            let at = |field: &str| format!("levels[{k}] ({}).{field}", l.label);
            if l.label.trim().is_empty() {
                return Err(schema(format!("levels[{k}].label"), "must not be empty".into()));
            }
            if doc.levels[..k].iter().any(|o| o.label == l.label) {
                return Err(schema(at("label"), "duplicate level label".into()));
            }
            if l.twice_j < 0 {
                return Err(schema(at("twice_J"), "must be non-negative".into()));
            }
            for (name, v) in [("g_J", l.g_j), ("A_MHz", l.a_mhz), ("B_MHz", l.b_mhz)] {
                if !v.is_finite() {
                    return Err(schema(at(name), "must be finite".into()));
                }
            }
            for (name, v) in [("theta_au", l.theta_au), ("alpha2J_au", l.alpha2j_au)] {
                if v.is_some_and(|x| !x.is_finite()) {
                    return Err(schema(at(name), "must be finite".into()));
                }
            }
            if l.b_mhz != 0.0 && (l.twice_j < 2 || h.twice_i < 2) {
                return Err(schema(
                    at("B_MHz"),
                    "quadrupole hyperfine constant must be 0 when J < 1 or I < 1".into(),
                ));
            }
            levels.push(FineStructureLevel {
                label: l.label.clone(),
                j: HalfInt::from_twice(l.twice_j),
                g_j: l.g_j,
                hyperfine_a: l.a_mhz * HZ_PER_MHZ,
                hyperfine_b: l.b_mhz * HZ_PER_MHZ,
                quadrupole_moment: l.theta_au,
                tensor_polarizability: l.alpha2j_au,
            });
        }

        let find = |label: &str| levels.iter().position(|l| l.label == label).map(LevelId);
        let mut transitions = Vec::with_capacity(doc.transitions.len());
        for (k, t) in doc.transitions.iter().enumerate() {
            let at = |field: &str| format!("transitions[{k}].{field}");
            let lower = find(&t.lower)
                .ok_or_else(|| schema(at("lower"), format!("unknown level `{}`", t.lower)))?;
            let upper = find(&t.upper)
                .ok_or_else(|| schema(at("upper"), format!("unknown level `{}`", t.upper)))?;
            if lower == upper {
                return Err(schema(at("upper"), "lower and upper levels must differ".into()));
            }
            if !(t.frequency_thz.is_finite() && t.frequency_thz > 0.0) {
                return Err(schema(at("frequency_THz"), "must be positive".into()));
            }
            if t.delta_alpha0_au.is_some_and(|x| !x.is_finite()) {
                return Err(schema(at("delta_alpha0_au"), "must be finite".into()));
            }
            transitions.push(ClockTransition {
                lower,
                upper,
                frequency: t.frequency_thz * HZ_PER_THZ,
                delta_alpha0: t.delta_alpha0_au,
            });
        }

        Ok(IonSpecies {
            name: h.name.clone(),
            nuclear_spin,
            g_i: h.g_i,
            charge_number: h.charge_number as u32,
            mass_amu: h.mass_amu,
            levels,
            transitions,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesDoc {
    species: SpeciesHeader,
    levels: Vec<LevelDoc>,
    #[serde(default)]
    transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesHeader {
    name: String,
    #[serde(rename = "twice_I")]
    twice_i: i32,
    #[serde(rename = "g_I")]
    g_i: f64,
    charge_number: i64,
    mass_amu: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    label: String,
    #[serde(rename = "twice_J")]
    twice_j: i32,
    #[serde(rename = "g_J")]
    g_j: f64,
    #[serde(rename = "A_MHz")]
    a_mhz: f64,
    #[serde(rename = "B_MHz")]
    b_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_au: Option<f64>,
    #[serde(rename = "alpha2J_au", default, skip_serializing_if = "Option::is_none")]
    alpha2j_au: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    lower: String,
    upper: String,
    #[serde(rename = "frequency_THz")]
    frequency_thz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_alpha0_au: Option<f64>,
}
