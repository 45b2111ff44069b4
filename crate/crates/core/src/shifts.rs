//! Rank-2 tensor shift coefficient and the quadrupole, tensor-polarizability,
//! RF-geometry and crystal-broadening formulas built on it.

use nalgebra::DMatrix;

use crate::angular::{parity_sign, wigner3j, wigner6j, HalfInt};
use crate::error::{Error, Result};
use crate::species::{ClockTransition, IonSpecies, LevelId};
use crate::units::{
    polarizability_au_to_si, ATOMIC_MASS_UNIT, FINE_STRUCTURE, HBAR, PLANCK, SPEED_OF_LIGHT,
};
use crate::zeeman::{quadratic_form, ManifoldBasis};

/// Dimensionless rank-2 coefficient matrix of one fixed-m_F block.
///
/// Normalized so that the stretched state of the bare J level has coefficient 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank2Matrix {
    pub basis: ManifoldBasis,
    pub entries: DMatrix<f64>,
}

impl Rank2Matrix {
    /// ⟨v|H|v⟩ for coefficients over the basis.
    pub fn expectation(&self, v: &[f64]) -> f64 {
        quadratic_form(&self.entries, v)
    }

    pub fn diagonal(&self, f: HalfInt) -> Option<f64> {
        self.basis.index_of(f).map(|k| self.entries[(k, k)])
    }

    /// Smallest and largest eigenvalue.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        let eig = self.entries.clone().symmetric_eigenvalues();
        eig.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)))
    }
}

fn rank2_element(i: HalfInt, j: HalfInt, fp: HalfInt, f: HalfInt, m: HalfInt) -> f64 {
    let two = HalfInt::TWO;
    let reduced = wigner3j(j, two, j, -j, HalfInt::ZERO, j);
    parity_sign(j.twice() + i.twice() + m.twice())
        * (f64::from(fp.multiplicity()) * f64::from(f.multiplicity())).sqrt()
        * wigner6j(f, fp, two, j, j, i)
        / reduced
        * wigner3j(f, two, fp, -m, HalfInt::ZERO, m)
}

/// Rank-2 coefficient matrix of a block; undefined (error) for J < 1.
pub fn rank2_matrix(species: &IonSpecies, level: LevelId, m_f: HalfInt) -> Result<Rank2Matrix> {
    let lvl = species.level(level);
    if lvl.j.twice() < 2 {
        return Err(Error::RankUndefined { level: lvl.label.clone(), j: lvl.j });
    }
    let basis = ManifoldBasis::new(species, level, m_f)?;
    let n = basis.dim();
    let entries = DMatrix::from_fn(n, n, |r, c| {
        rank2_element(species.nuclear_spin, lvl.j, basis.f_list[r], basis.f_list[c], m_f)
    });
    Ok(Rank2Matrix { basis, entries })
}

/// Orientation of the field gradient relative to the quantization axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldGeometry {
    /// Euler angle α, rad.
    pub alpha: f64,
    /// Euler angle β, rad, within [0, π].
    pub beta: f64,
    /// Gradient strength times quadrupole moment, as a frequency (Hz).
    pub gradient_a: f64,
    /// Gradient asymmetry ε.
    pub epsilon: f64,
}

impl FieldGeometry {
    pub fn new(alpha: f64, beta: f64, gradient_a: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&beta) {
            return Err(Error::Input(format!("beta = {beta} rad is outside [0, pi]")));
        }
        if ![alpha, gradient_a, epsilon].iter().all(|x| x.is_finite()) {
            return Err(Error::Input("geometry parameters must be finite".into()));
        }
        Ok(FieldGeometry { alpha, beta, gradient_a, epsilon })
    }

    /// (3cos²β − 1) − ε sin²β (cos²α − sin²α)
    pub fn quadrupole_factor(&self) -> f64 {
        let (cb, sb) = (self.beta.cos(), self.beta.sin());
        let (ca, sa) = (self.alpha.cos(), self.alpha.sin());
        (3.0 * cb * cb - 1.0) - self.epsilon * sb * sb * (ca * ca - sa * sa)
    }
}

/// Time-averaged quadratic components of a purely transverse RF field, V²/m².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfField {
    pub ex2: f64,
    pub ey2: f64,
    pub exey: f64,
}

impl RfField {
    pub fn new(ex2: f64, ey2: f64, exey: f64) -> Result<Self> {
        if !(ex2 >= 0.0 && ey2 >= 0.0 && exey.is_finite() && ex2.is_finite() && ey2.is_finite()) {
            return Err(Error::Input("RF field averages must be finite with <Ex^2>, <Ey^2> >= 0".into()));
        }
        if exey.abs() > (ex2 * ey2).sqrt() * (1.0 + 1e-12) {
            return Err(Error::Input("|<Ex Ey>| exceeds sqrt(<Ex^2><Ey^2>)".into()));
        }
        Ok(RfField { ex2, ey2, exey })
    }

    pub fn magnitude2(&self) -> f64 {
        self.ex2 + self.ey2
    }
}

/// Shift of a level from its tensor polarizability, Hz.
///
/// `anisotropy` is ⟨3E_z² − |E|²⟩ in V²/m².
pub fn tensor_polarizability_shift(c2: f64, alpha2j_au: f64, anisotropy: f64) -> f64 {
    -0.25 * c2 * polarizability_au_to_si(alpha2j_au) * anisotropy / PLANCK
}

/// Quadrupole shift, Hz.
pub fn quadrupole_shift(c2: f64, geometry: &FieldGeometry) -> f64 {
    c2 * geometry.gradient_a * geometry.quadrupole_factor()
}

/// The two bracketed contributions of a transverse RF field and the resulting
/// fractional shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfShift {
    /// −¼(3cos²β − 1)|E|², V²/m².
    pub isotropic_term: f64,
    /// ¾ sin²β (cos2α (E_x² − E_y²) − 2 sin2α E_xE_y), V²/m².
    pub anisotropic_term: f64,
    /// δν/ν.
    pub fractional: f64,
}

pub fn rf_tensor_shift(
    c2: f64,
    alpha2j_au: f64,
    rf: &RfField,
    geometry: &FieldGeometry,
    clock_frequency: f64,
) -> RfShift {
    let (cb, sb) = (geometry.beta.cos(), geometry.beta.sin());
    let two_alpha = 2.0 * geometry.alpha;
    let isotropic_term = -0.25 * (3.0 * cb * cb - 1.0) * rf.magnitude2();
    let anisotropic_term =
        0.75 * sb * sb * (two_alpha.cos() * (rf.ex2 - rf.ey2) - 2.0 * two_alpha.sin() * rf.exey);
    let prefactor = -c2 * polarizability_au_to_si(alpha2j_au) / (4.0 * PLANCK * clock_frequency);
    RfShift {
        isotropic_term,
        anisotropic_term,
        fractional: prefactor * (isotropic_term + anisotropic_term),
    }
}

/// Inputs to the crystal-size broadening estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BroadeningParams {
    /// Axial trap frequency, rad/s.
    pub omega_z: f64,
    pub n_ions: u64,
    pub charge_number: u32,
    pub mass_amu: f64,
    /// Clock frequency, Hz.
    pub clock_frequency: f64,
    /// Atomic units.
    pub delta_alpha0: f64,
    /// Atomic units.
    pub alpha2j: f64,
}

impl BroadeningParams {
    /// Resolves species and transition constants; missing ones are named errors.
    pub fn from_species(
        species: &IonSpecies,
        transition: &ClockTransition,
        omega_z: f64,
        n_ions: u64,
    ) -> Result<Self> {
        if !(omega_z.is_finite() && omega_z > 0.0) {
            return Err(Error::Input("omega_z must be positive".into()));
        }
        if n_ions == 0 {
            return Err(Error::Input("ion number must be at least 1".into()));
        }
        let upper = species.level(transition.upper);
        let delta_alpha0 = transition.delta_alpha0.ok_or_else(|| Error::MissingConstant {
            level: format!("{}-{}", species.level(transition.lower).label, upper.label),
            field: "delta_alpha0_au",
        })?;
        Ok(BroadeningParams {
            omega_z,
            n_ions,
            charge_number: species.charge_number,
            mass_amu: species.mass_amu,
            clock_frequency: transition.frequency,
            delta_alpha0,
            alpha2j: upper.require_tensor_polarizability()?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Broadening {
    /// Δf, Hz.
    pub width: f64,
    /// 1/Δf, s; infinite when the width vanishes.
    pub max_ramsey_time: f64,
}

/// Number-dependent broadening of a spherical crystal.
///
/// The width uses |C₂|, so the sign of the coefficient does not matter.
pub fn broadening(params: &BroadeningParams, c2: f64) -> Result<Broadening> {
    if params.delta_alpha0 == 0.0 {
        return Err(Error::Input(
            "delta_alpha0 = 0: no magic RF frequency exists".into(),
        ));
    }
    let z = f64::from(params.charge_number);
    let mass = params.mass_amu * ATOMIC_MASS_UNIT;
    let confinement =
        (z * z * FINE_STRUCTURE * HBAR * params.omega_z / (mass * SPEED_OF_LIGHT * SPEED_OF_LIGHT)).powf(2.0 / 3.0);
    let width = c2.abs() / 4.0
        * (params.alpha2j / params.delta_alpha0).abs()
        * confinement
        * params.clock_frequency
        * (params.n_ions as f64).powf(2.0 / 3.0);
    Ok(Broadening { width, max_ramsey_time: 1.0 / width })
}
