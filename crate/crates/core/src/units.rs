//! Physical constants and the atomic-unit conversion table.
//!
//! Internal units: energies as frequencies in Hz (E/h), fields in tesla,
//! electric fields in V/m.

/// Bohr magneton over Planck's constant, Hz/T.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 13.996_244_936_1e9;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Electron-to-proton mass ratio (nuclear magneton over Bohr magneton).
pub const ELECTRON_PROTON_MASS_RATIO: f64 = 5.446_170_214_87e-4;

/// One atomic unit of polarizability, C² m² / J.
pub const POLARIZABILITY_AU: f64 = 1.648_777_274_36e-41;

/// One atomic unit of quadrupole moment (e a0²), C m².
pub const QUADRUPOLE_MOMENT_AU: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS * BOHR_RADIUS;

pub const HZ_PER_MHZ: f64 = 1e6;
pub const HZ_PER_THZ: f64 = 1e12;
pub const TESLA_PER_MT: f64 = 1e-3;

/// Hz/T² to kHz/mT².
pub const KHZ_PER_MT2_PER_HZ_PER_T2: f64 = 1e-3 * 1e-6;

pub fn polarizability_au_to_si(alpha_au: f64) -> f64 {
    alpha_au * POLARIZABILITY_AU
}

/// A quadrupole moment (atomic units) in a field gradient (V/m²) as a frequency, Hz.
pub fn quadrupole_product_hz(theta_au: f64, gradient_v_per_m2: f64) -> f64 {
    theta_au * QUADRUPOLE_MOMENT_AU * gradient_v_per_m2 / PLANCK
}

pub fn mt_to_tesla(b_mt: f64) -> f64 {
    b_mt * TESLA_PER_MT
}

pub fn tesla_to_mt(b_tesla: f64) -> f64 {
    b_tesla / TESLA_PER_MT
}

/// Nuclear g-factor in the Bohr-magneton convention of the Zeeman Hamiltonian
/// (nuclear term +g_I μ_B B I_z) from a magnetic moment in nuclear magnetons.
pub fn g_i_from_moment(moment_nm: f64, nuclear_spin: f64) -> f64 {
    -moment_nm * ELECTRON_PROTON_MASS_RATIO / nuclear_spin
}
