#![allow(dead_code)]

use clockshift_core::{HalfInt, IonSpecies, LevelId};
use nalgebra::{DMatrix, SymmetricEigen};

pub const BOHR: f64 = 13.996_244_936_1e9;

pub fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

pub fn shipped(name: &str) -> IonSpecies {
    let path = format!("{}/../../species/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    IonSpecies::load(path).unwrap()
}

pub const SHIPPED: [&str; 6] = ["43Ca+", "87Sr+", "137Ba+", "175Lu2+", "175Lu+", "176Lu+"];

/// The same Hamiltonian written in the product basis |m_I, m_J⟩ with
/// angular-momentum ladder algebra; independent of any 3j or 6j symbol.
pub struct Uncoupled {
    pub hamiltonian: DMatrix<f64>,
    /// (3J_z² − J(J+1)) / (J(2J−1)) on the diagonal, zero for J < 1.
    pub tensor: DMatrix<f64>,
}

fn ladder(j: f64, m: f64, up: bool) -> f64 {
    let m2 = if up { m + 1.0 } else { m - 1.0 };
    if m2.abs() > j + 1e-9 {
        return 0.0;
    }
    (j * (j + 1.0) - m * m2).sqrt()
}

pub fn uncoupled(species: &IonSpecies, level: LevelId, m_f: HalfInt, b: f64) -> Uncoupled {
    let lvl = species.level(level);
    let (i, j) = (species.nuclear_spin.value(), lvl.j.value());
    let mut states = Vec::new();
    for twice_mi in (-species.nuclear_spin.twice()..=species.nuclear_spin.twice()).step_by(2) {
        let twice_mj = m_f.twice() - twice_mi;
        if twice_mj.abs() <= lvl.j.twice() {
            states.push((twice_mi as f64 / 2.0, twice_mj as f64 / 2.0));
        }
    }
    let n = states.len();
    let mut idotj = DMatrix::zeros(n, n);
    for (r, &(mi_r, mj_r)) in states.iter().enumerate() {
        for (c, &(mi_c, mj_c)) in states.iter().enumerate() {
            let v = if r == c {
                mi_c * mj_c
            } else if (mi_r - mi_c - 1.0).abs() < 1e-9 && (mj_r - mj_c + 1.0).abs() < 1e-9 {
                0.5 * ladder(i, mi_c, true) * ladder(j, mj_c, false)
            } else if (mi_r - mi_c + 1.0).abs() < 1e-9 && (mj_r - mj_c - 1.0).abs() < 1e-9 {
                0.5 * ladder(i, mi_c, false) * ladder(j, mj_c, true)
            } else {
                0.0
            };
            idotj[(r, c)] = v;
        }
    }
    let ii = i * (i + 1.0);
    let jj = j * (j + 1.0);
    let mut hamiltonian = &idotj * lvl.hyperfine_a;
    if i >= 1.0 && j >= 1.0 {
        let sq = &idotj * &idotj;
        let quad = (sq * 3.0 + &idotj * 1.5 - DMatrix::identity(n, n) * (ii * jj))
            / (2.0 * i * (2.0 * i - 1.0) * j * (2.0 * j - 1.0));
        hamiltonian += quad * lvl.hyperfine_b;
    }
    let mut tensor = DMatrix::zeros(n, n);
    for (k, &(mi, mj)) in states.iter().enumerate() {
        hamiltonian[(k, k)] += BOHR * b * (lvl.g_j * mj + species.g_i * mi);
        if j >= 1.0 {
            tensor[(k, k)] = (3.0 * mj * mj - jj) / (j * (2.0 * j - 1.0));
        }
    }
    Uncoupled { hamiltonian, tensor }
}

/// Ascending eigenvalues with the rank-2 expectation of each eigenvector.
pub fn uncoupled_spectrum(species: &IonSpecies, level: LevelId, m_f: HalfInt, b: f64) -> Vec<(f64, f64)> {
    let u = uncoupled(species, level, m_f, b);
    let eig = SymmetricEigen::new(u.hamiltonian.clone());
    let mut out: Vec<(f64, f64)> = (0..eig.eigenvalues.len())
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let t = (v.transpose() * &u.tensor * v)[(0, 0)];
            (eig.eigenvalues[k], t)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Breit–Rabi energy of the J = 1/2 state that connects to F = I ± 1/2.
pub fn breit_rabi(a: f64, g_j: f64, g_i: f64, i: f64, m: f64, upper_f: bool, b: f64) -> f64 {
    let de = a * (i + 0.5);
    let x = (g_j - g_i) * BOHR * b / de;
    let root = (1.0 + 4.0 * m * x / (2.0 * i + 1.0) + x * x).sqrt();
    let sign = if upper_f { 1.0 } else { -1.0 };
    -de / (2.0 * (2.0 * i + 1.0)) + g_i * BOHR * m * b + sign * 0.5 * de * root
}

/// d²E/dB² of the same state in closed form.
pub fn breit_rabi_curvature(a: f64, g_j: f64, g_i: f64, i: f64, m: f64, upper_f: bool, b: f64) -> f64 {
    let de = a * (i + 0.5);
    let k = (g_j - g_i) * BOHR / de;
    let x = k * b;
    let s = (1.0 + 4.0 * m * x / (2.0 * i + 1.0) + x * x).sqrt();
    let ds = (2.0 * m * k / (2.0 * i + 1.0) + k * k * b) / s;
    let sign = if upper_f { 1.0 } else { -1.0 };
    sign * 0.5 * de * (k * k - ds * ds) / s
}
