//! Hyperfine + Zeeman Hamiltonian of one fine-structure level, restricted to a
//! fixed-m_F block, and adiabatic tracking of its eigenstates across a field scan.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::angular::{parity_sign, wigner3j, wigner6j, HalfInt};
use crate::error::{Error, Result};
use crate::species::{IonSpecies, LevelId};
use crate::units::BOHR_MAGNETON_HZ_PER_T;

/// Relative gap below which two continuation overlaps are considered tied.
const OVERLAP_TIE: f64 = 1e-6;

/// A state identified by its zero-field quantum numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateLabel {
    pub f: HalfInt,
    pub m_f: HalfInt,
}

impl StateLabel {
    pub fn new(f: HalfInt, m_f: HalfInt) -> Self {
        StateLabel { f, m_f }
    }

    pub fn mirrored(self) -> Self {
        StateLabel { f: self.f, m_f: -self.m_f }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.f, self.m_f)
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    /// Parses `F,m_F`, for example `4,-3` or `7/2,-1/2`.
    fn from_str(s: &str) -> Result<Self> {
        let (f, m) = s
            .split_once(',')
            .ok_or_else(|| Error::Input(format!("state label `{s}` must look like F,m_F")))?;
        let label = StateLabel { f: f.parse()?, m_f: m.parse()? };
        if !label.f.admits_projection(label.m_f) {
            return Err(Error::Input(format!("|m_F| exceeds F or parity mismatch in `{s}`")));
        }
        Ok(label)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldBasis {
    pub level: LevelId,
    pub m_f: HalfInt,
    /// All F of the level with F ≥ |m_F|, ascending.
    pub f_list: Vec<HalfInt>,
}

impl ManifoldBasis {
    pub fn new(species: &IonSpecies, level: LevelId, m_f: HalfInt) -> Result<Self> {
        let f_list: Vec<HalfInt> = species
            .f_values(level)
            .into_iter()
            .filter(|f| f.admits_projection(m_f))
            .collect();
        if f_list.is_empty() {
            return Err(Error::InvalidProjection {
                level: species.level(level).label.clone(),
                m_f,
            });
        }
        Ok(ManifoldBasis { level, m_f, f_list })
    }

    pub fn dim(&self) -> usize {
        self.f_list.len()
    }

    pub fn index_of(&self, f: HalfInt) -> Option<usize> {
        self.f_list.iter().position(|&x| x == f)
    }
}

/// All m_F values available in a level, ascending.
pub fn projections_of_level(species: &IonSpecies, level: LevelId) -> Vec<HalfInt> {
    let f_max = species.nuclear_spin + species.level(level).j;
    f_max.projections().collect()
}

fn zeeman_element_per_tesla(species: &IonSpecies, level: LevelId, fp: HalfInt, f: HalfInt, m: HalfInt) -> f64 {
    let lvl = species.level(level);
    let (i, j) = (species.nuclear_spin, lvl.j);
    let nuclear = if fp == f { species.g_i * m.value() } else { 0.0 };
    if j.twice() == 0 {
        return nuclear * BOHR_MAGNETON_HZ_PER_T;
    }
    let one = HalfInt::ONE;
    let reduced = wigner3j(j, one, j, -j, HalfInt::ZERO, j);
    let six = wigner6j(f, fp, one, j, j, i);
    let three = wigner3j(f, one, fp, -m, HalfInt::ZERO, m);
    let electronic = (lvl.g_j - species.g_i)
        * parity_sign(j.twice() + i.twice() + 2 + m.twice())
        * j.value()
        * (f64::from(fp.multiplicity()) * f64::from(f.multiplicity())).sqrt()
        * six
        / reduced
        * three;
    (electronic + nuclear) * BOHR_MAGNETON_HZ_PER_T
}

fn check_pair(species: &IonSpecies, level: LevelId, fp: HalfInt, f: HalfInt, m: HalfInt) -> Result<()> {
    let allowed = species.f_values(level);
    let lvl = species.level(level);
    for x in [fp, f] {
        if !allowed.contains(&x) {
            return Err(Error::InvalidF { i: species.nuclear_spin, j: lvl.j, f: x });
        }
        if !x.admits_projection(m) {
            return Err(Error::InvalidProjection { level: lvl.label.clone(), m_f: m });
        }
    }
    Ok(())
}

/// Matrix element ⟨F′ m_F|H_Z|F m_F⟩ at field `b_tesla`, Hz.
pub fn zeeman_element(
    species: &IonSpecies,
    level: LevelId,
    f_prime: HalfInt,
    f: HalfInt,
    m_f: HalfInt,
    b_tesla: f64,
) -> Result<f64> {
    check_pair(species, level, f_prime, f, m_f)?;
    if (f_prime.twice() - f.twice()).abs() > 2 {
        return Ok(0.0);
    }
    Ok(zeeman_element_per_tesla(species, level, f_prime, f, m_f) * b_tesla)
}

/// Field-independent pieces of a fixed-m_F block: hyperfine diagonal and ∂H/∂B.
#[derive(Clone, Debug)]
pub struct ManifoldOperators {
    pub basis: ManifoldBasis,
    /// Zero-field hyperfine energies on the diagonal, Hz.
    pub hyperfine: DVector<f64>,
    /// Zeeman matrix at B = 1 T, Hz/T.
    pub zeeman: DMatrix<f64>,
}

impl ManifoldOperators {
    pub fn new(species: &IonSpecies, level: LevelId, m_f: HalfInt) -> Result<Self> {
        let basis = ManifoldBasis::new(species, level, m_f)?;
        let n = basis.dim();
        let mut hyperfine = DVector::zeros(n);
        for (k, &f) in basis.f_list.iter().enumerate() {
            hyperfine[k] = species.hyperfine_energy(level, f)?;
        }
        let zeeman = DMatrix::from_fn(n, n, |r, c| {
            zeeman_element_per_tesla(species, level, basis.f_list[r], basis.f_list[c], m_f)
        });
        Ok(ManifoldOperators { basis, hyperfine, zeeman })
    }

    pub fn hamiltonian(&self, b_tesla: f64) -> DMatrix<f64> {
        let mut h = &self.zeeman * b_tesla;
        for k in 0..self.basis.dim() {
            h[(k, k)] += self.hyperfine[k];
        }
        h
    }

    /// ⟨v|∂H/∂B|v⟩, Hz/T.
    pub fn slope(&self, v: &[f64]) -> f64 {
        quadratic_form(&self.zeeman, v)
    }
}

pub(crate) fn quadratic_form(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (r, &vr) in v.iter().enumerate() {
        for (c, &vc) in v.iter().enumerate() {
            acc += vr * m[(r, c)] * vc;
        }
    }
    acc
}

/// The Hamiltonian of one block at one field with its eigen-decomposition.
#[derive(Clone, Debug)]
pub struct ZeemanManifold {
    pub basis: ManifoldBasis,
    pub b: f64,
    pub hamiltonian: DMatrix<f64>,
    /// Ascending, Hz.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

fn is_diagonal(h: &DMatrix<f64>) -> bool {
    let n = h.nrows();
    (0..n).all(|r| (0..n).all(|c| r == c || h[(r, c)] == 0.0))
}

/// Eigenpairs of a symmetric matrix sorted by ascending eigenvalue.
fn sorted_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    if is_diagonal(h) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| h[(a, a)].total_cmp(&h[(b, b)]));
        let vals = order.iter().map(|&k| h[(k, k)]).collect();
        let vecs = DMatrix::from_fn(n, n, |r, c| if r == order[c] { 1.0 } else { 0.0 });
        return (vals, vecs);
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn build_manifold(species: &IonSpecies, level: LevelId, m_f: HalfInt, b_tesla: f64) -> Result<ZeemanManifold> {
    let ops = ManifoldOperators::new(species, level, m_f)?;
    Ok(ops.manifold(b_tesla))
}

impl ManifoldOperators {
    pub fn manifold(&self, b_tesla: f64) -> ZeemanManifold {
        let hamiltonian = self.hamiltonian(b_tesla);
        let (eigenvalues, eigenvectors) = sorted_eigen(&hamiltonian);
        ZeemanManifold {
            basis: self.basis.clone(),
            b: b_tesla,
            hamiltonian,
            eigenvalues,
            eigenvectors,
        }
    }
}

/// One eigenstate followed across a field grid, labelled at B = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedState {
    pub level: LevelId,
    pub label: StateLabel,
    pub b_grid: Vec<f64>,
    pub energies: Vec<f64>,
    /// Coefficients over the basis `f_list` at each grid point.
    pub amplitudes: Vec<Vec<f64>>,
}

/// Eigenstates of one block at a single field, columns ordered by label.
#[derive(Clone, Debug)]
pub struct TrackedSample {
    pub b: f64,
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl TrackedSample {
    pub fn vector(&self, label_index: usize) -> Vec<f64> {
        self.vectors.column(label_index).iter().copied().collect()
    }
}

/// Adiabatic continuation of every eigenstate of one block across a grid.
///
/// Column `k` of every stored sample is the state whose zero-field label is
/// `basis.f_list[k]`.
#[derive(Clone, Debug)]
pub struct ManifoldTracker {
    pub ops: ManifoldOperators,
    level_label: String,
    grid: Vec<f64>,
    samples: Vec<TrackedSample>,
}

impl ManifoldTracker {
    pub fn new(species: &IonSpecies, level: LevelId, m_f: HalfInt, b_grid: &[f64]) -> Result<Self> {
        if b_grid.first() != Some(&0.0) {
            return Err(Error::Input("tracking grid must start at B = 0".into()));
        }
        if b_grid.windows(2).any(|w| !(w[1] > w[0])) || b_grid.iter().any(|b| !b.is_finite()) {
            return Err(Error::Input("tracking grid must be finite and strictly ascending".into()));
        }
        let ops = ManifoldOperators::new(species, level, m_f)?;
        let level_label = species.level(level).label.clone();
        let n = ops.basis.dim();

        let e0: Vec<f64> = ops.hyperfine.iter().copied().collect();
        let scale = e0.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        for a in 0..n {
            for b in a + 1..n {
                if (e0[a] - e0[b]).abs() <= 1e-12 * scale {
                    return Err(Error::DegenerateZeroField { level: level_label, m_f });
                }
            }
        }
        let mut samples = Vec::with_capacity(b_grid.len());
        samples.push(TrackedSample {
            b: 0.0,
            energies: e0,
            vectors: DMatrix::identity(n, n),
        });
        let mut tracker = ManifoldTracker {
            ops,
            level_label,
            grid: b_grid.to_vec(),
            samples,
        };
        for &b in &b_grid[1..] {
            let prev = tracker.samples.last().expect("grid starts with B = 0");
            let next = tracker.continue_from(prev, b)?;
            tracker.samples.push(next);
        }
        Ok(tracker)
    }

    pub fn basis(&self) -> &ManifoldBasis {
        &self.ops.basis
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn b_max(&self) -> f64 {
        *self.grid.last().expect("grid is nonempty")
    }

    pub fn label_index(&self, f: HalfInt) -> Option<usize> {
        self.ops.basis.index_of(f)
    }

    fn continue_from(&self, prev: &TrackedSample, b: f64) -> Result<TrackedSample> {
        let n = self.ops.basis.dim();
        let (vals, vecs) = sorted_eigen(&self.ops.hamiltonian(b));
        let overlaps = prev.vectors.transpose() * &vecs;
        let mut energies = vec![0.0; n];
        let mut vectors = DMatrix::zeros(n, n);
        let mut taken = vec![false; n];
        let ambiguous = || Error::TrackingAmbiguity {
            level: self.level_label.clone(),
            m_f: self.ops.basis.m_f,
            b_tesla: b,
        };
        for label in 0..n {
            let mut best = (0usize, -1.0f64);
            let mut runner_up = -1.0f64;
            for cand in 0..n {
                let o = overlaps[(label, cand)].abs();
                if o > best.1 {
                    runner_up = best.1;
                    best = (cand, o);
                } else if o > runner_up {
                    runner_up = o;
                }
            }
            let (cand, o) = best;
            if o <= std::f64::consts::FRAC_1_SQRT_2 || o - runner_up < OVERLAP_TIE || taken[cand] {
                return Err(ambiguous());
            }
            taken[cand] = true;
            let sign = if overlaps[(label, cand)] < 0.0 { -1.0 } else { 1.0 };
            energies[label] = vals[cand];
            for r in 0..n {
                vectors[(r, label)] = sign * vecs[(r, cand)];
            }
        }
        Ok(TrackedSample { b, energies, vectors })
    }

    /// All tracked states at an arbitrary field inside the grid range.
    ///
    /// Grid points return the stored sample; other fields continue from the
    /// nearest grid point below.
    pub fn sample(&self, b: f64) -> Result<TrackedSample> {
        if !(b >= 0.0 && b <= self.b_max()) {
            return Err(Error::OutsideTrackedRange { b_tesla: b, max_tesla: self.b_max() });
        }
        let k = self.grid.partition_point(|&g| g <= b) - 1;
        if self.grid[k] == b {
            return Ok(self.samples[k].clone());
        }
        self.continue_from(&self.samples[k], b)
    }

    pub fn tracked_states(&self) -> Vec<TrackedState> {
        let basis = &self.ops.basis;
        basis
            .f_list
            .iter()
            .enumerate()
            .map(|(k, &f)| TrackedState {
                level: basis.level,
                label: StateLabel::new(f, basis.m_f),
                b_grid: self.grid.clone(),
                energies: self.samples.iter().map(|s| s.energies[k]).collect(),
                amplitudes: self.samples.iter().map(|s| s.vector(k)).collect(),
            })
            .collect()
    }
}

/// Tracks every state of a fixed-m_F block across `b_grid` (ascending, from 0).
pub fn track_states(
    species: &IonSpecies,
    level: LevelId,
    m_f: HalfInt,
    b_grid: &[f64],
) -> Result<Vec<TrackedState>> {
    Ok(ManifoldTracker::new(species, level, m_f, b_grid)?.tracked_states())
}

/// Uniform grid of `points` fields from 0 to `b_max`.
pub fn uniform_grid(b_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let last = (points - 1) as f64;
            (0..points).map(|k| b_max * (k as f64) / last).collect()
        }
    }
}
