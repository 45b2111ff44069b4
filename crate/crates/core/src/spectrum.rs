//! Labelled states of a clock transition evaluated at arbitrary fields.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::angular::{lande_g_f, HalfInt};
use crate::error::{Error, Result};
use crate::shifts::{rank2_matrix, Rank2Matrix};
use crate::species::{ClockTransition, IonSpecies, LevelId};
use crate::units::BOHR_MAGNETON_HZ_PER_T;
use crate::zeeman::{
    build_manifold, projections_of_level, uniform_grid, ManifoldTracker, StateLabel, TrackedSample,
};

/// Default number of points in a tracking grid.
pub const DEFAULT_TRACKING_POINTS: usize = 2001;

/// Ratio between the tracked range and the largest requested field.
pub const TRACKING_HEADROOM: f64 = 1.25;

/// Smallest tracked range used by the single-field convenience functions, T.
const MIN_TRACKED_FIELD: f64 = 1e-6;

/// How the lower clock state is modelled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LowerStateModel {
    /// Full diagonalization.
    #[default]
    Exact,
    /// Hyperfine energy plus the exact linear (Landé) Zeeman term; no mixing.
    FrozenLinear,
}

/// A tracked state evaluated at one field.
#[derive(Clone, Debug)]
pub struct StateSample {
    pub label: StateLabel,
    pub b: f64,
    /// Hz.
    pub energy: f64,
    /// dE/dB by Hellmann–Feynman, Hz/T.
    pub slope: f64,
    /// Rank-2 shift coefficient; exactly 0 for J < 1.
    pub c2: f64,
    /// Coefficients over the block basis.
    pub amplitudes: Vec<f64>,
}

struct Block {
    tracker: OnceLock<Result<ManifoldTracker>>,
    rank2: OnceLock<Option<Rank2Matrix>>,
}

/// Lazily tracked blocks of one fine-structure level on a shared grid.
pub struct LevelSpectrum<'a> {
    species: &'a IonSpecies,
    level: LevelId,
    grid: Vec<f64>,
    blocks: BTreeMap<HalfInt, Block>,
}

impl<'a> LevelSpectrum<'a> {
    pub fn new(species: &'a IonSpecies, level: LevelId, grid: Vec<f64>) -> Self {
        let blocks = projections_of_level(species, level)
            .into_iter()
            .map(|m| {
                (
                    m,
                    Block {
                        tracker: OnceLock::new(),
                        rank2: OnceLock::new(),
                    },
                )
            })
            .collect();
        LevelSpectrum { species, level, grid, blocks }
    }

    pub fn level(&self) -> LevelId {
        self.level
    }

    pub fn species(&self) -> &'a IonSpecies {
        self.species
    }

    /// Every zero-field label of the level, ordered by m_F then F.
    pub fn labels(&self) -> Vec<StateLabel> {
        let fs = self.species.f_values(self.level);
        let mut out = Vec::new();
        for &m in self.blocks.keys() {
            for &f in &fs {
                if f.admits_projection(m) {
                    out.push(StateLabel::new(f, m));
                }
            }
        }
        out
    }

    fn block(&self, m_f: HalfInt) -> Result<&Block> {
        self.blocks.get(&m_f).ok_or_else(|| Error::InvalidProjection {
            level: self.species.level(self.level).label.clone(),
            m_f,
        })
    }

    pub fn tracker(&self, m_f: HalfInt) -> Result<&ManifoldTracker> {
        let block = self.block(m_f)?;
        block
            .tracker
            .get_or_init(|| ManifoldTracker::new(self.species, self.level, m_f, &self.grid))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Rank-2 matrix of a block, `None` for J < 1.
    pub fn rank2(&self, m_f: HalfInt) -> Result<Option<&Rank2Matrix>> {
        let block = self.block(m_f)?;
        Ok(block
            .rank2
            .get_or_init(|| rank2_matrix(self.species, self.level, m_f).ok())
            .as_ref())
    }

    fn label_index(&self, tracker: &ManifoldTracker, label: StateLabel) -> Result<usize> {
        tracker.label_index(label.f).ok_or_else(|| Error::InvalidF {
            i: self.species.nuclear_spin,
            j: self.species.level(self.level).j,
            f: label.f,
        })
    }

    fn state_from(&self, tracker: &ManifoldTracker, sample: &TrackedSample, label: StateLabel) -> Result<StateSample> {
        let k = self.label_index(tracker, label)?;
        let amplitudes = sample.vector(k);
        let c2 = match self.rank2(label.m_f)? {
            Some(r) => r.expectation(&amplitudes),
            None => 0.0,
        };
        Ok(StateSample {
            label,
            b: sample.b,
            energy: sample.energies[k],
            slope: tracker.ops.slope(&amplitudes),
            c2,
            amplitudes,
        })
    }

    pub fn state(&self, label: StateLabel, b: f64) -> Result<StateSample> {
        let tracker = self.tracker(label.m_f)?;
        let sample = tracker.sample(b)?;
        self.state_from(tracker, &sample, label)
    }

    /// Every state of a block at one field (a single diagonalization).
    pub fn block_states(&self, m_f: HalfInt, b: f64) -> Result<Vec<StateSample>> {
        let tracker = self.tracker(m_f)?;
        let sample = tracker.sample(b)?;
        tracker
            .basis()
            .f_list
            .iter()
            .map(|&f| self.state_from(tracker, &sample, StateLabel::new(f, m_f)))
            .collect()
    }

    /// The state with no field-induced mixing: hyperfine energy plus the
    /// low-field Landé term.
    pub fn linear_state(&self, label: StateLabel, b: f64) -> Result<StateSample> {
        let lvl = self.species.level(self.level);
        let tracker_basis = crate::zeeman::ManifoldBasis::new(self.species, self.level, label.m_f)?;
        let k = tracker_basis.index_of(label.f).ok_or(Error::InvalidF {
            i: self.species.nuclear_spin,
            j: lvl.j,
            f: label.f,
        })?;
        let g_f = lande_g_f(lvl.g_j, self.species.g_i, self.species.nuclear_spin, lvl.j, label.f);
        let slope = g_f * label.m_f.value() * BOHR_MAGNETON_HZ_PER_T;
        let mut amplitudes = vec![0.0; tracker_basis.dim()];
        amplitudes[k] = 1.0;
        let c2 = match self.rank2(label.m_f)? {
            Some(r) => r.expectation(&amplitudes),
            None => 0.0,
        };
        Ok(StateSample {
            label,
            b,
            energy: self.species.hyperfine_energy(self.level, label.f)? + slope * b,
            slope,
            c2,
            amplitudes,
        })
    }

    /// Smallest |E − E′| between a tracked state and every state of the
    /// neighbouring m_F ± 1 blocks at the same field, Hz.
    pub fn min_gap_adjacent(&self, state: &StateSample) -> Result<f64> {
        let mut gap = f64::INFINITY;
        for dm in [-2, 2] {
            let m = label_shift(state.label.m_f, dm);
            if !self.blocks.contains_key(&m) {
                continue;
            }
            let manifold = build_manifold(self.species, self.level, m, state.b)?;
            for e in manifold.eigenvalues {
                gap = gap.min((e - state.energy).abs());
            }
        }
        Ok(gap)
    }
}

fn label_shift(m: HalfInt, twice_delta: i32) -> HalfInt {
    HalfInt::from_twice(m.twice() + twice_delta)
}

/// Which clock level a label refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Both clock levels of a transition, tracked on a common grid.
pub struct TransitionSpectrum<'a> {
    pub species: &'a IonSpecies,
    pub transition: &'a ClockTransition,
    pub lower: LevelSpectrum<'a>,
    pub upper: LevelSpectrum<'a>,
    pub lower_model: LowerStateModel,
}

impl<'a> TransitionSpectrum<'a> {
    /// Tracks both levels on `points` uniform grid points up to `b_track_max`.
    pub fn with_grid(
        species: &'a IonSpecies,
        transition: &'a ClockTransition,
        b_track_max: f64,
        points: usize,
    ) -> Result<Self> {
        if !(b_track_max.is_finite() && b_track_max > 0.0) || points < 2 {
            return Err(Error::Input("tracking range must be positive with at least two points".into()));
        }
        let grid = uniform_grid(b_track_max, points);
        Ok(TransitionSpectrum {
            species,
            transition,
            lower: LevelSpectrum::new(species, transition.lower, grid.clone()),
            upper: LevelSpectrum::new(species, transition.upper, grid),
            lower_model: LowerStateModel::Exact,
        })
    }

    /// Default tracking grid covering fields up to `b_max`.
    pub fn new(species: &'a IonSpecies, transition: &'a ClockTransition, b_max: f64) -> Result<Self> {
        Self::with_grid(species, transition, TRACKING_HEADROOM * b_max, DEFAULT_TRACKING_POINTS)
    }

    pub fn with_lower_model(mut self, model: LowerStateModel) -> Self {
        self.lower_model = model;
        self
    }

    pub fn side(&self, side: Side) -> &LevelSpectrum<'a> {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    pub fn b_track_max(&self) -> f64 {
        *self.lower.grid.last().expect("grid is nonempty")
    }

    pub fn lower_state(&self, label: StateLabel, b: f64) -> Result<StateSample> {
        match self.lower_model {
            LowerStateModel::Exact => self.lower.state(label, b),
            LowerStateModel::FrozenLinear => {
                if !(b >= 0.0 && b <= self.b_track_max()) {
                    return Err(Error::OutsideTrackedRange { b_tesla: b, max_tesla: self.b_track_max() });
                }
                self.lower.linear_state(label, b)
            }
        }
    }

    pub fn upper_state(&self, label: StateLabel, b: f64) -> Result<StateSample> {
        self.upper.state(label, b)
    }

    /// E_upper − E_lower at field `b`, Hz, excluding the optical frequency.
    pub fn transition_frequency(&self, lower: StateLabel, upper: StateLabel, b: f64) -> Result<f64> {
        Ok(self.upper_state(upper, b)?.energy - self.lower_state(lower, b)?.energy)
    }

    /// dν/dB by Hellmann–Feynman, Hz/T.
    pub fn dnu_db(&self, lower: StateLabel, upper: StateLabel, b: f64) -> Result<f64> {
        Ok(self.upper_state(upper, b)?.slope - self.lower_state(lower, b)?.slope)
    }

    /// C₂(upper) − C₂(lower).
    pub fn c2_transition(&self, lower: StateLabel, upper: StateLabel, b: f64) -> Result<f64> {
        Ok(self.upper_state(upper, b)?.c2 - self.lower_state(lower, b)?.c2)
    }
}

/// ν(B) for one label pair, tracking from zero field up to `b`.
pub fn transition_frequency(
    species: &IonSpecies,
    transition: &ClockTransition,
    lower: StateLabel,
    upper: StateLabel,
    b: f64,
) -> Result<f64> {
    TransitionSpectrum::new(species, transition, b.max(MIN_TRACKED_FIELD))?.transition_frequency(lower, upper, b)
}

/// dν/dB for one label pair at field `b`, Hz/T.
pub fn dnu_db(
    species: &IonSpecies,
    transition: &ClockTransition,
    lower: StateLabel,
    upper: StateLabel,
    b: f64,
) -> Result<f64> {
    TransitionSpectrum::new(species, transition, b.max(MIN_TRACKED_FIELD))?.dnu_db(lower, upper, b)
}

/// C₂ of a single tracked state of `level` at field `b`.
pub fn c2_state(species: &IonSpecies, level: LevelId, label: StateLabel, b: f64) -> Result<f64> {
    let grid = uniform_grid(TRACKING_HEADROOM * b.max(MIN_TRACKED_FIELD), DEFAULT_TRACKING_POINTS);
    LevelSpectrum::new(species, level, grid).state(label, b).map(|s| s.c2)
}

/// C₂ of a transition at field `b`.
pub fn c2_transition(
    species: &IonSpecies,
    transition: &ClockTransition,
    lower: StateLabel,
    upper: StateLabel,
    b: f64,
) -> Result<f64> {
    TransitionSpectrum::new(species, transition, b.max(MIN_TRACKED_FIELD))?.c2_transition(lower, upper, b)
}
