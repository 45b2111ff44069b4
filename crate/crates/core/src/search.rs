//! Field-insensitive points of clock transitions and exhaustive scans over
//! all E2-allowed label pairs.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::angular::HalfInt;
use crate::error::{Error, Result};
use crate::species::{ClockTransition, IonSpecies};
use crate::spectrum::{LevelSpectrum, LowerStateModel, TransitionSpectrum, DEFAULT_TRACKING_POINTS, TRACKING_HEADROOM};
use crate::zeeman::StateLabel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Points of the bracketing grid over (0, B_max].
    pub scan_points: usize,
    /// Points of the tracking grid over [0, 1.25 B_max].
    pub tracking_points: usize,
    /// Accept a root once |dν/dB| falls below this, Hz/T.
    pub slope_tolerance: f64,
    /// Or once the bracket is narrower than this, T.
    pub bracket_tolerance: f64,
    /// Initial step of the second difference used for α_Z, T.
    pub curvature_step: f64,
    pub lower_model: LowerStateModel,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            scan_points: 4001,
            tracking_points: DEFAULT_TRACKING_POINTS,
            slope_tolerance: 1e-3,
            bracket_tolerance: 1e-12,
            curvature_step: 1e-5,
            lower_model: LowerStateModel::Exact,
        }
    }
}

/// A certified zero of dν/dB.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InsensitivePoint {
    /// T.
    pub b0: f64,
    /// dν/dB at `b0`, Hz/T.
    pub residual_slope: f64,
    /// Width of the final sign-change bracket, T.
    pub bracket_width: f64,
}

/// One field-insensitive operating point of a label pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionAnalysis {
    pub lower: StateLabel,
    pub upper: StateLabel,
    /// T.
    pub b0: f64,
    /// ½ d²ν/dB², Hz/T².
    pub alpha_z: f64,
    /// C₂(upper) − C₂(lower).
    pub c2: f64,
    /// ν(B0) relative to the optical frequency, Hz.
    pub frequency: f64,
    /// Smallest distance of either clock state to a state of a neighbouring m_F block, Hz.
    pub min_gap_adjacent_mf: f64,
    /// Hz/T.
    pub residual_slope: f64,
}

#[derive(Clone, Debug)]
pub struct PairFailure {
    pub lower: StateLabel,
    pub upper: StateLabel,
    pub error: Error,
}

#[derive(Clone, Debug, Default)]
pub struct ScanFilters {
    /// Keep only analyses with |C₂| below this.
    pub max_abs_c2: Option<f64>,
    /// Keep only pairs with these m_F(upper) − m_F(lower) values.
    pub delta_m: Option<Vec<HalfInt>>,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub species: String,
    pub lower_level: String,
    pub upper_level: String,
    /// T.
    pub b_max: f64,
    pub scan_points: usize,
    pub tracking_points: usize,
    /// T.
    pub tracking_max: f64,
    pub lower_model: LowerStateModel,
    /// Sorted by |C₂|, then labels, then field.
    pub analyses: Vec<TransitionAnalysis>,
    pub failures: Vec<PairFailure>,
}

/// Whether a pair of zero-field labels is E2-allowed (|ΔF| ≤ 2, |Δm_F| ≤ 2).
pub fn e2_allowed(lower: StateLabel, upper: StateLabel) -> bool {
    (upper.f.twice() - lower.f.twice()).abs() <= 4 && (upper.m_f.twice() - lower.m_f.twice()).abs() <= 4
}

fn scan_grid(b_max: f64, points: usize) -> Vec<f64> {
    let n = points as f64;
    (1..=points).map(|k| b_max * (k as f64) / n).collect()
}

/// Bracketing intervals of sign changes in `values` sampled on `grid`.
fn sign_changes(grid: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for k in 0..grid.len() {
        if values[k] == 0.0 {
            out.push((grid[k], grid[k]));
        } else if k + 1 < grid.len() && values[k + 1] != 0.0 && (values[k] < 0.0) != (values[k + 1] < 0.0) {
            out.push((grid[k], grid[k + 1]));
        }
    }
    out
}

struct BrentOutcome {
    root: f64,
    value: f64,
    width: f64,
}

/// Brent's method on a sign-change bracket; stops when |f| ≤ `ftol` or the
/// bracket reaches machine resolution.
fn brent(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, fa: f64, fb: f64, ftol: f64) -> Result<BrentOutcome> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..500 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs();
        let half = 0.5 * (c - b);
        if fb.abs() <= ftol || half.abs() <= tol || fb == 0.0 {
            return Ok(BrentOutcome { root: b, value: fb, width: (c - b).abs() });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * half * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b)?;
    }
    Err(Error::Numerical("Brent iteration did not converge".into()))
}

fn refine(
    spectrum: &TransitionSpectrum<'_>,
    lower: StateLabel,
    upper: StateLabel,
    (lo, hi): (f64, f64),
    opts: &SearchOptions,
) -> Result<InsensitivePoint> {
    let slope = |b: f64| spectrum.dnu_db(lower, upper, b);
    if lo == hi {
        return Ok(InsensitivePoint { b0: lo, residual_slope: slope(lo)?, bracket_width: 0.0 });
    }
    let (flo, fhi) = (slope(lo)?, slope(hi)?);
    let out = brent(slope, lo, hi, flo, fhi, opts.slope_tolerance)?;
    if out.value.abs() > opts.slope_tolerance && out.width > opts.bracket_tolerance {
        return Err(Error::RootCertification {
            b_tesla: out.root,
            reason: format!(
                "|dnu/dB| = {:e} Hz/T with bracket width {:e} T",
                out.value.abs(),
                out.width
            ),
        });
    }
    Ok(InsensitivePoint { b0: out.root, residual_slope: out.value, bracket_width: out.width })
}

/// All zeros of dν/dB on (0, `b_max`], ascending.
pub fn find_insensitive_points(
    spectrum: &TransitionSpectrum<'_>,
    lower: StateLabel,
    upper: StateLabel,
    b_max: f64,
    opts: &SearchOptions,
) -> Result<Vec<InsensitivePoint>> {
    if !(b_max > 0.0 && b_max <= spectrum.b_track_max()) {
        return Err(Error::Input(format!(
            "search range (0, {b_max:e}] T must lie inside the tracked range (0, {:e}] T",
            spectrum.b_track_max()
        )));
    }
    let grid = scan_grid(b_max, opts.scan_points);
    let slopes = grid
        .iter()
        .map(|&b| spectrum.dnu_db(lower, upper, b))
        .collect::<Result<Vec<_>>>()?;
    sign_changes(&grid, &slopes)
        .into_iter()
        .map(|bracket| refine(spectrum, lower, upper, bracket, opts))
        .collect()
}

/// ½ d²ν/dB² at `b0` from a Richardson-refined symmetric second difference, Hz/T².
pub fn quadratic_coefficient(
    spectrum: &TransitionSpectrum<'_>,
    lower: StateLabel,
    upper: StateLabel,
    b0: f64,
    initial_step: f64,
) -> Result<f64> {
    let mut h = initial_step;
    while b0 < 2.0 * h {
        h *= 0.5;
        if h < 1e-9 {
            return Err(Error::StepUnderflow { b_tesla: b0 });
        }
    }
    let nu = |b: f64| spectrum.transition_frequency(lower, upper, b);
    let centre = nu(b0)?;
    let second = |step: f64| -> Result<f64> {
        Ok(((nu(b0 + step)? - centre) + (nu(b0 - step)? - centre)) / (step * step))
    };
    let coarse = second(h)?;
    let fine = second(0.5 * h)?;
    Ok(0.5 * (4.0 * fine - coarse) / 3.0)
}

/// B0, α_Z, C₂ and diagnostics at one certified point.
pub fn analyze_point(
    spectrum: &TransitionSpectrum<'_>,
    lower: StateLabel,
    upper: StateLabel,
    point: &InsensitivePoint,
    opts: &SearchOptions,
) -> Result<TransitionAnalysis> {
    let lo = spectrum.lower_state(lower, point.b0)?;
    let up = spectrum.upper_state(upper, point.b0)?;
    let alpha_z = quadratic_coefficient(spectrum, lower, upper, point.b0, opts.curvature_step)?;
    if !alpha_z.is_finite() {
        return Err(Error::Numerical(format!("non-finite curvature at B0 = {:e} T", point.b0)));
    }
    let gap_lower = match spectrum.lower_model {
        LowerStateModel::Exact => spectrum.lower.min_gap_adjacent(&lo)?,
        LowerStateModel::FrozenLinear => f64::INFINITY,
    };
    let gap_upper = spectrum.upper.min_gap_adjacent(&up)?;
    Ok(TransitionAnalysis {
        lower,
        upper,
        b0: point.b0,
        alpha_z,
        c2: up.c2 - lo.c2,
        frequency: up.energy - lo.energy,
        min_gap_adjacent_mf: gap_lower.min(gap_upper),
        residual_slope: point.residual_slope,
    })
}

/// Slopes of every labelled state of one level on the scan grid, one
/// diagonalization per block and grid point.
fn level_slopes(
    level: &LevelSpectrum<'_>,
    grid: &[f64],
    frozen: bool,
) -> BTreeMap<HalfInt, Result<BTreeMap<StateLabel, Vec<f64>>>> {
    let mut blocks: Vec<HalfInt> = level.labels().iter().map(|l| l.m_f).collect();
    blocks.dedup();
    blocks
        .par_iter()
        .map(|&m| {
            let per_block = (|| -> Result<BTreeMap<StateLabel, Vec<f64>>> {
                let mut out: BTreeMap<StateLabel, Vec<f64>> = BTreeMap::new();
                for &b in grid {
                    let states = if frozen {
                        level
                            .labels()
                            .into_iter()
                            .filter(|l| l.m_f == m)
                            .map(|l| level.linear_state(l, b))
                            .collect::<Result<Vec<_>>>()?
                    } else {
                        level.block_states(m, b)?
                    };
                    for s in states {
                        out.entry(s.label).or_default().push(s.slope);
                    }
                }
                Ok(out)
            })();
            (m, per_block)
        })
        .collect()
}

/// Every field-insensitive point of every E2-allowed label pair below `b_max`.
pub fn scan_species(
    species: &IonSpecies,
    transition: &ClockTransition,
    b_max: f64,
    filters: &ScanFilters,
    opts: &SearchOptions,
) -> Result<ScanReport> {
    if !(b_max.is_finite() && b_max > 0.0) {
        return Err(Error::Input("scan range must be positive".into()));
    }
    let spectrum = TransitionSpectrum::with_grid(species, transition, TRACKING_HEADROOM * b_max, opts.tracking_points)?
        .with_lower_model(opts.lower_model);
    let grid = scan_grid(b_max, opts.scan_points);
    let frozen = opts.lower_model == LowerStateModel::FrozenLinear;
    let lower_slopes = level_slopes(&spectrum.lower, &grid, frozen);
    let upper_slopes = level_slopes(&spectrum.upper, &grid, false);

    let pairs: Vec<(StateLabel, StateLabel)> = spectrum
        .lower
        .labels()
        .into_iter()
        .flat_map(|lo| spectrum.upper.labels().into_iter().map(move |up| (lo, up)))
        .filter(|&(lo, up)| e2_allowed(lo, up))
        .filter(|&(lo, up)| {
            filters
                .delta_m
                .as_ref()
                .is_none_or(|dm| dm.contains(&(up.m_f - lo.m_f)))
        })
        .collect();

    let outcomes: Vec<(StateLabel, StateLabel, Result<Vec<TransitionAnalysis>>)> = pairs
        .par_iter()
        .map(|&(lo, up)| {
            let run = || -> Result<Vec<TransitionAnalysis>> {
                let sl = slopes_for(&lower_slopes, lo)?;
                let su = slopes_for(&upper_slopes, up)?;
                let diff: Vec<f64> = su.iter().zip(sl).map(|(u, l)| u - l).collect();
                sign_changes(&grid, &diff)
                    .into_iter()
                    .map(|bracket| {
                        let p = refine(&spectrum, lo, up, bracket, opts)?;
                        analyze_point(&spectrum, lo, up, &p, opts)
                    })
                    .collect()
            };
            (lo, up, run())
        })
        .collect();

    let mut analyses = Vec::new();
    let mut failures = Vec::new();
    for (lower, upper, outcome) in outcomes {
        match outcome {
            Ok(found) => analyses.extend(found),
            Err(error) => failures.push(PairFailure { lower, upper, error }),
        }
    }
    if let Some(limit) = filters.max_abs_c2 {
        analyses.retain(|a| a.c2.abs() < limit);
    }
    analyses.sort_by(|x, y| {
        x.c2.abs()
            .total_cmp(&y.c2.abs())
            .then(x.lower.cmp(&y.lower))
            .then(x.upper.cmp(&y.upper))
            .then(x.b0.total_cmp(&y.b0))
    });
    failures.sort_by(|x, y| x.lower.cmp(&y.lower).then(x.upper.cmp(&y.upper)));

    Ok(ScanReport {
        species: species.name.clone(),
        lower_level: species.level(transition.lower).label.clone(),
        upper_level: species.level(transition.upper).label.clone(),
        b_max,
        scan_points: opts.scan_points,
        tracking_points: opts.tracking_points,
        tracking_max: spectrum.b_track_max(),
        lower_model: opts.lower_model,
        analyses,
        failures,
    })
}

fn slopes_for(
    table: &BTreeMap<HalfInt, Result<BTreeMap<StateLabel, Vec<f64>>>>,
    label: StateLabel,
) -> Result<&Vec<f64>> {
    let block = table
        .get(&label.m_f)
        .ok_or_else(|| Error::Input(format!("no block for m_F = {}", label.m_f)))?;
    let block = block.as_ref().map_err(Clone::clone)?;
    block
        .get(&label)
        .ok_or_else(|| Error::Input(format!("no tracked state {label}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let out = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, -2.0, 6.0, 0.0).unwrap();
        assert!((out.root - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn brent_stops_on_value_tolerance() {
        let out = brent(|x| Ok(x - 0.3), 0.0, 1.0, -0.3, 0.7, 0.1).unwrap();
        assert!(out.value.abs() <= 0.1);
    }

    #[test]
    fn sign_changes_include_exact_zeros() {
        let g = [1.0, 2.0, 3.0, 4.0];
        let v = [-1.0, 1.0, 0.0, 2.0];
        assert_eq!(sign_changes(&g, &v), vec![(1.0, 2.0), (3.0, 3.0)]);
    }

    #[test]
    fn scan_grid_excludes_zero() {
        let g = scan_grid(1.0, 4);
        assert_eq!(g, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn e2_rules() {
        let l = |f: i32, m: i32| StateLabel::new(HalfInt::integer(f), HalfInt::integer(m));
        assert!(e2_allowed(l(4, -3), l(3, -1)));
        assert!(e2_allowed(l(4, -3), l(2, -1)));
        assert!(!e2_allowed(l(4, -1), l(1, -1)));
        assert!(!e2_allowed(l(4, 0), l(5, 3)));
    }
}
