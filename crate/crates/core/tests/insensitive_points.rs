mod common;

use clockshift_core::search::{analyze_point, e2_allowed};
use clockshift_core::{
    find_insensitive_points, quadratic_coefficient, scan_species, Error, IonSpecies, LowerStateModel, ScanFilters,
    SearchOptions, StateLabel, TransitionSpectrum,
};
use common::{breit_rabi, breit_rabi_curvature, h, shipped};
use proptest::prelude::*;

const TWO_DOUBLETS: &str = r#"
[species]
name = "doublets"
twice_I = 1
g_I = -1.5e-3
charge_number = 1
mass_amu = 137.0

[[levels]]
label = "S1/2"
twice_J = 1
g_J = 2.0
A_MHz = 400.0
B_MHz = 0.0

[[levels]]
label = "P1/2"
twice_J = 1
g_J = 0.6666666666666666
A_MHz = 80.0
B_MHz = 0.0

[[transitions]]
lower = "S1/2"
upper = "P1/2"
frequency_THz = 607.4
"#;

fn label(f2: i32, m2: i32) -> StateLabel {
    StateLabel::new(h(f2), h(m2))
}

#[test]
fn curvature_matches_closed_form_for_doublets() {
    let sp = IonSpecies::from_toml_str(TWO_DOUBLETS).unwrap();
    let tr = &sp.transitions[0];
    let opts = SearchOptions::default();
    let report = scan_species(&sp, tr, 0.03, &ScanFilters::default(), &opts).unwrap();
    assert!(report.failures.is_empty());
    assert!(!report.analyses.is_empty(), "only {} points", report.analyses.len());
    let i = sp.nuclear_spin.value();
    let top = sp.nuclear_spin.twice() + 1;
    let (s, p) = (sp.level(tr.lower), sp.level(tr.upper));
    for a in &report.analyses {
        let curv = |lvl: &clockshift_core::FineStructureLevel, l: StateLabel| {
            breit_rabi_curvature(lvl.hyperfine_a, lvl.g_j, sp.g_i, i, l.m_f.value(), l.f.twice() == top, a.b0)
        };
        let expect = 0.5 * (curv(p, a.upper) - curv(s, a.lower));
        assert!(
            (a.alpha_z - expect).abs() <= 1e-6 * expect.abs(),
            "{} -> {} at {} T: {} vs {}",
            a.lower,
            a.upper,
            a.b0,
            a.alpha_z,
            expect
        );
        let nu = |b: f64| {
            breit_rabi(p.hyperfine_a, p.g_j, sp.g_i, i, a.upper.m_f.value(), a.upper.f.twice() == top, b)
                - breit_rabi(s.hyperfine_a, s.g_j, sp.g_i, i, a.lower.m_f.value(), a.lower.f.twice() == top, b)
        };
        let d = 1e-6;
        let closed_slope = (nu(a.b0 + d) - nu(a.b0 - d)) / (2.0 * d);
        assert!(closed_slope.abs() < 2.0 * a.alpha_z.abs() * d + 1e2);
        assert_eq!(a.c2, 0.0);
        let step = 1e-5;
        let rise = spec_rise(&sp, a, step);
        assert!((rise - a.alpha_z * step * step).abs() <= 1e-2 * (a.alpha_z * step * step).abs());
    }
}

fn spec_rise(sp: &IonSpecies, a: &clockshift_core::TransitionAnalysis, step: f64) -> f64 {
    let spec = TransitionSpectrum::new(sp, &sp.transitions[0], 2.0 * a.b0).unwrap();
    spec.transition_frequency(a.lower, a.upper, a.b0 + step).unwrap()
        - spec.transition_frequency(a.lower, a.upper, a.b0).unwrap()
}

#[test]
fn roots_are_certified_sign_changes() {
    let sp = shipped("43Ca+");
    let tr = &sp.transitions[0];
    let spec = TransitionSpectrum::new(&sp, tr, 0.003).unwrap();
    let opts = SearchOptions::default();
    let (lo, up) = (label(8, -6), label(10, -6));
    let points = find_insensitive_points(&spec, lo, up, 0.003, &opts).unwrap();
    assert_eq!(points.len(), 1);
    let p = points[0];
    assert!(spec.dnu_db(lo, up, p.b0).unwrap().abs() <= opts.slope_tolerance || p.bracket_width <= 1e-12);
    let w = 1e-9;
    let left = spec.dnu_db(lo, up, p.b0 - w).unwrap();
    let right = spec.dnu_db(lo, up, p.b0 + w).unwrap();
    assert!(left * right < 0.0, "{left} {right}");
    let a = analyze_point(&spec, lo, up, &p, &opts).unwrap();
    assert!((a.b0 * 1e3 - 1.2851).abs() < 1e-3);
    assert!(a.min_gap_adjacent_mf > 1e6);
}

#[test]
fn quadratic_coefficient_matches_independent_fit() {
    let sp = shipped("87Sr+");
    let tr = &sp.transitions[0];
    let spec = TransitionSpectrum::new(&sp, tr, 0.02).unwrap();
    let (lo, up) = (label(8, -6), label(6, -2));
    let p = find_insensitive_points(&spec, lo, up, 0.02, &SearchOptions::default()).unwrap()[0];
    let alpha = quadratic_coefficient(&spec, lo, up, p.b0, 1e-5).unwrap();
    // least-squares parabola through eleven samples within ±20 µT
    let pts: Vec<(f64, f64)> = (-5..=5)
        .map(|k| {
            let x = k as f64 * 4e-6;
            (x, spec.transition_frequency(lo, up, p.b0 + x).unwrap())
        })
        .collect();
    let n = pts.len() as f64;
    let (sx2, sx4) = pts.iter().fold((0.0, 0.0), |(a, b), (x, _)| (a + x * x, b + x.powi(4)));
    let (sy, sx2y) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + y, b + x * x * y));
    let c = (n * sx2y - sx2 * sy) / (n * sx4 - sx2 * sx2);
    assert!((alpha - c).abs() <= 1e-4 * c.abs(), "{alpha} vs {c}");
}

#[test]
fn step_shrinks_then_underflows() {
    let sp = shipped("43Ca+");
    let tr = &sp.transitions[0];
    let spec = TransitionSpectrum::new(&sp, tr, 1e-3).unwrap();
    let (lo, up) = (label(8, 0), label(6, -4));
    assert!(quadratic_coefficient(&spec, lo, up, 5e-6, 1e-5).unwrap().is_finite());
    assert!(matches!(
        quadratic_coefficient(&spec, lo, up, 1e-9, 1e-5),
        Err(Error::StepUnderflow { .. })
    ));
}

#[test]
fn search_range_must_be_tracked() {
    let sp = shipped("43Ca+");
    let spec = TransitionSpectrum::new(&sp, &sp.transitions[0], 1e-3).unwrap();
    let err = find_insensitive_points(&spec, label(8, 0), label(6, -4), 1.0, &SearchOptions::default());
    assert!(matches!(err, Err(Error::Input(_))));
}

#[test]
fn frozen_lower_state_has_constant_slope() {
    let sp = shipped("43Ca+");
    let spec = TransitionSpectrum::new(&sp, &sp.transitions[0], 0.003)
        .unwrap()
        .with_lower_model(LowerStateModel::FrozenLinear);
    let s1 = spec.lower_state(label(8, -6), 1e-4).unwrap();
    let s2 = spec.lower_state(label(8, -6), 2.9e-3).unwrap();
    assert_eq!(s1.slope, s2.slope);
    assert!((s1.slope - 0.125 * (2.0 + 7.0 * sp.g_i) * -3.0 * common::BOHR).abs() < 1e-3);
}

#[test]
fn scan_is_sorted_and_e2_filtered() {
    let sp = shipped("43Ca+");
    let r = scan_species(&sp, &sp.transitions[0], 0.002, &ScanFilters::default(), &SearchOptions::default()).unwrap();
    assert!(r.failures.is_empty());
    assert!(r.analyses.windows(2).all(|w| w[0].c2.abs() <= w[1].c2.abs()));
    assert!(r.analyses.iter().all(|a| e2_allowed(a.lower, a.upper)));
    assert!(r.analyses.iter().all(|a| a.b0 > 0.0 && a.b0 <= 0.002));
    let filtered = scan_species(
        &sp,
        &sp.transitions[0],
        0.002,
        &ScanFilters { max_abs_c2: Some(1e-3), delta_m: None },
        &SearchOptions::default(),
    )
    .unwrap();
    assert_eq!(filtered.analyses.len(), 1);
    assert_eq!((filtered.analyses[0].lower, filtered.analyses[0].upper), (label(8, -6), label(10, -6)));
}

#[test]
fn nuclear_spin_zero_uses_bare_j_labels() {
    let text = r#"
[species]
name = "even"
twice_I = 0
g_I = 0.0
charge_number = 1
mass_amu = 40.0

[[levels]]
label = "S1/2"
twice_J = 1
g_J = 2.0
A_MHz = 0.0
B_MHz = 0.0

[[levels]]
label = "D3/2"
twice_J = 3
g_J = 0.8
A_MHz = 0.0
B_MHz = 0.0

[[transitions]]
lower = "S1/2"
upper = "D3/2"
frequency_THz = 409.2
"#;
    let sp = IonSpecies::from_toml_str(text).unwrap();
    let r = scan_species(&sp, &sp.transitions[0], 0.01, &ScanFilters::default(), &SearchOptions::default()).unwrap();
    assert!(r.analyses.is_empty());
    assert!(r.failures.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn slope_matches_central_difference(pick in 0usize..1000, frac in 0.05f64..0.95) {
        let sp = shipped("87Sr+");
        let tr = &sp.transitions[0];
        let spec = TransitionSpectrum::new(&sp, tr, 0.02).unwrap();
        let los = spec.lower.labels();
        let ups = spec.upper.labels();
        let (lo, up) = (los[pick % los.len()], ups[(pick / los.len()) % ups.len()]);
        let b = 0.02 * frac;
        let d = 1e-6;
        let fd = (spec.transition_frequency(lo, up, b + d).unwrap() - spec.transition_frequency(lo, up, b - d).unwrap()) / (2.0 * d);
        let hf = spec.dnu_db(lo, up, b).unwrap();
        prop_assert!((hf - fd).abs() <= 1e-6 * hf.abs().max(1e8), "{lo}->{up} at {b}: {hf} vs {fd}");
    }
}
