mod common;

use clockshift_core::angular::lande_g_f;
use clockshift_core::{wigner3j, wigner6j, HalfInt};
use common::h;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn parity(twice_exponent: i32) -> f64 {
    debug_assert!(twice_exponent % 2 == 0);
    if (twice_exponent / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn all_j() -> impl Iterator<Item = HalfInt> {
    (0..=9).map(h)
}

#[test]
fn three_j_orthogonality_up_to_nine_halves() {
    for j1 in all_j() {
        for j2 in all_j() {
            let j3s: Vec<HalfInt> = HalfInt::coupled_range(j1, j2).collect();
            for &j3 in &j3s {
                for &j3p in &j3s {
                    for m3 in j3.projections() {
                        if !j3p.admits_projection(m3) {
                            continue;
                        }
                        let mut sum = 0.0;
                        for m1 in j1.projections() {
                            let m2 = -m1 - m3;
                            if !j2.admits_projection(m2) {
                                continue;
                            }
                            sum += wigner3j(j1, j2, j3, m1, m2, m3) * wigner3j(j1, j2, j3p, m1, m2, m3);
                        }
                        let expect = if j3 == j3p { 1.0 } else { 0.0 };
                        let got = f64::from(j3.multiplicity()) * sum;
                        assert!((got - expect).abs() < 1e-12, "({j1} {j2} {j3}/{j3p}; m3={m3}): {got}");
                    }
                }
            }
        }
    }
}

#[test]
fn six_j_orthogonality() {
    for a in 0..=5 {
        for b in 0..=5 {
            for d in 0..=5 {
                for e in 0..=5 {
                    let (j1, j2, j4, j5) = (h(a), h(b), h(d), h(e));
                    let j6s: Vec<HalfInt> = HalfInt::coupled_range(j1, j5)
                        .filter(|&x| HalfInt::coupled_range(j4, j2).any(|y| y == x))
                        .collect();
                    let j3s: Vec<HalfInt> = HalfInt::coupled_range(j1, j2)
                        .filter(|&x| HalfInt::coupled_range(j4, j5).any(|y| y == x))
                        .collect();
                    for &j6 in &j6s {
                        for &j6p in &j6s {
                            let sum: f64 = j3s
                                .iter()
                                .map(|&j3| {
                                    f64::from(j3.multiplicity())
                                        * f64::from(j6.multiplicity())
                                        * wigner6j(j1, j2, j3, j4, j5, j6)
                                        * wigner6j(j1, j2, j3, j4, j5, j6p)
                                })
                                .sum();
                            let expect = if j6 == j6p { 1.0 } else { 0.0 };
                            assert!((sum - expect).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}

/// 6j from the contraction of four 3j symbols over all projections.
fn six_j_from_three_j(j: [HalfInt; 6]) -> f64 {
    let [j1, j2, j3, j4, j5, j6] = j;
    let mut sum = 0.0;
    for m1 in j1.projections() {
        for m2 in j2.projections() {
            let m3 = -m1 - m2;
            if !j3.admits_projection(m3) {
                continue;
            }
            for m5 in j5.projections() {
                let m6 = m5 - m1;
                if !j6.admits_projection(m6) {
                    continue;
                }
                let m4 = m6 - m2;
                if !j4.admits_projection(m4) || (-m4 + m5 + m3).twice() != 0 {
                    continue;
                }
                let s: i32 = [(j1, m1), (j2, m2), (j3, m3), (j4, m4), (j5, m5), (j6, m6)]
                    .iter()
                    .map(|(jj, mm)| jj.twice() - mm.twice())
                    .sum();
                sum += parity(s)
                    * wigner3j(j1, j2, j3, -m1, -m2, -m3)
                    * wigner3j(j1, j5, j6, m1, -m5, m6)
                    * wigner3j(j4, j2, j6, m4, m2, -m6)
                    * wigner3j(j4, j5, j3, -m4, m5, m3);
            }
        }
    }
    sum
}

#[test]
fn six_j_agrees_with_contracted_three_j() {
    let cases = [
        [2, 2, 2, 2, 2, 2],
        [7, 7, 2, 3, 3, 7],
        [6, 8, 2, 3, 3, 7],
        [6, 6, 4, 3, 3, 7],
        [8, 6, 4, 3, 3, 7],
        [1, 1, 2, 9, 9, 8],
        [4, 4, 4, 4, 4, 4],
        [5, 3, 4, 1, 3, 4],
    ];
    for c in cases {
        let j = c.map(h);
        let direct = wigner6j(j[0], j[1], j[2], j[3], j[4], j[5]);
        let oracle = six_j_from_three_j(j);
        assert!((direct - oracle).abs() < 1e-13, "{c:?}: {direct} vs {oracle}");
    }
}

fn fact(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn triangle_sq(a: i64, b: i64, c: i64) -> BigRational {
    BigRational::new(
        fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2),
        fact((a + b + c) / 2 + 1),
    )
}

/// Racah's single sum in exact rationals; arguments are twice the angular momenta.
fn racah_six_j(t: [i64; 6]) -> f64 {
    let [a, b, c, d, e, f] = t;
    let triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)];
    for &(x, y, z) in &triads {
        if (x + y + z) % 2 != 0 || z > x + y || z < (x - y).abs() {
            return 0.0;
        }
    }
    let pref = triads
        .iter()
        .fold(BigRational::one(), |acc, &(x, y, z)| acc * triangle_sq(x, y, z));
    let lo = [a + b + c, a + e + f, d + b + f, d + e + c].into_iter().max().unwrap() / 2;
    let hi = [a + b + d + e, a + c + d + f, b + c + e + f].into_iter().min().unwrap() / 2;
    let mut sum = BigRational::zero();
    for k in lo..=hi {
        let den = fact(k - (a + b + c) / 2)
            * fact(k - (a + e + f) / 2)
            * fact(k - (d + b + f) / 2)
            * fact(k - (d + e + c) / 2)
            * fact((a + b + d + e) / 2 - k)
            * fact((a + c + d + f) / 2 - k)
            * fact((b + c + e + f) / 2 - k);
        let term = BigRational::new(fact(k + 1), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let sq = &sum * &sum * pref;
    let magnitude = sq.to_f64().unwrap().sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

#[test]
fn six_j_all_ones_matches_exact_racah_sum() {
    let oracle = racah_six_j([2, 2, 2, 2, 2, 2]);
    assert!((oracle - 1.0 / 6.0).abs() < 1e-15);
    assert!((wigner6j(h(2), h(2), h(2), h(2), h(2), h(2)) - oracle).abs() < 1e-15);
}

proptest! {
    #[test]
    fn six_j_matches_exact_racah_sum(t in prop::array::uniform6(0i64..=9)) {
        let j = t.map(|x| h(x as i32));
        let direct = wigner6j(j[0], j[1], j[2], j[3], j[4], j[5]);
        prop_assert!((direct - racah_six_j(t)).abs() < 1e-13);
    }

    #[test]
    fn three_j_column_permutations(a in 0i32..=9, b in 0i32..=9, pick in 0usize..20, ia in 0usize..10, ib in 0usize..10) {
        let (j1, j2) = (h(a), h(b));
        let j3s: Vec<HalfInt> = HalfInt::coupled_range(j1, j2).collect();
        let j3 = j3s[pick % j3s.len()];
        let m1s: Vec<HalfInt> = j1.projections().collect();
        let m2s: Vec<HalfInt> = j2.projections().collect();
        let (m1, m2) = (m1s[ia % m1s.len()], m2s[ib % m2s.len()]);
        let m3 = -m1 - m2;
        let base = wigner3j(j1, j2, j3, m1, m2, m3);
        let odd = parity(j1.twice() + j2.twice() + j3.twice());
        prop_assert!((wigner3j(j2, j3, j1, m2, m3, m1) - base).abs() < 1e-14);
        prop_assert!((wigner3j(j3, j1, j2, m3, m1, m2) - base).abs() < 1e-14);
        prop_assert!((wigner3j(j2, j1, j3, m2, m1, m3) - odd * base).abs() < 1e-14);
        prop_assert!((wigner3j(j1, j3, j2, m1, m3, m2) - odd * base).abs() < 1e-14);
        prop_assert!((wigner3j(j1, j2, j3, -m1, -m2, -m3) - odd * base).abs() < 1e-14);
    }

    #[test]
    fn six_j_tetrahedral_symmetry(t in prop::array::uniform6(0i32..=9)) {
        let [a, b, c, d, e, f] = t.map(h);
        let base = wigner6j(a, b, c, d, e, f);
        for v in [
            wigner6j(b, a, c, e, d, f),
            wigner6j(a, c, b, d, f, e),
            wigner6j(c, b, a, f, e, d),
            wigner6j(d, e, c, a, b, f),
            wigner6j(a, e, f, d, b, c),
        ] {
            prop_assert!((v - base).abs() < 1e-14);
        }
    }
}

#[test]
fn selection_rule_zeros_are_exact() {
    let zero = 0.0f64.to_bits();
    assert_eq!(wigner3j(h(6), h(4), h(6), h(-4), h(0), h(4)).to_bits(), zero);
    assert_eq!(wigner3j(h(2), h(2), h(2), h(2), h(2), h(2)).to_bits(), zero);
    assert_eq!(wigner6j(h(2), h(4), h(8), h(2), h(2), h(2)).to_bits(), zero);
    // F = F′ = 3 of a J = 3/2, I = 7/2 level
    assert_eq!(wigner6j(h(6), h(6), h(2), h(3), h(3), h(7)).to_bits(), zero);
}

#[test]
fn rank_one_three_j_closed_form() {
    for tj in 1..=9 {
        let j = h(tj);
        for m in j.projections() {
            let (jv, mv) = (j.value(), m.value());
            let expect = parity(tj - m.twice()) * mv / (jv * (jv + 1.0) * (2.0 * jv + 1.0)).sqrt();
            let got = wigner3j(j, HalfInt::ONE, j, -m, HalfInt::ZERO, m);
            assert!((got - expect).abs() < 1e-15, "j={j} m={m}");
        }
    }
    assert!((wigner3j(h(1), h(2), h(1), h(-1), h(0), h(1)) - 1.0 / 6f64.sqrt()).abs() < 1e-15);
}

#[test]
fn lande_special_cases() {
    let gi = 2.0498e-4;
    assert!((lande_g_f(0.8, gi, h(7), h(3), h(6)) - gi).abs() < 1e-18);
    assert_eq!(lande_g_f(7.0 / 6.0, 0.3, h(0), h(4), h(4)), 7.0 / 6.0);
    assert!((lande_g_f(2.0, 0.0, h(1), h(1), h(2)) - 1.0).abs() < 1e-15);
    assert_eq!(lande_g_f(2.0, 1e-4, h(1), h(1), h(0)), 0.0);
}
