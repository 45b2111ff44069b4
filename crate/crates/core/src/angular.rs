//! Wigner 3j and 6j symbols on exact half-integer arguments.
//!
//! Racah sums are accumulated as exact rationals; the only floating-point
//! step is the final square root, so selection-rule zeros are exactly `0.0`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// An angular momentum quantum number stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);
    pub const TWO: HalfInt = HalfInt(4);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// j(j+1)
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }

    /// 2j+1
    pub fn multiplicity(self) -> i32 {
        self.0 + 1
    }

    /// Whether (j, m) is a valid magnitude/projection pair.
    pub fn admits_projection(self, m: HalfInt) -> bool {
        self.0 >= 0 && m.0.abs() <= self.0 && (self.0 - m.0) % 2 == 0
    }

    /// Projections j, j-1, ..., -j in ascending order.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (0..=j).map(move |k| HalfInt(-j + 2 * k))
    }

    /// The values |a-b|, |a-b|+1, ..., a+b.
    pub fn coupled_range(a: HalfInt, b: HalfInt) -> impl Iterator<Item = HalfInt> {
        let lo = (a.0 - b.0).abs();
        let hi = a.0 + b.0;
        (lo..=hi).step_by(2).map(HalfInt)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `3`, `-2`, `7/2` or `-1/2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Input(format!("`{s}` is not an integer or half-integer"));
        match s.split_once('/') {
            Some((num, "2")) => {
                let n: i32 = num.trim().parse().map_err(|_| bad())?;
                if n % 2 == 0 {
                    return Err(bad());
                }
                Ok(HalfInt(n))
            }
            Some(_) => Err(bad()),
            None => {
                let n: i32 = s.parse().map_err(|_| bad())?;
                Ok(HalfInt(2 * n))
            }
        }
    }
}

fn triangle(a: i32, b: i32, c: i32) -> bool {
    a >= 0 && b >= 0 && c >= 0 && c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Δ(abc) = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!, arguments as twice values.
fn delta(a: i32, b: i32, c: i32) -> BigRational {
    let num = factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2);
    BigRational::new(num, factorial((a + b + c) / 2 + 1))
}

/// sign(sum) * sqrt(sum^2 * radicand)
fn signed_root(sum: &BigRational, radicand: &BigRational) -> f64 {
    if sum.is_zero() {
        return 0.0;
    }
    let square = sum * sum * radicand;
    let magnitude = square.to_f64().unwrap_or(f64::NAN).sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

fn cache_3j() -> &'static RwLock<HashMap<[i32; 6], f64>> {
    static CACHE: OnceLock<RwLock<HashMap<[i32; 6], f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cache_6j() -> &'static RwLock<HashMap<[i32; 6], f64>> {
    static CACHE: OnceLock<RwLock<HashMap<[i32; 6], f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3).
///
/// Returns exactly zero whenever a selection rule fails.
pub fn wigner3j(j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> f64 {
    let key = [j1.0, j2.0, j3.0, m1.0, m2.0, m3.0];
    if m1.0 + m2.0 + m3.0 != 0
        || !j1.admits_projection(m1)
        || !j2.admits_projection(m2)
        || !j3.admits_projection(m3)
        || !triangle(j1.0, j2.0, j3.0)
    {
        return 0.0;
    }
    if let Some(&v) = cache_3j().read().expect("3j cache poisoned").get(&key) {
        return v;
    }
    let v = racah_3j(key);
    cache_3j().write().expect("3j cache poisoned").insert(key, v);
    v
}

fn racah_3j([j1, j2, j3, m1, m2, m3]: [i32; 6]) -> f64 {
    // all half-sums below are integers once the selection rules hold
    let mut radicand = delta(j1, j2, j3);
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        radicand *= BigRational::from_integer(factorial((j + m) / 2) * factorial((j - m) / 2));
    }
    let k_min = 0.max((j2 - j3 - m1) / 2).max((j1 - j3 + m2) / 2);
    let k_max = ((j1 + j2 - j3) / 2).min((j1 - m1) / 2).min((j2 + m2) / 2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial((j3 - j2 + m1) / 2 + k)
            * factorial((j3 - j1 - m2) / 2 + k)
            * factorial((j1 + j2 - j3) / 2 - k)
            * factorial((j1 - m1) / 2 - k)
            * factorial((j2 + m2) / 2 - k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if ((j1 - j2 - m3) / 2).rem_euclid(2) == 1 {
        sum = -sum;
    }
    signed_root(&sum, &radicand)
}

/// Canonical representative of a 6j symbol under its 24-element symmetry group.
fn canonical_6j(cols: [(i32, i32); 3]) -> [i32; 6] {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    // swapping upper and lower entries in two columns at a time
    const FLIPS: [[bool; 3]; 4] = [
        [false, false, false],
        [true, true, false],
        [true, false, true],
        [false, true, true],
    ];
    let mut best: Option<[i32; 6]> = None;
    for p in PERMS {
        for flip in FLIPS {
            let mut key = [0; 6];
            for (slot, &c) in p.iter().enumerate() {
                let (u, l) = if flip[slot] { (cols[c].1, cols[c].0) } else { cols[c] };
                key[slot] = u;
                key[slot + 3] = l;
            }
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    best.expect("symmetry group is nonempty")
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.
///
/// Returns exactly zero when any of the four triads fails the triangle rule.
pub fn wigner6j(j1: HalfInt, j2: HalfInt, j3: HalfInt, j4: HalfInt, j5: HalfInt, j6: HalfInt) -> f64 {
    let (a, b, c, d, e, f) = (j1.0, j2.0, j3.0, j4.0, j5.0, j6.0);
    if !(triangle(a, b, c) && triangle(a, e, f) && triangle(d, b, f) && triangle(d, e, c)) {
        return 0.0;
    }
    let key = canonical_6j([(a, d), (b, e), (c, f)]);
    if let Some(&v) = cache_6j().read().expect("6j cache poisoned").get(&key) {
        return v;
    }
    let v = racah_6j(key);
    cache_6j().write().expect("6j cache poisoned").insert(key, v);
    v
}

fn racah_6j([a, b, c, d, e, f]: [i32; 6]) -> f64 {
    let radicand = delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c);
    let triads = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let quads = [(a + b + d + e) / 2, (b + c + e + f) / 2, (c + a + f + d) / 2];
    let t_min = *triads.iter().max().expect("four triads");
    let t_max = *quads.iter().min().expect("three quads");
    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let mut den = BigInt::one();
        for x in triads {
            den *= factorial(t - x);
        }
        for y in quads {
            den *= factorial(y - t);
        }
        let term = BigRational::new(factorial(t + 1), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    signed_root(&sum, &radicand)
}

/// Drops every cached 3j and 6j value.
pub fn clear_symbol_caches() {
    cache_3j().write().expect("3j cache poisoned").clear();
    cache_6j().write().expect("6j cache poisoned").clear();
}

/// Low-field Landé factor of the hyperfine level F built from I and J.
pub fn lande_g_f(g_j: f64, g_i: f64, i: HalfInt, j: HalfInt, f: HalfInt) -> f64 {
    if f.twice() == 0 {
        return 0.0;
    }
    let (ff, jj, ii) = (f.casimir(), j.casimir(), i.casimir());
    g_j * (ff + jj - ii) / (2.0 * ff) + g_i * (ff + ii - jj) / (2.0 * ff)
}

/// (-1)^n for an exponent given as twice its (integral) value.
pub(crate) fn parity_sign(twice_exponent: i32) -> f64 {
    debug_assert!(twice_exponent % 2 == 0, "phase exponent must be an integer");
    if (twice_exponent / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}
