//! Local images of the 2-descent map `E(Q_v)/2E(Q_v) -> (Q_v*/Q_v*^2)^2`.
//!
//! A class in `Q_l*/Q_l*^2` is encoded as a small bit vector: valuation
//! parity plus the unit class (Legendre symbol for odd `l`, residue mod 8
//! for `l = 2`), sign for the real place. Pairs pack two such codes. The
//! local image is a subgroup of known order (`4` for odd `l`, `8` at `2`,
//! `2` at the real place), so sampling points until the span reaches that
//! order determines it exactly. Whether a sampled `x` lifts to a point is a
//! Hensel test: `f(x)` is an `l`-adic square iff its valuation is even and
//! its unit part is a square mod `l` (mod 8 at `l = 2`).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::{int, rat, Rational};
use crate::curve::Curve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Prime(i64),
}

impl Place {
    /// Order of `E(Q_v)/2E(Q_v)` for a curve with all 2-torsion rational
    /// and real.
    pub fn image_order(self) -> usize {
        match self {
            Place::Real => 2,
            Place::Prime(2) => 8,
            Place::Prime(_) => 4,
        }
    }

    fn bits(self) -> u32 {
        match self {
            Place::Real => 1,
            Place::Prime(2) => 3,
            Place::Prime(_) => 2,
        }
    }
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Real => f.write_str("inf"),
            Place::Prime(l) => write!(f, "{l}"),
        }
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// `(valuation, numerator-unit, denominator-unit)` at `l`.
fn split_valuation(v: &BigInt, l: &BigInt) -> (i64, BigInt) {
    let mut n = v.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(l);
        if !r.is_zero() {
            return (k, n);
        }
        n = q;
        k += 1;
    }
}

/// Square class of a nonzero rational at a place, as a bit code.
pub fn local_class(r: &Rational, place: Place) -> u32 {
    assert!(!r.is_zero(), "square class of zero");
    match place {
        Place::Real => u32::from(r.is_negative()),
        Place::Prime(l) => {
            let lb = int(l);
            let (vn, un) = split_valuation(r.numer(), &lb);
            let (vd, ud) = split_valuation(r.denom(), &lb);
            let parity = ((vn - vd).rem_euclid(2)) as u32;
            if l == 2 {
                let m = |x: &BigInt| x.mod_floor(&int(8)).to_u64().unwrap();
                // units mod 8 form a group in which every element is its own inverse
                let u = (m(&un) * m(&ud)) % 8;
                let minus = u32::from(u % 4 == 3);
                let five = u32::from(u == 3 || u == 5);
                parity | minus << 1 | five << 2
            } else {
                let lu = l as u64;
                let m = |x: &BigInt| x.mod_floor(&lb).to_u64().unwrap();
                let u = (m(&un) as u128 * m(&ud) as u128 % lu as u128) as u64;
                let nonresidue = u32::from(pow_mod(u, (lu - 1) / 2, lu) != 1);
                parity | nonresidue << 1
            }
        }
    }
}

pub fn pair_code(d1: &Rational, d2: &Rational, place: Place) -> u32 {
    local_class(d1, place) | local_class(d2, place) << place.bits()
}

fn span_insert(span: &mut BTreeSet<u32>, g: u32) {
    if span.contains(&g) {
        return;
    }
    let shifted: Vec<u32> = span.iter().map(|s| s ^ g).collect();
    span.extend(shifted);
}

/// The local image at one place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalImage {
    pub place: Place,
    pub codes: BTreeSet<u32>,
    /// The span reached the known order; otherwise the place must not be
    /// used to reject classes.
    pub complete: bool,
}

impl LocalImage {
    pub fn contains(&self, d1: &Rational, d2: &Rational) -> bool {
        !self.complete || self.codes.contains(&pair_code(d1, d2, self.place))
    }
}

/// Kummer pair of an affine non-2-torsion `x`, or `None` if `x` does not
/// give a local point.
fn sample(curve: &Curve, x: &Rational, place: Place) -> Option<u32> {
    let [e1, e2, e3] = curve.roots().map(|e| rat(e, 1));
    let a = x - &e1;
    let b = x - &e2;
    let c = x - &e3;
    if a.is_zero() || b.is_zero() || c.is_zero() {
        return None;
    }
    let f = &a * &b * &c;
    if local_class(&f, place) != 0 {
        return None;
    }
    Some(pair_code(&a, &b, place))
}

/// Computes the image of `E(Q_v)` for `place`, seeded with the images of
/// the 2-torsion points (`torsion_pairs` as rational pairs).
pub fn local_image(curve: &Curve, place: Place, torsion_pairs: &[(Rational, Rational)]) -> LocalImage {
    let target = place.image_order();
    let mut span = BTreeSet::from([0u32]);
    for (d1, d2) in torsion_pairs {
        span_insert(&mut span, pair_code(d1, d2, place));
    }
    let done = |s: &BTreeSet<u32>| s.len() >= target;
    if !done(&span) {
        match place {
            Place::Real => {
                // one point on each real component
                let [r1, r2, _] = {
                    let mut r = curve.roots();
                    r.sort_unstable();
                    r
                };
                let mid = rat(r1 + r2, 2);
                for x in [mid, rat(r1.abs() + r2.abs() + 1000, 1)] {
                    if let Some(code) = sample(curve, &x, place) {
                        span_insert(&mut span, code);
                    }
                }
            }
            Place::Prime(l) => sample_prime(curve, l, &mut span, target),
        }
    }
    LocalImage { place, complete: done(&span), codes: span }
}

fn sample_prime(curve: &Curve, l: i64, span: &mut BTreeSet<u32>, target: usize) {
    let roots = curve.roots();
    let t_max = if l == 2 { 64 } else { 2 * l + 2 };
    for depth in 0..8u32 {
        let lp = int(l).pow(depth);
        for t in 1..=t_max {
            for sign in [1, -1] {
                let t = int(sign * t);
                let mut xs: Vec<Rational> =
                    roots.iter().map(|&e| Rational::from_integer(int(e) + &t * &lp)).collect();
                xs.push(Rational::new(t.clone(), &lp * &lp));
                for x in xs {
                    if let Some(code) = sample(curve, &x, Place::Prime(l)) {
                        span_insert(span, code);
                        if span.len() >= target {
                            return;
                        }
                    }
                }
            }
        }
    }
}
