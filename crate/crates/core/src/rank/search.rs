//! Bounded-height search for rational points.
//!
//! Every affine rational point has `x = m/e^2`, `y = n/e^3` with
//! `gcd(m, e) = 1`, so the test is whether
//! `(m - e1 e^2)(m - e2 e^2)(m - e3 e^2)` is a perfect square.

use num_bigint::BigInt;
use num_integer::Integer as _;
use rayon::prelude::*;

use crate::arith::{integer_sqrt, sqrt_i128, Integer, Rational};
use crate::curve::{naive_height, Curve, Point, QPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    All,
    NegativeX,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoundPoint {
    /// Representative with `y >= 0`.
    pub point: QPoint,
    pub height: Integer,
    pub torsion: bool,
}

/// `n` with `n^2 = (m - e1 e^2)(m - e2 e^2)(m - e3 e^2)`, if it exists.
fn y_numerator(roots: &[i64; 3], m: i64, e2: i64) -> Option<BigInt> {
    let f = |r: i64| (m as i128) - (r as i128) * (e2 as i128);
    let prod = f(roots[0])
        .checked_mul(f(roots[1]))
        .and_then(|v| v.checked_mul(f(roots[2])));
    match prod {
        Some(v) => sqrt_i128(v).map(BigInt::from),
        None => {
            let big = roots
                .iter()
                .fold(BigInt::from(1), |acc, &r| acc * BigInt::from(f(r)));
            if big < BigInt::from(0) {
                None
            } else {
                integer_sqrt(&big).ok().flatten()
            }
        }
    }
}

/// Candidate ranges of `m` for a fixed denominator `e^2`, where the cubic is
/// nonnegative, clipped to `|m| <= bound`.
fn m_ranges(curve: &Curve, e2: i64, bound: i64, region: Region) -> Vec<(i64, i64)> {
    let mut r = curve.roots();
    r.sort_unstable();
    let upper_end = match region {
        Region::All => bound,
        Region::NegativeX => -1,
    };
    let ranges = [(r[0] * e2, r[1] * e2), (r[2] * e2, upper_end)];
    ranges
        .into_iter()
        .map(|(lo, hi)| (lo.max(-bound), hi.min(bound).min(upper_end)))
        .filter(|(lo, hi)| lo <= hi)
        .collect()
}

fn search_denominator(curve: &Curve, e: i64, bound: i64, region: Region) -> Vec<FoundPoint> {
    let e2 = e * e;
    let roots = curve.roots();
    let mut out = Vec::new();
    for (lo, hi) in m_ranges(curve, e2, bound, region) {
        for m in lo..=hi {
            if m.gcd(&e) != 1 {
                continue;
            }
            if let Some(n) = y_numerator(&roots, m, e2) {
                let x = Rational::new(m.into(), e2.into());
                let y = Rational::new(n, (e2 * e).into());
                let torsion = e == 1 && roots.contains(&m);
                let point = Point::affine(x, y);
                let height = naive_height(&point).expect("affine");
                out.push(FoundPoint { point, height, torsion });
            }
        }
    }
    out
}

fn sort_points(points: &mut [FoundPoint]) {
    points.sort_by(|a, b| {
        a.height
            .cmp(&b.height)
            .then_with(|| a.point.x().cmp(&b.point.x()))
            .then_with(|| a.point.y().cmp(&b.point.y()))
    });
}

fn with_identity(mut points: Vec<FoundPoint>, region: Region) -> Vec<FoundPoint> {
    sort_points(&mut points);
    if region == Region::All {
        points.insert(0, FoundPoint { point: Point::Infinity, height: Integer::from(1), torsion: true });
    }
    points
}

/// All points with naive height at most `height_bound`, one per `+-y` pair.
/// The identity comes first (for [`Region::All`]), then affine points sorted
/// by height, `x`, `y`.
pub fn point_search(curve: &Curve, height_bound: u64, region: Region) -> Vec<FoundPoint> {
    let bound = height_bound as i64;
    let max_e = (height_bound as f64).sqrt() as i64 + 1;
    let out: Vec<FoundPoint> = (1..=max_e)
        .filter(|e| e * e <= bound)
        .flat_map(|e| search_denominator(curve, e, bound, region))
        .collect();
    with_identity(out, region)
}

/// Same result as [`point_search`], fanned out over denominators on the
/// current rayon pool.
pub fn point_search_par(curve: &Curve, height_bound: u64, region: Region) -> Vec<FoundPoint> {
    let bound = height_bound as i64;
    let max_e = (height_bound as f64).sqrt() as i64 + 1;
    let out: Vec<FoundPoint> = (1..=max_e)
        .into_par_iter()
        .filter(|e| e * e <= bound)
        .flat_map_iter(|e| search_denominator(curve, e, bound, region))
        .collect();
    with_identity(out, region)
}
