//! Torsion subgroups over Q and over Q(i).
//!
//! Over Q the candidates come from Lutz-Nagell (`y = 0` or `y | 2pq`), each
//! checked against the order bound 12. Over Q(i) an order-4 point exists iff
//! some 2-torsion point halves, and odd torsion is ruled out by reducing at
//! primes of Q(i) above odd good `l`: split `l` give residue field `F_l`,
//! inert `l` give `F_{l^2}`.

use num_integer::Integer as _;
use serde::Serialize;

use crate::arith::{is_prime_u64, is_square_in_gauss, rat};
use crate::curve::{Curve, Point, QPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldLabel {
    Q,
    K,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionCount {
    pub prime: u64,
    /// 1 for `F_l`, 2 for `F_{l^2}`.
    pub residue_degree: u32,
    pub order: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionReport {
    pub curve: Curve,
    pub field: FieldLabel,
    pub points: Vec<QPoint>,
    /// Cyclic factor orders, e.g. `[2, 2]`.
    pub structure: Vec<u64>,
    /// Whether the structure is proved rather than a lower bound.
    pub proven: bool,
    pub reductions: Vec<ReductionCount>,
    pub reduction_gcd: u64,
    /// For each 2-torsion point, whether it lies in `2E(F)`.
    pub halvable_two_torsion: Vec<bool>,
    /// Integral points tested by Lutz-Nagell (Q only).
    pub lutz_nagell_checked: usize,
}

/// `#E(F_l)` for an odd prime `l` of good reduction.
pub fn count_points_fp(curve: &Curve, l: u64) -> u64 {
    let li = l as i64;
    let mut is_sq = vec![false; l as usize];
    for y in 0..l {
        is_sq[(y * y % l) as usize] = true;
    }
    let [_, e2, e3] = curve.roots().map(|e| e.rem_euclid(li));
    let mut count = 1u64;
    for x in 0..li {
        let v = (x as i128 * (x - e2) as i128 * (x - e3) as i128).rem_euclid(li as i128) as usize;
        count += match v {
            0 => 1,
            v if is_sq[v] => 2,
            _ => 0,
        };
    }
    count
}

/// `#E(F_{l^2})` from `#E(F_l)`.
pub fn count_points_fp2(curve: &Curve, l: u64) -> u64 {
    let trace = (l + 1) as i64 - count_points_fp(curve, l) as i64;
    let l = l as i64;
    (l * l + 1 - (trace * trace - 2 * l)) as u64
}

fn good_odd_primes(curve: &Curve) -> impl Iterator<Item = u64> + '_ {
    let (p, q) = (curve.pair.p() as u64, curve.pair.q() as u64);
    (3u64..).filter(move |&l| is_prime_u64(l) && l != p && l != q)
}

/// Whether each 2-torsion point `(e_i, 0)` is in `2E(Q(i))`: both
/// `e_i - e_j` must be squares in Q(i).
pub fn halvable_over_k(curve: &Curve) -> [bool; 3] {
    let e = curve.roots();
    std::array::from_fn(|i| {
        (0..3).filter(|&j| j != i).all(|j| is_square_in_gauss(&rat(e[i] - e[j], 1)))
    })
}

fn halvable_over_q(curve: &Curve) -> [bool; 3] {
    let e = curve.roots();
    std::array::from_fn(|i| {
        (0..3)
            .filter(|&j| j != i)
            .all(|j| crate::arith::is_square_rational(&rat(e[i] - e[j], 1)).is_some())
    })
}

fn order_at_most_12(curve: &Curve, pt: &QPoint) -> Option<u64> {
    let mut acc = pt.clone();
    for n in 1..=12 {
        if acc.is_infinity() {
            return Some(n);
        }
        acc = curve.add_unchecked(&acc, pt);
    }
    None
}

/// Integral points with `y = 0` or `y | 2pq`, the Lutz-Nagell candidates.
fn lutz_nagell_points(curve: &Curve) -> Vec<QPoint> {
    let (p, q) = (curve.pair.p(), curve.pair.q());
    let mut ys = vec![0i64];
    for a in 0..=1 {
        for b in 0..=1 {
            for c in 0..=1 {
                ys.push(2i64.pow(a) * p.pow(b) * q.pow(c));
            }
        }
    }
    let a2 = curve.a2() as i128;
    let a4 = curve.a4() as i128;
    let mut out = Vec::new();
    for y in ys {
        let y2 = (y as i128) * (y as i128);
        // integer roots of x^3 + a2 x^2 + a4 x - y^2 divide y^2 (or any x when y = 0)
        let candidates: Vec<i128> = if y == 0 {
            curve.roots().iter().map(|&e| e as i128).collect()
        } else {
            divisors_of_square(y, p, q).into_iter().flat_map(|d| [d, -d]).collect()
        };
        for x in candidates {
            if x * x * x + a2 * x * x + a4 * x == y2 {
                out.push(QPoint::from_ints(x as i64, y));
                if y != 0 {
                    out.push(QPoint::from_ints(x as i64, -y));
                }
            }
        }
    }
    out.sort_by(|a, b| a.x().cmp(&b.x()).then_with(|| a.y().cmp(&b.y())));
    out.dedup();
    out
}

fn divisors_of_square(y: i64, p: i64, q: i64) -> Vec<i128> {
    let mut rest = y;
    let mut exps = Vec::new();
    for prime in [2, p, q] {
        let mut e = 0;
        while rest % prime == 0 {
            rest /= prime;
            e += 2;
        }
        exps.push((prime as i128, e));
    }
    let mut divs = vec![1i128];
    for (prime, e) in exps {
        let mut next = Vec::new();
        for d in &divs {
            let mut pw = 1i128;
            for _ in 0..=e {
                next.push(d * pw);
                pw *= prime;
            }
        }
        divs = next;
    }
    divs
}

fn structure_of(points: &[QPoint]) -> Vec<u64> {
    match points.len() {
        1 => vec![],
        2 => vec![2],
        4 => vec![2, 2],
        n => vec![n as u64],
    }
}

fn identity_first(mut affine: Vec<QPoint>) -> Vec<QPoint> {
    affine.insert(0, Point::Infinity);
    affine
}

pub fn torsion_over_q(curve: &Curve) -> TorsionReport {
    let candidates = lutz_nagell_points(curve);
    let torsion: Vec<QPoint> = candidates
        .iter()
        .filter(|pt| order_at_most_12(curve, pt).is_some())
        .cloned()
        .collect();
    let reductions: Vec<ReductionCount> = good_odd_primes(curve)
        .take(5)
        .map(|l| ReductionCount { prime: l, residue_degree: 1, order: count_points_fp(curve, l) })
        .collect();
    let reduction_gcd = reductions.iter().fold(0, |g, r| g.gcd(&r.order));
    let points = identity_first(torsion);
    TorsionReport {
        curve: *curve,
        field: FieldLabel::Q,
        structure: structure_of(&points),
        points,
        proven: true,
        reductions,
        reduction_gcd,
        halvable_two_torsion: halvable_over_q(curve).to_vec(),
        lutz_nagell_checked: candidates.len(),
    }
}

/// Minimum number of residue fields used for the odd-torsion bound.
const MIN_K_PRIMES: usize = 3;
const MAX_K_PRIMES: usize = 40;

pub fn torsion_over_k(curve: &Curve) -> TorsionReport {
    let halvable = halvable_over_k(curve);
    let mut reductions = Vec::new();
    let mut gcd = 0u64;
    for l in good_odd_primes(curve).take(MAX_K_PRIMES) {
        let (degree, order) = if l % 4 == 1 {
            (1, count_points_fp(curve, l))
        } else {
            (2, count_points_fp2(curve, l))
        };
        reductions.push(ReductionCount { prime: l, residue_degree: degree, order });
        gcd = gcd.gcd(&order);
        let odd_part = gcd >> gcd.trailing_zeros();
        if reductions.len() >= MIN_K_PRIMES && odd_part == 1 {
            break;
        }
    }
    let odd_free = (gcd >> gcd.trailing_zeros()) == 1;
    let no_order_four = !halvable.iter().any(|&h| h);
    let points = identity_first(curve.two_torsion().to_vec());
    TorsionReport {
        curve: *curve,
        field: FieldLabel::K,
        structure: structure_of(&points),
        points,
        proven: odd_free && no_order_four,
        reductions,
        reduction_gcd: gcd,
        halvable_two_torsion: halvable.to_vec(),
        lutz_nagell_checked: 0,
    }
}
