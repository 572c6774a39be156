//! Complete 2-descent over Q with full rational 2-torsion.
//!
//! A point `P = (x, y)` maps to the square classes `(x - e1, x - e2)`, with
//! the usual substitutes at the 2-torsion points. Classes are restricted to
//! `d1 | pq` and `d2 | 2p`: an odd valuation of `x - e_i` at a prime `l`
//! forces `l | (e_i - e_j)(e_i - e_k)`. A pair survives when it lies in the
//! local image at the real place, at 2, at p and at q; every other place
//! imposes nothing since the pair is a unit there and the curve has good
//! reduction.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{is_square_rational, rat, square_class, sqrt_i128, squarefree_divisors, Rational, SignedSquarefreeDivisor};
use crate::curve::{in_negative_region, naive_height, Curve, Point, QPoint, Sigma, TwinPrimePair};
use crate::rank::local::{local_image, LocalImage, Place};
use crate::rank::search::{point_search, Region};

/// Default cap on `|z1|` and `w` when searching a homogeneous space for a
/// global point.
pub const TORSOR_SEARCH_CAP: i64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DescentPair {
    pub d1: i64,
    pub d2: i64,
}

impl DescentPair {
    pub fn new(d1: &SignedSquarefreeDivisor, d2: &SignedSquarefreeDivisor) -> Self {
        Self { d1: d1.value(), d2: d2.value() }
    }

    pub fn identity() -> Self {
        Self { d1: 1, d2: 1 }
    }

    fn class(v: i64) -> SignedSquarefreeDivisor {
        SignedSquarefreeDivisor::new(v).expect("descent classes are squarefree")
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            d1: Self::class(self.d1).mul_class(&Self::class(other.d1)).value(),
            d2: Self::class(self.d2).mul_class(&Self::class(other.d2)).value(),
        }
    }

    fn rationals(&self) -> (Rational, Rational) {
        (rat(self.d1, 1), rat(self.d2, 1))
    }
}

impl std::fmt::Display for DescentPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.d1, self.d2)
    }
}

/// Image of a rational point under the descent map.
pub fn kummer_image(curve: &Curve, pt: &QPoint) -> DescentPair {
    let primes = [2, curve.pair.p(), curve.pair.q()];
    let [e1, e2, e3] = curve.roots();
    let class = |r: Rational| square_class(&r, &primes).expect("descent class supported on 2, p, q").value();
    match pt {
        Point::Infinity => DescentPair::identity(),
        Point::Affine { x, .. } => {
            let a = x - rat(e1, 1);
            let b = x - rat(e2, 1);
            if a.is_zero() {
                DescentPair { d1: class(rat((e1 - e2) * (e1 - e3), 1)), d2: class(rat(e1 - e2, 1)) }
            } else if b.is_zero() {
                DescentPair { d1: class(rat(e2 - e1, 1)), d2: class(rat((e2 - e1) * (e2 - e3), 1)) }
            } else {
                DescentPair { d1: class(a), d2: class(b) }
            }
        }
    }
}

/// Subgroup of `(Q*/Q*^2)^2` generated so far.
#[derive(Debug, Clone, Default)]
struct Span(BTreeSet<DescentPair>);

impl Span {
    fn new() -> Self {
        Self(BTreeSet::from([DescentPair::identity()]))
    }

    /// Adds a generator; returns whether the span grew.
    fn insert(&mut self, g: DescentPair) -> bool {
        if self.0.contains(&g) {
            return false;
        }
        let shifted: Vec<DescentPair> = self.0.iter().map(|s| s.mul(&g)).collect();
        self.0.extend(shifted);
        true
    }

    fn rank(&self) -> u32 {
        self.0.len().trailing_zeros()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    pub curve: Curve,
    /// Every pair that is locally solvable everywhere, in candidate order.
    pub surviving_pairs: Vec<DescentPair>,
    /// Surviving pairs known to come from a global point.
    pub image_pairs: Vec<DescentPair>,
    /// Surviving pairs with no global point found within the search caps.
    pub selmer_only: Vec<DescentPair>,
    pub rank_upper: u32,
    pub rank_lower: u32,
    /// Points independent modulo `2E(Q)` and torsion, found up to the caps.
    pub generators_found: Vec<QPoint>,
    pub resolved: bool,
    /// Places whose local image could not be pinned down; they were not
    /// used to reject pairs.
    pub inconclusive_places: Vec<String>,
    pub torsor_search_cap: i64,
}

pub fn torsion_images(curve: &Curve) -> [DescentPair; 3] {
    curve.two_torsion().map(|t| kummer_image(curve, &t))
}

/// All `(d1, d2)` with `d1 | pq`, `d2 | 2p`.
pub fn candidate_pairs(curve: &Curve) -> Vec<DescentPair> {
    let p = curve.pair.p();
    let q = curve.pair.q();
    let d1s = squarefree_divisors(p * q).expect("nonzero");
    let d2s = squarefree_divisors(2 * p).expect("nonzero");
    d1s.iter().flat_map(|a| d2s.iter().map(move |b| DescentPair::new(a, b))).collect()
}

/// Local images at the real place, 2, p and q.
pub fn local_images(curve: &Curve) -> Vec<LocalImage> {
    let tors: Vec<(Rational, Rational)> = torsion_images(curve).iter().map(|t| t.rationals()).collect();
    [Place::Real, Place::Prime(2), Place::Prime(curve.pair.p()), Place::Prime(curve.pair.q())]
        .into_iter()
        .map(|pl| local_image(curve, pl, &tors))
        .collect()
}

/// Searches the homogeneous space of `pair` for a global point. Each of the
/// three factors gives a parametrization `x = e_j + c_j z^2/w^2` with
/// `(c_1, c_2, c_3) = (d1, d2, d1 d2)`; all are scanned over
/// `1 <= z, w <= cap`, `gcd(z, w) = 1`, by increasing `max(z, w)`.
pub fn torsor_search(curve: &Curve, pair: DescentPair, cap: i64) -> Option<QPoint> {
    let roots = curve.roots().map(|e| e as i128);
    let (d1, d2) = (pair.d1 as i128, pair.d2 as i128);
    let classes = [d1, d2, d1 * d2 / (d1.gcd(&d2) * d1.gcd(&d2))];
    for n in 1..=cap {
        for (z, w) in (1..=n).map(|w| (n, w)).chain((1..n).map(|z| (z, n))) {
            if z.gcd(&w) != 1 {
                continue;
            }
            let (z2, w2) = ((z * z) as i128, (w * w) as i128);
            for j in 0..3 {
                // x*w^2 = e_j w^2 + c_j z^2; every x - e_k must lie in class c_k
                let xw2 = roots[j] * w2 + classes[j] * z2;
                let ok = (0..3)
                    .filter(|&k| k != j)
                    .all(|k| {
                        let v = classes[k] * (xw2 - roots[k] * w2);
                        v != 0 && sqrt_i128(v).is_some()
                    });
                if ok {
                    let x = Rational::new(BigInt::from(xw2), BigInt::from(w2));
                    let y = is_square_rational(&curve.rhs(&x)).expect("torsor point lies on the curve");
                    return Some(Point::affine(x, y));
                }
            }
        }
    }
    None
}

/// The translate `pt + T` (`T` of order dividing 2) used to report a
/// generator: in `E(Q)^-` when such a translate exists, then of least naive
/// height, with `y >= 0`.
pub fn canonical_generator(curve: &Curve, pt: &QPoint) -> QPoint {
    let mut translates: Vec<QPoint> = std::iter::once(pt.clone())
        .chain(curve.two_torsion().iter().map(|t| curve.add_unchecked(pt, t)))
        .filter(|p| !p.is_infinity())
        .map(|p| p.abs_y())
        .collect();
    translates.sort_by(|a, b| {
        let key = |p: &QPoint| (!in_negative_region(p), naive_height(p).expect("affine"));
        key(a).cmp(&key(b)).then_with(|| a.x().cmp(&b.x()))
    });
    translates.swap_remove(0)
}

/// Descent with the default torsor cap and no seed points.
pub fn two_descent(curve: &Curve) -> DescentReport {
    two_descent_with(curve, &[], TORSOR_SEARCH_CAP)
}

/// Descent seeded with known points (e.g. from [`point_search`]); surviving
/// classes not covered by them are searched on their homogeneous spaces.
pub fn two_descent_with(curve: &Curve, seeds: &[QPoint], cap: i64) -> DescentReport {
    let images = local_images(curve);
    let surviving: Vec<DescentPair> = candidate_pairs(curve)
        .into_iter()
        .filter(|pair| {
            let (d1, d2) = pair.rationals();
            images.iter().all(|img| img.contains(&d1, &d2))
        })
        .collect();

    let mut span = Span::new();
    for t in torsion_images(curve) {
        span.insert(t);
    }
    let mut generators = Vec::new();
    for pt in seeds {
        if span.insert(kummer_image(curve, pt)) {
            generators.push(canonical_generator(curve, pt));
        }
    }
    for pair in &surviving {
        if span.0.contains(pair) {
            continue;
        }
        if let Some(pt) = torsor_search(curve, *pair, cap) {
            debug_assert_eq!(kummer_image(curve, &pt), *pair);
            span.insert(*pair);
            generators.push(canonical_generator(curve, &pt));
        }
    }

    let rank_upper = (surviving.len() as u32).trailing_zeros().saturating_sub(2);
    let rank_lower = span.rank().saturating_sub(2);
    let image_pairs: Vec<DescentPair> = surviving.iter().copied().filter(|p| span.0.contains(p)).collect();
    let selmer_only: Vec<DescentPair> = surviving.iter().copied().filter(|p| !span.0.contains(p)).collect();
    DescentReport {
        curve: *curve,
        rank_upper,
        rank_lower,
        resolved: rank_lower == rank_upper,
        image_pairs,
        selmer_only,
        surviving_pairs: surviving,
        generators_found: generators,
        inconclusive_places: images.iter().filter(|i| !i.complete).map(|i| i.place.to_string()).collect(),
        torsor_search_cap: cap,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankValue {
    Exact { rank: u32 },
    Interval { lower: u32, upper: u32 },
}

impl RankValue {
    pub fn upper(&self) -> u32 {
        match *self {
            RankValue::Exact { rank } => rank,
            RankValue::Interval { upper, .. } => upper,
        }
    }

    pub fn lower(&self) -> u32 {
        match *self {
            RankValue::Exact { rank } => rank,
            RankValue::Interval { lower, .. } => lower,
        }
    }

    pub fn exact(&self) -> Option<u32> {
        match *self {
            RankValue::Exact { rank } => Some(rank),
            RankValue::Interval { .. } => None,
        }
    }
}

/// Rank over Q(i) as `rank E_+(Q) + rank E_-(Q)`.
#[derive(Debug, Clone, Serialize)]
pub struct KRankReport {
    pub pair: TwinPrimePair,
    pub sigma: Sigma,
    pub rank_plus_q: DescentReport,
    pub rank_minus_q: DescentReport,
    pub rank_k: RankValue,
}

pub fn combine_k_rank(pair: TwinPrimePair, sigma: Sigma, plus: DescentReport, minus: DescentReport) -> KRankReport {
    let lower = plus.rank_lower + minus.rank_lower;
    let upper = plus.rank_upper + minus.rank_upper;
    let rank_k = if lower == upper {
        RankValue::Exact { rank: lower }
    } else {
        RankValue::Interval { lower, upper }
    };
    KRankReport { pair, sigma, rank_plus_q: plus, rank_minus_q: minus, rank_k }
}

/// Runs both descents, seeding each with a point search at `height_bound`.
pub fn rank_over_k_with(pair: TwinPrimePair, sigma: Sigma, height_bound: u64, cap: i64) -> KRankReport {
    let run = |s: Sigma| {
        let c = Curve::from_pair(pair, s);
        let seeds: Vec<QPoint> = point_search(&c, height_bound, Region::All)
            .into_iter()
            .filter(|f| !f.torsion)
            .map(|f| f.point)
            .collect();
        two_descent_with(&c, &seeds, cap)
    };
    combine_k_rank(pair, sigma, run(Sigma::Plus), run(Sigma::Minus))
}

pub fn rank_over_k(pair: TwinPrimePair, sigma: Sigma) -> KRankReport {
    rank_over_k_with(pair, sigma, 1000, TORSOR_SEARCH_CAP)
}
