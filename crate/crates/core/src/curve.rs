//! The twin-prime curves `E_s: y^2 = x(x + s*p)(x + s*q)` and their group law.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{int, is_prime_u64, rat_int, Field, GaussianRational, Integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("({0}, {0}+2) is not a twin-prime pair")]
    NotTwinPrime(i64),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("point at infinity has no affine coordinates")]
    Infinity,
}

/// Primes `p` and `q = p + 2`, with `p >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(try_from = "TwinPrimeRepr")]
pub struct TwinPrimePair {
    p: i64,
}

#[derive(Serialize, Deserialize)]
struct TwinPrimeRepr {
    p: String,
    q: String,
}

impl TryFrom<TwinPrimeRepr> for TwinPrimePair {
    type Error = String;
    fn try_from(r: TwinPrimeRepr) -> Result<Self, String> {
        let p: i64 = r.p.parse().map_err(|e| format!("bad p: {e}"))?;
        let pair = Self::new(p).map_err(|e| e.to_string())?;
        if r.q != pair.q().to_string() {
            return Err(format!("q = {} does not match p = {p}", r.q));
        }
        Ok(pair)
    }
}

impl Serialize for TwinPrimePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TwinPrimeRepr { p: self.p.to_string(), q: self.q().to_string() }.serialize(s)
    }
}

impl TwinPrimePair {
    pub fn new(p: i64) -> Result<Self, CurveError> {
        if p < 3 || !is_prime_u64(p as u64) || !is_prime_u64(p as u64 + 2) {
            return Err(CurveError::NotTwinPrime(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.p + 2
    }

    /// All pairs with `p <= max_p`, ascending.
    pub fn up_to(max_p: i64) -> Vec<Self> {
        (3..=max_p).filter_map(|p| Self::new(p).ok()).collect()
    }
}

impl fmt::Display for TwinPrimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q())
    }
}

/// The sign `s` in `x + s*p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sigma {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sigma {
    pub fn value(self) -> i64 {
        match self {
            Sigma::Plus => 1,
            Sigma::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sigma::Plus),
            -1 => Some(Sigma::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sigma::Plus => Sigma::Minus,
            Sigma::Minus => Sigma::Plus,
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sigma::Plus => "+1",
            Sigma::Minus => "-1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point<F> {
    Infinity,
    Affine { x: F, y: F },
}

pub type QPoint = Point<Rational>;
pub type KPoint = Point<GaussianRational>;

impl<F> Point<F> {
    pub fn affine(x: F, y: F) -> Self {
        Point::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&F> {
        match self {
            Point::Infinity => None,
            Point::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&F> {
        match self {
            Point::Infinity => None,
            Point::Affine { y, .. } => Some(y),
        }
    }
}

impl QPoint {
    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::affine(rat_int(&int(x)), rat_int(&int(y)))
    }

    /// Representative with `y >= 0`.
    pub fn abs_y(&self) -> Self {
        match self {
            Point::Affine { x, y } if y.is_negative() => Point::affine(x.clone(), -y.clone()),
            other => other.clone(),
        }
    }
}

impl<F: fmt::Display> Serialize for Point<F> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(None)?;
        match self {
            Point::Infinity => map.serialize_entry("infinity", &true)?,
            Point::Affine { x, y } => {
                map.serialize_entry("x", &x.to_string())?;
                map.serialize_entry("y", &y.to_string())?;
            }
        }
        map.end()
    }
}

impl<F: fmt::Display> fmt::Display for Point<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => f.write_str("O"),
            Point::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// `y^2 = x(x + s*p)(x + s*q)` for a twin-prime pair and a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Curve {
    pub pair: TwinPrimePair,
    pub sigma: Sigma,
}

impl Curve {
    pub fn new(p: i64, sigma: Sigma) -> Result<Self, CurveError> {
        Ok(Self { pair: TwinPrimePair::new(p)?, sigma })
    }

    pub fn from_pair(pair: TwinPrimePair, sigma: Sigma) -> Self {
        Self { pair, sigma }
    }

    /// The curve for the opposite sign; isomorphic to this one over Q(i).
    pub fn twist(&self) -> Self {
        Self { pair: self.pair, sigma: self.sigma.flip() }
    }

    /// Roots `(e1, e2, e3) = (0, -s*p, -s*q)` of the cubic.
    pub fn roots(&self) -> [i64; 3] {
        let s = self.sigma.value();
        [0, -s * self.pair.p(), -s * self.pair.q()]
    }

    /// `x^2` coefficient of the cubic, `s*(p+q)`.
    pub fn a2(&self) -> i64 {
        self.sigma.value() * (self.pair.p() + self.pair.q())
    }

    /// `x` coefficient of the cubic, `p*q`.
    pub fn a4(&self) -> i64 {
        self.pair.p() * self.pair.q()
    }

    pub fn rhs<F: Field>(&self, x: &F) -> F {
        let [e1, e2, e3] = self.roots().map(|e| F::from_rational(&rat_int(&int(e))));
        (x.clone() - e1) * (x.clone() - e2) * (x.clone() - e3)
    }

    pub fn is_on_curve<F: Field>(&self, pt: &Point<F>) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine { x, y } => y.clone() * y.clone() == self.rhs(x),
        }
    }

    fn check<F: Field>(&self, pt: &Point<F>) -> Result<(), CurveError> {
        if self.is_on_curve(pt) {
            Ok(())
        } else {
            Err(CurveError::NotOnCurve)
        }
    }

    /// The three points of order two, ordered as the roots.
    pub fn two_torsion(&self) -> [QPoint; 3] {
        self.roots().map(|e| QPoint::from_ints(e, 0))
    }

    pub fn negate<F: Field>(&self, pt: &Point<F>) -> Point<F> {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::affine(x.clone(), -y.clone()),
        }
    }

    /// Chord-tangent sum. Both inputs must lie on the curve.
    pub fn add<F: Field>(&self, a: &Point<F>, b: &Point<F>) -> Result<Point<F>, CurveError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub(crate) fn add_unchecked<F: Field>(&self, a: &Point<F>, b: &Point<F>) -> Point<F> {
        let (x1, y1, x2, y2) = match (a, b) {
            (Point::Infinity, _) => return b.clone(),
            (_, Point::Infinity) => return a.clone(),
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let a2 = F::from_rational(&rat_int(&int(self.a2())));
        let slope = if x1 == x2 {
            if (y1.clone() + y2.clone()).is_zero_value() {
                return Point::Infinity;
            }
            let a4 = F::from_rational(&rat_int(&int(self.a4())));
            let two = F::one_value() + F::one_value();
            let three = two.clone() + F::one_value();
            (three * x1.clone() * x1.clone() + two.clone() * a2.clone() * x1.clone() + a4)
                / (two * y1.clone())
        } else {
            (y2.clone() - y1.clone()) / (x2.clone() - x1.clone())
        };
        let x3 = slope.clone() * slope.clone() - a2 - x1.clone() - x2.clone();
        let y3 = -(slope * (x3.clone() - x1.clone()) + y1.clone());
        Point::affine(x3, y3)
    }

    pub fn double<F: Field>(&self, pt: &Point<F>) -> Point<F> {
        self.add_unchecked(pt, pt)
    }

    /// `n * pt` by double-and-add; negative `n` negates first.
    pub fn scalar_mul<F: Field>(&self, n: i64, pt: &Point<F>) -> Point<F> {
        let mut base = if n < 0 { self.negate(pt) } else { pt.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Point::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// `(x, y) -> (-x, i*y)`, an isomorphism onto the opposite-sign curve over Q(i).
    pub fn twist_map(&self, pt: &QPoint) -> Result<KPoint, CurveError> {
        self.check(pt)?;
        Ok(match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::affine(
                GaussianRational::from_rational(&-x.clone()),
                GaussianRational::new(Rational::zero(), y.clone()),
            ),
        })
    }

    /// Lifts a rational point into Q(i) coordinates without changing the curve.
    pub fn embed(pt: &QPoint) -> KPoint {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => {
                Point::affine(GaussianRational::from_rational(x), GaussianRational::from_rational(y))
            }
        }
    }

    /// Whether `x` lies where the cubic is nonnegative.
    pub fn real_solvable(&self, x: &Rational) -> bool {
        !self.rhs(x).is_negative()
    }
}

/// `max(|m|, e^2)` for `x = m/e^2` in lowest terms.
pub fn naive_height(pt: &QPoint) -> Result<Integer, CurveError> {
    let x = pt.x().ok_or(CurveError::Infinity)?;
    let m = x.numer().abs();
    let d = x.denom().clone();
    Ok(if m > d { m } else { d })
}

/// Membership in `E(Q)^-`: affine with `x < 0`.
pub fn in_negative_region(pt: &QPoint) -> bool {
    pt.x().is_some_and(|x| x.is_negative())
}

/// Whether `pt` is one of the four points of order dividing two.
pub fn is_two_torsion<F: Field>(pt: &Point<F>) -> bool {
    match pt {
        Point::Infinity => true,
        Point::Affine { y, .. } => y.is_zero_value(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn plus3() -> Curve {
        Curve::new(3, Sigma::Plus).unwrap()
    }

    #[test]
    fn construction() {
        let c = plus3();
        assert_eq!(c.roots(), [0, -3, -5]);
        let m = Curve::new(5, Sigma::Minus).unwrap();
        assert_eq!(m.roots(), [0, 5, 7]);
        assert_eq!(Curve::new(7, Sigma::Plus), Err(CurveError::NotTwinPrime(7)));
        assert!(Curve::new(2, Sigma::Plus).is_err());
        for s in [Sigma::Plus, Sigma::Minus] {
            let [_, e2, e3] = Curve::new(11, s).unwrap().roots();
            assert_eq!(e2 - e3, 2 * s.value());
        }
        let ps: Vec<i64> = TwinPrimePair::up_to(50).iter().map(|t| t.p()).collect();
        assert_eq!(ps, vec![3, 5, 11, 17, 29, 41]);
    }

    #[test]
    fn on_curve_examples() {
        let c = plus3();
        assert!(c.is_on_curve(&QPoint::from_ints(-4, 2)));
        assert!(c.is_on_curve(&QPoint::from_ints(0, 0)));
        assert!(!c.is_on_curve(&QPoint::from_ints(1, 1)));
        assert!(c.is_on_curve::<Rational>(&Point::Infinity));
    }

    #[test]
    fn group_law_examples() {
        let c = plus3();
        let p = QPoint::from_ints(-4, 2);
        assert_eq!(c.add(&p, &Point::Infinity).unwrap(), p);
        let t0 = QPoint::from_ints(0, 0);
        assert_eq!(c.add(&t0, &t0).unwrap(), Point::Infinity);
        assert_eq!(c.add(&t0, &QPoint::from_ints(-3, 0)).unwrap(), QPoint::from_ints(-5, 0));
        assert_eq!(c.add(&p, &QPoint::from_ints(1, 1)), Err(CurveError::NotOnCurve));
        assert_eq!(c.add(&p, &c.negate(&p)).unwrap(), Point::Infinity);
    }

    #[test]
    fn negate_examples() {
        let c = plus3();
        assert_eq!(c.negate(&QPoint::from_ints(-4, 2)), QPoint::from_ints(-4, -2));
        assert_eq!(c.negate(&QPoint::from_ints(0, 0)), QPoint::from_ints(0, 0));
        assert_eq!(c.negate::<Rational>(&Point::Infinity), Point::Infinity);
    }

    #[test]
    fn scalar_examples() {
        let c = plus3();
        let p = QPoint::from_ints(-4, 2);
        assert_eq!(c.scalar_mul(0, &p), Point::Infinity);
        assert_eq!(c.scalar_mul(1, &p), p);
        let two_p = c.scalar_mul(2, &p);
        // tangent at (-4, 2): slope (3*16 - 2*8*4 + 15)/4 = -1/4, x = 1/16 - 8 + 8 = 1/16
        assert_eq!(two_p, Point::affine(rat(1, 16), rat(-63, 64)));
        assert!(c.is_on_curve(&two_p));
        assert!(two_p.x().unwrap() > &rat(0, 1));
        assert_eq!(c.scalar_mul(-3, &p), c.negate(&c.scalar_mul(3, &p)));
        let five = c.scalar_mul(5, &p);
        let mut acc = Point::Infinity;
        for _ in 0..5 {
            acc = c.add(&acc, &p).unwrap();
        }
        assert_eq!(five, acc);
    }

    #[test]
    fn heights_and_regions() {
        assert_eq!(naive_height(&QPoint::from_ints(-4, 2)).unwrap(), int(4));
        assert_eq!(naive_height(&QPoint::from_ints(0, 0)).unwrap(), int(1));
        assert_eq!(naive_height(&Point::affine(rat(1, 16), rat(63, 64))).unwrap(), int(16));
        assert_eq!(naive_height(&Point::Infinity), Err(CurveError::Infinity));
        assert!(in_negative_region(&QPoint::from_ints(-4, 2)));
        assert!(!in_negative_region(&QPoint::from_ints(0, 0)));
        assert!(!in_negative_region(&Point::Infinity));
    }

    #[test]
    fn twist_examples() {
        let c = plus3();
        let img = c.twist_map(&QPoint::from_ints(-4, 2)).unwrap();
        let expected = Point::affine(
            GaussianRational::from_rational(&rat(4, 1)),
            GaussianRational::new(rat(0, 1), rat(2, 1)),
        );
        assert_eq!(img, expected);
        assert!(c.twist().is_on_curve(&img));
        assert_eq!(
            c.twist_map(&QPoint::from_ints(0, 0)).unwrap(),
            Curve::embed(&QPoint::from_ints(0, 0))
        );
        assert_eq!(c.twist_map(&Point::Infinity).unwrap(), Point::Infinity);
        assert_eq!(c.twist_map(&QPoint::from_ints(1, 1)), Err(CurveError::NotOnCurve));
    }
}
