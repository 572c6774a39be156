//! The concordant-form systems
//!
//! ```text
//! (I)   X^2 - p Y^2 = S^2,   X^2 - q Y^2 = -T^2
//! (II)  X^2 - p Y^2 = 2S^2,  X^2 - q Y^2 = -2T^2
//! ```
//!
//! and their correspondence with points of `E_+` in `E(Q)^-`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{int, is_square_rational, maybe_square_u128, rat_int, sqrt_u128, Integer, Rational};
use crate::curve::{in_negative_region, is_two_torsion, Curve, Point, QPoint, Sigma, TwinPrimePair};
use crate::diophantine::DiophantineError;
use crate::rank::census::is_double_in_k;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum System {
    I,
    II,
}

impl System {
    /// The factor `k` in `X^2 - pY^2 = kS^2`.
    fn factor(self) -> i64 {
        match self {
            System::I => 1,
            System::II => 2,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::I => "I",
            System::II => "II",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConcordantSolution {
    pub system: System,
    #[serde(rename = "X", serialize_with = "crate::report::ser_display")]
    pub x: Integer,
    #[serde(rename = "Y", serialize_with = "crate::report::ser_display")]
    pub y: Integer,
    #[serde(rename = "S", serialize_with = "crate::report::ser_display")]
    pub s: Integer,
    #[serde(rename = "T", serialize_with = "crate::report::ser_display")]
    pub t: Integer,
}

impl ConcordantSolution {
    pub fn new(system: System, x: i64, y: i64, s: i64, t: i64) -> Self {
        Self { system, x: int(x), y: int(y), s: int(s), t: int(t) }
    }

    /// Both defining equations hold exactly.
    pub fn holds(&self, pair: TwinPrimePair) -> bool {
        let k = int(self.system.factor());
        let (x2, y2) = (&self.x * &self.x, &self.y * &self.y);
        &x2 - int(pair.p()) * &y2 == &k * &self.s * &self.s
            && &x2 - int(pair.q()) * &y2 == -(&k * &self.t * &self.t)
    }

    /// `gcd(X, Y) = 1` and `XY != 0`.
    pub fn is_primary(&self) -> bool {
        !self.x.is_zero() && !self.y.is_zero() && self.x.gcd(&self.y).is_one()
    }

    /// Representative with all four entries nonnegative.
    pub fn canonical(&self) -> Self {
        Self {
            system: self.system,
            x: self.x.abs(),
            y: self.y.abs(),
            s: self.s.abs(),
            t: self.t.abs(),
        }
    }
}

fn search_row(pair: TwinPrimePair, system: System, y: u64, bound: u64) -> Vec<ConcordantSolution> {
    let (p, q, k) = (pair.p() as u128, pair.q() as u128, system.factor() as u128);
    let y2 = (y as u128) * (y as u128);
    // pY^2 < X^2 < qY^2
    let lo = ((p * y2) as f64).sqrt() as u64;
    let hi = (((q * y2) as f64).sqrt() as u64 + 1).min(bound);
    let mut out = Vec::new();
    for x in lo.max(1)..=hi {
        let x2 = (x as u128) * (x as u128);
        if x2 <= p * y2 || x2 >= q * y2 || x.gcd(&y) != 1 {
            continue;
        }
        let a = x2 - p * y2;
        let b = q * y2 - x2;
        if !a.is_multiple_of(k) || !b.is_multiple_of(k) || !maybe_square_u128(a / k) {
            continue;
        }
        let (Some(s), Some(t)) = (sqrt_u128(a / k), sqrt_u128(b / k)) else { continue };
        out.push(ConcordantSolution {
            system,
            x: BigInt::from(x),
            y: BigInt::from(y),
            s: BigInt::from(s),
            t: BigInt::from(t),
        });
    }
    out
}

/// All primary solutions with `1 <= X, Y <= xy_bound`, entries nonnegative,
/// sorted by `(Y, X)`.
pub fn search_concordant(pair: TwinPrimePair, system: System, xy_bound: u64) -> Vec<ConcordantSolution> {
    (1..=xy_bound).flat_map(|y| search_row(pair, system, y, xy_bound)).collect()
}

/// [`search_concordant`] partitioned by `Y` over the current rayon pool.
pub fn search_concordant_par(pair: TwinPrimePair, system: System, xy_bound: u64) -> Vec<ConcordantSolution> {
    (1..=xy_bound)
        .into_par_iter()
        .flat_map_iter(|y| search_row(pair, system, y, xy_bound))
        .collect()
}

/// `(I) -> (-X^2/Y^2, XST/Y^3)`, `(II) -> (-X^2/Y^2, 2XST/Y^3)` on `E_+`.
pub fn solution_to_point(sol: &ConcordantSolution, pair: TwinPrimePair) -> Result<QPoint, DiophantineError> {
    if !sol.is_primary() {
        return Err(DiophantineError::InvalidSolution("not primary".into()));
    }
    if !sol.holds(pair) {
        return Err(DiophantineError::InvalidSolution(format!(
            "defining equations of system ({}) fail",
            sol.system
        )));
    }
    let y = rat_int(&sol.y);
    let x = rat_int(&sol.x);
    let px = -(&x * &x) / (&y * &y);
    let py = rat_int(&(int(sol.system.factor()) * &sol.x * &sol.s * &sol.t)) / (&y * &y * &y);
    let pt = Point::affine(px, py);
    debug_assert!(Curve::from_pair(pair, Sigma::Plus).is_on_curve(&pt));
    Ok(pt)
}

/// Outcome of reading a halvable point of `E(Q)^-` back as a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointClassification {
    Solution { solution: ConcordantSolution },
    /// Neither `A, B` nor `A/2, B/2` are both squares, where
    /// `A = -(x + p) Y^2` and `B = (x + q) Y^2`.
    Unclassified {
        #[serde(serialize_with = "crate::report::ser_display")]
        a: Integer,
        #[serde(serialize_with = "crate::report::ser_display")]
        b: Integer,
    },
}

/// Reads a halvable point of `E(Q)^-` on `E_+` as a solution of (I) or (II).
///
/// Halving over Q(i) forces `-(x + p)` to be a square, so such points always
/// land in system (I); [`read_solution`] drops the halving requirement and
/// also recovers system (II) points.
pub fn point_to_solution(pt: &QPoint, pair: TwinPrimePair) -> Result<PointClassification, DiophantineError> {
    let curve = Curve::from_pair(pair, Sigma::Plus);
    check_negative_nontorsion(&curve, pt)?;
    if !is_double_in_k(&curve, pt).expect("checked on curve") {
        return Err(DiophantineError::NotHalvable);
    }
    read_solution(pt, pair)
}

fn check_negative_nontorsion(curve: &Curve, pt: &QPoint) -> Result<(), DiophantineError> {
    if !curve.is_on_curve(pt) {
        return Err(DiophantineError::NotOnCurve);
    }
    if !in_negative_region(pt) {
        return Err(DiophantineError::NotInNegativeRegion);
    }
    if is_two_torsion(pt) {
        return Err(DiophantineError::Torsion);
    }
    Ok(())
}

/// Writes `-x = X^2/Y^2` in lowest terms and tests `A = -(x + p) Y^2`,
/// `B = (x + q) Y^2` for being squares (system I) or twice squares
/// (system II). Fails when `-x` is not a rational square.
pub fn read_solution(pt: &QPoint, pair: TwinPrimePair) -> Result<PointClassification, DiophantineError> {
    check_negative_nontorsion(&Curve::from_pair(pair, Sigma::Plus), pt)?;
    let x = pt.x().expect("affine");
    let root = is_square_rational(&-x.clone())
        .ok_or_else(|| DiophantineError::InvalidSolution("-x is not a rational square".into()))?;
    let (big_x, big_y) = (root.numer().clone(), root.denom().clone());
    let y2 = rat_int(&(&big_y * &big_y));
    let a = (-(x + Rational::from_integer(int(pair.p()))) * &y2).to_integer();
    let b = ((x + Rational::from_integer(int(pair.q()))) * &y2).to_integer();
    let sqrt = |v: &Integer| crate::arith::integer_sqrt(v).ok().flatten();
    for system in [System::I, System::II] {
        let k = int(system.factor());
        if (&a % &k).is_zero() && (&b % &k).is_zero() {
            if let (Some(s), Some(t)) = (sqrt(&(&a / &k)), sqrt(&(&b / &k))) {
                let solution = ConcordantSolution { system, x: big_x, y: big_y, s, t };
                debug_assert!(solution.holds(pair));
                return Ok(PointClassification::Solution { solution });
            }
        }
    }
    Ok(PointClassification::Unclassified { a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn pair(p: i64) -> TwinPrimePair {
        TwinPrimePair::new(p).unwrap()
    }

    /// Oracle: every `(X, Y)` in the box, both equations tested with
    /// rational square roots.
    fn brute(pair: TwinPrimePair, system: System, bound: i64) -> Vec<ConcordantSolution> {
        let k = system.factor();
        let mut out = Vec::new();
        for y in 1..=bound {
            for x in 1..=bound {
                if x.gcd(&y) != 1 {
                    continue;
                }
                let a = rat(x * x - pair.p() * y * y, k);
                let b = rat(pair.q() * y * y - x * x, k);
                if let (Some(s), Some(t)) = (is_square_rational(&a), is_square_rational(&b)) {
                    if s.is_integer() && t.is_integer() {
                        out.push(ConcordantSolution {
                            system,
                            x: int(x),
                            y: int(y),
                            s: s.to_integer(),
                            t: t.to_integer(),
                        });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn search_examples() {
        let sols = search_concordant(pair(3), System::I, 10);
        assert!(sols.contains(&ConcordantSolution::new(System::I, 2, 1, 1, 1)));
        assert!(search_concordant(pair(5), System::I, 2000).is_empty());
        assert!(search_concordant(pair(5), System::II, 2000).is_empty());
    }

    #[test]
    fn search_matches_brute_force() {
        for p in [3, 5, 11, 17] {
            for system in [System::I, System::II] {
                let got = search_concordant(pair(p), system, 150);
                assert_eq!(got, brute(pair(p), system, 150), "p={p} {system}");
                assert_eq!(search_concordant_par(pair(p), system, 150), got);
            }
        }
    }

    #[test]
    fn solution_point_examples() {
        let p3 = pair(3);
        let s = ConcordantSolution::new(System::I, 2, 1, 1, 1);
        assert_eq!(solution_to_point(&s, p3).unwrap(), QPoint::from_ints(-4, 2));
        let neg = ConcordantSolution::new(System::I, -2, 1, 1, 1);
        assert_eq!(solution_to_point(&neg, p3).unwrap(), QPoint::from_ints(-4, -2));
        let wrong = ConcordantSolution::new(System::II, 2, 1, 1, 1);
        assert!(matches!(solution_to_point(&wrong, p3), Err(DiophantineError::InvalidSolution(_))));
    }

    #[test]
    fn point_solution_examples() {
        let p3 = pair(3);
        let c = Curve::from_pair(p3, Sigma::Plus);
        assert_eq!(
            point_to_solution(&QPoint::from_ints(-4, 2), p3).unwrap(),
            PointClassification::Solution { solution: ConcordantSolution::new(System::I, 2, 1, 1, 1) }
        );
        assert_eq!(point_to_solution(&QPoint::from_ints(0, 0), p3), Err(DiophantineError::NotInNegativeRegion));
        assert_eq!(point_to_solution(&QPoint::from_ints(-3, 0), p3), Err(DiophantineError::Torsion));
        let three = c.scalar_mul(3, &QPoint::from_ints(-4, 2));
        match point_to_solution(&three, p3).unwrap() {
            PointClassification::Solution { solution } => {
                assert!(solution.holds(p3));
                assert!(solution.is_primary());
            }
            other => panic!("unexpected {other:?}"),
        }
        // (-4,2) + (-3,0) lies on the unbounded part or fails halving
        let shifted = c.add(&QPoint::from_ints(-4, 2), &QPoint::from_ints(-3, 0)).unwrap();
        assert!(point_to_solution(&shifted, p3).is_err());
    }

    #[test]
    fn round_trip_on_found_solutions() {
        for p in [3, 11, 17, 41, 59] {
            for system in [System::I, System::II] {
                for s in search_concordant(pair(p), system, 400) {
                    let pt = solution_to_point(&s, pair(p)).unwrap();
                    let x = pt.x().unwrap();
                    assert!(x > &rat(-pair(p).q(), 1) && x < &rat(-p, 1));
                    let back = match system {
                        System::I => point_to_solution(&pt, pair(p)).unwrap(),
                        System::II => {
                            assert_eq!(point_to_solution(&pt, pair(p)), Err(DiophantineError::NotHalvable));
                            read_solution(&pt, pair(p)).unwrap()
                        }
                    };
                    match back {
                        PointClassification::Solution { solution } => assert_eq!(solution, s.canonical()),
                        other => panic!("p={p}: {other:?}"),
                    }
                }
            }
        }
    }
}
