//! Continued fractions of square roots, Pell equations `x^2 - d y^2 = +-1`,
//! and the simultaneous system `x^2 - p y^2 = s`, `z^2 - q y^2 = s`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{integer_sqrt, int, rat_int, Integer, Rational};
use crate::curve::{Curve, Point, QPoint, Sigma, TwinPrimePair};
use crate::diophantine::DiophantineError;

/// `sqrt(d) = [a0; period...]`, the period ending in `2*a0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuedFraction {
    pub a0: i64,
    pub period: Vec<i64>,
}

pub fn cf_sqrt(d: i64) -> Result<ContinuedFraction, DiophantineError> {
    if d < 2 {
        return Err(DiophantineError::BadDiscriminant(d));
    }
    if integer_sqrt(&int(d)).expect("positive").is_some() {
        return Err(DiophantineError::SquareDiscriminant(d));
    }
    let a0 = (d as f64).sqrt() as i64;
    // correct the float estimate
    let a0 = (a0 - 2..=a0 + 2).filter(|a| a * a <= d).max().expect("nonempty");
    let (mut m, mut den, mut a) = (0i64, 1i64, a0);
    let mut period = Vec::new();
    while a != 2 * a0 {
        m = den * a - m;
        den = (d - m * m) / den;
        a = (a0 + m) / den;
        period.push(a);
    }
    Ok(ContinuedFraction { a0, period })
}

impl ContinuedFraction {
    /// Convergent `h_k/k_k` for index `k >= 0`, reading the period cyclically.
    pub fn convergent(&self, k: usize) -> (Integer, Integer) {
        let (mut h_prev, mut h) = (BigInt::one(), BigInt::from(self.a0));
        let (mut k_prev, mut kk) = (BigInt::zero(), BigInt::one());
        for i in 0..k {
            let a = BigInt::from(self.period[i % self.period.len()]);
            let h_next = &a * &h + &h_prev;
            let k_next = &a * &kk + &k_prev;
            h_prev = std::mem::replace(&mut h, h_next);
            k_prev = std::mem::replace(&mut kk, k_next);
        }
        (h, kk)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PellSolution {
    #[serde(serialize_with = "crate::report::ser_display")]
    pub d: i64,
    pub sigma: Sigma,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub x: Integer,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub y: Integer,
}

impl PellSolution {
    pub fn holds(&self) -> bool {
        &self.x * &self.x - int(self.d) * &self.y * &self.y == int(self.sigma.value())
    }
}

/// Least positive solution. For `+1` it always exists; for `-1` exactly when
/// the period of `sqrt(d)` has odd length.
pub fn pell_fundamental(d: i64, sigma: Sigma) -> Result<Option<PellSolution>, DiophantineError> {
    let cf = cf_sqrt(d)?;
    let len = cf.period.len();
    let index = match (sigma, len % 2) {
        (Sigma::Minus, 0) => return Ok(None),
        (Sigma::Minus, _) => len - 1,
        (Sigma::Plus, 0) => len - 1,
        (Sigma::Plus, _) => 2 * len - 1,
    };
    let (x, y) = cf.convergent(index);
    let sol = PellSolution { d, sigma, x, y };
    debug_assert!(sol.holds());
    Ok(Some(sol))
}

/// All solutions with `1 <= y <= y_bound`, ascending in `y`.
pub fn pell_enumerate(d: i64, sigma: Sigma, y_bound: &Integer) -> Result<Vec<PellSolution>, DiophantineError> {
    let unit = pell_fundamental(d, Sigma::Plus)?.expect("x^2 - d y^2 = 1 is always solvable");
    let Some(mut cur) = pell_fundamental(d, sigma)? else {
        return Ok(Vec::new());
    };
    let dd = int(d);
    let mut out = Vec::new();
    while &cur.y <= y_bound {
        let next = PellSolution {
            d,
            sigma,
            x: &cur.x * &unit.x + &dd * &cur.y * &unit.y,
            y: &cur.x * &unit.y + &cur.y * &unit.x,
        };
        out.push(std::mem::replace(&mut cur, next));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimPellSolution {
    pub pair: TwinPrimePair,
    pub sigma: Sigma,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub x: Integer,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub y: Integer,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub z: Integer,
}

impl SimPellSolution {
    pub fn holds(&self) -> bool {
        let s = int(self.sigma.value());
        let y2 = &self.y * &self.y;
        &self.x * &self.x - int(self.pair.p()) * &y2 == s && &self.z * &self.z - int(self.pair.q()) * &y2 == s
    }
}

/// Why one equation of the system has no solution at all, when a congruence
/// or the period parity already decides it.
pub fn single_equation_obstruction(pair: TwinPrimePair, sigma: Sigma) -> Option<String> {
    if sigma == Sigma::Plus {
        return None;
    }
    for d in [pair.p(), pair.q()] {
        if d % 4 == 3 {
            return Some(format!("x^2 - {d} y^2 = -1 has no solution: -1 is not a square mod {d}"));
        }
        if cf_sqrt(d).map(|cf| cf.period.len() % 2 == 0).unwrap_or(false) {
            return Some(format!("x^2 - {d} y^2 = -1 has no solution: even period of sqrt({d})"));
        }
    }
    None
}

/// Nontrivial solutions with `y <= y_bound`, by merging the two ascending
/// `y` sequences.
pub fn solve_simultaneous(pair: TwinPrimePair, sigma: Sigma, y_bound: &Integer) -> Vec<SimPellSolution> {
    let first = pell_enumerate(pair.p(), sigma, y_bound).expect("prime is not a square");
    let second = pell_enumerate(pair.q(), sigma, y_bound).expect("prime is not a square");
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < first.len() && j < second.len() {
        match first[i].y.cmp(&second[j].y) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(SimPellSolution {
                    pair,
                    sigma,
                    x: first[i].x.clone(),
                    y: first[i].y.clone(),
                    z: second[j].x.clone(),
                });
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// `(x, y, z) -> (1/y^2, xz/y^3)` on `E_s` for the solution's own sign.
pub fn simpell_to_point(sol: &SimPellSolution) -> Result<QPoint, DiophantineError> {
    if sol.y.is_zero() {
        return Err(DiophantineError::TrivialSolution);
    }
    let y = rat_int(&sol.y);
    let px = Rational::one() / (&y * &y);
    let py = rat_int(&(&sol.x * &sol.z)) / (&y * &y * &y);
    let pt = Point::affine(px, py);
    if !Curve::from_pair(sol.pair, sol.sigma).is_on_curve(&pt) {
        return Err(DiophantineError::NotOnCurve);
    }
    Ok(pt)
}
