//! Exact integer, rational and Gaussian-rational arithmetic.
//!
//! Rationals are `num_rational::BigRational`, which is always kept in lowest
//! terms with a positive denominator, so equality is structural.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::{Integer as _, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Integer = BigInt;
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("square root of a negative integer")]
    NegativeInput,
    #[error("zero input")]
    ZeroInput,
    #[error("{0} is not squarefree")]
    NotSquarefree(Integer),
}

pub fn int(v: i64) -> Integer {
    Integer::from(v)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(int(num), int(den))
}

pub fn rat_int(v: &Integer) -> Rational {
    Rational::from_integer(v.clone())
}

/// Builds `num/den` in lowest terms with a positive denominator.
pub fn rational_normalize(num: Integer, den: Integer) -> Result<Rational, ArithError> {
    if den.is_zero() {
        return Err(ArithError::ZeroDenominator);
    }
    Ok(Rational::new(num, den))
}

/// Exact square root of a nonnegative integer, if it is a perfect square.
pub fn integer_sqrt(n: &Integer) -> Result<Option<Integer>, ArithError> {
    if n.is_negative() {
        return Err(ArithError::NegativeInput);
    }
    Ok(sqrt_if_square(n))
}

// Residues that can be squares mod 64, 63, 65 and 11. Rejects ~99% of
// non-squares before the big-integer root.
const SQ64: u64 = {
    let mut m = 0u64;
    let mut i = 0;
    while i < 64 {
        m |= 1 << ((i * i) % 64);
        i += 1;
    }
    m
};

fn residue_mask(modulus: u64) -> u128 {
    let mut m = 0u128;
    for i in 0..modulus {
        m |= 1 << ((i * i) % modulus);
    }
    m
}

/// Cheap filter for perfect squares. `false` means certainly not a square.
pub fn maybe_square_u128(n: u128) -> bool {
    if SQ64 >> (n % 64) & 1 == 0 {
        return false;
    }
    thread_local! {
        static MASKS: (u128, u128, u128) = (residue_mask(63), residue_mask(65), residue_mask(11));
    }
    MASKS.with(|&(m63, m65, m11)| {
        (m63 >> (n % 63)) & 1 == 1 && (m65 >> (n % 65)) & 1 == 1 && (m11 >> (n % 11)) & 1 == 1
    })
}

/// Square root of a machine integer if it is a perfect square.
pub fn sqrt_u128(n: u128) -> Option<u128> {
    if !maybe_square_u128(n) {
        return None;
    }
    let s = n.sqrt();
    (s * s == n).then_some(s)
}

pub fn sqrt_i128(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    sqrt_u128(n as u128).map(|s| s as i128)
}

fn sqrt_if_square(n: &Integer) -> Option<Integer> {
    if n.is_negative() {
        return None;
    }
    if let Some(small) = n.to_u128() {
        return sqrt_u128(small).map(Integer::from);
    }
    let low = (n % 64u32).to_u64().unwrap_or(0);
    if SQ64 >> low & 1 == 0 {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

/// The nonnegative rational square root of `r`, if `r` is a rational square.
pub fn is_square_rational(r: &Rational) -> Option<Rational> {
    let num = sqrt_if_square(r.numer())?;
    let den = sqrt_if_square(r.denom())?;
    Some(Rational::new(num, den))
}

/// Whether the rational `r` is a square in the Gauss field Q(i).
///
/// `(a+bi)^2 = a^2 - b^2 + 2abi` is rational only when `ab = 0`, so `r` must
/// be `a^2` or `-b^2`.
pub fn is_square_in_gauss(r: &Rational) -> bool {
    is_square_rational(r).is_some() || is_square_rational(&-r.clone()).is_some()
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_prime(n: &Integer) -> bool {
    n.to_u64().is_some_and(is_prime_u64)
}

/// Trial-division factorization of a nonzero machine integer (sign ignored).
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// A nonzero squarefree integer of either sign; a class of Q*/Q*^2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedSquarefreeDivisor(i64);

impl SignedSquarefreeDivisor {
    pub fn new(value: i64) -> Result<Self, ArithError> {
        if value == 0 {
            return Err(ArithError::ZeroInput);
        }
        if factor_u64(value.unsigned_abs()).iter().any(|&(_, e)| e > 1) {
            return Err(ArithError::NotSquarefree(int(value)));
        }
        Ok(Self(value))
    }

    pub fn one() -> Self {
        Self(1)
    }

    pub fn value(&self) -> i64 {
        self.0
    }

    /// Product in Q*/Q*^2.
    pub fn mul_class(&self, other: &Self) -> Self {
        let g = self.0.gcd(&other.0);
        Self(self.0 / g * (other.0 / g))
    }
}

impl fmt::Display for SignedSquarefreeDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// All signed squarefree divisors of `n`, sorted by absolute value, then
/// positive before negative.
pub fn squarefree_divisors(n: i64) -> Result<Vec<SignedSquarefreeDivisor>, ArithError> {
    if n == 0 {
        return Err(ArithError::ZeroInput);
    }
    let primes: Vec<i64> = factor_u64(n.unsigned_abs()).iter().map(|&(p, _)| p as i64).collect();
    let mut abs = vec![1i64];
    for p in primes {
        let more: Vec<i64> = abs.iter().map(|d| d * p).collect();
        abs.extend(more);
    }
    abs.sort_unstable();
    Ok(abs
        .into_iter()
        .flat_map(|d| [SignedSquarefreeDivisor(d), SignedSquarefreeDivisor(-d)])
        .collect())
}

/// Square class of a nonzero rational whose numerator and denominator are
/// supported on `primes` up to a square factor. Returns `None` when some other
/// prime occurs to an odd power.
pub fn square_class(r: &Rational, primes: &[i64]) -> Option<SignedSquarefreeDivisor> {
    if r.is_zero() {
        return None;
    }
    // a/b and a*b lie in the same class
    let mut rest = (r.numer() * r.denom()).abs();
    let mut class = if r.is_negative() { -1i64 } else { 1 };
    for &p in primes {
        let pb = int(p);
        let mut odd = false;
        loop {
            let (quo, rem) = rest.div_rem(&pb);
            if !rem.is_zero() {
                break;
            }
            rest = quo;
            odd = !odd;
        }
        if odd {
            class *= p;
        }
    }
    sqrt_if_square(&rest).map(|_| SignedSquarefreeDivisor(class))
}

/// Exact field operations shared by the group law over Q and over Q(i).
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero_value(&self) -> bool;
}

impl Field for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// An element `re + im*i` of Q(i).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn i() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "({})i", self.im),
            _ => write!(f, "{} + ({})i", self.re, self.im),
        }
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Div for GaussianRational {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let n = o.norm();
        assert!(!n.is_zero(), "division by zero in Q(i)");
        let t = self * o.conj();
        Self::new(t.re / &n, t.im / n)
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Field for GaussianRational {
    fn zero_value() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }
    fn one_value() -> Self {
        Self::new(Rational::one(), Rational::zero())
    }
    fn from_rational(r: &Rational) -> Self {
        Self::new(r.clone(), Rational::zero())
    }
    fn is_zero_value(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(rational_normalize(int(2), int(4)).unwrap(), rat(1, 2));
        let r = rational_normalize(int(-4), int(-2)).unwrap();
        assert_eq!((r.numer().clone(), r.denom().clone()), (int(2), int(1)));
        let z = rational_normalize(int(0), int(5)).unwrap();
        assert_eq!((z.numer().clone(), z.denom().clone()), (int(0), int(1)));
        assert_eq!(rational_normalize(int(1), int(0)), Err(ArithError::ZeroDenominator));
    }

    #[test]
    fn rational_squares() {
        assert_eq!(is_square_rational(&rat(4, 9)), Some(rat(2, 3)));
        assert_eq!(is_square_rational(&rat(2, 1)), None);
        // 63^2 = 3969, 64^2 = 4096
        assert_eq!(is_square_rational(&rat(3969, 4096)), Some(rat(63, 64)));
        assert_eq!(is_square_rational(&rat(-4, 1)), None);
        assert_eq!(is_square_rational(&rat(0, 1)), Some(rat(0, 1)));
    }

    #[test]
    fn gauss_squares() {
        assert!(is_square_in_gauss(&rat(-1, 1)));
        assert!(is_square_in_gauss(&rat(4, 1)));
        assert!(!is_square_in_gauss(&rat(-2, 1)));
        assert!(!is_square_in_gauss(&rat(2, 1)));
        // (i*s)^2 = -s^2
        let s = rat(3, 7);
        let is = GaussianRational::new(rat(0, 1), s.clone());
        assert_eq!(is.clone() * is, GaussianRational::from_rational(&-(&s * &s)));
    }

    #[test]
    fn minus_two_is_not_a_gaussian_square_brute() {
        // a^2 - b^2 = -2 with ab = 0 forces b^2 = 2
        for den in 1..40i64 {
            for num in 0..200i64 {
                assert_ne!(num * num, 2 * den * den);
            }
        }
    }

    #[test]
    fn integer_sqrt_examples() {
        assert_eq!(integer_sqrt(&int(81)).unwrap(), Some(int(9)));
        assert_eq!(integer_sqrt(&int(80)).unwrap(), None);
        assert_eq!(integer_sqrt(&int(421201)).unwrap(), Some(int(649)));
        assert_eq!(integer_sqrt(&int(-1)), Err(ArithError::NegativeInput));
        let big = int(10).pow(40) + int(1);
        let sq = &big * &big;
        assert_eq!(integer_sqrt(&sq).unwrap(), Some(big));
        assert_eq!(integer_sqrt(&(sq + int(1))).unwrap(), None);
    }

    #[test]
    fn divisors_examples() {
        let vals = |n| squarefree_divisors(n).unwrap().iter().map(|d| d.value()).collect::<Vec<_>>();
        assert_eq!(vals(15), vec![1, -1, 3, -3, 5, -5, 15, -15]);
        assert_eq!(vals(6), vec![1, -1, 2, -2, 3, -3, 6, -6]);
        assert_eq!(vals(1), vec![1, -1]);
        assert_eq!(vals(12), vec![1, -1, 2, -2, 3, -3, 6, -6]);
        assert_eq!(squarefree_divisors(0), Err(ArithError::ZeroInput));
        assert!(SignedSquarefreeDivisor::new(12).is_err());
    }

    #[test]
    fn square_classes() {
        assert_eq!(square_class(&rat(-4, 1), &[2, 3, 5]).unwrap().value(), -1);
        assert_eq!(square_class(&rat(-3, 4), &[2, 3, 5]).unwrap().value(), -3);
        assert_eq!(square_class(&rat(45, 8), &[2, 3, 5]).unwrap().value(), 10);
        assert_eq!(square_class(&rat(7, 1), &[2, 3, 5]), None);
        let a = SignedSquarefreeDivisor::new(-6).unwrap();
        let b = SignedSquarefreeDivisor::new(10).unwrap();
        assert_eq!(a.mul_class(&b).value(), -15);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to 2,3,5,7
        assert!(!is_prime(&int(-3)));
    }

    #[test]
    fn gaussian_field_axioms() {
        let i = GaussianRational::i();
        assert_eq!(i.clone() * i.clone(), -GaussianRational::one_value());
        let a = GaussianRational::new(rat(1, 2), rat(-3, 5));
        let b = GaussianRational::new(rat(7, 3), rat(2, 1));
        assert_eq!((a.clone() / b.clone()) * b.clone(), a);
        assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-100_000i64..100_000, 1i64..10_000).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn square_of_rational_roots_to_abs(r in arb_rational()) {
            let sq = &r * &r;
            prop_assert_eq!(is_square_rational(&sq), Some(r.abs()));
        }

        #[test]
        fn gauss_square_iff_signed_rational_square(r in arb_rational()) {
            let expected = is_square_rational(&r).is_some() || is_square_rational(&-r.clone()).is_some();
            prop_assert_eq!(is_square_in_gauss(&r), expected);
        }

        #[test]
        fn divisors_divide_and_are_closed(n in 1i64..5000, neg in any::<bool>()) {
            let n = if neg { -n } else { n };
            let ds = squarefree_divisors(n).unwrap();
            for d in &ds {
                prop_assert_eq!(n % d.value(), 0);
                prop_assert!(SignedSquarefreeDivisor::new(d.value()).is_ok());
                prop_assert!(ds.iter().any(|e| e.value() == -d.value()));
            }
        }
    }
}
