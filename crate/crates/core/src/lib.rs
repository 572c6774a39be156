//! Twin-prime elliptic curves `y^2 = x(x + s*p)(x + s*q)` over Q and Q(i).
//!
//! Exact arithmetic throughout: torsion and rank data, the halving census
//! over the Gauss field, and searches for the related concordant and
//! simultaneous Pell systems.

pub mod arith;
pub mod curve;
pub mod rank;
pub mod diophantine;
pub mod report;
pub mod verifier;
pub mod cli;
