//! Systems (I), (II) and the simultaneous Pell system, with their maps to
//! curve points.

pub mod concordant;
pub mod pell;

use thiserror::Error;

pub use concordant::{point_to_solution, read_solution, search_concordant, search_concordant_par, solution_to_point, ConcordantSolution, PointClassification, System};
pub use pell::{cf_sqrt, pell_enumerate, pell_fundamental, simpell_to_point, solve_simultaneous, ContinuedFraction, PellSolution, SimPellSolution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiophantineError {
    #[error("d = {0} must be at least 2")]
    BadDiscriminant(i64),
    #[error("d = {0} is a perfect square")]
    SquareDiscriminant(i64),
    #[error("trivial solution (y = 0)")]
    TrivialSolution,
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("point is not in E(Q)^- (x < 0)")]
    NotInNegativeRegion,
    #[error("point is not in 2E(K)")]
    NotHalvable,
    #[error("point is a torsion point")]
    Torsion,
}
