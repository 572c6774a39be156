//! Torsion, 2-descent, point search and the halving census.

pub mod census;
pub mod descent;
pub mod local;
pub mod search;
pub mod torsion;

pub use census::{is_double_in_k, n2k_census, CensusReport};
pub use descent::{kummer_image, rank_over_k, rank_over_k_with, two_descent, two_descent_with, DescentPair, DescentReport, KRankReport, RankValue};
pub use search::{point_search, point_search_par, FoundPoint, Region};
pub use torsion::{count_points_fp, torsion_over_k, torsion_over_q, FieldLabel, TorsionReport};
