//! Halving over Q(i) and the census of `2E(K) ∩ E(Q)^-`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::arith::{is_square_in_gauss, rat, Rational};
use crate::curve::{in_negative_region, naive_height, Curve, CurveError, Point, QPoint};
use crate::rank::torsion::halvable_over_k;

/// Whether a rational point lies in `2E(Q(i))`.
///
/// With all 2-torsion rational, `(x, y)` halves iff every `x - e_i` is a
/// square in Q(i); for `(e_i, 0)` the vanishing factor is replaced by the
/// condition on `e_i - e_j` and `e_i - e_k`. The identity counts as a double.
pub fn is_double_in_k(curve: &Curve, pt: &QPoint) -> Result<bool, CurveError> {
    if !curve.is_on_curve(pt) {
        return Err(CurveError::NotOnCurve);
    }
    let Point::Affine { x, .. } = pt else {
        return Ok(true);
    };
    let roots = curve.roots();
    if let Some(i) = roots.iter().position(|&e| rat(e, 1) == *x) {
        return Ok(halvable_over_k(curve)[i]);
    }
    Ok(roots.iter().all(|&e| is_square_in_gauss(&(x - rat(e, 1)))))
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub curve: Curve,
    pub multiple_bound: i64,
    /// One representative per `+-y` pair, `y >= 0`, sorted by height then `x`.
    pub census_points: Vec<QPoint>,
    pub count: usize,
    /// Some single generator already gives at least three census points.
    pub unbounded_hint: bool,
    pub per_generator_counts: Vec<usize>,
}

fn accept(curve: &Curve, pt: &QPoint, found: &mut BTreeMap<Rational, QPoint>) {
    if in_negative_region(pt) && is_double_in_k(curve, pt).unwrap_or(false) {
        let x = pt.x().expect("negative region is affine").clone();
        found.entry(x).or_insert_with(|| pt.abs_y());
    }
}

/// Enumerates `T + sum k_i G_i` for 2-torsion `T` and `|k_i| <= multiple_bound`
/// and keeps the points with `x < 0` that halve over Q(i).
pub fn n2k_census(curve: &Curve, generators: &[QPoint], multiple_bound: i64) -> Result<CensusReport, CurveError> {
    if generators.iter().any(|g| !curve.is_on_curve(g)) {
        return Err(CurveError::NotOnCurve);
    }
    let bound = multiple_bound.max(0);
    let mut torsion: Vec<QPoint> = vec![Point::Infinity];
    torsion.extend(curve.two_torsion());
    let multiples: Vec<Vec<QPoint>> = generators
        .iter()
        .map(|g| (-bound..=bound).map(|k| curve.scalar_mul(k, g)).collect())
        .collect();

    let mut per_generator_counts = Vec::new();
    for table in &multiples {
        let mut found = BTreeMap::new();
        for t in &torsion {
            for m in table {
                accept(curve, &curve.add_unchecked(t, m), &mut found);
            }
        }
        per_generator_counts.push(found.len());
    }

    let mut found = BTreeMap::new();
    let width = (2 * bound + 1) as usize;
    let mut idx = vec![0usize; multiples.len()];
    loop {
        let sum = idx
            .iter()
            .zip(&multiples)
            .fold(Point::Infinity, |acc, (&i, table)| curve.add_unchecked(&acc, &table[i]));
        for t in &torsion {
            accept(curve, &curve.add_unchecked(t, &sum), &mut found);
        }
        // odometer over the coefficient vector
        let mut pos = 0;
        while pos < idx.len() {
            idx[pos] += 1;
            if idx[pos] < width {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == idx.len() {
            break;
        }
    }

    let mut census_points: Vec<QPoint> = found.into_values().collect();
    census_points.sort_by(|a, b| {
        naive_height(a)
            .expect("affine")
            .cmp(&naive_height(b).expect("affine"))
            .then_with(|| a.x().cmp(&b.x()))
    });
    Ok(CensusReport {
        curve: *curve,
        multiple_bound: bound,
        count: census_points.len(),
        unbounded_hint: per_generator_counts.iter().any(|&c| c >= 3),
        census_points,
        per_generator_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Sigma;

    fn plus(p: i64) -> Curve {
        Curve::new(p, Sigma::Plus).unwrap()
    }

    #[test]
    fn halving_examples() {
        let c = plus(3);
        assert!(is_double_in_k(&c, &QPoint::from_ints(-4, 2)).unwrap());
        assert!(!is_double_in_k(&c, &QPoint::from_ints(-3, 0)).unwrap());
        assert!(!is_double_in_k(&c, &QPoint::from_ints(0, 0)).unwrap());
        assert!(is_double_in_k(&c, &Point::Infinity).unwrap());
        assert_eq!(is_double_in_k(&c, &QPoint::from_ints(1, 1)), Err(CurveError::NotOnCurve));
        let d = c.scalar_mul(2, &QPoint::from_ints(-4, 2));
        assert!(is_double_in_k(&c, &d).unwrap());
    }

    #[test]
    fn torsion_only_census_is_empty() {
        for p in [3, 5] {
            let r = n2k_census(&plus(p), &[], 9).unwrap();
            assert_eq!(r.count, 0);
            assert!(!r.unbounded_hint);
        }
    }

    #[test]
    fn odd_multiples_for_p3() {
        let c = plus(3);
        let g = QPoint::from_ints(-4, 2);
        let r = n2k_census(&c, std::slice::from_ref(&g), 9).unwrap();
        assert!(r.unbounded_hint);
        assert!(r.count >= 5);
        for k in [1, 3, 5, 7, 9] {
            let m = c.scalar_mul(k, &g).abs_y();
            assert!(r.census_points.contains(&m), "{k}P missing");
        }
        for pt in &r.census_points {
            assert!(c.is_on_curve(pt));
            assert!(in_negative_region(pt));
            assert!(is_double_in_k(&c, pt).unwrap());
        }
        assert_eq!(r.census_points[0], g);
    }
}
