use proptest::prelude::*;
use twinec::curve::{Curve, Point, QPoint, Sigma, TwinPrimePair};
use twinec::rank::{is_double_in_k, point_search, Region};

fn curve_with_point(idx: usize) -> (Curve, QPoint) {
    let (p, sigma) = [(3, Sigma::Plus), (11, Sigma::Plus), (17, Sigma::Minus), (41, Sigma::Minus)][idx];
    let c = Curve::from_pair(TwinPrimePair::new(p).unwrap(), sigma);
    let g = point_search(&c, 2000, Region::All).into_iter().find(|f| !f.torsion).expect("point of infinite order");
    (c, g.point)
}

fn element(c: &Curve, g: &QPoint, k: i64, t: usize) -> QPoint {
    let base = c.scalar_mul(k, g);
    if t == 3 {
        base
    } else {
        c.add(&base, &c.two_torsion()[t]).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scalar_mul_is_additive(idx in 0usize..4, m in -6i64..=6, n in -6i64..=6) {
        let (c, g) = curve_with_point(idx);
        let lhs = c.scalar_mul(m + n, &g);
        let rhs = c.add(&c.scalar_mul(m, &g), &c.scalar_mul(n, &g)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn group_law_is_commutative_and_associative(
        idx in 0usize..4, a in -4i64..=4, b in -4i64..=4, d in -4i64..=4,
        ta in 0usize..4, tb in 0usize..4, td in 0usize..4,
    ) {
        let (c, g) = curve_with_point(idx);
        let (x, y, z) = (element(&c, &g, a, ta), element(&c, &g, b, tb), element(&c, &g, d, td));
        prop_assert_eq!(c.add(&x, &y).unwrap(), c.add(&y, &x).unwrap());
        let left = c.add(&c.add(&x, &y).unwrap(), &z).unwrap();
        let right = c.add(&x, &c.add(&y, &z).unwrap()).unwrap();
        prop_assert!(c.is_on_curve(&left));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn doubles_halve_and_twist_preserves_sums(idx in 0usize..4, a in -4i64..=4, b in -4i64..=4, t in 0usize..4) {
        let (c, g) = curve_with_point(idx);
        let x = element(&c, &g, a, t);
        let y = element(&c, &g, b, 3);
        prop_assert_eq!(is_double_in_k(&c, &c.double(&x)), Ok(true));
        let tw = c.twist();
        let sum = c.twist_map(&c.add(&x, &y).unwrap()).unwrap();
        let parts = tw.add(&c.twist_map(&x).unwrap(), &c.twist_map(&y).unwrap()).unwrap();
        prop_assert_eq!(sum, parts);
    }
}

#[test]
fn twist_map_lands_on_twist() {
    let (c, g) = curve_with_point(0);
    let img = c.twist_map(&g).unwrap();
    assert!(c.twist().is_on_curve(&img));
    assert_eq!(c.twist_map(&Point::Infinity).unwrap(), Point::Infinity);
}
