use std::sync::Arc;

use proptest::prelude::*;
use tropical_torus::complex::{barycentric_triangulation, standard_complex};
use tropical_torus::paf::{
    build_model_function, check_strongly_convex, choose_twist_bound, search_epsilon, sup_distance_to_quadratic,
    tate_iterate, twist, Cocycle, CocycleFunction, PiecewiseAffine, TestFunction, TwistBound,
};
use tropical_torus::{Lattice, Matrix, Polarization, Rational, RationalVector};

fn point(xs: &[(i64, i64)]) -> RationalVector {
    xs.iter().map(|&(a, b)| Rational::new(a, b)).collect()
}

fn unit_model(n: usize, eps: Rational) -> CocycleFunction {
    let lat = Lattice::integer(n);
    let c = Arc::new(barycentric_triangulation(&lat.generators(), &lat).unwrap());
    build_model_function(c, &Cocycle::symmetric(Polarization::identity(n)), &eps).unwrap()
}

/// A certified model for a small positive-definite form and linear term.
fn certified(gram: [[i64; 2]; 2], linear: [(i64, i64); 2]) -> CocycleFunction {
    let b = Polarization::new(Matrix::from_int_rows(&[&gram[0], &gram[1]])).unwrap();
    let lat = Lattice::integer(2);
    let (_, c) = standard_complex(&lat, &b).unwrap();
    let z = Cocycle::new(b, point(&linear)).unwrap();
    search_epsilon(Arc::new(c), &z, 20).unwrap().function
}

fn forms() -> impl Strategy<Value = [[i64; 2]; 2]> {
    prop_oneof![Just([[1, 0], [0, 1]]), Just([[2, 1], [1, 2]]), Just([[2, 0], [0, 3]]), Just([[3, -1], [-1, 2]])]
}

fn coords() -> impl Strategy<Value = (i64, i64)> {
    (-24i64..24, 1i64..9)
}

#[test]
fn tate_contraction_is_exact() {
    for (n, eps) in [(1, Rational::new(1, 8)), (1, Rational::new(3, 16)), (2, Rational::new(1, 8))] {
        let f0 = unit_model(n, eps);
        assert!(check_strongly_convex(&f0).pass);
        let d0 = sup_distance_to_quadratic(&f0).unwrap();
        assert!(d0.is_positive());
        for i in 0..=6 {
            let di = sup_distance_to_quadratic(&tate_iterate(&f0, i).unwrap()).unwrap();
            assert_eq!(di, &d0 * &Rational::pow2(-2 * i as i32), "n={n} i={i}");
        }
    }
}

#[test]
fn tate_iterates_match_rescaling() {
    let f0 = unit_model(2, Rational::new(1, 8));
    let f2 = tate_iterate(&f0, 2).unwrap();
    for u in [point(&[(1, 3), (2, 7)]), point(&[(-5, 4), (9, 8)]), point(&[(0, 1), (1, 2)])] {
        let lhs = f2.evaluate(&u).unwrap();
        let rhs = f0.evaluate(&u.scale(&Rational::from_integer(4))).unwrap() * Rational::new(1, 16);
        assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Certified functions satisfy the convexity inequality on random triples.
    #[test]
    fn certificates_are_sound(
        gram in forms(),
        ell in (coords(), coords()),
        u in (coords(), coords()),
        v in (coords(), coords()),
        t in 0i64..=16,
    ) {
        let f = certified(gram, [ell.0, ell.1]);
        let (u, v) = (point(&[u.0, u.1]), point(&[v.0, v.1]));
        let t = Rational::new(t, 16);
        let mid = &u.scale(&t) + &v.scale(&(Rational::one() - &t));
        let lhs = f.evaluate(&mid).unwrap();
        let rhs = &t * &f.evaluate(&u).unwrap() + (Rational::one() - &t) * f.evaluate(&v).unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn cocycle_functions_transform_by_the_cocycle(
        gram in forms(),
        ell in (coords(), coords()),
        lambda in prop::collection::vec(-3i64..=3, 2),
        u in (coords(), coords()),
    ) {
        let f = certified(gram, [ell.0, ell.1]);
        f.check_periodicity().unwrap();
        let lambda = RationalVector::from_ints(&lambda);
        let u = point(&[u.0, u.1]);
        let jump = f.cocycle().eval(&lambda, &u).unwrap();
        prop_assert_eq!(f.evaluate(&(&u + &lambda)).unwrap(), f.evaluate(&u).unwrap() + jump);
    }

    #[test]
    fn twists_add_pointwise_and_stay_convex_below_the_bound(
        gram in forms(),
        vertex in prop::collection::vec(0i64..4, 2),
        level in 0u32..=1,
        u in (coords(), coords()),
    ) {
        let f = certified(gram, [(0, 1), (0, 1)]);
        let fine = Arc::new(f.complex().dyadic_refine(level));
        // Local coordinates; off-vertex choices give the zero function.
        let t = TestFunction::hat(fine, &point(&[(vertex[0], 4), (vertex[1], 4)])).unwrap();
        t.check_periodicity(f.complex().period()).unwrap();
        let fi = tate_iterate(&f, level).unwrap();
        let tau = match choose_twist_bound(&fi, &t).unwrap() {
            TwistBound::Finite(b) => b / Rational::from_integer(2),
            TwistBound::Unbounded => Rational::one(),
        };
        let g = twist(&fi, &t, &tau).unwrap();
        prop_assert!(check_strongly_convex(&g).pass);
        let u = point(&[u.0, u.1]);
        let expected = fi.evaluate(&u).unwrap() + &tau * &t.evaluate(&u).unwrap();
        prop_assert_eq!(g.evaluate(&u).unwrap(), expected);
    }
}

#[test]
fn zero_perturbation_fails_with_zero_slack() {
    for n in [2, 3] {
        let cert = check_strongly_convex(&unit_model(n, Rational::zero()));
        assert!(!cert.pass);
        assert!(cert.witness.unwrap().slack.is_zero());
        assert!(cert.slacks.iter().all(|s| !s.slack.is_negative()));
    }
}
