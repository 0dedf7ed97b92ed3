use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use tropical_torus::complex::standard_complex;
use tropical_torus::equidist::{
    fixed_denominator_obstruction, random_grid_measure, standard_test_family, torsion_grid, TestFamily,
};
use tropical_torus::measure::{haar, integrate, monte_carlo_pushforward, pushforward_polytopal, IntegralAffineMap};
use tropical_torus::paf::{PiecewiseAffine, TestFunction};
use tropical_torus::{Lattice, Matrix, Polarization, Rational, RationalVector};

fn unimodular() -> impl Strategy<Value = Matrix> {
    prop_oneof![
        Just(Matrix::from_int_rows(&[&[1, 0], &[0, 1]])),
        Just(Matrix::from_int_rows(&[&[1, 1], &[0, 1]])),
        Just(Matrix::from_int_rows(&[&[2, 1], &[1, 1]])),
        Just(Matrix::from_int_rows(&[&[0, -1], &[1, 0]])),
        Just(Matrix::from_int_rows(&[&[1, 0], &[3, 1]])),
    ]
}

/// `t(· + a)`, exact when translation by `a` maps the complex to itself.
fn shifted(t: &TestFunction, a: &RationalVector) -> TestFunction {
    let c = t.complex().clone();
    TestFunction::from_vertex_values(c.clone(), |v| t.evaluate(&(&c.to_ambient(v) + a)).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pushforward_conserves_mass(
        m in unimodular(),
        level in 0u32..=1,
        offset in prop::collection::vec((-5i64..5, 1i64..5), 2),
        samples in 1usize..3000,
        seed in any::<u64>(),
    ) {
        let lat = Lattice::integer(2);
        let (_, c) = standard_complex(&lat, &Polarization::identity(2)).unwrap();
        let mu = haar(&lat, &c.dyadic_refine(level)).unwrap();
        let offset: RationalVector = offset.iter().map(|&(a, b)| Rational::new(a, b)).collect();
        let map = IntegralAffineMap::new(m, offset, lat.clone(), lat).unwrap();
        let image = pushforward_polytopal(&mu, &map).unwrap();
        prop_assert_eq!(image.total_mass().unwrap(), Rational::one());
        prop_assert_eq!(monte_carlo_pushforward(&mu, &map, samples, seed).unwrap().len(), samples);
    }

    #[test]
    fn haar_is_translation_invariant(
        level in 0u32..=2,
        vertex in prop::collection::vec(0i64..8, 2),
        shift in prop::collection::vec(-9i64..9, 2),
        weight in 1i64..4,
    ) {
        let lat = Lattice::integer(2);
        let (_, c) = standard_complex(&lat, &Polarization::identity(2)).unwrap();
        let c = Arc::new(c.dyadic_refine(level));
        let mu = haar(&lat, &c).unwrap();
        let v: RationalVector = vertex.iter().map(|&x| Rational::new(x, 8)).collect();
        let t = TestFunction::hat(c.clone(), &v).unwrap().scale(&Rational::from_integer(weight));
        let step = Rational::pow2(-(level as i32));
        let a: RationalVector = shift.iter().map(|&k| Rational::from_integer(k) * &step).collect();
        prop_assert_eq!(integrate(&shifted(&t, &a), &mu).unwrap(), integrate(&t, &mu).unwrap());
    }

    #[test]
    fn torsion_grids_are_invariant_under_division_points(
        m in 1u64..7,
        k in prop::collection::vec(-5i64..5, 2),
    ) {
        let lat = Lattice::new(Matrix::from_int_rows(&[&[2, 1], &[0, 1]])).unwrap();
        let grid = torsion_grid(&lat, m).unwrap();
        prop_assert_eq!(grid.len() as u64, m * m);
        let step = lat.point(&k.iter().map(|&x| Rational::new(x, m as i64)).collect()).unwrap();
        let before: BTreeSet<_> = grid.points().iter().cloned().collect();
        let after: BTreeSet<_> = grid.points().iter().map(|p| lat.reduce_mod(&(p + &step)).unwrap()).collect();
        prop_assert_eq!(before, after);
    }
}

#[test]
fn obstruction_bounds_every_grid_measure() {
    let z1 = Lattice::integer(1);
    let (_, c) = standard_complex(&z1, &Polarization::identity(1)).unwrap();
    let mu1 = haar(&z1, &c).unwrap();
    let z2 = Lattice::integer(2);
    let (_, c) = standard_complex(&z2, &Polarization::identity(2)).unwrap();
    let mu2 = haar(&z2, &c).unwrap();
    for trial in 0..100u64 {
        let (lat, mu) = if trial % 2 == 0 { (&z1, &mu1) } else { (&z2, &mu2) };
        let e = 1 + trial % 4;
        let ob = fixed_denominator_obstruction(lat, e, (trial % 3) as u32).unwrap();
        assert!(ob.lower_bound.is_positive());
        let family = TestFamily::new(vec![ob.witness.clone()], mu).unwrap();
        let sample = random_grid_measure(lat, e, 1 + (trial % 23) as usize, trial).unwrap();
        assert!(family.discrepancy(&sample).unwrap() >= ob.lower_bound, "trial {trial}");
    }
}

#[test]
fn test_family_integrals_are_consistent_across_levels() {
    let lat = Lattice::integer(2);
    let (_, c) = standard_complex(&lat, &Polarization::identity(2)).unwrap();
    let c1 = Arc::new(c.dyadic_refine(1));
    let tests = standard_test_family(c1.clone(), 4, 9).unwrap();
    let coarse = haar(&lat, &c).unwrap();
    let fine = haar(&lat, &c1).unwrap();
    for t in &tests {
        assert_eq!(integrate(t, &coarse).unwrap(), integrate(t, &fine).unwrap());
    }
}

#[cfg(feature = "parallel")]
#[test]
fn monte_carlo_ignores_thread_count() {
    let lat = Lattice::integer(2);
    let (_, c) = standard_complex(&lat, &Polarization::identity(2)).unwrap();
    let mu = haar(&lat, &c).unwrap();
    let map = IntegralAffineMap::difference(&Lattice::integer(1), 2).unwrap();
    let many = monte_carlo_pushforward(&mu, &map, 20_000, 5).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| monte_carlo_pushforward(&mu, &map, 20_000, 5).unwrap());
    assert_eq!(many, one);
}
