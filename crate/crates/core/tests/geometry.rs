use std::collections::BTreeSet;

use proptest::prelude::*;
use tropical_torus::complex::{barycentric_triangulation, canonicalize, standard_complex};
use tropical_torus::lattice::{orthogonalize, superlattice};
use tropical_torus::paf::flag_chains;
use tropical_torus::{Lattice, Matrix, PeriodicComplex, Polarization, Rational, RationalVector};

fn int_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, n), n)
}

fn to_matrix(rows: &[Vec<i64>]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect()).collect()).unwrap()
}

/// `AᵀA + I`, always positive definite.
fn gram(n: usize) -> impl Strategy<Value = Polarization> {
    int_matrix(n).prop_map(move |rows| {
        let a = to_matrix(&rows);
        let g = a.transpose().mul(&a).unwrap();
        let rows =
            (0..n).map(|i| (0..n).map(|j| &g[(i, j)] + &Rational::from_integer((i == j) as i64)).collect()).collect();
        Polarization::new(Matrix::from_rows(rows).unwrap()).unwrap()
    })
}

/// Integer bases with columns divided by 1 or 2.
fn lattice(n: usize) -> impl Strategy<Value = Lattice> {
    (int_matrix(n), prop::collection::vec(1i64..=2, n))
        .prop_filter_map("singular", |(rows, dens)| {
            let cols: Vec<RationalVector> =
                (0..rows.len()).map(|j| rows.iter().map(|r| Rational::new(r[j], dens[j])).collect()).collect();
            Lattice::from_columns(&cols).ok()
        })
        .prop_filter("covolume at most 4", |l| l.covolume() <= Rational::from_integer(4))
}

fn dim_and_form() -> impl Strategy<Value = (Lattice, Polarization)> {
    (1usize..=2).prop_flat_map(|n| (lattice(n), gram(n)))
}

fn divisors_below(n: u64) -> impl Iterator<Item = u64> {
    (1..n).filter(move |d| n.is_multiple_of(*d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthogonal_vectors_lie_in_the_lattice((lat, b) in dim_and_form()) {
        let orth = orthogonalize(&lat, &b).unwrap();
        for (i, u) in orth.iter().enumerate() {
            prop_assert!(lat.contains(u).unwrap());
            for v in &orth[i + 1..] {
                prop_assert!(b.bilinear(u, v).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn superlattice_index_is_minimal((lat, b) in dim_and_form()) {
        let orth = orthogonalize(&lat, &b).unwrap();
        let (n, fine) = superlattice(&orth, &lat).unwrap();
        prop_assert!(fine.contains_lattice(&lat).unwrap());
        let frame = Matrix::from_columns(&orth).unwrap();
        for d in divisors_below(n) {
            let coarser = Lattice::new(frame.scale(&Rational::new(1, d as i64))).unwrap();
            prop_assert!(!coarser.contains_lattice(&lat).unwrap());
        }
    }

    #[test]
    fn reduction_is_idempotent_and_stays_in_the_coset(
        lat in lattice(2),
        xs in prop::collection::vec((-20i64..20, 1i64..7), 2),
    ) {
        let u: RationalVector = xs.iter().map(|&(a, b)| Rational::new(a, b)).collect();
        let r = lat.reduce_mod(&u).unwrap();
        prop_assert_eq!(lat.reduce_mod(&r).unwrap(), r.clone());
        prop_assert!(lat.contains(&(&u - &r)).unwrap());
        prop_assert!(lat.coords(&r).unwrap().iter().all(|c| !c.is_negative() && *c < Rational::one()));
    }

    #[test]
    fn standard_complexes_tile((lat, b) in dim_and_form(), level in 0u32..=2) {
        let (_, c0) = standard_complex(&lat, &b).unwrap();
        let c = c0.dyadic_refine(level);
        c.check_invariants().unwrap();
        prop_assert_eq!(c.total_volume(), c.period().covolume());
        let n = lat.dim() as u32;
        let per_cuboid = (1usize << n) * (1..=n as usize).product::<usize>();
        prop_assert_eq!(c.len(), per_cuboid << (n * level));
        let expanded = c.over_sublattice(&lat).unwrap();
        expanded.check_invariants().unwrap();
        prop_assert_eq!(expanded.total_volume(), lat.covolume());
    }

    #[test]
    fn adjacent_pairs_have_inner_normals((lat, b) in dim_and_form()) {
        let (_, c) = standard_complex(&lat, &b).unwrap();
        let c = c.dyadic_refine(1);
        let n = lat.dim();
        prop_assert_eq!(c.adjacent_pairs().len() * 2, c.len() * (n + 1));
        for p in c.adjacent_pairs() {
            let delta = c.cell(p.delta);
            let sigma = c.cell(p.sigma).translate(&p.translation);
            let f0 = &p.face.vertices()[0];
            prop_assert!(p.normal.dot(&(&delta.vertices()[p.delta_apex] - f0)).is_positive());
            prop_assert!(p.normal.dot(&(&sigma.vertices()[p.sigma_apex] - f0)).is_negative());
            for v in p.face.vertices() {
                prop_assert!(p.normal.dot(&(v - f0)).is_zero());
                prop_assert!(sigma.vertices().contains(v));
            }
        }
    }

    #[test]
    fn complexes_are_invariant_under_their_period(lat in lattice(2), k in prop::collection::vec(-3i64..=3, 2)) {
        let (_, c) = standard_complex(&lat, &Polarization::identity(2)).unwrap();
        let shift = c.period().point(&RationalVector::from_ints(&k)).unwrap();
        prop_assert_eq!(c.translated(&shift).unwrap(), c);
    }
}

#[test]
fn barycentric_cells_match_flag_enumeration() {
    for (n, expected) in [(1usize, 2usize), (2, 8), (3, 48)] {
        let lat = Lattice::integer(n);
        let c = barycentric_triangulation(&lat.generators(), &lat).unwrap();
        assert_eq!(c.len(), expected);
        let oracle: BTreeSet<_> = flag_chains(n).into_iter().map(canonicalize).collect();
        let cells: BTreeSet<_> = c.local_cells().iter().cloned().collect();
        assert_eq!(cells, oracle);
    }
}

#[test]
fn refinement_chain_in_two_dimensions() {
    let lat = Lattice::integer(2);
    let c = barycentric_triangulation(&lat.generators(), &lat).unwrap();
    let chain: Vec<PeriodicComplex> = (0..=4).map(|j| c.dyadic_refine(j)).collect();
    for j in 0..chain.len() {
        for k in j + 1..chain.len() {
            assert!(PeriodicComplex::is_refinement(&chain[k], &chain[j]).unwrap(), "{k} refines {j}");
        }
        if j > 0 {
            assert!(!PeriodicComplex::is_refinement(&chain[0], &chain[j]).unwrap());
        }
    }
}

#[test]
fn refinement_requires_compatible_periods() {
    let lat = Lattice::integer(1);
    let half = Lattice::new(Matrix::from_rows(vec![vec![Rational::new(1, 2)]]).unwrap()).unwrap();
    let c = barycentric_triangulation(&lat.generators(), &lat).unwrap();
    let fine = barycentric_triangulation(&half.generators(), &half).unwrap();
    assert!(PeriodicComplex::is_refinement(&fine, &c).is_err());
    assert!(!PeriodicComplex::is_refinement(&c, &fine).unwrap());
    let expanded = fine.over_sublattice(&lat).unwrap();
    assert!(PeriodicComplex::is_refinement(&expanded, &c).unwrap());
}
