//! Piecewise Haar measures and finite point measures on `ℝⁿ/Λ`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{PeriodicComplex, Simplex};
use crate::error::{check_dim, Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{Matrix, RationalVector};
use crate::paf::{PiecewiseAffine, TestFunction};
use crate::parallel;
use crate::rational::Rational;

/// A simplex carrying a constant positive density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub simplex: Simplex,
    pub density: Rational,
}

impl Atom {
    pub fn mass(&self) -> Result<Rational> {
        Ok(self.simplex.volume()? * &self.density)
    }
}

/// A finite sum of constant-density measures on rational simplices in `ℝⁿ/Λ`.
#[derive(Clone, Debug)]
pub struct PolytopalMeasure {
    lattice: Lattice,
    atoms: Vec<Atom>,
    dim: usize,
    /// Set when the atoms are exactly the cells of this `Λ`-periodic complex.
    support: Option<Arc<PeriodicComplex>>,
}

impl PolytopalMeasure {
    pub fn new(lattice: Lattice, atoms: Vec<Atom>) -> Result<Self> {
        let dim = atoms
            .first()
            .map(|a| a.simplex.dim())
            .ok_or_else(|| Error::InvalidArgument("a polytopal measure needs at least one atom".into()))?;
        for a in &atoms {
            check_dim(lattice.dim(), a.simplex.ambient_dim())?;
            check_dim(dim, a.simplex.dim())?;
            if !a.density.is_positive() {
                return Err(Error::InvalidArgument("atom densities must be positive".into()));
            }
        }
        Ok(Self { lattice, atoms, dim, support: None })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> Option<&Arc<PeriodicComplex>> {
        self.support.as_ref()
    }

    pub fn total_mass(&self) -> Result<Rational> {
        parallel::try_map(&self.atoms, Atom::mass).map(|m| m.into_iter().sum())
    }

    /// Per-atom masses as `f64`, for sampling.
    fn weights(&self) -> Result<Vec<f64>> {
        Ok(parallel::try_map(&self.atoms, Atom::mass)?.iter().map(Rational::to_f64).collect())
    }
}

/// The Haar probability measure of `ℝⁿ/lat`, cut along the cells of `c`.
pub fn haar(lat: &Lattice, c: &PeriodicComplex) -> Result<PolytopalMeasure> {
    let expanded = Arc::new(c.over_sublattice(lat)?);
    let density = lat.covolume().recip();
    let atoms = expanded.cells().into_iter().map(|simplex| Atom { simplex, density: density.clone() }).collect();
    let mut mu = PolytopalMeasure::new(lat.clone(), atoms)?;
    mu.support = Some(expanded);
    Ok(mu)
}

/// Finitely many Dirac masses of equal weight, reduced into the fundamental parallelotope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    lattice: Lattice,
    points: Vec<RationalVector>,
}

impl EmpiricalMeasure {
    pub fn new(lattice: Lattice, points: Vec<RationalVector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("an empirical measure needs at least one point".into()));
        }
        let points = points.iter().map(|p| lattice.reduce_mod(p)).collect::<Result<_>>()?;
        Ok(Self { lattice, points })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn points(&self) -> &[RationalVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One point per atom at its barycenter; exact for cell-affine functions
/// when all atoms carry equal mass.
pub fn barycenter_quadrature(mu: &PolytopalMeasure) -> Result<EmpiricalMeasure> {
    let masses = parallel::try_map(&mu.atoms, Atom::mass)?;
    if masses.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::InvalidArgument("atoms carry unequal masses".into()));
    }
    EmpiricalMeasure::new(mu.lattice.clone(), mu.atoms.iter().map(|a| a.simplex.barycenter()).collect())
}

/// `∫ t dμ`, exact.
///
/// Either every atom lies in a cell of `t`, or (for a measure built on a
/// complex) every cell of `t` lies in an atom; otherwise there is no common
/// refinement to integrate over.
pub fn integrate(t: &TestFunction, mu: &PolytopalMeasure) -> Result<Rational> {
    match integrate_atoms_in_cells(t, mu) {
        Err(Error::NoCommonRefinement) => integrate_cells_in_atoms(t, mu),
        other => other,
    }
}

fn integrate_atoms_in_cells(t: &TestFunction, mu: &PolytopalMeasure) -> Result<Rational> {
    let c = t.complex();
    let parts = parallel::try_map(&mu.atoms, |atom| {
        let bary = atom.simplex.barycenter();
        let loc = c.locate(&bary)?;
        let local: Vec<RationalVector> =
            atom.simplex.vertices().iter().map(|v| c.to_local(v)).collect::<Result<_>>()?;
        if !local.iter().all(|v| c.contains_local(loc.cell, &loc.shift, v)) {
            return Err(Error::NoCommonRefinement);
        }
        let piece = t.translated_piece(loc.cell, &c.translation(&loc.shift));
        Ok(atom.mass()? * piece.eval(&bary))
    })?;
    Ok(parts.into_iter().sum())
}

fn integrate_cells_in_atoms(t: &TestFunction, mu: &PolytopalMeasure) -> Result<Rational> {
    let support = mu.support.as_ref().ok_or(Error::NoCommonRefinement)?;
    if mu.dim != mu.lattice.dim() {
        return Err(Error::NoCommonRefinement);
    }
    let tc = t.complex();
    let cells = if tc.period() == &mu.lattice {
        (**tc).clone()
    } else {
        tc.over_sublattice(&mu.lattice).map_err(|_| Error::NoCommonRefinement)?
    };
    if !PeriodicComplex::is_refinement(&cells, support).map_err(|_| Error::NoCommonRefinement)? {
        return Err(Error::NoCommonRefinement);
    }
    let parts = parallel::try_map_range(cells.len(), |i| {
        let cell = cells.cell(i);
        let bary = cell.barycenter();
        let atom = support.locate(&bary)?.cell;
        let value = t.evaluate(&bary)?;
        Ok::<_, Error>(cell.volume()? * &mu.atoms[atom].density * value)
    })?;
    Ok(parts.into_iter().sum())
}

/// `(1/|e|)·Σ t(p)`.
pub fn integrate_empirical(t: &TestFunction, e: &EmpiricalMeasure) -> Result<Rational> {
    Ok(integrate_empirical_many(std::slice::from_ref(t), e)?.remove(0))
}

/// Empirical integrals of several functions sharing one complex, locating
/// each point once.
pub fn integrate_empirical_many(tests: &[TestFunction], e: &EmpiricalMeasure) -> Result<Vec<Rational>> {
    let Some(first) = tests.first() else {
        return Ok(Vec::new());
    };
    let c = first.complex();
    let shared = tests.iter().all(|t| Arc::ptr_eq(t.complex(), c));
    if !shared {
        return tests.iter().map(|t| integrate_empirical(t, e)).collect();
    }
    let rows = parallel::try_map(&e.points, |p| {
        let loc = c.locate(p)?;
        let lambda = c.translation(&loc.shift);
        Ok::<_, Error>(tests.iter().map(|t| t.translated_piece(loc.cell, &lambda).eval(p)).collect::<Vec<_>>())
    })?;
    let inv = Rational::from_integer(e.len() as i64).recip();
    Ok((0..tests.len()).map(|k| rows.iter().map(|r| &r[k]).sum::<Rational>() * &inv).collect())
}

/// `x ↦ M·x + offset`, descending to `source → target` quotients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralAffineMap {
    matrix: Matrix,
    offset: RationalVector,
    source: Lattice,
    target: Lattice,
}

impl IntegralAffineMap {
    pub fn new(matrix: Matrix, offset: RationalVector, source: Lattice, target: Lattice) -> Result<Self> {
        check_dim(source.dim(), matrix.cols())?;
        check_dim(target.dim(), matrix.rows())?;
        check_dim(target.dim(), offset.dim())?;
        for g in source.generators() {
            if !target.contains(&matrix.mul_vec(&g)?)? {
                return Err(Error::NotIntegral);
            }
        }
        Ok(Self { matrix, offset, source, target })
    }

    pub fn identity(lat: &Lattice) -> Self {
        let n = lat.dim();
        Self::new(Matrix::identity(n), RationalVector::zeros(n), lat.clone(), lat.clone()).expect("identity")
    }

    /// `(u₁, …, u_N) ↦ (u₂ − u₁, …, u_N − u_{N−1})` on `Λᴺ → Λᴺ⁻¹`.
    pub fn difference(lat: &Lattice, copies: usize) -> Result<Self> {
        if copies < 2 {
            return Err(Error::InvalidArgument("the difference map needs at least two copies".into()));
        }
        let n = lat.dim();
        let mut m = Matrix::zeros(n * (copies - 1), n * copies);
        for k in 0..copies - 1 {
            for i in 0..n {
                m[(k * n + i, k * n + i)] = -Rational::one();
                m[(k * n + i, (k + 1) * n + i)] = Rational::one();
            }
        }
        Self::new(m, RationalVector::zeros(n * (copies - 1)), lat.power(copies), lat.power(copies - 1))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn offset(&self) -> &RationalVector {
        &self.offset
    }

    pub fn source(&self) -> &Lattice {
        &self.source
    }

    pub fn target(&self) -> &Lattice {
        &self.target
    }

    pub fn apply(&self, x: &RationalVector) -> Result<RationalVector> {
        Ok(&self.matrix.mul_vec(x)? + &self.offset)
    }
}

pub fn pushforward_empirical(e: &EmpiricalMeasure, a: &IntegralAffineMap) -> Result<EmpiricalMeasure> {
    check_dim(a.source.dim(), e.lattice.dim())?;
    let pts = parallel::try_map(&e.points, |p| a.apply(p))?;
    EmpiricalMeasure::new(a.target.clone(), pts)
}

/// Exact image measure; each atom must map injectively with rational
/// image volume.
pub fn pushforward_polytopal(mu: &PolytopalMeasure, a: &IntegralAffineMap) -> Result<PolytopalMeasure> {
    check_dim(a.source.dim(), mu.lattice.dim())?;
    let atoms = parallel::try_map(&mu.atoms, |atom| {
        let image: Vec<RationalVector> = atom.simplex.vertices().iter().map(|v| a.apply(v)).collect::<Result<_>>()?;
        let shift = a.target.reduce_with_shift(&image[0])?.1;
        let back = a.target.point(&shift)?;
        let image: Vec<RationalVector> = image.iter().map(|v| v - &back).collect();
        let img = Simplex::new(image).map_err(|_| Error::NotInjective)?;
        let ratio = atom.simplex.volume()? / img.volume()?;
        Ok::<_, Error>(Atom { simplex: img, density: &atom.density * &ratio })
    })?;
    PolytopalMeasure::new(a.target.clone(), atoms)
}

const BATCH: usize = 4096;

/// Samples `μ` (atoms chosen in proportion to mass, uniform within atoms)
/// and maps the samples. Batch `k` draws from stream `k` of a generator
/// seeded with `seed`, so output does not depend on scheduling.
pub fn monte_carlo_pushforward(
    mu: &PolytopalMeasure,
    a: &IntegralAffineMap,
    samples: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    check_dim(a.source.dim(), mu.lattice.dim())?;
    let weights = mu.weights()?;
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let k = mu.dim;
    let denom = Rational::pow2(-32);
    let batches = samples.div_ceil(BATCH);
    let chunks = parallel::try_map_range(batches, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let count = BATCH.min(samples - b * BATCH);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let target = rng.random::<f64>() * acc;
            let idx = cumulative.partition_point(|&c| c <= target).min(cumulative.len() - 1);
            let mut cuts: Vec<u64> = (0..k).map(|_| rng.random::<u32>() as u64).collect();
            cuts.sort_unstable();
            cuts.push(1 << 32);
            let mut prev = 0u64;
            let verts = mu.atoms[idx].simplex.vertices();
            let mut x = RationalVector::zeros(mu.lattice.dim());
            for (v, &c) in verts.iter().zip(&cuts) {
                let w = Rational::from_integer((c - prev) as i64) * &denom;
                prev = c;
                if !w.is_zero() {
                    x = &x + &v.scale(&w);
                }
            }
            out.push(a.apply(&x)?);
        }
        Ok::<_, Error>(out)
    })?;
    EmpiricalMeasure::new(a.target.clone(), chunks.into_iter().flatten().collect())
}

fn check_radius(lat: &Lattice, delta: &Rational) -> Result<()> {
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("box radius must be positive".into()));
    }
    if (delta * Rational::from_integer(2)) * lat.inverse_row_norm() >= Rational::one() {
        return Err(Error::DeltaTooLarge(delta.to_string()));
    }
    Ok(())
}

/// Fraction of points within ∞-distance `δ` of `center` on the torus.
pub fn mass_near_empirical(e: &EmpiricalMeasure, center: &RationalVector, delta: &Rational) -> Result<Rational> {
    check_dim(e.lattice.dim(), center.dim())?;
    check_radius(&e.lattice, delta)?;
    let n = e.lattice.dim();
    let gens = e.lattice.generators();
    let corners: Vec<RationalVector> = (0..1usize << n)
        .map(|mask| {
            gens.iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .fold(RationalVector::zeros(n), |acc, (_, g)| &acc + g)
        })
        .collect();
    let hits = parallel::try_map(&e.points, |p| {
        let r = e.lattice.reduce_mod(&(p - center))?;
        Ok::<_, Error>(corners.iter().any(|c| (&r - c).max_abs() <= *delta))
    })?;
    let count = hits.into_iter().filter(|&h| h).count();
    Ok(Rational::new(count as i64, e.len() as i64))
}

/// Measure of the closed ∞-box of radius `δ` around `center`, by exact
/// clipping of each atom translate.
pub fn mass_near_polytopal(mu: &PolytopalMeasure, center: &RationalVector, delta: &Rational) -> Result<Rational> {
    let lat = &mu.lattice;
    check_dim(lat.dim(), center.dim())?;
    check_radius(lat, delta)?;
    let n = lat.dim();
    let corners: Vec<RationalVector> = (0..1usize << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { &center[i] + delta } else { &center[i] - delta }).collect())
        .collect();
    let box_coords: Vec<RationalVector> = corners.iter().map(|c| lat.coords(c)).collect::<Result<_>>()?;
    let parts = parallel::try_map(&mu.atoms, |atom| {
        let coords: Vec<RationalVector> =
            atom.simplex.vertices().iter().map(|v| lat.coords(v)).collect::<Result<_>>()?;
        let ranges: Vec<(i64, i64)> = (0..n)
            .map(|i| {
                let lo = coords.iter().map(|c| c[i].clone()).min().expect("vertex");
                let hi = coords.iter().map(|c| c[i].clone()).max().expect("vertex");
                let blo = box_coords.iter().map(|c| c[i].clone()).min().expect("corner");
                let bhi = box_coords.iter().map(|c| c[i].clone()).max().expect("corner");
                ((&blo - &hi).ceil().to_i64().expect("small"), (&bhi - &lo).floor().to_i64().expect("small"))
            })
            .collect();
        let jac = atom.simplex.volume()? * crate::complex::factorial(atom.simplex.dim());
        let mut total = Rational::zero();
        for lam in lattice_box(&ranges) {
            let shift = lat.point(&RationalVector::from_ints(&lam))?;
            let piece = atom.simplex.translate(&shift);
            let frac = clipped_fraction(&piece, center, delta);
            if !frac.is_zero() {
                total += frac;
            }
        }
        Ok::<_, Error>(total * &jac * &atom.density)
    })?;
    Ok(parts.into_iter().sum())
}

fn lattice_box(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(a, b) in ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                (a..=b).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Volume, in the simplex's barycentric parameter space, of the part of `s`
/// inside the box; multiply by `k!·vol(s)` for the true volume.
fn clipped_fraction(s: &Simplex, center: &RationalVector, delta: &Rational) -> Rational {
    let k = s.dim();
    let v0 = &s.vertices()[0];
    let edges = s.edges();
    let mut cons: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for j in 0..k {
        let mut a = vec![Rational::zero(); k];
        a[j] = -Rational::one();
        cons.push((a, Rational::zero()));
    }
    cons.push((vec![Rational::one(); k], Rational::one()));
    for i in 0..s.ambient_dim() {
        let row: Vec<Rational> = edges.iter().map(|e| e[i].clone()).collect();
        let rel = &center[i] - &v0[i];
        cons.push((row.clone(), &rel + delta));
        cons.push((row.iter().map(|x| -x).collect(), delta - &rel));
    }
    polytope_volume(cons, k)
}

/// Exact volume of `{x ∈ ℝᵏ : a·x ≤ b}` (assumed bounded), by the
/// recursive facet formula with coordinate projection.
pub fn polytope_volume(cons: Vec<(Vec<Rational>, Rational)>, k: usize) -> Rational {
    let cons = normalize_constraints(cons);
    let Some(cons) = cons else {
        return Rational::zero();
    };
    if k == 1 {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for (a, b) in &cons {
            let bound = b / &a[0];
            if a[0].is_positive() {
                hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
            } else {
                lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
            }
        }
        return match (lo, hi) {
            (Some(l), Some(h)) if h > l => h - l,
            (Some(_), Some(_)) => Rational::zero(),
            _ => panic!("unbounded one-dimensional polytope"),
        };
    }
    let mut total = Rational::zero();
    for (i, (ai, bi)) in cons.iter().enumerate() {
        if bi.is_zero() {
            continue;
        }
        let j = ai.iter().position(|x| !x.is_zero()).expect("normalized rows are nonzero");
        let pivot = &ai[j];
        let reduced: Vec<(Vec<Rational>, Rational)> = cons
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != i)
            .map(|(_, (al, bl))| {
                let f = &al[j] / pivot;
                let a: Vec<Rational> = (0..k).filter(|&r| r != j).map(|r| &al[r] - &(&f * &ai[r])).collect();
                (a, bl - &(&f * bi))
            })
            .collect();
        let facet = polytope_volume(reduced, k - 1);
        if !facet.is_zero() {
            total += bi * &facet / pivot.abs();
        }
    }
    total / Rational::from_integer(k as i64)
}

/// Scales rows to unit max-norm and removes duplicates. Returns `None` for
/// an infeasible zero row.
fn normalize_constraints(cons: Vec<(Vec<Rational>, Rational)>) -> Option<Vec<(Vec<Rational>, Rational)>> {
    let mut out: Vec<(Vec<Rational>, Rational)> = Vec::with_capacity(cons.len());
    for (a, b) in cons {
        let m = a.iter().map(Rational::abs).fold(Rational::zero(), Rational::max);
        if m.is_zero() {
            if b.is_negative() {
                return None;
            }
            continue;
        }
        let inv = m.recip();
        let row = (a.iter().map(|x| x * &inv).collect::<Vec<_>>(), &b * &inv);
        if !out.contains(&row) {
            out.push(row);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::barycentric_triangulation;
    use crate::rational::q;

    fn unit(n: usize, level: u32) -> PeriodicComplex {
        let lat = Lattice::integer(n);
        barycentric_triangulation(&lat.generators(), &lat).unwrap().dyadic_refine(level)
    }

    fn pt(xs: &[(i64, i64)]) -> RationalVector {
        xs.iter().map(|&(a, b)| q(a, b)).collect()
    }

    #[test]
    fn haar_masses() {
        let mu = haar(&Lattice::integer(1), &unit(1, 0)).unwrap();
        assert_eq!(mu.atoms().len(), 2);
        assert_eq!(mu.atoms()[0].density, q(1, 1));
        assert_eq!(mu.total_mass().unwrap(), q(1, 1));
        let lat2 = Lattice::new(Matrix::from_int_rows(&[&[2]])).unwrap();
        let c2 = barycentric_triangulation(&lat2.generators(), &lat2).unwrap();
        let mu2 = haar(&lat2, &c2).unwrap();
        assert_eq!(mu2.atoms()[0].density, q(1, 2));
        assert_eq!(mu2.total_mass().unwrap(), q(1, 1));
        assert_eq!(haar(&Lattice::integer(2), &unit(2, 2)).unwrap().total_mass().unwrap(), q(1, 1));
    }

    #[test]
    fn tent_integrals() {
        let c = Arc::new(unit(1, 0));
        let tent = TestFunction::hat(c.clone(), &pt(&[(1, 2)])).unwrap().scale(&q(1, 2));
        let mu = haar(&Lattice::integer(1), &c).unwrap();
        assert_eq!(integrate(&tent, &mu).unwrap(), q(1, 4));
        let one = TestFunction::constant(c.clone(), q(1, 1));
        assert_eq!(integrate(&one, &mu).unwrap(), q(1, 1));
        let grid2 = EmpiricalMeasure::new(Lattice::integer(1), vec![pt(&[(0, 1)]), pt(&[(1, 2)])]).unwrap();
        assert_eq!(integrate_empirical(&tent, &grid2).unwrap(), q(1, 4));
        let grid1 = EmpiricalMeasure::new(Lattice::integer(1), vec![pt(&[(0, 1)])]).unwrap();
        assert_eq!(integrate_empirical(&tent, &grid1).unwrap(), q(0, 1));
    }

    #[test]
    fn coarse_measure_against_fine_test_uses_cell_route() {
        let fine = Arc::new(unit(1, 2));
        let mu = haar(&Lattice::integer(1), &unit(1, 0)).unwrap();
        let tent = TestFunction::hat(fine, &pt(&[(1, 4)])).unwrap();
        assert_eq!(integrate(&tent, &mu).unwrap(), q(1, 8));
    }

    #[test]
    fn box_masses() {
        let mu = haar(&Lattice::integer(1), &unit(1, 0)).unwrap();
        assert_eq!(mass_near_polytopal(&mu, &pt(&[(0, 1)]), &q(1, 10)).unwrap(), q(1, 5));
        let mu2 = haar(&Lattice::integer(2), &unit(2, 0)).unwrap();
        assert_eq!(mass_near_polytopal(&mu2, &pt(&[(0, 1), (0, 1)]), &q(1, 10)).unwrap(), q(1, 25));
        assert_eq!(mass_near_polytopal(&mu2, &pt(&[(1, 3), (5, 7)]), &q(1, 10)).unwrap(), q(1, 25));
        assert!(matches!(mass_near_polytopal(&mu, &pt(&[(0, 1)]), &q(1, 2)), Err(Error::DeltaTooLarge(_))));
        let grid = EmpiricalMeasure::new(Lattice::integer(1), (0..4).map(|k| pt(&[(k, 4)])).collect()).unwrap();
        assert_eq!(mass_near_empirical(&grid, &pt(&[(0, 1)]), &q(1, 8)).unwrap(), q(1, 4));
        assert_eq!(mass_near_empirical(&grid, &pt(&[(7, 8)]), &q(1, 8)).unwrap(), q(1, 2));
    }

    #[test]
    fn polytope_volume_of_square_and_triangle() {
        let sq = vec![
            (vec![q(1, 1), q(0, 1)], q(1, 1)),
            (vec![q(-1, 1), q(0, 1)], q(0, 1)),
            (vec![q(0, 1), q(1, 1)], q(1, 1)),
            (vec![q(0, 1), q(-1, 1)], q(0, 1)),
            (vec![q(2, 1), q(0, 1)], q(2, 1)),
        ];
        assert_eq!(polytope_volume(sq, 2), q(1, 1));
        let tri = vec![
            (vec![q(-1, 1), q(0, 1)], q(-1, 2)),
            (vec![q(0, 1), q(-1, 1)], q(-1, 2)),
            (vec![q(1, 1), q(1, 1)], q(2, 1)),
        ];
        assert_eq!(polytope_volume(tri, 2), q(1, 2));
    }

    #[test]
    fn exact_pushforward_conserves_mass() {
        let mu = haar(&Lattice::integer(2), &unit(2, 0)).unwrap();
        let shear = IntegralAffineMap::new(
            Matrix::from_int_rows(&[&[1, 1], &[0, 1]]),
            pt(&[(1, 3), (0, 1)]),
            Lattice::integer(2),
            Lattice::integer(2),
        )
        .unwrap();
        let img = pushforward_polytopal(&mu, &shear).unwrap();
        assert_eq!(img.total_mass().unwrap(), q(1, 1));
        let collapse = IntegralAffineMap::difference(&Lattice::integer(1), 2).unwrap();
        assert_eq!(pushforward_polytopal(&mu, &collapse).unwrap_err(), Error::NotInjective);
        assert!(IntegralAffineMap::new(
            Matrix::from_rows(vec![vec![q(1, 2)]]).unwrap(),
            pt(&[(0, 1)]),
            Lattice::integer(1),
            Lattice::integer(1)
        )
        .is_err());
    }

    #[test]
    fn monte_carlo_is_seeded_and_collapses_to_offset() {
        let mu = haar(&Lattice::integer(2), &unit(2, 0)).unwrap();
        let id = IntegralAffineMap::identity(&Lattice::integer(2));
        let a = monte_carlo_pushforward(&mu, &id, 5000, 7).unwrap();
        let b = monte_carlo_pushforward(&mu, &id, 5000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5000);
        let zero = IntegralAffineMap::new(Matrix::zeros(1, 2), pt(&[(1, 3)]), Lattice::integer(2), Lattice::integer(1))
            .unwrap();
        let z = monte_carlo_pushforward(&mu, &zero, 100, 1).unwrap();
        assert!(z.points().iter().all(|p| *p == pt(&[(1, 3)])));
    }
}
