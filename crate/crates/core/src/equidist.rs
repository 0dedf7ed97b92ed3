//! Grid equidistribution, the fixed-denominator obstruction and the
//! diagonal collapse experiment.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{barycentric_triangulation, standard_complex, PeriodicComplex, Simplex};
use crate::error::{check_dim, Error, Result};
use crate::lattice::{Lattice, Polarization};
use crate::linalg::{affine_rank, RationalVector};
use crate::measure::{
    haar, integrate, integrate_empirical_many, mass_near_empirical, monte_carlo_pushforward, EmpiricalMeasure,
    IntegralAffineMap, PolytopalMeasure,
};
use crate::paf::{PiecewiseAffine, TestFunction};
use crate::parallel;
use crate::rational::Rational;

/// Deepest refinement level experiments accept.
pub const MAX_LEVEL: u32 = 6;

/// Level of the tent on `[¼, ¾]` for `e = 1`, `n = 1`.
pub const DEFAULT_WITNESS_LEVEL: u32 = 1;

/// All points of `{0, …, m−1}ⁿ` in lexicographic order.
fn index_box(n: usize, m: u64) -> impl Iterator<Item = Vec<u64>> {
    let total = (m as u128).pow(n as u32);
    (0..total).map(move |mut k| {
        let mut idx = vec![0u64; n];
        for slot in idx.iter_mut().rev() {
            *slot = (k % m as u128) as u64;
            k /= m as u128;
        }
        idx
    })
}

/// The `mⁿ` points of `(1/m)Λ/Λ`.
pub fn torsion_grid(lat: &Lattice, m: u64) -> Result<EmpiricalMeasure> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid order must be at least 1".into()));
    }
    let n = lat.dim();
    let den = m as i64;
    let idx: Vec<Vec<u64>> = index_box(n, m).collect();
    let points = parallel::try_map(&idx, |k| {
        let c: RationalVector = k.iter().map(|&x| Rational::new(x as i64, den)).collect();
        lat.point(&c)
    })?;
    EmpiricalMeasure::new(lat.clone(), points)
}

/// A finite test family with exact reference integrals and sup norms.
#[derive(Clone, Debug)]
pub struct TestFamily {
    pub tests: Vec<TestFunction>,
    pub integrals: Vec<Rational>,
    pub sups: Vec<Rational>,
}

impl TestFamily {
    pub fn new(tests: Vec<TestFunction>, mu: &PolytopalMeasure) -> Result<Self> {
        if tests.is_empty() {
            return Err(Error::InvalidArgument("test family is empty".into()));
        }
        let integrals = tests.iter().map(|t| integrate(t, mu)).collect::<Result<_>>()?;
        let sups = tests.iter().map(TestFunction::sup_abs).collect();
        Ok(Self { tests, integrals, sups })
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    /// `max_t |∫t de − ∫t dμ| / (1 + sup|t|)`.
    pub fn discrepancy(&self, e: &EmpiricalMeasure) -> Result<Rational> {
        let emp = integrate_empirical_many(&self.tests, e)?;
        Ok(emp
            .iter()
            .zip(&self.integrals)
            .zip(&self.sups)
            .map(|((a, b), s)| (a - b).abs() / (Rational::one() + s))
            .fold(Rational::zero(), Rational::max))
    }
}

pub fn discrepancy(e: &EmpiricalMeasure, mu: &PolytopalMeasure, tests: &[TestFunction]) -> Result<Rational> {
    TestFamily::new(tests.to_vec(), mu)?.discrepancy(e)
}

/// Hats at every vertex orbit of `complex`, then `random` seeded integer
/// combinations of them with coefficients in `[−3, 3]`.
pub fn standard_test_family(complex: Arc<PeriodicComplex>, random: usize, seed: u64) -> Result<Vec<TestFunction>> {
    let hats = parallel::try_map(&complex.vertex_orbits(), |v| TestFunction::hat(complex.clone(), v))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests = hats.clone();
    while tests.len() < hats.len() + random {
        let coeffs: Vec<i64> = hats.iter().map(|_| rng.random_range(-3..=3)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let mut t = TestFunction::constant(complex.clone(), Rational::zero());
        for (h, &c) in hats.iter().zip(&coeffs) {
            if c != 0 {
                t = t.add_scaled(h, &Rational::from_integer(c))?;
            }
        }
        tests.push(t);
    }
    Ok(tests)
}

/// Inputs to [`run_equidistribution`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquidistConfig {
    pub lattice: Lattice,
    pub polarization: Polarization,
    pub level: u32,
    pub grid_orders: Vec<u64>,
    pub random_tests: usize,
    pub seed: u64,
}

impl EquidistConfig {
    /// Level 1, grids `2, 4, …, 512`, eight random combinations.
    pub fn standard(lattice: Lattice) -> Self {
        let n = lattice.dim();
        Self {
            lattice,
            polarization: Polarization::identity(n),
            level: 1,
            grid_orders: (1..=9).map(|k| 1u64 << k).collect(),
            random_tests: 8,
            seed: 0,
        }
    }
}

/// Ratios `disc(2m)/disc(m)` must stay at or below this for `m ≥` [`RATIO_FROM`].
pub fn ratio_threshold() -> Rational {
    Rational::new(3, 4)
}

pub const RATIO_FROM: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioStatus {
    /// No halved predecessor, or predecessor below the checked range.
    Unchecked,
    Pass,
    Fail,
    /// Both discrepancies are exactly zero.
    Aligned,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub m: u64,
    pub discrepancy: Rational,
    /// `disc(m)/disc(m/2)` when the predecessor is nonzero.
    pub ratio: Option<Rational>,
    pub status: RatioStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistReport {
    pub dim: usize,
    pub level: u32,
    pub superlattice_index: u64,
    pub test_count: usize,
    pub ratio_threshold: Rational,
    pub ratio_from: u64,
    pub rows: Vec<GridRow>,
    pub aligned: usize,
    pub pass: bool,
}

pub fn run_equidistribution(cfg: &EquidistConfig) -> Result<EquidistReport> {
    if cfg.level > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!("level {} exceeds {MAX_LEVEL}", cfg.level)));
    }
    if cfg.grid_orders.contains(&0) {
        return Err(Error::InvalidArgument("grid orders must be at least 1".into()));
    }
    let lat = &cfg.lattice;
    let (index, c0) = standard_complex(lat, &cfg.polarization)?;
    let cj = c0.dyadic_refine(cfg.level);
    let expanded = Arc::new(if cj.period() == lat { cj } else { cj.over_sublattice(lat)? });
    let mu = haar(lat, &expanded)?;
    let family = TestFamily::new(standard_test_family(expanded, cfg.random_tests, cfg.seed)?, &mu)?;
    let discs =
        cfg.grid_orders.iter().map(|&m| family.discrepancy(&torsion_grid(lat, m)?)).collect::<Result<Vec<_>>>()?;
    let threshold = ratio_threshold();
    let rows: Vec<GridRow> = cfg
        .grid_orders
        .iter()
        .zip(&discs)
        .map(|(&m, d)| {
            let prev =
                (m % 2 == 0).then(|| cfg.grid_orders.iter().position(|&p| p == m / 2)).flatten().map(|k| &discs[k]);
            let ratio = prev.filter(|p| !p.is_zero()).map(|p| d / p);
            let status = match prev {
                Some(p) if m / 2 >= RATIO_FROM => match (p.is_zero(), d.is_zero()) {
                    (true, true) => RatioStatus::Aligned,
                    (true, false) => RatioStatus::Fail,
                    _ if ratio.as_ref().is_some_and(|r| *r <= threshold) => RatioStatus::Pass,
                    _ => RatioStatus::Fail,
                },
                _ => RatioStatus::Unchecked,
            };
            GridRow { m, discrepancy: d.clone(), ratio, status }
        })
        .collect();
    let aligned = rows.iter().filter(|r| r.status == RatioStatus::Aligned).count();
    let pass = rows.iter().all(|r| r.status != RatioStatus::Fail);
    Ok(EquidistReport {
        dim: lat.dim(),
        level: cfg.level,
        superlattice_index: index,
        test_count: family.len(),
        ratio_threshold: threshold,
        ratio_from: RATIO_FROM,
        rows,
        aligned,
        pass,
    })
}

/// A nonnegative `(1/e)Λ`-periodic bump vanishing on `(1/e)Λ/Λ`.
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub level: u32,
    /// `∫ t` against Haar on `Λ`.
    pub integral: Rational,
    pub sup: Rational,
    /// `integral / (1 + sup)`.
    pub lower_bound: Rational,
    pub witness: TestFunction,
}

/// Hats at the cell centers `(1/e)(Λ-coords + ½)` of a barycentric
/// subdivision of `(1/e)Λ`, at the first level from `witness_level` on where
/// the witness vanishes on the grid.
pub fn fixed_denominator_obstruction(lat: &Lattice, e: u64, witness_level: u32) -> Result<Obstruction> {
    if e == 0 {
        return Err(Error::InvalidArgument("denominator must be at least 1".into()));
    }
    let fine = Lattice::new(lat.basis().scale(&Rational::new(1, e as i64)))?;
    let base = barycentric_triangulation(&fine.generators(), &fine)?;
    let center = RationalVector(vec![Rational::new(1, 2); lat.dim()]);
    let grid = torsion_grid(lat, e)?;
    for level in witness_level..=MAX_LEVEL {
        let complex = Arc::new(base.dyadic_refine(level));
        let witness = TestFunction::hat(complex.clone(), &center)?;
        let vanishes = grid.points().iter().map(|p| witness.evaluate(p)).collect::<Result<Vec<_>>>()?;
        if !vanishes.iter().all(Rational::is_zero) {
            continue;
        }
        let mu = haar(lat, &complex)?;
        let integral = integrate(&witness, &mu)?;
        if !integral.is_positive() {
            continue;
        }
        let sup = witness.sup_abs();
        let lower_bound = &integral / (Rational::one() + &sup);
        return Ok(Obstruction { level, integral, sup, lower_bound, witness });
    }
    Err(Error::WitnessLevelTooCoarse { denominator: e, max_level: MAX_LEVEL })
}

/// `count` seeded points drawn with repetition from `(1/e)Λ/Λ`.
pub fn random_grid_measure(lat: &Lattice, e: u64, count: usize, seed: u64) -> Result<EmpiricalMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = e as i64;
    let points = (0..count)
        .map(|_| {
            let c: RationalVector = (0..lat.dim()).map(|_| Rational::new(rng.random_range(0..e) as i64, den)).collect();
            lat.point(&c)
        })
        .collect::<Result<_>>()?;
    EmpiricalMeasure::new(lat.clone(), points)
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub dim: usize,
    pub denominator: u64,
    pub level: u32,
    pub integral: Rational,
    pub sup: Rational,
    pub lower_bound: Rational,
    pub trials: usize,
    /// Smallest discrepancy seen over the random grid measures.
    pub min_discrepancy: Rational,
    pub pass: bool,
}

/// Builds the obstruction and checks it against `trials` random grid measures.
pub fn run_obstruction(
    lat: &Lattice,
    e: u64,
    witness_level: u32,
    trials: usize,
    seed: u64,
) -> Result<ObstructionReport> {
    let ob = fixed_denominator_obstruction(lat, e, witness_level)?;
    let (_, c0) = standard_complex(lat, &Polarization::identity(lat.dim()))?;
    let mu = haar(lat, &c0)?;
    let family = TestFamily::new(vec![ob.witness.clone()], &mu)?;
    let discs = parallel::try_map_range(trials, |k| {
        let size = 1 + (k % 17);
        family.discrepancy(&random_grid_measure(lat, e, size, seed.wrapping_add(k as u64))?)
    })?;
    let min_discrepancy = discs.iter().cloned().min().unwrap_or_else(|| ob.lower_bound.clone());
    Ok(ObstructionReport {
        dim: lat.dim(),
        denominator: e,
        level: ob.level,
        pass: discs.iter().all(|d| *d >= ob.lower_bound),
        integral: ob.integral,
        sup: ob.sup,
        lower_bound: ob.lower_bound,
        trials,
        min_discrepancy,
    })
}

/// Inputs to [`collapse_experiment`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollapseConfig {
    pub lattice: Lattice,
    pub copies: usize,
    /// A simplex in `(ℝⁿ)ᴺ` whose vertices repeat one point of `ℝⁿ` across
    /// all blocks; defaults to the diagonal copy of a flag simplex of `Λ`.
    #[serde(default)]
    pub face: Option<Simplex>,
    pub deltas: Vec<Rational>,
    pub samples: usize,
    pub seed: u64,
}

impl CollapseConfig {
    pub fn standard(lattice: Lattice, copies: usize) -> Self {
        Self {
            lattice,
            copies,
            face: None,
            deltas: (3..=6).map(|k| Rational::pow2(-k)).collect(),
            samples: 100_000,
            seed: 0,
        }
    }
}

/// Ratios `mass(δ)/mass(δ/2)` below this indicate an atom at the origin.
pub fn atom_threshold() -> Rational {
    Rational::new(9, 5)
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaRow {
    pub delta: Rational,
    pub mass: Rational,
    /// `mass(2δ)/mass(δ)` when `2δ` precedes this row.
    pub ratio: Option<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    pub dim: usize,
    pub copies: usize,
    pub face_dim: usize,
    /// Every face vertex maps to exactly 0.
    pub face_collapses: bool,
    /// Largest image dimension over product cells containing a `face_dim`-face in the kernel.
    pub max_image_dim: usize,
    /// `(N−1)·face_dim` bound on that image dimension.
    pub image_dim_bound: usize,
    pub image_dim_bound_holds: bool,
    pub samples: usize,
    pub seed: u64,
    pub atom_threshold: Rational,
    pub rows: Vec<DeltaRow>,
    pub pass: bool,
}

fn default_face(lat: &Lattice, copies: usize) -> Result<Simplex> {
    let n = lat.dim();
    let mut v = vec![0i64; n];
    let mut verts = vec![lat.point(&RationalVector::from_ints(&v))?];
    for j in 0..n {
        v[j] = 1;
        verts.push(lat.point(&RationalVector::from_ints(&v))?);
    }
    Simplex::new(verts.iter().map(|p| p.iter().cycle().take(n * copies).cloned().collect()).collect())
}

fn is_diagonal(v: &RationalVector, n: usize) -> bool {
    let blocks: Vec<&[Rational]> = v.0.chunks(n).collect();
    blocks.windows(2).all(|w| w[0] == w[1])
}

pub fn collapse_experiment(cfg: &CollapseConfig) -> Result<CollapseReport> {
    let lat = &cfg.lattice;
    let n = lat.dim();
    let big = n * cfg.copies;
    let alpha = IntegralAffineMap::difference(lat, cfg.copies)?;
    let face = match &cfg.face {
        Some(f) => f.clone(),
        None => default_face(lat, cfg.copies)?,
    };
    check_dim(big, face.ambient_dim())?;
    if let Some(v) = face.vertices().iter().find(|v| !is_diagonal(v, n)) {
        return Err(Error::MalformedDiagonalFace(format!("{v:?} differs across blocks")));
    }
    let face_dim = face.dim();
    let zero = RationalVector::zeros(n * (cfg.copies - 1));
    let face_collapses =
        face.vertices().iter().map(|v| alpha.apply(v)).collect::<Result<Vec<_>>>()?.iter().all(|w| *w == zero);

    let product = lat.power(cfg.copies);
    let kuhn = PeriodicComplex::kuhn(&product);
    let dims = parallel::try_map_range(kuhn.len(), |i| {
        let cell = kuhn.cell(i);
        let diag: Vec<RationalVector> = cell.vertices().iter().filter(|v| is_diagonal(v, n)).cloned().collect();
        let image: Vec<RationalVector> = cell.vertices().iter().map(|v| alpha.apply(v)).collect::<Result<_>>()?;
        Ok::<_, Error>((affine_rank(&diag), affine_rank(&image)))
    })?;
    let bound = (cfg.copies - 1) * face_dim;
    let max_image_dim = dims.iter().filter(|(k, _)| *k >= face_dim).map(|&(_, r)| r).max().unwrap_or(0);
    let image_dim_bound_holds = dims.iter().all(|&(k, r)| r + k <= big) && max_image_dim <= bound;

    let mu = haar(&product, &kuhn)?;
    let image = monte_carlo_pushforward(&mu, &alpha, cfg.samples, cfg.seed)?;
    let masses = cfg.deltas.iter().map(|d| mass_near_empirical(&image, &zero, d)).collect::<Result<Vec<_>>>()?;
    let threshold = atom_threshold();
    let rows: Vec<DeltaRow> = cfg
        .deltas
        .iter()
        .zip(&masses)
        .map(|(d, m)| {
            let twice = d * Rational::from_integer(2);
            let ratio = cfg.deltas.iter().position(|p| *p == twice).filter(|_| !m.is_zero()).map(|k| &masses[k] / m);
            DeltaRow { delta: d.clone(), mass: m.clone(), ratio }
        })
        .collect();
    let scaled = rows.iter().filter(|r| cfg.deltas.contains(&(&r.delta * Rational::from_integer(2))));
    let no_atom =
        scaled.clone().count() > 0 && scaled.into_iter().all(|r| r.ratio.as_ref().is_some_and(|x| *x >= threshold));
    Ok(CollapseReport {
        dim: n,
        copies: cfg.copies,
        face_dim,
        face_collapses,
        max_image_dim,
        image_dim_bound: bound,
        image_dim_bound_holds,
        samples: cfg.samples,
        seed: cfg.seed,
        atom_threshold: threshold,
        rows,
        pass: face_collapses && image_dim_bound_holds && no_atom,
    })
}
