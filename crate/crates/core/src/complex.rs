//! Rational simplices and periodic simplicial decompositions of ℝⁿ.
//!
//! A [`PeriodicComplex`] stores one representative per period orbit of
//! maximal cells, in the coordinates of its period lattice ("local"
//! coordinates, where the period is ℤⁿ). Representatives are canonical:
//! vertices sorted lexicographically, shifted so the first vertex lies in
//! `[0, 1)ⁿ`.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{orthogonalize, superlattice, Lattice, Polarization};
use crate::linalg::{affine_rank, primitive_integer, Matrix, RationalVector};
use crate::parallel;
use crate::rational::Rational;

/// A simplex given by its vertices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Simplex {
    vertices: Vec<RationalVector>,
}

impl Simplex {
    /// Checks the vertices share a dimension and are affinely independent.
    pub fn new(vertices: Vec<RationalVector>) -> Result<Self> {
        let n = vertices.first().map_or(0, RationalVector::dim);
        for v in &vertices {
            check_dim(n, v.dim())?;
        }
        if vertices.is_empty() || affine_rank(&vertices) + 1 != vertices.len() {
            return Err(Error::InvalidArgument("simplex vertices are affinely dependent".into()));
        }
        Ok(Self { vertices })
    }

    pub(crate) fn new_unchecked(vertices: Vec<RationalVector>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[RationalVector] {
        &self.vertices
    }

    /// Intrinsic dimension `k` (number of vertices minus one).
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn edges(&self) -> Vec<RationalVector> {
        self.vertices[1..].iter().map(|v| v - &self.vertices[0]).collect()
    }

    pub fn barycenter(&self) -> RationalVector {
        let n = self.ambient_dim();
        let k1 = Rational::from_integer(self.vertices.len() as i64);
        let mut s = RationalVector::zeros(n);
        for v in &self.vertices {
            s = &s + v;
        }
        s.scale(&k1.recip())
    }

    pub fn translate(&self, t: &RationalVector) -> Self {
        Self { vertices: self.vertices.iter().map(|v| v + t).collect() }
    }

    /// Squared `k`-volume, `det(EᵀE) / (k!)²` for the edge matrix `E`.
    pub fn squared_volume(&self) -> Rational {
        let k = self.dim();
        if k == 0 {
            return Rational::one();
        }
        let e = Matrix::from_columns(&self.edges()).expect("uniform dimension");
        let gram = e.transpose().mul(&e).expect("conformable");
        let f = factorial(k);
        gram.det().expect("square") / (&f * &f)
    }

    /// `k`-volume, when rational.
    pub fn volume(&self) -> Result<Rational> {
        if self.dim() == self.ambient_dim() {
            return Ok(full_volume(&self.vertices));
        }
        self.squared_volume().sqrt_exact().ok_or(Error::IrrationalVolume)
    }

    /// Barycentric coordinates of `p` in a full-dimensional simplex.
    pub fn barycentric(&self, p: &RationalVector) -> Result<Vec<Rational>> {
        check_dim(self.ambient_dim(), p.dim())?;
        if self.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: self.dim() });
        }
        let e = Matrix::from_columns(&self.edges())?;
        let x = e.solve(&(p - &self.vertices[0]))?;
        let mut out = Vec::with_capacity(x.dim() + 1);
        out.push(Rational::one() - x.iter().sum::<Rational>());
        out.extend(x.0);
        Ok(out)
    }

    pub fn contains(&self, p: &RationalVector) -> Result<bool> {
        Ok(self.barycentric(p)?.iter().all(|c| !c.is_negative()))
    }
}

pub(crate) fn factorial(k: usize) -> Rational {
    (1..=k as i64).map(Rational::from_integer).product()
}

fn full_volume(vertices: &[RationalVector]) -> Rational {
    let n = vertices.len() - 1;
    let edges: Vec<RationalVector> = vertices[1..].iter().map(|v| v - &vertices[0]).collect();
    let det = Matrix::from_columns(&edges).expect("uniform").det().expect("square");
    det.abs() / factorial(n)
}

/// `|det(v₁ − v₀, …, vₙ − v₀)| / n!` for an `n`-simplex in ℝⁿ.
pub fn simplex_volume(s: &Simplex) -> Result<Rational> {
    check_dim(s.ambient_dim(), s.dim())?;
    Ok(full_volume(s.vertices()))
}

/// The 2ⁿ vertices `Σ εⱼ·bⱼ′`, `ε ∈ {0,1}ⁿ`, with `εⱼ` the `j`-th bit of the index.
pub fn fundamental_cuboid(orth: &[RationalVector]) -> Vec<RationalVector> {
    let n = orth.len();
    let dim = orth.first().map_or(0, RationalVector::dim);
    (0..1usize << n)
        .map(|mask| {
            let mut v = RationalVector::zeros(dim);
            for (j, b) in orth.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    v = &v + b;
                }
            }
            v
        })
        .collect()
}

/// A cell representative in local coordinates.
pub type LocalCell = Vec<RationalVector>;

/// A period-translated cell: `cell + period·shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub cell: usize,
    /// Translation in period coordinates.
    pub shift: Vec<i64>,
}

/// Two maximal cells sharing a codimension-one face.
#[derive(Clone, Debug)]
pub struct AdjacentPair {
    pub delta: usize,
    pub sigma: usize,
    /// `σ` is taken translated by `period·sigma_shift`.
    pub sigma_shift: Vec<i64>,
    /// Ambient translation of `σ`.
    pub translation: RationalVector,
    /// Shared face, ambient coordinates, as a face of `Δ`.
    pub face: Simplex,
    /// Index in `Δ` of the vertex opposite the face.
    pub delta_apex: usize,
    /// Index in `σ` of the vertex opposite the face.
    pub sigma_apex: usize,
    /// Primitive integer inner normal of `Δ` at the face.
    pub normal: RationalVector,
}

#[derive(Debug)]
struct Frame {
    origin: RationalVector,
    inverse: Matrix,
    origin_f: Vec<f64>,
    inverse_f: Vec<f64>,
    /// Bound on the floating-point error of a barycentric coordinate.
    tolerance: f64,
}

#[derive(Debug)]
struct Locator {
    resolution: usize,
    buckets: Vec<Vec<(u32, u32)>>,
    shifts: Vec<Vec<i64>>,
    frames: Vec<Frame>,
}

/// A period-invariant simplicial decomposition of ℝⁿ.
#[derive(Debug)]
pub struct PeriodicComplex {
    period: Lattice,
    level: u32,
    cells: Vec<LocalCell>,
    locator: OnceLock<Locator>,
    adjacency: OnceLock<Vec<AdjacentPair>>,
}

impl Clone for PeriodicComplex {
    fn clone(&self) -> Self {
        Self::from_local(self.period.clone(), self.level, self.cells.clone())
    }
}

impl PartialEq for PeriodicComplex {
    fn eq(&self, other: &Self) -> bool {
        self.period == other.period && self.level == other.level && self.cells == other.cells
    }
}

/// Sorts lexicographically and shifts the first vertex into `[0, 1)ⁿ`.
pub fn canonicalize(mut cell: LocalCell) -> LocalCell {
    cell.sort();
    let shift = cell[0].floor();
    if shift.is_zero() {
        cell
    } else {
        cell.iter().map(|v| v - &shift).collect()
    }
}

fn floor_i64(v: &RationalVector) -> Vec<i64> {
    v.iter().map(|c| c.floor().to_i64().expect("period shift fits i64")).collect()
}

fn ints(v: &[i64]) -> RationalVector {
    RationalVector::from_ints(v)
}

impl PeriodicComplex {
    /// Builds a complex from local representatives, canonicalizing them.
    pub fn new(period: Lattice, level: u32, cells: Vec<LocalCell>) -> Result<Self> {
        let n = period.dim();
        for c in &cells {
            check_dim(n + 1, c.len())?;
            for v in c {
                check_dim(n, v.dim())?;
            }
        }
        let mut cells: Vec<LocalCell> = cells.into_iter().map(canonicalize).collect();
        cells.sort();
        Ok(Self::from_local(period, level, cells))
    }

    fn from_local(period: Lattice, level: u32, cells: Vec<LocalCell>) -> Self {
        Self { period, level, cells, locator: OnceLock::new(), adjacency: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.period.dim()
    }

    pub fn period(&self) -> &Lattice {
        &self.period
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn local_cells(&self) -> &[LocalCell] {
        &self.cells
    }

    pub fn to_ambient(&self, local: &RationalVector) -> RationalVector {
        self.period.point(local).expect("dimension checked at construction")
    }

    pub fn to_local(&self, ambient: &RationalVector) -> Result<RationalVector> {
        self.period.coords(ambient)
    }

    /// Ambient translation of a period-coordinate shift.
    pub fn translation(&self, shift: &[i64]) -> RationalVector {
        self.to_ambient(&ints(shift))
    }

    /// The `i`-th cell in ambient coordinates.
    pub fn cell(&self, i: usize) -> Simplex {
        Simplex::new_unchecked(self.cells[i].iter().map(|v| self.to_ambient(v)).collect())
    }

    pub fn cells(&self) -> Vec<Simplex> {
        (0..self.len()).map(|i| self.cell(i)).collect()
    }

    /// Sum of ambient cell volumes; equals the period covolume for a tiling.
    pub fn total_volume(&self) -> Rational {
        self.local_volume() * self.period.covolume()
    }

    fn local_volume(&self) -> Rational {
        parallel::map(&self.cells, |c| full_volume(c)).into_iter().sum()
    }

    /// Checks cell dimension, exact volume tiling, and that every facet is
    /// shared by exactly two cells up to period translation.
    pub fn check_invariants(&self) -> Result<()> {
        if let Some(i) = parallel::position_failing(&self.cells, |c| !full_volume(c).is_zero()) {
            return Err(Error::InvariantViolation(format!("cell {i} is degenerate")));
        }
        let vol = self.local_volume();
        if !vol.is_one() {
            return Err(Error::InvariantViolation(format!("cells cover volume {vol} of a period cell, expected 1/1")));
        }
        for (key, entries) in self.facet_map() {
            if entries.len() != 2 {
                return Err(Error::InvariantViolation(format!("facet {key:?} is shared by {} cells", entries.len())));
            }
        }
        Ok(())
    }

    fn facet_map(&self) -> HashMap<LocalCell, Vec<(usize, usize, Vec<i64>)>> {
        let mut map: HashMap<LocalCell, Vec<(usize, usize, Vec<i64>)>> = HashMap::new();
        for (ci, cell) in self.cells.iter().enumerate() {
            for omit in 0..cell.len() {
                let facet: LocalCell =
                    cell.iter().enumerate().filter(|&(k, _)| k != omit).map(|(_, v)| v.clone()).collect();
                let shift_q = facet[0].floor();
                let shift = floor_i64(&shift_q);
                let key: LocalCell =
                    if shift_q.is_zero() { facet } else { facet.iter().map(|v| v - &shift_q).collect() };
                map.entry(key).or_default().push((ci, omit, shift));
            }
        }
        map
    }

    /// Every pair of cells meeting in a codimension-one face, once per period
    /// orbit. `σ`'s relative shift is lexicographically positive, or zero with
    /// `Δ` the lower index.
    pub fn adjacent_pairs(&self) -> &[AdjacentPair] {
        self.adjacency.get_or_init(|| self.build_adjacency())
    }

    fn build_adjacency(&self) -> Vec<AdjacentPair> {
        let mut orbits: Vec<Vec<(usize, usize, Vec<i64>)>> =
            self.facet_map().into_values().filter(|e| e.len() == 2).collect();
        for e in &mut orbits {
            e.sort();
        }
        orbits.sort();
        parallel::map(&orbits, |entries| {
            let (c1, f1, s1) = &entries[0];
            let (c2, f2, s2) = &entries[1];
            let rel: Vec<i64> = s1.iter().zip(s2).map(|(a, b)| a - b).collect();
            let positive = rel.iter().find(|&&x| x != 0).is_none_or(|&x| x > 0);
            if positive {
                self.make_pair(*c1, *f1, *c2, *f2, rel)
            } else {
                let neg: Vec<i64> = rel.iter().map(|x| -x).collect();
                self.make_pair(*c2, *f2, *c1, *f1, neg)
            }
        })
    }

    fn make_pair(&self, delta: usize, d_apex: usize, sigma: usize, s_apex: usize, shift: Vec<i64>) -> AdjacentPair {
        let cell = self.cell(delta);
        let face: Vec<RationalVector> =
            cell.vertices().iter().enumerate().filter(|&(k, _)| k != d_apex).map(|(_, v)| v.clone()).collect();
        let n = self.dim();
        let mut rows = Matrix::zeros(n - 1, n);
        for (r, w) in face[1..].iter().enumerate() {
            let d = w - &face[0];
            for c in 0..n {
                rows[(r, c)] = d[c].clone();
            }
        }
        let null = rows.nullspace();
        debug_assert_eq!(null.len(), 1);
        let mut normal = primitive_integer(&null[0]);
        if normal.dot(&(&cell.vertices()[d_apex] - &face[0])).is_negative() {
            normal = -&normal;
        }
        AdjacentPair {
            delta,
            sigma,
            translation: self.translation(&shift),
            sigma_shift: shift,
            face: Simplex::new_unchecked(face),
            delta_apex: d_apex,
            sigma_apex: s_apex,
            normal,
        }
    }

    fn locator(&self) -> &Locator {
        self.locator.get_or_init(|| Locator::build(&self.cells, self.dim()))
    }

    /// Some cell translate containing the ambient point `u`.
    pub fn locate(&self, u: &RationalVector) -> Result<Location> {
        let local = self.to_local(u)?;
        let base = floor_i64(&local);
        let r = &local - &ints(&base);
        let loc = self.locator();
        let (cell, sid) = loc
            .candidates(&r)
            .find(|&(c, s)| loc.contains(c, &loc.shifts[s], &r))
            .ok_or_else(|| Error::InvariantViolation(format!("no cell contains {u:?}")))?;
        let shift = base.iter().zip(&loc.shifts[sid]).map(|(a, b)| a + b).collect();
        Ok(Location { cell, shift })
    }

    /// Whether `cell + shift` contains the local point `p`.
    pub fn contains_local(&self, cell: usize, shift: &[i64], p: &RationalVector) -> bool {
        self.locator().contains(cell, shift, p)
    }

    /// The first fine cell not contained in any coarse cell translate.
    pub fn refinement_witness(fine: &Self, coarse: &Self) -> Result<Option<usize>> {
        check_dim(coarse.dim(), fine.dim())?;
        if !coarse.period.contains_lattice(&fine.period)? {
            return Err(Error::IncompatiblePeriods);
        }
        let same = fine.period == coarse.period;
        let to_coarse = if same { None } else { Some(coarse.period.inverse().mul(fine.period.basis())?) };
        let loc = coarse.locator();
        Ok(parallel::position_failing(&fine.cells, |cell| {
            let verts: Vec<RationalVector> = match &to_coarse {
                None => cell.clone(),
                Some(t) => cell.iter().map(|v| t.mul_vec(v).expect("square")).collect(),
            };
            let bary = Simplex::new_unchecked(verts.clone()).barycenter();
            let base = floor_i64(&bary);
            let base_q = ints(&base);
            let r = &bary - &base_q;
            let shifted: Vec<RationalVector> = verts.iter().map(|v| v - &base_q).collect();
            loc.candidates(&r).any(|(c, s)| {
                let shift = &loc.shifts[s];
                loc.contains(c, shift, &r) && shifted.iter().all(|v| loc.contains(c, shift, v))
            })
        }))
    }

    /// Whether every cell of `fine` lies in a cell of `coarse`.
    pub fn is_refinement(fine: &Self, coarse: &Self) -> Result<bool> {
        Ok(Self::refinement_witness(fine, coarse)?.is_none())
    }

    /// The complex scaled by `2^-steps`, still with the same period.
    pub fn dyadic_refine(&self, steps: u32) -> Self {
        if steps == 0 {
            return self.clone();
        }
        let n = self.dim();
        let m = 1i64 << steps;
        let inv = Rational::pow2(-(steps as i32));
        let offsets: Vec<RationalVector> = (0..m.pow(n as u32))
            .map(|mut idx| {
                let mut t = Vec::with_capacity(n);
                for _ in 0..n {
                    t.push(idx % m);
                    idx /= m;
                }
                ints(&t)
            })
            .collect();
        let per_cell: Vec<Vec<LocalCell>> = parallel::map(&self.cells, |cell| {
            offsets.iter().map(|t| cell.iter().map(|v| (v + t).scale(&inv)).collect()).collect()
        });
        let mut cells: Vec<LocalCell> = per_cell.into_iter().flatten().collect();
        cells.sort();
        Self::from_local(self.period.clone(), self.level + steps, cells)
    }

    /// The same decomposition regarded as periodic under the sublattice `lat`.
    pub fn over_sublattice(&self, lat: &Lattice) -> Result<Self> {
        check_dim(self.dim(), lat.dim())?;
        if !self.period.contains_lattice(lat)? {
            return Err(Error::IncompatiblePeriods);
        }
        if *lat == self.period {
            return Ok(self.clone());
        }
        let reps = coset_representatives(&self.period, lat)?;
        let mut cells = Vec::with_capacity(self.len() * reps.len());
        for cell in &self.cells {
            let amb: Vec<RationalVector> = cell.iter().map(|v| self.to_ambient(v)).collect();
            for r in &reps {
                cells.push(amb.iter().map(|v| lat.coords(&(v + r)).expect("dim")).collect());
            }
        }
        Self::new(lat.clone(), self.level, cells)
    }

    /// Translates every cell by `t` (ambient) and re-canonicalizes.
    pub fn translated(&self, t: &RationalVector) -> Result<Self> {
        let lt = self.to_local(t)?;
        let cells = self.cells.iter().map(|c| c.iter().map(|v| v + &lt).collect()).collect();
        Self::new(self.period.clone(), self.level, cells)
    }

    /// The `d!` Kuhn simplices of the unit cube of `lat`, as a level-0 complex.
    pub fn kuhn(lat: &Lattice) -> Self {
        let d = lat.dim();
        let cells = permutations(d)
            .into_iter()
            .map(|perm| {
                let mut v = vec![0i64; d];
                let mut cell = vec![ints(&v)];
                for &p in &perm {
                    v[p] = 1;
                    cell.push(ints(&v));
                }
                cell
            })
            .collect();
        Self::new(lat.clone(), 0, cells).expect("dimensions agree")
    }

    /// The set of all vertices of representatives, reduced into `[0, 1)ⁿ`.
    pub fn vertex_orbits(&self) -> Vec<RationalVector> {
        let set: BTreeSet<RationalVector> = self.cells.iter().flatten().map(|v| v - &v.floor()).collect();
        set.into_iter().collect()
    }
}

/// Points of `fine` in the half-open fundamental parallelotope of `coarse`.
pub fn coset_representatives(fine: &Lattice, coarse: &Lattice) -> Result<Vec<RationalVector>> {
    let gens = fine.generators();
    let zero = RationalVector::zeros(fine.dim());
    let mut seen: BTreeSet<RationalVector> = BTreeSet::from([zero.clone()]);
    let mut frontier = vec![zero];
    while let Some(p) = frontier.pop() {
        for g in &gens {
            let q = coarse.reduce_mod(&(&p + g))?;
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// The level-0 complete barycentric subdivision of the cuboid spanned by
/// `orth`, periodic under `period = ⊕ ℤ·orthⱼ`.
pub fn barycentric_triangulation(orth: &[RationalVector], period: &Lattice) -> Result<PeriodicComplex> {
    check_dim(period.dim(), orth.len())?;
    let frame = Lattice::from_columns(orth)?;
    if !frame.contains_lattice(period)? || !period.contains_lattice(&frame)? {
        return Err(Error::IncompatiblePeriods);
    }
    let n = orth.len();
    let half = Rational::new(1, 2);
    let mut cells = Vec::with_capacity((1 << n) * permutations(n).len());
    for mask in 0..1usize << n {
        let corner: Vec<i64> = (0..n).map(|j| (mask >> j & 1) as i64).collect();
        for perm in permutations(n) {
            let mut v = ints(&corner);
            let mut cell = vec![v.clone()];
            for &p in &perm {
                if corner[p] == 0 {
                    v[p] += &half;
                } else {
                    v[p] -= &half;
                }
                cell.push(v.clone());
            }
            cells.push(cell);
        }
    }
    PeriodicComplex::new(frame, 0, cells)
}

/// Orthogonal frame, superlattice index and level-0 triangulation for `(lat, b)`.
pub fn standard_complex(lat: &Lattice, b: &Polarization) -> Result<(u64, PeriodicComplex)> {
    let orth = orthogonalize(lat, b)?;
    let (n, fine) = superlattice(&orth, lat)?;
    let complex = barycentric_triangulation(&fine.generators(), &fine)?;
    Ok((n, complex))
}

impl Locator {
    fn build(cells: &[LocalCell], n: usize) -> Self {
        let bounds: Vec<(Vec<Rational>, Vec<Rational>)> = cells
            .iter()
            .map(|c| {
                (0..n)
                    .map(|i| {
                        let lo = c.iter().map(|v| v[i].clone()).min().expect("nonempty");
                        let hi = c.iter().map(|v| v[i].clone()).max().expect("nonempty");
                        (lo, hi)
                    })
                    .unzip()
            })
            .collect();
        let max_extent = bounds
            .iter()
            .flat_map(|(lo, hi)| lo.iter().zip(hi).map(|(l, h)| h - l))
            .fold(Rational::zero(), Rational::max);
        let mut resolution =
            if max_extent.is_zero() { 1 } else { max_extent.recip().floor().to_i64().unwrap_or(1).max(1) as usize };
        const MAX_BUCKETS: usize = 1 << 18;
        while resolution > 1 && resolution.pow(n as u32) > MAX_BUCKETS {
            resolution /= 2;
        }
        let res_q = Rational::from_integer(resolution as i64);
        let mut buckets = vec![Vec::new(); resolution.pow(n as u32)];
        let mut shifts: Vec<Vec<i64>> = Vec::new();
        let mut shift_ids: HashMap<Vec<i64>, u32> = HashMap::new();
        for (ci, (lo, hi)) in bounds.iter().enumerate() {
            // Translates meeting [0,1)ⁿ with nonempty interior overlap.
            let ranges: Vec<(i64, i64)> = lo
                .iter()
                .zip(hi)
                .map(|(l, h)| {
                    let a = (-h).floor().to_i64().expect("small") + 1;
                    let b = (Rational::one() - l).ceil().to_i64().expect("small") - 1;
                    (a, b)
                })
                .collect();
            for lam in box_points(&ranges) {
                let sid = *shift_ids.entry(lam.clone()).or_insert_with(|| {
                    shifts.push(lam.clone());
                    (shifts.len() - 1) as u32
                });
                let bucket_ranges: Vec<(i64, i64)> = (0..n)
                    .map(|i| {
                        let l = (&lo[i] + Rational::from_integer(lam[i])).max(Rational::zero());
                        let h = &hi[i] + Rational::from_integer(lam[i]);
                        let a = (&l * &res_q).floor().to_i64().expect("small");
                        let b = (&h * &res_q).floor().to_i64().expect("small").min(resolution as i64 - 1);
                        (a, b)
                    })
                    .collect();
                for k in box_points(&bucket_ranges) {
                    buckets[bucket_index(&k, resolution)].push((ci as u32, sid));
                }
            }
        }
        let frames = parallel::map(cells, |c| {
            let origin = c[0].clone();
            let edges: Vec<RationalVector> = c[1..].iter().map(|v| v - &origin).collect();
            let inverse = Matrix::from_columns(&edges).expect("uniform").inverse().expect("nondegenerate cell");
            let inverse_f: Vec<f64> = inverse.row_vecs().iter().flatten().map(Rational::to_f64).collect();
            let origin_f = origin.to_f64();
            let scale = inverse_f.iter().fold(0.0f64, |a, x| a.max(x.abs()))
                * (origin_f.iter().fold(0.0f64, |a, x| a.max(x.abs())) + 4.0);
            let tolerance = 1e-9 * (1.0 + scale * n as f64);
            Frame { origin, inverse, origin_f, inverse_f, tolerance }
        });
        Self { resolution, buckets, shifts, frames }
    }

    fn candidates<'a>(&'a self, r: &RationalVector) -> impl Iterator<Item = (usize, usize)> + 'a {
        let res_q = Rational::from_integer(self.resolution as i64);
        let k: Vec<i64> = r
            .iter()
            .map(|x| (x * &res_q).floor().to_i64().expect("small").clamp(0, self.resolution as i64 - 1))
            .collect();
        self.buckets[bucket_index(&k, self.resolution)].iter().map(|&(c, s)| (c as usize, s as usize))
    }

    /// Exact membership of `p` in `cell + shift`, with a conservative
    /// floating-point prefilter deciding points far from the boundary.
    fn contains(&self, cell: usize, shift: &[i64], p: &RationalVector) -> bool {
        let f = &self.frames[cell];
        let n = p.dim();
        let mut d = [0.0f64; 8];
        if n <= d.len() {
            for i in 0..n {
                d[i] = p[i].to_f64() - f.origin_f[i] - shift[i] as f64;
            }
            let mut sum = 0.0;
            let mut clear = true;
            for r in 0..n {
                let x: f64 = (0..n).map(|c| f.inverse_f[r * n + c] * d[c]).sum();
                if x < -f.tolerance {
                    return false;
                }
                clear &= x > f.tolerance;
                sum += x;
            }
            if sum > 1.0 + f.tolerance {
                return false;
            }
            if clear && sum < 1.0 - f.tolerance {
                return true;
            }
        }
        self.contains_exact(cell, shift, p)
    }

    fn contains_exact(&self, cell: usize, shift: &[i64], p: &RationalVector) -> bool {
        let f = &self.frames[cell];
        let d: RationalVector =
            p.iter().zip(&f.origin.0).zip(shift).map(|((x, o), &s)| x - o - Rational::from_integer(s)).collect();
        let x = f.inverse.mul_vec(&d).expect("dim");
        let mut sum = Rational::zero();
        for c in x.iter() {
            if c.is_negative() {
                return false;
            }
            sum += c;
        }
        sum <= Rational::one()
    }
}

fn bucket_index(k: &[i64], resolution: usize) -> usize {
    k.iter().rev().fold(0usize, |acc, &x| acc * resolution + x as usize)
}

fn box_points(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(ranges.len())];
    for &(a, b) in ranges {
        let mut next = Vec::new();
        for p in &out {
            for x in a..=b {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn v(xs: &[i64]) -> RationalVector {
        RationalVector::from_ints(xs)
    }

    fn unit_complex(n: usize) -> PeriodicComplex {
        let lat = Lattice::integer(n);
        barycentric_triangulation(&lat.generators(), &lat).unwrap()
    }

    #[test]
    fn cuboid_vertices() {
        let b1 = RationalVector(vec![q(1, 2), q(0, 1)]);
        let b2 = RationalVector(vec![q(-1, 2), q(1, 1)]);
        let verts = fundamental_cuboid(&[b1, b2]);
        assert_eq!(
            verts,
            vec![
                v(&[0, 0]),
                RationalVector(vec![q(1, 2), q(0, 1)]),
                RationalVector(vec![q(-1, 2), q(1, 1)]),
                v(&[0, 1]),
            ]
        );
        assert_eq!(fundamental_cuboid(&[v(&[1])]), vec![v(&[0]), v(&[1])]);
        assert_eq!(fundamental_cuboid(&Lattice::integer(3).generators()).len(), 8);
    }

    #[test]
    fn one_dimensional_triangulation() {
        let c = unit_complex(1);
        let cells: Vec<Vec<RationalVector>> = c.cells().iter().map(|s| s.vertices().to_vec()).collect();
        let half = RationalVector(vec![q(1, 2)]);
        assert_eq!(cells, vec![vec![v(&[0]), half.clone()], vec![half, v(&[1])]]);
    }

    #[test]
    fn simplex_volumes() {
        assert_eq!(simplex_volume(&Simplex::new(vec![v(&[0]), v(&[1])]).unwrap()).unwrap(), q(1, 1));
        let tri = Simplex::new(vec![v(&[0, 0]), v(&[1, 0]), v(&[0, 1])]).unwrap();
        assert_eq!(simplex_volume(&tri).unwrap(), q(1, 2));
        let seg = Simplex::new(vec![v(&[0, 0]), v(&[3, 4])]).unwrap();
        assert_eq!(seg.volume().unwrap(), q(5, 1));
        let diag = Simplex::new(vec![v(&[0, 0]), v(&[1, 1])]).unwrap();
        assert_eq!(diag.volume(), Err(Error::IrrationalVolume));
        assert!(Simplex::new(vec![v(&[0, 0]), v(&[1, 1]), v(&[2, 2])]).is_err());
    }

    #[test]
    fn adjacency_in_one_dimension_matches_hand_enumeration() {
        let c = unit_complex(1);
        let pairs = c.adjacent_pairs();
        assert_eq!(pairs.len(), 2);
        let described: Vec<(Vec<RationalVector>, Vec<RationalVector>, RationalVector)> = pairs
            .iter()
            .map(|p| {
                (
                    c.cell(p.delta).vertices().to_vec(),
                    c.cell(p.sigma).translate(&p.translation).vertices().to_vec(),
                    p.normal.clone(),
                )
            })
            .collect();
        let h = |a, b| RationalVector(vec![q(a, b)]);
        assert!(described.contains(&(vec![h(0, 1), h(1, 2)], vec![h(1, 2), h(1, 1)], v(&[-1]))));
        assert!(described.contains(&(vec![h(1, 2), h(1, 1)], vec![h(1, 1), h(3, 2)], v(&[-1]))));
    }

    #[test]
    fn locate_finds_containing_translate() {
        let c = unit_complex(2).dyadic_refine(1);
        let u = RationalVector(vec![q(7, 3), q(-5, 7)]);
        let loc = c.locate(&u).unwrap();
        let cell = c.cell(loc.cell).translate(&c.translation(&loc.shift));
        assert!(cell.contains(&u).unwrap());
    }

    #[test]
    fn over_sublattice_preserves_tiling() {
        let lat = Lattice::integer(2);
        let b = Polarization::new(Matrix::from_int_rows(&[&[2, 1], &[1, 2]])).unwrap();
        let (n, c) = standard_complex(&lat, &b).unwrap();
        assert_eq!(n, 2);
        let big = c.over_sublattice(&lat).unwrap();
        assert_eq!(big.len(), 2 * c.len());
        big.check_invariants().unwrap();
        assert!(PeriodicComplex::is_refinement(&big, &c).unwrap());
    }

    #[test]
    fn refinement_witness_exists_for_reversed_order() {
        let c = unit_complex(2);
        let f = c.dyadic_refine(1);
        assert!(PeriodicComplex::refinement_witness(&c, &f).unwrap().is_some());
        assert!(PeriodicComplex::is_refinement(&f, &c).unwrap());
    }

    #[test]
    fn kuhn_tiles_the_cube() {
        let k = PeriodicComplex::kuhn(&Lattice::integer(3));
        assert_eq!(k.len(), 6);
        k.check_invariants().unwrap();
    }
}
