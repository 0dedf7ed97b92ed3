//! Piecewise-affine functions on periodic complexes: cocycle-periodic convex
//! model functions, their dyadic rescalings, and periodic test functions.

use std::collections::HashMap;
use std::sync::Arc;

use crate::complex::{permutations, AdjacentPair, LocalCell, PeriodicComplex};
use crate::error::{check_dim, Error, Result};
use crate::lattice::{Lattice, Polarization};
use crate::linalg::{Matrix, RationalVector};
use crate::parallel;
use crate::rational::Rational;

/// `z_λ(u) = q(λ) + ℓ(λ) + b(λ, u)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    polarization: Polarization,
    linear: RationalVector,
}

impl Cocycle {
    pub fn new(polarization: Polarization, linear: RationalVector) -> Result<Self> {
        check_dim(polarization.dim(), linear.dim())?;
        Ok(Self { polarization, linear })
    }

    /// The cocycle with `ℓ = 0`.
    pub fn symmetric(polarization: Polarization) -> Self {
        let n = polarization.dim();
        Self { polarization, linear: RationalVector::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.polarization.dim()
    }

    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }

    pub fn linear(&self) -> &RationalVector {
        &self.linear
    }

    pub fn quadratic(&self, u: &RationalVector) -> Result<Rational> {
        self.polarization.quadratic(u)
    }

    /// `q(λ) + s·ℓ(λ) + b(λ, u)`.
    pub fn eval_scaled(&self, lambda: &RationalVector, u: &RationalVector, scale: &Rational) -> Result<Rational> {
        check_dim(self.dim(), u.dim())?;
        Ok(self.quadratic(lambda)? + scale * self.linear.dot(lambda) + self.polarization.bilinear(lambda, u)?)
    }

    pub fn eval(&self, lambda: &RationalVector, u: &RationalVector) -> Result<Rational> {
        self.eval_scaled(lambda, u, &Rational::one())
    }
}

pub fn cocycle_eval(z: &Cocycle, lambda: &RationalVector, u: &RationalVector) -> Result<Rational> {
    z.eval(lambda, u)
}

/// `u ↦ slope·u + offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub slope: RationalVector,
    pub offset: Rational,
}

impl AffinePiece {
    pub fn constant(n: usize, c: Rational) -> Self {
        Self { slope: RationalVector::zeros(n), offset: c }
    }

    pub fn eval(&self, u: &RationalVector) -> Rational {
        self.slope.dot(u) + &self.offset
    }

    /// The affine function taking `values[i]` at `vertices[i]` on an `n`-simplex.
    pub fn interpolate(vertices: &[RationalVector], values: &[Rational]) -> Result<Self> {
        let n = vertices[0].dim();
        check_dim(n + 1, vertices.len())?;
        check_dim(n + 1, values.len())?;
        let mut a = Matrix::zeros(n + 1, n + 1);
        for (i, v) in vertices.iter().enumerate() {
            for j in 0..n {
                a[(i, j)] = v[j].clone();
            }
            a[(i, n)] = Rational::one();
        }
        let x = a.solve(&RationalVector(values.to_vec()))?;
        let mut coords = x.0;
        let offset = coords.pop().expect("n + 1 unknowns");
        Ok(Self { slope: RationalVector(coords), offset })
    }

    pub fn add_scaled(&self, other: &Self, tau: &Rational) -> Self {
        Self { slope: &self.slope + &other.slope.scale(tau), offset: &self.offset + &(&other.offset * tau) }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self { slope: self.slope.scale(s), offset: &self.offset * s }
    }
}

/// Slope comparison across one face orbit: `normal·(m_Δ − m_σ)`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FaceSlack {
    pub delta: usize,
    pub sigma: usize,
    pub sigma_shift: Vec<i64>,
    pub normal: RationalVector,
    pub slack: Rational,
}

/// A function given by one affine piece per cell representative.
pub trait PiecewiseAffine: Sync {
    fn complex(&self) -> &Arc<PeriodicComplex>;

    fn pieces(&self) -> &[AffinePiece];

    /// The piece on `cell + translation`, where `translation` is a period vector.
    fn translated_piece(&self, cell: usize, translation: &RationalVector) -> AffinePiece;

    fn evaluate(&self, u: &RationalVector) -> Result<Rational> {
        let c = self.complex();
        let loc = c.locate(u)?;
        Ok(self.translated_piece(loc.cell, &c.translation(&loc.shift)).eval(u))
    }

    /// `normal·(m_Δ − m_σ)` for every adjacent pair.
    fn face_slacks(&self) -> Vec<FaceSlack> {
        let pairs = self.complex().adjacent_pairs();
        parallel::map(pairs, |p| {
            let sigma = self.translated_piece(p.sigma, &p.translation);
            let slack = p.normal.dot(&(&self.pieces()[p.delta].slope - &sigma.slope));
            FaceSlack {
                delta: p.delta,
                sigma: p.sigma,
                sigma_shift: p.sigma_shift.clone(),
                normal: p.normal.clone(),
                slack,
            }
        })
    }

    /// Checks that adjacent pieces agree on every shared face.
    fn check_continuity(&self) -> Result<()> {
        let pairs = self.complex().adjacent_pairs();
        let bad = parallel::position_failing(pairs, |p: &AdjacentPair| {
            let sigma = self.translated_piece(p.sigma, &p.translation);
            let delta = &self.pieces()[p.delta];
            p.face.vertices().iter().all(|v| delta.eval(v) == sigma.eval(v))
        });
        match bad {
            None => Ok(()),
            Some(i) => Err(Error::InvariantViolation(format!(
                "pieces disagree on the face between cells {} and {}",
                pairs[i].delta, pairs[i].sigma
            ))),
        }
    }
}

/// Pieces on `target` read off `source` at each target cell's barycenter.
/// Valid when every target cell lies in a source cell translate.
fn pull_pieces(target: &PeriodicComplex, source: &impl PiecewiseAffine) -> Result<Vec<AffinePiece>> {
    let src = source.complex();
    parallel::try_map_range(target.len(), |i| {
        let bary = target.cell(i).barycenter();
        let loc = src.locate(&bary)?;
        Ok(source.translated_piece(loc.cell, &src.translation(&loc.shift)))
    })
}

/// `f` with `f(u + λ) = f(u) + q(λ) + s·ℓ(λ) + b(λ, u)` for period vectors `λ`.
#[derive(Clone, Debug)]
pub struct CocycleFunction {
    complex: Arc<PeriodicComplex>,
    pieces: Vec<AffinePiece>,
    cocycle: Cocycle,
    linear_scale: Rational,
}

impl PiecewiseAffine for CocycleFunction {
    fn complex(&self) -> &Arc<PeriodicComplex> {
        &self.complex
    }

    fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    fn translated_piece(&self, cell: usize, lambda: &RationalVector) -> AffinePiece {
        let p = &self.pieces[cell];
        if lambda.is_zero() {
            return p.clone();
        }
        let b = self.cocycle.polarization();
        let shift = b.covector(lambda).expect("dim");
        let q = b.quadratic(lambda).expect("dim");
        AffinePiece {
            slope: &p.slope + &shift,
            offset: &p.offset - &p.slope.dot(lambda) - q + &self.linear_scale * self.cocycle.linear().dot(lambda),
        }
    }
}

impl CocycleFunction {
    pub fn new(
        complex: Arc<PeriodicComplex>,
        pieces: Vec<AffinePiece>,
        cocycle: Cocycle,
        linear_scale: Rational,
    ) -> Result<Self> {
        check_dim(complex.len(), pieces.len())?;
        check_dim(complex.dim(), cocycle.dim())?;
        Ok(Self { complex, pieces, cocycle, linear_scale })
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn linear_scale(&self) -> &Rational {
        &self.linear_scale
    }

    pub fn level(&self) -> u32 {
        self.complex.level()
    }

    /// The same function on the complex regarded as periodic under `lat`.
    pub fn over_sublattice(&self, lat: &Lattice) -> Result<Self> {
        if *lat == *self.complex.period() {
            return Ok(self.clone());
        }
        let target = self.complex.over_sublattice(lat)?;
        let pieces = pull_pieces(&target, self)?;
        Self::new(Arc::new(target), pieces, self.cocycle.clone(), self.linear_scale.clone())
    }

    /// Checks the cocycle relation at every cell vertex for every period generator.
    pub fn check_periodicity(&self) -> Result<()> {
        let c = &self.complex;
        for g in c.period().generators() {
            for i in 0..c.len() {
                for v in c.cell(i).vertices() {
                    let lhs = self.evaluate(&(v + &g))? - self.evaluate(v)?;
                    let rhs = self.cocycle.eval_scaled(&g, v, &self.linear_scale)?;
                    if lhs != rhs {
                        return Err(Error::InvariantViolation(format!(
                            "periodicity fails at {v:?} for generator {g:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A period-invariant piecewise-affine function.
#[derive(Clone, Debug)]
pub struct TestFunction {
    complex: Arc<PeriodicComplex>,
    pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine for TestFunction {
    fn complex(&self) -> &Arc<PeriodicComplex> {
        &self.complex
    }

    fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    fn translated_piece(&self, cell: usize, lambda: &RationalVector) -> AffinePiece {
        let p = &self.pieces[cell];
        AffinePiece { slope: p.slope.clone(), offset: &p.offset - &p.slope.dot(lambda) }
    }
}

impl TestFunction {
    pub fn new(complex: Arc<PeriodicComplex>, pieces: Vec<AffinePiece>) -> Result<Self> {
        check_dim(complex.len(), pieces.len())?;
        Ok(Self { complex, pieces })
    }

    pub fn constant(complex: Arc<PeriodicComplex>, c: Rational) -> Self {
        let n = complex.dim();
        let pieces = vec![AffinePiece::constant(n, c); complex.len()];
        Self { complex, pieces }
    }

    /// Interpolates `value(v)` at cell vertices, where `v` is a local vertex
    /// reduced into `[0, 1)ⁿ`.
    pub fn from_vertex_values(
        complex: Arc<PeriodicComplex>,
        value: impl Fn(&RationalVector) -> Rational + Sync + Send,
    ) -> Result<Self> {
        let pieces = parallel::try_map(complex.local_cells(), |cell: &LocalCell| {
            let values: Vec<Rational> = cell.iter().map(|v| value(&(v - &v.floor()))).collect();
            let verts: Vec<RationalVector> = cell.iter().map(|v| complex.to_ambient(v)).collect();
            AffinePiece::interpolate(&verts, &values)
        })?;
        Ok(Self { complex, pieces })
    }

    /// The piecewise-affine function equal to 1 on the orbit of the local
    /// vertex `vertex` and 0 at every other vertex.
    pub fn hat(complex: Arc<PeriodicComplex>, vertex: &RationalVector) -> Result<Self> {
        let key = vertex - &vertex.floor();
        Self::from_vertex_values(complex, move |v| if *v == key { Rational::one() } else { Rational::zero() })
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self { complex: self.complex.clone(), pieces: self.pieces.iter().map(|p| p.scale(s)).collect() }
    }

    /// `self + s·other` on a common complex.
    pub fn add_scaled(&self, other: &Self, s: &Rational) -> Result<Self> {
        let (a, b) = align(self, other)?;
        let pieces = a.pieces.iter().zip(&b).map(|(x, y)| x.add_scaled(y, s)).collect();
        Ok(Self { complex: a.complex, pieces })
    }

    pub fn level(&self) -> u32 {
        self.complex.level()
    }

    /// Largest absolute vertex value, which is the sup norm.
    pub fn sup_abs(&self) -> Rational {
        let c = &self.complex;
        parallel::map_range(c.len(), |i| {
            c.cell(i).vertices().iter().map(|v| self.pieces[i].eval(v).abs()).fold(Rational::zero(), Rational::max)
        })
        .into_iter()
        .fold(Rational::zero(), Rational::max)
    }

    /// The same function on the finer complex `target`.
    pub fn pulled_to(&self, target: Arc<PeriodicComplex>) -> Result<Self> {
        if Arc::ptr_eq(&target, &self.complex) || *target == *self.complex {
            return Ok(Self { complex: target, pieces: self.pieces.clone() });
        }
        let pieces = pull_pieces(&target, self)?;
        Ok(Self { complex: target, pieces })
    }

    /// Checks invariance under each period generator at every cell vertex.
    pub fn check_periodicity(&self, lat: &Lattice) -> Result<()> {
        let c = &self.complex;
        for g in lat.generators() {
            for i in 0..c.len() {
                for v in c.cell(i).vertices() {
                    if self.evaluate(&(v + &g))? != self.evaluate(v)? {
                        return Err(Error::InvariantViolation(format!("not periodic at {v:?}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Re-expresses `t` on the complex of `self` (same period, finer or equal level).
fn align(a: &TestFunction, b: &TestFunction) -> Result<(TestFunction, Vec<AffinePiece>)> {
    let (fine, coarse, swapped) = if a.level() >= b.level() { (a, b, false) } else { (b, a, true) };
    let pc = fine.complex.period();
    let po = coarse.complex.period();
    let target = if pc == po {
        fine.complex.clone()
    } else if pc.contains_lattice(po)? {
        Arc::new(fine.complex.over_sublattice(po)?)
    } else if po.contains_lattice(pc)? {
        fine.complex.clone()
    } else {
        return Err(Error::IncompatiblePeriods);
    };
    let f = fine.pulled_to(target.clone())?;
    let c = coarse.pulled_to(target)?;
    Ok(if swapped { (c, f.pieces) } else { (f, c.pieces) })
}

/// `f` and `t` on a common complex: `f`'s complex, regarded as periodic
/// under `t`'s period when that is coarser.
fn align_twist(f: &CocycleFunction, t: &TestFunction) -> Result<(CocycleFunction, TestFunction)> {
    if t.level() > f.level() {
        return Err(Error::IncompatibleLevels { test: t.level(), function: f.level() });
    }
    let pf = f.complex.period();
    let pt = t.complex.period();
    let f2 = if pf == pt || pt.contains_lattice(pf)? {
        f.clone()
    } else if pf.contains_lattice(pt)? {
        f.over_sublattice(pt)?
    } else {
        return Err(Error::IncompatiblePeriods);
    };
    let t2 = t.pulled_to(f2.complex.clone())?;
    Ok((f2, t2))
}

/// Number of non-integral coordinates of a local vertex: its flag stage.
fn stage(v: &RationalVector) -> usize {
    v.iter().filter(|c| !c.is_integer()).count()
}

fn check_barycentric_type(c: &PeriodicComplex) -> Result<()> {
    if c.level() != 0 {
        return Err(Error::NotBarycentric(format!("level {} is not 0", c.level())));
    }
    let n = c.dim();
    let two = Rational::from_integer(2);
    for cell in c.local_cells() {
        if cell.iter().flat_map(|v| v.iter()).any(|x| !(x * &two).is_integer()) {
            return Err(Error::NotBarycentric("vertex outside the half-integer grid".into()));
        }
        let mut stages: Vec<usize> = cell.iter().map(stage).collect();
        stages.sort_unstable();
        if stages != (0..=n).collect::<Vec<_>>() {
            return Err(Error::NotBarycentric("cell is not a flag simplex".into()));
        }
    }
    Ok(())
}

/// Interpolates `(q + ℓ)(v) + ε·(1 − 2^{-k})` at each vertex `v` of stage `k`.
pub fn build_model_function(
    complex: Arc<PeriodicComplex>,
    cocycle: &Cocycle,
    epsilon: &Rational,
) -> Result<CocycleFunction> {
    check_dim(complex.dim(), cocycle.dim())?;
    if epsilon.is_negative() {
        return Err(Error::InvalidArgument("perturbation must be nonnegative".into()));
    }
    check_barycentric_type(&complex)?;
    let pieces = parallel::try_map(complex.local_cells(), |cell: &LocalCell| {
        let verts: Vec<RationalVector> = cell.iter().map(|v| complex.to_ambient(v)).collect();
        let values = cell
            .iter()
            .zip(&verts)
            .map(|(local, w)| {
                let bump = Rational::one() - Rational::pow2(-(stage(local) as i32));
                Ok(cocycle.quadratic(w)? + cocycle.linear().dot(w) + epsilon * &bump)
            })
            .collect::<Result<Vec<_>>>()?;
        AffinePiece::interpolate(&verts, &values)
    })?;
    CocycleFunction::new(complex, pieces, cocycle.clone(), Rational::one())
}

/// Result of the exact strong-convexity test.
#[derive(Clone, Debug)]
pub struct ConvexityCertificate {
    pub pass: bool,
    pub slacks: Vec<FaceSlack>,
    /// A minimal-slack face pair when the test fails.
    pub witness: Option<FaceSlack>,
}

impl ConvexityCertificate {
    pub fn min_slack(&self) -> Option<&FaceSlack> {
        self.slacks.iter().reduce(|a, b| if b.slack < a.slack { b } else { a })
    }
}

/// Strong convexity holds iff every face slack is strictly positive.
pub fn check_strongly_convex(f: &impl PiecewiseAffine) -> ConvexityCertificate {
    let slacks = f.face_slacks();
    let pass = slacks.iter().all(|s| s.slack.is_positive());
    let mut cert = ConvexityCertificate { pass, slacks, witness: None };
    if !pass {
        cert.witness = cert.min_slack().cloned();
    }
    cert
}

/// Outcome of the smallest-ε search.
#[derive(Clone, Debug)]
pub struct CertifiedModel {
    pub epsilon: Rational,
    pub halvings: u32,
    pub function: CocycleFunction,
    pub certificate: ConvexityCertificate,
}

/// Tries `ε = 1, 1/2, …, 2^-max_halvings` and returns the first certified model.
pub fn search_epsilon(complex: Arc<PeriodicComplex>, cocycle: &Cocycle, max_halvings: u32) -> Result<CertifiedModel> {
    for h in 0..=max_halvings {
        let epsilon = Rational::pow2(-(h as i32));
        let function = build_model_function(complex.clone(), cocycle, &epsilon)?;
        let certificate = check_strongly_convex(&function);
        if certificate.pass {
            return Ok(CertifiedModel { epsilon, halvings: h, function, certificate });
        }
    }
    Err(Error::EpsilonSearchExhausted { halvings: max_halvings })
}

/// `f_i(u) = 4^-i·f(2^i·u)` on the complex refined `i` times.
pub fn tate_iterate(f: &CocycleFunction, i: u32) -> Result<CocycleFunction> {
    if i == 0 {
        return Ok(f.clone());
    }
    let base = &f.complex;
    let refined = Arc::new(base.dyadic_refine(i));
    let index: HashMap<&LocalCell, usize> = base.local_cells().iter().enumerate().map(|(k, c)| (c, k)).collect();
    let up = Rational::pow2(i as i32);
    let down = Rational::pow2(-(i as i32));
    let down2 = Rational::pow2(-2 * i as i32);
    let pieces = parallel::try_map(refined.local_cells(), |cell: &LocalCell| {
        let scaled: LocalCell = cell.iter().map(|v| v.scale(&up)).collect();
        let shift = scaled[0].floor();
        let parent: LocalCell = scaled.iter().map(|v| v - &shift).collect();
        let k = *index.get(&parent).ok_or_else(|| Error::InvariantViolation("refined cell has no parent".into()))?;
        let p = f.translated_piece(k, &base.to_ambient(&shift));
        Ok::<_, Error>(AffinePiece { slope: p.slope.scale(&down), offset: &p.offset * &down2 })
    })?;
    CocycleFunction::new(refined, pieces, f.cocycle.clone(), &f.linear_scale * &down)
}

/// The largest admissible twist coefficient, or no bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwistBound {
    Finite(Rational),
    Unbounded,
}

/// `min slack(f) / max |jump(t)|`: every `0 < τ < τ_max` keeps `f + τ·t`
/// strongly convex.
pub fn choose_twist_bound(f: &CocycleFunction, t: &TestFunction) -> Result<TwistBound> {
    let cert = check_strongly_convex(f);
    if !cert.pass {
        return Err(Error::NotCertified);
    }
    let min_slack = cert.min_slack().map(|s| s.slack.clone()).ok_or(Error::NotCertified)?;
    let (_, t2) = align_twist(f, t)?;
    let max_jump = t2.face_slacks().into_iter().map(|s| s.slack.abs()).fold(Rational::zero(), Rational::max);
    if max_jump.is_zero() {
        Ok(TwistBound::Unbounded)
    } else {
        Ok(TwistBound::Finite(min_slack / max_jump))
    }
}

/// `f + τ·t` on the common refinement.
pub fn twist(f: &CocycleFunction, t: &TestFunction, tau: &Rational) -> Result<CocycleFunction> {
    let (f2, t2) = align_twist(f, t)?;
    let pieces = f2.pieces.iter().zip(&t2.pieces).map(|(a, b)| a.add_scaled(b, tau)).collect();
    CocycleFunction::new(f2.complex, pieces, f2.cocycle, f2.linear_scale)
}

pub fn evaluate(f: &impl PiecewiseAffine, u: &RationalVector) -> Result<Rational> {
    f.evaluate(u)
}

/// `max |f − q − s·ℓ|`, exact. The difference is period-invariant and
/// concave on each cell, so per cell it suffices to compare the vertex
/// minimum with the feasible critical points on every face.
pub fn sup_distance_to_quadratic(f: &CocycleFunction) -> Result<Rational> {
    let c = &f.complex;
    let b = f.cocycle.polarization();
    let gram = b.gram();
    let lin = f.cocycle.linear().scale(&f.linear_scale);
    let n = c.dim();
    let subsets: Vec<Vec<usize>> =
        (1usize..1 << (n + 1)).map(|mask| (0..=n).filter(|k| mask >> k & 1 == 1).collect()).collect();
    let per_cell = parallel::try_map_range(c.len(), |i| {
        let cell = c.cell(i);
        let piece = &f.pieces[i];
        let tilt = &piece.slope - &lin;
        let g = |u: &RationalVector| -> Result<Rational> { Ok(tilt.dot(u) + &piece.offset - b.quadratic(u)?) };
        let mut best = Rational::zero();
        for v in cell.vertices() {
            best = best.max((-g(v)?).max(g(v)?));
        }
        for s in subsets.iter().filter(|s| s.len() > 1) {
            let w0 = &cell.vertices()[s[0]];
            let edges: Vec<RationalVector> = s[1..].iter().map(|&k| &cell.vertices()[k] - w0).collect();
            let e = Matrix::from_columns(&edges)?;
            let et = e.transpose();
            let lhs = et.mul(&gram.mul(&e)?)?;
            let rhs = et.mul_vec(&(&tilt - &gram.mul_vec(w0)?))?;
            let t = lhs.solve(&rhs)?;
            let total: Rational = t.iter().sum();
            if t.iter().any(Rational::is_negative) || total > Rational::one() {
                continue;
            }
            let u = w0 + &e.mul_vec(&t)?;
            best = best.max(g(&u)?);
        }
        Ok::<_, Error>(best)
    })?;
    Ok(per_cell.into_iter().fold(Rational::zero(), Rational::max))
}

/// Hat functions at the vertices of a minimal-slack face (positive) and at
/// the opposite apexes (negative); returns the one whose signed jump across
/// that face is most negative relative to its largest jump anywhere.
pub fn adversarial_test_function(f: &CocycleFunction) -> Result<TestFunction> {
    let cert = check_strongly_convex(f);
    let min = cert.min_slack().ok_or(Error::NotCertified)?.slack.clone();
    let c = f.complex.clone();
    let pairs = c.adjacent_pairs();
    let targets: Vec<usize> =
        cert.slacks.iter().enumerate().filter(|(_, s)| s.slack == min).map(|(k, _)| k).take(4).collect();
    let mut best: Option<(Rational, TestFunction)> = None;
    for &k in &targets {
        let p = &pairs[k];
        let delta_local = &c.local_cells()[p.delta];
        let sigma_local = &c.local_cells()[p.sigma];
        let mut candidates: Vec<(RationalVector, Rational)> = delta_local
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != p.delta_apex)
            .map(|(_, v)| (v.clone(), Rational::one()))
            .collect();
        candidates.push((delta_local[p.delta_apex].clone(), -Rational::one()));
        candidates.push((sigma_local[p.sigma_apex].clone(), -Rational::one()));
        for (v, sign) in candidates {
            let t = TestFunction::hat(c.clone(), &v)?.scale(&sign);
            let jumps = t.face_slacks();
            let max = jumps.iter().map(|s| s.slack.abs()).fold(Rational::zero(), Rational::max);
            if max.is_zero() {
                continue;
            }
            let ratio = jumps
                .iter()
                .zip(&cert.slacks)
                .filter(|(_, fs)| fs.slack == min)
                .map(|(j, _)| j.slack.clone())
                .min()
                .expect("targets nonempty")
                / max;
            if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
                best = Some((ratio, t));
            }
        }
    }
    best.map(|(_, t)| t).ok_or(Error::NotCertified)
}

/// Every flag chain `corner → … → center` of the unit cube, in local
/// coordinates: the reference oracle for the barycentric cell set.
pub fn flag_chains(n: usize) -> Vec<LocalCell> {
    let half = Rational::new(1, 2);
    let mut out = Vec::new();
    for mask in 0..1usize << n {
        for perm in permutations(n) {
            let mut v: RationalVector = (0..n).map(|j| Rational::from_integer((mask >> j & 1) as i64)).collect();
            let mut chain = vec![v.clone()];
            for &p in &perm {
                v[p] = half.clone();
                chain.push(v.clone());
            }
            out.push(chain);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{barycentric_triangulation, standard_complex};
    use crate::rational::q;

    fn r(x: Rational) -> RationalVector {
        RationalVector(vec![x])
    }

    fn running_example(eps: Rational) -> CocycleFunction {
        let lat = Lattice::integer(1);
        let c = Arc::new(barycentric_triangulation(&lat.generators(), &lat).unwrap());
        let z = Cocycle::symmetric(Polarization::identity(1));
        build_model_function(c, &z, &eps).unwrap()
    }

    #[test]
    fn cocycle_examples() {
        let z = Cocycle::symmetric(Polarization::identity(1));
        assert_eq!(z.eval(&r(q(1, 1)), &r(q(0, 1))).unwrap(), q(1, 2));
        assert_eq!(z.eval(&r(q(1, 1)), &r(q(1, 2))).unwrap(), q(1, 1));
        assert_eq!(z.eval(&r(q(0, 1)), &r(q(7, 3))).unwrap(), q(0, 1));
    }

    #[test]
    fn running_example_slopes_and_values() {
        let f = running_example(q(1, 8));
        assert_eq!(f.pieces[0].slope, r(q(3, 8)));
        assert_eq!(f.pieces[1].slope, r(q(5, 8)));
        assert_eq!(f.evaluate(&r(q(1, 2))).unwrap(), q(3, 16));
        assert_eq!(f.evaluate(&r(q(3, 2))).unwrap(), q(19, 16));
        assert_eq!(f.evaluate(&r(q(1, 1))).unwrap(), q(1, 2));
        f.check_continuity().unwrap();
        f.check_periodicity().unwrap();
    }

    #[test]
    fn running_example_certificate() {
        let cert = check_strongly_convex(&running_example(q(1, 8)));
        assert!(cert.pass);
        let mut slacks: Vec<Rational> = cert.slacks.iter().map(|s| s.slack.clone()).collect();
        slacks.sort();
        assert_eq!(slacks, vec![q(1, 4), q(3, 4)]);
        let cert = check_strongly_convex(&running_example(q(1, 4)));
        assert!(!cert.pass);
        assert_eq!(cert.witness.unwrap().slack, q(0, 1));
    }

    #[test]
    fn tate_step_slopes() {
        let f1 = tate_iterate(&running_example(q(1, 8)), 1).unwrap();
        let slopes: Vec<Rational> = f1.pieces.iter().map(|p| p.slope[0].clone()).collect();
        assert_eq!(slopes, vec![q(3, 16), q(5, 16), q(11, 16), q(13, 16)]);
        assert_eq!(f1.linear_scale, q(1, 2));
        f1.check_continuity().unwrap();
        f1.check_periodicity().unwrap();
    }

    #[test]
    fn sup_distance_of_interpolant() {
        assert_eq!(sup_distance_to_quadratic(&running_example(q(0, 1))).unwrap(), q(1, 32));
    }

    #[test]
    fn twist_bound_for_alternating_slopes() {
        let f = running_example(q(1, 8));
        let tent = TestFunction::hat(f.complex.clone(), &r(q(1, 2))).unwrap().scale(&q(1, 2));
        assert_eq!(choose_twist_bound(&f, &tent).unwrap(), TwistBound::Finite(q(1, 8)));
        let two = tent.scale(&q(2, 1));
        assert_eq!(choose_twist_bound(&f, &two).unwrap(), TwistBound::Finite(q(1, 16)));
        let one = TestFunction::constant(f.complex.clone(), q(3, 1));
        assert_eq!(choose_twist_bound(&f, &one).unwrap(), TwistBound::Unbounded);
    }

    #[test]
    fn zero_perturbation_fails_in_two_dimensions() {
        let lat = Lattice::integer(2);
        let (_, c) = standard_complex(&lat, &Polarization::identity(2)).unwrap();
        let z = Cocycle::symmetric(Polarization::identity(2));
        let f = build_model_function(Arc::new(c), &z, &q(0, 1)).unwrap();
        let cert = check_strongly_convex(&f);
        assert!(!cert.pass);
        assert_eq!(cert.witness.unwrap().slack, q(0, 1));
    }

    #[test]
    fn rejects_refined_complex() {
        let lat = Lattice::integer(1);
        let c = barycentric_triangulation(&lat.generators(), &lat).unwrap().dyadic_refine(1);
        let z = Cocycle::symmetric(Polarization::identity(1));
        assert!(matches!(build_model_function(Arc::new(c), &z, &q(1, 8)), Err(Error::NotBarycentric(_))));
    }
}
