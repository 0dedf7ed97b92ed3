//! Full-rank rational lattices and positive-definite polarization forms.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, RationalVector};
use crate::rational::{lcm_of_denominators, Rational};

/// A full-rank lattice in ℚⁿ, stored by its basis columns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Lattice {
    basis: Matrix,
    inverse: Matrix,
}

impl Lattice {
    pub fn new(basis: Matrix) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::DimensionMismatch { expected: basis.rows(), found: basis.cols() });
        }
        let inverse = basis.inverse()?;
        Ok(Self { basis, inverse })
    }

    pub fn from_columns(cols: &[RationalVector]) -> Result<Self> {
        Self::new(Matrix::from_columns(cols)?)
    }

    /// ℤⁿ.
    pub fn integer(n: usize) -> Self {
        Self::new(Matrix::identity(n)).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn generators(&self) -> Vec<RationalVector> {
        self.basis.columns()
    }

    /// Coordinates of `u` in the lattice basis.
    pub fn coords(&self, u: &RationalVector) -> Result<RationalVector> {
        self.inverse.mul_vec(u)
    }

    /// The ambient point with lattice coordinates `c`.
    pub fn point(&self, c: &RationalVector) -> Result<RationalVector> {
        self.basis.mul_vec(c)
    }

    pub fn contains(&self, u: &RationalVector) -> Result<bool> {
        Ok(self.coords(u)?.iter().all(Rational::is_integer))
    }

    /// Whether every generator of `other` lies in `self`.
    pub fn contains_lattice(&self, other: &Lattice) -> Result<bool> {
        check_dim(self.dim(), other.dim())?;
        for g in other.generators() {
            if !self.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn covolume(&self) -> Rational {
        self.basis.det().expect("square").abs()
    }

    /// Representative of `u + Λ` whose lattice coordinates lie in `[0, 1)`.
    pub fn reduce_mod(&self, u: &RationalVector) -> Result<RationalVector> {
        Ok(self.reduce_with_shift(u)?.0)
    }

    /// Returns `(r, k)` with `r = u − B·k`, `k` integral, and `r` reduced.
    pub fn reduce_with_shift(&self, u: &RationalVector) -> Result<(RationalVector, RationalVector)> {
        let c = self.coords(u)?;
        let k = c.floor();
        let frac = &c - &k;
        Ok((self.point(&frac)?, k))
    }

    /// The product lattice `Λᴺ ⊂ (ℚⁿ)ᴺ` with block-diagonal basis.
    pub fn power(&self, copies: usize) -> Self {
        let n = self.dim();
        let mut basis = Matrix::zeros(n * copies, n * copies);
        for k in 0..copies {
            for i in 0..n {
                for j in 0..n {
                    basis[(k * n + i, k * n + j)] = self.basis[(i, j)].clone();
                }
            }
        }
        Self::new(basis).expect("block-diagonal of an invertible basis")
    }

    /// `max_i Σ_j |B⁻¹_ij|`; a box of ∞-radius `δ` embeds in the torus when `2δ·norm < 1`.
    pub fn inverse_row_norm(&self) -> Rational {
        (0..self.dim())
            .map(|i| self.inverse.row(i).iter().map(Rational::abs).sum::<Rational>())
            .fold(Rational::zero(), Rational::max)
    }
}

/// A symmetric positive-definite bilinear form `b` on ℚⁿ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polarization {
    gram: Matrix,
}

impl Polarization {
    pub fn new(gram: Matrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !gram.leading_minors().iter().all(Rational::is_positive) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { gram })
    }

    pub fn identity(n: usize) -> Self {
        Self { gram: Matrix::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    /// `uᵀ·G·v`.
    pub fn bilinear(&self, u: &RationalVector, v: &RationalVector) -> Result<Rational> {
        check_dim(self.dim(), u.dim())?;
        Ok(u.dot(&self.gram.mul_vec(v)?))
    }

    /// `q(u) = ½·b(u, u)`.
    pub fn quadratic(&self, u: &RationalVector) -> Result<Rational> {
        Ok(self.bilinear(u, u)? / Rational::from_integer(2))
    }

    /// The covector `b(u, ·)`, equal to `G·u` since `G` is symmetric.
    pub fn covector(&self, u: &RationalVector) -> Result<RationalVector> {
        self.gram.mul_vec(u)
    }
}

/// Free-function form of [`Polarization::bilinear`].
pub fn bilinear(b: &Polarization, u: &RationalVector, v: &RationalVector) -> Result<Rational> {
    b.bilinear(u, v)
}

/// Pairwise `b`-orthogonal vectors of `lat`, by Gram-Schmidt on the basis
/// columns in order, each scaled to the least multiple with integral lattice
/// coordinates.
pub fn orthogonalize(lat: &Lattice, b: &Polarization) -> Result<Vec<RationalVector>> {
    check_dim(lat.dim(), b.dim())?;
    let mut out: Vec<RationalVector> = Vec::with_capacity(lat.dim());
    let mut norms: Vec<Rational> = Vec::with_capacity(lat.dim());
    for v in lat.generators() {
        let mut w = v.clone();
        for (o, norm) in out.iter().zip(&norms) {
            let coeff = b.bilinear(&v, o)? / norm;
            w = &w - &o.scale(&coeff);
        }
        let c = lat.coords(&w)?;
        let scale = Rational::from_bigint(lcm_of_denominators(c.iter()));
        let w = w.scale(&scale);
        let norm = b.bilinear(&w, &w)?;
        if !norm.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        out.push(w);
        norms.push(norm);
    }
    Ok(out)
}

/// The least `N ≥ 1` with `Λ ⊆ Λ′ = ⊕ ℤ·(orth_j / N)`, together with `Λ′`.
pub fn superlattice(orth: &[RationalVector], lat: &Lattice) -> Result<(u64, Lattice)> {
    check_dim(lat.dim(), orth.len())?;
    let frame = Matrix::from_columns(orth)?;
    let coords = frame.inverse()?.mul(lat.basis())?;
    let entries: Vec<Rational> = coords.columns().into_iter().flat_map(|c| c.0).collect();
    let n_big: BigInt = lcm_of_denominators(entries.iter());
    let n = n_big.to_u64().ok_or_else(|| Error::InvalidArgument("superlattice index overflows u64".into()))?;
    let inv_n = Rational::from_bigint(n_big).recip();
    let fine = Lattice::new(frame.scale(&inv_n))?;
    debug_assert!(fine.contains_lattice(lat)?);
    Ok((n, fine))
}
