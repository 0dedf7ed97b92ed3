//! Dense exact linear algebra over [`Rational`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use crate::error::{check_dim, Error, Result};
use crate::rational::{lcm_of_denominators, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// A point or covector in ℚⁿ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RationalVector(pub Vec<Rational>);

impl RationalVector {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Rational::zero(); n])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self(coords.iter().map(|&c| Rational::from_integer(c)).collect())
    }

    /// The standard basis vector `e_i` of ℚⁿ.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Self) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn max_abs(&self) -> Rational {
        self.0.iter().map(Rational::abs).fold(Rational::zero(), Rational::max)
    }

    pub fn floor(&self) -> Self {
        Self(self.0.iter().map(Rational::floor).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Rational::to_f64).collect()
    }
}

impl Index<usize> for RationalVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl IndexMut<usize> for RationalVector {
    fn index_mut(&mut self, i: usize) -> &mut Rational {
        &mut self.0[i]
    }
}

impl fmt::Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl FromIterator<Rational> for RationalVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Add<&RationalVector> for &RationalVector {
    type Output = RationalVector;
    fn add(self, rhs: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect()
    }
}

impl Sub<&RationalVector> for &RationalVector {
    type Output = RationalVector;
    fn sub(self, rhs: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect()
    }
}

impl Neg for &RationalVector {
    type Output = RationalVector;
    fn neg(self) -> RationalVector {
        self.0.iter().map(|a| -a).collect()
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            data.extend(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect()).collect())
            .expect("ragged integer rows")
    }

    /// Builds the matrix whose columns are `cols`.
    pub fn from_columns(cols: &[RationalVector]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, RationalVector::dim);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            check_dim(r, col.dim())?;
            for i in 0..r {
                m[(i, j)] = col[i].clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> RationalVector {
        RationalVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column(&self, j: usize) -> RationalVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<RationalVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).0).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &RationalVector) -> Result<RationalVector> {
        check_dim(self.cols, v.dim())?;
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(&v.0)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `vᵀ·self`, i.e. the row vector times this matrix.
    pub fn vec_mul(&self, v: &RationalVector) -> Result<RationalVector> {
        check_dim(self.rows, v.dim())?;
        Ok((0..self.cols).map(|j| (0..self.rows).map(|i| &v[i] * &self[(i, j)]).sum()).collect())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Row-reduces in place to reduced echelon form; returns pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    if self[(r, j)].is_zero() {
                        continue;
                    }
                    let v = &self[(i, j)] - &(&f * &self[(r, j)]);
                    self[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn det(&self) -> Result<Rational> {
        check_dim(self.rows, self.cols)?;
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let pivot = a[(c, c)].clone();
            det *= &pivot;
            let inv = pivot.recip();
            for i in c + 1..n {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let f = &a[(i, c)] * &inv;
                for j in c..n {
                    if a[(c, j)].is_zero() {
                        continue;
                    }
                    let v = &a[(i, j)] - &(&f * &a[(c, j)]);
                    a[(i, j)] = v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self> {
        check_dim(self.rows, self.cols)?;
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    /// Solves `self · x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &RationalVector) -> Result<RationalVector> {
        check_dim(self.rows, b.dim())?;
        check_dim(self.rows, self.cols)?;
        let n = self.rows;
        let mut aug = Self::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n)] = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok((0..n).map(|i| aug[(i, n)].clone()).collect())
    }

    /// A basis of `{x : self · x = 0}`.
    pub fn nullspace(&self) -> Vec<RationalVector> {
        let mut a = self.clone();
        let pivots = a.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = RationalVector::zeros(self.cols);
                x[f] = Rational::one();
                for (r, &p) in pivots.iter().enumerate() {
                    x[p] = -&a[(r, f)];
                }
                x
            })
            .collect()
    }

    /// Leading principal minors `det(A[..k, ..k])` for `k = 1..=n`.
    pub fn leading_minors(&self) -> Vec<Rational> {
        (1..=self.rows.min(self.cols))
            .map(|k| {
                let mut m = Self::zeros(k, k);
                for i in 0..k {
                    for j in 0..k {
                        m[(i, j)] = self[(i, j)].clone();
                    }
                }
                m.det().expect("square by construction")
            })
            .collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

/// The primitive integer vector on the ray through a nonzero `v`.
pub fn primitive_integer(v: &RationalVector) -> RationalVector {
    let l = Rational::from_bigint(lcm_of_denominators(v.iter()));
    let scaled = v.scale(&l);
    let g = scaled.iter().fold(BigInt::zero(), |acc, x| acc.gcd(&x.numer()));
    if g.is_zero() {
        return scaled;
    }
    scaled.scale(&Rational::from_bigint(g).recip())
}

/// Affine rank of a point set (dimension of its affine hull).
pub fn affine_rank(points: &[RationalVector]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let diffs: Vec<RationalVector> = points[1..].iter().map(|p| p - &points[0]).collect();
    Matrix::from_columns(&diffs).map_or(0, |m| m.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn det_inverse_and_solve() {
        let a = Matrix::from_int_rows(&[&[2, 1], &[1, 2]]);
        assert_eq!(a.det().unwrap(), q(3, 1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(2));
        let x = a.solve(&RationalVector::from_ints(&[1, 0])).unwrap();
        assert_eq!(x, RationalVector(vec![q(2, 3), q(-1, 3)]));
        let s = Matrix::from_int_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det().unwrap(), q(0, 1));
        assert_eq!(s.inverse(), Err(Error::Singular));
    }

    #[test]
    fn nullspace_and_rank() {
        let a = Matrix::from_int_rows(&[&[1, 1, 0], &[0, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).unwrap().is_zero());
        assert_eq!(a.leading_minors(), vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn primitive_integer_scaling() {
        let v = RationalVector(vec![q(-1, 2), q(3, 4)]);
        assert_eq!(primitive_integer(&v), RationalVector::from_ints(&[-2, 3]));
        assert_eq!(primitive_integer(&RationalVector::from_ints(&[4, -6])), RationalVector::from_ints(&[2, -3]));
    }

    #[test]
    fn det_with_row_swap_keeps_sign() {
        let a = Matrix::from_int_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        assert_eq!(a.det().unwrap(), q(-1, 1));
    }
}
