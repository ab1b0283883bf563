//! Small dense matrices over exact rings.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// The operations the determinant calculus needs. Rationals and truncated
/// series both implement it.
pub trait Ring: Clone + fmt::Debug {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn try_inverse(&self) -> Option<Self>;

    /// Determinant by division-free expansion over column subsets, O(n·2^n).
    fn determinant(m: &Matrix<Self>) -> Self {
        subset_determinant(m)
    }
}

impl Ring for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn try_inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
    fn determinant(m: &Matrix<Self>) -> Self {
        det(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> std::result::Result<U, E>) -> std::result::Result<Matrix<U>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<std::result::Result<_, _>>()?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T: Clone> Matrix<T> {
    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Stacks `self` above `below`.
    pub fn vstack(&self, below: &Self) -> Self {
        assert_eq!(self.cols, below.cols, "vstack width");
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Matrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn with_row(&self, i: usize, row: &[T]) -> Self {
        let mut m = self.clone();
        m.data[i * self.cols..(i + 1) * self.cols].clone_from_slice(row);
        m
    }

    pub fn with_column(&self, j: usize, col: &[T]) -> Self {
        let mut m = self.clone();
        for (i, x) in col.iter().enumerate() {
            m[(i, j)] = x.clone();
        }
        m
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero_value())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one_value() } else { T::zero_value() })
    }

    pub fn diagonal(d: &[T]) -> Self {
        Matrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i].clone() } else { T::zero_value() })
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix product dimensions");
        Matrix::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = T::zero_value();
            for k in 0..self.cols {
                acc = acc.plus(&self[(i, k)].times(&o[(k, j)]));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimensions");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero_value();
                for (k, x) in v.iter().enumerate() {
                    acc = acc.plus(&self[(i, k)].times(x));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix sum dimensions");
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].plus(&o[(i, j)]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix difference dimensions");
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].minus(&o[(i, j)]))
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|x| x.times(k))
    }

    pub fn neg(&self) -> Self {
        self.map(Ring::negated)
    }

    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        T::determinant(self)
    }
}

impl Matrix<Rational> {
    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn inverse(&self) -> Result<Self> {
        inverse(self)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Ring>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero_value(), |acc, (x, y)| acc.plus(&x.times(y)))
}

fn subset_determinant<T: Ring>(m: &Matrix<T>) -> T {
    let n = m.rows;
    if n == 0 {
        return T::one_value();
    }
    assert!(n <= 20, "subset determinant limited to n ≤ 20");
    // dp[mask] = signed sum over injections of the first |mask| rows into mask.
    let mut dp: Vec<Option<T>> = vec![None; 1 << n];
    dp[0] = Some(T::one_value());
    for mask in 0usize..(1 << n) {
        let Some(val) = dp[mask].take() else { continue };
        let r = mask.count_ones() as usize;
        if r == n {
            dp[mask] = Some(val);
            continue;
        }
        for c in 0..n {
            if mask & (1 << c) != 0 {
                continue;
            }
            let above = (mask >> (c + 1)).count_ones();
            let term = val.times(&m[(r, c)]);
            let term = if above % 2 == 1 { term.negated() } else { term };
            let slot = &mut dp[mask | (1 << c)];
            *slot = Some(match slot.take() {
                Some(acc) => acc.plus(&term),
                None => term,
            });
        }
    }
    dp[(1 << n) - 1].take().unwrap_or_else(T::zero_value)
}

/// Determinant by Gaussian elimination over Q.
pub fn det(m: &Matrix<Rational>) -> Rational {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows;
    let mut a = m.clone();
    let mut d = Rational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[(i, k)].is_zero()) else {
            return Rational::zero();
        };
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
            }
            d = -d;
        }
        let piv = a[(k, k)].clone();
        d *= &piv;
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &piv;
            for j in k..n {
                let t = &f * &a[(k, j)];
                a[(i, j)] -= t;
            }
        }
    }
    d
}

/// Solves M·x = b exactly.
pub fn solve(m: &Matrix<Rational>, b: &[Rational]) -> Result<Vec<Rational>> {
    let inv = inverse(m)?;
    Ok(inv.mul_vec(b))
}

pub fn inverse(m: &Matrix<Rational>) -> Result<Matrix<Rational>> {
    if !m.is_square() {
        return Err(Error::Dimension("inverse of a non-square matrix"));
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = Matrix::<Rational>::identity(n);
    for k in 0..n {
        let p = (k..n)
            .find(|&i| !a[(i, k)].is_zero())
            .ok_or(Error::Singular("matrix inverse"))?;
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
                inv.data.swap(k * n + j, p * n + j);
            }
        }
        let piv = a[(k, k)].clone();
        for j in 0..n {
            a[(k, j)] /= &piv;
            inv[(k, j)] /= &piv;
        }
        for i in 0..n {
            if i == k || a[(i, k)].is_zero() {
                continue;
            }
            let f = a[(i, k)].clone();
            for j in 0..n {
                let t = &f * &a[(k, j)];
                a[(i, j)] -= t;
                let t = &f * &inv[(k, j)];
                inv[(i, j)] -= t;
            }
        }
    }
    Ok(inv)
}

/// A congruence diagonalization PᵀαP = diag(d) of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Congruence {
    pub p: Matrix<Rational>,
    pub diagonal: Vec<Rational>,
}

/// Symmetric elimination with pivoting; a zero pivot is repaired by a
/// diagonal swap or, failing that, a shear with an off-diagonal partner.
pub fn congruence_diagonalize(alpha: &Matrix<Rational>) -> Result<Congruence> {
    if !alpha.is_symmetric() {
        return Err(Error::Invalid("quadratic form matrix must be symmetric".into()));
    }
    let n = alpha.rows;
    let mut m = alpha.clone();
    let mut p = Matrix::<Rational>::identity(n);
    let swap = |m: &mut Matrix<Rational>, p: &mut Matrix<Rational>, a: usize, b: usize| {
        for i in 0..n {
            m.data.swap(a * n + i, b * n + i);
        }
        for i in 0..n {
            m.data.swap(i * n + a, i * n + b);
            p.data.swap(i * n + a, i * n + b);
        }
    };
    for k in 0..n {
        if m[(k, k)].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !m[(j, j)].is_zero()) {
                swap(&mut m, &mut p, k, j);
            } else {
                let j = (k + 1..n)
                    .find(|&j| !m[(k, j)].is_zero())
                    .ok_or(Error::Singular("quadratic form"))?;
                // Column k += column j (and the same on rows).
                for i in 0..n {
                    let t = m[(j, i)].clone();
                    m[(k, i)] += t;
                }
                for i in 0..n {
                    let t = m[(i, j)].clone();
                    m[(i, k)] += t;
                    let t = p[(i, j)].clone();
                    p[(i, k)] += t;
                }
            }
        }
        let piv = m[(k, k)].clone();
        for i in k + 1..n {
            if m[(i, k)].is_zero() {
                continue;
            }
            let c = &m[(i, k)] / &piv;
            for j in 0..n {
                let t = &c * &m[(k, j)];
                m[(i, j)] -= t;
            }
            for j in 0..n {
                let t = &c * &m[(j, k)];
                m[(j, i)] -= t;
                let t = &c * &p[(j, k)];
                p[(j, i)] -= t;
            }
        }
    }
    let diagonal: Vec<Rational> = (0..n).map(|i| m[(i, i)].clone()).collect();
    if diagonal.iter().any(Zero::is_zero) {
        return Err(Error::Singular("quadratic form"));
    }
    Ok(Congruence { p, diagonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn determinants_agree() {
        let m = mat(&[&[2, -1, 0, 3], &[1, 4, 2, 0], &[0, 5, -3, 1], &[7, 0, 1, 1]]);
        assert_eq!(det(&m), subset_determinant(&m));
        assert_eq!(det(&mat(&[&[1, 2], &[2, 4]])), int(0));
        assert_eq!(det(&mat(&[&[0, 1], &[1, 0]])), int(-1));
        assert_eq!(subset_determinant(&mat(&[&[0, 1], &[1, 0]])), int(-1));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = mat(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(3));
        assert!(mat(&[&[1, 2], &[2, 4]]).inverse().is_err());
    }

    #[test]
    fn congruence_handles_zero_pivots() {
        for m in [
            mat(&[&[0, 1], &[1, 0]]),
            mat(&[&[0, 0, 1], &[0, 2, 0], &[1, 0, 0]]),
            mat(&[&[0, 2, 1], &[2, 0, 3], &[1, 3, 0]]),
            mat(&[&[4, 2], &[2, 1]]).add(&Matrix::diagonal(&[ratio(1, 3), int(0)])),
        ] {
            let c = congruence_diagonalize(&m).unwrap();
            let d = c.p.transpose().mul(&m).mul(&c.p);
            assert_eq!(d, Matrix::diagonal(&c.diagonal));
            assert!(!det(&c.p).is_zero());
        }
        assert!(congruence_diagonalize(&mat(&[&[1, 1], &[1, 1]])).is_err());
        assert!(congruence_diagonalize(&mat(&[&[1, 2], &[0, 1]])).is_err());
    }
}
