//! Dense square complex matrices.
//!
//! Used for gauge-group elements (N ≤ 3), spin/colour blocks of the Dirac
//! operator, and the dense Hermitian matrices handed to the spectral code.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::num::{Real, C};

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C::one();
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if `data.len() != n*n`.
    pub fn from_row_major(n: usize, data: Vec<C<T>>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n^2 entries");
        Self { n, data }
    }

    pub fn from_diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C<T> {
        (0..self.n)
            .map(|i| self.data[i * self.n + i])
            .fold(C::zero(), |a, b| a + b)
    }

    /// Real part of the trace.
    pub fn trace_re(&self) -> T {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    /// `Re Tr(self · other)` without forming the product.
    pub fn trace_re_of_product(&self, other: &Self) -> T {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut acc = T::zero();
        for i in 0..n {
            for k in 0..n {
                acc = acc + (self.data[i * n + k] * other.data[k * n + i]).re;
            }
        }
        acc
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn scale_re(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.n, other.n);
        let n = a * b;
        let mut out = Self::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let s = self.data[i * a + j];
                if s.is_zero() {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * n + (j * b + l)] = s * other.data[k * b + l];
                    }
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut y = vec![C::zero(); self.n];
        self.mat_vec_acc(x, &mut y);
        y
    }

    /// `y += self · x`.
    #[inline]
    pub fn mat_vec_acc(&self, x: &[C<T>], y: &mut [C<T>]) {
        let n = self.n;
        if n == 0 {
            return;
        }
        for (row, yi) in self.data.chunks_exact(n).zip(y.iter_mut()) {
            let mut acc = C::zero();
            for (a, b) in row.iter().zip(x) {
                acc = acc + *a * *b;
            }
            *yi = *yi + acc;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }

    /// Maximum absolute row sum; bounds the spectral radius.
    pub fn inf_norm(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// `max_{ij} |a_ij − conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.n;
        let mut m = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                m = m.max(d);
            }
        }
        m
    }

    /// `max_{ij} |(A A†)_ij − δ_ij|`.
    pub fn unitarity_defect(&self) -> T {
        (self * &self.adjoint()).max_abs_diff(&Self::identity(self.n))
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> C<T> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = C::<T>::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().partial_cmp(&a[j * n + k].norm()).unwrap())
                .unwrap();
            if a[p * n + k].is_zero() {
                return C::zero();
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let piv = a[k * n + k];
            det = det * piv;
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] = a[i * n + j] - f * t;
                }
            }
        }
        det
    }

    /// Adds `s·1` to the diagonal.
    pub fn shifted(&self, s: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] = out.data[i * self.n + i] + Complex::new(s, T::zero());
        }
        out
    }

    /// Converts to a matrix over another scalar type.
    pub fn cast<U: Real>(&self) -> CMatrix<U> {
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .map(|v| Complex::new(U::of(v.re.as_f64()), U::of(v.im.as_f64())))
                .collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}
