//! Counting eigenvalues of Hermitian matrices below a threshold.
//!
//! Two exact methods: a dense eigensolve (Householder reduction to real
//! tridiagonal form followed by implicit QL) and Sylvester inertia from a
//! Bunch–Kaufman `LDL*` factorization of `H − E·1`.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::num::{Real, C};

/// Dimension above which counting switches from the dense eigensolve to inertia.
pub const DENSE_LIMIT: usize = 512;
/// Relative distance from `E` below which an eigenvalue or pivot is flagged.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Shift applied to a threshold flagged as degenerate.
pub const JITTER: f64 = 1e-7;
/// Relative cutoff for the numerical rank.
pub const RANK_TOL: f64 = 1e-10;
/// Absolute Hermiticity tolerance on input matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("matrix is not Hermitian: defect {0:e} exceeds 1e-10")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("QL iteration did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Dense,
    Inertia,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::Inertia => "inertia",
        }
    }
}

/// `N(E) = #{λ < E}` counting multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCount {
    pub energy: f64,
    pub count: usize,
    pub dim: usize,
    pub method: Method,
    /// Eigenvalues (dense) or pivots (inertia) within the degeneracy
    /// tolerance of `E`; the count is uncertain by up to this many.
    pub near_threshold: usize,
}

impl SpectralCount {
    pub fn is_degenerate(&self) -> bool {
        self.near_threshold > 0
    }
}

/// Inertia `(#negative, #zero, #positive)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

fn check_hermitian<T: Real>(h: &CMatrix<T>) -> Result<(), SpectraError> {
    let defect = h.hermiticity_defect().as_f64();
    if defect.is_nan() || defect > HERMITIAN_TOL {
        return Err(SpectraError::NotHermitian(defect));
    }
    Ok(())
}

fn degeneracy_tol<T: Real>(h: &CMatrix<T>) -> T {
    let scale = h.inf_norm();
    T::tol(DEGENERACY_TOL) * if scale > T::zero() { scale } else { T::one() }
}

/// Reduces a Hermitian matrix to a real symmetric tridiagonal matrix with the
/// same eigenvalues. Returns `(diagonal, off_diagonal)` with `off[i]` coupling
/// `i` and `i + 1`.
fn tridiagonalize<T: Real>(h: &CMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = h.dim();
    let mut a: Vec<C<T>> = h.as_slice().to_vec();
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let two = T::of(2.0);
    let mut v = vec![C::<T>::zero(); n];
    let mut p = vec![C::<T>::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let col = |i: usize| a[(k + 1 + i) * n + k];
        let norm = (0..m).map(|i| col(i).norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let x0 = col(0);
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            C::one()
        };
        let alpha = -phase * norm;
        for (i, vi) in v.iter_mut().take(m).enumerate() {
            *vi = col(i);
        }
        v[0] = v[0] - alpha;
        let vnorm = (0..m).map(|i| v[i].norm_sqr()).sum::<T>().sqrt();
        off[k] = norm;
        if vnorm == T::zero() {
            continue;
        }
        for vi in v.iter_mut().take(m) {
            *vi = *vi / vnorm;
        }
        // Trailing block A ← H A H with H = 1 − 2vv*, via p = Av, q = p − (v*p)v.
        let base = k + 1;
        for i in 0..m {
            let row = &a[(base + i) * n + base..(base + i) * n + base + m];
            p[i] = row.iter().zip(&v[..m]).fold(C::zero(), |s, (x, y)| s + x * y);
        }
        let kk = (0..m).fold(C::<T>::zero(), |s, i| s + v[i].conj() * p[i]).re;
        for i in 0..m {
            p[i] = p[i] - v[i] * kk;
        }
        for i in 0..m {
            let (vi, qi) = (v[i], p[i]);
            let row = &mut a[(base + i) * n + base..(base + i) * n + base + m];
            for (j, e) in row.iter_mut().enumerate() {
                *e = *e - (vi * p[j].conj() + qi * v[j].conj()) * two;
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, off)
}

/// Eigenvalues of a real symmetric tridiagonal matrix by implicit QL.
fn tridiagonal_eigenvalues<T: Real>(mut d: Vec<T>, off: Vec<T>) -> Result<Vec<T>, SpectraError> {
    let n = d.len();
    let mut e = off;
    e.push(T::zero());
    let eps = T::epsilon();
    let two = T::of(2.0);
    let scale = (0..n).fold(T::zero(), |s, i| {
        s.max(d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { T::zero() })
    });
    let floor = eps * scale;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(SpectraError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues<T: Real>(h: &CMatrix<T>) -> Result<Vec<T>, SpectraError> {
    check_hermitian(h)?;
    let (d, e) = tridiagonalize(h);
    tridiagonal_eigenvalues(d, e)
}

/// Inertia of a Hermitian matrix from a Bunch–Kaufman `LDL*` factorization,
/// together with the number of pivots of modulus at most `tol`.
pub fn inertia<T: Real>(h: &CMatrix<T>, tol: T) -> Result<(Inertia, usize), SpectraError> {
    check_hermitian(h)?;
    let n = h.dim();
    let mut a: Vec<C<T>> = h.as_slice().to_vec();
    let alpha = (T::one() + T::of(17.0).sqrt()) / T::of(8.0);
    let mut inertia = Inertia {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    let mut small = 0usize;
    let mut classify = |lam: T, inertia: &mut Inertia| {
        if lam.abs() <= tol {
            small += 1;
        }
        if lam < T::zero() {
            inertia.negative += 1;
        } else if lam > T::zero() {
            inertia.positive += 1;
        } else {
            inertia.zero += 1;
        }
    };
    let swap = |a: &mut Vec<C<T>>, i: usize, j: usize| {
        if i == j {
            return;
        }
        for c in 0..n {
            a.swap(i * n + c, j * n + c);
        }
        for r in 0..n {
            a.swap(r * n + i, r * n + j);
        }
    };

    let mut k = 0;
    while k < n {
        let akk = a[k * n + k].re.abs();
        let (mut r, mut colmax) = (k, T::zero());
        for i in k + 1..n {
            let v = a[i * n + k].norm();
            if v > colmax {
                colmax = v;
                r = i;
            }
        }
        let two_by_two = if akk.max(colmax) == T::zero() || akk >= alpha * colmax {
            false
        } else {
            let rowmax = (k..n)
                .filter(|&j| j != r)
                .map(|j| a[r * n + j].norm())
                .fold(T::zero(), T::max);
            if akk * rowmax >= alpha * colmax * colmax {
                false
            } else if a[r * n + r].re.abs() >= alpha * rowmax {
                swap(&mut a, k, r);
                false
            } else {
                swap(&mut a, k + 1, r);
                true
            }
        };

        if !two_by_two {
            let piv = a[k * n + k].re;
            classify(piv, &mut inertia);
            if piv != T::zero() {
                for i in k + 1..n {
                    let l = a[i * n + k] / piv;
                    if l.is_zero() {
                        continue;
                    }
                    for j in k + 1..n {
                        let u = a[k * n + j];
                        a[i * n + j] = a[i * n + j] - l * u;
                    }
                }
            }
            k += 1;
        } else {
            let (e11, e12, e22) = (a[k * n + k].re, a[k * n + k + 1], a[(k + 1) * n + k + 1].re);
            let det = e11 * e22 - e12.norm_sqr();
            let half_tr = (e11 + e22) / T::of(2.0);
            let disc = (((e11 - e22) / T::of(2.0)).powi(2) + e12.norm_sqr()).sqrt();
            classify(half_tr - disc, &mut inertia);
            classify(half_tr + disc, &mut inertia);
            // E⁻¹ = [[e22, −e12], [−conj(e12), e11]] / det
            let inv = [
                Complex::new(e22 / det, T::zero()),
                -e12 / det,
                -e12.conj() / det,
                Complex::new(e11 / det, T::zero()),
            ];
            for i in k + 2..n {
                let (c0, c1) = (a[i * n + k], a[i * n + k + 1]);
                let l0 = c0 * inv[0] + c1 * inv[2];
                let l1 = c0 * inv[1] + c1 * inv[3];
                for j in k + 2..n {
                    let u = l0 * a[k * n + j] + l1 * a[(k + 1) * n + j];
                    a[i * n + j] = a[i * n + j] - u;
                }
            }
            k += 2;
        }
    }
    Ok((inertia, small))
}

/// Sorted spectrum of a Hermitian matrix, reusable for many thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    values: Vec<T>,
    tol: T,
}

impl<T: Real> Spectrum<T> {
    pub fn new(h: &CMatrix<T>) -> Result<Self, SpectraError> {
        Ok(Self {
            values: eigenvalues(h)?,
            tol: degeneracy_tol(h),
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn count_below(&self, energy: f64) -> SpectralCount {
        let e = T::of(energy);
        let count = self.values.partition_point(|&v| v < e);
        let near = self.values.iter().filter(|&&v| (v - e).abs() <= self.tol).count();
        SpectralCount {
            energy,
            count,
            dim: self.values.len(),
            method: Method::Dense,
            near_threshold: near,
        }
    }
}

/// Counts thresholds for one matrix with the method chosen by dimension.
#[derive(Debug, Clone)]
pub enum SpectralCounter<T> {
    Dense(Spectrum<T>),
    Inertia { matrix: CMatrix<T>, tol: T },
}

impl<T: Real> SpectralCounter<T> {
    pub fn new(h: &CMatrix<T>) -> Result<Self, SpectraError> {
        Self::with_method(
            h,
            if h.dim() <= DENSE_LIMIT {
                Method::Dense
            } else {
                Method::Inertia
            },
        )
    }

    pub fn with_method(h: &CMatrix<T>, method: Method) -> Result<Self, SpectraError> {
        match method {
            Method::Dense => Ok(Self::Dense(Spectrum::new(h)?)),
            Method::Inertia => {
                check_hermitian(h)?;
                Ok(Self::Inertia {
                    matrix: h.clone(),
                    tol: degeneracy_tol(h),
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(s) => s.values.len(),
            Self::Inertia { matrix, .. } => matrix.dim(),
        }
    }

    pub fn count_below(&self, energy: f64) -> SpectralCount {
        match self {
            Self::Dense(s) => s.count_below(energy),
            Self::Inertia { matrix, tol } => {
                let shifted = matrix.shifted(T::of(-energy));
                let (inertia, near) = inertia(&shifted, *tol).expect("validated on construction");
                SpectralCount {
                    energy,
                    count: inertia.negative,
                    dim: matrix.dim(),
                    method: Method::Inertia,
                    near_threshold: near,
                }
            }
        }
    }
}

/// `#{λ < E}` with the method chosen by dimension.
pub fn count_below<T: Real>(h: &CMatrix<T>, energy: f64) -> Result<SpectralCount, SpectraError> {
    Ok(SpectralCounter::new(h)?.count_below(energy))
}

pub fn count_below_with<T: Real>(h: &CMatrix<T>, energy: f64, method: Method) -> Result<SpectralCount, SpectraError> {
    Ok(SpectralCounter::with_method(h, method)?.count_below(energy))
}

/// `N(E)/|Λ|`, normalized per site.
pub fn ids_value(count: &SpectralCount, volume: usize) -> f64 {
    count.count as f64 / volume as f64
}

/// `#{|λ| > 1e−10·max|λ|}` for a Hermitian matrix.
pub fn numerical_rank<T: Real>(h: &CMatrix<T>) -> Result<usize, SpectraError> {
    let ev = eigenvalues(h)?;
    let top = ev.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if top == T::zero() {
        return Ok(0);
    }
    let cut = T::tol(RANK_TOL) * top;
    Ok(ev.iter().filter(|v| v.abs() > cut).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankBoundReport {
    pub n_a: usize,
    pub n_ab: usize,
    pub rank_b: usize,
    pub holds: bool,
}

impl RankBoundReport {
    pub fn difference(&self) -> usize {
        self.n_a.abs_diff(self.n_ab)
    }
}

/// Checks `|N_A − N_{A+B}| ≤ rk(B)` for the negative-eigenvalue counts.
pub fn rank_bound_check<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<RankBoundReport, SpectraError> {
    if a.dim() != b.dim() {
        return Err(SpectraError::DimensionMismatch(a.dim(), b.dim()));
    }
    let n_a = count_below(a, 0.0)?.count;
    let n_ab = count_below(&(a + b), 0.0)?.count;
    let rank_b = numerical_rank(b)?;
    Ok(RankBoundReport {
        n_a,
        n_ab,
        rank_b,
        holds: n_a.abs_diff(n_ab) <= rank_b,
    })
}

/// Hermitian matrix with independent standard complex Gaussian entries
/// above the diagonal and real Gaussian diagonal.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        m[(i, i)] = Complex::new(T::of(d), T::zero());
        for j in i + 1..dim {
            let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            let z = Complex::new(T::of(re), T::of(im)) / T::of(2f64.sqrt());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// `Σ_{i<rank} w_i·v_i v_i*/‖v_i‖²` with Gaussian `v_i`, random signs and
/// weights `|w_i|` between 1 and `norm`, so the rank is `rank` almost surely.
pub fn random_low_rank<T: Real, R: Rng + ?Sized>(dim: usize, rank: usize, norm: f64, rng: &mut R) -> CMatrix<T> {
    let mut b = CMatrix::zeros(dim);
    for i in 0..rank {
        let v: Vec<C<T>> = (0..dim)
            .map(|_| {
                let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                Complex::new(T::of(re), T::of(im))
            })
            .collect();
        let vn: T = v.iter().map(|z| z.norm_sqr()).sum();
        let magnitude = if i == 0 {
            norm
        } else {
            1.0 + (norm - 1.0).max(0.0) * rng.random::<f64>()
        };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let w = T::of(sign * magnitude) / vn;
        for r in 0..dim {
            for c in 0..dim {
                b[(r, c)] = b[(r, c)] + v[r] * v[c].conj() * w;
            }
        }
    }
    b
}
