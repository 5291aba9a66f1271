//! Compact gauge groups U(N) and SU(N) realised as complex unitary matrices.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::num::{Real, C};

/// Unitarity drift tolerated before re-unitarization.
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("unsupported gauge group {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    U,
    SU,
}

/// Gauge group family and matrix size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupKind {
    pub family: Family,
    pub n: usize,
}

impl GroupKind {
    pub const U1: Self = Self {
        family: Family::U,
        n: 1,
    };
    pub const SU2: Self = Self {
        family: Family::SU,
        n: 2,
    };
    pub const SU3: Self = Self {
        family: Family::SU,
        n: 3,
    };

    /// Supported: U(1), U(2), U(3), SU(2), SU(3).
    pub fn new(family: Family, n: usize) -> Result<Self, GroupError> {
        let kind = Self { family, n };
        let ok = match family {
            Family::U => (1..=3).contains(&n),
            Family::SU => (2..=3).contains(&n),
        };
        if ok {
            Ok(kind)
        } else {
            Err(GroupError::Unsupported(kind.to_string()))
        }
    }

    /// Dobrushin uniqueness threshold `1/(12·N·(d−1))` for the Wilson action.
    pub fn dobrushin_threshold(&self, d: usize) -> f64 {
        1.0 / (12.0 * self.n as f64 * (d as f64 - 1.0))
    }

    pub fn is_special(&self) -> bool {
        self.family == Family::SU
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::U => "U",
            Family::SU => "SU",
        };
        write!(f, "{fam}({})", self.n)
    }
}

impl FromStr for GroupKind {
    type Err = GroupError;

    /// Accepts `U1`, `SU2`, `U(1)`, `su(3)`, …
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ' '))
            .collect::<String>()
            .to_ascii_uppercase();
        let (family, digits) = if let Some(rest) = t.strip_prefix("SU") {
            (Family::SU, rest)
        } else if let Some(rest) = t.strip_prefix('U') {
            (Family::U, rest)
        } else {
            return Err(GroupError::Unsupported(s.to_string()));
        };
        let n = digits
            .parse::<usize>()
            .map_err(|_| GroupError::Unsupported(s.to_string()))?;
        Self::new(family, n)
    }
}

/// An element of U(N) or SU(N).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<T> {
    m: CMatrix<T>,
}

impl<T: Real> GroupElement<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n),
        }
    }

    /// U(1) element `e^{iθ}`.
    pub fn phase(theta: T) -> Self {
        Self {
            m: CMatrix::from_row_major(1, vec![Complex::from_polar(T::one(), theta)]),
        }
    }

    /// Wraps a matrix without checking unitarity.
    pub fn from_matrix(m: CMatrix<T>) -> Self {
        Self { m }
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GroupError> {
        if self.dim() != other.dim() {
            return Err(GroupError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self * other)
    }

    /// Inverse, equal to the conjugate transpose.
    pub fn inverse(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace_re(&self) -> T {
        self.m.trace_re()
    }

    pub fn det(&self) -> C<T> {
        self.m.det()
    }

    pub fn unitarity_defect(&self) -> T {
        self.m.unitarity_defect()
    }

    /// Group membership within `tol`: unitarity, and `det = 1` for SU(N).
    pub fn is_member(&self, kind: GroupKind, tol: T) -> bool {
        if self.dim() != kind.n || self.unitarity_defect() > tol {
            return false;
        }
        match kind.family {
            Family::U => (self.det().norm() - T::one()).abs() <= tol,
            Family::SU => (self.det() - C::one()).norm() <= tol,
        }
    }

    /// Re-unitarizes when the drift exceeds the tolerance.
    pub fn maintain(&mut self, kind: GroupKind) {
        if self.unitarity_defect() > T::tol(UNITARITY_TOL) {
            self.reunitarize(kind);
        }
    }

    /// Projects onto the group: unitary polar factor, then (SU) removal of
    /// the determinant phase on the principal branch.
    pub fn reunitarize(&mut self, kind: GroupKind) {
        self.m = polar_unitary(&self.m);
        if kind.is_special() {
            remove_det_phase(&mut self.m, 0);
        }
    }

    pub fn cast<U: Real>(&self) -> GroupElement<U> {
        GroupElement { m: self.m.cast() }
    }
}

impl<T: Real> Mul for &GroupElement<T> {
    type Output = GroupElement<T>;
    fn mul(self, rhs: &GroupElement<T>) -> GroupElement<T> {
        GroupElement { m: &self.m * &rhs.m }
    }
}

/// Unitary factor of the polar decomposition of a near-unitary matrix
/// (Newton–Schulz iteration `X ← X(3 − X†X)/2`).
fn polar_unitary<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let n = m.dim();
    let three = CMatrix::identity(n).scale_re(T::of(3.0));
    let half = T::of(0.5);
    let mut x = m.clone();
    for _ in 0..60 {
        let gram = &x.adjoint() * &x;
        let err = gram.max_abs_diff(&CMatrix::identity(n));
        if err <= T::epsilon() * T::of(4.0) {
            break;
        }
        x = (&x * &(&three - &gram)).scale_re(half);
    }
    x
}

/// Multiplies by `det^{−1/N}·e^{2πi·branch/N}` so that the result has unit
/// determinant.
fn remove_det_phase<T: Real>(m: &mut CMatrix<T>, branch: usize) {
    let n = T::of(m.dim() as f64);
    let phi = m.det().arg();
    let theta = -phi / n + T::TAU() * T::of(branch as f64) / n;
    *m = m.scale(Complex::from_polar(T::one(), theta));
}

#[inline]
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-distributed element.
///
/// U(N): Gram–Schmidt orthonormalization of a complex Ginibre matrix, which
/// leaves a positive diagonal in the triangular factor (the phase-fixed QR).
/// SU(N): the U(N) sample divided by an N-th root of its determinant, the
/// branch chosen uniformly.
pub fn haar_sample<T: Real, R: Rng + ?Sized>(kind: GroupKind, rng: &mut R) -> GroupElement<T> {
    let n = kind.n;
    if kind.family == Family::U && n == 1 {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        return GroupElement::phase(T::of(theta));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    // columns of the Ginibre matrix
    let mut cols: Vec<Vec<Complex<f64>>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex::new(gaussian(rng) * inv_sqrt2, gaussian(rng) * inv_sqrt2))
                .collect()
        })
        .collect();
    for j in 0..n {
        for i in 0..j {
            let proj: Complex<f64> = (0..n).map(|r| cols[i][r].conj() * cols[j][r]).sum();
            let (head, tail) = cols.split_at_mut(j);
            for (t, v) in tail[0].iter_mut().zip(&head[i]) {
                *t -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut m = CMatrix::<T>::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = Complex::new(T::of(v.re), T::of(v.im));
        }
    }
    if kind.is_special() {
        let branch = rng.random_range(0..n);
        remove_det_phase(&mut m, branch);
    }
    GroupElement { m }
}

/// Random Hermitian matrix with unit-scale Gaussian entries; traceless for SU(N).
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(kind: GroupKind, rng: &mut R) -> CMatrix<T> {
    let n = kind.n;
    let mut h = vec![Complex::<f64>::zero(); n * n];
    for i in 0..n {
        h[i * n + i] = Complex::new(gaussian(rng), 0.0);
        for j in i + 1..n {
            let z = Complex::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2;
            h[i * n + j] = z;
            h[j * n + i] = z.conj();
        }
    }
    if kind.is_special() {
        let tr = (0..n).map(|i| h[i * n + i].re).sum::<f64>() / n as f64;
        for i in 0..n {
            h[i * n + i].re -= tr;
        }
    }
    CMatrix::from_row_major(
        n,
        h.into_iter().map(|z| Complex::new(T::of(z.re), T::of(z.im))).collect(),
    )
}

/// `exp(i·eps·H)` for Hermitian `H`, by scaling and squaring of the Taylor series.
pub fn exp_i_hermitian<T: Real>(h: &CMatrix<T>, eps: T) -> CMatrix<T> {
    let n = h.dim();
    let x = h.scale(Complex::new(T::zero(), eps));
    let norm = x.frobenius_norm().as_f64();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let y = x.scale_re(T::of(0.5f64.powi(squarings)));
    let mut term = CMatrix::identity(n);
    let mut acc = CMatrix::identity(n);
    for k in 1..=14 {
        term = (&term * &y).scale_re(T::one() / T::of(k as f64));
        acc = &acc + &term;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Symmetric random-walk proposal `V·U` with `V = exp(i·spread·H)`.
///
/// `H` and `−H` are equally likely, so `V` and `V⁻¹` have the same density.
pub fn propose_near<T: Real, R: Rng + ?Sized>(
    u: &GroupElement<T>,
    kind: GroupKind,
    spread: T,
    rng: &mut R,
) -> GroupElement<T> {
    let v = if kind.family == Family::U && kind.n == 1 {
        GroupElement::phase(spread * T::of(gaussian(rng)))
    } else {
        let mut v = GroupElement::from_matrix(exp_i_hermitian(&random_hermitian(kind, rng), spread));
        v.reunitarize(kind);
        v
    };
    let mut out = &v * u;
    out.maintain(kind);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const KINDS: [GroupKind; 3] = [GroupKind::U1, GroupKind::SU2, GroupKind::SU3];

    #[test]
    fn thresholds() {
        assert!((GroupKind::SU2.dobrushin_threshold(4) - 1.0 / 72.0).abs() < 1e-15);
        assert!((GroupKind::SU3.dobrushin_threshold(4) - 1.0 / 108.0).abs() < 1e-15);
        assert!((GroupKind::U1.dobrushin_threshold(2) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("U1".parse::<GroupKind>().unwrap(), GroupKind::U1);
        assert_eq!("su(3)".parse::<GroupKind>().unwrap(), GroupKind::SU3);
        assert!("SU1".parse::<GroupKind>().is_err());
        assert!("SO3".parse::<GroupKind>().is_err());
        assert_eq!(GroupKind::SU2.to_string(), "SU(2)");
    }

    #[test]
    fn haar_samples_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in KINDS {
            for _ in 0..200 {
                let u: GroupElement<f64> = haar_sample(kind, &mut rng);
                assert!(u.is_member(kind, 1e-12), "{kind} sample not in group");
            }
        }
    }

    #[test]
    fn basic_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let id = GroupElement::<f64>::identity(3);
        assert_eq!(id.inverse(), id);
        assert_eq!(id.trace_re(), 3.0);
        for kind in KINDS {
            let u: GroupElement<f64> = haar_sample(kind, &mut rng);
            let p = u.mul(&u.inverse()).unwrap();
            assert!(p.matrix().max_abs_diff(&CMatrix::identity(kind.n)) < 1e-12);
        }
        let a = GroupElement::<f64>::identity(2);
        let b = GroupElement::<f64>::identity(3);
        assert!(matches!(a.mul(&b), Err(GroupError::DimensionMismatch { .. })));
    }

    #[test]
    fn proposals_stay_in_group_and_near() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in KINDS {
            let u: GroupElement<f64> = haar_sample(kind, &mut rng);
            for &spread in &[1e-6, 1e-3, 0.4, 2.0] {
                let v = propose_near(&u, kind, spread, &mut rng);
                assert!(v.is_member(kind, 1e-12));
                if spread <= 1e-3 {
                    // ‖V·U − U‖ ≤ C·spread with C covering a few Gaussian sigmas
                    assert!(v.matrix().max_abs_diff(u.matrix()) < 10.0 * spread * kind.n as f64);
                }
            }
        }
    }

    #[test]
    fn exp_matches_closed_form_su2() {
        // exp(iεσ_3) = diag(e^{iε}, e^{−iε})
        let h = CMatrix::<f64>::from_diagonal(&[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)]);
        let e = exp_i_hermitian(&h, 1.7);
        let want = CMatrix::from_diagonal(&[Complex::from_polar(1.0, 1.7), Complex::from_polar(1.0, -1.7)]);
        assert!(e.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn reunitarize_repairs_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u: GroupElement<f64> = haar_sample(GroupKind::SU3, &mut rng);
        let mut drifted = GroupElement::from_matrix(u.matrix().scale_re(1.0 + 1e-7));
        assert!(!drifted.is_member(GroupKind::SU3, 1e-12));
        drifted.maintain(GroupKind::SU3);
        assert!(drifted.is_member(GroupKind::SU3, 1e-12));
        assert!(drifted.matrix().max_abs_diff(u.matrix()) < 1e-6);
    }

    #[test]
    fn single_precision_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u: GroupElement<f32> = haar_sample(GroupKind::SU2, &mut rng);
        assert!(u.is_member(GroupKind::SU2, 1e-5));
    }
}
