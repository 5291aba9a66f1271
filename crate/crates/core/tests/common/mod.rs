//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Free Wilson Dirac spectrum on a periodic `L^d` torus: for every momentum
/// `p_μ = 2πj/L`, the values `±√(M(p)² + 4κ²Σ sin²p_μ)` with
/// `M(p) = 1 − 2rκ Σ cos p_μ`, each with multiplicity `(s/2)·N_c`.
pub fn free_spectrum(d: usize, side: usize, kappa: f64, r: f64, spinor: usize, colors: usize) -> Vec<f64> {
    let mult = spinor / 2 * colors;
    let mut out = Vec::with_capacity(2 * mult * side.pow(d as u32));
    for idx in 0..side.pow(d as u32) {
        let mut rem = idx;
        let (mut cos_sum, mut sin_sq) = (0.0, 0.0);
        for _ in 0..d {
            let p = 2.0 * PI * (rem % side) as f64 / side as f64;
            rem /= side;
            cos_sum += p.cos();
            sin_sq += p.sin().powi(2);
        }
        let m = 1.0 - 2.0 * r * kappa * cos_sum;
        let w = (m * m + 4.0 * kappa * kappa * sin_sq).sqrt();
        for _ in 0..mult {
            out.push(w);
            out.push(-w);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn count_below(spectrum: &[f64], e: f64) -> usize {
    spectrum.iter().filter(|&&v| v < e).count()
}

/// Eigenvalues of a complex Hermitian matrix through nalgebra.
pub fn nalgebra_eigenvalues(m: &lattice_ids::CMatrixF64) -> Vec<f64> {
    let n = m.dim();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let z = m[(i, j)];
        nalgebra::Complex::new(z.re, z.im)
    });
    let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
