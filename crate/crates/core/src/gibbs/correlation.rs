//! Empirical plaquette-plaquette covariances and the Cesàro-averaged
//! ergodicity diagnostic `(2L+1)^{−d} Σ_{‖ℓ‖_∞ ≤ L} |Cov(ℓ)|`.

use super::{GaugeConfig, GibbsError};
use crate::group::GroupElement;
use crate::num::Real;

pub const MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub separation: Vec<i64>,
    pub linf: usize,
    pub cov: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CesaroPoint {
    pub window: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub rows: Vec<CorrelationRow>,
    /// One point per window `L = 0, …, max ‖ℓ‖_∞`.
    pub cesaro: Vec<CesaroPoint>,
    pub samples: usize,
}

struct Fields {
    /// `values[s][plane·V + site]`
    values: Vec<Vec<f64>>,
    means: Vec<f64>,
    planes: usize,
    volume: usize,
}

impl Fields {
    fn build<T: Real, F: Fn(&GroupElement<T>) -> f64>(samples: &[GaugeConfig<T>], f: &F) -> Self {
        let d = samples[0].d();
        let volume = samples[0].torus().volume();
        let planes: Vec<(usize, usize)> = (0..d).flat_map(|mu| (mu + 1..d).map(move |nu| (mu, nu))).collect();
        let values: Vec<Vec<f64>> = samples
            .iter()
            .map(|cfg| {
                planes
                    .iter()
                    .flat_map(|&(mu, nu)| (0..volume).map(move |site| f(&cfg.plaquette_at(site, mu, nu))))
                    .collect()
            })
            .collect();
        let means = values.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        Self {
            values,
            means,
            planes: planes.len(),
            volume,
        }
    }

    /// Covariance at shift and its leave-one-out jackknife error.
    fn covariance(&self, shifted_site: &[usize]) -> (f64, f64) {
        let n = self.values.len();
        let per_sample: Vec<f64> = self
            .values
            .iter()
            .map(|v| {
                let mut acc = 0.0;
                for p in 0..self.planes {
                    let base = p * self.volume;
                    for (site, &other) in shifted_site.iter().enumerate() {
                        acc += v[base + site] * v[base + other];
                    }
                }
                acc / (self.planes * self.volume) as f64
            })
            .collect();
        let sum_c: f64 = per_sample.iter().sum();
        let sum_m: f64 = self.means.iter().sum();
        let nf = n as f64;
        let full = sum_c / nf - (sum_m / nf).powi(2);
        let loo: Vec<f64> = (0..n)
            .map(|i| (sum_c - per_sample[i]) / (nf - 1.0) - ((sum_m - self.means[i]) / (nf - 1.0)).powi(2))
            .collect();
        let mean_loo = loo.iter().sum::<f64>() / nf;
        let var = (nf - 1.0) / nf * loo.iter().map(|t| (t - mean_loo).powi(2)).sum::<f64>();
        (full, var.sqrt())
    }
}

/// Covariance `Cov(f(U_p), f(U_{p+ℓ}))` for each separation, volume-averaged
/// over base plaquettes and planes, with jackknife errors over samples, plus
/// Cesàro averages for every window up to the largest `‖ℓ‖_∞` requested.
pub fn correlation_decay<T, F>(
    samples: &[GaugeConfig<T>],
    observable: F,
    separations: &[Vec<i64>],
) -> Result<CorrelationTable, GibbsError>
where
    T: Real,
    F: Fn(&GroupElement<T>) -> f64,
{
    if samples.len() < MIN_SAMPLES {
        return Err(GibbsError::TooFewSamples {
            got: samples.len(),
            need: MIN_SAMPLES,
        });
    }
    let torus = samples[0].torus().clone();
    if samples.iter().any(|s| s.torus() != &torus) {
        return Err(GibbsError::Mismatch("samples live on different tori".into()));
    }
    let d = torus.d();
    if let Some(bad) = separations.iter().find(|l| l.len() != d) {
        return Err(GibbsError::Mismatch(format!("separation {bad:?} has wrong dimension")));
    }
    let side = *torus.sides().iter().min().expect("d >= 2");
    let max_linf = separations
        .iter()
        .map(|l| l.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0))
        .max()
        .unwrap_or(0);
    if 3 * max_linf > side {
        return Err(GibbsError::SeparationTooLarge { linf: max_linf, side });
    }

    let fields = Fields::build(samples, &observable);
    let shift_map = |shift: &[i64]| -> Vec<usize> {
        torus
            .sites()
            .map(|x| {
                let y: Vec<i64> = x.iter().zip(shift).map(|(a, b)| a + b).collect();
                torus.wrapped_rank(&y)
            })
            .collect()
    };

    let rows = separations
        .iter()
        .map(|l| {
            let (cov, stderr) = fields.covariance(&shift_map(l));
            CorrelationRow {
                separation: l.clone(),
                linf: l.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0),
                cov,
                stderr,
            }
        })
        .collect();

    // |Cov(ℓ)| for every ℓ in the largest window, bucketed by ‖ℓ‖_∞.
    let m = max_linf as i64;
    let width = (2 * m + 1) as usize;
    let mut shell = vec![0.0; max_linf + 1];
    for idx in 0..width.pow(d as u32) {
        let mut rem = idx;
        let l: Vec<i64> = (0..d)
            .map(|_| {
                let c = (rem % width) as i64 - m;
                rem /= width;
                c
            })
            .collect();
        let linf = l.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0);
        shell[linf] += fields.covariance(&shift_map(&l)).0.abs();
    }
    let mut running = 0.0;
    let cesaro = shell
        .iter()
        .enumerate()
        .map(|(window, s)| {
            running += s;
            CesaroPoint {
                window,
                value: running / ((2 * window + 1) as f64).powi(d as i32),
            }
        })
        .collect();

    Ok(CorrelationTable {
        rows,
        cesaro,
        samples: samples.len(),
    })
}
