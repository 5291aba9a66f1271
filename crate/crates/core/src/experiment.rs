//! Thermodynamic-limit experiments: IDS curves on nested cubes, the
//! splitting and boundary-condition bounds, convergence across levels and
//! seeds, the non-dyadic cube sequence and Birkhoff averages.

use rayon::prelude::*;
use thiserror::Error;

use crate::dirac::{assemble, Boundary, DiracError, DiracParams};
use crate::gibbs::{sample_configurations, GaugeConfig, GibbsError, SamplerPlan};
use crate::group::GroupKind;
use crate::lattice::{split_translations, CubeSequence, LatticeError, LatticeGeometry, SiteSet};
use crate::num::Real;
use crate::spectra::{SpectraError, SpectralCounter, JITTER};

/// Default statistical tolerance for comparisons between independent samples.
pub const DEFAULT_TOLERANCE: f64 = 0.02;
/// Default cap on the matrix dimension of any assembled operator.
pub const DEFAULT_MAX_DIM: usize = 4096;
const MAX_JITTERS: usize = 16;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
    #[error("operator dimension {dim} exceeds the configured cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("{0}")]
    Invalid(String),
}

/// `n` uniform points on `[min, max]`.
pub fn energy_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..points)
            .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// 101 points on `±(1 + 2dκ(r+1))`.
pub fn default_grid(d: usize, params: &DiracParams) -> Vec<f64> {
    let b = params.norm_bound(d);
    energy_grid(-b, b, 101)
}

/// Assembles `D` on `sites` and prepares eigenvalue counting.
pub fn prepare_counter<T: Real>(
    cfg: &GaugeConfig<T>,
    sites: &SiteSet,
    bc: Boundary,
    params: DiracParams,
    max_dim: usize,
) -> Result<(SpectralCounter<T>, usize), ExperimentError> {
    let op = assemble(cfg, sites, bc, params)?;
    if op.dim() > max_dim {
        return Err(ExperimentError::TooLarge {
            dim: op.dim(),
            cap: max_dim,
        });
    }
    Ok((SpectralCounter::new(&op.to_dense())?, op.k()))
}

/// Counts every operator at every grid energy. When any operator has an
/// eigenvalue within the degeneracy tolerance of `E`, the threshold moves to
/// `E + 1e−7` for all of them at once. Returns the energies actually used and
/// `counts[operator][grid index]`.
pub fn joint_counts<T: Real>(counters: &[&SpectralCounter<T>], grid: &[f64]) -> (Vec<f64>, Vec<Vec<usize>>) {
    let rows: Vec<(f64, Vec<usize>)> = grid
        .par_iter()
        .map(|&e0| {
            let mut e = e0;
            for _ in 0..MAX_JITTERS {
                let counts: Vec<_> = counters.iter().map(|c| c.count_below(e)).collect();
                if counts.iter().all(|c| !c.is_degenerate()) {
                    return (e, counts.iter().map(|c| c.count).collect());
                }
                e += JITTER;
            }
            (e, counters.iter().map(|c| c.count_below(e).count).collect())
        })
        .collect();
    let used = rows.iter().map(|r| r.0).collect();
    let counts = (0..counters.len())
        .map(|i| rows.iter().map(|r| r.1[i]).collect())
        .collect();
    (used, counts)
}

fn sup_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `ρ_Λ(E) = N_Λ(E)/|Λ|` over an energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IdsCurve {
    pub bc: Boundary,
    pub volume: usize,
    /// Components per site.
    pub k: usize,
    /// Requested energies.
    pub grid: Vec<f64>,
    /// Energies actually counted, after jitter.
    pub energies: Vec<f64>,
    pub counts: Vec<usize>,
    pub ids: Vec<f64>,
}

impl IdsCurve {
    fn from_counts(
        bc: Boundary,
        volume: usize,
        k: usize,
        grid: &[f64],
        energies: Vec<f64>,
        counts: Vec<usize>,
    ) -> Self {
        let ids = counts.iter().map(|&c| c as f64 / volume as f64).collect();
        Self {
            bc,
            volume,
            k,
            grid: grid.to_vec(),
            energies,
            counts,
            ids,
        }
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        sup_norm(&self.ids, &other.ids)
    }

    pub fn is_monotone(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] <= w[1])
    }
}

pub fn ids_curve<T: Real>(
    cfg: &GaugeConfig<T>,
    sites: &SiteSet,
    bc: Boundary,
    params: DiracParams,
    grid: &[f64],
) -> Result<IdsCurve, ExperimentError> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(ExperimentError::Invalid("energy grid must be sorted".into()));
    }
    let (counter, k) = prepare_counter(cfg, sites, bc, params, usize::MAX)?;
    let (energies, mut counts) = joint_counts(&[&counter], grid);
    Ok(IdsCurve::from_counts(
        bc,
        sites.len(),
        k,
        grid,
        energies,
        counts.remove(0),
    ))
}

/// A measured quantity compared against a fixed bound at every grid energy.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub energies: Vec<f64>,
    pub measured: Vec<f64>,
    pub bound: f64,
}

impl BoundReport {
    pub fn sup(&self) -> f64 {
        self.measured.iter().copied().fold(0.0, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.measured.iter().all(|&m| m <= self.bound)
    }
}

/// `(1/|Ω|)·|N_Ω(E) − Σ_j N_{Ω_j}(E)|` for disjoint boxes `Ω_j` with union `Ω`,
/// against `k·Σ|∂Ω_j|/|Ω|` (Dirichlet) or `3k·Σ|∂Ω_j|/|Ω|` (periodic).
pub fn splitting_defect<T: Real>(
    cfg: &GaugeConfig<T>,
    parts: &[LatticeGeometry],
    bc: Boundary,
    params: DiracParams,
    grid: &[f64],
) -> Result<BoundReport, ExperimentError> {
    let union = SiteSet::disjoint_union(parts)?;
    if bc == Boundary::Periodic {
        let union_is_cube = union.as_box().is_some_and(|b| b.is_cube());
        if !union_is_cube || parts.iter().any(|p| !p.is_cube()) {
            return Err(ExperimentError::Invalid(
                "periodic splitting needs cubes whose union is a cube".into(),
            ));
        }
    }
    let whole = prepare_counter(cfg, &union, bc, params, usize::MAX)?;
    let pieces = parts
        .par_iter()
        .map(|p| prepare_counter(cfg, &SiteSet::from_box(p), bc, params, usize::MAX).map(|c| c.0))
        .collect::<Result<Vec<_>, _>>()?;
    let k = whole.1;
    let mut all = vec![&whole.0];
    all.extend(pieces.iter());
    let (energies, counts) = joint_counts(&all, grid);
    let volume = union.len() as f64;
    let measured = (0..grid.len())
        .map(|i| {
            let sum: usize = counts[1..].iter().map(|c| c[i]).sum();
            counts[0][i].abs_diff(sum) as f64 / volume
        })
        .collect();
    let boundary: usize = parts.iter().map(|p| p.boundary_len()).sum();
    let factor = if bc == Boundary::Periodic { 3.0 } else { 1.0 };
    Ok(BoundReport {
        energies,
        measured,
        bound: factor * k as f64 * boundary as f64 / volume,
    })
}

/// `(1/|Λ|)·|N^{dir}(E) − N^{per}(E)|` against `k|∂Λ|/|Λ|`.
pub fn bc_difference<T: Real>(
    cfg: &GaugeConfig<T>,
    cube: &LatticeGeometry,
    params: DiracParams,
    grid: &[f64],
) -> Result<BoundReport, ExperimentError> {
    if !cube.is_cube() {
        return Err(ExperimentError::Invalid(
            "boundary-condition comparison needs a cube".into(),
        ));
    }
    let sites = SiteSet::from_box(cube);
    let (dir, k) = prepare_counter(cfg, &sites, Boundary::Dirichlet, params, usize::MAX)?;
    let (per, _) = prepare_counter(cfg, &sites, Boundary::Periodic, params, usize::MAX)?;
    let (energies, counts) = joint_counts(&[&dir, &per], grid);
    let volume = sites.len() as f64;
    Ok(BoundReport {
        energies,
        measured: counts[0]
            .iter()
            .zip(&counts[1])
            .map(|(a, b)| a.abs_diff(*b) as f64 / volume)
            .collect(),
        bound: k as f64 * cube.boundary_len() as f64 / volume,
    })
}

/// The largest union of aligned translates of `Λ_{n0}` contained in `omega`.
pub fn inner_tiled_box(omega: &LatticeGeometry, l0: i64, n0: i64) -> Result<Option<LatticeGeometry>, ExperimentError> {
    let tile = CubeSequence::new(l0, omega.d())?.level(n0)?;
    let t = tile.sides()[0] as i64;
    let mut origin = Vec::with_capacity(omega.d());
    let mut sides = Vec::with_capacity(omega.d());
    for mu in 0..omega.d() {
        let (lo, hi) = (omega.origin()[mu], omega.upper()[mu]);
        let o = tile.origin()[mu];
        let j_min = (lo - o).div_euclid(t) + i64::from((lo - o).rem_euclid(t) != 0);
        let j_max = (hi - o - t + 1).div_euclid(t);
        if j_max < j_min {
            return Ok(None);
        }
        origin.push(o + j_min * t);
        sides.push(((j_max - j_min + 1) * t) as usize);
    }
    Ok(Some(LatticeGeometry::new(sides, origin)?))
}

/// Dirichlet comparison of `Ω` with its inner tiled box `Ω̃`:
/// `|N[Ω] − N[Ω̃]| ≤ k|∂Ω̃| + (2d+1)k(|Ω| − |Ω̃|)` at every grid energy.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerBoxReport {
    pub omega: LatticeGeometry,
    pub inner: LatticeGeometry,
    /// `|N[Ω] − N[Ω̃]|` per grid energy.
    pub report: BoundReport,
    pub omega_curve: IdsCurve,
}

pub fn inner_box_check<T: Real>(
    cfg: &GaugeConfig<T>,
    omega: &LatticeGeometry,
    l0: i64,
    n0: i64,
    params: DiracParams,
    grid: &[f64],
) -> Result<InnerBoxReport, ExperimentError> {
    let inner = inner_tiled_box(omega, l0, n0)?
        .ok_or_else(|| ExperimentError::Invalid(format!("no translate of Λ_{n0} fits in the box")))?;
    let outer_sites = SiteSet::from_box(omega);
    let (outer, k) = prepare_counter(cfg, &outer_sites, Boundary::Dirichlet, params, usize::MAX)?;
    let (inner_c, _) = prepare_counter(cfg, &SiteSet::from_box(&inner), Boundary::Dirichlet, params, usize::MAX)?;
    let (energies, counts) = joint_counts(&[&outer, &inner_c], grid);
    let d = omega.d() as f64;
    let k = k as f64;
    let bound = k * inner.boundary_len() as f64 + (2.0 * d + 1.0) * k * (omega.volume() - inner.volume()) as f64;
    let omega_curve = IdsCurve::from_counts(
        Boundary::Dirichlet,
        omega.volume(),
        k as usize,
        grid,
        energies.clone(),
        counts[0].clone(),
    );
    Ok(InnerBoxReport {
        omega: omega.clone(),
        inner,
        report: BoundReport {
            energies,
            measured: counts[0]
                .iter()
                .zip(&counts[1])
                .map(|(a, b)| a.abs_diff(*b) as f64)
                .collect(),
            bound,
        },
        omega_curve,
    })
}

/// Inputs of a convergence study over the dyadic cubes `Λ_1 … Λ_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePlan {
    pub d: usize,
    pub kind: GroupKind,
    /// Sampler settings; the seed is replaced by each entry of `seeds`.
    pub sampler: SamplerPlan,
    /// Use `U ≡ 1` instead of sampling.
    pub free_field: bool,
    pub l0: i64,
    pub n_max: i64,
    pub bcs: Vec<Boundary>,
    pub params: DiracParams,
    pub grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub max_dim: usize,
    pub tolerance: f64,
}

impl ConvergencePlan {
    /// Side of the sampled torus, `2·l0·2^{n_max}`.
    pub fn torus_side(&self) -> usize {
        (2 * self.l0 as usize) << self.n_max
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n_max < 2 {
            return Err(ExperimentError::Invalid("n_max must be >= 2".into()));
        }
        if self.seeds.len() < 2 {
            return Err(ExperimentError::Invalid("at least two seeds are required".into()));
        }
        if self.bcs.is_empty() {
            return Err(ExperimentError::Invalid("no boundary conditions selected".into()));
        }
        let side = (self.l0 as usize) << self.n_max;
        let k = crate::dirac::GammaSet::<f64>::new(self.d)?.spinor_dim() * self.kind.n;
        let dim = k * side.pow(self.d as u32);
        if dim > self.max_dim {
            return Err(ExperimentError::TooLarge { dim, cap: self.max_dim });
        }
        self.params.validate()?;
        self.sampler.validate()?;
        Ok(())
    }

    /// The configuration used for `seed`.
    pub fn configuration<T: Real>(&self, seed: u64) -> Result<GaugeConfig<T>, ExperimentError> {
        let torus = LatticeGeometry::torus(self.d, self.torus_side())?;
        if self.free_field {
            let mut cfg = GaugeConfig::identity(torus, self.kind);
            cfg.meta_mut().seed = seed;
            return Ok(cfg);
        }
        let plan = SamplerPlan {
            seed,
            n_samples: 1,
            ..self.sampler
        };
        Ok(sample_configurations(&plan, torus, self.kind)?.remove(0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub seed: u64,
    pub n: i64,
    pub cube: LatticeGeometry,
    pub curve: IdsCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub seed: u64,
    pub bc: Boundary,
    pub n: i64,
    /// `sup_E |ρ_{Λ_{n+1}} − ρ_{Λ_n}|`
    pub delta: f64,
    /// `(2dk/l0)·2^{−n}`
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub curves: Vec<LevelCurve>,
    pub deltas: Vec<DeltaRow>,
    /// Largest pairwise top-level sup-norm distance across seeds, per bc.
    pub cross_seed: Vec<(Boundary, f64)>,
    /// Top-level Dirichlet/periodic comparison per seed.
    pub bc_gaps: Vec<(u64, BoundReport)>,
    /// Splitting of `Λ_n` into the `2^d` translates of `Λ_{n−1}`, per seed, level and bc.
    pub splittings: Vec<(u64, i64, Boundary, BoundReport)>,
    pub tolerance: f64,
}

impl ConvergenceReport {
    pub fn curve(&self, seed: u64, n: i64, bc: Boundary) -> Option<&IdsCurve> {
        self.curves
            .iter()
            .find(|c| c.seed == seed && c.n == n && c.curve.bc == bc)
            .map(|c| &c.curve)
    }

    /// Every lemma bound (splittings and boundary-condition gaps) holds.
    pub fn bounds_hold(&self) -> bool {
        self.bc_gaps.iter().all(|(_, r)| r.holds()) && self.splittings.iter().all(|s| s.3.holds())
    }
}

pub fn convergence_study<T: Real>(plan: &ConvergencePlan) -> Result<ConvergenceReport, ExperimentError> {
    plan.validate()?;
    let seq = CubeSequence::new(plan.l0, plan.d)?;
    let per_seed = plan
        .seeds
        .par_iter()
        .map(|&seed| -> Result<_, ExperimentError> {
            let cfg = plan.configuration::<T>(seed)?;
            let mut curves = Vec::new();
            let mut splittings = Vec::new();
            for n in 1..=plan.n_max {
                let cube = seq.level(n)?;
                let sites = SiteSet::from_box(&cube);
                for &bc in &plan.bcs {
                    let (counter, k) = prepare_counter(&cfg, &sites, bc, plan.params, plan.max_dim)?;
                    let (energies, mut counts) = joint_counts(&[&counter], &plan.grid);
                    curves.push(LevelCurve {
                        seed,
                        n,
                        cube: cube.clone(),
                        curve: IdsCurve::from_counts(bc, sites.len(), k, &plan.grid, energies, counts.remove(0)),
                    });
                    if n >= 2 {
                        let parts: Vec<LatticeGeometry> = split_translations(n - 1, plan.l0, plan.d)?
                            .iter()
                            .map(|s| seq.level(n - 1).map(|c| c.translated(s)))
                            .collect::<Result<_, _>>()?;
                        splittings.push((
                            seed,
                            n,
                            bc,
                            splitting_defect(&cfg, &parts, bc, plan.params, &plan.grid)?,
                        ));
                    }
                }
            }
            let gap = bc_difference(&cfg, &seq.level(plan.n_max)?, plan.params, &plan.grid)?;
            Ok((curves, splittings, (seed, gap)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut curves = Vec::new();
    let mut splittings = Vec::new();
    let mut bc_gaps = Vec::new();
    for (c, s, g) in per_seed {
        curves.extend(c);
        splittings.extend(s);
        bc_gaps.push(g);
    }
    let mut report = ConvergenceReport {
        curves,
        deltas: Vec::new(),
        cross_seed: Vec::new(),
        bc_gaps,
        splittings,
        tolerance: plan.tolerance,
    };
    for &seed in &plan.seeds {
        for &bc in &plan.bcs {
            for n in 1..plan.n_max {
                let a = report.curve(seed, n, bc).expect("computed above");
                let b = report.curve(seed, n + 1, bc).expect("computed above");
                let k = a.k as f64;
                report.deltas.push(DeltaRow {
                    seed,
                    bc,
                    n,
                    delta: a.sup_distance(b),
                    envelope: 2.0 * plan.d as f64 * k / plan.l0 as f64 * 0.5f64.powi(n as i32),
                });
            }
        }
    }
    for &bc in &plan.bcs {
        let mut worst: f64 = 0.0;
        for (i, &s) in plan.seeds.iter().enumerate() {
            for &t in &plan.seeds[i + 1..] {
                let a = report.curve(s, plan.n_max, bc).expect("computed above");
                let b = report.curve(t, plan.n_max, bc).expect("computed above");
                worst = worst.max(a.sup_distance(b));
            }
        }
        report.cross_seed.push((bc, worst));
    }
    Ok(report)
}

/// Running spatial mean of `Z_x = N^{(dir)}_{T^{t·x}Λ_{n0}}(E)` with
/// `t = l0·2^{n0}` over the windows `x ∈ {0, …, w−1}^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirkhoffRow {
    pub window: usize,
    pub samples: usize,
    pub mean: f64,
    /// Standard error of the mean; zero for a single sample.
    pub stderr: f64,
}

pub fn birkhoff_average<T: Real>(
    cfg: &GaugeConfig<T>,
    l0: i64,
    n0: i64,
    window: usize,
    energy: f64,
    params: DiracParams,
) -> Result<Vec<BirkhoffRow>, ExperimentError> {
    let d = cfg.d();
    let tile = CubeSequence::new(l0, d)?.level(n0)?;
    let t = tile.sides()[0];
    if window == 0 || window * t > *cfg.torus().sides().iter().min().expect("d >= 2") {
        return Err(ExperimentError::Invalid(format!(
            "window {window} of translates with stride {t} exceeds the torus"
        )));
    }
    let points: Vec<Vec<usize>> = (0..window.pow(d as u32))
        .map(|mut i| {
            (0..d)
                .map(|_| {
                    let c = i % window;
                    i /= window;
                    c
                })
                .collect()
        })
        .collect();
    let z = points
        .par_iter()
        .map(|x| {
            let shift: Vec<i64> = x.iter().map(|&c| (c * t) as i64).collect();
            let sites = SiteSet::from_box(&tile.translated(&shift));
            let (counter, _) = prepare_counter(cfg, &sites, Boundary::Dirichlet, params, usize::MAX)?;
            let (_, counts) = joint_counts(&[&counter], &[energy]);
            Ok(counts[0][0] as f64)
        })
        .collect::<Result<Vec<f64>, ExperimentError>>()?;
    Ok((1..=window)
        .map(|w| {
            let vals: Vec<f64> = points
                .iter()
                .zip(&z)
                .filter(|(x, _)| x.iter().all(|&c| c < w))
                .map(|(_, &v)| v)
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let stderr = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            BirkhoffRow {
                window: w,
                samples: vals.len(),
                mean,
                stderr,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::chain_rng;

    fn haar(kind: GroupKind, side: usize, seed: u64) -> GaugeConfig<f64> {
        GaugeConfig::haar(LatticeGeometry::torus(2, side).unwrap(), kind, &mut chain_rng(seed, 5))
    }

    #[test]
    fn grids() {
        assert_eq!(energy_grid(-1.0, 1.0, 3), vec![-1.0, 0.0, 1.0]);
        let g = default_grid(2, &DiracParams::new(0.1, 1.0));
        assert_eq!(g.len(), 101);
        assert!((g[0] + 1.8).abs() < 1e-15 && (g[100] - 1.8).abs() < 1e-15);
    }

    #[test]
    fn free_field_extremes() {
        let cfg = GaugeConfig::<f64>::identity(LatticeGeometry::torus(2, 4).unwrap(), GroupKind::U1);
        let sites = SiteSet::from_box(cfg.torus());
        let c = ids_curve(
            &cfg,
            &sites,
            Boundary::Periodic,
            DiracParams::new(0.1, 1.0),
            &[-10.0, 0.0, 10.0],
        )
        .unwrap();
        assert_eq!(c.ids, vec![0.0, 1.0, 2.0]);
        assert!(ids_curve(&cfg, &sites, Boundary::Periodic, DiracParams::default(), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn distant_parts_split_exactly() {
        let cfg = haar(GroupKind::U1, 12, 1);
        let grid = default_grid(2, &DiracParams::default());
        let a = LatticeGeometry::new(vec![3, 3], vec![0, 0]).unwrap();
        let b = LatticeGeometry::new(vec![2, 4], vec![5, 1]).unwrap();
        let r = splitting_defect(
            &cfg,
            &[a.clone(), b],
            Boundary::Dirichlet,
            DiracParams::default(),
            &grid,
        )
        .unwrap();
        assert_eq!(r.sup(), 0.0);
        let r = splitting_defect(&cfg, &[a], Boundary::Dirichlet, DiracParams::default(), &grid).unwrap();
        assert_eq!(r.sup(), 0.0);
    }

    #[test]
    fn four_way_split_bounds() {
        let cfg = haar(GroupKind::SU2, 8, 2);
        let grid = default_grid(2, &DiracParams::default());
        let parts: Vec<_> = [[0, 0], [4, 0], [0, 4], [4, 4]]
            .iter()
            .map(|o| LatticeGeometry::cube_at(4, o.to_vec()).unwrap())
            .collect();
        for bc in [Boundary::Dirichlet, Boundary::Periodic] {
            let r = splitting_defect(&cfg, &parts, bc, DiracParams::default(), &grid).unwrap();
            assert!(r.holds(), "{bc}: {} > {}", r.sup(), r.bound);
            assert!(r.sup() > 0.0);
        }
        let uneven = [
            LatticeGeometry::new(vec![2, 4], vec![0, 0]).unwrap(),
            LatticeGeometry::new(vec![2, 4], vec![2, 0]).unwrap(),
        ];
        assert!(splitting_defect(&cfg, &uneven, Boundary::Periodic, DiracParams::default(), &grid).is_err());
        let overlapping = [parts[0].clone(), parts[0].clone()];
        assert!(splitting_defect(&cfg, &overlapping, Boundary::Dirichlet, DiracParams::default(), &grid).is_err());
    }

    #[test]
    fn inner_tiled_boxes() {
        let omega = LatticeGeometry::centered_cube(6, 2).unwrap();
        let inner = inner_tiled_box(&omega, 2, 1).unwrap().unwrap();
        assert_eq!(inner, CubeSequence::new(2, 2).unwrap().level(1).unwrap());
        let big = LatticeGeometry::centered_cube(14, 2).unwrap();
        assert_eq!(inner_tiled_box(&big, 2, 1).unwrap().unwrap().sides(), &[12, 12]);
        let small = LatticeGeometry::centered_cube(3, 2).unwrap();
        assert_eq!(inner_tiled_box(&small, 2, 1).unwrap(), None);
    }

    #[test]
    fn birkhoff_free_field_has_no_fluctuation() {
        let cfg = GaugeConfig::<f64>::identity(LatticeGeometry::torus(2, 12).unwrap(), GroupKind::U1);
        let rows = birkhoff_average(&cfg, 2, 1, 3, 0.05, DiracParams::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.stderr == 0.0 && r.mean == rows[0].mean));
        assert!(birkhoff_average(&cfg, 2, 1, 4, 0.05, DiracParams::default()).is_err());
    }
}
