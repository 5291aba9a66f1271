//! Euclidean γ-matrices and the Hermitian Wilson Dirac operator
//! `[Dφ](x) = γ₅[φ(x) − κ Σ_μ Σ_{σ=±1} (r − σγ_μ) U_{x,σμ} φ(x+σê_μ)]`
//! on a finite set of sites.
//!
//! Vector layout: `index = (site_rank·s + α)·N_c + c`, with `s` the spinor
//! dimension and `N_c` the colour dimension, so `k = s·N_c` components per site.

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::gibbs::GaugeConfig;
use crate::group::GroupKind;
use crate::lattice::{shifted, SiteSet};
use crate::linalg::CMatrix;
use crate::num::{Real, C};

#[derive(Debug, Error, PartialEq)]
pub enum DiracError {
    #[error("γ-matrices are only provided for d = 2 and d = 4, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("invalid Dirac parameters: {0}")]
    Params(String),
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("vector length {got} does not match operator dimension {expected}")]
    Length { expected: usize, got: usize },
}

/// Euclidean Clifford generators `γ_1 … γ_d` and `γ_5`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet<T> {
    d: usize,
    gammas: Vec<CMatrix<T>>,
    gamma5: CMatrix<T>,
}

impl<T: Real> GammaSet<T> {
    /// `d = 4`: `γ_j = [[0, −iσ_j], [iσ_j, 0]]`, `γ_4 = [[0, 1], [1, 0]]`,
    /// `γ_5 = γ_1γ_2γ_3γ_4 = diag(1, 1, −1, −1)`.
    /// `d = 2`: `γ_1 = σ_1`, `γ_2 = σ_2`, `γ_5 = σ_3`.
    pub fn new(d: usize) -> Result<Self, DiracError> {
        let z = C::<T>::zero();
        let o = C::<T>::one();
        let i = C::<T>::i();
        let pauli = [[z, o, o, z], [z, -i, i, z], [o, z, z, -o]];
        match d {
            2 => Ok(Self {
                d,
                gammas: pauli[..2]
                    .iter()
                    .map(|p| CMatrix::from_row_major(2, p.to_vec()))
                    .collect(),
                gamma5: CMatrix::from_row_major(2, pauli[2].to_vec()),
            }),
            4 => {
                let block = |ul: [C<T>; 4], ur: [C<T>; 4], ll: [C<T>; 4], lr: [C<T>; 4]| {
                    let mut m = CMatrix::zeros(4);
                    for (bi, bj, b) in [(0, 0, ul), (0, 2, ur), (2, 0, ll), (2, 2, lr)] {
                        for a in 0..2 {
                            for c in 0..2 {
                                m[(bi + a, bj + c)] = b[a * 2 + c];
                            }
                        }
                    }
                    m
                };
                let zero = [z; 4];
                let mut gammas: Vec<CMatrix<T>> = pauli
                    .iter()
                    .map(|p| block(zero, p.map(|v| -i * v), p.map(|v| i * v), zero))
                    .collect();
                gammas.push(block(zero, [o, z, z, o], [o, z, z, o], zero));
                let gamma5 = &(&(&gammas[0] * &gammas[1]) * &gammas[2]) * &gammas[3];
                Ok(Self { d, gammas, gamma5 })
            }
            other => Err(DiracError::UnsupportedDimension(other)),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Spinor dimension `s`.
    pub fn spinor_dim(&self) -> usize {
        self.gamma5.dim()
    }

    /// `γ_{μ+1}` for the 0-based direction `mu`.
    pub fn gamma(&self, mu: usize) -> &CMatrix<T> {
        &self.gammas[mu]
    }

    pub fn gamma5(&self) -> &CMatrix<T> {
        &self.gamma5
    }

    /// Largest deviation from `{γ_μ, γ_ν} = 2δ_{μν}`, `{γ_μ, γ_5} = 0`,
    /// `γ_5² = 1`, Hermiticity of every generator, and `γ_5 = γ_1γ_2γ_3γ_4`
    /// (d = 4) or `γ_5 = −iγ_1γ_2` (d = 2).
    pub fn clifford_defect(&self) -> T {
        let s = self.spinor_dim();
        let id = CMatrix::<T>::identity(s);
        let anti = |a: &CMatrix<T>, b: &CMatrix<T>| &(a * b) + &(b * a);
        let mut worst = T::zero();
        let all: Vec<&CMatrix<T>> = self.gammas.iter().chain(std::iter::once(&self.gamma5)).collect();
        for (m, a) in all.iter().enumerate() {
            worst = worst.max(a.hermiticity_defect());
            for (n, b) in all.iter().enumerate() {
                let expected = if m == n {
                    id.scale_re(T::of(2.0))
                } else {
                    CMatrix::zeros(s)
                };
                worst = worst.max(anti(a, b).max_abs_diff(&expected));
            }
        }
        let product = self
            .gammas
            .iter()
            .skip(1)
            .fold(self.gammas[0].clone(), |acc, g| &acc * g);
        let product = if self.d == 2 {
            product.scale(C::new(T::zero(), -T::one()))
        } else {
            product
        };
        worst.max(product.max_abs_diff(&self.gamma5))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

impl Boundary {
    pub fn name(&self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Periodic => "periodic",
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "dir" => Ok(Boundary::Dirichlet),
            "periodic" | "per" => Ok(Boundary::Periodic),
            other => Err(format!("unknown boundary condition `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams {
    pub kappa: f64,
    pub r: f64,
    /// Fault injection for self-tests: negates every forward hop, which
    /// breaks Hermiticity.
    pub flip_forward_hops: bool,
}

impl Default for DiracParams {
    fn default() -> Self {
        Self {
            kappa: 0.12,
            r: 1.0,
            flip_forward_hops: false,
        }
    }
}

impl DiracParams {
    pub fn new(kappa: f64, r: f64) -> Self {
        Self {
            kappa,
            r,
            flip_forward_hops: false,
        }
    }

    pub fn validate(&self) -> Result<(), DiracError> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(DiracError::Params(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(DiracError::Params(format!("r must lie in (0, 1], got {}", self.r)));
        }
        Ok(())
    }

    /// Operator-norm bound `1 + 2dκ(r + 1)`.
    pub fn norm_bound(&self, d: usize) -> f64 {
        1.0 + 2.0 * d as f64 * self.kappa * (self.r + 1.0)
    }
}

#[derive(Debug, Clone)]
struct Hop<T> {
    to: usize,
    block: CMatrix<T>,
}

/// Site-blocked sparse Hermitian Wilson Dirac operator.
#[derive(Debug, Clone)]
pub struct DiracOperator<T> {
    sites: SiteSet,
    bc: Boundary,
    kind: GroupKind,
    params: DiracParams,
    spin: usize,
    diag: CMatrix<T>,
    hops: Vec<Vec<Hop<T>>>,
}

/// Builds `D` on `sites` from the links of `cfg`.
///
/// Dirichlet: hops leaving `sites` are dropped. Periodic: `sites` must be a box;
/// hops wrap within the box and the wrapped hop across a face uses the link of
/// the configuration on the bond leaving that face, so on the full torus this
/// is the usual periodic operator.
pub fn assemble<T: Real>(
    cfg: &GaugeConfig<T>,
    sites: &SiteSet,
    bc: Boundary,
    params: DiracParams,
) -> Result<DiracOperator<T>, DiracError> {
    params.validate()?;
    let d = cfg.d();
    if sites.d() != d {
        return Err(DiracError::Geometry(format!(
            "site set has d = {}, configuration has d = {d}",
            sites.d()
        )));
    }
    if sites.is_empty() {
        return Err(DiracError::Geometry("empty site set".into()));
    }
    let gammas = GammaSet::<T>::new(d)?;
    let torus = cfg.torus();
    for mu in 0..d {
        let lo = sites.sites().iter().map(|x| x[mu]).min().expect("non-empty");
        let hi = sites.sites().iter().map(|x| x[mu]).max().expect("non-empty");
        if (hi - lo + 1) as usize > torus.sides()[mu] {
            return Err(DiracError::Geometry(format!(
                "sites extend over {} > torus side {} along direction {mu}",
                hi - lo + 1,
                torus.sides()[mu]
            )));
        }
    }
    let wrap_box = match bc {
        Boundary::Dirichlet => None,
        Boundary::Periodic => Some(
            sites
                .as_box()
                .ok_or_else(|| DiracError::Geometry("periodic boundary conditions need a box".into()))?
                .clone(),
        ),
    };

    let s = gammas.spinor_dim();
    let nc = cfg.kind().n;
    let g5 = gammas.gamma5().clone();
    let kappa = T::of(params.kappa);
    let r_id = CMatrix::<T>::identity(s).scale_re(T::of(params.r));
    // spin[μ][0] for σ = +1, spin[μ][1] for σ = −1: −κ γ₅ (r − σγ_μ)
    let spin: Vec<[CMatrix<T>; 2]> = (0..d)
        .map(|mu| {
            let fwd = &g5 * &(&r_id - gammas.gamma(mu));
            let bwd = &g5 * &(&r_id + gammas.gamma(mu));
            let fsign = if params.flip_forward_hops { kappa } else { -kappa };
            [fwd.scale_re(fsign), bwd.scale_re(-kappa)]
        })
        .collect();

    let hops = sites
        .sites()
        .iter()
        .map(|x| {
            let mut out = Vec::with_capacity(2 * d);
            for (mu, spin_mu) in spin.iter().enumerate() {
                for (forward, spin_block) in [(true, &spin_mu[0]), (false, &spin_mu[1])] {
                    let step = if forward { 1 } else { -1 };
                    let raw = shifted(x, mu, step);
                    let (to, link) = match &wrap_box {
                        None => match sites.rank(&raw) {
                            Some(to) => (to, cfg.link_signed(x, mu, forward)),
                            None => continue,
                        },
                        Some(b) => {
                            let y = b.wrap(&raw);
                            let link = if forward {
                                cfg.link(x, mu).clone()
                            } else {
                                cfg.link(&y, mu).inverse()
                            };
                            (sites.rank(&y).expect("wrapped site lies in box"), link)
                        }
                    };
                    out.push(Hop {
                        to,
                        block: spin_block.kron(link.matrix()),
                    });
                }
            }
            out
        })
        .collect();

    Ok(DiracOperator {
        sites: sites.clone(),
        bc,
        kind: cfg.kind(),
        params,
        spin: s,
        diag: g5.kron(&CMatrix::identity(nc)),
        hops,
    })
}

impl<T: Real> DiracOperator<T> {
    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn bc(&self) -> Boundary {
        self.bc
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn params(&self) -> DiracParams {
        self.params
    }

    pub fn spinor_dim(&self) -> usize {
        self.spin
    }

    /// Components per site, `k = s·N_c`.
    pub fn k(&self) -> usize {
        self.diag.dim()
    }

    pub fn volume(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.k() * self.volume()
    }

    /// Matrix-free `Dφ`.
    pub fn apply(&self, phi: &[C<T>]) -> Result<Vec<C<T>>, DiracError> {
        if phi.len() != self.dim() {
            return Err(DiracError::Length {
                expected: self.dim(),
                got: phi.len(),
            });
        }
        let k = self.k();
        let mut out = vec![Complex::zero(); phi.len()];
        for (x, hops) in self.hops.iter().enumerate() {
            let y = &mut out[x * k..(x + 1) * k];
            self.diag.mat_vec_acc(&phi[x * k..(x + 1) * k], y);
            for h in hops {
                h.block.mat_vec_acc(&phi[h.to * k..(h.to + 1) * k], y);
            }
        }
        Ok(out)
    }

    /// Dense materialization.
    pub fn to_dense(&self) -> CMatrix<T> {
        let k = self.k();
        let mut m = CMatrix::zeros(self.dim());
        for (x, hops) in self.hops.iter().enumerate() {
            for a in 0..k {
                for b in 0..k {
                    m[(x * k + a, x * k + b)] = m[(x * k + a, x * k + b)] + self.diag[(a, b)];
                }
            }
            for h in hops {
                for a in 0..k {
                    for b in 0..k {
                        let e = &mut m[(x * k + a, h.to * k + b)];
                        *e = *e + h.block[(a, b)];
                    }
                }
            }
        }
        m
    }

    /// Largest number of structurally nonzero entries in any row.
    pub fn max_row_nonzeros(&self) -> usize {
        let dense = self.to_dense();
        (0..dense.dim())
            .map(|i| dense.row(i).iter().filter(|z| !z.is_zero()).count())
            .max()
            .unwrap_or(0)
    }
}

/// Maximal entrywise deviation between `τ^ℓ D_U τ^{−ℓ}` and `D_{T^ℓ U}` for the
/// periodic operator on the full torus, where `[τ^ℓ φ](x) = φ(x − ℓ)`.
pub fn covariance_check<T: Real>(cfg: &GaugeConfig<T>, shift: &[i64], params: DiracParams) -> Result<T, DiracError> {
    let torus = cfg.torus();
    let sites = SiteSet::from_box(torus);
    let d_u = assemble(cfg, &sites, Boundary::Periodic, params)?.to_dense();
    let translated = cfg.translated(shift);
    let d_t = assemble(&translated, &sites, Boundary::Periodic, params)?.to_dense();
    let k = d_u.dim() / torus.volume();
    let perm: Vec<usize> = torus
        .sites()
        .map(|x| {
            let src: Vec<i64> = x.iter().zip(shift).map(|(a, b)| a - b).collect();
            torus.wrapped_rank(&src)
        })
        .collect();
    let index = |i: usize| perm[i / k] * k + i % k;
    let n = d_u.dim();
    let mut worst = T::zero();
    for i in 0..n {
        let pi = index(i);
        for j in 0..n {
            worst = worst.max((d_t[(i, j)] - d_u[(pi, index(j))]).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::chain_rng;
    use crate::lattice::LatticeGeometry;

    fn cfg(kind: GroupKind, side: usize, seed: u64) -> GaugeConfig<f64> {
        GaugeConfig::haar(LatticeGeometry::torus(2, side).unwrap(), kind, &mut chain_rng(seed, 9))
    }

    #[test]
    fn clifford_relations() {
        for d in [2, 4] {
            let g = GammaSet::<f64>::new(d).unwrap();
            assert!(g.clifford_defect() < 1e-14, "d={d}");
        }
        let g4 = GammaSet::<f64>::new(4).unwrap();
        let diag = CMatrix::from_diagonal(&[1.0, 1.0, -1.0, -1.0].map(|v| Complex::new(v, 0.0)));
        assert_eq!(g4.gamma5().max_abs_diff(&diag), 0.0);
        let g2 = GammaSet::<f64>::new(2).unwrap();
        let lhs = g2.gamma(0) * g2.gamma(1);
        assert!(lhs.max_abs_diff(&g2.gamma5().scale(Complex::i())) < 1e-15);
        assert_eq!(
            GammaSet::<f64>::new(3).unwrap_err(),
            DiracError::UnsupportedDimension(3)
        );
        assert!(GammaSet::<f32>::new(4).unwrap().clifford_defect() < 1e-6);
    }

    #[test]
    fn hermitian_for_both_boundaries() {
        for kind in [GroupKind::U1, GroupKind::SU2, GroupKind::SU3] {
            let c = cfg(kind, 4, 1);
            let torus = SiteSet::from_box(c.torus());
            let sub = SiteSet::from_box(&LatticeGeometry::new(vec![3, 2], vec![1, 1]).unwrap());
            for (set, bc) in [
                (&torus, Boundary::Periodic),
                (&torus, Boundary::Dirichlet),
                (&sub, Boundary::Periodic),
                (&sub, Boundary::Dirichlet),
            ] {
                let op = assemble(&c, set, bc, DiracParams::default()).unwrap();
                assert!(op.to_dense().hermiticity_defect() < 1e-12, "{kind} {bc}");
                assert!(op.max_row_nonzeros() <= op.k() * 5);
            }
        }
    }

    #[test]
    fn apply_matches_dense_and_is_linear() {
        let c = cfg(GroupKind::SU2, 4, 2);
        let op = assemble(
            &c,
            &SiteSet::from_box(c.torus()),
            Boundary::Periodic,
            DiracParams::default(),
        )
        .unwrap();
        let dense = op.to_dense();
        let mut rng = chain_rng(4, 1);
        use rand::Rng;
        let mut vec = || -> Vec<C<f64>> {
            (0..op.dim())
                .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        };
        let (phi, psi) = (vec(), vec());
        let got = op.apply(&phi).unwrap();
        let want = dense.mat_vec(&phi);
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
        assert!(op
            .apply(&vec![Complex::zero(); op.dim()])
            .unwrap()
            .iter()
            .all(|z| z.is_zero()));
        let (a, b) = (Complex::new(0.3, -1.2), Complex::new(-2.0, 0.5));
        let mix: Vec<_> = phi.iter().zip(&psi).map(|(p, q)| a * p + b * q).collect();
        let lhs = op.apply(&mix).unwrap();
        let rhs: Vec<_> = got
            .iter()
            .zip(op.apply(&psi).unwrap())
            .map(|(p, q)| a * p + b * q)
            .collect();
        assert!(lhs.iter().zip(&rhs).all(|(x, y)| (x - y).norm() < 1e-12));
        assert!(matches!(op.apply(&phi[1..]), Err(DiracError::Length { .. })));
    }

    #[test]
    fn covariance_under_translation() {
        let c = cfg(GroupKind::SU2, 4, 3);
        assert_eq!(covariance_check(&c, &[0, 0], DiracParams::default()).unwrap(), 0.0);
        for shift in [[1, 0], [0, 1], [-3, 2]] {
            assert!(covariance_check(&c, &shift, DiracParams::default()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn dirichlet_rows_are_local() {
        let c = cfg(GroupKind::U1, 8, 5);
        let small = LatticeGeometry::new(vec![4, 4], vec![2, 2]).unwrap();
        let big = LatticeGeometry::new(vec![6, 6], vec![1, 1]).unwrap();
        let (ss, bs) = (SiteSet::from_box(&small), SiteSet::from_box(&big));
        let a = assemble(&c, &ss, Boundary::Dirichlet, DiracParams::default())
            .unwrap()
            .to_dense();
        let b = assemble(&c, &bs, Boundary::Dirichlet, DiracParams::default())
            .unwrap()
            .to_dense();
        let k = 2;
        for x in small.sites().filter(|x| x.iter().all(|&v| (3..=4).contains(&v))) {
            let (i, j) = (ss.rank(&x).unwrap(), bs.rank(&x).unwrap());
            for y in small.sites() {
                let (p, q) = (ss.rank(&y).unwrap(), bs.rank(&y).unwrap());
                for a_ in 0..k {
                    for b_ in 0..k {
                        assert_eq!(a[(i * k + a_, p * k + b_)], b[(j * k + a_, q * k + b_)]);
                    }
                }
            }
        }
    }

    #[test]
    fn fault_injection_breaks_hermiticity() {
        let c = cfg(GroupKind::U1, 4, 6);
        let params = DiracParams {
            flip_forward_hops: true,
            ..DiracParams::default()
        };
        let op = assemble(&c, &SiteSet::from_box(c.torus()), Boundary::Periodic, params).unwrap();
        assert!(op.to_dense().hermiticity_defect() > 0.1);
    }

    #[test]
    fn invalid_inputs() {
        let c = cfg(GroupKind::U1, 4, 7);
        let set = SiteSet::from_box(c.torus());
        for p in [
            DiracParams::new(0.0, 1.0),
            DiracParams::new(0.1, 0.0),
            DiracParams::new(0.1, 1.5),
        ] {
            assert!(matches!(
                assemble(&c, &set, Boundary::Periodic, p),
                Err(DiracError::Params(_))
            ));
        }
        let too_big = SiteSet::from_box(&LatticeGeometry::torus(2, 5).unwrap());
        assert!(matches!(
            assemble(&c, &too_big, Boundary::Dirichlet, DiracParams::default()),
            Err(DiracError::Geometry(_))
        ));
        let scattered = SiteSet::from_sites(2, [vec![0, 0], vec![2, 2]]).unwrap();
        assert!(assemble(&c, &scattered, Boundary::Periodic, DiracParams::default()).is_err());
        assert_eq!("Periodic".parse::<Boundary>().unwrap(), Boundary::Periodic);
    }
}
