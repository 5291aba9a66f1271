//! Gauge-field configurations on a periodic torus, the Wilson plaquette
//! action, Metropolis sampling of the finite-volume Gibbs measure, the WGF1
//! file format and empirical correlation diagnostics.

mod correlation;
mod sampler;
mod wgf;

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::group::{haar_sample, GroupElement, GroupError, GroupKind};
use crate::lattice::{LatticeError, LatticeGeometry, Plaquette};
use crate::linalg::CMatrix;
use crate::num::Real;

pub use correlation::{correlation_decay, CesaroPoint, CorrelationRow, CorrelationTable, MIN_SAMPLES};
pub use sampler::{chain_rng, metropolis_sweep, sample_configurations, Chain, SamplerPlan, DEFAULT_SPREAD};
pub use wgf::{read_wgf, write_wgf, WgfError, WGF_MAGIC};

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("configuration mismatch: {0}")]
    Mismatch(String),
    #[error("invalid sampler plan: {0}")]
    Plan(String),
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("separation {linf} exceeds side/3 of the torus (side {side})")]
    SeparationTooLarge { linf: usize, side: usize },
}

/// Provenance of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigMeta {
    pub beta: f64,
    pub seed: u64,
    pub sweeps_done: u64,
}

impl Default for ConfigMeta {
    fn default() -> Self {
        Self {
            beta: 0.0,
            seed: 0,
            sweeps_done: 0,
        }
    }
}

/// Nearest-neighbour tables of a torus, indexed by `site·d + mu`.
#[derive(Debug, PartialEq)]
struct Neighbors {
    fwd: Vec<usize>,
    bwd: Vec<usize>,
}

impl Neighbors {
    fn new(torus: &LatticeGeometry) -> Self {
        let d = torus.d();
        let v = torus.volume();
        let mut fwd = vec![0; v * d];
        let mut bwd = vec![0; v * d];
        for (r, x) in torus.sites().enumerate() {
            for mu in 0..d {
                let mut y = x.clone();
                y[mu] += 1;
                fwd[r * d + mu] = torus.wrapped_rank(&y);
                y[mu] -= 2;
                bwd[r * d + mu] = torus.wrapped_rank(&y);
            }
        }
        Self { fwd, bwd }
    }
}

/// One group element per positively oriented bond of a periodic torus.
///
/// Bond `(x, μ)` is stored at index `rank(x)·d + μ`. The reversed bond
/// `(x, −μ)` resolves to `U_{x−ê_μ, μ}⁻¹` at access time.
#[derive(Debug, Clone)]
pub struct GaugeConfig<T> {
    torus: LatticeGeometry,
    kind: GroupKind,
    links: Vec<GroupElement<T>>,
    meta: ConfigMeta,
    nbr: Arc<Neighbors>,
}

/// Sum that depends only on the multiset of terms, so re-indexed lattices
/// (translates) give bit-identical totals.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

impl<T: Real> PartialEq for GaugeConfig<T> {
    fn eq(&self, other: &Self) -> bool {
        self.torus == other.torus && self.kind == other.kind && self.links == other.links && self.meta == other.meta
    }
}

impl<T: Real> GaugeConfig<T> {
    /// The free field `U ≡ 1`.
    pub fn identity(torus: LatticeGeometry, kind: GroupKind) -> Self {
        let n = torus.volume() * torus.d();
        let links = vec![GroupElement::identity(kind.n); n];
        Self::assemble(torus, kind, links, ConfigMeta::default())
    }

    /// Independent Haar-distributed links (the exact `β = 0` measure).
    pub fn haar<R: Rng + ?Sized>(torus: LatticeGeometry, kind: GroupKind, rng: &mut R) -> Self {
        let n = torus.volume() * torus.d();
        let links = (0..n).map(|_| haar_sample(kind, rng)).collect();
        Self::assemble(torus, kind, links, ConfigMeta::default())
    }

    pub fn from_links(
        torus: LatticeGeometry,
        kind: GroupKind,
        links: Vec<GroupElement<T>>,
        meta: ConfigMeta,
    ) -> Result<Self, GibbsError> {
        let want = torus.volume() * torus.d();
        if links.len() != want {
            return Err(GibbsError::Mismatch(format!(
                "expected {want} links, got {}",
                links.len()
            )));
        }
        if let Some(bad) = links.iter().find(|u| u.dim() != kind.n) {
            return Err(GroupError::DimensionMismatch {
                left: kind.n,
                right: bad.dim(),
            }
            .into());
        }
        Ok(Self::assemble(torus, kind, links, meta))
    }

    fn assemble(torus: LatticeGeometry, kind: GroupKind, links: Vec<GroupElement<T>>, meta: ConfigMeta) -> Self {
        let nbr = Arc::new(Neighbors::new(&torus));
        Self {
            torus,
            kind,
            links,
            meta,
            nbr,
        }
    }

    #[inline]
    pub fn torus(&self) -> &LatticeGeometry {
        &self.torus
    }

    #[inline]
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.torus.d()
    }

    #[inline]
    pub fn meta(&self) -> &ConfigMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut ConfigMeta {
        &mut self.meta
    }

    /// Links in bond enumeration order.
    pub fn links(&self) -> &[GroupElement<T>] {
        &self.links
    }

    #[inline]
    pub(crate) fn link_at_index(&self, i: usize) -> &GroupElement<T> {
        &self.links[i]
    }

    #[inline]
    pub(crate) fn set_link_at_index(&mut self, i: usize, u: GroupElement<T>) {
        self.links[i] = u;
    }

    #[inline]
    pub fn forward_site(&self, site: usize, mu: usize) -> usize {
        self.nbr.fwd[site * self.d() + mu]
    }

    #[inline]
    pub fn backward_site(&self, site: usize, mu: usize) -> usize {
        self.nbr.bwd[site * self.d() + mu]
    }

    /// `U_{x,μ}` with `x` reduced periodically onto the torus.
    pub fn link(&self, x: &[i64], mu: usize) -> &GroupElement<T> {
        &self.links[self.torus.wrapped_rank(x) * self.d() + mu]
    }

    /// `U_{x,+μ} = U_{x,μ}` or `U_{x,−μ} = U_{x−ê_μ,μ}⁻¹`.
    pub fn link_signed(&self, x: &[i64], mu: usize, forward: bool) -> GroupElement<T> {
        if forward {
            self.link(x, mu).clone()
        } else {
            let mut y = x.to_vec();
            y[mu] -= 1;
            self.link(&y, mu).inverse()
        }
    }

    pub fn set_link(&mut self, x: &[i64], mu: usize, u: GroupElement<T>) {
        let i = self.torus.wrapped_rank(x) * self.d() + mu;
        self.links[i] = u;
    }

    /// `U_p = U_{x,ν}⁻¹ · U_{x+ê_ν,μ}⁻¹ · U_{x+ê_μ,ν} · U_{x,μ}` for `p = p(x; μ, ν)`.
    pub fn plaquette_product(&self, p: &Plaquette) -> Result<GroupElement<T>, GibbsError> {
        if p.x.len() != self.d() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.d(),
                got: p.x.len(),
            }
            .into());
        }
        let [b_mu, b_nu_at_mu, b_mu_at_nu, b_nu] = p.bonds();
        let a = self.link(&b_nu.x, p.nu).inverse();
        let b = self.link(&b_mu_at_nu.x, p.mu).inverse();
        let c = self.link(&b_nu_at_mu.x, p.nu);
        let e = self.link(&b_mu.x, p.mu);
        Ok(&(&(&a * &b) * c) * e)
    }

    /// `U_p` for `p(x; μ, ν)` with `x` given by rank.
    pub fn plaquette_at(&self, site: usize, mu: usize, nu: usize) -> GroupElement<T> {
        let d = self.d();
        let x_mu = self.forward_site(site, mu);
        let x_nu = self.forward_site(site, nu);
        let a = self.links[site * d + nu].inverse();
        let b = self.links[x_nu * d + mu].inverse();
        &(&(&a * &b) * &self.links[x_mu * d + nu]) * &self.links[site * d + mu]
    }

    /// `Re Tr U_p` for `p(x; μ, ν)` with `x` given by rank.
    pub fn plaquette_trace_re(&self, site: usize, mu: usize, nu: usize) -> T {
        let d = self.d();
        let x_mu = self.forward_site(site, mu);
        let x_nu = self.forward_site(site, nu);
        let u1 = self.links[x_mu * d + nu].matrix();
        let u2 = self.links[x_nu * d + mu].matrix().adjoint();
        let u3 = self.links[site * d + nu].matrix().adjoint();
        let u0 = self.links[site * d + mu].matrix();
        // Re Tr(A B C E) = Re Tr((C E)(A B))
        let right = u1 * u0;
        let left = &u3 * &u2;
        right.trace_re_of_product(&left)
    }

    /// `S(U) = β Σ_{p} Re Tr(1 − U_p)` over the `|Λ|·d(d−1)/2` positively
    /// oriented plaquettes of the torus.
    pub fn wilson_action(&self, beta: f64) -> f64 {
        let n = self.kind.n as f64;
        beta * ordered_sum(self.plaquette_traces().into_iter().map(|t| n - t).collect())
    }

    /// Mean of `Re Tr U_p / N` over positively oriented plaquettes.
    pub fn plaquette_mean(&self) -> f64 {
        let traces = self.plaquette_traces();
        let count = traces.len() as f64;
        ordered_sum(traces) / (count * self.kind.n as f64)
    }

    fn plaquette_traces(&self) -> Vec<f64> {
        let d = self.d();
        let mut out = Vec::with_capacity(self.torus.volume() * d * (d - 1) / 2);
        for site in 0..self.torus.volume() {
            for mu in 0..d {
                for nu in mu + 1..d {
                    out.push(self.plaquette_trace_re(site, mu, nu).as_f64());
                }
            }
        }
        out
    }

    /// Sum of staples `A` such that the `2(d−1)` plaquettes containing bond
    /// `(x, μ)` contribute `Re Tr(U_{x,μ} · A)` to `Σ_p Re Tr U_p`.
    pub fn staple(&self, site: usize, mu: usize) -> CMatrix<T> {
        let d = self.d();
        let n = self.kind.n;
        let mut acc = CMatrix::zeros(n);
        let x_mu = self.forward_site(site, mu);
        for nu in (0..d).filter(|&nu| nu != mu) {
            // p(x; μ, ν): U_{x,ν}⁻¹ U_{x+ν,μ}⁻¹ U_{x+μ,ν}
            let x_nu = self.forward_site(site, nu);
            let up = &(&self.links[site * d + nu].matrix().adjoint() * &self.links[x_nu * d + mu].matrix().adjoint())
                * self.links[x_mu * d + nu].matrix();
            // p(x−ν; μ, ν): U_{x−ν,ν} U_{x−ν,μ}⁻¹ U_{x−ν+μ,ν}⁻¹
            let y = self.backward_site(site, nu);
            let y_mu = self.forward_site(y, mu);
            let down = &(self.links[y * d + nu].matrix() * &self.links[y * d + mu].matrix().adjoint())
                * &self.links[y_mu * d + nu].matrix().adjoint();
            acc = &(&acc + &up) + &down;
        }
        acc
    }

    /// `Σ_{p ∋ (x,μ)} Re Tr(1 − U_p)` with `U_{x,μ}` replaced by `candidate`.
    pub fn local_action(&self, site: usize, mu: usize, candidate: &GroupElement<T>) -> T {
        let count = T::of((2 * (self.d() - 1) * self.kind.n) as f64);
        count - candidate.matrix().trace_re_of_product(&self.staple(site, mu))
    }

    /// `(T^ℓ U)_{x,μ} = U_{x−ℓ,μ}` with periodic wrapping.
    pub fn translated(&self, shift: &[i64]) -> Self {
        let d = self.d();
        let mut links = Vec::with_capacity(self.links.len());
        for x in self.torus.sites() {
            let src: Vec<i64> = x.iter().zip(shift).map(|(a, b)| a - b).collect();
            let r = self.torus.wrapped_rank(&src);
            for mu in 0..d {
                links.push(self.links[r * d + mu].clone());
            }
        }
        Self {
            torus: self.torus.clone(),
            kind: self.kind,
            links,
            meta: self.meta,
            nbr: Arc::clone(&self.nbr),
        }
    }

    /// `U'_{x,μ} = g_x · U_{x,μ} · g_{x+ê_μ}⁻¹` for site-local `g` in rank order,
    /// the transformation under which the Dirac hopping term is covariant.
    pub fn gauge_transformed(&self, g: &[GroupElement<T>]) -> Result<Self, GibbsError> {
        if g.len() != self.torus.volume() {
            return Err(GibbsError::Mismatch(format!(
                "gauge transformation has {} sites, torus has {}",
                g.len(),
                self.torus.volume()
            )));
        }
        let d = self.d();
        let mut out = self.clone();
        for site in 0..self.torus.volume() {
            for mu in 0..d {
                let u = &(&g[site] * &self.links[site * d + mu]) * &g[self.forward_site(site, mu)].inverse();
                out.links[site * d + mu] = u;
            }
        }
        Ok(out)
    }

    pub fn cast<U: Real>(&self) -> GaugeConfig<U> {
        GaugeConfig {
            torus: self.torus.clone(),
            kind: self.kind,
            links: self.links.iter().map(|u| u.cast()).collect(),
            meta: self.meta,
            nbr: Arc::clone(&self.nbr),
        }
    }
}
