use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GaugeConfig, GibbsError};
use crate::group::{haar_sample, propose_near, GroupKind};
use crate::lattice::LatticeGeometry;
use crate::num::Real;

pub const DEFAULT_SPREAD: f64 = 0.4;

/// Stream of the per-seed random generator used for Markov chains.
pub const SAMPLING_STREAM: u64 = 0;

/// Counter-based stream split: `(seed, stream)` fully determines the sequence.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerPlan {
    pub beta: f64,
    pub n_therm: usize,
    pub n_skip: usize,
    pub n_samples: usize,
    pub spread: f64,
    pub seed: u64,
}

impl SamplerPlan {
    pub fn new(beta: f64, seed: u64) -> Self {
        Self {
            beta,
            n_therm: 100,
            n_skip: 10,
            n_samples: 1,
            spread: DEFAULT_SPREAD,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GibbsError> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(GibbsError::Plan(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if self.n_samples == 0 {
            return Err(GibbsError::Plan("n_samples must be >= 1".into()));
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return Err(GibbsError::Plan(format!("spread must be > 0, got {}", self.spread)));
        }
        Ok(())
    }
}

/// One Metropolis proposal per bond in enumeration order, accepted with
/// probability `min(1, exp(−β·ΔS_local))`. Returns the acceptance rate.
///
/// At `β = 0` the target is the product Haar measure and every link is
/// redrawn from it, so emitted configurations are exact independent samples.
pub fn metropolis_sweep<T: Real, R: Rng + ?Sized>(
    cfg: &mut GaugeConfig<T>,
    beta: f64,
    spread: f64,
    rng: &mut R,
) -> f64 {
    let kind = cfg.kind();
    let d = cfg.d();
    let volume = cfg.torus().volume();
    let spread = T::of(spread);
    let mut accepted = 0usize;
    for site in 0..volume {
        for mu in 0..d {
            let idx = site * d + mu;
            if beta == 0.0 {
                cfg.set_link_at_index(idx, haar_sample(kind, rng));
                accepted += 1;
                continue;
            }
            let current = cfg.link_at_index(idx);
            let proposal = propose_near(current, kind, spread, rng);
            let staple = cfg.staple(site, mu);
            let delta = beta
                * (current.matrix().trace_re_of_product(&staple) - proposal.matrix().trace_re_of_product(&staple))
                    .as_f64();
            if delta <= 0.0 || rng.random::<f64>() < (-delta).exp() {
                cfg.set_link_at_index(idx, proposal);
                accepted += 1;
            }
        }
    }
    cfg.meta_mut().sweeps_done += 1;
    accepted as f64 / (volume * d) as f64
}

/// A single Markov chain on a torus.
#[derive(Debug, Clone)]
pub struct Chain<T> {
    cfg: GaugeConfig<T>,
    rng: ChaCha8Rng,
    plan: SamplerPlan,
    acceptance: Vec<f64>,
}

impl<T: Real> Chain<T> {
    /// Starts from Haar-random links drawn from the chain's own stream.
    pub fn new(plan: SamplerPlan, torus: LatticeGeometry, kind: GroupKind) -> Result<Self, GibbsError> {
        plan.validate()?;
        let threshold = kind.dobrushin_threshold(torus.d());
        if plan.beta >= threshold {
            warn!(
                "beta {} above Dobrushin threshold 1/(12·N·(d−1)) = {threshold}",
                plan.beta
            );
        }
        let mut rng = chain_rng(plan.seed, SAMPLING_STREAM);
        let mut cfg = GaugeConfig::haar(torus, kind, &mut rng);
        let meta = cfg.meta_mut();
        meta.beta = plan.beta;
        meta.seed = plan.seed;
        Ok(Self {
            cfg,
            rng,
            plan,
            acceptance: Vec::new(),
        })
    }

    pub fn config(&self) -> &GaugeConfig<T> {
        &self.cfg
    }

    /// Acceptance rate of every sweep performed so far.
    pub fn acceptance(&self) -> &[f64] {
        &self.acceptance
    }

    pub fn sweep(&mut self) -> f64 {
        let rate = metropolis_sweep(&mut self.cfg, self.plan.beta, self.plan.spread, &mut self.rng);
        self.acceptance.push(rate);
        rate
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    /// Thermalizes, then emits `n_samples` snapshots separated by `n_skip` sweeps.
    pub fn collect(&mut self) -> Vec<GaugeConfig<T>> {
        self.run(self.plan.n_therm);
        let mut out = Vec::with_capacity(self.plan.n_samples);
        for i in 0..self.plan.n_samples {
            if i > 0 {
                self.run(self.plan.n_skip);
            }
            out.push(self.cfg.clone());
        }
        out
    }
}

/// Runs one chain for `plan` and returns its emitted configurations.
pub fn sample_configurations<T: Real>(
    plan: &SamplerPlan,
    torus: LatticeGeometry,
    kind: GroupKind,
) -> Result<Vec<GaugeConfig<T>>, GibbsError> {
    Ok(Chain::new(*plan, torus, kind)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;

    fn torus(d: usize, side: usize) -> LatticeGeometry {
        LatticeGeometry::torus(d, side).unwrap()
    }

    #[test]
    fn zero_beta_accepts_everything() {
        let mut rng = chain_rng(3, 0);
        let mut cfg = GaugeConfig::<f64>::haar(torus(2, 4), GroupKind::SU2, &mut rng);
        for _ in 0..3 {
            assert_eq!(metropolis_sweep(&mut cfg, 0.0, 0.4, &mut rng), 1.0);
        }
        assert_eq!(cfg.meta().sweeps_done, 3);
    }

    #[test]
    fn local_delta_matches_full_action_difference() {
        let mut rng = chain_rng(11, 0);
        for kind in [GroupKind::U1, GroupKind::SU2, GroupKind::SU3] {
            let mut cfg = GaugeConfig::<f64>::haar(torus(2, 4), kind, &mut rng);
            let beta = 0.7;
            for site in [0usize, 5, 15] {
                for mu in 0..2 {
                    let idx = site * 2 + mu;
                    let old = cfg.link_at_index(idx).clone();
                    let new: GroupElement<f64> = propose_near(&old, kind, 0.4, &mut rng);
                    let local = beta * (cfg.local_action(site, mu, &new) - cfg.local_action(site, mu, &old));
                    let before = cfg.wilson_action(beta);
                    cfg.set_link_at_index(idx, new);
                    let after = cfg.wilson_action(beta);
                    cfg.set_link_at_index(idx, old);
                    assert!(
                        (local - (after - before)).abs() < 1e-9,
                        "{kind}: {local} vs {}",
                        after - before
                    );
                }
            }
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let mut plan = SamplerPlan::new(0.03, 42);
        plan.n_therm = 3;
        plan.n_skip = 2;
        plan.n_samples = 3;
        let a = sample_configurations::<f64>(&plan, torus(2, 4), GroupKind::SU2).unwrap();
        let b = sample_configurations::<f64>(&plan, torus(2, 4), GroupKind::SU2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].meta().sweeps_done, 3);
        assert_eq!(a[2].meta().sweeps_done, 7);
        assert_eq!(a[1].meta().seed, 42);
        assert_eq!(a[1].meta().beta, 0.03);
        plan.seed = 43;
        let c = sample_configurations::<f64>(&plan, torus(2, 4), GroupKind::SU2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn links_stay_in_group_after_many_sweeps() {
        let mut plan = SamplerPlan::new(0.5, 1);
        plan.n_therm = 200;
        let cfgs = sample_configurations::<f64>(&plan, torus(2, 3), GroupKind::SU3).unwrap();
        for u in cfgs[0].links() {
            assert!(u.is_member(GroupKind::SU3, 1e-12));
        }
    }

    #[test]
    fn positive_beta_rejects_some() {
        let mut plan = SamplerPlan::new(2.0, 5);
        plan.n_therm = 20;
        let mut chain = Chain::<f64>::new(plan, torus(2, 6), GroupKind::U1).unwrap();
        chain.run(20);
        let mean = chain.acceptance().iter().sum::<f64>() / 20.0;
        assert!(mean < 0.99, "acceptance {mean}");
    }

    #[test]
    fn invalid_plans() {
        let mut plan = SamplerPlan::new(0.1, 0);
        plan.n_samples = 0;
        assert!(plan.validate().is_err());
        let plan = SamplerPlan::new(-1.0, 0);
        assert!(plan.validate().is_err());
    }
}
