//! Run configuration: a TOML file with flat dotted keys such as
//! `sampler.n_therm = 100`. Every key has a default.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::dirac::{Boundary, DiracParams, GammaSet};
use crate::experiment::{default_grid, energy_grid, ConvergencePlan, DEFAULT_MAX_DIM, DEFAULT_TOLERANCE};
use crate::gibbs::{SamplerPlan, DEFAULT_SPREAD};
use crate::group::{Family, GroupKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config key `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

pub const ALL_CHECKS: [&str; 6] = ["clifford", "hermiticity", "covariance", "rank", "splitting", "bc"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupSection {
    pub family: String,
    pub n: usize,
}

impl Default for GroupSection {
    fn default() -> Self {
        Self {
            family: "U".into(),
            n: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub n_therm: usize,
    pub n_skip: usize,
    pub n_samples: usize,
    pub spread: f64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            n_therm: 100,
            n_skip: 10,
            n_samples: 1,
            spread: DEFAULT_SPREAD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub checks: Vec<String>,
    pub rank_pairs: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            checks: ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
            rank_pairs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationSection {
    pub side: usize,
    pub max_ell: usize,
}

impl Default for CorrelationSection {
    fn default() -> Self {
        Self { side: 12, max_ell: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub d: usize,
    pub group: GroupSection,
    pub beta: f64,
    pub kappa: f64,
    pub r: f64,
    pub l0: i64,
    pub n_max: i64,
    pub bc: Vec<String>,
    pub energy: Option<EnergySection>,
    pub sampler: SamplerSection,
    pub seeds: Vec<u64>,
    pub tolerance: f64,
    pub max_dim: usize,
    pub out: PathBuf,
    pub tag: String,
    pub verify: VerifySection,
    pub correlations: CorrelationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 2,
            group: GroupSection::default(),
            beta: 0.04,
            kappa: 0.12,
            r: 1.0,
            l0: 2,
            n_max: 3,
            bc: vec!["dirichlet".into(), "periodic".into()],
            energy: None,
            sampler: SamplerSection::default(),
            seeds: vec![1, 2],
            tolerance: DEFAULT_TOLERANCE,
            max_dim: DEFAULT_MAX_DIM,
            out: PathBuf::from("out"),
            tag: "cfg".into(),
            verify: VerifySection::default(),
            correlations: CorrelationSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn kind(&self) -> Result<GroupKind, ConfigError> {
        let family = match self.group.family.to_ascii_uppercase().as_str() {
            "U" => Family::U,
            "SU" => Family::SU,
            other => return Err(invalid("group.family", format!("expected U or SU, got `{other}`"))),
        };
        GroupKind::new(family, self.group.n).map_err(|e| invalid("group.n", e.to_string()))
    }

    pub fn boundaries(&self) -> Result<Vec<Boundary>, ConfigError> {
        self.bc
            .iter()
            .map(|s| s.parse::<Boundary>().map_err(|e| invalid("bc", e)))
            .collect()
    }

    pub fn params(&self) -> DiracParams {
        DiracParams::new(self.kappa, self.r)
    }

    pub fn grid(&self) -> Vec<f64> {
        match &self.energy {
            Some(e) => energy_grid(e.min, e.max, e.points),
            None => default_grid(self.d, &self.params()),
        }
    }

    pub fn sampler_plan(&self, seed: u64) -> SamplerPlan {
        SamplerPlan {
            beta: self.beta,
            n_therm: self.sampler.n_therm,
            n_skip: self.sampler.n_skip,
            n_samples: self.sampler.n_samples,
            spread: self.sampler.spread,
            seed,
        }
    }

    pub fn convergence_plan(&self, free_field: bool) -> Result<ConvergencePlan, ConfigError> {
        Ok(ConvergencePlan {
            d: self.d,
            kind: self.kind()?,
            sampler: self.sampler_plan(0),
            free_field,
            l0: self.l0,
            n_max: self.n_max,
            bcs: self.boundaries()?,
            params: self.params(),
            grid: self.grid(),
            seeds: self.seeds.clone(),
            max_dim: self.max_dim,
            tolerance: self.tolerance,
        })
    }

    /// Side of the sampled torus, `2·l0·2^{n_max}`.
    pub fn torus_side(&self) -> usize {
        (2 * self.l0 as usize) << self.n_max
    }

    pub fn dobrushin_threshold(&self) -> Result<f64, ConfigError> {
        Ok(self.kind()?.dobrushin_threshold(self.d))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let spinor = GammaSet::<f64>::new(self.d)
            .map_err(|e| invalid("d", e.to_string()))?
            .spinor_dim();
        let kind = self.kind()?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", "must be finite and >= 0"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa", "must be > 0"));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(invalid("r", "must lie in (0, 1]"));
        }
        if self.l0 < 1 {
            return Err(invalid("l0", "must be >= 1"));
        }
        if !(1..=12).contains(&self.n_max) {
            return Err(invalid("n_max", "must lie in 1..=12"));
        }
        if self.bc.is_empty() {
            return Err(invalid("bc", "at least one boundary condition is required"));
        }
        self.boundaries()?;
        if let Some(e) = &self.energy {
            if e.points == 0 {
                return Err(invalid("energy.points", "must be >= 1"));
            }
            if !(e.min.is_finite() && e.max.is_finite() && e.min <= e.max) {
                return Err(invalid("energy.min", "must be finite and <= energy.max"));
            }
        }
        if self.sampler.n_samples == 0 {
            return Err(invalid("sampler.n_samples", "must be >= 1"));
        }
        if !(self.sampler.spread > 0.0 && self.sampler.spread.is_finite()) {
            return Err(invalid("sampler.spread", "must be > 0"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(invalid("tolerance", "must be > 0"));
        }
        let top = (self.l0 as usize) << self.n_max;
        let dim = spinor * kind.n * top.pow(self.d as u32);
        if dim > self.max_dim {
            return Err(invalid(
                "max_dim",
                format!("largest cube needs dimension {dim}, above the cap {}", self.max_dim),
            ));
        }
        if self.tag.is_empty() || self.tag.contains(['/', '\\']) {
            return Err(invalid("tag", "must be a non-empty file-name fragment"));
        }
        if let Some(bad) = self.verify.checks.iter().find(|c| !ALL_CHECKS.contains(&c.as_str())) {
            return Err(invalid("verify.checks", format!("unknown check `{bad}`")));
        }
        if self.correlations.side < 2 {
            return Err(invalid("correlations.side", "must be >= 2"));
        }
        if 3 * self.correlations.max_ell > self.correlations.side {
            return Err(invalid("correlations.max_ell", "must not exceed correlations.side / 3"));
        }
        Ok(())
    }

    /// One-line canonical rendering of every setting.
    pub fn canonical(&self) -> String {
        let energy = match &self.energy {
            Some(e) => format!("energy.min={} energy.max={} energy.points={}", e.min, e.max, e.points),
            None => "energy=default".into(),
        };
        let list = |v: &[String]| v.join(",");
        format!(
            "d={} group.family={} group.n={} beta={} kappa={} r={} l0={} n_max={} bc={} {} \
             sampler.n_therm={} sampler.n_skip={} sampler.n_samples={} sampler.spread={} seeds={} \
             tolerance={} max_dim={} tag={} verify.checks={} verify.rank_pairs={} \
             correlations.side={} correlations.max_ell={}",
            self.d,
            self.group.family.to_ascii_uppercase(),
            self.group.n,
            self.beta,
            self.kappa,
            self.r,
            self.l0,
            self.n_max,
            list(&self.bc),
            energy,
            self.sampler.n_therm,
            self.sampler.n_skip,
            self.sampler.n_samples,
            self.sampler.spread,
            self.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
            self.tolerance,
            self.max_dim,
            self.tag,
            list(&self.verify.checks),
            self.verify.rank_pairs,
            self.correlations.side,
            self.correlations.max_ell,
        )
    }
}
