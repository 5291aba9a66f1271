use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use super::svg::{Plot, Series};
use crate::dirac::{assemble, covariance_check, Boundary, DiracParams, GammaSet};
use crate::experiment::{bc_difference, ids_curve, splitting_defect, ExperimentError, IdsCurve};
use crate::gibbs::{chain_rng, correlation_decay, read_wgf, write_wgf, Chain, GaugeConfig, GibbsError, WgfError};
use crate::lattice::{split_translations, CubeSequence, LatticeGeometry, SiteSet};
use crate::spectra::{random_hermitian, random_low_rank, rank_bound_check};
use crate::CMatrixF64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Random stream used by `verify` for its randomized matrix suite.
const VERIFY_STREAM: u64 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Wgf { path: PathBuf, source: WgfError },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
    #[error("{0}")]
    Mismatch(String),
    #[error("no checks selected")]
    NoChecks,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// At least one theorem-bound row failed.
    Violation,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn header(cfg: &RunConfig, extra: &str) -> String {
    let extra = if extra.is_empty() {
        String::new()
    } else {
        format!(" {extra}")
    };
    format!("# lattice-ids {VERSION} {}{extra}\n", cfg.canonical())
}

fn warn_if_above_threshold(cfg: &RunConfig) -> Result<(), CliError> {
    let threshold = cfg.dobrushin_threshold()?;
    if cfg.beta >= threshold {
        eprintln!(
            "warning: beta above Dobrushin threshold 1/(12·N·(d−1)) = {threshold} (beta = {})",
            cfg.beta
        );
    }
    Ok(())
}

/// Writes one WGF1 file per emitted sample, named `{tag}-{seed}-{index}.wgf`.
pub fn cmd_sample(cfg: &RunConfig, out: &Path) -> Result<(Outcome, Vec<PathBuf>), CliError> {
    warn_if_above_threshold(cfg)?;
    ensure_dir(out)?;
    let kind = cfg.kind()?;
    let torus = LatticeGeometry::torus(cfg.d, cfg.torus_side()).map_err(ExperimentError::from)?;
    let samples = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            Ok((
                seed,
                Chain::<f64>::new(cfg.sampler_plan(seed), torus.clone(), kind)?.collect(),
            ))
        })
        .collect::<Result<Vec<_>, GibbsError>>()?;
    let mut written = Vec::new();
    for (seed, configs) in samples {
        for (index, c) in configs.iter().enumerate() {
            let path = out.join(format!("{}-{seed}-{index}.wgf", cfg.tag));
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            write_wgf(c, BufWriter::new(file)).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok((Outcome::Pass, written))
}

fn load_configs(cfg: &RunConfig, files: &[PathBuf], free_field: bool) -> Result<Vec<GaugeConfig<f64>>, CliError> {
    let kind = cfg.kind()?;
    if !files.is_empty() {
        let need = (cfg.l0 as usize) << cfg.n_max;
        return files
            .iter()
            .map(|path| {
                let file = fs::File::open(path).map_err(io_err(path))?;
                let c: GaugeConfig<f64> = read_wgf(std::io::BufReader::new(file)).map_err(|source| CliError::Wgf {
                    path: path.clone(),
                    source,
                })?;
                if c.d() != cfg.d || c.kind() != kind {
                    return Err(CliError::Mismatch(format!(
                        "{}: file has d = {}, group {}; config has d = {}, group {kind}",
                        path.display(),
                        c.d(),
                        c.kind(),
                        cfg.d
                    )));
                }
                if c.torus().sides().iter().any(|&s| s < need) {
                    return Err(CliError::Mismatch(format!(
                        "{}: torus {:?} cannot hold the level-{} cube of side {need}",
                        path.display(),
                        c.torus().sides(),
                        cfg.n_max
                    )));
                }
                Ok(c)
            })
            .collect();
    }
    let plan = cfg.convergence_plan(free_field)?;
    Ok(cfg
        .seeds
        .par_iter()
        .map(|&seed| plan.configuration::<f64>(seed))
        .collect::<Result<Vec<_>, _>>()?)
}

/// IDS curves for every configuration, level and boundary condition.
pub fn cmd_ids(cfg: &RunConfig, out: &Path, files: &[PathBuf], free_field: bool) -> Result<Outcome, CliError> {
    if files.is_empty() && !free_field {
        warn_if_above_threshold(cfg)?;
    }
    ensure_dir(out)?;
    let configs = load_configs(cfg, files, free_field)?;
    let seq = CubeSequence::new(cfg.l0, cfg.d).map_err(ExperimentError::from)?;
    let bcs = cfg.boundaries()?;
    let grid = cfg.grid();
    let params = cfg.params();
    let jobs: Vec<(usize, i64, Boundary)> = (0..configs.len())
        .flat_map(|c| {
            let bcs = &bcs;
            (1..=cfg.n_max).flat_map(move |n| bcs.iter().map(move |&bc| (c, n, bc)))
        })
        .collect();
    let curves = jobs
        .par_iter()
        .map(|&(c, n, bc)| {
            let cube = seq.level(n).map_err(ExperimentError::from)?;
            let sites = SiteSet::from_box(&cube);
            let dim =
                sites.len() * GammaSet::<f64>::new(cfg.d).map_err(ExperimentError::from)?.spinor_dim() * cfg.kind()?.n;
            if dim > cfg.max_dim {
                return Err(ExperimentError::TooLarge { dim, cap: cfg.max_dim }.into());
            }
            Ok(ids_curve(&configs[c], &sites, bc, params, &grid)?)
        })
        .collect::<Result<Vec<IdsCurve>, CliError>>()?;

    let kind = cfg.kind()?;
    let mut csv = header(
        cfg,
        if free_field && files.is_empty() {
            "free_field=true"
        } else {
            ""
        },
    );
    csv.push_str("seed,beta,group,l0,n,side,volume,bc,E,count,ids\n");
    let mut monotone = true;
    for (&(c, n, bc), curve) in jobs.iter().zip(&curves) {
        let meta = configs[c].meta();
        let beta = if free_field && files.is_empty() { 0.0 } else { meta.beta };
        monotone &= curve.is_monotone();
        for i in 0..curve.energies.len() {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                meta.seed,
                beta,
                kind,
                cfg.l0,
                n,
                seq.side(n),
                curve.volume,
                bc,
                curve.energies[i],
                curve.counts[i],
                curve.ids[i]
            ));
        }
    }
    write_file(&out.join("ids.csv"), &csv)?;

    let series: Vec<Series> = jobs
        .iter()
        .zip(&curves)
        .filter(|((c, _, _), _)| *c == 0)
        .map(|(&(_, n, bc), curve)| Series {
            label: format!("n={n} {bc}"),
            points: curve.energies.iter().copied().zip(curve.ids.iter().copied()).collect(),
            errors: None,
            color: (n - 1) as usize,
            dashed: bc == Boundary::Periodic,
        })
        .collect();
    let title = format!(
        "Integrated density of states, {kind}, d={}, seed {}",
        cfg.d,
        configs[0].meta().seed
    );
    let plot = Plot {
        title: &title,
        x_label: "E",
        y_label: "N(E)/|Λ|",
        log_y: false,
    };
    write_file(&out.join("ids.svg"), &plot.render(&series))?;
    Ok(if monotone { Outcome::Pass } else { Outcome::Violation })
}

struct Row {
    check: &'static str,
    instance: String,
    measured: f64,
    bound: f64,
    pass: bool,
}

impl Row {
    fn le(check: &'static str, instance: String, measured: f64, bound: f64) -> Self {
        Self {
            check,
            instance,
            measured,
            bound,
            pass: measured <= bound,
        }
    }

    fn failed(check: &'static str, instance: String, bound: f64) -> Self {
        Self {
            check,
            instance,
            measured: f64::NAN,
            bound,
            pass: false,
        }
    }
}

/// Runs the selected theorem and consistency checks and writes `verify.csv`.
pub fn cmd_verify(cfg: &RunConfig, out: &Path, self_test: bool) -> Result<Outcome, CliError> {
    let checks: Vec<&str> = cfg.verify.checks.iter().map(|s| s.as_str()).collect();
    if checks.is_empty() {
        return Err(CliError::NoChecks);
    }
    ensure_dir(out)?;
    let params = DiracParams {
        flip_forward_hops: self_test,
        ..cfg.params()
    };
    let grid = cfg.grid();
    let seq = CubeSequence::new(cfg.l0, cfg.d).map_err(ExperimentError::from)?;
    let needs_configs = checks
        .iter()
        .any(|c| matches!(*c, "hermiticity" | "covariance" | "splitting" | "bc"));
    // Small tori keep the dense covariance comparison cheap.
    let configs: Vec<GaugeConfig<f64>> = if needs_configs {
        let torus = LatticeGeometry::torus(cfg.d, 4 * cfg.l0 as usize).map_err(ExperimentError::from)?;
        let kind = cfg.kind()?;
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let mut plan = cfg.sampler_plan(seed);
                plan.n_samples = 1;
                Ok(Chain::<f64>::new(plan, torus.clone(), kind)?.collect().remove(0))
            })
            .collect::<Result<_, GibbsError>>()?
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    for check in &checks {
        match *check {
            "clifford" => {
                for d in [2, 4] {
                    let defect = GammaSet::<f64>::new(d)
                        .map_err(ExperimentError::from)?
                        .clifford_defect();
                    rows.push(Row::le("clifford", format!("d={d}"), defect, 1e-14));
                }
            }
            "hermiticity" => {
                for c in &configs {
                    for bc in [Boundary::Dirichlet, Boundary::Periodic] {
                        let sites = SiteSet::from_box(c.torus());
                        let op = assemble(c, &sites, bc, params).map_err(ExperimentError::from)?;
                        let instance = format!("seed={} torus={} bc={bc}", c.meta().seed, c.torus().sides()[0]);
                        rows.push(Row::le(
                            "hermiticity",
                            instance,
                            op.to_dense().hermiticity_defect(),
                            1e-12,
                        ));
                    }
                }
            }
            "covariance" => {
                for c in &configs {
                    let mut shifts = vec![vec![0i64; cfg.d]; 2];
                    shifts[0][0] = 1;
                    for (mu, s) in shifts[1].iter_mut().enumerate() {
                        *s = (c.meta().seed as i64 + mu as i64) % 3 - 1;
                    }
                    for shift in shifts {
                        let dev = covariance_check(c, &shift, params).map_err(ExperimentError::from)?;
                        rows.push(Row::le(
                            "covariance",
                            format!(
                                "seed={} shift={}",
                                c.meta().seed,
                                shift.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
                            ),
                            dev,
                            1e-12,
                        ));
                    }
                }
            }
            "rank" => {
                let mut rng = chain_rng(cfg.seeds[0], VERIFY_STREAM);
                for i in 0..cfg.verify.rank_pairs {
                    let rank = 1 + i % 3;
                    let norm = 10f64.powi((i % 7) as i32);
                    let a: CMatrixF64 = random_hermitian(64, &mut rng);
                    let b: CMatrixF64 = random_low_rank(64, rank, norm, &mut rng);
                    let instance = format!("pair={i} rank={rank} norm={norm:e}");
                    rows.push(match rank_bound_check(&a, &b) {
                        Ok(r) => Row::le("rank", instance, r.difference() as f64, r.rank_b as f64),
                        Err(e) => {
                            log::warn!("{instance}: {e}");
                            Row::failed("rank", instance, rank as f64)
                        }
                    });
                }
                let a = CMatrixF64::identity(64).scale_re(-1.0);
                let b = CMatrixF64::identity(64).scale_re(2.0);
                let r = rank_bound_check(&a, &b).map_err(ExperimentError::from)?;
                let mut row = Row::le("rank", "tight -1+2".into(), r.difference() as f64, r.rank_b as f64);
                row.pass &= r.difference() == r.rank_b;
                rows.push(row);
            }
            "splitting" => {
                let cube = seq.level(2).map_err(ExperimentError::from)?;
                let parts: Vec<LatticeGeometry> = split_translations(1, cfg.l0, cfg.d)
                    .map_err(ExperimentError::from)?
                    .iter()
                    .map(|s| seq.level(1).map(|c| c.translated(s)))
                    .collect::<Result<_, _>>()
                    .map_err(ExperimentError::from)?;
                for c in &configs {
                    for bc in [Boundary::Dirichlet, Boundary::Periodic] {
                        let instance = format!("seed={} side={} bc={bc}", c.meta().seed, cube.sides()[0]);
                        rows.push(match splitting_defect(c, &parts, bc, params, &grid) {
                            Ok(r) => Row::le("splitting", instance, r.sup(), r.bound),
                            Err(ExperimentError::Spectra(_)) => Row::failed("splitting", instance, f64::NAN),
                            Err(e) => return Err(e.into()),
                        });
                    }
                }
            }
            "bc" => {
                for c in &configs {
                    for n in 1..=2 {
                        let cube = seq.level(n).map_err(ExperimentError::from)?;
                        let instance = format!("seed={} side={}", c.meta().seed, cube.sides()[0]);
                        rows.push(match bc_difference(c, &cube, params, &grid) {
                            Ok(r) => Row::le("bc", instance, r.sup(), r.bound),
                            Err(ExperimentError::Spectra(_)) => Row::failed("bc", instance, f64::NAN),
                            Err(e) => return Err(e.into()),
                        });
                    }
                }
            }
            _ => unreachable!("checks are validated with the config"),
        }
    }

    let mut csv = header(cfg, if self_test { "self_test=true" } else { "" });
    csv.push_str("check,instance,measured,bound,pass\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{:e},{:e},{}\n",
            r.check, r.instance, r.measured, r.bound, r.pass
        ));
    }
    write_file(&out.join("verify.csv"), &csv)?;
    Ok(if rows.iter().all(|r| r.pass) {
        Outcome::Pass
    } else {
        Outcome::Violation
    })
}

/// Plaquette covariance decay and Cesàro averages for the first seed.
pub fn cmd_correlations(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    warn_if_above_threshold(cfg)?;
    ensure_dir(out)?;
    let kind = cfg.kind()?;
    let side = cfg.correlations.side;
    let torus = LatticeGeometry::torus(cfg.d, side).map_err(ExperimentError::from)?;
    let need = crate::gibbs::MIN_SAMPLES;
    if cfg.sampler.n_samples < need {
        return Err(GibbsError::TooFewSamples {
            got: cfg.sampler.n_samples,
            need,
        }
        .into());
    }
    let samples = Chain::<f64>::new(cfg.sampler_plan(cfg.seeds[0]), torus, kind)?.collect();
    let separations: Vec<Vec<i64>> = (0..=cfg.correlations.max_ell as i64)
        .map(|l| {
            let mut v = vec![0; cfg.d];
            v[0] = l;
            v
        })
        .collect();
    let n = kind.n as f64;
    let table = correlation_decay(&samples, |u| u.trace_re() / n, &separations)?;

    let mut csv = header(cfg, "");
    csv.push_str("beta,ell,cov,stderr,cesaro_L,cesaro_value\n");
    for (row, ces) in table.rows.iter().zip(&table.cesaro) {
        csv.push_str(&format!(
            "{},{},{:e},{:e},{},{:e}\n",
            cfg.beta, row.linf, row.cov, row.stderr, ces.window, ces.value
        ));
    }
    write_file(&out.join("corr.csv"), &csv)?;

    let series = vec![Series {
        label: format!("|cov|, beta={}", cfg.beta),
        points: table.rows.iter().map(|r| (r.linf as f64, r.cov.abs())).collect(),
        errors: Some(table.rows.iter().map(|r| r.stderr).collect()),
        color: 0,
        dashed: false,
    }];
    let title = format!("Plaquette covariance, {kind}, d={}, torus {side}", cfg.d);
    let plot = Plot {
        title: &title,
        x_label: "‖ℓ‖∞",
        y_label: "|Cov|",
        log_y: true,
    };
    write_file(&out.join("corr.svg"), &plot.render(&series))?;
    Ok(Outcome::Pass)
}
