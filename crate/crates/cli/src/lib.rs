//! Batch front-end for `lindblad-relax`.
//!
//! A run reads one JSON [`RunConfig`], executes a scenario and writes its
//! artifacts into the output directory:
//!
//! | file | columns |
//! |------|---------|
//! | `trajectories.csv` | `t, state_index, trace_err, min_eig, c1 .. c{d²−1}` |
//! | `convergence.csv` | `t, max_pair_dist, gronwall_envelope` |
//! | `schedule.csv` | `t, h, lambda_h, lambda_c` (Otto engine only) |
//! | `report.json` | certification report and run summary |
//!
//! `c1..` are the traceless coordinates in the generalized Gell-Mann basis,
//! `gronwall_envelope` is `exp(∫Λ)` from the first grid time. Identical
//! configuration and seed give byte-identical files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod output;

use std::path::{Path, PathBuf};

use lindblad_relax::certifier::{certify, commutant_dimension, is_self_adjoint_set, CertificationReport};
use lindblad_relax::generator::{GKLSGenerator, Liouvillian};
use lindblad_relax::operator::{trace_distance, ComplexMatrix, DensityMatrix};
use lindblad_relax::otto::OttoEngine;
use lindblad_relax::propagator::{
    gronwall_envelope_check, uniform_grid, ConvergenceSummary, Propagator, PropagatorOptions, TrajectoryRecord,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{Overrides, RunConfig, Scenario, Violation};

/// Failure of a run, mapped onto the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read configuration {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("numerical failure: {0}")]
    Numerical(#[from] lindblad_relax::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. } | Self::Parse(_) | Self::Invalid(_) => 2,
            Self::Numerical(lindblad_relax::Error::InvalidConfig(_)) => 2,
            Self::Numerical(_) => 3,
            Self::Write { .. } => 1,
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_json(&text).map_err(|e| RunError::Parse(e.to_string()))
}

/// Summary of an ensemble run.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub count: usize,
    pub seed: u64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub final_max_pair_dist: f64,
    pub decay_rate: Option<f64>,
    pub max_trace_err: f64,
    pub min_eigenvalue: f64,
    pub positivity_kept: bool,
    pub envelope_holds: bool,
    pub envelope_max_excess: Option<f64>,
    /// Largest trace distance of a final state to the trajectory started
    /// from `1/N`.
    pub distance_to_asymptotic: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutantReport {
    pub commutant_dim: usize,
    pub operator_count: usize,
    pub dim: usize,
    pub self_adjoint: bool,
    pub singular_values: Vec<f64>,
    /// Row-major `[re, im]` entries of a traceless commuting operator.
    pub witness: Option<Vec<Vec<[f64; 2]>>>,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    #[serde(flatten)]
    pub certification: Option<CertificationReport>,
    #[serde(flatten)]
    pub commutant: Option<CommutantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleReport>,
}

struct Source {
    gen: GKLSGenerator,
    period: Option<f64>,
    breakpoints: Vec<f64>,
    engine: Option<OttoEngine>,
}

fn source(cfg: &RunConfig, t_end: f64) -> Result<Source, RunError> {
    if let Some(g) = &cfg.generator {
        return Ok(Source {
            gen: g.build(),
            period: g.period,
            breakpoints: g.breakpoints(),
            engine: None,
        });
    }
    let c = cfg.otto_config().ok_or_else(|| {
        RunError::Invalid(vec![Violation {
            code: "generator.missing".into(),
            message: "no generator".into(),
        }])
    })?;
    let engine = OttoEngine::new(c)?;
    Ok(Source {
        gen: engine.generator().clone(),
        period: Some(engine.period()),
        breakpoints: engine.breakpoints(t_end),
        engine: Some(engine),
    })
}

fn certification(cfg: &RunConfig, src: &Source, grid: &[f64]) -> Result<CertificationReport, RunError> {
    let cert_grid = match src.period {
        Some(p) => {
            let start = grid[0].max(src.gen.markovian_from());
            let n = cfg.certify_samples.unwrap_or(config::DEFAULT_SAMPLES_PER_PERIOD);
            uniform_grid(start, start + p, n + 1)
        }
        None => grid.to_vec(),
    };
    Ok(certify(&src.gen, src.period, &cert_grid, &cfg.tolerances)?)
}

fn run_commutant(cfg: &RunConfig) -> Result<Report, RunError> {
    let mut ops: Vec<ComplexMatrix> = cfg
        .operators
        .iter()
        .map(|m| config::to_matrix(m).map_err(RunError::Parse))
        .collect::<Result<_, _>>()?;
    if cfg.include_adjoints {
        let adj: Vec<ComplexMatrix> = ops.iter().map(ComplexMatrix::adjoint).collect();
        ops.extend(adj);
    }
    let result = commutant_dimension(&ops, cfg.tolerances.sigma_cut)?;
    let witness = result.witness.as_ref().map(|w| {
        (0..w.dim())
            .map(|i| (0..w.dim()).map(|j| [w.get(i, j).re, w.get(i, j).im]).collect())
            .collect()
    });
    Ok(Report {
        scenario: cfg.scenario,
        certification: None,
        commutant: Some(CommutantReport {
            commutant_dim: result.dimension,
            operator_count: ops.len(),
            dim: ops[0].dim(),
            self_adjoint: is_self_adjoint_set(&ops, cfg.tolerances.comm).ok,
            singular_values: result.singular_values,
            witness,
        }),
        ensemble: None,
    })
}

struct Ensemble {
    records: Vec<TrajectoryRecord>,
    summary: ConvergenceSummary,
    report: EnsembleReport,
}

fn run_ensemble(cfg: &RunConfig, src: &Source, grid: &[f64]) -> Result<Ensemble, RunError> {
    let opts = PropagatorOptions {
        tol: cfg.integrator_tol,
        tolerances: cfg.tolerances,
        breakpoints: src.breakpoints.clone(),
        ..PropagatorOptions::default()
    };
    let prop = Propagator::new(&src.gen, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.ensemble.seed);
    let dim = src.gen.dim();
    let states: Vec<DensityMatrix> = (0..cfg.ensemble.count)
        .map(|_| DensityMatrix::random_hs(dim, &mut rng))
        .collect();
    let records = states
        .par_iter()
        .map(|s| prop.integrate(s, grid))
        .collect::<lindblad_relax::Result<Vec<_>>>()?;
    let summary = prop.summarize(&records)?;
    let envelope = (records.len() >= 2).then(|| gronwall_envelope_check(&records, &summary, cfg.tolerances.env));
    let star = prop.integrate(&DensityMatrix::maximally_mixed(dim), grid)?;
    let star_final = prop.density_matrix(star.final_state());
    let mut distance_to_asymptotic = 0.0f64;
    for r in &records {
        distance_to_asymptotic =
            distance_to_asymptotic.max(trace_distance(&prop.density_matrix(r.final_state()), &star_final)?);
    }
    let max_trace_err = records
        .iter()
        .flat_map(|r| r.trace_err.iter().copied())
        .fold(0.0, f64::max);
    let min_eigenvalue = records
        .iter()
        .flat_map(|r| r.min_eig.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let report = EnsembleReport {
        count: records.len(),
        seed: cfg.ensemble.seed,
        t_start: grid[0],
        t_end: grid[grid.len() - 1],
        samples: grid.len(),
        final_max_pair_dist: *summary.max_pair_dist.last().expect("non-empty grid"),
        decay_rate: summary.decay_rate,
        max_trace_err,
        min_eigenvalue,
        positivity_kept: records.iter().all(|r| r.is_positive(cfg.tolerances.psd)),
        envelope_holds: envelope.is_none_or(|e| e.holds),
        envelope_max_excess: envelope.map(|e| e.max_excess),
        distance_to_asymptotic,
        accepted_steps: records.iter().map(|r| r.stats.accepted).sum(),
        rejected_steps: records.iter().map(|r| r.stats.rejected).sum(),
    };
    Ok(Ensemble {
        records,
        summary,
        report,
    })
}

/// Validate, run the scenario and write every artifact. Returns the report
/// that was written to `report.json`.
pub fn run(cfg: &RunConfig) -> Result<Report, RunError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(RunError::Invalid(violations));
    }
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).map_err(|source| RunError::Write {
        path: dir.clone(),
        source,
    })?;

    if cfg.scenario == Scenario::Commutant {
        let report = run_commutant(cfg)?;
        output::write_json(&dir.join("report.json"), &report)?;
        return Ok(report);
    }

    let g = cfg.grid_or_default().expect("validated grid");
    let grid = uniform_grid(g.t_start, g.t_end, g.samples);
    let src = source(cfg, g.t_end)?;
    src.gen.validate_at(&grid[..1], cfg.tolerances.herm)?;
    let cert = certification(cfg, &src, &grid)?;

    if let Some(engine) = &src.engine {
        let period = engine.period();
        let n = cfg.certify_samples.unwrap_or(config::DEFAULT_SAMPLES_PER_PERIOD);
        output::write_schedule(&dir.join("schedule.csv"), engine, &uniform_grid(0.0, period, n + 1))?;
    }

    let ensemble = match cfg.scenario {
        Scenario::Certify => None,
        _ => {
            let e = run_ensemble(cfg, &src, &grid)?;
            output::write_trajectories(&dir.join("trajectories.csv"), &src.gen, &e.records)?;
            output::write_convergence(&dir.join("convergence.csv"), &e.summary)?;
            Some(e.report)
        }
    };
    let report = Report {
        scenario: cfg.scenario,
        certification: Some(cert),
        commutant: None,
        ensemble,
    };
    output::write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}
