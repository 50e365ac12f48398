//! Propagation in traceless coordinates.
//!
//! A state is `ρ = F_0/√N + Σ_j c̃_j F_j`; only `c̃` is integrated, through
//! `dc̃/dt = M0(t) c̃ + b(t)`, so the trace is exact by construction. The
//! right-hand side is evaluated matrix-free: expand, apply the generator,
//! project.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::certifier::{lambda_profile, Verdict};
use crate::generator::{assemble_superoperator, Liouvillian};
use crate::ode::{solve_dense, Dopri5Options, Dopri5Stats};
use crate::operator::{
    hermitian_eigenvalues, trace_distance, CoefficientVector, ComplexMatrix, DensityMatrix, HermitianBasis,
};
use crate::{cumulative_simpson, Error, Result, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorOptions {
    /// Local error tolerance of the integrator (relative and absolute).
    pub tol: f64,
    pub tolerances: Tolerances,
    /// Times where the generator may jump.
    pub breakpoints: Vec<f64>,
    pub h_max: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            tolerances: Tolerances::default(),
            breakpoints: Vec::new(),
            h_max: f64::INFINITY,
        }
    }
}

/// A solution sampled on a grid, with per-sample diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<CoefficientVector>,
    pub trace_err: Vec<f64>,
    pub min_eig: Vec<f64>,
    pub traceless_norm: Vec<f64>,
    pub stats: Dopri5Stats,
}

impl TrajectoryRecord {
    /// No sample dips below `−psd`.
    pub fn is_positive(&self, psd: f64) -> bool {
        self.min_eig.iter().all(|&e| e >= -psd)
    }

    pub fn final_state(&self) -> &CoefficientVector {
        self.states.last().expect("non-empty record")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSummary {
    pub times: Vec<f64>,
    /// Largest pairwise trace distance at each time.
    pub max_pair_dist: Vec<f64>,
    /// `Λ` sampled on the grid.
    pub lambda: Vec<f64>,
    /// `exp(∫₀ᵗ Λ)`, the Grönwall factor for squared coefficient distances.
    pub gronwall_envelope: Vec<f64>,
    /// Fitted `r` in `dist ∝ e^{−rt}` over the second half of the grid.
    pub decay_rate: Option<f64>,
}

/// Outcome of [`gronwall_envelope_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub holds: bool,
    /// Largest `‖Δc̃(t)‖² − ‖Δc̃(0)‖²·env(t)` found (negative when slack).
    pub max_excess: f64,
}

/// `ρ*(t)` seeded from the maximally mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticTrajectory {
    pub record: TrajectoryRecord,
    /// Only meaningful when the generator was certified.
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationOfConstants {
    pub times: Vec<f64>,
    /// `X0(t)(c̃(0) + ∫₀ᵗ X0⁻¹(s) b(s) ds)`.
    pub tilde: Vec<DVector<f64>>,
    /// Particular part `X0(t)∫₀ᵗ X0⁻¹(s) b(s) ds`.
    pub particular: Vec<DVector<f64>>,
    pub condition_numbers: Vec<f64>,
}

pub struct Propagator<'g, L: Liouvillian> {
    gen: &'g L,
    basis: HermitianBasis,
    opts: PropagatorOptions,
}

impl<'g, L: Liouvillian> Propagator<'g, L> {
    pub fn new(gen: &'g L, opts: PropagatorOptions) -> Result<Self> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {} must be positive",
                opts.tol
            )));
        }
        Ok(Self {
            gen,
            basis: HermitianBasis::gell_mann(gen.dim())?,
            opts,
        })
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn options(&self) -> &PropagatorOptions {
        &self.opts
    }

    fn c0(&self) -> f64 {
        1.0 / (self.basis.hilbert_dim() as f64).sqrt()
    }

    fn ode_options(&self) -> Dopri5Options {
        Dopri5Options {
            rtol: self.opts.tol,
            atol: self.opts.tol,
            h_max: self.opts.h_max,
            breakpoints: self.opts.breakpoints.clone(),
            ..Dopri5Options::default()
        }
    }

    // d c̃/dt for a given identity weight c0 (1/√N for states, 0 for the
    // homogeneous part)
    fn rhs(&self, t: f64, c0: f64, tilde: &DVector<f64>, out: &mut DVector<f64>) -> Result<()> {
        let sigma = self.basis.expand(c0, tilde.as_slice());
        let image = self.gen.apply(t, &sigma)?;
        self.basis.project_traceless_real(&image, out.as_mut_slice());
        Ok(())
    }

    fn integrate_tilde(
        &self,
        c0: f64,
        tilde0: &DVector<f64>,
        grid: &[f64],
    ) -> Result<(Vec<DVector<f64>>, Dopri5Stats)> {
        solve_dense(|t, y, dy| self.rhs(t, c0, y, dy), grid, tilde0, &self.ode_options())
    }

    pub fn density_matrix(&self, c: &CoefficientVector) -> ComplexMatrix {
        self.basis.expand(c.c0, c.tilde.as_slice())
    }

    fn record(&self, grid: &[f64], tilde: Vec<DVector<f64>>, stats: Dopri5Stats) -> Result<TrajectoryRecord> {
        let c0 = self.c0();
        let mut trace_err = Vec::with_capacity(grid.len());
        let mut min_eig = Vec::with_capacity(grid.len());
        let mut traceless_norm = Vec::with_capacity(grid.len());
        for v in &tilde {
            let rho = self.basis.expand(c0, v.as_slice());
            trace_err.push((rho.trace().re - 1.0).abs());
            min_eig.push(hermitian_eigenvalues(&rho, 1e-8)?[0]);
            traceless_norm.push(v.norm());
        }
        Ok(TrajectoryRecord {
            times: grid.to_vec(),
            states: tilde.into_iter().map(|t| CoefficientVector { c0, tilde: t }).collect(),
            trace_err,
            min_eig,
            traceless_norm,
            stats,
        })
    }

    /// Solve from `rho0` and sample on `grid`.
    pub fn integrate(&self, rho0: &DensityMatrix, grid: &[f64]) -> Result<TrajectoryRecord> {
        let c = self.basis.to_coefficients(rho0.matrix(), self.opts.tolerances.herm)?;
        let (tilde, stats) = self.integrate_tilde(self.c0(), &c.tilde, grid)?;
        self.record(grid, tilde, stats)
    }

    /// Integrate every state (in parallel) and summarise their convergence.
    pub fn propagate_ensemble(
        &self,
        states: &[DensityMatrix],
        grid: &[f64],
    ) -> Result<(Vec<TrajectoryRecord>, ConvergenceSummary)> {
        if states.len() < 2 {
            return Err(Error::InvalidArgument("an ensemble needs at least two states".into()));
        }
        let records = states
            .par_iter()
            .map(|s| self.integrate(s, grid))
            .collect::<Result<Vec<_>>>()?;
        let summary = self.summarize(&records)?;
        Ok((records, summary))
    }

    /// Pairwise distances, Grönwall envelope and fitted decay rate.
    pub fn summarize(&self, records: &[TrajectoryRecord]) -> Result<ConvergenceSummary> {
        let grid = &records[0].times;
        let mats: Vec<Vec<ComplexMatrix>> = records
            .iter()
            .map(|r| r.states.iter().map(|c| self.density_matrix(c)).collect())
            .collect();
        let max_pair_dist = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let mut worst = 0.0_f64;
                for i in 0..mats.len() {
                    for j in (i + 1)..mats.len() {
                        worst = worst.max(trace_distance(&mats[i][k], &mats[j][k])?);
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<f64>>>()?;
        let lambda = lambda_profile(self.gen, grid, &self.basis, self.opts.tolerances.herm)?;
        let integral = cumulative_simpson(grid, &lambda)?;
        let gronwall_envelope = integral.iter().map(|x| x.exp()).collect();
        let decay_rate = fit_decay_rate(grid, &max_pair_dist);
        Ok(ConvergenceSummary {
            times: grid.clone(),
            max_pair_dist,
            lambda,
            gronwall_envelope,
            decay_rate,
        })
    }

    /// Trajectory from `1/N`, for which the homogeneous part vanishes and the
    /// solution is the common asymptotic trajectory.
    pub fn asymptotic_trajectory(&self, grid: &[f64], verdict: Verdict) -> Result<AsymptoticTrajectory> {
        let mixed = DensityMatrix::maximally_mixed(self.basis.hilbert_dim());
        Ok(AsymptoticTrajectory {
            record: self.integrate(&mixed, grid)?,
            unique: verdict.is_certified(),
        })
    }

    /// Fundamental matrices `X0(t)` of `dX/dt = M0(t) X`, `X0(grid[0]) = 1`,
    /// on every grid time. Columns are integrated in parallel.
    pub fn fundamental_matrices(&self, grid: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let m = self.basis.len() - 1;
        let columns = (0..m)
            .into_par_iter()
            .map(|k| {
                let mut e = DVector::zeros(m);
                e[k] = 1.0;
                self.integrate_tilde(0.0, &e, grid).map(|(cols, _)| cols)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((0..grid.len())
            .map(|i| DMatrix::from_fn(m, m, |r, c| columns[c][i][r]))
            .collect())
    }

    /// `X0(t)` with `X0(0) = 1`.
    pub fn fundamental_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        let m = self.basis.len() - 1;
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("t = {t} must be non-negative")));
        }
        if t == 0.0 {
            return Ok(DMatrix::identity(m, m));
        }
        Ok(self.fundamental_matrices(&[0.0, t])?.pop().expect("two samples"))
    }

    /// Solution by variation of constants,
    /// `c̃(t) = X0(t) c̃(0) + X0(t) ∫₀ᵗ X0⁻¹(s) b(s) ds`,
    /// integrating `X0` and the integral jointly.
    pub fn variation_of_constants(&self, tilde0: &DVector<f64>, grid: &[f64]) -> Result<VariationOfConstants> {
        let m = self.basis.len() - 1;
        if tilde0.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: tilde0.len(),
            });
        }
        let mut y0 = DVector::zeros(m * m + m);
        for k in 0..m {
            y0[k * m + k] = 1.0;
        }
        let herm = self.opts.tolerances.herm;
        let (states, _) = solve_dense(
            |t, y, dy| {
                let blocks = assemble_superoperator(self.gen, t, &self.basis, herm)?;
                let x = DMatrix::from_column_slice(m, m, &y.as_slice()[..m * m]);
                let dx = &blocks.m0 * &x;
                let sol = x.lu().solve(&blocks.b).ok_or(Error::NonFinite(t))?;
                dy.as_mut_slice()[..m * m].copy_from_slice(dx.as_slice());
                dy.as_mut_slice()[m * m..].copy_from_slice(sol.as_slice());
                Ok(())
            },
            grid,
            &y0,
            &self.ode_options(),
        )?;
        let mut tilde = Vec::with_capacity(grid.len());
        let mut particular = Vec::with_capacity(grid.len());
        let mut condition_numbers = Vec::with_capacity(grid.len());
        for s in &states {
            let x = DMatrix::from_column_slice(m, m, &s.as_slice()[..m * m]);
            let integral = DVector::from_column_slice(&s.as_slice()[m * m..]);
            let sv = x.clone().svd(false, false).singular_values;
            let (mx, mn) = sv
                .iter()
                .fold((0.0_f64, f64::INFINITY), |(a, b), &v| (a.max(v), b.min(v)));
            condition_numbers.push(mx / mn);
            particular.push(&x * &integral);
            tilde.push(&x * (tilde0 + integral));
        }
        Ok(VariationOfConstants {
            times: grid.to_vec(),
            tilde,
            particular,
            condition_numbers,
        })
    }

    /// Compare a variation-of-constants reconstruction with direct
    /// integration; error when they deviate by more than `threshold`.
    pub fn verify_reconstruction(
        &self,
        direct: &TrajectoryRecord,
        voc: &VariationOfConstants,
        threshold: f64,
    ) -> Result<f64> {
        let deviation = direct
            .states
            .iter()
            .zip(&voc.tilde)
            .map(|(c, v)| (&c.tilde - v).amax())
            .fold(0.0, f64::max);
        if deviation > threshold {
            return Err(Error::ReconstructionMismatch { deviation, threshold });
        }
        Ok(deviation)
    }
}

/// Least-squares slope of `ln(dist)` over the final half of the grid,
/// ignoring samples below `1e-12`. Returned as a positive decay rate.
pub fn fit_decay_rate(times: &[f64], dist: &[f64]) -> Option<f64> {
    let start = times.len() / 2;
    let pts: Vec<(f64, f64)> = times[start..]
        .iter()
        .zip(&dist[start..])
        .filter(|(_, &d)| d > 1e-12)
        .map(|(&t, &d)| (t, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// `‖Δc̃(t)‖² ≤ ‖Δc̃(0)‖²·exp(∫₀ᵗ Λ) + slack` for every pair of records.
pub fn gronwall_envelope_check(
    records: &[TrajectoryRecord],
    summary: &ConvergenceSummary,
    slack: f64,
) -> EnvelopeCheck {
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..records.len() {
        for j in (i + 1)..records.len() {
            let d0 = (&records[i].states[0].tilde - &records[j].states[0].tilde).norm_squared();
            for (k, env) in summary.gronwall_envelope.iter().enumerate() {
                let dk = (&records[i].states[k].tilde - &records[j].states[k].tilde).norm_squared();
                max_excess = max_excess.max(dk - d0 * env);
            }
        }
    }
    EnvelopeCheck {
        holds: max_excess <= slack,
        max_excess,
    }
}

/// `n` evenly spaced samples of `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t0];
    }
    let dt = (t1 - t0) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { t1 } else { t0 + k as f64 * dt })
        .collect()
}
