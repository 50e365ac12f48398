//! Certification of weak relaxation.
//!
//! At each sampled time the active jump set (channels with a positive rate)
//! is checked for
//!
//! 1. closure under adjoints,
//! 2. a trivial commutant (only multiples of the identity commute with all
//!    jumps),
//! 3. a strictly negative spectral rate `Λ(t) = max sp(M0 + M0ᵀ)`.
//!
//! Where all three hold on a set of positive measure in every period of a
//! periodic generator, every pair of solutions contracts to a common
//! trajectory. If in addition the identity is a fixed point of the generator,
//! that trajectory is the maximally mixed state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generator::{assemble_superoperator, GKLSGenerator, Liouvillian};
use crate::operator::{commutator, symmetric_eigenvalues, ComplexMatrix, HermitianBasis};
use crate::{simpson, Error, Result, Tolerances};

/// Adjoint pairing of an operator list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfAdjointPairing {
    pub ok: bool,
    /// `(α, −α)` index pairs with `ops[−α] = ops[α]†`.
    pub pairs: Vec<(usize, usize)>,
    /// Hermitian members.
    pub self_paired: Vec<usize>,
    /// Members whose adjoint is missing, or duplicates left without a partner.
    pub unmatched: Vec<usize>,
}

fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.dim() == b.dim() && a.max_abs_diff(b) <= tol * a.norm().max(b.norm()).max(1.0)
}

/// Does the adjoint of every operator appear in the list?
pub fn is_self_adjoint_set(ops: &[ComplexMatrix], tol: f64) -> SelfAdjointPairing {
    let adjoints: Vec<ComplexMatrix> = ops.iter().map(ComplexMatrix::adjoint).collect();
    let ok = !ops.is_empty() && adjoints.iter().all(|adj| ops.iter().any(|op| approx_eq(op, adj, tol)));
    let mut used = vec![false; ops.len()];
    let mut pairs = Vec::new();
    let mut self_paired = Vec::new();
    let mut unmatched = Vec::new();
    for i in 0..ops.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if approx_eq(&ops[i], &adjoints[i], tol) {
            self_paired.push(i);
            continue;
        }
        match (i + 1..ops.len()).find(|&j| !used[j] && approx_eq(&ops[j], &adjoints[i], tol)) {
            Some(j) => {
                used[j] = true;
                pairs.push((i, j));
            }
            None => unmatched.push(i),
        }
    }
    SelfAdjointPairing {
        ok,
        pairs,
        self_paired,
        unmatched,
    }
}

/// Commutant of an operator set.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutantResult {
    /// Complex dimension; 1 means the set is irreducible.
    pub dimension: usize,
    /// Unit-norm traceless member of the commutant, when `dimension > 1`.
    pub witness: Option<ComplexMatrix>,
    pub singular_values: Vec<f64>,
}

// vec(XA − AX) = (Aᵀ ⊗ 1 − 1 ⊗ A) vec(X), column-major vec
fn commutator_map(a: &ComplexMatrix) -> DMatrix<Complex64> {
    let n = a.dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    a.as_dmatrix().transpose().kronecker(&id) - id.kronecker(a.as_dmatrix())
}

/// Dimension of `{X : [X, A] = 0 for all A in ops}` from the numerical
/// nullspace of the stacked commutator maps.
pub fn commutant_dimension(ops: &[ComplexMatrix], sigma_cut: f64) -> Result<CommutantResult> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidArgument("commutant of an empty set".into()))?;
    let n = first.dim();
    if let Some(bad) = ops.iter().find(|a| a.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    let n2 = n * n;
    let mut stacked = DMatrix::<Complex64>::zeros(ops.len() * n2, n2);
    for (k, a) in ops.iter().enumerate() {
        stacked.view_mut((k * n2, 0), (n2, n2)).copy_from(&commutator_map(a));
    }
    // singular values of R equal those of the tall stack
    let reduced = if stacked.nrows() > n2 {
        stacked.qr().r()
    } else {
        stacked
    };
    let svd = reduced.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    // rank-deficient R (fewer rows than n²) contributes implicit zeros
    let implicit_zeros = n2.saturating_sub(sv.len());
    let s_max = sv.iter().copied().fold(0.0, f64::max);
    let cut = sigma_cut * s_max;
    let null_rows: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cut).collect();
    let dimension = null_rows.len() + implicit_zeros;

    let witness = if dimension > 1 {
        let candidates: Vec<ComplexMatrix> = if s_max == 0.0 {
            (0..n2).map(|k| ComplexMatrix::ket_bra(n, k % n, k / n)).collect()
        } else {
            null_rows
                .iter()
                .map(|&r| ComplexMatrix::from_fn(n, |i, j| v_t[(r, j * n + i)].conj()))
                .collect()
        };
        let id = ComplexMatrix::identity(n);
        candidates
            .into_iter()
            .map(|x| {
                let shift = x.trace() / n as f64;
                &x - &id.scale(shift)
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .filter(|x| x.norm() > 1e-8)
            .map(|x| x.scale_real(1.0 / x.norm()))
    } else {
        None
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(CommutantResult {
        dimension,
        witness,
        singular_values: sv,
    })
}

/// Active channels at `t`: positive rate, nonzero operator, identical
/// operators merged with summed rates. Errors if any rate is negative.
pub fn active_jumps(gen: &GKLSGenerator, t: f64, tol: f64) -> Result<Vec<(ComplexMatrix, f64)>> {
    let mut merged: Vec<(ComplexMatrix, f64)> = Vec::new();
    for (op, rate) in gen.jump_set(t)? {
        if rate < 0.0 {
            return Err(Error::InvalidArgument(format!("negative rate {rate} at t = {t}")));
        }
        if rate == 0.0 || op.norm() <= tol {
            continue;
        }
        match merged.iter_mut().find(|(m, _)| approx_eq(m, &op, tol)) {
            Some(entry) => entry.1 += rate,
            None => merged.push((op, rate)),
        }
    }
    Ok(merged)
}

/// Right-hand side of the commutator bound
///
/// `2 Re(σ, L_t σ) ≤ −Σ_{α>0} γ_{−α}(‖[L_α,σ]‖² + ‖[L_α†,σ]‖²) − Σ_{α₀} γ_{α₀}‖[L_{α₀},σ]‖²`
///
/// where each pair is oriented so that `γ_α ≥ γ_{−α}` (the smaller rate
/// multiplies both commutators).
pub fn spohn_bound_rhs(gen: &GKLSGenerator, t: f64, sigma: &ComplexMatrix, tol: f64) -> Result<f64> {
    if sigma.trace().norm() > 1e-9 * sigma.norm().max(1.0) {
        return Err(Error::InvalidArgument("σ must be traceless".into()));
    }
    let active = active_jumps(gen, t, tol)?;
    let ops: Vec<ComplexMatrix> = active.iter().map(|(op, _)| op.clone()).collect();
    let pairing = is_self_adjoint_set(&ops, tol);
    if !pairing.ok || !pairing.unmatched.is_empty() {
        return Err(Error::NotSelfAdjoint(t));
    }
    let sq = |a: &ComplexMatrix| -> Result<f64> { Ok(commutator(a, sigma)?.norm().powi(2)) };
    let mut total = 0.0;
    for &(a, b) in &pairing.pairs {
        let g = active[a].1.min(active[b].1);
        total += g * (sq(&active[a].0)? + sq(&active[b].0)?);
    }
    for &k in &pairing.self_paired {
        total += active[k].1 * sq(&active[k].0)?;
    }
    Ok(-total)
}

/// `Λ(t)`: largest eigenvalue of `M0(t) + M0(t)ᵀ`.
pub fn lambda_max<L: Liouvillian + ?Sized>(gen: &L, t: f64, basis: &HermitianBasis, herm_tol: f64) -> Result<f64> {
    let blocks = assemble_superoperator(gen, t, basis, herm_tol)?;
    Ok(symmetrized_max(&blocks.m0))
}

fn symmetrized_max(m0: &DMatrix<f64>) -> f64 {
    let sym = m0 + m0.transpose();
    *symmetric_eigenvalues(&sym).last().expect("non-empty block")
}

/// `Λ` sampled on a grid.
pub fn lambda_profile<L: Liouvillian + ?Sized>(
    gen: &L,
    grid: &[f64],
    basis: &HermitianBasis,
    herm_tol: f64,
) -> Result<Vec<f64>> {
    grid.par_iter().map(|&t| lambda_max(gen, t, basis, herm_tol)).collect()
}

/// Composite-Simpson estimate of `∫ Λ(s) ds` over the grid.
pub fn gronwall_log_bound<L: Liouvillian + ?Sized>(
    gen: &L,
    grid: &[f64],
    basis: &HermitianBasis,
    herm_tol: f64,
) -> Result<f64> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid);
    }
    let lambda = lambda_profile(gen, grid, basis, herm_tol)?;
    simpson(grid, &lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedWeaklyRelaxing,
    CertifiedStronglyRelaxingUnital,
    Inconclusive,
}

impl Verdict {
    pub fn is_certified(self) -> bool {
        !matches!(self, Verdict::Inconclusive)
    }
}

/// Per-sample checks and the resulting verdict. Arrays are aligned with
/// `times`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub times: Vec<f64>,
    /// `t ≥ markovian_from`.
    pub inspected: Vec<bool>,
    pub self_adjoint_ok: Vec<bool>,
    pub commutant_dim: Vec<usize>,
    /// Inspected, no negative rate, self-adjoint active set, trivial
    /// commutant.
    pub hypotheses_ok: Vec<bool>,
    pub lambda: Vec<f64>,
    /// Norm of the inhomogeneity `b(t)`; zero iff `L_t(1) ∝ 1`.
    pub b_norm: Vec<f64>,
    /// `hypotheses_ok` and `Λ < 0`.
    pub certified: Vec<bool>,
    /// Largest `Λ` on the certified samples after dropping one sample at
    /// every window edge.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub certified_measure_per_period: f64,
    pub gronwall_integral: f64,
    /// `∫Λ` over the first inspected period. Must be negative for a
    /// periodic verdict, since `Λ` may be positive off the certified set.
    pub gronwall_integral_per_period: Option<f64>,
    pub period: Option<f64>,
    pub markovian_from: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl CertificationReport {
    /// Maximal runs of consecutive certified samples as `(first, last)` times.
    pub fn certified_windows(&self) -> Vec<(f64, f64)> {
        runs(&self.times, &self.certified)
    }

    /// Maximal runs of samples where the structural hypotheses hold,
    /// regardless of the sign of `Λ`.
    pub fn hypothesis_windows(&self) -> Vec<(f64, f64)> {
        runs(&self.times, &self.hypotheses_ok)
    }
}

fn runs(times: &[f64], flags: &[bool]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=times.len() {
        let on = i < times.len() && flags[i];
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((times[s], times[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    out
}

struct Sample {
    self_adjoint: bool,
    commutant_dim: usize,
    lambda: f64,
    b_norm: f64,
    negative_rate: bool,
}

fn sample(gen: &GKLSGenerator, t: f64, basis: &HermitianBasis, tol: &Tolerances) -> Result<Sample> {
    let n = gen.dim();
    let negative_rate = gen.jump_set(t)?.iter().any(|(_, r)| *r < 0.0);
    let active = if negative_rate {
        Vec::new()
    } else {
        active_jumps(gen, t, tol.comm)?
    };
    let ops: Vec<ComplexMatrix> = active.into_iter().map(|(op, _)| op).collect();
    let (self_adjoint, commutant_dim) = if ops.is_empty() {
        (false, n * n)
    } else {
        let sa = is_self_adjoint_set(&ops, tol.comm).ok;
        (sa, commutant_dimension(&ops, tol.sigma_cut)?.dimension)
    };
    let blocks = assemble_superoperator(gen, t, basis, tol.herm)?;
    Ok(Sample {
        self_adjoint,
        commutant_dim,
        lambda: symmetrized_max(&blocks.m0),
        b_norm: blocks.b.norm(),
        negative_rate,
    })
}

fn cell_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 {
                times[0]
            } else {
                0.5 * (times[i - 1] + times[i])
            };
            let hi = if i + 1 == n {
                times[n - 1]
            } else {
                0.5 * (times[i] + times[i + 1])
            };
            hi - lo
        })
        .collect()
}

/// Evaluate the relaxation conditions on `grid` and issue a verdict.
///
/// Only samples with `t ≥ gen.markovian_from()` are inspected. A periodic
/// generator (declared through `period`) needs the inspected part of the grid
/// to span at least one period; the certified set found there repeats in
/// every period and therefore has infinite measure. `Λ` is not assumed to be
/// non-positive elsewhere: the periodic verdict also needs `∫Λ < 0` over one
/// period, so that `exp(∫₀ᵗ Λ) → 0`.
pub fn certify(
    gen: &GKLSGenerator,
    period: Option<f64>,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<CertificationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid);
    }
    if let Some(p) = period {
        if !(p > 0.0) {
            return Err(Error::InvalidArgument(format!("period {p} must be positive")));
        }
    }
    let basis = HermitianBasis::gell_mann(gen.dim())?;
    let t_star = gen.markovian_from();
    let samples = grid
        .par_iter()
        .map(|&t| sample(gen, t, &basis, tol))
        .collect::<Result<Vec<_>>>()?;

    let inspected: Vec<bool> = grid.iter().map(|&t| t >= t_star).collect();
    let hypotheses_ok: Vec<bool> = samples
        .iter()
        .zip(&inspected)
        .map(|(s, &ins)| ins && !s.negative_rate && s.self_adjoint && s.commutant_dim == 1)
        .collect();
    let certified: Vec<bool> = samples
        .iter()
        .zip(&hypotheses_ok)
        .map(|(s, &ok)| ok && s.lambda < 0.0)
        .collect();

    let mut notes = Vec::new();
    let n = grid.len();
    // drop one sample at each interior window edge
    let interior: Vec<usize> = (0..n)
        .filter(|&i| {
            certified[i] && (i == 0 || certified[i - 1] || !inspected[i - 1]) && (i + 1 == n || certified[i + 1])
        })
        .collect();
    let pool: Vec<usize> = if interior.is_empty() {
        (0..n).filter(|&i| certified[i]).collect()
    } else {
        interior
    };
    let c = pool.iter().map(|&i| samples[i].lambda).max_by(f64::total_cmp);

    let weights = cell_weights(grid);
    let first_inspected = inspected.iter().position(|&x| x);
    let (measure, covers_period) = match (first_inspected, period) {
        (None, _) => {
            notes.push("no sample at or after markovian_from".into());
            (0.0, false)
        }
        (Some(a), Some(p)) => {
            let t_a = grid[a];
            let covers = grid[n - 1] - t_a >= p * (1.0 - 1e-9);
            if !covers {
                notes.push(format!(
                    "grid spans {} after markovian_from, less than one period {p}",
                    grid[n - 1] - t_a
                ));
            }
            let m = (a..n)
                .filter(|&i| certified[i] && grid[i] < t_a + p * (1.0 - 1e-12))
                .map(|i| weights[i])
                .sum();
            (m, covers)
        }
        (Some(a), None) => {
            notes.push("aperiodic generator: certified measure is finite on this horizon".into());
            ((a..n).filter(|&i| certified[i]).map(|i| weights[i]).sum(), false)
        }
    };

    let inspected_idx: Vec<usize> = (0..n).filter(|&i| inspected[i]).collect();
    let gronwall_integral = if inspected_idx.len() >= 2 {
        let ts: Vec<f64> = inspected_idx.iter().map(|&i| grid[i]).collect();
        let ls: Vec<f64> = inspected_idx.iter().map(|&i| samples[i].lambda).collect();
        simpson(&ts, &ls)?
    } else {
        0.0
    };

    let per_period = match (first_inspected, period) {
        (Some(a), Some(p)) if covers_period => {
            let end = (a..n)
                .take_while(|&i| grid[i] <= grid[a] + p * (1.0 + 1e-12))
                .last()
                .unwrap_or(a);
            if end > a {
                Some(simpson(
                    &grid[a..=end],
                    &samples[a..=end].iter().map(|s| s.lambda).collect::<Vec<_>>(),
                )?)
            } else {
                None
            }
        }
        _ => None,
    };
    let positive = inspected_idx.iter().filter(|&&i| samples[i].lambda > tol.herm).count();
    if positive > 0 {
        notes.push(format!(
            "Λ > 0 at {positive} inspected samples; contraction then rests on the per-period integral of Λ"
        ));
    }
    if let Some(x) = per_period.filter(|x| *x >= 0.0) {
        notes.push(format!("∫Λ over one period is {x}, not negative"));
    }

    let weakly = period.is_some()
        && covers_period
        && measure > 0.0
        && c.is_some_and(|c| c < 0.0)
        && per_period.is_some_and(|x| x < 0.0);
    let unital = inspected_idx.iter().all(|&i| samples[i].b_norm <= tol.herm);
    let verdict = match (weakly, unital) {
        (true, true) => Verdict::CertifiedStronglyRelaxingUnital,
        (true, false) => Verdict::CertifiedWeaklyRelaxing,
        _ => Verdict::Inconclusive,
    };

    Ok(CertificationReport {
        times: grid.to_vec(),
        inspected,
        self_adjoint_ok: samples.iter().map(|s| s.self_adjoint).collect(),
        commutant_dim: samples.iter().map(|s| s.commutant_dim).collect(),
        hypotheses_ok,
        lambda: samples.iter().map(|s| s.lambda).collect(),
        b_norm: samples.iter().map(|s| s.b_norm).collect(),
        certified,
        c,
        certified_measure_per_period: measure,
        gronwall_integral,
        gronwall_integral_per_period: per_period,
        period,
        markovian_from: t_star,
        verdict,
        notes,
    })
}

/// Unit vector of traceless coordinates for a Hermitian witness matrix.
pub fn witness_direction(witness: &ComplexMatrix, basis: &HermitianBasis) -> Result<DVector<f64>> {
    let herm = witness.hermitian_part();
    let m = if herm.norm() > 1e-8 {
        herm
    } else {
        // anti-Hermitian witness: iX is Hermitian and commutes as well
        witness.scale(Complex64::new(0.0, 1.0)).hermitian_part()
    };
    let c = basis.to_coefficients(&m, 1e-8)?;
    let norm = c.tilde.norm();
    Ok(c.tilde / norm)
}
