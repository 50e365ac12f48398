//! Time-dependent GKLS generators
//!
//! `L_t ρ = −i[H(t), ρ] + Σ_α γ_α(t) (L_α ρ L_α† − ½{L_α† L_α, ρ})`
//!
//! and their real matrix `M_nm(t) = (F_n, L_t F_m)` in a [`HermitianBasis`].

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::operator::{ComplexMatrix, HermitianBasis, I};
use crate::{Error, Result};

/// A value that is either fixed or a function of time.
pub enum TimeDependent<T> {
    Constant(T),
    Function(Arc<dyn Fn(f64) -> T + Send + Sync>),
}

impl<T> Clone for TimeDependent<T>
where
    T: Clone,
{
    fn clone(&self) -> Self {
        match self {
            Self::Constant(v) => Self::Constant(v.clone()),
            Self::Function(f) => Self::Function(Arc::clone(f)),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for TimeDependent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl<T: Clone> TimeDependent<T> {
    pub fn function(f: impl Fn(f64) -> T + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> Cow<'_, T> {
        match self {
            Self::Constant(v) => Cow::Borrowed(v),
            Self::Function(f) => Cow::Owned(f(t)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }
}

/// Linear interpolation between samples.
pub trait Lerp: Clone {
    fn lerp(&self, other: &Self, w: f64) -> Self;
}

impl Lerp for f64 {
    fn lerp(&self, other: &Self, w: f64) -> Self {
        self + (other - self) * w
    }
}

impl Lerp for ComplexMatrix {
    fn lerp(&self, other: &Self, w: f64) -> Self {
        &self.scale_real(1.0 - w) + &other.scale_real(w)
    }
}

/// Samples on a uniform grid `t0 + k·dt`, linearly interpolated. Outside the
/// table the end values are held, unless `periodic` in which case time is
/// reduced modulo the table length `values.len()·dt`.
#[derive(Debug, Clone)]
pub struct Tabulated<T> {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<T>,
    pub periodic: bool,
}

impl<T: Lerp + Send + Sync + 'static> Tabulated<T> {
    pub fn new(t0: f64, dt: f64, values: Vec<T>, periodic: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty table".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("table step {dt} must be positive")));
        }
        Ok(Self {
            t0,
            dt,
            values,
            periodic,
        })
    }

    pub fn eval(&self, t: f64) -> T {
        let n = self.values.len();
        let mut x = (t - self.t0) / self.dt;
        if self.periodic {
            x = x.rem_euclid(n as f64);
            let k = (x.floor() as usize).min(n - 1);
            let w = x - k as f64;
            return self.values[k].lerp(&self.values[(k + 1) % n], w);
        }
        if x <= 0.0 {
            return self.values[0].clone();
        }
        if x >= (n - 1) as f64 {
            return self.values[n - 1].clone();
        }
        let k = x.floor() as usize;
        self.values[k].lerp(&self.values[k + 1], x - k as f64)
    }

    pub fn into_time_dependent(self) -> TimeDependent<T> {
        TimeDependent::function(move |t| self.eval(t))
    }
}

/// One dissipative channel `γ(t)·D[L(t)]`.
#[derive(Debug, Clone)]
pub struct JumpTerm {
    operator: TimeDependent<ComplexMatrix>,
    rate: TimeDependent<f64>,
    // L†L when the operator is constant
    cached_ldl: Option<ComplexMatrix>,
    tag: Option<String>,
}

impl JumpTerm {
    pub fn new(operator: TimeDependent<ComplexMatrix>, rate: TimeDependent<f64>) -> Self {
        let cached_ldl = match &operator {
            TimeDependent::Constant(l) => Some(&l.adjoint() * l),
            TimeDependent::Function(_) => None,
        };
        Self {
            operator,
            rate,
            cached_ldl,
            tag: None,
        }
    }

    pub fn constant(operator: ComplexMatrix, rate: f64) -> Self {
        Self::new(TimeDependent::Constant(operator), TimeDependent::Constant(rate))
    }

    pub fn with_rate_fn(operator: ComplexMatrix, rate: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(TimeDependent::Constant(operator), TimeDependent::function(rate))
    }

    /// Label used to select sub-dissipators (for example one bath).
    pub fn tagged(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    pub fn operator_at(&self, t: f64) -> Cow<'_, ComplexMatrix> {
        self.operator.at(t)
    }

    pub fn rate_at(&self, t: f64) -> Result<f64> {
        let r = *self.rate.at(t);
        if !r.is_finite() {
            return Err(Error::RateEvaluation(format!("rate is {r} at t = {t}")));
        }
        Ok(r)
    }

    // γ (L σ L† − ½ L†L σ − ½ σ L†L) accumulated into `out`
    fn accumulate(&self, t: f64, sigma: &ComplexMatrix, weight: f64, out: &mut DMatrix<Complex64>) -> Result<()> {
        let gamma = self.rate_at(t)? * weight;
        if gamma == 0.0 {
            return Ok(());
        }
        let l = self.operator.at(t);
        if l.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.dim(),
                found: l.dim(),
            });
        }
        let ldl: Cow<'_, ComplexMatrix> = match &self.cached_ldl {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(&l.adjoint() * l.as_ref()),
        };
        let l = l.as_dmatrix();
        let s = sigma.as_dmatrix();
        let ldl = ldl.as_dmatrix();
        let g = Complex64::new(gamma, 0.0);
        let half = Complex64::new(0.5 * gamma, 0.0);
        *out += (l * s * l.adjoint()) * g;
        *out -= (ldl * s + s * ldl) * half;
        Ok(())
    }
}

/// Anything that acts linearly on operators at a given time.
pub trait Liouvillian: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, sigma: &ComplexMatrix) -> Result<ComplexMatrix>;
}

/// Time-dependent generator in GKLS form.
#[derive(Debug, Clone)]
pub struct GKLSGenerator {
    dim: usize,
    hamiltonian: Option<TimeDependent<ComplexMatrix>>,
    jumps: Vec<JumpTerm>,
    markovian_from: f64,
}

impl GKLSGenerator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            hamiltonian: None,
            jumps: Vec::new(),
            markovian_from: 0.0,
        }
    }

    pub fn with_hamiltonian(mut self, h: TimeDependent<ComplexMatrix>) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    pub fn with_static_hamiltonian(self, h: ComplexMatrix) -> Self {
        self.with_hamiltonian(TimeDependent::Constant(h))
    }

    pub fn with_jump(mut self, jump: JumpTerm) -> Self {
        self.jumps.push(jump);
        self
    }

    pub fn with_jumps(mut self, jumps: impl IntoIterator<Item = JumpTerm>) -> Self {
        self.jumps.extend(jumps);
        self
    }

    /// Rates may be negative before `t_star`; certification only looks at
    /// later times.
    pub fn with_markovian_from(mut self, t_star: f64) -> Self {
        self.markovian_from = t_star;
        self
    }

    pub fn markovian_from(&self) -> f64 {
        self.markovian_from
    }

    pub fn jumps(&self) -> &[JumpTerm] {
        &self.jumps
    }

    pub fn hamiltonian_at(&self, t: f64) -> ComplexMatrix {
        match &self.hamiltonian {
            Some(h) => h.at(t).into_owned(),
            None => ComplexMatrix::zeros(self.dim),
        }
    }

    /// Every jump operator with its rate at `t`, zero rates included.
    pub fn jump_set(&self, t: f64) -> Result<Vec<(ComplexMatrix, f64)>> {
        self.jumps
            .iter()
            .map(|j| Ok((j.operator_at(t).into_owned(), j.rate_at(t)?)))
            .collect()
    }

    fn check_dim(&self, sigma: &ComplexMatrix) -> Result<()> {
        if sigma.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: sigma.dim(),
            });
        }
        Ok(())
    }

    /// Dissipative part only. With `tag = Some(..)` only channels carrying
    /// that tag contribute.
    pub fn dissipator(&self, t: f64, sigma: &ComplexMatrix, tag: Option<&str>) -> Result<ComplexMatrix> {
        self.check_dim(sigma)?;
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for j in &self.jumps {
            if tag.is_some() && j.tag() != tag {
                continue;
            }
            j.accumulate(t, sigma, 1.0, &mut out)?;
        }
        ComplexMatrix::from_dmatrix(out)
    }

    /// Check that `H(t)` is Hermitian and operators have the right dimension
    /// at each sampled time.
    pub fn validate_at(&self, times: &[f64], herm_tol: f64) -> Result<()> {
        for &t in times {
            let h = self.hamiltonian_at(t);
            self.check_dim(&h)?;
            let defect = h.hermiticity_defect();
            if defect > herm_tol {
                return Err(Error::NotHermitian(defect));
            }
            for j in &self.jumps {
                self.check_dim(&j.operator_at(t))?;
                j.rate_at(t)?;
            }
        }
        Ok(())
    }
}

impl Liouvillian for GKLSGenerator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(sigma)?;
        let s = sigma.as_dmatrix();
        let mut out = DMatrix::zeros(self.dim, self.dim);
        if let Some(h) = &self.hamiltonian {
            let h = h.at(t);
            self.check_dim(&h)?;
            let h = h.as_dmatrix();
            out += (h * s - s * h) * (-I);
        }
        for j in &self.jumps {
            j.accumulate(t, sigma, 1.0, &mut out)?;
        }
        ComplexMatrix::from_dmatrix(out)
    }
}

/// Real superoperator matrix and its split into the traceless block `M0`
/// and the inhomogeneity `b` sourced by the identity component.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorBlocks {
    pub m: DMatrix<f64>,
    pub m0: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl SuperoperatorBlocks {
    /// Largest first-row entry; zero for trace-preserving generators.
    pub fn trace_defect(&self) -> f64 {
        self.m.row(0).iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// `M0 c̃ + b`.
    pub fn traceless_rhs(&self, tilde: &DVector<f64>) -> DVector<f64> {
        &self.m0 * tilde + &self.b
    }
}

fn check_basis<L: Liouvillian + ?Sized>(gen: &L, basis: &HermitianBasis) -> Result<()> {
    if basis.hilbert_dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            found: basis.hilbert_dim(),
        });
    }
    Ok(())
}

/// Complex matrix `(F_n, L_t F_m)`, columns evaluated in parallel.
fn complex_superoperator<L: Liouvillian + ?Sized>(
    gen: &L,
    t: f64,
    basis: &HermitianBasis,
) -> Result<Vec<Vec<Complex64>>> {
    check_basis(gen, basis)?;
    basis
        .elements()
        .par_iter()
        .map(|f| gen.apply(t, f).map(|img| basis.project(&img)))
        .collect()
}

/// Assemble `M(t)` and split it into `(M0, b)`.
///
/// Imaginary residues up to `herm_tol` are dropped; anything larger means the
/// map does not preserve Hermiticity and is reported as an error.
pub fn assemble_superoperator<L: Liouvillian + ?Sized>(
    gen: &L,
    t: f64,
    basis: &HermitianBasis,
    herm_tol: f64,
) -> Result<SuperoperatorBlocks> {
    let cols = complex_superoperator(gen, t, basis)?;
    let d = basis.len();
    let mut m = DMatrix::zeros(d, d);
    for (col, values) in cols.iter().enumerate() {
        for (row, z) in values.iter().enumerate() {
            if z.im.abs() > herm_tol {
                return Err(Error::ImaginaryResidue {
                    row,
                    col,
                    residue: z.im.abs(),
                });
            }
            m[(row, col)] = z.re;
        }
    }
    let sqrt_n = (basis.hilbert_dim() as f64).sqrt();
    let m0 = m.view((1, 1), (d - 1, d - 1)).into_owned();
    let b = m.view((1, 0), (d - 1, 1)).column(0).into_owned() / sqrt_n;
    Ok(SuperoperatorBlocks { m, m0, b })
}

/// `|(F_0, L_t F_m)| < tp_tol` for every basis element and sampled time.
pub fn check_trace_preservation<L: Liouvillian + ?Sized>(gen: &L, t_samples: &[f64], tp_tol: f64) -> Result<bool> {
    let basis = HermitianBasis::gell_mann(gen.dim())?;
    for &t in t_samples {
        let first_row_max = basis
            .elements()
            .par_iter()
            .map(|f| {
                gen.apply(t, f)
                    .map(|img| img.trace().norm() / (basis.hilbert_dim() as f64).sqrt())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if first_row_max >= tp_tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest Frobenius change of `M(t)` between consecutive grid points,
/// divided by the step. A finite-difference continuity heuristic: large
/// values flag jumps of the generator on the grid.
pub fn max_superoperator_slope<L: Liouvillian + ?Sized>(
    gen: &L,
    grid: &[f64],
    basis: &HermitianBasis,
    herm_tol: f64,
) -> Result<f64> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid);
    }
    let mats = grid
        .par_iter()
        .map(|&t| assemble_superoperator(gen, t, basis, herm_tol).map(|b| b.m))
        .collect::<Result<Vec<_>>>()?;
    Ok(mats
        .windows(2)
        .zip(grid.windows(2))
        .map(|(m, t)| (&m[1] - &m[0]).norm() / (t[1] - t[0]))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{hs_inner, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn decay() -> ComplexMatrix {
        // |0><1|: moves population from |1> to |0>
        ComplexMatrix::ket_bra(2, 0, 1)
    }

    #[test]
    fn amplitude_damping_action() {
        let gen = GKLSGenerator::new(2).with_jump(JumpTerm::constant(decay(), 1.0));
        let rho = DensityMatrix::basis_state(2, 1);
        let out = gen.apply(0.0, rho.matrix()).unwrap();
        // oracle: direct 2x2 arithmetic
        let expected = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!(out.max_abs_diff(&expected) < 1e-15);
        let d = gen.dissipator(0.0, rho.matrix(), None).unwrap();
        assert!(d.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn hamiltonian_only_action() {
        let gen = GKLSGenerator::new(2).with_static_hamiltonian(ComplexMatrix::pauli_z());
        let out = gen.apply(0.0, &ComplexMatrix::pauli_x()).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::pauli_y().scale_real(2.0)) < 1e-15);
        let d = gen.dissipator(0.0, &ComplexMatrix::pauli_x(), None).unwrap();
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn detailed_balance_gibbs_is_stationary() {
        // H = (w/2) σz, |0> excited. Rate equation: p1 γ↓ = p0 γ↑.
        let (w, temp, g0): (f64, f64, f64) = (1.3, 0.7, 0.4);
        let down = g0 * (1.0 + 1.0 / ((w / temp).exp() - 1.0));
        let up = g0 / ((w / temp).exp() - 1.0);
        let gen = GKLSGenerator::new(2)
            .with_static_hamiltonian(ComplexMatrix::pauli_z().scale_real(w / 2.0))
            .with_jump(JumpTerm::constant(ComplexMatrix::ket_bra(2, 1, 0), down))
            .with_jump(JumpTerm::constant(ComplexMatrix::ket_bra(2, 0, 1), up));
        let p0 = up / (up + down);
        let gibbs = ComplexMatrix::from_real_diagonal(&[p0, 1.0 - p0]);
        assert!(gen.apply(0.0, &gibbs).unwrap().norm() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let gen = GKLSGenerator::new(2).with_jump(JumpTerm::constant(decay(), 1.0));
        assert!(matches!(
            gen.apply(0.0, &ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_rate_is_reported() {
        let gen = GKLSGenerator::new(2).with_jump(JumpTerm::with_rate_fn(decay(), |t| 1.0 / t));
        assert!(matches!(
            gen.apply(0.0, &ComplexMatrix::identity(2)),
            Err(Error::RateEvaluation(_))
        ));
    }

    #[test]
    fn amplitude_damping_blocks() {
        let gamma = 0.8;
        let gen = GKLSGenerator::new(2).with_jump(JumpTerm::constant(decay(), gamma));
        let basis = HermitianBasis::gell_mann(2).unwrap();
        let blocks = assemble_superoperator(&gen, 0.0, &basis, 1e-10).unwrap();
        // oracle: Bloch equations dx = -γ/2 x, dy = -γ/2 y, dz = -γ (z - 1)
        let m0 = DMatrix::from_diagonal(&DVector::from_vec(vec![-gamma / 2.0, -gamma / 2.0, -gamma]));
        assert!((&blocks.m0 - m0).norm() < 1e-14);
        let b = DVector::from_vec(vec![0.0, 0.0, gamma / 2f64.sqrt()]);
        assert!((&blocks.b - b).norm() < 1e-14);
        assert!(blocks.trace_defect() < 1e-15);
    }

    #[test]
    fn dephasing_and_unital_blocks() {
        let gamma = 0.3;
        let basis = HermitianBasis::gell_mann(2).unwrap();
        let deph = GKLSGenerator::new(2).with_jump(JumpTerm::constant(ComplexMatrix::pauli_z(), gamma));
        let blocks = assemble_superoperator(&deph, 0.0, &basis, 1e-10).unwrap();
        let m0 = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0 * gamma, -2.0 * gamma, 0.0]));
        assert!((&blocks.m0 - m0).norm() < 1e-14);
        assert!(blocks.b.norm() < 1e-15);

        let depol = GKLSGenerator::new(2).with_jumps([
            JumpTerm::constant(ComplexMatrix::pauli_x(), gamma),
            JumpTerm::constant(ComplexMatrix::pauli_y(), gamma),
            JumpTerm::constant(ComplexMatrix::pauli_z(), gamma),
        ]);
        let blocks = assemble_superoperator(&depol, 0.0, &basis, 1e-10).unwrap();
        assert!(blocks.b.norm() < 1e-15);
    }

    struct Broken(GKLSGenerator);

    impl Liouvillian for Broken {
        fn dim(&self) -> usize {
            2
        }
        fn apply(&self, t: f64, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
            // anticommutator weight 0.4 instead of 0.5
            let mut out = DMatrix::zeros(2, 2);
            for j in self.0.jumps() {
                let l = j.operator_at(t);
                let ldl = &l.adjoint() * &l;
                let (l, s, ldl) = (l.as_dmatrix(), sigma.as_dmatrix(), ldl.as_dmatrix());
                out += l * s * l.adjoint() - (ldl * s + s * ldl) * Complex64::new(0.4, 0.0);
            }
            ComplexMatrix::from_dmatrix(out)
        }
    }

    #[test]
    fn trace_preservation_check() {
        let gen = GKLSGenerator::new(2)
            .with_static_hamiltonian(ComplexMatrix::pauli_x())
            .with_jump(JumpTerm::with_rate_fn(decay(), |t| 1.0 + t.sin().powi(2)));
        let samples: Vec<f64> = (0..10).map(|k| k as f64 * 0.37).collect();
        assert!(check_trace_preservation(&gen, &samples, 1e-10).unwrap());
        assert!(!check_trace_preservation(&Broken(gen), &samples, 1e-10).unwrap());
    }

    #[test]
    fn non_hermiticity_preserving_map_fails_assembly() {
        struct Skew;
        impl Liouvillian for Skew {
            fn dim(&self) -> usize {
                2
            }
            fn apply(&self, _t: f64, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
                Ok(&ComplexMatrix::sigma_plus() * sigma)
            }
        }
        let basis = HermitianBasis::gell_mann(2).unwrap();
        assert!(matches!(
            assemble_superoperator(&Skew, 0.0, &basis, 1e-10),
            Err(Error::ImaginaryResidue { .. })
        ));
    }

    #[test]
    fn superoperator_matches_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gen = GKLSGenerator::new(3)
            .with_static_hamiltonian(ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.5]))
            .with_jump(JumpTerm::constant(ComplexMatrix::ket_bra(3, 0, 2), 0.7))
            .with_jump(JumpTerm::with_rate_fn(ComplexMatrix::ket_bra(3, 1, 0), |t| {
                0.2 + 0.1 * t.cos()
            }));
        let basis = HermitianBasis::gell_mann(3).unwrap();
        let t = 0.9;
        let blocks = assemble_superoperator(&gen, t, &basis, 1e-10).unwrap();
        for _ in 0..5 {
            let rho = DensityMatrix::random_hs(3, &mut rng);
            let c = basis.to_coefficients(rho.matrix(), 1e-10).unwrap();
            let image = gen.apply(t, rho.matrix()).unwrap();
            let ci = basis.to_coefficients(&image, 1e-10).unwrap();
            assert!((&blocks.m * c.full() - ci.full()).norm() < 1e-12);
            assert!((blocks.traceless_rhs(&c.tilde) - &ci.tilde).norm() < 1e-12);
        }
    }

    #[test]
    fn tagged_dissipator_selects_channels() {
        let gen = GKLSGenerator::new(2)
            .with_jump(JumpTerm::constant(decay(), 1.0).tagged("hot"))
            .with_jump(JumpTerm::constant(ComplexMatrix::pauli_z(), 2.0).tagged("cold"));
        let rho = DensityMatrix::basis_state(2, 1);
        let hot = gen.dissipator(0.0, rho.matrix(), Some("hot")).unwrap();
        let cold = gen.dissipator(0.0, rho.matrix(), Some("cold")).unwrap();
        let all = gen.dissipator(0.0, rho.matrix(), None).unwrap();
        assert!((&hot + &cold).max_abs_diff(&all) < 1e-15);
        let h = ComplexMatrix::pauli_z();
        assert!(hs_inner(&h, &hot).unwrap().re.is_finite());
    }

    #[test]
    fn tabulated_interpolation() {
        let tab = Tabulated::new(0.0, 0.5, vec![0.0, 1.0, 3.0], false).unwrap();
        assert_eq!(tab.eval(-1.0), 0.0);
        assert!((tab.eval(0.25) - 0.5).abs() < 1e-15);
        assert!((tab.eval(0.75) - 2.0).abs() < 1e-15);
        assert_eq!(tab.eval(7.0), 3.0);
        let per = Tabulated::new(0.0, 0.5, vec![0.0, 1.0], true).unwrap();
        assert!((per.eval(1.25) - 0.5).abs() < 1e-15);
        assert!((per.eval(0.75) - 0.5).abs() < 1e-15);
        assert!(Tabulated::<f64>::new(0.0, 0.0, vec![1.0], false).is_err());
    }

    #[test]
    fn continuity_heuristic_flags_jumps() {
        let basis = HermitianBasis::gell_mann(2).unwrap();
        let grid: Vec<f64> = (0..41).map(|k| k as f64 * 0.05).collect();
        let smooth = GKLSGenerator::new(2).with_jump(JumpTerm::with_rate_fn(decay(), |t| 1.0 + 0.5 * t.sin()));
        let step =
            GKLSGenerator::new(2).with_jump(JumpTerm::with_rate_fn(decay(), |t| if t < 1.01 { 0.5 } else { 1.5 }));
        let s = max_superoperator_slope(&smooth, &grid, &basis, 1e-10).unwrap();
        let j = max_superoperator_slope(&step, &grid, &basis, 1e-10).unwrap();
        assert!(s < 2.0, "{s}");
        assert!(j > 10.0, "{j}");
    }
}
