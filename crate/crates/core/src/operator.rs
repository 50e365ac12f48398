//! Dense complex operators on a finite-dimensional Hilbert space.
//!
//! [`ComplexMatrix`] is the carrier for Hamiltonians, jump operators and
//! states. The Hilbert–Schmidt product `(A, B) = tr(A†B)` turns the operator
//! space into a Euclidean space; [`HermitianBasis`] is an orthonormal basis of
//! it made of Hermitian matrices with the scaled identity first, so that every
//! Hermitian operator has real coordinates.

use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, Tolerances};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Diagonal matrix with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Build from row-major rows; fails unless the rows form a square array
    /// of finite numbers.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument("non-finite matrix entry".into()));
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// `|i⟩⟨j|` in a `dim`-dimensional space.
    pub fn ket_bra(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[(i, j)] = ONE;
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_fn(2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn pauli_y() -> Self {
        let mut m = Self::zeros(2);
        m.0[(0, 1)] = -I;
        m.0[(1, 0)] = I;
        m
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0])
    }

    /// Spin raising operator `|+1⟩⟨−1|`, with `|+1⟩` the first basis vector.
    pub fn sigma_plus() -> Self {
        Self::ket_bra(2, 0, 1)
    }

    /// Spin lowering operator `|−1⟩⟨+1|`.
    pub fn sigma_minus() -> Self {
        Self::ket_bra(2, 1, 0)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Frobenius (Hilbert–Schmidt) norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self(&self.0 * z)
    }

    pub fn scale_real(&self, x: f64) -> Self {
        Self(self.0.map(|z| z * x))
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Hilbert–Schmidt inner product `tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    a.check_same_dim(b)?;
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    Ok(ComplexMatrix(&a.0 * &b.0 - &b.0 * &a.0))
}

/// `{A, B} = AB + BA`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    Ok(ComplexMatrix(&a.0 * &b.0 + &b.0 * &a.0))
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Map any integer site label onto `1..=n_sites` with periodic wrap.
pub fn wrap_site(site: i64, n_sites: usize) -> usize {
    let n = n_sites as i64;
    ((site - 1).rem_euclid(n) + 1) as usize
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` with `op` on `site` (1-based) of a chain of
/// `n_sites` identical local spaces.
pub fn embed_site(op: &ComplexMatrix, site: usize, n_sites: usize) -> Result<ComplexMatrix> {
    if site == 0 || site > n_sites {
        return Err(Error::InvalidArgument(format!("site {site} outside 1..={n_sites}")));
    }
    let local = op.dim();
    let left = local.pow((site - 1) as u32);
    let right = local.pow((n_sites - site) as u32);
    Ok(tensor(
        &tensor(&ComplexMatrix::identity(left), op),
        &ComplexMatrix::identity(right),
    ))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    let defect = a.hermiticity_defect();
    if defect > tol * a.norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let mut eig: Vec<f64> = a.hermitian_part().0.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `½ Σ |λ(ρ − σ)|`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    rho.check_same_dim(sigma)?;
    let diff = rho - sigma;
    let eig = hermitian_eigenvalues(&diff, 1e-8)?;
    Ok(0.5 * eig.iter().map(|x| x.abs()).sum::<f64>())
}

/// A validated quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol.herm {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eigenvalues(&matrix, tol.herm)?[0];
        if min < -tol.psd {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(matrix))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// `|k⟩⟨k|` in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        Self(ComplexMatrix::ket_bra(dim, k, k))
    }

    /// Hilbert–Schmidt-uniform random state: `GG†/tr(GG†)` with `G` a complex
    /// Ginibre matrix.
    pub fn random_hs<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        });
        let w = &g * g.adjoint();
        let tr = w.trace().re;
        let rho = w.map(|z| z / tr);
        Self(ComplexMatrix(rho).hermitian_part())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Coordinates of a Hermitian operator in a [`HermitianBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    /// Coefficient of `1/√N`; equals `1/√N` for states.
    pub c0: f64,
    /// Coefficients of the traceless elements.
    pub tilde: DVector<f64>,
}

impl CoefficientVector {
    pub fn full(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.tilde.len() + 1);
        v[0] = self.c0;
        v.rows_mut(1, self.tilde.len()).copy_from(&self.tilde);
        v
    }
}

/// Orthonormal Hermitian basis `F_0 = 1/√N, F_1, …, F_{N²−1}`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    // nonzero entries per element, for fast expansion and projection
    entries: Vec<Vec<(usize, usize, Complex64)>>,
}

impl HermitianBasis {
    /// Generalized Gell-Mann basis: identity, then the symmetric,
    /// antisymmetric and diagonal families. For `N = 2` this is
    /// `{1, σx, σy, σz}/√2`.
    pub fn gell_mann(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "basis needs Hilbert dimension >= 2, got {dim}"
            )));
        }
        let n = dim;
        let mut elements = Vec::with_capacity(n * n);
        elements.push(ComplexMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt()));
        let s = 1.0 / SQRT_2;
        for j in 0..n {
            for k in (j + 1)..n {
                let mut m = ComplexMatrix::zeros(n);
                m.0[(j, k)] = Complex64::new(s, 0.0);
                m.0[(k, j)] = Complex64::new(s, 0.0);
                elements.push(m);
            }
        }
        for j in 0..n {
            for k in (j + 1)..n {
                let mut m = ComplexMatrix::zeros(n);
                m.0[(j, k)] = Complex64::new(0.0, -s);
                m.0[(k, j)] = Complex64::new(0.0, s);
                elements.push(m);
            }
        }
        for l in 1..n {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut diag = vec![0.0; n];
            for d in diag.iter_mut().take(l) {
                *d = norm;
            }
            diag[l] = -(l as f64) * norm;
            elements.push(ComplexMatrix::from_real_diagonal(&diag));
        }
        Ok(Self::from_validated(n, elements))
    }

    /// Validate an arbitrary candidate basis.
    pub fn from_elements(elements: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        let n = first.dim();
        if elements.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: elements.len(),
            });
        }
        let id = ComplexMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt());
        if first.max_abs_diff(&id) > tol {
            return Err(Error::InvalidArgument("first element must be 1/sqrt(N)".into()));
        }
        for (a, fa) in elements.iter().enumerate() {
            if !fa.is_hermitian(tol) {
                return Err(Error::NotHermitian(fa.hermiticity_defect()));
            }
            for (b, fb) in elements.iter().enumerate().skip(a) {
                let g = hs_inner(fa, fb)?;
                let target = if a == b { ONE } else { ZERO };
                if (g - target).norm() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "elements {a} and {b} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self::from_validated(n, elements))
    }

    /// An orthonormal Hermitian basis obtained by Gram–Schmidt from random
    /// traceless Hermitian matrices. Used to check basis independence.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let gm = Self::gell_mann(dim)?;
        let d = dim * dim;
        // random orthogonal mix of the traceless Gell-Mann coordinates
        let mut q: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
        while q.len() < d - 1 {
            let mut v = DVector::from_fn(d - 1, |_, _| StandardNormal.sample(rng));
            for u in &q {
                let p = u.dot(&v);
                v -= u * p;
            }
            let nv = v.norm();
            if nv > 1e-6 {
                q.push(v / nv);
            }
        }
        let mut elements = vec![gm.elements[0].clone()];
        for v in &q {
            let mut m = ComplexMatrix::zeros(dim);
            for (k, c) in v.iter().enumerate() {
                m = &m + &gm.elements[k + 1].scale_real(*c);
            }
            elements.push(m.hermitian_part());
        }
        Self::from_elements(elements, 1e-10)
    }

    fn from_validated(dim: usize, elements: Vec<ComplexMatrix>) -> Self {
        let entries = elements
            .iter()
            .map(|m| {
                let mut e = Vec::new();
                for i in 0..dim {
                    for j in 0..dim {
                        let z = m.0[(i, j)];
                        if z != ZERO {
                            e.push((i, j, z));
                        }
                    }
                }
                e
            })
            .collect();
        Self { dim, elements, entries }
    }

    /// Hilbert-space dimension `N`.
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    /// Number of elements `d = N²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// `tr(F_n† A)` for every element.
    pub fn project(&self, a: &ComplexMatrix) -> Vec<Complex64> {
        self.entries
            .iter()
            .map(|e| e.iter().map(|&(i, j, z)| z.conj() * a.0[(i, j)]).sum())
            .collect()
    }

    /// Real projections of the traceless elements, written into `out`.
    /// `a` must be Hermitian for the result to be meaningful.
    pub fn project_traceless_real(&self, a: &ComplexMatrix, out: &mut [f64]) {
        for (slot, e) in out.iter_mut().zip(self.entries.iter().skip(1)) {
            *slot = e.iter().map(|&(i, j, z)| (z.conj() * a.0[(i, j)]).re).sum();
        }
    }

    /// `c0·F_0 + Σ tilde_j F_j`.
    pub fn expand(&self, c0: f64, tilde: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        let coeffs = std::iter::once(c0).chain(tilde.iter().copied());
        for (c, e) in coeffs.zip(self.entries.iter()) {
            if c == 0.0 {
                continue;
            }
            for &(i, j, z) in e {
                m.0[(i, j)] += z * c;
            }
        }
        m
    }

    pub fn to_coefficients(&self, rho: &ComplexMatrix, tol: f64) -> Result<CoefficientVector> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        let c = self.project(rho);
        let residue = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if residue > tol * rho.norm().max(1.0) {
            return Err(Error::NotHermitian(residue));
        }
        Ok(CoefficientVector {
            c0: c[0].re,
            tilde: DVector::from_iterator(c.len() - 1, c[1..].iter().map(|z| z.re)),
        })
    }

    pub fn from_coefficients(&self, c: &CoefficientVector) -> Result<ComplexMatrix> {
        if c.tilde.len() + 1 != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len() - 1,
                found: c.tilde.len(),
            });
        }
        Ok(self.expand(c.c0, c.tilde.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(dim, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)));
        m.hermitian_part()
    }

    #[test]
    fn hs_inner_pauli_normalization() {
        let x = ComplexMatrix::pauli_x();
        let y = ComplexMatrix::pauli_y();
        assert!((hs_inner(&x, &x).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        assert!(hs_inner(&x, &y).unwrap().norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::random_hs(2, &mut rng);
        let f0 = ComplexMatrix::identity(2).scale_real(1.0 / SQRT_2);
        let v = hs_inner(&f0, rho.matrix()).unwrap();
        assert!((v - c(1.0 / SQRT_2, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hs_inner_rejects_mismatch() {
        let err = hs_inner(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(err, Err(Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn qubit_basis_is_normalized_pauli() {
        let b = HermitianBasis::gell_mann(2).unwrap();
        let expected = [
            ComplexMatrix::identity(2),
            ComplexMatrix::pauli_x(),
            ComplexMatrix::pauli_y(),
            ComplexMatrix::pauli_z(),
        ];
        for (f, e) in b.elements().iter().zip(expected.iter()) {
            assert!(f.max_abs_diff(&e.scale_real(1.0 / SQRT_2)) < 1e-15);
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        for n in 2..=5 {
            let b = HermitianBasis::gell_mann(n).unwrap();
            assert_eq!(b.len(), n * n);
            for (i, fi) in b.elements().iter().enumerate() {
                assert!(fi.is_hermitian(0.0));
                if i > 0 {
                    assert!(fi.trace().norm() < 1e-14);
                }
                for (j, fj) in b.elements().iter().enumerate() {
                    let g = hs_inner(fi, fj).unwrap();
                    let t = if i == j { 1.0 } else { 0.0 };
                    assert!((g - c(t, 0.0)).norm() < 1e-10, "N={n} ({i},{j}) {g}");
                }
            }
        }
        assert!(HermitianBasis::gell_mann(1).is_err());
    }

    #[test]
    fn random_basis_validates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = HermitianBasis::random(3, &mut rng).unwrap();
        assert_eq!(b.len(), 9);
    }

    #[test]
    fn coefficients_of_simple_states() {
        let b = HermitianBasis::gell_mann(2).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        let cm = b.to_coefficients(mixed.matrix(), 1e-10).unwrap();
        assert!((cm.c0 - 1.0 / SQRT_2).abs() < 1e-15);
        assert!(cm.tilde.norm() < 1e-15);

        let up = DensityMatrix::basis_state(2, 0);
        let cu = b.to_coefficients(up.matrix(), 1e-10).unwrap();
        // |0><0| = (1 + σz)/2
        let expected = [1.0 / SQRT_2, 0.0, 0.0, 1.0 / SQRT_2];
        for (x, e) in cu.full().iter().zip(expected) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let b = HermitianBasis::gell_mann(2).unwrap();
        let a = ComplexMatrix::sigma_plus();
        assert!(matches!(b.to_coefficients(&a, 1e-10), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn commutator_tensor_embed() {
        let xy = commutator(&ComplexMatrix::pauli_x(), &ComplexMatrix::pauli_y()).unwrap();
        assert!(xy.max_abs_diff(&ComplexMatrix::pauli_z().scale(c(0.0, 2.0))) < 1e-15);
        let t = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::pauli_z());
        assert_eq!(t.dim(), 4);
        let z3 = embed_site(&ComplexMatrix::pauli_z(), 3, 3).unwrap();
        let id = ComplexMatrix::identity(2);
        let expected = tensor(&tensor(&id, &id), &ComplexMatrix::pauli_z());
        assert_eq!(z3, expected);
        assert!(embed_site(&ComplexMatrix::pauli_z(), 4, 3).is_err());
        assert_eq!(wrap_site(0, 3), 3);
        assert_eq!(wrap_site(4, 3), 1);
        assert_eq!(wrap_site(2, 3), 2);
    }

    #[test]
    fn eigenvalues_simple() {
        assert_eq!(
            hermitian_eigenvalues(&ComplexMatrix::pauli_z(), 1e-10).unwrap(),
            vec![-1.0, 1.0]
        );
        let d = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let e = hermitian_eigenvalues(&d, 1e-10).unwrap();
        for (x, y) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(matches!(
            hermitian_eigenvalues(&ComplexMatrix::sigma_plus(), 1e-10),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn eigenvalue_sum_is_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 5, 9, 16] {
            let h = random_hermitian(dim, &mut rng);
            let s: f64 = hermitian_eigenvalues(&h, 1e-10).unwrap().iter().sum();
            assert!((s - h.trace().re).abs() < 1e-10 * dim as f64);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let p0 = DensityMatrix::basis_state(2, 0);
        let p1 = DensityMatrix::basis_state(2, 1);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((trace_distance(p0.matrix(), p1.matrix()).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(p0.matrix(), p0.matrix()).unwrap().abs() < 1e-14);
        assert!((trace_distance(p0.matrix(), mixed.matrix()).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        let tol = Tolerances::default();
        assert!(DensityMatrix::new(ComplexMatrix::identity(2), &tol).is_err());
        let bad = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(bad, &tol), Err(Error::InvalidState(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = DensityMatrix::random_hs(4, &mut rng);
        assert!(DensityMatrix::new(r.matrix().clone(), &tol).is_ok());
    }
}
