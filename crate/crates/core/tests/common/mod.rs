//! Oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use lindblad_relax::generator::{GKLSGenerator, JumpTerm, Liouvillian, TimeDependent};
use lindblad_relax::operator::ComplexMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn ginibre<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(dim, rng).hermitian_part()
}

pub fn random_traceless_hermitian<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let h = random_hermitian(dim, rng);
    let shift = h.trace().re / dim as f64;
    &h - &ComplexMatrix::identity(dim).scale_real(shift)
}

pub fn random_traceless<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let shift = g.trace() / dim as f64;
    &g - &ComplexMatrix::identity(dim).scale(shift)
}

/// `a + b sin(w t + φ)` with `a > b ≥ 0`, so the rate stays positive.
pub fn random_rate<R: Rng>(rng: &mut R, floor: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let b = rng.random_range(0.0..0.5);
    let a = floor + b + rng.random_range(0.0..1.0);
    let w = rng.random_range(0.5..3.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    move |t: f64| a + b * (w * t + phase).sin()
}

fn random_hamiltonian<R: Rng>(dim: usize, rng: &mut R) -> TimeDependent<ComplexMatrix> {
    let h0 = random_hermitian(dim, rng);
    let h1 = random_hermitian(dim, rng);
    let w = rng.random_range(0.5..2.0);
    TimeDependent::function(move |t| &h0 + &h1.scale_real((w * t).cos()))
}

/// How the jump set of a random generator is arranged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpShape {
    /// Independent non-normal operators.
    General,
    /// Operators with their adjoints, each pair sharing one rate. Unital.
    BalancedPairs,
    /// Operators with their adjoints, independent rates per member.
    UnbalancedPairs,
}

pub fn random_generator<R: Rng>(
    dim: usize,
    n_jumps: usize,
    shape: JumpShape,
    floor: f64,
    rng: &mut R,
) -> GKLSGenerator {
    let mut gen = GKLSGenerator::new(dim).with_hamiltonian(random_hamiltonian(dim, rng));
    for _ in 0..n_jumps {
        let l = ginibre(dim, rng).scale_real(1.0 / (dim as f64).sqrt());
        match shape {
            JumpShape::General => gen = gen.with_jump(JumpTerm::with_rate_fn(l, random_rate(rng, floor))),
            JumpShape::BalancedPairs => {
                let r = std::sync::Arc::new(random_rate(rng, floor));
                let r2 = r.clone();
                gen = gen
                    .with_jump(JumpTerm::with_rate_fn(l.adjoint(), move |t| r2(t)))
                    .with_jump(JumpTerm::with_rate_fn(l, move |t| r(t)));
            }
            JumpShape::UnbalancedPairs => {
                gen = gen
                    .with_jump(JumpTerm::with_rate_fn(l.adjoint(), random_rate(rng, floor)))
                    .with_jump(JumpTerm::with_rate_fn(l, random_rate(rng, floor)));
            }
        }
    }
    gen
}

/// Column-stacked superoperator of `gen` at `t` from Kronecker products,
/// `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
pub fn kron_superoperator(gen: &GKLSGenerator, t: f64) -> DMatrix<Complex64> {
    let n = gen.dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    let h = gen.hamiltonian_at(t).into_dmatrix();
    let mut s = (id.kronecker(&h) - h.transpose().kronecker(&id)) * Complex64::new(0.0, -1.0);
    for (l, g) in gen.jump_set(t).unwrap() {
        let l = l.into_dmatrix();
        let ldl = l.adjoint() * &l;
        let term = l.conjugate().kronecker(&l) - (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * c(0.5);
        s += term * c(g);
    }
    s
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring with a degree-24 Taylor polynomial.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * c(0.5f64.powi(s));
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn expm_real(a: &DMatrix<f64>) -> DMatrix<f64> {
    expm(&a.map(c)).map(|z| z.re)
}

/// `ρ(t) = exp(t 𝕃) ρ0` for a static generator.
pub fn exact_static_evolution(gen: &GKLSGenerator, rho0: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = gen.dim();
    let prop = expm(&(kron_superoperator(gen, 0.0) * c(t)));
    let v = nalgebra::DVector::from_column_slice(rho0.as_dmatrix().as_slice());
    let out = prop * v;
    ComplexMatrix::from_dmatrix(DMatrix::from_column_slice(n, n, out.as_slice())).unwrap()
}

/// `Re(σ, L_t σ)` through the Kronecker superoperator.
pub fn hs_quadratic_form(gen: &GKLSGenerator, t: f64, sigma: &ComplexMatrix) -> f64 {
    let v = nalgebra::DVector::from_column_slice(sigma.as_dmatrix().as_slice());
    let lv = kron_superoperator(gen, t) * &v;
    v.dotc(&lv).re
}
