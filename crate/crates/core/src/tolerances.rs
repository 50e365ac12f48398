use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity of operators and superoperator imaginary residues.
    pub herm: f64,
    /// Orthonormality of basis elements.
    pub orth: f64,
    /// Trace of states.
    pub trace: f64,
    /// Smallest admissible eigenvalue of a state (negated).
    pub psd: f64,
    /// First row of the superoperator (trace preservation).
    pub tp: f64,
    /// Adjoint matching inside jump sets.
    pub comm: f64,
    /// Relative singular-value cut for the commutant nullspace.
    pub sigma_cut: f64,
    /// Absolute slack of the Grönwall envelope check.
    pub env: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            orth: 1e-10,
            trace: 1e-9,
            psd: 1e-8,
            tp: 1e-10,
            comm: 1e-10,
            sigma_cut: 1e-8,
            env: 1e-8,
        }
    }
}
