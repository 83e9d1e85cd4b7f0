//! Numerical tolerances shared by every module.
//!
//! Discrete verdicts (rank, compatibility, support inclusion) are all decided
//! against the values held here so that a report can echo one record and be
//! replayed exactly.

use serde::{Deserialize, Serialize};

/// Default Hermiticity tolerance, `‖A − A†‖_F`.
pub const TOL_HERM: f64 = 1e-9;
/// Default factorization residual tolerance.
pub const TOL_RECON: f64 = 1e-9;
/// Singular values and eigenvalues above this count toward rank.
pub const TOL_RANK: f64 = 1e-7;
/// Commutator norm at or below which two properties are compatible.
pub const TOL_COMPAT: f64 = 1e-9;
/// Residual at or below which a state's support lies inside a subspace.
pub const TOL_SUPPORT: f64 = 1e-9;
/// Allowed deviation of `Tr(Γ†Γ)` (and of a state's trace) from one.
pub const TOL_NORM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_herm: f64,
    pub tol_recon: f64,
    pub tol_rank: f64,
    pub tol_compat: f64,
    pub tol_support: f64,
    pub tol_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_herm: TOL_HERM,
            tol_recon: TOL_RECON,
            tol_rank: TOL_RANK,
            tol_compat: TOL_COMPAT,
            tol_support: TOL_SUPPORT,
            tol_norm: TOL_NORM,
        }
    }
}

impl Tolerances {
    /// Returns a copy with a different rank threshold.
    pub fn with_rank(mut self, tol_rank: f64) -> Self {
        self.tol_rank = tol_rank;
        self
    }

    /// All values must be finite and strictly positive.
    pub fn is_valid(&self) -> bool {
        [
            self.tol_herm,
            self.tol_recon,
            self.tol_rank,
            self.tol_compat,
            self.tol_support,
            self.tol_norm,
        ]
        .iter()
        .all(|t| t.is_finite() && *t > 0.0)
    }
}
