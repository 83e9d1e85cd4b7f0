//! Vectorization of operators: `|Ψ⟩⟩ = Σ_ij Ψ_ij |i⟩⊗|j⟩`.
//!
//! The row index of `Ψ` is the first tensor factor, matching
//! [`ComplexMatrix::kron`]. With that pairing the local-action identity
//! `(A ⊗ B)|C⟩⟩ = |A C Bᵀ⟩⟩` holds; `apply_local` is tested against the
//! Kronecker route so the two conventions cannot drift apart.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Svd, SystemDims, ONE, ZERO};
use crate::tolerances::TOL_NORM;

/// A vector of `H_A ⊗ H_B` together with the factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleKet {
    vector: ComplexMatrix,
    dims: SystemDims,
}

impl DoubleKet {
    pub fn new(vector: ComplexMatrix, dims: SystemDims) -> Result<Self> {
        if vector.shape() != (dims.total(), 1) {
            return Err(Error::mismatch(
                "DoubleKet",
                format!("vector of shape {:?} for a {dims} system", vector.shape()),
            ));
        }
        Ok(Self { vector, dims })
    }

    pub fn vector(&self) -> &ComplexMatrix {
        &self.vector
    }

    pub fn dims(&self) -> SystemDims {
        self.dims
    }

    pub fn norm(&self) -> f64 {
        self.vector.frobenius_norm()
    }

    /// The `d_a × d_b` matrix with the same entries, no normalization check.
    pub fn reshape(&self) -> ComplexMatrix {
        unvectorize(&self.vector, self.dims)
    }
}

/// Unit Hilbert-Schmidt-norm operator `Γ: H_B → H_A` with its SVD cached.
#[derive(Debug, Clone)]
pub struct GammaOperator {
    matrix: ComplexMatrix,
    svd: Svd,
}

impl PartialEq for GammaOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl GammaOperator {
    /// Accepts `matrix` only if `Tr(Γ†Γ)` is within 1e-9 of one.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let norm_sq = matrix.frobenius_norm().powi(2);
        if (norm_sq - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized {
                norm: norm_sq.sqrt(),
            });
        }
        let svd = matrix.svd();
        Ok(Self { matrix, svd })
    }

    /// Rescales `matrix` to unit Hilbert-Schmidt norm.
    pub fn normalized(matrix: &ComplexMatrix) -> Result<Self> {
        let norm = matrix.frobenius_norm();
        if norm == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        Self::new(matrix.scale_real(1.0 / norm))
    }

    /// `I_d / √d`, the maximally entangled seed.
    pub fn maximally_entangled(d: usize) -> Self {
        Self::new(ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt()))
            .expect("identity/sqrt(d) has unit norm")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> SystemDims {
        SystemDims {
            d_a: self.matrix.rows(),
            d_b: self.matrix.cols(),
        }
    }

    pub fn svd(&self) -> &Svd {
        &self.svd
    }

    /// Descending singular values (Schmidt coefficients of `|Γ⟩⟩`).
    pub fn singular_values(&self) -> &[f64] {
        &self.svd.singular_values
    }

    pub fn rank(&self, tol_rank: f64) -> usize {
        self.svd.rank(tol_rank)
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.svd.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Row-major flattening into a column: entry `i·d_b + j` is `m[i][j]`.
pub fn vectorize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::column(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &ComplexMatrix, dims: SystemDims) -> ComplexMatrix {
    assert_eq!(v.shape(), (dims.total(), 1), "unvectorize: wrong length");
    ComplexMatrix::from_fn(dims.d_a, dims.d_b, |i, j| v[(i * dims.d_b + j, 0)])
}

/// `|Γ⟩⟩`.
pub fn vec(g: &GammaOperator) -> DoubleKet {
    DoubleKet {
        vector: vectorize(g.matrix()),
        dims: g.dims(),
    }
}

/// `Γ` from `|Γ⟩⟩`; rejects vectors that are not unit length.
pub fn unvec(k: &DoubleKet) -> Result<GammaOperator> {
    GammaOperator::new(k.reshape())
}

/// Swap `E(|a⟩⊗|b⟩) = |b⟩⊗|a⟩` on `H_d ⊗ H_d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (a, b) = (col / d, col % d);
        if row == b * d + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// `(A ⊗ B)|Γ⟩⟩` computed as `|A Γ Bᵀ⟩⟩`.
pub fn apply_local(a: &ComplexMatrix, b: &ComplexMatrix, g: &GammaOperator) -> Result<DoubleKet> {
    apply_local_raw(a, b, g.matrix())
}

pub(crate) fn apply_local_raw(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    gamma: &ComplexMatrix,
) -> Result<DoubleKet> {
    let out = a.matmul(gamma)?.matmul(&b.transpose())?;
    let dims = SystemDims {
        d_a: out.rows(),
        d_b: out.cols(),
    };
    Ok(DoubleKet {
        vector: vectorize(&out),
        dims,
    })
}
