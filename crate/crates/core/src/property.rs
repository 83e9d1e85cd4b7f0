//! Properties as orthogonal projectors, and the judgments built on them:
//! nontriviality, compatibility, mutual exclusivity, and whether a state
//! has, lacks, or leaves meaningless a property.

use serde::Serialize;

use crate::doubleket::swap_operator;
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, ComplexMatrix};
use crate::tolerances::Tolerances;

/// An orthogonal projector with its rank cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Property {
    /// Validates `matrix` as a Hermitian idempotent with spectrum in {0, 1}.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidProperty(format!(
                "{}x{} matrix is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_defect();
        if herm > tol.tol_herm {
            return Err(Error::InvalidProperty(format!(
                "Hermiticity defect {herm:.3e} exceeds {:.1e}",
                tol.tol_herm
            )));
        }
        let matrix = matrix.hermitian_part();
        let idem = (&matrix * &matrix).distance(&matrix);
        if idem > tol.tol_recon {
            return Err(Error::InvalidProperty(format!(
                "idempotency defect {idem:.3e} exceeds {:.1e}",
                tol.tol_recon
            )));
        }
        let eig = matrix.eigh(tol.tol_herm)?;
        let mut rank = 0;
        for &l in &eig.eigenvalues {
            if (l - 1.0).abs() <= tol.tol_rank {
                rank += 1;
            } else if l.abs() > tol.tol_rank {
                return Err(Error::InvalidProperty(format!(
                    "eigenvalue {l} is neither 0 nor 1"
                )));
            }
        }
        Ok(Self { matrix, rank })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    /// Projector onto the span of the given column vectors.
    ///
    /// Linearly dependent input is fine. An empty or all-zero list yields the
    /// zero property, which [`Property::is_zero`] flags.
    pub fn from_span(vectors: &[ComplexMatrix], dim: usize, tol: &Tolerances) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.shape() != (dim, 1)) {
            return Err(Error::mismatch(
                "property_from_span",
                format!("vector of shape {:?} in dimension {dim}", bad.shape()),
            ));
        }
        let basis = orthonormalize(vectors, tol.tol_rank);
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for b in &basis {
            matrix = &matrix + &ComplexMatrix::outer(b, b);
        }
        Ok(Self {
            matrix,
            rank: basis.len(),
        })
    }

    /// `V_r V_r†` for a matrix whose first `rank` columns are orthonormal.
    pub(crate) fn from_orthonormal_columns(cols: &ComplexMatrix, rank: usize) -> Self {
        let v = cols.leading_cols(rank);
        Self {
            matrix: (&v * &v.adjoint()).hermitian_part(),
            rank,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// `0 < P < I`.
    pub fn is_nontrivial(&self) -> bool {
        self.rank > 0 && self.rank < self.dim()
    }

    /// `I − P`.
    pub fn complement(&self) -> Property {
        Self {
            matrix: &ComplexMatrix::identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }

    /// Entry-wise transpose, again a projector of the same rank.
    pub fn transpose(&self) -> Property {
        Self {
            matrix: self.matrix.transpose(),
            rank: self.rank,
        }
    }

    /// `P ⊗ Q` as a property of the composite system.
    pub fn tensor(&self, other: &Property) -> Property {
        Self {
            matrix: self.matrix.kron(&other.matrix),
            rank: self.rank * other.rank,
        }
    }

    fn check_same_dim(&self, other: &Property, op: &'static str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::mismatch(
                op,
                format!("dimensions {} and {}", self.dim(), other.dim()),
            ));
        }
        Ok(())
    }

    /// Compatibility is commutation, decided on `‖PQ − QP‖_F`.
    pub fn compatible(&self, other: &Property, tol: &Tolerances) -> Result<Compatibility> {
        self.check_same_dim(other, "compatible")?;
        let commutator_norm = self.matrix.commutator(&other.matrix).frobenius_norm();
        Ok(Compatibility {
            compatible: commutator_norm <= tol.tol_compat,
            commutator_norm,
        })
    }

    /// `PQ` when it is itself a property, i.e. when `P` and `Q` commute.
    pub fn product_if_property(&self, other: &Property, tol: &Tolerances) -> Option<Property> {
        if !self.compatible(other, tol).ok()?.compatible {
            return None;
        }
        let pq = &self.matrix * &other.matrix;
        Property::new(pq, tol).ok()
    }

    /// `PQ = QP = 0`.
    pub fn mutually_exclusive(&self, other: &Property, tol: &Tolerances) -> Result<bool> {
        self.check_same_dim(other, "mutually_exclusive")?;
        let pq = (&self.matrix * &other.matrix).frobenius_norm();
        let qp = (&other.matrix * &self.matrix).frobenius_norm();
        Ok(pq <= tol.tol_compat && qp <= tol.tol_compat)
    }

    /// Whether `state` has this property, lacks it, or leaves it meaningless.
    pub fn check(&self, state: &State, tol: &Tolerances) -> Result<PropertyCheck> {
        if self.dim() != state.dim() {
            return Err(Error::mismatch(
                "has_property",
                format!("property dimension {} vs state {}", self.dim(), state.dim()),
            ));
        }
        let rho = state.matrix();
        let inside = (&(&self.matrix * rho) * &self.matrix).distance(rho);
        let not_p = self.complement();
        let outside = (&(&not_p.matrix * rho) * &not_p.matrix).distance(rho);
        let verdict = if inside <= tol.tol_support {
            Verdict::Has
        } else if outside <= tol.tol_support {
            Verdict::HasNot
        } else {
            Verdict::Meaningless
        };
        Ok(PropertyCheck {
            verdict,
            probability: (&self.matrix * rho).trace().re,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Compatibility {
    pub compatible: bool,
    pub commutator_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Has,
    HasNot,
    Meaningless,
}

/// Verdict plus `Tr(Pρ)`. The probability is informational only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub verdict: Verdict,
    pub probability: f64,
}

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    matrix: ComplexMatrix,
}

impl State {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let eig = matrix
            .eigh(tol.tol_herm)
            .map_err(|e| Error::InvalidState(e.to_string()))?;
        if let Some(&low) = eig.eigenvalues.first() {
            if low < -tol.tol_rank {
                return Err(Error::InvalidState(format!("negative eigenvalue {low}")));
            }
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol.tol_norm {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// `|ψ⟩⟨ψ|` for a column vector, normalized first.
    pub fn pure(psi: &ComplexMatrix) -> Result<Self> {
        if psi.cols() != 1 {
            return Err(Error::InvalidState("expected a column vector".into()));
        }
        let norm = psi.frobenius_norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let unit = psi.scale_real(1.0 / norm);
        Ok(Self {
            matrix: ComplexMatrix::outer(&unit, &unit),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// `(I + E)/2` on `H_d ⊗ H_d`: the symmetric subspace.
pub fn symmetric_projector(d: usize, tol: &Tolerances) -> Result<Property> {
    if d < 2 {
        return Err(Error::InvalidDims(format!(
            "symmetric projector needs d >= 2, got {d}"
        )));
    }
    let e = swap_operator(d);
    let p = (&ComplexMatrix::identity(d * d) + &e).scale_real(0.5);
    Property::new(p, tol)
}
