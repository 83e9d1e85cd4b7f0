//! Holistic joint properties `Π = |Γ⟩⟩⟨⟨Γ|` and their analytic certification.
//!
//! For projectors `P` on `H_A` and `Q` on `H_B`, `P ⊗ Q` commutes with `Π`
//! exactly when `PΓQᵀ = cΓ` for some scalar `c`, and idempotency pins
//! `c ∈ {0, 1}`:
//!
//! * `c = 1` (co-occurring): `range(Γ) ⊆ range(P)` and the row support of `Γ`
//!   lies in `range(Qᵀ)`. The smallest such pair is read off the SVD, so the
//!   question reduces to comparing `rank(Γ)` with `d_a` and `d_b`.
//! * `c = 0` (mutually exclusive): always solvable with both factors
//!   nontrivial once `d_a, d_b ≥ 2`.
//!
//! The certifier reports both branches. A `Γ` is called holistic when the
//! `c = 1` branch has no solution under the chosen nontriviality convention.

use serde::{Deserialize, Serialize};

use crate::doubleket::{apply_local_raw, vec, vectorize, GammaOperator};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Side, SystemDims};
use crate::property::Property;
use crate::random::{ginibre, stream_rng};
use crate::tolerances::Tolerances;

/// Which factors of `P ⊗ Q` must be nontrivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    AtLeastOneNontrivial,
    BothNontrivial,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::AtLeastOneNontrivial, Convention::BothNontrivial];

    pub fn admits(self, p_nontrivial: bool, q_nontrivial: bool) -> bool {
        match self {
            Convention::AtLeastOneNontrivial => p_nontrivial || q_nontrivial,
            Convention::BothNontrivial => p_nontrivial && q_nontrivial,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::AtLeastOneNontrivial => "at_least_one_nontrivial",
            Convention::BothNontrivial => "both_nontrivial",
        }
    }
}

/// A property of the parts, `P ⊗ Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductProperty {
    p: Property,
    q: Property,
    convention: Convention,
}

impl ProductProperty {
    pub fn new(p: Property, q: Property, convention: Convention) -> Result<Self> {
        if !convention.admits(p.is_nontrivial(), q.is_nontrivial()) {
            return Err(Error::Nontriviality(convention.name()));
        }
        Ok(Self { p, q, convention })
    }

    pub fn p(&self) -> &Property {
        &self.p
    }

    pub fn q(&self) -> &Property {
        &self.q
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn dims(&self) -> SystemDims {
        SystemDims {
            d_a: self.p.dim(),
            d_b: self.q.dim(),
        }
    }

    /// `P ⊗ Q` on the composite space.
    pub fn joint(&self) -> Property {
        self.p.tensor(&self.q)
    }
}

/// A witness pair together with its replayed commutator norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub pair: ProductProperty,
    pub commutator_norm: f64,
    /// `‖PΓQᵀ‖_F`.
    pub cooccurrence_weight: f64,
}

/// Outcome of [`certify_rank1`].
#[derive(Debug, Clone, PartialEq)]
pub struct HolismVerdict {
    /// Nontrivial `(P, Q)` with `PΓQᵀ = Γ`, if any.
    pub lambda1_witness: Option<Witness>,
    /// Nontrivial `(P, Q)` with `PΓQᵀ = 0`, if any.
    pub lambda0_witness: Option<Witness>,
    /// No co-occurring product property exists.
    pub holistic: bool,
    /// No commuting nontrivial product property of either kind exists.
    pub strictly_no_commuting_product: bool,
    pub rank_of_gamma: usize,
    pub dims: SystemDims,
    pub convention: Convention,
}

impl HolismVerdict {
    pub fn witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.lambda1_witness.iter().chain(self.lambda0_witness.iter())
    }

    /// Largest replayed commutator norm over the reported witnesses.
    pub fn worst_replay(&self) -> f64 {
        self.witnesses()
            .map(|w| w.commutator_norm)
            .fold(0.0, f64::max)
    }
}

/// Both evaluations of `‖[P ⊗ Q, |Γ⟩⟩⟨⟨Γ|]‖_F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorReplay {
    /// From the explicit Kronecker product and the 4-index commutator.
    pub direct: f64,
    /// From `‖X − X†‖_F` with `X = |PΓQᵀ⟩⟩⟨⟨Γ|`, i.e. twice the operator
    /// imaginary part of `(P ⊗ Q)Π`.
    pub local_action: f64,
}

impl CommutatorReplay {
    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.local_action).abs()
    }
}

/// `|Γ⟩⟩⟨⟨Γ|`.
pub fn make_holistic(g: &GammaOperator) -> Property {
    let v = vec(g);
    let matrix = ComplexMatrix::outer(v.vector(), v.vector());
    Property::new(matrix, &Tolerances::default()).expect("unit-vector dyad is a rank-1 projector")
}

fn check_dims(g: &GammaOperator, p: &Property, q: &Property) -> Result<()> {
    let dims = g.dims();
    if p.dim() != dims.d_a || q.dim() != dims.d_b {
        return Err(Error::mismatch(
            "product_commutator_norm",
            format!("P on {}, Q on {} against Γ of {dims}", p.dim(), q.dim()),
        ));
    }
    Ok(())
}

/// Replays the commutator of `P ⊗ Q` with `|Γ⟩⟩⟨⟨Γ|` along both routes.
pub fn commutator_replay(g: &GammaOperator, p: &Property, q: &Property) -> Result<CommutatorReplay> {
    check_dims(g, p, q)?;
    let pi = make_holistic(g);
    let direct = p
        .matrix()
        .kron(q.matrix())
        .commutator(pi.matrix())
        .frobenius_norm();

    let moved = apply_local_raw(p.matrix(), q.matrix(), g.matrix())?;
    let x = ComplexMatrix::outer(moved.vector(), vec(g).vector());
    let local_action = (&x - &x.adjoint()).frobenius_norm();
    Ok(CommutatorReplay {
        direct,
        local_action,
    })
}

/// `‖[P ⊗ Q, |Γ⟩⟩⟨⟨Γ|]‖_F`.
pub fn product_commutator_norm(g: &GammaOperator, pp: &ProductProperty) -> Result<f64> {
    Ok(commutator_replay(g, pp.p(), pp.q())?.direct)
}

/// `PΓQᵀ`.
pub fn sandwich(g: &GammaOperator, p: &Property, q: &Property) -> ComplexMatrix {
    &(p.matrix() * g.matrix()) * &q.matrix().transpose()
}

/// `min_{c ∈ {0,1}} ‖PΓQᵀ − cΓ‖_F`.
pub fn cooccurrence_residual(g: &GammaOperator, p: &Property, q: &Property) -> f64 {
    let s = sandwich(g, p, q);
    s.frobenius_norm().min(s.distance(g.matrix()))
}

fn witness(g: &GammaOperator, pair: ProductProperty) -> Witness {
    let replay = commutator_replay(g, pair.p(), pair.q()).expect("witness dims match Γ");
    let cooccurrence_weight = sandwich(g, pair.p(), pair.q()).frobenius_norm();
    Witness {
        pair,
        commutator_norm: replay.direct,
        cooccurrence_weight,
    }
}

/// Minimal co-occurring pair `P = U_r U_r†`, `Qᵀ = V_r V_r†`.
fn lambda1_pair(g: &GammaOperator, rank: usize) -> (Property, Property) {
    let svd = g.svd();
    let p = Property::from_orthonormal_columns(&svd.u, rank);
    let q_t = Property::from_orthonormal_columns(&svd.v, rank);
    (p, q_t.transpose())
}

/// Mutually exclusive pair: `Q = |e_k⟩⟨e_k|` for the first canonical `e_k`
/// with `Γe_k ≠ 0`, and `P` the projector orthogonal to `Γe_k`.
fn lambda0_pair(g: &GammaOperator, tol: &Tolerances) -> Option<(Property, Property)> {
    let SystemDims { d_a, d_b } = g.dims();
    if d_a < 2 || d_b < 2 {
        return None;
    }
    let column = (0..d_b)
        .map(|k| (k, g.matrix().col(k)))
        .find(|(_, c)| c.frobenius_norm() > tol.tol_rank);
    let (k, image) = match column {
        Some(found) => found,
        None => {
            let e0 = |d| Property::from_span(&[ComplexMatrix::basis(d, 0)], d, tol).ok();
            return Some((e0(d_a)?, e0(d_b)?));
        }
    };
    let q = Property::from_span(&[ComplexMatrix::basis(d_b, k)], d_b, tol).ok()?;
    let p = Property::from_span(&[image], d_a, tol).ok()?.complement();
    Some((p, q))
}

/// Decides whether `|Γ⟩⟩⟨⟨Γ|` admits co-occurring and mutually exclusive
/// nontrivial product properties, with explicit witnesses for each.
pub fn certify_rank1(g: &GammaOperator, convention: Convention, tol: &Tolerances) -> HolismVerdict {
    let dims = g.dims();
    // The top singular value of a unit-norm Γ is at least 1/√min(d_a, d_b).
    let rank = g.rank(tol.tol_rank).max(1);

    let lambda1_witness = convention
        .admits(rank < dims.d_a, rank < dims.d_b)
        .then(|| {
            let (p, q) = lambda1_pair(g, rank);
            witness(g, ProductProperty::new(p, q, convention).expect("admitted above"))
        });

    let lambda0_witness = lambda0_pair(g, tol).and_then(|(p, q)| {
        ProductProperty::new(p, q, convention)
            .ok()
            .map(|pair| witness(g, pair))
    });

    let holistic = lambda1_witness.is_none();
    let strictly_no_commuting_product = holistic && lambda0_witness.is_none();
    HolismVerdict {
        lambda1_witness,
        lambda0_witness,
        holistic,
        strictly_no_commuting_product,
        rank_of_gamma: rank,
        dims,
        convention,
    }
}

/// HS-orthonormal family from Gram-Schmidt over `seed`.
#[derive(Debug, Clone)]
pub struct HsBasis {
    pub operators: Vec<GammaOperator>,
    /// Indices of seed matrices dropped as linearly dependent.
    pub dropped: Vec<usize>,
}

/// Gram-Schmidt under `⟨A, B⟩ = Tr(A†B)`.
pub fn gram_schmidt_hs(seed: &[ComplexMatrix], dims: SystemDims, tol: &Tolerances) -> Result<HsBasis> {
    if let Some(bad) = seed.iter().find(|m| m.shape() != (dims.d_a, dims.d_b)) {
        return Err(Error::mismatch(
            "gram_schmidt_hs",
            format!("seed of shape {:?} for a {dims} system", bad.shape()),
        ));
    }
    let mut kept: Vec<ComplexMatrix> = Vec::new();
    let mut dropped = Vec::new();
    for (index, m) in seed.iter().enumerate() {
        let original = m.frobenius_norm();
        let mut x = m.clone();
        for _ in 0..2 {
            for b in &kept {
                let proj = b.hs_inner(&x)?;
                x = &x - &b.scale(proj);
            }
        }
        let norm = x.frobenius_norm();
        if original == 0.0 || norm <= tol.tol_rank * original {
            dropped.push(index);
        } else {
            kept.push(x.scale_real(1.0 / norm));
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySpan);
    }
    let operators = kept
        .into_iter()
        .map(GammaOperator::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(HsBasis { operators, dropped })
}

/// `k` mutually exclusive rank-1 holistic candidates seeded by `Γ`.
#[derive(Debug, Clone)]
pub struct HolisticLattice {
    pub gammas: Vec<GammaOperator>,
    pub properties: Vec<Property>,
}

/// Completes `Γ` to `k` HS-orthonormal operators with Ginibre draws and
/// returns their rank-1 projectors. Draw `i` uses stream `i` of `rng_seed`.
pub fn holistic_lattice(
    g: &GammaOperator,
    k: usize,
    rng_seed: u64,
    tol: &Tolerances,
) -> Result<HolisticLattice> {
    let dims = g.dims();
    if k == 0 || k > dims.total() {
        return Err(Error::TooManyMembers {
            requested: k,
            available: dims.total(),
        });
    }
    let mut seed = vec![g.matrix().clone()];
    let mut gammas = gram_schmidt_hs(&seed, dims, tol)?.operators;
    let mut draw = 0u64;
    while gammas.len() < k {
        let mut rng = stream_rng(rng_seed, draw);
        draw += 1;
        seed.push(ginibre(dims.d_a, dims.d_b, &mut rng));
        gammas = gram_schmidt_hs(&seed, dims, tol)?.operators;
    }
    let properties = gammas.iter().map(make_holistic).collect();
    Ok(HolisticLattice { gammas, properties })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalEntropy {
    /// Entropy of `|Γ⟩⟩⟨⟨Γ|` itself.
    pub s_whole: f64,
    /// `−Σ σ_i² ln σ_i²` over the singular values of `Γ`.
    pub s_part: f64,
}

/// `−Tr ρ ln ρ` from the spectrum, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let eig = rho.eigh(tol.tol_herm)?;
    Ok(shannon(eig.eigenvalues.iter().copied()))
}

fn shannon(weights: impl Iterator<Item = f64>) -> f64 {
    weights
        .filter(|&w| w > 0.0)
        .map(|w| -w * w.ln())
        .sum::<f64>()
        .max(0.0)
}

pub fn marginal_entropy(g: &GammaOperator) -> MarginalEntropy {
    let tol = Tolerances::default();
    let pi = make_holistic(g);
    let s_whole = von_neumann_entropy(pi.matrix(), &tol).expect("projector is Hermitian");
    let s_part = shannon(g.singular_values().iter().map(|s| s * s));
    MarginalEntropy { s_whole, s_part }
}

/// Reduced state of `|Γ⟩⟩⟨⟨Γ|` on `H_A` (tracing out the second factor).
pub fn marginal_state(g: &GammaOperator) -> ComplexMatrix {
    let v = vectorize(g.matrix());
    ComplexMatrix::outer(&v, &v)
        .partial_trace(g.dims(), Side::Second)
        .expect("dyad matches Γ dims")
}
