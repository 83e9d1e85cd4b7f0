//! Property algebra for composite quantum systems.
//!
//! Properties are orthogonal projectors. A joint property `|Γ⟩⟩⟨⟨Γ|` of a
//! bipartite system is *holistic* when no nontrivial product property
//! `P ⊗ Q` co-occurs with it. The crate decides this analytically from the
//! singular values of `Γ` ([`holism`]), cross-checks the verdict with a
//! numerical commutant search ([`search`]), and relates projectors to
//! repeatable atomic quantum operations ([`transform`]).

pub mod demo;
pub mod doubleket;
pub mod error;
pub mod holism;
pub mod linalg;
pub mod property;
pub mod random;
pub mod search;
pub mod tolerances;
pub mod transform;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Side, SystemDims, C64};
pub use tolerances::Tolerances;
