//! Quantum operations in Kraus form, and the correspondence between
//! orthogonal projectors and repeatable atomic operations.
//!
//! `from_property` sends `P` to `ρ ↦ PρP`. `extract_property` inverts it as
//! `Tr₁[(𝒫 ⊗ ℐ)(E)]` with `E` the swap. Map equality is decided on Choi
//! matrices, so it holds for every input at once.

use crate::doubleket::{swap_operator, vectorize};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Side, SystemDims};
use crate::property::Property;
use crate::tolerances::Tolerances;

/// Trace non-increasing slack on the largest eigenvalue of `ΣK†K`.
pub const TRACE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTransformation {
    kraus: Vec<ComplexMatrix>,
    d_in: usize,
    d_out: usize,
}

impl QuantumTransformation {
    /// Validates shapes and `ΣK†K ≤ I`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::NoKraus)?;
        let (d_out, d_in) = first.shape();
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::mismatch(
                "QuantumTransformation",
                format!("Kraus operator {:?} next to {:?}", bad.shape(), (d_out, d_in)),
            ));
        }
        let gram = kraus
            .iter()
            .fold(ComplexMatrix::zeros(d_in, d_in), |acc, k| &acc + &(&k.adjoint() * k));
        let largest = gram
            .hermitian_part()
            .eigh(f64::INFINITY)?
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0);
        if largest > 1.0 + TRACE_SLACK {
            return Err(Error::NotTraceNonIncreasing { largest });
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(d)],
            d_in: d,
            d_out: d,
        }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// A single Kraus operator.
    pub fn is_atomic(&self) -> bool {
        self.kraus.len() == 1
    }

    /// `ρ ↦ Σ K ρ K†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.d_in, self.d_in) {
            return Err(Error::mismatch(
                "apply",
                format!("{:?} input to a map on dimension {}", rho.shape(), self.d_in),
            ));
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d_out, self.d_out), |acc, k| {
                &acc + &(&(k * rho) * &k.adjoint())
            }))
    }

    /// `Σ |K⟩⟩⟨⟨K|`, a `(d_out·d_in)`-square PSD matrix.
    pub fn choi(&self) -> ChoiMatrix {
        let n = self.d_out * self.d_in;
        let matrix = self.kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
            let v = vectorize(k);
            &acc + &ComplexMatrix::outer(&v, &v)
        });
        ChoiMatrix {
            matrix,
            d_in: self.d_in,
            d_out: self.d_out,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    d_in: usize,
    d_out: usize,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Frobenius distance; infinite when the maps have different shapes.
    pub fn distance(&self, other: &ChoiMatrix) -> f64 {
        if (self.d_in, self.d_out) != (other.d_in, other.d_out) {
            return f64::INFINITY;
        }
        self.matrix.distance(&other.matrix)
    }
}

/// `t1 ∘ t2`: apply `t2` first. Kraus set `{K1·K2}`.
pub fn compose(t1: &QuantumTransformation, t2: &QuantumTransformation) -> Result<QuantumTransformation> {
    if t1.d_in != t2.d_out {
        return Err(Error::mismatch(
            "compose",
            format!("outer map takes {} but inner map yields {}", t1.d_in, t2.d_out),
        ));
    }
    let kraus = t1
        .kraus
        .iter()
        .flat_map(|a| t2.kraus.iter().map(move |b| a * b))
        .collect();
    Ok(QuantumTransformation {
        kraus,
        d_in: t2.d_in,
        d_out: t1.d_out,
    })
}

/// `‖choi(t∘t) − choi(t)‖_F`.
pub fn repeatability_defect(t: &QuantumTransformation) -> Result<f64> {
    if t.d_in != t.d_out {
        return Err(Error::NonSquareMap {
            d_in: t.d_in,
            d_out: t.d_out,
        });
    }
    Ok(compose(t, t)?.choi().distance(&t.choi()))
}

/// `𝒫𝒫 = 𝒫` as maps.
pub fn is_repeatable(t: &QuantumTransformation, tol: &Tolerances) -> Result<bool> {
    Ok(repeatability_defect(t)? <= tol.tol_compat)
}

/// `ρ ↦ PρP`.
pub fn from_property(p: &Property) -> QuantumTransformation {
    let d = p.dim();
    QuantumTransformation {
        kraus: vec![p.matrix().clone()],
        d_in: d,
        d_out: d,
    }
}

/// `(𝒯 ⊗ ℐ)(E) = Σ (K ⊗ I) E (K† ⊗ I)`.
pub fn apply_to_first_factor_of_swap(t: &QuantumTransformation) -> ComplexMatrix {
    let d = t.d_in;
    let e = swap_operator(d);
    let id = ComplexMatrix::identity(d);
    let n = t.d_out * d;
    t.kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
        let left = k.kron(&id);
        &acc + &(&(&left * &e) * &left.adjoint())
    })
}

/// `Tr₁[(𝒫 ⊗ ℐ)(E)]`, validated as a property.
pub fn extract_property(t: &QuantumTransformation, tol: &Tolerances) -> Result<Property> {
    if !t.is_atomic() {
        return Err(Error::NotPropertyTransformation(format!(
            "{} Kraus operators; atomic maps have one",
            t.kraus.len()
        )));
    }
    if !is_repeatable(t, tol)? {
        return Err(Error::NotPropertyTransformation(
            "map is not repeatable".into(),
        ));
    }
    let d = t.d_in;
    let image = apply_to_first_factor_of_swap(t);
    let reduced = image.partial_trace(SystemDims { d_a: d, d_b: d }, Side::First)?;
    Property::new(reduced, tol).map_err(|e| Error::NotPropertyTransformation(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, I, ONE, ZERO};
    use crate::property::symmetric_projector;
    use crate::random::{ginibre, haar_unitary, stream_rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag_prop(entries: &[f64]) -> Property {
        Property::new(ComplexMatrix::real_diag(entries), &tol()).unwrap()
    }

    fn unit_basis(d: usize, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |r, c| if (r, c) == (i, j) { ONE } else { ZERO })
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn choi_of_identity_is_unnormalized_bell_dyad() {
        let c = QuantumTransformation::identity(2).choi();
        let expected = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
        ]);
        assert_eq!(c.matrix(), &expected);
        let k = QuantumTransformation::new(vec![ComplexMatrix::real_diag(&[1.0, 0.0])]).unwrap();
        assert_eq!(k.choi().matrix().rank(1e-7), 1);
    }

    #[test]
    fn choi_equality_matches_action_on_matrix_units() {
        let mut rng = stream_rng(3, 0);
        for trial in 0..10 {
            let u = haar_unitary(2, &mut rng);
            let a = QuantumTransformation::new(vec![u.clone()]).unwrap();
            // Same map up to a global phase, or a different map.
            let other = if trial % 2 == 0 {
                u.scale(C64::from_polar(1.0, 0.7))
            } else {
                haar_unitary(2, &mut rng)
            };
            let b = QuantumTransformation::new(vec![other]).unwrap();
            let choi_equal = a.choi().distance(&b.choi()) < 1e-12;
            let action_equal = (0..2).all(|i| {
                (0..2).all(|j| {
                    let e = unit_basis(2, i, j);
                    a.apply(&e).unwrap().distance(&b.apply(&e).unwrap()) < 1e-12
                })
            });
            assert_eq!(choi_equal, action_equal);
            assert_eq!(choi_equal, trial % 2 == 0);
        }
    }

    #[test]
    fn compose_laws() {
        let mut rng = stream_rng(4, 0);
        let t = QuantumTransformation::new(vec![haar_unitary(3, &mut rng).scale_real(0.8)]).unwrap();
        let it = compose(&QuantumTransformation::identity(3), &t).unwrap();
        assert!(it.choi().distance(&t.choi()) < 1e-14);

        let p = from_property(&diag_prop(&[1.0, 0.0]));
        assert!(compose(&p, &p).unwrap().choi().distance(&p.choi()) < 1e-15);

        let x = QuantumTransformation::new(vec![pauli_x()]).unwrap();
        let xx = compose(&x, &x).unwrap();
        assert!(xx.choi().distance(&QuantumTransformation::identity(2).choi()) < 1e-15);

        assert!(compose(&x, &QuantumTransformation::identity(3)).is_err());
    }

    #[test]
    fn repeatability_cases() {
        assert!(is_repeatable(&from_property(&diag_prop(&[1.0, 0.0])), &tol()).unwrap());
        let (c, s) = (std::f64::consts::FRAC_PI_4.cos(), std::f64::consts::FRAC_PI_4.sin());
        let rot = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]);
        let r = QuantumTransformation::new(vec![rot]).unwrap();
        assert!(!is_repeatable(&r, &tol()).unwrap());
        let half = QuantumTransformation::new(vec![ComplexMatrix::real_diag(&[0.5, 0.0])]).unwrap();
        // K² = K/2, so the composed map scales by 1/16 against 1/4.
        assert!(!is_repeatable(&half, &tol()).unwrap());
        assert!((repeatability_defect(&half).unwrap() - (0.25 - 0.0625)).abs() < 1e-15);
        let rect = QuantumTransformation::new(vec![ComplexMatrix::zeros(2, 3)]).unwrap();
        assert!(matches!(
            is_repeatable(&rect, &tol()),
            Err(Error::NonSquareMap { .. })
        ));
    }

    #[test]
    fn from_property_cases() {
        let id = from_property(&Property::identity(2));
        assert!(id.choi().distance(&QuantumTransformation::identity(2).choi()) < 1e-15);
        let p0 = from_property(&diag_prop(&[1.0, 0.0]));
        for i in 0..2 {
            for j in 0..2 {
                let out = p0.apply(&unit_basis(2, i, j)).unwrap();
                let expected = if (i, j) == (0, 0) {
                    unit_basis(2, 0, 0)
                } else {
                    ComplexMatrix::zeros(2, 2)
                };
                assert_eq!(out, expected);
            }
        }
        assert!(p0.is_atomic());
    }

    #[test]
    fn extract_property_cases() {
        let p = diag_prop(&[1.0, 0.0]);
        assert_eq!(extract_property(&from_property(&p), &tol()).unwrap(), p);

        let sym = symmetric_projector(2, &tol()).unwrap();
        let back = extract_property(&from_property(&sym), &tol()).unwrap();
        assert!(back.matrix().distance(sym.matrix()) < 1e-14);
        assert_eq!(back.rank(), 3);

        let phased = QuantumTransformation::new(vec![p.matrix().scale(C64::from_polar(1.0, 1.3))]).unwrap();
        let back = extract_property(&phased, &tol()).unwrap();
        assert!(back.matrix().distance(p.matrix()) < 1e-15);
    }

    #[test]
    fn extract_property_rejects_non_property_maps() {
        let dephase = QuantumTransformation::new(vec![
            ComplexMatrix::real_diag(&[1.0, 0.0]),
            ComplexMatrix::real_diag(&[0.0, 1.0]),
        ])
        .unwrap();
        assert!(is_repeatable(&dephase, &tol()).unwrap());
        assert!(matches!(
            extract_property(&dephase, &tol()),
            Err(Error::NotPropertyTransformation(_))
        ));
        let x = QuantumTransformation::new(vec![pauli_x()]).unwrap();
        assert!(extract_property(&x, &tol()).is_err());
    }

    #[test]
    fn oblique_idempotents_are_not_admissible() {
        let oblique = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(&oblique * &oblique, oblique);
        assert!(matches!(
            QuantumTransformation::new(vec![oblique]),
            Err(Error::NotTraceNonIncreasing { .. })
        ));
        assert!(QuantumTransformation::new(vec![]).is_err());
    }

    #[test]
    fn admissible_repeatable_atomic_maps_are_phased_projectors() {
        let mut rng = stream_rng(8, 0);
        let mut admissible = 0;
        for trial in 0..60 {
            let d = 2 + trial % 3;
            let rank = 1 + trial % (d - 1);
            // Orthogonal idempotents when the similarity is unitary, oblique otherwise.
            let s = if trial % 2 == 0 {
                haar_unitary(d, &mut rng)
            } else {
                ginibre(d, d, &mut rng)
            };
            let s_inv = inverse(&s);
            let mut diag = vec![0.0; d];
            diag[..rank].iter_mut().for_each(|x| *x = 1.0);
            let idem = &(&s * &ComplexMatrix::real_diag(&diag)) * &s_inv;
            let phase = C64::from_polar(1.0, trial as f64 * 0.37);
            let k = idem.scale(phase);
            let Ok(t) = QuantumTransformation::new(vec![k.clone()]) else {
                continue;
            };
            if !is_repeatable(&t, &Tolerances { tol_compat: 1e-8, ..tol() }).unwrap() {
                continue;
            }
            admissible += 1;
            let unphased = k.scale(phase.conj());
            assert!(unphased.hermiticity_defect() <= 1e-8, "trial {trial}");
        }
        assert!(admissible >= 30);
    }

    #[test]
    fn random_atomic_maps_are_not_repeatable() {
        let mut rng = stream_rng(9, 0);
        for _ in 0..100 {
            let g = ginibre(3, 3, &mut rng);
            let op = g.svd().singular_values[0];
            let t = QuantumTransformation::new(vec![g.scale_real(0.9 / op)]).unwrap();
            assert!(repeatability_defect(&t).unwrap() >= 1e-3);
        }
    }

    #[test]
    fn apply_checks_shape() {
        let t = QuantumTransformation::identity(2);
        assert!(t.apply(&ComplexMatrix::identity(3)).is_err());
        let rho = ComplexMatrix::from_rows(&[vec![ONE, I], vec![-I, ONE]]).scale_real(0.5);
        assert_eq!(t.apply(&rho).unwrap(), rho);
    }

    /// Gauss-Jordan inverse for the test's similarity transforms.
    fn inverse(m: &ComplexMatrix) -> ComplexMatrix {
        let n = m.rows();
        let mut a = m.clone();
        let mut inv = ComplexMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
                .unwrap();
            for j in 0..n {
                let (x, y) = (a[(col, j)], a[(pivot, j)]);
                a[(col, j)] = y;
                a[(pivot, j)] = x;
                let (x, y) = (inv[(col, j)], inv[(pivot, j)]);
                inv[(col, j)] = y;
                inv[(pivot, j)] = x;
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for i in 0..n {
                if i != col {
                    let f = a[(i, col)];
                    for j in 0..n {
                        let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                        a[(i, j)] -= f * ac;
                        inv[(i, j)] -= f * ic;
                    }
                }
            }
        }
        inv
    }
}
