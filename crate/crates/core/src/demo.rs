//! Worked examples: single-qubit and even-parity properties, the symmetric
//! property of two qubits, and the projector/operation roundtrip.

use rand::Rng;
use serde::Serialize;

use crate::linalg::{ComplexMatrix, C64};
use crate::property::{symmetric_projector, Property, State, Verdict};
use crate::random::{ginibre, stream_rng};
use crate::tolerances::Tolerances;
use crate::transform::{extract_property, from_property};
use crate::Result;

/// Roundtrip deviation allowed by the demo.
pub const ROUNDTRIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoItem {
    pub name: String,
    pub passed: bool,
    pub expected: String,
    pub observed: String,
}

fn ket(entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::column(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
}

fn verdicts(props: &[(&Property, &State)], tol: &Tolerances) -> Result<Vec<Verdict>> {
    props.iter().map(|(p, s)| Ok(p.check(s, tol)?.verdict)).collect()
}

fn item(name: &str, expected: &[Verdict], observed: &[Verdict]) -> DemoItem {
    DemoItem {
        name: name.into(),
        passed: expected == observed,
        expected: format!("{expected:?}"),
        observed: format!("{observed:?}"),
    }
}

/// Up/down/right on a qubit: `up` is had by `|↑⟩`, `down` is not, and `up`
/// is meaningless for `|→⟩`.
pub fn qubit_example(tol: &Tolerances) -> Result<DemoItem> {
    let up = Property::from_span(&[ket(&[1.0, 0.0])], 2, tol)?;
    let down = Property::from_span(&[ket(&[0.0, 1.0])], 2, tol)?;
    let s_up = State::pure(&ket(&[1.0, 0.0]))?;
    let s_right = State::pure(&ket(&[1.0, 1.0]))?;
    let observed = verdicts(&[(&up, &s_up), (&down, &s_up), (&up, &s_right)], tol)?;
    Ok(item("qubit up/down/right", &[Verdict::Has, Verdict::HasNot, Verdict::Meaningless], &observed))
}

/// The even property `span{|0⟩, |2⟩}` of a four-level system, checked on
/// a mixture and on a superposition of even levels.
pub fn even_example(tol: &Tolerances) -> Result<DemoItem> {
    let even = Property::from_span(&[ket(&[1.0, 0.0, 1.0, 0.0]), ket(&[1.0, 0.0, -1.0, 0.0])], 4, tol)?;
    let mixed = State::new(ComplexMatrix::real_diag(&[0.25, 0.0, 0.75, 0.0]), tol)?;
    let pure = State::pure(&ket(&[1.0, 0.0, 1.0, 0.0]))?;
    let observed = verdicts(&[(&even, &mixed), (&even, &pure)], tol)?;
    Ok(item("even property, mixed and superposed", &[Verdict::Has, Verdict::Has], &observed))
}

/// `(I + E)/2` on two qubits: had by `|↑↑⟩`, not had by the singlet.
pub fn symmetric_example(tol: &Tolerances) -> Result<DemoItem> {
    let sym = symmetric_projector(2, tol)?;
    let upup = State::pure(&ket(&[1.0, 0.0, 0.0, 0.0]))?;
    let singlet = State::pure(&ket(&[0.0, 1.0, -1.0, 0.0]))?;
    let observed = verdicts(&[(&sym, &upup), (&sym, &singlet)], tol)?;
    Ok(item("symmetric property, up-up and singlet", &[Verdict::Has, Verdict::HasNot], &observed))
}

/// Random projector at dimension `2..=5` with rank in `1..d`, from stream
/// `index` of `seed`.
pub fn random_projector(seed: u64, index: u64, tol: &Tolerances) -> Result<Property> {
    let mut rng = stream_rng(seed, index);
    let d = rng.gen_range(2..=5);
    let rank = rng.gen_range(1..d);
    let cols: Vec<ComplexMatrix> = (0..rank).map(|_| ginibre(d, 1, &mut rng)).collect();
    Property::from_span(&cols, d, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roundtrip {
    pub dim: usize,
    pub rank: usize,
    pub deviation: f64,
}

/// `‖extract(from_property(P)) − P‖_F` for `count` random projectors.
pub fn roundtrips(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<Roundtrip>> {
    (0..count as u64)
        .map(|i| {
            let p = random_projector(seed, i, tol)?;
            let back = extract_property(&from_property(&p), tol)?;
            Ok(Roundtrip {
                dim: p.dim(),
                rank: p.rank(),
                deviation: back.matrix().distance(p.matrix()),
            })
        })
        .collect()
}

/// All demo items, the roundtrip summarized as one item.
pub fn run_demo(seed: u64, tol: &Tolerances) -> Result<(Vec<DemoItem>, Vec<Roundtrip>)> {
    let trips = roundtrips(10, seed, tol)?;
    let worst = trips.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let items = vec![
        qubit_example(tol)?,
        even_example(tol)?,
        symmetric_example(tol)?,
        DemoItem {
            name: "projector/operation roundtrip".into(),
            passed: worst <= ROUNDTRIP_TOL,
            expected: format!("max deviation <= {ROUNDTRIP_TOL:e}"),
            observed: format!("max deviation {worst:e}"),
        },
    ];
    Ok((items, trips))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_item_passes() {
        let (items, trips) = run_demo(0, &Tolerances::default()).unwrap();
        assert!(items.iter().all(|i| i.passed), "{items:?}");
        assert_eq!(trips.len(), 10);
    }

    #[test]
    fn random_projectors_are_nontrivial() {
        let tol = Tolerances::default();
        for i in 0..40 {
            let p = random_projector(3, i, &tol).unwrap();
            assert!(p.is_nontrivial());
            assert!((2..=5).contains(&p.dim()));
        }
    }
}
