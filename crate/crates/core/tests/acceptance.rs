//! One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

use std::time::{Duration, Instant};

use mereo_core::demo;
use mereo_core::doubleket::{swap_operator, vectorize, GammaOperator};
use mereo_core::holism::{certify_rank1, holistic_lattice, marginal_entropy, Convention};
use mereo_core::linalg::{ComplexMatrix, Side, SystemDims, C64};
use mereo_core::property::Property;
use mereo_core::random::{ginibre, haar_unitary, stream_rng};
use mereo_core::search::{
    azimuth_grid, bloch_projector, brute_force_grid_d2, density_scan, minimize, polar_grid, SearchConfig,
    SearchProblem,
};
use mereo_core::transform::{
    apply_to_first_factor_of_swap, extract_property, from_property, repeatability_defect, QuantumTransformation,
};
use mereo_core::Tolerances;
use rand::Rng;
use rayon::prelude::*;

type Criterion = (&'static str, Duration, Box<dyn Fn() -> Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn dims(a: usize, b: usize) -> SystemDims {
    SystemDims::new(a, b).unwrap()
}

fn random_gamma(d: SystemDims, seed: u64, index: u64) -> GammaOperator {
    let mut rng = stream_rng(seed, index);
    GammaOperator::normalized(&ginibre(d.d_a, d.d_b, &mut rng)).unwrap()
}

/// `‖[P ⊗ Q, |Γ⟩⟩⟨⟨Γ|]‖_F` assembled entrywise.
fn commutator_norm(g: &GammaOperator, p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let v = vectorize(g.matrix());
    let n = v.rows();
    let pi = ComplexMatrix::from_fn(n, n, |i, j| v[(i, 0)] * v[(j, 0)].conj());
    let k = p.kron(q);
    (&(&k * &pi) - &(&pi * &k)).frobenius_norm()
}

fn sandwich(g: &GammaOperator, p: &ComplexMatrix, q: &ComplexMatrix) -> ComplexMatrix {
    &(p * g.matrix()) * &q.transpose()
}

/// Γ with prescribed singular values in Haar-random bases.
fn gamma_with_singular_values(d: SystemDims, sv: &[f64], seed: u64, index: u64) -> GammaOperator {
    let mut rng = stream_rng(seed, index);
    let u = haar_unitary(d.d_a, &mut rng);
    let v = haar_unitary(d.d_b, &mut rng);
    let s = ComplexMatrix::from_fn(d.d_a, d.d_b, |i, j| if i == j && i < sv.len() { C64::new(sv[i], 0.0) } else { C64::new(0.0, 0.0) });
    GammaOperator::normalized(&(&(&u * &s) * &v.adjoint())).unwrap()
}

fn criterion1(tol: &Tolerances) -> Outcome {
    let mut generic = 0;
    let mut generic_ok = 0;
    for d in [dims(2, 2), dims(3, 3)] {
        let (mut index, mut taken) = (0, 0);
        while taken < 100 {
            let g = random_gamma(d, 101 + d.d_a as u64, index);
            index += 1;
            if g.smallest_singular_value() <= 1e-3 {
                continue;
            }
            taken += 1;
            generic += 1;
            if Convention::ALL.iter().all(|&c| certify_rank1(&g, c, tol).holistic) {
                generic_ok += 1;
            }
        }
    }
    let mut deficient_ok = 0;
    let mut worst_replay: f64 = 0.0;
    let cases = [(dims(2, 2), vec![1.0]), (dims(3, 3), vec![1.0, 0.6]), (dims(3, 3), vec![1.0]), (dims(2, 3), vec![1.0]), (dims(3, 2), vec![0.8])];
    for i in 0..20u64 {
        let (d, sv) = &cases[i as usize % cases.len()];
        let g = gamma_with_singular_values(*d, sv, 102, i);
        let ok = Convention::ALL.iter().all(|&c| {
            let v = certify_rank1(&g, c, tol);
            let Some(w) = &v.lambda1_witness else { return false };
            let (p, q) = (w.pair.p().matrix(), w.pair.q().matrix());
            let replay = commutator_norm(&g, p, q);
            worst_replay = worst_replay.max(replay);
            !v.holistic
                && w.pair.p().is_nontrivial()
                && w.pair.q().is_nontrivial()
                && replay <= 1e-10
                && sandwich(&g, p, q).distance(g.matrix()) <= 1e-10
        });
        deficient_ok += ok as usize;
    }
    outcome(
        generic_ok == generic && deficient_ok == 20,
        format!("{generic_ok}/{generic} invertible holistic, {deficient_ok}/20 rank-deficient with witness, worst replay {worst_replay:.1e}"),
    )
}

fn criterion2() -> Outcome {
    let bell = GammaOperator::maximally_entangled(2);
    let restricted = minimize(&bell, &SearchConfig { restarts: 32, exclude_exclusive: true, ..SearchConfig::default() }).unwrap();
    let grid_restricted = brute_force_grid_d2(&bell, 48, true).unwrap();
    let free = minimize(&bell, &SearchConfig { restarts: 32, ..SearchConfig::default() }).unwrap();
    let grid_free = brute_force_grid_d2(&bell, 48, false).unwrap();
    let gap = (grid_free.min_value - free.min_value).abs();
    outcome(
        restricted.min_value >= 0.01 && grid_restricted.min_value >= 0.01 && gap <= 1e-3,
        format!(
            "restricted optimizer {:.4e}, restricted grid {:.4e}, unrestricted gap {gap:.1e}",
            restricted.min_value, grid_restricted.min_value
        ),
    )
}

fn criterion3(tol: &Tolerances) -> Outcome {
    let mut total = 0;
    let mut ok = 0;
    let mut worst: (f64, f64) = (0.0, 0.0);
    for (k, d) in [dims(2, 2), dims(2, 3), dims(3, 3)].into_iter().enumerate() {
        for i in 0..100 {
            let g = random_gamma(d, 300 + k as u64, i);
            total += 1;
            let v = certify_rank1(&g, Convention::BothNontrivial, tol);
            let Some(w) = &v.lambda0_witness else { continue };
            let (p, q) = (w.pair.p().matrix(), w.pair.q().matrix());
            let replay = commutator_norm(&g, p, q);
            let weight = sandwich(&g, p, q).frobenius_norm();
            worst = (worst.0.max(replay), worst.1.max(weight));
            ok += (replay <= 1e-10 && weight <= 1e-12 && w.pair.p().is_nontrivial() && w.pair.q().is_nontrivial()) as usize;
        }
    }
    outcome(ok == total, format!("{ok}/{total} exclusive witnesses, worst replay {:.1e}, worst weight {:.1e}", worst.0, worst.1))
}

fn criterion4() -> Outcome {
    let thetas = polar_grid(24);
    let phis = azimuth_grid(24);
    let projectors: Vec<ComplexMatrix> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&f| bloch_projector(t, f).into_matrix()))
        .collect();
    let mut mismatches = 0usize;
    let mut commuting = 0usize;
    let mut points = 0usize;
    for i in 0..5 {
        let g = random_gamma(dims(2, 2), 400, i);
        let (m, c) = projectors
            .par_iter()
            .map(|p| {
                let mut m = 0usize;
                let mut c = 0usize;
                for q in &projectors {
                    let comm = commutator_norm(&g, p, q) <= 1e-6;
                    let s = sandwich(&g, p, q);
                    let resid = s.frobenius_norm().min(s.distance(g.matrix()));
                    c += comm as usize;
                    m += (comm != (resid <= 1e-5)) as usize;
                }
                (m, c)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        mismatches += m;
        commuting += c;
        points += projectors.len() * projectors.len();
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over {points} grid points ({commuting} commuting)"))
}

fn partial_trace_first(m: &ComplexMatrix, d: usize) -> ComplexMatrix {
    m.partial_trace(SystemDims::square(d).unwrap(), Side::First).unwrap()
}

fn criterion5(tol: &Tolerances) -> Outcome {
    let mut rng = stream_rng(500, 0);
    let mut worst_roundtrip: f64 = 0.0;
    let mut worst_step: f64 = 0.0;
    let mut covered = std::collections::BTreeSet::new();
    for i in 0..50 {
        // Cycle through every (d, rank) with d in 2..=5 and 0 < rank < d.
        let pairs: Vec<(usize, usize)> = (2..=5).flat_map(|d| (1..d).map(move |r| (d, r))).collect();
        let (d, r) = pairs[i % pairs.len()];
        covered.insert((d, r));
        let cols: Vec<ComplexMatrix> = (0..r).map(|_| ginibre(d, 1, &mut rng)).collect();
        let p = Property::from_span(&cols, d, tol).unwrap();
        let pm = p.matrix();
        let t = from_property(&p);
        let back = extract_property(&t, tol).unwrap();
        worst_roundtrip = worst_roundtrip.max(back.matrix().distance(pm));

        let e = swap_operator(d);
        let id = ComplexMatrix::identity(d);
        let chain = [
            partial_trace_first(&apply_to_first_factor_of_swap(&t), d),
            partial_trace_first(&(&(&pm.kron(&id) * &e) * &pm.kron(&id)), d),
            partial_trace_first(&(&e * &pm.kron(pm)), d),
            &partial_trace_first(&(&e * &pm.kron(&id)), d) * pm,
            &partial_trace_first(&(&id.kron(pm) * &e), d) * pm,
            &(pm * &partial_trace_first(&e, d)) * pm,
            pm.clone(),
        ];
        for w in chain.windows(2) {
            worst_step = worst_step.max(w[0].distance(&w[1]));
        }
        worst_step = worst_step.max(partial_trace_first(&e, d).distance(&id));
    }
    outcome(
        worst_roundtrip <= 1e-10 && worst_step <= 1e-10 && covered.len() == 10,
        format!("worst roundtrip {worst_roundtrip:.1e}, worst chain step {worst_step:.1e}, {} (d, rank) cases", covered.len()),
    )
}

fn criterion6(tol: &Tolerances) -> Outcome {
    let mut worst_repeatable: f64 = 0.0;
    for i in 0..50 {
        let p = demo::random_projector(600, i, tol).unwrap();
        worst_repeatable = worst_repeatable.max(repeatability_defect(&from_property(&p)).unwrap());
    }
    let mut best_non: f64 = f64::INFINITY;
    let mut rng = stream_rng(601, 0);
    for _ in 0..100 {
        let d = rng.gen_range(2..=5);
        let g = ginibre(d, d, &mut rng);
        // Scale to unit operator norm so that K†K ≤ I.
        let top = g.svd().singular_values[0];
        let k = g.scale_real(1.0 / top);
        let t = QuantumTransformation::new(vec![k]).unwrap();
        best_non = best_non.min(repeatability_defect(&t).unwrap());
    }
    outcome(
        worst_repeatable <= 1e-10 && best_non >= 1e-3,
        format!("projector maps defect <= {worst_repeatable:.1e}, non-idempotent maps defect >= {best_non:.3e}"),
    )
}

fn shannon_of_marginal(g: &GammaOperator) -> f64 {
    let v = vectorize(g.matrix());
    let n = v.rows();
    let rho = ComplexMatrix::from_fn(n, n, |i, j| v[(i, 0)] * v[(j, 0)].conj());
    let part = rho.partial_trace(g.dims(), Side::Second).unwrap();
    part.eigh(1e-9)
        .unwrap()
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum()
}

fn criterion7() -> Outcome {
    let bell = marginal_entropy(&GammaOperator::maximally_entangled(2));
    let max3 = marginal_entropy(&GammaOperator::maximally_entangled(3));
    let prod = marginal_entropy(&GammaOperator::new(ComplexMatrix::real_diag(&[1.0, 0.0])).unwrap());
    let mut worst_cross: f64 = 0.0;
    for (i, d) in [dims(2, 2), dims(2, 3), dims(3, 3), dims(4, 2)].into_iter().enumerate() {
        for j in 0..10 {
            let g = random_gamma(d, 700 + i as u64, j);
            worst_cross = worst_cross.max((marginal_entropy(&g).s_part - shannon_of_marginal(&g)).abs());
        }
    }
    let passed = bell.s_whole.abs() <= 1e-9
        && (bell.s_part - 2f64.ln()).abs() <= 1e-9
        && (max3.s_part - 3f64.ln()).abs() <= 1e-9
        && prod.s_part.abs() <= 1e-12
        && worst_cross <= 1e-9;
    outcome(
        passed,
        format!(
            "bell ({:.1e}, {:.12}), maxent3 {:.12}, product {:.1e}, spectrum cross-check {worst_cross:.1e}",
            bell.s_whole, bell.s_part, max3.s_part, prod.s_part
        ),
    )
}

fn criterion8(tol: &Tolerances) -> Outcome {
    let lat = holistic_lattice(&GammaOperator::maximally_entangled(2), 4, 800, tol).unwrap();
    let props = &lat.properties;
    let mut worst_product: f64 = 0.0;
    for i in 0..props.len() {
        for j in 0..props.len() {
            if i != j {
                worst_product = worst_product.max((props[i].matrix() * props[j].matrix()).frobenius_norm());
            }
        }
    }
    let sum = props.iter().fold(ComplexMatrix::zeros(4, 4), |acc, p| &acc + p.matrix());
    let completeness = sum.distance(&ComplexMatrix::identity(4));
    let invertible: Vec<&GammaOperator> = lat.gammas.iter().filter(|g| g.smallest_singular_value() > tol.tol_rank).collect();
    let holistic = invertible
        .iter()
        .filter(|g| Convention::ALL.iter().all(|&c| certify_rank1(g, c, tol).holistic))
        .count();
    outcome(
        props.len() == 4 && worst_product <= 1e-10 && completeness <= 1e-9 && holistic == invertible.len(),
        format!("worst product {worst_product:.1e}, sum to identity {completeness:.1e}, {holistic}/{} invertible members holistic", invertible.len()),
    )
}

fn criterion9(tol: &Tolerances) -> Outcome {
    let sq = density_scan(dims(2, 2), 10_000, 900, tol).unwrap();
    let rect = density_scan(dims(2, 3), 10_000, 900, tol).unwrap();
    outcome(
        sq.fraction_both >= 0.999 && rect.fraction_atleastone == 0.0 && rect.fraction_both >= 0.999,
        format!(
            "2x2 both {:.4}, 2x3 at-least-one {} and both {:.4}",
            sq.fraction_both, rect.fraction_atleastone, rect.fraction_both
        ),
    )
}

fn criterion10() -> Outcome {
    let mut rng = stream_rng(1000, 0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (d, ranks) in [(2, vec![(1, 1)]), (3, vec![(1, 1), (1, 2), (2, 1), (2, 2)])] {
        for i in 0..50 {
            let (rank_p, rank_q) = ranks[i % ranks.len()];
            let g = GammaOperator::normalized(&ginibre(d, d, &mut rng)).unwrap();
            let cfg = SearchConfig { rank_p, rank_q, exclude_exclusive: i % 2 == 1, ..SearchConfig::default() };
            let problem = SearchProblem::new(&g, &cfg);
            let x: Vec<f64> = (0..problem.n_params()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let (_, analytic) = problem.value_and_gradient(&x);
            let h = 1e-5;
            let mut probe = x.clone();
            let fd: Vec<f64> = (0..x.len())
                .map(|j| {
                    probe[j] = x[j] + h;
                    let up = problem.value(&probe);
                    probe[j] = x[j] - h;
                    let down = problem.value(&probe);
                    probe[j] = x[j];
                    (up - down) / (2.0 * h)
                })
                .collect();
            let err = analytic.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = fd.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-12);
            worst = worst.max(err / scale);
            count += 1;
        }
    }
    outcome(worst <= 1e-4, format!("worst relative error {worst:.1e} over {count} points"))
}

fn criterion11(tol: &Tolerances) -> Outcome {
    let qubit = demo::qubit_example(tol).unwrap();
    let even = demo::even_example(tol).unwrap();
    let sym = demo::symmetric_example(tol).unwrap();
    // Independent check of the verdict boundaries: the symmetric projector
    // annihilates the singlet and fixes |↑↑⟩ exactly.
    let e = swap_operator(2);
    let sym_m = (&ComplexMatrix::identity(4) + &e).scale_real(0.5);
    let singlet = ComplexMatrix::from_real_rows(&[&[0.0], &[1.0], &[-1.0], &[0.0]]).scale_real(0.5f64.sqrt());
    let upup = ComplexMatrix::from_real_rows(&[&[1.0], &[0.0], &[0.0], &[0.0]]);
    let exact = (&sym_m * &singlet).frobenius_norm() <= tol.tol_support
        && (&sym_m * &upup).distance(&upup) <= tol.tol_support;
    let passed = qubit.passed && even.passed && sym.passed && exact;
    outcome(passed, format!("qubit {}, even {}, symmetric {}", qubit.observed, even.observed, sym.observed))
}

fn main() {
    let tol = Tolerances::default();
    let criteria: Vec<Criterion> = vec![
        ("1 invertible gamma certifies holistic", Duration::from_secs(5), Box::new(move || criterion1(&tol))),
        ("2 restricted search on Bell stays away from zero", Duration::from_secs(60), Box::new(criterion2)),
        ("3 exclusive witnesses always exist", Duration::from_secs(5), Box::new(move || criterion3(&tol))),
        ("4 commutation characterization on Bloch grid", Duration::from_secs(120), Box::new(criterion4)),
        ("5 projector/operation bijection", Duration::from_secs(10), Box::new(move || criterion5(&tol))),
        ("6 repeatability of projector maps", Duration::from_secs(10), Box::new(move || criterion6(&tol))),
        ("7 marginal entropy", Duration::from_secs(600), Box::new(criterion7)),
        ("8 holistic lattice", Duration::from_secs(600), Box::new(move || criterion8(&tol))),
        ("9 density scan", Duration::from_secs(60), Box::new(move || criterion9(&tol))),
        ("10 gradient check", Duration::from_secs(600), Box::new(criterion10)),
        ("11 worked property examples", Duration::from_secs(600), Box::new(move || criterion11(&tol))),
    ];
    let mut failures = 0;
    for (name, budget, run) in &criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let passed = o.passed && elapsed <= *budget;
        failures += !passed as usize;
        println!(
            "{} criterion {name}: {} [{:.2}s of {}s]",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
