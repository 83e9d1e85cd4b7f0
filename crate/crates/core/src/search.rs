//! Numerical commutant search over product properties.
//!
//! A projector of rank `r` on `C^d` is parametrized as `P = U D U†` with
//! `D = diag(1_r, 0)` and `U = exp(iH)`, `H` Hermitian and assembled from
//! `d²` real parameters. The objective
//!
//! ```text
//! f(P, Q) = ‖[P ⊗ Q, |Γ⟩⟩⟨⟨Γ|]‖_F² + max(0, floor − ‖PΓQᵀ‖_F)²
//! ```
//!
//! (second term only with `exclude_exclusive`) is minimized by BFGS with
//! step-halving line search from seeded random starts. The gradient is
//! analytic; the derivative of the matrix exponential uses the
//! Daleckii-Krein divided differences of `x ↦ e^{ix}` in the eigenbasis of
//! `H`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::doubleket::{vec, GammaOperator};
use crate::error::{Error, Result};
use crate::holism::{certify_rank1, Convention};
use crate::linalg::{ComplexMatrix, Eigh, Side, SystemDims, C64, I};
use crate::property::Property;
use crate::random::{ginibre, stream_rng};
use crate::tolerances::Tolerances;

/// Hinge floor on `‖PΓQᵀ‖_F` when mutually exclusive pairs are excluded.
pub const EXCLUSION_FLOOR: f64 = 0.05;
/// Objective value treated as an exact zero by the optimizer.
const OBJECTIVE_FLOOR: f64 = 1e-28;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Gradient norm below which a stalled line search counts as converged.
const STALL_GRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub rank_p: usize,
    pub rank_q: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub grad_tol: f64,
    pub exclude_exclusive: bool,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            rank_p: 1,
            rank_q: 1,
            restarts: 32,
            max_iters: 500,
            step_init: 0.5,
            grad_tol: 1e-12,
            exclude_exclusive: false,
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    /// Both searched factors must be nontrivial.
    pub fn validate(&self, dims: SystemDims) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSearchConfig(msg));
        if self.rank_p == 0 || self.rank_p >= dims.d_a {
            return bad(format!("rank_p = {} outside (0, {})", self.rank_p, dims.d_a));
        }
        if self.rank_q == 0 || self.rank_q >= dims.d_b {
            return bad(format!("rank_q = {} outside (0, {})", self.rank_q, dims.d_b));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return bad("restarts and max_iters must be positive".into());
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad(format!("step_init = {} must be positive", self.step_init));
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return bad(format!("grad_tol = {} must be positive", self.grad_tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// `√f` at the best point: the commutator norm when the exclusion
    /// penalty is off or inactive.
    pub min_value: f64,
    pub objective: f64,
    pub commutator_norm: f64,
    pub argmin_p: Property,
    pub argmin_q: Property,
    pub iterations_used: usize,
    pub converged: bool,
    /// `‖PΓQᵀ‖_F` at the argmin.
    pub cooccurrence_weight: f64,
    pub best_restart: usize,
}

/// Hermitian matrix from `d²` parameters: `d` diagonal entries, then the
/// real and imaginary parts of `H_jk` for `j < k` in row-major order.
pub fn hermitian_from_params(params: &[f64], d: usize) -> ComplexMatrix {
    assert_eq!(params.len(), d * d, "expected d² parameters");
    let mut h = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = C64::new(params[k], 0.0);
    }
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = C64::new(params[idx], params[idx + 1]);
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
            idx += 2;
        }
    }
    h
}

/// `exp(iH)` with the eigendecomposition of `H` kept for differentiation.
struct UnitaryChart {
    eig: Eigh,
    unitary: ComplexMatrix,
}

impl UnitaryChart {
    fn new(params: &[f64], d: usize) -> Self {
        let h = hermitian_from_params(params, d);
        let eig = h.eigh(f64::INFINITY).expect("assembled matrix is Hermitian");
        let unitary = eig.apply(|l| C64::from_polar(1.0, l));
        Self { eig, unitary }
    }

    fn projector(&self, rank: usize) -> Property {
        Property::from_orthonormal_columns(&self.unitary, rank)
    }

    /// Gradient of `Re Tr(M dU)` with respect to the parameters.
    fn pull_back(&self, m: &ComplexMatrix) -> Vec<f64> {
        let w = &self.eig.eigenvectors;
        let lam = &self.eig.eigenvalues;
        let d = lam.len();
        let n = &(&w.adjoint() * m) * w;
        // Y_jk = N_kj · L_jk, with L the divided differences of e^{ix}.
        let y_t = ComplexMatrix::from_fn(d, d, |k, j| {
            let half = 0.5 * (lam[j] - lam[k]);
            let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
            let l = I * C64::from_polar(1.0, 0.5 * (lam[j] + lam[k])) * sinc;
            n[(k, j)] * l
        });
        let z = &(w * &y_t) * &w.adjoint();
        let mut grad = Vec::with_capacity(d * d);
        for k in 0..d {
            grad.push(z[(k, k)].re);
        }
        for j in 0..d {
            for k in (j + 1)..d {
                grad.push((z[(k, j)] + z[(j, k)]).re);
                grad.push((I * (z[(k, j)] - z[(j, k)])).re);
            }
        }
        grad
    }
}

/// `P = U diag(1_rank, 0) U†` with `U = exp(iH(params))`.
pub fn parametrize_projector(params: &[f64], d: usize, rank: usize) -> Property {
    assert!(rank <= d, "rank exceeds dimension");
    UnitaryChart::new(params, d).projector(rank)
}

struct Terms {
    value: f64,
    commutator_norm: f64,
    weight: f64,
}

/// Evaluates the objective and, when `grads` is set, its gradients with
/// respect to `P` and `Q` as `Re Tr(G dP)` coefficients.
fn evaluate(
    g: &GammaOperator,
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    exclude_exclusive: bool,
    grads: bool,
) -> (Terms, Option<(ComplexMatrix, ComplexMatrix)>) {
    let dims = g.dims();
    let gv = vec(g);
    let pi = ComplexMatrix::outer(gv.vector(), gv.vector());
    let k = p.kron(q);
    let c = k.commutator(&pi);
    let comm_sq = c.frobenius_norm().powi(2);

    let s = &(p * g.matrix()) * &q.transpose();
    let weight = s.frobenius_norm();
    let gap = if exclude_exclusive { (EXCLUSION_FLOOR - weight).max(0.0) } else { 0.0 };
    let terms = Terms {
        value: comm_sq + gap * gap,
        commutator_norm: comm_sq.sqrt(),
        weight,
    };
    if !grads {
        return (terms, None);
    }

    let c_adj = c.adjoint();
    let a = (&(&pi * &c_adj) - &(&c_adj * &pi)).scale_real(2.0);
    let id_a = ComplexMatrix::identity(dims.d_a);
    let id_b = ComplexMatrix::identity(dims.d_b);
    let mut g_p = (&a * &id_a.kron(q)).partial_trace(dims, Side::Second).expect("dims");
    let mut g_q = (&a * &p.kron(&id_b)).partial_trace(dims, Side::First).expect("dims");

    if gap > 0.0 && weight > 0.0 {
        let coef = -2.0 * gap / weight;
        let s_adj = s.adjoint();
        g_p = &g_p + &(&(g.matrix() * &q.transpose()) * &s_adj).scale_real(coef);
        g_q = &g_q + &(&(&s_adj * p) * g.matrix()).transpose().scale_real(coef);
    }
    (terms, Some((g_p, g_q)))
}

/// `f(P, Q)` for fixed properties.
pub fn objective(g: &GammaOperator, p: &Property, q: &Property, cfg: &SearchConfig) -> f64 {
    evaluate(g, p.matrix(), q.matrix(), cfg.exclude_exclusive, false).0.value
}

/// Objective over the stacked parameter vector `[params_p | params_q]`.
pub struct SearchProblem<'a> {
    gamma: &'a GammaOperator,
    rank_p: usize,
    rank_q: usize,
    exclude_exclusive: bool,
}

impl<'a> SearchProblem<'a> {
    pub fn new(gamma: &'a GammaOperator, cfg: &SearchConfig) -> Self {
        Self {
            gamma,
            rank_p: cfg.rank_p,
            rank_q: cfg.rank_q,
            exclude_exclusive: cfg.exclude_exclusive,
        }
    }

    pub fn n_params(&self) -> usize {
        let SystemDims { d_a, d_b } = self.gamma.dims();
        d_a * d_a + d_b * d_b
    }

    fn charts(&self, x: &[f64]) -> (UnitaryChart, UnitaryChart) {
        let SystemDims { d_a, d_b } = self.gamma.dims();
        let (xp, xq) = x.split_at(d_a * d_a);
        (UnitaryChart::new(xp, d_a), UnitaryChart::new(xq, d_b))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (cp, cq) = self.charts(x);
        let p = cp.projector(self.rank_p);
        let q = cq.projector(self.rank_q);
        evaluate(self.gamma, p.matrix(), q.matrix(), self.exclude_exclusive, false).0.value
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (cp, cq) = self.charts(x);
        let p = cp.projector(self.rank_p);
        let q = cq.projector(self.rank_q);
        let (terms, grads) = evaluate(self.gamma, p.matrix(), q.matrix(), self.exclude_exclusive, true);
        let (g_p, g_q) = grads.expect("requested");
        let mut grad = cp.pull_back(&chain_through_projector(&cp, self.rank_p, &g_p));
        grad.extend(cq.pull_back(&chain_through_projector(&cq, self.rank_q, &g_q)));
        (terms.value, grad)
    }

    /// Projectors at `x`.
    pub fn projectors(&self, x: &[f64]) -> (Property, Property) {
        let (cp, cq) = self.charts(x);
        (cp.projector(self.rank_p), cq.projector(self.rank_q))
    }
}

/// `M = D U† (G + G†)` so that `Re Tr(G dP) = Re Tr(M dU)` for `P = U D U†`.
fn chain_through_projector(chart: &UnitaryChart, rank: usize, g: &ComplexMatrix) -> ComplexMatrix {
    let d = g.rows();
    let mask: Vec<f64> = (0..d).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    let sym = g + &g.adjoint();
    &(&ComplexMatrix::real_diag(&mask) * &chart.unitary.adjoint()) * &sym
}

/// Central finite-difference gradient, for checking the analytic one.
pub fn finite_difference_gradient(problem: &SearchProblem<'_>, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = problem.value(&probe);
            probe[i] = x[i] - h;
            let down = problem.value(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

struct RestartOutcome {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS on the inverse Hessian with Armijo step halving.
fn descend(problem: &SearchProblem<'_>, mut x: Vec<f64>, cfg: &SearchConfig) -> RestartOutcome {
    let n = x.len();
    let identity = |scale: f64| {
        let mut h = vec![0.0; n * n];
        (0..n).for_each(|i| h[i * n + i] = scale);
        h
    };
    let mut hinv = identity(1.0);
    let (mut f, mut grad) = problem.value_and_gradient(&x);
    let mut first = true;

    for iter in 0..cfg.max_iters {
        let gnorm = dot(&grad, &grad).sqrt();
        if f <= OBJECTIVE_FLOOR || gnorm <= cfg.grad_tol {
            return RestartOutcome { x, value: f, iterations: iter, converged: true };
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &grad)).collect();
        let mut slope = dot(&dir, &grad);
        if slope >= 0.0 {
            hinv = identity(1.0);
            dir = grad.iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
        }

        let mut step = if first { cfg.step_init / gnorm.max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = problem.value(&trial);
            if ft <= f + ARMIJO * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, _)) = accepted else {
            // No decrease along the search direction at machine resolution.
            let converged = gnorm <= STALL_GRAD_TOL;
            return RestartOutcome { x, value: f, iterations: iter, converged };
        };
        let (f_new, grad_new) = problem.value_and_gradient(&x_new);
        if f - f_new <= f64::EPSILON * f && gnorm <= STALL_GRAD_TOL {
            return RestartOutcome { x: x_new, value: f_new, iterations: iter + 1, converged: true };
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-18 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if first {
                hinv = identity(sy / dot(&y, &y));
            }
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
            first = false;
        }
        x = x_new;
        f = f_new;
        grad = grad_new;
    }
    let converged = f <= OBJECTIVE_FLOOR || dot(&grad, &grad).sqrt() <= cfg.grad_tol;
    RestartOutcome { x, value: f, iterations: cfg.max_iters, converged }
}

fn random_start(n: usize, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, restart as u64);
    (0..n)
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

/// Best result over `cfg.restarts` seeded descents. Restart `i` starts from
/// stream `i` of `cfg.rng_seed`, so adding restarts never worsens the result.
pub fn minimize(g: &GammaOperator, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate(g.dims())?;
    let problem = SearchProblem::new(g, cfg);
    let n = problem.n_params();
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| descend(&problem, random_start(n, cfg.rng_seed, r), cfg))
        .collect();
    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .expect("at least one restart");
    let (p, q) = problem.projectors(&best.x);
    let (terms, _) = evaluate(g, p.matrix(), q.matrix(), cfg.exclude_exclusive, false);
    Ok(SearchResult {
        min_value: terms.value.sqrt(),
        objective: terms.value,
        commutator_norm: terms.commutator_norm,
        argmin_p: p,
        argmin_q: q,
        iterations_used: outcomes.iter().map(|o| o.iterations).sum(),
        converged: best.converged,
        cooccurrence_weight: terms.weight,
        best_restart,
    })
}

/// Grid point of the Bloch-sphere scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochAngles {
    pub theta_p: f64,
    pub phi_p: f64,
    pub theta_q: f64,
    pub phi_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResult {
    pub min_objective: f64,
    /// `√min_objective`, comparable with [`SearchResult::min_value`].
    pub min_value: f64,
    pub argmin: BlochAngles,
}

/// Polar angles `θ_i = π i/(n−1)`, endpoints included.
pub fn polar_grid(resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| std::f64::consts::PI * i as f64 / (resolution - 1) as f64)
        .collect()
}

/// Azimuths `φ_j = 2π j/n`.
pub fn azimuth_grid(resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / resolution as f64)
        .collect()
}

/// `(cos θ/2, e^{iφ} sin θ/2)`.
pub fn bloch_ket(theta: f64, phi: f64) -> [C64; 2] {
    [
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Rank-1 projector onto [`bloch_ket`].
pub fn bloch_projector(theta: f64, phi: f64) -> Property {
    let k = ComplexMatrix::column(&bloch_ket(theta, phi));
    Property::from_span(&[k], 2, &Tolerances::default()).expect("unit ket in dimension 2")
}

/// Exhaustive scan over rank-1 pairs at `d_a = d_b = 2`.
///
/// For unit `|p⟩, |q⟩` and `a = ⟨p|Γ|q*⟩ = ⟨pq|Γ⟩⟩`, the squared commutator
/// norm is `2|a|²(1 − |a|²)` and `‖PΓQᵀ‖_F = |a|`; the scan evaluates the
/// objective through these closed forms, independently of the matrix route
/// used by [`minimize`].
pub fn brute_force_grid_d2(g: &GammaOperator, resolution: usize, exclude_exclusive: bool) -> Result<GridResult> {
    if g.dims() != (SystemDims { d_a: 2, d_b: 2 }) {
        return Err(Error::InvalidDims(format!("grid oracle needs 2x2, got {}", g.dims())));
    }
    if resolution < 2 {
        return Err(Error::InvalidSearchConfig("grid resolution must be at least 2".into()));
    }
    let thetas = polar_grid(resolution);
    let phis = azimuth_grid(resolution);
    let gm = g.matrix();
    let points: Vec<(f64, f64, [C64; 2])> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&f| (t, f, bloch_ket(t, f))))
        .collect();

    let best = points
        .par_iter()
        .enumerate()
        .map(|(ip, &(tp, fp, kp))| {
            // Γ|q*⟩ is contracted with ⟨p| below; precompute ⟨p|Γ.
            let row = [
                kp[0].conj() * gm[(0, 0)] + kp[1].conj() * gm[(1, 0)],
                kp[0].conj() * gm[(0, 1)] + kp[1].conj() * gm[(1, 1)],
            ];
            let mut local = (f64::INFINITY, ip, 0usize);
            for (iq, &(_, _, kq)) in points.iter().enumerate() {
                let a = row[0] * kq[0].conj() + row[1] * kq[1].conj();
                let w2 = a.norm_sqr();
                let mut value = 2.0 * w2 * (1.0 - w2);
                if exclude_exclusive {
                    let gap = (EXCLUSION_FLOOR - w2.sqrt()).max(0.0);
                    value += gap * gap;
                }
                if value < local.0 {
                    local = (value, ip, iq);
                }
            }
            let _ = (tp, fp);
            local
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
        .expect("non-empty grid");

    let (value, ip, iq) = best;
    let value = value.max(0.0);
    Ok(GridResult {
        min_objective: value,
        min_value: value.sqrt(),
        argmin: BlochAngles {
            theta_p: points[ip].0,
            phi_p: points[ip].1,
            theta_q: points[iq].0,
            phi_q: points[iq].1,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRow {
    pub sample_index: usize,
    pub smallest_singular_value: f64,
    pub holistic_atleastone: bool,
    pub holistic_both: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// Bin edges, `bins + 1` values on `[0, 1/√min(d_a, d_b)]`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub dims: SystemDims,
    pub samples: usize,
    pub rng_seed: u64,
    pub fraction_atleastone: f64,
    pub fraction_both: f64,
    pub fraction_below_tol_rank: f64,
    pub histogram: Histogram,
    #[serde(skip)]
    pub rows: Vec<DensityRow>,
}

pub const HISTOGRAM_BINS: usize = 20;

/// Certifies `samples` HS-normalized Ginibre draws under both conventions.
/// Sample `i` uses stream `i` of `rng_seed`.
pub fn density_scan(dims: SystemDims, samples: usize, rng_seed: u64, tol: &Tolerances) -> Result<DensityReport> {
    if samples == 0 {
        return Err(Error::InvalidSearchConfig("samples must be positive".into()));
    }
    let rows: Vec<DensityRow> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(rng_seed, i as u64);
            let g = GammaOperator::normalized(&ginibre(dims.d_a, dims.d_b, &mut rng))
                .expect("Ginibre draw is nonzero");
            DensityRow {
                sample_index: i,
                smallest_singular_value: g.smallest_singular_value(),
                holistic_atleastone: certify_rank1(&g, Convention::AtLeastOneNontrivial, tol).holistic,
                holistic_both: certify_rank1(&g, Convention::BothNontrivial, tol).holistic,
            }
        })
        .collect();

    let n = samples as f64;
    let frac = |pred: &dyn Fn(&DensityRow) -> bool| rows.iter().filter(|r| pred(r)).count() as f64 / n;
    let top = 1.0 / (dims.d_a.min(dims.d_b) as f64).sqrt();
    let edges: Vec<f64> = (0..=HISTOGRAM_BINS).map(|i| top * i as f64 / HISTOGRAM_BINS as f64).collect();
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for r in &rows {
        let bin = ((r.smallest_singular_value / top) * HISTOGRAM_BINS as f64) as usize;
        counts[bin.min(HISTOGRAM_BINS - 1)] += 1;
    }
    Ok(DensityReport {
        dims,
        samples,
        rng_seed,
        fraction_atleastone: frac(&|r| r.holistic_atleastone),
        fraction_both: frac(&|r| r.holistic_both),
        fraction_below_tol_rank: frac(&|r| r.smallest_singular_value <= tol.tol_rank),
        histogram: Histogram { edges, counts },
        rows,
    })
}
