//! Dense complex linear algebra for small operators.
//!
//! Storage is row-major. Tensor products put the first factor on the slow
//! index: entry `((i, k), (j, l))` of `A ⊗ B` lives at
//! `(i * B.rows + k, j * B.cols + l)`. The vectorization in
//! [`crate::doubleket`] uses the same pairing, and the two must not drift.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Dimensions of the two factors of a bipartite system `H_A ⊗ H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemDims {
    pub d_a: usize,
    pub d_b: usize,
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl SystemDims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidDims(format!(
                "dimensions must be positive, got ({d_a}, {d_b})"
            )));
        }
        Ok(Self { d_a, d_b })
    }

    /// Both factors at least two-dimensional, as needed for nontrivial
    /// local properties on each side.
    pub fn for_holism(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a < 2 || d_b < 2 {
            return Err(Error::InvalidDims(format!(
                "holism needs both factors of dimension >= 2, got ({d_a}, {d_b})"
            )));
        }
        Ok(Self { d_a, d_b })
    }

    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    pub fn total(&self) -> usize {
        self.d_a * self.d_b
    }
}

impl fmt::Display for SystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.d_a, self.d_b)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::mismatch("from_vec", "matrix must be non-empty"));
        }
        if data.len() != rows * cols {
            return Err(Error::mismatch(
                "from_vec",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major real and imaginary parts.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::mismatch(
                "from_parts",
                format!("{} real parts vs {} imaginary parts", re.len(), im.len()),
            ));
        }
        let data = re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect();
        Self::from_vec(rows, cols, data)
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Complex matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn column(entries: &[C64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Canonical basis vector `|k⟩` in dimension `n`.
    pub fn basis(n: usize, k: usize) -> Self {
        Self::from_fn(n, 1, |i, _| if i == k { ONE } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.im).collect()
    }

    pub fn col(&self, j: usize) -> ComplexMatrix {
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    /// First `k` columns.
    pub fn leading_cols(&self, k: usize) -> ComplexMatrix {
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::mismatch(
                "matmul",
                format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Transpose in the canonical basis, without conjugation.
    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> ComplexMatrix {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> ComplexMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.map(|z| z * s)
    }

    /// Kronecker product, first factor on the slow index.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (rb, cb) = other.shape();
        Self::from_fn(self.rows * rb, self.cols * cb, |r, c| {
            self[(r / rb, c / cb)] * other[(r % rb, c % cb)]
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Partial trace of an operator on `H_A ⊗ H_B`.
    ///
    /// `Side::First` removes `H_A` and leaves a `d_b × d_b` operator;
    /// `Side::Second` removes `H_B` and leaves `d_a × d_a`.
    pub fn partial_trace(&self, dims: SystemDims, which: Side) -> Result<ComplexMatrix> {
        let n = dims.total();
        if self.rows != n || self.cols != n {
            return Err(Error::mismatch(
                "partial_trace",
                format!("{}x{} operator on a {dims} system", self.rows, self.cols),
            ));
        }
        let SystemDims { d_a, d_b } = dims;
        Ok(match which {
            Side::First => ComplexMatrix::from_fn(d_b, d_b, |k, l| {
                (0..d_a).map(|i| self[(i * d_b + k, i * d_b + l)]).sum()
            }),
            Side::Second => ComplexMatrix::from_fn(d_a, d_a, |i, j| {
                (0..d_b).map(|k| self[(i * d_b + k, j * d_b + k)]).sum()
            }),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Tr(self† other)`.
    pub fn hs_inner(&self, other: &ComplexMatrix) -> Result<C64> {
        if self.shape() != other.shape() {
            return Err(Error::mismatch(
                "hs_inner",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `‖self − other‖_F`; panics on shape mismatch.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "distance: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.distance(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// `self·other − other·self`; panics on shape mismatch.
    pub fn commutator(&self, other: &ComplexMatrix) -> ComplexMatrix {
        &(self * other) - &(other * self)
    }

    /// `|a⟩⟨b|` for column vectors.
    pub fn outer(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        assert!(a.cols == 1 && b.cols == 1, "outer: expected column vectors");
        Self::from_fn(a.rows, b.rows, |i, j| a.data[i] * b.data[j].conj())
    }

    /// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
    pub fn eigh(&self, tol_herm: f64) -> Result<Eigh> {
        if !self.is_square() {
            return Err(Error::mismatch(
                "eigh",
                format!("{}x{} is not square", self.rows, self.cols),
            ));
        }
        let deviation = self.hermiticity_defect();
        if deviation > tol_herm {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(jacobi_eigh(self.hermitian_part()))
    }

    /// Thin singular value decomposition `A = U Σ V†` with `k = min(rows, cols)`
    /// singular values in descending order.
    pub fn svd(&self) -> Svd {
        if self.rows >= self.cols {
            one_sided_jacobi(self)
        } else {
            let t = one_sided_jacobi(&self.adjoint());
            Svd {
                u: t.v,
                singular_values: t.singular_values,
                v: t.u,
            }
        }
    }

    pub fn rank(&self, tol_rank: f64) -> usize {
        self.svd()
            .singular_values
            .iter()
            .filter(|&&s| s > tol_rank)
            .count()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Eigenvalues in ascending order; eigenvectors are the matching columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Eigh {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let lam = ComplexMatrix::real_diag(&self.eigenvalues);
        &(v * &lam) * &v.adjoint()
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let d: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        &(v * &ComplexMatrix::diag(&d)) * &v.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s: Vec<f64> = self.singular_values.clone();
        &(&self.u * &ComplexMatrix::real_diag(&s)) * &self.v.adjoint()
    }

    pub fn rank(&self, tol_rank: f64) -> usize {
        self.singular_values.iter().filter(|&&s| s > tol_rank).count()
    }
}

/// 2×2 unitary `G = [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]]` that diagonalizes
/// the Hermitian block `[[app, apq], [conj(apq), aqq]]` under `G† · G`.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    g_pp: C64,
    g_pq: C64,
    g_qp: C64,
    g_qq: C64,
}

impl Rotation {
    fn annihilating(app: f64, aqq: f64, apq: C64) -> Self {
        let r = apq.norm();
        let phase = apq / r;
        let theta = (aqq - app) / (2.0 * r);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let e = phase.conj();
        Self {
            g_pp: C64::new(c, 0.0),
            g_pq: C64::new(s, 0.0),
            g_qp: e * (-s),
            g_qq: e * c,
        }
    }

    /// Columns `p, q` of `m` become `[m_p, m_q] · G`.
    fn apply_right(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.rows {
            let a = m[(k, p)];
            let b = m[(k, q)];
            m[(k, p)] = a * self.g_pp + b * self.g_qp;
            m[(k, q)] = a * self.g_pq + b * self.g_qq;
        }
    }

    /// Rows `p, q` of `m` become `G† · [m_p; m_q]`.
    fn apply_left_adjoint(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.cols {
            let a = m[(p, k)];
            let b = m[(q, k)];
            m[(p, k)] = self.g_pp.conj() * a + self.g_qp.conj() * b;
            m[(q, k)] = self.g_pq.conj() * a + self.g_qq.conj() * b;
        }
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigh(mut a: ComplexMatrix) -> Eigh {
    let n = a.rows;
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let rot = Rotation::annihilating(a[(p, p)].re, a[(q, q)].re, apq);
                rot.apply_right(&mut a, p, q);
                rot.apply_left_adjoint(&mut a, p, q);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                rot.apply_right(&mut v, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Eigh {
        eigenvalues,
        eigenvectors,
    }
}

/// Hestenes one-sided Jacobi for `rows >= cols`.
fn one_sided_jacobi(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for k in 0..m {
                    let x = w[(k, p)];
                    let y = w[(k, q)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() <= 1e-300 {
                    continue;
                }
                rotated = true;
                let rot = Rotation::annihilating(alpha, beta, gamma);
                rot.apply_right(&mut w, p, q);
                rot.apply_right(&mut v, p, q);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|k| w[(k, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v_sorted = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    let largest = singular_values.first().copied().unwrap_or(0.0);
    let floor = largest * 1e-14 + f64::MIN_POSITIVE;

    let mut u_cols: Vec<Option<Vec<C64>>> = order
        .iter()
        .map(|&j| {
            let s = norms[j];
            (s > floor).then(|| (0..m).map(|k| w[(k, j)] / s).collect())
        })
        .collect();
    complete_orthonormal(&mut u_cols, m);
    let u = ComplexMatrix::from_fn(m, n, |r, c| u_cols[c].as_ref().unwrap()[r]);
    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

/// Fills the `None` slots with unit vectors orthogonal to every other column,
/// drawing candidates from the canonical basis.
fn complete_orthonormal(cols: &mut [Option<Vec<C64>>], dim: usize) {
    let mut candidate = 0;
    for slot in 0..cols.len() {
        if cols[slot].is_some() {
            continue;
        }
        while candidate < dim {
            let mut x = vec![ZERO; dim];
            x[candidate] = ONE;
            candidate += 1;
            for _ in 0..2 {
                for c in cols.iter().flatten() {
                    let proj: C64 = c.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
                    for (xi, ci) in x.iter_mut().zip(c) {
                        *xi -= proj * ci;
                    }
                }
            }
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                cols[slot] = Some(x.into_iter().map(|z| z / norm).collect());
                break;
            }
        }
    }
}

/// Orthonormal basis of the span of `vectors` (columns) by modified
/// Gram-Schmidt with one reorthogonalization pass. Vectors whose residual
/// falls below `tol` times their original norm are dropped.
pub fn orthonormalize(vectors: &[ComplexMatrix], tol: f64) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for v in vectors {
        let original = v.frobenius_norm();
        if original == 0.0 {
            continue;
        }
        let mut x = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.hs_inner(&x).expect("orthonormalize: shape mismatch");
                x = &x - &b.scale(proj);
            }
        }
        let norm = x.frobenius_norm();
        if norm > tol * original.max(1.0) {
            basis.push(x.scale_real(1.0 / norm));
        }
    }
    basis
}
