//! Seeded sampling. Every stochastic routine derives one generator per work
//! item from `(seed, index)`, so results do not depend on worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};

/// Generator for work item `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random unitary via QR of a Ginibre matrix (Gram-Schmidt on columns).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let g = ginibre(n, n, rng);
        let cols: Vec<ComplexMatrix> = (0..n).map(|j| g.col(j)).collect();
        let q = crate::linalg::orthonormalize(&cols, 1e-10);
        if q.len() == n {
            return ComplexMatrix::from_fn(n, n, |i, j| q[j][(i, 0)]);
        }
    }
}
