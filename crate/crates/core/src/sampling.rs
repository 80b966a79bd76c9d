//! Seeded random sampling used by tests, searches and sweeps.
//!
//! All generators are `ChaCha8Rng` so a seed reproduces the same stream on
//! every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::vector::orthonormalize_pair;
use crate::linalg::{ComplexMatrix, MultipartiteState};

pub type LabRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-task seed derived from a base seed and a task index (splitmix64).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Vector of complex standard normal entries.
pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(normal(rng), normal(rng)))
        .collect()
}

pub fn random_real_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn random_real_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v = random_real_vector(rng, n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Unitarily invariant random pure state.
pub fn random_state<R: Rng>(rng: &mut R, dims: Vec<usize>) -> MultipartiteState {
    let n = dims.iter().product();
    loop {
        if let Ok(s) = MultipartiteState::normalized(random_vector(rng, n), dims.clone()) {
            return s;
        }
    }
}

pub fn random_matrix<R: Rng>(rng: &mut R, row_dims: Vec<usize>, col_dims: Vec<usize>) -> ComplexMatrix {
    let n = row_dims.iter().product::<usize>() * col_dims.iter().product::<usize>();
    ComplexMatrix::new(row_dims, col_dims, random_vector(rng, n)).expect("dims are consistent")
}

/// Haar-random orthonormal pair in `C^n`.
pub fn random_orthonormal_pair<R: Rng>(rng: &mut R, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    loop {
        let a = random_vector(rng, n);
        let b = random_vector(rng, n);
        if let Some(pair) = orthonormalize_pair(&a, &b) {
            return pair;
        }
    }
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = random_vector(rng, n);
        for _ in 0..2 {
            for c in &cols {
                let p = crate::linalg::vector::inner(c, &v);
                for (x, e) in v.iter_mut().zip(c) {
                    *x -= p * e;
                }
            }
        }
        if let Some(v) = crate::linalg::vector::normalized(&v) {
            cols.push(v);
        }
    }
    ComplexMatrix::from_fn(vec![n], vec![n], |i, j| cols[j][i]).unwrap()
}
