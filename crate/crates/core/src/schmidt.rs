//! State-operator isomorphism, Schmidt decomposition and the best overlap of
//! a bipartite state with states of bounded Schmidt rank.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{argument, shape, Result};
use crate::linalg::vector::{inner, norm};
use crate::linalg::{svd, ComplexMatrix, MultipartiteState};
use crate::sampling::{derive_seed, random_vector, rng_from_seed};

/// Singular values below `RANK_TOL * σ_max` do not count towards the rank.
pub const RANK_TOL: f64 = 1e-9;

/// Maps `|ij⟩` amplitudes of a two-part state of equal local dimensions to
/// the matrix entry `(i, j)`.
pub fn psi_iso(state: &MultipartiteState) -> Result<ComplexMatrix> {
    let dims = state.dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(shape(format!(
            "need two parts of equal dimension, got {dims:?}"
        )));
    }
    psi_iso_split(state, 1)
}

/// Generalized isomorphism: slots before `split` index rows, the rest
/// index columns. For a `2N`-part state in `A1..AN B1..BN` order with
/// `split = N` this gives the matrix whose rows are the A-block.
pub fn psi_iso_split(state: &MultipartiteState, split: usize) -> Result<ComplexMatrix> {
    let dims = state.dims();
    if split == 0 || split >= dims.len() {
        return Err(shape(format!("split {split} invalid for dims {dims:?}")));
    }
    ComplexMatrix::new(
        dims[..split].to_vec(),
        dims[split..].to_vec(),
        state.amplitudes().to_vec(),
    )
}

/// Inverse of [`psi_iso_split`]; the matrix must have unit Frobenius norm.
pub fn psi_iso_inverse(m: &ComplexMatrix) -> Result<MultipartiteState> {
    let mut dims = m.row_dims().to_vec();
    dims.extend_from_slice(m.col_dims());
    MultipartiteState::new(m.entries().to_vec(), dims)
}

/// Schmidt form `|ψ⟩ = Σ_j s_j |a_j⟩|b_j⟩`.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    /// Descending, nonnegative.
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<Vec<Complex64>>,
    /// The `b_j` vectors, i.e. complex conjugates of the right singular
    /// vectors of the coefficient matrix.
    pub right_basis: Vec<Vec<Complex64>>,
    pub rank: usize,
}

pub fn schmidt_decompose(state: &MultipartiteState) -> Result<SchmidtData> {
    let m = psi_iso(state)?;
    let dec = svd(&m);
    let k = dec.singular_values.len();
    Ok(SchmidtData {
        rank: dec.rank(RANK_TOL),
        left_basis: (0..k).map(|j| dec.left_vector(j)).collect(),
        right_basis: (0..k)
            .map(|j| dec.right_vector(j).iter().map(|z| z.conj()).collect())
            .collect(),
        coefficients: dec.singular_values,
    })
}

/// `max |⟨ψ|φ⟩|²` over normalized `φ` of Schmidt rank at most `k`, which is
/// the sum of the `k` largest squared Schmidt coefficients.
pub fn max_overlap_sr_k(state: &MultipartiteState, k: usize) -> Result<f64> {
    let data = schmidt_decompose(state)?;
    let d = state.dims()[0];
    if k == 0 || k > d {
        return Err(argument(format!("k = {k} outside 1..={d}")));
    }
    Ok(data.coefficients[..k].iter().map(|s| s * s).sum())
}

const ORACLE_MAX_ITERS: usize = 200;
const ORACLE_IMPROVEMENT_TOL: f64 = 1e-12;

/// Numerical maximization of `|⟨ψ|φ⟩|²` over rank-`k` `φ`, independent of
/// any SVD.
///
/// For a fixed `k`-dimensional column space spanned by the orthonormal
/// columns of `R`, the best `φ` is the normalized projection `X R R^†` and
/// the overlap is `‖X R‖²`. The ascent alternates between the optimal
/// column space for the current row space and vice versa, each step being
/// an orthonormalized multiplication by `X` or `X^†`.
pub fn max_overlap_oracle(
    state: &MultipartiteState,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    let x = psi_iso(state)?;
    let d = x.rows();
    if k == 0 || k > d {
        return Err(argument(format!("k = {k} outside 1..={d}")));
    }
    let best = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            overlap_ascent(&x, k, &mut rng)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(best)
}

fn overlap_ascent<R: Rng>(x: &ComplexMatrix, k: usize, rng: &mut R) -> f64 {
    let d = x.cols();
    let mut cols = loop {
        let mut cand: Vec<Vec<Complex64>> = (0..k).map(|_| random_vector(rng, d)).collect();
        if orthonormalize(&mut cand) {
            break cand;
        }
    };
    let xh = x.adjoint();
    let mut best = 0.0;
    for _ in 0..ORACLE_MAX_ITERS {
        let mut rows: Vec<Vec<Complex64>> = cols.iter().map(|c| apply(x, c)).collect();
        let value: f64 = rows.iter().map(|r| norm(r).powi(2)).sum();
        if !orthonormalize(&mut rows) {
            // X R lost rank: the value is already the full projection
            return value.max(best);
        }
        let mut next: Vec<Vec<Complex64>> = rows.iter().map(|r| apply(&xh, r)).collect();
        let value_rows: f64 = next.iter().map(|c| norm(c).powi(2)).sum();
        let improved = value.max(value_rows);
        let done = improved - best < ORACLE_IMPROVEMENT_TOL;
        best = best.max(improved);
        if done || !orthonormalize(&mut next) {
            break;
        }
        cols = next;
    }
    best
}

fn apply(m: &ComplexMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let n = m.cols();
    m.entries()
        .chunks(n)
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Modified Gram-Schmidt with a second pass. Returns false on rank loss.
fn orthonormalize(vs: &mut [Vec<Complex64>]) -> bool {
    for i in 0..vs.len() {
        let scale = norm(&vs[i]);
        for _ in 0..2 {
            for j in 0..i {
                let p = inner(&vs[j], &vs[i]);
                let (done, rest) = vs.split_at_mut(i);
                for (a, b) in rest[0].iter_mut().zip(&done[j]) {
                    *a -= p * b;
                }
            }
        }
        let n = norm(&vs[i]);
        if n <= 1e-12 * scale || n == 0.0 {
            return false;
        }
        vs[i].iter_mut().for_each(|z| *z /= n);
    }
    true
}
