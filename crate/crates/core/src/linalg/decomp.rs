use nalgebra::{SymmetricEigen, SVD};
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Thin singular value decomposition `m = U diag(σ) V^†`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// Columns are the left singular vectors.
    pub left: ComplexMatrix,
    /// Columns are the right singular vectors.
    pub right: ComplexMatrix,
}

impl Svd {
    pub fn left_vector(&self, i: usize) -> Vec<Complex64> {
        self.left.column_slice(i)
    }

    pub fn right_vector(&self, i: usize) -> Vec<Complex64> {
        self.right.column_slice(i)
    }

    /// Number of singular values above `rel_tol * σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .filter(|&&s| s > rel_tol * top)
            .count()
    }

    /// `Σ_i σ_i u_i v_i^†` over the leading `k` triplets.
    pub fn reconstruct(&self, k: usize) -> ComplexMatrix {
        let rows = self.left.rows();
        let cols = self.right.rows();
        let k = k.min(self.singular_values.len());
        let mut out = ComplexMatrix::zeros(vec![rows], vec![cols]).unwrap();
        for t in 0..k {
            let s = self.singular_values[t];
            for i in 0..rows {
                let u = self.left[(i, t)] * s;
                for j in 0..cols {
                    out[(i, j)] += u * self.right[(j, t)].conj();
                }
            }
        }
        out
    }
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let dec = SVD::new(m.to_nalgebra(), true, true);
    let u = dec.u.expect("requested U");
    let v_t = dec.v_t.expect("requested V^†");
    let sv: Vec<f64> = dec.singular_values.iter().copied().collect();

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let k = sv.len();
    let left = ComplexMatrix::from_fn(vec![m.rows()], vec![k], |i, t| u[(i, order[t])]).unwrap();
    let right =
        ComplexMatrix::from_fn(vec![m.cols()], vec![k], |j, t| v_t[(order[t], j)].conj()).unwrap();
    Svd {
        singular_values: order.iter().map(|&i| sv[i].max(0.0)).collect(),
        left,
        right,
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::Symmetry {
            deviation,
            tolerance: HERMITIAN_TOL,
        });
    }
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let n = vals.len();
    let vectors =
        ComplexMatrix::from_fn(vec![n], vec![n], |i, t| eig.eigenvectors[(i, order[t])]).unwrap();
    Ok(HermitianEigen {
        values: order.iter().map(|&i| vals[i]).collect(),
        vectors,
    })
}

pub fn min_eigenvalue_hermitian(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.values[0])
}

/// Real symmetric matrix given row-major; returns ascending eigenvalues.
pub fn symmetric_eigenvalues(n: usize, data: &[f64]) -> Result<Vec<f64>> {
    let m = nalgebra::DMatrix::from_row_slice(n, n, data);
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    let scale = m.iter().fold(1.0f64, |a, &x| a.max(x.abs()));
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::Symmetry {
            deviation: dev,
            tolerance: HERMITIAN_TOL * scale,
        });
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_matrix, random_vector, rng_from_seed};

    #[test]
    fn svd_of_identity() {
        let s = svd(&ComplexMatrix::identity(vec![2]).unwrap());
        assert!((s.singular_values[0] - 1.0).abs() < 1e-15);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn svd_of_rank_one() {
        let mut rng = rng_from_seed(5);
        let w = random_vector(&mut rng, 4);
        let x = random_vector(&mut rng, 3);
        let m = ComplexMatrix::from_fn(vec![4], vec![3], |i, j| w[i] * x[j]).unwrap();
        let s = svd(&m);
        let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((s.singular_values[0] - nw * nx).abs() < 1e-12);
        assert_eq!(s.rank(1e-9), 1);
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        let mut rng = rng_from_seed(6);
        for _ in 0..100 {
            let m = random_matrix(&mut rng, vec![9], vec![9]);
            let s = svd(&m);
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            let r = s.reconstruct(9).sub(&m).unwrap().frobenius_norm();
            assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let i3 = ComplexMatrix::identity(vec![3]).unwrap();
        assert!((min_eigenvalue_hermitian(&i3).unwrap() - 1.0).abs() < 1e-14);
        let d = ComplexMatrix::diag_real(&[-2.0, 5.0]).unwrap();
        assert!((min_eigenvalue_hermitian(&d).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            min_eigenvalue_hermitian(&m),
            Err(Error::Symmetry { .. })
        ));
    }
}
