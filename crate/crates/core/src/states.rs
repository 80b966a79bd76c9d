//! Werner states, the swap operator `F`, the operator `G = d|Φ⟩⟨Φ|` and the
//! β thresholds for one-copy undistillability, NPT-ness and the
//! dimension-free N-copy bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::linalg::{ComplexMatrix, MultipartiteState};

/// Local dimension `d` and mixing parameter `β` of a Werner state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WernerParams {
    d: usize,
    beta: f64,
}

impl WernerParams {
    pub fn new(d: usize, beta: f64) -> Result<Self> {
        if d < 2 {
            return Err(argument(format!("local dimension {d} < 2")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(argument(format!("beta {beta} outside [-1, 1]")));
        }
        Ok(WernerParams { d, beta })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `1 / (d² + βd)`.
    pub fn normalization(&self) -> f64 {
        let d = self.d as f64;
        1.0 / (d * d + self.beta * d)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(argument(format!("local dimension {d} < 2")));
    }
    Ok(())
}

fn one(b: bool) -> Complex64 {
    Complex64::new(if b { 1.0 } else { 0.0 }, 0.0)
}

/// `F = Σ_ij |ij⟩⟨ji|`.
pub fn swap_operator(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    ComplexMatrix::from_fn(vec![d, d], vec![d, d], |r, c| {
        one(r / d == c % d && r % d == c / d)
    })
}

/// `G = Σ_ij |ii⟩⟨jj|`.
pub fn ge_operator(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    ComplexMatrix::from_fn(vec![d, d], vec![d, d], |r, c| {
        one(r / d == r % d && c / d == c % d)
    })
}

/// `|Φ⟩ = Σ_i |ii⟩ / √d`.
pub fn max_entangled(d: usize) -> Result<MultipartiteState> {
    check_dim(d)?;
    let s = 1.0 / (d as f64).sqrt();
    let amps = (0..d * d)
        .map(|k| if k / d == k % d { Complex64::new(s, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    MultipartiteState::new(amps, vec![d, d])
}

fn identity_plus(p: &WernerParams, op: ComplexMatrix) -> ComplexMatrix {
    let norm = p.normalization();
    let mut m = op.scale_real(p.beta * norm);
    for i in 0..m.rows() {
        m[(i, i)] += norm;
    }
    m
}

/// `ρ_w = (I + βF) / (d² + βd)`.
pub fn werner_state(p: &WernerParams) -> ComplexMatrix {
    identity_plus(p, swap_operator(p.d).expect("validated d"))
}

/// `ρ_w^{T_A} = (I + βG) / (d² + βd)`.
pub fn werner_partial_transpose(p: &WernerParams) -> ComplexMatrix {
    identity_plus(p, ge_operator(p.d).expect("validated d"))
}

/// β thresholds of the Werner family at fixed `d`.
///
/// The state is one-copy undistillable iff `β >= one_undistill_beta`
/// (closed endpoint) and NPT iff `β < npt_beta` (open endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub one_undistill_beta: f64,
    pub npt_beta: f64,
}

impl Thresholds {
    pub fn is_one_undistillable(&self, beta: f64) -> bool {
        beta >= self.one_undistill_beta
    }

    pub fn is_npt(&self, beta: f64) -> bool {
        beta < self.npt_beta
    }

    /// Whether `[one_undistill_beta, npt_beta)` contains any β.
    pub fn has_npt_undistillable_window(&self) -> bool {
        self.one_undistill_beta < self.npt_beta
    }
}

pub fn thresholds(d: usize) -> Result<Thresholds> {
    check_dim(d)?;
    Ok(Thresholds {
        one_undistill_beta: -0.5,
        npt_beta: -1.0 / d as f64,
    })
}

/// `1 + (1+β)^n - (1-β)^n`.
pub fn bound_polynomial(n: u32, beta: f64) -> f64 {
    let n = n as i32;
    1.0 + (1.0 + beta).powi(n) - (1.0 - beta).powi(n)
}

/// Default residual tolerance for [`beta_bound`].
pub const BETA_BOUND_TOL: f64 = 1e-12;

/// Root `β₀ ∈ [-1, 0]` of [`bound_polynomial`], found by bisection.
///
/// The polynomial is strictly increasing on the bracket, negative at -1 and
/// equal to 1 at 0. Werner states with `β >= β₀` are n-copy undistillable for
/// every local dimension.
pub fn beta_bound(n: u32, tol: f64) -> f64 {
    assert!(n >= 1, "copy count must be positive");
    let (mut lo, mut hi) = (-1.0f64, 0.0f64);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..2000 {
        mid = 0.5 * (lo + hi);
        let v = bound_polynomial(n, mid);
        if v.abs() < tol || mid <= lo || mid >= hi {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_eigenvalue_hermitian, partial_transpose, hermitian_eigen};

    #[test]
    fn swap_definition_and_involution() {
        let f = swap_operator(2).unwrap();
        let e01 = 1;
        let e10 = 2;
        assert_eq!(f[(e01, e10)], one(true));
        assert_eq!(f[(e10, e01)], one(true));
        assert_eq!(f[(0, 0)], one(true));
        assert_eq!(f[(e01, e01)], one(false));
        let ff = f.matmul(&f).unwrap();
        assert_eq!(ff, ComplexMatrix::identity(vec![2, 2]).unwrap());
        assert!(f.is_hermitian(0.0));
        for d in 2..6 {
            // Σ_i ⟨ii|F|ii⟩ = d
            let f = swap_operator(d).unwrap();
            let direct: f64 = (0..d).map(|i| f[(i * d + i, i * d + i)].re).sum();
            assert_eq!(direct, d as f64);
            assert_eq!(f.trace().re, d as f64);
        }
    }

    #[test]
    fn ge_definition() {
        let g = ge_operator(2).unwrap();
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_eq!(g[(r, c)], one(true));
        }
        assert_eq!(g.entries().iter().filter(|z| z.re != 0.0).count(), 4);
        let p = g.scale_real(0.5);
        assert!(p.matmul(&p).unwrap().max_abs_diff(&p) < 1e-15);
        for d in 2..5 {
            let g = ge_operator(d).unwrap();
            assert_eq!(g.trace().re, d as f64);
            assert_eq!(partial_transpose(&g, 0).unwrap(), swap_operator(d).unwrap());
        }
    }

    #[test]
    fn werner_examples() {
        let p = WernerParams::new(2, 0.0).unwrap();
        let quarter = ComplexMatrix::identity(vec![2, 2]).unwrap().scale_real(0.25);
        assert!(werner_state(&p).max_abs_diff(&quarter) < 1e-15);
        assert!(werner_partial_transpose(&p).max_abs_diff(&quarter) < 1e-15);

        // β = 1: (I + F)/6, the symmetric projector (rank 3) over 6
        let p = WernerParams::new(2, 1.0).unwrap();
        let rho = werner_state(&p);
        let eig = hermitian_eigen(&rho.scale_real(6.0)).unwrap();
        let want = [0.0, 2.0, 2.0, 2.0];
        for (a, b) in eig.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_is_a_density_matrix_on_a_grid() {
        for d in 2..=4 {
            for k in 0..=20 {
                let beta = -1.0 + 0.1 * k as f64;
                let p = WernerParams::new(d, beta).unwrap();
                let rho = werner_state(&p);
                assert!(rho.is_hermitian(1e-15));
                assert!((rho.trace().re - 1.0).abs() < 1e-12);
                assert!(min_eigenvalue_hermitian(&rho).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn partial_transpose_closed_form_matches_generic() {
        for d in 2..=4 {
            for beta in [-1.0, -0.6, -0.25, 0.0, 0.5, 1.0] {
                let p = WernerParams::new(d, beta).unwrap();
                let generic = partial_transpose(&werner_state(&p), 0).unwrap();
                assert!(generic.max_abs_diff(&werner_partial_transpose(&p)) < 1e-14);
            }
        }
    }

    #[test]
    fn partial_transpose_min_eigenvalue() {
        let p = WernerParams::new(3, -0.5).unwrap();
        let m = min_eigenvalue_hermitian(&werner_partial_transpose(&p)).unwrap();
        assert!((m + 1.0 / 15.0).abs() < 1e-12);
        assert!(m < 0.0);

        for d in 2..=4 {
            for beta in [-0.9, -0.5, -0.3, -0.1] {
                let p = WernerParams::new(d, beta).unwrap();
                let pt = werner_partial_transpose(&p);
                let eig = hermitian_eigen(&pt).unwrap();
                let df = d as f64;
                let want = (1.0 + beta * df) / (df * df + beta * df);
                assert!((eig.values[0] - want).abs() < 1e-10);
                // eigenvector is |Φ⟩ up to phase
                let phi = max_entangled(d).unwrap();
                let v = eig.vectors.column_slice(0);
                let overlap: Complex64 = phi.amplitudes().iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                assert!((overlap.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn threshold_values() {
        let t = thresholds(3).unwrap();
        assert_eq!(t.one_undistill_beta, -0.5);
        assert!((t.npt_beta + 1.0 / 3.0).abs() < 1e-16);
        assert!(t.has_npt_undistillable_window());
        assert!(t.is_one_undistillable(-0.5));
        assert!(!t.is_npt(-1.0 / 3.0));
        let t = thresholds(2).unwrap();
        assert_eq!((t.one_undistill_beta, t.npt_beta), (-0.5, -0.5));
        assert!(!t.has_npt_undistillable_window());
        assert_eq!(thresholds(10).unwrap().npt_beta, -0.1);
        assert!(thresholds(1).is_err());
    }

    #[test]
    fn beta_bound_values() {
        assert_eq!(beta_bound(1, 1e-12), -0.5);
        assert_eq!(beta_bound(2, 1e-12), -0.25);
        let b3 = beta_bound(3, 1e-12);
        // 1 + 6β + 2β³ is the expanded cubic
        assert!((1.0 + 6.0 * b3 + 2.0 * b3.powi(3)).abs() < 1e-12);
        assert!((b3 + 0.1652).abs() < 1e-4);
        let mut prev = -1.0;
        for n in 1..=10 {
            let b = beta_bound(n, BETA_BOUND_TOL);
            assert!(bound_polynomial(n, b).abs() < BETA_BOUND_TOL);
            assert!(b > prev);
            assert!(b < 0.0 && b >= -0.5);
            prev = b;
        }
    }

    #[test]
    fn params_validation() {
        assert!(WernerParams::new(1, 0.0).is_err());
        assert!(WernerParams::new(2, 1.5).is_err());
        let p = WernerParams::new(2, -1.0).unwrap();
        assert!((werner_state(&p).trace().re - 1.0).abs() < 1e-15);
    }
}
