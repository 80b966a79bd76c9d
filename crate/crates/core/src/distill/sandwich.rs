//! Direct evaluation of `⟨ψ| M_N (ρ_w^{T_A})^{⊗N} M_N^† |ψ⟩`, the form the
//! subset-sum functional is equivalent to.

use num_complex::Complex64;

use crate::error::{shape, Error, Result};
use crate::linalg::{
    kron_with_limits, permute_subsystems, ComplexMatrix, Limits, MultipartiteState,
    SubsystemPermutation,
};
use crate::states::{werner_partial_transpose, WernerParams};

/// Largest side `d^{2N}` of the materialized sandwich operator.
pub const MAX_SANDWICH_SIDE: usize = 1 << 16;

/// `M_N (ρ_w^{T_A})^{⊗N} M_N^†`, with slots in `A1..AN B1..BN` order.
pub fn sandwich_operator(params: &WernerParams, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Argument("need at least one copy".into()));
    }
    let d = params.d();
    let side = (d * d)
        .checked_pow(n as u32)
        .filter(|&s| s <= MAX_SANDWICH_SIDE)
        .ok_or_else(|| {
            Error::DimensionLimit(format!("d^(2N) for d={d}, N={n} exceeds {MAX_SANDWICH_SIDE}"))
        })?;
    Limits::default().check(side, side)?;
    let one = werner_partial_transpose(params);
    let mut acc = one.clone();
    for _ in 1..n {
        acc = kron_with_limits(&acc, &one, &Limits::default())?;
    }
    permute_subsystems(&acc, &SubsystemPermutation::merge_copies(n, d)?)
}

/// `⟨ψ|A|ψ⟩` for Hermitian `A`; the real part is returned.
pub fn quadratic_form(a: &ComplexMatrix, psi: &[Complex64]) -> Result<f64> {
    if a.rows() != psi.len() || a.cols() != psi.len() {
        return Err(shape(format!(
            "{}x{} operator against a vector of length {}",
            a.rows(),
            a.cols(),
            psi.len()
        )));
    }
    let n = psi.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, row) in a.entries().chunks(n).enumerate() {
        let r: Complex64 = row.iter().zip(psi).map(|(x, y)| x * y).sum();
        acc += psi[i].conj() * r;
    }
    Ok(acc.re)
}

/// Sandwich form for a `2N`-part state in `A1..AN B1..BN` order.
///
/// Equals `q(X) / (d² + βd)^N` where `X` is the state reshaped with the
/// A-block as rows.
pub fn sandwich_evaluator(psi: &MultipartiteState, params: &WernerParams, n: usize) -> Result<f64> {
    if psi.dims() != vec![params.d(); 2 * n].as_slice() {
        return Err(shape(format!(
            "state dims {:?} do not match {n} copies of d={}",
            psi.dims(),
            params.d()
        )));
    }
    let op = sandwich_operator(params, n)?;
    quadratic_form(&op, psi.amplitudes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::functional::q_functional;
    use crate::distill::rank_two::{sample_rank_two, SamplingMeasure};
    use crate::schmidt::{psi_iso_inverse, psi_iso_split};
    use crate::linalg::kron;
    use crate::sampling::{random_state, rng_from_seed};
    use crate::states::max_entangled;

    #[test]
    fn single_copy_maximally_entangled() {
        let p = WernerParams::new(3, -0.5).unwrap();
        let v = sandwich_evaluator(&max_entangled(3).unwrap(), &p, 1).unwrap();
        assert!((v + 1.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn zero_beta_is_uniform() {
        let mut rng = rng_from_seed(1);
        for n in 1..=2 {
            let p = WernerParams::new(2, 0.0).unwrap();
            let psi = random_state(&mut rng, vec![2; 2 * n]);
            let v = sandwich_evaluator(&psi, &p, n).unwrap();
            assert!((v - 0.25f64.powi(n as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn two_copy_equivalence_with_functional() {
        let mut rng = rng_from_seed(2);
        for d in [2, 3] {
            for beta in [-0.5, -0.25, 0.3] {
                let p = WernerParams::new(d, beta).unwrap();
                let op = sandwich_operator(&p, 2).unwrap();
                let scale = (p.normalization()).powi(-2);
                for _ in 0..20 {
                    let rt = sample_rank_two(&mut rng, SamplingMeasure::GaussianFactors, d * d);
                    let x = rt.assemble(vec![d, d], vec![d, d]).unwrap();
                    let psi = psi_iso_inverse(&x).unwrap();
                    assert_eq!(psi_iso_split(&psi, 2).unwrap(), x);
                    let s = quadratic_form(&op, psi.amplitudes()).unwrap();
                    let q = q_functional(&x, beta).unwrap();
                    assert!((s * scale - q).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn operator_is_hermitian_and_merges_copies() {
        let p = WernerParams::new(2, -0.7).unwrap();
        let op = sandwich_operator(&p, 2).unwrap();
        assert!(op.is_hermitian(1e-15));
        let t = werner_partial_transpose(&p);
        let tt = kron(&t, &t).unwrap();
        assert!((op.trace() - tt.trace()).norm() < 1e-14);
    }

    #[test]
    fn cap_and_shape_errors() {
        let p = WernerParams::new(4, -0.5).unwrap();
        assert!(matches!(sandwich_operator(&p, 5), Err(Error::DimensionLimit(_))));
        let mut rng = rng_from_seed(3);
        let psi = random_state(&mut rng, vec![2, 2]);
        let q = WernerParams::new(3, -0.5).unwrap();
        assert!(matches!(sandwich_evaluator(&psi, &q, 1), Err(Error::Shape(_))));
    }
}
