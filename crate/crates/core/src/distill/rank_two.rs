//! Rank-two points `X = σ₁ u₁v₁^† + σ₂ u₂v₂^†` and the two-copy reduction of
//! the functional to the scalars `P`, `Q`, `R`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, shape, Error, Result};
use crate::linalg::vector::{inner, norm};
use crate::linalg::{svd, ComplexMatrix};
use crate::sampling::{random_orthonormal_pair, random_vector};

const SIGMA_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-12;

/// Singular-value parameterization of a unit-norm matrix of rank at most two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFactors")]
pub struct RankTwoFactors {
    sigma1: f64,
    sigma2: f64,
    u1: Vec<Complex64>,
    v1: Vec<Complex64>,
    u2: Vec<Complex64>,
    v2: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawFactors {
    sigma1: f64,
    sigma2: f64,
    u1: Vec<Complex64>,
    v1: Vec<Complex64>,
    u2: Vec<Complex64>,
    v2: Vec<Complex64>,
}

impl TryFrom<RawFactors> for RankTwoFactors {
    type Error = Error;

    fn try_from(r: RawFactors) -> Result<Self> {
        RankTwoFactors::new(r.sigma1, r.sigma2, r.u1, r.v1, r.u2, r.v2)
    }
}

impl RankTwoFactors {
    pub fn new(
        sigma1: f64,
        sigma2: f64,
        u1: Vec<Complex64>,
        v1: Vec<Complex64>,
        u2: Vec<Complex64>,
        v2: Vec<Complex64>,
    ) -> Result<Self> {
        if sigma1 < 0.0 || sigma2 < 0.0 || (sigma1 * sigma1 + sigma2 * sigma2 - 1.0).abs() > SIGMA_TOL {
            return Err(argument(format!(
                "singular values ({sigma1}, {sigma2}) are not a nonnegative unit pair"
            )));
        }
        if u1.len() != u2.len() || v1.len() != v2.len() || u1.is_empty() || v1.is_empty() {
            return Err(shape("factor vectors have inconsistent lengths"));
        }
        for (name, v) in [("u1", &u1), ("v1", &v1), ("u2", &u2), ("v2", &v2)] {
            let n = norm(v);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(argument(format!("{name} has norm {n}")));
            }
        }
        if inner(&u1, &u2).norm() > ORTHO_TOL || inner(&v1, &v2).norm() > ORTHO_TOL {
            return Err(argument("factor pairs are not orthogonal"));
        }
        Ok(RankTwoFactors { sigma1, sigma2, u1, v1, u2, v2 })
    }

    /// Leading two singular triplets of `x`, rescaled to unit Frobenius
    /// norm. Any rank beyond two is discarded.
    pub fn from_matrix(x: &ComplexMatrix) -> Result<Self> {
        if x.rows() < 2 || x.cols() < 2 {
            return Err(shape("need at least a 2x2 matrix"));
        }
        let dec = svd(x);
        let (s1, s2) = (dec.singular_values[0], dec.singular_values[1]);
        let r = s1.hypot(s2);
        if r == 0.0 {
            return Err(argument("zero matrix has no rank-two factors"));
        }
        Self::new(
            s1 / r,
            s2 / r,
            dec.left_vector(0),
            dec.right_vector(0),
            dec.left_vector(1),
            dec.right_vector(1),
        )
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn u1(&self) -> &[Complex64] {
        &self.u1
    }

    pub fn v1(&self) -> &[Complex64] {
        &self.v1
    }

    pub fn u2(&self) -> &[Complex64] {
        &self.u2
    }

    pub fn v2(&self) -> &[Complex64] {
        &self.v2
    }

    /// `atan2(σ₂, σ₁)`, in `[0, π/2]`.
    pub fn angle(&self) -> f64 {
        self.sigma2.atan2(self.sigma1)
    }

    /// `σ₁ u₁v₁^† + σ₂ u₂v₂^†` with the given composite row and column dims.
    pub fn assemble(&self, row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<ComplexMatrix> {
        let (rows, cols) = (self.u1.len(), self.v1.len());
        let m = ComplexMatrix::from_fn(vec![rows], vec![cols], |i, j| {
            self.u1[i] * self.v1[j].conj() * self.sigma1 + self.u2[i] * self.v2[j].conj() * self.sigma2
        })?;
        m.with_dims(row_dims, col_dims)
    }
}

/// Random rank-two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMeasure {
    /// `X ∝ A B^†` with complex Gaussian `n x 2` factors.
    GaussianFactors,
    /// Independent random orthonormal frames and an angle uniform on
    /// `[0, π/2]` for `(σ₁, σ₂) = (cos, sin)`.
    HaarFrames,
}

pub fn sample_rank_two<R: Rng>(rng: &mut R, measure: SamplingMeasure, n: usize) -> RankTwoFactors {
    match measure {
        SamplingMeasure::HaarFrames => {
            let (u1, u2) = random_orthonormal_pair(rng, n);
            let (v1, v2) = random_orthonormal_pair(rng, n);
            let theta = rng.gen_range(0.0..=FRAC_PI_2);
            RankTwoFactors::new(theta.cos(), theta.sin(), u1, v1, u2, v2)
                .expect("orthonormal frames")
        }
        SamplingMeasure::GaussianFactors => loop {
            let a = [random_vector(rng, n), random_vector(rng, n)];
            let b = [random_vector(rng, n), random_vector(rng, n)];
            let x = ComplexMatrix::from_fn(vec![n], vec![n], |i, j| {
                a[0][i] * b[0][j].conj() + a[1][i] * b[1][j].conj()
            })
            .expect("square");
            if let Ok(rt) = RankTwoFactors::from_matrix(&x) {
                return rt;
            }
        },
    }
}

fn reshape(v: &[Complex64], d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(shape(format!("vector of length {} is not {d}x{d}", v.len())));
    }
    ComplexMatrix::new(vec![d], vec![d], v.to_vec())
}

/// `P`, `Q`, `R` of the two-copy problem at a general `β`.
///
/// With `U = reshape(u)` and `V = reshape(v)`, the rank-one term `uv^†`
/// has `Tr₂ = UV^†`, `Tr₁ = U^T conj(V)` and `Tr = Tr(UV^†)`, so that
/// `σ₁²P + σ₂²Q + σ₁σ₂R = ‖Tr₁X‖² + ‖Tr₂X‖² + β|Tr X|²`.
pub fn pqr_with_beta(rt: &RankTwoFactors, d: usize, beta: f64) -> Result<(f64, f64, f64)> {
    let u1 = reshape(&rt.u1, d)?;
    let v1 = reshape(&rt.v1, d)?;
    let u2 = reshape(&rt.u2, d)?;
    let v2 = reshape(&rt.v2, d)?;
    let second = |u: &ComplexMatrix, v: &ComplexMatrix| u.matmul(&v.adjoint());
    let first = |u: &ComplexMatrix, v: &ComplexMatrix| u.transpose().matmul(&v.conj());
    let a2 = second(&u1, &v1)?;
    let b2 = second(&u2, &v2)?;
    let a1 = first(&u1, &v1)?;
    let b1 = first(&u2, &v2)?;
    let (ta, tb) = (a2.trace(), b2.trace());
    let p = a1.frobenius_norm_sqr() + a2.frobenius_norm_sqr() + beta * ta.norm_sqr();
    let q = b1.frobenius_norm_sqr() + b2.frobenius_norm_sqr() + beta * tb.norm_sqr();
    let cross: Complex64 = a2.frobenius_inner(&b2)? + a1.frobenius_inner(&b1)? + ta.conj() * tb * beta;
    Ok((p, q, 2.0 * cross.re))
}

/// [`pqr_with_beta`] at `β = -1/2`.
pub fn pqr(rt: &RankTwoFactors, d: usize) -> Result<(f64, f64, f64)> {
    pqr_with_beta(rt, d, -0.5)
}

/// Slack above which [`check_rank2_inequality`] reports a violation.
pub const RANK2_SLACK_TOL: f64 = 1e-9;

/// Outcome of the rank-two inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rank2Check {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// `-1/β`; 2 at `β = -1/2`.
    pub bound: f64,
    /// `R² - 4(c-P)(c-Q)` with `c = bound`.
    pub slack: f64,
    /// `P <= c`, `Q <= c` and `slack <= RANK2_SLACK_TOL`, i.e. the
    /// quadratic form in `(σ₁, σ₂)` stays below `c` on the unit circle.
    pub holds: bool,
}

/// The two-copy functional is nonnegative at every angle for these factors
/// iff `P, Q <= c` and `R² <= 4(c-P)(c-Q)`, `c = -1/β`.
pub fn check_rank2_inequality(rt: &RankTwoFactors, d: usize, beta: f64) -> Result<Rank2Check> {
    if !(-1.0..0.0).contains(&beta) {
        return Err(argument(format!("beta {beta} outside [-1, 0)")));
    }
    let (p, q, r) = pqr_with_beta(rt, d, beta)?;
    let c = -1.0 / beta;
    let slack = r * r - 4.0 * (c - p) * (c - q);
    let holds = p <= c + RANK2_SLACK_TOL && q <= c + RANK2_SLACK_TOL && slack <= RANK2_SLACK_TOL;
    Ok(Rank2Check { p, q, r, bound: c, slack, holds })
}

/// `min_θ c - (cos²θ P + sin²θ Q + cosθ sinθ R)` over a uniform grid of
/// `points` angles in `[0, π)`.
pub fn angle_scan_margin(p: f64, q: f64, r: f64, c: f64, points: usize) -> f64 {
    let points = points.max(1);
    (0..points)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / points as f64;
            let (s, co) = t.sin_cos();
            c - (co * co * p + s * s * q + co * s * r)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::functional::{f_bilinear, q_functional};
    use crate::linalg::{partial_trace, SubsystemSet};
    use crate::sampling::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    /// `‖Tr₁X‖² + ‖Tr₂X‖² + β|Tr X|²` on the assembled matrix.
    fn assembled_form(rt: &RankTwoFactors, d: usize, beta: f64) -> f64 {
        let x = rt.assemble(vec![d, d], vec![d, d]).unwrap();
        let t1 = partial_trace(&x, SubsystemSet::from_slots(&[0]).unwrap()).unwrap();
        let t2 = partial_trace(&x, SubsystemSet::from_slots(&[1]).unwrap()).unwrap();
        t1.frobenius_norm_sqr() + t2.frobenius_norm_sqr() + beta * x.trace().norm_sqr()
    }

    fn form(rt: &RankTwoFactors, d: usize, beta: f64) -> f64 {
        let (p, q, r) = pqr_with_beta(rt, d, beta).unwrap();
        let (s1, s2) = (rt.sigma1(), rt.sigma2());
        s1 * s1 * p + s2 * s2 * q + s1 * s2 * r
    }

    #[test]
    fn invariants_are_enforced() {
        let mut rng = rng_from_seed(1);
        let (u1, u2) = random_orthonormal_pair(&mut rng, 4);
        let (v1, v2) = random_orthonormal_pair(&mut rng, 4);
        assert!(RankTwoFactors::new(0.6, 0.8, u1.clone(), v1.clone(), u2.clone(), v2.clone()).is_ok());
        assert!(RankTwoFactors::new(0.6, 0.7, u1.clone(), v1.clone(), u2.clone(), v2.clone()).is_err());
        assert!(RankTwoFactors::new(0.6, 0.8, u1.clone(), v1.clone(), u1.clone(), v2.clone()).is_err());
        let long: Vec<Complex64> = u1.iter().map(|z| z * 2.0).collect();
        assert!(RankTwoFactors::new(0.6, 0.8, long, v1, u2, v2).is_err());
    }

    #[test]
    fn from_matrix_reassembles() {
        let mut rng = rng_from_seed(2);
        let rt = sample_rank_two(&mut rng, SamplingMeasure::HaarFrames, 9);
        let x = rt.assemble(vec![3, 3], vec![3, 3]).unwrap();
        let back = RankTwoFactors::from_matrix(&x).unwrap();
        let y = back.assemble(vec![3, 3], vec![3, 3]).unwrap();
        assert!(x.max_abs_diff(&y) < 1e-12);
        assert!((x.frobenius_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_revalidates() {
        let mut rng = rng_from_seed(3);
        let rt = sample_rank_two(&mut rng, SamplingMeasure::GaussianFactors, 4);
        let s = serde_json::to_string(&rt).unwrap();
        assert!(s.contains("\"u1\":[["));
        let back: RankTwoFactors = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rt);
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        v["sigma1"] = serde_json::json!(3.0);
        assert!(serde_json::from_value::<RankTwoFactors>(v).is_err());
    }

    #[test]
    fn normal_plus_rank_one_cases_hold() {
        // U1 = V1 normal (diagonal with random phases), U2 = V2 rank one
        let mut rng = rng_from_seed(4);
        let d = 3;
        for _ in 0..200 {
            let diag = random_vector(&mut rng, d);
            let mut u1 = vec![Complex64::new(0.0, 0.0); d * d];
            for i in 0..d {
                u1[i * d + i] = diag[i];
            }
            let n1 = norm(&u1);
            u1.iter_mut().for_each(|z| *z /= n1);
            let a = random_vector(&mut rng, d);
            let b = random_vector(&mut rng, d);
            let mut u2: Vec<Complex64> = (0..d * d).map(|k| a[k / d] * b[k % d].conj()).collect();
            let p = inner(&u1, &u2);
            for (x, y) in u2.iter_mut().zip(&u1) {
                *x -= p * y;
            }
            let n2 = norm(&u2);
            u2.iter_mut().for_each(|z| *z /= n2);
            let theta: f64 = rng.gen_range(0.0..FRAC_PI_2);
            let rt = RankTwoFactors::new(theta.cos(), theta.sin(), u1.clone(), u1, u2.clone(), u2).unwrap();
            let c = check_rank2_inequality(&rt, d, -0.5).unwrap();
            assert!(c.holds, "{c:?}");
        }
    }

    #[test]
    fn single_term_reduces_to_p_bound() {
        let mut rng = rng_from_seed(5);
        for _ in 0..100 {
            let mut rt = sample_rank_two(&mut rng, SamplingMeasure::HaarFrames, 9);
            rt.sigma1 = 1.0;
            rt.sigma2 = 0.0;
            let c = check_rank2_inequality(&rt, 3, -0.5).unwrap();
            assert!(c.p <= 2.0 + 1e-12);
            assert!((form(&rt, 3, -0.5) - c.p).abs() < 1e-14);
        }
    }

    #[test]
    fn disjoint_supports_have_zero_cross_term() {
        // U1 = V1 = E00, U2 = E12, V2 = E21 at d = 3: Tr(U2 V2^†) = 0
        let d = 3;
        let unit = |k: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); d * d];
            v[k] = Complex64::new(1.0, 0.0);
            v
        };
        let rt = RankTwoFactors::new(0.6, 0.8, unit(0), unit(0), unit(5), unit(7)).unwrap();
        let (_, _, r) = pqr(&rt, d).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn angle_scan_agrees_with_closed_form() {
        let mut rng = rng_from_seed(6);
        for _ in 0..200 {
            let p: f64 = rng.gen_range(-1.0..3.0);
            let q: f64 = rng.gen_range(-1.0..3.0);
            let r: f64 = rng.gen_range(-4.0..4.0);
            let closed = p <= 2.0 && q <= 2.0 && r * r <= 4.0 * (2.0 - p) * (2.0 - q);
            let margin = angle_scan_margin(p, q, r, 2.0, 20000);
            // near-boundary draws are decided by the grid resolution
            if margin.abs() > 1e-6 {
                assert_eq!(closed, margin >= 0.0, "p={p} q={q} r={r}");
            }
        }
    }

    #[test]
    fn beta_must_be_negative() {
        let mut rng = rng_from_seed(7);
        let rt = sample_rank_two(&mut rng, SamplingMeasure::HaarFrames, 4);
        assert!(check_rank2_inequality(&rt, 2, 0.0).is_err());
        assert!(pqr(&rt, 3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pqr_matches_assembled_identity(seed in any::<u64>(), d in 2usize..4, beta in -1.0f64..0.5, gauss in any::<bool>()) {
            let mut rng = rng_from_seed(seed);
            let m = if gauss { SamplingMeasure::GaussianFactors } else { SamplingMeasure::HaarFrames };
            let rt = sample_rank_two(&mut rng, m, d * d);
            prop_assert!((form(&rt, d, beta) - assembled_form(&rt, d, beta)).abs() < 1e-10);
        }

        #[test]
        fn form_links_to_two_copy_functional(seed in any::<u64>(), beta in -1.0f64..0.0) {
            // q = 1 + β (‖Tr₁X‖² + ‖Tr₂X‖² + β|Tr X|²) at unit norm
            let mut rng = rng_from_seed(seed);
            let rt = sample_rank_two(&mut rng, SamplingMeasure::HaarFrames, 4);
            let x = rt.assemble(vec![2, 2], vec![2, 2]).unwrap();
            let q = q_functional(&x, beta).unwrap();
            prop_assert!((q - (1.0 + beta * form(&rt, 2, beta))).abs() < 1e-10);
        }

        #[test]
        fn discriminant_criterion_matches_rank_one_pairs(seed in any::<u64>()) {
            // σ₁²f(x,x) + σ₂²f(y,y) + 2σ₁σ₂Re f(x,y) >= 0 on the circle
            // iff Re f(x,y)² <= f(x,x) f(y,y), given both diagonals >= 0
            let mut rng = rng_from_seed(seed);
            let rt = sample_rank_two(&mut rng, SamplingMeasure::HaarFrames, 9);
            let one = |u: &[Complex64], v: &[Complex64]| {
                ComplexMatrix::from_fn(vec![3, 3], vec![3, 3], |i, j| u[i] * v[j].conj()).unwrap()
            };
            let x = one(rt.u1(), rt.v1());
            let y = one(rt.u2(), rt.v2());
            let fxx = f_bilinear(&x, &x, -0.5).unwrap().re;
            let fyy = f_bilinear(&y, &y, -0.5).unwrap().re;
            let fxy = f_bilinear(&x, &y, -0.5).unwrap().re;
            prop_assert!(fxx >= -1e-12 && fyy >= -1e-12);
            let closed = fxy * fxy <= fxx * fyy;
            let scan = (0..4000)
                .map(|k| {
                    let (s, c) = (std::f64::consts::PI * k as f64 / 4000.0).sin_cos();
                    c * c * fxx + s * s * fyy + 2.0 * c * s * fxy
                })
                .fold(f64::INFINITY, f64::min);
            if scan.abs() > 1e-6 {
                prop_assert_eq!(closed, scan >= 0.0);
            }
        }
    }
}
