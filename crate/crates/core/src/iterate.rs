//! Self-tensoring iterates `ρ_{k+1} = E (ρ_k ⊗ ρ_k) E^†`.
//!
//! `E` reorders `A1 B1 A2 B2` into `A1 A2 B1 B2`, so every iterate stays a
//! two-part state with merged local dimension `d^{2^k}` per side. One-copy
//! undistillability of `ρ_k` is equivalent to `2^k`-copy undistillability of
//! the starting Werner state.

use serde::{Deserialize, Serialize};

use crate::distill::{RankTwoFactors, ReproBundle};
use crate::error::{argument, Error, Result};
use crate::linalg::{kron, partial_transpose, permute_subsystems, ComplexMatrix, SubsystemPermutation};
use crate::optimize::{
    best_index, minimize_objective, minimize_q, DescentOptions, SandwichObjective, SearchConfig,
};
use crate::states::{werner_state, WernerParams};

const TRACE_TOL: f64 = 1e-10;
/// A certification succeeds when the minimum is at least `-CERTIFY_TOL`.
pub const CERTIFY_TOL: f64 = 1e-9;

/// Density matrix after `k` exchange steps, dims `[D, D]` with `D = d^{2^k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    k: u32,
    origin: WernerParams,
    matrix: ComplexMatrix,
}

impl IterateState {
    pub fn from_werner(params: &WernerParams) -> Self {
        IterateState {
            k: 0,
            origin: *params,
            matrix: werner_state(params),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn origin(&self) -> &WernerParams {
        &self.origin
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn local_dim(&self) -> usize {
        self.matrix.row_dims()[0]
    }

    /// Number of Werner copies merged into this iterate.
    pub fn copies(&self) -> usize {
        1 << self.k
    }

    /// Checks unit trace and Hermiticity.
    pub fn validate(&self) -> Result<()> {
        let t = self.matrix.trace();
        if (t.re - 1.0).abs() > TRACE_TOL || t.im.abs() > TRACE_TOL {
            return Err(Error::Precondition(format!("trace {t} is not 1")));
        }
        if !self.matrix.is_hermitian(crate::linalg::HERMITIAN_TOL) {
            return Err(Error::Symmetry {
                deviation: self.matrix.hermitian_deviation(),
                tolerance: crate::linalg::HERMITIAN_TOL,
            });
        }
        Ok(())
    }
}

/// `E (ρ ⊗ ρ) E^†`.
pub fn e_step(s: &IterateState) -> Result<IterateState> {
    let big = s.local_dim();
    let side = big
        .checked_mul(big)
        .and_then(|v| v.checked_mul(v))
        .filter(|&v| v <= crate::distill::MAX_SANDWICH_SIDE)
        .ok_or_else(|| {
            Error::DimensionLimit(format!(
                "iterate {} would have side ({big}^2)^2 > {}",
                s.k + 1,
                crate::distill::MAX_SANDWICH_SIDE
            ))
        })?;
    crate::linalg::Limits::default().check(side, side)?;
    let doubled = kron(&s.matrix, &s.matrix)?;
    let merged = permute_subsystems(&doubled, &SubsystemPermutation::exchange(big)?)?;
    Ok(IterateState {
        k: s.k + 1,
        origin: s.origin,
        matrix: merged.with_dims(vec![big * big, big * big], vec![big * big, big * big])?,
    })
}

/// Applies `k` exchange steps to the Werner state.
pub fn iterate_werner(params: &WernerParams, k: u32) -> Result<IterateState> {
    let mut s = IterateState::from_werner(params);
    for _ in 0..k {
        s = e_step(&s)?;
    }
    Ok(s)
}

/// Minimum of `⟨ψ|ρ^{T_A}|ψ⟩` over Schmidt-rank-two states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub k: u32,
    pub d: usize,
    pub beta: f64,
    pub seed: u64,
    pub restarts: usize,
    pub min_value: f64,
    pub argmin: RankTwoFactors,
}

impl Certification {
    pub fn copies(&self) -> usize {
        1 << self.k
    }

    pub fn certifies(&self) -> bool {
        self.min_value >= -CERTIFY_TOL
    }

    pub fn to_bundle(&self) -> ReproBundle {
        let rt = &self.argmin;
        ReproBundle::new("iterate-witness", self.d, self.copies(), self.beta, self.seed, self.min_value)
            .with_scalar("k", self.k as f64)
            .with_scalar("sigma1", rt.sigma1())
            .with_scalar("sigma2", rt.sigma2())
            .with_vector("u1", rt.u1().to_vec())
            .with_vector("v1", rt.v1().to_vec())
            .with_vector("u2", rt.u2().to_vec())
            .with_vector("v2", rt.v2().to_vec())
    }

    /// Bundle for a refutation, `None` when the minimum certifies.
    pub fn witness_bundle(&self) -> Option<ReproBundle> {
        (!self.certifies()).then(|| self.to_bundle())
    }
}

/// Search budget shared by the certification entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl CertifyConfig {
    pub fn new(restarts: usize, seed: u64) -> Self {
        CertifyConfig {
            restarts,
            seed,
            max_iters: 2000,
            grad_tol: 1e-9,
        }
    }
}

/// Minimizes the partially transposed iterate over Schmidt-rank-two states.
pub fn certify_iterate(s: &IterateState, params: &WernerParams, cfg: &CertifyConfig) -> Result<Certification> {
    if s.origin != *params {
        return Err(Error::Precondition(
            "iterate was not built from the given Werner parameters".into(),
        ));
    }
    if cfg.restarts == 0 {
        return Err(argument("restarts must be at least 1"));
    }
    let big = s.local_dim();
    let op = partial_transpose(&s.matrix, 0)?;
    let obj = SandwichObjective::new(op, vec![big], vec![big])?;
    let opts = DescentOptions {
        restarts: cfg.restarts,
        max_iters: cfg.max_iters,
        grad_tol: cfg.grad_tol,
        seed: cfg.seed,
    };
    let outcomes = minimize_objective(&obj, &opts)?;
    let best = best_index(outcomes.iter().map(|(_, o)| o.value)).expect("restarts >= 1");
    Ok(Certification {
        k: s.k,
        d: params.d(),
        beta: params.beta(),
        seed: cfg.seed,
        restarts: cfg.restarts,
        min_value: outcomes[best].1.value,
        argmin: outcomes[best].1.point.to_factors()?,
    })
}

/// Same minimum as [`certify_iterate`] at level `k`, computed through the
/// subset-sum functional over `2^k` copies without building the iterate.
pub fn certify_power(params: &WernerParams, k: u32, cfg: &CertifyConfig) -> Result<Certification> {
    let n = 1usize
        .checked_shl(k)
        .filter(|&n| n <= crate::distill::MAX_COPIES)
        .ok_or_else(|| Error::DimensionLimit(format!("2^{k} copies exceed {}", crate::distill::MAX_COPIES)))?;
    let search = SearchConfig {
        d: params.d(),
        n,
        beta: params.beta(),
        restarts: cfg.restarts,
        max_iters: cfg.max_iters,
        grad_tol: cfg.grad_tol,
        seed: cfg.seed,
    };
    let report = minimize_q(&search)?;
    Ok(Certification {
        k,
        d: params.d(),
        beta: params.beta(),
        seed: cfg.seed,
        restarts: cfg.restarts,
        min_value: report.best_value * params.normalization().powi(n as i32),
        argmin: report.best_point,
    })
}
