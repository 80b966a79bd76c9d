//! Random-restart descent over unit-norm rank-two matrices.
//!
//! A point is an angle `θ` with `(σ₁, σ₂) = (cos θ, sin θ)` and two
//! orthonormal pairs `U = [u₁ u₂]`, `V = [v₁ v₂]`, so every iterate is
//! `X = σ₁ u₁v₁^† + σ₂ u₂v₂^†` with `‖X‖_F = 1`. The gradient is projected
//! onto the tangent space of the pair manifold, steps are retracted by
//! Gram-Schmidt, and step lengths come from an Armijo backtracking search.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distill::{q_functional, q_value_and_gradient, RankTwoFactors};
use crate::error::{argument, shape, Error, Result};
use crate::linalg::vector::{inner, orthonormalize_pair};
use crate::linalg::{kron, ComplexMatrix};
use crate::sampling::{derive_seed, random_orthonormal_pair, rng_from_seed};

/// Default seed used by the command line when none is given.
pub const DEFAULT_SEED: u64 = 0xD157;
/// Largest `d^N` accepted by [`minimize_q`].
pub const MAX_SEARCH_SIDE: usize = 256;

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;
const MAX_STEP: f64 = 1e3;

/// Smooth objective on matrices with Wirtinger gradient `G`:
/// `f(X + H) = f(X) + 2 Re Tr(G^† H) + O(‖H‖²)`.
pub trait Objective: Sync {
    fn row_dims(&self) -> &[usize];
    fn col_dims(&self) -> &[usize];
    fn value(&self, x: &ComplexMatrix) -> Result<f64>;
    fn value_and_gradient(&self, x: &ComplexMatrix) -> Result<(f64, ComplexMatrix)>;
}

/// The subset-sum functional at fixed `β` over `N` copies.
#[derive(Debug, Clone)]
pub struct QObjective {
    dims: Vec<usize>,
    beta: f64,
}

impl QObjective {
    pub fn new(d: usize, n: usize, beta: f64) -> Self {
        QObjective { dims: vec![d; n], beta }
    }
}

impl Objective for QObjective {
    fn row_dims(&self) -> &[usize] {
        &self.dims
    }

    fn col_dims(&self) -> &[usize] {
        &self.dims
    }

    fn value(&self, x: &ComplexMatrix) -> Result<f64> {
        q_functional(x, self.beta)
    }

    fn value_and_gradient(&self, x: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
        q_value_and_gradient(x, self.beta)
    }
}

/// `⟨ψ|A|ψ⟩` with `ψ` the row-major flattening of `X`.
#[derive(Debug, Clone)]
pub struct SandwichObjective {
    op: ComplexMatrix,
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
}

impl SandwichObjective {
    pub fn new(op: ComplexMatrix, row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        let n = row_dims.iter().product::<usize>() * col_dims.iter().product::<usize>();
        if op.rows() != n || op.cols() != n {
            return Err(shape(format!(
                "{}x{} operator for {n}-dimensional states",
                op.rows(),
                op.cols()
            )));
        }
        if !op.is_hermitian(crate::linalg::HERMITIAN_TOL) {
            return Err(Error::Symmetry {
                deviation: op.hermitian_deviation(),
                tolerance: crate::linalg::HERMITIAN_TOL,
            });
        }
        Ok(SandwichObjective { op, row_dims, col_dims })
    }

    fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = psi.len();
        self.op
            .entries()
            .chunks(n)
            .map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Objective for SandwichObjective {
    fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    fn value(&self, x: &ComplexMatrix) -> Result<f64> {
        Ok(inner(x.entries(), &self.apply(x.entries())).re)
    }

    fn value_and_gradient(&self, x: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
        let a_psi = self.apply(x.entries());
        let v = inner(x.entries(), &a_psi).re;
        Ok((v, ComplexMatrix::new(self.row_dims.clone(), self.col_dims.clone(), a_psi)?))
    }
}

/// Search parameters for [`minimize_q`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub d: usize,
    pub n: usize,
    pub beta: f64,
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(d: usize, n: usize, beta: f64) -> Self {
        SearchConfig {
            d,
            n,
            beta,
            restarts: 20,
            max_iters: 2000,
            grad_tol: 1e-9,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.n < 1 {
            return Err(argument(format!("need d >= 2 and n >= 1, got d={} n={}", self.d, self.n)));
        }
        if !(-1.0..=1.0).contains(&self.beta) {
            return Err(argument(format!("beta {} outside [-1, 1]", self.beta)));
        }
        if self.restarts < 1 {
            return Err(argument("restarts must be at least 1"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(argument("grad_tol must be positive"));
        }
        match (self.d as u64).checked_pow(self.n as u32) {
            Some(s) if s <= MAX_SEARCH_SIDE as u64 => Ok(()),
            _ => Err(Error::DimensionLimit(format!(
                "d^n for d={} n={} exceeds {MAX_SEARCH_SIDE}",
                self.d, self.n
            ))),
        }
    }

    pub fn side(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    fn descent(&self) -> DescentOptions {
        DescentOptions {
            restarts: self.restarts,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            seed: self.seed,
        }
    }
}

/// Restart count, iteration budget, stopping tolerance and base seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub seed: u64,
    pub final_value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub best_value: f64,
    pub best_point: RankTwoFactors,
    /// Index of the winning restart; ties go to the lowest index.
    pub best_restart: usize,
    /// `atan2(σ₂, σ₁)` of the best point; 0 means rank one.
    pub best_angle: f64,
    pub per_restart: Vec<RestartRecord>,
    pub wall_time_s: f64,
}

/// Point on the rank-two manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPoint {
    pub theta: f64,
    pub u: [Vec<Complex64>; 2],
    pub v: [Vec<Complex64>; 2],
}

impl FactorPoint {
    pub fn from_factors(rt: &RankTwoFactors) -> Self {
        FactorPoint {
            theta: rt.angle(),
            u: [rt.u1().to_vec(), rt.u2().to_vec()],
            v: [rt.v1().to_vec(), rt.v2().to_vec()],
        }
    }

    pub fn random<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Self {
        let (u1, u2) = random_orthonormal_pair(rng, rows);
        let (v1, v2) = random_orthonormal_pair(rng, cols);
        FactorPoint {
            theta: rng.gen_range(0.0..=FRAC_PI_2),
            u: [u1, u2],
            v: [v1, v2],
        }
    }

    fn sigmas(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    pub fn assemble(&self, row_dims: &[usize], col_dims: &[usize]) -> Result<ComplexMatrix> {
        let [s1, s2] = self.sigmas();
        let (rows, cols) = (self.u[0].len(), self.v[0].len());
        ComplexMatrix::from_fn(vec![rows], vec![cols], |i, j| {
            self.u[0][i] * self.v[0][j].conj() * s1 + self.u[1][i] * self.v[1][j].conj() * s2
        })?
        .with_dims(row_dims.to_vec(), col_dims.to_vec())
    }

    /// Canonical factors with nonnegative singular values.
    pub fn to_factors(&self) -> Result<RankTwoFactors> {
        let [s1, s2] = self.sigmas();
        let flip = |v: &[Complex64], s: f64| -> Vec<Complex64> {
            if s < 0.0 {
                v.iter().map(|z| -z).collect()
            } else {
                v.to_vec()
            }
        };
        let norm = s1.hypot(s2);
        RankTwoFactors::new(
            s1.abs() / norm,
            s2.abs() / norm,
            flip(&self.u[0], s1),
            self.v[0].clone(),
            flip(&self.u[1], s2),
            self.v[1].clone(),
        )
    }

    fn step(&self, g: &FactorGradient, t: f64) -> Option<FactorPoint> {
        let moved = |x: &[Complex64], dx: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(dx).map(|(a, b)| a - b * t).collect()
        };
        let (u1, u2) = orthonormalize_pair(&moved(&self.u[0], &g.du[0]), &moved(&self.u[1], &g.du[1]))?;
        let (v1, v2) = orthonormalize_pair(&moved(&self.v[0], &g.dv[0]), &moved(&self.v[1], &g.dv[1]))?;
        Some(FactorPoint {
            theta: self.theta - t * g.dtheta,
            u: [u1, u2],
            v: [v1, v2],
        })
    }
}

/// Riemannian gradient in factor coordinates under the metric
/// `Re Tr(A^† B)` on each factor and the standard metric on `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGradient {
    pub dtheta: f64,
    pub du: [Vec<Complex64>; 2],
    pub dv: [Vec<Complex64>; 2],
}

impl FactorGradient {
    pub fn norm_sqr(&self) -> f64 {
        let sq = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        self.dtheta * self.dtheta
            + sq(&self.du[0])
            + sq(&self.du[1])
            + sq(&self.dv[0])
            + sq(&self.dv[1])
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

fn mat_vec(m: &ComplexMatrix, v: &[Complex64]) -> Vec<Complex64> {
    m.entries()
        .chunks(m.cols())
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn adjoint_vec(m: &ComplexMatrix, u: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m.cols()];
    for (row, &ui) in m.entries().chunks(m.cols()).zip(u) {
        let c = ui;
        for (o, a) in out.iter_mut().zip(row) {
            *o += a.conj() * c;
        }
    }
    out
}

/// Removes `F sym(F^† Z)` from `Z = [z₁ z₂]`, the normal component at the
/// orthonormal pair `F = [f₁ f₂]`.
fn project_pair(f: &[Vec<Complex64>; 2], z: [Vec<Complex64>; 2]) -> [Vec<Complex64>; 2] {
    let a = |i: usize, j: usize| inner(&f[i], &z[j]);
    let sym = |i: usize, j: usize| (a(i, j) + a(j, i).conj()) * 0.5;
    let s = [[sym(0, 0), sym(0, 1)], [sym(1, 0), sym(1, 1)]];
    let mut out = z.clone();
    for j in 0..2 {
        for (k, o) in out[j].iter_mut().enumerate() {
            *o -= f[0][k] * s[0][j] + f[1][k] * s[1][j];
        }
    }
    out
}

/// Objective value and projected gradient at `p`.
pub fn tangent_gradient<O: Objective + ?Sized>(obj: &O, p: &FactorPoint) -> Result<(f64, FactorGradient)> {
    let x = p.assemble(obj.row_dims(), obj.col_dims())?;
    let (value, g) = obj.value_and_gradient(&x)?;
    let [s1, s2] = p.sigmas();
    let gv = [mat_vec(&g, &p.v[0]), mat_vec(&g, &p.v[1])];
    let gu = [adjoint_vec(&g, &p.u[0]), adjoint_vec(&g, &p.u[1])];
    let ds = [2.0 * inner(&p.u[0], &gv[0]).re, 2.0 * inner(&p.u[1], &gv[1]).re];
    let scale = |v: &[Complex64], s: f64| v.iter().map(|z| z * (2.0 * s)).collect::<Vec<_>>();
    let raw_u = [scale(&gv[0], s1), scale(&gv[1], s2)];
    let raw_v = [scale(&gu[0], s1), scale(&gu[1], s2)];
    Ok((
        value,
        FactorGradient {
            dtheta: -p.theta.sin() * ds[0] + p.theta.cos() * ds[1],
            du: project_pair(&p.u, raw_u),
            dv: project_pair(&p.v, raw_v),
        },
    ))
}

/// Projected gradient of the subset-sum functional at the given factors.
pub fn grad_q(rt: &RankTwoFactors, d: usize, n: usize, beta: f64) -> Result<FactorGradient> {
    let obj = QObjective::new(d, n, beta);
    let side = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if rt.u1().len() != side || rt.v1().len() != side {
        return Err(shape(format!("factors of length {} for d^n = {side}", rt.u1().len())));
    }
    Ok(tangent_gradient(&obj, &FactorPoint::from_factors(rt))?.1)
}

/// Result of one descent run.
#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub point: FactorPoint,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Armijo-backtracked projected gradient descent from `start`. When
/// `history` is given, the accepted objective values are appended to it.
pub fn descend<O: Objective + ?Sized>(
    obj: &O,
    start: FactorPoint,
    max_iters: usize,
    grad_tol: f64,
    mut history: Option<&mut Vec<f64>>,
) -> Result<DescentOutcome> {
    let mut p = start;
    let (mut value, mut g) = tangent_gradient(obj, &p)?;
    if let Some(h) = history.as_deref_mut() {
        h.push(value);
    }
    let mut t: f64 = 1.0;
    let mut iterations = 0;
    while iterations < max_iters {
        let gn2 = g.norm_sqr();
        if gn2.sqrt() < grad_tol {
            break;
        }
        t = (2.0 * t).min(MAX_STEP);
        let accepted = loop {
            if t < MIN_STEP {
                break None;
            }
            if let Some(cand) = p.step(&g, t) {
                let v = obj.value(&cand.assemble(obj.row_dims(), obj.col_dims())?)?;
                if v <= value - ARMIJO_C * t * gn2 {
                    break Some(cand);
                }
            }
            t *= BACKTRACK;
        };
        let Some(next) = accepted else { break };
        p = next;
        (value, g) = tangent_gradient(obj, &p)?;
        iterations += 1;
        if let Some(h) = history.as_deref_mut() {
            h.push(value);
        }
    }
    Ok(DescentOutcome {
        grad_norm: g.norm(),
        point: p,
        value,
        iterations,
    })
}

/// Independent descents from seeded random starts, in restart order.
pub fn minimize_objective<O: Objective + ?Sized>(
    obj: &O,
    opts: &DescentOptions,
) -> Result<Vec<(u64, DescentOutcome)>> {
    let rows: usize = obj.row_dims().iter().product();
    let cols: usize = obj.col_dims().iter().product();
    if rows < 2 || cols < 2 {
        return Err(shape("rank-two search needs at least two rows and columns"));
    }
    (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(opts.seed, r as u64);
            let mut rng = rng_from_seed(seed);
            let start = FactorPoint::random(&mut rng, rows, cols);
            descend(obj, start, opts.max_iters, opts.grad_tol, None).map(|o| (seed, o))
        })
        .collect()
}

/// Index of the smallest value, the lowest index winning ties.
pub fn best_index(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Minimizes the subset-sum functional over unit-norm rank-two matrices.
pub fn minimize_q(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let start = Instant::now();
    let obj = QObjective::new(cfg.d, cfg.n, cfg.beta);
    let outcomes = minimize_objective(&obj, &cfg.descent())?;
    let best = best_index(outcomes.iter().map(|(_, o)| o.value)).expect("restarts >= 1");
    let best_point = outcomes[best].1.point.to_factors()?;
    Ok(SearchReport {
        config: cfg.clone(),
        best_value: outcomes[best].1.value,
        best_angle: best_point.angle(),
        best_point,
        best_restart: best,
        per_restart: outcomes
            .iter()
            .map(|(seed, o)| RestartRecord {
                seed: *seed,
                final_value: o.value,
                iterations: o.iterations,
                grad_norm: o.grad_norm,
            })
            .collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// `X = Y₂ ⊗ y` with `Y₂ = (E₀₀ + E₁₁)/√2` and `y = E₀₀` on `d x d`.
///
/// The functional factorizes over the tensor product, giving
/// `q(X) = (1 + 2β)(1 + β)`, which is negative for `-1 < β < -1/2`.
pub fn witness_tensor(beta: f64, d: usize) -> Result<ComplexMatrix> {
    if beta > -0.5 {
        return Err(argument(format!("no negative witness at beta {beta} > -1/2")));
    }
    if d < 2 {
        return Err(argument(format!("local dimension {d} < 2")));
    }
    let s = 0.5f64.sqrt();
    let y2 = ComplexMatrix::from_fn(vec![d], vec![d], |i, j| {
        Complex64::new(if i == j && i < 2 { s } else { 0.0 }, 0.0)
    })?;
    let y = ComplexMatrix::from_fn(vec![d], vec![d], |i, j| {
        Complex64::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0)
    })?;
    kron(&y2, &y)
}
