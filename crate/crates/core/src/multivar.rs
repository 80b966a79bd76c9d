//! Real rank-one landscape `g(C) = f(C,C) f(D₀,D₀) - f(C,D₀)²` with
//! `C = w xᵀ`, `D₀ = y zᵀ` and
//! `f(C,D) = Tr(CᵀD) + β(Tr(C₁ᵀD₁) + Tr(C₂ᵀD₂)) + β² Tr(C) Tr(D)` on the
//! two-copy reshaping, where `C₁`, `C₂` are the two partial traces.
//!
//! Vectors have length `d²`; component `i·d + j` is matrix entry `(i, j)`.
//! The gradient and Hessian are stacked as `[∂/∂w, ∂/∂x]`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::distill::ReproBundle;
use crate::error::{argument, shape, Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::sampling::{derive_seed, random_real_unit_vector, rng_from_seed};

/// Relative tolerance for recognising `w = y`, `x = z`.
pub const CRITICAL_TOL: f64 = 1e-12;
/// Minimum eigenvalues below this are reported as findings.
pub const SPECTRUM_FINDING_TOL: f64 = -1e-6;
pub const MAX_SWEEP_DIM: usize = 4;

fn side_of(len: usize) -> Result<usize> {
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len || d < 2 {
        return Err(shape(format!("vector length {len} is not d^2 with d >= 2")));
    }
    Ok(d)
}

/// Variables `(w, x)` and parameters `(y, z)` of the rank-one landscape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOnePoint {
    d: usize,
    w: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl RankOnePoint {
    pub fn new(w: Vec<f64>, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        let d = side_of(w.len())?;
        if [&x, &y, &z].iter().any(|v| v.len() != w.len()) {
            return Err(shape("w, x, y, z must have equal lengths"));
        }
        if [&w, &x, &y, &z].iter().any(|v| v.iter().any(|a| !a.is_finite())) {
            return Err(argument("non-finite component"));
        }
        Ok(RankOnePoint { d, w, x, y, z })
    }

    /// The point `C = D₀`.
    pub fn critical(y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        Self::new(y.clone(), z.clone(), y, z)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Same parameters, variables replaced by `v = [w, x]`.
    pub fn with_variables(&self, v: &[f64]) -> Result<Self> {
        let n = self.w.len();
        if v.len() != 2 * n {
            return Err(shape(format!("expected {} variables, got {}", 2 * n, v.len())));
        }
        Self::new(v[..n].to_vec(), v[n..].to_vec(), self.y.clone(), self.z.clone())
    }

    pub fn variables(&self) -> Vec<f64> {
        [self.w.as_slice(), self.x.as_slice()].concat()
    }

    pub fn is_critical(&self) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            a.iter().zip(b).all(|(p, q)| (p - q).abs() <= CRITICAL_TOL * scale)
        };
        close(&self.w, &self.y) && close(&self.x, &self.z)
    }
}

fn mat(d: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, v)
}

fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn f_raw(d: usize, w: &[f64], x: &[f64], y: &[f64], z: &[f64], beta: f64) -> f64 {
    let (wm, xm, ym, zm) = (mat(d, w), mat(d, x), mat(d, y), mat(d, z));
    let c1 = &wm * xm.transpose();
    let d1 = &ym * zm.transpose();
    let c2 = wm.transpose() * &xm;
    let d2 = ym.transpose() * &zm;
    dot(w, y) * dot(x, z) + beta * (c1.dot(&d1) + c2.dot(&d2)) + beta * beta * dot(w, x) * dot(y, z)
}

/// `f(wxᵀ, yzᵀ)`.
pub fn f_real(c: (&[f64], &[f64]), dpair: (&[f64], &[f64]), beta: f64) -> Result<f64> {
    let d = side_of(c.0.len())?;
    if [c.1, dpair.0, dpair.1].iter().any(|v| v.len() != c.0.len()) {
        return Err(shape("all four vectors must have length d^2"));
    }
    Ok(f_raw(d, c.0, c.1, dpair.0, dpair.1, beta))
}

pub fn g_value(p: &RankOnePoint, beta: f64) -> f64 {
    let (d, w, x, y, z) = (p.d, &p.w, &p.x, &p.y, &p.z);
    f_raw(d, w, x, w, x, beta) * f_raw(d, y, z, y, z, beta) - f_raw(d, w, x, y, z, beta).powi(2)
}

/// `∂f(wxᵀ, yzᵀ)/∂w`.
pub fn h2(y: &[f64], z: &[f64], x: &[f64], beta: f64) -> Result<Vec<f64>> {
    let d = side_of(y.len())?;
    let (ym, zm, xm) = (mat(d, y), mat(d, z), mat(d, x));
    let m = &ym * dot(x, z)
        + (&ym * zm.transpose() * &xm + &xm * zm.transpose() * &ym) * beta
        + &xm * (beta * beta * dot(y, z));
    Ok(flat(&m))
}

/// `∂f(wxᵀ, wxᵀ)/∂w`, equal to `2 h₂(w, x, x)`.
pub fn h1(w: &[f64], x: &[f64], beta: f64) -> Result<Vec<f64>> {
    let d = side_of(w.len())?;
    let (wm, xm) = (mat(d, w), mat(d, x));
    let m = (&wm * dot(x, x)
        + (&wm * xm.transpose() * &xm + &xm * xm.transpose() * &wm) * beta
        + &xm * (beta * beta * dot(w, x)))
        * 2.0;
    Ok(flat(&m))
}

/// Builds an `d² x d²` matrix from a rule on `(i, j, k, l)`.
fn four_index(d: usize, rule: impl Fn(usize, usize, usize, usize) -> f64) -> DMatrix<f64> {
    let n = d * d;
    DMatrix::from_fn(n, n, |r, c| rule(r / d, r % d, c / d, c % d))
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// `∂²f(wxᵀ, wxᵀ)/∂w∂w`; independent of `w`.
pub fn h3(x: &[f64], beta: f64) -> Result<DMatrix<f64>> {
    let d = side_of(x.len())?;
    let xm = mat(d, x);
    let xtx = xm.transpose() * &xm;
    let xxt = &xm * xm.transpose();
    let nx = dot(x, x);
    Ok(four_index(d, |i, j, k, l| {
        2.0 * delta(i, k) * delta(j, l) * nx
            + 2.0 * beta * (delta(i, k) * xtx[(j, l)] + delta(j, l) * xxt[(i, k)])
            + 2.0 * beta * beta * xm[(i, j)] * xm[(k, l)]
    }))
}

/// `∂²f(wxᵀ, wxᵀ)/∂w∂x`, rows indexed by `w`, columns by `x`.
pub fn h4(w: &[f64], x: &[f64], beta: f64) -> Result<DMatrix<f64>> {
    let d = side_of(w.len())?;
    let (wm, xm) = (mat(d, w), mat(d, x));
    let wxt = &wm * xm.transpose();
    let wtx = wm.transpose() * &xm;
    let wx = dot(w, x);
    Ok(four_index(d, |i, j, k, l| {
        4.0 * wm[(i, j)] * xm[(k, l)]
            + 2.0
                * beta
                * (delta(j, l) * wxt[(i, k)]
                    + xm[(k, j)] * wm[(i, l)]
                    + delta(i, k) * wtx[(j, l)]
                    + xm[(i, l)] * wm[(k, j)])
            + 2.0 * beta * beta * (delta(i, k) * delta(j, l) * wx + xm[(i, j)] * wm[(k, l)])
    }))
}

/// `∂²f(wxᵀ, yzᵀ)/∂w∂x`; independent of `(w, x)`.
pub fn h5(y: &[f64], z: &[f64], beta: f64) -> Result<DMatrix<f64>> {
    let d = side_of(y.len())?;
    let (ym, zm) = (mat(d, y), mat(d, z));
    let yzt = &ym * zm.transpose();
    let ytz = ym.transpose() * &zm;
    let yz = dot(y, z);
    Ok(four_index(d, |i, j, k, l| {
        ym[(i, j)] * zm[(k, l)]
            + beta * (delta(j, l) * yzt[(i, k)] + delta(i, k) * ytz[(j, l)])
            + beta * beta * delta(i, k) * delta(j, l) * yz
    }))
}

/// `[∂g/∂w, ∂g/∂x]`, length `2d²`.
pub fn grad_g(p: &RankOnePoint, beta: f64) -> Vec<f64> {
    let (d, w, x, y, z) = (p.d, &p.w, &p.x, &p.y, &p.z);
    let f0 = f_raw(d, y, z, y, z, beta);
    let fcd = f_raw(d, w, x, y, z, beta);
    let valid = "validated point";
    let gw = h1(w, x, beta).expect(valid);
    let gx = h1(x, w, beta).expect(valid);
    let pw = h2(y, z, x, beta).expect(valid);
    let px = h2(z, y, w, beta).expect(valid);
    gw.iter()
        .zip(&pw)
        .chain(gx.iter().zip(&px))
        .map(|(a, b)| f0 * a - 2.0 * b * fcd)
        .collect()
}

/// Analytic Hessian of `g` at a point with `w = y`, `x = z`.
pub fn hessian_g(p: &RankOnePoint, beta: f64) -> Result<DMatrix<f64>> {
    if !p.is_critical() {
        return Err(Error::Precondition(
            "analytic Hessian blocks are only available at C = D0".into(),
        ));
    }
    let (w, x) = (&p.w, &p.x);
    let n = w.len();
    let f0 = f_raw(p.d, w, x, w, x, beta);
    let a = DMatrix::from_row_slice(n, 1, &h2(w, x, x, beta)?);
    let b = DMatrix::from_row_slice(n, 1, &h2(x, w, w, beta)?);
    let ww = h3(x, beta)? * f0 - &a * a.transpose() * 2.0;
    let xx = h3(w, beta)? * f0 - &b * b.transpose() * 2.0;
    let wx = h4(w, x, beta)? * f0 - h5(w, x, beta)? * (2.0 * f0) - &a * b.transpose() * 2.0;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&ww);
    h.view_mut((n, n), (n, n)).copy_from(&xx);
    h.view_mut((0, n), (n, n)).copy_from(&wx);
    h.view_mut((n, 0), (n, n)).copy_from(&wx.transpose());
    Ok(h)
}

/// Central-difference gradient of `g` in the variables.
pub fn fd_gradient(p: &RankOnePoint, beta: f64, step: f64) -> Vec<f64> {
    let v = p.variables();
    (0..v.len())
        .map(|i| {
            let at = |t: f64| {
                let mut u = v.clone();
                u[i] += t;
                g_value(&p.with_variables(&u).expect("same length"), beta)
            };
            (at(step) - at(-step)) / (2.0 * step)
        })
        .collect()
}

/// Four-point central second differences of `g`.
pub fn fd_hessian(p: &RankOnePoint, beta: f64, step: f64) -> DMatrix<f64> {
    let v = p.variables();
    let m = v.len();
    let at = |i: usize, si: f64, j: usize, sj: f64| {
        let mut u = v.clone();
        u[i] += si;
        u[j] += sj;
        g_value(&p.with_variables(&u).expect("same length"), beta)
    };
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let e = (at(i, step, j, step) - at(i, step, j, -step) - at(i, -step, j, step)
                + at(i, -step, j, -step))
                / (4.0 * step * step);
            h[(i, j)] = e;
            h[(j, i)] = e;
        }
    }
    h
}

/// Gradients at two zero-gradient endpoints and at their midpoint, which
/// shows that the set of local minima is not convex.
#[derive(Debug, Clone, Serialize)]
pub struct NonconvexityDemo {
    pub d: usize,
    pub beta: f64,
    pub endpoint_grad_norms: [f64; 2],
    pub midpoint_gradient: Vec<f64>,
    /// Ones at `w₀₀, w₀₁, x₀₀, x₀₁`.
    pub pattern: Vec<f64>,
    pub cosine_to_pattern: f64,
}

pub const DEMO_BETA: f64 = -0.5;

/// Parameters `y = z = e₀₁`; endpoints `w = x = e₀₁` and `w = x = e₀₀`.
pub fn nonconvexity_demo(d: usize) -> Result<NonconvexityDemo> {
    nonconvexity_demo_at(d, DEMO_BETA)
}

pub fn nonconvexity_demo_at(d: usize, beta: f64) -> Result<NonconvexityDemo> {
    if d < 3 {
        return Err(argument(format!("the demonstration needs d >= 3, got {d}")));
    }
    let n = d * d;
    let unit = |k: usize| {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        v
    };
    let e01 = unit(1);
    let e00 = unit(0);
    let point = |w: &[f64]| RankOnePoint::new(w.to_vec(), w.to_vec(), e01.clone(), e01.clone());
    let sup = |g: Vec<f64>| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ends = [sup(grad_g(&point(&e01)?, beta)), sup(grad_g(&point(&e00)?, beta))];
    let mid: Vec<f64> = e01.iter().zip(&e00).map(|(a, b)| 0.5 * (a + b)).collect();
    let g = grad_g(&point(&mid)?, beta);
    let mut pattern = vec![0.0; 2 * n];
    for k in [0, 1, n, n + 1] {
        pattern[k] = 1.0;
    }
    let norm = |v: &[f64]| dot(v, v).sqrt();
    let gn = norm(&g);
    let cosine = if gn == 0.0 { 0.0 } else { dot(&g, &pattern) / (gn * norm(&pattern)) };
    Ok(NonconvexityDemo {
        d,
        beta,
        endpoint_grad_norms: ends,
        midpoint_gradient: g,
        pattern,
        cosine_to_pattern: cosine,
    })
}

/// One sample of the Hessian spectrum sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub point_id: usize,
    pub seed: u64,
    pub min_eigenvalue: f64,
    #[serde(skip)]
    pub y: Vec<f64>,
    #[serde(skip)]
    pub z: Vec<f64>,
}

impl SpectrumSample {
    pub fn is_finding(&self) -> bool {
        self.min_eigenvalue < SPECTRUM_FINDING_TOL
    }

    pub fn to_bundle(&self, d: usize, beta: f64) -> ReproBundle {
        ReproBundle::new("hessian-negative", d, 2, beta, self.seed, self.min_eigenvalue)
            .with_scalar("point_id", self.point_id as f64)
            .with_real_vector("y", &self.y)
            .with_real_vector("z", &self.z)
    }
}

pub fn min_hessian_eigenvalue(p: &RankOnePoint, beta: f64) -> Result<f64> {
    let h = hessian_g(p, beta)?;
    let m = h.nrows();
    let rows = flat(&h);
    let eig = symmetric_eigenvalues(m, &rows)?;
    Ok(eig.into_iter().fold(f64::INFINITY, f64::min))
}

/// Minimum Hessian eigenvalue at `C = D₀` for random unit `(y, z)`.
pub fn hessian_spectrum_sweep(d: usize, samples: usize, seed: u64, beta: f64) -> Result<Vec<SpectrumSample>> {
    if !(2..=MAX_SWEEP_DIM).contains(&d) {
        return Err(argument(format!("sweep dimension {d} outside 2..={MAX_SWEEP_DIM}")));
    }
    if samples == 0 {
        return Err(argument("samples must be at least 1"));
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let mut rng = rng_from_seed(s);
            let y = random_real_unit_vector(&mut rng, d * d);
            let z = random_real_unit_vector(&mut rng, d * d);
            let p = RankOnePoint::critical(y.clone(), z.clone())?;
            Ok(SpectrumSample {
                point_id: i,
                seed: s,
                min_eigenvalue: min_hessian_eigenvalue(&p, beta)?,
                y,
                z,
            })
        })
        .collect()
}
