//! The subset-sum functional `q(X) = Σ_S β^{|S|} ‖Tr_S X‖²_F` and its
//! sesquilinear form.
//!
//! The `2^N` partial traces are produced by a depth-first walk over subsets
//! in which a child traces one more slot, always larger than every slot
//! already traced. Each `Tr_S X` is therefore built by single-slot traces in
//! ascending slot order, and prefixes are shared between subsets.

use num_complex::Complex64;

use crate::error::{shape, Error, Result};
use crate::linalg::{embed_identity_slot, trace_slot, ComplexMatrix};

/// Largest number of copies accepted by the functional.
pub const MAX_COPIES: usize = 12;

fn check_operand(x: &ComplexMatrix) -> Result<usize> {
    if !x.is_square_composite() {
        return Err(shape(format!(
            "row dims {:?} differ from column dims {:?}",
            x.row_dims(),
            x.col_dims()
        )));
    }
    let n = x.row_dims().len();
    if n > MAX_COPIES {
        return Err(Error::DimensionLimit(format!(
            "{n} copies exceed the cap of {MAX_COPIES}"
        )));
    }
    Ok(n)
}

/// Position of slot `t` in a matrix from which the slots of `mask` (all
/// smaller than `t`) have been traced.
fn position(mask: u32, t: usize) -> usize {
    t - mask.count_ones() as usize
}

fn sum_by_mask(terms: &[Complex64], beta: f64) -> Complex64 {
    // increasing mask order, β^{|S|} from popcount
    terms
        .iter()
        .enumerate()
        .map(|(mask, v)| v * beta.powi((mask as u32).count_ones() as i32))
        .sum()
}

/// `Σ_S β^{|S|} ‖Tr_S x‖²_F` over all subsets of the copies of `x`.
///
/// `x` has `N` row slots and `N` matching column slots; copy `n` is row
/// slot `n` together with column slot `n`. The empty set contributes
/// `‖x‖²_F` and the full set `|Tr x|²`.
pub fn q_functional(x: &ComplexMatrix, beta: f64) -> Result<f64> {
    let n = check_operand(x)?;
    let mut norms = vec![Complex64::new(0.0, 0.0); 1 << n];
    walk(x, 0, 0, n, &mut |mask, m| {
        norms[mask as usize] = Complex64::new(m.frobenius_norm_sqr(), 0.0);
    })?;
    Ok(sum_by_mask(&norms, beta).re)
}

fn walk(
    m: &ComplexMatrix,
    mask: u32,
    next: usize,
    n: usize,
    visit: &mut impl FnMut(u32, &ComplexMatrix),
) -> Result<()> {
    visit(mask, m);
    for t in next..n {
        let child = trace_slot(m, position(mask, t))?;
        walk(&child, mask | (1 << t), t + 1, n, visit)?;
    }
    Ok(())
}

/// `f(x, y) = Σ_S β^{|S|} Tr[(Tr_S x)^† Tr_S y]`, antilinear in `x`.
pub fn f_bilinear(x: &ComplexMatrix, y: &ComplexMatrix, beta: f64) -> Result<Complex64> {
    let n = check_operand(x)?;
    check_operand(y)?;
    if x.row_dims() != y.row_dims() {
        return Err(shape(format!(
            "operand dims {:?} and {:?} differ",
            x.row_dims(),
            y.row_dims()
        )));
    }
    let mut terms = vec![Complex64::new(0.0, 0.0); 1 << n];
    walk_pair(x, y, 0, 0, n, &mut terms)?;
    Ok(sum_by_mask(&terms, beta))
}

fn walk_pair(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    mask: u32,
    next: usize,
    n: usize,
    terms: &mut [Complex64],
) -> Result<()> {
    terms[mask as usize] = x.frobenius_inner(y)?;
    for t in next..n {
        let p = position(mask, t);
        walk_pair(&trace_slot(x, p)?, &trace_slot(y, p)?, mask | (1 << t), t + 1, n, terms)?;
    }
    Ok(())
}

/// Value of `q` and the matrix `G = Σ_S β^{|S|} Tr_S^†(Tr_S x)`.
///
/// `q(x + h) = q(x) + 2 Re Tr(G^† h) + O(‖h‖²)`, so the gradient with
/// respect to the real coordinates of `x` is `2G`.
pub fn q_value_and_gradient(x: &ComplexMatrix, beta: f64) -> Result<(f64, ComplexMatrix)> {
    let n = check_operand(x)?;
    let dims = x.row_dims().to_vec();
    let mut norms = vec![Complex64::new(0.0, 0.0); 1 << n];
    let g = adjoint_walk(x, 0, 0, &dims, beta, &mut norms)?;
    Ok((sum_by_mask(&norms, beta).re, g))
}

fn adjoint_walk(
    m: &ComplexMatrix,
    mask: u32,
    next: usize,
    dims: &[usize],
    beta: f64,
    norms: &mut [Complex64],
) -> Result<ComplexMatrix> {
    norms[mask as usize] = Complex64::new(m.frobenius_norm_sqr(), 0.0);
    let mut acc = m.scale_real(beta.powi(mask.count_ones() as i32));
    for t in next..dims.len() {
        let p = position(mask, t);
        let child = trace_slot(m, p)?;
        let back = adjoint_walk(&child, mask | (1 << t), t + 1, dims, beta, norms)?;
        let lifted = embed_identity_slot(&back, p, dims[t])?;
        acc.axpy(Complex64::new(1.0, 0.0), &lifted.with_dims(m.row_dims().to_vec(), m.col_dims().to_vec())?)?;
    }
    Ok(acc)
}

/// `q(x) / ‖x‖²_F` for an unnormalized `x`.
///
/// Every term of `q` is a squared norm of a linear image of `x`, including
/// `|Tr x|²` for the full set, so `q(tx) = t² q(x)` and the ratio is the
/// value at the normalized point.
pub fn q_normalized(x: &ComplexMatrix, beta: f64) -> Result<f64> {
    let n2 = x.frobenius_norm_sqr();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(Error::Argument("cannot normalize a zero matrix".into()));
    }
    Ok(q_functional(x, beta)? / n2)
}
