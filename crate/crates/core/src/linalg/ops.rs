use num_complex::Complex64;

use super::matrix::{ComplexMatrix, Limits, SubsystemSet};
use crate::error::{shape, Result};

/// `a ⊗ b` under the default [`Limits`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_limits(a, b, &Limits::default())
}

pub fn kron_with_limits(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    limits: &Limits,
) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        _ => {
            return Err(crate::Error::DimensionLimit(
                "kron size overflows usize".into(),
            ))
        }
    };
    limits.check(rows, cols)?;

    let (br, bc) = (b.rows(), b.cols());
    let mut data = vec![Complex64::new(0.0, 0.0); rows * cols];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let s = a[(i, j)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                let out = &mut data[(i * br + k) * cols + j * bc..][..bc];
                let brow = &b.entries()[k * bc..(k + 1) * bc];
                for (o, &v) in out.iter_mut().zip(brow) {
                    *o = s * v;
                }
            }
        }
    }
    let row_dims = [a.row_dims(), b.row_dims()].concat();
    let col_dims = [a.col_dims(), b.col_dims()].concat();
    ComplexMatrix::new(row_dims, col_dims, data)
}

/// Splits the flattened axis around `slot` as (outer, slot dimension, inner).
fn split_at_slot(dims: &[usize], slot: usize) -> (usize, usize, usize) {
    let outer = dims[..slot].iter().product();
    let inner = dims[slot + 1..].iter().product();
    (outer, dims[slot], inner)
}

fn check_square_slot(m: &ComplexMatrix, slot: usize) -> Result<()> {
    if !m.is_square_composite() {
        return Err(shape(format!(
            "row dims {:?} differ from column dims {:?}",
            m.row_dims(),
            m.col_dims()
        )));
    }
    if slot >= m.row_dims().len() {
        return Err(shape(format!(
            "slot {slot} out of range for dims {:?}",
            m.row_dims()
        )));
    }
    Ok(())
}

fn dims_without(dims: &[usize], slot: usize) -> Vec<usize> {
    let mut out: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != slot)
        .map(|(_, &d)| d)
        .collect();
    if out.is_empty() {
        out.push(1);
    }
    out
}

/// Traces out a single slot of a square composite matrix.
pub fn trace_slot(m: &ComplexMatrix, slot: usize) -> Result<ComplexMatrix> {
    check_square_slot(m, slot)?;
    let (outer, dk, inner) = split_at_slot(m.row_dims(), slot);
    let new_side = outer * inner;
    let n = m.cols();
    let src = m.entries();
    let mut data = vec![Complex64::new(0.0, 0.0); new_side * new_side];
    for ro in 0..outer {
        for ri in 0..inner {
            let out_row = &mut data[(ro * inner + ri) * new_side..][..new_side];
            for k in 0..dk {
                let r = (ro * dk + k) * inner + ri;
                let src_row = &src[r * n..(r + 1) * n];
                for co in 0..outer {
                    let base = (co * dk + k) * inner;
                    let out_chunk = &mut out_row[co * inner..(co + 1) * inner];
                    for (o, &v) in out_chunk.iter_mut().zip(&src_row[base..base + inner]) {
                        *o += v;
                    }
                }
            }
        }
    }
    let dims = dims_without(m.row_dims(), slot);
    ComplexMatrix::new(dims.clone(), dims, data)
}

/// Adjoint of [`trace_slot`]: inserts an identity factor of dimension `dim`
/// at position `slot`.
pub fn embed_identity_slot(m: &ComplexMatrix, slot: usize, dim: usize) -> Result<ComplexMatrix> {
    if !m.is_square_composite() {
        return Err(shape("embedding needs a square composite matrix"));
    }
    let dims: Vec<usize> = if m.rows() == 1 && m.row_dims() == [1] {
        Vec::new()
    } else {
        m.row_dims().to_vec()
    };
    if slot > dims.len() {
        return Err(shape(format!("slot {slot} out of range for dims {dims:?}")));
    }
    let outer: usize = dims[..slot].iter().product();
    let inner: usize = dims[slot..].iter().product();
    let mut new_dims = dims.clone();
    new_dims.insert(slot, dim);
    let side = outer * dim * inner;
    let mut data = vec![Complex64::new(0.0, 0.0); side * side];
    let src_side = outer * inner;
    for ro in 0..outer {
        for ri in 0..inner {
            let src_row = &m.entries()[(ro * inner + ri) * src_side..][..src_side];
            for k in 0..dim {
                let r = (ro * dim + k) * inner + ri;
                for co in 0..outer {
                    let base = (co * dim + k) * inner;
                    data[r * side + base..r * side + base + inner]
                        .copy_from_slice(&src_row[co * inner..(co + 1) * inner]);
                }
            }
        }
    }
    ComplexMatrix::new(new_dims.clone(), new_dims, data)
}

/// Traces out every slot in `traced`. Slots are processed in ascending order
/// by repeated single-slot traces.
pub fn partial_trace(m: &ComplexMatrix, traced: SubsystemSet) -> Result<ComplexMatrix> {
    if !m.is_square_composite() {
        return Err(shape(format!(
            "row dims {:?} differ from column dims {:?}",
            m.row_dims(),
            m.col_dims()
        )));
    }
    let nslots = m.row_dims().len();
    if let Some(bad) = traced.iter().find(|&s| s >= nslots) {
        return Err(shape(format!("slot {bad} out of range for {nslots} slots")));
    }
    let mut out = m.clone();
    for (removed, slot) in traced.iter().enumerate() {
        out = trace_slot(&out, slot - removed)?;
    }
    Ok(out)
}

/// Transposes the indices of one slot only.
pub fn partial_transpose(m: &ComplexMatrix, slot: usize) -> Result<ComplexMatrix> {
    check_square_slot(m, slot)?;
    let (outer, dk, inner) = split_at_slot(m.row_dims(), slot);
    let mut out = m.clone();
    for ro in 0..outer {
        for k in 0..dk {
            for ri in 0..inner {
                let r = (ro * dk + k) * inner + ri;
                for co in 0..outer {
                    for kp in 0..dk {
                        for ci in 0..inner {
                            let c = (co * dk + kp) * inner + ci;
                            let r_src = (ro * dk + kp) * inner + ri;
                            let c_src = (co * dk + k) * inner + ci;
                            out[(r, c)] = m[(r_src, c_src)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_matrix, rng_from_seed};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn swap(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(vec![d, d], vec![d, d], |r, col| {
            let (i, j) = (r / d, r % d);
            let (k, l) = (col / d, col % d);
            c(if i == l && j == k { 1.0 } else { 0.0 })
        })
        .unwrap()
    }

    #[test]
    fn kron_identities_and_diagonals() {
        let i2 = ComplexMatrix::identity(vec![2]).unwrap();
        let i4 = kron(&i2, &i2).unwrap();
        assert_eq!(i4.row_dims(), &[2, 2]);
        assert_eq!(i4, ComplexMatrix::identity(vec![2, 2]).unwrap());

        let a = ComplexMatrix::diag_real(&[1.0, 2.0]).unwrap();
        let b = ComplexMatrix::diag_real(&[3.0, 4.0]).unwrap();
        let k = kron(&a, &b).unwrap();
        let want = ComplexMatrix::diag_real(&[3.0, 4.0, 6.0, 8.0]).unwrap();
        assert_eq!(k.max_abs_diff(&want), 0.0);
    }

    #[test]
    fn kron_matches_quadruple_loop() {
        let f = swap(2);
        let k = kron(&f, &f).unwrap();
        assert_eq!(k.rows(), 16);
        for i1 in 0..4 {
            for i2 in 0..4 {
                for j1 in 0..4 {
                    for j2 in 0..4 {
                        let want = f[(i1, j1)] * f[(i2, j2)];
                        assert_eq!(k[(i1 * 4 + i2, j1 * 4 + j2)], want);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_respects_limits() {
        let a = ComplexMatrix::identity(vec![300]).unwrap();
        assert!(matches!(
            kron_with_limits(&a, &a, &Limits { max_side: 1 << 16, max_entries: 1 << 12 }),
            Err(crate::Error::DimensionLimit(_))
        ));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[0.5, -1.0], &[2.0, 1.5]]).unwrap();
        let ab = kron(&a, &b).unwrap();
        let t = partial_trace(&ab, SubsystemSet::from_slots(&[1]).unwrap()).unwrap();
        assert!(t.max_abs_diff(&a.scale_real(2.0)) < 1e-14);

        let i4 = ComplexMatrix::identity(vec![2, 2]).unwrap();
        let t = partial_trace(&i4, SubsystemSet::from_slots(&[0]).unwrap()).unwrap();
        assert!(t.max_abs_diff(&ComplexMatrix::identity(vec![2]).unwrap().scale_real(2.0)) == 0.0);
    }

    #[test]
    fn partial_trace_matches_triple_loop() {
        let mut rng = rng_from_seed(11);
        let m = random_matrix(&mut rng, vec![3, 3], vec![3, 3]);
        let t = partial_trace(&m, SubsystemSet::from_slots(&[0]).unwrap()).unwrap();
        for j in 0..3 {
            for l in 0..3 {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..3 {
                    s += m[(i * 3 + j, i * 3 + l)];
                }
                assert!((t[(j, l)] - s).norm() < 1e-14);
            }
        }
        let t = partial_trace(&m, SubsystemSet::from_slots(&[1]).unwrap()).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let s: Complex64 = (0..3).map(|j| m[(i * 3 + j, k * 3 + j)]).sum();
                assert!((t[(i, k)] - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn full_partial_trace_is_scalar_trace() {
        let mut rng = rng_from_seed(12);
        for dims in [vec![2, 3], vec![2, 2, 2], vec![3, 2, 2]] {
            let m = random_matrix(&mut rng, dims.clone(), dims.clone());
            let t = partial_trace(&m, SubsystemSet::all(dims.len()).unwrap()).unwrap();
            assert_eq!((t.rows(), t.cols()), (1, 1));
            assert!((t[(0, 0)] - m.trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_input() {
        let m = ComplexMatrix::zeros(vec![2, 2], vec![4]).unwrap();
        assert!(partial_trace(&m, SubsystemSet::from_slots(&[0]).unwrap()).is_err());
        let m = ComplexMatrix::zeros(vec![2, 2], vec![2, 2]).unwrap();
        assert!(partial_trace(&m, SubsystemSet::from_slots(&[2]).unwrap()).is_err());
    }

    #[test]
    fn embed_is_adjoint_of_trace() {
        let mut rng = rng_from_seed(13);
        let dims = vec![2, 3, 2];
        let x = random_matrix(&mut rng, dims.clone(), dims.clone());
        for slot in 0..3 {
            let reduced = dims_without(&dims, slot);
            let y = random_matrix(&mut rng, reduced.clone(), reduced);
            let lhs = y.frobenius_inner(&trace_slot(&x, slot).unwrap()).unwrap();
            let rhs = embed_identity_slot(&y, slot, dims[slot])
                .unwrap()
                .frobenius_inner(&x)
                .unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_rules() {
        let mut rng = rng_from_seed(14);
        let a = random_matrix(&mut rng, vec![2], vec![2]);
        let b = random_matrix(&mut rng, vec![3], vec![3]);
        let ab = kron(&a, &b).unwrap();
        let pt = partial_transpose(&ab, 0).unwrap();
        assert!(pt.max_abs_diff(&kron(&a.transpose(), &b).unwrap()) < 1e-15);
        assert_eq!(partial_transpose(&pt, 0).unwrap(), ab);
        assert!((pt.trace() - ab.trace()).norm() < 1e-14);
        assert!(partial_transpose(&ab, 2).is_err());
    }

    #[test]
    fn partial_transpose_of_g_is_swap() {
        let d = 2;
        let g = ComplexMatrix::from_fn(vec![d, d], vec![d, d], |r, col| {
            let (i, j) = (r / d, r % d);
            let (k, l) = (col / d, col % d);
            c(if i == j && k == l { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert_eq!(partial_transpose(&g, 0).unwrap(), swap(d));
    }
}
