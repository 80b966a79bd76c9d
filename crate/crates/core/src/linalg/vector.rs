//! Small helpers on complex vectors stored as slices.

use num_complex::Complex64;

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Real inner product of the underlying real coordinates, `Re⟨a, b⟩`.
pub fn real_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit vector along `a`, or `None` for a (numerically) zero vector.
pub fn normalized(a: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = norm(a);
    (n > 1e-300 && n.is_finite()).then(|| a.iter().map(|z| z / n).collect())
}

/// Gram-Schmidt on two vectors (with one re-orthogonalization pass).
pub fn orthonormalize_pair(a: &[Complex64], b: &[Complex64]) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let e1 = normalized(a)?;
    let nb = norm(b);
    let mut v = b.to_vec();
    for _ in 0..2 {
        let p = inner(&e1, &v);
        for (x, e) in v.iter_mut().zip(&e1) {
            *x -= p * e;
        }
    }
    if norm(&v) <= 1e-12 * nb {
        return None;
    }
    let e2 = normalized(&v)?;
    Some((e1, e2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_is_orthonormal() {
        let a: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let b: Vec<Complex64> = (0..5).map(|i| Complex64::new(1.0, (i * i) as f64)).collect();
        let (e1, e2) = orthonormalize_pair(&a, &b).unwrap();
        assert!((norm(&e1) - 1.0).abs() < 1e-15);
        assert!((norm(&e2) - 1.0).abs() < 1e-15);
        assert!(inner(&e1, &e2).norm() < 1e-15);
        let parallel: Vec<Complex64> = a.iter().map(|z| z * Complex64::new(0.0, -2.0)).collect();
        assert!(orthonormalize_pair(&a, &parallel).is_none());
    }
}
