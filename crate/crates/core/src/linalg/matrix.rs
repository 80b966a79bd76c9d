use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{shape, Error, Result};

/// Tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance for the unit-norm invariant of pure states.
pub const NORM_TOL: f64 = 1e-12;

/// Allocation caps applied by every operation that grows a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest admissible number of rows or columns.
    pub max_side: usize,
    /// Largest admissible number of stored entries.
    pub max_entries: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_side: 1 << 16,
            max_entries: 1 << 26,
        }
    }
}

impl Limits {
    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        if rows > self.max_side || cols > self.max_side {
            return Err(Error::DimensionLimit(format!(
                "{rows}x{cols} exceeds the side cap {}",
                self.max_side
            )));
        }
        match rows.checked_mul(cols) {
            Some(n) if n <= self.max_entries => Ok(()),
            _ => Err(Error::DimensionLimit(format!(
                "{rows}x{cols} exceeds the entry cap {}",
                self.max_entries
            ))),
        }
    }
}

/// Dense complex matrix over composite index spaces.
///
/// Entries are stored row-major. `row_dims` and `col_dims` record the
/// tensor-factor structure of each axis; the leftmost factor is the most
/// significant digit of the flattened index.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    data: Vec<Complex64>,
}

pub(crate) fn dims_product(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(shape("empty dimension list"));
    }
    dims.iter().try_fold(1usize, |acc, &d| {
        if d == 0 {
            return Err(shape("zero subsystem dimension"));
        }
        acc.checked_mul(d)
            .ok_or_else(|| Error::DimensionLimit("dimension product overflows".into()))
    })
}

impl ComplexMatrix {
    pub fn new(row_dims: Vec<usize>, col_dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let rows = dims_product(&row_dims)?;
        let cols = dims_product(&col_dims)?;
        if data.len() != rows * cols {
            return Err(shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            row_dims,
            col_dims,
            data,
        })
    }

    /// Plain `rows x cols` matrix with a single factor per axis.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![rows], vec![cols], data)
    }

    pub fn zeros(row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        let n = dims_product(&row_dims)? * dims_product(&col_dims)?;
        Self::new(row_dims, col_dims, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let mut m = Self::zeros(dims.clone(), dims)?;
        for i in 0..m.rows {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_fn(
        row_dims: Vec<usize>,
        col_dims: Vec<usize>,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let rows = dims_product(&row_dims)?;
        let cols = dims_product(&col_dims)?;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(row_dims, col_dims, data)
    }

    /// Real square matrix from nested rows; handy for small literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(shape("ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_vec(r, c, data)
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::from_fn(vec![n], vec![n], |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Column vector with the given composite structure.
    pub fn column(data: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, vec![1], data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.data
    }

    pub fn is_square_composite(&self) -> bool {
        self.row_dims == self.col_dims
    }

    /// Same entries, new composite labels.
    pub fn with_dims(mut self, row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        if dims_product(&row_dims)? != self.rows || dims_product(&col_dims)? != self.cols {
            return Err(shape(format!(
                "dims {row_dims:?}x{col_dims:?} do not regroup a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        self.row_dims = row_dims;
        self.col_dims = col_dims;
        Ok(self)
    }

    pub fn column_slice(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].conj());
            }
        }
        ComplexMatrix {
            rows: self.cols,
            cols: self.rows,
            row_dims: self.col_dims.clone(),
            col_dims: self.row_dims.clone(),
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.adjoint();
        t.data.iter_mut().for_each(|z| *z = z.conj());
        t
    }

    pub fn conj(&self) -> Self {
        let mut c = self.clone();
        c.data.iter_mut().for_each(|z| *z = z.conj());
        c
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut c = self.clone();
        c.data.iter_mut().for_each(|z| *z *= s);
        c
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ComplexMatrix {
            data,
            ..self.clone()
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape("axpy operands differ in shape"));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: other.cols,
            row_dims: self.row_dims.clone(),
            col_dims: other.col_dims.clone(),
            data,
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// `Tr(self^† other)`.
    pub fn frobenius_inner(&self, other: &Self) -> Result<Complex64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape("inner product operands differ in shape"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ComplexMatrix {}x{} dims {:?}x{:?}",
            self.rows, self.cols, self.row_dims, self.col_dims
        )?;
        if self.rows * self.cols <= 64 {
            for i in 0..self.rows {
                let row: Vec<String> = (0..self.cols)
                    .map(|j| {
                        let z = self[(i, j)];
                        format!("{:+.4}{:+.4}i", z.re, z.im)
                    })
                    .collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
        }
        Ok(())
    }
}

/// Normalized pure state on a multipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipartiteState {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl MultipartiteState {
    /// Wraps `amplitudes`, which must already have unit norm.
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let n = dims_product(&dims)?;
        if n != amplitudes.len() {
            return Err(shape(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Argument(format!("state norm {norm} is not 1")));
        }
        Ok(MultipartiteState { amplitudes, dims })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Argument("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(amplitudes, dims)
    }

    /// Computational basis state `|digits⟩`.
    pub fn basis(digits: &[usize], dims: Vec<usize>) -> Result<Self> {
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(&i, &d)| i >= d) {
            return Err(shape(format!("digits {digits:?} do not fit dims {dims:?}")));
        }
        let n = dims_product(&dims)?;
        let idx = digits.iter().zip(&dims).fold(0, |acc, (&i, &d)| acc * d + i);
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[idx] = Complex64::new(1.0, 0.0);
        Self::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(shape("states live in different spaces"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn to_column(&self) -> ComplexMatrix {
        ComplexMatrix::column(self.amplitudes.clone(), self.dims.clone())
            .expect("state dims are validated at construction")
    }
}

/// Set of subsystem slots, stored as a bitmask (bit `k` = slot `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SubsystemSet {
    mask: u32,
}

impl SubsystemSet {
    /// Largest number of copies a set may range over.
    pub const MAX_SLOTS: usize = 20;

    pub fn empty() -> Self {
        SubsystemSet { mask: 0 }
    }

    /// Set given by `mask` over `n` slots; requires `mask < 2^n`.
    pub fn from_mask(mask: u32, n: usize) -> Result<Self> {
        if n > Self::MAX_SLOTS {
            return Err(Error::DimensionLimit(format!(
                "{n} slots exceed the cap {}",
                Self::MAX_SLOTS
            )));
        }
        if (mask as u64) >= (1u64 << n) {
            return Err(Error::Argument(format!("mask {mask:#b} is not below 2^{n}")));
        }
        Ok(SubsystemSet { mask })
    }

    pub fn from_slots(slots: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &s in slots {
            if s >= Self::MAX_SLOTS {
                return Err(Error::Argument(format!("slot {s} out of range")));
            }
            mask |= 1 << s;
        }
        Ok(SubsystemSet { mask })
    }

    pub fn all(n: usize) -> Result<Self> {
        Self::from_mask(((1u64 << n) - 1) as u32, n)
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn contains(&self, slot: usize) -> bool {
        slot < 32 && self.mask & (1 << slot) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Slots in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |&s| self.contains(s))
    }

    /// Every subset of `n` slots in increasing mask order.
    pub fn enumerate(n: usize) -> Result<impl Iterator<Item = SubsystemSet>> {
        if n > Self::MAX_SLOTS {
            return Err(Error::DimensionLimit(format!("{n} slots")));
        }
        Ok((0..(1u32 << n)).map(|mask| SubsystemSet { mask }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_mismatched_entry_count() {
        assert!(ComplexMatrix::new(vec![2], vec![2], vec![c(1.0); 3]).is_err());
        assert!(ComplexMatrix::new(vec![2, 0], vec![2], vec![]).is_err());
    }

    #[test]
    fn adjoint_and_matmul() {
        let a = ComplexMatrix::from_vec(
            2,
            2,
            vec![c(1.0), Complex64::new(0.0, 2.0), c(3.0), c(4.0)],
        )
        .unwrap();
        let ad = a.adjoint();
        assert_eq!(ad[(0, 1)], c(3.0));
        assert_eq!(ad[(1, 0)], Complex64::new(0.0, -2.0));
        let p = a.matmul(&ad).unwrap();
        assert!(p.is_hermitian(1e-15));
        assert!((p.trace().re - a.frobenius_norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn limits_reject_large_products() {
        let l = Limits::default();
        assert!(l.check(1 << 16, 1).is_ok());
        assert!(l.check((1 << 16) + 1, 1).is_err());
        assert!(l.check(1 << 16, 1 << 16).is_err());
    }

    #[test]
    fn state_normalization_invariant() {
        assert!(MultipartiteState::new(vec![c(1.0), c(1.0)], vec![2]).is_err());
        let s = MultipartiteState::normalized(vec![c(1.0), c(1.0)], vec![2]).unwrap();
        assert!((s.inner(&s).unwrap().re - 1.0).abs() < 1e-15);
        let b = MultipartiteState::basis(&[0, 1], vec![2, 2]).unwrap();
        assert_eq!(b.amplitudes()[1], c(1.0));
    }

    #[test]
    fn subsystem_set_masks() {
        assert!(SubsystemSet::from_mask(8, 3).is_err());
        let s = SubsystemSet::from_mask(5, 3).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(s.len(), 2);
        assert_eq!(SubsystemSet::enumerate(3).unwrap().count(), 8);
        assert!(SubsystemSet::all(21).is_err());
    }
}
