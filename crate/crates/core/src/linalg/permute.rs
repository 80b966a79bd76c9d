use num_complex::Complex64;

use super::matrix::{dims_product, ComplexMatrix, MultipartiteState};
use crate::error::{argument, shape, Result};

/// Relabelling of tensor slots: source slot `s` moves to target slot `perm[s]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemPermutation {
    perm: Vec<usize>,
    dims: Vec<usize>,
}

impl SubsystemPermutation {
    pub fn new(perm: Vec<usize>, dims: Vec<usize>) -> Result<Self> {
        if perm.len() != dims.len() {
            return Err(shape(format!(
                "permutation of length {} for {} slots",
                perm.len(),
                dims.len()
            )));
        }
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(argument(format!("{perm:?} is not a bijection")));
            }
        }
        dims_product(&dims)?;
        Ok(SubsystemPermutation { perm, dims })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        Self::new((0..dims.len()).collect(), dims)
    }

    /// `A1 B1 A2 B2 .. AN BN -> A1 .. AN B1 .. BN` for `n` copies of a
    /// bipartite system with local dimension `d` per side.
    pub fn merge_copies(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(argument("need at least one copy"));
        }
        let perm = (0..2 * n)
            .map(|s| if s % 2 == 0 { s / 2 } else { n + s / 2 })
            .collect();
        Self::new(perm, vec![d; 2 * n])
    }

    /// Two-copy exchange of the middle slots, `A1 B1 A2 B2 -> A1 A2 B1 B2`,
    /// for blocks of dimension `d`.
    pub fn exchange(d: usize) -> Result<Self> {
        Self::new(vec![0, 2, 1, 3], vec![d; 4])
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Slot dimensions after relabelling.
    pub fn target_dims(&self) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (s, &t) in self.perm.iter().enumerate() {
            out[t] = self.dims[s];
        }
        out
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (s, &t) in self.perm.iter().enumerate() {
            inv[t] = s;
        }
        SubsystemPermutation {
            perm: inv,
            dims: self.target_dims(),
        }
    }

    /// Flattened target index for every flattened source index.
    pub fn index_map(&self) -> Vec<usize> {
        let n: usize = self.dims.iter().product();
        let target_dims = self.target_dims();
        let mut target_strides = vec![1usize; target_dims.len()];
        for k in (0..target_dims.len().saturating_sub(1)).rev() {
            target_strides[k] = target_strides[k + 1] * target_dims[k + 1];
        }
        let slot_strides: Vec<usize> = self.perm.iter().map(|&t| target_strides[t]).collect();
        let mut map = Vec::with_capacity(n);
        let mut digits = vec![0usize; self.dims.len()];
        let mut t = 0usize;
        for _ in 0..n {
            map.push(t);
            // odometer increment over the source digits
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                t += slot_strides[k];
                if digits[k] < self.dims[k] {
                    break;
                }
                t -= slot_strides[k] * digits[k];
                digits[k] = 0;
            }
        }
        map
    }
}

/// Types whose composite indices can be relabelled by a subsystem permutation.
pub trait PermuteSubsystems: Sized {
    fn permute_subsystems(&self, p: &SubsystemPermutation) -> Result<Self>;
}

impl PermuteSubsystems for MultipartiteState {
    fn permute_subsystems(&self, p: &SubsystemPermutation) -> Result<Self> {
        if self.dims() != p.dims() {
            return Err(shape(format!(
                "state dims {:?} vs permutation dims {:?}",
                self.dims(),
                p.dims()
            )));
        }
        let map = p.index_map();
        let mut out = vec![Complex64::new(0.0, 0.0); map.len()];
        for (s, &t) in map.iter().enumerate() {
            out[t] = self.amplitudes()[s];
        }
        MultipartiteState::new(out, p.target_dims())
    }
}

/// Conjugation `P m P^†`: both row and column indices are relabelled.
impl PermuteSubsystems for ComplexMatrix {
    fn permute_subsystems(&self, p: &SubsystemPermutation) -> Result<Self> {
        if self.row_dims() != p.dims() || self.col_dims() != p.dims() {
            return Err(shape(format!(
                "matrix dims {:?}x{:?} vs permutation dims {:?}",
                self.row_dims(),
                self.col_dims(),
                p.dims()
            )));
        }
        let map = p.index_map();
        let n = map.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        let src = self.entries();
        for (r, &tr) in map.iter().enumerate() {
            let row = &src[r * n..(r + 1) * n];
            let dst = &mut out[tr * n..(tr + 1) * n];
            for (&v, &tc) in row.iter().zip(&map) {
                dst[tc] = v;
            }
        }
        let td = p.target_dims();
        ComplexMatrix::new(td.clone(), td, out)
    }
}

pub fn permute_subsystems<T: PermuteSubsystems>(x: &T, p: &SubsystemPermutation) -> Result<T> {
    x.permute_subsystems(p)
}
