//! Dense complex linear algebra over composite index spaces.
//!
//! Every matrix carries the tensor-factor structure of its rows and columns.
//! Flattened indices use a positional encoding with the leftmost factor as the
//! most significant digit, so `|i j⟩` on `d x d` maps to `i * d + j`.

mod decomp;
mod matrix;
mod ops;
mod permute;
pub mod vector;

pub use decomp::{hermitian_eigen, min_eigenvalue_hermitian, svd, symmetric_eigenvalues, HermitianEigen, Svd};
pub use matrix::{ComplexMatrix, Limits, MultipartiteState, SubsystemSet, HERMITIAN_TOL, NORM_TOL};
pub use ops::{embed_identity_slot, kron, kron_with_limits, partial_trace, partial_transpose, trace_slot};
pub use permute::{permute_subsystems, PermuteSubsystems, SubsystemPermutation};
