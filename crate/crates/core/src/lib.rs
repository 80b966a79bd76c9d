//! Numerical toolkit for the N-copy undistillability question of Werner
//! states: composite-space linear algebra, the Werner family, Schmidt
//! decompositions, the rank-two distillability functional, the distillation
//! iteration and a rank-one multivariate relaxation.

pub mod cli;
pub mod distill;
pub mod error;
pub mod iterate;
pub mod linalg;
pub mod multivar;
pub mod optimize;
pub mod sampling;
pub mod schmidt;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
