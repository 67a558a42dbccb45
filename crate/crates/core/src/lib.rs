//! Transfer matrices, exact periodic pattern counts, lattice coordinate
//! changes and entropy estimates for two-dimensional shifts of finite type
//! defined by a basic set of admissible 2×2 patterns.

pub mod entropy;
pub mod error;
pub mod fixtures;
pub mod lattice;
pub mod matrix;
pub mod oracle;
pub mod patterns;
pub mod spectral;
pub mod transfer;

pub use error::{Result, SftError};
