//! Sparse and dense linear algebra kernels used by assembly and the eigensolvers.

mod csr;
pub mod dense;
mod skyline;

pub use csr::CsrMatrix;
pub use skyline::{reverse_cuthill_mckee, SkylineLdl};
