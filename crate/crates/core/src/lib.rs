#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod linalg;

pub mod assembly;
pub mod coeff;
pub mod mesh;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
