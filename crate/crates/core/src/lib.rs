//! Exact orbital integrals, nilpotent orbital integrals and Shalika germs
//! for sl2 over Q_p (p odd).

pub mod error;
pub mod germ;
pub mod mat;
pub mod padic;
pub mod rational;
pub mod sl2;
pub mod tree;
pub mod lcf;
pub mod linalg;
pub mod orbital;
pub mod suites;
pub mod cli;

pub use error::{Error, Result};
