pub mod acceptance;
pub mod cli;
pub mod disorder;
pub mod error;
pub mod lattice;
pub mod moments;
pub mod oracle;
pub mod pinning;
pub mod polymer;
pub(crate) mod quadrature;
pub mod rng;

pub use error::{Error, Result};
