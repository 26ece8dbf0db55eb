pub mod affine;
pub mod cli;
pub mod error;
pub mod hecke;
pub mod nodes;
pub mod pieri;
pub mod precise;
pub mod rootdata;
pub mod spherical;
pub mod tring;

pub use error::{Error, Result};
