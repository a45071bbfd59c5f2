//! Mean values of the multiplicative function `D_{k,omega}(n) = d(n) / k^omega(n)`.

pub mod cache;
pub mod cli;
pub mod dirichlet;
pub mod error;
pub mod euler;
pub mod sieve;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
