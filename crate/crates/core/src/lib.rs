//! Matrix Hellinger-type distances on positive definite matrices, the means
//! behind them, exact derivatives, tracial Bregman divergences and
//! barycentre solvers.

pub mod barycentre;
pub mod bregman;
pub mod calculus;
pub mod cli;
pub mod distances;
pub mod error;
pub mod legendre;
pub mod linalg;
pub mod means;
pub mod sample;

pub use error::{Error, Result};
