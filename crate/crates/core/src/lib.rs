//! Random walks on the integer line, the diagonal lattice, and a space of
//! the free group on three generators in which recurrence of a point is not
//! decided by its orbit.

pub mod chain;
pub mod counterexample;
pub mod error;
pub mod exec;
pub mod return_laws;
pub mod rng;
pub mod space;
pub mod stable;
pub mod stats;
pub mod weight;

pub use error::{Error, Result};
pub use exec::Exec;
