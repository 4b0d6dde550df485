//! Sequential hyperbolic dynamics on the circle and the 2-torus.
//!
//! Sequences of expanding circle maps and hyperbolic torus maps, shadowing of
//! their pseudo-orbits, sequential conjugacies and quasi-conjugacies between
//! nearby sequences, Birkhoff averages and empirical measures, non-autonomous
//! topological entropy from separated sets, and CLT/ASIP statistics.

pub mod conjugacy;
pub mod digits;
pub mod entropy;
pub mod ergodic;
pub mod error;
pub mod limit_stats;
pub mod phase_maps;
pub mod shadowing;
pub mod stats;

pub use error::{Error, Result};
pub use phase_maps::*;
