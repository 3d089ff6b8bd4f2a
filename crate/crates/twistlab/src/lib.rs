//! Numerics for relative character varieties of punctured-sphere groups in
//! PSL(2,R): chain representations with elliptic peripherals, twist flows
//! and Dehn twists, the moment map and its polytope, relative Euler class
//! and volume, Poisson brackets of angle functions, and random-walk
//! equidistribution experiments.

pub mod bracket;
pub mod construct;
pub mod dynamics;
pub mod ergodics;
pub mod error;
pub mod euler;
pub mod hyp2;
pub mod surface;

pub use error::{Result, TwistError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
