//! One-dimensional quadrature building blocks.

pub mod adaptive;
pub mod gauss;

pub use adaptive::{Adaptive, Tolerance};
pub use gauss::GaussRule;
