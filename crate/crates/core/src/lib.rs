//! Helmholtz layer-potential integrals over plane triangular elements.
//!
//! Values are integrals of `e^{jkR}/R` (and first moments and normal
//! derivatives) over the element; the free-space Green's function carries an
//! additional factor [`INV_FOUR_PI`].

pub mod analytic;
pub mod elementary;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod expapprox;
pub mod geometry;
pub mod numeric;
pub mod panel;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use panel::PanelIntegrals;

/// `1 / (4 pi)`: multiply any returned integral by this to integrate the
/// Green's function `e^{jkR} / (4 pi R)`.
pub const INV_FOUR_PI: f64 = 0.25 * std::f64::consts::FRAC_1_PI;
