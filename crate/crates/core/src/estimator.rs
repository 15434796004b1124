//! A-priori error estimate for polynomial approximation of `1/R` along a
//! radial line, and the quadrature order selection built on it.
//!
//! Along a ray, `r = r_mid (1 - t)` with `r_mid = r_max / 2`, and `1/R` is
//! expanded in Legendre polynomials of `cos(phi) = r_mid / R_mid`. The
//! remainder after `Q` terms is estimated from the large-order asymptotics
//! of `P_q`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::RadialExtents;

/// Largest polynomial order handled by Gaussian quadrature before switching
/// to the analytic method (a 16-point rule per direction).
pub const DEFAULT_Q_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorGeom {
    pub r_mid: f64,
    pub big_r_mid: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub t: f64,
}

impl EstimatorGeom {
    /// `t` is taken at the point of the triangle nearest the origin and
    /// clamped to `[0, 1]`.
    pub fn new(extents: &RadialExtents, z: f64) -> Self {
        let r_mid = 0.5 * extents.r_max;
        let t = if r_mid > 0.0 {
            ((r_mid - extents.r_min) / r_mid).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Self::with_t(r_mid, z, t)
    }

    pub fn with_t(r_mid: f64, z: f64, t: f64) -> Self {
        let big_r_mid = r_mid.hypot(z);
        Self {
            r_mid,
            big_r_mid,
            cos_phi: r_mid / big_r_mid,
            sin_phi: z.abs() / big_r_mid,
            t,
        }
    }

    fn phi(&self) -> f64 {
        self.sin_phi.atan2(self.cos_phi)
    }
}

/// Signed estimate of the truncation remainder of the expansion of `1/R`.
pub fn epsilon_q(g: &EstimatorGeom, q: usize) -> Result<f64> {
    if !(g.sin_phi > 0.0) {
        return Err(Error::EstimatorUndefined);
    }
    let phi = g.phi();
    let qp1 = (q + 1) as f64;
    let prefactor = Complex64::new(1.0, 1.0) / g.big_r_mid * Complex64::from_polar(1.0, 0.5 * phi)
        / (PI * qp1 * g.sin_phi).sqrt();
    let ratio = Complex64::from_polar(g.t * g.cos_phi, phi);
    let tail = ratio.powi(q as i32 + 1) / (Complex64::new(1.0, 0.0) - ratio);
    Ok((prefactor * tail).im)
}

/// Magnitude form of the remainder estimate.
pub fn e_q(g: &EstimatorGeom, q: usize) -> Result<f64> {
    if !(g.sin_phi > 0.0) {
        return Err(Error::EstimatorUndefined);
    }
    let qp1 = (q + 1) as f64;
    let (c, s, t) = (g.cos_phi, g.sin_phi, g.t);
    let denom = ((1.0 - t) * (1.0 - t) * c * c + s * s).sqrt();
    Ok((2.0 / (PI * s)).sqrt() / g.big_r_mid * t.abs().powf(qp1) / qp1.sqrt() * c.powf(qp1) / denom)
}

/// Closed form of [`e_q`] at `t = 1`.
pub fn e_q_enclosed(g: &EstimatorGeom, q: usize) -> Result<f64> {
    if !(g.sin_phi > 0.0) {
        return Err(Error::EstimatorUndefined);
    }
    let qp1 = (q + 1) as f64;
    Ok((2.0 / (PI * g.sin_phi.powi(3))).sqrt() / g.big_r_mid * g.cos_phi.powf(qp1) / qp1.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    /// Selected polynomial order, or `q_cap + 1` when the analytic method is required.
    pub q: usize,
    /// Estimate at `q` (at `q_cap` when the analytic method is required;
    /// infinite when the estimate is undefined and the integral is singular).
    pub e_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderSelection {
    /// Gaussian quadrature of polynomial order `q` suffices.
    Numeric(ErrorEstimate),
    AnalyticRequired(ErrorEstimate),
}

impl OrderSelection {
    pub fn estimate(&self) -> ErrorEstimate {
        match *self {
            Self::Numeric(e) | Self::AnalyticRequired(e) => e,
        }
    }
}

/// Gauss points per direction for polynomial order `q`.
pub fn gauss_points(q: usize) -> usize {
    (q + 2) / 2
}

/// Smallest `Q` with `E_Q <= tol`, up to `q_cap`.
pub fn select_order(extents: &RadialExtents, z: f64, tol: f64, q_cap: usize) -> OrderSelection {
    let g = EstimatorGeom::new(extents, z);
    if g.sin_phi == 0.0 {
        // in-plane field point: r/R == 1 unless the origin touches the element
        return if extents.r_min > 0.0 {
            OrderSelection::Numeric(ErrorEstimate { q: 1, e_q: 0.0 })
        } else {
            OrderSelection::AnalyticRequired(ErrorEstimate {
                q: q_cap + 1,
                e_q: f64::INFINITY,
            })
        };
    }
    let mut last = f64::INFINITY;
    for q in 1..=q_cap {
        let e = e_q(&g, q).unwrap_or(f64::INFINITY);
        if e <= tol {
            return OrderSelection::Numeric(ErrorEstimate { q, e_q: e });
        }
        last = e;
    }
    OrderSelection::AnalyticRequired(ErrorEstimate {
        q: q_cap + 1,
        e_q: last,
    })
}

/// Exact remainder of the Legendre expansion of `1/R` after `q` terms,
/// summed directly from the tail of the series.
pub fn legendre_remainder(g: &EstimatorGeom, q: usize) -> f64 {
    let x = g.cos_phi;
    let ratio = g.t * g.cos_phi;
    if ratio >= 1.0 {
        return f64::NAN;
    }
    let (mut p_prev, mut p) = (0.0, 1.0);
    let mut pow: f64 = 1.0;
    let mut tail: f64 = 0.0;
    let mut abs_sum: f64 = 0.0;
    for n in 0..10_000_000usize {
        if n > q {
            let term = pow * p;
            tail += term;
            abs_sum += term.abs();
            if pow / (1.0 - ratio) < 1e-17 * abs_sum {
                break;
            }
        }
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
        pow *= ratio;
        if pow == 0.0 {
            break;
        }
    }
    tail / g.big_r_mid
}
