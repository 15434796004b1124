//! The integrals returned for one element and field point.

use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;

/// Integrals of `e^{jkR}/R` over an element, without the `1/(4 pi)` of the
/// Green's function.
///
/// Moments `ix`, `iy` are taken in the element-plane frame about the
/// projection of the field point. Derivatives follow the source-normal
/// convention `d/dn = -d/dz`, where `z` is the signed height of the field
/// point along the element normal; the second derivative is sign-free.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PanelIntegrals {
    pub i0: Complex64,
    pub ix: Complex64,
    pub iy: Complex64,
    pub di0_dn: Complex64,
    pub dix_dn: Complex64,
    pub diy_dn: Complex64,
    pub d2i0_dn2: Option<Complex64>,
}

impl PanelIntegrals {
    /// Rotates the moments (and their derivatives) by `beta` about the normal.
    pub fn rotated(mut self, beta: f64) -> Self {
        let (sn, cs) = beta.sin_cos();
        let rot = |x: Complex64, y: Complex64| (x * cs - y * sn, x * sn + y * cs);
        (self.ix, self.iy) = rot(self.ix, self.iy);
        (self.dix_dn, self.diy_dn) = rot(self.dix_dn, self.diy_dn);
        self
    }

    /// Largest componentwise modulus difference (over the values present in both).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = [
            (self.i0 - other.i0).norm(),
            (self.ix - other.ix).norm(),
            (self.iy - other.iy).norm(),
            (self.di0_dn - other.di0_dn).norm(),
            (self.dix_dn - other.dix_dn).norm(),
            (self.diy_dn - other.diy_dn).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if let (Some(a), Some(b)) = (self.d2i0_dn2, other.d2i0_dn2) {
            d = d.max((a - b).norm());
        }
        d
    }
}

fn add_opt(a: Option<Complex64>, b: Option<Complex64>) -> Option<Complex64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a + b),
        (a, None) => a,
        (None, b) => b,
    }
}

impl Add for PanelIntegrals {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            i0: self.i0 + o.i0,
            ix: self.ix + o.ix,
            iy: self.iy + o.iy,
            di0_dn: self.di0_dn + o.di0_dn,
            dix_dn: self.dix_dn + o.dix_dn,
            diy_dn: self.diy_dn + o.diy_dn,
            d2i0_dn2: add_opt(self.d2i0_dn2, o.d2i0_dn2),
        }
    }
}

impl AddAssign for PanelIntegrals {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Mul<f64> for PanelIntegrals {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            i0: self.i0 * s,
            ix: self.ix * s,
            iy: self.iy * s,
            di0_dn: self.di0_dn * s,
            dix_dn: self.dix_dn * s,
            diy_dn: self.diy_dn * s,
            d2i0_dn2: self.d2i0_dn2.map(|v| v * s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_preserves_moment_norm() {
        let p = PanelIntegrals {
            ix: Complex64::new(1.0, 2.0),
            iy: Complex64::new(-0.5, 0.25),
            ..Default::default()
        };
        let r = p.rotated(0.8);
        let n = |p: &PanelIntegrals| p.ix.norm_sqr() + p.iy.norm_sqr();
        assert!((n(&p) - n(&r)).abs() < 1e-14);
        let back = r.rotated(-0.8);
        assert!(back.max_abs_diff(&p) < 1e-15);
    }
}
