//! Numerical integration over a planar triangle: polar-coordinate Gauss
//! quadrature, an adaptive reference integrator, and a fixed symmetric
//! triangle rule.
//!
//! All routines take the triangle in the element-plane frame, with the field
//! point at `(0, 0, z)`.

use std::cell::Cell;
use std::f64::consts::PI;

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::geometry::{closest_point, origin_on_triangle, signed_area2, subdivide, Planar};
use crate::panel::PanelIntegrals;
use crate::quadrature::adaptive::{integrate, Tolerance};
use crate::quadrature::GaussRule;

/// Real components carried through the integrators: seven complex values.
pub const COMPONENTS: usize = 14;

fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Kernel `e^{jkR}/R` and its moments and `z` derivatives at planar point `p`,
/// packed as `[g, x g, y g, -g_z, -x g_z, -y g_z, g_zz]` (re, im interleaved).
pub fn kernel(p: &Vector2<f64>, z: f64, k: f64) -> [f64; COMPONENTS] {
    let r2 = p.norm_squared();
    let big_r = (r2 + z * z).sqrt();
    let inv = 1.0 / big_r;
    let g = Complex64::from_polar(inv, k * big_r);
    let a = Complex64::new(-inv, k);
    let g1 = a * g;
    let g2 = a * g1 + g * inv * inv;
    let cz = z * inv;
    let gz = g1 * cz;
    let gzz = g2 * cz * cz + g1 * (inv - z * z * inv * inv * inv);
    let vals = [g, g * p.x, g * p.y, -gz, -gz * p.x, -gz * p.y, gzz];
    let mut out = [0.0; COMPONENTS];
    for (i, v) in vals.iter().enumerate() {
        out[2 * i] = v.re;
        out[2 * i + 1] = v.im;
    }
    out
}

/// Unpacks integrator output; the hypersingular value is kept on request.
pub fn unpack(v: &[f64; COMPONENTS], hyper: bool) -> PanelIntegrals {
    let c = |i: usize| Complex64::new(v[2 * i], v[2 * i + 1]);
    PanelIntegrals {
        i0: c(0),
        ix: c(1),
        iy: c(2),
        di0_dn: c(3),
        dix_dn: c(4),
        diy_dn: c(5),
        d2i0_dn2: hyper.then(|| c(6)),
    }
}

/// Distance along direction `d` from the origin to the line through `p`, `q`.
fn line_radius(d: &Vector2<f64>, p: &Vector2<f64>, q: &Vector2<f64>) -> f64 {
    cross2(p, q) / cross2(d, &(q - p))
}

/// An angular sector swept by the point `a + τ (b - a)`, `τ ∈ [tau0, tau1]`,
/// of the outer edge `ab`; the radial range runs from the origin (or from the
/// line `inner`) out to that edge.
struct Sector {
    a: Vector2<f64>,
    b: Vector2<f64>,
    tau0: f64,
    tau1: f64,
    sign: f64,
    inner: Option<(Vector2<f64>, Vector2<f64>)>,
}

fn polar_sectors(p: &Planar) -> Vec<Sector> {
    if origin_on_triangle(p) {
        return subdivide(p)
            .into_iter()
            .map(|s| Sector {
                a: s.a,
                b: s.b,
                tau0: 0.0,
                tau1: 1.0,
                sign: s.sign,
                inner: None,
            })
            .collect();
    }
    // origin outside: order vertices by polar angle relative to the centroid
    // direction (no wrap-around, the triangle subtends less than pi)
    let c = (p[0] + p[1] + p[2]) / 3.0;
    let mut v: Vec<(f64, Vector2<f64>)> = p.iter().map(|q| (cross2(&c, q).atan2(c.dot(q)), *q)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (a, m, b) = (v[0].1, v[1].1, v[2].1);
    let (am, mb) = (cross2(&a, &m), cross2(&m, &b));
    let tau_m = am / (am + mb);
    let mut out = Vec::with_capacity(2);
    for (t0, t1, side) in [(0.0, tau_m, (a, m)), (tau_m, 1.0, (m, b))] {
        if t1 - t0 > 1e-14 {
            out.push(Sector {
                a,
                b,
                tau0: t0,
                tau1: t1,
                sign: 1.0,
                inner: Some(side),
            });
        }
    }
    out
}

/// Panels no longer than `ANGULAR_GRADING` times their distance to `pole`.
const ANGULAR_GRADING: f64 = 0.5;

/// Splits the sector's `τ` range into panels graded towards the double pole
/// of the inner radius (where the ray runs parallel to the inner edge), so
/// that Gauss convergence in the angle does not depend on that geometry.
fn angular_panels(sec: &Sector) -> Vec<(f64, f64)> {
    let Some((u, v)) = sec.inner else {
        return vec![(sec.tau0, sec.tau1)];
    };
    let d = v - u;
    let denom = cross2(&(sec.b - sec.a), &d);
    if denom == 0.0 {
        return vec![(sec.tau0, sec.tau1)];
    }
    let pole = -cross2(&sec.a, &d) / denom;
    let mut out = Vec::new();
    let mut stack = vec![(sec.tau0, sec.tau1, 0)];
    while let Some((t0, t1, depth)) = stack.pop() {
        let dist = if pole < t0 {
            t0 - pole
        } else if pole > t1 {
            pole - t1
        } else {
            0.0
        };
        if t1 - t0 <= ANGULAR_GRADING * dist || depth >= 48 {
            out.push((t0, t1));
        } else {
            let mid = 0.5 * (t0 + t1);
            stack.push((mid, t1, depth + 1));
            stack.push((t0, mid, depth + 1));
        }
    }
    out
}

/// Tensor Gauss rule with `n` points per direction and sector, in polar
/// coordinates about the origin. The angular variable is the position along
/// the sector's outer edge, so `dθ = cross(a, b - a) / |q|² dτ`.
pub fn polar_integrate_with<const N: usize>(
    p: &Planar,
    n: usize,
    mut f: impl FnMut(&Vector2<f64>) -> [f64; N],
) -> [f64; N] {
    let rule = GaussRule::new(n.max(1));
    let mut acc = [0.0; N];
    for sec in polar_sectors(p) {
        let e = sec.b - sec.a;
        let h = cross2(&sec.a, &e);
        for (tau, wt) in angular_panels(&sec).into_iter().flat_map(|(t0, t1)| rule.mapped(t0, t1)) {
            let q = sec.a + e * tau;
            let rq = q.norm();
            let d = q / rq;
            let jac = h / (rq * rq);
            let r_in = sec.inner.map_or(0.0, |(u, v)| line_radius(&d, &u, &v));
            let (r0, r1) = if r_in <= rq { (r_in, rq) } else { (rq, r_in) };
            for (r, wr) in rule.mapped(r0, r1) {
                let v = f(&(d * r));
                let w = sec.sign * wt * jac * wr * r;
                for c in 0..N {
                    acc[c] += w * v[c];
                }
            }
        }
    }
    acc
}

/// Polar Gauss quadrature of all integrals with `n` points per direction.
pub fn polar_integrate(p: &Planar, z: f64, k: f64, n: usize, hyper: bool) -> PanelIntegrals {
    unpack(&polar_integrate_with(p, n, |q| kernel(q, z, k)), hyper)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: PanelIntegrals,
    /// Largest component error estimate.
    pub error: f64,
    pub converged: bool,
}

/// Adaptive reference integration.
///
/// The triangle is split at its point nearest the field point and each part
/// is mapped from the unit square by `x = C + u (A - C) + u v (B - A)`, whose
/// Jacobian `∝ u` removes the `1/R` peak at `C`. Nested adaptive Gauss
/// quadrature runs in `u` and `v` until every component meets
/// `max(tol, tol |value|)`, with `|value|` the modulus of the complex value.
pub fn adaptive_oracle(p: &Planar, z: f64, k: f64, tol: f64, hyper: bool) -> OracleResult {
    let c = closest_point(p);
    let scale = p.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    let outer_tol = Tolerance {
        max_panels: 2000,
        group: 2,
        ..Tolerance::new(tol, tol)
    };
    let inner_tol = Tolerance {
        max_panels: 2000,
        group: 2,
        ..Tolerance::new(0.1 * tol, 0.1 * tol)
    };
    let mut total = [0.0; COMPONENTS];
    let mut error: f64 = 0.0;
    let mut converged = true;
    for i in 0..3 {
        let (a, b) = (p[i], p[(i + 1) % 3]);
        let jac = cross2(&(a - c), &(b - a));
        if jac.abs() <= 1e-14 * scale * scale {
            continue;
        }
        let inner_ok = Cell::new(true);
        let res = integrate(
            |u| {
                let r = integrate(
                    |v| {
                        let x = c + (a - c) * u + (b - a) * (u * v);
                        kernel(&x, z, k)
                    },
                    0.0,
                    1.0,
                    inner_tol,
                );
                if !r.converged {
                    inner_ok.set(false);
                }
                r.value.map(|x| x * u * jac)
            },
            0.0,
            1.0,
            outer_tol,
        );
        converged &= res.converged && inner_ok.get();
        error = res.error.iter().fold(error, |m, &e| m.max(e));
        for j in 0..COMPONENTS {
            total[j] += res.value[j];
        }
    }
    OracleResult {
        value: unpack(&total, hyper),
        error,
        converged,
    }
}

/// Fully symmetric rule on the triangle, in barycentric coordinates with
/// weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TriRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriRule {
    /// Collapsed Gauss product rule with `n` points per direction, averaged
    /// over the six vertex permutations; exact for total degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let g = GaussRule::new(n);
        let mut points = Vec::with_capacity(6 * n * n);
        let mut weights = Vec::with_capacity(6 * n * n);
        for (u, wu) in g.mapped(0.0, 1.0) {
            for (v, wv) in g.mapped(0.0, 1.0) {
                let (x, y) = (u, (1.0 - u) * v);
                let l = [1.0 - x - y, x, y];
                // weight relative to the unit triangle's area of 1/2
                let w = 2.0 * wu * wv * (1.0 - u) / 6.0;
                for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    points.push([l[perm[0]], l[perm[1]], l[perm[2]]]);
                    weights.push(w);
                }
            }
        }
        Self { points, weights }
    }

    /// The default rule: 16 points per direction, degree 30, 1536 points.
    pub fn default_rule() -> Self {
        Self::collapsed(16)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Integration with a fixed triangle rule. Accurate only when the integrand
/// is smooth on the element, i.e. the field point is not close to it.
pub fn symmetric_rule_integrate(p: &Planar, z: f64, k: f64, rule: &TriRule, hyper: bool) -> PanelIntegrals {
    let area = 0.5 * signed_area2(p).abs();
    let mut acc = [0.0; COMPONENTS];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let x = p[0] * l[0] + p[1] * l[1] + p[2] * l[2];
        let v = kernel(&x, z, k);
        for c in 0..COMPONENTS {
            acc[c] += area * w * v[c];
        }
    }
    unpack(&acc, hyper)
}

/// Laplace potential `∫ 1/R dA` of the triangle `(0, v2, v3)` for a field
/// point at height `z` above its vertex at the origin, from the classical
/// closed form `∫ (R̄ − |z|) dθ` with
/// `∫ R̄ dt = a asin(a sin t / b) + h atanh(h sin t / sqrt(b² − a² sin² t))`,
/// `h` the distance to the edge `v2 v3`, `a = |z|`, `b² = h² + a²`.
pub fn laplace_vertex_potential(v2: &Vector2<f64>, v3: &Vector2<f64>, z: f64) -> f64 {
    let d = v3 - v2;
    let foot = v2 - d * (v2.dot(&d) / d.norm_squared());
    let h = foot.norm();
    let base = foot.y.atan2(foot.x);
    let rel = |v: &Vector2<f64>| {
        let t = v.y.atan2(v.x) - base;
        (t + PI).rem_euclid(2.0 * PI) - PI
    };
    let (t0, t1) = (rel(v2), rel(v3));
    let a = z.abs();
    let b2 = h * h + a * a;
    let b = b2.sqrt();
    let anti = |t: f64| {
        let sn = t.sin();
        a * (a * sn / b).asin() + h * (h * sn / (b2 - a * a * sn * sn).sqrt()).atanh()
    };
    ((anti(t1) - anti(t0)) - a * (t1 - t0)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::radial_extents;

    fn planar(v: [[f64; 2]; 3]) -> Planar {
        v.map(|q| Vector2::new(q[0], q[1]))
    }

    fn shift(o: [f64; 2]) -> Planar {
        planar([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]].map(|q| [q[0] - o[0], q[1] - o[1]]))
    }

    #[test]
    fn unit_integrand_gives_area() {
        for o in [[0.0, 0.0], [0.4, 0.3], [0.5, 0.0], [0.3, 0.8]] {
            let p = shift(o);
            let area = polar_integrate_with(&p, 8, |_| [1.0])[0];
            assert!((area - 0.4).abs() < 1e-13, "{o:?}: {area}");
        }
        for o in [[0.9, 0.6], [-0.5, 2.0]] {
            let p = shift(o);
            // the inner boundary is rational in the edge parameter: exact
            // only to rounding from n = 16
            let area = polar_integrate_with(&p, 16, |_| [1.0])[0];
            assert!((area - 0.4).abs() < 1e-13, "{o:?}: {area}");
        }
    }

    #[test]
    fn polar_matches_oracle_at_unit_height() {
        for o in [[0.0, 0.0], [0.4, 0.3], [0.5, 0.0], [0.9, 0.6]] {
            let p = shift(o);
            let q = polar_integrate(&p, 1.0, 1.0, 50, true);
            let r = adaptive_oracle(&p, 1.0, 1.0, 1e-13, true);
            assert!(r.converged);
            let d = q.max_abs_diff(&r.value);
            assert!(d < 1e-8 * r.value.i0.norm(), "{o:?}: {d}");
        }
    }

    #[test]
    fn exterior_angular_convergence_is_independent_of_height() {
        // the inner-edge pole sits just outside the sector for this origin
        let p = shift([0.9, 0.6]);
        for z in [1e-3, 0.1, 10.0] {
            let r = adaptive_oracle(&p, z, 1.0, 1e-13, false).value.i0;
            let e8 = (polar_integrate(&p, z, 1.0, 8, false).i0 - r).norm();
            let e16 = (polar_integrate(&p, z, 1.0, 16, false).i0 - r).norm();
            assert!(e8 < 1e-10 * r.norm(), "z={z}: {e8}");
            assert!(e16 < 1e-14 * r.norm().max(1.0), "z={z}: {e16}");
        }
    }

    #[test]
    fn oracle_converges_very_close() {
        let p = shift([0.4, 0.3]);
        let r = adaptive_oracle(&p, 1e-6, 1.0, 1e-12, false);
        assert!(r.converged, "{r:?}");
        let (a, _) = crate::analytic::triangle_integrals(&subdivide(&p), 1e-6, 1.0, 1e-12, false).unwrap();
        assert!((a.i0 - r.value.i0).norm() < 1e-11 * a.i0.norm(), "{} vs {}", a.i0, r.value.i0);
        assert!((a.di0_dn - r.value.di0_dn).norm() < 1e-10 * a.di0_dn.norm());
    }

    #[test]
    fn static_vertex_potential_matches_closed_form() {
        let p = shift([0.0, 0.0]);
        for z in [0.0, 0.05, 0.7] {
            let exact = laplace_vertex_potential(&p[1], &p[2], z);
            let r = adaptive_oracle(&p, z, 0.0, 1e-13, false);
            assert!((r.value.i0.re - exact).abs() < 1e-12, "z={z}: {} vs {exact}", r.value.i0.re);
        }
    }

    #[test]
    fn symmetric_rule_exactness() {
        let rule = TriRule::default_rule();
        assert_eq!(rule.len(), 1536);
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for a in 0..=30u32 {
            for b in 0..=(30 - a) {
                let approx: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(l, w)| 0.5 * w * l[1].powi(a as i32) * l[2].powi(b as i32))
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((approx - exact).abs() < 1e-14 * exact.max(1e-3), "{a},{b}");
            }
        }
    }

    #[test]
    fn symmetric_rule_exterior_point() {
        let p = shift([0.9, 0.6]);
        assert!(radial_extents(&p).r_min > 0.3);
        let rule = TriRule::default_rule();
        let s = symmetric_rule_integrate(&p, 0.5, 1.0, &rule, true);
        let r = adaptive_oracle(&p, 0.5, 1.0, 1e-13, true);
        assert!(s.max_abs_diff(&r.value) < 1e-10);
    }
}
