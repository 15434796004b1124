//! Element-plane frame, origin-centred decomposition and reference-triangle
//! parameters.
//!
//! Conventions: the element normal is `(v2 - v1) x (v3 - v1)` normalised, so
//! counter-clockwise vertex order (seen from the side the normal points to)
//! maps to counter-clockwise order in the plane. The in-plane x axis runs
//! along `v2 - v1`. The field point maps to `(0, 0, z)` with `z` the signed
//! height along the normal, and all planar coordinates are relative to the
//! projection of the field point onto the element plane.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Subtriangles with an angle at the origin below this are dropped.
pub const MIN_SUBTRIANGLE_ANGLE: f64 = 1e-10;
/// Subtriangles with a radius (or height) below this fraction of `r_max` are dropped.
pub const MIN_RELATIVE_RADIUS: f64 = 1e-12;
/// Signed-distance tolerance, relative to the triangle diameter, for deciding
/// that the origin lies on the closed triangle.
pub const ON_TRIANGLE_TOLERANCE: f64 = 1e-12;
const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle3 {
    pub v: [Vector3<f64>; 3],
}

impl Triangle3 {
    pub fn new(v1: Vector3<f64>, v2: Vector3<f64>, v3: Vector3<f64>) -> Result<Self> {
        let tri = Self { v: [v1, v2, v3] };
        tri.check()?;
        Ok(tri)
    }

    /// Builds from nine coordinates `x1, y1, z1, x2, ...`.
    pub fn from_slice(c: &[f64]) -> Result<Self> {
        if c.len() != 9 {
            return Err(Error::InvalidArgument(format!(
                "triangle needs 9 coordinates, got {}",
                c.len()
            )));
        }
        Self::new(
            Vector3::new(c[0], c[1], c[2]),
            Vector3::new(c[3], c[4], c[5]),
            Vector3::new(c[6], c[7], c[8]),
        )
    }

    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.v;
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.v[1] - self.v[0]).cross(&(self.v[2] - self.v[0])).norm()
    }

    pub fn max_edge(&self) -> f64 {
        self.diameter()
    }

    fn check(&self) -> Result<()> {
        let d = self.diameter();
        let area2 = (self.v[1] - self.v[0]).cross(&(self.v[2] - self.v[0])).norm();
        let threshold = DEGENERATE_AREA * d * d;
        if !(area2 > threshold) || !d.is_finite() {
            return Err(Error::DegenerateTriangle {
                area: area2,
                threshold,
            });
        }
        Ok(())
    }
}

/// Rigid map from world coordinates to the element frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    /// Projection of the field point onto the element plane.
    pub origin: Vector3<f64>,
    /// Rows are the in-plane x axis, in-plane y axis and the normal.
    pub rotation: Matrix3<f64>,
    /// Signed height of the field point above the element plane.
    pub z: f64,
}

impl LocalFrame {
    pub fn to_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * (p - self.origin)
    }

    pub fn to_world(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * p + self.origin
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.rotation.row(2).transpose()
    }
}

/// Planar triangle in the element frame.
pub type Planar = [Vector2<f64>; 3];

pub fn to_local_frame(tri: &Triangle3, x: &Vector3<f64>) -> Result<(LocalFrame, Planar, f64)> {
    tri.check()?;
    let [v1, v2, v3] = tri.v;
    let normal = (v2 - v1).cross(&(v3 - v1)).normalize();
    let e1 = (v2 - v1).normalize();
    let e2 = normal.cross(&e1);
    let rotation = Matrix3::from_rows(&[e1.transpose(), e2.transpose(), normal.transpose()]);
    let z = normal.dot(&(x - v1));
    let origin = x - normal * z;
    let frame = LocalFrame {
        origin,
        rotation,
        z,
    };
    let planar = tri.v.map(|v| {
        let p = frame.to_local(&v);
        Vector2::new(p.x, p.y)
    });
    Ok((frame, planar, z))
}

fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Twice the signed area of a planar triangle.
pub fn signed_area2(p: &Planar) -> f64 {
    cross2(&(p[1] - p[0]), &(p[2] - p[0]))
}

/// A triangle with one vertex at the origin, stored counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedSubTriangle {
    /// Vertex at distance `r1`, first in counter-clockwise order.
    pub a: Vector2<f64>,
    /// Vertex at distance `r2`.
    pub b: Vector2<f64>,
    pub r1: f64,
    pub r2: f64,
    /// Angle at the origin, in (0, pi).
    pub theta: f64,
    /// +1 or -1 according to the orientation of the originating edge.
    pub sign: f64,
}

impl SignedSubTriangle {
    pub fn area(&self) -> f64 {
        0.5 * self.r1 * self.r2 * self.theta.sin()
    }

    /// Polar angle of vertex `a`.
    pub fn start_angle(&self) -> f64 {
        self.a.y.atan2(self.a.x)
    }
}

/// Splits the planar triangle into up to three triangles sharing the origin
/// as a vertex. `sum(sign * area)` equals the triangle's area.
pub fn subdivide(p: &Planar) -> Vec<SignedSubTriangle> {
    let r_max = p.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(3);
    for i in 0..3 {
        let (mut a, mut b) = (p[i], p[(i + 1) % 3]);
        let cr = cross2(&a, &b);
        let dot = a.dot(&b);
        let theta = cr.abs().atan2(dot);
        let (r1, r2) = (a.norm(), b.norm());
        let edge = (b - a).norm();
        let height = if edge > 0.0 { cr.abs() / edge } else { 0.0 };
        let tiny = MIN_RELATIVE_RADIUS * r_max;
        if r1 < tiny
            || r2 < tiny
            || height < tiny
            || theta < MIN_SUBTRIANGLE_ANGLE
            || theta > PI - MIN_SUBTRIANGLE_ANGLE
        {
            continue;
        }
        let sign = if cr > 0.0 { 1.0 } else { -1.0 };
        if sign < 0.0 {
            std::mem::swap(&mut a, &mut b);
        }
        out.push(SignedSubTriangle {
            a,
            b,
            r1: a.norm(),
            r2: b.norm(),
            theta,
            sign,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialExtents {
    pub r_min: f64,
    pub r_max: f64,
}

/// Closest point of the closed triangle to the origin.
pub fn closest_point(p: &Planar) -> Vector2<f64> {
    if origin_on_triangle(p) {
        return Vector2::zeros();
    }
    let mut best = p[0];
    for i in 0..3 {
        let q = closest_on_segment(&p[i], &p[(i + 1) % 3]);
        if q.norm() < best.norm() {
            best = q;
        }
    }
    best
}

fn closest_on_segment(a: &Vector2<f64>, b: &Vector2<f64>) -> Vector2<f64> {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = (-a.dot(&d) / len2).clamp(0.0, 1.0);
    a + d * t
}

/// True when the origin lies inside or on the boundary of the triangle, to a
/// signed-distance tolerance of `ON_TRIANGLE_TOLERANCE * diameter`.
pub fn origin_on_triangle(p: &Planar) -> bool {
    let orient = signed_area2(p).signum();
    let diam = (p[1] - p[0])
        .norm()
        .max((p[2] - p[1]).norm())
        .max((p[0] - p[2]).norm());
    (0..3).all(|i| {
        let a = p[i];
        let e = p[(i + 1) % 3] - a;
        let dist = orient * cross2(&e, &(-a)) / e.norm();
        dist >= -ON_TRIANGLE_TOLERANCE * diam
    })
}

pub fn radial_extents(p: &Planar) -> RadialExtents {
    let r_max = p.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let r_min = closest_point(p).norm();
    RadialExtents { r_min, r_max }
}

/// Parameters of a reference triangle in the polar frame whose angle is
/// measured from the perpendicular dropped onto the edge opposite the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefGeom {
    pub phi: f64,
    /// Perpendicular distance from the origin to the far edge.
    pub s: f64,
    /// `sqrt(s^2 + z^2)`.
    pub big_s: f64,
    /// `|z| / S`.
    pub alpha: f64,
    /// `s / S`, equal to `sqrt(1 - alpha^2)`.
    pub alpha_p: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl RefGeom {
    /// Radius of the far edge at polar angle `theta`.
    pub fn r_bar(&self, theta: f64) -> f64 {
        self.s / theta.cos()
    }
}

pub fn ref_params(sub: &SignedSubTriangle, z: f64) -> RefGeom {
    let (r1, r2, th) = (sub.r1, sub.r2, sub.theta);
    let phi = (r1 - r2 * th.cos()).atan2(r2 * th.sin());
    let s = r1 * phi.cos();
    let big_s = s.hypot(z);
    RefGeom {
        phi,
        s,
        big_s,
        alpha: z.abs() / big_s,
        alpha_p: s / big_s,
        theta_lo: -phi,
        theta_hi: th - phi,
    }
}
