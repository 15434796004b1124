//! Top-level evaluation: frame transform, radial extents, order selection,
//! then either polar Gauss quadrature or the analytic expansion summed over
//! the signed subtriangles.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{expansion_length, triangle_integrals};
use crate::error::{Error, Result};
use crate::estimator::{gauss_points, select_order, ErrorEstimate, OrderSelection, DEFAULT_Q_CAP};
use crate::geometry::{radial_extents, subdivide, to_local_frame, LocalFrame, Triangle3};
use crate::numeric::polar_integrate;
use crate::panel::PanelIntegrals;

pub const MIN_TOL: f64 = 1e-15;
pub const MAX_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRequest {
    pub triangle: Triangle3,
    pub field_point: Vector3<f64>,
    /// Wavenumber, `>= 0`.
    pub k: f64,
    /// Requested accuracy, in `[MIN_TOL, MAX_TOL]`.
    pub tol: f64,
    pub want_hypersingular: bool,
}

impl EvalRequest {
    pub fn new(triangle: Triangle3, field_point: Vector3<f64>, k: f64, tol: f64) -> Self {
        Self {
            triangle,
            field_point,
            k,
            tol,
            want_hypersingular: false,
        }
    }

    pub fn with_hypersingular(mut self) -> Self {
        self.want_hypersingular = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(MIN_TOL..=MAX_TOL).contains(&self.tol) {
            return Err(Error::InvalidTolerance(self.tol));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber {} must be finite and >= 0", self.k)));
        }
        if !self.field_point.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("field point must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Polar Gauss quadrature, `n` points per direction, chosen for order `q`.
    Numeric { q: usize, n: usize },
    /// Expansion of degree `q_exp` valid on `[0, delta_x]`.
    Analytic { q_exp: usize, delta_x: f64 },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Method::Numeric { q, n } => write!(f, "numeric(Q={q}, n={n})"),
            Method::Analytic { q_exp, delta_x } => write!(f, "analytic(Q={q_exp}, dx={delta_x:.6})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForcedMethod {
    /// Polar quadrature with this many points per direction.
    Numeric(usize),
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Largest order handled numerically.
    pub q_cap: usize,
    /// Extra Gauss points added on the numeric path.
    pub extra_points: usize,
    /// Points per direction when the analytic path is inadmissible.
    pub fallback_points: usize,
    pub force: Option<ForcedMethod>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            q_cap: DEFAULT_Q_CAP,
            extra_points: 0,
            fallback_points: 64,
            force: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Integrals; moments are in the element-plane frame about the projection
    /// of the field point (see [`LocalFrame`]).
    pub result: PanelIntegrals,
    pub method: Method,
    pub estimator: ErrorEstimate,
    /// Signed height of the field point above the element.
    pub z: f64,
    pub frame: LocalFrame,
    pub warnings: Vec<String>,
}

pub fn evaluate(req: &EvalRequest) -> Result<EvalReport> {
    evaluate_with(req, &EngineConfig::default())
}

pub fn evaluate_with(req: &EvalRequest, cfg: &EngineConfig) -> Result<EvalReport> {
    req.validate()?;
    let (frame, planar, z) = to_local_frame(&req.triangle, &req.field_point)?;
    let (k, hyper) = (req.k, req.want_hypersingular);
    let extents = radial_extents(&planar);
    let selection = select_order(&extents, z, req.tol, cfg.q_cap);
    let estimator = selection.estimate();
    let mut warnings = Vec::new();

    let numeric = |n: usize, q: usize| (polar_integrate(&planar, z, k, n, hyper), Method::Numeric { q, n });
    let (result, method) = match (cfg.force, selection) {
        (Some(ForcedMethod::Numeric(n)), _) => numeric(n.max(1), 2 * n.max(1) - 1),
        (None, OrderSelection::Numeric(e)) => {
            let phase = k * ((extents.r_max.hypot(z)) - extents.r_min.hypot(z));
            numeric(numeric_points(e.q, phase_degree(phase, req.tol)) + cfg.extra_points, e.q)
        }
        (Some(ForcedMethod::Analytic), _) | (None, OrderSelection::AnalyticRequired(_)) => {
            let subs = subdivide(&planar);
            let ell = subs.iter().map(|s| expansion_length(s, z)).fold(0.0, f64::max);
            if k * ell >= FRAC_PI_2 || k * z.abs() > FRAC_PI_2 {
                warnings.push(format!(
                    "analytic path inadmissible (k*ell = {:.3}, k|z| = {:.3}, limit pi/2); \
                     using {}-point polar quadrature, accuracy not guaranteed",
                    k * ell,
                    k * z.abs(),
                    cfg.fallback_points
                ));
                numeric(cfg.fallback_points, 2 * cfg.fallback_points - 1)
            } else {
                let (mut value, approx) = triangle_integrals(&subs, z, k, req.tol, hyper)?;
                if hyper && value.d2i0_dn2.is_none() {
                    value.d2i0_dn2 = Some(Complex64::new(0.0, 0.0));
                }
                (
                    value,
                    Method::Analytic {
                        q_exp: approx.degree(),
                        delta_x: approx.delta_x,
                    },
                )
            }
        }
    };
    Ok(EvalReport {
        result,
        method,
        estimator,
        z,
        frame,
        warnings,
    })
}

/// Degree of a polynomial in the radius that resolves the phase of `e^{jkR}`:
/// smallest `d` with `(x/2)^(d+1)/(d+1)! <= tol/10`, `x` the phase range.
pub fn phase_degree(phase_range: f64, tol: f64) -> usize {
    let h = 0.5 * phase_range;
    let mut term = h;
    let mut d = 0;
    while term > 0.1 * tol && d < 200 {
        d += 1;
        term *= h / (d + 1) as f64;
    }
    d
}

/// Points per direction for the numeric path: the order-`q` approximation of
/// `1/R`, times the degree-`d` phase polynomial, the `r` Jacobian and a
/// first moment, integrated exactly.
pub fn numeric_points(q: usize, d: usize) -> usize {
    gauss_points(q + d + 2)
}

/// Evaluates all requests, in parallel; output order matches input order and
/// a failed item never aborts the batch.
pub fn evaluate_batch(reqs: &[EvalRequest], cfg: &EngineConfig) -> Vec<Result<EvalReport>> {
    reqs.par_iter().map(|r| evaluate_with(r, cfg)).collect()
}

/// Default sample element used by the CLI and tests.
pub fn sample_triangle() -> Triangle3 {
    Triangle3::new(
        Vector3::new(0.0, 0.0, 0.0),
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.3, 0.8, 0.0),
    )
    .expect("sample triangle is valid")
}

/// In-plane projections of four representative field points on
/// [`sample_triangle`]: at a vertex, inside, on an edge, and outside.
pub const SAMPLE_POINTS: [(&str, [f64; 2]); 4] = [
    ("vertex", [0.0, 0.0]),
    ("interior", [0.4, 0.3]),
    ("edge", [0.5, 0.0]),
    ("exterior", [0.9, 0.6]),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_oracle;

    fn req(p: [f64; 2], z: f64, tol: f64) -> EvalRequest {
        EvalRequest::new(sample_triangle(), Vector3::new(p[0], p[1], z), 1.0, tol)
    }

    #[test]
    fn far_point_is_numeric_and_matches_far_field() {
        // above the centroid the far-field form is off by about k <r²>/(2z)
        // in phase, so a moderate k keeps that below the checked 1e-4
        let z = 100.0 * sample_triangle().diameter();
        let c = [1.3 / 3.0, 0.8 / 3.0];
        let k = 0.25;
        let mut rq = req(c, z, 1e-9);
        rq.k = k;
        let r = evaluate(&rq).unwrap();
        assert!(matches!(r.method, Method::Numeric { n, .. } if n <= 6), "{}", r.method);
        let expect = 0.4 * Complex64::from_polar(1.0 / z, k * z);
        assert!((r.result.i0 - expect).norm() < 1e-4 * expect.norm());
        let (_, planar, zz) = to_local_frame(&sample_triangle(), &Vector3::new(c[0], c[1], z)).unwrap();
        let o = adaptive_oracle(&planar, zz, k, 1e-13, false);
        assert!((r.result.i0 - o.value.i0).norm() < 1e-9 * o.value.i0.norm());
    }

    #[test]
    fn phase_degree_examples() {
        assert_eq!(phase_degree(0.0, 1e-6), 0);
        let d = phase_degree(1.0, 1e-9);
        let f = |d: usize| 0.5f64.powi(d as i32 + 1) / (1..=d + 1).map(|i| i as f64).product::<f64>();
        assert!(f(d) <= 1e-10 && f(d - 1) > 1e-10);
    }

    #[test]
    fn close_point_is_analytic_and_matches_oracle() {
        let diam = sample_triangle().diameter();
        let c = [(0.0 + 1.0 + 0.3) / 3.0, 0.8 / 3.0];
        let z = 1e-4 * diam;
        let r = evaluate(&req(c, z, 1e-9)).unwrap();
        assert!(matches!(r.method, Method::Analytic { .. }));
        let (_, planar, zz) = to_local_frame(&sample_triangle(), &Vector3::new(c[0], c[1], z)).unwrap();
        let o = adaptive_oracle(&planar, zz, 1.0, 1e-13, false);
        assert!((r.result.i0 - o.value.i0).norm() < 1e-8);
        let loose = evaluate(&req(c, z, 1e-3)).unwrap();
        assert!((loose.result.i0 - o.value.i0).norm() < 1e-2);
        let q = |m: Method| match m {
            Method::Analytic { q_exp, .. } => q_exp,
            _ => usize::MAX,
        };
        assert!(q(loose.method) < q(r.method));
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(evaluate(&req([0.0, 0.0], 1.0, 0.1)), Err(Error::InvalidTolerance(_))));
        let mut r = req([0.0, 0.0], 1.0, 1e-6);
        r.k = -1.0;
        assert!(evaluate(&r).is_err());
    }

    #[test]
    fn batch_preserves_order() {
        assert!(evaluate_batch(&[], &EngineConfig::default()).is_empty());
        let reqs: Vec<_> = SAMPLE_POINTS.iter().map(|(_, p)| req(*p, 1e-3, 1e-6)).collect();
        let out = evaluate_batch(&reqs, &EngineConfig::default());
        let mut rev = reqs.clone();
        rev.reverse();
        let back = evaluate_batch(&rev, &EngineConfig::default());
        for (a, b) in out.iter().zip(back.iter().rev()) {
            assert_eq!(a.as_ref().unwrap().result, b.as_ref().unwrap().result);
        }
    }

    #[test]
    fn large_element_falls_back_with_warning() {
        let big = Triangle3::new(
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(10.0, 0.0, 0.0),
            Vector3::new(3.0, 8.0, 0.0),
        )
        .unwrap();
        let r = evaluate(&EvalRequest::new(big, Vector3::new(4.0, 3.0, 1e-3), 1.0, 1e-6)).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(matches!(r.method, Method::Numeric { .. }));
    }
}
