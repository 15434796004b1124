//! Text and CSV reports behind the command-line tool: single evaluations,
//! z-sweeps against the oracle, estimator tables and economization tables.
//!
//! Numbers are written with 17 significant digits so that they re-parse to
//! the same doubles; header lines start with `#`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::engine::{evaluate, evaluate_with, EngineConfig, EvalReport, EvalRequest, ForcedMethod};
use crate::error::{Error, Result};
use crate::estimator::{e_q, epsilon_q, gauss_points, select_order, EstimatorGeom, OrderSelection};
use crate::expapprox::economize;
use crate::geometry::{to_local_frame, RadialExtents, Triangle3};
use crate::numeric::{adaptive_oracle, polar_integrate};

/// Tolerance of the oracle used by sweeps.
pub const ORACLE_TOL: f64 = 1e-13;
/// Tolerance of the analytic reference for the per-order columns.
pub const REFERENCE_TOL: f64 = 1e-12;

/// Full-precision float: round-trips through `str::parse::<f64>`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex_line(name: &str, c: Complex64) -> String {
    format!("{name:<8} {} {}", num(c.re), num(c.im))
}

/// Human-readable report followed by a single machine-readable CSV line
/// starting with `result,`.
pub fn integrate_report(req: &EvalRequest, r: &EvalReport) -> String {
    let mut out = String::new();
    let p = &req.field_point;
    let t = &req.triangle.v;
    let _ = writeln!(
        out,
        "# triangle {} | point {} | k {} | tol {}",
        t.iter().map(|v| format!("{},{},{}", num(v.x), num(v.y), num(v.z))).collect::<Vec<_>>().join(" "),
        format_args!("{},{},{}", num(p.x), num(p.y), num(p.z)),
        num(req.k),
        num(req.tol)
    );
    let _ = writeln!(out, "method   {}", r.method);
    let _ = writeln!(out, "Q        {}", r.estimator.q);
    let _ = writeln!(out, "E_Q      {}", num(r.estimator.e_q));
    let _ = writeln!(out, "z        {}", num(r.z));
    let v = &r.result;
    let mut comps = vec![
        ("I0", v.i0),
        ("Ix", v.ix),
        ("Iy", v.iy),
        ("dI0/dn", v.di0_dn),
        ("dIx/dn", v.dix_dn),
        ("dIy/dn", v.diy_dn),
    ];
    if let Some(h) = v.d2i0_dn2 {
        comps.push(("d2I0/dn2", h));
    }
    let _ = writeln!(out, "#        re im");
    for (name, c) in &comps {
        let _ = writeln!(out, "{}", complex_line(name, *c));
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    let mut line = String::from("result");
    for (_, c) in &comps {
        let _ = write!(line, ",{},{}", num(c.re), num(c.im));
    }
    let _ = writeln!(out, "{line}");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub triangle: Triangle3,
    /// In-plane projection of the field point (world x, y; the element is
    /// expected to lie in a plane `z = const`).
    pub proj: [f64; 2],
    pub k: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub steps: usize,
    pub log: bool,
    pub tols: Vec<f64>,
    /// Points per direction of the fixed polar rules.
    pub orders: Vec<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidArgument("sweep needs at least 2 steps".into()));
        }
        if !(self.z_min < self.z_max) {
            return Err(Error::InvalidArgument("zmin must be below zmax".into()));
        }
        if self.log && !(self.z_min > 0.0) {
            return Err(Error::InvalidArgument("log spacing needs zmin > 0".into()));
        }
        if self.orders.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("orders must be positive".into()));
        }
        Ok(())
    }

    pub fn heights(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.z_min.ln() + f * (self.z_max.ln() - self.z_min.ln())).exp()
                } else {
                    self.z_min + f * (self.z_max - self.z_min)
                }
            })
            .collect()
    }

    fn field_point(&self, z: f64) -> Vector3<f64> {
        Vector3::new(self.proj[0], self.proj[1], z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub z: f64,
    pub oracle_converged: bool,
    /// `(|I0 - oracle|, |dI0/dn - oracle|)` per tolerance.
    pub auto_err: Vec<(f64, f64)>,
    /// `(|I0 - reference|, |dI0/dn - reference|)` per fixed polar rule.
    pub numeric_err: Vec<(f64, f64)>,
    /// Order selected by the estimator per tolerance.
    pub q: Vec<usize>,
}

fn sweep_row(spec: &SweepSpec, z: f64) -> Result<SweepRow> {
    let x = spec.field_point(z);
    let (_, planar, zz) = to_local_frame(&spec.triangle, &x)?;
    let oracle = adaptive_oracle(&planar, zz, spec.k, ORACLE_TOL, false);
    let diff = |a: &crate::PanelIntegrals, b: &crate::PanelIntegrals| {
        ((a.i0 - b.i0).norm(), (a.di0_dn - b.di0_dn).norm())
    };
    let mut auto_err = Vec::with_capacity(spec.tols.len());
    let mut q = Vec::with_capacity(spec.tols.len());
    for &tol in &spec.tols {
        let r = evaluate(&EvalRequest::new(spec.triangle, x, spec.k, tol))?;
        auto_err.push(diff(&r.result, &oracle.value));
        q.push(r.estimator.q);
    }
    let analytic = EngineConfig {
        force: Some(ForcedMethod::Analytic),
        ..EngineConfig::default()
    };
    let reference = evaluate_with(&EvalRequest::new(spec.triangle, x, spec.k, REFERENCE_TOL), &analytic)?;
    let numeric_err = spec
        .orders
        .iter()
        .map(|&n| diff(&polar_integrate(&planar, zz, spec.k, n, false), &reference.result))
        .collect();
    Ok(SweepRow {
        z,
        oracle_converged: oracle.converged,
        auto_err,
        numeric_err,
        q,
    })
}

/// Rows in z order; computed in parallel.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.heights().par_iter().map(|&z| sweep_row(spec, z)).collect()
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let t = &spec.triangle.v;
    let _ = writeln!(out, "# sweep of I0 and dI0/dn against an adaptive oracle (tol {ORACLE_TOL:e})");
    let _ = writeln!(
        out,
        "# triangle {}",
        t.iter().map(|v| format!("{},{},{}", num(v.x), num(v.y), num(v.z))).collect::<Vec<_>>().join(" ")
    );
    let _ = writeln!(
        out,
        "# proj {},{} k {} z [{}, {}] steps {} {}",
        num(spec.proj[0]),
        num(spec.proj[1]),
        num(spec.k),
        num(spec.z_min),
        num(spec.z_max),
        spec.steps,
        if spec.log { "log" } else { "linear" }
    );
    let _ = writeln!(
        out,
        "# tols {} | orders {} (points per direction, compared with the analytic method at tol {REFERENCE_TOL:e})",
        spec.tols.iter().map(|t| num(*t)).collect::<Vec<_>>().join(","),
        spec.orders.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
    );
    let mut header = vec!["z".to_string(), "oracle_converged".to_string()];
    for (i, _) in spec.tols.iter().enumerate() {
        header.push(format!("err_i0_tol{i}"));
        header.push(format!("err_dn_tol{i}"));
    }
    for n in &spec.orders {
        header.push(format!("err_i0_n{n}"));
        header.push(format!("err_dn_n{n}"));
    }
    for (i, _) in spec.tols.iter().enumerate() {
        header.push(format!("q_tol{i}"));
    }
    let _ = writeln!(out, "{}", header.join(","));
    for r in rows {
        let mut cells = vec![num(r.z), u8::from(r.oracle_converged).to_string()];
        for &(a, b) in r.auto_err.iter().chain(&r.numeric_err) {
            cells.push(num(a));
            cells.push(num(b));
        }
        cells.extend(r.q.iter().map(|q| q.to_string()));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Estimator table for a radial line with the given extents: `E_Q` and the
/// signed estimate for `q = 1..=q_cap`, followed by the selection.
pub fn estimate_table(r_max: f64, r_min: f64, z: f64, tol: f64, q_cap: usize) -> Result<String> {
    if !(r_max > 0.0 && (0.0..=r_max).contains(&r_min)) {
        return Err(Error::InvalidArgument("need 0 <= r_min <= r_max and r_max > 0".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let extents = RadialExtents { r_min, r_max };
    let g = EstimatorGeom::new(&extents, z);
    let mut out = String::new();
    let _ = writeln!(out, "# estimate r_max {} r_min {} z {} tol {}", num(r_max), num(r_min), num(z), num(tol));
    let _ = writeln!(
        out,
        "# r_mid {} t {} phi {}",
        num(g.r_mid),
        num(g.t),
        num(g.sin_phi.atan2(g.cos_phi))
    );
    if g.sin_phi > 0.0 {
        let _ = writeln!(out, "q,e_q,epsilon_q");
        for q in 1..=q_cap {
            let _ = writeln!(out, "{q},{},{}", num(e_q(&g, q)?), num(epsilon_q(&g, q)?));
        }
    } else {
        let _ = writeln!(out, "# phi = 0: field point in the element plane, estimate undefined");
    }
    let line = match select_order(&extents, z, tol, q_cap) {
        OrderSelection::Numeric(e) => format!(
            "# selected Q {} E_Q {} -> numeric, {} points per direction before the phase floor",
            e.q,
            num(e.e_q),
            gauss_points(e.q)
        ),
        OrderSelection::AnalyticRequired(e) => {
            format!("# selected Q {} E_Q {} -> analytic method required", e.q, num(e.e_q))
        }
    };
    let _ = writeln!(out, "{line}");
    Ok(out)
}

/// Coefficients `e_q = c_q + j s_q` of the economized approximation of
/// `e^{jx}` on `[0, dx]`.
pub fn economize_csv(dx: f64, eps: f64) -> Result<String> {
    let a = economize(dx, eps)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# economized cos/sin on [0, {}] eps {} from Taylor degree {}; sampled error {}",
        num(dx),
        num(eps),
        a.seed_degree,
        num(a.sampled_error)
    );
    let _ = writeln!(out, "delta_x,eps,Q,q,c_q,s_q");
    for (q, c) in a.coeffs.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{q},{},{}", num(dx), num(eps), a.degree(), num(c.re), num(c.im));
    }
    Ok(out)
}

/// Parses a real number or a multiple of pi: `1.2`, `pi`, `pi/2`, `3pi/4`,
/// `0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::InvalidArgument(format!("cannot parse '{s}' as a number"));
    let t = s.trim().to_ascii_lowercase();
    let (num_part, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim().to_string(), b.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let value = if let Some(f) = num_part.strip_suffix("pi") {
        let f = f.trim().trim_end_matches('*').trim();
        let factor = if f.is_empty() { 1.0 } else { f.parse::<f64>().map_err(|_| bad())? };
        factor * PI
    } else {
        num_part.parse::<f64>().map_err(|_| bad())?
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// In-plane projection from `px,py` or one of the sample point names.
pub fn parse_projection(s: &str) -> Result<[f64; 2]> {
    if let Some((_, p)) = crate::engine::SAMPLE_POINTS.iter().find(|(name, _)| *name == s) {
        return Ok(*p);
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse projection '{s}'")))?;
    match v[..] {
        [x, y] => Ok([x, y]),
        _ => Err(Error::InvalidArgument(format!("projection '{s}' needs 2 values"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::sample_triangle;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 0.75 * PI);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("1/0").is_err());
    }

    #[test]
    fn projections() {
        assert_eq!(parse_projection("interior").unwrap(), [0.4, 0.3]);
        assert_eq!(parse_projection("0.1,-2").unwrap(), [0.1, -2.0]);
        assert!(parse_projection("1,2,3").is_err());
    }

    #[test]
    fn sweep_smoke() {
        let spec = SweepSpec {
            triangle: sample_triangle(),
            proj: [0.4, 0.3],
            k: 1.0,
            z_min: 0.01,
            z_max: 1.0,
            steps: 2,
            log: true,
            tols: vec![1e-3, 1e-9],
            orders: vec![4, 16],
        };
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        let csv = sweep_csv(&spec, &rows);
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 3);
        let width = data[0].split(',').count();
        assert_eq!(width, 2 + 4 + 4 + 2);
        for row in &data[1..] {
            let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cells.len(), width);
        }
        for r in &rows {
            assert!(r.auto_err[0].0 <= 10.0 * 1e-3);
            assert!(r.auto_err[1].0 <= 10.0 * 1e-9);
        }
    }

    #[test]
    fn estimate_cases() {
        // t = 0: the nearest point is at the mid radius, nothing to expand
        let t0 = estimate_table(1.0, 0.5, 0.1, 1e-6, 32).unwrap();
        assert!(t0.contains("# selected Q 1 "), "{t0}");
        let inplane = estimate_table(1.0, 0.0, 0.0, 1e-6, 32).unwrap();
        assert!(inplane.contains("estimate undefined"));
        assert!(inplane.contains("analytic method required"));
        let ext = RadialExtents { r_min: 0.0, r_max: 1.0 };
        let expect = select_order(&ext, 0.1, 1e-6, 32).estimate().q;
        let t = estimate_table(1.0, 0.0, 0.1, 1e-6, 32).unwrap();
        assert!(t.contains(&format!("# selected Q {expect} ")));
    }

    #[test]
    fn economize_table_shape() {
        let csv = economize_csv(PI / 2.0, 1e-9).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows.len(), 9);
        assert!(rows[0].split(',').nth(2) == Some("8"));
    }
}
