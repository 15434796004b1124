//! Property tests: geometric identities and invariances of the integrals.

use approx::assert_relative_eq;
use nalgebra::{Rotation3, Vector2, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

use helmpanel::engine::{evaluate, evaluate_with, EngineConfig, EvalRequest, ForcedMethod, Method};
use helmpanel::geometry::{radial_extents, signed_area2, subdivide, to_local_frame, Planar, Triangle3};
use helmpanel::numeric::adaptive_oracle;
use helmpanel::panel::PanelIntegrals;

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn planar() -> impl Strategy<Value = Planar> {
    prop::array::uniform6(coord())
        .prop_map(|c| [Vector2::new(c[0], c[1]), Vector2::new(c[2], c[3]), Vector2::new(c[4], c[5])])
        .prop_filter("well shaped", |p| {
            let e = [(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()];
            let longest = e.iter().cloned().fold(0.0, f64::max);
            longest > 0.2 && signed_area2(p).abs() > 0.05 * longest * longest
        })
}

fn lift(p: &Planar) -> Triangle3 {
    let v = p.map(|q| Vector3::new(q.x, q.y, 0.0));
    Triangle3::new(v[0], v[1], v[2]).unwrap()
}

fn values(r: &PanelIntegrals) -> [Complex64; 6] {
    [r.i0, r.ix, r.iy, r.di0_dn, r.dix_dn, r.diy_dn]
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subdivision_areas_sum_to_signed_area(p in planar(), o in prop::array::uniform2(coord())) {
        let shifted = p.map(|v| v - Vector2::new(o[0], o[1]));
        let total: f64 = subdivide(&shifted).iter().map(|s| s.sign * s.area()).sum();
        let scale = shifted.iter().map(|v| v.norm()).fold(0.0, f64::max).powi(2);
        prop_assert!((total - 0.5 * signed_area2(&shifted)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn r_min_bounds_dense_samples(p in planar(), o in prop::array::uniform2(coord())) {
        let shifted = p.map(|v| v - Vector2::new(o[0], o[1]));
        let ext = radial_extents(&shifted);
        let m = 200;
        let mut sampled = f64::INFINITY;
        for i in 0..=m {
            for j in 0..=(m - i) {
                let (u, w) = (i as f64 / m as f64, j as f64 / m as f64);
                let q = shifted[0] + (shifted[1] - shifted[0]) * u + (shifted[2] - shifted[0]) * w;
                sampled = sampled.min(q.norm());
            }
        }
        let spacing = (0..3).map(|i| (shifted[(i + 1) % 3] - shifted[i]).norm()).fold(0.0, f64::max) / m as f64;
        prop_assert!(ext.r_min <= sampled + 1e-12);
        prop_assert!(sampled - ext.r_min <= spacing);
        let far = shifted.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!((ext.r_max - far).abs() <= 1e-15 * far);
    }

    #[test]
    fn rigid_motion_leaves_integrals_unchanged(
        p in planar(),
        x in prop::array::uniform3(coord()),
        axis in prop::array::uniform3(-1.0..1.0f64),
        angle in -3.0..3.0f64,
        shift in prop::array::uniform3(-5.0..5.0f64),
        k in 0.0..3.0f64,
    ) {
        let axis = Vector3::from(axis);
        prop_assume!(axis.norm() > 0.1);
        prop_assume!(x[2].abs() > 1e-3);
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        let t = Vector3::from(shift);
        let tri = lift(&p);
        let moved = Triangle3::new(rot * tri.v[0] + t, rot * tri.v[1] + t, rot * tri.v[2] + t).unwrap();
        let x = Vector3::from(x);
        let tol = 1e-10;
        let a = evaluate(&EvalRequest::new(tri, x, k, tol)).unwrap();
        let b = evaluate(&EvalRequest::new(moved, rot * x + t, k, tol)).unwrap();
        prop_assert_eq!(a.method, b.method);
        for (u, v) in values(&a.result).into_iter().zip(values(&b.result)) {
            prop_assert!(close(u, v, 1e-8), "{} vs {}", u, v);
        }
    }

    #[test]
    fn reversing_orientation_flips_normal_derivative(p in planar(), x in prop::array::uniform3(coord()), k in 0.0..3.0f64) {
        prop_assume!(x[2].abs() > 1e-3);
        let tri = lift(&p);
        let rev = Triangle3::new(tri.v[0], tri.v[2], tri.v[1]).unwrap();
        let x = Vector3::from(x);
        let a = evaluate(&EvalRequest::new(tri, x, k, 1e-10)).unwrap();
        let b = evaluate(&EvalRequest::new(rev, x, k, 1e-10)).unwrap();
        prop_assert_relative_eq_c(a.result.i0, b.result.i0)?;
        prop_assert_relative_eq_c(a.result.di0_dn, -b.result.di0_dn)?;
    }

    #[test]
    fn static_kernel_is_real(p in planar(), x in prop::array::uniform3(coord())) {
        prop_assume!(x[2].abs() > 1e-3);
        let r = evaluate(&EvalRequest::new(lift(&p), Vector3::from(x), 0.0, 1e-9)).unwrap();
        for v in values(&r.result) {
            prop_assert!(v.im.abs() <= 1e-14 * (1.0 + v.re.abs()));
        }
    }
}

fn prop_assert_relative_eq_c(a: Complex64, b: Complex64) -> Result<(), TestCaseError> {
    prop_assert!(close(a, b, 1e-8), "{} vs {}", a, b);
    Ok(())
}

#[test]
fn analytic_and_fine_numeric_agree_at_moderate_height() {
    let p: Planar = [Vector2::new(-0.4, -0.3), Vector2::new(0.8, -0.2), Vector2::new(0.1, 0.7)];
    let tri = lift(&p);
    for &(z, k) in &[(0.05, 0.5), (0.2, 1.0), (0.5, 2.0)] {
        let req = EvalRequest::new(tri, Vector3::new(0.05, 0.02, z), k, 1e-12);
        let force = |f| EngineConfig { force: Some(f), ..EngineConfig::default() };
        let a = evaluate_with(&req, &force(ForcedMethod::Analytic)).unwrap();
        let n = evaluate_with(&req, &force(ForcedMethod::Numeric(32))).unwrap();
        assert!(matches!(a.method, Method::Analytic { .. }));
        for (u, v) in values(&a.result).into_iter().zip(values(&n.result)) {
            assert!(close(u, v, 1e-9), "z={z} k={k}: {u} vs {v}");
        }
    }
}

#[test]
fn looser_tolerance_uses_fewer_terms() {
    let tri = lift(&[Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.3, 0.8)]);
    let c = Vector3::new(1.3 / 3.0, 0.8 / 3.0, 1e-4 * tri.diameter());
    let (frame, planar, z) = to_local_frame(&tri, &c).unwrap();
    assert_eq!(frame.z, z);
    let oracle = adaptive_oracle(&planar, z, 1.0, 1e-13, false);
    assert!(oracle.converged);
    let degree = |m: Method| match m {
        Method::Analytic { q_exp, .. } => q_exp,
        Method::Numeric { .. } => panic!("expected the analytic method"),
    };
    let fine = evaluate(&EvalRequest::new(tri, c, 1.0, 1e-12)).unwrap();
    let coarse = evaluate(&EvalRequest::new(tri, c, 1.0, 1e-3)).unwrap();
    assert!(degree(coarse.method) < degree(fine.method));
    assert_relative_eq!(fine.result.i0.re, oracle.value.i0.re, max_relative = 1e-8);
    assert_relative_eq!(fine.result.i0.im, oracle.value.i0.im, epsilon = 1e-8);
    assert!((coarse.result.i0 - oracle.value.i0).norm() <= 1e-3 * oracle.value.i0.norm());
}
