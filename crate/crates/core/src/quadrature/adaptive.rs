//! Globally adaptive bisection quadrature for vector-valued integrands.
//!
//! Each panel is integrated with a 10-point Gauss rule over the whole panel
//! and over its two halves; the difference is the panel error estimate and
//! the two-half sum is the panel value. The panel with the largest scaled
//! error is bisected until every component meets its tolerance. Targets are
//! floored at a small multiple of `EPSILON * ∫|f|`, below which the error
//! estimates are rounding noise.

use std::sync::OnceLock;

use super::gauss::GaussRule;

const PANEL_POINTS: usize = 10;
const ROUNDOFF_FACTOR: f64 = 100.0 * f64::EPSILON;

fn panel_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(PANEL_POINTS))
}

/// Stopping criterion: component `c` has converged once its error estimate is
/// below `max(abs, rel * |v|)`, where `v` is the block of `group` consecutive
/// components containing `c` (use `group = 2` for interleaved complex values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
    pub group: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_panels: 4000,
            group: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub panels: usize,
    pub converged: bool,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    left: [f64; N],
    right: [f64; N],
    err: [f64; N],
    abs: [f64; N],
}

/// Gauss rule value and the same rule applied to `|f|`.
fn gauss<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let mut acc = [0.0; N];
    let mut abs = [0.0; N];
    for (x, w) in panel_rule().mapped(a, b) {
        let v = f(x);
        for c in 0..N {
            acc[c] += w * v[c];
            abs[c] += w * v[c].abs();
        }
    }
    (acc, abs)
}

fn make_panel<const N: usize, F: FnMut(f64) -> [f64; N]>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: [f64; N],
) -> Panel<N> {
    let m = 0.5 * (a + b);
    let (left, abs_l) = gauss(f, a, m);
    let (right, abs_r) = gauss(f, m, b);
    let mut err = [0.0; N];
    let mut abs = [0.0; N];
    for c in 0..N {
        err[c] = (left[c] + right[c] - whole[c]).abs();
        abs[c] = abs_l[c] + abs_r[c];
    }
    Panel {
        a,
        b,
        left,
        right,
        err,
        abs,
    }
}

/// Integrates `f` over `[a, b]` componentwise.
pub fn integrate<const N: usize, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Adaptive<N>
where
    F: FnMut(f64) -> [f64; N],
{
    if a == b {
        return Adaptive {
            value: [0.0; N],
            error: [0.0; N],
            panels: 0,
            converged: true,
        };
    }
    let (whole, _) = gauss(&mut f, a, b);
    let mut panels = vec![make_panel(&mut f, a, b, whole)];
    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        let mut abs = [0.0; N];
        for p in &panels {
            for c in 0..N {
                value[c] += p.left[c] + p.right[c];
                error[c] += p.err[c];
                abs[c] += p.abs[c];
            }
        }
        let mut target = [0.0; N];
        let mut done = true;
        let group = tol.group.max(1);
        for c in 0..N {
            let start = c - c % group;
            let block = value[start..(start + group).min(N)].iter().map(|v| v * v).sum::<f64>().sqrt();
            target[c] = tol.abs.max(tol.rel * block).max(ROUNDOFF_FACTOR * abs[c]);
            if error[c] > target[c] {
                done = false;
            }
        }
        if done || panels.len() >= tol.max_panels {
            return Adaptive {
                value,
                error,
                panels: panels.len(),
                converged: done,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let score: f64 = (0..N)
                    .filter(|&c| error[c] > target[c])
                    .map(|c| p.err[c] / target[c].max(f64::MIN_POSITIVE))
                    .sum();
                (i, score)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // interval exhausted at machine precision; keep the panel, give up
            let mut value = [0.0; N];
            let mut error = [0.0; N];
            panels.push(p);
            for q in &panels {
                for c in 0..N {
                    value[c] += q.left[c] + q.right[c];
                    error[c] += q.err[c];
                }
            }
            return Adaptive {
                value,
                error,
                panels: panels.len(),
                converged: false,
            };
        }
        panels.push(make_panel(&mut f, p.a, m, p.left));
        panels.push(make_panel(&mut f, m, p.b, p.right));
    }
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> (f64, f64) {
    let r = integrate(|x| [f(x)], a, b, tol);
    (r.value[0], r.error[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integrand() {
        let (v, e) = integrate_scalar(f64::exp, 0.0, 1.0, Tolerance::new(1e-14, 1e-14));
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        assert!(e < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // integral of x^-1/2 over [0, 1] is 2
        let (v, _) = integrate_scalar(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-12, 1e-12));
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn near_singular_peak() {
        // integral of z / (x^2 + z^2) over [-1, 1] is 2 atan(1/z)
        let z = 1e-5;
        let (v, _) = integrate_scalar(|x| z / (x * x + z * z), -1.0, 1.0, Tolerance::new(1e-13, 1e-13));
        assert!((v - 2.0 * (1.0 / z).atan()).abs() < 1e-11);
    }

    #[test]
    fn vector_components_converge_independently() {
        let r = integrate(|x| [x.sin(), 1e-8 * x.cos()], 0.0, 2.0, Tolerance::new(1e-15, 1e-13));
        assert!(r.converged);
        assert!((r.value[0] - (1.0 - 2f64.cos())).abs() < 1e-13);
        assert!((r.value[1] - 1e-8 * 2f64.sin()).abs() < 1e-20);
    }

    #[test]
    fn empty_interval() {
        let r = integrate(|_| [1.0], 3.0, 3.0, Tolerance::new(1e-12, 0.0));
        assert_eq!(r.value, [0.0]);
    }
}
