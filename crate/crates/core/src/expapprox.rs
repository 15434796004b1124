//! Economized polynomial approximations of `cos x` and `sin x` on `[0, dx)`.
//!
//! The Taylor polynomial is re-expanded in shifted Chebyshev polynomials on
//! `[0, dx]` and trailing Chebyshev terms are dropped while the bound on the
//! dropped terms plus the Taylor remainder stays below the tolerance. The
//! retained polynomial is the Taylor polynomial minus the dropped Chebyshev
//! terms, which keeps the monomial coefficients free of cancellation.
//!
//! The tolerance applies to each of `cos` and `sin` separately, so the
//! complex error `|e^{jx} - sum e_q x^q|` is at most `sqrt(2) * eps`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const TABLE_RANGES: [f64; 4] = [PI / 16.0, PI / 8.0, PI / 4.0, PI / 2.0];
pub const TABLE_TOLERANCES: [f64; 5] = [1e-3, 1e-6, 1e-9, 1e-12, 1e-15];
pub const MIN_TOLERANCE: f64 = 1e-15;
pub const MAX_TOLERANCE: f64 = 1e-3;
const SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpApprox {
    pub delta_x: f64,
    pub eps: f64,
    /// `e_q = c_q + j s_q`, `q = 0..=degree`.
    pub coeffs: Vec<Complex64>,
    /// Degree of the Taylor polynomial that was economized.
    pub seed_degree: usize,
    /// Sampled maximum of `max(|cos x - C(x)|, |sin x - S(x)|)` on `[0, dx]`.
    pub sampled_error: f64,
}

impl ExpApprox {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }
}

/// Maclaurin coefficients of `(cos, sin)` up to degree `q`.
pub fn taylor_sin_cos(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut cos = vec![0.0; q + 1];
    let mut sin = vec![0.0; q + 1];
    let mut fact = 1.0;
    for n in 0..=q {
        if n > 0 {
            fact *= n as f64;
        }
        let term = 1.0 / fact;
        match n % 4 {
            0 => cos[n] = term,
            1 => sin[n] = term,
            2 => cos[n] = -term,
            _ => sin[n] = -term,
        }
    }
    (cos, sin)
}

/// Bound on the Taylor remainder of `cos`/`sin` of degree `n` on `[0, dx]`.
fn taylor_remainder(dx: f64, n: usize) -> f64 {
    let mut r = 1.0;
    for i in 1..=n + 1 {
        r *= dx / i as f64;
    }
    r
}

/// Smallest degree whose Taylor remainder bound is at most `eps`.
pub fn taylor_degree(delta_x: f64, eps: f64) -> usize {
    (0..200).find(|&n| taylor_remainder(delta_x, n) <= eps).unwrap_or(200)
}

/// Coefficients of `T_k(2y - 1)` in powers of `y`, for `k = 0..=n`.
fn shifted_chebyshev_monomials(n: usize) -> Vec<Vec<f64>> {
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    t.push(vec![1.0]);
    if n >= 1 {
        t.push(vec![-1.0, 2.0]);
    }
    for k in 2..=n {
        // T_k = 2 (2y - 1) T_{k-1} - T_{k-2}
        let mut next = vec![0.0; k + 1];
        for (i, &c) in t[k - 1].iter().enumerate() {
            next[i + 1] += 4.0 * c;
            next[i] -= 2.0 * c;
        }
        for (i, &c) in t[k - 2].iter().enumerate() {
            next[i] -= c;
        }
        t.push(next);
    }
    t
}

/// Chebyshev coefficients on `[-1, 1]` of a polynomial given in powers of `t`.
fn monomial_to_chebyshev(b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut a = vec![0.0; n];
    // Horner in the Chebyshev basis: P <- t * P + b_i
    for i in (0..n).rev() {
        let mut next = vec![0.0; n];
        for (k, &c) in a.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if k == 0 {
                next[1.min(n - 1)] += c;
            } else {
                next[k - 1] += 0.5 * c;
                if k + 1 < n {
                    next[k + 1] += 0.5 * c;
                }
            }
        }
        next[0] += b[i];
        a = next;
    }
    a
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Chebyshev coefficients of a polynomial in `x` rescaled to `[0, dx]`.
fn chebyshev_on_range(c: &[f64], dx: f64) -> Vec<f64> {
    // x = h (1 + t), h = dx / 2
    let h = 0.5 * dx;
    let n = c.len();
    let mut b = vec![0.0; n];
    let mut hq = 1.0;
    for (q, &cq) in c.iter().enumerate() {
        for (i, bi) in b.iter_mut().enumerate().take(q + 1) {
            *bi += cq * hq * binomial(q, i);
        }
        hq *= h;
    }
    monomial_to_chebyshev(&b)
}

fn sampled_error(delta_x: f64, coeffs: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    let eval = |x: f64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    };
    for i in 0..=SAMPLES + 1 {
        // Chebyshev-distributed points plus both endpoints
        let x = if i == SAMPLES + 1 {
            delta_x
        } else {
            0.5 * delta_x * (1.0 - (PI * i as f64 / SAMPLES as f64).cos())
        };
        let p = eval(x);
        worst = worst.max((p.re - x.cos()).abs()).max((p.im - x.sin()).abs());
    }
    worst
}

pub fn economize(delta_x: f64, eps: f64) -> Result<ExpApprox> {
    if !(delta_x > 0.0 && delta_x <= PI / 2.0 + 1e-15) {
        return Err(Error::InvalidArgument(format!(
            "economization range {delta_x} outside (0, pi/2]"
        )));
    }
    if !(MIN_TOLERANCE..=MAX_TOLERANCE).contains(&eps) {
        return Err(Error::InvalidTolerance(eps));
    }
    let seed_degree = taylor_degree(delta_x, eps / 10.0);
    let remainder = taylor_remainder(delta_x, seed_degree);
    let (cos_t, sin_t) = taylor_sin_cos(seed_degree);
    let cheb_cos = chebyshev_on_range(&cos_t, delta_x);
    let cheb_sin = chebyshev_on_range(&sin_t, delta_x);
    let shifted = shifted_chebyshev_monomials(seed_degree);

    let build = |m: usize| -> Vec<Complex64> {
        let mut out: Vec<Complex64> = (0..=m)
            .map(|q| Complex64::new(cos_t[q], sin_t[q]))
            .collect();
        for k in m + 1..=seed_degree {
            let ak = Complex64::new(cheb_cos[k], cheb_sin[k]);
            let mut scale = 1.0;
            for (q, o) in out.iter_mut().enumerate() {
                *o -= ak * shifted[k][q] * scale;
                scale /= delta_x;
            }
        }
        out
    };
    let dropped = |cheb: &[f64], m: usize| -> f64 { cheb[m + 1..].iter().map(|a| a.abs()).sum() };

    let mut m = (0..=seed_degree)
        .find(|&m| remainder + dropped(&cheb_cos, m).max(dropped(&cheb_sin, m)) <= eps)
        .unwrap_or(seed_degree);
    loop {
        let coeffs = build(m);
        let err = sampled_error(delta_x, &coeffs);
        if err <= eps || m == seed_degree {
            return Ok(ExpApprox {
                delta_x,
                eps,
                coeffs,
                seed_degree,
                sampled_error: err,
            });
        }
        m += 1;
    }
}

/// The precomputed economization table, ranges by tolerances.
pub fn table() -> &'static [Vec<ExpApprox>] {
    static TABLE: OnceLock<Vec<Vec<ExpApprox>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        TABLE_RANGES
            .iter()
            .map(|&dx| {
                TABLE_TOLERANCES
                    .iter()
                    .map(|&eps| economize(dx, eps).expect("table entry"))
                    .collect()
            })
            .collect()
    })
}

/// Picks the table entry with the smallest range exceeding `k * ell` and the
/// loosest tolerance not above `eps`. A zero argument range yields the
/// exact constant `1`.
pub fn select_approx(k: f64, ell: f64, eps: f64) -> Result<&'static ExpApprox> {
    let k_ell = k * ell;
    if !(k_ell < PI / 2.0) {
        return Err(Error::ExpansionRange { k_ell });
    }
    if !(eps >= MIN_TOLERANCE) {
        return Err(Error::InvalidTolerance(eps));
    }
    let i = TABLE_RANGES
        .iter()
        .position(|&dx| dx > k_ell)
        .ok_or(Error::ExpansionRange { k_ell })?;
    let j = TABLE_TOLERANCES
        .iter()
        .position(|&e| e <= eps)
        .ok_or(Error::InvalidTolerance(eps))?;
    if k_ell == 0.0 {
        return Ok(constant());
    }
    Ok(&table()[i][j])
}

/// `e^{jx} = 1` exactly at `x = 0`; used when `k * ell` vanishes so that the
/// static case carries no expansion error.
fn constant() -> &'static ExpApprox {
    static ONE: OnceLock<ExpApprox> = OnceLock::new();
    ONE.get_or_init(|| ExpApprox {
        delta_x: 0.0,
        eps: 0.0,
        coeffs: vec![Complex64::new(1.0, 0.0)],
        seed_degree: 0,
        sampled_error: 0.0,
    })
}
