//! Definite elementary integrals over a shifted polar-angle range.
//!
//! With `Δ² = 1 − α² sin²θ` and `w = Δ / cos θ = sqrt(1 + α'² tan²θ)`:
//!
//! * plain powers `P[n] = ∫ w^n dθ`,
//! * tan-weighted powers `T[n] = ∫ w^n tan θ dθ`,
//! * the log integrals `L_c = ∫ cos θ log((Δ − α')/(Δ + α')) dθ` and
//!   `L_s = ∫ sin θ log((Δ − α')/(Δ + α')) dθ`,
//!
//! for `n = −3..=N`. Every value is a difference of antiderivatives at the
//! ends of the range. Negative powers come from closed forms written so they
//! stay accurate as `α → 0`; positive powers come from upward recursions.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::quadrature::adaptive::{integrate_scalar, Tolerance};

/// Below this `α` the `α = 0` closed forms are used.
pub const ALPHA_ZERO: f64 = 1e-8;
/// Lowest power stored in the tables.
pub const MIN_POWER: i32 = -3;

/// `C(2n, n) / 4^n`, the coefficients of `(1 − y)^(-1/2)`.
fn central_binomial(n: usize) -> f64 {
    (1..=n).fold(1.0, |b, i| b * (2 * i - 1) as f64 / (2 * i) as f64)
}

/// `Σ_{n≥1} sign^(n+1) b_n 2n/(2n+1) y^(n−1)` in `y = v²`; the series of
/// `(asin v − v/sqrt(1 − v²)) / (−v³)` (sign = +1 after flipping) and of
/// `(asinh v − v/sqrt(1 + v²)) / v³` (alternating).
fn odd_series(y: f64, alternating: bool) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for n in 1..=24usize {
        let sgn = if alternating && n % 2 == 0 { -1.0 } else { 1.0 };
        let term = sgn * central_binomial(n) * (2 * n) as f64 / (2 * n + 1) as f64 * pow;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pow *= y;
    }
    sum
}

fn ratio(f: fn(f64) -> f64, y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        f(y) / y
    }
}

fn ln1p_ratio(y: f64) -> f64 {
    ratio(f64::ln_1p, y)
}

/// Values at one end of the angular range.
#[derive(Debug, Clone, Copy)]
struct Endpoint {
    x: f64,
    c: f64,
    t: f64,
    delta: f64,
    w: f64,
}

impl Endpoint {
    fn new(theta: f64, alpha: f64) -> Self {
        let (x, c) = theta.sin_cos();
        let delta = ((1.0 - alpha * x) * (1.0 + alpha * x)).sqrt();
        Self {
            x,
            c,
            t: x / c,
            delta,
            w: delta / c,
        }
    }
}

/// Shape parameters and range shared by all tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElemGeom {
    pub alpha: f64,
    pub alpha_p: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl ElemGeom {
    /// `alpha_p` is passed separately since callers usually have it without
    /// cancellation (`s / S`).
    pub fn new(alpha: f64, alpha_p: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        if !(theta_lo > -FRAC_PI_2 && theta_hi < FRAC_PI_2) {
            return Err(Error::AngleRange {
                lo: theta_lo,
                hi: theta_hi,
            });
        }
        if !(0.0..1.0).contains(&alpha) || !(alpha_p > 0.0 && alpha_p <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {alpha}, alpha' = {alpha_p} outside [0, 1)"
            )));
        }
        let (alpha, alpha_p) = if alpha < ALPHA_ZERO {
            (0.0, 1.0)
        } else {
            (alpha, alpha_p)
        };
        Ok(Self {
            alpha,
            alpha_p,
            theta_lo,
            theta_hi,
        })
    }

    pub fn from_alpha(alpha: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        Self::new(alpha, ((1.0 - alpha) * (1.0 + alpha)).sqrt(), theta_lo, theta_hi)
    }

    fn ends(&self) -> [Endpoint; 2] {
        [
            Endpoint::new(self.theta_lo, self.alpha),
            Endpoint::new(self.theta_hi, self.alpha),
        ]
    }

    /// `Δ / cos θ`.
    pub fn w(&self, theta: f64) -> f64 {
        Endpoint::new(theta, self.alpha).w
    }
}

/// Power table indexed by `n` from [`MIN_POWER`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowTable {
    values: Vec<f64>,
}

impl PowTable {
    pub fn get(&self, n: i32) -> f64 {
        self.values[(n - MIN_POWER) as usize]
    }

    /// Highest stored power.
    pub fn max_power(&self) -> i32 {
        self.values.len() as i32 + MIN_POWER - 1
    }
}

fn diff(ends: &[Endpoint; 2], f: impl Fn(&Endpoint) -> f64) -> f64 {
    f(&ends[1]) - f(&ends[0])
}

/// `∫ w^n dθ` for `n = −3..=n_max`.
pub fn build_pow_plain(g: &ElemGeom, n_max: i32) -> PowTable {
    let (a, ap) = (g.alpha, g.alpha_p);
    let ends = g.ends();
    let a2 = a * a;
    let ap2 = ap * ap;
    let n_max = n_max.max(0);
    let mut values = vec![0.0; (n_max - MIN_POWER + 1) as usize];
    // n = -3: x³ h(αx) + x/Δ with h(y) = (asin y − y/sqrt(1 − y²))/y³
    values[0] = diff(&ends, |e| {
        let y = a * e.x;
        let h = if y.abs() < 0.2 {
            -odd_series(y * y, false)
        } else {
            (y.asin() - y / e.delta) / (y * y * y)
        };
        e.x * e.x * e.x * h + e.x / e.delta
    });
    // n = -2: atan(t α²/((1+α')(1+α' t²)))/α² + atan(α' t)/(1+α')
    values[1] = diff(&ends, |e| {
        let base = e.t / ((1.0 + ap) * (1.0 + ap * e.t * e.t));
        base * ratio(f64::atan, a2 * base) + (ap * e.t).atan() / (1.0 + ap)
    });
    // n = -1: asin(α x)/α
    values[2] = diff(&ends, |e| e.x * ratio(f64::asin, a * e.x));
    values[3] = g.theta_hi - g.theta_lo;
    if n_max >= 1 {
        // U[m] = ∫ (1 + α'² u²)^(m/2) du over u = tan θ
        let mut u_odd = diff(&ends, |e| e.t * ratio(f64::asinh, ap * e.t));
        let mut u_even = diff(&ends, |e| e.t);
        for n in 1..=n_max {
            let m = n - 2;
            let u = if m % 2 != 0 { u_odd } else { u_even };
            values[(n - MIN_POWER) as usize] = a2 * values[(n - 2 - MIN_POWER) as usize] + ap2 * u;
            // advance U[m] -> U[m + 2]
            let next = diff(&ends, |e| e.t * e.w.powi(m + 2)) / (m + 3) as f64
                + (m + 2) as f64 / (m + 3) as f64 * u;
            if m % 2 != 0 {
                u_odd = next;
            } else {
                u_even = next;
            }
        }
    }
    PowTable { values }
}

/// `∫ w^n tan θ dθ` for `n = −3..=n_max`.
pub fn build_pow_tan(g: &ElemGeom, n_max: i32) -> PowTable {
    let (a, ap) = (g.alpha, g.alpha_p);
    let ends = g.ends();
    let a2 = a * a;
    let n_max = n_max.max(0);
    let mut values = vec![0.0; (n_max - MIN_POWER + 1) as usize];
    // n = -3: −(asinh v − αc/Δ)/α³ with v = αc/α'
    values[0] = diff(&ends, |e| {
        let v = a * e.c / ap;
        if v.abs() < 0.2 {
            let r = e.c / ap;
            -r * r * r * odd_series(v * v, true)
        } else {
            -(v.asinh() - a * e.c / e.delta) / (a * a2)
        }
    });
    // n = -2: −log(1 − α² x²)/(2α²)
    values[1] = diff(&ends, |e| 0.5 * e.x * e.x * ln1p_ratio(-a2 * e.x * e.x));
    // n = -1: −log(αc + Δ)/α
    values[2] = diff(&ends, |e| {
        let r = e.c - a * e.x * e.x / (1.0 + e.delta);
        -r * ln1p_ratio(a * r)
    });
    values[3] = diff(&ends, |e| -e.c.ln());
    for n in 1..=n_max {
        let i = (n - MIN_POWER) as usize;
        values[i] = a2 * values[i - 2] + diff(&ends, |e| e.w.powi(n)) / n as f64;
    }
    PowTable { values }
}

/// `∫ (w − α)^q w^(−s) dθ = Σ_u C(q,u) (−α)^u P[q − u − s]`.
///
/// Works for either power family; the table must reach `q − s`.
pub fn binomial_combination(q: usize, s: usize, alpha: f64, pow: &PowTable) -> f64 {
    assert!(s <= 3, "weight power {s} outside 0..=3");
    let mut sum = 0.0;
    let mut coeff = 1.0;
    for u in 0..=q {
        sum += coeff * pow.get(q as i32 - u as i32 - s as i32);
        coeff *= -alpha * (q - u) as f64 / (u + 1) as f64;
    }
    sum
}

fn require_positive_alpha(g: &ElemGeom) -> Result<()> {
    if g.alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("log integrals need alpha > 0".into()))
    }
}

/// `log((Δ − α')/(Δ + α')) = 2 log(α c/(Δ + α'))`.
fn log_ratio(e: &Endpoint, a: f64, ap: f64) -> f64 {
    2.0 * (a * e.c / (e.delta + ap)).ln()
}

/// `∫ cos θ log((Δ − α')/(Δ + α')) dθ`; requires `α > 0`.
pub fn l_c(g: &ElemGeom) -> Result<f64> {
    require_positive_alpha(g)?;
    let (a, ap) = (g.alpha, g.alpha_p);
    Ok(diff(&g.ends(), |e| {
        e.x * log_ratio(e, a, ap) + 2.0 * ((e.delta + ap * e.x) / e.c).ln()
            - 2.0 * ap * e.x * ratio(f64::asin, a * e.x)
    }))
}

/// `∫ sin θ log((Δ − α')/(Δ + α')) dθ`; requires `α > 0`.
pub fn l_s(g: &ElemGeom) -> Result<f64> {
    require_positive_alpha(g)?;
    let (a, ap) = (g.alpha, g.alpha_p);
    Ok(diff(&g.ends(), |e| {
        let r = e.c - a * e.x * e.x / (1.0 + e.delta);
        -e.c * log_ratio(e, a, ap) + 2.0 * ap * r * ln1p_ratio(a * r)
    }))
}

/// All elementary integrals for one reference triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ElemTable {
    pub geom: ElemGeom,
    pub plain: PowTable,
    pub tan: PowTable,
    /// `None` when `α = 0`, where the log integrals diverge (they only ever
    /// appear multiplied by `|z|`).
    pub lc: Option<f64>,
    pub ls: Option<f64>,
}

impl ElemTable {
    pub fn new(geom: ElemGeom, n_max: i32) -> Self {
        Self {
            plain: build_pow_plain(&geom, n_max),
            tan: build_pow_tan(&geom, n_max),
            lc: l_c(&geom).ok(),
            ls: l_s(&geom).ok(),
            geom,
        }
    }

    /// `∫ (w − α)^q w^(−s) dθ`, times `tan θ` when `tan` is set.
    ///
    /// The expanded binomial sum cancels badly once `w − α` is small compared
    /// with `w + α` (height large against the element); when it would lose
    /// more than [`MAX_CANCELLATION`] the integral is instead evaluated by
    /// adaptive quadrature of the cancellation-free integrand
    /// `(α'^2 / (cos²θ (w + α)))^q w^(−s)`.
    pub fn binomial(&self, q: usize, s: usize, tan: bool) -> f64 {
        let pow = if tan { &self.tan } else { &self.plain };
        let alpha = self.geom.alpha;
        let sum = binomial_combination(q, s, alpha, pow);
        let mut mag = 0.0;
        let mut coeff: f64 = 1.0;
        for u in 0..=q {
            mag += coeff.abs() * pow.get(q as i32 - u as i32 - s as i32).abs();
            coeff *= -alpha * (q - u) as f64 / (u + 1) as f64;
        }
        if mag <= MAX_CANCELLATION * sum.abs() {
            return sum;
        }
        let g = &self.geom;
        let ap2 = g.alpha_p * g.alpha_p;
        let f = |th: f64| {
            let c = th.cos();
            let w = g.w(th);
            let v = (ap2 / (c * c * (w + alpha))).powi(q as i32) * w.powi(-(s as i32));
            if tan {
                v * th.tan()
            } else {
                v
            }
        };
        integrate_scalar(f, g.theta_lo, g.theta_hi, Tolerance::new(0.0, 1e-15)).0
    }
}

/// Largest tolerated ratio of the sum of term magnitudes to the value of a
/// binomial combination before switching to quadrature.
pub const MAX_CANCELLATION: f64 = 1e3;
