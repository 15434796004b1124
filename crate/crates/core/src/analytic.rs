//! Analytic evaluation over an origin-centred reference triangle.
//!
//! `e^{jk(R - |z|)}` is replaced by a polynomial `Σ e_q (k(R - |z|))^q`, and
//! each power is integrated exactly:
//!
//! * `K0[q] = k^q ∫∫ (R - |z|)^q r/R dr dθ`,
//! * `Kx[q]`, `Ky[q]` the same with an extra `r cos θ`, `r sin θ`,
//! * `Ic[q] = ∫ J_q cos θ dθ`, `Is[q] = ∫ J_q sin θ dθ` with
//!   `J_q = (k^q/2) ∫ (R - |z|)^q r²/(R (R + |z|)) dr`,
//!
//! plus their `z` derivatives. For `z = 0` the derivatives are one-sided
//! limits from `z > 0`.

use num_complex::Complex64;

use crate::elementary::{ElemGeom, ElemTable};
use crate::error::Result;
use crate::expapprox::{select_approx, ExpApprox};
use crate::geometry::{ref_params, RefGeom, SignedSubTriangle};
use crate::panel::PanelIntegrals;

#[derive(Debug, Clone, PartialEq)]
pub struct KTerms {
    pub k0: Vec<f64>,
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    /// `z` derivatives.
    pub dk0: Vec<f64>,
    pub dkx: Vec<f64>,
    pub dky: Vec<f64>,
    pub d2k0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JTerms {
    pub ic: Vec<f64>,
    pub is: Vec<f64>,
    /// `z` derivatives. At `z = 0` these carry a logarithmic singularity and
    /// are stored as zero: they only enter multiplied by `|z|`.
    pub dic: Vec<f64>,
    pub dis: Vec<f64>,
}

/// Sign of `z`, with `z = 0` taken from above.
fn sign_of(z: f64) -> f64 {
    if z < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Elementary-integral table deep enough for expansion order `q_max`.
pub fn elem_table(g: &RefGeom, q_max: usize) -> Result<ElemTable> {
    let eg = ElemGeom::new(g.alpha, g.alpha_p, g.theta_lo, g.theta_hi)?;
    Ok(ElemTable::new(eg, q_max as i32 + 2))
}

/// Solves `x[q] = a[q] − c(q) x[q−1]` for `q ≥ 1` from the seed `x[0]`.
///
/// Upward recursion multiplies rounding errors by `c` at each step; with
/// `downward` the recursion instead runs from `x[len−1] = 0` towards `q = 1`,
/// damping both rounding and the truncation at the top.
fn solve_recurrence(x0: f64, a: &[f64], c: impl Fn(usize) -> f64, downward: bool) -> Vec<f64> {
    let n = a.len();
    let mut x = vec![0.0; n];
    x[0] = x0;
    if downward {
        for q in (2..n).rev() {
            x[q - 1] = (a[q] - x[q]) / c(q);
        }
    } else {
        for q in 1..n {
            x[q] = a[q] - c(q) * x[q - 1];
        }
    }
    x
}

/// Highest order for a downward J recursion, or `None` when the upward one
/// is accurate. The recursion coefficient is about `2k|z|`; going down, the
/// error from starting at zero shrinks by `k ell / c` per step, with `ell`
/// the largest `R − |z|` over the triangle.
fn downward_top(g: &RefGeom, az: f64, k: f64, q_max: usize) -> Option<usize> {
    let c_min = 1.5 * k * az;
    if c_min <= 1.0 {
        return None;
    }
    let r_max = g.s / g.theta_lo.cos().min(g.theta_hi.cos());
    let ell = r_max * r_max / (r_max.hypot(az) + az);
    let rho = k * ell / c_min;
    if rho >= 0.7 {
        return None;
    }
    let extra = (1e-17f64.ln() / rho.max(1e-300).ln()).ceil() as usize;
    Some(q_max + extra.clamp(1, 200))
}

pub fn j_chain(g: &RefGeom, z: f64, k: f64, q_max: usize, elem: &ElemTable) -> JTerms {
    let sg = sign_of(z);
    let az = z.abs();
    let (p, t) = (&elem.plain, &elem.tan);
    let (s, big_s) = (g.s, g.big_s);
    let n = q_max + 1;
    let logs = match (elem.lc, elem.ls) {
        (Some(lc), Some(ls)) if az > 0.0 => Some((lc, ls)),
        _ => None,
    };
    let (mut ic0, mut is0, mut dic0, mut dis0) = (0.5 * s * p.get(0), 0.5 * s * t.get(0), 0.0, 0.0);
    if let Some((lc, ls)) = logs {
        ic0 += 0.25 * az * lc;
        is0 += 0.25 * az * ls;
        let f = s / (2.0 * big_s);
        dic0 = sg * (0.25 * lc + f * p.get(-1));
        dis0 = sg * (0.25 * ls + f * t.get(-1));
    }

    let top = downward_top(g, az, k, q_max);
    let extended;
    let table = match top {
        Some(top) => {
            extended = ElemTable::new(elem.geom, top as i32 + 2);
            &extended
        }
        None => elem,
    };
    let len = top.map_or(n, |top| top + 1);
    let ks = k * big_s;
    let c = |q: usize| k * az * (2.0 * q as f64 + 1.0) / (q as f64 + 1.0);
    let lead = |q: usize| s * ks.powi(q as i32) / (2.0 * (q as f64 + 1.0));
    let a_c: Vec<f64> = (0..len).map(|q| if q == 0 { 0.0 } else { lead(q) * table.binomial(q, 0, false) }).collect();
    let a_s: Vec<f64> = (0..len).map(|q| if q == 0 { 0.0 } else { lead(q) * table.binomial(q, 0, true) }).collect();
    let mut ic = solve_recurrence(ic0, &a_c, c, top.is_some());
    let mut is = solve_recurrence(is0, &a_s, c, top.is_some());
    let (mut dic, mut dis) = (vec![0.0; len], vec![0.0; len]);
    if logs.is_some() {
        let dlead = |q: usize| s / (2.0 * big_s) * ks.powi(q as i32) * q as f64 / (q as f64 + 1.0);
        let kc = |q: usize| k * (2.0 * q as f64 + 1.0) / (q as f64 + 1.0);
        let d_c: Vec<f64> = (0..len)
            .map(|q| if q == 0 { 0.0 } else { -sg * (dlead(q) * table.binomial(q, 1, false) + kc(q) * ic[q - 1]) })
            .collect();
        let d_s: Vec<f64> = (0..len)
            .map(|q| if q == 0 { 0.0 } else { -sg * (dlead(q) * table.binomial(q, 1, true) + kc(q) * is[q - 1]) })
            .collect();
        dic = solve_recurrence(dic0, &d_c, c, top.is_some());
        dis = solve_recurrence(dis0, &d_s, c, top.is_some());
    }
    for v in [&mut ic, &mut is, &mut dic, &mut dis] {
        v.truncate(n);
    }
    JTerms { ic, is, dic, dis }
}

/// `∂²K0[q]/∂z²` for `q = 0..=q_max`.
pub fn hypersingular(g: &RefGeom, k: f64, q_max: usize, elem: &ElemTable) -> Vec<f64> {
    let alpha = elem.geom.alpha;
    let ks = k * g.big_s;
    (0..=q_max)
        .map(|q| {
            let pq = ks.powi(q as i32);
            pq / g.big_s
                * (alpha * elem.binomial(q + 1, 3, false)
                    + (q + 1) as f64 * elem.binomial(q + 1, 2, false))
        })
        .collect()
}

pub fn k_terms(g: &RefGeom, z: f64, k: f64, q_max: usize, elem: &ElemTable, hyper: bool) -> KTerms {
    let sg = sign_of(z);
    let az = z.abs();
    let (s, big_s) = (g.s, g.big_s);
    let j = j_chain(g, z, k, q_max, elem);
    let ks = k * big_s;
    let n = q_max + 1;
    let mut out = KTerms {
        k0: Vec::with_capacity(n),
        kx: Vec::with_capacity(n),
        ky: Vec::with_capacity(n),
        dk0: Vec::with_capacity(n),
        dkx: Vec::with_capacity(n),
        dky: Vec::with_capacity(n),
        d2k0: hyper.then(|| hypersingular(g, k, q_max, elem)),
    };
    for q in 0..n {
        let qf = q as f64;
        let pq = ks.powi(q as i32);
        let bp0 = elem.binomial(q + 1, 0, false);
        let bp1 = elem.binomial(q + 1, 1, false);
        let bt0 = elem.binomial(q + 1, 0, true);
        let bt1 = elem.binomial(q + 1, 1, true);
        let m = 2.0 / (qf + 2.0);
        out.k0.push(big_s * pq / (qf + 1.0) * bp0);
        out.kx.push(s * big_s * pq / (qf + 2.0) * bp0 + m * az * j.ic[q]);
        out.ky.push(s * big_s * pq / (qf + 2.0) * bt0 + m * az * j.is[q]);
        out.dk0.push(-sg * pq * bp1);
        let r = s * pq * (qf + 1.0) / (qf + 2.0);
        out.dkx.push(-sg * r * bp1 + sg * m * j.ic[q] + m * az * j.dic[q]);
        out.dky.push(-sg * r * bt1 + sg * m * j.is[q] + m * az * j.dis[q]);
    }
    out
}

fn weighted(coeffs: &[Complex64], terms: &[f64]) -> Complex64 {
    coeffs.iter().zip(terms).map(|(e, v)| e * v).sum()
}

/// Sums the expansion and applies the `e^{jk|z|}` prefactor. Values are in
/// the reference frame.
pub fn assemble(z: f64, k: f64, approx: &ExpApprox, terms: &KTerms) -> PanelIntegrals {
    let sg = sign_of(z);
    let e = &approx.coeffs;
    let pre = Complex64::from_polar(1.0, k * z.abs());
    let jk = Complex64::new(0.0, k);
    let i0p = weighted(e, &terms.k0);
    let ixp = weighted(e, &terms.kx);
    let iyp = weighted(e, &terms.ky);
    let d0 = weighted(e, &terms.dk0);
    let dz = |ip: Complex64, dp: Complex64| pre * (sg * jk * ip + dp);
    PanelIntegrals {
        i0: pre * i0p,
        ix: pre * ixp,
        iy: pre * iyp,
        di0_dn: -dz(i0p, d0),
        dix_dn: -dz(ixp, weighted(e, &terms.dkx)),
        diy_dn: -dz(iyp, weighted(e, &terms.dky)),
        d2i0_dn2: terms
            .d2k0
            .as_ref()
            .map(|d2| pre * (jk * jk * i0p + 2.0 * sg * jk * d0 + weighted(e, d2))),
    }
}

/// Length scale bounding `R - |z|` over a subtriangle.
pub fn expansion_length(sub: &SignedSubTriangle, z: f64) -> f64 {
    let r = sub.r1.max(sub.r2);
    // r² / (sqrt(r² + z²) + |z|) avoids cancellation for |z| >> r
    r * r / (r.hypot(z) + z.abs())
}

/// Signed contribution of one subtriangle, with moments in the planar frame.
pub fn subtriangle_integrals(
    sub: &SignedSubTriangle,
    z: f64,
    k: f64,
    approx: &ExpApprox,
    hyper: bool,
) -> Result<PanelIntegrals> {
    let g = ref_params(sub, z);
    let q_max = approx.degree();
    let elem = elem_table(&g, q_max)?;
    let terms = k_terms(&g, z, k, q_max, &elem, hyper);
    let local = assemble(z, k, approx, &terms);
    Ok(local.rotated(sub.start_angle() + g.phi) * sub.sign)
}

/// Analytic integrals over a planar triangle split at the origin.
pub fn triangle_integrals(
    subs: &[SignedSubTriangle],
    z: f64,
    k: f64,
    tol: f64,
    hyper: bool,
) -> Result<(PanelIntegrals, &'static ExpApprox)> {
    let ell = subs.iter().map(|s| expansion_length(s, z)).fold(0.0, f64::max);
    let approx = select_approx(k, ell, tol)?;
    let mut acc = PanelIntegrals {
        d2i0_dn2: hyper.then_some(Complex64::new(0.0, 0.0)),
        ..Default::default()
    };
    for sub in subs {
        acc += subtriangle_integrals(sub, z, k, approx, hyper)?;
    }
    Ok((acc, approx))
}
