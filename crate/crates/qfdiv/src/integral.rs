//! f-divergences as integrals of hockey-stick divergences.
//!
//! For states `rho`, `sigma` and a twice differentiable `f` with `f(1) = 0`,
//!
//! ```text
//! D_f(rho||sigma) = int_1^inf f''(g) E_g(rho||sigma) + g^-3 f''(1/g) E_g(sigma||rho) dg
//!                 = int_0^inf f''(g) Ẽ_g(rho||sigma) dg
//! ```
//!
//! with `E_g(rho||sigma) = Tr(rho - g sigma)_+` and `Ẽ_g = E_g - (1 - g)_+`.
//! `E_g(rho||sigma)` vanishes beyond `exp(D_max(rho||sigma))` and is smooth
//! between consecutive generalized eigenvalues of the pencil, so those points
//! become panel boundaries.

use crate::closed;
use crate::error::{Error, Result};
use crate::generator::{Generator, Hellinger};
use crate::linalg::{c, CMatrix};
use crate::operator::{negative_part_trace, positive_part_trace, DensityState, ProbVector, StatePair};
use crate::quad::{integrate, integrate_to_infinity, integrate_to_zero, QuadResult, QuadratureSpec};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Integral,
    IntegralAlt,
    Classical,
    Closed,
    TraceExact,
    TraceQuadrature,
    FractionalTrace,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Integral => "integral",
            Method::IntegralAlt => "integral-alt",
            Method::Classical => "classical",
            Method::Closed => "closed",
            Method::TraceExact => "trace-exact",
            Method::TraceQuadrature => "trace-quadrature",
            Method::FractionalTrace => "fractional-trace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub est_error: f64,
    pub method: Method,
    /// Set when the value is `+inf` because of a support condition.
    pub note: Option<String>,
}

impl DivergenceValue {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            est_error: 0.0,
            method,
            note: None,
        }
    }

    pub fn infinite(method: Method, note: impl Into<String>) -> Self {
        Self {
            value: f64::INFINITY,
            est_error: 0.0,
            method,
            note: Some(note.into()),
        }
    }

    pub fn from_quad(q: QuadResult, method: Method) -> Self {
        Self {
            value: q.value,
            est_error: q.est_error,
            method,
            note: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `E_gamma(rho||sigma) = Tr(rho - gamma sigma)_+` for `gamma >= 0`.
pub fn hockey_stick(gamma: f64, rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(positive_part_trace(&shifted(rho.matrix(), sigma.matrix(), gamma)))
}

/// `Ẽ_gamma = E_gamma - (1 - gamma)_+`; below 1 it equals `Tr(rho - gamma sigma)_-`,
/// which is how it is evaluated to avoid cancellation.
pub fn hockey_stick_tilde(gamma: f64, rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    check_gamma(gamma)?;
    let m = shifted(rho.matrix(), sigma.matrix(), gamma);
    Ok(if gamma < 1.0 {
        negative_part_trace(&m)
    } else {
        positive_part_trace(&m)
    })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be finite and >= 0")));
    }
    Ok(())
}

fn shifted(rho: &CMatrix, sigma: &CMatrix, gamma: f64) -> CMatrix {
    rho - sigma * c(gamma)
}

/// `f''(g) * e`, treating an exact zero weight as zero even if `f''` overflows.
fn weighted(e: f64, w: impl FnOnce() -> f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e * w()
    }
}

/// Ascending breakpoints `lo, kinks in (lo, hi), hi` without near duplicates.
fn breakpoints(lo: f64, hi: f64, kinks: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    for &k in kinks {
        if k > lo * (1.0 + 1e-13) && k < hi * (1.0 - 1e-13) {
            pts.push(k);
        }
    }
    pts.push(hi);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    pts
}

/// `int_1^K w(g) E_g(a||b) dg` where `K = exp(dmax)` may be infinite.
fn hockey_integral(
    a: &CMatrix,
    b: &CMatrix,
    dmax: f64,
    kinks: &[f64],
    weight: &dyn Fn(f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let integrand = |g: f64| weighted(positive_part_trace(&shifted(a, b, g)), || weight(g));
    if dmax.is_finite() {
        let top = dmax.exp();
        if top <= 1.0 * (1.0 + 1e-15) {
            return Ok(QuadResult::zero());
        }
        return integrate(integrand, &breakpoints(1.0, top, kinks), spec);
    }
    let last = kinks.iter().copied().fold(1.0f64, f64::max);
    let split = 2.0 * last;
    let body = integrate(integrand, &breakpoints(1.0, split, kinks), spec)?;
    let tail = integrate_to_infinity(integrand, split, spec)?;
    Ok(body.add(tail))
}

fn support_note(pair: &StatePair) -> String {
    match (pair.rho_ll_sigma(), pair.sigma_ll_rho()) {
        (false, false) => "supports of rho and sigma are not nested".into(),
        (false, true) => "rho is not supported within the support of sigma".into(),
        (true, false) => "sigma is not supported within the support of rho".into(),
        (true, true) => "support condition".into(),
    }
}

/// `D_f(rho||sigma)` by the two-sided hockey-stick integral.
pub fn f_divergence(f: &dyn Generator, pair: &StatePair, spec: &QuadratureSpec) -> Result<DivergenceValue> {
    let (r, s) = (pair.rho.matrix(), pair.sigma.matrix());
    let w1 = |g: f64| f.second(g);
    let w2 = |g: f64| f.second(1.0 / g) / (g * g * g);
    let t1 = hockey_integral(r, s, pair.dmax_rho_sigma, &pair.kinks_rho_sigma, &w1, spec)?;
    let t2 = hockey_integral(s, r, pair.dmax_sigma_rho, &pair.kinks_sigma_rho, &w2, spec)?;
    let total = t1.add(t2);
    let mut out = DivergenceValue::from_quad(total, Method::Integral);
    if !total.value.is_finite() {
        out.value = f64::INFINITY;
        out.note = Some(support_note(pair));
    }
    Ok(out)
}

/// `D_f(rho||sigma) = int f''(g) Ẽ_g(rho||sigma) dg` over
/// `[exp(-D_max(sigma||rho)), exp(D_max(rho||sigma))]`.
pub fn f_divergence_alt(f: &dyn Generator, pair: &StatePair, spec: &QuadratureSpec) -> Result<DivergenceValue> {
    let (r, s) = (pair.rho.matrix(), pair.sigma.matrix());
    let upper = |g: f64| weighted(positive_part_trace(&shifted(r, s, g)), || f.second(g));
    let lower = |g: f64| weighted(negative_part_trace(&shifted(r, s, g)), || f.second(g));

    // Kinks of Ẽ below 1 are the reciprocals of the (sigma, rho) kinks.
    let low_kinks: Vec<f64> = pair
        .kinks_sigma_rho
        .iter()
        .filter(|&&k| k > 0.0)
        .map(|&k| 1.0 / k)
        .collect();
    let lo_part = if pair.dmax_sigma_rho.is_finite() {
        let bottom = (-pair.dmax_sigma_rho).exp();
        integrate(lower, &breakpoints(bottom, 1.0, &low_kinks), spec)?
    } else {
        let first = low_kinks.iter().copied().fold(1.0f64, f64::min);
        let split = 0.5 * first;
        let body = integrate(lower, &breakpoints(split, 1.0, &low_kinks), spec)?;
        body.add(integrate_to_zero(lower, split, spec)?)
    };

    let hi_part = if pair.dmax_rho_sigma.is_finite() {
        let top = pair.dmax_rho_sigma.exp();
        if top > 1.0 {
            integrate(upper, &breakpoints(1.0, top, &pair.kinks_rho_sigma), spec)?
        } else {
            QuadResult::zero()
        }
    } else {
        let last = pair.kinks_rho_sigma.iter().copied().fold(1.0f64, f64::max);
        let split = 2.0 * last;
        let body = integrate(upper, &breakpoints(1.0, split, &pair.kinks_rho_sigma), spec)?;
        body.add(integrate_to_infinity(upper, split, spec)?)
    };
    let total = lo_part.add(hi_part);
    let mut out = DivergenceValue::from_quad(total, Method::IntegralAlt);
    if !total.value.is_finite() {
        out.value = f64::INFINITY;
        out.note = Some(support_note(pair));
    }
    Ok(out)
}

/// `sum_i q_i f(p_i / q_i)` with `0 f(0/0) = 0` and `0 f(p/0) = p f'(inf)`.
pub fn classical_f_divergence(f: &dyn Generator, p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut total = 0.0;
    for (&pi, &qi) in p.as_slice().iter().zip(q.as_slice()) {
        if qi > 0.0 {
            total += qi * f.value(pi / qi)?;
        } else if pi > 0.0 {
            let slope = f.slope_at_infinity().ok_or_else(|| {
                Error::Capability(format!("slope at infinity of {}", f.name()))
            })?;
            total += pi * slope;
        }
    }
    Ok(total)
}

/// `H_alpha(rho||sigma)`; the integral for `alpha != 1` and Umegaki's relative
/// entropy at `alpha = 1`.
pub fn hellinger(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<DivergenceValue> {
    if alpha == 1.0 {
        return Ok(closed::umegaki(pair));
    }
    f_divergence(&Hellinger::new(alpha)?, pair, spec)
}

/// `D_alpha = log(1 + (alpha - 1) H_alpha) / (alpha - 1)`.
pub fn renyi(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<DivergenceValue> {
    let h = hellinger(alpha, pair, spec)?;
    if alpha == 1.0 {
        return Ok(h);
    }
    Ok(renyi_from_hellinger(alpha, h))
}

pub fn renyi_from_hellinger(alpha: f64, h: DivergenceValue) -> DivergenceValue {
    if alpha == 1.0 {
        return h;
    }
    let q = 1.0 + (alpha - 1.0) * h.value;
    let value = if h.value.is_infinite() {
        f64::INFINITY
    } else {
        q.ln() / (alpha - 1.0)
    };
    DivergenceValue {
        value,
        est_error: h.est_error / q.abs().max(f64::MIN_POSITIVE),
        method: h.method,
        note: h.note,
    }
}
