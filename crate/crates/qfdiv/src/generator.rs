//! Generator functions `f` of f-divergences and their derivatives.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Smallest argument at which derivatives of order two or more are evaluated.
pub const MIN_ARGUMENT: f64 = 1e-300;

pub trait Generator: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// `f^(order)(x)`; order 0 is the value.
    fn derivative(&self, order: usize, x: f64) -> Result<f64>;

    /// Highest derivative order implemented analytically.
    fn max_order(&self) -> usize;

    /// Lowest available order; generators known only through `f''` return 2.
    fn min_order(&self) -> usize {
        0
    }

    fn is_convex(&self) -> bool;

    /// `f''(x)` for `x > 0`; the integration hot path.
    fn second(&self, x: f64) -> f64;

    fn value(&self, x: f64) -> Result<f64> {
        self.derivative(0, x)
    }

    /// `lim f(x)/x` as `x -> inf`, when known.
    fn slope_at_infinity(&self) -> Option<f64> {
        None
    }
}

pub type DynGenerator = Arc<dyn Generator>;

fn check_order(g: &dyn Generator, order: usize, x: f64) -> Result<()> {
    if order > g.max_order() || order < g.min_order() {
        return Err(Error::Capability(format!(
            "derivative of order {order} of {}",
            g.name()
        )));
    }
    if x.is_nan() || x < 0.0 || (order >= 2 && x < MIN_ARGUMENT) {
        return Err(Error::InvalidParameter(format!(
            "{} evaluated at x = {x:e} (order {order})",
            g.name()
        )));
    }
    Ok(())
}

/// `x (x-1) ... (x-n+1)`.
pub fn falling(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x - i as f64))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    falling(n as f64, k) / factorial(k)
}

/// `f(x) = x log x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelativeEntropy;

impl Generator for RelativeEntropy {
    fn slope_at_infinity(&self) -> Option<f64> {
        Some(f64::INFINITY)
    }

    fn name(&self) -> String {
        "relative-entropy".into()
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        check_order(self, order, x)?;
        Ok(match order {
            0 if x == 0.0 => 0.0,
            0 => x * x.ln(),
            1 => x.ln() + 1.0,
            n => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(n - 2) * x.powi(1 - n as i32)
            }
        })
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn second(&self, x: f64) -> f64 {
        1.0 / x
    }
}

/// `f_alpha(x) = (x^alpha - 1) / (alpha - 1)`, `alpha > 0`, `alpha != 1`.
#[derive(Debug, Clone, Copy)]
pub struct Hellinger {
    alpha: f64,
}

impl Hellinger {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() || alpha == 1.0 {
            return Err(Error::InvalidParameter(format!(
                "Hellinger order must be positive and different from 1, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Generator for Hellinger {
    fn slope_at_infinity(&self) -> Option<f64> {
        Some(if self.alpha > 1.0 { f64::INFINITY } else { 0.0 })
    }

    fn name(&self) -> String {
        format!("hellinger:{}", self.alpha)
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        check_order(self, order, x)?;
        let a = self.alpha;
        Ok(match order {
            0 => (x.powf(a) - 1.0) / (a - 1.0),
            n => falling(a, n) * x.powf(a - n as f64) / (a - 1.0),
        })
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn second(&self, x: f64) -> f64 {
        self.alpha * x.powf(self.alpha - 2.0)
    }
}

/// `g_lambda(x) = lambda (1 - lambda) (x - 1)^2 / (lambda x + 1 - lambda)`.
#[derive(Debug, Clone, Copy)]
pub struct LeCam {
    lambda: f64,
}

impl LeCam {
    pub fn new(lambda: f64) -> Result<Self> {
        check_unit(lambda, "Le Cam weight")?;
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

fn check_unit(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("{what} {x} outside [0,1]")));
    }
    Ok(())
}

/// Shared derivatives of order `n >= 1` of `(1-l)/l * (m - 2 + 1/m)` and
/// `(1-l)/l * (1/m - 1)` with `m = l x + 1 - l`.
fn lecam_tail(lambda: f64, n: usize, x: f64) -> f64 {
    let m = lambda * x + 1.0 - lambda;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    (1.0 - lambda) * sign * factorial(n) * lambda.powi(n as i32 - 1) / m.powi(n as i32 + 1)
}

impl Generator for LeCam {
    fn slope_at_infinity(&self) -> Option<f64> {
        Some(if self.lambda > 0.0 { 1.0 - self.lambda } else { 0.0 })
    }

    fn name(&self) -> String {
        format!("lecam:{}", self.lambda)
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        check_order(self, order, x)?;
        let l = self.lambda;
        let m = l * x + 1.0 - l;
        Ok(match order {
            0 => l * (1.0 - l) * (x - 1.0).powi(2) / m,
            1 => (1.0 - l) * (1.0 - 1.0 / (m * m)),
            n => lecam_tail(l, n, x),
        })
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn second(&self, x: f64) -> f64 {
        let l = self.lambda;
        let m = l * x + 1.0 - l;
        2.0 * l * (1.0 - l) / (m * m * m)
    }
}

/// `(1 - lambda)(1 - x) / (lambda x + 1 - lambda)`, which is `-x/(lambda x + 1 - lambda)`
/// shifted to vanish at 1; it differs from the Le Cam generator by an affine term.
#[derive(Debug, Clone, Copy)]
pub struct LeCamEquivalent {
    lambda: f64,
}

impl LeCamEquivalent {
    pub fn new(lambda: f64) -> Result<Self> {
        check_unit(lambda, "Le Cam weight")?;
        Ok(Self { lambda })
    }
}

impl Generator for LeCamEquivalent {
    fn slope_at_infinity(&self) -> Option<f64> {
        Some(if self.lambda > 0.0 { 0.0 } else { -1.0 })
    }

    fn name(&self) -> String {
        format!("lecam-equivalent:{}", self.lambda)
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        check_order(self, order, x)?;
        let l = self.lambda;
        Ok(match order {
            0 => (1.0 - l) * (1.0 - x) / (l * x + 1.0 - l),
            n => lecam_tail(l, n, x),
        })
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn second(&self, x: f64) -> f64 {
        lecam_tail(self.lambda, 2, x)
    }
}

/// `(x - 1)^k`; convex on `(0, inf)` only for even `k`.
#[derive(Debug, Clone, Copy)]
pub struct ChiPower {
    k: usize,
}

impl ChiPower {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("chi power needs k >= 2, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Generator for ChiPower {
    fn slope_at_infinity(&self) -> Option<f64> {
        Some(f64::INFINITY)
    }

    fn name(&self) -> String {
        format!("chipow:{}", self.k)
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        check_order(self, order, x)?;
        if order > self.k {
            return Ok(0.0);
        }
        Ok(falling(self.k as f64, order) * (x - 1.0).powi((self.k - order) as i32))
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn is_convex(&self) -> bool {
        self.k.is_multiple_of(2)
    }

    fn second(&self, x: f64) -> f64 {
        let k = self.k as f64;
        k * (k - 1.0) * (x - 1.0).powi(self.k as i32 - 2)
    }
}

/// `f(x) - f'(1)(x - 1)`: same divergence, and `f(1) = f'(1) = 0` when `f(1) = 0`.
#[derive(Debug, Clone)]
pub struct Normalized {
    base: DynGenerator,
    slope: f64,
}

impl Normalized {
    pub fn new(base: DynGenerator) -> Result<Self> {
        let slope = base.derivative(1, 1.0)?;
        Ok(Self { base, slope })
    }
}

impl Generator for Normalized {
    fn slope_at_infinity(&self) -> Option<f64> {
        self.base.slope_at_infinity().map(|s| s - self.slope)
    }

    fn name(&self) -> String {
        format!("normalized({})", self.base.name())
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        let d = self.base.derivative(order, x)?;
        Ok(match order {
            0 => d - self.slope * (x - 1.0),
            1 => d - self.slope,
            _ => d,
        })
    }

    fn max_order(&self) -> usize {
        self.base.max_order()
    }

    fn is_convex(&self) -> bool {
        self.base.is_convex()
    }

    fn second(&self, x: f64) -> f64 {
        self.base.second(x)
    }
}

/// `F_{k,lambda}(gamma) = (gamma - 1)^k f^(k)(lambda gamma + 1 - lambda)`.
#[derive(Debug, Clone)]
pub struct Shifted {
    base: DynGenerator,
    k: usize,
    lambda: f64,
}

impl Shifted {
    pub fn new(base: DynGenerator, k: usize, lambda: f64) -> Result<Self> {
        check_unit(lambda, "shift weight")?;
        if base.min_order() > 0 || base.max_order() < k.saturating_add(2) {
            return Err(Error::Capability(format!(
                "{} lacks derivatives up to order {}",
                base.name(),
                k + 2
            )));
        }
        Ok(Self { base, k, lambda })
    }
}

impl Generator for Shifted {
    fn name(&self) -> String {
        format!("shifted({}, k={}, lambda={})", self.base.name(), self.k, self.lambda)
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        check_order(self, order, x)?;
        let m = self.lambda * x + 1.0 - self.lambda;
        let mut total = 0.0;
        for i in 0..=order.min(self.k) {
            let poly = falling(self.k as f64, i) * (x - 1.0).powi((self.k - i) as i32);
            let inner = self.lambda.powi((order - i) as i32)
                * self.base.derivative(self.k + order - i, m)?;
            total += binomial(order, i) * poly * inner;
        }
        Ok(total)
    }

    fn max_order(&self) -> usize {
        self.base.max_order().saturating_sub(self.k)
    }

    fn is_convex(&self) -> bool {
        false
    }

    fn second(&self, x: f64) -> f64 {
        self.derivative(2, x).unwrap_or(f64::NAN)
    }
}

/// Which mixture family a [`MixtureAverage`] integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureSide {
    /// `int_0^lambda D_f(rho || (1-s) rho + s sigma) ds / s`.
    Reference,
    /// `int_0^lambda D_f(s rho + (1-s) sigma || sigma) ds / s`.
    State,
}

/// Generator `F` whose divergence averages `D_f` along a mixture path.
///
/// Only `F''` is known in closed form, which is all the integral engine uses.
#[derive(Debug, Clone)]
pub struct MixtureAverage {
    base: DynGenerator,
    lambda: f64,
    side: MixtureSide,
    f_at_one: f64,
    series: Vec<f64>,
}

impl MixtureAverage {
    pub fn new(base: DynGenerator, lambda: f64, side: MixtureSide) -> Result<Self> {
        check_unit(lambda, "mixture weight")?;
        if base.min_order() > 0 {
            return Err(Error::Capability(format!("{} has no value", base.name())));
        }
        let f_at_one = base.value(1.0)?;
        // (t-1) f'(t) - f(t) + f(1) = sum_{n>=2} f^(n)(1) (n-1)/n! (t-1)^n
        let series = if base.max_order() >= 10 {
            (2..=10)
                .map(|n| base.derivative(n, 1.0).map(|d| d * (n as f64 - 1.0) / factorial(n)))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            base,
            lambda,
            side,
            f_at_one,
            series,
        })
    }
}

impl Generator for MixtureAverage {
    fn name(&self) -> String {
        let side = match self.side {
            MixtureSide::Reference => "reference",
            MixtureSide::State => "state",
        };
        format!("mixture-average({}, {side}, lambda={})", self.base.name(), self.lambda)
    }

    fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        check_order(self, order, x)?;
        Ok(self.second(x))
    }

    fn max_order(&self) -> usize {
        2
    }

    fn min_order(&self) -> usize {
        2
    }

    fn is_convex(&self) -> bool {
        self.base.is_convex()
    }

    fn second(&self, g: f64) -> f64 {
        let l = self.lambda;
        // t - 1 = q (g - 1)
        let (t, q, outer) = match self.side {
            MixtureSide::Reference => {
                let den = l + (1.0 - l) * g;
                (g / den, l / den, 1.0 / g)
            }
            MixtureSide::State => (l * g + 1.0 - l, l, 1.0),
        };
        let u = t - 1.0;
        if u.abs() < 1e-3 && !self.series.is_empty() {
            let mut s = 0.0;
            for (j, coef) in self.series.iter().enumerate() {
                s += coef * u.powi(j as i32);
            }
            return outer * q * q * s;
        }
        let f = self.base.derivative(0, t).unwrap_or(f64::NAN);
        let fp = self.base.derivative(1, t).unwrap_or(f64::NAN);
        let num = u * fp - f + self.f_at_one;
        outer * num / ((g - 1.0) * (g - 1.0))
    }
}

/// Parse `relative-entropy`, `hellinger:A`, `lecam:L`, `lecam-equivalent:L` or `chipow:K`.
pub fn parse_generator(spec: &str) -> Result<DynGenerator> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec.trim(), None),
    };
    let num = |what: &str| -> Result<f64> {
        arg.ok_or_else(|| Error::Parse(format!("{what} needs a parameter, e.g. {what}:0.5")))?
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{spec}: {e}")))
    };
    Ok(match name {
        "relative-entropy" | "kl" | "umegaki" => Arc::new(RelativeEntropy),
        "hellinger" => Arc::new(Hellinger::new(num("hellinger")?)?),
        "lecam" => Arc::new(LeCam::new(num("lecam")?)?),
        "lecam-equivalent" => Arc::new(LeCamEquivalent::new(num("lecam-equivalent")?)?),
        "chipow" => {
            let k = num("chipow")?;
            if k.fract() != 0.0 || k < 2.0 {
                return Err(Error::Parse(format!("chipow needs an integer k >= 2, got {k}")));
            }
            Arc::new(ChiPower::new(k as usize)?)
        }
        other => return Err(Error::Parse(format!("unknown generator '{other}'"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_diff(g: &dyn Generator, order: usize, x: f64) -> f64 {
        let h = 1e-4;
        (g.derivative(order, x + h).unwrap() - g.derivative(order, x - h).unwrap()) / (2.0 * h)
    }

    fn catalog() -> Vec<DynGenerator> {
        vec![
            Arc::new(RelativeEntropy),
            Arc::new(Hellinger::new(0.3).unwrap()),
            Arc::new(Hellinger::new(2.5).unwrap()),
            Arc::new(LeCam::new(0.3).unwrap()),
            Arc::new(LeCamEquivalent::new(0.6).unwrap()),
            Arc::new(ChiPower::new(4).unwrap()),
        ]
    }

    #[test]
    fn derivatives_are_consistent_with_finite_differences() {
        for g in catalog() {
            for &x in &[0.4, 1.0, 2.7] {
                for order in 0..5 {
                    let exact = g.derivative(order + 1, x).unwrap();
                    let fd = central_diff(g.as_ref(), order, x);
                    assert!(
                        (exact - fd).abs() < 1e-6 * (1.0 + exact.abs()),
                        "{} order {} at {x}: {exact} vs {fd}",
                        g.name(),
                        order + 1
                    );
                }
                assert!((g.second(x) - g.derivative(2, x).unwrap()).abs() < 1e-12 * (1.0 + g.second(x).abs()));
            }
            assert!(g.value(1.0).unwrap().abs() < 1e-15, "{} f(1)", g.name());
        }
    }

    #[test]
    fn relative_entropy_derivatives_at_one() {
        let g = RelativeEntropy;
        for k in 2..7 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(g.derivative(k, 1.0).unwrap(), sign * factorial(k - 2));
        }
    }

    #[test]
    fn lecam_forms_differ_by_affine_term() {
        let l = 0.35;
        let a = LeCam::new(l).unwrap();
        let b = LeCamEquivalent::new(l).unwrap();
        for &x in &[0.1, 0.9, 3.0] {
            let diff = a.value(x).unwrap() - b.value(x).unwrap();
            assert!((diff - (1.0 - l) * (x - 1.0)).abs() < 1e-14);
            let raw = -x / (l * x + 1.0 - l);
            assert!((b.value(x).unwrap() - (raw + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_and_capability_errors() {
        let g = Hellinger::new(0.5).unwrap();
        assert!(g.derivative(2, 1e-301).is_err());
        assert!(g.derivative(0, -1.0).is_err());
        assert!(Hellinger::new(1.0).is_err());
        let m = MixtureAverage::new(Arc::new(RelativeEntropy), 0.5, MixtureSide::State).unwrap();
        assert!(matches!(m.derivative(0, 2.0), Err(Error::Capability(_))));
    }

    #[test]
    fn shifted_matches_direct_formula() {
        let base: DynGenerator = Arc::new(RelativeEntropy);
        let s = Shifted::new(base.clone(), 3, 0.4).unwrap();
        let direct = |g: f64| (g - 1.0).powi(3) * base.derivative(3, 0.4 * g + 0.6).unwrap();
        for &g in &[0.5, 1.7] {
            assert!((s.value(g).unwrap() - direct(g)).abs() < 1e-14);
            let h = 1e-3;
            let fd = (direct(g + h) - 2.0 * direct(g) + direct(g - h)) / (h * h);
            assert!((s.second(g) - fd).abs() < 1e-5);
        }
    }

    #[test]
    fn mixture_average_series_matches_direct_branch() {
        for side in [MixtureSide::Reference, MixtureSide::State] {
            let m = MixtureAverage::new(Arc::new(RelativeEntropy), 0.7, side).unwrap();
            let a = m.second(1.0 + 1.2e-3);
            let b = m.second(1.0 + 1.6e-3);
            let mid = m.second(1.0 + 1.4e-3);
            assert!((mid - 0.5 * (a + b)).abs() < 1e-6);
            assert!(m.second(1.0).is_finite());
        }
    }

    #[test]
    fn parses_catalog_names() {
        assert_eq!(parse_generator("hellinger:2").unwrap().name(), "hellinger:2");
        assert_eq!(parse_generator("kl").unwrap().name(), "relative-entropy");
        assert!(parse_generator("chipow:2.5").is_err());
        assert!(parse_generator("nope").is_err());
    }
}
