//! Curvature ratios over the likelihood-ratio range of a state pair.

use crate::error::{Error, Result};
use crate::generator::{factorial, falling, Generator};
use crate::operator::StatePair;
use crate::quad::golden_section_min;
use serde::Serialize;

const GRID: usize = 2049;
const NEAR_ONE: f64 = 1e-3;

/// `kappa_alpha(t) = (1 - alpha) r(t) / (1 - t^alpha + alpha (t - 1))` with
/// `r(t) = t log t + 1 - t`; `kappa_alpha(1) = 1/alpha`.
pub fn kappa_alpha(alpha: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return if alpha > 1.0 { 0.0 } else { f64::INFINITY };
    }
    let u = t - 1.0;
    if u.abs() < 1e-2 {
        let mut num = 0.0;
        let mut den = 0.0;
        for n in 2..24 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let p = u.powi(n as i32 - 2);
            num += sign * p / (n as f64 * (n as f64 - 1.0));
            den -= falling(alpha, n) / factorial(n) * p;
        }
        return (1.0 - alpha) * num / den;
    }
    let r = t * t.ln() + 1.0 - t;
    (1.0 - alpha) * r / (1.0 - t.powf(alpha) + alpha * u)
}

fn interval(pair: &StatePair) -> Result<(f64, f64)> {
    let lo = pair.beta2();
    let hi = pair.dmax_rho_sigma.exp();
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(Error::InvalidParameter(
            "curvature range is unbounded: the states need equal supports".into(),
        ));
    }
    Ok((lo, hi))
}

fn log_grid(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut xs: Vec<f64> = (0..GRID)
        .map(|i| (a + (b - a) * i as f64 / (GRID - 1) as f64).exp())
        .collect();
    xs[0] = lo;
    xs[GRID - 1] = hi;
    if lo < 1.0 && hi > 1.0 {
        xs.push(1.0);
        xs.sort_by(f64::total_cmp);
    }
    xs
}

/// Maximize `h` on the grid, then refine in log coordinates around the best point.
fn maximize(h: &dyn Fn(f64) -> f64, xs: &[f64]) -> (f64, f64) {
    let ys: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    let best = (0..xs.len()).max_by(|&i, &j| ys[i].total_cmp(&ys[j])).expect("grid");
    let lo = xs[best.saturating_sub(1)].ln();
    let hi = xs[(best + 1).min(xs.len() - 1)].ln();
    let (z, neg) = golden_section_min(|z| -h(z.exp()), lo, hi, 1e-12);
    if -neg > ys[best] {
        (z.exp(), -neg)
    } else {
        (xs[best], ys[best])
    }
}

/// Extremes of `f''` over `[beta_2, 1/beta_1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaProfile {
    pub lo: f64,
    pub hi: f64,
    pub kappa_up: f64,
    pub arg_up: f64,
    pub kappa_down: f64,
    pub arg_down: f64,
}

pub fn kappa_extrema(f: &dyn Generator, pair: &StatePair) -> Result<KappaProfile> {
    let (lo, hi) = interval(pair)?;
    let xs = log_grid(lo, hi);
    let (arg_up, kappa_up) = maximize(&|x| f.second(x), &xs);
    let (arg_down, neg) = maximize(&|x| -f.second(x), &xs);
    Ok(KappaProfile {
        lo,
        hi,
        kappa_up,
        arg_up,
        kappa_down: -neg,
        arg_down,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaBar {
    /// `sup f/g` over the punctured range, with `f''(1)/g''(1)` filled in at 1.
    pub value: f64,
    pub arg: f64,
    pub fill: f64,
}

fn taylor_at_one(f: &dyn Generator, u: f64) -> Result<f64> {
    let mut s = 0.0;
    for n in 2..=8 {
        s += f.derivative(n, 1.0)? * u.powi(n as i32 - 2) / factorial(n);
    }
    Ok(s)
}

/// `sup_x f(x)/g(x)` over `[beta_2, 1/beta_1]`; both generators must satisfy
/// `f(1) = f'(1) = 0` (see [`crate::generator::Normalized`]) and `g > 0` away from 1.
pub fn kappa_bar(f: &dyn Generator, g: &dyn Generator, pair: &StatePair) -> Result<KappaBar> {
    for h in [f, g] {
        if h.value(1.0)?.abs() > 1e-12 || h.derivative(1, 1.0)?.abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "{} must vanish to first order at 1",
                h.name()
            )));
        }
    }
    let (lo, hi) = interval(pair)?;
    let fill = f.second(1.0) / g.second(1.0);
    let series = f.max_order() >= 8 && g.max_order() >= 8;
    let ratio = |x: f64| -> f64 {
        let u = x - 1.0;
        if u.abs() < NEAR_ONE {
            if !series {
                return fill;
            }
            return match (taylor_at_one(f, u), taylor_at_one(g, u)) {
                (Ok(a), Ok(b)) => a / b,
                _ => fill,
            };
        }
        match (f.value(x), g.value(x)) {
            (Ok(a), Ok(b)) if b > 0.0 => a / b,
            _ => f64::NAN,
        }
    };
    let xs = log_grid(lo, hi);
    if let Some(x) = xs.iter().find(|&&x| ratio(x).is_nan()) {
        return Err(Error::InvalidParameter(format!(
            "{} is not positive at {x}",
            g.name()
        )));
    }
    let (arg, value) = maximize(&ratio, &xs);
    Ok(KappaBar { value, arg, fill })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{Hellinger, Normalized, RelativeEntropy};
    use crate::operator::ProbVector;
    use std::sync::Arc;

    #[test]
    fn kappa_alpha_limits_and_continuity() {
        for &a in &[0.25, 0.5, 2.0, 3.0] {
            assert!((kappa_alpha(a, 1.0) - 1.0 / a).abs() < 1e-14);
            let left = kappa_alpha(a, 1.0 - 0.0099);
            let right = kappa_alpha(a, 1.0 - 0.0101);
            assert!((left - right).abs() < 1e-3);
            assert!((kappa_alpha(a, 1e-300) - 1.0).abs() < 1e-3 || a < 1.0);
        }
        // alpha = 2: r(t)/(t-1)^2
        let t = 3.0;
        let r = t * f64::ln(t) + 1.0 - t;
        assert!((kappa_alpha(2.0, t) - r / 4.0).abs() < 1e-15);
    }

    #[test]
    fn kappa_bar_matches_closed_form() {
        let p = ProbVector::new(vec![0.7, 0.3]).unwrap();
        let q = ProbVector::new(vec![0.4, 0.6]).unwrap();
        let pair = StatePair::classical(&p, &q).unwrap();
        let f = Normalized::new(Arc::new(RelativeEntropy)).unwrap();
        for &a in &[0.5, 2.0] {
            let g = Normalized::new(Arc::new(Hellinger::new(a).unwrap())).unwrap();
            let kb = kappa_bar(&f, &g, &pair).unwrap();
            assert!((kb.fill - 1.0 / a).abs() < 1e-14);
            let expected = kappa_alpha(a, pair.beta2()).max(kappa_alpha(a, 1.0 / pair.beta1()));
            assert!((kb.value - expected).abs() < 1e-10, "alpha {a}: {} vs {expected}", kb.value);
        }
    }

    #[test]
    fn kappa_extrema_of_relative_entropy() {
        let p = ProbVector::new(vec![0.7, 0.3]).unwrap();
        let q = ProbVector::new(vec![0.4, 0.6]).unwrap();
        let pair = StatePair::classical(&p, &q).unwrap();
        let k = kappa_extrema(&RelativeEntropy, &pair).unwrap();
        assert!((k.lo - 0.5).abs() < 1e-14 && (k.hi - 1.75).abs() < 1e-14);
        assert!((k.kappa_up - 2.0).abs() < 1e-12);
        assert!((k.kappa_down - 1.0 / 1.75).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_generator_rejected() {
        let p = ProbVector::new(vec![0.7, 0.3]).unwrap();
        let q = ProbVector::new(vec![0.4, 0.6]).unwrap();
        let pair = StatePair::classical(&p, &q).unwrap();
        let g = Hellinger::new(2.0).unwrap();
        assert!(kappa_bar(&RelativeEntropy, &g, &pair).is_err());
    }
}
