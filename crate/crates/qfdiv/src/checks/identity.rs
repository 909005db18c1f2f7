use super::{integrate_fallible, pair_json, CheckDef, Dims, Part, Trial, TrialCtx};
use crate::closed::{chi2_logmean, chi_power_trace, hellinger_trace, lecam, lecam_forms, umegaki};
use crate::error::Result;
use crate::generator::{
    binomial, ChiPower, DynGenerator, Hellinger, LeCam, LeCamEquivalent, MixtureAverage,
    MixtureSide, RelativeEntropy, Shifted,
};
use crate::integral::{f_divergence, hellinger};
use crate::linalg::c;
use crate::operator::{DensityState, StatePair};
use crate::quad::QuadratureSpec;
use serde_json::json;
use std::sync::Arc;

/// Weight of the maximally mixed state in pairs used for finite differences.
pub(crate) const FD_CONDITIONING: f64 = 0.25;
pub(crate) const FD_STEP: f64 = 1e-3;

/// Five-point central stencil for derivatives of order 1 to 3.
pub(crate) fn central_difference<F>(order: usize, x0: f64, h: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let w: [f64; 5] = match order {
        1 => [1.0, -8.0, 0.0, 8.0, -1.0],
        2 => [-1.0, 16.0, -30.0, 16.0, -1.0],
        3 => [-1.0, 2.0, 0.0, -2.0, 1.0],
        _ => {
            return Err(crate::error::Error::InvalidParameter(format!(
                "no stencil for order {order}"
            )))
        }
    };
    let denom = match order {
        1 => 12.0 * h,
        2 => 12.0 * h * h,
        _ => 2.0 * h * h * h,
    };
    let mut s = 0.0;
    for (i, wi) in w.iter().enumerate() {
        if *wi != 0.0 {
            s += wi * f(x0 + (i as f64 - 2.0) * h)?;
        }
    }
    Ok(s / denom)
}

/// `(lambda rho + (1 - lambda) sigma, sigma)`, allowing small negative `lambda`.
pub(crate) fn along(pair: &StatePair, lambda: f64) -> Result<StatePair> {
    let (r, s) = (pair.rho.matrix(), pair.sigma.matrix());
    let m = s + (r - s) * c(lambda);
    StatePair::new(DensityState::new(m)?, pair.sigma.clone())
}

/// A generator paired with an exact route to its divergence.
struct Exact {
    f: DynGenerator,
    value: fn(&StatePair) -> Result<f64>,
}

fn exact_family() -> Result<Vec<Exact>> {
    Ok(vec![
        Exact {
            f: Arc::new(RelativeEntropy),
            value: |p| Ok(umegaki(p).value),
        },
        Exact {
            f: Arc::new(Hellinger::new(3.0)?),
            value: |p| Ok(hellinger_trace(3.0, p, &QuadratureSpec::default())?.value),
        },
        Exact {
            f: Arc::new(LeCam::new(0.3)?),
            value: |p| lecam(0.3, p),
        },
    ])
}

pub(crate) static DERIVATIVE_FORMULAS: CheckDef = CheckDef {
    name: "derivative_formulas",
    about: "derivatives of D_f along the mixture path are f-divergences of shifted generators",
    parts: &[
        Part::identity("second_at_zero", 1e-4),
        Part::identity("kth_derivative", 1e-4),
        Part::identity("chi_k", 1e-6),
        Part::identity("special_cases", 1e-6),
        Part::identity("first_derivative", 1e-4),
    ],
    dims: Dims::Ensemble,
    run: derivative_formulas,
};

fn derivative_formulas(ctx: &TrialCtx) -> Result<Trial> {
    let wide = ctx.pair_with(FD_CONDITIONING)?;
    let pair = ctx.pair()?;
    let mut t = Trial::new(json!({ "finite_difference": pair_json(&wide), "ensemble": pair_json(&pair) }));
    let chi2 = chi2_logmean(&wide).value;

    for e in exact_family()? {
        let h = |l: f64| (e.value)(&along(&wide, l)?);
        let d2 = central_difference(2, 0.0, FD_STEP, h)?;
        t.eq(0, e.f.name(), d2, e.f.second(1.0) * chi2, 0.0);
        for k in 1..=3 {
            for l in [0.0, 0.3] {
                let fd = central_difference(k, l, FD_STEP, h)?;
                let shifted = Shifted::new(e.f.clone(), k, l)?;
                let v = f_divergence(&shifted, &wide, &ctx.spec)?;
                t.eq(1, format!("{} k {k} lambda {l}", e.f.name()), fd, v.value, v.est_error);
            }
        }
    }

    let mut hs = [0.0; 6];
    let mut hs_err = [0.0; 6];
    for a in 2..=5 {
        let v = hellinger(a as f64, &pair, &ctx.spec)?;
        hs[a] = v.value;
        hs_err[a] = v.est_error;
    }
    for k in 2..=4usize {
        let mut combo = 0.0;
        let mut err = 0.0;
        for a in 2..=k {
            let sign = if (k - a) % 2 == 0 { 1.0 } else { -1.0 };
            let w = binomial(k, a) * sign * (a as f64 - 1.0);
            combo += w * hs[a];
            err += w.abs() * hs_err[a];
        }
        let trace = chi_power_trace(k, &pair)?;
        t.eq(2, format!("k {k} trace vs hellinger"), trace, combo, err);
        let integral = f_divergence(&ChiPower::new(k)?, &pair, &ctx.spec)?;
        t.eq(2, format!("k {k} trace vs integral"), trace, integral.value, integral.est_error);
    }

    let mut exact = [0.0; 6];
    for (a, slot) in exact.iter_mut().enumerate().skip(2) {
        *slot = hellinger_trace(a as f64, &pair, &ctx.spec)?.value;
    }
    let (h2, h3, h4, h5) = (exact[2], exact[3], exact[4], exact[5]);
    let combos = [
        (3, 2.0 * h3 - 3.0 * h2),
        (4, 3.0 * h4 - 8.0 * h3 + 6.0 * h2),
        (5, 4.0 * h5 - 15.0 * h4 + 20.0 * h3 - 10.0 * h2),
    ];
    let kl: DynGenerator = Arc::new(RelativeEntropy);
    for (k, combo) in combos {
        let v = f_divergence(&Shifted::new(kl.clone(), k, 0.0)?, &pair, &ctx.spec)?;
        t.eq(3, format!("k {k}"), v.value, kl.derivative(k, 1.0)? * combo, v.est_error);
    }

    let l = 0.3;
    let fd = central_difference(1, l, FD_STEP, |x| Ok(umegaki(&along(&wide, x)?).value))?;
    let mixed = along(&wide, l)?;
    let closed = (umegaki(&mixed).value + umegaki(&mixed.swapped()).value) / l;
    t.eq(4, "lambda 0.3", fd, closed, 0.0);
    Ok(t)
}

pub(crate) static LECAM_FORMS: CheckDef = CheckDef {
    name: "lecam_forms",
    about: "Le Cam divergence through chi^2 against the mixture and through the curvature of D",
    parts: &[
        Part::identity("forms", 1e-9),
        Part::identity("second_derivative", 1e-4),
        Part::identity("integral", 1e-6),
    ],
    dims: Dims::Ensemble,
    run: lecam_check,
};

fn lecam_check(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let wide = ctx.pair_with(FD_CONDITIONING)?;
    let mut t = Trial::new(json!({ "ensemble": pair_json(&pair), "finite_difference": pair_json(&wide) }));
    for l in [0.1, 0.3, 0.5, 0.8] {
        let f = lecam_forms(l, &pair)?;
        t.eq(0, format!("rho form {l}"), f.via_rho, f.direct, 0.0);
        t.eq(0, format!("sigma form {l}"), f.via_sigma, f.direct, 0.0);
        t.eq(0, format!("weighted sum {l}"), f.weighted_sum, f.direct, 0.0);

        let d2 = central_difference(2, l, FD_STEP, |x| Ok(umegaki(&along(&wide, x)?).value))?;
        t.eq(1, format!("lambda {l}"), l * (1.0 - l) * d2, lecam(l, &wide)?, 0.0);

        let v = f_divergence(&LeCam::new(l)?, &pair, &ctx.spec)?;
        t.eq(2, format!("generator {l}"), v.value, f.direct, v.est_error);
        let v = f_divergence(&LeCamEquivalent::new(l)?, &pair, &ctx.spec)?;
        t.eq(2, format!("equivalent generator {l}"), v.value, f.direct, v.est_error);
    }
    Ok(t)
}

pub(crate) static INTEGRAL_IDENTITIES: CheckDef = CheckDef {
    name: "integral_identities",
    about: "divergences as averages of chi^2, Hellinger and f-divergences along mixture paths",
    parts: &[
        Part::identity("chi2_path", 1e-6),
        Part::identity("sum_hellinger", 1e-6),
        Part::identity("state_path", 1e-6),
        Part::identity("mixture_average", 1e-6),
        Part::identity("chi2_representation", 1e-6),
    ],
    dims: Dims::Ensemble,
    run: integral_identities,
};

fn outer_spec() -> QuadratureSpec {
    QuadratureSpec::with_tol(1e-12, 1e-10)
}

/// `int_0^lambda g(s) ds / s`.
fn path_average<F>(lambda: f64, mut g: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let q = integrate_fallible(|s| Ok(g(s)? / s), &[0.0, lambda], &outer_spec())?;
    Ok((q.value, q.est_error))
}

fn integral_identities(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let exact = QuadratureSpec::default();
    let h_ref = |k: usize, s: f64| -> Result<f64> {
        let p = pair.rho_against_mixture(s)?;
        Ok(match k {
            1 => umegaki(&p).value,
            2 => chi2_logmean(&p).value,
            _ => hellinger_trace(k as f64, &p, &exact)?.value,
        })
    };
    let h_state = |k: usize, s: f64| -> Result<f64> {
        let p = pair.mixed_toward_sigma(s)?;
        Ok(match k {
            2 => chi2_logmean(&p).value,
            _ => hellinger_trace(k as f64, &p, &exact)?.value,
        })
    };

    for l in [0.5, 1.0] {
        let (rhs, err) = path_average(l, |s| h_ref(2, s))?;
        t.eq(0, format!("lambda {l}"), h_ref(1, l)?, rhs, err);

        for k in [2usize, 3] {
            let lhs: f64 = (1..k).map(|a| h_ref(a, l)).sum::<Result<f64>>()?;
            let (rhs, err) = path_average(l, |s| h_ref(k, s))?;
            let km1 = k as f64 - 1.0;
            t.eq(1, format!("k {k} lambda {l}"), lhs, km1 * rhs, km1 * err);

            let lhs: f64 = (2..=k)
                .map(|a| Ok((a as f64 - 1.0) / a as f64 * h_state(a, l)?))
                .sum::<Result<f64>>()?;
            let (rhs, err) = path_average(l, |s| h_state(k, s))?;
            t.eq(2, format!("k {k} lambda {l}"), lhs, km1 * rhs, km1 * err);
        }

        let bases: [(DynGenerator, fn(&StatePair) -> Result<f64>); 2] = [
            (Arc::new(RelativeEntropy), |p| Ok(umegaki(p).value)),
            (Arc::new(Hellinger::new(3.0)?), |p| {
                Ok(hellinger_trace(3.0, p, &QuadratureSpec::default())?.value)
            }),
        ];
        for (f, direct) in &bases {
            for side in [MixtureSide::Reference, MixtureSide::State] {
                let big = MixtureAverage::new(f.clone(), l, side)?;
                let v = f_divergence(&big, &pair, &ctx.spec)?;
                let (rhs, err) = path_average(l, |s| match side {
                    MixtureSide::Reference => direct(&pair.rho_against_mixture(s)?),
                    MixtureSide::State => direct(&pair.mixed_toward_sigma(s)?),
                })?;
                t.eq(3, format!("{} {side:?} lambda {l}", f.name()), v.value, rhs, v.est_error + err);
            }
        }
    }

    let inner = QuadratureSpec::with_tol(1e-16, 1e-10);
    let gens: [(DynGenerator, f64); 2] = [
        (Arc::new(RelativeEntropy), umegaki(&pair).value),
        (Arc::new(Hellinger::new(3.0)?), hellinger_trace(3.0, &pair, &exact)?.value),
    ];
    for (f, value) in &gens {
        let q = integrate_fallible(
            |s| {
                let g = Shifted::new(f.clone(), 2, s)?;
                Ok((1.0 - s) * f_divergence(&g, &pair, &ctx.spec)?.value)
            },
            &[0.0, 1.0],
            &outer_spec(),
        )?;
        t.eq(4, format!("{} fixed pair", f.name()), q.value, *value, q.est_error);

        let g = Shifted::new(f.clone(), 2, 1.0)?;
        let q = integrate_fallible(
            |s| Ok((1.0 - s) / (s * s) * f_divergence(&g, &pair.mixed_toward_sigma(s)?, &inner)?.value),
            &[0.0, 1.0],
            &outer_spec(),
        )?;
        t.eq(4, format!("{} mixture path", f.name()), q.value, *value, q.est_error);
    }
    Ok(t)
}
