use super::{pair_json, CheckDef, Dims, Part, Trial, TrialCtx};
use crate::closed::{
    chernoff, chi2_logmean, error_probability, jensen_shannon, kappa_alpha, kappa_bar,
    kappa_extrema, petz, sandwiched, trace_distance, umegaki,
};
use crate::error::Result;
use crate::generator::{DynGenerator, Generator, Hellinger, LeCam, Normalized, RelativeEntropy};
use crate::integral::{f_divergence, hellinger, renyi_from_hellinger};
use crate::linalg::real_trace;
use crate::operator::{apply_channel, tensor_power, Channel, StatePair, Subsystem};
use crate::quad::{grid_then_golden, QuadratureSpec};
use std::collections::BTreeMap;
use std::sync::Arc;

const TENTHS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// `H_alpha` by the integral (Umegaki at 1), memoized per trial.
struct HellingerTable<'a> {
    pair: &'a StatePair,
    spec: &'a QuadratureSpec,
    values: BTreeMap<u64, f64>,
}

impl<'a> HellingerTable<'a> {
    fn new(pair: &'a StatePair, spec: &'a QuadratureSpec) -> Self {
        Self {
            pair,
            spec,
            values: BTreeMap::new(),
        }
    }

    fn get(&mut self, alpha: f64) -> Result<f64> {
        if let Some(&v) = self.values.get(&alpha.to_bits()) {
            return Ok(v);
        }
        let v = hellinger(alpha, self.pair, self.spec)?.value;
        self.values.insert(alpha.to_bits(), v);
        Ok(v)
    }

    fn renyi(&mut self, alpha: f64) -> Result<f64> {
        let h = self.get(alpha)?;
        if alpha == 1.0 {
            return Ok(h);
        }
        Ok((1.0 + (alpha - 1.0) * h).ln() / (alpha - 1.0))
    }
}

pub(crate) static PETZ_LOWER: CheckDef = CheckDef {
    name: "petz_lower",
    about: "Petz quantities lower-bound H_alpha and D_alpha for alpha < 1",
    parts: &[Part::inequality("hellinger", 1e-8), Part::inequality("renyi", 1e-8)],
    dims: Dims::Ensemble,
    run: petz_lower,
};

fn petz_lower(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    for a in TENTHS {
        let h = hellinger(a, &pair, &ctx.spec)?;
        let p = petz(a, &pair)?;
        t.le(0, format!("alpha {a}"), p.hellinger, h.value);
        t.le(1, format!("alpha {a}"), p.renyi, renyi_from_hellinger(a, h).value);
    }
    Ok(t)
}

pub(crate) static SANDWICHED_UPPER: CheckDef = CheckDef {
    name: "sandwiched_upper",
    about: "sandwiched quantities upper-bound H_alpha and D_alpha for integer alpha",
    parts: &[
        Part::inequality("integer", 1e-8),
        Part::inequality("non_integer", 1e-8).evidence(),
    ],
    dims: Dims::Ensemble,
    run: sandwiched_upper,
};

fn sandwiched_upper(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    for (part, alphas) in [(0, &[2.0, 3.0, 4.0][..]), (1, &[1.5, 2.5][..])] {
        for &a in alphas {
            let h = hellinger(a, &pair, &ctx.spec)?;
            let s = sandwiched(a, &pair)?;
            t.le(part, format!("H alpha {a}"), h.value, s.hellinger);
            t.le(part, format!("D alpha {a}"), renyi_from_hellinger(a, h).value, s.renyi);
        }
    }
    Ok(t)
}

pub(crate) static AUDENAERT_STRENGTHENING: CheckDef = CheckDef {
    name: "audenaert_strengthening",
    about: "(1-alpha) H_alpha sits between its Petz counterpart and E_1",
    parts: &[Part::inequality("petz_side", 1e-8), Part::inequality("trace_distance", 1e-8)],
    dims: Dims::Ensemble,
    run: audenaert_strengthening,
};

fn audenaert_strengthening(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let e1 = trace_distance(&pair.rho, &pair.sigma);
    for a in TENTHS {
        let h = (1.0 - a) * hellinger(a, &pair, &ctx.spec)?.value;
        let p = (1.0 - a) * petz(a, &pair)?.hellinger;
        t.le(0, format!("alpha {a}"), p, h);
        t.le(1, format!("alpha {a}"), h, e1);
    }
    Ok(t)
}

pub(crate) static CHERNOFF: CheckDef = CheckDef {
    name: "chernoff",
    about: "error probability of n copies against the Chernoff quasi-entropy",
    parts: &[
        Part::inequality("achievability", 1e-8),
        Part::inequality("single_copy_chain", 1e-8),
        Part::identity("chernoff_information", 1e-8),
    ],
    dims: Dims::Fixed(&[2]),
    run: chernoff_check,
};

/// `Tr rho^a sigma^(1-a)` from matrix powers, independent of the library's
/// eigenbasis-overlap formula.
fn quasi_by_powers(pair: &StatePair, a: f64) -> f64 {
    real_trace(&(pair.rho.power(a) * pair.sigma.power(1.0 - a)))
}

fn chernoff_check(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let c = chernoff(&pair)?;
    for n in 1..=6 {
        let pe = error_probability(&tensor_power(&pair.rho, n)?, &tensor_power(&pair.sigma, n)?);
        t.le(0, format!("n {n}"), pe.total, c.q_min.powi(n as i32) + 1e-9);
    }
    let pe = error_probability(&pair.rho, &pair.sigma).total;
    for a in TENTHS {
        let mid = 1.0 - (1.0 - a) * hellinger(a, &pair, &ctx.spec)?.value;
        t.le(1, format!("p_e <= Q alpha {a}"), pe, mid);
        t.le(1, format!("Q <= petz alpha {a}"), mid, petz(a, &pair)?.quasi);
    }
    let (_, q) = grid_then_golden(|a| quasi_by_powers(&pair, a), 0.0, 1.0, 1001, 1e-10);
    t.eq(2, "min over alpha", c.value, -q.ln(), 0.0);
    Ok(t)
}

/// `c * f(x)` with `f` normalized to vanish to first order at 1.
struct Scaled {
    label: String,
    alpha: f64,
    c: f64,
    f: Normalized,
}

impl Scaled {
    fn new(alpha: f64, c: f64) -> Result<Self> {
        let base: DynGenerator = if alpha == 1.0 {
            Arc::new(RelativeEntropy)
        } else {
            Arc::new(Hellinger::new(alpha)?)
        };
        Ok(Self {
            label: format!("{c}*f_{alpha}"),
            alpha,
            c,
            f: Normalized::new(base)?,
        })
    }

    fn at(&self, x: f64) -> f64 {
        self.c * self.f.value(x).unwrap_or(f64::NAN)
    }
}

fn dominates(f: &Scaled, g: &Scaled, lo: f64, hi: f64) -> bool {
    let n = 4096;
    let (a, b) = (lo.ln(), hi.ln());
    (0..=n).all(|i| {
        let x = (a + (b - a) * i as f64 / n as f64).exp();
        f.at(x) - g.at(x) >= -1e-12 * (1.0 + f.at(x).abs())
    })
}

pub(crate) static F_MONOTONICITY: CheckDef = CheckDef {
    name: "f_monotonicity",
    about: "pointwise order of generators on the likelihood range carries over to divergences",
    parts: &[
        Part::inequality("dominating_pairs", 1e-8),
        Part::inequality("hellinger_alpha", 1e-8),
        Part::inequality("renyi_alpha", 1e-8),
        Part::inequality("scaled_decreasing", 1e-8),
    ],
    dims: Dims::Ensemble,
    run: f_monotonicity,
};

const MONO_ALPHAS: [f64; 6] = [0.3, 0.7, 1.0, 1.5, 2.0, 3.0];

fn f_monotonicity(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let mut h = HellingerTable::new(&pair, &ctx.spec);
    let (lo, hi) = (pair.beta2(), pair.dmax_rho_sigma.exp());

    let mut family = Vec::new();
    for a in MONO_ALPHAS {
        for c in [0.8, 1.0, 1.25] {
            family.push(Scaled::new(a, c)?);
        }
    }
    for a in [0.3, 0.5, 0.7] {
        family.push(Scaled::new(a, (1.0 - a) / a)?);
    }
    for f in &family {
        for g in &family {
            if std::ptr::eq(f, g) || !dominates(f, g, lo, hi) {
                continue;
            }
            let (df, dg) = (f.c * h.get(f.alpha)?, g.c * h.get(g.alpha)?);
            t.le(0, format!("{} >= {}", f.label, g.label), dg, df);
        }
    }
    for (i, &a) in MONO_ALPHAS.iter().enumerate() {
        for &b in &MONO_ALPHAS[i + 1..] {
            t.le(1, format!("H {a} <= H {b}"), h.get(a)?, h.get(b)?);
            t.le(2, format!("D {a} <= D {b}"), h.renyi(a)?, h.renyi(b)?);
        }
    }
    for (i, &a) in TENTHS.iter().enumerate() {
        for &b in &TENTHS[i + 1..] {
            let (sa, sb) = ((1.0 / a - 1.0) * h.get(a)?, (1.0 / b - 1.0) * h.get(b)?);
            t.le(3, format!("alpha {a} vs {b}"), sb, sa);
        }
    }
    Ok(t)
}

pub(crate) static LOG_CONVEXITY: CheckDef = CheckDef {
    name: "log_convexity",
    about: "midpoint log-convexity of H_alpha/alpha and Q_alpha, and the chi^2 chains around D",
    parts: &[
        Part::inequality("hellinger_midpoint", 1e-8),
        Part::inequality("quasi_midpoint", 1e-8),
        Part::inequality("lower_family", 1e-8),
        Part::inequality("upper_chain", 1e-8),
    ],
    dims: Dims::Ensemble,
    run: log_convexity,
};

const CONVEX_ALPHAS: [f64; 7] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];

fn log_convexity(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let mut h = HellingerTable::new(&pair, &ctx.spec);
    for (i, &a) in CONVEX_ALPHAS.iter().enumerate() {
        for &b in &CONVEX_ALPHAS[i + 1..] {
            let m = 0.5 * (a + b);
            let (ha, hb, hm) = (h.get(a)?, h.get(b)?, h.get(m)?);
            let k = (a + b) * (a + b) / (4.0 * a * b);
            t.le(0, format!("alpha {a}, {b}"), hm * hm, k * ha * hb);
            let q = |alpha: f64, v: f64| 1.0 + (alpha - 1.0) * v;
            let (qa, qb, qm) = (q(a, ha), q(b, hb), q(m, hm));
            t.le(1, format!("alpha {a}, {b}"), qm * qm, qa * qb);
        }
    }
    let d = h.get(1.0)?;
    for a in [2.0, 3.0, 4.0] {
        let lower = h.get(a)? - (a - 1.0) / (a + 1.0) * h.get(a + 1.0)?;
        t.le(2, format!("alpha {a}"), lower, d);
    }
    let chi2 = h.get(2.0)?;
    let d2 = (1.0 + chi2).ln();
    t.le(3, "D <= D_2", d, d2);
    t.le(3, "D_2 <= chi2", d2, chi2);
    Ok(t)
}

pub(crate) static SECOND_ORDER_BOUNDS: CheckDef = CheckDef {
    name: "second_order_bounds",
    about: "chi^2 and E_1 bounds on relative entropy of mixtures, curvature sandwich, reverse Pinsker",
    parts: &[
        Part::inequality("mixture_chi2", 1e-8),
        Part::inequality("js_chi2", 1e-8),
        Part::inequality("mixture_e1", 1e-8),
        Part::inequality("js_e1", 1e-8),
        Part::inequality("kappa_sandwich", 1e-8),
        Part::inequality("reverse_pinsker", 1e-8),
    ],
    dims: Dims::Ensemble,
    run: second_order_bounds,
};

fn curvature_family() -> Result<Vec<DynGenerator>> {
    Ok(vec![
        Arc::new(RelativeEntropy),
        Arc::new(Hellinger::new(0.5)?),
        Arc::new(Hellinger::new(2.0)?),
        Arc::new(Hellinger::new(3.0)?),
        Arc::new(LeCam::new(0.3)?),
    ])
}

fn second_order_bounds(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let c_rs = chi2_logmean(&pair).value;
    let c_sr = chi2_logmean(&pair.swapped()).value;
    let e1 = trace_distance(&pair.rho, &pair.sigma);
    for l in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let d = umegaki(&pair.rho_against_mixture(l)?).value;
        t.le(0, format!("lambda {l}"), d, 0.5 * l * l * (c_rs + c_sr));
        t.le(2, format!("lambda {l}"), d, 0.5 * l * l * c_rs + (l + 0.5 * l * l) * e1);
    }
    let js = jensen_shannon(&pair)?;
    t.le(1, "JS", js, (c_rs + c_sr) / 8.0);
    t.le(3, "JS", js, (c_rs + c_sr) / 16.0 + 0.625 * e1);

    let lambda_min = pair.sigma.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    for f in curvature_family()? {
        let k = kappa_extrema(f.as_ref(), &pair)?;
        let df = f_divergence(f.as_ref(), &pair, &ctx.spec)?.value;
        t.le(4, format!("{} lower", f.name()), 0.5 * k.kappa_down * c_rs, df);
        t.le(4, format!("{} upper", f.name()), df, 0.5 * k.kappa_up * c_rs);
        t.le(5, f.name(), df, 2.0 * k.kappa_up * e1 * e1 / lambda_min);
    }
    Ok(t)
}

pub(crate) static TAYLOR_BOUNDS: CheckDef = CheckDef {
    name: "taylor_bounds",
    about: "truncated Taylor expansions of D along the mixture path bound D",
    parts: &[Part::inequality("chi3", 1e-8), Part::inequality("order5", 1e-8)],
    dims: Dims::Ensemble,
    run: taylor_bounds,
};

fn taylor_bounds(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let mut h = HellingerTable::new(&pair, &ctx.spec);
    let (d, h2, h3, h4, h5) = (h.get(1.0)?, h.get(2.0)?, h.get(3.0)?, h.get(4.0)?, h.get(5.0)?);
    t.le(0, "chi2 - H3/3 <= D", h2 - h3 / 3.0, d);
    t.le(0, "D <= chi2", d, h2);
    t.le(1, "2chi2 - 2H3 + H4 - H5/5 <= D", 2.0 * h2 - 2.0 * h3 + h4 - h5 / 5.0, d);
    Ok(t)
}

pub(crate) static KAPPA_COROLLARY: CheckDef = CheckDef {
    name: "kappa_corollary",
    about: "D/H_alpha is bracketed by kappa_alpha at the ends of the likelihood range",
    parts: &[
        Part::inequality("kappa_alpha", 1e-8),
        Part::inequality("half_chain", 1e-8),
        Part::inequality("two_chain", 1e-8),
        Part::inequality("kappa_bar", 1e-8),
    ],
    dims: Dims::Ensemble,
    run: kappa_corollary,
};

fn kappa_corollary(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let mut h = HellingerTable::new(&pair, &ctx.spec);
    let (b2, inv_b1) = (pair.beta2(), 1.0 / pair.beta1());
    let d = h.get(1.0)?;
    for a in [0.25, 0.5, 2.0, 3.0] {
        let ha = h.get(a)?;
        let (k_lo, k_hi) = if a < 1.0 {
            (kappa_alpha(a, b2), kappa_alpha(a, inv_b1))
        } else {
            (kappa_alpha(a, inv_b1), kappa_alpha(a, b2))
        };
        t.le(0, format!("alpha {a} lower"), k_lo * ha, d);
        t.le(0, format!("alpha {a} upper"), d, k_hi * ha);
    }
    let h_half = h.get(0.5)?;
    let chain = [h_half, kappa_alpha(0.5, b2) * h_half, d, kappa_alpha(0.5, inv_b1) * h_half];
    for (i, w) in chain.windows(2).enumerate() {
        t.le(1, format!("link {i}"), w[0], w[1]);
    }
    let chi2 = h.get(2.0)?;
    let chain = [0.0, kappa_alpha(2.0, inv_b1) * chi2, d, kappa_alpha(2.0, b2) * chi2, chi2];
    for (i, w) in chain.windows(2).enumerate() {
        t.le(2, format!("link {i}"), w[0], w[1]);
    }

    let kl = Normalized::new(Arc::new(RelativeEntropy))?;
    for a in [0.5, 2.0] {
        let g = Normalized::new(Arc::new(Hellinger::new(a)?))?;
        let ha = h.get(a)?;
        let forward = kappa_bar(&kl, &g, &pair)?;
        t.le(3, format!("D <= kbar H_{a}"), d, forward.value * ha);
        let backward = kappa_bar(&g, &kl, &pair)?;
        t.le(3, format!("H_{a} <= kbar D"), ha, backward.value * d);
    }
    Ok(t)
}

pub(crate) static DPI: CheckDef = CheckDef {
    name: "dpi",
    about: "f-divergences contract under partial traces and depolarizing noise",
    parts: &[Part::inequality("contraction", 1e-8)],
    dims: Dims::Fixed(&[4]),
    run: dpi,
};

fn dpi(ctx: &TrialCtx) -> Result<Trial> {
    let pair = ctx.pair()?;
    let mut t = Trial::new(pair_json(&pair));
    let channels = [
        ("trace out B", Channel::PartialTrace { d_a: 2, d_b: 2, keep: Subsystem::First }),
        ("trace out A", Channel::PartialTrace { d_a: 2, d_b: 2, keep: Subsystem::Second }),
        ("depolarizing 0.3", Channel::Depolarizing { p: 0.3 }),
    ];
    let gens: Vec<DynGenerator> = vec![
        Arc::new(RelativeEntropy),
        Arc::new(Hellinger::new(0.5)?),
        Arc::new(Hellinger::new(2.0)?),
        Arc::new(LeCam::new(0.3)?),
    ];
    let before: Vec<f64> = gens
        .iter()
        .map(|f| f_divergence(f.as_ref(), &pair, &ctx.spec).map(|v| v.value))
        .collect::<Result<_>>()?;
    for (label, ch) in &channels {
        let out = StatePair::new(apply_channel(ch, &pair.rho)?, apply_channel(ch, &pair.sigma)?)?;
        for (f, b) in gens.iter().zip(&before) {
            let a = f_divergence(f.as_ref(), &out, &ctx.spec)?.value;
            t.le(0, format!("{} {label}", f.name()), a, *b);
        }
    }
    Ok(t)
}
