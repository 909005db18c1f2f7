//! Resolvent trace representations.
//!
//! For integer `k >= 2` and `R_s = (sigma + s)^{-1}`,
//! `int_0^inf Tr[(rho R_s)^k] ds` expands over index cycles in the eigenbasis of
//! `sigma`; each cycle contributes its matrix-element product times
//! `int_0^inf prod_m (l_m + s)^{-1} ds = (-1)^k log[l_1, ..., l_k]`, a divided
//! difference of the logarithm.

use crate::error::{Error, Result};
use crate::integral::{DivergenceValue, Method};
use crate::linalg::{eigh, eigvalsh, log_mean_kernel, CMatrix, C64};
use crate::operator::{support_cutoff, StatePair, STATE_TOL};
use crate::quad::{integrate_to_infinity, integrate_to_zero, QuadResult, QuadratureSpec};
use std::collections::BTreeMap;

/// Largest number of index cycles `d^k` expanded exactly.
pub const CYCLE_BUDGET: usize = 4096;

/// Spread below which a node cluster is handled by a Taylor expansion.
const CLUSTER_SPREAD: f64 = 0.2;
const TAYLOR_TERMS: usize = 80;

/// Divided difference `log[x_1, ..., x_k]` of the natural logarithm, with
/// repeated or clustered nodes allowed. All nodes must be positive.
pub fn log_divided_difference(nodes: &[f64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("no nodes".into()));
    }
    if nodes.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("nodes must be positive: {nodes:?}")));
    }
    let mut x = nodes.to_vec();
    x.sort_by(f64::total_cmp);
    let k = x.len();
    // table[i] holds log[x_i, ..., x_{i+m}] for the current order m.
    let mut table: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    for m in 1..k {
        let mut next = Vec::with_capacity(k - m);
        for i in 0..k - m {
            let (lo, hi) = (x[i], x[i + m]);
            let spread = (hi - lo) / (hi + lo);
            next.push(if spread <= CLUSTER_SPREAD {
                taylor_divided_difference(&x[i..=i + m])
            } else {
                (table[i + 1] - table[i]) / (hi - lo)
            });
        }
        table = next;
    }
    Ok(table[0])
}

/// Expansion of `log` about the cluster centre `c`:
/// `log[x_0..x_m] = sum_{j>=0} a_{m+j} h_j(x - c)` with `a_n = (-1)^(n-1) / (n c^n)`
/// and `h_j` the complete homogeneous symmetric polynomials.
fn taylor_divided_difference(x: &[f64]) -> f64 {
    let m = x.len() - 1;
    let c = 0.5 * (x[0] + x[m]);
    let u: Vec<f64> = x.iter().map(|v| (v - c) / c).collect();
    let mut h = vec![0.0; TAYLOR_TERMS];
    h[0] = 1.0;
    for &uv in &u {
        for j in 1..TAYLOR_TERMS {
            h[j] += uv * h[j - 1];
        }
    }
    // Work in units of c: a_{m+j} c^j = (-1)^(m+j-1) / ((m+j) c^m).
    // |h_j| <= C(j+m, m) umax^j bounds the remaining terms; single terms can
    // vanish (odd j for symmetric nodes) and say nothing about the tail.
    let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut sum = 0.0;
    let mut bound = 1.0;
    for (j, hj) in h.iter().enumerate() {
        let n = m + j;
        let sign = if (n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * hj / n as f64;
        if j > 0 {
            bound *= umax * (j + m) as f64 / j as f64;
        }
        if bound / (n as f64) < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / c.powi(m as i32)
}

/// `int_0^inf prod_m (l_m + s)^{-1} ds` for positive poles, `k >= 2` of them.
pub fn resolvent_chain_integral(poles: &[f64]) -> Result<f64> {
    if poles.len() < 2 {
        return Err(Error::InvalidParameter("a resolvent chain needs at least two poles".into()));
    }
    let sign = if poles.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * log_divided_difference(poles)?)
}

/// `rho` (or any operator) written in the eigenbasis of `sigma`, restricted to
/// the support of `sigma`.
pub(crate) struct SigmaFrame {
    pub poles: Vec<f64>,
    pub vectors: CMatrix,
    pub kernel_mass: f64,
}

impl SigmaFrame {
    pub fn new(pair: &StatePair) -> Self {
        let e = pair.sigma.eig();
        let tol = support_cutoff(&e.values);
        let support: Vec<usize> = (0..e.dim()).filter(|&i| e.values[i] > tol).collect();
        let vectors = CMatrix::from_fn(e.dim(), support.len(), |i, j| e.vectors[(i, support[j])]);
        let rho_full = e.to_basis(pair.rho.matrix());
        let kernel_mass = (0..e.dim())
            .filter(|i| !support.contains(i))
            .map(|i| rho_full[(i, i)].re)
            .sum();
        Self {
            poles: support.iter().map(|&i| e.values[i]).collect(),
            vectors,
            kernel_mass,
        }
    }

    pub fn restrict(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }

    pub fn rho_supported(&self) -> bool {
        self.kernel_mass <= STATE_TOL
    }
}

/// `sum over index cycles of prod W[i_m, i_{m+1}] * chain(l_{i_1}, ..., l_{i_k})`,
/// which equals `int_0^inf Re Tr[(W R_s)^k] ds` for `R_s = diag(1/(l + s))`.
pub fn cycle_expansion(w: &CMatrix, poles: &[f64], k: usize) -> Result<f64> {
    let n = poles.len();
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.nrows(),
        });
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("cycle length {k} < 2")));
    }
    let terms = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    if terms > CYCLE_BUDGET {
        return Err(Error::Budget {
            what: "resolvent cycle terms",
            needed: terms,
            limit: CYCLE_BUDGET,
        });
    }
    let mut by_multiset: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
    let mut idx = vec![0usize; k];
    for _ in 0..terms {
        let mut prod = C64::new(1.0, 0.0);
        for m in 0..k {
            prod *= w[(idx[m], idx[(m + 1) % k])];
        }
        if prod != C64::new(0.0, 0.0) {
            let mut key = idx.clone();
            key.sort_unstable();
            *by_multiset.entry(key).or_insert(C64::new(0.0, 0.0)) += prod;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    let mut total = 0.0;
    for (key, weight) in by_multiset {
        let chain_poles: Vec<f64> = key.iter().map(|&i| poles[i]).collect();
        total += weight.re * resolvent_chain_integral(&chain_poles)?;
    }
    Ok(total)
}

/// `int_0^inf Tr[(rho (sigma + s)^{-1})^k] ds` by cycle expansion; `+inf`
/// unless `rho << sigma`.
pub fn integer_trace_integral(k: usize, pair: &StatePair) -> Result<f64> {
    let frame = SigmaFrame::new(pair);
    if !frame.rho_supported() {
        return Ok(f64::INFINITY);
    }
    cycle_expansion(&frame.restrict(pair.rho.matrix()), &frame.poles, k)
}

/// `int_0^inf Tr[((sigma+s)^{-1/2} rho (sigma+s)^{-1/2})^alpha] ds` by quadrature,
/// for real `alpha > 1`.
pub fn trace_power_integral_quadrature(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<QuadResult> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "trace power integral needs alpha > 1, got {alpha}"
        )));
    }
    let frame = SigmaFrame::new(pair);
    if !frame.rho_supported() {
        return Ok(QuadResult {
            value: f64::INFINITY,
            est_error: 0.0,
            evaluations: 0,
        });
    }
    let r = frame.restrict(pair.rho.matrix());
    let poles = frame.poles.clone();
    let phi = move |s: f64| {
        let scale: Vec<f64> = poles.iter().map(|l| 1.0 / (l + s).sqrt()).collect();
        let m = CMatrix::from_fn(r.nrows(), r.ncols(), |i, j| r[(i, j)] * scale[i] * scale[j]);
        eigvalsh(&m)
            .into_iter()
            .filter(|&x| x > 0.0)
            .map(|x| x.powf(alpha))
            .sum::<f64>()
    };
    let near = integrate_to_zero(&phi, 1.0, spec)?;
    let far = integrate_to_infinity(&phi, 1.0, spec)?;
    Ok(near.add(far))
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0 && (2.0..=64.0).contains(&x)
}

/// `int_0^inf Tr[(rho (sigma+s)^{-1})^alpha] ds`: exact cycle expansion for
/// integer `alpha` within [`CYCLE_BUDGET`], quadrature otherwise.
pub fn trace_power_integral(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<(QuadResult, Method)> {
    if is_integer(alpha) {
        match integer_trace_integral(alpha as usize, pair) {
            Ok(v) => {
                return Ok((
                    QuadResult {
                        value: v,
                        est_error: 0.0,
                        evaluations: 0,
                    },
                    Method::TraceExact,
                ))
            }
            Err(Error::Budget { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((trace_power_integral_quadrature(alpha, pair, spec)?, Method::TraceQuadrature))
}

/// `H_alpha = int_0^inf Tr[(rho (sigma+s)^{-1})^alpha] ds - 1/(alpha - 1)`.
///
/// Proven for integer `alpha >= 2` and for pure `rho`; for other `alpha > 1`
/// this is the conjectured extension and serves as evidence only.
pub fn hellinger_trace(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<DivergenceValue> {
    let (t, method) = trace_power_integral(alpha, pair, spec)?;
    if t.value.is_infinite() {
        return Ok(DivergenceValue::infinite(
            method,
            "rho is not supported within the support of sigma",
        ));
    }
    Ok(DivergenceValue {
        value: t.value - 1.0 / (alpha - 1.0),
        est_error: t.est_error,
        method,
        note: None,
    })
}

/// `D_alpha = log((alpha - 1) int_0^inf Tr[(rho (sigma+s)^{-1})^alpha] ds) / (alpha - 1)`.
pub fn renyi_trace(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<DivergenceValue> {
    let (t, method) = trace_power_integral(alpha, pair, spec)?;
    if t.value.is_infinite() {
        return Ok(DivergenceValue::infinite(
            method,
            "rho is not supported within the support of sigma",
        ));
    }
    let a1 = alpha - 1.0;
    Ok(DivergenceValue {
        value: (a1 * t.value).ln() / a1,
        est_error: t.est_error / t.value.abs(),
        method,
        note: None,
    })
}

/// `D_{(g-1)^k}(rho||sigma) = (k - 1) int_0^inf Tr[((rho - sigma)(sigma+s)^{-1})^k] ds`.
pub fn chi_power_trace(k: usize, pair: &StatePair) -> Result<f64> {
    let frame = SigmaFrame::new(pair);
    if !frame.rho_supported() {
        return Ok(f64::INFINITY);
    }
    let delta = pair.rho.matrix() - pair.sigma.matrix();
    Ok((k as f64 - 1.0) * cycle_expansion(&frame.restrict(&delta), &frame.poles, k)?)
}

/// `int_0^inf Re Tr[(x (sigma+s)^{-1})^n] ds` by quadrature, with `x`
/// restricted to the support of `sigma`.
pub fn resolvent_trace_quadrature(x: &CMatrix, pair: &StatePair, n: usize, spec: &QuadratureSpec) -> Result<QuadResult> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("power {n} < 2")));
    }
    let frame = SigmaFrame::new(pair);
    let w = frame.restrict(x);
    let poles = frame.poles.clone();
    let f = move |s: f64| {
        let d = poles.len();
        let wr = CMatrix::from_fn(d, d, |i, j| w[(i, j)] / (poles[j] + s));
        let mut p = wr.clone();
        for _ in 1..n {
            p = &p * &wr;
        }
        (0..d).map(|i| p[(i, i)].re).sum::<f64>()
    };
    let near = integrate_to_zero(&f, 1.0, spec)?;
    let far = integrate_to_infinity(&f, 1.0, spec)?;
    Ok(near.add(far))
}

/// `H_alpha` for `0 < alpha < 1` from
/// `sin(alpha pi) / (pi (1 - alpha)) int_0^inf t^alpha [I(t) - 1/(1+t)] dt`,
/// `I(t) = sum_ij |<v_i|sigma|v_j>|^2 L(a_i, a_j)` over the eigenpairs of
/// `rho + t sigma` and `L` the logarithmic-mean kernel.
pub fn hellinger_fractional_trace(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<DivergenceValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional representation needs 0 < alpha < 1, got {alpha}"
        )));
    }
    let rho = pair.rho.matrix().clone();
    let sigma = pair.sigma.matrix().clone();
    let g = move |t: f64| {
        let a = &rho + &sigma * C64::new(t, 0.0);
        let e = eigh(&a);
        let st = e.to_basis(&sigma);
        let tol = support_cutoff(&e.values);
        let n = e.dim();
        let mut i_t = 0.0;
        for i in 0..n {
            if e.values[i] <= tol {
                continue;
            }
            for j in 0..n {
                if e.values[j] <= tol {
                    continue;
                }
                i_t += st[(i, j)].norm_sqr() * log_mean_kernel(e.values[i], e.values[j]);
            }
        }
        t.powf(alpha) * (i_t - 1.0 / (1.0 + t))
    };
    let near = integrate_to_zero(&g, 1.0, spec)?;
    let far = integrate_to_infinity(&g, 1.0, spec)?;
    let total = near.add(far);
    let k = (alpha * std::f64::consts::PI).sin() / (std::f64::consts::PI * (1.0 - alpha));
    Ok(DivergenceValue::from_quad(total.scale(k), Method::FractionalTrace))
}

/// Single-integral expression for `0 < alpha < 1` truncated at `r <= cutoff`:
/// `alpha/(1-alpha) int_0^cutoff Tr[(sigma^{1/2}(rho+r)^{-1}sigma^{1/2})^{1-alpha}] - (1+r)^{alpha-1} dr`.
///
/// The untruncated integral diverges whenever `Tr sigma^{1-alpha} != 1` (for
/// instance `rho = sigma` mixed), so this is a regularized quantity and not a
/// representation of `H_alpha`.
pub fn hellinger_fractional_regularized(
    alpha: f64,
    pair: &StatePair,
    cutoff: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(cutoff > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "regularized form needs 0 < alpha < 1 and cutoff > 1 (alpha {alpha}, cutoff {cutoff})"
        )));
    }
    let half = pair.sigma.power(0.5);
    let rho = pair.rho.matrix().clone();
    let d = rho.nrows();
    let f = move |r: f64| {
        let e = eigh(&(&rho + CMatrix::identity(d, d) * C64::new(r, 0.0)));
        let tol = support_cutoff(&e.values);
        let inv = e.map(|l| if l > tol { 1.0 / l } else { 0.0 });
        let x = &half * inv * &half;
        let tr: f64 = eigvalsh(&x)
            .into_iter()
            .filter(|&v| v > 0.0)
            .map(|v| v.powf(1.0 - alpha))
            .sum();
        tr - (1.0 + r).powf(alpha - 1.0)
    };
    let near = integrate_to_zero(&f, 1.0, spec)?;
    let mut pts = vec![1.0];
    while pts.last().copied().unwrap_or(cutoff) * 10.0 < cutoff {
        let next = pts.last().copied().unwrap_or(1.0) * 10.0;
        pts.push(next);
    }
    pts.push(cutoff);
    let far = crate::quad::integrate(&f, &pts, spec)?;
    Ok(alpha / (1.0 - alpha) * (near.value + far.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{classical_embed, ProbVector};
    use crate::quad::integrate;

    fn chain_by_quadrature(poles: &[f64]) -> f64 {
        let spec = QuadratureSpec::with_tol(1e-15, 1e-14);
        let f = |s: f64| poles.iter().map(|l| 1.0 / (l + s)).product::<f64>();
        let near = integrate(&f, &[0.0, 1.0], &spec).unwrap();
        let far = integrate_to_infinity(&f, 1.0, &spec).unwrap();
        near.value + far.value
    }

    #[test]
    fn two_node_clusters_match_log_mean() {
        for &(a, b) in &[(0.389_076_033_029_071_3f64, 0.576_568_761_523_046_1), (1.0, 1.49), (2.0, 2.001)] {
            let exact = ((b - a) / a).ln_1p() / (b - a);
            let dd = log_divided_difference(&[a, b]).unwrap();
            assert!((dd - exact).abs() < 1e-14 * exact, "{a} {b}: {dd} vs {exact}");
        }
    }

    #[test]
    fn chain_integral_matches_quadrature() {
        let cases: &[&[f64]] = &[
            &[1.0, 2.0],
            &[1.0, 2.0, 4.0],
            &[0.3, 0.3, 0.3],
            &[0.01, 0.5, 0.5, 0.9],
            &[0.2, 0.2000001, 3.0, 3.0, 3.0],
            &[1e-3, 1.0, 1.0, 1.0, 1.0, 1.0],
        ];
        for poles in cases {
            let exact = resolvent_chain_integral(poles).unwrap();
            let quad = chain_by_quadrature(poles);
            assert!(
                (exact - quad).abs() < 1e-10 * quad.abs(),
                "{poles:?}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn chain_closed_forms() {
        // int 1/((1+s)(2+s)(4+s)) ds by partial fractions.
        let pf = -(1f64.ln()) / ((2.0 - 1.0) * (4.0 - 1.0))
            - 2f64.ln() / ((1.0 - 2.0) * (4.0 - 2.0))
            - 4f64.ln() / ((1.0 - 4.0) * (2.0 - 4.0));
        assert!((resolvent_chain_integral(&[1.0, 2.0, 4.0]).unwrap() - pf).abs() < 1e-15);
        // Fully confluent: int (l+s)^{-k} ds = l^{1-k}/(k-1).
        for k in 2..7 {
            let l = 0.37;
            let v = resolvent_chain_integral(&vec![l; k]).unwrap();
            let exact = l.powi(1 - k as i32) / (k as f64 - 1.0);
            assert!((v - exact).abs() < 1e-13 * exact);
        }
    }

    #[test]
    fn commuting_trace_integral_is_classical() {
        let p = ProbVector::new(vec![0.7, 0.3]).unwrap();
        let q = ProbVector::new(vec![0.4, 0.6]).unwrap();
        let pair = StatePair::classical(&p, &q).unwrap();
        for k in 2..6 {
            let t = integer_trace_integral(k, &pair).unwrap();
            // sum_i p_i^k q_i^{1-k} / (k - 1)
            let exact: f64 = [0.7f64, 0.3]
                .iter()
                .zip([0.4f64, 0.6])
                .map(|(p, q)| p.powi(k as i32) * q.powi(1 - k as i32))
                .sum::<f64>()
                / (k as f64 - 1.0);
            assert!((t - exact).abs() < 1e-13, "k={k}");
        }
        let chi2 = chi_power_trace(2, &pair).unwrap();
        assert!((chi2 - 0.375).abs() < 1e-14);
    }

    #[test]
    fn budget_exceeded_falls_back_to_quadrature() {
        let r = crate::operator::random_density(5, 5, 1).unwrap();
        let s = crate::operator::random_density(5, 5, 2).unwrap();
        let pair = StatePair::new(r, s).unwrap();
        assert!(matches!(integer_trace_integral(6, &pair), Err(Error::Budget { .. })));
        let spec = QuadratureSpec::with_tol(1e-12, 1e-11);
        let (_, method) = trace_power_integral(6.0, &pair, &spec).unwrap();
        assert_eq!(method, Method::TraceQuadrature);
    }

    #[test]
    fn quadrature_agrees_with_exact_for_integer_orders() {
        let r = crate::operator::random_density(3, 3, 5).unwrap();
        let s = crate::operator::random_density(3, 3, 6).unwrap();
        let pair = StatePair::new(r, s).unwrap();
        let spec = QuadratureSpec::with_tol(1e-13, 1e-12);
        for k in 2..5 {
            let exact = integer_trace_integral(k, &pair).unwrap();
            let quad = trace_power_integral_quadrature(k as f64, &pair, &spec).unwrap();
            assert!((exact - quad.value).abs() < 1e-9 * exact, "k={k}: {exact} vs {}", quad.value);
        }
    }

    #[test]
    fn fractional_representation_classical() {
        let p = ProbVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        let q = ProbVector::new(vec![0.3, 0.3, 0.4]).unwrap();
        let pair = StatePair::new(classical_embed(&p), classical_embed(&q)).unwrap();
        let spec = QuadratureSpec::with_tol(1e-12, 1e-11);
        for &a in &[0.25, 0.5, 0.75] {
            let q_a: f64 = p
                .as_slice()
                .iter()
                .zip(q.as_slice())
                .map(|(x, y)| x.powf(a) * y.powf(1.0 - a))
                .sum();
            let exact = (q_a - 1.0) / (a - 1.0);
            let v = hellinger_fractional_trace(a, &pair, &spec).unwrap();
            assert!((v.value - exact).abs() < 1e-8, "alpha {a}: {} vs {exact}", v.value);
        }
    }

    #[test]
    fn regularized_single_integral_grows_without_bound() {
        let s = crate::operator::random_density(2, 2, 3).unwrap();
        let pair = StatePair::new(s.clone(), s).unwrap();
        let spec = QuadratureSpec::with_tol(1e-10, 1e-9);
        let a = hellinger_fractional_regularized(0.5, &pair, 1e2, &spec).unwrap();
        let b = hellinger_fractional_regularized(0.5, &pair, 1e4, &spec).unwrap();
        assert!(b.abs() > 5.0 * a.abs());
    }
}
