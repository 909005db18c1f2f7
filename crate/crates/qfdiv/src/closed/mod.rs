//! Closed-form divergences and the trace representations.

mod kappa;
pub mod trace;

pub use kappa::{kappa_alpha, kappa_bar, kappa_extrema, KappaBar, KappaProfile};
pub use trace::{
    chi_power_trace, cycle_expansion, hellinger_fractional_regularized, hellinger_fractional_trace,
    hellinger_trace, integer_trace_integral, log_divided_difference, renyi_trace,
    resolvent_chain_integral, resolvent_trace_quadrature, trace_power_integral,
    trace_power_integral_quadrature, CYCLE_BUDGET,
};

use crate::error::{Error, Result};
use crate::integral::{DivergenceValue, Method};
use crate::linalg::{eigvalsh, log_mean_kernel, CMatrix};
use crate::operator::{support_cutoff, trace_norm, DensityState, StatePair};
use crate::quad::grid_then_golden;
use serde::Serialize;
use trace::SigmaFrame;

/// `Tr rho (log rho - log sigma)`.
pub fn umegaki(pair: &StatePair) -> DivergenceValue {
    let frame = SigmaFrame::new(pair);
    if !frame.rho_supported() {
        return DivergenceValue::infinite(
            Method::Closed,
            "rho is not supported within the support of sigma",
        );
    }
    let r = frame.restrict(pair.rho.matrix());
    let cross: f64 = frame
        .poles
        .iter()
        .enumerate()
        .map(|(i, l)| r[(i, i)].re * l.ln())
        .sum();
    DivergenceValue::exact(-pair.rho.von_neumann_entropy() - cross, Method::Closed)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("order {alpha} must be finite and >= 0")));
    }
    Ok(())
}

/// Petz quasi-entropy `Tr rho^alpha sigma^(1-alpha)` with powers on the supports.
pub fn petz_quasi(alpha: f64, pair: &StatePair) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha > 1.0 && !pair.rho_ll_sigma() {
        return Ok(f64::INFINITY);
    }
    let (er, es) = (pair.rho.eig(), pair.sigma.eig());
    let overlap = er.vectors.adjoint() * &es.vectors;
    let (tr, ts) = (support_cutoff(&er.values), support_cutoff(&es.values));
    let mut q = 0.0;
    for (i, &p) in er.values.iter().enumerate() {
        if p <= tr {
            continue;
        }
        let pa = if alpha == 0.0 { 1.0 } else { p.powf(alpha) };
        for (j, &l) in es.values.iter().enumerate() {
            if l <= ts {
                continue;
            }
            let lb = if alpha == 1.0 { 1.0 } else { l.powf(1.0 - alpha) };
            q += pa * lb * overlap[(i, j)].norm_sqr();
        }
    }
    Ok(q)
}

/// Sandwiched quasi-entropy `Tr (sigma^g rho sigma^g)^alpha`, `g = (1-alpha)/(2 alpha)`.
pub fn sandwiched_quasi(alpha: f64, pair: &StatePair) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("sandwiched order {alpha} must be positive")));
    }
    if alpha > 1.0 && !pair.rho_ll_sigma() {
        return Ok(f64::INFINITY);
    }
    let g = (1.0 - alpha) / (2.0 * alpha);
    let s = pair.sigma.power(g);
    let y = &s * pair.rho.matrix() * &s;
    Ok(eigvalsh(&y)
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| x.powf(alpha))
        .sum())
}

/// `(Q - 1)/(alpha - 1)` and `log Q/(alpha - 1)` from a quasi-entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiDivergence {
    pub alpha: f64,
    pub quasi: f64,
    pub hellinger: f64,
    pub renyi: f64,
}

impl QuasiDivergence {
    pub fn from_quasi(alpha: f64, quasi: f64) -> Self {
        let a1 = alpha - 1.0;
        let (hellinger, renyi) = if quasi.is_infinite() {
            (f64::INFINITY, f64::INFINITY)
        } else {
            ((quasi - 1.0) / a1, quasi.ln() / a1)
        };
        Self {
            alpha,
            quasi,
            hellinger,
            renyi,
        }
    }
}

pub fn petz(alpha: f64, pair: &StatePair) -> Result<QuasiDivergence> {
    if alpha == 1.0 {
        let d = umegaki(pair).value;
        return Ok(QuasiDivergence { alpha, quasi: 1.0, hellinger: d, renyi: d });
    }
    Ok(QuasiDivergence::from_quasi(alpha, petz_quasi(alpha, pair)?))
}

pub fn sandwiched(alpha: f64, pair: &StatePair) -> Result<QuasiDivergence> {
    if alpha == 1.0 {
        let d = umegaki(pair).value;
        return Ok(QuasiDivergence { alpha, quasi: 1.0, hellinger: d, renyi: d });
    }
    Ok(QuasiDivergence::from_quasi(alpha, sandwiched_quasi(alpha, pair)?))
}

/// `chi^2(rho||sigma) = sum_ij |<u_i|rho|u_j>|^2 L(l_i, l_j) - 1` in the
/// eigenbasis of `sigma`, with the logarithmic-mean kernel `L`.
pub fn chi2_logmean(pair: &StatePair) -> DivergenceValue {
    let frame = SigmaFrame::new(pair);
    if !frame.rho_supported() {
        return DivergenceValue::infinite(
            Method::Closed,
            "rho is not supported within the support of sigma",
        );
    }
    let r = frame.restrict(pair.rho.matrix());
    DivergenceValue::exact(log_mean_form(&r, &frame.poles) - 1.0, Method::Closed)
}

fn log_mean_form(m: &CMatrix, poles: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, &a) in poles.iter().enumerate() {
        for (j, &b) in poles.iter().enumerate() {
            s += m[(i, j)].norm_sqr() * log_mean_kernel(a, b);
        }
    }
    s
}

/// `LC_lambda = lambda (1 - lambda) sum_ij |<w_i|rho - sigma|w_j>|^2 L(m_i, m_j)`
/// over the eigenpairs of `rho_lambda = lambda rho + (1 - lambda) sigma`.
pub fn lecam(lambda: f64, pair: &StatePair) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("Le Cam weight {lambda} outside [0,1]")));
    }
    if lambda == 0.0 || lambda == 1.0 {
        return Ok(0.0);
    }
    let mix = pair.sigma.mix(&pair.rho, lambda)?;
    let e = mix.eig();
    let tol = support_cutoff(&e.values);
    let keep: Vec<usize> = (0..e.dim()).filter(|&i| e.values[i] > tol).collect();
    let delta = e.to_basis(&(pair.rho.matrix() - pair.sigma.matrix()));
    let mut s = 0.0;
    for &i in &keep {
        for &j in &keep {
            s += delta[(i, j)].norm_sqr() * log_mean_kernel(e.values[i], e.values[j]);
        }
    }
    Ok(lambda * (1.0 - lambda) * s)
}

/// The equivalent expressions of the Le Cam divergence through `chi^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeCamForms {
    pub direct: f64,
    /// `lambda/(1 - lambda) chi^2(rho||rho_lambda)`.
    pub via_rho: f64,
    /// `(1 - lambda)/lambda chi^2(sigma||rho_lambda)`.
    pub via_sigma: f64,
    /// `lambda chi^2(rho||rho_lambda) + (1 - lambda) chi^2(sigma||rho_lambda)`.
    pub weighted_sum: f64,
}

pub fn lecam_forms(lambda: f64, pair: &StatePair) -> Result<LeCamForms> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("Le Cam weight {lambda} must be in (0,1)")));
    }
    let mix = pair.sigma.mix(&pair.rho, lambda)?;
    let c_rho = chi2_logmean(&StatePair::new(pair.rho.clone(), mix.clone())?).value;
    let c_sigma = chi2_logmean(&StatePair::new(pair.sigma.clone(), mix)?).value;
    Ok(LeCamForms {
        direct: lecam(lambda, pair)?,
        via_rho: lambda / (1.0 - lambda) * c_rho,
        via_sigma: (1.0 - lambda) / lambda * c_sigma,
        weighted_sum: lambda * c_rho + (1.0 - lambda) * c_sigma,
    })
}

/// `JS = D(rho||m)/2 + D(sigma||m)/2` with `m = (rho + sigma)/2`.
pub fn jensen_shannon(pair: &StatePair) -> Result<f64> {
    let m = pair.rho.mix(&pair.sigma, 0.5)?;
    let a = umegaki(&StatePair::new(pair.rho.clone(), m.clone())?).value;
    let b = umegaki(&StatePair::new(pair.sigma.clone(), m)?).value;
    Ok(0.5 * (a + b))
}

/// `E_1(rho||sigma) = Tr(rho - sigma)_+ = ||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityState, sigma: &DensityState) -> f64 {
    0.5 * trace_norm(&(rho.matrix() - sigma.matrix()))
}

/// Minimal error probabilities of discriminating `rho` from `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorProbability {
    /// `1 - ||rho - sigma||_1 / 2`: the sum of both error types.
    pub total: f64,
    /// `(1 - ||rho - sigma||_1 / 2) / 2`: the equal-prior average.
    pub equal_prior: f64,
}

pub fn error_probability(rho: &DensityState, sigma: &DensityState) -> ErrorProbability {
    let total = 1.0 - trace_distance(rho, sigma);
    ErrorProbability {
        total,
        equal_prior: 0.5 * total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chernoff {
    /// `-min_alpha log Tr rho^alpha sigma^(1-alpha)`.
    pub value: f64,
    pub alpha_star: f64,
    pub q_min: f64,
}

/// Quantum Chernoff information: 33-point grid on `[0, 1]`, then golden-section
/// refinement of the convex objective to a bracket of `1e-8`.
pub fn chernoff(pair: &StatePair) -> Result<Chernoff> {
    let mut failure = None;
    let (alpha_star, q_min) = grid_then_golden(
        |a| match petz_quasi(a, pair) {
            Ok(q) => q,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        0.0,
        1.0,
        33,
        1e-8,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Chernoff {
        value: -q_min.ln(),
        alpha_star,
        q_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{classical_embed, random_density, ProbVector};

    fn fixture() -> StatePair {
        let p = ProbVector::new(vec![0.7, 0.3]).unwrap();
        let q = ProbVector::new(vec![0.4, 0.6]).unwrap();
        StatePair::classical(&p, &q).unwrap()
    }

    fn random_pair(seed: u64) -> StatePair {
        StatePair::new(random_density(3, 3, seed).unwrap(), random_density(3, 3, seed + 1).unwrap()).unwrap()
    }

    #[test]
    fn classical_closed_forms() {
        let pair = fixture();
        let kl = 0.7 * 1.75f64.ln() + 0.3 * 0.5f64.ln();
        assert!((umegaki(&pair).value - kl).abs() < 1e-15);
        assert!((chi2_logmean(&pair).value - 0.375).abs() < 1e-15);
        let q = 0.7f64.sqrt() * 0.4f64.sqrt() + 0.3f64.sqrt() * 0.6f64.sqrt();
        assert!((petz_quasi(0.5, &pair).unwrap() - q).abs() < 1e-15);
        assert!((sandwiched_quasi(0.5, &pair).unwrap() - q).abs() < 1e-14);
        // LC = l(1-l) sum (p-q)^2/(l p + (1-l) q)
        let l = 0.3;
        let lc: f64 = [(0.7, 0.4), (0.3, 0.6)]
            .iter()
            .map(|(p, q)| (p - q) * (p - q) / (l * p + (1.0 - l) * q))
            .sum::<f64>()
            * l
            * (1.0 - l);
        assert!((lecam(l, &pair).unwrap() - lc).abs() < 1e-15);
        assert!((trace_distance(&pair.rho, &pair.sigma) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn lecam_forms_agree() {
        for seed in 0..5 {
            let pair = random_pair(10 * seed);
            let f = lecam_forms(0.35, &pair).unwrap();
            for v in [f.via_rho, f.via_sigma, f.weighted_sum] {
                assert!((v - f.direct).abs() < 1e-9 * (1.0 + f.direct));
            }
        }
    }

    #[test]
    fn petz_and_sandwiched_at_orthogonal_and_equal_states() {
        let a = classical_embed(&ProbVector::new(vec![1.0, 0.0]).unwrap());
        let b = classical_embed(&ProbVector::new(vec![0.0, 1.0]).unwrap());
        let pair = StatePair::new(a.clone(), b).unwrap();
        assert_eq!(petz_quasi(0.5, &pair).unwrap(), 0.0);
        assert_eq!(petz(0.5, &pair).unwrap().renyi, f64::INFINITY);
        assert_eq!(petz_quasi(2.0, &pair).unwrap(), f64::INFINITY);
        let r = random_density(3, 3, 9).unwrap();
        let same = StatePair::new(r.clone(), r).unwrap();
        for &alpha in &[0.3, 2.0, 3.5] {
            assert!((petz_quasi(alpha, &same).unwrap() - 1.0).abs() < 1e-13);
            assert!((sandwiched_quasi(alpha, &same).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(umegaki(&same).value.abs() < 1e-14);
        assert!(chi2_logmean(&same).value.abs() < 1e-13);
    }

    #[test]
    fn chernoff_of_commuting_pair() {
        let pair = fixture();
        let c = chernoff(&pair).unwrap();
        let (a, q) = grid_then_golden(
            |a| 0.7f64.powf(a) * 0.4f64.powf(1.0 - a) + 0.3f64.powf(a) * 0.6f64.powf(1.0 - a),
            0.0,
            1.0,
            1001,
            1e-12,
        );
        assert!((c.q_min - q).abs() < 1e-13);
        assert!((c.alpha_star - a).abs() < 1e-6);
    }

    #[test]
    fn error_probability_conventions() {
        let pair = fixture();
        let p = error_probability(&pair.rho, &pair.sigma);
        assert!((p.total - 0.7).abs() < 1e-15);
        assert!((p.equal_prior - 0.35).abs() < 1e-15);
    }
}
