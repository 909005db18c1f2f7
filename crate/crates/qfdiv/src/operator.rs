//! Hermitian operators, density states and state pairs.

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, eigvalsh, hermitian_deviation, real_trace, CMatrix, Eigh, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Eigenvalues at or below this fraction of the largest one are treated as zero.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Absolute tolerance on trace, Hermiticity and positivity of input states.
pub const STATE_TOL: f64 = 1e-10;

/// Largest dimension produced by [`tensor_power`].
pub const TENSOR_BUDGET: usize = 256;

#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > STATE_TOL * (1.0 + matrix.norm()) {
            return Err(Error::NotHermitian { deviation });
        }
        let sym = (&matrix + matrix.adjoint()) * c(0.5);
        Ok(Self { matrix: sym })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        real_trace(&self.matrix)
    }

    pub fn eigh(&self) -> Eigh {
        eigh(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }
}

/// Sum of the positive eigenvalues, `Tr(h)_+`.
pub fn positive_part_trace(h: &CMatrix) -> f64 {
    eigvalsh(h).into_iter().filter(|&x| x > 0.0).sum()
}

/// Sum of the absolute values of the negative eigenvalues, `Tr(h)_-`.
pub fn negative_part_trace(h: &CMatrix) -> f64 {
    eigvalsh(h).into_iter().filter(|&x| x < 0.0).map(|x| -x).sum()
}

pub fn trace_norm(h: &CMatrix) -> f64 {
    eigvalsh(h).into_iter().map(f64::abs).sum()
}

/// A density matrix with its eigendecomposition cached.
#[derive(Debug, Clone)]
pub struct DensityState {
    matrix: CMatrix,
    eig: Eigh,
}

impl DensityState {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let h = HermitianOperator::new(matrix)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = h.eigh();
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            matrix: h.matrix,
            eig,
        })
    }

    /// Rescale a positive semidefinite matrix to unit trace.
    pub fn normalized(matrix: CMatrix) -> Result<Self> {
        let tr = real_trace(&matrix);
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Self::new(matrix * c(1.0 / tr))
    }

    pub fn from_probs(p: &ProbVector) -> Self {
        let d = p.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &x) in p.as_slice().iter().enumerate() {
            m[(i, i)] = c(x);
        }
        Self::new(m).expect("probability vector embeds as a state")
    }

    pub fn pure(vector: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(vector);
        let n2 = v.norm_squared();
        if !(n2 > 0.0) {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(&v * v.adjoint() * c(1.0 / n2))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(CMatrix::identity(d, d) * c(1.0 / d as f64)).expect("valid state")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eig(&self) -> &Eigh {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn rank(&self) -> usize {
        let tol = support_cutoff(&self.eig.values);
        self.eig.values.iter().filter(|&&x| x > tol).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    /// `(1 - w) self + w other`.
    pub fn mix(&self, other: &DensityState, w: f64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("mixing weight {w} outside [0,1]")));
        }
        Self::new(&self.matrix * c(1.0 - w) + &other.matrix * c(w))
    }

    /// Matrix power on the support; zero eigenvalues stay zero for any exponent.
    pub fn power(&self, x: f64) -> CMatrix {
        let tol = support_cutoff(&self.eig.values);
        self.eig.map(|l| if l > tol { l.powf(x) } else { 0.0 })
    }

    /// Logarithm on the support (zero on the kernel).
    pub fn log_on_support(&self) -> CMatrix {
        let tol = support_cutoff(&self.eig.values);
        self.eig.map(|l| if l > tol { l.ln() } else { 0.0 })
    }

    pub fn support_projector(&self) -> CMatrix {
        let tol = support_cutoff(&self.eig.values);
        self.eig.map(|l| if l > tol { 1.0 } else { 0.0 })
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        let tol = support_cutoff(&self.eig.values);
        self.eig
            .values
            .iter()
            .filter(|&&l| l > tol)
            .map(|&l| -l * l.ln())
            .sum()
    }
}

pub(crate) fn support_cutoff(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0f64, |a, &b| a.max(b));
    SUPPORT_TOL * max
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// A probability vector (commuting/classical input).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidState("empty probability vector".into()));
        }
        if p.iter().any(|&x| !(x >= -STATE_TOL) || !x.is_finite()) {
            return Err(Error::InvalidState("negative or non-finite probability".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("probabilities sum to {s}")));
        }
        Ok(Self(p.into_iter().map(|x| x.max(0.0)).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn classical_embed(p: &ProbVector) -> DensityState {
    DensityState::from_probs(p)
}

/// Support/kernel split of `sigma` and `rho` written in `sigma`'s eigenbasis.
struct SupportView {
    support: Vec<usize>,
    kernel: Vec<usize>,
    rho_in_basis: CMatrix,
}

fn support_view(rho: &DensityState, sigma: &DensityState) -> SupportView {
    let e = sigma.eig();
    let tol = support_cutoff(&e.values);
    let (support, kernel): (Vec<usize>, Vec<usize>) =
        (0..e.dim()).partition(|&i| e.values[i] > tol);
    SupportView {
        support,
        kernel,
        rho_in_basis: e.to_basis(rho.matrix()),
    }
}

fn block(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn kernel_mass(view: &SupportView) -> f64 {
    view.kernel.iter().map(|&k| view.rho_in_basis[(k, k)].re).sum()
}

/// `D_max(rho||sigma) = log min{l : rho <= l sigma}`; `+inf` unless `rho << sigma`.
pub fn max_divergence(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let view = support_view(rho, sigma);
    if kernel_mass(&view) > STATE_TOL {
        return Ok(f64::INFINITY);
    }
    let kinks = kinks_from_view(&view, sigma);
    let top = kinks.last().copied().unwrap_or(0.0);
    Ok(top.ln())
}

/// Points where `gamma -> Tr(rho - gamma sigma)_+` is not smooth, ascending.
///
/// With `rho << sigma` these are the eigenvalues of `sigma^{-1/2} rho sigma^{-1/2}`
/// on the support of `sigma`. Otherwise the part of `rho` off the support is
/// eliminated first through a Schur complement, which gives the finite roots
/// of `det(rho - gamma sigma)`.
pub fn pencil_kinks(rho: &DensityState, sigma: &DensityState) -> Result<Vec<f64>> {
    check_dims(rho.dim(), sigma.dim())?;
    let view = support_view(rho, sigma);
    Ok(kinks_from_view(&view, sigma))
}

fn kinks_from_view(view: &SupportView, sigma: &DensityState) -> Vec<f64> {
    let s = &view.support;
    let k = &view.kernel;
    let r = &view.rho_in_basis;
    let mut schur = block(r, s, s);
    if !k.is_empty() && kernel_mass(view) > STATE_TOL {
        let rkk = block(r, k, k);
        let rsk = block(r, s, k);
        let e = eigh(&rkk);
        let tol = support_cutoff(&e.values).max(STATE_TOL);
        let pinv = e.map(|l| if l > tol { 1.0 / l } else { 0.0 });
        schur -= &rsk * pinv * rsk.adjoint();
    }
    let lam = &sigma.eig().values;
    let scale: Vec<f64> = s.iter().map(|&i| 1.0 / lam[i].sqrt()).collect();
    let m = CMatrix::from_fn(s.len(), s.len(), |i, j| schur[(i, j)] * scale[i] * scale[j]);
    let mut kinks: Vec<f64> = eigvalsh(&m).into_iter().map(|x| x.max(0.0)).collect();
    kinks.sort_by(f64::total_cmp);
    kinks
}

/// A pair of states with the support data the integral engine needs.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub rho: DensityState,
    pub sigma: DensityState,
    /// `D_max(rho||sigma)`, `+inf` when `rho` is not supported in `sigma`.
    pub dmax_rho_sigma: f64,
    pub dmax_sigma_rho: f64,
    /// Kinks of `gamma -> E_gamma(rho||sigma)`, ascending.
    pub kinks_rho_sigma: Vec<f64>,
    /// Kinks of `gamma -> E_gamma(sigma||rho)`, ascending.
    pub kinks_sigma_rho: Vec<f64>,
}

impl StatePair {
    pub fn new(rho: DensityState, sigma: DensityState) -> Result<Self> {
        check_dims(rho.dim(), sigma.dim())?;
        Ok(Self {
            dmax_rho_sigma: max_divergence(&rho, &sigma)?,
            dmax_sigma_rho: max_divergence(&sigma, &rho)?,
            kinks_rho_sigma: pencil_kinks(&rho, &sigma)?,
            kinks_sigma_rho: pencil_kinks(&sigma, &rho)?,
            rho,
            sigma,
        })
    }

    pub fn classical(p: &ProbVector, q: &ProbVector) -> Result<Self> {
        Self::new(classical_embed(p), classical_embed(q))
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho_ll_sigma(&self) -> bool {
        self.dmax_rho_sigma.is_finite()
    }

    pub fn sigma_ll_rho(&self) -> bool {
        self.dmax_sigma_rho.is_finite()
    }

    pub fn swapped(&self) -> Self {
        Self {
            rho: self.sigma.clone(),
            sigma: self.rho.clone(),
            dmax_rho_sigma: self.dmax_sigma_rho,
            dmax_sigma_rho: self.dmax_rho_sigma,
            kinks_rho_sigma: self.kinks_sigma_rho.clone(),
            kinks_sigma_rho: self.kinks_rho_sigma.clone(),
        }
    }

    /// The pair `(lambda rho + (1 - lambda) sigma, sigma)`.
    pub fn mixed_toward_sigma(&self, lambda: f64) -> Result<Self> {
        let mixed = self.sigma.mix(&self.rho, lambda)?;
        Self::new(mixed, self.sigma.clone())
    }

    /// The pair `(rho, (1 - s) rho + s sigma)`.
    pub fn rho_against_mixture(&self, s: f64) -> Result<Self> {
        let mixed = self.rho.mix(&self.sigma, s)?;
        Self::new(self.rho.clone(), mixed)
    }

    /// `beta_1 = exp(-D_max(rho||sigma))`.
    pub fn beta1(&self) -> f64 {
        (-self.dmax_rho_sigma).exp()
    }

    /// `beta_2 = exp(-D_max(sigma||rho))`.
    pub fn beta2(&self) -> f64 {
        (-self.dmax_sigma_rho).exp()
    }
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Ginibre-ensemble state `G G† / Tr(G G†)` with `G` of size `d x rank`.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityState> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!("rank {rank} for dimension {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = normal_matrix(d, rank, &mut rng);
    DensityState::normalized(&g * g.adjoint())
}

pub fn random_pure(d: usize, seed: u64) -> Result<DensityState> {
    random_density(d, 1, seed)
}

/// Random probability vector from the flat Dirichlet distribution.
pub fn random_probs(d: usize, seed: u64) -> Result<ProbVector> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d)
        .map(|_| {
            let x: f64 = rand_distr::Exp1.sample(&mut rng);
            x
        })
        .collect();
    let s: f64 = w.iter().sum();
    ProbVector::new(w.into_iter().map(|x| x / s).collect())
}

pub fn tensor_power(rho: &DensityState, n: usize) -> Result<DensityState> {
    if n == 0 {
        return Err(Error::InvalidParameter("tensor power 0".into()));
    }
    let needed = rho.dim().checked_pow(n as u32).unwrap_or(usize::MAX);
    if needed > TENSOR_BUDGET {
        return Err(Error::Budget {
            what: "tensor power dimension",
            needed,
            limit: TENSOR_BUDGET,
        });
    }
    let mut m = rho.matrix().clone();
    for _ in 1..n {
        m = m.kronecker(rho.matrix());
    }
    DensityState::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub enum Channel {
    /// Trace out one factor of a `d_a x d_b` bipartite space, keeping `keep`.
    PartialTrace { d_a: usize, d_b: usize, keep: Subsystem },
    /// `x -> (1 - p) x + p Tr(x) I / d`.
    Depolarizing { p: f64 },
    /// `x -> sum_k K x K†`; trace preserving when `sum_k K† K = I`.
    Kraus(Vec<CMatrix>),
}

pub fn apply_channel(channel: &Channel, rho: &DensityState) -> Result<DensityState> {
    match channel {
        Channel::PartialTrace { d_a, d_b, keep } => {
            check_dims(d_a * d_b, rho.dim())?;
            let m = rho.matrix();
            let out = match keep {
                Subsystem::First => CMatrix::from_fn(*d_a, *d_a, |i, j| {
                    (0..*d_b).map(|k| m[(i * d_b + k, j * d_b + k)]).sum()
                }),
                Subsystem::Second => CMatrix::from_fn(*d_b, *d_b, |i, j| {
                    (0..*d_a).map(|k| m[(k * d_b + i, k * d_b + j)]).sum()
                }),
            };
            DensityState::new(out)
        }
        Channel::Depolarizing { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidParameter(format!("depolarizing p={p}")));
            }
            let d = rho.dim();
            let out = rho.matrix() * c(1.0 - p) + CMatrix::identity(d, d) * c(p / d as f64);
            DensityState::new(out)
        }
        Channel::Kraus(ops) => {
            let d = rho.dim();
            let mut completeness = CMatrix::zeros(d, d);
            let mut out: Option<CMatrix> = None;
            for k in ops {
                if k.ncols() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: k.ncols(),
                    });
                }
                completeness += k.adjoint() * k;
                let term = k * rho.matrix() * k.adjoint();
                out = Some(match out {
                    Some(acc) => acc + term,
                    None => term,
                });
            }
            let dev = (completeness - CMatrix::identity(d, d)).norm();
            if dev > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "Kraus operators are not trace preserving (deviation {dev:e})"
                )));
            }
            DensityState::new(out.ok_or_else(|| Error::InvalidParameter("no Kraus operators".into()))?)
        }
    }
}

/// On-disk state description.
///
/// Either `{"probs": [...]}` for a diagonal state or `{"matrix": [[...]]}` where
/// each entry is a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Probs { probs: Vec<f64> },
    Matrix { matrix: Vec<Vec<Entry>> },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl StateFile {
    pub fn to_state(&self) -> Result<DensityState> {
        match self {
            StateFile::Probs { probs } => Ok(classical_embed(&ProbVector::new(probs.clone())?)),
            StateFile::Matrix { matrix } => {
                let n = matrix.len();
                if let Some(row) = matrix.iter().find(|r| r.len() != n) {
                    return Err(Error::NotSquare {
                        rows: n,
                        cols: row.len(),
                    });
                }
                let m = CMatrix::from_fn(n, n, |i, j| match matrix[i][j] {
                    Entry::Real(x) => c(x),
                    Entry::Complex([re, im]) => C64::new(re, im),
                });
                DensityState::new(m)
            }
        }
    }

    pub fn from_state(state: &DensityState) -> Self {
        let m = state.matrix();
        let n = m.nrows();
        StateFile::Matrix {
            matrix: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im]))
                        .collect()
                })
                .collect(),
        }
    }
}

pub fn load_state(path: impl AsRef<Path>) -> Result<DensityState> {
    let text = std::fs::read_to_string(path)?;
    parse_state(&text)
}

pub fn parse_state(text: &str) -> Result<DensityState> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    file.to_state()
}

pub fn save_state(path: impl AsRef<Path>, state: &DensityState) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_state(state))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(p: &[f64]) -> ProbVector {
        ProbVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn rejects_invalid_states() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(0.6);
        m[(1, 1)] = c(0.6);
        assert!(matches!(DensityState::new(m.clone()), Err(Error::InvalidState(_))));
        m[(1, 1)] = c(0.4);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(matches!(DensityState::new(m.clone()), Err(Error::NotHermitian { .. })));
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = c(1.2);
        neg[(1, 1)] = c(-0.2);
        assert!(DensityState::new(neg).is_err());
    }

    #[test]
    fn classical_kinks_are_likelihood_ratios() {
        let pair = StatePair::classical(&probs(&[0.7, 0.3]), &probs(&[0.4, 0.6])).unwrap();
        let k = &pair.kinks_rho_sigma;
        assert!((k[0] - 0.5).abs() < 1e-14 && (k[1] - 1.75).abs() < 1e-14);
        assert!((pair.dmax_rho_sigma - 1.75f64.ln()).abs() < 1e-14);
        assert!((pair.dmax_sigma_rho - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn max_divergence_infinite_off_support() {
        let rho = classical_embed(&probs(&[0.5, 0.5]));
        let sigma = classical_embed(&probs(&[1.0, 0.0]));
        assert_eq!(max_divergence(&rho, &sigma).unwrap(), f64::INFINITY);
        assert!((max_divergence(&sigma, &rho).unwrap() - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn schur_kinks_match_determinant_roots() {
        // rho = [[a, b], [b, c]], sigma = diag(1, 0): det(rho - g sigma) = (a - g) c - b^2.
        let (a, b, cc) = (0.6, 0.2, 0.4);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(a);
        m[(0, 1)] = c(b);
        m[(1, 0)] = c(b);
        m[(1, 1)] = c(cc);
        let rho = DensityState::new(m).unwrap();
        let sigma = classical_embed(&probs(&[1.0, 0.0]));
        let k = pencil_kinks(&rho, &sigma).unwrap();
        assert_eq!(k.len(), 1);
        assert!((k[0] - (a - b * b / cc)).abs() < 1e-13);
    }

    #[test]
    fn random_density_is_reproducible_and_valid() {
        let a = random_density(3, 2, 11).unwrap();
        let b = random_density(3, 2, 11).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.rank(), 2);
        assert!((real_trace(a.matrix()) - 1.0).abs() < 1e-14);
        let p = random_probs(5, 3).unwrap();
        assert_eq!(p, random_probs(5, 3).unwrap());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = random_density(2, 2, 1).unwrap();
        let b = random_density(3, 2, 2).unwrap();
        let ab = DensityState::new(a.matrix().kronecker(b.matrix())).unwrap();
        let keep_a = apply_channel(
            &Channel::PartialTrace { d_a: 2, d_b: 3, keep: Subsystem::First },
            &ab,
        )
        .unwrap();
        let keep_b = apply_channel(
            &Channel::PartialTrace { d_a: 2, d_b: 3, keep: Subsystem::Second },
            &ab,
        )
        .unwrap();
        assert!((keep_a.matrix() - a.matrix()).norm() < 1e-14);
        assert!((keep_b.matrix() - b.matrix()).norm() < 1e-14);
    }

    #[test]
    fn tensor_budget_enforced() {
        let r = DensityState::maximally_mixed(2);
        assert_eq!(tensor_power(&r, 8).unwrap().dim(), 256);
        assert!(matches!(tensor_power(&r, 9), Err(Error::Budget { .. })));
    }

    #[test]
    fn state_file_round_trip() {
        let r = random_density(3, 3, 5).unwrap();
        let text = serde_json::to_string(&StateFile::from_state(&r)).unwrap();
        let back = parse_state(&text).unwrap();
        assert!((back.matrix() - r.matrix()).norm() < 1e-15);
        let diag = parse_state(r#"{"probs": [0.25, 0.75]}"#).unwrap();
        assert!((diag.matrix()[(1, 1)].re - 0.75).abs() < 1e-16);
        let real = parse_state(r#"{"matrix": [[0.5, [0.1, 0.2]], [[0.1, -0.2], 0.5]]}"#).unwrap();
        assert!((real.matrix()[(0, 1)].im - 0.2).abs() < 1e-16);
    }
}
