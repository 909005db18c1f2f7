//! Seeded property checks over random state pairs, reported as worst margins.
//!
//! Every check samples trials from an [`EnsembleSpec`], evaluates a set of
//! observations per trial and reduces them into one [`CheckReport`] per part.
//! Margins are normalized by `1 + max(|lhs|, |rhs|)`:
//!
//! * inequality parts assert `lhs <= rhs` and report the smallest `rhs - lhs`;
//!   they pass when it is `>= -tolerance`.
//! * identity parts report the largest `|lhs - rhs|` and pass when it is within
//!   `max(tolerance, 10 * est_error)`.
//!
//! A trial that fails is recomputed once with quadrature tolerances divided by
//! [`REVERIFY_FACTOR`], and the recomputed observations are kept. A trial whose
//! evaluation errors (non-finite value, support anomaly) is resampled with a
//! fresh seed up to [`MAX_RESAMPLES`] times.

mod identity;
mod inequality;
mod representation;

pub use representation::{conjecture_scan, ConjectureRow, ConjectureScan};

use crate::error::{Error, Result};
use crate::operator::{
    random_density, random_probs, random_pure, DensityState, ProbVector, StateFile, StatePair,
};
use crate::quad::{integrate, QuadResult, QuadratureSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::time::Instant;

pub const MAX_RESAMPLES: usize = 3;
pub const REVERIFY_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grade {
    /// A proven statement; failures gate the aggregate result.
    Theorem,
    /// Numerical evidence for an unproven statement; never gates.
    Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Inequality,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ranks {
    Full,
    List(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dims: Vec<usize>,
    pub ranks: Ranks,
    /// Trials per dimension.
    pub trials: usize,
    pub seed: u64,
    /// Dimensions used by checks on diagonal (classical) pairs.
    pub classical_dims: Vec<usize>,
    /// Weight of the maximally mixed state blended into every sampled state.
    pub conditioning: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            dims: vec![2, 3],
            ranks: Ranks::Full,
            trials: 50,
            seed: 42,
            classical_dims: (2..=8).collect(),
            conditioning: 1e-3,
        }
    }
}

impl EnsembleSpec {
    pub fn with_dims(mut self, dims: Vec<usize>) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one trial".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) || self.classical_dims.contains(&0) {
            return Err(Error::InvalidParameter("ensemble dimensions must be >= 1".into()));
        }
        if let Ranks::List(r) = &self.ranks {
            if r.is_empty() || r.contains(&0) {
                return Err(Error::InvalidParameter("ranks must be >= 1".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.conditioning) {
            return Err(Error::InvalidParameter("conditioning weight outside [0,1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    /// `check` or `check/part`.
    pub name: String,
    pub check: String,
    pub grade: Grade,
    pub kind: Kind,
    pub trials: usize,
    pub observations: usize,
    /// Smallest normalized slack for inequalities, largest normalized
    /// deviation for identities.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub worst_instance: Value,
    pub pass: bool,
    pub runtime_ms: u64,
    pub resamples: usize,
    pub reverified: usize,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Part {
    pub name: &'static str,
    pub grade: Grade,
    pub kind: Kind,
    pub tolerance: f64,
}

impl Part {
    pub const fn inequality(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            grade: Grade::Theorem,
            kind: Kind::Inequality,
            tolerance,
        }
    }

    pub const fn identity(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            grade: Grade::Theorem,
            kind: Kind::Identity,
            tolerance,
        }
    }

    pub const fn evidence(self) -> Self {
        Self {
            grade: Grade::Evidence,
            ..self
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Obs {
    part: usize,
    label: String,
    lhs: f64,
    rhs: f64,
    est_error: f64,
}

impl Obs {
    fn scale(&self) -> f64 {
        let m = self.lhs.abs().max(self.rhs.abs());
        1.0 + if m.is_finite() { m } else { 0.0 }
    }

    fn margin(&self) -> f64 {
        if self.rhs == f64::INFINITY || self.lhs == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        (self.rhs - self.lhs) / self.scale()
    }

    fn deviation(&self) -> f64 {
        if self.lhs == self.rhs {
            return 0.0;
        }
        (self.lhs - self.rhs).abs() / self.scale()
    }

    fn allowed(&self, part: &Part) -> f64 {
        part.tolerance.max(10.0 * self.est_error / self.scale())
    }

    fn violates(&self, part: &Part) -> bool {
        match part.kind {
            Kind::Inequality => self.margin() < -part.tolerance,
            Kind::Identity => self.deviation() > self.allowed(part),
        }
    }
}

/// Observations of one trial plus a serialized description of its inputs.
#[derive(Debug, Clone)]
pub(crate) struct Trial {
    obs: Vec<Obs>,
    instance: Value,
}

impl Trial {
    pub fn new(instance: Value) -> Self {
        Self {
            obs: Vec::new(),
            instance,
        }
    }

    /// Asserts `lhs <= rhs`.
    pub fn le(&mut self, part: usize, label: impl Into<String>, lhs: f64, rhs: f64) {
        self.obs.push(Obs {
            part,
            label: label.into(),
            lhs,
            rhs,
            est_error: 0.0,
        });
    }

    /// Asserts `lhs == rhs` up to the part tolerance or ten times `est_error`.
    pub fn eq(&mut self, part: usize, label: impl Into<String>, lhs: f64, rhs: f64, est_error: f64) {
        self.obs.push(Obs {
            part,
            label: label.into(),
            lhs,
            rhs,
            est_error: est_error.abs(),
        });
    }

    fn validate(self, parts: &[Part]) -> Result<Self> {
        for o in &self.obs {
            let kind = parts[o.part].kind;
            let bad = o.lhs.is_nan()
                || o.rhs.is_nan()
                || match kind {
                    Kind::Inequality => o.lhs == f64::INFINITY || o.rhs == f64::NEG_INFINITY,
                    Kind::Identity => (o.lhs.is_infinite() || o.rhs.is_infinite()) && o.lhs != o.rhs,
                };
            if bad {
                return Err(Error::NonFinite(format!(
                    "{}: lhs {} rhs {}",
                    o.label, o.lhs, o.rhs
                )));
            }
        }
        Ok(self)
    }

    fn violates(&self, parts: &[Part]) -> bool {
        self.obs.iter().any(|o| o.violates(&parts[o.part]))
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of a trial; the same `(seed, dim, index)` gives the same states in every check.
pub fn trial_seed(seed: u64, dim: usize, index: usize, attempt: usize) -> u64 {
    let mut s = splitmix64(seed);
    s = splitmix64(s ^ dim as u64);
    s = splitmix64(s ^ index as u64);
    splitmix64(s ^ (attempt as u64).wrapping_mul(0xA5A5_A5A5))
}

pub(crate) struct TrialCtx<'a> {
    pub ens: &'a EnsembleSpec,
    pub dim: usize,
    pub index: usize,
    pub seed: u64,
    pub spec: QuadratureSpec,
}

impl TrialCtx<'_> {
    fn sub_seed(&self, k: u64) -> u64 {
        splitmix64(self.seed ^ k.wrapping_mul(0x2545_F491_4F6C_DD1D))
    }

    fn rank(&self) -> usize {
        match &self.ens.ranks {
            Ranks::Full => self.dim,
            Ranks::List(r) => r[self.index % r.len()].min(self.dim),
        }
    }

    pub fn state_with(&self, k: u64, w: f64) -> Result<DensityState> {
        let s = random_density(self.dim, self.rank(), self.sub_seed(k))?;
        if w > 0.0 {
            s.mix(&DensityState::maximally_mixed(self.dim), w)
        } else {
            Ok(s)
        }
    }

    /// A pair of sampled states, each blended with the maximally mixed state
    /// at the ensemble's conditioning weight.
    pub fn pair(&self) -> Result<StatePair> {
        self.pair_with(self.ens.conditioning)
    }

    pub fn pair_with(&self, w: f64) -> Result<StatePair> {
        StatePair::new(self.state_with(1, w)?, self.state_with(2, w)?)
    }

    /// Pure `rho` against a conditioned `sigma`.
    pub fn pure_pair(&self) -> Result<StatePair> {
        StatePair::new(random_pure(self.dim, self.sub_seed(3))?, self.state_with(2, self.ens.conditioning)?)
    }

    /// Full-support probability vectors.
    pub fn probs_pair(&self) -> Result<(ProbVector, ProbVector)> {
        let w = self.ens.conditioning;
        let d = self.dim as f64;
        let draw = |k| -> Result<ProbVector> {
            let p = random_probs(self.dim, self.sub_seed(k))?;
            ProbVector::new(p.as_slice().iter().map(|x| (1.0 - w) * x + w / d).collect())
        };
        Ok((draw(4)?, draw(5)?))
    }
}

pub(crate) fn pair_json(pair: &StatePair) -> Value {
    json!({
        "rho": StateFile::from_state(&pair.rho),
        "sigma": StateFile::from_state(&pair.sigma),
    })
}

/// [`integrate`] for integrands that can fail; the first error wins.
pub(crate) fn integrate_fallible<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let q = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        points,
        spec,
    );
    match failure {
        Some(e) => Err(e),
        None => q,
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Dims {
    Ensemble,
    Classical,
    Fixed(&'static [usize]),
}

pub(crate) struct CheckDef {
    pub name: &'static str,
    pub about: &'static str,
    pub parts: &'static [Part],
    pub dims: Dims,
    pub run: fn(&TrialCtx) -> Result<Trial>,
}

static CHECKS: &[&CheckDef] = &[
    &representation::CLASSICAL_REDUCTION,
    &representation::REPRESENTATION_AGREEMENT,
    &representation::INTEGER_TRACE_REP,
    &representation::CONJECTURE,
    &representation::FRACTIONAL_TRACE_REP,
    &representation::RESOLVENT_EXPANSION,
    &inequality::PETZ_LOWER,
    &inequality::SANDWICHED_UPPER,
    &inequality::AUDENAERT_STRENGTHENING,
    &inequality::CHERNOFF,
    &inequality::F_MONOTONICITY,
    &inequality::LOG_CONVEXITY,
    &inequality::SECOND_ORDER_BOUNDS,
    &inequality::TAYLOR_BOUNDS,
    &inequality::KAPPA_COROLLARY,
    &inequality::DPI,
    &identity::DERIVATIVE_FORMULAS,
    &identity::LECAM_FORMS,
    &identity::INTEGRAL_IDENTITIES,
];

/// Names of all checks in execution order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// One-line description of a check.
pub fn describe(name: &str) -> Option<&'static str> {
    find(name).map(|c| c.about)
}

fn find(name: &str) -> Option<&'static CheckDef> {
    let name = name.strip_prefix("check_").unwrap_or(name);
    CHECKS.iter().copied().find(|c| c.name == name)
}

struct Outcome {
    dim: usize,
    index: usize,
    seed: u64,
    trial: std::result::Result<Trial, String>,
    resamples: usize,
    reverified: bool,
}

fn run_trial(def: &CheckDef, ens: &EnsembleSpec, spec: &QuadratureSpec, dim: usize, index: usize) -> Outcome {
    let mut last = String::new();
    for attempt in 0..=MAX_RESAMPLES {
        let seed = trial_seed(ens.seed, dim, index, attempt);
        let ctx = TrialCtx {
            ens,
            dim,
            index,
            seed,
            spec: *spec,
        };
        match (def.run)(&ctx).and_then(|t| t.validate(def.parts)) {
            Ok(t) => {
                let mut reverified = false;
                let mut trial = t;
                if trial.violates(def.parts) {
                    let tight = TrialCtx {
                        spec: spec.tightened(REVERIFY_FACTOR),
                        ..ctx
                    };
                    if let Ok(t2) = (def.run)(&tight).and_then(|t| t.validate(def.parts)) {
                        trial = t2;
                        reverified = true;
                    }
                }
                return Outcome {
                    dim,
                    index,
                    seed,
                    trial: Ok(trial),
                    resamples: attempt,
                    reverified,
                };
            }
            Err(e) => last = e.to_string(),
        }
    }
    Outcome {
        dim,
        index,
        seed: trial_seed(ens.seed, dim, index, 0),
        trial: Err(last),
        resamples: MAX_RESAMPLES,
        reverified: false,
    }
}

fn run_def(def: &CheckDef, ens: &EnsembleSpec, spec: &QuadratureSpec) -> Vec<CheckReport> {
    let start = Instant::now();
    let dims: Vec<usize> = match def.dims {
        Dims::Ensemble => ens.dims.clone(),
        Dims::Classical => ens.classical_dims.clone(),
        Dims::Fixed(d) => d.to_vec(),
    };
    let jobs: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&d| (0..ens.trials).map(move |i| (d, i)))
        .collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(d, i)| run_trial(def, ens, spec, d, i))
        .collect();
    let runtime_ms = start.elapsed().as_millis() as u64;

    def.parts
        .iter()
        .enumerate()
        .map(|(pi, part)| {
            let mut worst: Option<(f64, Value)> = None;
            let mut observations = 0;
            let mut failing = false;
            let mut trials = 0;
            let mut errors = Vec::new();
            let mut resamples = 0;
            let mut reverified = 0;
            for o in &outcomes {
                resamples += o.resamples;
                let trial = match &o.trial {
                    Ok(t) => t,
                    Err(e) => {
                        errors.push(format!("dim {} trial {}: {e}", o.dim, o.index));
                        continue;
                    }
                };
                let mut seen = false;
                for ob in trial.obs.iter().filter(|ob| ob.part == pi) {
                    seen = true;
                    observations += 1;
                    failing |= ob.violates(part);
                    let (score, value) = match part.kind {
                        Kind::Inequality => (-ob.margin(), ob.margin()),
                        Kind::Identity => (ob.deviation(), ob.deviation()),
                    };
                    if worst.as_ref().is_none_or(|(w, _)| score > *w) {
                        let instance = json!({
                            "dim": o.dim,
                            "trial": o.index,
                            "seed": o.seed,
                            "label": ob.label,
                            "lhs": ob.lhs,
                            "rhs": ob.rhs,
                            "est_error": ob.est_error,
                            "margin": value,
                            "inputs": trial.instance,
                        });
                        worst = Some((score, instance));
                    }
                }
                if seen {
                    trials += 1;
                    reverified += o.reverified as usize;
                }
            }
            let worst_margin = match (&worst, part.kind) {
                (Some((s, _)), Kind::Inequality) => -s,
                (Some((s, _)), Kind::Identity) => *s,
                (None, _) => f64::NAN,
            };
            let name = if def.parts.len() == 1 {
                def.name.to_string()
            } else {
                format!("{}/{}", def.name, part.name)
            };
            CheckReport {
                name,
                check: def.name.to_string(),
                grade: part.grade,
                kind: part.kind,
                trials,
                observations,
                worst_margin,
                tolerance: part.tolerance,
                worst_instance: worst.map(|(_, v)| v).unwrap_or(Value::Null),
                pass: observations > 0 && errors.is_empty() && !failing,
                runtime_ms,
                resamples,
                reverified,
                errors,
            }
        })
        .collect()
}

/// Runs one check (with or without the `check_` prefix) and returns one report per part.
pub fn run_check(name: &str, ens: &EnsembleSpec, spec: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    ens.validate()?;
    let def = find(name).ok_or_else(|| Error::InvalidParameter(format!("unknown check {name}")))?;
    Ok(run_def(def, ens, spec))
}

/// Runs every check in [`check_names`] order.
pub fn run_all(ens: &EnsembleSpec, spec: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    ens.validate()?;
    Ok(CHECKS.iter().flat_map(|d| run_def(d, ens, spec)).collect())
}

/// True when every theorem-grade report passes; evidence reports are ignored.
pub fn theorems_pass(reports: &[CheckReport]) -> bool {
    reports
        .iter()
        .filter(|r| r.grade == Grade::Theorem)
        .all(|r| r.pass)
}

pub fn to_jsonl(reports: &[CheckReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn render_table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:<8}  {:<10}  {:>6}  {:>12}  {:>9}  result",
        "name", "grade", "kind", "trials", "worst", "tol"
    );
    for r in reports {
        let verdict = match (r.pass, r.grade) {
            (true, _) => "pass",
            (false, Grade::Theorem) => "FAIL",
            (false, Grade::Evidence) => "flag",
        };
        let grade = match r.grade {
            Grade::Theorem => "theorem",
            Grade::Evidence => "evidence",
        };
        let kind = match r.kind {
            Kind::Inequality => "inequality",
            Kind::Identity => "identity",
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:<8}  {:<10}  {:>6}  {:>12.3e}  {:>9.1e}  {}",
            r.name, grade, kind, r.trials, r.worst_margin, r.tolerance, verdict
        );
        for e in r.errors.iter().take(3) {
            let _ = writeln!(out, "    error: {e}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(trial_seed(42, 2, 0, 0), trial_seed(42, 2, 0, 0));
        assert_ne!(trial_seed(42, 2, 0, 0), trial_seed(42, 3, 0, 0));
        assert_ne!(trial_seed(42, 2, 0, 0), trial_seed(42, 2, 1, 0));
        assert_ne!(trial_seed(42, 2, 0, 0), trial_seed(42, 2, 0, 1));
    }

    #[test]
    fn names_resolve_with_and_without_prefix() {
        for n in check_names() {
            assert!(find(n).is_some());
            assert!(find(&format!("check_{n}")).is_some());
        }
        assert!(find("no_such_check").is_none());
    }

    #[test]
    fn margins_are_normalized() {
        let o = Obs {
            part: 0,
            label: String::new(),
            lhs: 3.0,
            rhs: 1.0,
            est_error: 0.0,
        };
        assert_eq!(o.margin(), -0.5);
        assert_eq!(o.deviation(), 0.5);
        let inf = Obs { rhs: f64::INFINITY, ..o };
        assert_eq!(inf.margin(), f64::INFINITY);
    }
}
