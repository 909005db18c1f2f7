//! Rényi divergences of one pair over a grid of orders, as CSV rows.

use crate::closed::{hellinger_fractional_trace, petz, renyi_trace, sandwiched, umegaki};
use crate::error::{Error, Result};
use crate::integral::{renyi, renyi_from_hellinger};
use crate::operator::StatePair;
use crate::quad::QuadratureSpec;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// Orders within this distance of 1 are treated as 1.
pub const UNIT_SNAP: f64 = 1e-9;

pub const CSV_HEADER: &str = "alpha,D_alpha,trace_rhs,petz,sandwiched";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    /// `D_alpha` from the hockey-stick integral.
    pub d_alpha: f64,
    /// `D_alpha` from the resolvent trace form (`alpha > 1`) or the
    /// double-integral trace form (`alpha < 1`).
    pub trace_rhs: f64,
    pub petz: f64,
    pub sandwiched: f64,
}

impl SweepRow {
    fn scaled(self, k: f64) -> Self {
        Self {
            alpha: self.alpha,
            d_alpha: self.d_alpha * k,
            trace_rhs: self.trace_rhs * k,
            petz: self.petz * k,
            sandwiched: self.sandwiched * k,
        }
    }
}

/// Parse `start:stop:step` into an increasing grid that includes `stop` when
/// it lies on the grid.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected start:stop:step, got '{text}'")));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("'{s}' in '{text}': {e}")))
    };
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(start > 0.0) || !(step > 0.0) || !(stop >= start) || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "range '{text}' needs 0 < start <= stop and step > 0"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(Error::InvalidParameter(format!("range '{text}' has more than 1e5 points")));
    }
    Ok((0..=n)
        .map(|i| {
            let a = start + i as f64 * step;
            (a * 1e12).round() / 1e12
        })
        .collect())
}

pub fn sweep_row(alpha: f64, pair: &StatePair, spec: &QuadratureSpec) -> Result<SweepRow> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("order {alpha} must be positive")));
    }
    if (alpha - 1.0).abs() <= UNIT_SNAP {
        let d = umegaki(pair).value;
        return Ok(SweepRow {
            alpha,
            d_alpha: d,
            trace_rhs: d,
            petz: d,
            sandwiched: d,
        });
    }
    let d_alpha = renyi(alpha, pair, spec)?.value;
    let trace_rhs = if alpha > 1.0 {
        renyi_trace(alpha, pair, spec)?.value
    } else {
        renyi_from_hellinger(alpha, hellinger_fractional_trace(alpha, pair, spec)?).value
    };
    Ok(SweepRow {
        alpha,
        d_alpha,
        trace_rhs,
        petz: petz(alpha, pair)?.renyi,
        sandwiched: sandwiched(alpha, pair)?.renyi,
    })
}

/// One row per order, in input order; `bits` reports in log base 2.
pub fn sweep(alphas: &[f64], pair: &StatePair, spec: &QuadratureSpec, bits: bool) -> Result<Vec<SweepRow>> {
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("orders must be strictly increasing".into()));
    }
    let k = if bits { std::f64::consts::LOG2_E } else { 1.0 };
    alphas
        .par_iter()
        .map(|&a| sweep_row(a, pair, spec).map(|r| r.scaled(k)))
        .collect()
}

fn cell(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.12e}")
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.alpha,
            cell(r.d_alpha),
            cell(r.trace_rhs),
            cell(r.petz),
            cell(r.sandwiched)
        );
    }
    out
}
