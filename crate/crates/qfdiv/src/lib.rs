//! Quantum f-divergences defined through integrals of hockey-stick divergences.
//!
//! `D_f(rho||sigma) = int_1^inf f''(g) E_g(rho||sigma) + g^-3 f''(1/g) E_g(sigma||rho) dg`
//! with `E_g(rho||sigma) = Tr(rho - g sigma)_+`. The crate evaluates this
//! integral for arbitrary generators ([`generator`], [`integral`]), provides
//! closed forms and trace representations that serve as independent routes
//! ([`closed`]), and a seeded property suite over random state pairs
//! ([`checks`]). [`sweep`] and [`cli`] back the `qfdiv` binary.

#![forbid(unsafe_code)]

pub mod checks;
pub mod cli;
pub mod closed;
pub mod error;
pub mod generator;
pub mod integral;
pub mod linalg;
pub mod operator;
pub mod quad;
pub mod sweep;

pub use error::{Error, Result};
