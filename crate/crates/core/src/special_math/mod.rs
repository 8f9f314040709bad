//! Hermite polynomials and functions, log-space combinatorics, and
//! composite Gauss-Legendre quadrature.
//!
//! Everything here is pure; tables are built once and shared.

mod combinatorics;
mod hermite;
mod quadrature;

pub use combinatorics::{
    binomial_u128, geometric_binomial_sum, lemma7_inequality_check, log_binomial, log_factorial,
    LogFactorialTable,
};
pub use hermite::{hermite_h, hermite_psi, hermite_psi_all, MAX_HERMITE_ORDER};
pub use quadrature::{gauss_legendre_rule, BoxGrid, Interval, QuadratureGrid};
