//! The displacement-key encryption channel on a single mode.
//!
//! A key `alpha = u + i v` with `u, v ~ N(0, sigma)` is drawn and the state
//! is displaced by `D(alpha)`. Averaged over keys, the channel maps
//! `|i><j|` to a matrix with elements `I_{a,b,i,j} = <a|E(|i><j|)|b>`,
//! which vanish unless `b - a = j - i`. This module builds encrypted
//! densities from a closed form for `I`, from direct quadrature of its
//! position-basis integral, and by Monte-Carlo averaging over keys, and
//! evaluates the trace-distance bounds that make the scheme secure.

mod bounds;
mod closed_form;
mod monte_carlo;
mod params;
mod quadrature;

pub use bounds::{
    diagonal_pair_distance, diagonal_pair_distance_bound, diagonal_recurrence, diagonal_step_bound,
    encrypted_distance, offdiag_row_sum, security_bound, DiagonalDistance, DistanceReport, PairBound,
    RowSum, SecurityBound,
};
pub use closed_form::{
    adaptive_cutoff, encrypt_closed_form, encrypt_closed_form_at, encrypt_closed_form_with_limit,
    i_closed_form, EncryptedDensity, Method, DEFAULT_MAX_CUTOFF,
};
pub use monte_carlo::encrypt_monte_carlo;
pub use params::EncryptionParams;
pub use quadrature::{encrypt_quadrature, i_quadrature, i_quadrature_cells, QUADRATURE_MAX_INDEX, QUADRATURE_MAX_SIGMA_SQ};
