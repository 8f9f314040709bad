//! Displacement-key homomorphic encryption of linear-optical quantum
//! computation.
//!
//! The crate builds encrypted Fock-space density matrices three ways
//! (closed form, direct quadrature of the position-basis integral, and
//! Monte-Carlo averaging over displacement keys), checks the trace-distance
//! bounds for the encryption channel, and simulates the passive and
//! adaptive client/server protocols, in-process or over TCP.
//!
//! Module map:
//!
//! - [`special_math`]: Hermite functions, log-space combinatorics, Gauss-Legendre grids.
//! - [`fock`]: truncated Fock states, Hermitian band matrices, displacement operators.
//! - [`encryption`]: the displacement channel and its security quantities.
//! - [`optics`]: mode unitaries, their Fock-space lift, multimode displacements.
//! - [`protocol`]: Alice/Bob protocol runs and the wire format.

pub mod encryption;
pub mod error;
pub mod fock;
pub mod optics;
pub mod protocol;
pub mod special_math;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
