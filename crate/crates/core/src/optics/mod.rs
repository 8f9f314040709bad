//! Mode unitaries and their action on multimode Fock space.
//!
//! Convention: `phi(U) a_i^dagger phi(U)^dagger = sum_j U_{j,i} a_j^dagger`,
//! so a photon in mode `i` is mapped to column `i` of `U`, lifts compose as
//! `phi(U) phi(V) = phi(U V)`, and a displacement key transforms as
//! `beta = U alpha`.

mod displace;
mod lift;
mod permanent;
mod unitary;

pub use displace::{commutation_residual, mode_cutoffs, multimode_displace, Displaced, LEAKAGE_LIMIT};
pub use lift::{apply_lifted, lift_unitary, lift_unitary_permanents, FockSector, SECTOR_LIMIT, STATE_LIMIT};
pub use permanent::permanent;
pub use unitary::{key_transform, DisplacementKey, ModeUnitary, UnitaryFile};
