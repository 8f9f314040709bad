use std::sync::Arc;

use super::{apply_lifted, key_transform, DisplacementKey, ModeUnitary};
use crate::fock::{displacement_matrix, FockBasis, PureFockState};
use crate::{Error, Result, C64};

/// Norm leakage above which a multimode displacement is reported as a
/// cutoff failure.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Per-mode cutoffs `n_total + ceil(4 g^2 + 8 g) + 10` with
/// `g = max(|alpha_j|, |beta_j|)`.
pub fn mode_cutoffs(n_total: usize, alpha: &DisplacementKey, beta: &DisplacementKey) -> Vec<usize> {
    alpha
        .alphas
        .iter()
        .zip(&beta.alphas)
        .map(|(a, b)| {
            let g = a.abs().max(b.abs());
            n_total + (4.0 * g * g + 8.0 * g).ceil() as usize + 10
        })
        .collect()
}

/// Result of a truncated multimode displacement.
#[derive(Debug, Clone)]
pub struct Displaced {
    /// On the product basis of the requested cutoffs; its norm is short by
    /// the total leakage.
    pub state: PureFockState,
    /// Norm-squared lost on each mode, including input components that
    /// exceed that mode's cutoff.
    pub leakage: Vec<f64>,
}

impl Displaced {
    pub fn total_leakage(&self) -> f64 {
        self.leakage.iter().sum()
    }
}

/// Applies `D(alpha_1) x ... x D(alpha_m)` mode by mode on the product
/// space `0..=cutoffs[j]`.
pub fn multimode_displace(key: &DisplacementKey, state: &PureFockState, cutoffs: &[usize]) -> Result<Displaced> {
    let m = state.modes();
    if key.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: key.len() });
    }
    if cutoffs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: cutoffs.len() });
    }
    let basis = Arc::new(FockBasis::product(cutoffs)?);
    let mut leakage = vec![0.0; m];
    let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
    for (t, a) in state.basis().tuples().iter().zip(state.amplitudes()) {
        match basis.index_of(t) {
            Some(k) => amps[k] = *a,
            None => {
                let j = (0..m).find(|&j| t[j] > cutoffs[j]).expect("tuple outside the product box");
                leakage[j] += a.norm_sqr();
            }
        }
    }

    // lexicographic product order is row-major with the last mode fastest
    let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
    for j in 0..m {
        let alpha = key.alphas[j];
        if alpha.abs() == 0.0 {
            continue;
        }
        let d = displacement_matrix(alpha, cutoffs[j])?;
        let before: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let inner: usize = dims[j + 1..].iter().product();
        let outer: usize = dims[..j].iter().product();
        let n = dims[j];
        let mut slice = vec![C64::new(0.0, 0.0); n];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * n * inner + i;
                for (r, s) in slice.iter_mut().enumerate() {
                    *s = amps[base + r * inner];
                }
                for r in 0..n {
                    amps[base + r * inner] = (0..n).map(|c| d[(r, c)] * slice[c]).sum();
                }
            }
        }
        let after: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        leakage[j] += (before - after).max(0.0);
    }
    if let Some((mode, &worst)) = leakage.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
        if worst > LEAKAGE_LIMIT {
            return Err(Error::Leakage { mode, leakage: worst, limit: LEAKAGE_LIMIT });
        }
    }
    Ok(Displaced { state: PureFockState::unnormalized(basis, amps)?, leakage })
}

/// `|| D(-beta) phi(U) D(alpha) |psi> - phi(U) |psi> ||_2` with
/// `beta = U alpha`, on the standard per-mode cutoffs.
pub fn commutation_residual(u: &ModeUnitary, alpha: &DisplacementKey, psi: &PureFockState) -> Result<f64> {
    let beta = key_transform(u, alpha)?;
    let cutoffs = mode_cutoffs(psi.photon_support(), alpha, &beta);
    let encrypted = multimode_displace(alpha, psi, &cutoffs)?;
    let computed = apply_lifted(u, &encrypted.state)?;
    let decrypted = multimode_displace(&beta.negated(), &computed, &cutoffs)?;
    let reference = apply_lifted(u, psi)?;
    let (reference, _) = reference.embed_into(decrypted.state.basis())?;
    Ok(decrypted
        .state
        .amplitudes()
        .iter()
        .zip(reference.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}
