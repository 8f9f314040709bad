use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fock::PureFockState;
use crate::{Error, Result, C64};

/// Outcome of a photon-number measurement on one mode.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    pub probability: f64,
    /// Renormalized projection onto the outcome.
    pub post_state: PureFockState,
    /// Marginal probabilities of every outcome `0..=max occupation`.
    pub probabilities: Vec<f64>,
}

/// Born-rule marginal of `mode`, normalized by the state's norm.
pub fn outcome_probabilities(state: &PureFockState, mode: usize) -> Result<Vec<f64>> {
    if mode >= state.modes() {
        return Err(Error::InvalidParameter(format!("mode {mode} out of range for {} modes", state.modes())));
    }
    let tuples = state.basis().tuples();
    let top = tuples.iter().map(|t| t[mode]).max().unwrap_or(0);
    let mut p = vec![0.0; top + 1];
    for (t, a) in tuples.iter().zip(state.amplitudes()) {
        p[t[mode]] += a.norm_sqr();
    }
    let total: f64 = p.iter().sum();
    if total == 0.0 {
        return Err(Error::NotNormalized { norm_sq: 0.0 });
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Photon-number measurement of `mode` with the uniform draw `u` in [0, 1).
/// Only outcomes of positive probability can be selected.
pub fn measure_with(state: &PureFockState, mode: usize, u: f64) -> Result<Measurement> {
    let probabilities = outcome_probabilities(state, mode)?;
    let mut outcome = None;
    let mut cum = 0.0;
    for (o, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        outcome = Some(o);
        if u < cum {
            break;
        }
    }
    let outcome = outcome.expect("some outcome has positive probability");
    let amps: Vec<C64> = state
        .basis()
        .tuples()
        .iter()
        .zip(state.amplitudes())
        .map(|(t, a)| if t[mode] == outcome { *a } else { C64::new(0.0, 0.0) })
        .collect();
    let mut post_state = PureFockState::unnormalized(state.basis().clone(), amps)?;
    post_state.normalize()?;
    Ok(Measurement { outcome, probability: probabilities[outcome], post_state, probabilities })
}

/// Measures `mode` with a draw from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn measure_mode(state: &PureFockState, mode: usize, seed: u64) -> Result<Measurement> {
    let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
    measure_with(state, mode, u)
}
