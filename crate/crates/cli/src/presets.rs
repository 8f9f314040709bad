use std::sync::Arc;

use dispkey::fock::{FockBasis, PureFockState};
use dispkey::optics::ModeUnitary;
use dispkey::{Error, Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Single-mode state from `fock:k`, `plus:k`, `random:SEED` (at most
/// `n` photons) or a state file.
pub fn single_mode_state(spec: &str, n: usize) -> Result<PureFockState> {
    let state = match spec.split_once(':') {
        Some(("fock", k)) => PureFockState::number_state(&[parse_index(k)?], parse_index(k)?)?,
        Some(("plus", k)) => {
            let k = parse_index(k)?;
            if k == 0 {
                return Err(Error::InvalidParameter("plus:k needs k >= 1".into()));
            }
            let mut amps = vec![C64::new(0.0, 0.0); k + 1];
            amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            amps[k] = amps[0];
            PureFockState::new(Arc::new(FockBasis::single_mode(k)), amps)?
        }
        Some(("random", seed)) => PureFockState::random(1, n, &mut ChaCha8Rng::seed_from_u64(parse_seed(seed)?))?,
        _ => PureFockState::read(spec)?,
    };
    if state.modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: state.modes() });
    }
    Ok(state)
}

/// `random:SEED` (Haar) or a unitary file.
pub fn unitary(spec: &str, modes: usize) -> Result<ModeUnitary> {
    match spec.split_once(':') {
        Some(("random", seed)) => Ok(ModeUnitary::haar_random(modes, parse_seed(seed)?)),
        _ => {
            let u = ModeUnitary::read(spec)?;
            if u.m() != modes {
                return Err(Error::DimensionMismatch { expected: modes, found: u.m() });
            }
            Ok(u)
        }
    }
}

fn parse_index(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::InvalidParameter(format!("not a photon number: {s:?}")))
}

fn parse_seed(s: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::InvalidParameter(format!("not a seed: {s:?}")))
}
