use nalgebra::DMatrix;
use rayon::prelude::*;

use super::EncryptionParams;
use crate::fock::{DensityMatrix, HermitianMatrix, PureFockState};
use crate::special_math::log_binomial;
use crate::{Error, Result, C64};

/// Largest cutoff the adaptive rule may reach before giving up.
pub const DEFAULT_MAX_CUTOFF: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// An encrypted single-mode density on `0..=cutoff`.
#[derive(Debug, Clone)]
pub struct EncryptedDensity {
    pub matrix: DensityMatrix,
    pub params: EncryptionParams,
    pub method: Method,
    pub cutoff: usize,
    pub mc_seed: Option<u64>,
    /// Per-entry standard error of the Monte-Carlo mean.
    pub std_error: Option<DMatrix<f64>>,
}

/// `I_{a,b,i,j} = <a|E(|i><j|)|b>`.
///
/// Single free index `i2` with `i1 = a - i2`, `i3 = i2 + b - a`,
/// `i4 = i - i2`:
///
/// ```text
/// I = x^{(a+b+i+j)/2} / (1 + 2 sigma^2)
///     * sum_{i2} y^{i2+i3} sqrt(C(a,i2) C(b,i3) C(i,i2) C(j,i3))
/// ```
///
/// Every term is positive, so the sum is taken as a log-sum-exp.
pub fn i_closed_form(a: usize, b: usize, i: usize, j: usize, params: &EncryptionParams) -> f64 {
    if b + i != a + j {
        return 0.0;
    }
    let lo = a.saturating_sub(b);
    let hi = a.min(i);
    if lo > hi {
        return 0.0;
    }
    let ln_y = params.ln_y();
    let mut terms = Vec::with_capacity(hi - lo + 1);
    for i2 in lo..=hi {
        let i3 = i2 + b - a;
        let lb = log_binomial(a as u64, i2 as u64)
            + log_binomial(b as u64, i3 as u64)
            + log_binomial(i as u64, i2 as u64)
            + log_binomial(j as u64, i3 as u64);
        terms.push((i2 + i3) as f64 * ln_y + 0.5 * lb);
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    let common = 0.5 * (a + b + i + j) as f64 * params.ln_x() - params.ln_norm();
    (common + max + sum.ln()).exp()
}

fn single_mode_amplitudes(state: &PureFockState) -> Result<&[C64]> {
    if state.modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: state.modes() });
    }
    Ok(state.amplitudes())
}

/// Grows the cutoff from `ceil((1 + 2 sigma^2) ln(1/eps)) + n` by doubling
/// until the truncated diagonal misses at most `tail_eps` of the state's
/// weight. Returns the cutoff and the missing weight.
pub fn adaptive_cutoff(weights: &[f64], params: &EncryptionParams, limit: usize) -> Result<(usize, f64)> {
    let n = weights.len().saturating_sub(1);
    let total: f64 = weights.iter().sum();
    let start = ((1.0 + 2.0 * params.sigma_sq()) * (1.0 / params.tail_eps()).ln()).ceil() as usize + n;
    let mut cutoff = start.max(1).min(limit);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut done = 0usize;
    loop {
        for a in done..=cutoff {
            let v: f64 = weights.iter().enumerate().map(|(i, w)| w * i_closed_form(a, a, i, i, params)).sum();
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        done = cutoff + 1;
        let deficit = total - (sum + comp);
        if deficit <= params.tail_eps() {
            return Ok((cutoff, deficit.max(0.0)));
        }
        if cutoff >= limit {
            return Err(Error::CutoffExceeded { limit, deficit });
        }
        cutoff = (cutoff * 2).min(limit);
    }
}

/// `E(|psi><psi|)` with the adaptive cutoff.
pub fn encrypt_closed_form(state: &PureFockState, params: &EncryptionParams) -> Result<EncryptedDensity> {
    encrypt_closed_form_with_limit(state, params, DEFAULT_MAX_CUTOFF)
}

pub fn encrypt_closed_form_with_limit(
    state: &PureFockState,
    params: &EncryptionParams,
    limit: usize,
) -> Result<EncryptedDensity> {
    let lambda = single_mode_amplitudes(state)?;
    let weights: Vec<f64> = lambda.iter().map(|l| l.norm_sqr()).collect();
    let (cutoff, _) = adaptive_cutoff(&weights, params, limit)?;
    encrypt_closed_form_at(state, params, cutoff)
}

/// `E(|psi><psi|)` on a fixed cutoff; the tail deficit is the state's
/// weight minus the truncated trace.
pub fn encrypt_closed_form_at(
    state: &PureFockState,
    params: &EncryptionParams,
    cutoff: usize,
) -> Result<EncryptedDensity> {
    let lambda = single_mode_amplitudes(state)?;
    let n = lambda.len() - 1;
    let rows: Vec<Vec<C64>> = (0..=cutoff)
        .into_par_iter()
        .map(|a| {
            (0..=n.min(cutoff - a))
                .map(|k| {
                    (0..=n - k)
                        .map(|i| lambda[i] * lambda[i + k].conj() * i_closed_form(a, a + k, i, i + k, params))
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut m = HermitianMatrix::zeros(cutoff + 1, n);
    for (a, row) in rows.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            m.set(a, a + k, *v);
        }
    }
    let weight: f64 = lambda.iter().map(|l| l.norm_sqr()).sum();
    let tail_deficit = (weight - m.trace()).max(0.0);
    Ok(EncryptedDensity {
        matrix: DensityMatrix::new(m, tail_deficit),
        params: *params,
        method: Method::ClosedForm,
        cutoff,
        mc_seed: None,
        std_error: None,
    })
}
