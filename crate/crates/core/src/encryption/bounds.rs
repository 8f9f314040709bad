use rayon::prelude::*;
use serde::Serialize;

use super::closed_form::{adaptive_cutoff, encrypt_closed_form_at, i_closed_form, DEFAULT_MAX_CUTOFF};
use super::EncryptionParams;
use crate::fock::PureFockState;
use crate::special_math::log_binomial;
use crate::{Error, Result, C64};

/// Both sides of the one-photon step identity for the diagonal of
/// `rho_i = E(|i><i|)`:
///
/// ```text
/// <a|rho_{i+1}|a> - <a|rho_i|a>
///   = -<a|rho_i|a> / (1 + 2 sigma^2)
///     + x^{a+i+1} / (1 + 2 sigma^2) * sum_{k=1}^{min(a, i+1)} C(a,k) C(i,k-1) y^{2k}
/// ```
///
/// Returns `(lhs, rhs)`.
pub fn diagonal_recurrence(i: usize, a: usize, params: &EncryptionParams) -> (f64, f64) {
    let cur = i_closed_form(a, a, i, i, params);
    let next = i_closed_form(a, a, i + 1, i + 1, params);
    let lhs = next - cur;
    let upper = a.min(i + 1);
    let mut sum = 0.0;
    if upper >= 1 {
        let log_terms: Vec<f64> = (1..=upper)
            .map(|k| {
                log_binomial(a as u64, k as u64) + log_binomial(i as u64, k as u64 - 1) + 2.0 * k as f64 * params.ln_y()
            })
            .collect();
        let pre = (a + i + 1) as f64 * params.ln_x() - params.ln_norm();
        sum = log_terms.iter().map(|t| (t + pre).exp()).sum();
    }
    let rhs = -cur / (1.0 + 2.0 * params.sigma_sq()) + sum;
    (lhs, rhs)
}

/// Bound `y (1 + y)^i` on `||rho_{i+1} - rho_i||_1 / 2`.
pub fn diagonal_step_bound(i: usize, params: &EncryptionParams) -> f64 {
    let y = params.y();
    y * (1.0 + y).powi(i as i32)
}

/// Bound on `||rho_i - rho_j||_1 / 2` for `i < j <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairBound {
    /// `(n / (2 sigma^2)) (1 + 1/(2 sigma^2))^n`.
    pub bound: f64,
    /// `2^n n sigma^{-2} / 2`, valid when `sigma^2 >= 1/2`.
    pub simplified: Option<f64>,
}

pub fn diagonal_pair_distance_bound(i: usize, j: usize, n: usize, params: &EncryptionParams) -> Result<PairBound> {
    if !(i < j && j <= n) {
        return Err(Error::InvalidParameter(format!("need i < j <= n, got i={i}, j={j}, n={n}")));
    }
    let y = params.y();
    let bound = n as f64 * y * (1.0 + y).powi(n as i32);
    let simplified = (params.sigma_sq() >= 0.5 * (1.0 - 1e-12))
        .then(|| 2f64.powi(n as i32) * n as f64 / params.sigma_sq() / 2.0);
    Ok(PairBound { bound, simplified })
}

/// A measured half trace norm and the truncation error it carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalDistance {
    pub measured: f64,
    pub tail: f64,
    pub cutoff: usize,
}

/// `||E(|i><i|) - E(|j><j|)||_1 / 2`. Both images are diagonal, so this is
/// half the l1 distance of their diagonals plus half of each truncated tail.
pub fn diagonal_pair_distance(i: usize, j: usize, params: &EncryptionParams) -> Result<DiagonalDistance> {
    let top = i.max(j);
    let mut w = vec![0.0; top + 1];
    w[i] = 1.0;
    let (c1, _) = adaptive_cutoff(&w, params, DEFAULT_MAX_CUTOFF)?;
    w[i] = 0.0;
    w[j] = 1.0;
    let (c2, _) = adaptive_cutoff(&w, params, DEFAULT_MAX_CUTOFF)?;
    let cutoff = c1.max(c2);
    let (mut l1, mut si, mut sj) = (0.0, 0.0, 0.0);
    for a in 0..=cutoff {
        let (p, q) = (i_closed_form(a, a, i, i, params), i_closed_form(a, a, j, j, params));
        l1 += (p - q).abs();
        si += p;
        sj += q;
    }
    let tail = 0.5 * ((1.0 - si).max(0.0) + (1.0 - sj).max(0.0));
    Ok(DiagonalDistance { measured: 0.5 * l1, tail, cutoff })
}

/// Off-diagonal row sum `sum_a |<a|E(|i><i+k|)|a+k>|` against its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowSum {
    pub measured: f64,
    /// Rigorous bound on the part beyond the cutoff.
    pub tail: f64,
    /// `((1 + 2 sigma^2) / (4 sigma^4))^k`.
    pub bound: f64,
    /// `sigma^{-2k}`.
    pub simplified: f64,
    pub satisfied: bool,
}

/// Sums `I_{a,a+k,i,i+k}` for `a <= cutoff`. The remainder is bounded by
/// Cauchy-Schwarz and AM-GM,
/// `I_{a,a+k,i,i+k} <= (<a|rho_i|a> + <a+k|rho_{i+k}|a+k>) / 2`, whose
/// sums beyond the cutoff are the missing traces of `rho_i` and `rho_{i+k}`.
pub fn offdiag_row_sum(i: usize, k: usize, params: &EncryptionParams, cutoff: usize) -> Result<RowSum> {
    if 2.0 * params.sigma_sq() < 1.0 - 1e-12 {
        return Err(Error::HypothesisViolated(format!(
            "off-diagonal row-sum bound needs 2 sigma^2 >= 1, got sigma^2 = {}",
            params.sigma_sq()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("off-diagonal offset k must be at least 1".into()));
    }
    let mut measured = 0.0;
    let (mut si, mut sk) = (0.0, 0.0);
    for a in 0..=cutoff {
        measured += i_closed_form(a, a + k, i, i + k, params);
        si += i_closed_form(a, a, i, i, params);
        sk += i_closed_form(a + k, a + k, i + k, i + k, params);
    }
    // sk misses <a|rho_{i+k}|a> for a < k; those lie below the cutoff and
    // are not part of the tail
    let below: f64 = (0..k).map(|a| i_closed_form(a, a, i + k, i + k, params)).sum();
    let tail = 0.5 * ((1.0 - si).max(0.0) + (1.0 - sk - below).max(0.0));
    let s2 = params.sigma_sq();
    let bound = ((1.0 + 2.0 * s2) / (4.0 * s2 * s2)).powi(k as i32);
    let simplified = s2.powi(-(k as i32));
    Ok(RowSum { measured, tail, bound, simplified, satisfied: measured + tail <= bound })
}

/// The security bound for states with at most `n` photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityBound {
    /// `(2^n n + 8(n+1)) / sigma^2` on `||E(rho) - E(rho')||_1`.
    pub one_norm: f64,
    /// `(2^{n-1} n + 4(n+1)) / sigma^2` on the trace distance.
    pub trace_distance: f64,
}

pub fn security_bound(n: usize, params: &EncryptionParams) -> Result<SecurityBound> {
    if n == 0 {
        return Err(Error::InvalidParameter("photon bound n must be at least 1".into()));
    }
    let s2 = params.sigma_sq();
    if s2 < 2.0 * (1.0 - 1e-12) {
        return Err(Error::HypothesisViolated(format!(
            "the security bound requires sigma^2 >= 2, got sigma^2 = {s2}"
        )));
    }
    let nf = n as f64;
    let p = 2f64.powi(n as i32);
    Ok(SecurityBound {
        one_norm: (p * nf + 8.0 * (nf + 1.0)) / s2,
        trace_distance: (p / 2.0 * nf + 4.0 * (nf + 1.0)) / s2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    /// `||E(rho_A) - E(rho_B)||_1 / 2` on the common cutoff.
    pub measured: f64,
    /// Twice the larger truncation deficit.
    pub tail_error: f64,
    /// Trace-distance bound; `None` when `sigma^2 < 2`.
    pub bound: Option<f64>,
    /// Half the trace norm of the diagonal part of the difference.
    pub diag_part: f64,
    /// Half the sum of absolute off-diagonal entries of the difference.
    pub offdiag_part: f64,
    pub cutoff: usize,
    pub n: usize,
}

impl DistanceReport {
    /// Whether the measured distance respects the bound up to the tail error.
    pub fn satisfied(&self) -> Option<bool> {
        self.bound.map(|b| self.measured <= b + self.tail_error)
    }
}

fn padded(state: &PureFockState, n: usize) -> Result<PureFockState> {
    if state.modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: state.modes() });
    }
    let mut v = state.amplitudes().to_vec();
    v.resize(n + 1, C64::new(0.0, 0.0));
    PureFockState::unnormalized(std::sync::Arc::new(crate::fock::FockBasis::single_mode(n)), v)
}

/// Trace distance between two encrypted single-mode states on a common
/// adaptive cutoff, with its diagonal/off-diagonal split and the bound for
/// `n = max` photon cap of the two states.
pub fn encrypted_distance(a: &PureFockState, b: &PureFockState, params: &EncryptionParams) -> Result<DistanceReport> {
    let n = a.max_photons().max(b.max_photons()).max(1);
    let (pa, pb) = (padded(a, n)?, padded(b, n)?);
    let wa: Vec<f64> = pa.amplitudes().iter().map(|l| l.norm_sqr()).collect();
    let wb: Vec<f64> = pb.amplitudes().iter().map(|l| l.norm_sqr()).collect();
    let (ca, _) = adaptive_cutoff(&wa, params, DEFAULT_MAX_CUTOFF)?;
    let (cb, _) = adaptive_cutoff(&wb, params, DEFAULT_MAX_CUTOFF)?;
    let cutoff = ca.max(cb);
    let (ea, eb) = rayon::join(
        || encrypt_closed_form_at(&pa, params, cutoff),
        || encrypt_closed_form_at(&pb, params, cutoff),
    );
    let (ea, eb) = (ea?, eb?);
    let diff = ea.matrix.entries.sub(&eb.matrix.entries)?;
    let measured = 0.5 * diff.trace_norm();
    let diag_part = 0.5 * diff.diagonal(0).iter().map(|v| v.re.abs()).sum::<f64>();
    let offdiag_part: f64 = (1..=diff.bandwidth())
        .into_par_iter()
        .map(|k| diff.diagonal(k).iter().map(|v| v.norm()).sum::<f64>())
        .sum();
    let bound = match security_bound(n, params) {
        Ok(b) => Some(b.trace_distance),
        Err(Error::HypothesisViolated(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(DistanceReport {
        measured,
        tail_error: 2.0 * ea.matrix.tail_deficit.max(eb.matrix.tail_deficit),
        bound,
        diag_part,
        // each stored upper entry stands for itself and its mirror image
        offdiag_part,
        cutoff,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s2: f64) -> EncryptionParams {
        EncryptionParams::from_sigma_sq(s2).unwrap()
    }

    fn fock(k: usize) -> PureFockState {
        let mut v = vec![C64::new(0.0, 0.0); k + 1];
        v[k] = C64::new(1.0, 0.0);
        PureFockState::single_mode(v).unwrap()
    }

    #[test]
    fn recurrence_examples() {
        let (l, r) = diagonal_recurrence(0, 0, &p(1.0));
        assert!((l - r).abs() < 1e-12);
        let (l, r) = diagonal_recurrence(3, 5, &p(4.0));
        assert!((l - r).abs() < 1e-10);
        let (l, r) = diagonal_recurrence(8, 2, &p(1.0));
        assert!((l - r).abs() < 1e-10);
    }

    #[test]
    fn recurrence_grid() {
        for s2 in [1.0, 4.0] {
            for a in 0..=8 {
                for i in 0..=8 {
                    let (l, r) = diagonal_recurrence(i, a, &p(s2));
                    assert!((l - r).abs() < 1e-10, "a={a} i={i} s2={s2}");
                }
            }
        }
    }

    #[test]
    fn pair_bound_examples() {
        let b = diagonal_pair_distance_bound(0, 1, 1, &p(100.0)).unwrap();
        assert!((b.bound - 0.005025).abs() < 1e-15);
        let b = diagonal_pair_distance_bound(0, 3, 3, &p(2.0)).unwrap();
        assert!((b.simplified.unwrap() - 6.0).abs() < 1e-15);
        assert!(diagonal_pair_distance_bound(0, 1, 1, &p(0.25)).unwrap().simplified.is_none());
        assert!(diagonal_pair_distance_bound(2, 1, 3, &p(2.0)).is_err());
        let m = diagonal_pair_distance(0, 1, &p(25.0)).unwrap();
        let b = diagonal_pair_distance_bound(0, 1, 1, &p(25.0)).unwrap();
        assert!(m.measured + m.tail <= b.bound);
    }

    #[test]
    fn step_bound_holds() {
        for s2 in [1.0, 4.0, 16.0] {
            for i in 0..=5 {
                let m = diagonal_pair_distance(i, i + 1, &p(s2)).unwrap();
                assert!(m.measured + m.tail <= diagonal_step_bound(i, &p(s2)), "i={i} s2={s2}");
            }
        }
    }

    #[test]
    fn row_sum_examples() {
        let r = offdiag_row_sum(2, 3, &p(4.0), 2000).unwrap();
        assert!((r.simplified - 4f64.powi(-3)).abs() < 1e-18);
        let r = offdiag_row_sum(0, 1, &p(0.5), 100).unwrap();
        assert!((r.bound - 2.0).abs() < 1e-15);
        assert!(offdiag_row_sum(0, 1, &p(0.4), 100).is_err());
        assert!(offdiag_row_sum(0, 0, &p(1.0), 100).is_err());
    }

    // The row sum for i = 0 has the closed form
    // sum_a y sqrt(a+1) x^{a+1} / (1 + 2 sigma^2); at sigma^2 = 2 it is
    // 0.410277... (polylogarithm Li_{-1/2}(0.8) / 20, evaluated with mpmath).
    #[test]
    fn row_sum_matches_polylog_value() {
        let r = offdiag_row_sum(0, 1, &p(2.0), 400).unwrap();
        assert!((r.measured - 0.410_277_3).abs() < 1e-6, "{}", r.measured);
        assert!(r.tail < 1e-30 + 1e-12);
        assert!(!r.satisfied, "the stated bound 0.3125 is below the true row sum");
    }

    #[test]
    fn security_bound_examples() {
        assert!((security_bound(1, &p(100.0)).unwrap().trace_distance - 0.09).abs() < 1e-12);
        assert!((security_bound(2, &p(2.0)).unwrap().one_norm - 16.0).abs() < 1e-12);
        assert!(matches!(security_bound(1, &p(1.0)), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn distance_examples() {
        let same = encrypted_distance(&fock(1), &fock(1), &p(4.0)).unwrap();
        assert_eq!(same.measured, 0.0);
        let r = encrypted_distance(&fock(0), &fock(1), &p(25.0)).unwrap();
        assert!(r.measured <= 0.36);
        assert!(r.satisfied().unwrap());
        assert_eq!(r.offdiag_part, 0.0);
        assert!(encrypted_distance(&fock(0), &fock(1), &p(1.0)).unwrap().bound.is_none());
    }

    #[test]
    fn random_pairs_respect_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s2 in [2.0, 16.0] {
            for n in 1..=3 {
                let a = PureFockState::random(1, n, &mut rng).unwrap();
                let b = PureFockState::random(1, n, &mut rng).unwrap();
                let r = encrypted_distance(&a, &b, &p(s2)).unwrap();
                assert!(r.satisfied().unwrap(), "{r:?}");
                // the diagonal/off-diagonal split bounds the total
                assert!(r.measured <= r.diag_part + r.offdiag_part + 1e-12);
            }
        }
    }
}
