use std::f64::consts::PI;

/// Largest order accepted by the Hermite routines.
pub const MAX_HERMITE_ORDER: usize = 200;

// ln(1e150); the scaled recurrence renormalizes whenever it crosses 1e150.
const RESCALE: f64 = 1e150;
const LN_RESCALE: f64 = 345.387_763_949_606_9;

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence
/// `H_{n+1} = 2x H_n - 2n H_{n-1}`.
///
/// The result overflows to infinity for large `n` and `|x|`; use
/// [`hermite_psi`] when only the normalized function is needed.
pub fn hermite_h(n: usize, x: f64) -> f64 {
    assert!(n <= MAX_HERMITE_ORDER, "Hermite order {n} exceeds {MAX_HERMITE_ORDER}");
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Hermite function `psi_n(x) = exp(-x^2/2) H_n(x) / sqrt(2^n n! sqrt(pi))`.
///
/// Uses the orthonormal recurrence
/// `psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}` on a scaled
/// copy of the values, carrying the scale and the Gaussian factor as a
/// logarithm so neither the polynomial growth nor `exp(-x^2/2)` can
/// overflow or underflow before the final multiplication.
pub fn hermite_psi(n: usize, x: f64) -> f64 {
    assert!(n <= MAX_HERMITE_ORDER, "Hermite order {n} exceeds {MAX_HERMITE_ORDER}");
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        }
    }
    finish(cur, log_scale, x)
}

/// All Hermite functions `psi_0(x) ..= psi_nmax(x)` at one point.
pub fn hermite_psi_all(nmax: usize, x: f64) -> Vec<f64> {
    assert!(nmax <= MAX_HERMITE_ORDER, "Hermite order {nmax} exceeds {MAX_HERMITE_ORDER}");
    let mut out = Vec::with_capacity(nmax + 1);
    let mut scaled = Vec::with_capacity(nmax + 1);
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    scaled.push((cur, log_scale));
    for k in 0..nmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        }
        scaled.push((cur, log_scale));
    }
    out.extend(scaled.into_iter().map(|(v, s)| finish(v, s, x)));
    out
}

fn finish(scaled: f64, log_scale: f64, x: f64) -> f64 {
    if scaled == 0.0 {
        return 0.0;
    }
    let log_mag = scaled.abs().ln() + log_scale - 0.5 * x * x - 0.25 * PI.ln();
    scaled.signum() * log_mag.exp()
}
