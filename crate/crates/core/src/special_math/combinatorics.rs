use std::f64::consts::PI;

use crate::{Error, Result};

// Below this many factors ln C(n, k) is summed term by term; above it the
// Stirling-difference form is used.
const DIRECT_TERMS: u64 = 4096;
const SMALL_FACTORIALS: usize = 256;

/// Precomputed `ln(k!)` for `k = 0..=max_index`.
#[derive(Debug, Clone)]
pub struct LogFactorialTable {
    pub max_index: usize,
    pub values: Vec<f64>,
}

impl LogFactorialTable {
    pub fn new(max_index: usize) -> Self {
        // Neumaier-compensated running sum of ln k.
        let mut values = Vec::with_capacity(max_index + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        values.push(0.0);
        for k in 1..=max_index {
            let term = (k as f64).ln();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            values.push(sum + comp);
        }
        Self { max_index, values }
    }

    /// `ln(k!)`, panicking past `max_index`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn log_binomial(&self, n: usize, k: usize) -> f64 {
        assert!(k <= n, "log_binomial: k = {k} exceeds n = {n}");
        self.values[n] - self.values[k] - self.values[n - k]
    }
}

fn small_table() -> &'static LogFactorialTable {
    static TABLE: std::sync::OnceLock<LogFactorialTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| LogFactorialTable::new(SMALL_FACTORIALS))
}

// ln m! - (m ln m - m + ln(2 pi m)/2), the Stirling remainder, for m > 256.
fn stirling_remainder(m: f64) -> f64 {
    let m2 = m * m;
    (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * m2)) / m2) / m
}

/// `ln(n!)`.
pub fn log_factorial(n: u64) -> f64 {
    if n as usize <= SMALL_FACTORIALS {
        return small_table().get(n as usize);
    }
    let m = n as f64;
    m * m.ln() - m + 0.5 * (2.0 * PI * m).ln() + stirling_remainder(m)
}

/// `ln C(n, k)`.
///
/// Short products are summed factor by factor with compensation; long ones
/// use the Stirling-difference form, which avoids cancelling the large
/// `ln n!` terms against each other. Panics if `k > n`.
pub fn log_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "log_binomial: k = {k} exceeds n = {n}");
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k <= DIRECT_TERMS {
        let base = (n - k) as f64;
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for j in 1..=k {
            let term = (base / j as f64).ln_1p();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        return sum + comp;
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    -kf * (kf / nf).ln() - rest * (-kf / nf).ln_1p() - 0.5 * (2.0 * PI * kf * rest / nf).ln()
        + stirling_remainder(nf)
        - stirling_remainder(kf)
        - stirling_remainder(rest)
}

/// Exact `C(n, k)`, or `None` on overflow. Zero when `k > n`.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 0..k {
        // c * (n - j) is divisible by j + 1 at every step
        c = c.checked_mul((n - j) as u128)? / (j as u128 + 1);
    }
    Some(c)
}

/// Closed form `x^k / (1-x)^(k+1)` of `sum_{a >= k} C(a, k) x^a`.
pub fn geometric_binomial_sum(x: f64, k: u32) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "geometric_binomial_sum needs 0 < x < 1, got {x}"
        )));
    }
    Ok((k as f64 * x.ln() - (k as f64 + 1.0) * (-x).ln_1p()).exp())
}

/// Whether `C(a, i2) C(i, i2) <= C(a+k, i2+k) C(i+k, i2+k)`.
pub fn lemma7_inequality_check(a: u64, i: u64, i2: u64, k: u64) -> bool {
    let exact = || -> Option<bool> {
        let lhs = binomial_u128(a, i2)?.checked_mul(binomial_u128(i, i2)?)?;
        let rhs = binomial_u128(a + k, i2 + k)?.checked_mul(binomial_u128(i + k, i2 + k)?)?;
        Some(lhs <= rhs)
    };
    if let Some(v) = exact() {
        return v;
    }
    if i2 > a || i2 > i {
        return true;
    }
    let lhs = log_binomial(a, i2) + log_binomial(i, i2);
    let rhs = log_binomial(a + k, i2 + k) + log_binomial(i + k, i2 + k);
    lhs <= rhs + 1e-12 * rhs.abs().max(1.0)
}
