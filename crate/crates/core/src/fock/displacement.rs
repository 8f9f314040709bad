use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::special_math::log_factorial;
use crate::{Error, Result, C64};

/// Complex displacement `alpha = u + i v`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DisplacementAmplitude {
    pub u: f64,
    pub v: f64,
}

impl DisplacementAmplitude {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite displacement ({u}, {v})")));
        }
        Ok(Self { u, v })
    }

    pub fn from_complex(alpha: C64) -> Self {
        Self { u: alpha.re, v: alpha.im }
    }

    pub fn to_complex(self) -> C64 {
        C64::new(self.u, self.v)
    }

    pub fn abs(self) -> f64 {
        self.u.hypot(self.v)
    }
}

impl From<C64> for DisplacementAmplitude {
    fn from(alpha: C64) -> Self {
        Self::from_complex(alpha)
    }
}

/// `e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for `n = 0..=cutoff`.
pub fn coherent_amplitudes(alpha: DisplacementAmplitude, cutoff: usize) -> Vec<C64> {
    let a = alpha.to_complex();
    let r = a.norm();
    let mut out = Vec::with_capacity(cutoff + 1);
    out.push(C64::new((-0.5 * r * r).exp(), 0.0));
    if r == 0.0 {
        out.resize(cutoff + 1, C64::new(0.0, 0.0));
        return out;
    }
    let (ln_r, theta) = (r.ln(), a.arg());
    for n in 1..=cutoff {
        let ln_mag = -0.5 * r * r + n as f64 * ln_r - 0.5 * log_factorial(n as u64);
        out.push(C64::from_polar(ln_mag.exp(), n as f64 * theta));
    }
    out
}

/// Working dimension used to report a cutoff-`cutoff` block of `D(alpha)`.
pub fn buffer_dim(cutoff: usize, alpha_abs: f64) -> usize {
    cutoff + (8.0 * alpha_abs + 4.0 * alpha_abs * alpha_abs).ceil() as usize + 10
}

// Spectral decomposition of the truncated a + a^dagger, one per dimension.
struct Quadrature {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

fn position_spectrum(dim: usize) -> Arc<Quadrature> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Quadrature>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(q) = cache.lock().expect("cache lock").get(&dim) {
        return Arc::clone(q);
    }
    let x = DMatrix::from_fn(dim, dim, |r, c| {
        if r + 1 == c {
            (c as f64).sqrt()
        } else if c + 1 == r {
            (r as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(x);
    let q = Arc::new(Quadrature { vectors: eig.eigenvectors, values: eig.eigenvalues.iter().copied().collect() });
    cache.lock().expect("cache lock").insert(dim, Arc::clone(&q));
    q
}

/// The `rows x cols` upper-left block of `D(alpha)`, exponentiated on a
/// space of dimension `dim`.
///
/// With `alpha = r e^{i theta}` the generator is `i r R (a + a^dagger) R^dagger`
/// for the phase rotation `R = e^{i (theta - pi/2) N}`, so
/// `D_mn = e^{i (m-n)(theta - pi/2)} sum_k Q_mk Q_nk e^{i r lambda_k}` where
/// `Q diag(lambda) Q^T` diagonalizes the truncated `a + a^dagger`.
fn block_on(alpha: DisplacementAmplitude, rows: usize, cols: usize, dim: usize) -> Result<DMatrix<C64>> {
    let a = alpha.to_complex();
    if !a.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite displacement {a}")));
    }
    if rows > dim || cols > dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rows.max(cols) });
    }
    if a.norm() == 0.0 {
        return Ok(DMatrix::from_fn(rows, cols, |m, n| C64::new(if m == n { 1.0 } else { 0.0 }, 0.0)));
    }
    let (r, phi) = (a.norm(), a.arg() - FRAC_PI_2);
    let spec = position_spectrum(dim);
    let top = spec.vectors.rows(0, rows);
    let left = spec.vectors.rows(0, cols);
    let mut cos_part = left.transpose();
    let mut sin_part = left.transpose();
    for (k, lambda) in spec.values.iter().enumerate() {
        let (s, c) = (r * lambda).sin_cos();
        cos_part.row_mut(k).scale_mut(c);
        sin_part.row_mut(k).scale_mut(s);
    }
    let re = top * cos_part;
    let im = top * sin_part;
    let out = DMatrix::from_fn(rows, cols, |m, n| {
        C64::new(re[(m, n)], im[(m, n)]) * C64::from_polar(1.0, (m as f64 - n as f64) * phi)
    });
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::BufferTooSmall { alpha_abs: r });
    }
    Ok(out)
}

/// `(cutoff+1) x (cutoff+1)` truncation of `D(alpha)` with the standard buffer.
pub fn displacement_matrix(alpha: DisplacementAmplitude, cutoff: usize) -> Result<DMatrix<C64>> {
    displacement_block(alpha, cutoff + 1, cutoff + 1)
}

/// `rows x cols` block of `D(alpha)` with the standard buffer for the
/// larger of the two.
pub fn displacement_block(alpha: DisplacementAmplitude, rows: usize, cols: usize) -> Result<DMatrix<C64>> {
    let cutoff = rows.max(cols).saturating_sub(1);
    block_on(alpha, rows, cols, buffer_dim(cutoff, alpha.abs()))
}

/// As [`displacement_matrix`] but exponentiating on an explicit dimension.
pub fn displacement_matrix_with_dim(alpha: DisplacementAmplitude, cutoff: usize, dim: usize) -> Result<DMatrix<C64>> {
    block_on(alpha, cutoff + 1, cutoff + 1, dim)
}
