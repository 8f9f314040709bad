use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{EncryptedDensity, EncryptionParams, Method};
use crate::fock::{DensityMatrix, HermitianMatrix, PureFockState};
use crate::special_math::{hermite_psi_all, QuadratureGrid};
use crate::{Error, Result, C64};

/// Largest Fock index the quadrature oracle accepts.
pub const QUADRATURE_MAX_INDEX: usize = 8;
/// Largest `sigma^2` the quadrature oracle accepts.
pub const QUADRATURE_MAX_SIGMA_SQ: f64 = 16.0;

const ORDER: usize = 32;
const START_PANELS: usize = 2;
const MAX_PANELS: usize = 32;

/// `I_{a,b,i,j}` by direct quadrature of the position-basis integral
///
/// ```text
/// 1/(2 sqrt(pi) sigma) int du e^{-u^2/(4 sigma^2)}
///     int int dx dy e^{-sigma^2 (x-y)^2} psi_i(x) psi_j(y) psi_a(x+u) psi_b(y+u)
/// ```
///
/// over `u in [-8 sigma, 8 sigma]`, `x, y in [-L, L]` with
/// `L = sqrt(2 max(a,b,i,j) + 1) + 6`, doubling the panel count on every
/// axis until two successive estimates differ by less than `tol`.
pub fn i_quadrature(a: usize, b: usize, i: usize, j: usize, params: &EncryptionParams, tol: f64) -> Result<f64> {
    Ok(i_quadrature_cells(&[[a, b, i, j]], params, tol)?[0])
}

/// Several `[a, b, i, j]` cells on one shared grid; the refinement stops
/// when every cell has converged.
pub fn i_quadrature_cells(cells: &[[usize; 4]], params: &EncryptionParams, tol: f64) -> Result<Vec<f64>> {
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let top = cells.iter().flatten().copied().max().unwrap_or(0);
    if top > QUADRATURE_MAX_INDEX {
        return Err(Error::InvalidParameter(format!(
            "quadrature oracle supports indices up to {QUADRATURE_MAX_INDEX}, got {top}"
        )));
    }
    if params.sigma_sq() > QUADRATURE_MAX_SIGMA_SQ * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "quadrature oracle supports sigma^2 up to {QUADRATURE_MAX_SIGMA_SQ}, got {}",
            params.sigma_sq()
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut panels = START_PANELS;
    let mut prev = evaluate(cells, params, panels)?;
    loop {
        panels *= 2;
        let cur = evaluate(cells, params, panels)?;
        let change = prev.iter().zip(&cur).map(|(p, c)| (p - c).abs()).fold(0.0, f64::max);
        if change < tol {
            return Ok(cur);
        }
        if panels >= MAX_PANELS {
            return Err(Error::QuadratureStalled { tol, last_change: change, panels });
        }
        prev = cur;
    }
}

fn evaluate(cells: &[[usize; 4]], params: &EncryptionParams, panels: usize) -> Result<Vec<f64>> {
    let top = cells.iter().flatten().copied().max().unwrap_or(0);
    let sigma = params.sigma();
    let s2 = params.sigma_sq();
    let half = (2.0 * top as f64 + 1.0).sqrt() + 6.0;
    let xg = QuadratureGrid::composite(-half, half, panels, ORDER)?;
    let ug = QuadratureGrid::composite(-8.0 * sigma, 8.0 * sigma, panels, ORDER)?;
    let nx = xg.len();

    let psi_x: Vec<Vec<f64>> = xg.nodes.iter().map(|&x| hermite_psi_all(top, x)).collect();
    let kernel = DMatrix::from_fn(nx, nx, |p, q| {
        let d = xg.nodes[p] - xg.nodes[q];
        xg.weights[p] * xg.weights[q] * (-s2 * d * d).exp()
    });

    // distinct (j, b) pairs share one kernel product per u node
    let mut pair_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs = Vec::new();
    let cell_pair: Vec<usize> = cells
        .iter()
        .map(|&[_, b, _, j]| {
            *pair_index.entry((j, b)).or_insert_with(|| {
                pairs.push((j, b));
                pairs.len() - 1
            })
        })
        .collect();

    let per_u: Vec<Vec<f64>> = ug
        .nodes
        .par_iter()
        .zip(ug.weights.par_iter())
        .map(|(&u, &wu)| {
            let psi_xu: Vec<Vec<f64>> = xg.nodes.iter().map(|&x| hermite_psi_all(top, x + u)).collect();
            let g = DMatrix::from_fn(nx, pairs.len(), |q, p| {
                let (j, b) = pairs[p];
                psi_x[q][j] * psi_xu[q][b]
            });
            let h = &kernel * g;
            let scale = wu * (-u * u / (4.0 * s2)).exp();
            cells
                .iter()
                .zip(&cell_pair)
                .map(|(&[a, _, i, _], &p)| {
                    let col = h.column(p);
                    scale * (0..nx).map(|r| psi_x[r][i] * psi_xu[r][a] * col[r]).sum::<f64>()
                })
                .collect()
        })
        .collect();

    let norm = 1.0 / (2.0 * std::f64::consts::PI.sqrt() * sigma);
    let mut out = vec![0.0; cells.len()];
    for row in &per_u {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|v| *v *= norm);
    Ok(out)
}

/// `E(|psi><psi|)` on `0..=cutoff` with every `I` taken from quadrature.
pub fn encrypt_quadrature(
    state: &PureFockState,
    params: &EncryptionParams,
    cutoff: usize,
    tol: f64,
) -> Result<EncryptedDensity> {
    if state.modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: state.modes() });
    }
    let lambda = state.amplitudes();
    let n = lambda.len() - 1;
    let mut cells = Vec::new();
    for a in 0..=cutoff {
        for k in 0..=n.min(cutoff - a) {
            for i in 0..=n - k {
                cells.push([a, a + k, i, i + k]);
            }
        }
    }
    let values = i_quadrature_cells(&cells, params, tol)?;
    let mut m = HermitianMatrix::zeros(cutoff + 1, n);
    for (&[a, b, i, j], v) in cells.iter().zip(&values) {
        let cur = m.get(a, b);
        m.set(a, b, cur + lambda[i] * lambda[j].conj() * C64::new(*v, 0.0));
    }
    let weight: f64 = lambda.iter().map(|l| l.norm_sqr()).sum();
    let tail_deficit = (weight - m.trace()).max(0.0);
    Ok(EncryptedDensity {
        matrix: DensityMatrix::new(m, tail_deficit),
        params: *params,
        method: Method::Quadrature,
        cutoff,
        mc_seed: None,
        std_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encryption::{encrypt_closed_form_at, i_closed_form};

    fn p(s2: f64) -> EncryptionParams {
        EncryptionParams::from_sigma_sq(s2).unwrap()
    }

    #[test]
    fn examples() {
        let v = i_quadrature(0, 0, 0, 0, &p(2.0), 1e-8).unwrap();
        assert!((v - 0.2).abs() < 1e-6, "{v}");
        let z = i_quadrature(0, 1, 0, 0, &p(2.0), 1e-8).unwrap();
        assert!(z.abs() < 1e-8, "{z}");
        let s1 = i_quadrature(1, 3, 0, 2, &p(1.0), 1e-8).unwrap();
        let s2 = i_quadrature(3, 1, 2, 0, &p(1.0), 1e-8).unwrap();
        assert!((s1 - s2).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_closed_form_on_a_small_grid() {
        let mut cells = Vec::new();
        for a in 0..=3 {
            for b in 0..=3 {
                for i in 0..=3 {
                    for j in 0..=3 {
                        cells.push([a, b, i, j]);
                    }
                }
            }
        }
        for s2 in [0.5, 4.0] {
            let q = i_quadrature_cells(&cells, &p(s2), 1e-8).unwrap();
            for (c, v) in cells.iter().zip(&q) {
                let exact = i_closed_form(c[0], c[1], c[2], c[3], &p(s2));
                assert!((v - exact).abs() < 1e-6, "{c:?} s2={s2}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn quadrature_density_matches_closed_form() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureFockState::single_mode(vec![C64::new(h, 0.0), C64::new(0.0, h)]).unwrap();
        let q = encrypt_quadrature(&s, &p(1.0), 4, 1e-9).unwrap();
        let c = encrypt_closed_form_at(&s, &p(1.0), 4).unwrap();
        assert_eq!(q.method, Method::Quadrature);
        for a in 0..=4 {
            for b in 0..=4 {
                assert!((q.matrix.get(a, b) - c.matrix.get(a, b)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_outside_oracle_regime() {
        assert!(i_quadrature(9, 0, 0, 0, &p(1.0), 1e-8).is_err());
        assert!(i_quadrature(0, 0, 0, 0, &p(17.0), 1e-8).is_err());
    }

    #[test]
    fn stall_is_reported() {
        let r = i_quadrature(8, 8, 8, 8, &p(16.0), 1e-30);
        assert!(matches!(r, Err(Error::QuadratureStalled { .. })));
    }
}
