use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{EncryptedDensity, EncryptionParams, Method};
use crate::fock::{displacement_block, DensityMatrix, DisplacementAmplitude, HermitianMatrix, PureFockState};
use crate::{Error, Result, C64};

const CHUNK: usize = 1024;

/// Sample mean of `D(alpha)|psi><psi|D(alpha)^dagger` over `samples` keys
/// drawn from a ChaCha8 stream seeded with `seed`, on `0..=cutoff`.
///
/// The per-entry standard error is `sqrt((s_re^2 + s_im^2) / N)` from the
/// sample variances of the real and imaginary parts. Keys are drawn
/// sequentially and partial sums are combined in chunk order, so the result
/// does not depend on the thread count.
pub fn encrypt_monte_carlo(
    state: &PureFockState,
    params: &EncryptionParams,
    samples: usize,
    cutoff: usize,
    seed: u64,
) -> Result<EncryptedDensity> {
    if state.modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: state.modes() });
    }
    if samples < 100 {
        return Err(Error::InvalidParameter(format!("Monte-Carlo needs at least 100 samples, got {samples}")));
    }
    let lambda = state.amplitudes();
    let dim = cutoff + 1;
    let normal = Normal::new(0.0, params.sigma())
        .map_err(|e| Error::InvalidParameter(format!("key distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<DisplacementAmplitude> = (0..samples)
        .map(|_| {
            let u = normal.sample(&mut rng);
            let v = normal.sample(&mut rng);
            DisplacementAmplitude { u, v }
        })
        .collect();

    let partials: Vec<Result<Moments>> = keys
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut m = Moments::new(dim);
            for &alpha in chunk {
                let d = displacement_block(alpha, dim, lambda.len().min(dim))?;
                let psi: Vec<C64> =
                    (0..dim).map(|r| (0..d.ncols()).map(|c| d[(r, c)] * lambda[c]).sum()).collect();
                m.add(&psi);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::new(dim);
    for p in partials {
        total.merge(&p?);
    }

    let n = samples as f64;
    let mut mean = HermitianMatrix::zeros(dim, dim - 1);
    let mut se = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in r..dim {
            let k = r * dim + c;
            let (mr, mi) = (total.re[k] / n, total.im[k] / n);
            let vr = ((total.re2[k] - n * mr * mr) / (n - 1.0)).max(0.0);
            let vi = ((total.im2[k] - n * mi * mi) / (n - 1.0)).max(0.0);
            mean.set(r, c, C64::new(mr, mi));
            let e = ((vr + vi) / n).sqrt();
            se[(r, c)] = e;
            se[(c, r)] = e;
        }
    }
    let weight: f64 = lambda.iter().map(|l| l.norm_sqr()).sum();
    let tail_deficit = (weight - mean.trace()).max(0.0);
    Ok(EncryptedDensity {
        matrix: DensityMatrix::new(mean, tail_deficit),
        params: *params,
        method: Method::MonteCarlo,
        cutoff,
        mc_seed: Some(seed),
        std_error: Some(se),
    })
}

// Running sums over the upper triangle (row-major, full square for indexing).
struct Moments {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    re2: Vec<f64>,
    im2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        let z = vec![0.0; dim * dim];
        Self { dim, re: z.clone(), im: z.clone(), re2: z.clone(), im2: z }
    }

    fn add(&mut self, psi: &[C64]) {
        for r in 0..self.dim {
            for c in r..self.dim {
                let v = psi[r] * psi[c].conj();
                let k = r * self.dim + c;
                self.re[k] += v.re;
                self.im[k] += v.im;
                self.re2[k] += v.re * v.re;
                self.im2[k] += v.im * v.im;
            }
        }
    }

    fn merge(&mut self, o: &Moments) {
        for (a, b) in [(&mut self.re, &o.re), (&mut self.im, &o.im), (&mut self.re2, &o.re2), (&mut self.im2, &o.im2)] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encryption::encrypt_closed_form_at;

    fn plus() -> PureFockState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureFockState::single_mode(vec![C64::new(h, 0.0), C64::new(0.0, -h)]).unwrap()
    }

    #[test]
    fn tiny_sigma_leaves_state_unchanged() {
        let s = plus();
        let e = encrypt_monte_carlo(&s, &EncryptionParams::new(1e-6).unwrap(), 200, 4, 1).unwrap();
        let pure = DensityMatrix::from_pure(&[s.amplitudes()[0], s.amplitudes()[1], C64::default(), C64::default(), C64::default()]);
        for r in 0..5 {
            for c in 0..5 {
                assert!((e.matrix.get(r, c) - pure.get(r, c)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = EncryptionParams::new(1.0).unwrap();
        let a = encrypt_monte_carlo(&plus(), &p, 3000, 8, 42).unwrap();
        let b = encrypt_monte_carlo(&plus(), &p, 3000, 8, 42).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.std_error, b.std_error);
        let c = encrypt_monte_carlo(&plus(), &p, 3000, 8, 43).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn within_three_standard_errors_of_closed_form() {
        let p = EncryptionParams::new(1.0).unwrap();
        let e = encrypt_monte_carlo(&plus(), &p, 20_000, 12, 7).unwrap();
        let exact = encrypt_closed_form_at(&plus(), &p, 12).unwrap();
        let se = e.std_error.as_ref().unwrap();
        let mut outside = 0;
        for r in 0..=12 {
            for c in 0..=12 {
                if (e.matrix.get(r, c) - exact.matrix.get(r, c)).norm() > 3.0 * se[(r, c)] + 1e-12 {
                    outside += 1;
                }
            }
        }
        assert_eq!(outside, 0);
        assert!((e.matrix.tail_deficit - exact.matrix.tail_deficit).abs() < 2e-3);
    }

    #[test]
    fn rejects_too_few_samples() {
        assert!(encrypt_monte_carlo(&plus(), &EncryptionParams::new(1.0).unwrap(), 99, 4, 0).is_err());
    }
}
