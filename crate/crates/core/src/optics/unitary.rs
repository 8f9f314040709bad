use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::fock::DisplacementAmplitude;
use crate::{Error, Result, C64};

const UNITARY_TOL: f64 = 1e-10;

/// An `m x m` unitary acting on mode operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    entries: DMatrix<C64>,
}

impl ModeUnitary {
    /// Validates `U^dagger U = I` to 1e-10 entrywise.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        let deviation = unitarity_deviation(&entries);
        if deviation.is_nan() || deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { entries })
    }

    pub fn identity(m: usize) -> Self {
        Self { entries: DMatrix::identity(m, m) }
    }

    /// Haar-random unitary: QR of a complex Ginibre matrix with the phases
    /// of `R`'s diagonal moved into `Q`.
    pub fn haar_random(m: usize, seed: u64) -> Self {
        assert!(m >= 1, "mode count must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = DMatrix::from_fn(m, m, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let qr = z.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for k in 0..m {
            let d = r[(k, k)];
            let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
            q.column_mut(k).iter_mut().for_each(|v| *v *= phase);
        }
        Self { entries: q }
    }

    /// `[[cos t, sin t], [-sin t, cos t]]`.
    pub fn beamsplitter(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { entries: DMatrix::from_row_slice(2, 2, &[c.into(), s.into(), (-s).into(), c.into()]) }
    }

    /// `[[e^{i phi}]]`.
    pub fn phase_shifter(phi: f64) -> Self {
        Self { entries: DMatrix::from_element(1, 1, C64::from_polar(1.0, phi)) }
    }

    /// Acts as `self` on `positions` (in order) and as the identity on the
    /// other modes of an `m`-mode system.
    pub fn embed(&self, positions: &[usize], m: usize) -> Result<Self> {
        let k = self.m();
        let mut seen = vec![false; m];
        let distinct = positions.iter().all(|&p| p < m && !std::mem::replace(&mut seen[p], true));
        if positions.len() != k || !distinct {
            return Err(Error::PositionCollision { positions: positions.to_vec(), modes: m });
        }
        let mut out = DMatrix::identity(m, m);
        for (a, &pa) in positions.iter().enumerate() {
            for (b, &pb) in positions.iter().enumerate() {
                out[(pa, pb)] = self.entries[(a, b)];
            }
        }
        Ok(Self { entries: out })
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), found: other.m() });
        }
        Ok(Self { entries: &self.entries * &other.entries })
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[(r, c)]
    }

    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.entries)
    }

    pub fn to_file(&self) -> UnitaryFile {
        UnitaryFile {
            m: self.m(),
            entries: (0..self.m())
                .map(|r| (0..self.m()).map(|c| [self.entries[(r, c)].re, self.entries[(r, c)].im]).collect())
                .collect(),
        }
    }

    pub fn from_file(file: &UnitaryFile) -> Result<Self> {
        if file.entries.len() != file.m || file.entries.iter().any(|row| row.len() != file.m) {
            return Err(Error::DimensionMismatch { expected: file.m, found: file.entries.len() });
        }
        Self::new(DMatrix::from_fn(file.m, file.m, |r, c| {
            let [re, im] = file.entries[r][c];
            C64::new(re, im)
        }))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain data serializes")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            let e = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((p[(r, c)] - C64::new(e, 0.0)).norm());
        }
    }
    if dev.is_nan() {
        f64::INFINITY
    } else {
        dev
    }
}

/// On-disk unitary: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryFile {
    pub m: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

/// Per-mode displacement amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementKey {
    pub alphas: Vec<DisplacementAmplitude>,
}

impl DisplacementKey {
    pub fn new(alphas: Vec<DisplacementAmplitude>) -> Result<Self> {
        if alphas.iter().any(|a| !(a.u.is_finite() && a.v.is_finite())) {
            return Err(Error::InvalidParameter("non-finite key component".into()));
        }
        Ok(Self { alphas })
    }

    pub fn zero(m: usize) -> Self {
        Self { alphas: vec![DisplacementAmplitude::default(); m] }
    }

    /// Components `u + i v` with `u, v ~ N(0, sigma)`; `sigma = 0` gives the zero key.
    pub fn sample<R: rand::Rng + ?Sized>(m: usize, sigma: f64, rng: &mut R) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(Self::zero(m));
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Self {
            alphas: (0..m)
                .map(|_| {
                    let u = normal.sample(rng);
                    let v = normal.sample(rng);
                    DisplacementAmplitude { u, v }
                })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_iterator(self.len(), self.alphas.iter().map(|a| a.to_complex()))
    }

    pub fn from_vector(v: &DVector<C64>) -> Self {
        Self { alphas: v.iter().map(|z| DisplacementAmplitude::from_complex(*z)).collect() }
    }

    pub fn negated(&self) -> Self {
        Self { alphas: self.alphas.iter().map(|a| DisplacementAmplitude { u: -a.u, v: -a.v }).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.alphas.iter().map(|a| a.u * a.u + a.v * a.v).sum::<f64>().sqrt()
    }
}

/// `beta = U alpha`.
pub fn key_transform(u: &ModeUnitary, key: &DisplacementKey) -> Result<DisplacementKey> {
    if u.m() != key.len() {
        return Err(Error::DimensionMismatch { expected: u.m(), found: key.len() });
    }
    Ok(DisplacementKey::from_vector(&(u.entries() * key.to_vector())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn haar_basics() {
        let u1 = ModeUnitary::haar_random(1, 5);
        assert!((u1.get(0, 0).norm() - 1.0).abs() < 1e-14);
        for m in 1..=6 {
            for seed in 0..5 {
                assert!(ModeUnitary::haar_random(m, seed).deviation() < 1e-12);
            }
        }
        assert_eq!(ModeUnitary::haar_random(3, 9), ModeUnitary::haar_random(3, 9));
        assert_ne!(ModeUnitary::haar_random(3, 9), ModeUnitary::haar_random(3, 10));
    }

    #[test]
    fn haar_first_column_marginal() {
        // |U_00|^2 is Beta(1, m-1) under the Haar measure: mean 1/m, variance (m-1)/(m^2 (m+1))
        let n = 10_000;
        let samples: Vec<f64> = (0..n).map(|s| ModeUnitary::haar_random(2, s).get(0, 0).norm_sqr()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 1.0 / 12.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn beamsplitter_and_phase() {
        assert_eq!(ModeUnitary::beamsplitter(0.0), ModeUnitary::identity(2));
        let swap = ModeUnitary::beamsplitter(FRAC_PI_2);
        assert!(swap.get(0, 0).norm() < 1e-16 && (swap.get(0, 1).re - 1.0).abs() < 1e-16);
        assert!((swap.get(1, 0).re + 1.0).abs() < 1e-16);
        assert!((ModeUnitary::phase_shifter(0.3).get(0, 0).arg() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn embedding() {
        let bs = ModeUnitary::beamsplitter(0.4).embed(&[2, 0], 4).unwrap();
        let ph = ModeUnitary::phase_shifter(1.1).embed(&[3], 4).unwrap();
        let prod = bs.compose(&ph).unwrap().compose(&ModeUnitary::haar_random(4, 2)).unwrap();
        assert!(prod.deviation() < 1e-12);
        assert!((bs.get(2, 0).re - 0.4f64.sin()).abs() < 1e-16);
        assert!(matches!(ModeUnitary::beamsplitter(0.1).embed(&[1, 1], 3), Err(Error::PositionCollision { .. })));
        assert!(ModeUnitary::beamsplitter(0.1).embed(&[0, 3], 3).is_err());
        assert!(ModeUnitary::beamsplitter(0.1).embed(&[0], 3).is_err());
    }

    #[test]
    fn validation_and_json() {
        let bad = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(ModeUnitary::new(bad), Err(Error::NotUnitary { .. })));
        let u = ModeUnitary::haar_random(3, 1);
        let back = ModeUnitary::from_json(&u.to_json()).unwrap();
        assert_eq!(back, u);
        assert!(ModeUnitary::from_json(r#"{"m":2,"entries":[[[1,0],[0,0]]]}"#).is_err());
    }

    #[test]
    fn key_transform_examples() {
        let key = DisplacementKey::new(vec![
            DisplacementAmplitude { u: 0.3, v: -1.0 },
            DisplacementAmplitude { u: 2.0, v: 0.5 },
        ])
        .unwrap();
        let swap = ModeUnitary::new(DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ))
        .unwrap();
        let b = key_transform(&swap, &key).unwrap();
        assert_eq!(b.alphas, vec![key.alphas[1], key.alphas[0]]);
        assert_eq!(key_transform(&ModeUnitary::identity(2), &key).unwrap(), key);
        let r = key_transform(&ModeUnitary::haar_random(2, 4), &key).unwrap();
        assert!((r.norm() - key.norm()).abs() < 1e-12);
        assert!(key_transform(&ModeUnitary::identity(3), &key).is_err());
    }
}
