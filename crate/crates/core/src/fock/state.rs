use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Occupation tuples of `modes` modes with per-mode and total photon caps,
/// in lexicographic order.
#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: usize,
    mode_cutoffs: Vec<usize>,
    max_photons: usize,
    tuples: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.mode_cutoffs == other.mode_cutoffs && self.max_photons == other.max_photons
    }
}

impl FockBasis {
    pub fn new(mode_cutoffs: Vec<usize>, max_photons: usize) -> Result<Self> {
        if mode_cutoffs.is_empty() {
            return Err(Error::InvalidParameter("a Fock basis needs at least one mode".into()));
        }
        let modes = mode_cutoffs.len();
        let mut tuples = Vec::new();
        let mut current = vec![0usize; modes];
        fill(&mode_cutoffs, max_photons, 0, 0, &mut current, &mut tuples);
        let index = tuples.iter().enumerate().map(|(k, t)| (t.clone(), k)).collect();
        Ok(Self { modes, mode_cutoffs, max_photons, tuples, index })
    }

    /// All tuples with total photon number at most `max_photons`.
    pub fn total_capped(modes: usize, max_photons: usize) -> Result<Self> {
        Self::new(vec![max_photons; modes], max_photons)
    }

    /// Full product space `0..=cutoffs[j]` on each mode.
    pub fn product(cutoffs: &[usize]) -> Result<Self> {
        Self::new(cutoffs.to_vec(), cutoffs.iter().sum())
    }

    pub fn single_mode(cutoff: usize) -> Self {
        Self::new(vec![cutoff], cutoff).expect("one mode")
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mode_cutoffs(&self) -> &[usize] {
        &self.mode_cutoffs
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn tuple(&self, k: usize) -> &[usize] {
        &self.tuples[k]
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }
}

fn fill(
    cutoffs: &[usize],
    budget: usize,
    mode: usize,
    used: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if mode == cutoffs.len() {
        out.push(current.clone());
        return;
    }
    for n in 0..=cutoffs[mode].min(budget - used) {
        current[mode] = n;
        fill(cutoffs, budget, mode + 1, used + n, current, out);
    }
    current[mode] = 0;
}

/// A state vector over a [`FockBasis`].
///
/// States built by [`PureFockState::new`] are normalized. Truncating
/// operations (displacements, embeddings into smaller bases) may return
/// states whose norm is short by the reported leakage.
#[derive(Debug, Clone)]
pub struct PureFockState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<C64>,
}

const NORM_TOL: f64 = 1e-12;
const FILE_NORM_TOL: f64 = 1e-6;

impl PureFockState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::unnormalized(basis, amplitudes)?;
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    /// No normalization check; length and finiteness are still validated.
    pub fn unnormalized(basis: Arc<FockBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: amplitudes.len() });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Single-mode state `sum_k amplitudes[k] |k>`.
    pub fn single_mode(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty amplitude list".into()));
        }
        let basis = Arc::new(FockBasis::single_mode(amplitudes.len() - 1));
        Self::new(basis, amplitudes)
    }

    /// The number state `|occupation>` in the total-capped basis with cap
    /// `max_photons`.
    pub fn number_state(occupation: &[usize], max_photons: usize) -> Result<Self> {
        let basis = Arc::new(FockBasis::total_capped(occupation.len(), max_photons)?);
        let k = basis.index_of(occupation).ok_or_else(|| {
            Error::InvalidParameter(format!("{occupation:?} exceeds the photon cap {max_photons}"))
        })?;
        let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes: amps })
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        Self::number_state(&vec![0; modes], 0)
    }

    /// Random normalized state with complex Gaussian amplitudes over the
    /// total-capped basis.
    pub fn random<R: Rng + ?Sized>(modes: usize, max_photons: usize, rng: &mut R) -> Result<Self> {
        let basis = Arc::new(FockBasis::total_capped(modes, max_photons)?);
        let mut amps: Vec<C64> = (0..basis.len())
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { basis, amplitudes: amps })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn max_photons(&self) -> usize {
        self.basis.max_photons()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[usize]) -> C64 {
        self.basis
            .index_of(occupation)
            .map_or(C64::new(0.0, 0.0), |k| self.amplitudes[k])
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        let s = n.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a /= s);
        Ok(())
    }

    /// Largest photon number carrying nonzero amplitude.
    pub fn photon_support(&self) -> usize {
        self.basis
            .tuples()
            .iter()
            .zip(&self.amplitudes)
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(t, _)| t.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Re-express the state over `basis`; returns it with the norm-squared
    /// of the components that have no place there.
    pub fn embed_into(&self, basis: &Arc<FockBasis>) -> Result<(Self, f64)> {
        if basis.modes() != self.modes() {
            return Err(Error::DimensionMismatch { expected: basis.modes(), found: self.modes() });
        }
        let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
        let mut dropped = 0.0;
        for (t, a) in self.basis.tuples().iter().zip(&self.amplitudes) {
            match basis.index_of(t) {
                Some(k) => amps[k] = *a,
                None => dropped += a.norm_sqr(),
            }
        }
        Ok((Self { basis: Arc::clone(basis), amplitudes: amps }, dropped))
    }

    /// Inner product `<self|other>`; bases must agree.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        check_same_shape(self, other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_file(&self) -> StateFile {
        StateFile {
            modes: self.modes(),
            max_photons: self.max_photons(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_file(file: StateFile) -> Result<Self> {
        if file.modes == 0 {
            return Err(Error::InvalidParameter("state file declares zero modes".into()));
        }
        let basis = Arc::new(FockBasis::total_capped(file.modes, file.max_photons)?);
        let amps: Vec<C64> = file.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        let mut state = Self::unnormalized(basis, amps)?;
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > FILE_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        state.normalize()?;
        Ok(state)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
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

/// On-disk state: total-capped basis, amplitudes in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub modes: usize,
    pub max_photons: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

fn check_same_shape(a: &PureFockState, b: &PureFockState) -> Result<()> {
    if a.modes() != b.modes() {
        return Err(Error::DimensionMismatch { expected: a.modes(), found: b.modes() });
    }
    if *a.basis != *b.basis {
        return Err(Error::InvalidParameter(format!(
            "basis mismatch: cutoffs {:?}/{} vs {:?}/{}",
            a.basis.mode_cutoffs(),
            a.max_photons(),
            b.basis.mode_cutoffs(),
            b.max_photons()
        )));
    }
    Ok(())
}

/// `|<psi|phi>|^2`.
pub fn fidelity(psi: &PureFockState, phi: &PureFockState) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr())
}
