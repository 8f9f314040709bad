use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::permanent::permanent;
use super::ModeUnitary;
use crate::fock::{FockBasis, PureFockState};
use crate::special_math::{binomial_u128, log_factorial};
use crate::{Error, Result, C64};

/// Largest sector block [`lift_unitary`] will build.
pub const SECTOR_LIMIT: usize = 100_000;
/// Largest total-capped basis [`apply_lifted`] will work in.
pub const STATE_LIMIT: usize = 10_000_000;

const ZERO: C64 = C64::new(0.0, 0.0);

/// All occupation tuples of `modes` modes with exactly `total_photons`
/// photons, lexicographically ordered.
#[derive(Debug, Clone)]
pub struct FockSector {
    modes: usize,
    total_photons: usize,
    basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl FockSector {
    pub fn new(modes: usize, total_photons: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("a sector needs at least one mode".into()));
        }
        let size = binomial_u128((total_photons + modes - 1) as u64, (modes - 1) as u64)
            .map_or(usize::MAX, |v| v.min(usize::MAX as u128) as usize);
        if size > SECTOR_LIMIT {
            return Err(Error::SectorTooLarge { size, limit: SECTOR_LIMIT });
        }
        let mut basis = Vec::with_capacity(size);
        let mut cur = vec![0; modes];
        fill(modes, total_photons, 0, &mut cur, &mut basis);
        let index = basis.iter().enumerate().map(|(k, t)| (t.clone(), k)).collect();
        Ok(Self { modes, total_photons, basis, index })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn total_photons(&self) -> usize {
        self.total_photons
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }
}

fn fill(modes: usize, left: usize, mode: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if mode == modes - 1 {
        cur[mode] = left;
        out.push(cur.clone());
        return;
    }
    for n in 0..=left {
        cur[mode] = n;
        fill(modes, left - n, mode + 1, cur, out);
    }
}

/// Sector block of `phi(U)` on sector `s` from the block on `s - 1`:
/// `phi(U)|n> = (1/sqrt(n_i)) (sum_j U_{j,i} a_j^dagger) phi(U)|n - e_i>`
/// with `i` the most occupied mode.
fn ladder_step(u: &DMatrix<C64>, prev: &FockSector, prev_block: &DMatrix<C64>, sector: &FockSector) -> DMatrix<C64> {
    let m = sector.modes();
    let raise: Vec<Vec<usize>> = prev
        .basis()
        .iter()
        .map(|t| {
            (0..m)
                .map(|j| {
                    let mut up = t.clone();
                    up[j] += 1;
                    sector.index_of(&up).expect("raised tuple lies in the next sector")
                })
                .collect()
        })
        .collect();
    let mut out = DMatrix::zeros(sector.len(), sector.len());
    for (col, n) in sector.basis().iter().enumerate() {
        let i = (0..m).fold(0, |best, k| if n[k] > n[best] { k } else { best });
        let mut lower = n.clone();
        lower[i] -= 1;
        let pc = prev.index_of(&lower).expect("lowered tuple lies in the previous sector");
        for (row, t) in prev.basis().iter().enumerate() {
            let c = prev_block[(row, pc)];
            if c == ZERO {
                continue;
            }
            for j in 0..m {
                out[(raise[row][j], col)] += u[(j, i)] * c * ((t[j] + 1) as f64).sqrt();
            }
        }
        let scale = 1.0 / (n[i] as f64).sqrt();
        out.column_mut(col).iter_mut().for_each(|v| *v *= scale);
    }
    out
}

fn ladder_blocks(u: &DMatrix<C64>, smax: usize) -> Result<Vec<(FockSector, DMatrix<C64>)>> {
    let m = u.nrows();
    let mut out = Vec::with_capacity(smax + 1);
    out.push((FockSector::new(m, 0)?, DMatrix::from_element(1, 1, C64::new(1.0, 0.0))));
    for s in 1..=smax {
        let sector = FockSector::new(m, s)?;
        let (prev, prev_block) = out.last().expect("sector 0 present");
        let block = ladder_step(u, prev, prev_block, &sector);
        out.push((sector, block));
    }
    Ok(out)
}

/// Block of `phi(U)` on one photon-number sector, built by the
/// creation-operator recursion from the vacuum.
pub fn lift_unitary(u: &ModeUnitary, sector: &FockSector) -> Result<DMatrix<C64>> {
    if sector.modes() != u.m() {
        return Err(Error::DimensionMismatch { expected: u.m(), found: sector.modes() });
    }
    let m = u.m();
    let mut prev = FockSector::new(m, 0)?;
    let mut block = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for s in 1..=sector.total_photons() {
        let cur = if s == sector.total_photons() { sector.clone() } else { FockSector::new(m, s)? };
        block = ladder_step(u.entries(), &prev, &block, &cur);
        prev = cur;
    }
    Ok(block)
}

/// The same block from permanents:
/// `<n'|phi(U)|n> = per(U[n', n]) / sqrt(prod n! prod n'!)`, where `U[n', n]`
/// repeats row `j` `n'_j` times and column `i` `n_i` times.
pub fn lift_unitary_permanents(u: &ModeUnitary, sector: &FockSector) -> Result<DMatrix<C64>> {
    if sector.modes() != u.m() {
        return Err(Error::DimensionMismatch { expected: u.m(), found: sector.modes() });
    }
    let s = sector.total_photons();
    let expand = |t: &[usize]| -> Vec<usize> { t.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c)).collect() };
    let log_fact = |t: &[usize]| -> f64 { t.iter().map(|&c| log_factorial(c as u64)).sum() };
    let n = sector.len();
    let mut out = DMatrix::zeros(n, n);
    for (r, nr) in sector.basis().iter().enumerate() {
        let rows = expand(nr);
        for (c, nc) in sector.basis().iter().enumerate() {
            let cols = expand(nc);
            let sub = DMatrix::from_fn(s, s, |a, b| u.get(rows[a], cols[b]));
            let norm = (-0.5 * (log_fact(nr) + log_fact(nc))).exp();
            out[(r, c)] = permanent(&sub) * norm;
        }
    }
    Ok(out)
}

// U = G_1^dagger ... G_K^dagger D, with G_k acting on adjacent modes (p, p+1).
struct GivensFactors {
    rotations: Vec<(usize, [[C64; 2]; 2])>,
    phases: Vec<C64>,
}

fn givens_factors(u: &DMatrix<C64>) -> GivensFactors {
    let m = u.nrows();
    let mut w = u.clone();
    let mut rotations = Vec::new();
    for c in 0..m {
        for r in (c + 1..m).rev() {
            let (xp, xq) = (w[(r - 1, c)], w[(r, c)]);
            if xq == ZERO {
                continue;
            }
            let (ap, aq) = (xp.norm(), xq.norm());
            let h = ap.hypot(aq);
            let (cs, sn) = if ap == 0.0 { (0.0, xq.conj() / aq) } else { (ap / h, (xp / ap) * xq.conj() / h) };
            let g = [[C64::new(cs, 0.0), sn], [-sn.conj(), C64::new(cs, 0.0)]];
            for k in 0..m {
                let (a, b) = (w[(r - 1, k)], w[(r, k)]);
                w[(r - 1, k)] = g[0][0] * a + g[0][1] * b;
                w[(r, k)] = g[1][0] * a + g[1][1] * b;
            }
            rotations.push((r - 1, g));
        }
    }
    let phases = (0..m).map(|k| w[(k, k)] / w[(k, k)].norm()).collect();
    GivensFactors { rotations, phases }
}

/// Applies `phi(U)` to a state. The result lives on the total-capped basis
/// reaching the state's highest occupied photon number.
///
/// `U` is factored into adjacent two-mode rotations and a diagonal phase;
/// each rotation's lift only mixes tuples that differ in the two modes it
/// touches, so it acts through `(t+1) x (t+1)` blocks.
pub fn apply_lifted(u: &ModeUnitary, state: &PureFockState) -> Result<PureFockState> {
    let m = u.m();
    if state.modes() != m {
        return Err(Error::DimensionMismatch { expected: m, found: state.modes() });
    }
    let top = state.photon_support();
    let size = binomial_u128((top + m) as u64, m as u64).map_or(usize::MAX, |v| v.min(usize::MAX as u128) as usize);
    if size > STATE_LIMIT {
        return Err(Error::SectorTooLarge { size, limit: STATE_LIMIT });
    }
    let basis = Arc::new(FockBasis::total_capped(m, top)?);
    let (embedded, _) = state.embed_into(&basis)?;
    let mut amps = embedded.into_amplitudes();

    let factors = givens_factors(u.entries());
    for (t, a) in basis.tuples().iter().zip(amps.iter_mut()) {
        for (j, &n) in t.iter().enumerate() {
            *a *= factors.phases[j].powu(n as u32);
        }
    }
    for (p, g) in factors.rotations.iter().rev() {
        let gd = DMatrix::from_row_slice(2, 2, &[g[0][0].conj(), g[1][0].conj(), g[0][1].conj(), g[1][1].conj()]);
        amps = apply_two_mode(&basis, &amps, *p, &gd, top)?;
    }
    PureFockState::unnormalized(basis, amps)
}

fn apply_two_mode(basis: &FockBasis, amps: &[C64], p: usize, v: &DMatrix<C64>, top: usize) -> Result<Vec<C64>> {
    let q = p + 1;
    let blocks = ladder_blocks(v, top)?;
    let mut out = vec![ZERO; amps.len()];
    let mut members = Vec::with_capacity(top + 1);
    for t in basis.tuples() {
        if t[p] != 0 {
            continue;
        }
        let total = t[q];
        members.clear();
        let mut probe = t.clone();
        for k in 0..=total {
            probe[p] = k;
            probe[q] = total - k;
            members.push(basis.index_of(&probe).expect("rotation preserves the photon count"));
        }
        if members.iter().all(|&k| amps[k] == ZERO) {
            continue;
        }
        let block = &blocks[total].1;
        for (r, &kr) in members.iter().enumerate() {
            out[kr] = members.iter().enumerate().map(|(c, &kc)| block[(r, c)] * amps[kc]).sum();
        }
    }
    Ok(out)
}
