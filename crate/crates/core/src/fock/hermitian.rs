use nalgebra::DMatrix;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const HERMITIAN_TOL: f64 = 1e-10;

/// Hermitian matrix stored as its upper diagonals: `diags[k][r] = M[r][r+k]`
/// for `k <= bandwidth`. Entries outside the band are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    bandwidth: usize,
    diags: Vec<Vec<C64>>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(dim.saturating_sub(1));
        let diags = (0..=bandwidth).map(|k| vec![ZERO; dim - k]).collect();
        Self { dim, bandwidth, diags }
    }

    /// `|psi><psi|`.
    pub fn from_pure(amplitudes: &[C64]) -> Self {
        let n = amplitudes.len();
        let mut m = Self::zeros(n, n.saturating_sub(1));
        for k in 0..=m.bandwidth {
            for r in 0..n - k {
                m.diags[k][r] = amplitudes[r] * amplitudes[r + k].conj();
            }
        }
        m.realify_diagonal();
        m
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), 0);
        for (slot, v) in m.diags[0].iter_mut().zip(values) {
            *slot = C64::new(*v, 0.0);
        }
        m
    }

    /// Reads a dense matrix, rejecting it if `|M - M^dagger|` exceeds 1e-10
    /// anywhere. The bandwidth is the largest offset with a nonzero entry.
    pub fn from_dense(m: &DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
        }
        let mut deviation: f64 = 0.0;
        let mut bandwidth = 0;
        for r in 0..n {
            for c in r..n {
                deviation = deviation.max((m[(r, c)] - m[(c, r)].conj()).norm());
                if c > r && (m[(r, c)] != ZERO || m[(c, r)] != ZERO) {
                    bandwidth = bandwidth.max(c - r);
                }
            }
        }
        if deviation > HERMITIAN_TOL || deviation.is_nan() {
            return Err(Error::NotHermitian { deviation });
        }
        let mut out = Self::zeros(n, bandwidth);
        for k in 0..=out.bandwidth {
            for r in 0..n - k {
                // average the two triangles so the stored matrix is exactly Hermitian
                out.diags[k][r] = 0.5 * (m[(r, r + k)] + m[(r + k, r)].conj());
            }
        }
        out.realify_diagonal();
        Ok(out)
    }

    fn realify_diagonal(&mut self) {
        if let Some(d) = self.diags.first_mut() {
            d.iter_mut().for_each(|v| v.im = 0.0);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Upper diagonal `k` (entries `M[r][r+k]`).
    pub fn diagonal(&self, k: usize) -> &[C64] {
        &self.diags[k]
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        if c >= r {
            let k = c - r;
            if k > self.bandwidth {
                ZERO
            } else {
                self.diags[k][r]
            }
        } else {
            self.get(c, r).conj()
        }
    }

    /// Sets `M[r][c]` and, implicitly, `M[c][r] = conj(v)`. Diagonal entries
    /// keep only the real part. Panics outside the band.
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        if c < r {
            return self.set(c, r, v.conj());
        }
        let k = c - r;
        assert!(k <= self.bandwidth, "entry ({r}, {c}) outside bandwidth {}", self.bandwidth);
        self.diags[k][r] = if k == 0 { C64::new(v.re, 0.0) } else { v };
    }

    pub fn trace(&self) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for v in &self.diags[0] {
            let t = sum + v.re;
            if f64::abs(sum) >= v.re.abs() {
                comp += (sum - t) + v.re;
            } else {
                comp += (v.re - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// `self - other`, with the wider of the two bandwidths.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut out = Self::zeros(self.dim, self.bandwidth.max(other.bandwidth));
        for (k, d) in out.diags.iter_mut().enumerate() {
            for (r, slot) in d.iter_mut().enumerate() {
                let a = self.diags.get(k).map_or(ZERO, |v| v[r]);
                let b = other.diags.get(k).map_or(ZERO, |v| v[r]);
                *slot = a - b;
            }
        }
        Ok(out)
    }

    /// Leading `dim x dim` block.
    pub fn crop(&self, dim: usize) -> Self {
        let dim = dim.min(self.dim);
        let mut out = Self::zeros(dim, self.bandwidth);
        for (k, d) in out.diags.iter_mut().enumerate() {
            d.copy_from_slice(&self.diags[k][..dim - k]);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c))
    }

    /// Eigenvalues in ascending order. Uses the band reduction when
    /// `bandwidth <= dim / 8`, a dense Hermitian solver otherwise.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = if self.bandwidth == 0 {
            self.diags[0].iter().map(|v| v.re).collect()
        } else if self.bandwidth <= self.dim / 8 {
            self.band_eigenvalues()
        } else {
            self.dense_eigenvalues()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        if self.dim == 0 {
            return Vec::new();
        }
        self.to_dense().symmetric_eigenvalues().iter().copied().collect()
    }

    /// Givens band-to-tridiagonal reduction followed by implicit QL.
    pub fn band_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        if n == 0 {
            return Vec::new();
        }
        let mut work = BandWork::new(self);
        for b in (2..=self.bandwidth).rev() {
            for j in 0..n.saturating_sub(b) {
                let (mut r, mut c) = (j + b, j);
                while r < n {
                    if !work.eliminate(r, c) {
                        break;
                    }
                    c = r - 1;
                    r += b;
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| work.get(i, i).re).collect();
        let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { work.get(i + 1, i).norm() } else { 0.0 }).collect();
        tridiagonal_ql(&mut d, &mut e);
        d
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }
}

// Lower-band working copy with one extra diagonal for the bulge.
struct BandWork {
    n: usize,
    w: usize,
    lower: Vec<Vec<C64>>,
}

impl BandWork {
    fn new(m: &HermitianMatrix) -> Self {
        let n = m.dim;
        let w = m.bandwidth + 1;
        let mut lower: Vec<Vec<C64>> = (0..=w).map(|d| vec![ZERO; n.saturating_sub(d)]).collect();
        for (row, diag) in lower.iter_mut().zip(&m.diags) {
            for (slot, v) in row.iter_mut().zip(diag) {
                *slot = v.conj();
            }
        }
        Self { n, w, lower }
    }

    fn get(&self, r: usize, c: usize) -> C64 {
        if r >= c {
            let d = r - c;
            if d > self.w {
                ZERO
            } else {
                self.lower[d][c]
            }
        } else {
            self.get(c, r).conj()
        }
    }

    fn set(&mut self, r: usize, c: usize, v: C64) {
        if r < c {
            return self.set(c, r, v.conj());
        }
        let d = r - c;
        if d <= self.w {
            self.lower[d][c] = v;
        } else {
            debug_assert!(v.norm() < 1e-12, "fill outside the working band");
        }
    }

    /// Zero `A[r][c]` against `A[r-1][c]` with a rotation on rows and columns
    /// `r-1, r`. Returns false when there was nothing to eliminate.
    fn eliminate(&mut self, r: usize, c: usize) -> bool {
        let xq = self.get(r, c);
        if xq == ZERO {
            return false;
        }
        let xp = self.get(r - 1, c);
        let (ap, aq) = (xp.norm(), xq.norm());
        let h = ap.hypot(aq);
        let (cs, sn) = if ap == 0.0 { (0.0, xq.conj() / aq) } else { (ap / h, (xp / ap) * xq.conj() / h) };
        self.rotate(r - 1, cs, sn);
        self.set(r, c, ZERO);
        true
    }

    // A <- G A G^dagger with G = [[c, s], [-conj(s), c]] on indices p, p+1.
    fn rotate(&mut self, p: usize, c: f64, s: C64) {
        let q = p + 1;
        let lo = p.saturating_sub(self.w);
        let hi = (q + self.w).min(self.n - 1);
        for k in lo..=hi {
            if k == p || k == q {
                continue;
            }
            let apk = self.get(p, k);
            let aqk = self.get(q, k);
            self.set(p, k, c * apk + s * aqk);
            self.set(q, k, -s.conj() * apk + c * aqk);
        }
        let (app, apq, aqp, aqq) = (self.get(p, p), self.get(p, q), self.get(q, p), self.get(q, q));
        let gpp = c * app + s * aqp;
        let gpq = c * apq + s * aqq;
        let gqp = -s.conj() * app + c * aqp;
        let gqq = -s.conj() * apq + c * aqq;
        let npp = gpp * c + gpq * s.conj();
        let npq = -gpp * s + gpq * c;
        let nqq = -gqp * s + gqq * c;
        self.set(p, p, C64::new(npp.re, 0.0));
        self.set(q, q, C64::new(nqq.re, 0.0));
        self.set(p, q, npq);
    }
}

/// Eigenvalues of the real symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e[i]` couples `i` and `i+1`; the last entry is
/// ignored). Overwrites `d` with the eigenvalues.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    if n < 2 {
        return;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l || iter == 200 {
                break;
            }
            iter += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// A density matrix in the single-mode number basis together with the
/// probability mass lost to truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: HermitianMatrix,
    pub tail_deficit: f64,
}

impl DensityMatrix {
    pub fn new(entries: HermitianMatrix, tail_deficit: f64) -> Self {
        Self { entries, tail_deficit }
    }

    pub fn from_pure(amplitudes: &[C64]) -> Self {
        let entries = HermitianMatrix::from_pure(amplitudes);
        let tail_deficit = (1.0 - entries.trace()).max(0.0);
        Self { entries, tail_deficit }
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn bandwidth(&self) -> usize {
        self.entries.bandwidth()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries.get(r, c)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// `||M||_1` of a dense Hermitian matrix; rejects non-Hermitian input.
pub fn trace_norm(m: &DMatrix<C64>) -> Result<f64> {
    Ok(HermitianMatrix::from_dense(m)?.trace_norm())
}

/// `||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(0.5 * rho.entries.sub(&sigma.entries)?.trace_norm())
}
