use std::f64::consts::PI;

use crate::{Error, Result};

/// Gauss-Legendre nodes and weights of the given order on `[-1, 1]`.
///
/// Roots of `P_order` by Newton iteration from the Chebyshev-like initial
/// guess; nodes are returned in increasing order.
pub fn gauss_legendre_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The interval a [`QuadratureGrid`] covers and how it was subdivided.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub panels: usize,
    pub order: usize,
}

/// One-dimensional composite Gauss-Legendre rule.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: Interval,
}

impl QuadratureGrid {
    /// `panels` equal panels on `[lower, upper]`, each with an `order`-point rule.
    pub fn composite(lower: f64, upper: f64, panels: usize, order: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidParameter(format!(
                "quadrature interval [{lower}, {upper}] is empty or not finite"
            )));
        }
        if panels == 0 || order == 0 || panels * order < 2 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least two nodes (panels {panels}, order {order})"
            )));
        }
        let (ref_nodes, ref_weights) = gauss_legendre_rule(order);
        let h = (upper - lower) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = lower + (p as f64 + 0.5) * h;
            for (t, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + 0.5 * h * t);
                weights.push(0.5 * h * w);
            }
        }
        Ok(Self { nodes, weights, domain: Interval { lower, upper, panels, order } })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Tensor product of one-dimensional grids.
#[derive(Debug, Clone)]
pub struct BoxGrid {
    pub axes: Vec<QuadratureGrid>,
}

impl BoxGrid {
    pub fn new(axes: Vec<QuadratureGrid>) -> Self {
        Self { axes }
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|g| g.domain.upper - g.domain.lower).product()
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(QuadratureGrid::len).product()
    }

    /// Integrate `f` over the box, visiting every tensor node.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let d = self.axes.len();
        if d == 0 {
            return f(&[]);
        }
        let mut idx = vec![0usize; d];
        let mut point: Vec<f64> = self.axes.iter().map(|g| g.nodes[0]).collect();
        let mut total = 0.0;
        loop {
            let w: f64 = idx.iter().zip(&self.axes).map(|(&i, g)| g.weights[i]).product();
            total += w * f(&point);
            let mut axis = d;
            loop {
                if axis == 0 {
                    return total;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < self.axes[axis].len() {
                    point[axis] = self.axes[axis].nodes[idx[axis]];
                    break;
                }
                idx[axis] = 0;
                point[axis] = self.axes[axis].nodes[0];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_rule() {
        let (x, w) = gauss_legendre_rule(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre_rule(1);
        assert_eq!((x[0], w[0]), (0.0, 2.0));
        let (x, w) = gauss_legendre_rule(32);
        assert!(w.iter().all(|&v| v > 0.0));
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let (x, w) = gauss_legendre_rule(32);
        for deg in 0..64i32 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn gaussian_integral() {
        let g = QuadratureGrid::composite(-10.0, 10.0, 4, 32).unwrap();
        let v = g.integrate(|x| (-x * x).exp());
        assert!((v - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(QuadratureGrid::composite(1.0, 1.0, 2, 32).is_err());
        assert!(QuadratureGrid::composite(0.0, 1.0, 1, 1).is_err());
        assert!(QuadratureGrid::composite(0.0, f64::INFINITY, 1, 8).is_err());
    }

    #[test]
    fn box_integration() {
        let b = BoxGrid::new(vec![
            QuadratureGrid::composite(0.0, 1.0, 1, 4).unwrap(),
            QuadratureGrid::composite(-1.0, 2.0, 2, 3).unwrap(),
        ]);
        assert_eq!(b.node_count(), 24);
        let v = b.integrate(|p| p[0] * p[1] * p[1]);
        assert!((v - 0.5 * 3.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn constant_integrates_to_volume(
            bounds in proptest::collection::vec((-50.0f64..50.0, 0.01f64..40.0), 1..4),
            panels in 1usize..4,
            order in 2usize..12,
        ) {
            let axes: Vec<_> = bounds
                .iter()
                .map(|&(lo, width)| QuadratureGrid::composite(lo, lo + width, panels, order).unwrap())
                .collect();
            let b = BoxGrid::new(axes);
            prop_assert!(b.axes.iter().all(|g| g.weights.iter().all(|&w| w > 0.0) && g.len() >= 2));
            let vol = b.volume();
            prop_assert!(((b.integrate(|_| 1.0) - vol) / vol).abs() <= 1e-12);
        }
    }
}
