//! Integration of W-invariant functions over the positive chamber in gap coordinates.
//!
//! A chamber point is written as its mean times (1, ..., 1) plus a centered part
//! determined by the consecutive gaps g_i >= 0. The invariant weight depends on
//! the gaps only; callers integrate the mean direction themselves (for Gaussian
//! kernels it is an exact Gaussian integral).

use crate::error::Result;
use crate::quad::gauss::{jacobi_unit_cached, legendre_unit};
use crate::special::LogAccumulator;

/// Per-gap integration window and resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct GapGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub panels: usize,
    pub nodes: usize,
}

impl GapGrid {
    /// Windows centered on `centers` with the given half width, clipped at zero.
    pub fn around(centers: &[f64], half_width: f64, panels: usize, nodes: usize) -> Self {
        Self {
            lo: centers.iter().map(|c| (c - half_width).max(0.0)).collect(),
            hi: centers.iter().map(|c| c + half_width).collect(),
            panels,
            nodes,
        }
    }

    /// Nodes and log-weights for one gap; the g^{2k} factor of the weight is
    /// included (as a Jacobi weight when the window touches zero).
    fn axis(&self, i: usize, k: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (lo, hi) = (self.lo[i], self.hi[i]);
        let h = (hi - lo) / self.panels as f64;
        let leg = legendre_unit(self.nodes)?;
        let jac = jacobi_unit_cached(self.nodes, 2.0 * k, 0.0)?;
        let mut x = Vec::new();
        let mut lw = Vec::new();
        for p in 0..self.panels {
            let a = lo + p as f64 * h;
            if a == 0.0 {
                for (&t, &w) in jac.nodes.iter().zip(&jac.weights) {
                    x.push(h * t);
                    lw.push(w.ln() + jac.ln_mass + (2.0 * k + 1.0) * h.ln());
                }
            } else {
                for (&t, &w) in leg.nodes.iter().zip(&leg.weights) {
                    let g = a + h * t;
                    x.push(g);
                    lw.push((w * h).ln() + 2.0 * k * g.ln());
                }
            }
        }
        Ok((x, lw))
    }
}

/// Centered chamber point (sum zero) with the given consecutive gaps.
pub fn centered_from_gaps(gaps: &[f64]) -> Vec<f64> {
    let n1 = gaps.len() + 1;
    let mut y = vec![0.0; n1];
    for i in (0..n1 - 1).rev() {
        y[i] = y[i + 1] + gaps[i];
    }
    let mean = y.iter().sum::<f64>() / n1 as f64;
    y.iter().map(|v| v - mean).collect()
}

/// ln of the integral over the gap box of exp(ln_h(gaps)) times
/// prod_{i<j} (y_i - y_j)^{2k}. Returns (ln value, integrand evaluations).
pub fn gap_integral(
    k: f64,
    grid: &GapGrid,
    ln_h: impl Fn(&[f64]) -> Result<f64> + Sync + Send,
    exec: crate::par::Execution,
) -> Result<(f64, u64)> {
    let m = grid.lo.len();
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..m).map(|i| grid.axis(i, k)).collect::<Result<_>>()?;
    let sizes: Vec<usize> = axes.iter().map(|a| a.0.len()).collect();
    let total: usize = sizes.iter().product();
    let terms = crate::par::map_indexed(exec, total, |flat| -> Result<f64> {
        let mut rem = flat;
        let mut g = vec![0.0; m];
        let mut lw = 0.0;
        for lvl in (0..m).rev() {
            let i = rem % sizes[lvl];
            rem /= sizes[lvl];
            g[lvl] = axes[lvl].0[i];
            lw += axes[lvl].1[i];
        }
        // non-adjacent factors of the weight
        for i in 0..m {
            let mut s = g[i];
            for gj in &g[i + 1..] {
                s += gj;
                lw += 2.0 * k * s.ln();
            }
        }
        Ok(lw + ln_h(&g)?)
    });
    let mut acc = LogAccumulator::default();
    for t in terms {
        acc.add(t?);
    }
    Ok((acc.ln(), total as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::Execution;
    use crate::special::ln_gamma;

    #[test]
    fn centered_point() {
        let y = centered_from_gaps(&[1.0, 2.0]);
        let want = [4.0 / 3.0, 1.0 / 3.0, -5.0 / 3.0];
        assert!(y.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15), "{y:?}");
    }

    #[test]
    fn one_gap_gaussian_moment() {
        // int_0^inf g^{2k} e^{-g^2} dg = Gamma(k + 1/2) / 2
        let k = 0.7;
        let grid = GapGrid { lo: vec![0.0], hi: vec![8.0], panels: 6, nodes: 12 };
        let (v, _) = gap_integral(k, &grid, |g| Ok(-g[0] * g[0]), Execution::Sequential).unwrap();
        assert!((v - (ln_gamma(k + 0.5) - 2f64.ln())).abs() < 1e-10);
    }
}
