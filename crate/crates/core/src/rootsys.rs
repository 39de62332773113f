//! Type-A root systems, their chambers and the invariant weight.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Absolute slack allowed when testing chamber membership, scaled by max(1, |x|).
pub const CHAMBER_TOL: f64 = 1e-12;

/// How A_n sits inside Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Realization {
    /// R^d with d >= n + 1; the roots act on `active` coordinates.
    Ambient { d: usize, active: Vec<usize> },
    /// The hyperplane sum(x) = 0 inside R^{n+1}, of dimension n.
    TraceZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystemA {
    n: usize,
    k: f64,
    realization: Realization,
}

/// Positive root e_i - e_j, stored as coordinate indices (i, j).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl std::fmt::Display for Root {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{}-e{}", self.i + 1, self.j + 1)
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidMultiplicity(k));
    }
    Ok(())
}

impl RootSystemA {
    /// A_n on R^{n+1}.
    pub fn new(n: usize, k: f64) -> Result<Self> {
        Self::with_dimension(n, n + 1, k)
    }

    /// A_n acting on the first n + 1 coordinates of R^d.
    pub fn with_dimension(n: usize, d: usize, k: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRank(n));
        }
        check_k(k)?;
        if d < n + 1 {
            return Err(Error::InvalidDimension(format!(
                "ambient dimension {d} is smaller than n + 1 = {}",
                n + 1
            )));
        }
        Ok(Self { n, k, realization: Realization::Ambient { d, active: (0..=n).collect() } })
    }

    /// A_n on the trace-zero hyperplane of R^{n+1}.
    pub fn trace_zero(n: usize, k: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRank(n));
        }
        check_k(k)?;
        Ok(Self { n, k, realization: Realization::TraceZero })
    }

    /// Choose which n + 1 coordinates of the ambient space the roots act on.
    pub fn with_active_coords(mut self, active: Vec<usize>) -> Result<Self> {
        let d = match &self.realization {
            Realization::Ambient { d, .. } => *d,
            Realization::TraceZero => {
                return Err(Error::InvalidDimension(
                    "active coordinates only apply to an ambient realization".into(),
                ))
            }
        };
        if active.len() != self.n + 1 {
            return Err(Error::InvalidDimension(format!(
                "need {} active coordinates, got {}",
                self.n + 1,
                active.len()
            )));
        }
        let mut seen = vec![false; d];
        for &a in &active {
            if a >= d || seen[a] {
                return Err(Error::InvalidDimension(format!("bad active coordinate list {active:?}")));
            }
            seen[a] = true;
        }
        self.realization = Realization::Ambient { d, active };
        Ok(self)
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        check_k(k)?;
        let mut out = self.clone();
        out.k = k;
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn realization(&self) -> &Realization {
        &self.realization
    }

    /// Euclidean dimension of the space the kernels live on.
    pub fn dim(&self) -> usize {
        match &self.realization {
            Realization::Ambient { d, .. } => *d,
            Realization::TraceZero => self.n,
        }
    }

    /// Length of coordinate vectors accepted by this system.
    pub fn coord_len(&self) -> usize {
        match &self.realization {
            Realization::Ambient { d, .. } => *d,
            Realization::TraceZero => self.n + 1,
        }
    }

    pub fn is_trace_zero(&self) -> bool {
        matches!(self.realization, Realization::TraceZero)
    }

    /// Coordinates the roots act on, in chamber order.
    pub fn active(&self) -> Vec<usize> {
        match &self.realization {
            Realization::Ambient { active, .. } => active.clone(),
            Realization::TraceZero => (0..=self.n).collect(),
        }
    }

    /// Coordinates untouched by the Weyl group.
    pub fn inactive(&self) -> Vec<usize> {
        let act = self.active();
        (0..self.coord_len()).filter(|c| !act.contains(c)).collect()
    }

    pub fn num_positive_roots(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// gamma = k |positive roots|.
    pub fn gamma(&self) -> f64 {
        self.k * self.num_positive_roots() as f64
    }

    pub fn weyl_order(&self) -> u128 {
        (1..=(self.n as u128 + 1)).product()
    }

    pub fn positive_roots(&self) -> Vec<Root> {
        let act = self.active();
        let mut out = Vec::with_capacity(self.num_positive_roots());
        for a in 0..act.len() {
            for b in a + 1..act.len() {
                out.push(Root { i: act[a], j: act[b] });
            }
        }
        out
    }

    fn check_len(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.coord_len() {
            return Err(Error::InvalidDimension(format!(
                "expected {} coordinates, got {}",
                self.coord_len(),
                p.len()
            )));
        }
        Ok(())
    }

    /// alpha(p) = p_i - p_j.
    pub fn pairing(&self, root: Root, p: &[f64]) -> f64 {
        p[root.i] - p[root.j]
    }

    /// Reflection in the hyperplane orthogonal to the root: swaps two coordinates.
    pub fn reflect(&self, root: Root, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        out.swap(root.i, root.j);
        out
    }

    /// prod over positive roots |alpha(x)|^{2k}.
    pub fn weight(&self, x: &[f64]) -> f64 {
        self.positive_roots().iter().map(|&r| self.pairing(r, x).abs().powf(2.0 * self.k)).product()
    }

    pub fn ln_weight(&self, x: &[f64]) -> f64 {
        2.0 * self.k
            * self.positive_roots().iter().map(|&r| self.pairing(r, x).abs().ln()).sum::<f64>()
    }

    /// prod over positive roots alpha(x).
    pub fn vandermonde(&self, x: &[f64]) -> f64 {
        self.positive_roots().iter().map(|&r| self.pairing(r, x)).product()
    }

    /// |x - sigma_alpha y|^2 = |x - y|^2 + 2 alpha(x) alpha(y).
    pub fn reflected_distance_sq(&self, root: Root, x: &[f64], y: &[f64]) -> f64 {
        dist_sq(x, y) + 2.0 * self.pairing(root, x) * self.pairing(root, y)
    }

    /// Apply a permutation of the active coordinates (an element of the Weyl group).
    pub fn act(&self, perm: &[usize], x: &[f64]) -> Vec<f64> {
        let act = self.active();
        let mut out = x.to_vec();
        for (slot, &p) in perm.iter().enumerate() {
            out[act[slot]] = x[act[p]];
        }
        out
    }

    /// Sort the active coordinates in decreasing order (the chamber representative).
    pub fn to_chamber(&self, x: &[f64]) -> Vec<f64> {
        let act = self.active();
        let mut vals: Vec<f64> = act.iter().map(|&a| x[a]).collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mut out = x.to_vec();
        for (slot, &a) in act.iter().enumerate() {
            out[a] = vals[slot];
        }
        out
    }

    pub fn in_closed_chamber(&self, x: &[f64]) -> bool {
        let tol = CHAMBER_TOL * scale(x);
        let act = self.active();
        act.windows(2).all(|w| x[w[0]] - x[w[1]] >= -tol)
    }

    pub fn in_open_chamber(&self, x: &[f64]) -> bool {
        let act = self.active();
        act.windows(2).all(|w| x[w[0]] > x[w[1]])
    }

    /// Active coordinates of x, in chamber order.
    pub fn active_values(&self, x: &[f64]) -> Vec<f64> {
        self.active().iter().map(|&a| x[a]).collect()
    }

    /// Consecutive gaps of the active coordinates, clamped at zero.
    pub fn gaps(&self, x: &[f64]) -> Vec<f64> {
        let v = self.active_values(x);
        v.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect()
    }
}

/// max(1, max |x_i|)
pub fn scale(x: &[f64]) -> f64 {
    x.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

pub fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// A validated point of the closed positive chamber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberPoint(Vec<f64>);

impl ChamberPoint {
    pub fn new(rs: &RootSystemA, coords: Vec<f64>) -> Result<Self> {
        rs.check_len(&coords)?;
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate in {coords:?}")));
        }
        if !rs.in_closed_chamber(&coords) {
            return Err(Error::OutsideChamber(format!("{coords:?}")));
        }
        if rs.is_trace_zero() {
            let s: f64 = coords.iter().sum();
            if s.abs() > 1e-10 * scale(&coords) {
                return Err(Error::Domain(format!("coordinates {coords:?} do not sum to zero")));
            }
        }
        Ok(Self(coords))
    }

    /// Any point, moved into the chamber by sorting.
    pub fn sorted(rs: &RootSystemA, coords: Vec<f64>) -> Result<Self> {
        rs.check_len(&coords)?;
        let c = rs.to_chamber(&coords);
        Self::new(rs, c)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for ChamberPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}
