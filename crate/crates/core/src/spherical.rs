//! Spherical functions of type A from the interlacing-integral recursion.
//!
//! With y_i = x_{i+1} + delta_i s_i (delta_i = x_i - x_{i+1}) the recursion for the
//! normalized function phi_lambda(X) = e^{-lambda(X)} psi_lambda(e^X) becomes an
//! integral over the unit cube whose per-level weights carry the endpoint
//! singularities, the nearby non-adjacent factors and the exponential boundary
//! layer. Each level gets its own Gauss rule for that weight (see
//! [`crate::quad::weighted`]); the remaining integrand is smooth.

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quad::weighted::{level_rule, LevelWeight};
use crate::quad::{check_budget, default_budget, KernelValue, Rule};
use crate::rootsys::{dot, scale, ChamberPoint, RootSystemA};
use crate::special::{ln_gamma, ln_kummer_half, LogAccumulator};
use serde::{Deserialize, Serialize};

/// Where the recursion bottoms out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseCase {
    /// Recurse down to rank 0, where the function is a pure exponential.
    RankZero,
    /// Stop at rank 1 and use the confluent hypergeometric closed form.
    RankOne,
}

/// Gaps below this (relative to max(1, |X|)) count as a collapsed wall.
pub const WALL_COLLAPSE: f64 = 1e-13;
/// Spacing used for the perturbed interior point when a wall collapses.
pub const WALL_PERTURBATION: f64 = 1e-8;

const TOP_NODES: [usize; 6] = [1, 48, 32, 16, 12, 10];
const INNER_NODES: [usize; 6] = [1, 24, 16, 12, 8, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalQuad {
    pub base: BaseCase,
    /// Nodes per top-level coordinate (default depends on rank).
    pub top_nodes: Option<usize>,
    /// Nodes per coordinate at inner recursion depths.
    pub inner_nodes: Option<usize>,
    /// Re-run with refined top-level rules to produce an error indicator.
    pub estimate_error: bool,
    pub refine_factor: usize,
    pub execution: Execution,
    pub budget: f64,
}

impl Default for SphericalQuad {
    fn default() -> Self {
        Self {
            base: BaseCase::RankOne,
            top_nodes: None,
            inner_nodes: None,
            estimate_error: false,
            refine_factor: 2,
            execution: Execution::default(),
            budget: default_budget(),
        }
    }
}

impl SphericalQuad {
    pub fn with_error_estimate(mut self) -> Self {
        self.estimate_error = true;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.execution = Execution::Sequential;
        self
    }

    fn nodes(&self, rank: usize, top: bool) -> usize {
        let r = rank.min(TOP_NODES.len() - 1);
        if top {
            self.top_nodes.unwrap_or(TOP_NODES[r])
        } else {
            self.inner_nodes.unwrap_or(INNER_NODES[r])
        }
    }

    /// Number of base-case evaluations one call at this rank performs.
    pub fn cost(&self, rank: usize) -> f64 {
        let mut c = self.inner_cost(rank, true, 1);
        if self.estimate_error {
            c += self.inner_cost(rank, true, self.refine_factor);
        }
        c
    }

    fn inner_cost(&self, rank: usize, top: bool, factor: usize) -> f64 {
        if rank == 0 || (rank == 1 && self.base == BaseCase::RankOne) {
            return 1.0;
        }
        let q = (self.nodes(rank, top) * if top { factor } else { 1 }) as f64;
        q.powi(rank as i32) * self.inner_cost(rank - 1, false, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalParams {
    pub rs: RootSystemA,
    pub lambda: ChamberPoint,
    pub x: ChamberPoint,
    pub quad: SphericalQuad,
}

impl SphericalParams {
    pub fn new(rs: &RootSystemA, lambda: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        Ok(Self {
            rs: rs.clone(),
            lambda: ChamberPoint::new(rs, lambda)?,
            x: ChamberPoint::new(rs, x)?,
            quad: SphericalQuad::default(),
        })
    }

    pub fn with_quad(mut self, quad: SphericalQuad) -> Self {
        self.quad = quad;
        self
    }
}

struct Engine<'a> {
    k: f64,
    quad: &'a SphericalQuad,
}

/// x_i - x_j for i < j from consecutive gaps.
fn span(gaps: &[f64], i: usize, j: usize) -> f64 {
    gaps[i..j].iter().sum()
}

impl Engine<'_> {
    /// ln phi for lambda sorted decreasingly and the gaps of a decreasing point.
    fn ln_phi(&self, lam: &[f64], gaps: &[f64], top: bool, factor: usize) -> Result<(f64, u64)> {
        let m = gaps.len();
        if m == 0 {
            return Ok((0.0, 1));
        }
        if m == 1 && self.quad.base == BaseCase::RankOne {
            return Ok((ln_kummer_half(self.k, (lam[0] - lam[1]) * gaps[0]), 1));
        }
        let last = lam[m];
        let inner: Vec<f64> = lam[..m].iter().map(|l| l - last).collect();
        let rates: Vec<f64> = inner.iter().zip(gaps).map(|(l, g)| l * g).collect();
        // For sorted lambda the leftover exponent is exactly -sum(rates), which the
        // normalized level weights absorb.
        self.level_integral(&inner, &rates, gaps, 0.0, top, factor)
    }

    /// ln phi with the top-level lambda in an arbitrary order.
    fn ln_phi_unsorted(&self, lam: &[f64], gaps: &[f64], factor: usize) -> Result<(f64, u64)> {
        let m = gaps.len();
        let last = lam[m];
        let mut inner: Vec<f64> = lam[..m].iter().map(|l| l - last).collect();
        inner.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let rates: Vec<f64> = inner.iter().zip(gaps).map(|(l, g)| l * g).collect();
        // positions with x_{m+1} = 0
        let mut x = vec![0.0; m + 1];
        for i in (0..m).rev() {
            x[i] = x[i + 1] + gaps[i];
        }
        let mut sorted = lam.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let lead = last * x.iter().sum::<f64>() + (0..m).map(|r| inner[r] * x[r + 1]).sum::<f64>()
            - dot(&sorted, &x)
            + rates.iter().map(|c| c.max(0.0)).sum::<f64>();
        self.level_integral(&inner, &rates, gaps, lead, true, factor)
    }

    fn level_integral(
        &self,
        inner: &[f64],
        rates: &[f64],
        gaps: &[f64],
        lead: f64,
        top: bool,
        factor: usize,
    ) -> Result<(f64, u64)> {
        let k = self.k;
        let m = gaps.len();
        let q = self.quad.nodes(m, top) * factor;

        let mut ln_c = ln_gamma(k * (m as f64 + 1.0)) - (m as f64 + 1.0) * ln_gamma(k) + lead;
        let mut rules: Vec<Rule> = Vec::with_capacity(m);
        for i in 0..m {
            let d = gaps[i];
            let mut w = LevelWeight::jacobi(k - 1.0, k - 1.0);
            w.rate = rates[i];
            if k != 1.0 {
                for j in i + 2..=m {
                    w.left_factors.push((span(gaps, i + 1, j) / d, k - 1.0));
                }
                for j in 0..i {
                    w.right_factors.push((span(gaps, j, i) / d, k - 1.0));
                }
                let count = w.left_factors.len() + w.right_factors.len();
                ln_c += (k - 1.0) * count as f64 * d.ln();
            }
            for j in i + 2..=m {
                ln_c += (1.0 - 2.0 * k) * span(gaps, i, j).ln();
            }
            let r = level_rule(&w, q)?;
            ln_c += r.ln_mass;
            rules.push(r);
        }

        let sizes: Vec<usize> = rules.iter().map(|r| r.len()).collect();
        let total: usize = sizes.iter().product();
        let eval = |flat: usize| -> Result<(f64, u64)> {
            let mut rem = flat;
            let mut s = vec![0.0; m];
            let mut lw = 0.0;
            for lvl in (0..m).rev() {
                let i = rem % sizes[lvl];
                rem /= sizes[lvl];
                s[lvl] = rules[lvl].nodes[i];
                lw += rules[lvl].weights[i].ln();
            }
            let inner_gaps: Vec<f64> =
                (0..m - 1).map(|i| gaps[i] * s[i] + gaps[i + 1] * (1.0 - s[i + 1])).collect();
            let mut g = 0.0;
            for i in 0..m {
                for j in i + 1..m {
                    g += span(&inner_gaps, i, j).ln();
                }
            }
            let (phi, ev) = self.ln_phi(inner, &inner_gaps, false, 1)?;
            Ok((lw + g + phi, ev))
        };

        let terms: Vec<Result<(f64, u64)>> = if top {
            map_indexed(self.quad.execution, total, eval)
        } else {
            (0..total).map(eval).collect()
        };
        let mut acc = LogAccumulator::default();
        let mut evals = 0u64;
        for t in terms {
            let (v, e) = t?;
            if v.is_nan() {
                return Err(Error::NonFinite("spherical integrand".into()));
            }
            acc.add(v);
            evals += e;
        }
        Ok((ln_c + acc.ln(), evals))
    }
}

/// Active-coordinate gaps, with collapsed walls moved to a nearby interior point.
fn prepared_gaps(rs: &RootSystemA, x: &[f64]) -> Vec<f64> {
    let sc = scale(x);
    rs.gaps(x)
        .into_iter()
        .map(|g| if g < WALL_COLLAPSE * sc { WALL_PERTURBATION * sc } else { g })
        .collect()
}

fn check_pair(rs: &RootSystemA, lambda: &[f64], x: &[f64]) -> Result<()> {
    for v in [lambda, x] {
        if v.len() != rs.coord_len() {
            return Err(Error::InvalidDimension(format!(
                "expected {} coordinates, got {}",
                rs.coord_len(),
                v.len()
            )));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
    }
    Ok(())
}

fn run(
    quad: &SphericalQuad,
    k: f64,
    rank: usize,
    f: impl Fn(&Engine, usize) -> Result<(f64, u64)>,
) -> Result<KernelValue> {
    if quad.refine_factor < 2 {
        return Err(Error::Config("refine factor must be >= 2".into()));
    }
    check_budget(quad.cost(rank), quad.budget)?;
    let eng = Engine { k, quad };
    let (v, e) = f(&eng, 1)?;
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("ln phi = {v}")));
    }
    let mut rel = 0.0;
    let mut evals = e;
    if quad.estimate_error {
        let (w, e2) = f(&eng, quad.refine_factor)?;
        rel = (v - w).exp_m1().abs();
        evals += e2;
    }
    Ok(KernelValue::positive(v, rel, evals))
}

/// ln phi_lambda(X) = ln psi_lambda(e^X) - lambda(X) for chamber points (active coordinates).
pub fn spherical_normalized(
    rs: &RootSystemA,
    lambda: &[f64],
    x: &[f64],
    quad: &SphericalQuad,
) -> Result<KernelValue> {
    check_pair(rs, lambda, x)?;
    if !rs.in_closed_chamber(lambda) || !rs.in_closed_chamber(x) {
        return Err(Error::OutsideChamber(format!("lambda = {lambda:?}, X = {x:?}")));
    }
    let lam = rs.active_values(lambda);
    let gaps = prepared_gaps(rs, x);
    run(quad, rs.k(), rs.rank(), |eng, f| eng.ln_phi(&lam, &gaps, true, f))
}

/// psi_lambda(e^X), returned in log space.
pub fn spherical_exact(p: &SphericalParams) -> Result<KernelValue> {
    let mut v = spherical_normalized(&p.rs, &p.lambda, &p.x, &p.quad)?;
    v.ln_abs += dot(&p.lambda, &p.x);
    Ok(v)
}

/// psi_lambda(e^X) with lambda taken in the given (not necessarily chamber) order
/// when forming the recursion. The value is invariant under permuting lambda;
/// this entry point exists to exercise that invariance.
pub fn spherical_unsorted(
    rs: &RootSystemA,
    lambda: &[f64],
    x: &[f64],
    quad: &SphericalQuad,
) -> Result<KernelValue> {
    check_pair(rs, lambda, x)?;
    if !rs.in_closed_chamber(x) {
        return Err(Error::OutsideChamber(format!("X = {x:?}")));
    }
    let lam = rs.active_values(lambda);
    let gaps = prepared_gaps(rs, x);
    let mut v = run(quad, rs.k(), rs.rank(), |eng, f| eng.ln_phi_unsorted(&lam, &gaps, f))?;
    let sorted = rs.to_chamber(lambda);
    v.ln_abs += dot(&sorted, x);
    Ok(v)
}

/// ln of the sharp envelope e^{lambda(X)} / prod (1 + alpha(lambda) alpha(X))^k.
pub fn spherical_envelope(rs: &RootSystemA, lambda: &[f64], x: &[f64]) -> f64 {
    dot(lambda, x)
        - rs.k()
            * rs.positive_roots()
                .iter()
                .map(|&r| (1.0 + rs.pairing(r, lambda) * rs.pairing(r, x)).ln())
                .sum::<f64>()
}

/// Closed form at k = 1: (prod_{j<=n} j!) det(e^{lambda_i x_j}) / (pi(lambda) pi(X)), in log space.
pub fn spherical_oracle_k1(rs: &RootSystemA, lambda: &[f64], x: &[f64]) -> Result<f64> {
    check_pair(rs, lambda, x)?;
    if rs.k() != 1.0 {
        return Err(Error::Precondition(format!("closed form needs k = 1, got {}", rs.k())));
    }
    let lam = rs.active_values(&rs.to_chamber(lambda));
    let xs = rs.active_values(&rs.to_chamber(x));
    let n1 = lam.len();
    let sc = scale(&lam) * scale(&xs);
    for v in [&lam, &xs] {
        if v.windows(2).any(|w| w[0] - w[1] <= 1e-12 * sc) {
            return Err(Error::DegenerateArgument("repeated entries in lambda or X".into()));
        }
    }
    // Row/column scaling makes every entry <= 1 with unit diagonal.
    let mut b = vec![0.0; n1];
    for j in (0..n1 - 1).rev() {
        b[j] = b[j + 1] + lam[j] * (xs[j] - xs[j + 1]);
    }
    let a: Vec<f64> = (0..n1).map(|i| lam[i] * xs[i] - b[i]).collect();
    let mut mat: Vec<Vec<f64>> =
        (0..n1).map(|i| (0..n1).map(|j| (lam[i] * xs[j] - a[i] - b[j]).exp()).collect()).collect();
    let (ln_det, sign) = ln_det_lu(&mut mat);
    if sign <= 0.0 {
        return Err(Error::NonFinite("k = 1 determinant lost positivity".into()));
    }
    let ln_fact: f64 = (1..n1).map(|j| ln_gamma(j as f64 + 1.0)).sum();
    let mut ln_pi = 0.0;
    for i in 0..n1 {
        for j in i + 1..n1 {
            ln_pi += (lam[i] - lam[j]).ln() + (xs[i] - xs[j]).ln();
        }
    }
    let inactive: f64 = rs.inactive().iter().map(|&c| lambda[c] * x[c]).sum();
    Ok(ln_fact + ln_det + a.iter().sum::<f64>() + b.iter().sum::<f64>() - ln_pi + inactive)
}

/// ln |det| and sign by LU with partial pivoting (destroys the input).
fn ln_det_lu(m: &mut [Vec<f64>]) -> (f64, f64) {
    let n = m.len();
    let mut sign = 1.0;
    let mut ln = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap()).unwrap();
        if m[p][c] == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if p != c {
            m.swap(p, c);
            sign = -sign;
        }
        let piv = m[c][c];
        if piv < 0.0 {
            sign = -sign;
        }
        ln += piv.abs().ln();
        for r in c + 1..n {
            let f = m[r][c] / piv;
            if f != 0.0 {
                for j in c..n {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
    }
    (ln, sign)
}
