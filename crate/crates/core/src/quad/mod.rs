//! Quadrature engine: Gauss rules, weighted level rules, half-line and nested tensor integration.

pub mod gauss;
pub mod halfline;
pub mod simpson;
pub mod weighted;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::special::LogAccumulator;
use serde::{Deserialize, Serialize};

pub use gauss::Rule;

/// Default cap on integrand evaluations for a single request.
pub const DEFAULT_BUDGET: f64 = 1e9;

/// Evaluation cap, overridable through the DUNKL_BUDGET environment variable.
pub fn default_budget() -> f64 {
    std::env::var("DUNKL_BUDGET")
        .ok()
        .and_then(|v| v.parse::<f64>().ok())
        .filter(|v| *v > 0.0)
        .unwrap_or(DEFAULT_BUDGET)
}

pub fn check_budget(required: f64, cap: f64) -> Result<()> {
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }
    Ok(())
}

/// A kernel or integral value carried in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub ln_abs: f64,
    pub sign: f64,
    /// Relative error indicator from a refinement comparison (0 if not estimated).
    pub rel_error: f64,
    pub evaluations: u64,
}

impl KernelValue {
    pub fn positive(ln_abs: f64, rel_error: f64, evaluations: u64) -> Self {
        Self { ln_abs, sign: 1.0, rel_error, evaluations }
    }

    pub fn from_value(v: f64, rel_error: f64, evaluations: u64) -> Self {
        Self { ln_abs: v.abs().ln(), sign: if v < 0.0 { -1.0 } else { 1.0 }, rel_error, evaluations }
    }

    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFamily {
    GaussJacobi,
    GaussLegendre,
    GaussLaguerre,
    AdaptiveSimpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub family: RuleFamily,
    pub nodes: usize,
    /// Exponent of (x - lo) in the weight (Laguerre: of x - lo with e^{-(x - lo)}).
    pub left_exp: f64,
    /// Exponent of (hi - x) in the weight.
    pub right_exp: f64,
    pub refine_factor: usize,
    /// Target absolute tolerance for adaptive Simpson.
    pub tol: f64,
}

impl QuadratureSpec {
    pub fn new(family: RuleFamily, nodes: usize) -> Self {
        Self { family, nodes, left_exp: 0.0, right_exp: 0.0, refine_factor: 2, tol: 1e-10 }
    }

    pub fn jacobi(nodes: usize, left_exp: f64, right_exp: f64) -> Self {
        Self { left_exp, right_exp, ..Self::new(RuleFamily::GaussJacobi, nodes) }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 2 && self.family != RuleFamily::AdaptiveSimpson {
            return Err(Error::InvalidNodeCount(self.nodes));
        }
        if self.refine_factor < 2 {
            return Err(Error::Config(format!("refine factor {} must be >= 2", self.refine_factor)));
        }
        for e in [self.left_exp, self.right_exp] {
            if !(e > -1.0) {
                return Err(Error::InvalidExponent(e));
            }
        }
        Ok(())
    }

    /// Rule on [lo, hi] (or [lo, inf) for Laguerre) with unnormalized weights.
    fn rule(&self, lo: f64, hi: f64, q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        match self.family {
            RuleFamily::GaussLaguerre => {
                let r = gauss::laguerre(q, self.left_exp)?;
                let m = r.ln_mass.exp();
                Ok((r.nodes.iter().map(|u| lo + u).collect(), r.weights.iter().map(|w| w * m).collect()))
            }
            RuleFamily::GaussLegendre | RuleFamily::GaussJacobi => {
                let (a, b) = if self.family == RuleFamily::GaussLegendre {
                    (0.0, 0.0)
                } else {
                    (self.left_exp, self.right_exp)
                };
                let r = gauss::jacobi_unit_cached(q, a, b)?;
                let h = hi - lo;
                let m = (r.ln_mass + (a + b + 1.0) * h.ln()).exp();
                Ok((r.nodes.iter().map(|s| lo + h * s).collect(), r.weights.iter().map(|w| w * m).collect()))
            }
            RuleFamily::AdaptiveSimpson => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn half_line(lo: f64) -> Self {
        Self { lo, hi: f64::INFINITY }
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
    }
}

/// One-dimensional weighted integral with a refinement error indicator.
pub fn integrate_1d(
    spec: &QuadratureSpec,
    interval: Interval,
    f: impl Fn(f64) -> f64,
) -> Result<KernelValue> {
    spec.validate()?;
    let Interval { lo, hi } = interval;
    match spec.family {
        RuleFamily::GaussLaguerre => {
            if hi != f64::INFINITY || !lo.is_finite() {
                return Err(Error::DegenerateInterval { lo, hi });
            }
        }
        _ => {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::DegenerateInterval { lo, hi });
            }
        }
    }
    if spec.family == RuleFamily::AdaptiveSimpson {
        let g = |x: f64| (x - lo).powf(spec.left_exp) * (hi - x).powf(spec.right_exp) * f(x);
        let coarse = simpson::adaptive_simpson(lo, hi, spec.tol, 50, &g)?;
        let fine = simpson::adaptive_simpson(lo, hi, spec.tol / spec.refine_factor as f64, 50, &g)?;
        return Ok(KernelValue::from_value(
            fine.value,
            rel_diff(coarse.value, fine.value).max(fine.error / fine.value.abs().max(f64::MIN_POSITIVE)),
            coarse.evaluations + fine.evaluations,
        ));
    }
    let run = |q: usize| -> Result<f64> {
        let (x, w) = spec.rule(lo, hi, q)?;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let v = f(*xi);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("integrand at x = {xi}")));
            }
            s += wi * v;
        }
        Ok(s)
    };
    let base = run(spec.nodes)?;
    let fine_q = spec.nodes * spec.refine_factor;
    let fine = run(fine_q)?;
    Ok(KernelValue::from_value(base, rel_diff(base, fine), (spec.nodes + fine_q) as u64))
}

/// One level of a nested domain: y in [lo, hi] with weight (y - lo)^a (hi - y)^b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestedLevel {
    pub lo: f64,
    pub hi: f64,
    pub left_exp: f64,
    pub right_exp: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedDomain {
    pub levels: Vec<NestedLevel>,
}

impl NestedDomain {
    /// Interlacing box y_i in [x_{i+1}, x_i] for a decreasing outer point x, with
    /// endpoint exponents k - 1 on both sides.
    pub fn interlacing(x: &[f64], k: f64, nodes: usize) -> Result<Self> {
        let mut levels = Vec::new();
        for w in x.windows(2) {
            if !(w[0] > w[1]) {
                return Err(Error::DegenerateInterval { lo: w[1], hi: w[0] });
            }
            levels.push(NestedLevel { lo: w[1], hi: w[0], left_exp: k - 1.0, right_exp: k - 1.0, nodes });
        }
        Ok(Self { levels })
    }

    pub fn tensor_size(&self) -> f64 {
        self.levels.iter().map(|l| l.nodes as f64).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedOptions {
    pub refine_factor: usize,
    pub budget: f64,
    pub execution: Execution,
}

impl Default for NestedOptions {
    fn default() -> Self {
        Self { refine_factor: 2, budget: default_budget(), execution: Execution::default() }
    }
}

/// Tensor-product Gauss-Jacobi integral over a box, summed in log space.
///
/// The integrand returns values of either sign; positive and negative parts
/// are accumulated separately. The error indicator compares against a run with
/// every level refined by `refine_factor`.
pub fn integrate_nested(
    domain: &NestedDomain,
    f: impl Fn(&[f64]) -> f64 + Sync + Send,
    opts: &NestedOptions,
) -> Result<KernelValue> {
    if domain.levels.is_empty() {
        return Err(Error::Config("nested domain has no levels".into()));
    }
    if opts.refine_factor < 2 {
        return Err(Error::Config("refine factor must be >= 2".into()));
    }
    let base = domain.tensor_size();
    let fine = base * (opts.refine_factor as f64).powi(domain.levels.len() as i32);
    check_budget(base + fine, opts.budget)?;
    for l in &domain.levels {
        if !(l.hi > l.lo) {
            return Err(Error::DegenerateInterval { lo: l.lo, hi: l.hi });
        }
        if l.nodes < 2 {
            return Err(Error::InvalidNodeCount(l.nodes));
        }
    }

    let run = |factor: usize| -> Result<f64> {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = domain
            .levels
            .iter()
            .map(|l| QuadratureSpec::jacobi(l.nodes * factor, l.left_exp, l.right_exp).rule(l.lo, l.hi, l.nodes * factor))
            .collect::<Result<_>>()?;
        let sizes: Vec<usize> = rules.iter().map(|r| r.0.len()).collect();
        let outer = sizes[0];
        let parts = map_indexed(opts.execution, outer, |i0| -> Result<(LogAccumulator, LogAccumulator)> {
            let mut pos = LogAccumulator::default();
            let mut neg = LogAccumulator::default();
            let mut idx = vec![0usize; sizes.len()];
            idx[0] = i0;
            let mut y = vec![0.0; sizes.len()];
            loop {
                let mut lw = 0.0;
                for (lvl, &i) in idx.iter().enumerate() {
                    y[lvl] = rules[lvl].0[i];
                    lw += rules[lvl].1[i].ln();
                }
                let v = f(&y);
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("integrand at {y:?}")));
                }
                if v > 0.0 {
                    pos.add(lw + v.ln());
                } else if v < 0.0 {
                    neg.add(lw + (-v).ln());
                }
                // odometer over levels 1..
                let mut lvl = sizes.len() - 1;
                loop {
                    if lvl == 0 {
                        return Ok((pos, neg));
                    }
                    idx[lvl] += 1;
                    if idx[lvl] < sizes[lvl] {
                        break;
                    }
                    idx[lvl] = 0;
                    lvl -= 1;
                }
            }
        });
        let mut pos = LogAccumulator::default();
        let mut neg = LogAccumulator::default();
        for p in parts {
            let (a, b) = p?;
            pos = pos.merge(a);
            neg = neg.merge(b);
        }
        Ok(pos.ln().exp() - neg.ln().exp())
    };
    let coarse = run(1)?;
    let refined = run(opts.refine_factor)?;
    Ok(KernelValue::from_value(coarse, rel_diff(coarse, refined), (base + fine) as u64))
}
