//! Gauss rules for the per-level weights of the interlacing integrals.
//!
//! A level weight on [0, 1] is
//!   s^a (1 - s)^b exp(c s - max(c, 0)) prod (s + e_l)^{p_l} prod (1 - s + f_r)^{q_r}.
//! When c is large or some e_l, f_r are small the weight has boundary layers; a
//! graded composite discretization feeds the Stieltjes procedure so that the
//! resulting rule integrates polynomials against the true weight.

use super::gauss::{from_discrete_measure, jacobi_unit_cached, legendre_unit, Rule};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelWeight {
    pub left_exp: f64,
    pub right_exp: f64,
    pub rate: f64,
    pub left_factors: Vec<(f64, f64)>,
    pub right_factors: Vec<(f64, f64)>,
}

/// Above this |rate| or below this factor distance the weight is discretized
/// on a graded mesh instead of folded into a Jacobi product rule.
const MILD_RATE: f64 = 8.0;
const MILD_DISTANCE: f64 = 0.25;
/// Panels where the exponential factor is below e^-CUTOFF are dropped.
const CUTOFF: f64 = 100.0;
const GRADING: f64 = 3.0;
const MIN_LAYER: f64 = 1e-15;

impl LevelWeight {
    pub fn jacobi(left_exp: f64, right_exp: f64) -> Self {
        Self { left_exp, right_exp, rate: 0.0, left_factors: vec![], right_factors: vec![] }
    }

    /// Log of everything except the two endpoint powers, given s and u = 1 - s.
    pub fn ln_smooth(&self, s: f64, u: f64) -> f64 {
        let mut v = if self.rate > 0.0 { -self.rate * u } else { self.rate * s };
        for &(e, p) in &self.left_factors {
            v += p * (s + e).ln();
        }
        for &(f, q) in &self.right_factors {
            v += q * (u + f).ln();
        }
        v
    }

    pub fn ln_density(&self, s: f64, u: f64) -> f64 {
        self.left_exp * s.ln() + self.right_exp * u.ln() + self.ln_smooth(s, u)
    }

    fn is_mild(&self) -> bool {
        self.rate.abs() <= MILD_RATE
            && self.left_factors.iter().all(|&(e, _)| e >= MILD_DISTANCE)
            && self.right_factors.iter().all(|&(f, _)| f >= MILD_DISTANCE)
    }

    fn layer_scales(&self) -> (f64, f64) {
        let mut left = f64::INFINITY;
        let mut right = f64::INFINITY;
        for &(e, _) in &self.left_factors {
            if e < MILD_DISTANCE {
                left = left.min(e);
            }
        }
        for &(f, _) in &self.right_factors {
            if f < MILD_DISTANCE {
                right = right.min(f);
            }
        }
        if self.rate > MILD_RATE {
            right = right.min(1.0 / self.rate);
        } else if self.rate < -MILD_RATE {
            left = left.min(-1.0 / self.rate);
        }
        (left.max(MIN_LAYER), right.max(MIN_LAYER))
    }

    /// Graded breakpoints on [0, 1/2], measured from one endpoint.
    fn side_breakpoints(layer: f64) -> Vec<f64> {
        let mut pts = vec![0.0];
        if layer.is_finite() {
            let mut b = layer;
            while b < 0.5 / GRADING.sqrt() {
                pts.push(b);
                b *= GRADING;
            }
        }
        pts.push(0.5);
        pts
    }

    /// The exponential factor is below e^-CUTOFF on the whole panel.
    fn negligible(&self, from_right: bool, lo: f64, hi: f64) -> bool {
        // distance to the end where exp(rate s - max(rate, 0)) equals one
        let near = match (self.rate > 0.0, from_right) {
            (true, true) | (false, false) => lo,
            (true, false) | (false, true) => 1.0 - hi,
        };
        self.rate.abs() * near > CUTOFF
    }
}

/// Build a q-point rule for the weight, normalized weights plus ln of the total mass.
pub fn level_rule(w: &LevelWeight, q: usize) -> Result<Rule> {
    let (a, b) = (w.left_exp, w.right_exp);
    if w.is_mild() {
        let base = jacobi_unit_cached(q, a, b)?;
        if w.rate == 0.0 && w.left_factors.is_empty() && w.right_factors.is_empty() {
            return Ok((*base).clone());
        }
        let lns: Vec<f64> = base.nodes.iter().map(|&s| w.ln_smooth(s, 1.0 - s)).collect();
        let shift = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> =
            base.weights.iter().zip(&lns).map(|(wi, l)| wi * (l - shift).exp()).collect();
        let tot: f64 = raw.iter().sum();
        return Ok(Rule {
            nodes: base.nodes.clone(),
            weights: raw.iter().map(|v| v / tot).collect(),
            ln_mass: base.ln_mass + shift + tot.ln(),
        });
    }

    let qd = q + 8;
    let (ls, rs) = w.layer_scales();
    let leg = legendre_unit(qd)?;
    let mut xs = Vec::new();
    let mut lnw = Vec::new();
    for (from_right, layer, end_exp, far_exp) in [(false, ls, a, b), (true, rs, b, a)] {
        let pts = LevelWeight::side_breakpoints(layer);
        for (idx, pair) in pts.windows(2).enumerate() {
            let (lo, hi) = (pair[0], pair[1]);
            if w.negligible(from_right, lo, hi) {
                continue;
            }
            let h = hi - lo;
            // v is the distance from the panel's own endpoint (s on the left, u on the right)
            let mut push = |v: f64, ln_wt: f64| {
                let (s, u) = if from_right { (1.0 - v, v) } else { (v, 1.0 - v) };
                let ln_far = if from_right { far_exp * s.ln() } else { far_exp * u.ln() };
                xs.push(s);
                lnw.push(ln_wt + ln_far + w.ln_smooth(s, u));
            };
            if idx == 0 {
                let r = jacobi_unit_cached(qd, end_exp, 0.0)?;
                for (&t, &wt) in r.nodes.iter().zip(&r.weights) {
                    push(h * t, wt.ln() + r.ln_mass + (end_exp + 1.0) * h.ln());
                }
            } else {
                for (&t, &wt) in leg.nodes.iter().zip(&leg.weights) {
                    let v = lo + h * t;
                    push(v, (wt * h).ln() + end_exp * v.ln());
                }
            }
        }
    }
    let shift = lnw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = lnw.iter().map(|l| (l - shift).exp()).collect();
    let mut rule = from_discrete_measure(&xs, &ws, q)?;
    rule.ln_mass += shift;
    Ok(rule)
}
