//! s-stable W-invariant kernel h_t(X, Y) = int_0^inf p_u(X, Y) eta_t(u) du and its envelopes.

use crate::error::{Error, Result};
use crate::heatkernel::{heat_raw, ln_c_norm};
use crate::quad::gauss::{jacobi_unit_cached, legendre_unit};
use crate::quad::KernelValue;
use crate::rootsys::{dist_sq, ChamberPoint, RootSystemA};
use crate::special::log_sum_exp;
use crate::spherical::SphericalQuad;
use crate::subordinator::{contour_sine_with_floor, ln_subordinator_density, SubordinatorMethod};
use serde::{Deserialize, Serialize};

/// Gauss nodes per panel of the ln u integral.
const V_NODES: usize = 12;
/// Coarse nodes for the error indicator.
const V_NODES_COARSE: usize = 8;
/// Spacing of the ln u scan.
const V_STEP: f64 = 0.5;
/// Panels whose scan values lie this far below the peak are dropped.
const V_DROP: f64 = 45.0;
/// The scan stops once the integrand is this far below the peak.
const V_STOP: f64 = 60.0;
const V_MAX_STEPS: usize = 600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub rs: RootSystemA,
    pub s: f64,
    pub t: f64,
    pub x: ChamberPoint,
    pub y: ChamberPoint,
    pub quad: SphericalQuad,
    pub method: SubordinatorMethod,
}

impl StableParams {
    pub fn new(rs: &RootSystemA, s: f64, t: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check(s, t)?;
        Ok(Self {
            rs: rs.clone(),
            s,
            t,
            x: ChamberPoint::new(rs, x)?,
            y: ChamberPoint::new(rs, y)?,
            quad: SphericalQuad::default(),
            method: SubordinatorMethod::Auto,
        })
    }

    pub fn with_method(mut self, method: SubordinatorMethod) -> Self {
        self.method = method;
        self
    }
}

fn check(s: f64, t: f64) -> Result<()> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::Domain(format!("stability index must lie in (0, 2), got {s}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// Signed integrand sample: (ln |f|, sign).
type Sample = (f64, f64);

struct Integral {
    ln_abs: f64,
    sign: f64,
    rel_error: f64,
    evaluations: u64,
}

fn signed_sum(terms: &[Sample]) -> (f64, f64) {
    let m = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, 1.0);
    }
    let s: f64 = terms.iter().map(|&(l, sg)| sg * (l - m).exp()).sum();
    (m + s.abs().ln(), if s < 0.0 { -1.0 } else { 1.0 })
}

/// int f(v) dv over the line, where f decays on both sides of the starting
/// points. The scan runs outward from `starts` in steps of V_STEP; panels
/// near the peak get a Gauss rule. `tail_rate` adds f(V)/rate beyond the
/// upper end of the scan (power-law decay in u).
fn integrate_log_line(
    starts: (f64, f64),
    tail_rate: f64,
    mut f: impl FnMut(f64) -> Result<Sample>,
) -> Result<Integral> {
    let (a, b) = if starts.0 <= starts.1 { starts } else { (starts.1, starts.0) };
    let mut evals = 0u64;
    let mut grid: Vec<(f64, f64)> = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    // interior and upward scan
    let mut v = a;
    let mut steps = 0;
    loop {
        let (l, _) = f(v)?;
        evals += 1;
        peak = peak.max(l);
        grid.push((v, l));
        steps += 1;
        if v >= b && steps >= 4 && l < peak - V_STOP && is_falling(&grid) {
            break;
        }
        if steps > V_MAX_STEPS + ((b - a) / V_STEP) as usize {
            return Err(Error::Accuracy("subordination integrand does not decay as u grows".into()));
        }
        v += V_STEP;
    }
    // downward scan
    let mut down: Vec<(f64, f64)> = Vec::new();
    let mut v = a - V_STEP;
    loop {
        let (l, _) = f(v)?;
        evals += 1;
        peak = peak.max(l);
        down.push((v, l));
        let n = down.len();
        if n >= 4 && l < peak - V_STOP && (n < 2 || l <= down[n - 2].1) {
            break;
        }
        if n > V_MAX_STEPS {
            return Err(Error::Accuracy("subordination integrand does not decay as u shrinks".into()));
        }
        v -= V_STEP;
    }
    down.reverse();
    down.extend(grid);
    let grid = down;

    let fine = legendre_unit(V_NODES)?;
    let coarse = legendre_unit(V_NODES_COARSE)?;
    let mut terms_f = Vec::new();
    let mut terms_c = Vec::new();
    for p in grid.windows(2) {
        let ((lo, l0), (hi, l1)) = (p[0], p[1]);
        if l0.max(l1) < peak - V_DROP {
            continue;
        }
        let h = hi - lo;
        for (rule, out) in [(&fine, &mut terms_f), (&coarse, &mut terms_c)] {
            for (&tn, &w) in rule.nodes.iter().zip(&rule.weights) {
                let (l, sg) = f(lo + h * tn)?;
                evals += 1;
                out.push(((w * h).ln() + l, sg));
            }
        }
    }
    let (last_v, last_l) = *grid.last().unwrap();
    let _ = last_v;
    terms_f.push((last_l - tail_rate.ln(), 1.0));
    terms_c.push((last_l - tail_rate.ln(), 1.0));
    let (lf, sf) = signed_sum(&terms_f);
    let (lc, sc) = signed_sum(&terms_c);
    if !lf.is_finite() {
        return Err(Error::NonFinite("subordination integral".into()));
    }
    let rel = (sf - sc * (lc - lf).exp()).abs();
    Ok(Integral { ln_abs: lf, sign: sf, rel_error: rel, evaluations: evals })
}

fn is_falling(grid: &[(f64, f64)]) -> bool {
    let n = grid.len();
    n < 2 || grid[n - 1].1 <= grid[n - 2].1
}

fn ln_eta(s: f64, t: f64, u: f64, method: SubordinatorMethod) -> Result<Sample> {
    if method == SubordinatorMethod::ContourSine {
        let (v, floor) = contour_sine_with_floor(s, t, u)?;
        if v.abs() <= floor {
            // indistinguishable from zero at this precision
            return Ok((f64::NEG_INFINITY, 1.0));
        }
        Ok((v.abs().ln(), if v < 0.0 { -1.0 } else { 1.0 }))
    } else {
        Ok((ln_subordinator_density(s, t, u, method)?, 1.0))
    }
}

/// h_t(X, Y) by subordination, integrated in v = ln u with the scan anchored
/// at the regime boundary u = t^{2/s} and at u = |X - Y|^2.
pub fn stable_exact(p: &StableParams) -> Result<KernelValue> {
    check(p.s, p.t)?;
    let rs = &p.rs;
    let ln_c = ln_c_norm(rs);
    let a = 0.5 * rs.dim() as f64 + rs.gamma();
    let v0 = 2.0 / p.s * p.t.ln();
    let r2 = dist_sq(&p.x, &p.y);
    let vr = if r2 > 0.0 { r2.ln() } else { v0 };
    let mut spherical_evals = 0u64;
    let r = integrate_log_line((v0, vr.max(v0 - 40.0)), a + 0.5 * p.s, |v| {
        let u = v.exp();
        let (le, sg) = ln_eta(p.s, p.t, u, p.method)?;
        if le == f64::NEG_INFINITY {
            return Ok((f64::NEG_INFINITY, 1.0));
        }
        let hk = heat_raw(rs, u, &p.x, &p.y, ln_c, &p.quad)?;
        spherical_evals += hk.evaluations;
        Ok((v + hk.ln_abs + le, sg))
    })?;
    Ok(KernelValue { ln_abs: r.ln_abs, sign: r.sign, rel_error: r.rel_error, evaluations: spherical_evals + r.evaluations })
}

/// ln of |W| int_{chamber} h_t(X, Y) w_k(Y) dY for the trace-zero rank-one
/// system, integrated directly over the chamber coordinate g = alpha(Y).
pub fn stable_mass_ln(rs: &RootSystemA, s: f64, t: f64, x: &[f64], quad: &SphericalQuad) -> Result<f64> {
    check(s, t)?;
    if !(rs.rank() == 1 && rs.is_trace_zero()) {
        return Err(Error::Precondition(
            "the stable mass integral is implemented for the trace-zero rank-one system".into(),
        ));
    }
    let x = ChamberPoint::new(rs, x.to_vec())?;
    let gx = x[0] - x[1];
    let k = rs.k();
    let scale = t.powf(1.0 / s);
    let ln_h = |g: f64| -> Result<f64> {
        let y = vec![0.5 * g, -0.5 * g];
        let mut sp = StableParams::new(rs, s, t, x.to_vec(), y)?;
        sp.quad = quad.clone();
        Ok(stable_exact(&sp)?.ln_abs)
    };
    let base = scale.max(gx);
    let mut edges: Vec<f64> = (-24..=72).map(|j| base * 2f64.powi(j)).collect();
    if gx > 0.0 {
        for j in -6..=4 {
            let w = scale.min(gx) * 2f64.powi(j);
            edges.push(gx + w);
            if gx - w > 0.0 {
                edges.push(gx - w);
            }
        }
    }
    edges.push(0.0);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    let leg = legendre_unit(8)?;
    let head = jacobi_unit_cached(8, 2.0 * k, 0.0)?;
    let mut terms = Vec::new();
    for p in edges.windows(2) {
        let (lo, hi) = (p[0], p[1]);
        let h = hi - lo;
        if lo == 0.0 {
            for (&tn, &w) in head.nodes.iter().zip(&head.weights) {
                terms.push(w.ln() + head.ln_mass + (2.0 * k + 1.0) * h.ln() + ln_h(h * tn)?);
            }
        } else {
            for (&tn, &w) in leg.nodes.iter().zip(&leg.weights) {
                let g = lo + h * tn;
                terms.push((w * h).ln() + 2.0 * k * g.ln() + ln_h(g)?);
            }
        }
    }
    // integrand ~ g^{-1-s} beyond the last edge
    let g_end = *edges.last().unwrap();
    terms.push(2.0 * k * g_end.ln() + ln_h(g_end)? + g_end.ln() - s.ln());
    let w_order = rs.weyl_order() as f64;
    Ok(w_order.ln() - 0.5 * 2f64.ln() + log_sum_exp(&terms))
}

/// ln of t / (t^{2/s} + |X - Y|^2)^{(d+s)/2}.
pub fn euclid_stable_envelope(d: usize, s: f64, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let d = d as f64;
    t.ln() - 0.5 * (d + s) * (t.powf(2.0 / s) + dist_sq(x, y)).ln()
}

/// ln of min(t^{-d/s}, t |X - Y|^{-(d+s)}).
pub fn euclid_stable_min_form(d: usize, s: f64, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let d = d as f64;
    let near = -d / s * t.ln();
    let r2 = dist_sq(x, y);
    if r2 == 0.0 {
        return near;
    }
    near.min(t.ln() - 0.5 * (d + s) * r2.ln())
}

/// Constant relating the two Euclidean forms: 2^{(d+s)/2}.
pub fn euclid_min_form_constant(d: usize, s: f64) -> f64 {
    2f64.powf(0.5 * (d as f64 + s))
}

/// ln of the Euclidean envelope over prod (t^{2/s} + |X - Y|^2 + alpha(X) alpha(Y))^k.
pub fn stable_envelope(rs: &RootSystemA, s: f64, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let base = t.powf(2.0 / s) + dist_sq(x, y);
    euclid_stable_envelope(rs.dim(), s, t, x, y)
        - rs.k()
            * rs.positive_roots()
                .iter()
                .map(|&r| (base + rs.pairing(r, x) * rs.pairing(r, y)).ln())
                .sum::<f64>()
}

/// Same envelope written with the reflected distances |X - sigma_alpha Y|^2.
pub fn stable_envelope_reflected(rs: &RootSystemA, s: f64, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let t2 = t.powf(2.0 / s);
    euclid_stable_envelope(rs.dim(), s, t, x, y)
        - rs.k()
            * rs.positive_roots()
                .iter()
                .map(|&r| (t2 + rs.reflected_distance_sq(r, x, y)).ln())
                .sum::<f64>()
}
