//! W-invariant Dunkl heat kernel, its envelope, and structural checks
//! (mass, Chapman-Kolmogorov, generator residual).

use crate::chamber::{centered_from_gaps, gap_integral, GapGrid};
use crate::error::{Error, Result};
use crate::quad::KernelValue;
use crate::rootsys::{dist_sq, ChamberPoint, RootSystemA};
use crate::spherical::{spherical_normalized, SphericalQuad};
use crate::special::ln_gamma;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// ln of the Macdonald-Mehta normalization
/// c_k = int e^{-|x|^2/2} w_k(x) dx = (2 pi)^{d/2} prod_{j=1}^{n+1} Gamma(1 + jk) / Gamma(1 + k).
pub fn ln_c_norm(rs: &RootSystemA) -> f64 {
    let k = rs.k();
    let d = rs.dim() as f64;
    0.5 * d * (2.0 * PI).ln()
        + (1..=rs.rank() + 1).map(|j| ln_gamma(1.0 + j as f64 * k) - ln_gamma(1.0 + k)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatParams {
    pub rs: RootSystemA,
    pub t: f64,
    pub x: ChamberPoint,
    pub y: ChamberPoint,
    /// Replaces ln c_k (used for fault injection and for the empirical constant).
    pub ln_c_norm: Option<f64>,
    pub quad: SphericalQuad,
}

impl HeatParams {
    pub fn new(rs: &RootSystemA, t: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_time(t)?;
        Ok(Self {
            rs: rs.clone(),
            t,
            x: ChamberPoint::new(rs, x)?,
            y: ChamberPoint::new(rs, y)?,
            ln_c_norm: None,
            quad: SphericalQuad::default(),
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// ln p_t(X, Y) = -ln c - (gamma + d/2) ln 2 - (d/2 + gamma) ln t - |X - Y|^2/4t + ln phi_X(Y / 2t).
pub fn heat_exact(p: &HeatParams) -> Result<KernelValue> {
    check_time(p.t)?;
    heat_raw(&p.rs, p.t, &p.x, &p.y, p.ln_c_norm.unwrap_or_else(|| ln_c_norm(&p.rs)), &p.quad)
}

pub(crate) fn heat_raw(
    rs: &RootSystemA,
    t: f64,
    x: &[f64],
    y: &[f64],
    ln_c: f64,
    quad: &SphericalQuad,
) -> Result<KernelValue> {
    let mut v = spherical_normalized(rs, x, &scaled(y, 0.5 / t), quad)?;
    v.ln_abs += heat_prefactor(rs, t, ln_c) - dist_sq(x, y) / (4.0 * t);
    Ok(v)
}

fn heat_prefactor(rs: &RootSystemA, t: f64, ln_c: f64) -> f64 {
    let d = rs.dim() as f64;
    let g = rs.gamma();
    -ln_c - (g + 0.5 * d) * 2f64.ln() - (0.5 * d + g) * t.ln()
}

fn scaled(y: &[f64], c: f64) -> Vec<f64> {
    y.iter().map(|v| v * c).collect()
}

/// ln of t^{-d/2} e^{-|X-Y|^2/4t} / prod (t + alpha(X) alpha(Y))^k.
pub fn heat_envelope(rs: &RootSystemA, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let d = rs.dim() as f64;
    -0.5 * d * t.ln()
        - dist_sq(x, y) / (4.0 * t)
        - rs.k()
            * rs.positive_roots()
                .iter()
                .map(|&r| (t + rs.pairing(r, x) * rs.pairing(r, y)).ln())
                .sum::<f64>()
}

/// Resolution of the chamber integrals used by the structural checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberQuad {
    pub panels: usize,
    pub nodes: usize,
    /// Window half-width in units of the Gaussian scale sqrt(t).
    pub width: f64,
}

impl Default for ChamberQuad {
    fn default() -> Self {
        Self { panels: 6, nodes: 8, width: 20.0 }
    }
}

fn split_active(rs: &RootSystemA, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let act = rs.active_values(x);
    let mean = act.iter().sum::<f64>() / act.len() as f64;
    let inactive = rs.inactive().iter().map(|&c| x[c]).collect();
    (mean, rs.gaps(x), inactive)
}

/// Rebuild a full coordinate vector from mean, gaps and inactive values.
fn assemble(rs: &RootSystemA, mean: f64, gaps: &[f64], inactive: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rs.coord_len()];
    for (slot, (&a, v)) in rs.active().iter().zip(centered_from_gaps(gaps)).enumerate() {
        let _ = slot;
        out[a] = mean + v;
    }
    for (&c, &v) in rs.inactive().iter().zip(inactive) {
        out[c] = v;
    }
    out
}

/// ln of the Lebesgue measure factor relating dY to d(mean) d(gaps) (or the plane
/// area element for the trace-zero realization).
fn ln_measure(rs: &RootSystemA) -> f64 {
    if rs.is_trace_zero() {
        -0.5 * ((rs.rank() + 1) as f64).ln()
    } else {
        0.0
    }
}

/// ln of int_{R^d} p_t(X, Y) w_k(Y) dY (should be 0).
pub fn heat_mass_ln(
    rs: &RootSystemA,
    t: f64,
    x: &[f64],
    ln_c: f64,
    quad: &SphericalQuad,
    cq: &ChamberQuad,
) -> Result<f64> {
    check_time(t)?;
    let (xm, xg, _) = split_active(rs, x);
    let n1 = (rs.rank() + 1) as f64;
    let d_inactive = rs.inactive().len() as f64;
    // mean direction and inactive coordinates are exact Gaussians
    let ln_mean = if rs.is_trace_zero() { 0.0 } else { 0.5 * (4.0 * PI * t / n1).ln() };
    let ln_inactive = 0.5 * d_inactive * (4.0 * PI * t).ln();
    let grid = GapGrid::around(&xg, cq.width * t.sqrt(), cq.panels, cq.nodes);
    let xc = assemble(rs, 0.0, &xg, &vec![0.0; d_inactive as usize]);
    let pre = heat_prefactor(rs, t, ln_c);
    let (v, _) = gap_integral(
        rs.k(),
        &grid,
        |g| {
            let yc = assemble(rs, 0.0, g, &vec![0.0; d_inactive as usize]);
            let phi = spherical_normalized(rs, &xc, &scaled(&yc, 0.5 / t), quad)?;
            Ok(pre - dist_sq(&xc, &yc) / (4.0 * t) + phi.ln_abs)
        },
        quad.execution,
    )?;
    let _ = xm;
    Ok((rs.weyl_order() as f64).ln() + ln_measure(rs) + ln_mean + ln_inactive + v)
}

/// ln c_k obtained numerically as the heat mass at t = 1, X = 0 with unit normalization.
pub fn ln_c_norm_empirical(rs: &RootSystemA, quad: &SphericalQuad, cq: &ChamberQuad) -> Result<f64> {
    let zero = vec![0.0; rs.coord_len()];
    heat_mass_ln(rs, 1.0, &zero, 0.0, quad, cq)
}

/// Relative Chapman-Kolmogorov residual
/// |int p_t(X,Y) p_s(Y,Z) w(Y) dY - p_{t+s}(X,Z)| / p_{t+s}(X,Z).
pub fn chapman_kolmogorov_check(
    rs: &RootSystemA,
    t: f64,
    s: f64,
    x: &[f64],
    z: &[f64],
    quad: &SphericalQuad,
    cq: &ChamberQuad,
) -> Result<f64> {
    check_time(t)?;
    check_time(s)?;
    if rs.rank() > 2 {
        return Err(Error::Precondition("Chapman-Kolmogorov check supports rank <= 2".into()));
    }
    ChamberPoint::new(rs, x.to_vec())?;
    ChamberPoint::new(rs, z.to_vec())?;
    let ln_c = ln_c_norm(rs);
    let (xm, xg, xi) = split_active(rs, x);
    let (zm, zg, zi) = split_active(rs, z);
    let n1 = (rs.rank() + 1) as f64;
    let a = n1 / (4.0 * t);
    let b = n1 / (4.0 * s);
    let ln_mean = if rs.is_trace_zero() {
        0.0
    } else {
        0.5 * (PI / (a + b)).ln() - a * b / (a + b) * (xm - zm).powi(2)
    };
    // inactive coordinates: Gaussian convolution, exact
    let d_in = xi.len() as f64;
    let ln_inactive = 0.5 * d_in * (4.0 * PI * t * s / (t + s)).ln()
        - dist_sq(&xi, &zi) / (4.0 * (t + s));
    let centers: Vec<f64> = xg.iter().zip(&zg).map(|(p, q)| (s * p + t * q) / (t + s)).collect();
    let spread = xg.iter().zip(&zg).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let width = cq.width * (2.0 * t * s / (t + s)).sqrt() + spread;
    let grid = GapGrid::around(&centers, width, cq.panels, cq.nodes);
    let zeros = vec![0.0; xi.len()];
    let xc = assemble(rs, 0.0, &xg, &zeros);
    let zc = assemble(rs, 0.0, &zg, &zeros);
    let (pt, ps) = (heat_prefactor(rs, t, ln_c), heat_prefactor(rs, s, ln_c));
    let (v, _) = gap_integral(
        rs.k(),
        &grid,
        |g| {
            let yc = assemble(rs, 0.0, g, &zeros);
            let f1 = spherical_normalized(rs, &xc, &scaled(&yc, 0.5 / t), quad)?.ln_abs;
            let f2 = spherical_normalized(rs, &yc, &scaled(&zc, 0.5 / s), quad)?.ln_abs;
            Ok(pt + ps - dist_sq(&xc, &yc) / (4.0 * t) - dist_sq(&yc, &zc) / (4.0 * s) + f1 + f2)
        },
        quad.execution,
    )?;
    let lhs = (rs.weyl_order() as f64).ln() + ln_measure(rs) + ln_mean + ln_inactive + v;
    // the inactive and mean parts above already carry their own normalization relative to
    // p_{t+s}; compare against the full kernel
    let rhs = heat_raw(rs, t + s, x, z, ln_c, quad)?.ln_abs;
    Ok((lhs - rhs).exp_m1().abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub dt: f64,
    pub lp: f64,
    pub residual: f64,
}

/// Finite-difference residual of dp/dt = Delta p + sum_alpha 2k (d_alpha p) / alpha(X)
/// in X, for rank one. The residual is relative to max(|dp/dt|, p/t).
pub fn generator_check(
    rs: &RootSystemA,
    t: f64,
    x: &[f64],
    y: &[f64],
    h: f64,
    quad: &SphericalQuad,
) -> Result<GeneratorReport> {
    check_time(t)?;
    if rs.rank() != 1 {
        return Err(Error::Precondition("generator check is implemented for rank one".into()));
    }
    if !rs.in_open_chamber(x) || rs.gaps(x)[0] <= 4.0 * h || !(h > 0.0) || t <= 2.0 * h {
        return Err(Error::Precondition("X must be strictly interior and t > 2h".into()));
    }
    ChamberPoint::new(rs, y.to_vec())?;
    let ln_c = ln_c_norm(rs);
    let p = |tt: f64, xx: &[f64]| -> Result<f64> { Ok(heat_raw(rs, tt, xx, y, ln_c, quad)?.value()) };
    let p0 = p(t, x)?;
    let dt = (p(t + h, x)? - p(t - h, x)?) / (2.0 * h);
    let mut lap = 0.0;
    let mut grad = vec![0.0; x.len()];
    for c in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        let (fp, fm) = (p(t, &xp)?, p(t, &xm)?);
        lap += (fp - 2.0 * p0 + fm) / (h * h);
        grad[c] = (fp - fm) / (2.0 * h);
    }
    let mut drift = 0.0;
    for r in rs.positive_roots() {
        drift += 2.0 * rs.k() * (grad[r.i] - grad[r.j]) / rs.pairing(r, x);
    }
    let lp = lap + drift;
    let residual = (dt - lp).abs() / dt.abs().max(p0 / t);
    Ok(GeneratorReport { dt, lp, residual })
}
