//! Density of the beta-stable subordinator, beta = s/2, with Laplace transform e^{-t z^beta}.

use crate::error::{Error, Result};
use crate::quad::gauss::legendre_unit;
use crate::special::{ln_gamma, LogAccumulator};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubordinatorMethod {
    /// Closed form when s = 1, Zolotarev integral otherwise.
    Auto,
    /// t (4 pi)^{-1/2} u^{-3/2} e^{-t^2/4u}; only for s = 1.
    ClosedForm,
    /// Positive integral over [0, pi] (Zolotarev/Kanter form) plus the
    /// convergent series for large arguments.
    Zolotarev,
    /// Inversion along the branch cut:
    /// (1/pi) int_0^inf e^{-ux - t x^beta cos(pi beta)} sin(t x^beta sin(pi beta)) dx.
    ContourSine,
}

fn check(s: f64, t: f64, u: f64) -> Result<f64> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::Domain(format!("stability index must lie in (0, 2), got {s}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("subordinator density needs u > 0, got {u}")));
    }
    Ok(0.5 * s)
}

/// ln eta_t(u).
pub fn ln_subordinator_density(s: f64, t: f64, u: f64, method: SubordinatorMethod) -> Result<f64> {
    let beta = check(s, t, u)?;
    let method = match method {
        SubordinatorMethod::Auto if s == 1.0 => SubordinatorMethod::ClosedForm,
        SubordinatorMethod::Auto => SubordinatorMethod::Zolotarev,
        m => m,
    };
    match method {
        SubordinatorMethod::ClosedForm => {
            if s != 1.0 {
                return Err(Error::Domain("closed-form subordinator density needs s = 1".into()));
            }
            Ok(t.ln() - 0.5 * (4.0 * PI).ln() - 1.5 * u.ln() - t * t / (4.0 * u))
        }
        SubordinatorMethod::Zolotarev => {
            // eta_t(u) = t^{-1/beta} g(u t^{-1/beta})
            let sc = -t.ln() / beta;
            Ok(sc + ln_standard_density(beta, u.ln() + sc))
        }
        SubordinatorMethod::ContourSine => {
            let v = contour_sine(beta, t, u)?.0;
            if !(v > 0.0) {
                return Err(Error::Accuracy(format!(
                    "branch-cut inversion lost all significant digits at u = {u}, t = {t}"
                )));
            }
            Ok(v.ln())
        }
        SubordinatorMethod::Auto => unreachable!(),
    }
}

pub fn subordinator_density(s: f64, t: f64, u: f64, method: SubordinatorMethod) -> Result<f64> {
    if method == SubordinatorMethod::ContourSine {
        let beta = check(s, t, u)?;
        return Ok(contour_sine(beta, t, u)?.0);
    }
    Ok(ln_subordinator_density(s, t, u, method)?.exp())
}

/// ln g_beta(x) for the standard density (t = 1); `ln_x` is passed to keep
/// precision for extreme x.
fn ln_standard_density(beta: f64, ln_x: f64) -> f64 {
    if beta * ln_x > 4f64.ln() {
        ln_series(beta, ln_x)
    } else {
        ln_zolotarev(beta, ln_x)
    }
}

/// g(x) = (1/pi) sum_{j>=1} (-1)^{j+1} Gamma(j beta + 1)/j! sin(pi beta j) x^{-j beta - 1}.
fn ln_series(beta: f64, ln_x: f64) -> f64 {
    let mut sum = 0.0;
    let mut j = 1.0f64;
    loop {
        let mag = ln_gamma(j * beta + 1.0) - ln_gamma(j + 1.0) - j * beta * ln_x;
        let sign = if (j as i64) % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * (PI * beta * j).sin() * mag.exp();
        sum += term;
        if (mag.exp() < 1e-18 * sum.abs() && j > 2.0) || j > 200.0 {
            break;
        }
        j += 1.0;
    }
    sum.ln() - PI.ln() - ln_x
}

/// ln A(phi) with A = (sin(beta phi)^beta sin((1-beta) phi)^{1-beta} / sin phi)^{1/(1-beta)},
/// phi given as (phi, pi - phi) to keep sin phi accurate near pi.
fn ln_a(beta: f64, phi: f64, rest: f64) -> f64 {
    let s_phi = if phi < rest { phi.sin() } else { rest.sin() };
    (beta * (beta * phi).sin().ln() + (1.0 - beta) * ((1.0 - beta) * phi).sin().ln() - s_phi.ln())
        / (1.0 - beta)
}

fn ln_zolotarev(beta: f64, ln_x: f64) -> f64 {
    let y = (-beta / (1.0 - beta) * ln_x).exp();
    let leg = legendre_unit(10).expect("static rule");
    let mut acc = LogAccumulator::default();
    let half = 0.5 * PI;
    let left_start = (0.05 / y.sqrt()).clamp(1e-12, 0.5);
    let right_start = (0.05 * y.powf(1.0 - beta)).clamp(1e-12, 0.5);
    for (start, from_right) in [(left_start, false), (right_start, true)] {
        let mut edges = vec![0.0];
        let mut e = start;
        while e < half {
            edges.push(e);
            e = (1.5 * e).min(e + 0.25);
        }
        edges.push(half);
        for p in edges.windows(2) {
            let (lo, hi) = (p[0], p[1]);
            let h = hi - lo;
            for (&tn, &w) in leg.nodes.iter().zip(&leg.weights) {
                let d = lo + h * tn;
                let (phi, rest) = if from_right { (PI - d, d) } else { (d, PI - d) };
                let la = ln_a(beta, phi, rest);
                acc.add((w * h).ln() + la - la.exp() * y);
            }
        }
    }
    (beta / ((1.0 - beta) * PI)).ln() - ln_x / (1.0 - beta) + acc.ln()
}

/// Branch-cut inversion value together with the absolute noise floor
/// (rounding level times the integral of the absolute integrand).
pub fn contour_sine_with_floor(s: f64, t: f64, u: f64) -> Result<(f64, f64)> {
    let beta = check(s, t, u)?;
    contour_sine(beta, t, u)
}

/// Branch-cut inversion, substituted so the sine has unit-spaced half periods.
fn contour_sine(beta: f64, t: f64, u: f64) -> Result<(f64, f64)> {
    let (sb, cb) = ((PI * beta).sin(), (PI * beta).cos());
    // w = t x^beta sin(pi beta), x = (w / (t sb))^{1/beta}
    let leg = legendre_unit(16)?;
    let mut total = 0.0;
    let mut total_abs = 0.0;
    let mut peak = 0.0f64;
    // e^{-ux} falls off beyond w ~ t sb u^{-beta}
    let h = (0.25 * t * sb * u.powf(-beta)).min(PI);
    let mut panel = 0usize;
    loop {
        let lo = panel as f64 * h;
        let mut part = 0.0;
        let mut env_max = 0.0f64;
        for (&tn, &w) in leg.nodes.iter().zip(&leg.weights) {
            let wv = lo + h * tn;
            let x = (wv / (t * sb)).powf(1.0 / beta);
            let dx = x / (beta * wv);
            let env = (-u * x - t * x.powf(beta) * cb).exp() * dx;
            env_max = env_max.max(env);
            part += w * h * env * wv.sin();
            total_abs += w * h * env;
        }
        total += part;
        peak = peak.max(env_max);
        panel += 1;
        let x_end = ((lo + h) / (t * sb)).powf(1.0 / beta);
        if env_max < 1e-18 * peak && u * x_end > 1.0 {
            break;
        }
        if panel > 2_000_000 {
            return Err(Error::Accuracy(format!("branch-cut inversion did not converge at u = {u}, t = {t}")));
        }
        if !total.is_finite() {
            return Err(Error::Accuracy("branch-cut inversion overflowed".into()));
        }
    }
    Ok((total / PI, 64.0 * f64::EPSILON * total_abs / PI))
}

/// Recorded constants of the two regime bounds for a given s, taken over
/// u / t^{2/s} in [1e-4, 1e4].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorConstants {
    /// sup eta / (t u^{-1-beta} e^{-t u^{-beta}})
    pub upper: f64,
    /// inf and sup of eta / (t u^{-1-beta}) over u >= t^{2/s}
    pub tail_lower: f64,
    pub tail_upper: f64,
}

/// ln eta - ln(t u^{-1-beta} e^{-t u^{-beta}}) and ln eta - ln(t u^{-1-beta}).
pub fn subordinator_bound_ratios(s: f64, t: f64, u: f64) -> Result<(f64, f64)> {
    let beta = check(s, t, u)?;
    let ln_eta = ln_subordinator_density(s, t, u, SubordinatorMethod::Auto)?;
    let ln_tail = t.ln() - (1.0 + beta) * u.ln();
    let ln_upper = ln_tail - t * u.powf(-beta);
    Ok((ln_eta - ln_upper, ln_eta - ln_tail))
}

/// Sweep u / t^{2/s} over [1e-4, 1e4] (crossover included) and record the constants.
pub fn record_subordinator_constants(s: f64, points_per_decade: usize) -> Result<SubordinatorConstants> {
    let t = 1.0;
    let n = 8 * points_per_decade;
    let mut c = SubordinatorConstants { upper: 0.0, tail_lower: f64::INFINITY, tail_upper: 0.0 };
    for i in 0..=n {
        let u = 10f64.powf(-4.0 + 8.0 * i as f64 / n as f64);
        let (up, tail) = subordinator_bound_ratios(s, t, u)?;
        c.upper = c.upper.max(up.exp());
        if u >= 1.0 {
            c.tail_lower = c.tail_lower.min(tail.exp());
            c.tail_upper = c.tail_upper.max(tail.exp());
        }
    }
    Ok(c)
}

/// (upper bound holds, two-sided tail bound holds or is not applicable).
pub fn subordinator_bounds_check(
    s: f64,
    t: f64,
    u: f64,
    consts: &SubordinatorConstants,
) -> Result<(bool, bool)> {
    let (up, tail) = subordinator_bound_ratios(s, t, u)?;
    let slack = 1e-9;
    let upper_ok = up.exp() <= consts.upper * (1.0 + slack);
    let tail_ok = if u >= t.powf(2.0 / s) {
        let r = tail.exp();
        r >= consts.tail_lower * (1.0 - slack) && r <= consts.tail_upper * (1.0 + slack)
    } else {
        true
    };
    Ok((upper_ok, tail_ok))
}
