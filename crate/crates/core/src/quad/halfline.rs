//! Composite integration of u^p e^{-u} g(u) over (0, inf) in log space.

use super::gauss::{jacobi_unit_cached, legendre_unit};
use crate::error::{Error, Result};
use crate::special::LogAccumulator;

/// Drop the tail once the log integrand is this far below its running maximum.
const TAIL_DROP: f64 = 50.0;

/// Integrate u^power e^{-u} exp(ln_g(u)) over (0, inf).
///
/// `scales` are the u-values where g changes character; the mesh is graded
/// geometrically from below the smallest of them. Returns (ln integral, evaluations).
pub fn integrate_halfline(
    power: f64,
    scales: &[f64],
    q: usize,
    mut ln_g: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, u64)> {
    if !(power > -1.0) {
        return Err(Error::Divergent(format!("u^{power} is not integrable at 0")));
    }
    let smallest = scales.iter().copied().filter(|s| *s > 0.0).fold(1.0f64, f64::min);
    let mut edges = vec![0.0];
    let mut b = 0.25 * smallest;
    while b < 1.0 {
        edges.push(b);
        b *= 4.0;
    }
    edges.push(1.0);
    let leg = legendre_unit(q)?;
    let head = jacobi_unit_cached(q, power, 0.0)?;
    let mut acc = LogAccumulator::default();
    let mut peak = f64::NEG_INFINITY;
    let mut evals = 0u64;

    let mut panel = |lo: f64, hi: f64, acc: &mut LogAccumulator, peak: &mut f64| -> Result<f64> {
        let h = hi - lo;
        let mut panel_max = f64::NEG_INFINITY;
        if lo == 0.0 {
            for (&t, &w) in head.nodes.iter().zip(&head.weights) {
                let u = h * t;
                let v = w.ln() + head.ln_mass + (power + 1.0) * h.ln() - u + ln_g(u)?;
                evals += 1;
                panel_max = panel_max.max(v);
                acc.add(v);
            }
        } else {
            for (&t, &w) in leg.nodes.iter().zip(&leg.weights) {
                let u = lo + h * t;
                let v = (w * h).ln() + power * u.ln() - u + ln_g(u)?;
                evals += 1;
                panel_max = panel_max.max(v - (w * h).ln());
                acc.add(v);
            }
        }
        if panel_max.is_nan() {
            return Err(Error::NonFinite("half-line integrand".into()));
        }
        *peak = peak.max(panel_max);
        Ok(panel_max)
    };

    for p in edges.windows(2) {
        panel(p[0], p[1], &mut acc, &mut peak)?;
    }
    let mut lo = 1.0f64;
    loop {
        let hi = lo + lo.min(4.0);
        let m = panel(lo, hi, &mut acc, &mut peak)?;
        lo = hi;
        if (m < peak - TAIL_DROP && lo > 2.0 * (power + 1.0)) || lo > 2000.0 {
            break;
        }
    }
    Ok((acc.ln(), evals))
}
