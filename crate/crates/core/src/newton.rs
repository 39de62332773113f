//! W-invariant Newton kernel N(X, Y) = int_0^inf p_t(X, Y) dt and its envelopes.

use crate::error::{Error, Result};
use crate::heatkernel::ln_c_norm;
use crate::quad::halfline::integrate_halfline;
use crate::quad::KernelValue;
use crate::rootsys::{dist_sq, ChamberPoint, RootSystemA};
use crate::spherical::{spherical_normalized, SphericalQuad};
use serde::{Deserialize, Serialize};

/// Gauss nodes per panel of the u-integral.
const U_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonParams {
    pub rs: RootSystemA,
    pub x: ChamberPoint,
    pub y: ChamberPoint,
    pub quad: SphericalQuad,
}

impl NewtonParams {
    pub fn new(rs: &RootSystemA, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Ok(Self {
            rs: rs.clone(),
            x: ChamberPoint::new(rs, x)?,
            y: ChamberPoint::new(rs, y)?,
            quad: SphericalQuad::default(),
        })
    }
}

/// N(X, Y) via u = |X - Y|^2 / 4t:
/// N = C (R^2/4)^{1 - d/2 - gamma} int_0^inf u^{d/2 + gamma - 2} e^{-u} phi_X(2u Y / R^2) du.
pub fn newton_exact(p: &NewtonParams) -> Result<KernelValue> {
    let rs = &p.rs;
    let r2 = dist_sq(&p.x, &p.y);
    if r2 == 0.0 {
        return Err(Error::Singular("the Newton kernel is infinite at X = Y".into()));
    }
    let d = rs.dim() as f64;
    let a = 0.5 * d + rs.gamma();
    if a <= 1.0 {
        return Err(Error::Divergent(format!(
            "d/2 + gamma = {a} <= 1: the time integral diverges at infinity"
        )));
    }
    let scales: Vec<f64> = rs
        .positive_roots()
        .iter()
        .map(|&r| rs.pairing(r, &p.x) * rs.pairing(r, &p.y))
        .filter(|&q| q > 0.0)
        .map(|q| r2 / (2.0 * q))
        .collect();
    let ln_pre = -ln_c_norm(rs) - (rs.gamma() + 0.5 * d) * 2f64.ln() + (1.0 - a) * (0.25 * r2).ln();
    let x = p.x.as_slice();
    let mut evals = 0u64;
    let (v, n) = integrate_halfline(a - 2.0, &scales, U_NODES, |u| {
        let c = 2.0 * u / r2;
        let z: Vec<f64> = p.y.iter().map(|v| v * c).collect();
        let phi = spherical_normalized(rs, x, &z, &p.quad)?;
        evals += phi.evaluations;
        Ok(phi.ln_abs)
    })?;
    let _ = n;
    Ok(KernelValue::positive(ln_pre + v, 0.0, evals))
}

fn check_distinct(x: &[f64], y: &[f64]) -> Result<f64> {
    let r2 = dist_sq(x, y);
    if r2 == 0.0 {
        return Err(Error::Singular("X = Y".into()));
    }
    Ok(r2)
}

fn ln_reflected_product(rs: &RootSystemA, x: &[f64], y: &[f64]) -> f64 {
    rs.positive_roots().iter().map(|&r| rs.reflected_distance_sq(r, x, y).ln()).sum()
}

/// ln of |X - Y|^{2-d} / prod |X - sigma_alpha Y|^{2k}.
pub fn newton_envelope_d3(rs: &RootSystemA, x: &[f64], y: &[f64]) -> Result<f64> {
    if rs.dim() < 3 {
        return Err(Error::InvalidDimension(format!("needs d >= 3, got {}", rs.dim())));
    }
    let r2 = check_distinct(x, y)?;
    let d = rs.dim() as f64;
    Ok(0.5 * (2.0 - d) * r2.ln() - rs.k() * ln_reflected_product(rs, x, y))
}

/// ln of ln(1 + |X - sigma Y|^2 / |X - Y|^2) / |X - sigma Y|^{2k} for A_1 in the plane.
pub fn newton_envelope_d2_a1(rs: &RootSystemA, x: &[f64], y: &[f64]) -> Result<f64> {
    if rs.dim() != 2 || rs.rank() != 1 {
        return Err(Error::InvalidDimension("needs A_1 acting on R^2".into()));
    }
    let r2 = check_distinct(x, y)?;
    let root = rs.positive_roots()[0];
    let s2 = rs.reflected_distance_sq(root, x, y);
    Ok((1.0 + s2 / r2).ln().ln() - rs.k() * s2.ln())
}

/// The logarithmic numerator of the planar A_1 envelope (at least ln 2).
pub fn newton_d2_a1_numerator(rs: &RootSystemA, x: &[f64], y: &[f64]) -> Result<f64> {
    let r2 = check_distinct(x, y)?;
    let root = rs.positive_roots()[0];
    Ok((1.0 + rs.reflected_distance_sq(root, x, y) / r2).ln())
}

/// ln of ln(1 + |X - sigma_w Y|^2 / |X - Y|^2) / prod_{alpha > 0} |X - sigma_alpha Y|^{2k}
/// for A_2 on the trace-zero plane, w the simple root minimizing |X - sigma_w Y|.
pub fn newton_envelope_d2_a2(rs: &RootSystemA, x: &[f64], y: &[f64]) -> Result<f64> {
    if rs.rank() != 2 || !rs.is_trace_zero() {
        return Err(Error::InvalidDimension("needs A_2 on the trace-zero plane".into()));
    }
    let r2 = check_distinct(x, y)?;
    let roots = rs.positive_roots();
    // simple roots are e1 - e2 and e2 - e3
    let simple = roots.iter().filter(|r| r.j == r.i + 1);
    let s2 = simple.map(|&r| rs.reflected_distance_sq(r, x, y)).fold(f64::INFINITY, f64::min);
    Ok((1.0 + s2 / r2).ln().ln() - rs.k() * ln_reflected_product(rs, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d3_example() {
        let rs = RootSystemA::with_dimension(1, 3, 1.0).unwrap();
        // |X - Y|^2 = 1, alpha(X) alpha(Y) = 2
        let r = 2f64.sqrt();
        let x = [r, 0.0, 0.0];
        let y = [r, 0.0, 1.0];
        let e = newton_envelope_d3(&rs, &x, &y).unwrap();
        assert!((e.exp() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn d2_a1_on_wall() {
        let rs = RootSystemA::new(1, 0.5).unwrap();
        let x = [1.0, 1.0];
        let y = [3.0, 3.0];
        let e = newton_envelope_d2_a1(&rs, &x, &y).unwrap();
        assert!((e - (2f64.ln().ln() - 0.5 * 8f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn singular_and_divergent() {
        let rs = RootSystemA::with_dimension(1, 3, 1.0).unwrap();
        let p = NewtonParams::new(&rs, vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(newton_exact(&p), Err(Error::Singular(_))));
        let tz = RootSystemA::trace_zero(1, 0.25).unwrap();
        let p = NewtonParams::new(&tz, vec![0.5, -0.5], vec![1.0, -1.0]).unwrap();
        assert!(matches!(newton_exact(&p), Err(Error::Divergent(_))));
    }
}
