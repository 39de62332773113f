//! Fast deterministic invariant suite: worked examples plus k = 1 oracles on A_1 and A_2.

use crate::asymlab::lemma_a1_ratio;
use crate::error::Result;
use crate::heatkernel::{heat_envelope, heat_mass_ln, ln_c_norm, ChamberQuad};
use crate::newton::{newton_envelope_d2_a1, newton_envelope_d3};
use crate::quad::{integrate_1d, integrate_nested, Interval, NestedDomain, NestedOptions, QuadratureSpec, RuleFamily};
use crate::rootsys::{Root, RootSystemA};
use crate::special::exp_int_e1;
use crate::spherical::{spherical_envelope, spherical_exact, spherical_oracle_k1, SphericalParams, SphericalQuad};
use crate::stable::euclid_stable_envelope;
use crate::subordinator::{subordinator_density, SubordinatorMethod};
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SelfTestOptions {
    /// Added to ln c_k in the mass check; nonzero values simulate a corrupted constant.
    pub ln_c_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub lines: Vec<CheckLine>,
    pub pass: bool,
}

impl SelfTestReport {
    pub fn failed(&self) -> Vec<&str> {
        self.lines.iter().filter(|l| !l.pass).map(|l| l.name.as_str()).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(&format!("{} {}: {}\n", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail));
        }
        s.push_str(if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

struct Suite {
    lines: Vec<CheckLine>,
}

impl Suite {
    fn close(&mut self, name: &str, got: f64, want: f64, rel: f64) {
        let err = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
        self.lines.push(CheckLine {
            name: name.into(),
            pass: err <= rel,
            detail: format!("got {got:.12e}, expected {want:.12e}, rel err {err:.2e} (tol {rel:.0e})"),
        });
    }

    fn truth(&mut self, name: &str, ok: bool, detail: String) {
        self.lines.push(CheckLine { name: name.into(), pass: ok, detail });
    }

    fn run(&mut self, name: &str, f: impl FnOnce(&mut Suite) -> Result<()>) {
        if let Err(e) = f(self) {
            self.truth(name, false, format!("error: {e}"));
        }
    }
}

/// Deterministic interior points for the k = 1 oracle comparisons.
fn oracle_points(n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for (a, b) in [(0.3, 0.7), (1.0, 1.0), (2.5, 0.4), (0.05, 3.0), (4.0, 2.0)] {
        let lam: Vec<f64> = (0..=n).map(|i| a * (n - i) as f64 * (1.0 + 0.3 * i as f64)).collect();
        let x: Vec<f64> = (0..=n).map(|i| b * ((n - i) as f64).powf(1.2) - 0.5).collect();
        out.push((lam, x));
    }
    out
}

pub fn run_selftest(opts: &SelfTestOptions) -> SelfTestReport {
    let mut s = Suite { lines: Vec::new() };

    s.run("root counts", |s| {
        let counts: Vec<usize> = (1..=3).map(|n| RootSystemA::new(n, 1.0).map(|r| r.positive_roots().len())).collect::<Result<_>>()?;
        s.truth("root counts", counts == [1, 3, 6], format!("{counts:?}"));
        Ok(())
    });
    s.run("pairing and reflection", |s| {
        let a1 = RootSystemA::new(1, 1.0)?;
        let a2 = RootSystemA::new(2, 1.0)?;
        let r12 = Root { i: 0, j: 1 };
        let ok = a1.pairing(r12, &[3.0, 1.0]) == 2.0
            && a2.pairing(Root { i: 0, j: 2 }, &[2.0, 0.0, -2.0]) == 4.0
            && a1.pairing(r12, &[1.0, 1.0]) == 0.0
            && a1.reflect(r12, &[5.0, 3.0]) == vec![3.0, 5.0]
            && a1.reflected_distance_sq(r12, &[1.0, 0.0], &[2.0, 0.0]) == 5.0;
        s.truth("pairing and reflection", ok, "worked examples".into());
        Ok(())
    });
    s.run("weight", |s| {
        let w1 = RootSystemA::new(1, 0.5)?.weight(&[1.0, 0.0]);
        let w2 = RootSystemA::new(2, 1.0)?.weight(&[2.0, 0.0, -2.0]);
        s.close("weight A_1", w1, 1.0, 1e-15);
        s.close("weight A_2", w2, 256.0, 1e-15);
        s.close("vandermonde", RootSystemA::new(2, 1.0)?.vandermonde(&[2.0, 1.0, 0.0]), 2.0, 1e-15);
        Ok(())
    });
    s.run("quadrature", |s| {
        let leg = integrate_1d(&QuadratureSpec::jacobi(8, 0.0, 0.0), Interval::new(0.0, 1.0), |_| 1.0)?;
        let arc = integrate_1d(&QuadratureSpec::jacobi(8, -0.5, -0.5), Interval::new(0.0, 1.0), |_| 1.0)?;
        let sq = integrate_1d(&QuadratureSpec::jacobi(8, 0.5, 0.0), Interval::new(0.0, 1.0), |_| 1.0)?;
        let ig = integrate_1d(&QuadratureSpec::jacobi(12, -0.5, 0.0), Interval::new(0.0, 1.0), |u| (-u).exp())?;
        let lag = integrate_1d(&QuadratureSpec::new(RuleFamily::GaussLaguerre, 8), Interval::half_line(0.0), |u| u)?;
        s.close("quadrature legendre mass", leg.value(), 1.0, 1e-14);
        s.close("quadrature arcsine mass", arc.value(), PI, 1e-13);
        s.close("quadrature sqrt mass", sq.value(), 2.0 / 3.0, 1e-13);
        s.close("quadrature incomplete gamma", ig.value(), 1.493648265624854, 1e-12);
        s.close("quadrature laguerre", lag.value(), 1.0, 1e-13);
        let box2 = integrate_nested(&NestedDomain::interlacing(&[2.0, 1.0, 0.0], 1.0, 4)?, |_| 1.0, &NestedOptions::default())?;
        let beta = integrate_nested(&NestedDomain::interlacing(&[1.0, 0.0], 0.5, 8)?, |_| 1.0, &NestedOptions::default())?;
        s.close("nested box volume", box2.value(), 1.0, 1e-14);
        s.close("nested beta weight", beta.value(), PI, 1e-13);
        Ok(())
    });
    s.run("spherical examples", |s| {
        let a1 = RootSystemA::new(1, 1.0)?;
        let v = spherical_exact(&SphericalParams::new(&a1, vec![1.0, 0.0], vec![1.0, 0.0])?)?;
        s.close("spherical A_1 k=1", v.value(), E - 1.0, 1e-10);
        let a2 = RootSystemA::new(2, 0.7)?;
        let z = spherical_exact(&SphericalParams::new(&a2, vec![0.0; 3], vec![1.0, 0.2, -0.4])?)?;
        s.close("spherical lambda=0", z.value(), 1.0, 1e-12);
        let lam = vec![1.5, 0.5, -0.25];
        let x = vec![0.9, 0.1, -0.3];
        let c = 0.4;
        let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
        let base = spherical_exact(&SphericalParams::new(&a2, lam.clone(), x)?)?;
        let shifted = spherical_exact(&SphericalParams::new(&a2, lam.clone(), xs)?)?;
        s.close("spherical shift covariance", shifted.ln_abs - base.ln_abs, c * lam.iter().sum::<f64>(), 1e-10);
        Ok(())
    });
    s.run("envelope arithmetic", |s| {
        let e1 = spherical_envelope(&RootSystemA::new(1, 2.0)?, &[3.0, 0.0], &[2.0, 0.0]).exp();
        let e2 = spherical_envelope(&RootSystemA::new(2, 1.0)?, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).exp();
        s.close("spherical envelope A_1", e1, 6f64.exp() / 49.0, 1e-14);
        s.close("spherical envelope A_2", e2, E / 4.0, 1e-14);
        let h = heat_envelope(&RootSystemA::new(1, 1.0)?, 1.0, &[2.0, 0.0], &[2.0, 0.0]).exp();
        s.close("heat envelope", h, 0.2, 1e-14);
        let rs3 = RootSystemA::with_dimension(1, 3, 1.0)?;
        let r2 = 2f64.sqrt();
        let nw = newton_envelope_d3(&rs3, &[r2, 0.0, 0.0], &[r2, 0.0, 1.0])?.exp();
        s.close("newton envelope d=3", nw, 0.2, 1e-13);
        let nw2 = newton_envelope_d2_a1(&RootSystemA::new(1, 0.5)?, &[1.0, 1.0], &[3.0, 3.0])?.exp();
        s.close("newton envelope d=2 wall", nw2, 2f64.ln() / 8f64.sqrt(), 1e-14);
        let st = euclid_stable_envelope(2, 1.5, 3.0, &[1.0, 0.5], &[1.0, 0.5]).exp();
        s.close("stable envelope diagonal", st, 3f64.powf(-2.0 / 1.5), 1e-14);
        Ok(())
    });
    for n in [1usize, 2] {
        let name = format!("k=1 oracle A_{n}");
        let tol = if n == 1 { 1e-6 } else { 1e-4 };
        s.run(&name.clone(), |s| {
            let rs = RootSystemA::new(n, 1.0)?;
            let mut worst: f64 = 0.0;
            for (lam, x) in oracle_points(n) {
                let v = spherical_exact(&SphericalParams::new(&rs, lam.clone(), x.clone())?.with_quad(SphericalQuad::default()))?;
                let o = spherical_oracle_k1(&rs, &lam, &x)?;
                worst = worst.max((v.ln_abs - o).exp_m1().abs());
            }
            s.truth(&name, worst <= tol, format!("max rel err {worst:.2e} (tol {tol:.0e})"));
            Ok(())
        });
    }
    s.run("heat mass", |s| {
        let rs = RootSystemA::new(1, 1.0)?;
        let ln_c = ln_c_norm(&rs) + opts.ln_c_offset;
        let m = heat_mass_ln(&rs, 1.0, &[0.7, -0.2], ln_c, &SphericalQuad::default(), &ChamberQuad::default())?.exp();
        s.close("heat mass A_1", m, 1.0, 1e-3);
        Ok(())
    });
    s.run("subordinator", |s| {
        let v = subordinator_density(1.0, 1.0, 1.0, SubordinatorMethod::Zolotarev)?;
        s.close("subordinator closed form", v, (-0.25f64).exp() / (2.0 * PI.sqrt()), 1e-10);
        Ok(())
    });
    s.run("lemma a1 golden", |s| {
        let v = lemma_a1_ratio(1.0, 1.0, 1.0)?;
        s.close("lemma a1 golden", v, 2.0 * E * exp_int_e1(1.0) / 3f64.ln(), 1e-8);
        Ok(())
    });

    let pass = s.lines.iter().all(|l| l.pass);
    SelfTestReport { lines: s.lines, pass }
}
