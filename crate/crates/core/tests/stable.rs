use dunkl_core::heatkernel::{heat_exact, HeatParams};
use dunkl_core::rootsys::{dist_sq, RootSystemA};
use dunkl_core::special::ln_gamma;
use dunkl_core::spherical::SphericalQuad;
use dunkl_core::stable::{
    euclid_min_form_constant, euclid_stable_envelope, euclid_stable_min_form, stable_envelope,
    stable_envelope_reflected, stable_exact, stable_mass_ln, StableParams,
};
use dunkl_core::subordinator::SubordinatorMethod;
use dunkl_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn ln_stable(rs: &RootSystemA, s: f64, t: f64, x: &[f64], y: &[f64]) -> f64 {
    stable_exact(&StableParams::new(rs, s, t, x.to_vec(), y.to_vec()).unwrap()).unwrap().ln_abs
}

#[test]
fn cauchy_limit() {
    // k -> 0, s = 1: the W-average of the Euclidean Poisson kernel
    let rs = RootSystemA::new(2, 1e-7).unwrap();
    let d = 3.0;
    let x = [1.0, 0.4, -0.3];
    let y = [0.8, 0.0, -1.2];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for t in [0.2, 1.0, 5.0] {
        let cauchy = |r2: f64| (ln_gamma(0.5 * (d + 1.0)) - 0.5 * (d + 1.0) * PI.ln()).exp() * t / (t * t + r2).powf(0.5 * (d + 1.0));
        let want: f64 = perms
            .iter()
            .map(|p| cauchy(dist_sq(&x, &[y[p[0]], y[p[1]], y[p[2]]])))
            .sum::<f64>()
            / 6.0;
        let got = ln_stable(&rs, 1.0, t, &x, &y).exp();
        assert!((got / want - 1.0).abs() < 1e-5, "t={t}: {got} vs {want}");
    }
}

#[test]
fn value_at_origin() {
    // h_t(0, 0) = p_1(0, 0) E[U_t^{-p}], E[U_1^{-p}] = Gamma(p / beta) / (beta Gamma(p))
    for (n, k) in [(1, 0.7), (2, 1.3)] {
        let rs = RootSystemA::new(n, k).unwrap();
        let z = vec![0.0; n + 1];
        let p = 0.5 * rs.dim() as f64 + rs.gamma();
        let ln_p1 = heat_exact(&HeatParams::new(&rs, 1.0, z.clone(), z.clone()).unwrap()).unwrap().ln_abs;
        for s in [0.5, 1.0, 1.5] {
            let beta = 0.5 * s;
            for t in [0.5f64, 2.0] {
                let want = ln_p1 + ln_gamma(p / beta) - beta.ln() - ln_gamma(p) - p / beta * t.ln();
                let got = ln_stable(&rs, s, t, &z, &z);
                assert!((got - want).abs() < 1e-7, "n={n} s={s} t={t}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn scaling_identity() {
    // h_{c^s t}(cX, cY) = c^{-d - 2 gamma} h_t(X, Y)
    let rs = RootSystemA::new(2, 0.8).unwrap();
    let x = [1.2, 0.5, -0.1];
    let y = [0.3, 0.2, -0.9];
    let expo = rs.dim() as f64 + 2.0 * rs.gamma();
    for s in [0.5, 1.0, 1.5] {
        let base = ln_stable(&rs, s, 0.7, &x, &y);
        for c in [0.1f64, 10.0] {
            let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
            let got = ln_stable(&rs, s, c.powf(s) * 0.7, &xs, &ys) + expo * c.ln();
            assert!((got - base).abs() < 1e-4, "s={s} c={c}: {got} vs {base}");
        }
    }
}

#[test]
fn unit_mass_trace_zero_rank_one() {
    let q = SphericalQuad::default();
    for (k, s) in [(0.5, 1.0), (1.0, 0.5), (2.0, 1.5)] {
        let rs = RootSystemA::trace_zero(1, k).unwrap();
        let m = stable_mass_ln(&rs, s, 1.0, &[0.4, -0.4], &q).unwrap();
        assert!(m.abs() < 1e-4, "k={k} s={s}: ln mass {m}");
    }
    let rs = RootSystemA::new(1, 1.0).unwrap();
    assert!(matches!(stable_mass_ln(&rs, 1.0, 1.0, &[0.4, -0.4], &q), Err(Error::Precondition(_))));
}

#[test]
fn subordinator_paths_agree() {
    let rs = RootSystemA::new(1, 0.9).unwrap();
    let (x, y) = (vec![1.0, 0.1], vec![0.5, -0.6]);
    let p = StableParams::new(&rs, 0.5, 1.0, x, y).unwrap();
    let a = stable_exact(&p).unwrap().ln_abs;
    let b = stable_exact(&p.clone().with_method(SubordinatorMethod::ContourSine)).unwrap().ln_abs;
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn domain_errors() {
    let rs = RootSystemA::new(1, 1.0).unwrap();
    assert!(matches!(StableParams::new(&rs, 2.0, 1.0, vec![1.0, 0.0], vec![1.0, 0.0]), Err(Error::Domain(_))));
    assert!(matches!(StableParams::new(&rs, 1.0, 0.0, vec![1.0, 0.0], vec![1.0, 0.0]), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn envelope_forms_equivalent(
        a in 0.0f64..5.0, b in 0.0f64..5.0, c in -3.0f64..3.0, lt in -2.0f64..2.0, s in 0.1f64..1.9, k in 0.1f64..3.0,
    ) {
        let rs = RootSystemA::new(2, k).unwrap();
        let t = 10f64.powf(lt);
        let x = [a + b, b, 0.0];
        let y = [c + 1.0, c, c - a];
        let bound = k * 3.0 * 2f64.ln();
        let d = stable_envelope(&rs, s, t, &x, &y) - stable_envelope_reflected(&rs, s, t, &x, &y);
        prop_assert!(d.abs() <= bound + 1e-12, "{d} vs {bound}");
        let e = euclid_stable_envelope(3, s, t, &x, &y) - euclid_stable_min_form(3, s, t, &x, &y);
        let cst = euclid_min_form_constant(3, s).ln();
        prop_assert!(e <= 1e-12 && e >= -cst - 1e-12, "{e} vs {cst}");
    }

    #[test]
    fn symmetric_in_x_and_y(a in 0.0f64..3.0, b in -2.0f64..2.0, si in 0usize..3) {
        let s = [0.5, 1.0, 1.5][si];
        let rs = RootSystemA::new(1, 1.1).unwrap();
        let x = vec![a + b, b];
        let y = vec![0.7, 0.3];
        prop_assert!((ln_stable(&rs, s, 0.8, &x, &y) - ln_stable(&rs, s, 0.8, &y, &x)).abs() < 1e-9);
    }
}
