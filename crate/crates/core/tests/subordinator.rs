use dunkl_core::special::ln_gamma;
use dunkl_core::subordinator::{
    ln_subordinator_density, record_subordinator_constants, subordinator_bounds_check, subordinator_density,
    SubordinatorMethod,
};
use proptest::prelude::*;

/// int_0^inf eta_t(u) e^{-z u} du by the trapezoid rule in v = ln u on [-40, 80],
/// with the leading u^{-1-beta} tail added analytically when z = 0.
fn laplace(s: f64, t: f64, z: f64) -> f64 {
    let h = 0.01;
    let (lo, hi) = (-40.0f64, 80.0f64);
    let n = ((hi - lo) / h) as usize;
    let mut sum = 0.0;
    for i in 0..=n {
        let v = lo + i as f64 * h;
        let u = v.exp();
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let ln_f = ln_subordinator_density(s, t, u, SubordinatorMethod::Auto).unwrap() + v - z * u;
        sum += w * ln_f.exp();
    }
    let beta = 0.5 * s;
    // eta ~ t beta u^{-1-beta} / Gamma(1 - beta)
    let tail = if z == 0.0 { t * (-beta * hi).exp() / ln_gamma(1.0 - beta).exp() } else { 0.0 };
    sum * h + tail
}

#[test]
fn unit_mass() {
    for s in [0.5, 1.0, 1.5] {
        let m = laplace(s, 1.0, 0.0);
        assert!((m - 1.0).abs() < 1e-6, "s={s}: mass {m}");
    }
}

#[test]
fn laplace_transform() {
    for s in [0.5, 1.0, 1.5] {
        for z in [0.5, 1.0, 2.0] {
            for t in [0.3, 1.0] {
                let got = laplace(s, t, z);
                let want = (-t * z.powf(0.5 * s)).exp();
                assert!((got - want).abs() < 1e-6, "s={s} z={z} t={t}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn branch_cut_inversion_matches_closed_form() {
    for u in [0.05, 0.3, 1.0, 4.0, 30.0] {
        let a = subordinator_density(1.0, 1.0, u, SubordinatorMethod::ClosedForm).unwrap();
        let b = subordinator_density(1.0, 1.0, u, SubordinatorMethod::ContourSine).unwrap();
        assert!((b / a - 1.0).abs() < 1e-8, "u={u}: {a} vs {b}");
    }
}

#[test]
fn golden_values() {
    // standard 3/4-stable density, 40-digit quadrature of the Zolotarev integral
    for (u, want) in [(0.5, 1.124709885945617585), (1.0, 0.454948907692706984), (5.0, 0.016650991581328487)] {
        let got = subordinator_density(1.5, 1.0, u, SubordinatorMethod::Zolotarev).unwrap();
        assert!((got / want - 1.0).abs() < 1e-12, "u={u}: {got} vs {want}");
    }
}

#[test]
fn branch_cut_inversion_matches_zolotarev() {
    // for beta > 1/2 the inversion is ill-conditioned below u ~ t^{2/s} / 2
    for (s, us) in [(0.5, [0.1, 1.0, 5.0]), (1.5, [0.5, 1.0, 5.0])] {
        for u in us {
            let a = ln_subordinator_density(s, 1.0, u, SubordinatorMethod::Zolotarev).unwrap();
            let b = ln_subordinator_density(s, 1.0, u, SubordinatorMethod::ContourSine).unwrap();
            assert!((a - b).abs() < 1e-7, "s={s} u={u}: {a} vs {b}");
        }
    }
}

#[test]
fn time_scaling() {
    // eta_t(u) = t^{-2/s} eta_1(u t^{-2/s})
    for s in [0.5, 1.5] {
        let t = 3.7f64;
        let c = t.powf(2.0 / s);
        for u in [0.01, 1.0, 100.0] {
            let a = ln_subordinator_density(s, t, u, SubordinatorMethod::Auto).unwrap();
            let b = ln_subordinator_density(s, 1.0, u / c, SubordinatorMethod::Auto).unwrap() - c.ln();
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn recorded_constants_are_finite_and_ordered() {
    for s in [0.5, 1.0, 1.5] {
        let c = record_subordinator_constants(s, 8).unwrap();
        assert!(c.upper.is_finite() && c.upper > 0.0);
        assert!(c.tail_lower > 0.0 && c.tail_lower <= c.tail_upper && c.tail_upper.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bounds_hold_off_the_recording_grid(si in 0usize..3, lu in -3.5f64..3.5, lt in -2.0f64..2.0) {
        let s = [0.5, 1.0, 1.5][si];
        let c = record_subordinator_constants(s, 64).unwrap();
        let t = 10f64.powf(lt);
        let u = 10f64.powf(lu) * t.powf(2.0 / s);
        let (upper, tail) = subordinator_bounds_check(s, t, u, &c).unwrap();
        // grid maxima can sit slightly below the true supremum
        let relaxed = dunkl_core::subordinator::SubordinatorConstants {
            upper: c.upper * 1.01,
            tail_lower: c.tail_lower / 1.01,
            tail_upper: c.tail_upper * 1.01,
        };
        let (u2, t2) = subordinator_bounds_check(s, t, u, &relaxed).unwrap();
        prop_assert!(u2 && t2, "s={s} t={t} u={u}: strict {upper} {tail}");
    }
}
