use dunkl_core::rootsys::RootSystemA;
use dunkl_core::special::ln_gamma;
use dunkl_core::spherical::{
    spherical_envelope, spherical_exact, spherical_oracle_k1, spherical_unsorted, BaseCase, SphericalParams, SphericalQuad,
};
use dunkl_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn psi(rs: &RootSystemA, lambda: &[f64], x: &[f64]) -> f64 {
    spherical_exact(&SphericalParams::new(rs, lambda.to_vec(), x.to_vec()).unwrap()).unwrap().ln_abs
}

fn decreasing(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(lo..hi)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// I_0 by its power series (terms decay once m exceeds z/2).
fn ln_bessel_i0(z: f64) -> f64 {
    let h = 0.5 * z;
    let mut terms = Vec::new();
    for m in 0..400 {
        let m = m as f64;
        terms.push(2.0 * m * h.ln() - 2.0 * ln_gamma(m + 1.0));
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// ln M(k, 2k, z) from the Euler integral by composite Simpson after t = sin^2(theta).
fn ln_kummer_simpson(k: f64, z: f64) -> f64 {
    let n = 20000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let f = |th: f64| {
        let (s, c) = th.sin_cos();
        2.0 * (-z * c * c).exp() * s.powf(2.0 * k - 1.0) * c.powf(2.0 * k - 1.0)
    };
    let mut s = f(0.0) + f(n as f64 * h);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    z + (s * h / 3.0).ln() + ln_gamma(2.0 * k) - 2.0 * ln_gamma(k)
}

#[test]
fn lambda_zero_is_one() {
    for n in 1..=3 {
        let rs = RootSystemA::new(n, 0.37).unwrap();
        let x: Vec<f64> = (0..=n).map(|i| (n - i) as f64 * 0.8 - 0.3).collect();
        assert!(psi(&rs, &vec![0.0; n + 1], &x).abs() < 1e-12);
    }
}

#[test]
fn k1_rank_one_example() {
    let rs = RootSystemA::new(1, 1.0).unwrap();
    assert!((psi(&rs, &[1.0, 0.0], &[1.0, 0.0]).exp() - (std::f64::consts::E - 1.0)).abs() < 1e-13);
    let o = spherical_oracle_k1(&rs, &[1.0, 0.0], &[1.0, 0.0]).unwrap();
    assert!((o.exp() - (std::f64::consts::E - 1.0)).abs() < 1e-13);
}

#[test]
fn k1_oracle_a2_a3() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, tol) in [(2usize, 1e-6), (3, 1e-4)] {
        let rs = RootSystemA::new(n, 1.0).unwrap();
        for _ in 0..6 {
            let lam = decreasing(&mut rng, n + 1, -2.0, 2.0);
            let x = decreasing(&mut rng, n + 1, -1.5, 1.5);
            let got = psi(&rs, &lam, &x);
            let want = spherical_oracle_k1(&rs, &lam, &x).unwrap();
            assert!((got - want).abs() < tol, "n={n} lam={lam:?} x={x:?}: {got} vs {want}");
        }
    }
}

#[test]
fn half_multiplicity_bessel_oracle() {
    // k = 1/2 on A_1: psi = e^{(l1+l2)(x1+x2)/2} I_0((l1-l2)(x1-x2)/2)
    let rs = RootSystemA::new(1, 0.5).unwrap();
    for (lam, x) in [([2.0, -1.0], [0.5, 0.1]), ([30.0, 0.0], [4.0, -3.0]), ([1e-3, 0.0], [0.2, 0.0])] {
        let z = (lam[0] - lam[1]) * (x[0] - x[1]);
        let want = 0.5 * (lam[0] + lam[1]) * (x[0] + x[1]) + ln_bessel_i0(0.5 * z);
        assert!((psi(&rs, &lam, &x) - want).abs() < 1e-12 * want.abs().max(1.0), "{lam:?} {x:?}");
    }
}

#[test]
fn kummer_integral_oracle() {
    for k in [1.5, 2.5, 4.0] {
        let rs = RootSystemA::new(1, k).unwrap();
        for z in [0.3, 5.0, 40.0] {
            let got = psi(&rs, &[z, 0.0], &[1.0, 0.0]);
            let want = ln_kummer_simpson(k, z);
            assert!((got - want).abs() < 1e-9, "k={k} z={z}: {got} vs {want}");
        }
    }
}

#[test]
fn base_cases_agree_on_a2() {
    let rs = RootSystemA::new(2, 0.7).unwrap();
    let lam = vec![3.0, 1.2, -0.5];
    let x = vec![1.1, 0.4, -0.2];
    let one = psi(&rs, &lam, &x);
    let q = SphericalQuad { base: BaseCase::RankZero, ..Default::default() };
    let zero = spherical_exact(&SphericalParams::new(&rs, lam, x).unwrap().with_quad(q)).unwrap().ln_abs;
    assert!((one - zero).abs() < 1e-8, "{one} vs {zero}");
}

#[test]
fn permuted_lambda_gives_same_value() {
    let rs = RootSystemA::new(2, 1.7).unwrap();
    let x = vec![0.9, 0.3, -0.6];
    let sorted = psi(&rs, &[2.0, 0.5, -1.0], &x);
    let perm = spherical_unsorted(&rs, &[0.5, -1.0, 2.0], &x, &SphericalQuad::default()).unwrap().ln_abs;
    assert!((sorted - perm).abs() < 1e-8, "{sorted} vs {perm}");
}

#[test]
fn envelope_examples() {
    let e = spherical_envelope(&RootSystemA::new(1, 2.0).unwrap(), &[3.0, 0.0], &[2.0, 0.0]);
    assert!((e - (6.0 - 2.0 * 7f64.ln())).abs() < 1e-14);
    let e = spherical_envelope(&RootSystemA::new(2, 1.0).unwrap(), &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]);
    assert!((e - (1.0 - 4f64.ln())).abs() < 1e-14);
    assert_eq!(spherical_envelope(&RootSystemA::new(2, 1.0).unwrap(), &[0.0; 3], &[1.0, 0.0, -1.0]), 0.0);
}

#[test]
fn rejects_points_outside_the_chamber() {
    let rs = RootSystemA::new(1, 1.0).unwrap();
    assert!(matches!(SphericalParams::new(&rs, vec![0.0, 1.0], vec![1.0, 0.0]), Err(Error::OutsideChamber(_))));
    assert!(SphericalParams::new(&rs, vec![1.0], vec![1.0, 0.0]).is_err());
}

#[test]
fn parallel_and_sequential_match() {
    let rs = RootSystemA::new(3, 0.6).unwrap();
    let lam = vec![4.0, 2.0, 1.0, -1.0];
    let x = vec![1.0, 0.5, 0.0, -0.7];
    let p = SphericalParams::new(&rs, lam, x).unwrap();
    let par = spherical_exact(&p).unwrap().ln_abs;
    let seq = spherical_exact(&p.clone().with_quad(SphericalQuad::default().sequential())).unwrap().ln_abs;
    assert_eq!(par.to_bits(), seq.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_x_symmetry(a in 0.01f64..6.0, b in 0.01f64..6.0, c in 0.01f64..6.0, d in 0.01f64..6.0, k in 0.2f64..3.0) {
        let rs = RootSystemA::new(2, k).unwrap();
        let lam = vec![a + b, b, 0.0];
        let x = vec![c + d, d, 0.0];
        let l = psi(&rs, &lam, &x);
        let r = psi(&rs, &x, &lam);
        prop_assert!((l - r).abs() < 1e-8 * l.abs().max(1.0), "{l} vs {r}");
    }

    #[test]
    fn shift_covariance(shift in -3.0f64..3.0, k in 0.2f64..3.0) {
        let rs = RootSystemA::new(2, k).unwrap();
        let lam = vec![2.0, 0.7, -0.4];
        let x = vec![0.8, 0.1, -0.5];
        let xs: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let d = psi(&rs, &lam, &xs) - psi(&rs, &lam, &x);
        prop_assert!((d - shift * 2.3).abs() < 1e-9);
    }

    #[test]
    fn ratio_between_envelope_limits(p in -3.0f64..4.0, k in 0.2f64..3.0) {
        // rank one: the ratio to the envelope lies between min(1, c) and max(1, c), c = Gamma(2k)/Gamma(k)
        let rs = RootSystemA::new(1, k).unwrap();
        let z = 10f64.powf(p);
        let r = psi(&rs, &[z, 0.0], &[1.0, 0.0]) - spherical_envelope(&rs, &[z, 0.0], &[1.0, 0.0]);
        let c = ln_gamma(2.0 * k) - ln_gamma(k);
        prop_assert!(r >= c.min(0.0) - 0.7 && r <= c.max(0.0) + 0.7, "z={z} k={k} ln ratio {r}");
    }
}
