//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use dunkl_core::asymlab::{lemma_a1_ratio, ClaimId};
use dunkl_core::certify::{certify, grid, CertifyReport, Kernel, SweepConfig};
use dunkl_core::heatkernel::{
    chapman_kolmogorov_check, generator_check, heat_envelope, heat_exact, heat_mass_ln, ln_c_norm, ChamberQuad,
    HeatParams,
};
use dunkl_core::newton::{newton_d2_a1_numerator, newton_exact, NewtonParams};
use dunkl_core::rootsys::RootSystemA;
use dunkl_core::selftest::{run_selftest, SelfTestOptions};
use dunkl_core::special::ln_gamma;
use dunkl_core::spherical::{spherical_exact, spherical_oracle_k1, SphericalParams, SphericalQuad};
use dunkl_core::stable::{stable_envelope, stable_exact, StableParams};
use dunkl_core::subordinator::{
    ln_subordinator_density, record_subordinator_constants, subordinator_bounds_check, subordinator_density,
    SubordinatorMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {msg}", if ok { "ok  " } else { "FAIL" }));
    }

    fn report(&mut self, rep: &CertifyReport, label: &str) {
        for g in &rep.groups {
            let sv = g.s.map(|v| format!(" s={v}")).unwrap_or_default();
            let slope = g.slope_limit.map(|l| format!(", slope {:+.4} (limit {l})", g.slope)).unwrap_or_default();
            let change = g.scale_change.map(|c| format!(", scale change {c:.2e}")).unwrap_or_default();
            self.check(
                g.pass,
                format!(
                    "{label} k={}{sv}: {} pts, ratio [{:.3e}, {:.3e}], spread {:.3e} (limit {:.0e}){slope}{change}, {} failed pts",
                    g.k, g.count, g.min, g.max, g.spread, g.threshold, g.failures
                ),
            );
        }
        for e in &rep.errors {
            self.check(false, format!("{label}: {e}"));
        }
    }
}

fn decreasing(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(lo..hi)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn scaled(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().map(|x| x * c).collect()
}

fn k1_oracle() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (n, tol) in [(1usize, 1e-6), (2, 1e-4), (3, 1e-3)] {
        let rs = RootSystemA::new(n, 1.0).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let lam = decreasing(&mut rng, n + 1, -3.0, 3.0);
            let x = decreasing(&mut rng, n + 1, -2.0, 2.0);
            let got = spherical_exact(&SphericalParams::new(&rs, lam.clone(), x.clone()).unwrap()).unwrap().ln_abs;
            let want = spherical_oracle_k1(&rs, &lam, &x).unwrap();
            worst = worst.max((got - want).exp_m1().abs());
        }
        o.check(worst <= tol, format!("A_{n}: 50 points, max rel err {worst:.2e} (tol {tol:.0e})"));
    }
    let secs = start.elapsed().as_secs_f64();
    o.check(secs <= 300.0, format!("runtime {secs:.1} s (limit 300 s)"));
    o
}

fn spherical_sweeps() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for n in 1..=3 {
        let t0 = Instant::now();
        let rep = certify(&SweepConfig::for_kernel(Kernel::Spherical, n)).unwrap();
        o.report(&rep, &format!("A_{n}"));
        let secs = t0.elapsed().as_secs_f64();
        if n == 2 {
            let upto = start.elapsed().as_secs_f64();
            o.check(upto <= 120.0, format!("n <= 2 runtime {upto:.1} s (limit 120 s)"));
        }
        o.lines.push(format!("     A_{n} sweep took {secs:.1} s"));
    }
    let secs = start.elapsed().as_secs_f64();
    o.check(secs <= 1800.0, format!("runtime {secs:.1} s (limit 1800 s)"));
    o
}

fn heat_identities() -> Outcome {
    let mut o = Outcome::new();
    let q = SphericalQuad::default();
    let cq = ChamberQuad::default();
    for (n, x) in [(1usize, vec![0.8, -0.3]), (2, vec![0.9, 0.2, -0.4])] {
        let mut worst = 0.0f64;
        for k in [0.5, 1.0, 2.0] {
            let rs = RootSystemA::new(n, k).unwrap();
            for t in [0.5, 1.0, 2.0] {
                let m = heat_mass_ln(&rs, t, &x, ln_c_norm(&rs), &q, &cq).unwrap();
                worst = worst.max(m.exp_m1().abs());
            }
        }
        o.check(worst <= 1e-3, format!("mass A_{n}: max |mass - 1| {worst:.2e} over (k, t) in {{0.5, 1, 2}}^2 (tol 1e-3)"));
    }
    let rs = RootSystemA::new(1, 1.0).unwrap();
    let r = chapman_kolmogorov_check(&rs, 0.5, 0.5, &[1.0, -0.2], &[0.1, 0.0], &q, &cq).unwrap();
    o.check(r < 1e-4, format!("Chapman-Kolmogorov A_1 t = s = 0.5: residual {r:.2e} (tol 1e-4)"));
    for k in [0.5, 1.0, 2.0] {
        let rs = RootSystemA::new(1, k).unwrap();
        let g = generator_check(&rs, 1.0, &[1.0, 0.2], &[0.4, -0.1], 1e-4, &q).unwrap();
        o.check(g.residual < 1e-3, format!("generator A_1 k={k} h=1e-4: residual {:.2e} (tol 1e-3)", g.residual));
    }
    o
}

fn heat_certification() -> Outcome {
    let mut o = Outcome::new();
    for n in 1..=3 {
        let c = SweepConfig::for_kernel(Kernel::Heat, n);
        let rs = c.root_system(1.0).unwrap();
        let pts = grid(&c).unwrap();
        let prods: Vec<(f64, f64)> = pts
            .iter()
            .map(|p| {
                let r = rs.positive_roots()[0];
                (p.t.unwrap(), rs.pairing(r, &p.x) * rs.pairing(r, &p.y))
            })
            .collect();
        let below = prods.iter().any(|(t, a)| t < a);
        let above = prods.iter().any(|(t, a)| t > a);
        o.check(below && above, format!("A_{n}: grid covers t < alpha(X)alpha(Y) and t > alpha(X)alpha(Y)"));
        o.report(&certify(&c).unwrap(), &format!("A_{n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = rng.gen_range(0.25..2.5);
        let rs = RootSystemA::new(2, k).unwrap();
        let t = 10f64.powf(rng.gen_range(-2.0..2.0));
        let x = decreasing(&mut rng, 3, -2.0, 2.0);
        let y = decreasing(&mut rng, 3, -2.0, 2.0);
        let ln_r = |t: f64, x: &[f64], y: &[f64]| {
            heat_exact(&HeatParams::new(&rs, t, x.to_vec(), y.to_vec()).unwrap()).unwrap().ln_abs - heat_envelope(&rs, t, x, y)
        };
        let base = ln_r(t, &x, &y);
        for c in [0.1, 10.0] {
            worst = worst.max((ln_r(c * c * t, &scaled(&x, c), &scaled(&y, c)) - base).exp_m1().abs());
        }
    }
    o.check(worst <= 1e-6, format!("parabolic rescaling c in {{0.1, 10}}: max rel change {worst:.2e} (tol 1e-6)"));
    o
}

fn newton_certification() -> Outcome {
    let mut o = Outcome::new();
    for n in [1, 2] {
        let c = SweepConfig::for_kernel(Kernel::Newton, n);
        o.report(&certify(&c).unwrap(), &format!("d=3 A_{n}"));
    }
    let mut a1 = SweepConfig::for_kernel(Kernel::Newton, 1);
    a1.dim = Some(2);
    o.report(&certify(&a1).unwrap(), "d=2 A_1");
    let mut worst = f64::INFINITY;
    for p in grid(&a1).unwrap() {
        let rs = a1.root_system(p.k).unwrap();
        worst = worst.min(newton_d2_a1_numerator(&rs, &p.x, &p.y).unwrap());
    }
    o.check(worst >= 2f64.ln(), format!("d=2 A_1 numerator: min {worst:.6} (>= ln 2 = {:.6})", 2f64.ln()));
    let mut a2 = SweepConfig::for_kernel(Kernel::Newton, 2);
    a2.dim = None;
    a2.trace_zero = true;
    o.report(&certify(&a2).unwrap(), "d=2 A_2");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let k = rng.gen_range(0.25..2.5);
        let n = rng.gen_range(1..=2usize);
        let rs = RootSystemA::with_dimension(n, 3, k).unwrap();
        let len = n + 1;
        let mut x = decreasing(&mut rng, len, -2.0, 2.0);
        let mut y = decreasing(&mut rng, len, -2.0, 2.0);
        x.resize(3, 0.3);
        y.resize(3, -0.6);
        let expo = 3.0 - 2.0 + 2.0 * rs.gamma();
        let ln_n = |x: &[f64], y: &[f64]| newton_exact(&NewtonParams::new(&rs, x.to_vec(), y.to_vec()).unwrap()).unwrap().ln_abs;
        let base = ln_n(&x, &y);
        for c in [0.1f64, 10.0] {
            worst = worst.max((ln_n(&scaled(&x, c), &scaled(&y, c)) + expo * c.ln() - base).exp_m1().abs());
        }
    }
    o.check(worst <= 1e-5, format!("homogeneity d=3 c in {{0.1, 10}}: max rel change {worst:.2e} (tol 1e-5)"));
    o
}

/// int eta_t(u) e^{-z u} du by the trapezoid rule in ln u, with the u^{-1-beta} tail added when z = 0.
fn subordinator_laplace(s: f64, t: f64, z: f64) -> f64 {
    let h = 0.01;
    let (lo, hi) = (-40.0f64, 80.0f64);
    let n = ((hi - lo) / h) as usize;
    let mut sum = 0.0;
    for i in 0..=n {
        let v = lo + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * (ln_subordinator_density(s, t, v.exp(), SubordinatorMethod::Auto).unwrap() + v - z * v.exp()).exp();
    }
    let beta = 0.5 * s;
    let tail = if z == 0.0 { t * (-beta * hi).exp() / ln_gamma(1.0 - beta).exp() } else { 0.0 };
    sum * h + tail
}

fn subordinator() -> Outcome {
    let mut o = Outcome::new();
    for s in [0.5, 1.0, 1.5] {
        let m = subordinator_laplace(s, 1.0, 0.0);
        o.check((m - 1.0).abs() <= 1e-6, format!("s={s}: mass {m:.10} (tol 1e-6)"));
        let mut worst = 0.0f64;
        for z in [0.5, 1.0, 2.0] {
            let got = subordinator_laplace(s, 1.0, z);
            worst = worst.max((got - (-z.powf(0.5 * s)).exp()).abs());
        }
        o.check(worst <= 1e-6, format!("s={s}: Laplace transform at z in {{0.5, 1, 2}}, max err {worst:.2e} (tol 1e-6)"));
    }
    let mut worst = 0.0f64;
    for i in 0..=24 {
        let u = 10f64.powf(-2.0 + 0.25 * i as f64);
        let a = subordinator_density(1.0, 1.0, u, SubordinatorMethod::ClosedForm).unwrap();
        let b = subordinator_density(1.0, 1.0, u, SubordinatorMethod::ContourSine).unwrap();
        worst = worst.max((b / a - 1.0).abs());
    }
    o.check(worst <= 1e-6, format!("s=1: branch-cut inversion vs closed form on u in [1e-2, 1e4], max rel err {worst:.2e} (tol 1e-6)"));
    for s in [0.5, 1.0, 1.5] {
        let c = record_subordinator_constants(s, 50).unwrap();
        let mut held = true;
        for t in [1e-2, 1.0, 1e2f64] {
            for i in 0..=400 {
                let u = 10f64.powf(-4.0 + 0.02 * i as f64) * t.powf(2.0 / s);
                let (up, tail) = subordinator_bounds_check(s, t, u, &c).unwrap();
                held &= up && tail;
            }
        }
        o.check(
            held && c.upper.is_finite() && c.tail_lower > 0.0,
            format!(
                "s={s}: bounds hold over u/t^(2/s) in [1e-4, 1e4], t in {{1e-2, 1, 1e2}}; upper C = {:.4}, tail [{:.4}, {:.4}]",
                c.upper, c.tail_lower, c.tail_upper
            ),
        );
    }
    o
}

fn stable_certification() -> Outcome {
    let mut o = Outcome::new();
    let c = SweepConfig::for_kernel(Kernel::Stable, 1);
    let pts = grid(&c).unwrap();
    for &s in &c.s {
        let near = pts.iter().filter(|p| p.s == Some(s)).any(|p| {
            p.t.unwrap().powf(2.0 / s) < dunkl_core::rootsys::dist_sq(&p.x, &p.y)
        });
        let far = pts.iter().filter(|p| p.s == Some(s)).any(|p| {
            p.t.unwrap().powf(2.0 / s) > dunkl_core::rootsys::dist_sq(&p.x, &p.y)
        });
        o.check(near && far, format!("s={s}: grid straddles t^(2/s) = |X - Y|^2"));
    }
    o.report(&certify(&c).unwrap(), "A_1");
    let rs = RootSystemA::new(1, 0.8).unwrap();
    let (x, y) = (vec![1.2, 0.1], vec![0.3, -0.5]);
    let expo = rs.dim() as f64 + 2.0 * rs.gamma();
    let mut worst = 0.0f64;
    for s in [0.5, 1.0, 1.5] {
        let ln_h = |t: f64, x: &[f64], y: &[f64]| {
            let p = StableParams::new(&rs, s, t, x.to_vec(), y.to_vec()).unwrap();
            stable_exact(&p).unwrap().ln_abs - stable_envelope(&rs, s, t, x, y)
        };
        for t in [0.1, 1.0, 10.0] {
            let base = ln_h(t, &x, &y) + stable_envelope(&rs, s, t, &x, &y);
            for c in [0.1f64, 10.0] {
                let (xs, ys) = (scaled(&x, c), scaled(&y, c));
                let t2 = c.powf(s) * t;
                let v = ln_h(t2, &xs, &ys) + stable_envelope(&rs, s, t2, &xs, &ys) + expo * c.ln();
                worst = worst.max((v - base).exp_m1().abs());
            }
        }
    }
    o.check(worst <= 1e-4, format!("scaling identity s in {{0.5, 1, 1.5}}, c in {{0.1, 10}}: max rel change {worst:.2e} (tol 1e-4)"));
    o
}

fn lemma_suite() -> Outcome {
    let mut o = Outcome::new();
    for id in [ClaimId::LemmaA, ClaimId::LemmaAi, ClaimId::LemmaA1, ClaimId::LemmaA2] {
        let c = SweepConfig::for_kernel(Kernel::Lemma(id), 1);
        o.report(&certify(&c).unwrap(), id.name());
    }
    // E_1(1) = 0.21938393439552027368
    let want = 2.0 * std::f64::consts::E * 0.21938393439552027368 / 3f64.ln();
    let got = lemma_a1_ratio(1.0, 1.0, 1.0).unwrap();
    let err = (got / want - 1.0).abs();
    o.check(err <= 1e-8, format!("lemma_a1 at (1, 1, 1): {got:.15} vs {want:.15}, rel err {err:.1e} (tol 1e-8)"));
    o
}

fn selftest() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let rep = run_selftest(&SelfTestOptions::default());
    let secs = start.elapsed().as_secs_f64();
    o.check(rep.pass, format!("{} checks, failed: {:?}", rep.lines.len(), rep.failed()));
    o.check(secs <= 60.0, format!("runtime {secs:.3} s (limit 60 s)"));
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("k=1 oracle agreement", k1_oracle),
        ("spherical certification", spherical_sweeps),
        ("heat identities", heat_identities),
        ("heat certification", heat_certification),
        ("Newton certification", newton_certification),
        ("subordinator", subordinator),
        ("stable certification", stable_certification),
        ("lemma suite", lemma_suite),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let start = Instant::now();
    let mut results = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|c| c != i + 1) {
            continue;
        }
        let t0 = Instant::now();
        let out = f();
        let secs = t0.elapsed().as_secs_f64();
        for l in &out.lines {
            println!("    {l}");
        }
        println!("criterion {} {}: {name} ({secs:.1} s)", i + 1, if out.pass { "PASS" } else { "FAIL" });
        results.push(out.pass);
    }
    let total = start.elapsed().as_secs_f64();
    if only.is_none_or(|c| c == 9) {
        let mut out = selftest();
        if only.is_none() {
            out.check(total <= 45.0 * 60.0, format!("criteria 1-8 took {total:.1} s (limit 2700 s)"));
        }
        for l in &out.lines {
            println!("    {l}");
        }
        println!("criterion 9 {}: selftest and suite runtime", if out.pass { "PASS" } else { "FAIL" });
        results.push(out.pass);
    }
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
