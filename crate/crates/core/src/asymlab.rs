//! Numerical checks of the integral lemmas and of the intermediate integral I^(n)
//! behind the spherical estimate, as bounded-ratio sweeps.

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quad::gauss::Rule;
use crate::quad::halfline::integrate_halfline;
use crate::quad::weighted::{level_rule, LevelWeight};
use crate::quad::KernelValue;
use crate::rootsys::{ChamberPoint, RootSystemA};
use crate::special::{gamma_p, ln_gamma, log_sum_exp};
use crate::spherical::{spherical_normalized, SphericalQuad};
use serde::{Deserialize, Serialize};

/// Nodes per panel for the half-line lemma integrals (same policy as the Newton kernel).
const LEMMA_NODES: usize = 12;

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be nonnegative and finite, got {v}")));
    }
    Ok(())
}

/// gamma(k, x) / (x/(1+x))^k, with the limits 1/k at x = 0 and Gamma(k) at x = inf.
pub fn lemma_a_ratio(k: f64, x: f64) -> Result<f64> {
    positive("k", k)?;
    if x == f64::INFINITY {
        return Ok(ln_gamma(k).exp());
    }
    nonnegative("x", x)?;
    if x == 0.0 {
        return Ok(1.0 / k);
    }
    if x < k + 1.0 {
        // gamma(k, x) = x^k e^{-x} sum_n x^n / (k (k+1) ... (k+n))
        let mut term = 1.0 / k;
        let mut sum = term;
        let mut n = 1.0;
        while term > 1e-17 * sum {
            term *= x / (k + n);
            sum += term;
            n += 1.0;
        }
        Ok((k * x.ln_1p() - x).exp() * sum)
    } else {
        Ok((ln_gamma(k) + k * (1.0 / x).ln_1p()).exp() * gamma_p(k, x))
    }
}

/// ln of int_0^inf u^N e^{-u} / prod (a + b_i u)^k du.
fn ln_lemma_integral(k: f64, n_exp: f64, a: f64, b: &[f64]) -> Result<f64> {
    // with a = 0 the factors b_i u contribute a pure power
    let mut power = n_exp;
    let mut ln_const = 0.0;
    let mut scales = Vec::new();
    let mut varying = Vec::new();
    for &bi in b {
        if a == 0.0 {
            power -= k;
            ln_const -= k * bi.ln();
        } else if bi > 0.0 {
            scales.push(a / bi);
            varying.push(bi);
        } else {
            ln_const -= k * a.ln();
        }
    }
    let (v, _) = integrate_halfline(power, &scales, LEMMA_NODES, |u| {
        Ok(-k * varying.iter().map(|&bi| (a + bi * u).ln()).sum::<f64>())
    })?;
    Ok(ln_const + v)
}

/// [int_0^inf u^N e^{-u} du / prod (a + b_i u)^k] * prod (a + b_i)^k.
pub fn lemma_ai_ratio(k: f64, n_exp: f64, a: f64, b: &[f64]) -> Result<f64> {
    positive("k", k)?;
    nonnegative("a", a)?;
    for &bi in b {
        nonnegative("b_i", bi)?;
        if a + bi <= 0.0 {
            return Err(Error::Domain("a + b_i must be positive".into()));
        }
    }
    let m = b.len() as f64;
    if !(n_exp > k * m - 1.0) {
        return Err(Error::Domain(format!("N = {n_exp} must exceed k m - 1 = {}", k * m - 1.0)));
    }
    let ln_j = ln_lemma_integral(k, n_exp, a, b)?;
    Ok((ln_j + k * b.iter().map(|&bi| (a + bi).ln()).sum::<f64>()).exp())
}

/// [int_0^inf u^{k-1} e^{-u} du / (a + b u)^k] * (a + b)^k / ln(2 + b/a).
pub fn lemma_a1_ratio(k: f64, a: f64, b: f64) -> Result<f64> {
    positive("k", k)?;
    positive("a", a)?;
    nonnegative("b", b)?;
    let ln_j = ln_lemma_integral(k, k - 1.0, a, &[b])?;
    Ok((ln_j + k * (a + b).ln()).exp() / (2.0 + b / a).ln())
}

fn check_a2(k: f64, a: f64, b: [f64; 3]) -> Result<()> {
    positive("k", k)?;
    nonnegative("a", a)?;
    for &bi in &b {
        nonnegative("b_i", bi)?;
    }
    if !(b[0] <= b[1] && b[1] <= b[2]) {
        return Err(Error::Domain("need 0 <= b1 <= b2 <= b3".into()));
    }
    if a == 0.0 && b[0] == 0.0 {
        return Err(Error::Domain("a and b1 cannot both vanish".into()));
    }
    Ok(())
}

/// J * prod (a + b_i)^k for the three-factor integral J with N = 3k - 1.
/// Grows like ln(b1/a) as a -> 0 with b1 > 0.
pub fn lemma_a2_scaled(k: f64, a: f64, b1: f64, b2: f64, b3: f64) -> Result<f64> {
    check_a2(k, a, [b1, b2, b3])?;
    if a == 0.0 {
        return Err(Error::Divergent("the three-factor integral diverges at a = 0".into()));
    }
    let b = [b1, b2, b3];
    let ln_j = ln_lemma_integral(k, 3.0 * k - 1.0, a, &b)?;
    Ok((ln_j + k * b.iter().map(|&bi| (a + bi).ln()).sum::<f64>()).exp())
}

/// J * prod (a + b_i)^k / ln(2 + b1/a); only a > 0 is certified.
pub fn lemma_a2_ratio(k: f64, a: f64, b1: f64, b2: f64, b3: f64) -> Result<f64> {
    check_a2(k, a, [b1, b2, b3])?;
    if a == 0.0 {
        return Err(Error::Domain("the ratio is certified for a > 0 only".into()));
    }
    Ok(lemma_a2_scaled(k, a, b1, b2, b3)? / (2.0 + b1 / a).ln())
}

/// Factor standing in for the inner spherical function in I^(n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerFactor {
    /// prod_{i<j<=n} (y_i - y_j) / (1 + (lambda_i - lambda_j)(y_i - y_j))^k, as displayed.
    Envelope,
    /// prod (y_i - y_j) times the normalized spherical function of rank n - 1.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropInQuad {
    pub nodes: usize,
    pub inner: SphericalQuad,
    pub execution: Execution,
}

impl Default for PropInQuad {
    fn default() -> Self {
        Self { nodes: 24, inner: SphericalQuad::default(), execution: Execution::default() }
    }
}

/// Integrate over y_i in [lo_i, hi_i] subset of [x_{i+1}, x_i] (0-based, sorted
/// decreasing x) with the I^(n) integrand.
fn interlacing_integral(
    k: f64,
    lambda: &[f64],
    x: &[f64],
    intervals: &[(f64, f64)],
    inner: InnerFactor,
    quad: &PropInQuad,
) -> Result<KernelValue> {
    let n = intervals.len();
    let last = lambda[n];
    let mut ln_c = 0.0;
    let mut rules: Vec<Rule> = Vec::with_capacity(n);
    for (i, &(lo, hi)) in intervals.iter().enumerate() {
        let len = hi - lo;
        let mut w = LevelWeight::jacobi(0.0, 0.0);
        let mut count = 0usize;
        for (j, &xj) in x.iter().enumerate() {
            if j > i {
                // (y - x_j)^{k-1} = len^{k-1} (s + (lo - x_j)/len)^{k-1}
                if lo == xj {
                    w.left_exp = k - 1.0;
                } else if k != 1.0 {
                    w.left_factors.push(((lo - xj) / len, k - 1.0));
                }
            } else if hi == xj {
                w.right_exp = k - 1.0;
            } else if k != 1.0 {
                w.right_factors.push(((xj - hi) / len, k - 1.0));
            }
            count += 1;
        }
        let c = lambda[i] - last;
        w.rate = c * len;
        ln_c += (k - 1.0) * count as f64 * len.ln() + len.ln() - c * (x[i] - hi);
        let r = level_rule(&w, quad.nodes)?;
        ln_c += r.ln_mass;
        rules.push(r);
    }
    let sizes: Vec<usize> = rules.iter().map(|r| r.len()).collect();
    let total: usize = sizes.iter().product();
    let inner_rs = if inner == InnerFactor::Exact && n >= 2 {
        Some(RootSystemA::new(n - 1, k)?)
    } else {
        None
    };
    let terms = map_indexed(quad.execution, total, |flat| -> Result<(f64, u64)> {
        let mut rem = flat;
        let mut y = vec![0.0; n];
        let mut lw = 0.0;
        for lvl in (0..n).rev() {
            let i = rem % sizes[lvl];
            rem /= sizes[lvl];
            let (lo, hi) = intervals[lvl];
            y[lvl] = lo + (hi - lo) * rules[lvl].nodes[i];
            lw += rules[lvl].weights[i].ln();
        }
        let mut g = 0.0;
        let mut ev = 0;
        for i in 0..n {
            for j in i + 1..n {
                g += (y[i] - y[j]).ln();
                if inner == InnerFactor::Envelope {
                    g -= k * ((lambda[i] - lambda[j]) * (y[i] - y[j])).ln_1p();
                }
            }
        }
        if let Some(rs) = &inner_rs {
            let phi = spherical_normalized(rs, &lambda[..n], &y, &quad.inner)?;
            g += phi.ln_abs;
            ev += phi.evaluations;
        }
        Ok((lw + g, ev))
    });
    let mut lns = Vec::with_capacity(total);
    let mut evals = total as u64;
    for t in terms {
        let (l, e) = t?;
        lns.push(l);
        evals += e;
    }
    Ok(KernelValue::positive(ln_c + log_sum_exp(&lns), 0.0, evals))
}

fn prepare(rs: &RootSystemA, lambda: &[f64], x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let lam = ChamberPoint::new(rs, lambda.to_vec())?;
    let xp = ChamberPoint::new(rs, x.to_vec())?;
    if !rs.in_open_chamber(&xp) {
        return Err(Error::OutsideChamber("I^(n) needs X in the open chamber".into()));
    }
    Ok((rs.active_values(&lam), rs.active_values(&xp)))
}

/// I^(n) over the full interlacing box.
pub fn prop_in(rs: &RootSystemA, lambda: &[f64], x: &[f64], inner: InnerFactor, quad: &PropInQuad) -> Result<KernelValue> {
    let (lam, xv) = prepare(rs, lambda, x)?;
    let intervals: Vec<(f64, f64)> = (0..rs.rank()).map(|i| (xv[i + 1], xv[i])).collect();
    interlacing_integral(rs.k(), &lam, &xv, &intervals, inner, quad)
}

/// ln of pi(X)^{2k-1} / prod_{i<j} (1 + (lambda_i - lambda_j)(x_i - x_j))^k.
pub fn prop_in_envelope(rs: &RootSystemA, lambda: &[f64], x: &[f64]) -> Result<f64> {
    let (lam, xv) = prepare(rs, lambda, x)?;
    let k = rs.k();
    let mut v = 0.0;
    for i in 0..xv.len() {
        for j in i + 1..xv.len() {
            let d = xv[i] - xv[j];
            v += (2.0 * k - 1.0) * d.ln() - k * ((lam[i] - lam[j]) * d).ln_1p();
        }
    }
    Ok(v)
}

/// Constant C with I^(n) = e^{-lambda(X)} pi(X)^{2k-1} psi_lambda(X) / C when the
/// inner factor is exact: Gamma(k(n+1)) / Gamma(k)^{n+1}.
pub fn prop_in_constant(rs: &RootSystemA) -> f64 {
    let n1 = (rs.rank() + 1) as f64;
    (ln_gamma(rs.k() * n1) - n1 * ln_gamma(rs.k())).exp()
}

/// I_1 / I^(n), where I_1 restricts y_n to [M_n, x_n]. Needs x_n - x_{n+1} to be
/// the largest gap.
pub fn prop_truncated_ratio(
    rs: &RootSystemA,
    lambda: &[f64],
    x: &[f64],
    inner: InnerFactor,
    quad: &PropInQuad,
) -> Result<f64> {
    let (lam, xv) = prepare(rs, lambda, x)?;
    let n = rs.rank();
    let gaps: Vec<f64> = xv.windows(2).map(|w| w[0] - w[1]).collect();
    if gaps.iter().any(|&g| g > gaps[n - 1]) {
        return Err(Error::Precondition("x_n - x_{n+1} must be the largest gap".into()));
    }
    let mut intervals: Vec<(f64, f64)> = (0..n).map(|i| (xv[i + 1], xv[i])).collect();
    let full = interlacing_integral(rs.k(), &lam, &xv, &intervals, inner, quad)?;
    intervals[n - 1].0 = 0.5 * (xv[n - 1] + xv[n]);
    let part = interlacing_integral(rs.k(), &lam, &xv, &intervals, inner, quad)?;
    Ok((part.ln_abs - full.ln_abs).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    LemmaA,
    LemmaAi,
    LemmaA1,
    LemmaA2,
    PropTruncated,
    PropIn,
}

impl ClaimId {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "lemma_A" | "lemma_a" | "A" => ClaimId::LemmaA,
            "lemma_ai" | "ai" => ClaimId::LemmaAi,
            "lemma_a1" | "a1" => ClaimId::LemmaA1,
            "lemma_a2" | "a2" => ClaimId::LemmaA2,
            "prop_truncated" | "truncated" => ClaimId::PropTruncated,
            "prop_In" | "prop_in" | "In" => ClaimId::PropIn,
            _ => return Err(Error::Config(format!("unknown claim {s}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClaimId::LemmaA => "lemma_A",
            ClaimId::LemmaAi => "lemma_ai",
            ClaimId::LemmaA1 => "lemma_a1",
            ClaimId::LemmaA2 => "lemma_a2",
            ClaimId::PropTruncated => "prop_truncated",
            ClaimId::PropIn => "prop_In",
        }
    }
}

/// One sampled point of a claim: the inputs and the ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimPoint {
    pub inputs: Vec<f64>,
    pub ratio: f64,
}

/// Recorded bracket [c1, c2] of a claim over its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsympClaim {
    pub id: ClaimId,
    pub k: f64,
    /// Rescaling applied to the scale-carrying inputs.
    pub scale: f64,
    pub input_names: Vec<String>,
    pub points: Vec<ClaimPoint>,
    pub bracket: [f64; 2],
}

impl AsympClaim {
    fn from_points(id: ClaimId, k: f64, scale: f64, names: &[&str], points: Vec<ClaimPoint>) -> Self {
        let lo = points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
        Self {
            id,
            k,
            scale,
            input_names: names.iter().map(|s| s.to_string()).collect(),
            points,
            bracket: [lo, hi],
        }
    }

    pub fn spread(&self) -> f64 {
        self.bracket[1] / self.bracket[0]
    }

    /// Largest relative change of either bracket end against another sweep.
    pub fn bracket_change(&self, other: &AsympClaim) -> f64 {
        let d0 = (self.bracket[0] / other.bracket[0] - 1.0).abs();
        let d1 = (self.bracket[1] / other.bracket[1] - 1.0).abs();
        d0.max(d1)
    }
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

/// Sweep one of the lemma claims over its default grid, with all scale-carrying
/// inputs multiplied by `scale`.
pub fn lemma_sweep(id: ClaimId, k: f64, scale: f64, exec: Execution) -> Result<AsympClaim> {
    positive("k", k)?;
    positive("scale", scale)?;
    let (names, grid): (Vec<&str>, Vec<Vec<f64>>) = match id {
        ClaimId::LemmaA => (vec!["x"], logspace(1e-6, 1e6, 121).into_iter().map(|x| vec![x * scale]).collect()),
        ClaimId::LemmaAi => {
            let mut g = Vec::new();
            let vals = [0.0, 1e-3, 1e-1, 10.0, 1e3];
            for &a in &[0.0, 1e-3, 1e-1, 1.0, 10.0, 1e3] {
                for m in 1..=2 {
                    for &extra in &[0.5, 2.0] {
                        let n_exp = k * m as f64 - 1.0 + extra;
                        for &b1 in &vals {
                            let bs: Vec<Vec<f64>> = if m == 1 {
                                vec![vec![b1]]
                            } else {
                                vals.iter().map(|&b2| vec![b1, b2]).collect()
                            };
                            for b in bs {
                                if b.iter().any(|&bi| a + bi <= 0.0) {
                                    continue;
                                }
                                let mut row = vec![n_exp, a * scale];
                                row.extend(b.iter().map(|v| v * scale));
                                row.resize(4, f64::NAN);
                                g.push(row);
                            }
                        }
                    }
                }
            }
            (vec!["N", "a", "b1", "b2"], g)
        }
        ClaimId::LemmaA1 => {
            let mut g = Vec::new();
            for &a in &logspace(1e-3, 1e3, 7) {
                for &r in std::iter::once(&0.0).chain(logspace(1e-4, 1e8, 13).iter()) {
                    g.push(vec![a * scale, r * a * scale]);
                }
            }
            (vec!["a", "b"], g)
        }
        ClaimId::LemmaA2 => {
            let mut g = Vec::new();
            for &a in &logspace(1e-3, 1e3, 4) {
                for &r in std::iter::once(&0.0).chain(logspace(1e-3, 1e6, 7).iter()) {
                    for &r2 in &[1.0, 1e2] {
                        for &r3 in &[1.0, 1e3] {
                            let b1 = r * a;
                            let b2 = if b1 == 0.0 { r2 * a } else { b1 * r2 };
                            g.push(vec![a * scale, b1 * scale, b2 * scale, b2 * r3 * scale]);
                        }
                    }
                }
            }
            (vec!["a", "b1", "b2", "b3"], g)
        }
        _ => return Err(Error::Config(format!("{} is not a lemma claim", id.name()))),
    };
    let results = map_indexed(exec, grid.len(), |i| {
        let p = &grid[i];
        match id {
            ClaimId::LemmaA => lemma_a_ratio(k, p[0]),
            ClaimId::LemmaAi => {
                let b: Vec<f64> = p[2..].iter().copied().filter(|v| !v.is_nan()).collect();
                lemma_ai_ratio(k, p[0], p[1], &b)
            }
            ClaimId::LemmaA1 => lemma_a1_ratio(k, p[0], p[1]),
            _ => lemma_a2_ratio(k, p[0], p[1], p[2], p[3]),
        }
    });
    let mut points = Vec::with_capacity(grid.len());
    for (inputs, r) in grid.into_iter().zip(results) {
        let ratio = r?;
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::NonFinite(format!("{} ratio at {inputs:?}", id.name())));
        }
        points.push(ClaimPoint { inputs, ratio });
    }
    Ok(AsympClaim::from_points(id, k, scale, &names, points))
}

/// Sweep I^(n) (PropIn) or I_1/I^(n) (PropTruncated) on a rank-n grid where the
/// pairing products span [1e-2, 1e3].
pub fn prop_sweep(id: ClaimId, n: usize, k: f64, inner: InnerFactor, quad: &PropInQuad) -> Result<AsympClaim> {
    let rs = RootSystemA::new(n, k)?;
    let mut grid = Vec::new();
    for &p in &logspace(1e-2, 1e3, 6) {
        for &shape in &[1.0f64, 0.5, 0.1] {
            // gaps increase toward the last one so that it is the largest
            let gaps: Vec<f64> = (0..n).map(|i| shape.powi((n - 1 - i) as i32)).collect();
            let mut x = vec![0.0; n + 1];
            for i in (0..n).rev() {
                x[i] = x[i + 1] + gaps[i];
            }
            let lam: Vec<f64> = (0..=n).map(|i| p * (n - i) as f64 / n as f64).collect();
            grid.push((lam, x));
        }
    }
    let names: Vec<String> =
        (1..=n + 1).map(|i| format!("lambda{i}")).chain((1..=n + 1).map(|i| format!("x{i}"))).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut points = Vec::new();
    for (lam, x) in grid {
        let ratio = match id {
            ClaimId::PropIn => {
                let v = prop_in(&rs, &lam, &x, inner, quad)?;
                (v.ln_abs - prop_in_envelope(&rs, &lam, &x)?).exp()
            }
            ClaimId::PropTruncated => prop_truncated_ratio(&rs, &lam, &x, inner, quad)?,
            _ => return Err(Error::Config(format!("{} is not a proposition claim", id.name()))),
        };
        let mut inputs = lam.clone();
        inputs.extend(&x);
        points.push(ClaimPoint { inputs, ratio });
    }
    Ok(AsympClaim::from_points(id, k, 1.0, &names, points))
}
