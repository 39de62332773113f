//! Ratio sweeps exact / envelope over configurable grids, with CSV and JSON reports.

use crate::asymlab::{lemma_sweep, logspace, prop_sweep, ClaimId, InnerFactor, PropInQuad};
use crate::error::{Error, Result};
use crate::heatkernel::{heat_envelope, heat_exact, HeatParams};
use crate::newton::{newton_envelope_d2_a1, newton_envelope_d2_a2, newton_envelope_d3, newton_exact, NewtonParams};
use crate::par::{map_indexed, with_threads, Execution};
use crate::quad::{check_budget, default_budget, KernelValue};
use crate::rootsys::{dist_sq, RootSystemA};
use crate::special::ln_gamma;
use crate::spherical::{spherical_envelope, spherical_exact, SphericalParams, SphericalQuad};
use crate::stable::{stable_envelope, stable_exact, StableParams};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Kernel {
    Spherical,
    Heat,
    Newton,
    Stable,
    Lemma(ClaimId),
}

impl Kernel {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "spherical" => Kernel::Spherical,
            "heat" => Kernel::Heat,
            "newton" => Kernel::Newton,
            "stable" => Kernel::Stable,
            _ => match s.strip_prefix("lemma:") {
                Some(id) => Kernel::Lemma(ClaimId::parse(id)?),
                None => return Err(Error::Config(format!("unknown kernel {s}"))),
            },
        })
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Spherical => "spherical".into(),
            Kernel::Heat => "heat".into(),
            Kernel::Newton => "newton".into(),
            Kernel::Stable => "stable".into(),
            Kernel::Lemma(id) => format!("lemma:{}", id.name()),
        }
    }
}

impl TryFrom<String> for Kernel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Kernel::parse(&s)
    }
}

impl From<Kernel> for String {
    fn from(k: Kernel) -> String {
        k.name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl Range {
    pub fn single(v: f64) -> Self {
        Self { lo: v, hi: v, count: 1, log: false }
    }

    pub fn log(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, hi, count, log: true }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Config("empty grid range".into()));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.hi < self.lo {
            return Err(Error::Config(format!("bad range [{}, {}]", self.lo, self.hi)));
        }
        if self.count == 1 {
            return Ok(vec![self.lo]);
        }
        if self.log {
            if !(self.lo > 0.0) {
                return Err(Error::Config("log-spaced range needs lo > 0".into()));
            }
            return Ok(logspace(self.lo, self.hi, self.count));
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count).map(|i| self.lo + (self.hi - self.lo) * i as f64 / n).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadOverrides {
    #[serde(default)]
    pub top_nodes: Option<usize>,
    #[serde(default)]
    pub inner_nodes: Option<usize>,
    #[serde(default)]
    pub estimate_error: bool,
}

impl QuadOverrides {
    pub fn apply(&self, exec: Execution) -> SphericalQuad {
        let mut q = SphericalQuad { top_nodes: self.top_nodes, inner_nodes: self.inner_nodes, ..Default::default() };
        q.estimate_error = self.estimate_error;
        q.execution = exec;
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Sweep description. Points are X = x * Xs and Y = x * (Xs + offset * Ys)
/// for chamber directions Xs, Ys; spherical points use lambda = lambda * Ls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub kernel: Kernel,
    pub n: usize,
    pub k: Vec<f64>,
    /// Ambient dimension; defaults to n + 1.
    pub dim: Option<usize>,
    pub trace_zero: bool,
    pub lambda: Range,
    pub x: Range,
    pub offset: Range,
    pub t: Range,
    pub s: Vec<f64>,
    /// Number of chamber directions used.
    pub shapes: usize,
    pub quad: QuadOverrides,
    /// Largest admissible max/min ratio per group.
    pub threshold: f64,
    /// Largest admissible |slope| of ln ratio against the scale variable.
    pub slope_limit: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::for_kernel(Kernel::Spherical, 1)
    }
}

impl SweepConfig {
    pub fn for_kernel(kernel: Kernel, n: usize) -> Self {
        let mut c = SweepConfig {
            kernel,
            n,
            k: vec![0.5, 1.0, 2.0],
            dim: None,
            trace_zero: false,
            lambda: Range::single(1.0),
            x: Range::single(1.0),
            offset: Range::single(1.0),
            t: Range::single(1.0),
            s: vec![1.0],
            shapes: 2,
            quad: QuadOverrides::default(),
            threshold: 1e2,
            slope_limit: None,
            output: None,
            format: OutputFormat::Csv,
            threads: None,
        };
        match kernel {
            Kernel::Spherical => {
                c.k = vec![0.25, 0.5, 1.0, 2.5];
                c.lambda = Range::log(1e-3, 1e4, 15);
                c.threshold = 1e3;
                c.slope_limit = Some(0.02);
            }
            Kernel::Heat => {
                c.t = Range::log(1e-2, 1e2, 5);
                c.x = Range::log(0.1, 10.0, 3);
                c.offset = Range::log(0.1, 10.0, 3);
            }
            Kernel::Newton => {
                c.dim = Some(3.max(n + 1));
                c.offset = Range::log(1e-2, 1e2, 9);
            }
            Kernel::Stable => {
                c.s = vec![0.5, 1.0, 1.5];
                c.t = Range::log(1e-2, 1e2, 5);
                c.offset = Range::log(0.1, 10.0, 3);
                c.shapes = 1;
            }
            Kernel::Lemma(_) => {
                c.k = vec![0.25, 0.5, 1.0, 2.0, 4.0];
                c.threshold = 1e12;
            }
        }
        c
    }

    pub fn root_system(&self, k: f64) -> Result<RootSystemA> {
        if self.trace_zero {
            RootSystemA::trace_zero(self.n, k)
        } else if let Some(d) = self.dim {
            RootSystemA::with_dimension(self.n, d, k)
        } else {
            RootSystemA::new(self.n, k)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn execution(&self) -> Execution {
        if self.threads == Some(1) {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

/// One grid point; absent coordinates are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub k: f64,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub lambda: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GridPoint {
    fn inputs(&self) -> Vec<f64> {
        let mut v = vec![self.k];
        v.extend(self.s);
        v.extend(self.t);
        v.extend(&self.lambda);
        v.extend(&self.x);
        v.extend(&self.y);
        v
    }
}

/// Gap patterns for chamber directions, normalized to unit geometric mean.
fn gap_patterns(n: usize) -> Vec<Vec<f64>> {
    let pats: Vec<Vec<f64>> = vec![
        vec![1.0; n],
        (0..n).map(|i| 3f64.powi(i as i32)).collect(),
        (0..n).map(|i| 3f64.powi(-(i as i32))).collect(),
        (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.2 }).collect(),
    ];
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in pats {
        let gm = (p.iter().map(|g| g.ln()).sum::<f64>() / n as f64).exp();
        let p: Vec<f64> = p.iter().map(|g| g / gm).collect();
        if !out.iter().any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12)) {
            out.push(p);
        }
    }
    out
}

/// Chamber direction with the given gaps on the active coordinates (mean zero)
/// and `rest` on the inactive ones.
fn direction(rs: &RootSystemA, gaps: &[f64], rest: f64) -> Vec<f64> {
    let n = rs.rank();
    let mut vals = vec![0.0; n + 1];
    for i in (0..n).rev() {
        vals[i] = vals[i + 1] + gaps[i];
    }
    let mean = vals.iter().sum::<f64>() / (n + 1) as f64;
    let mut out = vec![rest; rs.coord_len()];
    for (v, &c) in vals.iter().zip(&rs.active()) {
        out[c] = v - mean;
    }
    out
}

fn shape_pairs(rs: &RootSystemA, count: usize, rest_y: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let pats = gap_patterns(rs.rank());
    let m = pats.len();
    (0..count.clamp(1, m))
        .map(|j| (direction(rs, &pats[j], 0.0), direction(rs, &pats[(j + 1) % m], rest_y)))
        .collect()
}

pub fn grid(config: &SweepConfig) -> Result<Vec<GridPoint>> {
    if config.k.is_empty() {
        return Err(Error::Config("no multiplicities given".into()));
    }
    let mut pts = Vec::new();
    let scale = |v: &[f64], c: f64| -> Vec<f64> { v.iter().map(|a| a * c).collect() };
    for &k in &config.k {
        let rs = config.root_system(k)?;
        let shapes = shape_pairs(&rs, config.shapes, 0.5);
        match config.kernel {
            Kernel::Spherical => {
                for (xs, ls) in &shapes {
                    for &p in &config.lambda.values()? {
                        for &q in &config.x.values()? {
                            pts.push(GridPoint { k, s: None, t: None, lambda: scale(ls, p), x: scale(xs, q), y: vec![] });
                        }
                    }
                }
            }
            Kernel::Heat | Kernel::Newton => {
                let ts = if config.kernel == Kernel::Heat { config.t.values()? } else { vec![f64::NAN] };
                for (xs, ys) in &shapes {
                    for &t in &ts {
                        for &q in &config.x.values()? {
                            for &d in &config.offset.values()? {
                                let y: Vec<f64> = xs.iter().zip(ys).map(|(a, b)| q * (a + d * b)).collect();
                                let t = if t.is_nan() { None } else { Some(t) };
                                pts.push(GridPoint { k, s: None, t, lambda: vec![], x: scale(xs, q), y });
                            }
                        }
                    }
                }
            }
            Kernel::Stable => {
                for &s in &config.s {
                    for (xs, ys) in &shapes {
                        for &t in &config.t.values()? {
                            for &q in &config.x.values()? {
                                for &d in &config.offset.values()? {
                                    let y: Vec<f64> = xs.iter().zip(ys).map(|(a, b)| q * (a + d * b)).collect();
                                    pts.push(GridPoint { k, s: Some(s), t: Some(t), lambda: vec![], x: scale(xs, q), y });
                                }
                            }
                        }
                    }
                }
            }
            Kernel::Lemma(_) => return Err(Error::Config("lemma sweeps use their own grids".into())),
        }
    }
    if pts.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    Ok(pts)
}

fn column_names(config: &SweepConfig, rs: &RootSystemA) -> Vec<String> {
    let mut names = vec!["k".to_string()];
    let d = rs.coord_len();
    let coords = |p: &'static str| (1..=d).map(move |i| format!("{p}{i}"));
    match config.kernel {
        Kernel::Spherical => {
            names.extend(coords("lambda"));
            names.extend(coords("x"));
        }
        Kernel::Heat => {
            names.push("t".into());
            names.extend(coords("x"));
            names.extend(coords("y"));
        }
        Kernel::Newton => {
            names.extend(coords("x"));
            names.extend(coords("y"));
        }
        Kernel::Stable => {
            names.push("s".into());
            names.push("t".into());
            names.extend(coords("x"));
            names.extend(coords("y"));
        }
        Kernel::Lemma(_) => {}
    }
    names
}

/// Per-point evaluation cost in spherical-function quadrature nodes.
pub fn point_cost(config: &SweepConfig) -> f64 {
    let q = config.quad.apply(Execution::Sequential);
    let base = q.cost(config.n);
    match config.kernel {
        Kernel::Spherical | Kernel::Heat => base,
        Kernel::Newton => 400.0 * base,
        Kernel::Stable => 1000.0 * base,
        Kernel::Lemma(_) => 1e3,
    }
}

/// Refuse sweeps whose estimated cost exceeds the evaluation budget.
pub fn validate(config: &SweepConfig) -> Result<Vec<GridPoint>> {
    if !(config.threshold >= 1.0) {
        return Err(Error::Config("threshold must be >= 1".into()));
    }
    let pts = grid(config)?;
    check_budget(pts.len() as f64 * point_cost(config), default_budget())?;
    Ok(pts)
}

/// Exact value, ln envelope and ln of the scale variable at one point.
pub fn evaluate_point(
    config: &SweepConfig,
    rs: &RootSystemA,
    p: &GridPoint,
    quad: &SphericalQuad,
) -> Result<(KernelValue, f64, f64)> {
    let roots = rs.positive_roots();
    match config.kernel {
        Kernel::Spherical => {
            let mut sp = SphericalParams::new(rs, p.lambda.clone(), p.x.clone())?;
            sp.quad = quad.clone();
            let v = spherical_exact(&sp)?;
            let logs: Vec<f64> = roots
                .iter()
                .map(|&r| rs.pairing(r, &p.lambda) * rs.pairing(r, &p.x))
                .filter(|v| *v > 0.0)
                .map(f64::ln)
                .collect();
            let sc = if logs.is_empty() { 0.0 } else { logs.iter().sum::<f64>() / logs.len() as f64 };
            Ok((v, spherical_envelope(rs, &p.lambda, &p.x), sc))
        }
        Kernel::Heat => {
            let t = p.t.ok_or_else(|| Error::Config("heat kernel needs t".into()))?;
            let mut hp = HeatParams::new(rs, t, p.x.clone(), p.y.clone())?;
            hp.quad = quad.clone();
            let v = heat_exact(&hp)?;
            let xy = (dist_sq(&p.x, &vec![0.0; p.x.len()]) * dist_sq(&p.y, &vec![0.0; p.y.len()])).sqrt();
            Ok((v, heat_envelope(rs, t, &p.x, &p.y), t.ln() - xy.ln()))
        }
        Kernel::Newton => {
            let mut np = NewtonParams::new(rs, p.x.clone(), p.y.clone())?;
            np.quad = quad.clone();
            let v = newton_exact(&np)?;
            let env = match (rs.dim(), rs.rank()) {
                (d, _) if d >= 3 => newton_envelope_d3(rs, &p.x, &p.y)?,
                (2, 1) => newton_envelope_d2_a1(rs, &p.x, &p.y)?,
                (2, 2) => newton_envelope_d2_a2(rs, &p.x, &p.y)?,
                _ => return Err(Error::Precondition("no Newton envelope for this dimension".into())),
            };
            let m = roots.iter().map(|&r| rs.pairing(r, &p.x) * rs.pairing(r, &p.y)).fold(0.0, f64::max);
            Ok((v, env, m.ln() - dist_sq(&p.x, &p.y).ln()))
        }
        Kernel::Stable => {
            let (Some(s), Some(t)) = (p.s, p.t) else {
                return Err(Error::Config("stable kernel needs s and t".into()));
            };
            let mut sp = StableParams::new(rs, s, t, p.x.clone(), p.y.clone())?;
            sp.quad = quad.clone();
            let v = stable_exact(&sp)?;
            Ok((v, stable_envelope(rs, s, t, &p.x, &p.y), dist_sq(&p.x, &p.y).ln() - 2.0 / s * t.ln()))
        }
        Kernel::Lemma(_) => Err(Error::Config("lemma claims have no point evaluation".into())),
    }
}

// JSON has no non-finite numbers; they are written as null and read back as NaN
fn nan_or<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn nan_or_vec<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Ok(Vec::<Option<f64>>::deserialize(d)?.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(deserialize_with = "nan_or_vec")]
    pub inputs: Vec<f64>,
    #[serde(deserialize_with = "nan_or")]
    pub exact: f64,
    #[serde(deserialize_with = "nan_or")]
    pub envelope: f64,
    #[serde(deserialize_with = "nan_or")]
    pub ratio: f64,
    #[serde(deserialize_with = "nan_or")]
    pub err_indicator: f64,
    #[serde(deserialize_with = "nan_or")]
    pub ln_exact: f64,
    #[serde(deserialize_with = "nan_or")]
    pub ln_envelope: f64,
    #[serde(deserialize_with = "nan_or")]
    pub ln_scale: f64,
}

impl Row {
    fn from_logs(inputs: Vec<f64>, ln_exact: f64, ln_envelope: f64, err: f64, ln_scale: f64) -> Self {
        Self {
            inputs,
            exact: ln_exact.exp(),
            envelope: ln_envelope.exp(),
            ratio: (ln_exact - ln_envelope).exp(),
            err_indicator: err,
            ln_exact,
            ln_envelope,
            ln_scale,
        }
    }

    fn ln_ratio(&self) -> f64 {
        self.ln_exact - self.ln_envelope
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub k: f64,
    pub s: Option<f64>,
    pub count: usize,
    #[serde(deserialize_with = "nan_or")]
    pub min: f64,
    #[serde(deserialize_with = "nan_or")]
    pub max: f64,
    #[serde(deserialize_with = "nan_or")]
    pub spread: f64,
    /// Row indices (into the full report) of the extreme ratios.
    pub argmin: usize,
    pub argmax: usize,
    /// Least-squares slope of ln ratio against the scale variable.
    #[serde(deserialize_with = "nan_or")]
    pub slope: f64,
    pub threshold: f64,
    pub slope_limit: Option<f64>,
    /// Relative bracket change under rescaling (lemma sweeps).
    pub scale_change: Option<f64>,
    pub failures: usize,
    pub pass: bool,
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Statistics for the rows at `idx`.
pub fn ratio_report(
    rows: &[Row],
    idx: &[usize],
    k: f64,
    s: Option<f64>,
    threshold: f64,
    slope_limit: Option<f64>,
) -> RatioReport {
    let mut lo = (f64::INFINITY, 0usize);
    let mut hi = (f64::NEG_INFINITY, 0usize);
    let mut failures = 0;
    let mut pts = Vec::new();
    for &i in idx {
        let l = rows[i].ln_ratio();
        if !l.is_finite() {
            failures += 1;
            continue;
        }
        if l < lo.0 {
            lo = (l, i);
        }
        if l > hi.0 {
            hi = (l, i);
        }
        pts.push((rows[i].ln_scale, l));
    }
    let slope = least_squares_slope(&pts);
    let spread = (hi.0 - lo.0).exp();
    let mut pass = failures == 0 && !pts.is_empty() && spread <= threshold;
    if let Some(m) = slope_limit {
        pass &= slope.abs() < m;
    }
    RatioReport {
        k,
        s,
        count: idx.len(),
        min: lo.0.exp(),
        max: hi.0.exp(),
        spread,
        argmin: lo.1,
        argmax: hi.1,
        slope,
        threshold,
        slope_limit,
        scale_change: None,
        failures,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub config: SweepConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub groups: Vec<RatioReport>,
    /// Messages for points whose evaluation failed.
    pub errors: Vec<String>,
    pub pass: bool,
}

fn group_rows(columns: &[String], rows: &[Row]) -> Vec<(f64, Option<f64>, Vec<usize>)> {
    let kc = columns.iter().position(|c| c == "k").unwrap_or(0);
    let sc = columns.iter().position(|c| c == "s");
    let mut groups: Vec<(f64, Option<f64>, Vec<usize>)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let k = r.inputs[kc];
        let s = sc.map(|c| r.inputs[c]);
        match groups.iter_mut().find(|g| g.0.to_bits() == k.to_bits() && g.1.map(f64::to_bits) == s.map(f64::to_bits)) {
            Some(g) => g.2.push(i),
            None => groups.push((k, s, vec![i])),
        }
    }
    groups
}

fn summarize(config: &SweepConfig, columns: &[String], rows: &[Row]) -> Vec<RatioReport> {
    group_rows(columns, rows)
        .into_iter()
        .map(|(k, s, idx)| ratio_report(rows, &idx, k, s, config.threshold, config.slope_limit))
        .collect()
}

/// Run a sweep. Budget refusal happens before any evaluation.
pub fn certify(config: &SweepConfig) -> Result<CertifyReport> {
    if let Kernel::Lemma(id) = config.kernel {
        return certify_lemma(config, id);
    }
    let pts = validate(config)?;
    let exec = config.execution();
    let rs0 = config.root_system(config.k[0])?;
    let columns = column_names(config, &rs0);
    // points run in parallel; each kernel evaluation runs sequentially inside
    let quad = config.quad.apply(Execution::Sequential);
    let results = with_threads(config.threads, || {
        map_indexed(exec, pts.len(), |i| {
            let p = &pts[i];
            let rs = config.root_system(p.k)?;
            evaluate_point(config, &rs, p, &quad)
        })
    });
    let mut rows = Vec::with_capacity(pts.len());
    let mut errors = Vec::new();
    for (p, r) in pts.iter().zip(results) {
        match r {
            Ok((v, env, sc)) => {
                let ln_exact = if v.sign > 0.0 { v.ln_abs } else { f64::NAN };
                rows.push(Row::from_logs(p.inputs(), ln_exact, env, v.rel_error, sc));
            }
            Err(e) => {
                errors.push(format!("{:?}: {e}", p.inputs()));
                rows.push(Row::from_logs(p.inputs(), f64::NAN, f64::NAN, f64::NAN, f64::NAN));
            }
        }
    }
    let groups = summarize(config, &columns, &rows);
    let pass = groups.iter().all(|g| g.pass);
    Ok(CertifyReport { config: config.clone(), columns, rows, groups, errors, pass })
}

/// Scales used for the rescaling test of the lemma brackets.
pub const LEMMA_SCALES: [f64; 3] = [1e-3, 1.0, 1e3];
/// Admissible relative change of a bracket under rescaling.
pub const LEMMA_SCALE_TOL: f64 = 0.05;

/// The bracket for the incomplete-gamma ratio implied by its two limits.
pub fn lemma_a_bracket(k: f64) -> [f64; 2] {
    let (a, b) = (1.0 / k, ln_gamma(k).exp());
    [a.min(b) / 2.0, 2.0 * a.max(b)]
}

fn certify_lemma(config: &SweepConfig, id: ClaimId) -> Result<CertifyReport> {
    if config.k.is_empty() {
        return Err(Error::Config("no multiplicities given".into()));
    }
    let exec = config.execution();
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    let mut columns = vec!["k".to_string()];
    for &k in &config.k {
        let (claims, change) = match id {
            ClaimId::PropIn | ClaimId::PropTruncated => {
                let q = PropInQuad { execution: exec, ..Default::default() };
                (vec![prop_sweep(id, config.n, k, InnerFactor::Envelope, &q)?], None)
            }
            _ => {
                let cl: Vec<_> = with_threads(config.threads, || {
                    LEMMA_SCALES.iter().map(|&c| lemma_sweep(id, k, c, exec)).collect::<Result<Vec<_>>>()
                })?;
                let ch = cl[0].bracket_change(&cl[1]).max(cl[2].bracket_change(&cl[1]));
                (vec![cl[1].clone()], Some(ch))
            }
        };
        let main = &claims[0];
        if columns.len() == 1 {
            columns.extend(main.input_names.iter().cloned());
        }
        let start = rows.len();
        for p in &main.points {
            let mut inputs = vec![k];
            inputs.extend(&p.inputs);
            let ln_r = p.ratio.ln();
            rows.push(Row::from_logs(inputs, ln_r, 0.0, 0.0, 0.0));
        }
        let idx: Vec<usize> = (start..rows.len()).collect();
        let mut rep = ratio_report(&rows, &idx, k, None, config.threshold, None);
        rep.scale_change = change;
        if let Some(ch) = change {
            rep.pass &= ch <= LEMMA_SCALE_TOL;
        }
        if id == ClaimId::LemmaA {
            let b = lemma_a_bracket(k);
            rep.pass &= rep.min >= b[0] && rep.max <= b[1];
        }
        if id == ClaimId::PropTruncated {
            rep.pass &= rep.max <= 1.0 + 1e-9;
        }
        groups.push(rep);
    }
    let pass = groups.iter().all(|g| g.pass);
    Ok(CertifyReport { config: config.clone(), columns, rows, groups, errors: vec![], pass })
}

fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_else(|| "none".into())
}

const VALUE_COLUMNS: [&str; 7] = ["exact", "envelope", "ratio", "err_indicator", "ln_exact", "ln_envelope", "ln_scale"];

impl CertifyReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.columns.clone();
        header.extend(VALUE_COLUMNS.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.inputs.iter().map(|v| fmt17(*v)).collect();
            for v in [r.exact, r.envelope, r.ratio, r.err_indicator, r.ln_exact, r.ln_envelope, r.ln_scale] {
                rec.push(fmt17(v));
            }
            w.write_record(&rec)?;
        }
        let mut out = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .map_err(|e| Error::Config(e.to_string()))?;
        let cfg = serde_json::to_string(&self.config)?;
        writeln!(out, "# config {cfg}").unwrap();
        for g in &self.groups {
            writeln!(
                out,
                "# group k={} s={} count={} min={} max={} spread={} slope={} threshold={} scale_change={} failures={} pass={}",
                fmt17(g.k),
                fmt_opt(g.s),
                g.count,
                fmt17(g.min),
                fmt17(g.max),
                fmt17(g.spread),
                fmt17(g.slope),
                fmt17(g.threshold),
                fmt_opt(g.scale_change),
                g.failures,
                if g.pass { "PASS" } else { "FAIL" }
            )
            .unwrap();
            for (tag, i) in [("argmin", g.argmin), ("argmax", g.argmax)] {
                let inputs: Vec<String> =
                    self.columns.iter().zip(&self.rows[i].inputs).map(|(c, v)| format!("{c}={}", fmt17(*v))).collect();
                writeln!(out, "#   {tag} row={i} {}", inputs.join(" ")).unwrap();
            }
        }
        for e in &self.errors {
            writeln!(out, "# error {e}").unwrap();
        }
        writeln!(out, "# result {}", if self.pass { "PASS" } else { "FAIL" }).unwrap();
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        // non-finite values are not representable in JSON; they appear as null
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let text = match format {
            OutputFormat::Csv => self.to_csv()?,
            OutputFormat::Json => self.to_json()?,
        };
        let mut f = std::fs::File::create(path)?;
        f.write_all(text.as_bytes())?;
        Ok(())
    }

    /// Re-read a CSV report and recompute its statistics from the rows.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut config: Option<SweepConfig> = None;
        let mut scale_changes = Vec::new();
        let mut errors = Vec::new();
        let mut body = String::new();
        for line in std::io::Cursor::new(text).lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix("# config ") {
                config = Some(serde_json::from_str(rest)?);
            } else if let Some(rest) = line.strip_prefix("# group ") {
                let sc = rest
                    .split(' ')
                    .find_map(|kv| kv.strip_prefix("scale_change="))
                    .ok_or_else(|| Error::Config("malformed group line".into()))?;
                scale_changes.push(if sc == "none" { None } else { Some(parse_f64(sc)?) });
            } else if let Some(rest) = line.strip_prefix("# error ") {
                errors.push(rest.to_string());
            } else if !line.starts_with('#') {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let config = config.ok_or_else(|| Error::Config("report lacks its config line".into()))?;
        let mut rd = csv::Reader::from_reader(body.as_bytes());
        let header: Vec<String> = rd.headers()?.iter().map(|s| s.to_string()).collect();
        let nin = header.len() - VALUE_COLUMNS.len();
        let columns = header[..nin].to_vec();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec.iter().map(parse_f64).collect::<Result<_>>()?;
            let v = &vals[nin..];
            rows.push(Row {
                inputs: vals[..nin].to_vec(),
                exact: v[0],
                envelope: v[1],
                ratio: v[2],
                err_indicator: v[3],
                ln_exact: v[4],
                ln_envelope: v[5],
                ln_scale: v[6],
            });
        }
        Ok(Self::rebuild(config, columns, rows, scale_changes, errors))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: CertifyReport = serde_json::from_str(text)?;
        let scale_changes = v.groups.iter().map(|g| g.scale_change).collect();
        Ok(Self::rebuild(v.config, v.columns, v.rows, scale_changes, v.errors))
    }

    fn rebuild(config: SweepConfig, columns: Vec<String>, rows: Vec<Row>, scale_changes: Vec<Option<f64>>, errors: Vec<String>) -> Self {
        let mut groups = summarize(&config, &columns, &rows);
        let lemma = matches!(config.kernel, Kernel::Lemma(_));
        for (g, sc) in groups.iter_mut().zip(scale_changes) {
            if lemma {
                g.slope_limit = None;
                g.pass = g.failures == 0 && g.spread <= g.threshold;
                if let Kernel::Lemma(id) = config.kernel {
                    g.scale_change = sc;
                    if let Some(ch) = sc {
                        g.pass &= ch <= LEMMA_SCALE_TOL;
                    }
                    if id == ClaimId::LemmaA {
                        let b = lemma_a_bracket(g.k);
                        g.pass &= g.min >= b[0] && g.max <= b[1];
                    }
                    if id == ClaimId::PropTruncated {
                        g.pass &= g.max <= 1.0 + 1e-9;
                    }
                }
            }
        }
        let pass = groups.iter().all(|g| g.pass);
        Self { config, columns, rows, groups, errors, pass }
    }

    /// One line per group plus the overall verdict.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for g in &self.groups {
            let sv = g.s.map(|v| format!(" s={v}")).unwrap_or_default();
            writeln!(
                s,
                "{} n={} k={}{sv}: {} points, ratio in [{:.6e}, {:.6e}], spread {:.4e} (limit {:.1e}), slope {:+.4} {}",
                self.config.kernel.name(),
                self.config.n,
                g.k,
                g.count,
                g.min,
                g.max,
                g.spread,
                g.threshold,
                g.slope,
                if g.pass { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        write!(s, "{}", if self.pass { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Config(format!("not a number: {s}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(Range::single(2.0).values().unwrap(), vec![2.0]);
        let v = Range::log(1e-2, 1e2, 5).values().unwrap();
        assert!((v[2] - 1.0).abs() < 1e-15 && (v[4] - 100.0).abs() < 1e-12);
        assert!(Range { lo: 0.0, hi: 1.0, count: 0, log: false }.values().is_err());
    }

    #[test]
    fn kernel_names_round_trip() {
        for k in [Kernel::Heat, Kernel::Stable, Kernel::Lemma(ClaimId::LemmaA1)] {
            assert_eq!(Kernel::parse(&k.name()).unwrap(), k);
        }
    }

    #[test]
    fn directions_lie_in_chamber() {
        for n in 1..=3 {
            let rs = RootSystemA::trace_zero(n, 1.0).unwrap();
            for (x, y) in shape_pairs(&rs, 4, 0.5) {
                assert!(rs.in_open_chamber(&x) && rs.in_open_chamber(&y));
                assert!(x.iter().sum::<f64>().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slope_of_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 0.5 * i as f64 + 2.0)).collect();
        assert!((least_squares_slope(&pts) - 0.5).abs() < 1e-15);
    }
}
