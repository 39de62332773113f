//! Gauss rules from three-term recurrences (Golub-Welsch).

use crate::error::{Error, Result};
use crate::special::{ln_beta, ln_gamma};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Nodes and weights of a Gauss rule. Weights may be normalized to unit mass,
/// in which case `ln_mass` carries the total.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub ln_mass: f64,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// sum w_i f(x_i) scaled back to the full mass.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum();
        s * self.ln_mass.exp()
    }
}

/// Eigenvalues and squared first eigenvector components of the symmetric
/// tridiagonal matrix with diagonal `diag` and off-diagonal `off` (len n - 1).
/// Implicit QL with Wilkinson-type shifts, tracking only the first row.
pub fn tridiagonal_gauss(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidNodeCount(0));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonFinite("tridiagonal eigensolver did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let fz = z[i + 1];
                z[i + 1] = s * z[i] + c * fz;
                z[i] = c * z[i] - s * fz;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let nodes = idx.iter().map(|&i| d[i]).collect();
    let w = idx.iter().map(|&i| z[i] * z[i]).collect();
    Ok((nodes, w))
}

fn check_exp(a: f64) -> Result<()> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::InvalidExponent(a));
    }
    Ok(())
}

/// Gauss rule on [0, 1] for the weight s^left (1 - s)^right, weights normalized.
pub fn jacobi_unit(q: usize, left: f64, right: f64) -> Result<Rule> {
    check_exp(left)?;
    check_exp(right)?;
    if q == 0 {
        return Err(Error::InvalidNodeCount(q));
    }
    // On [-1, 1] with (1 - x)^a (1 + x)^b, s = (1 + x) / 2.
    let (a, b) = (right, left);
    let ab = a + b;
    let mut diag = Vec::with_capacity(q);
    let mut off = Vec::with_capacity(q.saturating_sub(1));
    for j in 0..q {
        let jf = j as f64;
        let alpha = if j == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
        diag.push(alpha);
    }
    for j in 1..q {
        let jf = j as f64;
        let beta = if j == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            let t = 2.0 * jf + ab;
            4.0 * jf * (jf + a) * (jf + b) * (jf + ab) / (t * t * (t + 1.0) * (t - 1.0))
        };
        off.push(beta.sqrt());
    }
    let (x, w) = tridiagonal_gauss(&diag, &off)?;
    let nodes = x.iter().map(|&xi| 0.5 * (1.0 + xi)).collect();
    Ok(Rule { nodes, weights: w, ln_mass: ln_beta(left + 1.0, right + 1.0) })
}

/// Gauss-Legendre on [0, 1].
pub fn legendre_unit(q: usize) -> Result<Rule> {
    jacobi_unit(q, 0.0, 0.0)
}

/// Generalized Gauss-Laguerre for u^a e^{-u} on [0, inf).
pub fn laguerre(q: usize, a: f64) -> Result<Rule> {
    check_exp(a)?;
    if q == 0 {
        return Err(Error::InvalidNodeCount(q));
    }
    let diag: Vec<f64> = (0..q).map(|j| 2.0 * j as f64 + a + 1.0).collect();
    let off: Vec<f64> = (1..q).map(|j| (j as f64 * (j as f64 + a)).sqrt()).collect();
    let (x, w) = tridiagonal_gauss(&diag, &off)?;
    Ok(Rule { nodes: x, weights: w, ln_mass: ln_gamma(a + 1.0) })
}

/// Gauss rule for a discrete measure (points, nonnegative weights) via the
/// Stieltjes procedure in orthonormal form.
pub fn from_discrete_measure(points: &[f64], weights: &[f64], q: usize) -> Result<Rule> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NonFinite("discrete measure has no mass".into()));
    }
    let support = weights.iter().filter(|&&w| w > 0.0).count();
    let q = q.min(support / 2).max(1);
    let w: Vec<f64> = weights.iter().map(|v| v / total).collect();
    let m = points.len();
    let mut p_prev = vec![0.0; m];
    let mut p_cur = vec![1.0; m];
    let mut diag = Vec::with_capacity(q);
    let mut off = Vec::with_capacity(q);
    let mut b_cur = 0.0;
    for j in 0..q {
        let alpha: f64 = (0..m).map(|i| w[i] * points[i] * p_cur[i] * p_cur[i]).sum();
        diag.push(alpha);
        if j + 1 == q {
            break;
        }
        let mut next = vec![0.0; m];
        for i in 0..m {
            next[i] = (points[i] - alpha) * p_cur[i] - b_cur * p_prev[i];
        }
        let norm: f64 = (0..m).map(|i| w[i] * next[i] * next[i]).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            break;
        }
        for v in next.iter_mut() {
            *v /= norm;
        }
        off.push(norm);
        b_cur = norm;
        p_prev = std::mem::replace(&mut p_cur, next);
    }
    let q = diag.len().min(off.len() + 1);
    let (x, wq) = tridiagonal_gauss(&diag[..q], &off[..q.saturating_sub(1)])?;
    Ok(Rule { nodes: x, weights: wq, ln_mass: total.ln() })
}

type Key = (usize, u64, u64);

fn cache() -> &'static RwLock<HashMap<Key, Arc<Rule>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized [`jacobi_unit`].
pub fn jacobi_unit_cached(q: usize, left: f64, right: f64) -> Result<Arc<Rule>> {
    let key = (q, left.to_bits(), right.to_bits());
    if let Some(r) = cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(r.clone());
    }
    let r = Arc::new(jacobi_unit(q, left, right)?);
    cache().write().expect("rule cache poisoned").insert(key, r.clone());
    Ok(r)
}
