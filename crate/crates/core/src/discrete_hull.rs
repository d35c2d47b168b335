//! Linear inequalities for the epigraph of g_α over the hypercube.
//!
//! With the active weights sorted ascending, `n` sorted facets describe the
//! convex hull. [`greedy_primal`] and [`dual_certificate`] build matching
//! primal and dual solutions of the hull LP for a given `x`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::core_types::Partition;
use crate::error::{input, Error, Result};
use crate::set_function::{eval_g, increment_rho, AlphaVector, GValue};

/// `t >= constant + coeff_x · x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearIneq {
    pub coeff_x: Vec<f64>,
    pub constant: f64,
}

impl LinearIneq {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeff_x.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

/// Positive weights of a convex combination of hypercube vertices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaWeights {
    pub entries: BTreeMap<Vec<usize>, f64>,
}

impl LambdaWeights {
    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Σ_{S∋i} λ_S for every i.
    pub fn coverage(&self, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (s, w) in &self.entries {
            for &i in s {
                c[i] += w;
            }
        }
        c
    }

    pub fn get(&self, s: &[usize]) -> f64 {
        self.entries.get(s).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub mu: Vec<f64>,
    pub gamma: f64,
}

impl DualCertificate {
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.gamma + self.mu.iter().zip(x).map(|(m, v)| m * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub cs_violations: Vec<Vec<usize>>,
}

impl DualityReport {
    pub fn ok(&self) -> bool {
        (self.primal_obj - self.dual_obj).abs() <= 1e-8 && self.cs_violations.is_empty()
    }
}

pub fn supermodular_ineq(s: &[usize], alpha: &AlphaVector, variant: u8, p: &Partition) -> Result<LinearIneq> {
    let n = p.n();
    let mut in_s = vec![false; n];
    for &i in s {
        if i >= n {
            return input(format!("index {i} out of range"));
        }
        in_s[i] = true;
    }
    let g_s = match eval_g(alpha, s, p)? {
        GValue::Finite(v) => v,
        GValue::NegInfinity => return Err(Error::Region("g is unbounded on S".into())),
    };
    let without = |i: usize, base: &[usize]| -> Vec<usize> { base.iter().copied().filter(|&k| k != i).collect() };
    let all: Vec<usize> = (0..n).collect();
    let mut coeff = vec![0.0; n];
    let mut constant = g_s;
    for i in 0..n {
        match (variant, in_s[i]) {
            (1, false) => coeff[i] = increment_rho(alpha, i, s, p)?,
            (1, true) => {
                let r = increment_rho(alpha, i, &without(i, &all), p)?;
                coeff[i] = r;
                constant -= r;
            }
            (2, false) => coeff[i] = increment_rho(alpha, i, &[], p)?,
            (2, true) => {
                let r = increment_rho(alpha, i, &without(i, s), p)?;
                coeff[i] = r;
                constant -= r;
            }
            _ => return input(format!("variant must be 1 or 2, got {variant}")),
        }
    }
    Ok(LinearIneq { coeff_x: coeff, constant })
}

/// Ascending order of the weights, ties by index.
pub fn ascending_order(w: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..w.len()).collect();
    perm.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
    perm
}

pub fn sorted_facets(alpha: &AlphaVector, p: &Partition) -> Result<Vec<LinearIneq>> {
    let w = alpha.weights(p)?;
    Ok(facets_from_weights(&w))
}

/// The `n` sorted facets for a nonnegative weight vector.
pub fn facets_from_weights(w: &[f64]) -> Vec<LinearIneq> {
    let n = w.len();
    let perm = ascending_order(w);
    let sq: Vec<f64> = perm.iter().map(|&i| w[i] * w[i]).collect();
    (0..n)
        .map(|l| {
            let base = if l == 0 { 0.0 } else { sq[l - 1] };
            let mut coeff = vec![0.0; n];
            for k in l..n {
                coeff[perm[k]] = -(sq[k] - base) / 4.0;
            }
            LinearIneq { coeff_x: coeff, constant: -base / 4.0 }
        })
        .collect()
}

/// Largest sorted-facet value at `x`, which is the convex envelope of g.
pub fn facet_value(x: &[f64], w: &[f64]) -> f64 {
    facets_from_weights(w).iter().map(|f| f.eval(x)).fold(f64::NEG_INFINITY, f64::max)
}

fn check_inputs(x: &[f64], w: &[f64]) -> Result<()> {
    if x.len() != w.len() {
        return input("x and alpha lengths differ");
    }
    if let Some(i) = x.iter().position(|&v| !(0.0..=1.0).contains(&v)) {
        return input(format!("x[{i}]={} outside [0,1]", x[i]));
    }
    if let Some(i) = w.iter().position(|&v| v < 0.0 || v.is_nan()) {
        return input(format!("alpha[{i}]={} must be nonnegative", w[i]));
    }
    Ok(())
}

/// Sorted order and split point ℓ (1-based, 0 when Σx ≤ 1).
fn split(x: &[f64], w: &[f64]) -> (Vec<usize>, usize, Vec<f64>) {
    let n = x.len();
    let perm = ascending_order(w);
    // suffix[k] = Σ_{i>k} x_(i) over 1-based sorted positions
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + x[perm[k]];
    }
    let l = (0..=n).find(|&k| suffix[k] <= 1.0).unwrap_or(n);
    (perm, l, suffix)
}

const ZERO: f64 = 1e-14;

/// Optimal primal weights of the hull LP, built by two allocation sweeps.
pub fn greedy_primal(x: &[f64], alpha: &[f64]) -> Result<LambdaWeights> {
    check_inputs(x, alpha)?;
    let n = x.len();
    let (perm, l, suffix) = split(x, alpha);
    // 1-based sorted positions; slot 0 unused
    let mut xh = vec![0.0; n + 1];
    for k in 1..=n {
        xh[k] = x[perm[k - 1]];
    }
    if l > 0 {
        xh[l] -= 1.0 - suffix[l];
    }
    let mut out = LambdaWeights::default();
    let mut total = 0.0;
    let mut allocate = |xh: &mut [f64], s: Vec<usize>| {
        let v = s.iter().map(|&k| xh[k]).fold(f64::INFINITY, f64::min);
        for &k in &s {
            xh[k] -= v;
        }
        let mut key: Vec<usize> = s.iter().map(|&k| perm[k - 1]).collect();
        key.sort_unstable();
        *out.entries.entry(key).or_insert(0.0) += v;
        total += v;
    };
    for j in (l + 1..=n).rev() {
        while xh[j] > ZERO {
            let mut s: Vec<usize> = (1..=l).filter(|&k| xh[k] > ZERO).collect();
            s.push(j);
            allocate(&mut xh, s);
        }
    }
    if l == 0 {
        let rest = 1.0 - total;
        if rest > ZERO {
            out.entries.insert(Vec::new(), rest);
        }
    } else {
        xh[l] = 1.0 - suffix[l];
        while xh[l] > ZERO {
            let mut s: Vec<usize> = (1..l).filter(|&k| xh[k] > ZERO).collect();
            s.push(l);
            allocate(&mut xh, s);
        }
    }
    Ok(out)
}

pub fn dual_certificate(x: &[f64], alpha: &[f64]) -> Result<DualCertificate> {
    check_inputs(x, alpha)?;
    let (perm, l, _) = split(x, alpha);
    let wl = if l == 0 { 0.0 } else { alpha[perm[l - 1]] };
    let mut mu = vec![0.0; x.len()];
    for &i in &perm[l..] {
        mu[i] = -(alpha[i] * alpha[i] - wl * wl) / 4.0;
    }
    Ok(DualCertificate { mu, gamma: -wl * wl / 4.0 })
}

/// Split point ℓ used by the sweeps, 1-based in the sorted order.
pub fn split_index(x: &[f64], alpha: &[f64]) -> Result<usize> {
    check_inputs(x, alpha)?;
    Ok(split(x, alpha).1)
}

fn g_weights(w: &[f64], s: &[usize]) -> f64 {
    let m = s.iter().map(|&i| w[i]).fold(0.0, f64::max);
    -m * m / 4.0
}

pub fn verify_strong_duality(x: &[f64], alpha: &[f64]) -> Result<DualityReport> {
    let lam = greedy_primal(x, alpha)?;
    let cert = dual_certificate(x, alpha)?;
    let primal_obj = lam.entries.iter().map(|(s, w)| w * g_weights(alpha, s)).sum();
    let dual_obj = cert.objective(x);
    let cs_violations = lam
        .entries
        .keys()
        .filter(|s| {
            let lhs = cert.gamma + s.iter().map(|&i| cert.mu[i]).sum::<f64>();
            (lhs - g_weights(alpha, s)).abs() > 1e-8
        })
        .cloned()
        .collect();
    Ok(DualityReport { primal_obj, dual_obj, cs_violations })
}

/// Minimizes β'x + g_α(x) over binary x in one pass.
pub fn min_linear_over_x(alpha: &[f64], beta: &[f64], p: &Partition) -> Result<(f64, Vec<u8>)> {
    let n = p.n();
    if alpha.len() != n || beta.len() != n {
        return input("alpha/beta length does not match partition");
    }
    let w = AlphaVector::new(alpha.to_vec(), p)?.weights(p)?;
    let mut x: Vec<u8> = beta.iter().map(|&b| u8::from(b < 0.0)).collect();
    let base: f64 = beta.iter().filter(|&&b| b < 0.0).sum();
    let mut best = base;
    let mut pick = None;
    for j in 0..n {
        let v = base + beta[j].max(0.0) - w[j] * w[j] / 4.0;
        if v < best {
            best = v;
            pick = Some(j);
        }
    }
    if let Some(j) = pick {
        x[j] = 1;
    }
    Ok((best, x))
}
