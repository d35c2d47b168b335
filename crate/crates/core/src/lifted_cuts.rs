//! Closed-form lifted inequalities for rank-one sets and their separation.

use serde::{Deserialize, Serialize};

use crate::conic_ir::{ConicModel, Sense};
use crate::core_types::{safe_ratio, set_of, FractionalPoint, Partition, TOL};
use crate::error::{input, Error, Result};
use crate::relaxation_solver::{solve_relaxation, Status};

/// Which side plays the role of N⁺ in the cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// A lifted cut given by a split `(L, R, U)` of the signed side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LiftedCut {
    pub sign: Sign,
    pub l: Vec<usize>,
    pub r: Vec<usize>,
    pub u: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub cut: Option<LiftedCut>,
    pub rhs_value: f64,
    pub violated: bool,
    pub base_only: bool,
}

/// Signed side and opposite side for a cut sign.
pub fn sides(p: &Partition, sign: Sign) -> (&[usize], &[usize]) {
    match sign {
        Sign::Plus => (p.plus(), p.minus()),
        Sign::Minus => (p.minus(), p.plus()),
    }
}

fn sum(v: &[f64], s: &[usize]) -> f64 {
    s.iter().map(|&i| v[i]).sum()
}

/// `(y(N⁺) − y(N⁻))²`.
pub fn base_value(y: &[f64], p: &Partition) -> f64 {
    let d = sum(y, p.plus()) - sum(y, p.minus());
    d * d
}

pub fn eval_lifted_rhs(x: &[f64], y: &[f64], cut: &LiftedCut, p: &Partition) -> f64 {
    let (_, q) = sides(p, cut.sign);
    let y_l = sum(y, &cut.l);
    let den_l = (1.0 - sum(x, &cut.r) - sum(x, &cut.u)).max(0.0);
    let mut v = safe_ratio(y_l * y_l, den_l);
    for &i in &cut.r {
        v += safe_ratio(y[i] * y[i], x[i]);
    }
    let num_u = sum(y, &cut.u) - sum(y, q);
    v + safe_ratio(num_u * num_u, sum(x, &cut.u))
}

/// `a < b` by more than the tolerance.
fn lt(a: f64, b: f64) -> bool {
    if a == f64::INFINITY {
        return false;
    }
    if b == f64::INFINITY {
        return true;
    }
    a < b - TOL * a.abs().max(b.abs()).max(1.0)
}

/// `a >= b` up to the tolerance.
fn ge(a: f64, b: f64) -> bool {
    if a == f64::INFINITY {
        return true;
    }
    if b == f64::INFINITY {
        return false;
    }
    a >= b - TOL * a.abs().max(b.abs()).max(1.0)
}

/// Indices of `side` sorted by `y_i/x_i` ascending, with the ratios.
fn ratio_order(x: &[f64], y: &[f64], side: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let mut ord = side.to_vec();
    let ratio = |i: usize| safe_ratio(y[i], x[i]);
    ord.sort_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(a.cmp(&b)));
    let r = ord.iter().map(|&i| ratio(i)).collect();
    (ord, r)
}

fn prefix(v: &[f64], ord: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ord.len() + 1);
    out.push(0.0);
    for &i in ord {
        out.push(out.last().unwrap() + v[i]);
    }
    out
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Prefix length of the ratio order on `side` that defines L for X₊.
fn positive_prefix(x: &[f64], y: &[f64], side: &[usize]) -> (Vec<usize>, usize) {
    let (ord, ratio) = ratio_order(x, y, side);
    let m = ord.len();
    let px = prefix(x, &ord);
    let py = prefix(y, &ord);
    let head = |l: usize| {
        let den = 1.0 - (px[m] - px[l]);
        (den, safe_ratio(py[l], den.max(0.0)))
    };
    let valid = |l: usize| {
        let (den, r) = head(l);
        den >= -TOL && (l == m || lt(r, ratio[l]))
    };
    for l in (0..=m).rev() {
        if valid(l) && (l == 0 || ge(head(l).1, ratio[l - 1])) {
            return (ord, l);
        }
    }
    // Only reachable through rounding at a boundary.
    let value = |l: usize| {
        let (den, _) = head(l);
        let tail: f64 = ord[l..].iter().map(|&i| safe_ratio(y[i] * y[i], x[i])).sum();
        safe_ratio(py[l] * py[l], den.max(0.0)) + tail
    };
    let best = (0..=m).filter(|&l| valid(l)).max_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
    (ord, best.unwrap_or(m))
}

/// The set L of the closed form for X₊ (every index positive).
pub fn find_l_positive(x: &[f64], y: &[f64]) -> Vec<usize> {
    let all: Vec<usize> = (0..x.len()).collect();
    let (ord, l) = positive_prefix(x, y, &all);
    sorted(ord[..l].to_vec())
}

/// The sets `(L, U)` and sign of the closed form for X, if they exist.
pub fn find_l_u_general(x: &[f64], y: &[f64], p: &Partition) -> Option<(Vec<usize>, Vec<usize>, Sign)> {
    let sign = if p.plus().is_empty() {
        Sign::Minus
    } else if p.minus().is_empty() || sum(y, p.plus()) >= sum(y, p.minus()) {
        Sign::Plus
    } else {
        Sign::Minus
    };
    let (side, opp) = sides(p, sign);
    if opp.is_empty() {
        let (ord, l) = positive_prefix(x, y, side);
        return Some((sorted(ord[..l].to_vec()), Vec::new(), sign));
    }
    let (ord, ratio) = ratio_order(x, y, side);
    let m = ord.len();
    let px = prefix(x, &ord);
    let py = prefix(y, &ord);
    let y_opp = sum(y, opp);
    for l in 0..m {
        let den = 1.0 - (px[m] - px[l]);
        if den < -TOL {
            continue;
        }
        let r_l = safe_ratio(py[l], den.max(0.0));
        if !lt(r_l, ratio[l]) || (l > 0 && !ge(r_l, ratio[l - 1])) {
            continue;
        }
        for u in l..m {
            let num = py[m] - py[u] - y_opp;
            if num < -TOL {
                continue;
            }
            let r_u = safe_ratio(num.max(0.0), px[m] - px[u]);
            if u > 0 && !lt(ratio[u - 1], r_u) {
                continue;
            }
            if !ge(ratio[u], r_u) || !lt(r_l, r_u) {
                continue;
            }
            return Some((sorted(ord[..l].to_vec()), sorted(ord[u..].to_vec()), sign));
        }
    }
    None
}

/// Build the full cut from `(L, U)` by putting the rest of the signed side in R.
pub fn complete_cut(l: Vec<usize>, u: Vec<usize>, sign: Sign, p: &Partition) -> LiftedCut {
    let (side, _) = sides(p, sign);
    let mut taken = vec![false; p.n()];
    for &i in l.iter().chain(&u) {
        taken[i] = true;
    }
    let r = side.iter().copied().filter(|&i| !taken[i]).collect();
    LiftedCut { sign, l, r, u }
}

/// Violation threshold: absolute below 1e-3, relative above.
pub fn violation_threshold(t: f64) -> f64 {
    const EPS: f64 = 1e-3;
    if t.abs() < EPS {
        EPS
    } else {
        EPS * t.abs()
    }
}

pub fn separate(point: &FractionalPoint, p: &Partition) -> SeparationResult {
    let (x, y) = (&point.x, &point.y);
    let base = base_value(y, p);
    let mut out = SeparationResult { cut: None, rhs_value: base, violated: false, base_only: true };
    if let Some((l, u, sign)) = find_l_u_general(x, y, p) {
        let cut = complete_cut(l, u, sign, p);
        let v = eval_lifted_rhs(x, y, &cut, p);
        if v > base + 1e-12 * base.max(1.0) {
            out = SeparationResult { cut: Some(cut), rhs_value: v, violated: false, base_only: false };
        }
    }
    out.violated = out.rhs_value > point.t + violation_threshold(point.t);
    out
}

/// Hull value of the relaxation where the variables y are free in sign.
pub fn xf_hull_value(x: &[f64], y: &[f64], p: &Partition) -> f64 {
    let s = sum(y, p.plus()) - sum(y, p.minus());
    let xs: f64 = x.iter().sum();
    safe_ratio(s * s, xs.min(1.0))
}

/// Lifting value for one sign, maximized jointly over α and the hull dual.
///
/// Solves max α'y + μ'x + γ over α in the signed region, subject to
/// μ(S) + γ <= −α_i²/4 for every S in the signed side and i in S.
fn lifting_max(x: &[f64], y: &[f64], side: &[usize], opp: &[usize], tol: f64) -> Result<f64> {
    let m = side.len();
    let mut model = ConicModel::new();
    let one = model.one();
    let alpha: Vec<usize> = side.iter().map(|&i| model.add_var(format!("a{i}"), 0.0, f64::INFINITY)).collect();
    let beta: Vec<usize> = opp.iter().map(|&j| model.add_var(format!("a{j}"), f64::NEG_INFINITY, 0.0)).collect();
    let mu: Vec<usize> =
        side.iter().map(|&i| model.add_var(format!("mu{i}"), f64::NEG_INFINITY, f64::INFINITY)).collect();
    let gamma = model.add_var("gamma", f64::NEG_INFINITY, f64::INFINITY);
    for &a in &alpha {
        for &b in &beta {
            model.add_row(vec![(a, 1.0), (b, 1.0)], Sense::Le, 0.0);
        }
    }
    // sq_i >= α_i², then 4μ(S) + 4γ + sq_i <= 0 for i in S
    let sq: Vec<usize> = (0..m).map(|k| model.add_var(format!("sq{k}"), 0.0, f64::INFINITY)).collect();
    for k in 0..m {
        model.add_rsoc(sq[k], one, vec![alpha[k]]);
    }
    for mask in 0u64..1 << m {
        let s = set_of(mask, m);
        let mut terms: Vec<(usize, f64)> = s.iter().map(|&k| (mu[k], 4.0)).collect();
        terms.push((gamma, 4.0));
        if s.is_empty() {
            model.add_row(terms.clone(), Sense::Le, 0.0);
        }
        for &k in &s {
            let mut row = terms.clone();
            row.push((sq[k], 1.0));
            model.add_row(row, Sense::Le, 0.0);
        }
    }
    let mut obj = Vec::new();
    for (k, &i) in side.iter().enumerate() {
        obj.push((alpha[k], -y[i]));
        obj.push((mu[k], -x[i]));
    }
    for (k, &j) in opp.iter().enumerate() {
        obj.push((beta[k], -y[j]));
    }
    obj.push((gamma, -1.0));
    model.objective = obj;
    let res = solve_relaxation(&model, tol)?;
    match res.status {
        Status::Optimal => Ok(-res.objective),
        Status::Unbounded => Ok(f64::INFINITY),
        s => Err(Error::Oracle(format!("lifting problem ended with {s:?}"))),
    }
}

/// Hull value from the lifting problem, independent of the closed form.
pub fn hull_value_oracle(x: &[f64], y: &[f64], p: &Partition, tol: f64) -> Result<f64> {
    let n = p.n();
    if x.len() != n || y.len() != n {
        return input("point length does not match partition");
    }
    if n > 8 {
        return Err(Error::Capacity(format!("oracle needs n <= 8, got {n}")));
    }
    let mut best = base_value(y, p);
    let signs: &[Sign] = if p.minus().is_empty() {
        &[Sign::Plus]
    } else if p.plus().is_empty() {
        &[Sign::Minus]
    } else {
        &[Sign::Plus, Sign::Minus]
    };
    for &sign in signs {
        let (side, opp) = sides(p, sign);
        best = best.max(lifting_max(x, y, side, opp, tol)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(x1: f64, y1: f64) -> (Vec<f64>, Vec<f64>) {
        (vec![x1, 0.6, 0.3], vec![y1, 0.5, 0.2])
    }

    #[test]
    fn example_sets() {
        let (x, y) = example(0.01, 1.0);
        assert_eq!(find_l_positive(&x, &y), Vec::<usize>::new());
        let (x, y) = example(0.1, 0.5);
        assert_eq!(find_l_positive(&x, &y), vec![2]);
        let (x, y) = example(0.4, 0.1);
        assert_eq!(find_l_positive(&x, &y), vec![0, 2]);
        let (x, y) = example(0.5, 0.2);
        assert_eq!(find_l_positive(&x, &y), vec![0, 1, 2]);
    }

    #[test]
    fn example_values() {
        let p = Partition::positive(3);
        for ((x1, y1), hull, xf) in [
            ((0.01, 1.0), 100.55, 3.18),
            ((0.1, 0.5), 3.05, 1.44),
            ((0.4, 0.1), 0.642, 0.640),
            ((0.5, 0.2), 0.81, 0.81),
        ] {
            let (x, y) = example(x1, y1);
            let r = separate(&FractionalPoint { x: x.clone(), y: y.clone(), t: 0.0 }, &p);
            assert!((r.rhs_value - hull).abs() < 0.005, "{x1}: {}", r.rhs_value);
            assert!((xf_hull_value(&x, &y, &p) - xf).abs() < 0.005);
        }
    }

    #[test]
    fn explicit_rhs() {
        let p = Partition::positive(3);
        let (x, y) = example(0.01, 1.0);
        let cut = LiftedCut { sign: Sign::Plus, l: vec![], r: vec![0, 1, 2], u: vec![] };
        assert!((eval_lifted_rhs(&x, &y, &cut, &p) - 100.55).abs() < 0.005);
        let (x, y) = example(0.4, 0.1);
        let cut = LiftedCut { sign: Sign::Plus, l: vec![0, 2], r: vec![1], u: vec![] };
        assert!((eval_lifted_rhs(&x, &y, &cut, &p) - 0.642).abs() < 0.001);
        assert_eq!(eval_lifted_rhs(&x, &[0.0; 3], &cut, &p), 0.0);
    }

    #[test]
    fn separation_flags() {
        let p = Partition::positive(3);
        let (x, y) = example(0.01, 1.0);
        let r = separate(&FractionalPoint { x, y, t: 3.18 }, &p);
        assert!(r.violated && !r.base_only);
        let (x, y) = example(0.4, 0.1);
        let r = separate(&FractionalPoint { x, y, t: 0.640 }, &p);
        assert!(r.violated);
        let r = separate(&FractionalPoint { x: vec![1.0, 0.0, 1.0], y: vec![0.3, 0.0, 0.4], t: 0.49 }, &p);
        assert!(!r.violated);
    }

    #[test]
    fn two_variable_case() {
        let p = Partition::new(2, vec![0], vec![1]).unwrap();
        let (x, y) = ([0.5, 0.5], [1.0, 0.0]);
        let (l, u, s) = find_l_u_general(&x, &y, &p).unwrap();
        assert_eq!((l.as_slice(), u.as_slice(), s), (&[][..], &[0][..], Sign::Plus));
        let cut = complete_cut(l, u, s, &p);
        assert!((eval_lifted_rhs(&x, &y, &cut, &p) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_x_gives_base() {
        let p = Partition::new(3, vec![0, 1], vec![2]).unwrap();
        let (x, y) = ([1.0, 1.0, 0.4], [0.7, 0.5, 0.3]);
        assert!(find_l_u_general(&x, &y, &p).is_none());
        let r = separate(&FractionalPoint { x: x.to_vec(), y: y.to_vec(), t: 0.0 }, &p);
        assert!(r.base_only && r.cut.is_none());
        assert!((r.rhs_value - 0.81).abs() < 1e-12);
    }

    #[test]
    fn one_sided_general_matches_positive() {
        let p = Partition::positive(3);
        let (x, y) = example(0.4, 0.1);
        let (l, u, s) = find_l_u_general(&x, &y, &p).unwrap();
        assert_eq!((l, u, s), (vec![0, 2], vec![], Sign::Plus));
        let q = Partition::new(3, vec![], vec![0, 1, 2]).unwrap();
        let (l, u, s) = find_l_u_general(&x, &y, &q).unwrap();
        assert_eq!((l, u, s), (vec![0, 2], vec![], Sign::Minus));
    }

    #[test]
    fn oracle_examples() {
        let p = Partition::positive(3);
        for (x1, y1) in [(0.01, 1.0), (0.1, 0.5), (0.4, 0.1), (0.5, 0.2)] {
            let (x, y) = example(x1, y1);
            let o = hull_value_oracle(&x, &y, &p, 1e-8).unwrap();
            let c = separate(&FractionalPoint { x, y, t: 0.0 }, &p).rhs_value;
            assert!((o - c).abs() <= 1e-3 * c.max(1.0), "{x1}: {o} vs {c}");
        }
        assert!(hull_value_oracle(&[0.3, 0.2, 0.9], &[0.0; 3], &p, 1e-9).unwrap().abs() < 1e-6);
        let one = Partition::positive(1);
        let o = hull_value_oracle(&[0.25], &[0.5], &one, 1e-9).unwrap();
        assert!((o - 1.0).abs() < 1e-5, "{o}");
        let q = Partition::new(2, vec![0], vec![1]).unwrap();
        let o = hull_value_oracle(&[0.5, 0.5], &[1.0, 0.0], &q, 1e-9).unwrap();
        assert!((o - 2.0).abs() < 1e-5, "{o}");
    }

    #[test]
    fn infinite_ratio() {
        let p = Partition::positive(2);
        let r = separate(&FractionalPoint { x: vec![0.0, 0.5], y: vec![0.1, 0.2], t: 1.0 }, &p);
        assert_eq!(r.rhs_value, f64::INFINITY);
        assert!(r.violated);
    }
}
