//! Independent reference computations used to cross-check the closed forms.

use crate::core_types::set_of;
use crate::error::{input, Error, Result};

/// Minimizes `c'z` subject to `A z = b`, `z >= 0` with `b >= 0` by a dense
/// two-phase simplex using Bland's rule.
pub fn simplex_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<f64> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) || b.iter().any(|&v| v < 0.0) {
        return input("simplex needs consistent dimensions and b >= 0");
    }
    // Columns 0..n are structural, n..n+m artificial, last is the right-hand side.
    let w = n + m + 1;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            row.push(b[i]);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut phase1 = vec![0.0; n + m];
    for v in &mut phase1[n..] {
        *v = 1.0;
    }
    iterate(&mut t, &mut basis, &phase1, n + m)?;
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][w - 1]).sum();
    if infeas > 1e-9 {
        return Err(Error::Oracle("linear program is infeasible".into()));
    }
    // Drive artificials out of the basis; rows with no structural entry are redundant.
    let mut keep = vec![true; m];
    for i in 0..m {
        if basis[i] >= n {
            match (0..n).find(|&j| t[i][j].abs() > 1e-9) {
                Some(j) => {
                    pivot(&mut t, i, j);
                    basis[i] = j;
                }
                None => keep[i] = false,
            }
        }
    }
    let mut t: Vec<Vec<f64>> = t.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(r, _)| r).collect();
    let mut basis: Vec<usize> = basis.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(b, _)| b).collect();
    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat_n(0.0, m));
    iterate(&mut t, &mut basis, &cost, n)?;
    Ok((0..t.len()).map(|i| cost[basis[i]] * t[i][w - 1]).sum())
}

fn pivot(t: &mut [Vec<f64>], r: usize, col: usize) {
    let p = t[r][col];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pr = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && row[col] != 0.0 {
            let f = row[col];
            for (v, pv) in row.iter_mut().zip(&pr) {
                *v -= f * pv;
            }
        }
    }
}

/// Bland-rule simplex iterations over the first `allowed` columns.
fn iterate(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> Result<()> {
    const EPS: f64 = 1e-12;
    let m = t.len();
    let rhs = t.first().map_or(0, |r| r.len() - 1);
    for _ in 0..100_000 {
        let reduced = |j: usize| cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
        let Some(col) = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j) < -EPS) else {
            return Ok(());
        };
        let mut best: Option<(f64, usize)> = None;
        for i in 0..m {
            if t[i][col] > EPS {
                let ratio = t[i][rhs] / t[i][col];
                let better = match best {
                    None => true,
                    Some((r, bi)) => ratio < r - EPS || (ratio <= r + EPS && basis[i] < basis[bi]),
                };
                if better {
                    best = Some((ratio, i));
                }
            }
        }
        let Some((_, r)) = best else {
            return Err(Error::Oracle("linear program is unbounded".into()));
        };
        pivot(t, r, col);
        basis[r] = col;
    }
    Err(Error::Oracle("simplex iteration cap reached".into()))
}

/// Value of the hull LP over all `2^n` subsets for weights `w >= 0`:
/// min Σ_S λ_S g(S) with Σ_{S∋i} λ_S = x_i, Σ λ_S = 1, λ >= 0.
pub fn hull_lp_value(x: &[f64], w: &[f64]) -> Result<f64> {
    let n = x.len();
    if w.len() != n {
        return input("x and weight lengths differ");
    }
    if n > 12 {
        return Err(Error::Capacity(format!("exhaustive LP needs n <= 12, got {n}")));
    }
    let cols = 1usize << n;
    let mut a = vec![vec![0.0; cols]; n + 1];
    let mut c = vec![0.0; cols];
    for mask in 0..cols {
        let s = set_of(mask as u64, n);
        let m = s.iter().map(|&i| w[i]).fold(0.0, f64::max);
        c[mask] = -m * m / 4.0;
        for &i in &s {
            a[i][mask] = 1.0;
        }
        a[n][mask] = 1.0;
    }
    let mut b = x.to_vec();
    b.push(1.0);
    simplex_min(&c, &a, &b)
}

/// Minimum of β'x − max_i w_i² x_i / 4 over all binary x.
pub fn min_linear_enumeration(w: &[f64], beta: &[f64]) -> f64 {
    let n = w.len();
    (0u64..1 << n)
        .map(|mask| {
            let s = set_of(mask, n);
            let m = s.iter().map(|&i| w[i]).fold(0.0, f64::max);
            s.iter().map(|&i| beta[i]).sum::<f64>() - m * m / 4.0
        })
        .fold(f64::INFINITY, f64::min)
}
