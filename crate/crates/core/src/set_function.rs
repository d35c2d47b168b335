//! The projected set function g_α(S) = −max_α(S)²/4 and its multiplier regions.

use serde::{Deserialize, Serialize};

use crate::core_types::{set_of, Partition, TOL};
use crate::error::{input, Error, Result};

/// Where a multiplier vector sits relative to the bounded regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    BPlus,
    BMinus,
    Unbounded,
    PositiveOrthant,
}

/// Multiplier vector tagged with its region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub values: Vec<f64>,
    pub region: Region,
}

impl AlphaVector {
    pub fn new(values: Vec<f64>, p: &Partition) -> Result<Self> {
        let region = classify_alpha(&values, p)?;
        Ok(AlphaVector { values, region })
    }

    /// Clipped weights on the side that drives g; zero elsewhere.
    pub fn weights(&self, p: &Partition) -> Result<Vec<f64>> {
        let n = self.values.len();
        let mut w = vec![0.0; n];
        let side: &[usize] = match self.region {
            Region::PositiveOrthant => {
                for (wi, &a) in w.iter_mut().zip(&self.values) {
                    *wi = a.max(0.0);
                }
                return Ok(w);
            }
            Region::BPlus => p.plus(),
            Region::BMinus => p.minus(),
            Region::Unbounded => return Err(Error::Region("alpha is outside B".into())),
        };
        for &i in side {
            w[i] = self.values[i].max(0.0);
        }
        Ok(w)
    }
}

/// Value of g, with a marker for an unbounded projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GValue {
    Finite(f64),
    NegInfinity,
}

impl GValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            GValue::Finite(v) => Some(v),
            GValue::NegInfinity => None,
        }
    }
}

pub fn classify_alpha(alpha: &[f64], p: &Partition) -> Result<Region> {
    if alpha.len() != p.n() {
        return input(format!("alpha has length {}, expected {}", alpha.len(), p.n()));
    }
    if p.is_one_sided() {
        return Ok(Region::PositiveOrthant);
    }
    let max_plus = p.plus().iter().map(|&i| alpha[i]).fold(f64::NEG_INFINITY, f64::max);
    let max_minus = p.minus().iter().map(|&i| alpha[i]).fold(f64::NEG_INFINITY, f64::max);
    if max_plus + max_minus > TOL {
        return Ok(Region::Unbounded);
    }
    if max_minus <= TOL {
        Ok(Region::BPlus)
    } else {
        Ok(Region::BMinus)
    }
}

fn check_set(s: &[usize], n: usize) -> Result<()> {
    match s.iter().find(|&&i| i >= n) {
        Some(i) => input(format!("index {i} out of range for n={n}")),
        None => Ok(()),
    }
}

pub fn eval_g(alpha: &AlphaVector, s: &[usize], p: &Partition) -> Result<GValue> {
    let n = p.n();
    if alpha.values.len() != n {
        return input("alpha length does not match partition");
    }
    check_set(s, n)?;
    Ok(g_raw(&alpha.values, s.iter().copied(), p))
}

fn g_raw(a: &[f64], s: impl Iterator<Item = usize>, p: &Partition) -> GValue {
    let (mut mp, mut mm) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in s {
        if p.is_plus(i) {
            mp = mp.max(a[i]);
        } else {
            mm = mm.max(a[i]);
        }
    }
    if mp > f64::NEG_INFINITY && mm > f64::NEG_INFINITY && mp + mm > TOL {
        return GValue::NegInfinity;
    }
    let m = mp.max(mm).max(0.0);
    GValue::Finite(-m * m / 4.0)
}

/// ρ(i,S) = g(S ∪ i) − g(S).
pub fn increment_rho(alpha: &AlphaVector, i: usize, s: &[usize], p: &Partition) -> Result<f64> {
    if s.contains(&i) {
        return input(format!("index {i} already in S"));
    }
    let mut si = s.to_vec();
    si.push(i);
    let with = eval_g(alpha, &si, p)?;
    let without = eval_g(alpha, s, p)?;
    match (with, without) {
        (GValue::Finite(a), GValue::Finite(b)) => Ok(a - b),
        _ => Err(Error::Region("g is unbounded on the increment".into())),
    }
}

/// Table of g over all subsets, indexed by bitmask.
pub fn g_table(alpha: &AlphaVector, p: &Partition) -> Result<Vec<GValue>> {
    let n = p.n();
    if n > 20 {
        return Err(Error::Capacity(format!("exhaustive table needs n <= 20, got {n}")));
    }
    if alpha.values.len() != n {
        return input("alpha length does not match partition");
    }
    Ok((0u64..1 << n).map(|m| g_raw(&alpha.values, set_of(m, n).into_iter(), p)).collect())
}

/// Supermodularity of a set function given as a table over bitmasks.
///
/// Uses the local form ρ(i,S) ≤ ρ(i,S ∪ j), which is equivalent to the
/// chain condition over all S ⊆ T.
pub fn check_supermodular_table(n: usize, g: &[f64]) -> Result<bool> {
    if n > 20 {
        return Err(Error::Capacity(format!("exhaustive check needs n <= 20, got {n}")));
    }
    if g.len() != 1 << n {
        return input("table length must be 2^n");
    }
    for s in 0usize..1 << n {
        for i in 0..n {
            if s >> i & 1 == 1 {
                continue;
            }
            let rho_s = g[s | 1 << i] - g[s];
            for j in i + 1..n {
                if s >> j & 1 == 1 {
                    continue;
                }
                let t = s | 1 << j;
                let rho_t = g[t | 1 << i] - g[t];
                if rho_s > rho_t + TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn check_supermodular(alpha: &AlphaVector, p: &Partition) -> Result<bool> {
    let table = g_table(alpha, p)?;
    let mut g = Vec::with_capacity(table.len());
    for v in table {
        match v {
            GValue::Finite(x) => g.push(x),
            GValue::NegInfinity => return Err(Error::Region("g is unbounded on some subset".into())),
        }
    }
    check_supermodular_table(p.n(), &g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> Partition {
        Partition::new(2, vec![0], vec![1]).unwrap()
    }

    #[test]
    fn classify() {
        let p = two();
        assert_eq!(classify_alpha(&[1.0, -2.0], &p).unwrap(), Region::BPlus);
        assert_eq!(classify_alpha(&[1.0, -0.5], &p).unwrap(), Region::Unbounded);
        assert_eq!(classify_alpha(&[-1.0, 0.5], &p).unwrap(), Region::BMinus);
        assert_eq!(classify_alpha(&[-1.0, -1.0], &p).unwrap(), Region::BPlus);
        assert_eq!(classify_alpha(&[0.0, 0.0], &p).unwrap(), Region::BPlus);
        assert_eq!(classify_alpha(&[1.0, 0.0], &p).unwrap(), Region::Unbounded);
        assert_eq!(classify_alpha(&[1.0, -1.0], &p).unwrap(), Region::BPlus);
        assert_eq!(classify_alpha(&[5.0, 7.0], &Partition::positive(2)).unwrap(), Region::PositiveOrthant);
        assert!(classify_alpha(&[1.0], &p).is_err());
    }

    #[test]
    fn g_values() {
        let p = Partition::positive(2);
        let a = AlphaVector::new(vec![2.0, 3.0], &p).unwrap();
        assert_eq!(eval_g(&a, &[0, 1], &p).unwrap(), GValue::Finite(-2.25));
        assert_eq!(eval_g(&a, &[], &p).unwrap(), GValue::Finite(0.0));
        let q = two();
        let forced = AlphaVector { values: vec![1.0, -0.5], region: Region::BPlus };
        assert_eq!(eval_g(&forced, &[0, 1], &q).unwrap(), GValue::NegInfinity);
        assert_eq!(eval_g(&forced, &[0], &q).unwrap(), GValue::Finite(-0.25));
    }

    #[test]
    fn clipping_for_positive_set() {
        let p = Partition::positive(3);
        let a = AlphaVector::new(vec![-4.0, 1.0, -0.5], &p).unwrap();
        assert_eq!(eval_g(&a, &[0, 2], &p).unwrap(), GValue::Finite(0.0));
        assert_eq!(eval_g(&a, &[0, 1], &p).unwrap(), GValue::Finite(-0.25));
    }

    #[test]
    fn increments() {
        let p = Partition::positive(2);
        let a = AlphaVector::new(vec![2.0, 3.0], &p).unwrap();
        assert_eq!(increment_rho(&a, 1, &[0], &p).unwrap(), -1.25);
        assert_eq!(increment_rho(&a, 0, &[1], &p).unwrap(), 0.0);
        let b = AlphaVector::new(vec![2.0, 0.0], &p).unwrap();
        assert_eq!(increment_rho(&b, 1, &[], &p).unwrap(), 0.0);
        assert!(increment_rho(&a, 0, &[0], &p).is_err());
        let forced = AlphaVector { values: vec![1.0, -0.5], region: Region::BPlus };
        assert!(matches!(increment_rho(&forced, 1, &[0], &two()), Err(Error::Region(_))));
    }

    #[test]
    fn supermodular_checks() {
        let p = Partition::positive(3);
        let a = AlphaVector::new(vec![1.0, 2.0, 3.0], &p).unwrap();
        assert!(check_supermodular(&a, &p).unwrap());
        // g(∅)=0, g({1})=g({2})=−1, g({1,2})=−1 has increasing increments.
        assert!(check_supermodular_table(2, &[0.0, -1.0, -1.0, -1.0]).unwrap());
        assert!(!check_supermodular_table(2, &[0.0, -1.0, -1.0, -3.0]).unwrap());
        let big = AlphaVector::new(vec![0.0; 21], &Partition::positive(21)).unwrap();
        assert!(matches!(check_supermodular(&big, &Partition::positive(21)), Err(Error::Capacity(_))));
    }

    #[test]
    fn weights_follow_region() {
        let p = Partition::new(3, vec![0, 2], vec![1]).unwrap();
        let a = AlphaVector::new(vec![1.0, -2.0, -0.5], &p).unwrap();
        assert_eq!(a.weights(&p).unwrap(), vec![1.0, 0.0, 0.0]);
        let b = AlphaVector::new(vec![-1.0, 0.5, -3.0], &p).unwrap();
        assert_eq!(b.region, Region::BMinus);
        assert_eq!(b.weights(&p).unwrap(), vec![0.0, 0.5, 0.0]);
    }
}
