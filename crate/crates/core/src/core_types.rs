//! Index sets, partitions, points and the division convention.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Library-wide comparison tolerance.
pub const TOL: f64 = 1e-9;

/// Split of `{0..n-1}` into the indices with positive and negative coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    plus: Vec<usize>,
    minus: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, plus: Vec<usize>, minus: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return input("partition needs n >= 1");
        }
        let mut seen = vec![false; n];
        for set in [&plus, &minus] {
            for w in set.windows(2) {
                if w[0] >= w[1] {
                    return input("partition indices must be strictly increasing");
                }
            }
            for &i in set.iter() {
                if i >= n {
                    return input(format!("index {i} out of range for n={n}"));
                }
                if seen[i] {
                    return input(format!("index {i} appears twice"));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return input("partition does not cover {0..n-1}");
        }
        Ok(Partition { n, plus, minus })
    }

    /// All indices positive: the set X₊.
    pub fn positive(n: usize) -> Self {
        Partition { n, plus: (0..n).collect(), minus: Vec::new() }
    }

    /// Build from a sign pattern; `true` marks a positive index.
    pub fn from_signs(signs: &[bool]) -> Result<Self> {
        let plus = (0..signs.len()).filter(|&i| signs[i]).collect();
        let minus = (0..signs.len()).filter(|&i| !signs[i]).collect();
        Partition::new(signs.len(), plus, minus)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn plus(&self) -> &[usize] {
        &self.plus
    }

    pub fn minus(&self) -> &[usize] {
        &self.minus
    }

    /// True when one side is empty, so the set is X₊ on the other side.
    pub fn is_one_sided(&self) -> bool {
        self.plus.is_empty() || self.minus.is_empty()
    }

    /// Same index sets with the roles of the two sides exchanged.
    pub fn swapped(&self) -> Self {
        Partition { n: self.n, plus: self.minus.clone(), minus: self.plus.clone() }
    }

    pub fn is_plus(&self, i: usize) -> bool {
        self.plus.binary_search(&i).is_ok()
    }
}

/// Candidate point `(x, y, t)` for separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl FractionalPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        let p = FractionalPoint { x, y, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return input("x and y lengths differ");
        }
        for (i, (&xi, &yi)) in self.x.iter().zip(&self.y).enumerate() {
            if !(-TOL..=1.0 + TOL).contains(&xi) {
                return input(format!("x[{i}]={xi} outside [0,1]"));
            }
            if yi < -TOL || !yi.is_finite() {
                return input(format!("y[{i}]={yi} is negative or not finite"));
            }
        }
        if self.t.is_nan() {
            return input("t is NaN");
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// `a / b` under the convention `a/0 = inf` for `a > 0` and `0/0 = 0`.
pub fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn check_indices(len: usize, s: &[usize]) -> Result<()> {
    match s.iter().find(|&&i| i >= len) {
        Some(i) => input(format!("index {i} out of range for length {len}")),
        None => Ok(()),
    }
}

/// Sum of `v` over `s`; zero for the empty set.
pub fn sum_over(v: &[f64], s: &[usize]) -> Result<f64> {
    check_indices(v.len(), s)?;
    Ok(s.iter().map(|&i| v[i]).sum())
}

/// Maximum of `v` over `s`; zero for the empty set.
pub fn max_over(v: &[f64], s: &[usize]) -> Result<f64> {
    check_indices(v.len(), s)?;
    Ok(argmax_over(v, s).map_or(0.0, |i| v[i]))
}

/// Index of the maximum of `v` over `s`, lowest index on ties.
pub fn argmax_over(v: &[f64], s: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for &i in s {
        match best {
            Some(b) if v[i] < v[b] || (v[i] == v[b] && i > b) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Bitmask of an index set.
pub fn mask_of(s: &[usize]) -> u64 {
    s.iter().fold(0, |m, &i| m | (1u64 << i))
}

/// Index set of a bitmask, ascending.
pub fn set_of(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums() {
        assert_eq!(sum_over(&[1.0, 2.0, 3.0], &[0, 2]).unwrap(), 4.0);
        assert_eq!(sum_over(&[1.0, 2.0, 3.0], &[]).unwrap(), 0.0);
        assert!((sum_over(&[0.5, 0.2], &[0, 1]).unwrap() - 0.7).abs() < 1e-15);
        assert!(sum_over(&[1.0], &[3]).is_err());
    }

    #[test]
    fn maxima() {
        assert_eq!(max_over(&[3.0, -1.0, 2.0], &[1, 2]).unwrap(), 2.0);
        assert_eq!(max_over(&[3.0, -1.0, 2.0], &[]).unwrap(), 0.0);
        assert_eq!(max_over(&[-5.0, -5.0], &[0, 1]).unwrap(), -5.0);
        assert_eq!(argmax_over(&[-5.0, -5.0], &[1, 0]), Some(0));
        assert!(max_over(&[1.0], &[1]).is_err());
    }

    #[test]
    fn ratio_convention() {
        assert_eq!(safe_ratio(0.0, 0.0), 0.0);
        assert_eq!(safe_ratio(2.0, 0.0), f64::INFINITY);
        assert_eq!(safe_ratio(1.0, 4.0), 0.25);
    }

    #[test]
    fn partition_checks() {
        assert!(Partition::new(3, vec![0, 2], vec![1]).is_ok());
        assert!(Partition::new(3, vec![0, 1], vec![1, 2]).is_err());
        assert!(Partition::new(3, vec![2, 0], vec![1]).is_err());
        assert!(Partition::new(3, vec![0], vec![1]).is_err());
        let p = Partition::from_signs(&[true, false, true]).unwrap();
        assert_eq!(p.minus(), &[1]);
        assert_eq!(p.swapped().plus(), &[1]);
    }

    #[test]
    fn point_bounds() {
        assert!(FractionalPoint::new(vec![0.5], vec![1.0], 0.0).is_ok());
        assert!(FractionalPoint::new(vec![1.5], vec![1.0], 0.0).is_err());
        assert!(FractionalPoint::new(vec![0.5], vec![-1.0], 0.0).is_err());
    }
}
