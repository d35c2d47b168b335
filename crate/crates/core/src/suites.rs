//! Randomized checks of the closed forms against independent oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conic_ir::eval_extended_min;
use crate::core_types::{set_of, FractionalPoint, Partition};
use crate::discrete_hull::{facet_value, verify_strong_duality};
use crate::error::{input, Result};
use crate::lifted_cuts::{
    base_value, complete_cut, eval_lifted_rhs, find_l_u_general, hull_value_oracle, separate, sides, LiftedCut, Sign,
};
use crate::oracles::hull_lp_value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub violations: usize,
    pub max_error: f64,
    /// First few failing cases, for diagnostics.
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.to_string(), checks: 0, violations: 0, max_error: 0.0, failures: Vec::new() }
    }

    fn record(&mut self, err: f64, limit: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.max_error = self.max_error.max(err);
        if err > limit {
            self.violations += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn merge(&mut self, other: SuiteReport) {
        self.checks += other.checks;
        self.violations += other.violations;
        self.max_error = self.max_error.max(other.max_error);
        for f in other.failures {
            if self.failures.len() < 5 {
                self.failures.push(f);
            }
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(1.0)
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Partition {
    let signs: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    Partition::from_signs(&signs).expect("sign pattern is a partition")
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x = (0..n).map(|_| rng.gen_range(0.02..1.0)).collect();
    let y = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    (x, y)
}

fn check_n(n_max: usize, cap: usize) -> Result<()> {
    if n_max == 0 || n_max > cap {
        return input(format!("n must be in 1..={cap}"));
    }
    Ok(())
}

/// Greedy primal, dual certificate, sorted facets and the exhaustive LP agree.
pub fn duality_suite(n_max: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    check_n(n_max, 12)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("duality");
    for trial in 0..trials {
        let n = rng.gen_range(1..=n_max);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let d = verify_strong_duality(&x, &alpha)?;
        let facets = facet_value(&x, &alpha);
        let lp = hull_lp_value(&x, &alpha)?;
        let err = [d.primal_obj, d.dual_obj, facets].iter().map(|v| (v - lp).abs()).fold(0.0, f64::max);
        let err = if d.cs_violations.is_empty() { err } else { f64::INFINITY };
        rep.record(err, 1e-8, || {
            format!("trial {trial}: primal {} dual {} facets {facets} lp {lp}", d.primal_obj, d.dual_obj)
        });
    }
    Ok(rep)
}

/// Separation value against the lifting oracle, on X₊ and on X.
pub fn hull_suite(n_max: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    check_n(n_max, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("hull");
    for trial in 0..trials {
        let n = rng.gen_range(1..=n_max);
        let p = if trial % 2 == 0 { Partition::positive(n) } else { random_partition(&mut rng, n) };
        let (x, y) = random_point(&mut rng, n);
        let point = FractionalPoint { x: x.clone(), y: y.clone(), t: 0.0 };
        let closed = separate(&point, &p).rhs_value;
        let oracle = hull_value_oracle(&x, &y, &p, 1e-9)?;
        rep.record(rel_err(closed, oracle), 1e-3, || {
            format!("trial {trial}: x {x:?} y {y:?} plus {:?} closed {closed} oracle {oracle}", p.plus())
        });
    }
    Ok(rep)
}

/// Conic inner minimum equals the closed form wherever the separation conditions hold.
pub fn template_suite(n_max: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    check_n(n_max, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("template");
    let mut trial = 0;
    let mut attempts = 0;
    while trial < trials && attempts < 50 * trials.max(1) {
        attempts += 1;
        let n = rng.gen_range(1..=n_max);
        let p = if rng.gen_bool(0.3) { Partition::positive(n) } else { random_partition(&mut rng, n) };
        let (x, y) = random_point(&mut rng, n);
        let Some((l, u, sign)) = find_l_u_general(&x, &y, &p) else { continue };
        let cut = complete_cut(l, u, sign, &p);
        let closed = eval_lifted_rhs(&x, &y, &cut, &p);
        if !closed.is_finite() {
            continue;
        }
        let conic = eval_extended_min(&x, &y, &cut, &p)?;
        rep.record(rel_err(conic, closed), 1e-5, || format!("trial {trial}: {cut:?} closed {closed} conic {conic}"));
        trial += 1;
    }
    Ok(rep)
}

fn random_integer_point(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
    let y = x.iter().map(|&xi| xi * rng.gen_range(0.0..2.0)).collect();
    (x, y)
}

/// Separated cuts never exceed t at convex combinations of points of X.
pub fn combination_suite(n_max: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    check_n(n_max, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("combinations");
    for trial in 0..trials {
        let n = rng.gen_range(1..=n_max);
        let p = if trial % 2 == 0 { Partition::positive(n) } else { random_partition(&mut rng, n) };
        let k = rng.gen_range(1..=n + 2);
        let mut lam: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = lam.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        lam.iter_mut().for_each(|v| *v /= total);
        let (mut x, mut y, mut t) = (vec![0.0; n], vec![0.0; n], 0.0);
        for &w in &lam {
            let (xk, yk) = random_integer_point(&mut rng, n);
            t += w * base_value(&yk, &p);
            for i in 0..n {
                x[i] += w * xk[i];
                y[i] += w * yk[i];
            }
        }
        let rhs = separate(&FractionalPoint { x: x.clone(), y: y.clone(), t }, &p).rhs_value;
        rep.record((rhs - t) / t.abs().max(1.0), 1e-6, || format!("trial {trial}: x {x:?} y {y:?} t {t} rhs {rhs}"));
    }
    Ok(rep)
}

/// Every (L, R, U) split of every sign pattern for n <= `n_max`, checked with
/// the conic template at integer points with `y_samples` random y each.
pub fn integer_sweep(n_max: usize, y_samples: usize, seed: u64) -> Result<SuiteReport> {
    check_n(n_max, 6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("integer-sweep");
    for n in 1..=n_max {
        for pmask in 0u64..1 << n {
            let signs: Vec<bool> = (0..n).map(|i| pmask >> i & 1 == 1).collect();
            let p = Partition::from_signs(&signs)?;
            for cut in all_cuts(&p) {
                for xmask in 0u64..1 << n {
                    let on = set_of(xmask, n);
                    for _ in 0..y_samples {
                        let mut x = vec![0.0; n];
                        let mut y = vec![0.0; n];
                        for &i in &on {
                            x[i] = 1.0;
                            y[i] = rng.gen_range(0.0..2.0);
                        }
                        let f = base_value(&y, &p);
                        let v = eval_extended_min(&x, &y, &cut, &p)?;
                        rep.record((v - f) / f.max(1.0), 1e-6, || {
                            format!("{cut:?} signs {signs:?} x {x:?} y {y:?} f {f} cut {v}")
                        });
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// All splits of the signed side into (L, R, U), for each usable sign.
pub fn all_cuts(p: &Partition) -> Vec<LiftedCut> {
    let mut out = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let (side, _) = sides(p, sign);
        if side.is_empty() {
            continue;
        }
        let k = side.len() as u32;
        for code in 0..3usize.pow(k) {
            let mut c = code;
            let mut cut = LiftedCut { sign, l: vec![], r: vec![], u: vec![] };
            for &i in side {
                match c % 3 {
                    0 => cut.l.push(i),
                    1 => cut.r.push(i),
                    _ => cut.u.push(i),
                }
                c /= 3;
            }
            out.push(cut);
        }
    }
    out
}

/// Combination check followed by the exhaustive integer sweep.
pub fn validity_suite(n_max: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = combination_suite(n_max, trials, seed)?;
    rep.suite = "validity".into();
    rep.merge(integer_sweep(n_max.min(4), 2, seed)?);
    Ok(rep)
}
