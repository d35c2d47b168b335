//! Continuous relaxations of conic models and a brute-force mixed-integer oracle.
//!
//! Relaxations go through the Clarabel interior point solver. Rotated cones
//! `w'w <= u v` are passed as second-order cones on `((u+v)/2, (u-v)/2, w)`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus, SupportedConeT,
    ZeroConeT,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic_ir::{ConicModel, Sense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal_inf: f64,
    pub dual_inf: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub kkt_residuals: KktResiduals,
}

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_BINARIES: usize = 16;

/// Constraint rows `A x + s = b` over the free variables; fixed variables
/// are substituted into `b`.
struct Triplets {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
    fixed: Vec<Option<f64>>,
    col: Vec<usize>,
}

impl Triplets {
    fn push_row(&mut self, coeffs: impl IntoIterator<Item = (usize, f64)>, mut rhs: f64) {
        let r = self.rhs.len();
        for (j, a) in coeffs {
            if a == 0.0 {
                continue;
            }
            match self.fixed[j] {
                Some(c) => rhs -= a * c,
                None => {
                    self.rows.push(r);
                    self.cols.push(self.col[j]);
                    self.vals.push(a);
                }
            }
        }
        self.rhs.push(rhs);
    }
}

fn effective_bounds(model: &ConicModel) -> (Vec<f64>, Vec<f64>) {
    let mut lo = model.lower.clone();
    let mut hi = model.upper.clone();
    for &b in &model.binaries {
        lo[b] = lo[b].max(0.0);
        hi[b] = hi[b].min(1.0);
    }
    (lo, hi)
}

/// Largest violation of rows, bounds and cones at `x`.
pub fn primal_violation(model: &ConicModel, x: &[f64]) -> f64 {
    let (lo, hi) = effective_bounds(model);
    let mut v: f64 = 0.0;
    for i in 0..x.len() {
        v = v.max(lo[i] - x[i]).max(x[i] - hi[i]);
    }
    for r in &model.rows {
        let a: f64 = r.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
        let d = a - r.rhs;
        v = v.max(match r.sense {
            Sense::Le => d,
            Sense::Ge => -d,
            Sense::Eq => d.abs(),
        });
    }
    for c in &model.cones {
        let (u, w) = (x[c.u], x[c.v]);
        let nw: f64 = c.w.iter().map(|&j| x[j] * x[j]).sum::<f64>();
        let lhs = (nw + ((u - w) / 2.0).powi(2)).sqrt();
        v = v.max(lhs - (u + w) / 2.0);
    }
    v.max(0.0)
}

fn objective_at(model: &ConicModel, x: &[f64]) -> f64 {
    model.obj_constant + model.objective.iter().map(|&(j, c)| c * x[j]).sum::<f64>()
}

pub fn solve_relaxation(model: &ConicModel, tol: f64) -> Result<SolveResult> {
    model.validate()?;
    solve_with_bounds(model, &effective_bounds(model), tol)
}

fn solve_with_bounds(model: &ConicModel, bounds: &(Vec<f64>, Vec<f64>), tol: f64) -> Result<SolveResult> {
    let n = model.num_vars();
    let (lo, hi) = bounds;
    let fixed: Vec<Option<f64>> = (0..n).map(|j| (lo[j] == hi[j]).then_some(lo[j])).collect();
    let free: Vec<usize> = (0..n).filter(|&j| fixed[j].is_none()).collect();
    let mut col = vec![usize::MAX; n];
    for (k, &j) in free.iter().enumerate() {
        col[j] = k;
    }
    let mut x: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    if free.is_empty() {
        let viol = primal_violation(model, &x);
        let status = if viol <= tol { Status::Optimal } else { Status::Infeasible };
        let objective = if status == Status::Optimal { objective_at(model, &x) } else { f64::INFINITY };
        let kkt = KktResiduals { primal_inf: viol, dual_inf: 0.0, gap: 0.0 };
        return Ok(SolveResult { status, objective, primal: x, kkt_residuals: kkt });
    }
    let mut t = Triplets { rows: vec![], cols: vec![], vals: vec![], rhs: vec![], fixed, col };
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

    for r in model.rows.iter().filter(|r| r.sense == Sense::Eq) {
        t.push_row(r.coeffs.iter().copied(), r.rhs);
    }
    let zeros = t.rhs.len();
    if zeros > 0 {
        cones.push(ZeroConeT(zeros));
    }

    for r in &model.rows {
        match r.sense {
            Sense::Le => t.push_row(r.coeffs.iter().copied(), r.rhs),
            Sense::Ge => t.push_row(r.coeffs.iter().map(|&(j, c)| (j, -c)), -r.rhs),
            Sense::Eq => {}
        }
    }
    for j in 0..n {
        if lo[j] == hi[j] {
            continue;
        }
        if lo[j].is_finite() {
            t.push_row([(j, -1.0)], -lo[j]);
        }
        if hi[j].is_finite() {
            t.push_row([(j, 1.0)], hi[j]);
        }
    }
    let nonneg = t.rhs.len() - zeros;
    if nonneg > 0 {
        cones.push(NonnegativeConeT(nonneg));
    }

    for c in &model.cones {
        t.push_row([(c.u, -0.5), (c.v, -0.5)], 0.0);
        t.push_row([(c.u, -0.5), (c.v, 0.5)], 0.0);
        for &w in &c.w {
            t.push_row([(w, -1.0)], 0.0);
        }
        cones.push(SecondOrderConeT(c.w.len() + 2));
    }

    let m = t.rhs.len();
    let nf = free.len();
    let a = CscMatrix::new_from_triplets(m, nf, t.rows, t.cols, t.vals);
    let p = CscMatrix::zeros((nf, nf));
    let mut q = vec![0.0; nf];
    for &(j, c) in &model.objective {
        if t.fixed[j].is_none() {
            q[t.col[j]] += c;
        }
    }
    // A light static regularization keeps small denominators accurate. When
    // that run stops short of full accuracy the solver default gets a try, and
    // the first run is kept unless the second one does better.
    let mut runs = Vec::with_capacity(2);
    for reg in [1e-12, 1e-8] {
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .tol_gap_abs(tol)
            .tol_gap_rel(tol)
            .tol_feas(tol)
            .max_iter(200)
            .static_regularization_constant(reg)
            .build()
            .map_err(|e| Error::Solver(e.to_string()))?;
        let mut s =
            DefaultSolver::new(&p, &q, &a, &t.rhs, &cones, settings).map_err(|e| Error::Solver(format!("{e:?}")))?;
        s.solve();
        let done = matches!(
            s.solution.status,
            SolverStatus::Solved | SolverStatus::PrimalInfeasible | SolverStatus::DualInfeasible
        );
        runs.push(s);
        if done {
            break;
        }
    }
    let rank = |s: &SolverStatus| match s {
        SolverStatus::Solved | SolverStatus::PrimalInfeasible | SolverStatus::DualInfeasible => 0,
        SolverStatus::AlmostSolved | SolverStatus::AlmostPrimalInfeasible | SolverStatus::AlmostDualInfeasible => 1,
        _ => 2,
    };
    let best = (0..runs.len()).min_by_key(|&k| rank(&runs[k].solution.status)).expect("at least one run");
    let solver = &runs[best];
    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => Status::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => Status::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => Status::Unbounded,
        _ => Status::IterationLimit,
    };
    for (k, &j) in free.iter().enumerate() {
        x[j] = sol.x[k];
    }
    let kkt = KktResiduals {
        primal_inf: primal_violation(model, &x),
        dual_inf: sol.r_dual,
        gap: solver.info.gap_rel.min(solver.info.gap_abs),
    };
    let objective = match status {
        Status::Optimal | Status::IterationLimit => objective_at(model, &x),
        Status::Infeasible => f64::INFINITY,
        Status::Unbounded => f64::NEG_INFINITY,
    };
    Ok(SolveResult { status, objective, primal: x, kkt_residuals: kkt })
}

fn term(lo: &[f64], hi: &[f64], j: usize, a: f64, low: bool) -> f64 {
    if (a > 0.0) == low {
        a * lo[j]
    } else {
        a * hi[j]
    }
}

/// Interval propagation over the linear rows; false when some row cannot hold.
fn propagate(model: &ConicModel, lo: &mut [f64], hi: &mut [f64]) -> bool {
    const SLACK: f64 = 1e-9;
    for _ in 0..4 {
        for r in &model.rows {
            let (rlo, rhi) = match r.sense {
                Sense::Le => (f64::NEG_INFINITY, r.rhs),
                Sense::Ge => (r.rhs, f64::INFINITY),
                Sense::Eq => (r.rhs, r.rhs),
            };
            let (mut min_f, mut min_inf, mut max_f, mut max_inf) = (0.0, 0usize, 0.0, 0usize);
            for &(j, a) in &r.coeffs {
                let (tmin, tmax) = (term(lo, hi, j, a, true), term(lo, hi, j, a, false));
                if tmin.is_finite() {
                    min_f += tmin
                } else {
                    min_inf += 1
                }
                if tmax.is_finite() {
                    max_f += tmax
                } else {
                    max_inf += 1
                }
            }
            let scale = 1.0 + rlo.abs().min(rhi.abs()).min(1e12);
            if min_inf == 0 && min_f > rhi + SLACK * scale {
                return false;
            }
            if max_inf == 0 && max_f < rlo - SLACK * scale {
                return false;
            }
            for &(j, a) in &r.coeffs {
                if a == 0.0 {
                    continue;
                }
                let (tmin, tmax) = (term(lo, hi, j, a, true), term(lo, hi, j, a, false));
                let rest_min = match (tmin.is_finite(), min_inf) {
                    (true, 0) => Some(min_f - tmin),
                    (false, 1) => Some(min_f),
                    _ => None,
                };
                let rest_max = match (tmax.is_finite(), max_inf) {
                    (true, 0) => Some(max_f - tmax),
                    (false, 1) => Some(max_f),
                    _ => None,
                };
                if let (Some(rm), true) = (rest_min, rhi.is_finite()) {
                    let b = (rhi - rm) / a;
                    if a > 0.0 {
                        hi[j] = hi[j].min(b)
                    } else {
                        lo[j] = lo[j].max(b)
                    }
                }
                if let (Some(rm), true) = (rest_max, rlo.is_finite()) {
                    let b = (rlo - rm) / a;
                    if a > 0.0 {
                        lo[j] = lo[j].max(b)
                    } else {
                        hi[j] = hi[j].min(b)
                    }
                }
            }
        }
        if (0..lo.len()).any(|j| lo[j] > hi[j] + SLACK * (1.0 + lo[j].abs())) {
            return false;
        }
    }
    true
}

pub fn solve_mip_bruteforce(model: &ConicModel, max_binaries: usize) -> Result<SolveResult> {
    model.validate()?;
    let bins = &model.binaries;
    if bins.len() > max_binaries {
        return Err(Error::Capacity(format!("{} binaries exceed the limit {max_binaries}", bins.len())));
    }
    let base = effective_bounds(model);
    let results: Vec<(u64, Result<SolveResult>)> = (0u64..1 << bins.len())
        .into_par_iter()
        .filter_map(|mask| {
            let (mut lo, mut hi) = base.clone();
            for (k, &b) in bins.iter().enumerate() {
                let v = (mask >> k & 1) as f64;
                if v < lo[b] || v > hi[b] {
                    return None;
                }
                lo[b] = v;
                hi[b] = v;
            }
            let fixed = (lo.clone(), hi.clone());
            if !propagate(model, &mut lo, &mut hi) {
                return None;
            }
            Some((mask, solve_with_bounds(model, &fixed, DEFAULT_TOL)))
        })
        .collect();
    let mut best: Option<SolveResult> = None;
    let mut stalled = false;
    for (_, r) in results {
        let r = r?;
        match r.status {
            Status::Optimal => {
                if best.as_ref().is_none_or(|b| r.objective < b.objective) {
                    best = Some(r);
                }
            }
            Status::Unbounded => return Ok(r),
            Status::IterationLimit => stalled = true,
            Status::Infeasible => {}
        }
    }
    Ok(best.unwrap_or(SolveResult {
        status: if stalled { Status::IterationLimit } else { Status::Infeasible },
        objective: f64::INFINITY,
        primal: vec![],
        kkt_residuals: KktResiduals::default(),
    }))
}

/// Solution file body: one `name=value` line per variable.
pub fn format_solution(model: &ConicModel, res: &SolveResult) -> String {
    let mut s = String::new();
    for (name, v) in model.names.iter().zip(&res.primal) {
        s.push_str(&format!("{name}={v:.16e}\n"));
    }
    s
}
