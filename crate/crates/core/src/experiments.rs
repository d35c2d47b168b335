//! Portfolio instances with fixed charges, their three formulations and the cut loop.
//!
//! Random draws use ChaCha8 seeded from the instance seed, with one stream per
//! parameter block: 0 for E (mask draw then value draw per entry, row-major),
//! 1 for G, 2 for d and 3 for b.

use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conic_ir::{emit_extended_cut, ConicModel, RowContext, RowEntry, Sense};
use crate::core_types::FractionalPoint;
use crate::error::{input, Error, Result};
use crate::lifted_cuts::{separate, LiftedCut};
use crate::relaxation_solver::{solve_mip_bruteforce, solve_relaxation, Status, DEFAULT_TOL};

/// How fixed costs scale with the number of assets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedCostScale {
    /// a_i = α (e'b) / n
    #[default]
    #[serde(rename = "n")]
    PerAsset,
    /// a_i = α (e'b) / n²
    #[serde(rename = "n2")]
    PerAssetSquared,
}

impl FixedCostScale {
    fn is_default(&self) -> bool {
        *self == FixedCostScale::PerAsset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioInstance {
    pub n: usize,
    pub r: usize,
    pub rho: f64,
    pub delta: f64,
    pub alpha_fc: f64,
    pub seed: u64,
    /// Row-major `n × r`.
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "FixedCostScale::is_default")]
    pub fixed_cost: FixedCostScale,
}

impl PortfolioInstance {
    pub fn f_at(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.r + j]
    }

    /// Feasible iff some single asset meets the return target after its fixed cost.
    pub fn is_feasible(&self) -> bool {
        (0..self.n).any(|i| self.b[i] - self.a[i] >= self.beta)
    }

    /// False when every factor loading is zero; then d = 0 and the optimum is 0.
    pub fn has_risk(&self) -> bool {
        self.f.iter().any(|&v| v != 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || self.r == 0 || self.r > n {
            return input("instance needs n >= r >= 1");
        }
        if self.f.len() != n * self.r || self.d.len() != n || self.b.len() != n || self.a.len() != n {
            return input("instance arrays have wrong lengths");
        }
        let all = self.f.iter().chain(&self.d).chain(&self.b).chain(&self.a).chain([&self.beta]);
        if all.clone().any(|v| !v.is_finite()) {
            return input("instance contains non-finite values");
        }
        if self.d.iter().chain(&self.b).chain(&self.a).any(|&v| v < 0.0) {
            return input("d, b and a must be nonnegative");
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: PortfolioInstance =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("instance JSON: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }
}

pub fn generate_instance(
    n: usize,
    r: usize,
    rho: f64,
    delta: f64,
    alpha_fc: f64,
    seed: u64,
) -> Result<PortfolioInstance> {
    generate_instance_scaled(n, r, rho, delta, alpha_fc, seed, FixedCostScale::PerAsset)
}

pub fn generate_instance_scaled(
    n: usize,
    r: usize,
    rho: f64,
    delta: f64,
    alpha_fc: f64,
    seed: u64,
    fixed_cost: FixedCostScale,
) -> Result<PortfolioInstance> {
    if n == 0 || r == 0 || r > n {
        return input("generator needs n >= r >= 1");
    }
    if !(rho.is_finite() && rho <= 1.0) {
        return input("rho must be finite and at most 1");
    }
    if !(delta.is_finite() && delta >= 0.0) || !(alpha_fc.is_finite() && alpha_fc >= 0.0) {
        return input("delta and alpha must be finite and nonnegative");
    }
    let stream = |k: u64| {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        g.set_stream(k);
        g
    };
    let mut ge = stream(0);
    let e: Vec<f64> = (0..n * r)
        .map(|_| {
            let zero = ge.gen::<f64>() < 0.8;
            let v = ge.gen::<f64>();
            if zero {
                0.0
            } else {
                v
            }
        })
        .collect();
    let mut gg = stream(1);
    let g: Vec<f64> = (0..r * r).map(|_| rho + (1.0 - rho) * gg.gen::<f64>()).collect();
    let mut f = vec![0.0; n * r];
    for i in 0..n {
        for j in 0..r {
            f[i * r + j] = (0..r).map(|k| e[i * r + k] * g[k * r + j]).sum();
        }
    }
    let ff: Vec<f64> = (0..n).map(|i| (0..r).map(|j| f[i * r + j].powi(2)).sum()).collect();
    let v = ff.iter().sum::<f64>() / n as f64;
    let mut gd = stream(2);
    let d: Vec<f64> = (0..n).map(|_| (v * delta * gd.gen::<f64>()).sqrt()).collect();
    let mut gb = stream(3);
    let b: Vec<f64> = (0..n).map(|i| (0.25 + 0.5 * gb.gen::<f64>()) * (ff[i] + d[i] * d[i]).sqrt()).collect();
    let eb: f64 = b.iter().sum();
    let denom = match fixed_cost {
        FixedCostScale::PerAsset => n as f64,
        FixedCostScale::PerAssetSquared => (n * n) as f64,
    };
    let a = vec![alpha_fc * eb / denom; n];
    Ok(PortfolioInstance { n, r, rho, delta, alpha_fc, seed, f, d, b, a, beta: eb / n as f64, fixed_cost })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Basic,
    Perspective,
    Supermodular,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Method::Basic),
            "persp" | "perspective" => Ok(Method::Perspective),
            "super" | "supermodular" => Ok(Method::Supermodular),
            _ => input(format!("unknown method `{s}`; expected basic, persp or super")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Basic => "Basic",
            Method::Perspective => "Perspective",
            Method::Supermodular => "Supermodular",
        })
    }
}

/// A model with the handles needed to add cuts.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub method: Method,
    pub model: ConicModel,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// One rank-one row per factor; only populated for the supermodular model.
    pub rows: Vec<RowContext>,
}

pub fn build_formulation(inst: &PortfolioInstance, method: Method) -> Formulation {
    let (n, r) = (inst.n, inst.r);
    let mut m = ConicModel::new();
    let x: Vec<usize> = (0..n).map(|i| m.add_binary(format!("x{i}"))).collect();
    let y: Vec<usize> = (0..n).map(|i| m.add_var(format!("y{i}"), 0.0, f64::INFINITY)).collect();
    m.add_row(y.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
    let mut ret: Vec<(usize, f64)> = (0..n).map(|i| (y[i], inst.b[i])).collect();
    ret.extend((0..n).map(|i| (x[i], -inst.a[i])));
    m.add_row(ret, Sense::Ge, inst.beta);
    for i in 0..n {
        m.add_row(vec![(y[i], 1.0), (x[i], -1.0)], Sense::Le, 0.0);
    }
    let factor = |m: &mut ConicModel, j: usize| {
        let terms: Vec<(usize, f64)> =
            (0..n).filter(|&i| inst.f_at(i, j) != 0.0).map(|i| (y[i], inst.f_at(i, j))).collect();
        m.add_expr(format!("q{j}"), f64::NEG_INFINITY, &terms, 0.0)
    };
    let mut objective = Vec::new();
    let mut rows = Vec::new();
    match method {
        Method::Basic | Method::Perspective => {
            let q: Vec<usize> = (0..r).map(|j| factor(&mut m, j)).collect();
            let one = m.one();
            let tq = m.add_var("tq", 0.0, f64::INFINITY);
            m.add_rsoc(tq, one, q);
            objective.push((tq, 1.0));
        }
        Method::Supermodular => {
            for j in 0..r {
                let q = factor(&mut m, j);
                let one = m.one();
                let t = m.add_var(format!("t{j}"), 0.0, f64::INFINITY);
                m.add_rsoc(t, one, vec![q]);
                objective.push((t, 1.0));
                let entries = (0..n).map(|i| RowEntry { y: y[i], x: x[i], f: inst.f_at(i, j) }).collect();
                rows.push(RowContext { entries, t });
            }
        }
    }
    match method {
        Method::Basic => {
            let z: Vec<usize> =
                (0..n).map(|i| m.add_expr(format!("z{i}"), f64::NEG_INFINITY, &[(y[i], inst.d[i])], 0.0)).collect();
            let one = m.one();
            let td = m.add_var("td", 0.0, f64::INFINITY);
            m.add_rsoc(td, one, z);
            objective.push((td, 1.0));
        }
        Method::Perspective | Method::Supermodular => {
            for i in 0..n {
                let p = m.add_var(format!("p{i}"), 0.0, f64::INFINITY);
                m.add_rsoc(p, x[i], vec![y[i]]);
                objective.push((p, inst.d[i] * inst.d[i]));
            }
        }
    }
    m.objective = objective;
    Formulation { method, model: m, x, y, rows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub value: f64,
    pub cuts_added: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutLoopOutcome {
    pub history: Vec<RoundRecord>,
    pub cuts_added: usize,
    pub value: f64,
    pub time_s: f64,
}

/// Solve, separate every rank-one row, add violated cuts, repeat.
///
/// At most `r` cuts per round and `3r` in total.
pub fn cut_loop(form: &mut Formulation, max_rounds: usize) -> Result<CutLoopOutcome> {
    if form.method != Method::Supermodular {
        return input("the cut loop needs the supermodular formulation");
    }
    let r = form.rows.len();
    let cap = 3 * r;
    let mut added: HashSet<(usize, LiftedCut)> = HashSet::new();
    let mut history = Vec::new();
    let mut elapsed = 0.0;
    let mut round = 0;
    loop {
        let start = Instant::now();
        let res = solve_relaxation(&form.model, DEFAULT_TOL)?;
        if res.status != Status::Optimal {
            return Err(Error::Solver(format!("round {round}: relaxation ended with {:?}", res.status)));
        }
        let mut new_cuts = Vec::new();
        if round < max_rounds && added.len() < cap {
            for (j, row) in form.rows.iter().enumerate() {
                let act = row.active();
                if act.is_empty() {
                    continue;
                }
                let point = FractionalPoint {
                    x: act.iter().map(|e| res.primal[e.x].clamp(0.0, 1.0)).collect(),
                    y: act.iter().map(|e| (e.f.abs() * res.primal[e.y]).max(0.0)).collect(),
                    t: res.primal[row.t],
                };
                let p = row.partition()?;
                let sep = separate(&point, &p);
                if let (true, Some(cut)) = (sep.violated, sep.cut) {
                    if !added.contains(&(j, cut.clone())) && new_cuts.len() < r && added.len() + new_cuts.len() < cap {
                        new_cuts.push((j, cut));
                    }
                }
            }
        }
        elapsed += start.elapsed().as_secs_f64();
        history.push(RoundRecord { round, value: res.objective, cuts_added: new_cuts.len() });
        if new_cuts.is_empty() {
            return Ok(CutLoopOutcome { value: res.objective, cuts_added: added.len(), history, time_s: elapsed });
        }
        for (j, cut) in new_cuts {
            emit_extended_cut(&cut, &form.rows[j], &mut form.model)?;
            added.insert((j, cut));
        }
        round += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub method: Method,
    pub val: f64,
    pub gap_pct: f64,
    pub imp_pct: Option<f64>,
    pub time_s: f64,
    pub cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub opt: f64,
    pub rows: Vec<ExperimentRow>,
    pub history: Vec<RoundRecord>,
}

pub fn gap_pct(opt: f64, val: f64) -> f64 {
    if opt == 0.0 {
        0.0
    } else {
        (opt - val) / opt.abs() * 100.0
    }
}

/// Optimal value by support enumeration on the basic model.
pub fn optimum(inst: &PortfolioInstance, max_binaries: usize) -> Result<f64> {
    let form = build_formulation(inst, Method::Basic);
    let res = solve_mip_bruteforce(&form.model, max_binaries)?;
    match res.status {
        Status::Optimal => Ok(res.objective),
        Status::Infeasible => input("instance is infeasible"),
        s => Err(Error::Solver(format!("support enumeration ended with {s:?}"))),
    }
}

/// Runs all three methods against the enumerated optimum.
pub fn run_experiment(inst: &PortfolioInstance, max_binaries: usize, max_rounds: usize) -> Result<ExperimentResult> {
    let opt = optimum(inst, max_binaries)?;
    let mut raw = Vec::new();
    let mut history = Vec::new();
    for method in [Method::Basic, Method::Perspective] {
        let form = build_formulation(inst, method);
        let start = Instant::now();
        let res = solve_relaxation(&form.model, DEFAULT_TOL)?;
        if res.status != Status::Optimal {
            return Err(Error::Solver(format!("{method} relaxation ended with {:?}", res.status)));
        }
        raw.push((method, res.objective, start.elapsed().as_secs_f64(), 0));
    }
    let mut form = build_formulation(inst, Method::Supermodular);
    let out = cut_loop(&mut form, max_rounds)?;
    raw.push((Method::Supermodular, out.value, out.time_s, out.cuts_added));
    history.extend(out.history);
    Ok(ExperimentResult { opt, rows: make_rows(opt, &raw), history })
}

/// Attach gaps and the improvement of the supermodular over the perspective gap.
pub fn make_rows(opt: f64, raw: &[(Method, f64, f64, usize)]) -> Vec<ExperimentRow> {
    let gap_p = raw.iter().find(|r| r.0 == Method::Perspective).map(|r| gap_pct(opt, r.1));
    raw.iter()
        .map(|&(method, val, time_s, cuts)| {
            let gap = gap_pct(opt, val);
            let imp_pct = match (method, gap_p) {
                (Method::Supermodular, Some(gp)) if gp > 0.0 => Some((gp - gap) / gp * 100.0),
                _ => None,
            };
            ExperimentRow { method, val, gap_pct: gap, imp_pct, time_s, cuts }
        })
        .collect()
}

pub const CSV_HEADER: &str = "method,val,gap_pct,imp_pct,time_s,cuts";

/// One CSV line per row, values scaled so that the optimum is 100.
pub fn report_lines(opt: f64, rows: &[ExperimentRow]) -> Vec<String> {
    let scale = if opt != 0.0 { 100.0 / opt.abs() } else { 1.0 };
    rows.iter()
        .map(|r| {
            let imp = r.imp_pct.map_or("n/a".to_string(), |v| format!("{v:.4}"));
            format!("{},{:.6},{:.4},{},{:.6},{}", r.method, r.val * scale, r.gap_pct, imp, r.time_s, r.cuts)
        })
        .collect()
}

pub fn report(_inst: &PortfolioInstance, opt: f64, rows: &[ExperimentRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for l in report_lines(opt, rows) {
        s.push_str(&l);
        s.push('\n');
    }
    s
}

fn default_n() -> usize {
    12
}
fn default_delta() -> f64 {
    0.01
}
fn default_instances() -> usize {
    10
}
fn default_max_binaries() -> usize {
    16
}
fn default_max_rounds() -> usize {
    100
}
fn default_seed_scan() -> u64 {
    1000
}

/// Grid of generator parameters; every cell gets the first `instances`
/// feasible seeds with nonzero risk, counting up from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    pub r: Vec<usize>,
    pub rho: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub alpha_fc: Vec<f64>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fixed_cost: FixedCostScale,
    #[serde(default = "default_max_binaries")]
    pub max_binaries: usize,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_seed_scan")]
    pub seed_scan: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shortfall {
    pub r: usize,
    pub rho: f64,
    pub alpha_fc: f64,
    pub found: usize,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub cases: Vec<(PortfolioInstance, ExperimentResult)>,
    pub shortfalls: Vec<Shortfall>,
}

/// Feasible instances for every cell, plus cells that ran out of seeds.
pub fn batch_instances(cfg: &BatchConfig) -> Result<(Vec<PortfolioInstance>, Vec<Shortfall>)> {
    let mut out = Vec::new();
    let mut short = Vec::new();
    for &r in &cfg.r {
        for &rho in &cfg.rho {
            for &alpha_fc in &cfg.alpha_fc {
                let mut found = 0;
                for seed in cfg.seed..cfg.seed.saturating_add(cfg.seed_scan) {
                    if found == cfg.instances {
                        break;
                    }
                    let inst = generate_instance_scaled(cfg.n, r, rho, cfg.delta, alpha_fc, seed, cfg.fixed_cost)?;
                    if inst.is_feasible() && inst.has_risk() {
                        out.push(inst);
                        found += 1;
                    }
                }
                if found < cfg.instances {
                    short.push(Shortfall { r, rho, alpha_fc, found });
                }
            }
        }
    }
    Ok((out, short))
}

/// Runs every instance of the grid on `jobs` worker threads.
pub fn run_batch(cfg: &BatchConfig, jobs: usize) -> Result<BatchOutcome> {
    use rayon::prelude::*;
    let (insts, shortfalls) = batch_instances(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    let results: Vec<Result<ExperimentResult>> =
        pool.install(|| insts.par_iter().map(|i| run_experiment(i, cfg.max_binaries, cfg.max_rounds)).collect());
    let mut cases = Vec::with_capacity(insts.len());
    for (inst, res) in insts.into_iter().zip(results) {
        cases.push((inst, res?));
    }
    Ok(BatchOutcome { cases, shortfalls })
}

pub const BATCH_CSV_HEADER: &str = "n,r,rho,delta,alpha_fc,seed,opt,method,val,gap_pct,imp_pct,time_s,cuts";

pub fn batch_csv(cases: &[(PortfolioInstance, ExperimentResult)]) -> String {
    let mut s = String::from(BATCH_CSV_HEADER);
    s.push('\n');
    for (inst, res) in cases {
        for line in report_lines(res.opt, &res.rows) {
            let head = format!(
                "{},{},{},{},{},{},{:.10e}",
                inst.n, inst.r, inst.rho, inst.delta, inst.alpha_fc, inst.seed, res.opt
            );
            s.push_str(&format!("{head},{line}\n"));
        }
    }
    s
}
