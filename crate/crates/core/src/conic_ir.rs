//! Solver-agnostic conic models, extended cut templates and the `.cqm` text format.
//!
//! A model has bounded variables, a linear objective, linear rows and rotated
//! cones `w'w <= u v` with `u, v >= 0`. The text format is line oriented:
//!
//! ```text
//! VERSION 1
//! VARS <n>           then one name per line
//! BOUNDS <n>         then `<lower> <upper>` per variable
//! BIN <k>            then one index per line
//! OBJ <k> <const>    then `<index> <coef>` per line
//! LIN <m>            then `<sense> <rhs> <k> <i>:<c> ...` per row, sense in <= = >=
//! RSOC <m>           then `<u> <v> <k> <w1> ... <wk>` per cone
//! ```
//!
//! Reals use 17 significant digits, `inf` and `-inf` for infinite bounds.
//! Lines starting with `#` are comments.

use serde::{Deserialize, Serialize};

use crate::core_types::Partition;
use crate::error::{input, Error, Result};
use crate::lifted_cuts::{sides, LiftedCut};
use crate::relaxation_solver::{solve_relaxation, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    fn token(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `w'w <= u v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsocBlock {
    pub u: usize,
    pub v: usize,
    pub w: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicModel {
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Vec<(usize, f64)>,
    pub obj_constant: f64,
    pub rows: Vec<LinearRow>,
    pub cones: Vec<RsocBlock>,
    pub binaries: Vec<usize>,
}

impl ConicModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        let i = self.add_var(name, 0.0, 1.0);
        self.binaries.push(i);
        i
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(LinearRow { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn add_rsoc(&mut self, u: usize, v: usize, w: Vec<usize>) -> usize {
        self.cones.push(RsocBlock { u, v, w });
        self.cones.len() - 1
    }

    /// Variable fixed at one, created on first use.
    pub fn one(&mut self) -> usize {
        let found =
            (0..self.num_vars()).find(|&i| self.names[i] == "one" && self.lower[i] == 1.0 && self.upper[i] == 1.0);
        found.unwrap_or_else(|| self.add_var("one", 1.0, 1.0))
    }

    /// New variable equal to `constant + Σ terms`.
    pub fn add_expr(&mut self, name: impl Into<String>, lower: f64, terms: &[(usize, f64)], constant: f64) -> usize {
        let v = self.add_var(name, lower, f64::INFINITY);
        let mut coeffs = vec![(v, 1.0)];
        coeffs.extend(terms.iter().map(|&(i, c)| (i, -c)));
        self.add_row(coeffs, Sense::Eq, constant);
        v
    }

    pub fn is_binary(&self, i: usize) -> bool {
        self.binaries.contains(&i)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let sem = |record: String, msg: &str| Err(Error::Semantic { record, msg: msg.to_string() });
        if self.lower.len() != n || self.upper.len() != n {
            return sem("BOUNDS".into(), "bound count differs from variable count");
        }
        for (i, name) in self.names.iter().enumerate() {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return sem(format!("VARS {i}"), "names must be nonempty without whitespace");
            }
            if self.lower[i].is_nan() || self.upper[i].is_nan() || self.lower[i] > self.upper[i] {
                return sem(format!("BOUNDS {i}"), "invalid bounds");
            }
        }
        for &b in &self.binaries {
            if b >= n {
                return sem(format!("BIN {b}"), "index out of range");
            }
        }
        if !self.obj_constant.is_finite() {
            return sem("OBJ".into(), "constant must be finite");
        }
        for &(i, c) in &self.objective {
            if i >= n || !c.is_finite() {
                return sem(format!("OBJ {i}"), "bad index or coefficient");
            }
        }
        for (k, r) in self.rows.iter().enumerate() {
            if r.coeffs.iter().any(|&(i, c)| i >= n || !c.is_finite()) || !r.rhs.is_finite() {
                return sem(format!("LIN {k}"), "bad index or coefficient");
            }
        }
        for (k, c) in self.cones.iter().enumerate() {
            if c.u >= n || c.v >= n || c.w.iter().any(|&i| i >= n) {
                return sem(format!("RSOC {k}"), "index out of range");
            }
            if self.lower[c.u] < 0.0 || self.lower[c.v] < 0.0 {
                return sem(format!("RSOC {k}"), "u and v need nonnegative lower bounds");
            }
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn export_model(model: &ConicModel) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let n = model.num_vars();
    writeln!(s, "VERSION 1").unwrap();
    writeln!(s, "VARS {n}").unwrap();
    for name in &model.names {
        writeln!(s, "{name}").unwrap();
    }
    writeln!(s, "BOUNDS {n}").unwrap();
    for i in 0..n {
        writeln!(s, "{} {}", num(model.lower[i]), num(model.upper[i])).unwrap();
    }
    writeln!(s, "BIN {}", model.binaries.len()).unwrap();
    for b in &model.binaries {
        writeln!(s, "{b}").unwrap();
    }
    writeln!(s, "OBJ {} {}", model.objective.len(), num(model.obj_constant)).unwrap();
    for &(i, c) in &model.objective {
        writeln!(s, "{i} {}", num(c)).unwrap();
    }
    writeln!(s, "LIN {}", model.rows.len()).unwrap();
    for r in &model.rows {
        write!(s, "{} {} {}", r.sense.token(), num(r.rhs), r.coeffs.len()).unwrap();
        for &(i, c) in &r.coeffs {
            write!(s, " {i}:{}", num(c)).unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "RSOC {}", model.cones.len()).unwrap();
    for c in &model.cones {
        write!(s, "{} {} {}", c.u, c.v, c.w.len()).unwrap();
        for w in &c.w {
            write!(s, " {w}").unwrap();
        }
        s.push('\n');
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines { inner: it.peekable(), last: 0 }
    }

    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((no, l)) => {
                self.last = no;
                Ok((no, l.split_whitespace().collect()))
            }
            None => Err(Error::Parse { line: self.last + 1, msg: "unexpected end of input".into() }),
        }
    }

    fn header(&mut self, key: &str, extra: usize) -> Result<(usize, Vec<&'a str>)> {
        let (no, toks) = self.next()?;
        if toks.first() != Some(&key) || toks.len() != 2 + extra {
            return Err(Error::Parse { line: no, msg: format!("expected `{key}` section header") });
        }
        let count = parse_usize(toks[1], no)?;
        Ok((count, toks[2..].to_vec()))
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("expected an index, got `{tok}`") })
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if !v.is_nan() => Ok(v),
        _ => Err(Error::Parse { line, msg: format!("expected a number, got `{tok}`") }),
    }
}

fn expect_len(toks: &[&str], len: usize, line: usize) -> Result<()> {
    if toks.len() != len {
        return Err(Error::Parse { line, msg: format!("expected {len} fields, got {}", toks.len()) });
    }
    Ok(())
}

pub fn import_model(text: &str) -> Result<ConicModel> {
    let mut lines = Lines::new(text);
    let (no, toks) = lines.next()?;
    if toks != ["VERSION", "1"] {
        return Err(Error::Parse { line: no, msg: "expected `VERSION 1`".into() });
    }
    let mut m = ConicModel::new();
    let (n, _) = lines.header("VARS", 0)?;
    for _ in 0..n {
        let (no, toks) = lines.next()?;
        expect_len(&toks, 1, no)?;
        m.names.push(toks[0].to_string());
    }
    let (nb, _) = lines.header("BOUNDS", 0)?;
    if nb != n {
        return Err(Error::Parse { line: lines.last, msg: "BOUNDS count differs from VARS count".into() });
    }
    for _ in 0..n {
        let (no, toks) = lines.next()?;
        expect_len(&toks, 2, no)?;
        m.lower.push(parse_f64(toks[0], no)?);
        m.upper.push(parse_f64(toks[1], no)?);
    }
    let (k, _) = lines.header("BIN", 0)?;
    for _ in 0..k {
        let (no, toks) = lines.next()?;
        expect_len(&toks, 1, no)?;
        m.binaries.push(parse_usize(toks[0], no)?);
    }
    let (k, rest) = lines.header("OBJ", 1)?;
    m.obj_constant = parse_f64(rest[0], lines.last)?;
    for _ in 0..k {
        let (no, toks) = lines.next()?;
        expect_len(&toks, 2, no)?;
        m.objective.push((parse_usize(toks[0], no)?, parse_f64(toks[1], no)?));
    }
    let (k, _) = lines.header("LIN", 0)?;
    for _ in 0..k {
        let (no, toks) = lines.next()?;
        if toks.len() < 3 {
            return Err(Error::Parse { line: no, msg: "row needs sense, rhs and count".into() });
        }
        let sense = match toks[0] {
            "<=" => Sense::Le,
            "=" => Sense::Eq,
            ">=" => Sense::Ge,
            t => return Err(Error::Parse { line: no, msg: format!("unknown sense `{t}`") }),
        };
        let rhs = parse_f64(toks[1], no)?;
        let cnt = parse_usize(toks[2], no)?;
        expect_len(&toks, 3 + cnt, no)?;
        let mut coeffs = Vec::with_capacity(cnt);
        for t in &toks[3..] {
            let (i, c) = t
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: no, msg: format!("expected `index:coef`, got `{t}`") })?;
            coeffs.push((parse_usize(i, no)?, parse_f64(c, no)?));
        }
        m.rows.push(LinearRow { coeffs, sense, rhs });
    }
    let (k, _) = lines.header("RSOC", 0)?;
    for _ in 0..k {
        let (no, toks) = lines.next()?;
        if toks.len() < 3 {
            return Err(Error::Parse { line: no, msg: "cone needs u, v and count".into() });
        }
        let u = parse_usize(toks[0], no)?;
        let v = parse_usize(toks[1], no)?;
        let cnt = parse_usize(toks[2], no)?;
        expect_len(&toks, 3 + cnt, no)?;
        let w = toks[3..].iter().map(|t| parse_usize(t, no)).collect::<Result<_>>()?;
        m.cones.push(RsocBlock { u, v, w });
    }
    if let Ok((no, _)) = lines.next() {
        return Err(Error::Parse { line: no, msg: "trailing content".into() });
    }
    m.validate()?;
    Ok(m)
}

/// One term `f_i y_i` of a rank-one row with its indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowEntry {
    pub y: usize,
    pub x: usize,
    pub f: f64,
}

/// A rank-one row `t >= (f'y)²` inside a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowContext {
    pub entries: Vec<RowEntry>,
    pub t: usize,
}

impl RowContext {
    /// Entries with nonzero coefficient, in order; cut indices refer to positions here.
    pub fn active(&self) -> Vec<RowEntry> {
        self.entries.iter().copied().filter(|e| e.f != 0.0).collect()
    }

    /// Sign partition of the active entries.
    pub fn partition(&self) -> Result<Partition> {
        let signs: Vec<bool> = self.active().iter().map(|e| e.f > 0.0).collect();
        Partition::from_signs(&signs)
    }
}

/// Variables and constraints added for one extended cut.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedCutBlock {
    pub cut: LiftedCut,
    pub lambda: Vec<usize>,
    pub mu: Vec<usize>,
    pub lambda0: Option<usize>,
    pub mu0: Option<usize>,
    pub zeta: Option<usize>,
    pub cones: Vec<usize>,
    pub rows: Vec<usize>,
}

fn check_cut(cut: &LiftedCut, p: &Partition) -> Result<()> {
    let (side, _) = sides(p, cut.sign);
    let mut all: Vec<usize> = cut.l.iter().chain(&cut.r).chain(&cut.u).copied().collect();
    all.sort_unstable();
    if all != side {
        return input("cut sets do not partition the signed side of the row");
    }
    Ok(())
}

pub fn emit_extended_cut(cut: &LiftedCut, row: &RowContext, model: &mut ConicModel) -> Result<ExtendedCutBlock> {
    let p = row.partition()?;
    check_cut(cut, &p)?;
    let act = row.active();
    let (_, opp) = sides(&p, cut.sign);
    let scaled = |i: usize| (act[i].y, act[i].f.abs());
    let first_row = model.rows.len();
    let tag = format!("c{}", model.cones.len());
    let mut blk = ExtendedCutBlock {
        cut: cut.clone(),
        lambda: Vec::new(),
        mu: Vec::new(),
        lambda0: None,
        mu0: None,
        zeta: None,
        cones: Vec::new(),
        rows: Vec::new(),
    };
    let general = !(opp.is_empty() && cut.u.is_empty());
    for &i in &cut.r {
        blk.mu.push(model.add_var(format!("{tag}_mu{i}"), 0.0, f64::INFINITY));
        if general {
            blk.lambda.push(model.add_var(format!("{tag}_lam{i}"), 0.0, f64::INFINITY));
        }
    }
    if general {
        blk.lambda0 = Some(model.add_var(format!("{tag}_lam0"), 0.0, f64::INFINITY));
        blk.mu0 = Some(model.add_var(format!("{tag}_mu0"), 0.0, f64::INFINITY));
        blk.zeta = Some(model.add_var(format!("{tag}_zeta"), 0.0, f64::INFINITY));
    }
    let mut splits = Vec::new();
    let mut ratio =
        |model: &mut ConicModel, k: &str, num: Vec<(usize, f64)>, num_c: f64, den: Vec<(usize, f64)>, den_c: f64| {
            let w = model.add_expr(format!("{tag}_w{k}"), f64::NEG_INFINITY, &num, num_c);
            let d = model.add_expr(format!("{tag}_d{k}"), 0.0, &den, den_c);
            let s = model.add_var(format!("{tag}_s{k}"), 0.0, f64::INFINITY);
            splits.push(s);
            model.add_rsoc(s, d, vec![w])
        };

    // y(L) − λ₀ over 1 − x(R) − x(U) + μ(R) + μ₀
    let mut num: Vec<(usize, f64)> = cut.l.iter().map(|&i| scaled(i)).collect();
    let mut den: Vec<(usize, f64)> = cut.r.iter().chain(&cut.u).map(|&i| (act[i].x, -1.0)).collect();
    den.extend(blk.mu.iter().map(|&m| (m, 1.0)));
    if let (Some(l0), Some(m0)) = (blk.lambda0, blk.mu0) {
        num.push((l0, -1.0));
        den.push((m0, 1.0));
    }
    blk.cones.push(ratio(model, "L", num, 0.0, den, 1.0));

    // (y_i − λ_i) over x_i − μ_i
    for (k, &i) in cut.r.iter().enumerate() {
        let mut num = vec![scaled(i)];
        if general {
            num.push((blk.lambda[k], -1.0));
        }
        let den = vec![(act[i].x, 1.0), (blk.mu[k], -1.0)];
        blk.cones.push(ratio(model, &format!("R{i}"), num, 0.0, den, 0.0));
    }

    // y(U) − y(opposite) + λ₀ + λ(R) + ζ over x(U) − μ₀
    if general {
        let mut num: Vec<(usize, f64)> = cut.u.iter().map(|&i| scaled(i)).collect();
        num.extend(opp.iter().map(|&i| (act[i].y, -act[i].f.abs())));
        num.extend(blk.lambda.iter().map(|&l| (l, 1.0)));
        num.push((blk.lambda0.unwrap(), 1.0));
        num.push((blk.zeta.unwrap(), 1.0));
        let mut den: Vec<(usize, f64)> = cut.u.iter().map(|&i| (act[i].x, 1.0)).collect();
        den.push((blk.mu0.unwrap(), -1.0));
        blk.cones.push(ratio(model, "U", num, 0.0, den, 0.0));
    }

    let mut epi = vec![(row.t, 1.0)];
    epi.extend(splits.iter().map(|&s| (s, -1.0)));
    model.add_row(epi, Sense::Ge, 0.0);
    blk.rows = (first_row..model.rows.len()).collect();
    Ok(blk)
}

/// Adds `t >= (f'y)² / min{1, e'x}` for the row's indicators.
pub fn emit_xf_cut(row: &RowContext, model: &mut ConicModel) -> Vec<usize> {
    let act = row.active();
    let terms: Vec<(usize, f64)> = act.iter().map(|e| (e.y, e.f)).collect();
    let sx: Vec<(usize, f64)> = act.iter().map(|e| (e.x, 1.0)).collect();
    let tag = format!("xf{}", model.cones.len());
    let q = model.add_expr(format!("{tag}_q"), f64::NEG_INFINITY, &terms, 0.0);
    let ex = model.add_expr(format!("{tag}_ex"), 0.0, &sx, 0.0);
    let one = model.one();
    vec![model.add_rsoc(row.t, one, vec![q]), model.add_rsoc(row.t, ex, vec![q])]
}

/// Inner minimum of the extended cut at a fixed point, solved as a small conic program.
pub fn eval_extended_min(x: &[f64], y: &[f64], cut: &LiftedCut, p: &Partition) -> Result<f64> {
    let n = p.n();
    if x.len() != n || y.len() != n {
        return input("point length does not match partition");
    }
    let mut m = ConicModel::new();
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let xi = m.add_var(format!("x{i}"), x[i], x[i]);
        let yi = m.add_var(format!("y{i}"), y[i], y[i]);
        let f = if p.is_plus(i) { 1.0 } else { -1.0 };
        entries.push(RowEntry { y: yi, x: xi, f });
    }
    let t = m.add_var("t", 0.0, f64::INFINITY);
    emit_extended_cut(cut, &RowContext { entries, t }, &mut m)?;
    m.objective = vec![(t, 1.0)];
    let res = solve_relaxation(&m, 1e-9)?;
    match res.status {
        Status::Optimal => Ok(res.objective),
        Status::Infeasible => Ok(f64::INFINITY),
        Status::IterationLimit | Status::Unbounded => Err(Error::Solver("inner minimum did not converge".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifted_cuts::Sign;

    fn sample() -> ConicModel {
        let mut m = ConicModel::new();
        let x = m.add_binary("x");
        let y = m.add_var("y", 0.0, f64::INFINITY);
        let p = m.add_var("p", 0.0, f64::INFINITY);
        m.add_row(vec![(y, 1.0), (x, -1.0)], Sense::Le, 0.0);
        m.add_rsoc(p, x, vec![y]);
        m.objective = vec![(p, 1.0), (y, -0.1)];
        m.obj_constant = 0.1 + 0.2;
        m
    }

    #[test]
    fn empty_model_text() {
        let t = export_model(&ConicModel::new());
        assert_eq!(t, "VERSION 1\nVARS 0\nBOUNDS 0\nBIN 0\nOBJ 0 0.0000000000000000e0\nLIN 0\nRSOC 0\n");
        assert_eq!(import_model(&t).unwrap(), ConicModel::new());
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let t = export_model(&m);
        assert_eq!(import_model(&t).unwrap(), m);
        assert_eq!(export_model(&import_model(&t).unwrap()), t);
        assert!(t.contains("RSOC 1\n2 0 1 1\n"));
    }

    #[test]
    fn parse_errors_have_lines() {
        let t = export_model(&sample()).replace("<=", "<>");
        match import_model(&t) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 16),
            other => panic!("{other:?}"),
        }
        let t = export_model(&sample()).replace("RSOC 1\n2 0 1 1", "RSOC 1\n9 0 1 1");
        assert!(matches!(import_model(&t), Err(Error::Semantic { .. })));
        assert!(matches!(import_model("VERSION 2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn positive_template_shapes() {
        let mut m = ConicModel::new();
        let entries: Vec<RowEntry> = (0..3)
            .map(|i| RowEntry { y: m.add_var(format!("y{i}"), 0.0, 1.0), x: m.add_binary(format!("x{i}")), f: 1.0 })
            .collect();
        let t = m.add_var("t", 0.0, f64::INFINITY);
        let row = RowContext { entries, t };
        let cut = LiftedCut { sign: Sign::Plus, l: vec![0, 1, 2], r: vec![], u: vec![] };
        let b = emit_extended_cut(&cut, &row, &mut m).unwrap();
        assert_eq!(b.cones.len(), 1);
        assert!(b.lambda0.is_none() && b.mu.is_empty());
        let cut = LiftedCut { sign: Sign::Plus, l: vec![], r: vec![0, 1, 2], u: vec![] };
        let b = emit_extended_cut(&cut, &row, &mut m).unwrap();
        assert_eq!((b.cones.len(), b.mu.len(), b.lambda.len()), (4, 3, 0));
        let bad = LiftedCut { sign: Sign::Plus, l: vec![0], r: vec![1], u: vec![] };
        assert!(emit_extended_cut(&bad, &row, &mut m).is_err());
        m.validate().unwrap();
    }

    #[test]
    fn general_template_shape() {
        let mut m = ConicModel::new();
        let entries = vec![
            RowEntry { y: m.add_var("y0", 0.0, 1.0), x: m.add_binary("x0"), f: 2.0 },
            RowEntry { y: m.add_var("y1", 0.0, 1.0), x: m.add_binary("x1"), f: 0.0 },
            RowEntry { y: m.add_var("y2", 0.0, 1.0), x: m.add_binary("x2"), f: -1.0 },
        ];
        let t = m.add_var("t", 0.0, f64::INFINITY);
        let row = RowContext { entries, t };
        assert_eq!(row.partition().unwrap(), Partition::new(2, vec![0], vec![1]).unwrap());
        let cut = LiftedCut { sign: Sign::Plus, l: vec![], r: vec![], u: vec![0] };
        let b = emit_extended_cut(&cut, &row, &mut m).unwrap();
        assert_eq!(b.cones.len(), 2);
        assert!(b.lambda0.is_some() && b.mu0.is_some() && b.zeta.is_some());
    }

    #[test]
    fn inner_minimum_matches_closed_form() {
        let p = Partition::positive(3);
        let (x, y) = ([0.01, 0.6, 0.3], [1.0, 0.5, 0.2]);
        let cut = LiftedCut { sign: Sign::Plus, l: vec![], r: vec![0, 1, 2], u: vec![] };
        let v = eval_extended_min(&x, &y, &cut, &p).unwrap();
        let expect = 1.0 / 0.01 + 0.25 / 0.6 + 0.04 / 0.3;
        assert!((v - expect).abs() < 1e-5 * expect, "{v}");
    }

    #[test]
    fn inner_minimum_integer_cases() {
        let p = Partition::new(2, vec![0], vec![1]).unwrap();
        let cut = LiftedCut { sign: Sign::Plus, l: vec![], r: vec![], u: vec![0] };
        let v = eval_extended_min(&[1.0, 1.0], &[0.2, 0.5], &cut, &p).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
        let v = eval_extended_min(&[1.0, 1.0], &[0.7, 0.2], &cut, &p).unwrap();
        assert!((v - 0.25).abs() < 1e-6, "{v}");
    }
}
