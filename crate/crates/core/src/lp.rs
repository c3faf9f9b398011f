//! Dense two-phase simplex for small and medium linear programs.
//!
//! Programs are stated as "maximize c^T v subject to rows and bounds". Rows
//! are stored sparsely; the working tableau is dense. Entering columns follow
//! the largest reduced cost with lowest-index tie-break, switching to Bland's
//! rule while pivots stay degenerate, so results are deterministic.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-7;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn tag(self) -> &'static str {
        match self {
            Relation::Le => "le",
            Relation::Ge => "ge",
            Relation::Eq => "eq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Affine function `constant + sum coeff_j v_j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearTerm {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearTerm {
    pub fn constant(c: f64) -> Self {
        Self { coeffs: Vec::new(), constant: c }
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|&(j, a)| a * v[j]).sum::<f64>()
    }
}

impl LinearProgram {
    /// `n` variables, zero objective, bounds `[0, +inf)`.
    pub fn new(n: usize) -> Self {
        Self { objective: vec![0.0; n], rows: Vec::new(), lower: vec![0.0; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Appends a variable and returns its index.
    pub fn add_var(&mut self, lo: f64, hi: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lo);
        self.upper.push(hi);
        self.objective.len() - 1
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<()> {
        if c.len() != self.n_vars() {
            return Err(Error::DimensionMismatch("objective length".into()));
        }
        self.objective = c;
        Ok(())
    }

    pub fn set_cost(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn add_dense_row(&mut self, coeffs: &[f64], relation: Relation, rhs: f64) {
        let sparse = coeffs.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| (j, *a)).collect();
        self.add_row(sparse, relation, rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Lp("non-finite objective coefficient".into()));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY || lo > hi {
                return Err(Error::Lp(format!("invalid bounds for variable {j}: [{lo}, {hi}]")));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(Error::Lp(format!("row {i} has non-finite rhs")));
            }
            for &(j, a) in &r.coeffs {
                if j >= n {
                    return Err(Error::Lp(format!("row {i} references variable {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(Error::Lp(format!("row {i} has non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `v`.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * v[j]).sum();
            let viol = match r.relation {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (j, &x) in v.iter().enumerate() {
            worst = worst.max(self.lower[j] - x).max(x - self.upper[j]);
        }
        worst
    }

    pub fn objective_value(&self, v: &[f64]) -> f64 {
        self.objective.iter().zip(v).map(|(c, x)| c * x).sum()
    }

    /// Plain-text dump: a header line, `max` costs, one `bnd` line per
    /// variable, then one `le|ge|eq` line per row with dense coefficients
    /// followed by the right-hand side.
    pub fn to_text(&self) -> String {
        let n = self.n_vars();
        let mut s = String::new();
        let _ = writeln!(s, "lp {n} {}", self.rows.len());
        s.push_str("max");
        for c in &self.objective {
            let _ = write!(s, " {c:e}");
        }
        s.push('\n');
        for j in 0..n {
            let _ = writeln!(s, "bnd {j} {:e} {:e}", self.lower[j], self.upper[j]);
        }
        for r in &self.rows {
            let mut dense = vec![0.0; n];
            for &(j, a) in &r.coeffs {
                dense[j] += a;
            }
            s.push_str(r.relation.tag());
            for a in dense {
                let _ = write!(s, " {a:e}");
            }
            let _ = writeln!(s, " {:e}", r.rhs);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Lp(format!("line {}: {msg}", line + 1));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| Error::Lp("empty LP text".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[0] != "lp" {
            return Err(bad(ln, "expected `lp <vars> <rows>`"));
        }
        let n: usize = h[1].parse().map_err(|_| bad(ln, "bad variable count"))?;
        let mut lp = LinearProgram::new(n);
        let nums = |ln: usize, toks: &[&str]| -> Result<Vec<f64>> {
            toks.iter().map(|t| t.parse::<f64>().map_err(|_| bad(ln, "bad number"))).collect()
        };
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "max" => {
                    let c = nums(ln, &toks[1..])?;
                    lp.set_objective(c).map_err(|_| bad(ln, "objective length"))?;
                }
                "bnd" => {
                    if toks.len() != 4 {
                        return Err(bad(ln, "expected `bnd j lo hi`"));
                    }
                    let j: usize = toks[1].parse().map_err(|_| bad(ln, "bad index"))?;
                    let v = nums(ln, &toks[2..])?;
                    if j >= n {
                        return Err(bad(ln, "index out of range"));
                    }
                    lp.set_bounds(j, v[0], v[1]);
                }
                tag @ ("le" | "ge" | "eq") => {
                    let v = nums(ln, &toks[1..])?;
                    if v.len() != n + 1 {
                        return Err(bad(ln, "row length"));
                    }
                    let rel = match tag {
                        "le" => Relation::Le,
                        "ge" => Relation::Ge,
                        _ => Relation::Eq,
                    };
                    lp.add_dense_row(&v[..n], rel, v[n]);
                }
                _ => return Err(bad(ln, "unknown record")),
            }
        }
        lp.validate()?;
        Ok(lp)
    }
}

/// Epigraph lift of `max min_t term_t(v)`: appends a free variable `tau`,
/// sets the objective to `tau` and adds `tau <= term_t` for every term.
/// Returns the program and the index of `tau`.
pub fn maxmin_epigraph(terms: &[LinearTerm], base: LinearProgram) -> Result<(LinearProgram, usize)> {
    if terms.is_empty() {
        return Err(Error::Empty("max-min terms"));
    }
    let mut lp = base;
    lp.objective.iter_mut().for_each(|c| *c = 0.0);
    let tau = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 1.0);
    for t in terms {
        let mut coeffs: Vec<(usize, f64)> = t.coeffs.iter().map(|&(j, a)| (j, -a)).collect();
        coeffs.push((tau, 1.0));
        lp.add_row(coeffs, Relation::Le, t.constant);
    }
    Ok((lp, tau))
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lexicographic(lp, None)
}

/// Maximises the program's objective, then, among its optimal solutions,
/// maximises `secondary` (same variable indexing).
pub fn solve_lexicographic(lp: &LinearProgram, secondary: Option<&[f64]>) -> Result<LpSolution> {
    lp.validate()?;
    if let Some(s) = secondary {
        if s.len() != lp.n_vars() || s.iter().any(|c| !c.is_finite()) {
            return Err(Error::Lp("secondary objective malformed".into()));
        }
    }
    let std = StandardForm::build(lp);
    let mut tab = Tableau::new(&std);
    if !tab.phase_one()? {
        return Ok(LpSolution { status: LpStatus::Infeasible, x: vec![0.0; lp.n_vars()], objective: f64::NAN });
    }
    tab.load_objective(&std.map_objective(&lp.objective, true));
    if !tab.optimize()? {
        return Ok(LpSolution { status: LpStatus::Unbounded, x: vec![0.0; lp.n_vars()], objective: f64::INFINITY });
    }
    if let Some(sec) = secondary {
        tab.freeze_suboptimal();
        tab.load_objective(&std.map_objective(sec, false));
        // The optimal face is bounded when the primary optimum is finite
        // only if its recession cone is; treat an unbounded secondary as a
        // request to stay at the primary vertex.
        let snapshot = tab.clone();
        if !tab.optimize()? {
            tab = snapshot;
        }
    }
    let x = std.recover(&tab.primal());
    let objective = lp.objective_value(&x);
    Ok(LpSolution { status: LpStatus::Optimal, x, objective })
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// v = offset + col
    Shift { col: usize, offset: f64 },
    /// v = offset - col
    Flip { col: usize, offset: f64 },
    /// v = pos - neg
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    n_struct: usize,
    maps: Vec<VarMap>,
    /// Rows over structural columns with nonnegative rhs.
    rows: Vec<(Vec<(usize, f64)>, Relation, f64)>,
    obj_scale: f64,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut maps = Vec::with_capacity(lp.n_vars());
        let mut n_struct = 0;
        let mut bound_rows = Vec::new();
        for j in 0..lp.n_vars() {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            if lo.is_finite() {
                maps.push(VarMap::Shift { col: n_struct, offset: lo });
                if hi.is_finite() {
                    bound_rows.push((vec![(n_struct, 1.0)], Relation::Le, hi - lo));
                }
                n_struct += 1;
            } else if hi.is_finite() {
                maps.push(VarMap::Flip { col: n_struct, offset: hi });
                n_struct += 1;
            } else {
                maps.push(VarMap::Split { pos: n_struct, neg: n_struct + 1 });
                n_struct += 2;
            }
        }
        let mut rows = Vec::with_capacity(lp.rows.len() + bound_rows.len());
        for r in &lp.rows {
            let mut rhs = r.rhs;
            let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(r.coeffs.len());
            for &(j, a) in &r.coeffs {
                match maps[j] {
                    VarMap::Shift { col, offset } => {
                        rhs -= a * offset;
                        coeffs.push((col, a));
                    }
                    VarMap::Flip { col, offset } => {
                        rhs -= a * offset;
                        coeffs.push((col, -a));
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs.push((pos, a));
                        coeffs.push((neg, -a));
                    }
                }
            }
            coeffs.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
            for (c, a) in coeffs {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += a,
                    _ => merged.push((c, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            let scale = merged.iter().fold(0.0f64, |m, &(_, a)| m.max(a.abs()));
            let mut rel = r.relation;
            if scale > 0.0 {
                merged.iter_mut().for_each(|(_, a)| *a /= scale);
                rhs /= scale;
            }
            if rhs < 0.0 {
                merged.iter_mut().for_each(|(_, a)| *a = -*a);
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push((merged, rel, rhs));
        }
        rows.extend(bound_rows);
        let obj_scale = lp.objective.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Self { n_struct, maps, rows, obj_scale: if obj_scale > 0.0 { obj_scale } else { 1.0 } }
    }

    fn map_objective(&self, c: &[f64], scaled: bool) -> Vec<f64> {
        let s =
            if scaled { self.obj_scale } else { c.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(f64::MIN_POSITIVE) };
        let mut out = vec![0.0; self.n_struct];
        for (j, m) in self.maps.iter().enumerate() {
            let cj = c[j] / s;
            match *m {
                VarMap::Shift { col, .. } => out[col] += cj,
                VarMap::Flip { col, .. } => out[col] -= cj,
                VarMap::Split { pos, neg } => {
                    out[pos] += cj;
                    out[neg] -= cj;
                }
            }
        }
        out
    }

    fn recover(&self, cols: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, offset } => offset + cols[col],
                VarMap::Flip { col, offset } => offset - cols[col],
                VarMap::Split { pos, neg } => cols[pos] - cols[neg],
            })
            .collect()
    }
}

#[derive(Clone)]
struct Tableau {
    m: usize,
    /// structural + slack/surplus + artificial columns
    n: usize,
    n_struct: usize,
    first_art: usize,
    width: usize,
    /// row-major, `width = n + 1`, last entry is the rhs
    t: Vec<f64>,
    basis: Vec<usize>,
    /// reduced costs for the current objective (maximisation), plus value
    d: Vec<f64>,
    value: f64,
    blocked: Vec<bool>,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let m = sf.rows.len();
        let n_slack = sf.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = sf.rows.iter().filter(|r| r.1 != Relation::Le).count();
        let n = sf.n_struct + n_slack + n_art;
        let width = n + 1;
        let mut t = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let first_art = sf.n_struct + n_slack;
        let (mut slack, mut art) = (sf.n_struct, first_art);
        for (i, (coeffs, rel, rhs)) in sf.rows.iter().enumerate() {
            let row = &mut t[i * width..(i + 1) * width];
            for &(c, a) in coeffs {
                row[c] = a;
            }
            row[n] = *rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Self {
            m,
            n,
            n_struct: sf.n_struct,
            first_art,
            width,
            t,
            basis,
            d: vec![0.0; n],
            value: 0.0,
            blocked: vec![false; n],
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.n]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    /// Returns false when the program is infeasible.
    fn phase_one(&mut self) -> Result<bool> {
        if self.first_art == self.n {
            return Ok(true);
        }
        let mut cost = vec![0.0; self.n];
        cost[self.first_art..].iter_mut().for_each(|c| *c = -1.0);
        self.load_raw_costs(&cost);
        self.optimize()?;
        let scale = (0..self.m).fold(1.0f64, |s, i| s.max(self.rhs(i)));
        if self.value < -FEAS_TOL * scale {
            return Ok(false);
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..self.m {
            if self.basis[i] >= self.first_art {
                let pick = (0..self.first_art).find(|&j| self.at(i, j).abs() > PIVOT_TOL);
                if let Some(j) = pick {
                    self.pivot(i, j);
                }
            }
        }
        for j in self.first_art..self.n {
            self.blocked[j] = true;
        }
        Ok(true)
    }

    /// Installs reduced costs for a cost vector over structural columns.
    fn load_objective(&mut self, c_struct: &[f64]) {
        let mut cost = vec![0.0; self.n];
        cost[..self.n_struct].copy_from_slice(c_struct);
        self.load_raw_costs(&cost);
    }

    fn load_raw_costs(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        self.value = 0.0;
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.width..(i + 1) * self.width];
                for (dj, a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
                self.value += cb * row[self.n];
            }
        }
    }

    /// Columns priced strictly unfavourable at an optimum must stay nonbasic
    /// to remain on the optimal face.
    fn freeze_suboptimal(&mut self) {
        for j in 0..self.n {
            if self.d[j] < -OPT_TOL {
                self.blocked[j] = true;
            }
        }
    }

    /// Runs simplex pivots on the current objective. Returns false if unbounded.
    fn optimize(&mut self) -> Result<bool> {
        let cap = 100_000 + 50 * (self.m + self.n);
        let mut degenerate_run = 0usize;
        for _ in 0..cap {
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let Some(q) = self.entering(bland) else {
                return Ok(true);
            };
            let Some(r) = self.leaving(q) else {
                return Ok(false);
            };
            if self.rhs(r) <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q);
        }
        Err(Error::Lp("simplex iteration limit reached".into()))
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if self.blocked[j] || self.d[j] <= OPT_TOL {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.map_or(true, |(_, v)| self.d[j] > v) {
                best = Some((j, self.d[j]));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let a = self.at(i, q);
            if a > PIVOT_TOL {
                let ratio = self.rhs(i) / a;
                match best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let inv = 1.0 / self.t[r * w + q];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            row.iter_mut().for_each(|a| *a *= inv);
            row[q] = 1.0;
        }
        let nz: Vec<usize> = (0..w).filter(|&j| self.t[r * w + j] != 0.0).collect();
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.t[r * w + j]).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (&j, &p) in nz.iter().zip(&pivot_row) {
                row[j] -= f * p;
            }
            row[q] = 0.0;
            if row[w - 1] < 0.0 && row[w - 1] > -1e-11 {
                row[w - 1] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (&j, &p) in nz.iter().zip(&pivot_row) {
                if j < self.n {
                    self.d[j] -= f * p;
                }
            }
            self.d[q] = 0.0;
            self.value += f * self.t[r * w + self.n];
        }
        self.basis[r] = q;
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_struct];
        for i in 0..self.m {
            if self.basis[i] < self.n_struct {
                x[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_bounded_variable() {
        let mut lp = LinearProgram::new(1);
        lp.set_cost(0, 1.0);
        lp.add_row(vec![(0, 1.0)], Relation::Le, 3.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.x[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn face_objective_is_deterministic() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 1.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_abs_diff_eq!(a.objective, 1.0, epsilon = 1e-12);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn reports_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, 1.0)], Relation::Ge, 2.0);
        lp.add_row(vec![(0, 1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 0.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equalities_and_shifted_bounds() {
        // max x - y, x + y = 4, x in [1, 3], y in [-2, 5]
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, -1.0]).unwrap();
        lp.set_bounds(0, 1.0, 3.0);
        lp.set_bounds(1, -2.0, 5.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 4.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.x[0], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn free_and_upper_only_variables() {
        // max -|v| style: max -a s.t. a >= v - 2, a >= 2 - v, v free, a <= 10 (upper only, lo -inf)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![0.0, -1.0]).unwrap();
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, 10.0);
        lp.add_row(vec![(1, 1.0), (0, -1.0)], Relation::Ge, -2.0);
        lp.add_row(vec![(1, 1.0), (0, 1.0)], Relation::Ge, 2.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 2.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add_row(vec![(0, 2.0), (1, 2.0)], Relation::Eq, 2.0);
        let s = solve(&lp).unwrap();
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn epigraph_examples() {
        let mut base = LinearProgram::new(1);
        base.set_bounds(0, 0.0, 7.0);
        let term = LinearTerm { coeffs: vec![(0, 1.0)], constant: 0.0 };
        let (lp, tau) = maxmin_epigraph(&[term], base).unwrap();
        assert_eq!(tau, 1);
        assert_eq!(lp.objective(), &[0.0, 1.0]);
        assert_eq!(lp.rows().len(), 1);
        let s = solve(&lp).unwrap();
        assert_abs_diff_eq!(s.x[tau], 7.0, epsilon = 1e-9);

        let (lp, tau) =
            maxmin_epigraph(&[LinearTerm::constant(3.0), LinearTerm::constant(5.0)], LinearProgram::new(0)).unwrap();
        let s = solve(&lp).unwrap();
        assert_abs_diff_eq!(s.x[tau], 3.0, epsilon = 1e-12);
        assert!(matches!(maxmin_epigraph(&[], LinearProgram::new(0)), Err(Error::Empty(_))));
    }

    #[test]
    fn lexicographic_stays_on_optimal_face() {
        // max x0 + x1 on x0 + x1 <= 1, then prefer x1.
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 1.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        let s = solve_lexicographic(&lp, Some(&[0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(s.objective, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[1], 1.0, epsilon = 1e-12);
        let s = solve_lexicographic(&lp, Some(&[1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(s.x[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_malformed() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, f64::NAN)], Relation::Le, 1.0);
        assert!(solve(&lp).is_err());
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(solve(&lp).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut lp = LinearProgram::new(3);
        lp.set_objective(vec![1.0, -2.5, 0.125]).unwrap();
        lp.set_bounds(1, f64::NEG_INFINITY, 4.0);
        lp.add_row(vec![(0, 1.0), (2, 3.0)], Relation::Le, 5.0);
        lp.add_row(vec![(1, -1.0)], Relation::Ge, -1.5);
        lp.add_row(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 2.0);
        let back = LinearProgram::from_text(&lp.to_text()).unwrap();
        assert_eq!(back, lp);
        assert!(LinearProgram::from_text("lp 1 1\nfoo 1 2\n").is_err());
    }
}
