//! The RISA planner: block coordinate ascent over the relaxed deployment and
//! the beam spans, rounding to a binary deployment, and model-domain
//! evaluation of the result.
//!
//! The relaxed problem carries `y[t][m][n]`, but every constraint depends on
//! `y` only through `Y[t][n] = sum_m y[t][m][n]`, so the (x, y) block is solved
//! over `Y` with the best BS per (t, n) and expanded afterwards.

use serde::{Deserialize, Serialize};

use crate::channel::{broadened_gain_g1, broadening_config, pathgain, subarea_ranges, ArrayGeometry, RisConfig};
use crate::error::{Error, Result};
use crate::geom::{Frame3, Vec3};
use crate::lp::{self, LinearProgram, LinearTerm, LpStatus, Relation};
use crate::report::{CoverageReport, PointReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStation {
    pub frame: Frame3,
    pub n_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanningInstance {
    pub bss: Vec<BaseStation>,
    /// Candidate sites.
    pub css: Vec<Frame3>,
    pub test_points: Vec<Vec3>,
    /// Number of surfaces to deploy.
    pub budget: usize,
    pub ris_geom: ArrayGeometry,
    pub beta: f64,
    /// Transmit power in watts.
    pub power: f64,
    /// Noise power in watts.
    pub sigma2: f64,
    /// Optional line-of-sight mask from a scene; blocked links get no gain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_of_sight: Option<LineOfSight>,
}

/// Per-link visibility, `bs_site[m * N + n]` and `site_point[n * T + t]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineOfSight {
    pub bs_site: Vec<bool>,
    pub site_point: Vec<bool>,
}

impl PlanningInstance {
    pub fn n_bs(&self) -> usize {
        self.bss.len()
    }

    pub fn n_cs(&self) -> usize {
        self.css.len()
    }

    pub fn n_tp(&self) -> usize {
        self.test_points.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Structural checks, including that every test point is reachable
    /// through at least one candidate site fronting both it and some BS.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInstance(m));
        if self.bss.is_empty() {
            return bad("no base stations".into());
        }
        if self.css.is_empty() {
            return bad("no candidate sites".into());
        }
        if self.test_points.is_empty() {
            return bad("no test points".into());
        }
        if self.budget < 1 || self.budget > self.css.len() {
            return bad(format!("budget {} outside [1, {}]", self.budget, self.css.len()));
        }
        self.ris_geom.validate()?;
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("path-loss exponent {} must be positive", self.beta));
        }
        if !(self.power > 0.0 && self.power.is_finite()) || !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return bad("power and noise must be positive and finite".into());
        }
        if self.bss.iter().any(|b| b.n_b == 0) {
            return bad("base station with zero antennas".into());
        }
        if let Some(los) = &self.line_of_sight {
            let (m, n, t) = (self.n_bs(), self.n_cs(), self.n_tp());
            if los.bs_site.len() != m * n || los.site_point.len() != n * t {
                return bad(format!(
                    "line-of-sight mask has {} BS-site and {} site-point entries, expected {} and {}",
                    los.bs_site.len(),
                    los.site_point.len(),
                    m * n,
                    n * t
                ));
            }
        }
        for (n, cs) in self.css.iter().enumerate() {
            for (m, b) in self.bss.iter().enumerate() {
                if cs.origin().distance(b.frame.origin()) <= 0.0 {
                    return bad(format!("candidate site {n} coincides with base station {m}"));
                }
            }
            for (t, u) in self.test_points.iter().enumerate() {
                if !u.is_finite() {
                    return bad(format!("test point {t} is not finite"));
                }
                if cs.origin().distance(*u) <= 0.0 {
                    return bad(format!("test point {t} coincides with candidate site {n}"));
                }
            }
        }
        let c = build_coefficients(self);
        for t in 0..self.n_tp() {
            if (0..self.n_bs()).all(|m| (0..self.n_cs()).all(|n| c.get(t, m, n) == 0.0)) {
                return bad(format!("test point {t} is not fronted by any BS-fronted candidate site"));
            }
        }
        Ok(())
    }
}

/// Link coefficients `c[t][m][n]`, zero where a fronting test fails or the
/// line-of-sight mask blocks a hop.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub t: usize,
    pub m: usize,
    pub n: usize,
    data: Vec<f64>,
}

impl Coefficients {
    pub fn get(&self, t: usize, m: usize, n: usize) -> f64 {
        self.data[(t * self.m + m) * self.n + n]
    }
}

pub fn build_coefficients(inst: &PlanningInstance) -> Coefficients {
    let (tn, mn, nn) = (inst.n_tp(), inst.n_bs(), inst.n_cs());
    let mut data = vec![0.0; tn * mn * nn];
    for (n, cs) in inst.css.iter().enumerate() {
        for (m, b) in inst.bss.iter().enumerate() {
            let bpos = b.frame.origin();
            if !cs.fronting(bpos) || inst.line_of_sight.as_ref().is_some_and(|l| !l.bs_site[m * nn + n]) {
                continue;
            }
            let Ok(g_bs) = pathgain(cs.origin().distance(bpos), inst.beta) else {
                continue;
            };
            for (t, &u) in inst.test_points.iter().enumerate() {
                if !cs.fronting(u) || inst.line_of_sight.as_ref().is_some_and(|l| !l.site_point[n * tn + t]) {
                    continue;
                }
                if let Ok(g_ue) = pathgain(cs.origin().distance(u), inst.beta) {
                    data[(t * mn + m) * nn + n] = g_bs * g_ue;
                }
            }
        }
    }
    Coefficients { t: tn, m: mn, n: nn, data }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Instance plus the precomputed quantities every block needs.
#[derive(Debug, Clone)]
pub struct PlanModel {
    pub inst: PlanningInstance,
    pub c: Coefficients,
    /// `max_m c[t][m][n]`, row-major T x N.
    best_c: Vec<f64>,
    /// BS attaining `best_c`, lowest index on ties.
    best_m: Vec<usize>,
    omega: Vec<f64>,
    psi: Vec<f64>,
    /// `max_k |Omega_n(t) - Omega_n(k)|`, T x N.
    spread_x: Vec<f64>,
    spread_y: Vec<f64>,
    pub min_x: f64,
    pub min_y: f64,
}

impl PlanModel {
    pub fn new(inst: &PlanningInstance) -> Result<Self> {
        inst.validate()?;
        let c = build_coefficients(inst);
        let (tn, mn, nn) = (inst.n_tp(), inst.n_bs(), inst.n_cs());
        let mut best_c = vec![0.0; tn * nn];
        let mut best_m = vec![0; tn * nn];
        for t in 0..tn {
            for n in 0..nn {
                for m in 0..mn {
                    if c.get(t, m, n) > best_c[t * nn + n] {
                        best_c[t * nn + n] = c.get(t, m, n);
                        best_m[t * nn + n] = m;
                    }
                }
            }
        }
        let mut omega = vec![0.0; tn * nn];
        let mut psi = vec![0.0; tn * nn];
        for (n, cs) in inst.css.iter().enumerate() {
            for (t, &u) in inst.test_points.iter().enumerate() {
                let (o, p) = cs.spatial_frequencies(u)?;
                omega[t * nn + n] = o;
                psi[t * nn + n] = p;
            }
        }
        let spread = |f: &[f64]| {
            let mut out = vec![0.0; tn * nn];
            for n in 0..nn {
                let (lo, hi) = (0..tn).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                    (lo.min(f[t * nn + n]), hi.max(f[t * nn + n]))
                });
                for t in 0..tn {
                    let v = f[t * nn + n];
                    out[t * nn + n] = (v - lo).max(hi - v);
                }
            }
            out
        };
        let spread_x = spread(&omega);
        let spread_y = spread(&psi);
        Ok(Self {
            inst: inst.clone(),
            c,
            best_c,
            best_m,
            omega,
            psi,
            spread_x,
            spread_y,
            min_x: inst.ris_geom.min_span_x(),
            min_y: inst.ris_geom.min_span_y(),
        })
    }

    pub fn t(&self) -> usize {
        self.c.t
    }

    pub fn m(&self) -> usize {
        self.c.m
    }

    pub fn n(&self) -> usize {
        self.c.n
    }

    pub fn spatial_frequency(&self, t: usize, n: usize) -> (f64, f64) {
        (self.omega[t * self.n() + n], self.psi[t * self.n() + n])
    }

    /// Largest spatial-frequency gap between test point `t` and any other
    /// test point, as seen from site `n`.
    pub fn spread(&self, t: usize, n: usize, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.spread_x[t * self.n() + n],
            Axis::Y => self.spread_y[t * self.n() + n],
        }
    }

    fn min_span(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.min_x,
            Axis::Y => self.min_y,
        }
    }

    fn y_total(&self, y: &[f64], t: usize, n: usize) -> f64 {
        (0..self.m()).map(|m| y[(t * self.m() + m) * self.n() + n]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BcaOptions {
    pub tol: f64,
    pub max_outer: usize,
    pub inner_tol: f64,
    pub inner_max: usize,
}

impl Default for BcaOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_outer: 100, inner_tol: 1e-8, inner_max: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedSolution {
    pub x: Vec<f64>,
    /// Row-major T x M x N.
    pub y: Vec<f64>,
    pub dims: (usize, usize, usize),
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub zx: Vec<f64>,
    pub zy: Vec<f64>,
    /// Objective after each outer iteration.
    pub trace: Vec<f64>,
    /// False when the outer loop hit its cap before meeting the tolerance.
    pub converged: bool,
}

impl RelaxedSolution {
    pub fn y(&self, t: usize, m: usize, n: usize) -> f64 {
        let (_, mn, nn) = self.dims;
        self.y[(t * mn + m) * nn + n]
    }

    pub fn objective(&self) -> f64 {
        *self.trace.last().expect("nonempty trace")
    }
}

/// `min_t sum_{m,n} c[t][m][n] y[t][m][n] / (dx_n dy_n)`.
pub fn relaxed_objective(model: &PlanModel, y: &[f64], dx: &[f64], dy: &[f64]) -> f64 {
    let (tn, mn, nn) = (model.t(), model.m(), model.n());
    (0..tn)
        .map(|t| {
            (0..nn)
                .map(|n| {
                    let s: f64 = (0..mn).map(|m| model.c.get(t, m, n) * y[(t * mn + m) * nn + n]).sum();
                    s / (dx[n] * dy[n])
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Solves the (x, y) block for fixed spans. Among max-min optima the one with
/// the largest total link gain is returned.
pub fn solve_xy_block(model: &PlanModel, dx: &[f64], dy: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (tn, mn, nn) = (model.t(), model.m(), model.n());
    if dx.len() != nn || dy.len() != nn {
        return Err(Error::DimensionMismatch("span vectors must have one entry per site".into()));
    }
    for n in 0..nn {
        if dx[n] < model.min_x * (1.0 - 1e-12) || dy[n] < model.min_y * (1.0 - 1e-12) {
            return Err(Error::SpanUnderMinimum { span: dx[n].min(dy[n]), min: model.min_x.min(model.min_y) });
        }
    }
    let cmax = model.best_c.iter().cloned().fold(0.0, f64::max);
    let mut base = LinearProgram::new(nn);
    for n in 0..nn {
        base.set_bounds(n, 0.0, 1.0);
    }
    let mut yvar = vec![None; tn * nn];
    let mut weights = vec![0.0; tn * nn];
    for t in 0..tn {
        for n in 0..nn {
            let c = model.best_c[t * nn + n];
            if c <= 0.0 {
                continue;
            }
            let ratio = |d: f64, s: f64| if s > 0.0 { d / s } else { f64::INFINITY };
            let ub = ratio(dx[n], model.spread(t, n, Axis::X)).min(ratio(dy[n], model.spread(t, n, Axis::Y)));
            if ub <= 0.0 {
                continue;
            }
            let hi = if ub >= 1.0 { f64::INFINITY } else { ub };
            yvar[t * nn + n] = Some(base.add_var(0.0, hi, 0.0));
            weights[t * nn + n] = c / cmax / (dx[n] * dy[n]);
        }
    }
    for t in 0..tn {
        let row: Vec<(usize, f64)> = (0..nn).filter_map(|n| yvar[t * nn + n].map(|v| (v, 1.0))).collect();
        if row.is_empty() {
            return Err(Error::Infeasible(format!("coverage: test point {t} has no admissible site")));
        }
        base.add_row(row, Relation::Eq, 1.0);
        for n in 0..nn {
            if let Some(v) = yvar[t * nn + n] {
                base.add_row(vec![(v, 1.0), (n, -1.0)], Relation::Le, 0.0);
            }
        }
    }
    base.add_row((0..nn).map(|n| (n, 1.0)).collect(), Relation::Eq, model.inst.budget as f64);
    let wmax = weights.iter().cloned().fold(0.0, f64::max);
    let terms: Vec<LinearTerm> = (0..tn)
        .map(|t| LinearTerm {
            coeffs: (0..nn).filter_map(|n| yvar[t * nn + n].map(|v| (v, weights[t * nn + n] / wmax))).collect(),
            constant: 0.0,
        })
        .collect();
    let (lp, _tau) = lp::maxmin_epigraph(&terms, base)?;
    let mut secondary = vec![0.0; lp.n_vars()];
    for t in 0..tn {
        for n in 0..nn {
            if let Some(v) = yvar[t * nn + n] {
                secondary[v] = model.best_c[t * nn + n] / cmax;
            }
        }
    }
    let sol = lp::solve_lexicographic(&lp, Some(&secondary))?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Infeasible(format!(
                "coverage: budget {} cannot cover every test point under the span limits",
                model.inst.budget
            )))
        }
        LpStatus::Unbounded => return Err(Error::Lp("xy block unbounded".into())),
    }
    let x: Vec<f64> = sol.x[..nn].iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut y = vec![0.0; tn * mn * nn];
    for t in 0..tn {
        for n in 0..nn {
            if let Some(v) = yvar[t * nn + n] {
                let m = model.best_m[t * nn + n];
                y[(t * mn + m) * nn + n] = sol.x[v].clamp(0.0, 1.0);
            }
        }
    }
    Ok((x, y))
}

/// Quadratic-transform auxiliary update `z = 1 / delta`.
pub fn qt_z_update(delta: &[f64]) -> Result<Vec<f64>> {
    delta.iter().map(|&d| if d > 0.0 && d.is_finite() { Ok(1.0 / d) } else { Err(Error::NonpositiveSpan(d)) }).collect()
}

/// Transformed term `2 z - z^2 delta`, equal to `1 / delta` at `z = 1 / delta`.
pub fn qt_term(z: f64, delta: f64) -> f64 {
    2.0 * z - z * z * delta
}

/// Closed-form span block: `max(min span, max_t Y[t][n] * spread(t, n))`.
pub fn delta_lower_bounds(model: &PlanModel, y: &[f64], axis: Axis) -> Vec<f64> {
    (0..model.n())
        .map(|n| {
            (0..model.t())
                .map(|t| model.y_total(y, t, n) * model.spread(t, n, axis))
                .fold(model.min_span(axis), f64::max)
        })
        .collect()
}

/// Span block for one axis, solved as a max-min LP over the transformed
/// objective with `other` holding the spans of the other axis.
pub fn solve_delta_block(model: &PlanModel, y: &[f64], z: &[f64], other: &[f64], axis: Axis) -> Result<Vec<f64>> {
    let (tn, nn) = (model.t(), model.n());
    if z.len() != nn || other.len() != nn || y.len() != tn * model.m() * nn {
        return Err(Error::DimensionMismatch("span block inputs".into()));
    }
    // Every span constraint involves a single Delta_n, so they fold into bounds.
    let lower = delta_lower_bounds(model, y, axis);
    let mut base = LinearProgram::new(nn);
    for (n, &lo) in lower.iter().enumerate() {
        base.set_bounds(n, lo, f64::INFINITY);
    }
    let mut terms = Vec::with_capacity(tn);
    for t in 0..tn {
        let mut term = LinearTerm::default();
        for n in 0..nn {
            let a = model.best_c[t * nn + n] * model.y_total(y, t, n) / other[n];
            if a > 0.0 {
                term.constant += 2.0 * a * z[n];
                term.coeffs.push((n, -a * z[n] * z[n]));
            }
        }
        terms.push(term);
    }
    let scale = terms.iter().map(|t| t.constant).fold(0.0, f64::max);
    if scale > 0.0 {
        for term in &mut terms {
            term.constant /= scale;
            term.coeffs.iter_mut().for_each(|(_, a)| *a /= scale);
        }
    }
    let (lp, tau) = lp::maxmin_epigraph(&terms, base)?;
    let mut secondary = vec![-1.0; lp.n_vars()];
    secondary[tau] = 0.0;
    let sol = lp::solve_lexicographic(&lp, Some(&secondary))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("span block returned {:?}", sol.status)));
    }
    Ok(sol.x[..nn].iter().zip(&lower).map(|(v, lo)| v.max(*lo)).collect())
}

fn inner_loop(
    model: &PlanModel,
    y: &[f64],
    start: &[f64],
    other: &[f64],
    axis: Axis,
    opts: &BcaOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut delta = start.to_vec();
    for _ in 0..opts.inner_max.max(1) {
        let z = qt_z_update(&delta)?;
        let next = solve_delta_block(model, y, &z, other, axis)?;
        let diff = next.iter().zip(&delta).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);
        delta = next;
        if diff <= opts.inner_tol {
            break;
        }
    }
    let z = qt_z_update(&delta)?;
    Ok((delta, z))
}

/// Block coordinate ascent from the initial spans `Delta = 2`.
pub fn bca(model: &PlanModel, opts: &BcaOptions) -> Result<RelaxedSolution> {
    let n = model.n();
    bca_from(model, opts, &vec![2.0; n], &vec![2.0; n])
}

/// Block coordinate ascent from given spans.
pub fn bca_from(model: &PlanModel, opts: &BcaOptions, dx0: &[f64], dy0: &[f64]) -> Result<RelaxedSolution> {
    if !(opts.tol > 0.0) || opts.max_outer == 0 {
        return Err(Error::InvalidInstance("BCA tolerance must be positive and the cap nonzero".into()));
    }
    let (mut dx, mut dy) = (dx0.to_vec(), dy0.to_vec());
    let mut best: Option<RelaxedSolution> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_outer {
        let (x, y) = solve_xy_block(model, &dx, &dy)?;
        let (ndx, zx) = inner_loop(model, &y, &dx, &dy, Axis::X, opts)?;
        let (ndy, zy) = inner_loop(model, &y, &dy, &ndx, Axis::Y, opts)?;
        let obj = relaxed_objective(model, &y, &ndx, &ndy);
        if let Some(&prev) = trace.last() {
            if obj < prev {
                // No ascent left beyond numerical noise; keep the previous iterate.
                converged = true;
                break;
            }
        }
        trace.push(obj);
        dx = ndx.clone();
        dy = ndy.clone();
        best = Some(RelaxedSolution {
            x,
            y,
            dims: (model.t(), model.m(), n_of(model)),
            dx: ndx,
            dy: ndy,
            zx,
            zy,
            trace: Vec::new(),
            converged: false,
        });
        if trace.len() >= 2 {
            let prev = trace[trace.len() - 2];
            if (obj - prev).abs() <= opts.tol * obj.abs() {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("BCA stopped at the iteration cap ({}) before converging", opts.max_outer);
    }
    let mut sol = best.expect("at least one outer iteration");
    sol.trace = trace;
    sol.converged = converged;
    Ok(sol)
}

fn n_of(model: &PlanModel) -> usize {
    model.n()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Association {
    pub bs: usize,
    pub ris: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeployedRis {
    /// Candidate-site index.
    pub cs: usize,
    /// Serving BS; `None` only for a surface that serves nobody and has no
    /// BS in front of it.
    pub bs: Option<usize>,
    pub dx: f64,
    pub dy: f64,
    pub omega_range: (f64, f64),
    pub psi_range: (f64, f64),
    pub config: RisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deployment {
    pub x_star: Vec<bool>,
    /// Ascending by site index.
    pub deployed: Vec<DeployedRis>,
    /// One entry per test point.
    pub assoc: Vec<Association>,
}

impl Deployment {
    pub fn ris(&self, n: usize) -> Option<&DeployedRis> {
        self.deployed.iter().find(|r| r.cs == n)
    }

    pub fn deployed_sites(&self) -> Vec<usize> {
        self.deployed.iter().map(|r| r.cs).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("deployment serializes")
    }
}

/// Indices of the `l` largest entries (ties to the lower index), as a mask.
pub fn top_l(x: &[f64], l: usize) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut mask = vec![false; x.len()];
    for &i in idx.iter().take(l) {
        mask[i] = true;
    }
    mask
}

/// Widens a range to `min_span` and shifts it back inside `[-1, 1]`.
fn fit_range(range: (f64, f64), min_span: f64) -> (f64, f64) {
    let (mut lo, mut hi) = crate::channel::widen_to(range, min_span);
    if lo < -1.0 {
        hi = (hi + (-1.0 - lo)).min(1.0);
        lo = -1.0;
    }
    if hi > 1.0 {
        lo = (lo - (hi - 1.0)).max(-1.0);
        hi = 1.0;
    }
    (lo, hi)
}

/// Fills in spans, configurations and BS assignment for a binary plan.
pub fn complete_deployment(model: &PlanModel, x_star: Vec<bool>, assoc: Vec<Association>) -> Result<Deployment> {
    let partial: Vec<Option<Association>> = assoc.iter().copied().map(Some).collect();
    let deployed = deploy_surfaces(model, &x_star, &partial)?;
    Ok(Deployment { x_star, deployed, assoc })
}

/// Configures every site with `x_star[n]` for the test points assigned to it.
/// Points mapped to `None` are left unserved.
pub fn deploy_surfaces(model: &PlanModel, x_star: &[bool], assoc: &[Option<Association>]) -> Result<Vec<DeployedRis>> {
    let inst = &model.inst;
    let geom = &inst.ris_geom;
    let n_cs = inst.n_cs();
    let mut deployed = Vec::new();
    for (n, _) in x_star.iter().enumerate().filter(|(_, on)| **on) {
        let cs = &inst.css[n];
        let served: Vec<Vec3> = assoc
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_some_and(|a| a.ris == n))
            .map(|(t, _)| inst.test_points[t])
            .collect();
        let bs = match assoc.iter().flatten().find(|a| a.ris == n) {
            Some(a) => Some(a.bs),
            None => {
                let mut best: Option<(usize, f64)> = None;
                for (m, b) in inst.bss.iter().enumerate() {
                    let p = b.frame.origin();
                    let visible = inst.line_of_sight.as_ref().map_or(true, |l| l.bs_site[m * n_cs + n]);
                    if cs.fronting(p) && visible {
                        let g = pathgain(cs.origin().distance(p), inst.beta)?;
                        if best.map_or(true, |(_, bg)| g > bg) {
                            best = Some((m, g));
                        }
                    }
                }
                best.map(|(m, _)| m)
            }
        };
        let (om, ps) = if served.is_empty() { ((0.0, 0.0), (0.0, 0.0)) } else { subarea_ranges(cs, &served)? };
        let omega_range = fit_range(om, model.min_x);
        let psi_range = fit_range(ps, model.min_y);
        let dx = (om.1 - om.0).max(model.min_x);
        let dy = (ps.1 - ps.0).max(model.min_y);
        let config = broadening_config(geom, omega_range, psi_range)?;
        deployed.push(DeployedRis { cs: n, bs, dx, dy, omega_range, psi_range, config });
    }
    Ok(deployed)
}

/// Rounds a relaxed solution, visiting test points in ascending order.
pub fn round_solution(model: &PlanModel, relaxed: &RelaxedSolution) -> Result<Deployment> {
    let order: Vec<usize> = (0..model.t()).collect();
    round_solution_ordered(model, relaxed, &order)
}

/// Rounds a relaxed solution visiting test points in `order`.
pub fn round_solution_ordered(model: &PlanModel, relaxed: &RelaxedSolution, order: &[usize]) -> Result<Deployment> {
    let (tn, mn, nn) = (model.t(), model.m(), model.n());
    if relaxed.dims != (tn, mn, nn) || relaxed.x.len() != nn {
        return Err(Error::DimensionMismatch("relaxed solution does not match the instance".into()));
    }
    let x_star = top_l(&relaxed.x, model.inst.budget);
    let mut claim: Vec<Option<usize>> = vec![None; nn];
    let mut assoc: Vec<Option<Association>> = vec![None; tn];
    for &t in order {
        let mut best: Option<((f64, f64), usize, usize)> = None;
        for n in (0..nn).filter(|&n| x_star[n]) {
            for m in 0..mn {
                let c = model.c.get(t, m, n);
                if c <= 0.0 || claim[n].is_some_and(|owner| owner != m) {
                    continue;
                }
                let key = (relaxed.y(t, m, n), c);
                if best.map_or(true, |(bk, _, _)| key.0 > bk.0 || (key.0 == bk.0 && key.1 > bk.1)) {
                    best = Some((key, m, n));
                }
            }
        }
        let Some((_, m, n)) = best else {
            return Err(Error::UncoveredTestPoint(t));
        };
        claim[n].get_or_insert(m);
        assoc[t] = Some(Association { bs: m, ris: n });
    }
    let assoc = assoc
        .into_iter()
        .enumerate()
        .map(|(t, a)| a.ok_or(Error::UncoveredTestPoint(t)))
        .collect::<Result<Vec<_>>>()?;
    complete_deployment(model, x_star, assoc)
}

/// Rounding with greedy repair: an uncovered point is moved to the front of
/// the visiting order and rounding is retried.
pub fn round_with_repair(model: &PlanModel, relaxed: &RelaxedSolution) -> Result<Deployment> {
    let mut order: Vec<usize> = (0..model.t()).collect();
    let mut promoted = Vec::new();
    loop {
        match round_solution_ordered(model, relaxed, &order) {
            Err(Error::UncoveredTestPoint(t)) if !promoted.contains(&t) => {
                promoted.push(t);
                order.retain(|&k| k != t);
                order.insert(0, t);
            }
            other => return other,
        }
    }
}

/// Checks every binary-plan invariant.
pub fn check_deployment(model: &PlanModel, dep: &Deployment) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidInstance(m));
    let (tn, nn) = (model.t(), model.n());
    if dep.x_star.len() != nn || dep.assoc.len() != tn {
        return bad("deployment dimensions do not match the instance".into());
    }
    let count = dep.x_star.iter().filter(|b| **b).count();
    if count != model.inst.budget {
        return bad(format!("{count} surfaces deployed, budget is {}", model.inst.budget));
    }
    let sites: Vec<usize> = (0..nn).filter(|&n| dep.x_star[n]).collect();
    if dep.deployed_sites() != sites {
        return bad("deployed list disagrees with x_star".into());
    }
    for (t, a) in dep.assoc.iter().enumerate() {
        if a.ris >= nn || a.bs >= model.m() {
            return bad(format!("test point {t} has an out-of-range association"));
        }
        if !dep.x_star[a.ris] {
            return bad(format!("test point {t} served by undeployed site {}", a.ris));
        }
        if model.c.get(t, a.bs, a.ris) <= 0.0 {
            return bad(format!("test point {t} association violates fronting"));
        }
        if dep.ris(a.ris).and_then(|r| r.bs) != Some(a.bs) {
            return bad(format!("site {} is not assigned to BS {}", a.ris, a.bs));
        }
    }
    for r in &dep.deployed {
        if r.dx < model.min_x * (1.0 - 1e-12) || r.dy < model.min_y * (1.0 - 1e-12) {
            return bad(format!("site {} has a span under the minimum beamwidth", r.cs));
        }
    }
    Ok(())
}

/// Model objective of a binary plan: `min_t c[t][m][n] / (dx*_n dy*_n)`.
pub fn deployment_objective(model: &PlanModel, dep: &Deployment) -> f64 {
    dep.assoc
        .iter()
        .enumerate()
        .map(|(t, a)| {
            let r = dep.ris(a.ris).expect("served site is deployed");
            model.c.get(t, a.bs, a.ris) / (r.dx * r.dy)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Model-domain SNR per test point, `P g1(dx*, dy*) c / sigma^2`. JFI uses
/// received powers capped at `power_cap` watts.
pub fn evaluate_plan_model(model: &PlanModel, dep: &Deployment, power_cap: f64) -> Result<CoverageReport> {
    let inst = &model.inst;
    let points = dep
        .assoc
        .iter()
        .enumerate()
        .map(|(t, a)| {
            let r = dep.ris(a.ris).ok_or_else(|| Error::InvalidInstance(format!("site {} not deployed", a.ris)))?;
            let g1 = broadened_gain_g1(&inst.ris_geom, r.dx, r.dy)?;
            let power = inst.power * g1 * model.c.get(t, a.bs, a.ris);
            Ok(PointReport {
                position: inst.test_points[t],
                power,
                snr: power / inst.sigma2,
                serving_bs: Some(a.bs),
                serving_ris: Some(a.ris),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageReport::from_points(points, power_cap))
}

/// Relaxation, rounding and (optionally) greedy repair in one call.
pub fn plan(inst: &PlanningInstance, opts: &BcaOptions, repair: bool) -> Result<(RelaxedSolution, Deployment)> {
    let model = PlanModel::new(inst)?;
    let relaxed = bca(&model, opts)?;
    let dep = if repair { round_with_repair(&model, &relaxed)? } else { round_solution(&model, &relaxed)? };
    Ok((relaxed, dep))
}
