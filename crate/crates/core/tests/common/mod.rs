//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use risa_core::experiment::{gen_synthetic, ExperimentConfig};
use risa_core::lp::{LinearProgram, LpStatus, Relation};
use risa_core::plan::PlanningInstance;
use risa_core::rt::TriangleMesh;
use risa_core::Vec3;

/// Random LP with small integer data: up to 4 variables, up to 8 rows.
pub fn random_lp(rng: &mut impl Rng) -> LinearProgram {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(0..=8);
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        let (lo, hi) = match rng.gen_range(0..6) {
            0 => (f64::NEG_INFINITY, f64::INFINITY),
            1 => (-(rng.gen_range(0..=5) as f64), f64::INFINITY),
            2 => (0.0, rng.gen_range(1..=8) as f64),
            3 => (f64::NEG_INFINITY, rng.gen_range(-2..=6) as f64),
            _ => (0.0, f64::INFINITY),
        };
        lp.set_bounds(j, lo, hi);
    }
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    lp.set_objective(c).unwrap();
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let rel = match rng.gen_range(0..8) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs = rng.gen_range(-4..=12) as f64;
        lp.add_dense_row(&a, rel, rhs);
    }
    lp
}

/// Result of brute-force vertex enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enumerated {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

struct Halfspace {
    a: Vec<f64>,
    b: f64,
    rel: Relation,
}

/// Best vertex of the program intersected with the box `|v_j| <= boxed`.
fn best_vertex(lp: &LinearProgram, boxed: f64) -> Option<f64> {
    let n = lp.n_vars();
    let mut hs: Vec<Halfspace> = lp
        .rows()
        .iter()
        .map(|r| {
            let mut a = vec![0.0; n];
            for &(j, v) in &r.coeffs {
                a[j] += v;
            }
            Halfspace { a, b: r.rhs, rel: r.relation }
        })
        .collect();
    for j in 0..n {
        let (lo, hi) = lp.bounds(j);
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        hs.push(Halfspace { a: e.clone(), b: lo.max(-boxed), rel: Relation::Ge });
        hs.push(Halfspace { a: e, b: hi.min(boxed), rel: Relation::Le });
    }
    let feasible = |v: &[f64]| {
        hs.iter().all(|h| {
            let s: f64 = h.a.iter().zip(v).map(|(a, x)| a * x).sum();
            let tol = 1e-9 * (1.0 + h.b.abs());
            match h.rel {
                Relation::Le => s <= h.b + tol,
                Relation::Ge => s >= h.b - tol,
                Relation::Eq => (s - h.b).abs() <= tol,
            }
        })
    };
    let mut best: Option<f64> = None;
    for subset in combinations(hs.len(), n) {
        let a = DMatrix::from_fn(n, n, |i, j| hs[subset[i]].a[j]);
        let b = DVector::from_fn(n, |i, _| hs[subset[i]].b);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-9 {
            continue;
        }
        let Some(v) = lu.solve(&b) else { continue };
        let v: Vec<f64> = v.iter().copied().collect();
        if feasible(&v) {
            let obj = lp.objective_value(&v);
            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
        }
    }
    best
}

/// Vertex-enumeration oracle. Vertices of small integer programs have
/// coordinates below 2e5 (Hadamard bound), so growth of the optimum between
/// two larger boxes means the objective is unbounded.
pub fn enumerate_lp(lp: &LinearProgram) -> Enumerated {
    match (best_vertex(lp, 1e6), best_vertex(lp, 2e6)) {
        (None, _) | (_, None) => Enumerated::Infeasible,
        (Some(a), Some(b)) if b > a + 1e-6 * (1.0 + a.abs()) => Enumerated::Unbounded,
        (Some(a), _) => Enumerated::Optimal(a),
    }
}

pub fn status_of(e: Enumerated) -> LpStatus {
    match e {
        Enumerated::Optimal(_) => LpStatus::Optimal,
        Enumerated::Infeasible => LpStatus::Infeasible,
        Enumerated::Unbounded => LpStatus::Unbounded,
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Ray/triangle hit by plane intersection followed by barycentric
/// coordinates. Returns the distance and the smallest barycentric weight.
pub fn plane_hit(origin: Vec3, dir: Vec3, tri: &[Vec3; 3]) -> Option<(f64, f64)> {
    let n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
    let denom = n.dot(dir);
    if denom.abs() < 1e-12 * n.norm() {
        return None;
    }
    let t = n.dot(tri[0] - origin) / denom;
    if t <= 0.0 {
        return None;
    }
    let p = origin + dir * t;
    let area = n.norm_sq();
    let w0 = (tri[2] - tri[1]).cross(p - tri[1]).dot(n) / area;
    let w1 = (tri[0] - tri[2]).cross(p - tri[2]).dot(n) / area;
    let w2 = 1.0 - w0 - w1;
    let wmin = w0.min(w1).min(w2);
    (wmin >= 0.0).then_some((t, wmin))
}

/// Brute-force occlusion test: does any triangle cut the segment strictly
/// between its endpoints (ignoring `margin` at each end)?
pub fn occluded(mesh: &TriangleMesh, a: Vec3, b: Vec3, margin: f64) -> bool {
    let d = b - a;
    let len = d.norm();
    let dir = d * (1.0 / len);
    (0..mesh.len()).any(|k| {
        let tri = mesh.triangle(k);
        matches!(plane_hit(a, dir, &tri), Some((t, _)) if t > margin && t < len - margin)
    })
}

pub fn mirror(v: Vec3, n: Vec3) -> Vec3 {
    v - n * (2.0 * v.dot(n))
}

/// Small synthetic planning setup used across property tests.
pub fn small_config(t: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.network.n_test_points = t;
    cfg.network.ris_nh = 32;
    cfg.network.ris_nv = 16;
    cfg
}

pub fn synthetic(t: usize, n: usize, l: usize, seed: u64) -> PlanningInstance {
    gen_synthetic(&small_config(t), n, l, seed).expect("synthetic instance")
}
