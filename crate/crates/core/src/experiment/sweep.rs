use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::scenario::gen_synthetic;
use crate::error::{Error, Result};
use crate::plan::{
    self, complete_deployment, deploy_surfaces, evaluate_plan_model, Association, DeployedRis, Deployment, PlanModel,
};
use crate::report::{to_db, CoverageReport};
use crate::rt::{build_sources, evaluate_rt, TriangleMesh};

/// A uniformly random deployment before any coverage check.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomDraw {
    pub x_star: Vec<bool>,
    /// Per test point, the nearest deployed site able to serve it through
    /// that site's strongest BS, if any.
    pub assoc: Vec<Option<Association>>,
}

impl RandomDraw {
    pub fn uncovered(&self) -> Vec<usize> {
        (0..self.assoc.len()).filter(|&t| self.assoc[t].is_none()).collect()
    }

    /// Configured surfaces, each spanning the points assigned to it.
    pub fn surfaces(&self, model: &PlanModel) -> Result<Vec<DeployedRis>> {
        deploy_surfaces(model, &self.x_star, &self.assoc)
    }
}

pub fn random_draw(model: &PlanModel, l: usize, seed: u64) -> Result<RandomDraw> {
    let nn = model.n();
    if l == 0 || l > nn {
        return Err(Error::InvalidInstance(format!("budget {l} outside [1, {nn}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, nn, l).into_vec();
    chosen.sort_unstable();
    let mut x_star = vec![false; nn];
    for &n in &chosen {
        x_star[n] = true;
    }
    let inst = &model.inst;
    let assoc = (0..model.t())
        .map(|t| {
            let u = inst.test_points[t];
            let mut best: Option<(f64, usize, usize)> = None;
            for &n in &chosen {
                let mut bm: Option<(usize, f64)> = None;
                for m in 0..model.m() {
                    let c = model.c.get(t, m, n);
                    if c > 0.0 && bm.map_or(true, |(_, bc)| c > bc) {
                        bm = Some((m, c));
                    }
                }
                let Some((m, _)) = bm else { continue };
                let d = inst.css[n].origin().distance(u);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, m, n));
                }
            }
            best.map(|(_, bs, ris)| Association { bs, ris })
        })
        .collect();
    Ok(RandomDraw { x_star, assoc })
}

/// Uniformly random `l`-subset of sites; each test point is served by the
/// nearest deployed site that can serve it, through that site's strongest BS.
/// A draw leaving any test point unserved is an error.
pub fn random_baseline(model: &PlanModel, l: usize, seed: u64) -> Result<Deployment> {
    let draw = random_draw(model, l, seed)?;
    if let Some(&t) = draw.uncovered().first() {
        return Err(Error::UncoveredTestPoint(t));
    }
    let assoc = draw.assoc.into_iter().flatten().collect();
    complete_deployment(model, draw.x_star, assoc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub min_snr_model_db: Option<f64>,
    pub min_snr_rt_db: Option<f64>,
    pub jfi_model: Option<f64>,
    pub jfi_rt: Option<f64>,
    pub runtime_ms: Option<u64>,
    pub bca_iterations: Option<usize>,
    pub converged: Option<bool>,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub row: SweepRow,
    pub deployment: Option<Deployment>,
    pub model_report: Option<CoverageReport>,
}

/// Plans and evaluates one `(n, l, seed)` cell.
pub fn run_one(cfg: &ExperimentConfig, n: usize, l: usize, seed: u64) -> SweepRun {
    let start = Instant::now();
    let mut row = SweepRow {
        n,
        l,
        seed,
        min_snr_model_db: None,
        min_snr_rt_db: None,
        jfi_model: None,
        jfi_rt: None,
        runtime_ms: None,
        bca_iterations: None,
        converged: None,
        error: String::new(),
    };
    let result = (|| -> Result<(Deployment, CoverageReport)> {
        let inst = gen_synthetic(cfg, n, l, seed)?;
        let model = PlanModel::new(&inst)?;
        let relaxed = plan::bca(&model, &cfg.bca)?;
        row.bca_iterations = Some(relaxed.trace.len());
        row.converged = Some(relaxed.converged);
        let dep = if cfg.sweep.repair {
            plan::round_with_repair(&model, &relaxed)?
        } else {
            plan::round_solution(&model, &relaxed)?
        };
        let report = evaluate_plan_model(&model, &dep, cfg.power_cap_w())?;
        row.min_snr_model_db = Some(to_db(report.min_snr));
        row.jfi_model = Some(report.jfi);
        if cfg.sweep.ray_traced {
            let mesh = TriangleMesh::default();
            let params = cfg.rt_params(seed);
            let sources = build_sources(&mesh, &inst, &dep.deployed, &params);
            let rt = evaluate_rt(&mesh, &sources, &inst.test_points, inst.n_bs(), &params, cfg.power_cap_w());
            row.min_snr_rt_db = Some(to_db(rt.min_snr));
            row.jfi_rt = Some(rt.jfi);
        }
        Ok((dep, report))
    })();
    if cfg.sweep.record_runtime {
        row.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    match result {
        Ok((dep, report)) => SweepRun { row, deployment: Some(dep), model_report: Some(report) },
        Err(e) => {
            row.error = e.to_string();
            SweepRun { row, deployment: None, model_report: None }
        }
    }
}

/// Every `(n, l, seed)` cell with `l <= n`, in canonical order.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Vec<(usize, usize, u64)> {
    let mut cells = Vec::new();
    for &n in &cfg.network.n_sites {
        for &l in &cfg.sweep.budgets {
            if l > n {
                continue;
            }
            for i in 0..cfg.sweep.seeds {
                cells.push((n, l, cfg.sweep.base_seed + i as u64));
            }
        }
    }
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// Runs the whole sweep; results are sorted by `(n, l, seed)` regardless of
/// execution order.
pub fn run_sweep(cfg: &ExperimentConfig, parallel: bool) -> Vec<SweepRun> {
    let cells = sweep_cells(cfg);
    let mut runs: Vec<SweepRun> = if parallel {
        cells.par_iter().map(|&(n, l, s)| run_one(cfg, n, l, s)).collect()
    } else {
        cells.iter().map(|&(n, l, s)| run_one(cfg, n, l, s)).collect()
    };
    runs.sort_by_key(|r| (r.row.n, r.row.l, r.row.seed));
    runs
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn sweep_csv(runs: &[SweepRun]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(e.to_string());
    w.write_record([
        "n",
        "l",
        "seed",
        "min_snr_model_db",
        "min_snr_rt_db",
        "jfi_model",
        "jfi_rt",
        "runtime_ms",
        "bca_iterations",
        "converged",
        "error",
    ])
    .map_err(io)?;
    for r in runs {
        let r = &r.row;
        w.write_record([
            r.n.to_string(),
            r.l.to_string(),
            r.seed.to_string(),
            fmt(r.min_snr_model_db),
            fmt(r.min_snr_rt_db),
            fmt(r.jfi_model),
            fmt(r.jfi_rt),
            r.runtime_ms.map(|v| v.to_string()).unwrap_or_default(),
            r.bca_iterations.map(|v| v.to_string()).unwrap_or_default(),
            r.converged.map(|v| v.to_string()).unwrap_or_default(),
            r.error.clone(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub l: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_min_snr_model_db: Option<f64>,
    pub std_min_snr_model_db: Option<f64>,
    pub mean_min_snr_rt_db: Option<f64>,
    pub std_min_snr_rt_db: Option<f64>,
    pub mean_jfi_model: Option<f64>,
    pub mean_jfi_rt: Option<f64>,
}

fn mean_std(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Mean and standard deviation per `(n, l)` over successful runs.
pub fn summarize(runs: &[SweepRun]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, usize)> = runs.iter().map(|r| (r.row.n, r.row.l)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .map(|(n, l)| {
            let group: Vec<&SweepRow> = runs.iter().map(|r| &r.row).filter(|r| r.n == n && r.l == l).collect();
            let pick = |f: fn(&SweepRow) -> Option<f64>| group.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let (mm, sm) = mean_std(&pick(|r| r.min_snr_model_db));
            let (mr, sr) = mean_std(&pick(|r| r.min_snr_rt_db));
            SummaryRow {
                n,
                l,
                runs: group.len(),
                failures: group.iter().filter(|r| !r.error.is_empty()).count(),
                mean_min_snr_model_db: mm,
                std_min_snr_model_db: sm,
                mean_min_snr_rt_db: mr,
                std_min_snr_rt_db: sr,
                mean_jfi_model: mean_std(&pick(|r| r.jfi_model)).0,
                mean_jfi_rt: mean_std(&pick(|r| r.jfi_rt)).0,
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(e.to_string());
    w.write_record([
        "n",
        "l",
        "runs",
        "failures",
        "mean_min_snr_model_db",
        "std_min_snr_model_db",
        "mean_min_snr_rt_db",
        "std_min_snr_rt_db",
        "mean_jfi_model",
        "mean_jfi_rt",
    ])
    .map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.l.to_string(),
            r.runs.to_string(),
            r.failures.to_string(),
            fmt(r.mean_min_snr_model_db),
            fmt(r.std_min_snr_model_db),
            fmt(r.mean_min_snr_rt_db),
            fmt(r.std_min_snr_rt_db),
            fmt(r.mean_jfi_model),
            fmt(r.mean_jfi_rt),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
