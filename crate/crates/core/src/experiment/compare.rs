use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::scenario::StationScene;
use super::sweep::random_draw;
use crate::error::Result;
use crate::plan::{plan, Deployment, PlanModel, PlanningInstance};
use crate::report::CoverageReport;
use crate::rt::{build_sources, evaluate_rt};

/// Ray-traced outcome of one random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawOutcome {
    pub seed: u64,
    pub sites: Vec<usize>,
    /// Test points no deployed site could serve.
    pub uncovered: usize,
    pub min_snr: f64,
    pub jfi: f64,
}

/// RISA against the random policy on one station instance, both evaluated
/// by the ray tracer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationComparison {
    pub budget: usize,
    pub deployment: Deployment,
    pub risa: CoverageReport,
    pub draws: Vec<DrawOutcome>,
}

impl StationComparison {
    /// Mean of the linear per-draw minimum SNR.
    pub fn baseline_mean_min_snr(&self) -> f64 {
        self.draws.iter().map(|d| d.min_snr).sum::<f64>() / self.draws.len() as f64
    }

    pub fn baseline_mean_jfi(&self) -> f64 {
        self.draws.iter().map(|d| d.jfi).sum::<f64>() / self.draws.len() as f64
    }

    /// Draws that left at least one test point without a serving site.
    pub fn failed_draws(&self) -> usize {
        self.draws.iter().filter(|d| d.uncovered > 0).count()
    }
}

/// Plans with RISA and compares against `draws` random deployments, all
/// ray traced through the station mesh. Draw `i` uses seed `seed + 1 + i`.
pub fn compare_station(
    cfg: &ExperimentConfig,
    scene: &StationScene,
    inst: &PlanningInstance,
    draws: usize,
    seed: u64,
) -> Result<StationComparison> {
    let params = cfg.rt_params(seed);
    params.validate()?;
    let cap = cfg.power_cap_w();
    let (_, deployment) = plan(inst, &cfg.bca, false)?;
    let evaluate = |surfaces: &[crate::plan::DeployedRis]| {
        let sources = build_sources(&scene.mesh, inst, surfaces, &params);
        evaluate_rt(&scene.mesh, &sources, &inst.test_points, inst.n_bs(), &params, cap)
    };
    let risa = evaluate(&deployment.deployed);
    let model = PlanModel::new(inst)?;
    let draws = (0..draws as u64)
        .map(|i| {
            let s = seed + 1 + i;
            let draw = random_draw(&model, inst.budget, s)?;
            let surfaces = draw.surfaces(&model)?;
            let report = evaluate(&surfaces);
            Ok(DrawOutcome {
                seed: s,
                sites: (0..draw.x_star.len()).filter(|&n| draw.x_star[n]).collect(),
                uncovered: draw.uncovered().len(),
                min_snr: report.min_snr,
                jfi: report.jfi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StationComparison { budget: inst.budget, deployment, risa, draws })
}
