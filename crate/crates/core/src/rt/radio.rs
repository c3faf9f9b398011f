use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::TriangleMesh;
use super::paths::{find_paths, PropagationPath};
use crate::channel::{reflection_pattern, ArrayGeometry, RisConfig, SeparablePattern};
use crate::error::{Error, Result};
use crate::geom::{Frame3, Vec3};
use crate::plan::{DeployedRis, PlanningInstance};
use crate::report::{from_db, watts_to_dbm, CoverageReport, PointReport};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtParams {
    pub beta: f64,
    /// Cosine element exponent (field pattern `cos^mu`).
    pub mu: f64,
    /// Carrier frequency in Hz; sets the 1 m reference loss `(lambda / 4 pi)^2`.
    pub frequency: f64,
    /// Power loss per reflection in dB.
    pub reflection_loss_db: f64,
    pub max_bounces: usize,
    pub phase_draws: usize,
    pub seed: u64,
    /// Noise power in watts.
    pub sigma2: f64,
}

impl RtParams {
    /// Free-space reference gain at 1 m.
    pub fn reference_gain(&self) -> f64 {
        let lambda = SPEED_OF_LIGHT / self.frequency;
        (lambda / (4.0 * PI)).powi(2)
    }

    fn bounce_factor(&self) -> f64 {
        from_db(-self.reflection_loss_db)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0
            && self.mu > 0.0
            && self.frequency > 0.0
            && self.reflection_loss_db >= 0.0
            && self.max_bounces <= 2
            && self.phase_draws >= 1
            && self.sigma2 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("ray-tracing parameters out of range".into()))
        }
    }
}

/// Cosine element power gain `cos^(2 mu) theta`, zero from grazing backward.
pub fn element_gain(theta: f64, mu: f64) -> f64 {
    if theta.abs() >= PI / 2.0 {
        0.0
    } else {
        theta.cos().max(0.0).powf(2.0 * mu)
    }
}

#[derive(Debug, Clone)]
pub enum SourceKind {
    /// Base station steering its beam along every departing path.
    Bs { n_b: usize },
    /// Surface re-radiating with `config`, which is taken as the effective
    /// phase profile after compensating the incidence from its BS.
    Ris { geom: ArrayGeometry, config: RisConfig, pattern: Option<SeparablePattern> },
}

#[derive(Debug, Clone)]
pub struct RadiatingSource {
    pub kind: SourceKind,
    pub frame: Frame3,
    pub mu: f64,
    /// Radiated (BS) or impinging (RIS) power in watts.
    pub power: f64,
    /// BS the source belongs to.
    pub bs: usize,
    /// Candidate site for surfaces.
    pub ris: Option<usize>,
}

impl RadiatingSource {
    pub fn bs(frame: Frame3, n_b: usize, power: f64, bs: usize) -> Self {
        Self { kind: SourceKind::Bs { n_b }, frame, mu: 1.0, power, bs, ris: None }
    }

    pub fn ris(
        frame: Frame3,
        geom: ArrayGeometry,
        config: RisConfig,
        mu: f64,
        power: f64,
        bs: usize,
        site: usize,
    ) -> Self {
        let pattern = SeparablePattern::try_factor(&geom, &config);
        Self { kind: SourceKind::Ris { geom, config, pattern }, frame, mu, power, bs, ris: Some(site) }
    }

    /// Power gain toward the unit world direction `dir`.
    pub fn gain(&self, dir: Vec3) -> f64 {
        match &self.kind {
            SourceKind::Bs { n_b } => *n_b as f64,
            SourceKind::Ris { .. } => ris_beampattern_gain(self, dir),
        }
    }
}

/// `|sum_i alpha_i e^{j phi_i} b_i(Omega, Psi)^*|^2 / N_r` times the element
/// gain; zero behind the surface.
pub fn ris_beampattern_gain(source: &RadiatingSource, dir: Vec3) -> f64 {
    let SourceKind::Ris { geom, config, pattern } = &source.kind else {
        return 0.0;
    };
    let f = &source.frame;
    let local = Vec3::new(dir.dot(f.axis_x()), dir.dot(f.axis_y()), dir.dot(f.axis_z()));
    let Some(local) = local.normalized() else {
        return 0.0;
    };
    if local.z <= 0.0 {
        return 0.0;
    }
    let theta = local.z.clamp(-1.0, 1.0).acos();
    let array = match pattern {
        Some(p) => p.gain(local.x, local.y),
        None => reflection_pattern(geom, config, local.x, local.y),
    };
    array / geom.n_elements() as f64 * element_gain(theta, source.mu)
}

/// Received power of one path from `source`, before phase combining.
pub fn path_power(source: &RadiatingSource, path: &PropagationPath, params: &RtParams) -> f64 {
    let eirp = source.power * source.gain(path.departure());
    eirp * params.reference_gain() * path.length.powf(-params.beta) * params.bounce_factor().powi(path.bounces() as i32)
}

/// Mean over `draws` of `|sum_k sqrt(P_k) e^{j phi_k}|^2` with i.i.d. uniform
/// phases. A single path returns its power exactly.
pub fn combine_random_phase(powers: &[f64], draws: usize, rng: &mut impl Rng) -> f64 {
    match powers {
        [] => 0.0,
        [p] => *p,
        _ => {
            let amps: Vec<f64> = powers.iter().map(|p| p.sqrt()).collect();
            let mut acc = 0.0;
            for _ in 0..draws.max(1) {
                let s: Complex64 = amps.iter().map(|a| Complex64::from_polar(*a, rng.gen_range(0.0..2.0 * PI))).sum();
                acc += s.norm_sqr();
            }
            acc / draws.max(1) as f64
        }
    }
}

/// Power collected at a surface centre: random-phase combination of the
/// single-element received powers, times the number of elements.
pub fn ris_impinging_power(element_powers: &[f64], n_r: usize, draws: usize, rng: &mut impl Rng) -> f64 {
    combine_random_phase(element_powers, draws, rng) * n_r as f64
}

/// Random-phase combination of every path of every source.
pub fn received_power(
    sources: &[&RadiatingSource],
    paths: &[&[PropagationPath]],
    params: &RtParams,
    rng: &mut impl Rng,
) -> f64 {
    let powers: Vec<f64> =
        sources.iter().zip(paths).flat_map(|(s, ps)| ps.iter().map(move |p| path_power(s, p, params))).collect();
    combine_random_phase(&powers, params.phase_draws, rng)
}

/// Index of the largest power, lowest index on ties.
pub fn associate(powers: &[f64]) -> usize {
    assert!(!powers.is_empty(), "association needs at least one BS");
    let mut best = 0;
    for (m, &p) in powers.iter().enumerate() {
        if p > powers[best] {
            best = m;
        }
    }
    best
}

/// RNG stream for one evaluation point.
pub fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream reserved for surface impinging powers, disjoint from point streams.
fn surface_rng(seed: u64, site: usize) -> ChaCha8Rng {
    point_rng(seed, u64::MAX - site as u64)
}

/// BS sources plus one surface source per deployed RIS with a serving BS.
/// Surface power is the ray-traced impinging power from that BS.
pub fn build_sources(
    mesh: &TriangleMesh,
    inst: &PlanningInstance,
    surfaces: &[DeployedRis],
    params: &RtParams,
) -> Vec<RadiatingSource> {
    let mut sources: Vec<RadiatingSource> =
        inst.bss.iter().enumerate().map(|(m, b)| RadiatingSource::bs(b.frame.clone(), b.n_b, inst.power, m)).collect();
    for r in surfaces {
        let Some(m) = r.bs else { continue };
        let frame = inst.css[r.cs].clone();
        let paths = find_paths(mesh, sources[m].frame.origin(), frame.origin(), params.max_bounces);
        let elem: Vec<f64> = paths
            .iter()
            .map(|p| {
                let local_z = p.arrival().dot(frame.axis_z()).clamp(-1.0, 1.0);
                path_power(&sources[m], p, params) * element_gain(local_z.acos(), params.mu)
            })
            .collect();
        let mut rng = surface_rng(params.seed, r.cs);
        let power = ris_impinging_power(&elem, inst.ris_geom.n_elements(), params.phase_draws, &mut rng);
        sources.push(RadiatingSource::ris(frame, inst.ris_geom, r.config.clone(), params.mu, power, m, r.cs));
    }
    sources
}

/// Paths from every source to every point, `[point][source]`.
pub fn trace_all(
    mesh: &TriangleMesh,
    sources: &[RadiatingSource],
    points: &[Vec3],
    max_bounces: usize,
) -> Vec<Vec<Vec<PropagationPath>>> {
    points
        .par_iter()
        .map(|&u| sources.iter().map(|s| find_paths(mesh, s.frame.origin(), u, max_bounces)).collect())
        .collect()
}

/// Per-point power from each BS (its own paths plus its surfaces) and the
/// association; point `i` draws from stream `i`.
pub fn evaluate_points(
    sources: &[RadiatingSource],
    paths: &[Vec<Vec<PropagationPath>>],
    points: &[Vec3],
    n_bs: usize,
    params: &RtParams,
    power_cap: f64,
) -> CoverageReport {
    let reports: Vec<PointReport> = points
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let mut rng = point_rng(params.seed, i as u64);
            let per_bs: Vec<f64> = (0..n_bs)
                .map(|m| {
                    let (srcs, ps): (Vec<&RadiatingSource>, Vec<&[PropagationPath]>) = sources
                        .iter()
                        .zip(&paths[i])
                        .filter(|(s, _)| s.bs == m)
                        .map(|(s, p)| (s, p.as_slice()))
                        .unzip();
                    received_power(&srcs, &ps, params, &mut rng)
                })
                .collect();
            let m = associate(&per_bs);
            PointReport {
                position: u,
                power: per_bs[m],
                snr: per_bs[m] / params.sigma2,
                serving_bs: Some(m),
                serving_ris: None,
            }
        })
        .collect();
    CoverageReport::from_points(reports, power_cap)
}

/// Traces and evaluates `points` in one call.
pub fn evaluate_rt(
    mesh: &TriangleMesh,
    sources: &[RadiatingSource],
    points: &[Vec3],
    n_bs: usize,
    params: &RtParams,
    power_cap: f64,
) -> CoverageReport {
    let paths = trace_all(mesh, sources, points, params.max_bounces);
    evaluate_points(sources, &paths, points, n_bs, params, power_cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub z: f64,
}

impl GridSpec {
    /// Cell centres, row-major with `y` outer.
    pub fn points(&self) -> Result<Vec<Vec3>> {
        if self.nx == 0 || self.ny == 0 || !(self.x1 > self.x0) || !(self.y1 > self.y0) {
            return Err(Error::Config("heatmap grid must have positive extent and cells".into()));
        }
        let (dx, dy) = ((self.x1 - self.x0) / self.nx as f64, (self.y1 - self.y0) / self.ny as f64);
        Ok((0..self.ny)
            .flat_map(|j| {
                (0..self.nx)
                    .map(move |i| Vec3::new(self.x0 + (i as f64 + 0.5) * dx, self.y0 + (j as f64 + 0.5) * dy, self.z))
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub grid: GridSpec,
    pub report: CoverageReport,
}

pub fn coverage_heatmap(
    mesh: &TriangleMesh,
    sources: &[RadiatingSource],
    grid: &GridSpec,
    n_bs: usize,
    params: &RtParams,
    power_cap: f64,
) -> Result<Heatmap> {
    let points = grid.points()?;
    Ok(Heatmap { grid: *grid, report: evaluate_rt(mesh, sources, &points, n_bs, params, power_cap) })
}

/// Floor and cap of the PGM grey scale, in dBm.
pub const PGM_FLOOR_DBM: f64 = -120.0;
pub const PGM_CAP_DBM: f64 = -65.0;

pub fn pgm_level(power_w: f64) -> u8 {
    if !(power_w > 0.0) {
        return 0;
    }
    let dbm = watts_to_dbm(power_w);
    let v = (dbm - PGM_FLOOR_DBM) / (PGM_CAP_DBM - PGM_FLOOR_DBM) * 255.0;
    v.round().clamp(0.0, 255.0) as u8
}

impl Heatmap {
    /// `x,y,power_dBm,snr_dB,serving_bs`, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y", "power_dBm", "snr_dB", "serving_bs"]).expect("in-memory write");
        for p in &self.report.points {
            w.write_record([
                format!("{:.6}", p.position.x),
                format!("{:.6}", p.position.y),
                format!("{:.6}", watts_to_dbm(p.power)),
                format!("{:.6}", 10.0 * p.snr.log10()),
                p.serving_bs.map(|b| b.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// Binary 8-bit PGM, top row at the largest `y`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        for j in (0..ny).rev() {
            for i in 0..nx {
                out.push(pgm_level(self.report.points[j * nx + i].power));
            }
        }
        out
    }
}
