use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use risa_core::experiment::{
    gen_synthetic, random_baseline, run_sweep, station_scene, summarize, summary_csv, sweep_csv, ExperimentConfig,
};
use risa_core::plan::{self, evaluate_plan_model, Deployment, PlanModel, PlanningInstance};
use risa_core::report::{from_db, to_db, CoverageReport};
use risa_core::rt::{build_sources, coverage_heatmap, evaluate_rt, load_mesh, GridSpec, TriangleMesh};
use risa_core::Error;

/// Plan reconfigurable surface deployments and check them by ray tracing.
#[derive(Debug, Parser)]
#[command(name = "risa", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Re-run rounding with the uncovered point first when rounding fails.
    #[arg(long, global = true, value_enum)]
    repair: Option<Repair>,
    /// Report the test points whose SNR falls below this value.
    #[arg(long, global = true)]
    snr_threshold_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Repair {
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SceneKind {
    Synthetic,
    Station,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a planning instance and its scene mesh.
    Genscene {
        #[arg(long, value_enum, default_value_t = SceneKind::Synthetic)]
        scene: SceneKind,
        /// Candidate sites (synthetic scenes only).
        #[arg(long, default_value_t = 10)]
        sites: usize,
        #[arg(long, default_value_t = 4)]
        budget: usize,
        /// Test points; defaults to the configured count.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run the planner on an instance.
    Plan {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Draw a random deployment of the instance's budget.
    Baseline {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Ray-traced coverage heatmap of a deployment.
    Raytrace {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        deployment: PathBuf,
        /// Scene mesh (OBJ); free space when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Grid as `x0,y0,x1,y1,nx,ny`; defaults to the test-point bounding box at 50 x 50.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Monte Carlo sweep over site counts, budgets and seeds.
    Sweep {
        /// Run cells one after another instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Coverage metrics of a deployment, in the model and optionally by ray tracing.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        deployment: PathBuf,
        #[arg(long)]
        scene: Option<PathBuf>,
    },
}

/// Failure classes, mapped onto the exit status.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Infeasible(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Infeasible(e) | Failure::Internal(e) => e,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) | Error::UncoveredTestPoint(_) => Failure::Infeasible(e.into()),
            Error::InvalidInstance(_)
            | Error::Config(_)
            | Error::MeshParse { .. }
            | Error::InvalidFrame(_)
            | Error::DimensionMismatch(_) => Failure::Input(e.into()),
            _ => Failure::Internal(e.into()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read_input(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Input)
}

fn write_output(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Outcome<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display())).map_err(Failure::Internal)?;
    Ok(path)
}

fn load_config(common: &Common) -> Outcome<ExperimentConfig> {
    match &common.config {
        Some(p) => Ok(ExperimentConfig::from_toml(&read_input(p)?)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn load_instance(path: &Path) -> Outcome<PlanningInstance> {
    Ok(PlanningInstance::from_json(&read_input(path)?)?)
}

fn load_deployment(path: &Path, inst: &PlanningInstance) -> Outcome<Deployment> {
    let dep = Deployment::from_json(&read_input(path)?)?;
    if dep.x_star.len() != inst.n_cs() || dep.assoc.len() != inst.n_tp() {
        return Err(Failure::Input(anyhow::anyhow!(
            "deployment covers {} sites and {} test points, instance has {} and {}",
            dep.x_star.len(),
            dep.assoc.len(),
            inst.n_cs(),
            inst.n_tp()
        )));
    }
    Ok(dep)
}

fn load_scene(path: Option<&Path>) -> Outcome<TriangleMesh> {
    match path {
        Some(p) => Ok(load_mesh(&read_input(p)?)?),
        None => Ok(TriangleMesh::default()),
    }
}

fn parse_grid(spec: &str, z: f64) -> Outcome<GridSpec> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Failure::Input(anyhow::anyhow!("grid must be x0,y0,x1,y1,nx,ny, got {spec:?}"));
    if parts.len() != 6 {
        return Err(bad());
    }
    let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad());
    let u = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
    let grid = GridSpec { x0: f(0)?, y0: f(1)?, x1: f(2)?, y1: f(3)?, nx: u(4)?, ny: u(5)?, z };
    grid.points()?;
    Ok(grid)
}

fn default_grid(inst: &PlanningInstance) -> GridSpec {
    let pts = &inst.test_points;
    let fold =
        |f: fn(&risa_core::Vec3) -> f64, pick: fn(f64, f64) -> f64, init: f64| pts.iter().map(f).fold(init, pick);
    let (x0, x1) = (fold(|p| p.x, f64::min, f64::INFINITY), fold(|p| p.x, f64::max, f64::NEG_INFINITY));
    let (y0, y1) = (fold(|p| p.y, f64::min, f64::INFINITY), fold(|p| p.y, f64::max, f64::NEG_INFINITY));
    GridSpec {
        x0,
        y0,
        x1: if x1 > x0 { x1 } else { x0 + 1.0 },
        y1: if y1 > y0 { y1 } else { y0 + 1.0 },
        nx: 50,
        ny: 50,
        z: pts[0].z,
    }
}

fn summary(report: &CoverageReport, threshold_db: Option<f64>) -> Value {
    let mut v = json!({
        "min_snr_db": to_db(report.min_snr),
        "mean_snr_db": to_db(report.mean_snr),
        "jfi": report.jfi,
        "points": report.points.len(),
    });
    if let Some(th) = threshold_db {
        let below = report.points.iter().filter(|p| p.snr < from_db(th)).count();
        v["snr_threshold_db"] = json!(th);
        v["points_below_threshold"] = json!(below);
    }
    v
}

fn write_report(common: &Common, stem: &str, report: &CoverageReport) -> Outcome<PathBuf> {
    match common.format {
        Format::Csv => write_output(&common.out_dir, &format!("{stem}.csv"), report.to_csv()),
        Format::Json => {
            let body = json!({ "summary": summary(report, common.snr_threshold_db), "report": report });
            write_output(&common.out_dir, &format!("{stem}.json"), pretty(&body))
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

fn threshold_warnings(report: &CoverageReport, threshold_db: Option<f64>, what: &str) -> Vec<String> {
    let Some(th) = threshold_db else { return Vec::new() };
    let below = report.points.iter().filter(|p| p.snr < from_db(th)).count();
    if below == 0 {
        Vec::new()
    } else {
        vec![format!("{below} of {} test points below {th} dB ({what})", report.points.len())]
    }
}

fn run(cli: Cli) -> Outcome<Value> {
    let common = &cli.common;
    let cfg = load_config(common)?;
    fs::create_dir_all(&common.out_dir)
        .with_context(|| format!("creating {}", common.out_dir.display()))
        .map_err(Failure::Internal)?;
    let mut log = json!({ "seed": common.seed, "bca": cfg.bca });
    let mut warnings: Vec<String> = Vec::new();
    match &cli.command {
        Command::Genscene { scene, sites, budget, points } => {
            let (inst, mesh) = match scene {
                SceneKind::Synthetic => {
                    let mut c = cfg.clone();
                    if let Some(t) = points {
                        c.network.n_test_points = *t;
                    }
                    (gen_synthetic(&c, *sites, *budget, common.seed)?, TriangleMesh::default())
                }
                SceneKind::Station => {
                    let s = station_scene(&cfg)?;
                    let t = points.unwrap_or(cfg.network.n_test_points);
                    (s.instance(&cfg, t, *budget, common.seed)?, s.mesh)
                }
            };
            let a = write_output(&common.out_dir, "instance.json", inst.to_json())?;
            let b = write_output(&common.out_dir, "scene.obj", mesh.to_obj())?;
            log["command"] = json!("genscene");
            log["outputs"] = json!([a, b]);
        }
        Command::Plan { instance } => {
            let inst = load_instance(instance)?;
            let model = PlanModel::new(&inst)?;
            let relaxed = plan::bca(&model, &cfg.bca)?;
            if !relaxed.converged {
                warnings.push(format!(
                    "block coordinate ascent stopped at the cap of {} outer iterations",
                    cfg.bca.max_outer
                ));
            }
            let dep = match plan::round_solution(&model, &relaxed) {
                Err(Error::UncoveredTestPoint(t)) if common.repair == Some(Repair::Greedy) => {
                    warnings.push(format!("rounding left test point {t} uncovered; greedy repair applied"));
                    plan::round_with_repair(&model, &relaxed)?
                }
                other => other?,
            };
            let report = evaluate_plan_model(&model, &dep, cfg.power_cap_w())?;
            warnings.extend(threshold_warnings(&report, common.snr_threshold_db, "model"));
            let a = write_output(&common.out_dir, "deployment.json", dep.to_json())?;
            let b = write_report(common, "report", &report)?;
            log["command"] = json!("plan");
            log["outer_iterations"] = json!(relaxed.trace.len());
            log["objective_trace"] = json!(relaxed.trace);
            log["converged"] = json!(relaxed.converged);
            log["relaxed_objective"] = json!(relaxed.objective());
            log["deployed_sites"] = json!(dep.deployed_sites());
            log["summary"] = summary(&report, common.snr_threshold_db);
            log["outputs"] = json!([a, b]);
        }
        Command::Baseline { instance } => {
            let inst = load_instance(instance)?;
            let model = PlanModel::new(&inst)?;
            let dep = random_baseline(&model, inst.budget, common.seed)?;
            let report = evaluate_plan_model(&model, &dep, cfg.power_cap_w())?;
            warnings.extend(threshold_warnings(&report, common.snr_threshold_db, "model"));
            let a = write_output(&common.out_dir, "deployment.json", dep.to_json())?;
            let b = write_report(common, "report", &report)?;
            log["command"] = json!("baseline");
            log["deployed_sites"] = json!(dep.deployed_sites());
            log["summary"] = summary(&report, common.snr_threshold_db);
            log["outputs"] = json!([a, b]);
        }
        Command::Raytrace { instance, deployment, scene, grid } => {
            let inst = load_instance(instance)?;
            let dep = load_deployment(deployment, &inst)?;
            let mesh = load_scene(scene.as_deref())?;
            let z = inst.test_points[0].z;
            let grid = match grid {
                Some(g) => parse_grid(g, z)?,
                None => default_grid(&inst),
            };
            let params = cfg.rt_params(common.seed);
            params.validate()?;
            let sources = build_sources(&mesh, &inst, &dep.deployed, &params);
            let hm = coverage_heatmap(&mesh, &sources, &grid, inst.n_bs(), &params, cfg.power_cap_w())?;
            warnings.extend(threshold_warnings(&hm.report, common.snr_threshold_db, "ray traced"));
            let a = match common.format {
                Format::Csv => write_output(&common.out_dir, "heatmap.csv", hm.to_csv())?,
                Format::Json => write_output(&common.out_dir, "heatmap.json", pretty(&hm))?,
            };
            let b = write_output(&common.out_dir, "heatmap.pgm", hm.to_pgm())?;
            log["command"] = json!("raytrace");
            log["grid"] = json!(grid);
            log["summary"] = summary(&hm.report, common.snr_threshold_db);
            log["outputs"] = json!([a, b]);
        }
        Command::Sweep { serial } => {
            let mut c = cfg.clone();
            c.sweep.repair |= common.repair == Some(Repair::Greedy);
            let runs = run_sweep(&c, !serial);
            let failures = runs.iter().filter(|r| !r.row.error.is_empty()).count();
            if failures > 0 {
                warnings.push(format!("{failures} of {} runs failed; see the error column", runs.len()));
            }
            let unconverged = runs.iter().filter(|r| r.row.converged == Some(false)).count();
            if unconverged > 0 {
                warnings.push(format!("{unconverged} runs stopped at the outer iteration cap"));
            }
            if let Some(th) = common.snr_threshold_db {
                let below = runs.iter().filter(|r| r.row.min_snr_model_db.is_some_and(|v| v < th)).count();
                log["runs_below_threshold"] = json!(below);
                log["snr_threshold_db"] = json!(th);
            }
            let rows = summarize(&runs);
            let (a, b) = match common.format {
                Format::Csv => (
                    write_output(&common.out_dir, "results.csv", sweep_csv(&runs)?)?,
                    write_output(&common.out_dir, "summary.csv", summary_csv(&rows)?)?,
                ),
                Format::Json => {
                    let results: Vec<_> = runs.iter().map(|r| &r.row).collect();
                    (
                        write_output(&common.out_dir, "results.json", pretty(&results))?,
                        write_output(&common.out_dir, "summary.json", pretty(&rows))?,
                    )
                }
            };
            log["command"] = json!("sweep");
            log["runs"] = json!(runs.len());
            log["failures"] = json!(failures);
            log["outer_iterations"] = json!(runs.iter().map(|r| r.row.bca_iterations).collect::<Vec<_>>());
            log["outputs"] = json!([a, b]);
        }
        Command::Evaluate { instance, deployment, scene } => {
            let inst = load_instance(instance)?;
            let dep = load_deployment(deployment, &inst)?;
            let model = PlanModel::new(&inst)?;
            plan::check_deployment(&model, &dep)?;
            let report = evaluate_plan_model(&model, &dep, cfg.power_cap_w())?;
            warnings.extend(threshold_warnings(&report, common.snr_threshold_db, "model"));
            let mut outputs = vec![write_report(common, "model_report", &report)?];
            log["model"] = summary(&report, common.snr_threshold_db);
            if let Some(path) = scene {
                let mesh = load_scene(Some(path))?;
                let params = cfg.rt_params(common.seed);
                params.validate()?;
                let sources = build_sources(&mesh, &inst, &dep.deployed, &params);
                let rt = evaluate_rt(&mesh, &sources, &inst.test_points, inst.n_bs(), &params, cfg.power_cap_w());
                warnings.extend(threshold_warnings(&rt, common.snr_threshold_db, "ray traced"));
                outputs.push(write_report(common, "rt_report", &rt)?);
                log["ray_traced"] = summary(&rt, common.snr_threshold_db);
            }
            log["command"] = json!("evaluate");
            log["outputs"] = json!(outputs);
        }
    }
    log["warnings"] = json!(warnings);
    for w in &warnings {
        log::warn!("{w}");
    }
    write_output(&common.out_dir, "run_log.json", pretty(&log))?;
    Ok(log)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(log) => {
            let keys = ["summary", "model", "ray_traced"];
            for k in keys {
                if let Some(s) = log.get(k) {
                    println!("{k}: {s}");
                }
            }
            if let Some(o) = log.get("outputs") {
                println!("outputs: {o}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
