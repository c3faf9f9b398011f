//! Coverage metrics shared by the model evaluator and the ray tracer.

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;

/// Jain's fairness index `(sum x)^2 / (n sum x^2)`; all-zero input gives 1.
///
/// Panics on empty input or negative entries.
pub fn jfi(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "jfi of an empty set");
    assert!(values.iter().all(|v| *v >= 0.0), "jfi needs nonnegative values");
    let s: f64 = values.iter().sum();
    let s2: f64 = values.iter().map(|v| v * v).sum();
    if s2 == 0.0 {
        return 1.0;
    }
    let n = values.len() as f64;
    (s * s / (n * s2)).clamp(1.0 / n, 1.0)
}

/// JFI of received powers after capping each at `cap` watts.
pub fn capped_jfi(powers: &[f64], cap: f64) -> f64 {
    let capped: Vec<f64> = powers.iter().map(|p| p.min(cap)).collect();
    jfi(&capped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub position: Vec3,
    /// Received power in watts.
    pub power: f64,
    /// Linear SNR.
    pub snr: f64,
    pub serving_bs: Option<usize>,
    pub serving_ris: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub points: Vec<PointReport>,
    pub min_snr: f64,
    pub mean_snr: f64,
    pub jfi: f64,
}

impl CoverageReport {
    /// Builds the summary; JFI is computed on powers capped at `power_cap`.
    pub fn from_points(points: Vec<PointReport>, power_cap: f64) -> Self {
        assert!(!points.is_empty(), "coverage report needs at least one point");
        let min_snr = points.iter().map(|p| p.snr).fold(f64::INFINITY, f64::min);
        let mean_snr = points.iter().map(|p| p.snr).sum::<f64>() / points.len() as f64;
        let powers: Vec<f64> = points.iter().map(|p| p.power).collect();
        let jfi = capped_jfi(&powers, power_cap);
        Self { points, min_snr, mean_snr, jfi }
    }

    /// `x,y,z,power_dbm,snr_db,serving_bs,serving_ris`, one row per point.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record(["x", "y", "z", "power_dbm", "snr_db", "serving_bs", "serving_ris"]).expect("in-memory write");
        for p in &self.points {
            w.write_record([
                format!("{:.6}", p.position.x),
                format!("{:.6}", p.position.y),
                format!("{:.6}", p.position.z),
                format!("{:.6}", watts_to_dbm(p.power)),
                format!("{:.6}", to_db(p.snr)),
                opt(p.serving_bs),
                opt(p.serving_ris),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    from_db(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    to_db(w) + 30.0
}
