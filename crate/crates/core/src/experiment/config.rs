use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::BcaOptions;
use crate::report::dbm_to_watts;
use crate::rt::RtParams;

/// Experiment configuration. Powers are stated in dBm here and converted to
/// watts by the accessor methods; everything downstream works in watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub radio: RadioConfig,
    pub area: AreaConfig,
    pub network: NetworkConfig,
    pub bca: BcaOptions,
    pub rt: RtConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub power_dbm: f64,
    pub frequency_ghz: f64,
    pub noise_dbm: f64,
    pub beta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AreaConfig {
    pub width: f64,
    pub depth: f64,
    pub test_point_height: f64,
    pub site_height: f64,
    pub bs_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub n_bs: usize,
    pub n_sites: Vec<usize>,
    pub n_test_points: usize,
    pub bs_antennas: usize,
    pub ris_nh: usize,
    pub ris_nv: usize,
    pub ris_spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RtConfig {
    pub max_bounces: usize,
    pub phase_draws: usize,
    pub reflection_loss_db: f64,
    pub jfi_power_cap_dbm: f64,
    pub baseline_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub budgets: Vec<usize>,
    pub seeds: usize,
    pub base_seed: u64,
    pub ray_traced: bool,
    /// Fill the runtime column; off by default so outputs are reproducible.
    pub record_runtime: bool,
    pub repair: bool,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { power_dbm: 28.0, frequency_ghz: 26.0, noise_dbm: -80.0, beta: 2.0, mu: 0.5 }
    }
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self { width: 100.0, depth: 100.0, test_point_height: 1.5, site_height: 5.5, bs_height: 5.5 }
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_bs: 2,
            n_sites: vec![10, 20, 30],
            n_test_points: 100,
            bs_antennas: 2,
            ris_nh: 350,
            ris_nv: 175,
            ris_spacing: 0.5,
        }
    }
}

impl Default for RtConfig {
    fn default() -> Self {
        Self {
            max_bounces: 2,
            phase_draws: 100,
            reflection_loss_db: 6.0,
            jfi_power_cap_dbm: -65.0,
            baseline_draws: 100,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            budgets: vec![2, 4, 6, 8, 10],
            seeds: 1000,
            base_seed: 0,
            ray_traced: false,
            record_runtime: false,
            repair: false,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            radio: RadioConfig::default(),
            area: AreaConfig::default(),
            network: NetworkConfig::default(),
            bca: BcaOptions::default(),
            rt: RtConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        let r = &self.radio;
        for (v, name) in [
            (r.power_dbm, "radio.power_dbm"),
            (r.noise_dbm, "radio.noise_dbm"),
            (self.rt.jfi_power_cap_dbm, "rt.jfi_power_cap_dbm"),
            (self.rt.reflection_loss_db, "rt.reflection_loss_db"),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if !(r.frequency_ghz > 0.0) || !(r.beta > 0.0) || !(r.mu > 0.0) {
            return bad("radio.frequency_ghz, radio.beta and radio.mu must be positive");
        }
        let a = &self.area;
        if !(a.width > 0.0 && a.depth > 0.0) {
            return bad("area dimensions must be positive");
        }
        let n = &self.network;
        if !(1..=4).contains(&n.n_bs) {
            return bad("network.n_bs must be between 1 and 4 (one per area corner)");
        }
        if n.n_sites.is_empty() || n.n_sites.contains(&0) {
            return bad("network.n_sites must list positive site counts");
        }
        if n.n_test_points == 0 || n.bs_antennas == 0 || n.ris_nh == 0 || n.ris_nv == 0 || !(n.ris_spacing > 0.0) {
            return bad("network sizes must be positive");
        }
        let min_sites = *n.n_sites.iter().min().expect("nonempty");
        if self.sweep.budgets.is_empty() || self.sweep.budgets.iter().any(|&l| l == 0 || l > min_sites) {
            return Err(Error::Config(format!("sweep.budgets must lie in [1, {min_sites}] (the smallest site count)")));
        }
        if self.rt.max_bounces > 2 || self.rt.phase_draws == 0 {
            return bad("rt.max_bounces must be at most 2 and rt.phase_draws positive");
        }
        if !(self.bca.tol > 0.0) || self.bca.max_outer == 0 || !(self.bca.inner_tol > 0.0) || self.bca.inner_max == 0 {
            return bad("bca tolerances and caps must be positive");
        }
        Ok(())
    }

    pub fn power_w(&self) -> f64 {
        dbm_to_watts(self.radio.power_dbm)
    }

    pub fn noise_w(&self) -> f64 {
        dbm_to_watts(self.radio.noise_dbm)
    }

    pub fn power_cap_w(&self) -> f64 {
        dbm_to_watts(self.rt.jfi_power_cap_dbm)
    }

    pub fn rt_params(&self, seed: u64) -> RtParams {
        RtParams {
            beta: self.radio.beta,
            mu: self.radio.mu,
            frequency: self.radio.frequency_ghz * 1e9,
            reflection_loss_db: self.rt.reflection_loss_db,
            max_bounces: self.rt.max_bounces,
            phase_draws: self.rt.phase_draws,
            seed,
            sigma2: self.noise_w(),
        }
    }
}
