//! Configuration, scenario generation, the random baseline and sweeps.

mod compare;
mod config;
mod scenario;
mod sweep;

pub use compare::{compare_station, DrawOutcome, StationComparison};
pub use config::{AreaConfig, ExperimentConfig, NetworkConfig, RadioConfig, RtConfig, SweepConfig};
pub use scenario::{corner_bss, gen_synthetic, ris_geometry, station_scene, StationScene};
pub use sweep::{
    random_baseline, random_draw, run_one, run_sweep, summarize, summary_csv, sweep_cells, sweep_csv, RandomDraw,
    SummaryRow, SweepRow, SweepRun,
};
