//! RIS-aware indoor network planning.
//!
//! The crate chooses where to deploy reconfigurable intelligent surfaces among
//! candidate sites so that the worst-case SNR over a set of test points is
//! maximised, then checks the plan with a deterministic specular ray tracer.
//!
//! * [`geom`]: vectors, local frames, spatial frequencies.
//! * [`channel`]: array responses, LoS channels, beam broadening gain model.
//! * [`lp`]: dense two-phase simplex for the planner's max-min subproblems.
//! * [`plan`]: block coordinate ascent planner, rounding and model evaluation.
//! * [`report`]: coverage summaries and the fairness index.
//! * [`rt`]: image-method ray tracer with the surface re-radiation model.
//! * [`experiment`]: configuration, scenario generation, baselines, sweeps.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod lp;
pub mod plan;
pub mod report;
pub mod rt;

pub use error::{Error, Result};
pub use geom::{Frame3, Vec3};
