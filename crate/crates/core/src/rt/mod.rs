//! Deterministic specular ray tracer for evaluating deployments.
//!
//! Paths up to two reflections are found with the image method. A deployed
//! surface is modelled as in a lightweight system-level simulator: the power
//! reaching its centre through one element is combined over paths with random
//! phases and scaled by the element count, then re-radiated through the
//! array beampattern of its configuration.

mod mesh;
mod paths;
mod radio;

pub use mesh::{block_mesh, box_mesh, from_triangles, load_mesh, quad, TriangleMesh};
pub use paths::{find_paths, ray_triangle, segment_clear, PropagationPath};
pub use radio::{
    associate, build_sources, combine_random_phase, coverage_heatmap, element_gain, evaluate_points, evaluate_rt,
    path_power, pgm_level, point_rng, received_power, ris_beampattern_gain, ris_impinging_power, trace_all, GridSpec,
    Heatmap, RadiatingSource, RtParams, SourceKind, PGM_CAP_DBM, PGM_FLOOR_DBM,
};
