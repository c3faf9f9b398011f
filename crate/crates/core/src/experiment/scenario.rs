use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use crate::channel::ArrayGeometry;
use crate::error::{Error, Result};
use crate::geom::{Frame3, Vec3};
use crate::plan::{build_coefficients, BaseStation, LineOfSight, PlanningInstance};
use crate::rt::{block_mesh, from_triangles, quad, segment_clear, TriangleMesh};

/// Surface geometry from the configuration.
pub fn ris_geometry(cfg: &ExperimentConfig) -> Result<ArrayGeometry> {
    let n = &cfg.network;
    ArrayGeometry::new(n.ris_nh, n.ris_nv, n.ris_spacing)
}

/// BS positions at the area corners, in the order
/// `(0, 0)`, `(W, D)`, `(W, 0)`, `(0, D)`.
pub fn corner_bss(cfg: &ExperimentConfig) -> Vec<BaseStation> {
    let a = &cfg.area;
    let corners = [(0.0, 0.0), (a.width, a.depth), (a.width, 0.0), (0.0, a.depth)];
    corners[..cfg.network.n_bs]
        .iter()
        .map(|&(x, y)| BaseStation {
            frame: Frame3::identity_at(Vec3::new(x, y, a.bs_height)),
            n_b: cfg.network.bs_antennas,
        })
        .collect()
}

/// Synthetic scenario: corner BSs, `n_sites` candidate sites uniform along
/// the perimeter facing the centroid, uniform test points. The instance
/// depends only on `(seed, n_sites)`, and test points depend only on the
/// seed, so runs with different site counts share their test points.
/// Test points that no candidate site can serve are redrawn.
pub fn gen_synthetic(cfg: &ExperimentConfig, n_sites: usize, budget: usize, seed: u64) -> Result<PlanningInstance> {
    let a = &cfg.area;
    let mut tp_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cs_rng = ChaCha8Rng::seed_from_u64(seed);
    cs_rng.set_stream(1);
    let centroid = Vec3::new(a.width / 2.0, a.depth / 2.0, a.site_height);
    let perimeter = 2.0 * (a.width + a.depth);
    let css = (0..n_sites)
        .map(|_| {
            let s = cs_rng.gen_range(0.0..perimeter);
            let (x, y) = if s < a.width {
                (s, 0.0)
            } else if s < a.width + a.depth {
                (a.width, s - a.width)
            } else if s < 2.0 * a.width + a.depth {
                (2.0 * a.width + a.depth - s, a.depth)
            } else {
                (0.0, perimeter - s)
            };
            let o = Vec3::new(x, y, a.site_height);
            Frame3::facing(o, Vec3::new(centroid.x - x, centroid.y - y, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut inst = PlanningInstance {
        bss: corner_bss(cfg),
        css,
        test_points: Vec::new(),
        budget,
        ris_geom: ris_geometry(cfg)?,
        beta: cfg.radio.beta,
        power: cfg.power_w(),
        sigma2: cfg.noise_w(),
        line_of_sight: None,
    };
    let draw =
        |rng: &mut ChaCha8Rng| Vec3::new(rng.gen_range(0.0..a.width), rng.gen_range(0.0..a.depth), a.test_point_height);
    inst.test_points = (0..cfg.network.n_test_points).map(|_| draw(&mut tp_rng)).collect();
    for _ in 0..1000 {
        let c = build_coefficients(&inst);
        let uncovered: Vec<usize> =
            (0..inst.n_tp()).filter(|&t| (0..c.m).all(|m| (0..c.n).all(|n| c.get(t, m, n) == 0.0))).collect();
        if uncovered.is_empty() {
            break;
        }
        for t in uncovered {
            inst.test_points[t] = draw(&mut tp_rng);
        }
    }
    inst.validate()?;
    Ok(inst)
}

/// Station-like hall used for ray-traced comparisons. This is a procedural
/// stand-in: a 60 m by 30 m hall with an open ceiling, raised platforms and
/// pillar rows. A dividing wall at `x = 40` leaves only a passage along the
/// north side, so the east end is a dead zone for the BSs at the west end.
/// Test points are drawn in that dead zone.
pub struct StationScene {
    pub mesh: TriangleMesh,
    pub bss: Vec<BaseStation>,
    /// Twenty candidate sites.
    pub css: Vec<Frame3>,
    pub length: f64,
    pub width: f64,
}

const HALL_X: f64 = 60.0;
const HALL_Y: f64 = 30.0;
const HALL_Z: f64 = 8.0;
const PILLAR_ROWS: [f64; 2] = [11.0, 19.0];
const PILLAR_COLS: [f64; 4] = [12.0, 24.0, 36.0, 50.0];
const PILLAR_HALF: f64 = 0.3;
/// Dividing wall: `x`, then its extent in `y`.
const DIVIDER: (f64, f64, f64) = (40.0, 0.0, 22.0);
const SITE_OFFSET: f64 = 0.01;
const MARGIN: f64 = 0.5;

fn open_block(lo: Vec3, hi: Vec3, keep_face: impl Fn(Vec3) -> bool) -> Result<TriangleMesh> {
    let b = block_mesh(lo, hi)?;
    let keep: Vec<_> = (0..b.len())
        .filter(|&k| keep_face(b.normal(k)))
        .map(|k| {
            let [p, q, r] = b.triangle(k);
            (p, q, r)
        })
        .collect();
    from_triangles(&keep)
}

pub fn station_scene(cfg: &ExperimentConfig) -> Result<StationScene> {
    let v = Vec3::new;
    let mut tris = Vec::new();
    quad(&mut tris, [v(0.0, 0.0, 0.0), v(HALL_X, 0.0, 0.0), v(HALL_X, HALL_Y, 0.0), v(0.0, HALL_Y, 0.0)], Vec3::Z);
    quad(&mut tris, [v(0.0, 0.0, 0.0), v(HALL_X, 0.0, 0.0), v(HALL_X, 0.0, HALL_Z), v(0.0, 0.0, HALL_Z)], Vec3::Y);
    quad(
        &mut tris,
        [v(0.0, HALL_Y, 0.0), v(HALL_X, HALL_Y, 0.0), v(HALL_X, HALL_Y, HALL_Z), v(0.0, HALL_Y, HALL_Z)],
        -Vec3::Y,
    );
    quad(&mut tris, [v(0.0, 0.0, 0.0), v(0.0, HALL_Y, 0.0), v(0.0, HALL_Y, HALL_Z), v(0.0, 0.0, HALL_Z)], Vec3::X);
    quad(
        &mut tris,
        [v(HALL_X, 0.0, 0.0), v(HALL_X, HALL_Y, 0.0), v(HALL_X, HALL_Y, HALL_Z), v(HALL_X, 0.0, HALL_Z)],
        -Vec3::X,
    );
    // Dividing wall, reflective on both faces.
    let (wx, wy0, wy1) = DIVIDER;
    let wall = [v(wx, wy0, 0.0), v(wx, wy1, 0.0), v(wx, wy1, HALL_Z), v(wx, wy0, HALL_Z)];
    quad(&mut tris, wall, -Vec3::X);
    quad(&mut tris, wall, Vec3::X);
    let mut mesh = from_triangles(&tris)?;
    for (y0, y1) in [(2.0, 6.0), (24.0, 28.0)] {
        mesh.merge(&open_block(v(6.0, y0, 0.0), v(34.0, y1, 1.0), |n| n.z > -0.5)?);
    }
    for &y in &PILLAR_ROWS {
        for &x in &PILLAR_COLS {
            let lo = v(x - PILLAR_HALF, y - PILLAR_HALF, 0.0);
            let hi = v(x + PILLAR_HALF, y + PILLAR_HALF, HALL_Z);
            mesh.merge(&open_block(lo, hi, |n| n.z.abs() < 0.5)?);
        }
    }
    let h = cfg.area.site_height;
    let bs_h = cfg.area.bs_height;
    let bss = [v(2.0, 3.0, bs_h), v(2.0, HALL_Y - 3.0, bs_h)]
        .into_iter()
        .take(cfg.network.n_bs.clamp(1, 2))
        .map(|p| BaseStation { frame: Frame3::identity_at(p), n_b: cfg.network.bs_antennas })
        .collect();
    let site = |x: f64, y: f64, n: Vec3| Frame3::facing(v(x, y, h) + n * SITE_OFFSET, n);
    let mut css = Vec::new();
    for x in [10.0, 20.0, 30.0, 48.0] {
        css.push(site(x, HALL_Y, -Vec3::Y)?);
        css.push(site(x, 0.0, Vec3::Y)?);
    }
    // End wall, facing the BSs down the hall.
    for y in [4.0, 10.0, 16.0, 22.0, 25.0, 28.0] {
        css.push(site(HALL_X, y, -Vec3::X)?);
    }
    for y in [6.0, 14.0] {
        css.push(site(wx, y, Vec3::X)?);
    }
    css.push(site(wx, 10.0, -Vec3::X)?);
    css.push(site(24.0, PILLAR_ROWS[0] - PILLAR_HALF, -Vec3::Y)?);
    css.push(site(36.0, PILLAR_ROWS[1] + PILLAR_HALF, Vec3::Y)?);
    css.push(site(PILLAR_COLS[3] - PILLAR_HALF, PILLAR_ROWS[0], -Vec3::X)?);
    Ok(StationScene { mesh, bss, css, length: HALL_X, width: HALL_Y })
}

impl StationScene {
    /// True if `p` is inside the hall and clear of pillars and the divider.
    pub fn walkable(&self, p: Vec3) -> bool {
        let inside_hall = p.x > MARGIN && p.x < HALL_X - MARGIN && p.y > MARGIN && p.y < HALL_Y - MARGIN;
        let near_pillar = PILLAR_ROWS.iter().any(|&y| {
            PILLAR_COLS
                .iter()
                .any(|&x| (p.x - x).abs() < PILLAR_HALF + MARGIN && (p.y - y).abs() < PILLAR_HALF + MARGIN)
        });
        let (wx, wy0, wy1) = DIVIDER;
        let near_wall = (p.x - wx).abs() < MARGIN && p.y > wy0 - MARGIN && p.y < wy1 + MARGIN;
        inside_hall && !near_pillar && !near_wall
    }

    /// True if `p` lies in the dead zone behind the divider.
    pub fn in_dead_zone(&self, p: Vec3) -> bool {
        p.x > DIVIDER.0 + MARGIN && p.y < DIVIDER.2 && self.walkable(p)
    }

    /// Whether `a` and `b` see each other through the hall geometry.
    pub fn visible(&self, a: Vec3, b: Vec3) -> bool {
        segment_clear(&self.mesh, a, b)
    }

    /// Planning instance with `n_points` dead-zone test points drawn from
    /// `seed`, carrying the scene's line-of-sight mask. Points that no
    /// visible site can serve are redrawn.
    pub fn instance(
        &self,
        cfg: &ExperimentConfig,
        n_points: usize,
        budget: usize,
        seed: u64,
    ) -> Result<PlanningInstance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bs_site: Vec<bool> = self
            .bss
            .iter()
            .flat_map(|b| self.css.iter().map(|cs| self.visible(b.frame.origin(), cs.origin())))
            .collect();
        let lit: Vec<usize> = (0..self.css.len())
            .filter(|&n| {
                (0..self.bss.len())
                    .any(|m| bs_site[m * self.css.len() + n] && self.css[n].fronting(self.bss[m].frame.origin()))
            })
            .collect();
        let mut test_points = Vec::with_capacity(n_points);
        let mut attempts = 0usize;
        while test_points.len() < n_points {
            attempts += 1;
            if attempts > 1000 * n_points.max(1) {
                return Err(Error::InvalidInstance("could not draw servable test points in the station scene".into()));
            }
            let p = Vec3::new(
                rng.gen_range(DIVIDER.0..HALL_X),
                rng.gen_range(DIVIDER.1..DIVIDER.2),
                cfg.area.test_point_height,
            );
            if self.in_dead_zone(p)
                && lit.iter().any(|&n| self.css[n].fronting(p) && self.visible(self.css[n].origin(), p))
            {
                test_points.push(p);
            }
        }
        let site_point =
            self.css.iter().flat_map(|cs| test_points.iter().map(|&u| self.visible(cs.origin(), u))).collect();
        let inst = PlanningInstance {
            bss: self.bss.clone(),
            css: self.css.clone(),
            test_points,
            budget,
            ris_geom: ris_geometry(cfg)?,
            beta: cfg.radio.beta,
            power: cfg.power_w(),
            sigma2: cfg.noise_w(),
            line_of_sight: Some(LineOfSight { bs_site, site_point }),
        };
        inst.validate()?;
        Ok(inst)
    }
}
