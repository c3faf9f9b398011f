//! Array responses, line-of-sight channels and the beam-broadening gain model.
//!
//! Element indexing on a planar surface is `i = p * n_h + q` with `p` the
//! vertical (Psi) index and `q` the horizontal (Omega) index. A reflection
//! pattern is evaluated as `b(Omega, Psi)^H Phi 1`, i.e. a configuration whose
//! phase at element `(p, q)` equals `2 pi delta (p Psi0 + q Omega0)` steers the
//! re-radiated beam toward `(Omega0, Psi0)` for broadside incidence.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Frame3, Vec3};

pub type ComplexVector = Vec<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_h: usize,
    pub n_v: usize,
    pub delta: f64,
}

impl ArrayGeometry {
    pub fn new(n_h: usize, n_v: usize, delta: f64) -> Result<Self> {
        let g = Self { n_h, n_v, delta };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_h == 0 || self.n_v == 0 {
            return Err(Error::InvalidInstance("array needs at least one element per axis".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidInstance(format!("element spacing {} must be positive", self.delta)));
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.n_h * self.n_v
    }

    /// Narrowest achievable Omega span, `1 / (N_h delta)`.
    pub fn min_span_x(&self) -> f64 {
        1.0 / (self.n_h as f64 * self.delta)
    }

    /// Narrowest achievable Psi span, `1 / (N_v delta)`.
    pub fn min_span_y(&self) -> f64 {
        1.0 / (self.n_v as f64 * self.delta)
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// `u v^H`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m.data[i * v.len() + j] = ui * vj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<ComplexVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// `M^H v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Result<ComplexVector> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch("adjoint product".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        Ok(out)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Per-element reflection coefficients `alpha_i exp(j phi_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisConfig {
    pub phases: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

impl RisConfig {
    pub fn new(phases: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        if phases.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch("phases and amplitudes differ in length".into()));
        }
        if amplitudes.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidInstance("amplitudes must lie in [0, 1]".into()));
        }
        let phases = phases.into_iter().map(wrap_phase).collect();
        Ok(Self { phases, amplitudes })
    }

    /// Unit amplitudes with the given phases.
    pub fn with_phases(phases: Vec<f64>) -> Self {
        let n = phases.len();
        Self { phases: phases.into_iter().map(wrap_phase).collect(), amplitudes: vec![1.0; n] }
    }

    pub fn uniform(n: usize) -> Self {
        Self::with_phases(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn coefficient(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.amplitudes[i], self.phases[i])
    }

    pub fn coefficients(&self) -> ComplexVector {
        (0..self.len()).map(|i| self.coefficient(i)).collect()
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

fn progression(n: usize, delta: f64, freq: f64) -> ComplexVector {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * delta * k as f64 * freq)).collect()
}

/// Planar array response at spatial frequencies `(omega, psi)`.
pub fn pla_response(geom: &ArrayGeometry, omega: f64, psi: f64) -> ComplexVector {
    let bh = progression(geom.n_h, geom.delta, omega);
    let bv = progression(geom.n_v, geom.delta, psi);
    bv.iter().flat_map(|v| bh.iter().map(move |h| v * h)).collect()
}

/// Uniform linear array response for direction cosine `cos_theta`.
pub fn ula_response(n_b: usize, delta: f64, cos_theta: f64) -> ComplexVector {
    progression(n_b, delta, cos_theta)
}

/// Power gain `d^-beta`.
pub fn pathgain(d: f64, beta: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::DegenerateDistance(d));
    }
    Ok(d.powf(-beta))
}

pub fn ris_ue_channel(ris: &Frame3, geom: &ArrayGeometry, u: Vec3, beta: f64) -> Result<ComplexVector> {
    if !ris.fronting(u) {
        return Err(Error::InfeasibleLink("user behind the surface".into()));
    }
    let (omega, psi) = ris.spatial_frequencies(u)?;
    let amp = pathgain(ris.origin().distance(u), beta)?.sqrt();
    Ok(pla_response(geom, omega, psi).into_iter().map(|z| z * amp).collect())
}

/// Direction cosine between the base-station array axis (`axis_x`) and `target`.
pub fn ula_cos_theta(bs: &Frame3, target: Vec3) -> Result<f64> {
    let dir = (target - bs.origin()).normalized().ok_or(Error::CoincidentPoint)?;
    Ok(dir.dot(bs.axis_x()).clamp(-1.0, 1.0))
}

/// Rank-one BS to surface channel `sqrt(gamma) b_R a^H`.
pub fn bs_ris_channel(bs: &Frame3, n_b: usize, ris: &Frame3, geom: &ArrayGeometry, beta: f64) -> Result<ComplexMatrix> {
    if !ris.fronting(bs.origin()) {
        return Err(Error::InfeasibleLink("base station behind the surface".into()));
    }
    let (omega, psi) = ris.spatial_frequencies(bs.origin())?;
    let b_r = pla_response(geom, omega, psi);
    let a = ula_response(n_b, geom.delta, ula_cos_theta(bs, ris.origin())?);
    let mut g = ComplexMatrix::outer(&b_r, &a);
    g.scale(pathgain(bs.origin().distance(ris.origin()), beta)?.sqrt());
    Ok(g)
}

/// Maximum-ratio precoder: dominant right singular vector of `g`, scaled to power `p`.
pub fn mrt_precoder(g: &ComplexMatrix, p: f64) -> Result<ComplexVector> {
    if !(p > 0.0) {
        return Err(Error::InvalidInstance(format!("transmit power {p} must be positive")));
    }
    let fro = g.frobenius_sq();
    if fro == 0.0 || g.cols() == 0 {
        return Err(Error::ZeroMatrix);
    }
    // Start from the adjoint of the strongest row, which already lies in the row space.
    let best = (0..g.rows())
        .max_by(|&a, &b| {
            let na: f64 = g.row(a).iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = g.row(b).iter().map(|z| z.norm_sqr()).sum();
            na.partial_cmp(&nb).unwrap().then(b.cmp(&a))
        })
        .unwrap();
    let mut v: ComplexVector = g.row(best).iter().map(|z| z.conj()).collect();
    normalize(&mut v);
    for _ in 0..1000 {
        let mut next = g.adjoint_mul_vec(&g.mul_vec(&v)?)?;
        if vec_norm(&next) == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        normalize(&mut next);
        let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        v = next;
        if diff < 1e-14 {
            break;
        }
    }
    // Fix the global phase so the first significant entry is real and positive.
    if let Some(anchor) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let rot = anchor.conj() / anchor.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
    let s = p.sqrt();
    Ok(v.into_iter().map(|z| z * s).collect())
}

fn normalize(v: &mut [Complex64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}

/// `h^H Phi G w`.
pub fn cascaded_amplitude(h: &[Complex64], phi: &RisConfig, g: &ComplexMatrix, w: &[Complex64]) -> Result<Complex64> {
    if h.len() != phi.len() || g.rows() != h.len() {
        return Err(Error::DimensionMismatch(format!(
            "h has {} entries, config {}, G {} rows",
            h.len(),
            phi.len(),
            g.rows()
        )));
    }
    let gw = g.mul_vec(w)?;
    Ok(h.iter().zip(&gw).enumerate().map(|(i, (hi, gi))| hi.conj() * phi.coefficient(i) * gi).sum())
}

pub fn snr(h: &[Complex64], phi: &RisConfig, g: &ComplexMatrix, w: &[Complex64], sigma2: f64) -> Result<f64> {
    check_noise(sigma2)?;
    Ok(cascaded_amplitude(h, phi, g, w)?.norm_sqr() / sigma2)
}

fn check_noise(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(format!("noise power {sigma2} must be positive")))
    }
}

/// One reflected link of a base station through one surface.
#[derive(Debug, Clone)]
pub struct Link {
    pub h: ComplexVector,
    pub phi: RisConfig,
    pub g: ComplexMatrix,
    pub w: ComplexVector,
}

fn coherent_power(links: &[Link]) -> Result<f64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for l in links {
        acc += cascaded_amplitude(&l.h, &l.phi, &l.g, &l.w)?;
    }
    Ok(acc.norm_sqr())
}

/// SINR with coherent combining within each base station and incoherent
/// summation across interfering base stations.
pub fn sinr(serving: &[Link], interferers: &[Vec<Link>], sigma2: f64) -> Result<f64> {
    check_noise(sigma2)?;
    let signal = coherent_power(serving)?;
    let mut interference = 0.0;
    for bs in interferers {
        interference += coherent_power(bs)?;
    }
    Ok(signal / (interference + sigma2))
}

/// Broadened cascaded gain `N_h N_v / (dx dy delta^2)`.
pub fn broadened_gain_g1(geom: &ArrayGeometry, dx: f64, dy: f64) -> Result<f64> {
    let (mx, my) = (geom.min_span_x(), geom.min_span_y());
    let tol = 1e-12;
    if dx < mx * (1.0 - tol) {
        return Err(Error::SpanUnderMinimum { span: dx, min: mx });
    }
    if dy < my * (1.0 - tol) {
        return Err(Error::SpanUnderMinimum { span: dy, min: my });
    }
    let nh = geom.n_h as f64;
    let nv = geom.n_v as f64;
    Ok((nh * nh / (dx * nh * geom.delta)) * (nv * nv / (dy * nv * geom.delta)))
}

/// Raw (unclamped) Omega and Psi spans of `points` seen from `ris`.
pub fn raw_spans(ris: &Frame3, points: &[Vec3]) -> Result<(f64, f64)> {
    if points.is_empty() {
        return Err(Error::Empty("subarea points"));
    }
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &p in points {
        if !ris.fronting(p) {
            return Err(Error::InfeasibleLink("subarea point behind the surface".into()));
        }
        let (o, s) = ris.spatial_frequencies(p)?;
        lo = (lo.0.min(o), lo.1.min(s));
        hi = (hi.0.max(o), hi.1.max(s));
    }
    Ok((hi.0 - lo.0, hi.1 - lo.1))
}

/// Spans of a subarea, floored at the minimum beamwidths.
pub fn spans_for_subarea(ris: &Frame3, geom: &ArrayGeometry, points: &[Vec3]) -> Result<(f64, f64)> {
    let (dx, dy) = raw_spans(ris, points)?;
    Ok((dx.max(geom.min_span_x()), dy.max(geom.min_span_y())))
}

/// Omega and Psi bounding ranges of a subarea.
pub fn subarea_ranges(ris: &Frame3, points: &[Vec3]) -> Result<((f64, f64), (f64, f64))> {
    if points.is_empty() {
        return Err(Error::Empty("subarea points"));
    }
    let mut om = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ps = (f64::INFINITY, f64::NEG_INFINITY);
    for &p in points {
        let (o, s) = ris.spatial_frequencies(p)?;
        om = (om.0.min(o), om.1.max(o));
        ps = (ps.0.min(s), ps.1.max(s));
    }
    Ok((om, ps))
}

/// Widens `range` symmetrically about its centre to at least `min_span`.
pub fn widen_to(range: (f64, f64), min_span: f64) -> (f64, f64) {
    let span = range.1 - range.0;
    if span >= min_span {
        range
    } else {
        let c = 0.5 * (range.0 + range.1);
        (c - 0.5 * min_span, c + 0.5 * min_span)
    }
}

/// Number of subarrays along one axis for a span.
pub fn subarray_count(span: f64, n: usize, delta: f64) -> usize {
    let k = (span * n as f64 * delta - 1e-9).ceil();
    (k.max(1.0) as usize).min(n)
}

/// One axis of the tiled configuration: contiguous subarrays, each with a
/// linear phase toward the centre of its tile, offsets chosen so the phase is
/// continuous across subarray boundaries.
fn tiled_axis_phases(n: usize, delta: f64, range: (f64, f64)) -> Vec<f64> {
    let span = range.1 - range.0;
    let k = subarray_count(span, n, delta);
    let bounds: Vec<usize> = (0..=k).map(|j| ((j * n) as f64 / k as f64).round() as usize).collect();
    let mut phases = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..k {
        let centre = range.0 + (j as f64 + 0.5) * span / k as f64;
        let step = 2.0 * PI * delta * centre;
        for (local, idx) in (bounds[j]..bounds[j + 1]).enumerate() {
            phases[idx] = acc + step * local as f64;
        }
        acc += step * (bounds[j + 1] - bounds[j]) as f64;
    }
    phases
}

/// Beam-broadening configuration covering the Omega x Psi rectangle.
pub fn broadening_config(geom: &ArrayGeometry, omega_range: (f64, f64), psi_range: (f64, f64)) -> Result<RisConfig> {
    for (lo, hi) in [omega_range, psi_range] {
        if !(-1.0..=1.0).contains(&lo) || !(-1.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidInstance(format!("range [{lo}, {hi}] outside [-1, 1]")));
        }
    }
    let (dx, dy) = (omega_range.1 - omega_range.0, psi_range.1 - psi_range.0);
    let tol = 1e-9;
    if dx < geom.min_span_x() - tol {
        return Err(Error::SpanUnderMinimum { span: dx, min: geom.min_span_x() });
    }
    if dy < geom.min_span_y() - tol {
        return Err(Error::SpanUnderMinimum { span: dy, min: geom.min_span_y() });
    }
    let ph = tiled_axis_phases(geom.n_h, geom.delta, omega_range);
    let pv = tiled_axis_phases(geom.n_v, geom.delta, psi_range);
    let phases = pv.iter().flat_map(|v| ph.iter().map(move |h| v + h)).collect();
    Ok(RisConfig::with_phases(phases))
}

/// Adds the phase ramp that cancels an incident wave arriving from `(omega_in, psi_in)`.
pub fn with_incidence(cfg: &RisConfig, geom: &ArrayGeometry, omega_in: f64, psi_in: f64) -> RisConfig {
    let phases = cfg
        .phases
        .iter()
        .enumerate()
        .map(|(i, ph)| {
            let (p, q) = ((i / geom.n_h) as f64, (i % geom.n_h) as f64);
            ph - 2.0 * PI * geom.delta * (p * psi_in + q * omega_in)
        })
        .collect();
    RisConfig::new(phases, cfg.amplitudes.clone()).expect("amplitudes already validated")
}

/// Reflection pattern `|b(Omega, Psi)^H Phi 1|^2` (peak `N_r^2`).
pub fn reflection_pattern(geom: &ArrayGeometry, cfg: &RisConfig, omega: f64, psi: f64) -> f64 {
    let b = pla_response(geom, omega, psi);
    b.iter().enumerate().map(|(i, bi)| bi.conj() * cfg.coefficient(i)).sum::<Complex64>().norm_sqr()
}

/// Rank-one factorisation of a configuration, `coef(p, q) = v_p h_q`, used to
/// evaluate large patterns in `O(N_h + N_v)`.
#[derive(Debug, Clone)]
pub struct SeparablePattern {
    delta: f64,
    h: ComplexVector,
    v: ComplexVector,
}

impl SeparablePattern {
    pub fn try_factor(geom: &ArrayGeometry, cfg: &RisConfig) -> Option<Self> {
        let (nh, nv) = (geom.n_h, geom.n_v);
        if cfg.len() != nh * nv {
            return None;
        }
        let coef = cfg.coefficients();
        let (pivot, max) =
            coef.iter()
                .enumerate()
                .map(|(i, z)| (i, z.norm()))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if max == 0.0 {
            return Some(Self {
                delta: geom.delta,
                h: vec![Complex64::new(0.0, 0.0); nh],
                v: vec![Complex64::new(0.0, 0.0); nv],
            });
        }
        let (p0, q0) = (pivot / nh, pivot % nh);
        let h: ComplexVector = (0..nh).map(|q| coef[p0 * nh + q]).collect();
        let v: ComplexVector = (0..nv).map(|p| coef[p * nh + q0] / coef[pivot]).collect();
        let ok = (0..nv).all(|p| (0..nh).all(|q| (v[p] * h[q] - coef[p * nh + q]).norm() <= 1e-9 * max));
        ok.then_some(Self { delta: geom.delta, h, v })
    }

    pub fn gain(&self, omega: f64, psi: f64) -> f64 {
        axis_af(&self.h, self.delta, omega).norm_sqr() * axis_af(&self.v, self.delta, psi).norm_sqr()
    }
}

fn axis_af(w: &[Complex64], delta: f64, freq: f64) -> Complex64 {
    w.iter().enumerate().map(|(k, c)| c * Complex64::from_polar(1.0, -2.0 * PI * delta * k as f64 * freq)).sum()
}
