//! Zeros of the characteristic function in rectangles of the first quadrant.
//!
//! Counting uses the argument principle on the rectangle boundary: Gauss–Legendre
//! panels of `d'/d` are split until each panel's quadrature agrees with the principal
//! logarithm of `d(end)/d(start)`, so the winding number is certified panel by panel.
//! Rectangles are bisected until every cell holds a small cluster, which is then refined
//! by Newton's method (simple zeros) or by contour power sums (multiple zeros).
//!
//! `d` is even and real on the real axis, so zeros come in quadruples
//! `±k, ±conj(k)`; only the closed first quadrant is searched.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{CharacteristicValue, ForwardError, ForwardModel};
use crate::profile::RefractiveProfile;
use crate::quadrature::gauss_legendre;

/// ODE tolerance for contour samples.
pub const CONTOUR_ODE_TOL: f64 = 1e-10;
/// ODE tolerance for refinement and residuals.
pub const REFINE_ODE_TOL: f64 = 1e-13;
/// Bound on `|D(k)|` at reported zeros.
pub const RESIDUAL_BOUND: f64 = 1e-8;
/// Below this `max |D|` on a contour the characteristic is treated as identically zero.
pub const DEGENERACY_FLOOR: f64 = 1e-12;
/// Largest cluster refined without further subdivision.
pub const DEFAULT_MMAX: u32 = 4;

const PANEL_NODES: usize = 8;
const PANEL_LOG_AGREEMENT: f64 = 1e-2;
const PANEL_PHASE_BUDGET: f64 = 3.0;
const MAX_DEFECT: f64 = 0.25;
const NEAR_ZERO: f64 = 1e-3;
const MAX_CELL_SIDE: f64 = 2.0;
const SPLIT_FRACTIONS: [f64; 5] = [0.5, 0.45, 0.55, 0.4, 0.6];
const INFLATION_ATTEMPTS: u32 = 5;
const MAX_DEPTH: u32 = 60;
const CIRCLE_NODES: usize = 32;
const CLUSTER_SPREAD: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZerosError {
    #[error("characteristic function vanishes identically on the contour (max |D| = {max_abs:e})")]
    DegenerateCharacteristic { max_abs: f64 },
    #[error("contour passes too close to a zero after {attempts} perturbations (rect {rect:?})")]
    ContourTooClose { rect: Rect, attempts: u32 },
    #[error("refinement stalled near k = {k} (residual {residual:e})")]
    NewtonStall { k: Complex64, residual: f64 },
    #[error("invalid rectangle {0:?}")]
    InvalidRect(Rect),
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in the `k`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite()) && self.x1 > self.x0 && self.y1 > self.y0
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains(&self, k: Complex64) -> bool {
        k.re >= self.x0 && k.re <= self.x1 && k.im >= self.y0 && k.im <= self.y1
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn distance_to_boundary(&self, k: Complex64) -> f64 {
        (k.re - self.x0).min(self.x1 - k.re).min(k.im - self.y0).min(self.y1 - k.im)
    }

    fn inflate(&self, factor: f64) -> Rect {
        let c = self.center();
        let hw = 0.5 * self.width() * factor;
        let hh = 0.5 * self.height() * factor;
        Rect::new(c.re - hw, c.re + hw, c.im - hh, c.im + hh)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn as_array(&self) -> [f64; 4] {
        [self.x0, self.x1, self.y0, self.y1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroClass {
    Real,
    Nonreal,
}

impl ZeroClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZeroClass::Real => "real",
            ZeroClass::Nonreal => "nonreal",
        }
    }
}

/// A zero of `d` in canonical form (`Re k ≥ 0`, `Im k ≥ 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralZero {
    pub k: Complex64,
    pub multiplicity: u32,
    pub class: ZeroClass,
    /// `|D(k)|` at the refined point.
    pub residual: f64,
}

impl SpectralZero {
    /// Snaps a refined location into canonical form.
    pub fn canonical(k: Complex64, multiplicity: u32, residual: f64) -> Self {
        let mut k = Complex64::new(k.re.abs(), k.im.abs());
        let class = if k.im <= 1e-9 * (1.0 + k.re) {
            k.im = 0.0;
            ZeroClass::Real
        } else {
            ZeroClass::Nonreal
        };
        Self { k, multiplicity, class, residual }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub cells: usize,
    pub subdivisions: usize,
    pub characteristic_evaluations: usize,
    pub inflations: u32,
    pub split_retries: usize,
    pub newton_restarts: usize,
    /// Multiplicity of zeros located outside the requested rectangle (mirror strips
    /// below/left of the axes, or inflation margins) and removed from the count.
    pub excluded_multiplicity: u32,
    /// Multiple zeros whose local log-derivative estimate disagreed with the contour.
    pub multiplicity_disagreements: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub rect: Rect,
    /// The contour actually integrated (after axis extension or inflation).
    pub search_rect: Rect,
    pub zeros: Vec<SpectralZero>,
    pub total_count: u32,
    pub stats: SearchStats,
}

impl SearchReport {
    pub fn multiplicity_sum(&self) -> u32 {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Zero-set CSV with columns `re_k,im_k,multiplicity,class,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re_k,im_k,multiplicity,class,residual\n");
        for z in &self.zeros {
            s.push_str(&format!(
                "{:.15e},{:.15e},{},{},{:.3e}\n",
                z.k.re,
                z.k.im,
                z.multiplicity,
                z.class.as_str(),
                z.residual
            ));
        }
        s
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let zeros: Vec<serde_json::Value> = self
            .zeros
            .iter()
            .map(|z| {
                serde_json::json!({
                    "re": z.k.re,
                    "im": z.k.im,
                    "mult": z.multiplicity,
                    "class": z.class.as_str(),
                })
            })
            .collect();
        serde_json::json!({
            "rect": self.rect.as_array(),
            "zeros": zeros,
            "count": self.total_count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Target accuracy of zero locations (Newton step size at exit).
    pub tol: f64,
    pub mmax: u32,
    pub contour_ode_tol: f64,
    pub refine_ode_tol: f64,
}

impl SearchOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, mmax: DEFAULT_MMAX, contour_ode_tol: CONTOUR_ODE_TOL, refine_ode_tol: REFINE_ODE_TOL }
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

/// Result of one contour integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourCount {
    pub count: i64,
    /// Distance of the quadrature winding number from the integer.
    pub defect: f64,
    /// `(1/2πi)∮ k d'/d dk`, the sum of enclosed zeros.
    pub first_moment: Complex64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    log_change: Complex64,
    quad: Complex64,
    m1: Complex64,
}

impl Segment {
    fn reversed(self) -> Self {
        Segment { log_change: -self.log_change, quad: -self.quad, m1: -self.m1 }
    }
}

enum SegmentOutcome {
    Done(Segment),
    NearZero,
}

fn key(k: Complex64) -> (u64, u64) {
    (k.re.to_bits(), k.im.to_bits())
}

/// Memoizing evaluator of the characteristic along contours.
struct Engine<'a> {
    model: &'a ForwardModel,
    opts: SearchOptions,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    points: Mutex<HashMap<(u64, u64), CharacteristicValue>>,
    segments: Mutex<HashMap<[u64; 4], Segment>>,
    evaluations: AtomicUsize,
}

impl<'a> Engine<'a> {
    fn new(model: &'a ForwardModel, opts: SearchOptions) -> Self {
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        Self {
            model,
            opts,
            nodes,
            weights,
            points: Mutex::new(HashMap::new()),
            segments: Mutex::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
        }
    }

    fn contour_value(&self, k: Complex64) -> Result<CharacteristicValue, ZerosError> {
        if let Some(v) = self.points.lock().expect("cache poisoned").get(&key(k)) {
            return Ok(*v);
        }
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let v = self.model.characteristic(k, self.opts.contour_ode_tol)?;
        self.points.lock().expect("cache poisoned").insert(key(k), v);
        Ok(v)
    }

    fn precise_value(&self, k: Complex64) -> Result<CharacteristicValue, ZerosError> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        Ok(self.model.characteristic(k, self.opts.refine_ode_tol)?)
    }

    fn log_ratio(from: &CharacteristicValue, to: &CharacteristicValue) -> Complex64 {
        let ratio = to.d / from.d;
        Complex64::new(ratio.norm().ln() + to.scale_log - from.scale_log, ratio.arg())
    }

    fn segment(&self, a: Complex64, b: Complex64, near: f64) -> Result<SegmentOutcome, ZerosError> {
        let ka = key(a);
        let kb = key(b);
        let forward_key = [ka.0, ka.1, kb.0, kb.1];
        let backward_key = [kb.0, kb.1, ka.0, ka.1];
        {
            let cache = self.segments.lock().expect("cache poisoned");
            if let Some(s) = cache.get(&forward_key) {
                return Ok(SegmentOutcome::Done(*s));
            }
            if let Some(s) = cache.get(&backward_key) {
                return Ok(SegmentOutcome::Done(s.reversed()));
            }
        }
        let length = (b - a).norm();
        let mut total =
            Segment { log_change: Complex64::default(), quad: Complex64::default(), m1: Complex64::default() };
        let mut stack = vec![(0.0f64, 1.0f64)];
        while let Some((s0, s1)) = stack.pop() {
            let p0 = a + (b - a) * s0;
            let p1 = a + (b - a) * s1;
            let v0 = self.contour_value(p0)?;
            let v1 = self.contour_value(p1)?;
            for v in [&v0, &v1] {
                if v.d.norm() < NEAR_ZERO.min(near) * v.d_prime.norm() || v.d == Complex64::default() {
                    return Ok(SegmentOutcome::NearZero);
                }
            }
            let half = (p1 - p0) * 0.5;
            let mid = (p0 + p1) * 0.5;
            let pts: Vec<Complex64> = self.nodes.iter().map(|x| mid + half * *x).collect();
            let vals = pts.iter().map(|p| self.contour_value(*p)).collect::<Result<Vec<_>, _>>()?;
            let mut quad = Complex64::default();
            let mut m1 = Complex64::default();
            let mut max_f = 0.0f64;
            for ((p, v), w) in pts.iter().zip(&vals).zip(&self.weights) {
                if v.d.norm() < NEAR_ZERO.min(near) * v.d_prime.norm() || v.d == Complex64::default() {
                    return Ok(SegmentOutcome::NearZero);
                }
                let f = v.log_derivative();
                max_f = max_f.max(f.norm());
                quad += f * *w;
                m1 += f * *p * *w;
            }
            quad *= half;
            m1 *= half;
            let lr = Self::log_ratio(&v0, &v1);
            let panel = length * (s1 - s0);
            if (quad - lr).norm() <= PANEL_LOG_AGREEMENT && panel * max_f <= PANEL_PHASE_BUDGET {
                total.log_change += lr;
                total.quad += quad;
                total.m1 += m1;
            } else if panel < 1e-7 * (1.0 + a.norm()) {
                return Ok(SegmentOutcome::NearZero);
            } else {
                let sm = 0.5 * (s0 + s1);
                stack.push((sm, s1));
                stack.push((s0, sm));
            }
        }
        self.segments.lock().expect("cache poisoned").insert(forward_key, total);
        Ok(SegmentOutcome::Done(total))
    }

    /// Argument-principle count, or `None` if the boundary passes near a zero.
    fn count(&self, rect: &Rect) -> Result<Option<ContourCount>, ZerosError> {
        let near = 0.01 * rect.width().min(rect.height());
        let c = rect.corners();
        let mut log_change = Complex64::default();
        let mut quad = Complex64::default();
        let mut m1 = Complex64::default();
        for i in 0..4 {
            match self.segment(c[i], c[(i + 1) % 4], near)? {
                SegmentOutcome::NearZero => return Ok(None),
                SegmentOutcome::Done(s) => {
                    log_change += s.log_change;
                    quad += s.quad;
                    m1 += s.m1;
                }
            }
        }
        let winding = log_change.im / (2.0 * PI);
        let count = winding.round();
        let defect = (quad.im / (2.0 * PI) - count).abs().max((winding - count).abs());
        if defect > MAX_DEFECT {
            return Ok(None);
        }
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        Ok(Some(ContourCount { count: count as i64, defect, first_moment: m1 / two_pi_i }))
    }

    fn max_scaled_on(&self, rect: &Rect) -> Result<f64, ZerosError> {
        let a = self.model.a();
        let c = rect.corners();
        let mut m = 0.0f64;
        for i in 0..4 {
            for s in [0.13, 0.41, 0.77] {
                let k = c[i] + (c[(i + 1) % 4] - c[i]) * s;
                let v = self.model.characteristic(k, 1e-13)?;
                m = m.max(v.scaled(k, a).norm());
            }
        }
        Ok(m)
    }
}

/// Counts with the rectangle inflated by `1 + 2^{-j}` (smallest first) when its boundary
/// passes too close to a zero.
fn count_with_inflation(engine: &Engine, rect: &Rect) -> Result<(ContourCount, Rect, u32), ZerosError> {
    if let Some(c) = engine.count(rect)? {
        return Ok((c, *rect, 0));
    }
    for (n, j) in (1..=INFLATION_ATTEMPTS).rev().enumerate() {
        let r = rect.inflate(1.0 + 2f64.powi(-(j as i32)));
        if let Some(c) = engine.count(&r)? {
            return Ok((c, r, n as u32 + 1));
        }
    }
    Err(ZerosError::ContourTooClose { rect: *rect, attempts: INFLATION_ATTEMPTS })
}

/// Pushes edges lying on the coordinate axes outward so the contour avoids the real and
/// imaginary axes, where zeros of an even real function accumulate.
fn axis_extension(rect: &Rect) -> Rect {
    let delta = 0.05 * rect.width().min(rect.height()).min(1.0);
    let mut r = *rect;
    if r.y0 == 0.0 {
        r.y0 = -delta;
    }
    if r.x0 == 0.0 {
        r.x0 = -delta;
    }
    r
}

fn check_degenerate(engine: &Engine, rect: &Rect) -> Result<(), ZerosError> {
    let max_abs = engine.max_scaled_on(rect)?;
    if max_abs < DEGENERACY_FLOOR {
        return Err(ZerosError::DegenerateCharacteristic { max_abs });
    }
    Ok(())
}

/// Number of zeros of `d` (with multiplicity) inside `rect` by the argument principle.
///
/// Rectangles with an edge on a coordinate axis are handled through [`find_zeros`],
/// because zeros sitting on the axis would otherwise lie on the contour.
pub fn count_zeros(profile: &RefractiveProfile, rect: Rect, tol: f64) -> Result<u32, ZerosError> {
    if !rect.is_valid() {
        return Err(ZerosError::InvalidRect(rect));
    }
    if (rect.y0 == 0.0 && rect.x0 >= 0.0) || (rect.x0 == 0.0 && rect.y0 >= 0.0) {
        return Ok(find_zeros(profile, rect, tol)?.total_count);
    }
    let model = ForwardModel::new(profile)?;
    let engine = Engine::new(&model, SearchOptions::with_tol(tol));
    check_degenerate(&engine, &rect)?;
    let (c, _, _) = count_with_inflation(&engine, &rect)?;
    Ok(c.count.max(0) as u32)
}

/// Raw contour integral over `rect` (no axis handling, no inflation).
pub fn contour_count(profile: &RefractiveProfile, rect: Rect) -> Result<Option<ContourCount>, ZerosError> {
    let model = ForwardModel::new(profile)?;
    let engine = Engine::new(&model, SearchOptions::default());
    engine.count(&rect)
}

struct Found {
    k: Complex64,
    multiplicity: u32,
}

#[derive(Default)]
struct Counters {
    cells: AtomicUsize,
    subdivisions: AtomicUsize,
    split_retries: AtomicUsize,
    newton_restarts: AtomicUsize,
    disagreements: AtomicUsize,
}

struct Search<'a> {
    engine: Engine<'a>,
    counters: Counters,
}

impl<'a> Search<'a> {
    fn explore(&self, cell: Rect, count: u32, depth: u32) -> Result<Vec<Found>, ZerosError> {
        self.counters.cells.fetch_add(1, Ordering::Relaxed);
        if count == 0 {
            return Ok(vec![]);
        }
        let small = cell.width().max(cell.height()) <= MAX_CELL_SIDE;
        if small && count <= self.engine.opts.mmax {
            if let Some(found) = self.refine(&cell, count)? {
                return Ok(found);
            }
            self.counters.newton_restarts.fetch_add(1, Ordering::Relaxed);
        }
        if depth >= MAX_DEPTH {
            let c = cell.center();
            let residual = self.engine.precise_value(c)?.scaled(c, self.engine.model.a()).norm();
            return Err(ZerosError::NewtonStall { k: c, residual });
        }
        self.split(cell, count, depth)
    }

    fn split(&self, cell: Rect, count: u32, depth: u32) -> Result<Vec<Found>, ZerosError> {
        self.counters.subdivisions.fetch_add(1, Ordering::Relaxed);
        let vertical = cell.width() >= cell.height();
        for (attempt, frac) in SPLIT_FRACTIONS.iter().enumerate() {
            if attempt > 0 {
                self.counters.split_retries.fetch_add(1, Ordering::Relaxed);
            }
            let (a, b) = if vertical {
                let xm = cell.x0 + frac * cell.width();
                (Rect { x1: xm, ..cell }, Rect { x0: xm, ..cell })
            } else {
                let ym = cell.y0 + frac * cell.height();
                (Rect { y1: ym, ..cell }, Rect { y0: ym, ..cell })
            };
            let (ca, cb) = rayon::join(|| self.engine.count(&a), || self.engine.count(&b));
            let (Some(ca), Some(cb)) = (ca?, cb?) else { continue };
            if ca.count < 0 || cb.count < 0 || (ca.count + cb.count) as u32 != count {
                continue;
            }
            let (ra, rb) = rayon::join(
                || self.explore(a, ca.count as u32, depth + 1),
                || self.explore(b, cb.count as u32, depth + 1),
            );
            let mut out = ra?;
            out.extend(rb?);
            return Ok(out);
        }
        Err(ZerosError::ContourTooClose { rect: cell, attempts: SPLIT_FRACTIONS.len() as u32 })
    }

    fn refine(&self, cell: &Rect, count: u32) -> Result<Option<Vec<Found>>, ZerosError> {
        let Some(c) = self.engine.count(cell)? else { return Ok(None) };
        let centroid = c.first_moment / count as f64;
        if !cell.contains(centroid) {
            return Ok(None);
        }
        if count == 1 {
            return self.refine_simple(cell, centroid);
        }
        self.refine_cluster(cell, centroid, count)
    }

    fn refine_simple(&self, cell: &Rect, start: Complex64) -> Result<Option<Vec<Found>>, ZerosError> {
        let mut k = start;
        let mut converged = false;
        for _ in 0..40 {
            let v = self.engine.precise_value(k)?;
            if v.d == Complex64::default() {
                converged = true;
                break;
            }
            let step = v.d / v.d_prime;
            if !step.is_finite() {
                return Ok(None);
            }
            k -= step;
            if !cell.contains(k) {
                return Ok(None);
            }
            if step.norm() <= self.engine.opts.tol.min(1e-12 * (1.0 + k.norm())).max(1e-15 * (1.0 + k.norm())) {
                converged = true;
                break;
            }
            if step.norm() <= self.engine.opts.tol {
                // One more step polishes beyond the requested tolerance.
                let v = self.engine.precise_value(k)?;
                let s = v.d / v.d_prime;
                if s.is_finite() && cell.contains(k - s) {
                    k -= s;
                }
                converged = true;
                break;
            }
        }
        if !converged {
            return Ok(None);
        }
        // Verify with a small contour around the refined point.
        let rho = (0.5 * cell.distance_to_boundary(k)).min(0.05);
        if rho <= 0.0 {
            return Ok(None);
        }
        let check = Rect::new(k.re - rho, k.re + rho, k.im - rho, k.im + rho);
        match self.engine.count(&check)? {
            Some(cc) if cc.count == 1 => Ok(Some(vec![Found { k, multiplicity: 1 }])),
            _ => Ok(None),
        }
    }

    fn refine_cluster(&self, cell: &Rect, centroid: Complex64, count: u32) -> Result<Option<Vec<Found>>, ZerosError> {
        let rho = 0.45 * cell.distance_to_boundary(centroid);
        if rho <= 0.0 {
            return Ok(None);
        }
        let mut s = [Complex64::default(); 3];
        for j in 0..CIRCLE_NODES {
            let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / CIRCLE_NODES as f64);
            let k = centroid + e * rho;
            let v = self.engine.precise_value(k)?;
            let f = v.log_derivative() * e * (rho / CIRCLE_NODES as f64);
            let dz = k - centroid;
            s[0] += f;
            s[1] += f * dz;
            s[2] += f * dz * dz;
        }
        let m = count as f64;
        if (s[0] - m).norm() > 0.1 {
            return Ok(None);
        }
        let shift = s[1] / m;
        let spread = (s[2] / m - shift * shift).norm().sqrt();
        if spread > CLUSTER_SPREAD * (1.0 + centroid.norm()).min(10.0) {
            return Ok(None);
        }
        let k0 = centroid + shift;
        // Cross-check: near a zero of order m, d'/d ≈ m / (k − k0).
        let delta = 0.1 * rho;
        let v = self.engine.precise_value(k0 + delta)?;
        let m_est = (v.log_derivative() * delta).re;
        if (m_est - m).abs() > 0.25 {
            self.counters.disagreements.fetch_add(1, Ordering::Relaxed);
        }
        Ok(Some(vec![Found { k: k0, multiplicity: count }]))
    }
}

/// All zeros (with multiplicity) in a rectangle of the closed first quadrant.
pub fn find_zeros(profile: &RefractiveProfile, rect: Rect, tol: f64) -> Result<SearchReport, ZerosError> {
    find_zeros_with(profile, rect, SearchOptions::with_tol(tol))
}

pub fn find_zeros_with(
    profile: &RefractiveProfile,
    rect: Rect,
    opts: SearchOptions,
) -> Result<SearchReport, ZerosError> {
    if !rect.is_valid() || rect.x0 < 0.0 || rect.y0 < 0.0 {
        return Err(ZerosError::InvalidRect(rect));
    }
    let model = ForwardModel::new(profile)?;
    let search = Search { engine: Engine::new(&model, opts), counters: Counters::default() };
    let extended = axis_extension(&rect);
    check_degenerate(&search.engine, &extended)?;
    let (outer, search_rect, inflations) = count_with_inflation(&search.engine, &extended)?;
    let total = outer.count.max(0) as u32;
    let found = search.explore(search_rect, total, 0)?;

    let a = model.a();
    let mut zeros = Vec::with_capacity(found.len());
    let mut excluded = 0;
    for f in found {
        let snapped = f.k.im.abs() <= 1e-9 * (1.0 + f.k.re.abs());
        let im_ok = snapped || f.k.im >= rect.y0;
        let re_ok = f.k.re >= rect.x0 || (rect.x0 == 0.0 && f.k.re.abs() <= 1e-9 * (1.0 + f.k.im.abs()));
        let inside = im_ok && re_ok && f.k.re <= rect.x1 && f.k.im <= rect.y1;
        if !inside {
            excluded += f.multiplicity;
            continue;
        }
        let residual = search.engine.precise_value(f.k)?.scaled(f.k, a).norm();
        let mut z = SpectralZero::canonical(f.k, f.multiplicity, residual);
        if z.k.re <= 1e-9 * (1.0 + z.k.im) {
            z.k.re = 0.0;
        }
        zeros.push(z);
    }
    zeros.sort_by(|p, q| p.k.re.total_cmp(&q.k.re).then(p.k.im.total_cmp(&q.k.im)));
    let c = &search.counters;
    let stats = SearchStats {
        cells: c.cells.load(Ordering::Relaxed),
        subdivisions: c.subdivisions.load(Ordering::Relaxed),
        characteristic_evaluations: search.engine.evaluations.load(Ordering::Relaxed),
        inflations,
        split_retries: c.split_retries.load(Ordering::Relaxed),
        newton_restarts: c.newton_restarts.load(Ordering::Relaxed),
        excluded_multiplicity: excluded,
        multiplicity_disagreements: c.disagreements.load(Ordering::Relaxed),
    };
    Ok(SearchReport { rect, search_rect, zeros, total_count: total - excluded, stats })
}

/// Real zeros in `(0, kmax]`: sign changes and local minima of `d` on a fine scan, each
/// confirmed and resolved by a small contour search.
pub fn real_zeros(profile: &RefractiveProfile, kmax: f64, tol: f64) -> Result<Vec<SpectralZero>, ZerosError> {
    let model = ForwardModel::new(profile)?;
    let a = model.a();
    let engine = Engine::new(&model, SearchOptions::with_tol(tol));
    let probe = Rect::new(1.0_f64.min(kmax * 0.5), kmax, -0.5, 0.5);
    check_degenerate(&engine, &probe)?;
    let step = PI / (8.0 * (1.0 + a));
    let start = 1e-3;
    let n = ((kmax - start) / step).ceil().max(1.0) as usize;
    let ks: Vec<f64> = (0..=n).map(|i| (start + i as f64 * step).min(kmax)).collect();
    let vals: Vec<f64> = {
        use rayon::prelude::*;
        ks.par_iter()
            .map(|&k| {
                let z = Complex64::new(k, 0.0);
                engine.contour_value(z).map(|v| v.scaled(z, a).re)
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        if vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum() {
            windows.push((ks[i], ks[i + 1]));
        }
    }
    for i in 1..n {
        let (l, m, r) = (vals[i - 1].abs(), vals[i].abs(), vals[i + 1].abs());
        if m < l && m < r && m <= 0.5 * l.min(r) && vals[i - 1].signum() == vals[i + 1].signum() {
            windows.push((ks[i - 1], ks[i + 1]));
        }
    }
    windows.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for w in windows {
        match merged.last_mut() {
            Some(last) if w.0 <= last.1 => last.1 = last.1.max(w.1),
            _ => merged.push(w),
        }
    }
    let search = Search { engine, counters: Counters::default() };
    let mut out = Vec::new();
    for (lo, hi) in merged {
        let half_height = 0.5 * step;
        let box_rect = Rect::new(lo, hi, -half_height, half_height);
        let (c, used, _) = count_with_inflation(&search.engine, &box_rect)?;
        if c.count <= 0 {
            continue;
        }
        for f in search.explore(used, c.count as u32, 0)? {
            if f.k.im.abs() > 1e-9 * (1.0 + f.k.re.abs()) || f.k.re <= 0.0 || f.k.re > kmax {
                continue;
            }
            let residual = search.engine.precise_value(f.k)?.scaled(f.k, a).norm();
            out.push(SpectralZero::canonical(f.k, f.multiplicity, residual));
        }
    }
    out.sort_by(|p, q| p.k.re.total_cmp(&q.k.re));
    out.dedup_by(|p, q| (p.k - q.k).norm() < 1e-8 * (1.0 + p.k.norm()));
    Ok(out)
}
