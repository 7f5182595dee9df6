//! Scalar visibility metrics with full, range-limited, and field-of-view
//! limited sensing, plus the symmetric-difference utilities behind them.
//!
//! All areas are exact up to floating point: the visibility polygon is
//! star-shaped around the observer, so every metric decomposes over its fan
//! triangles; each triangle is clipped against the adversary domain and,
//! when a range limit applies, measured against the sensing disk through
//! the per-edge Green's-theorem accumulation.

use crate::clip::{
    circle_ring_area, clip_convex, clip_halfplane, ring_is_convex, star_fan,
    symmetric_difference_area,
};
use crate::geom::{signed_area, FreeSpace, Point2, Polygon, UnitVector2};
use crate::visibility::{visibility_polygon, VisError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Vis(#[from] VisError),
    #[error("domain error: {0}")]
    DomainError(String),
}

/// Adversary domain plus optional sensing limits.
#[derive(Debug, Clone)]
pub struct MetricConfig {
    pub d2: Polygon,
    pub range: Option<f64>,
    /// Field-of-view aperture in radians, in (0, 2*pi].
    pub fov: Option<f64>,
}

impl MetricConfig {
    pub fn full(d2: Polygon) -> Self {
        Self {
            d2,
            range: None,
            fov: None,
        }
    }

    pub fn with_range(d2: Polygon, r: f64) -> Self {
        assert!(r > 0.0, "range must be positive");
        Self {
            d2,
            range: Some(r),
            fov: None,
        }
    }

    pub fn with_fov(d2: Polygon, r: f64, aperture: f64) -> Self {
        assert!(r > 0.0, "range must be positive");
        assert!(
            aperture > 0.0 && aperture <= 2.0 * std::f64::consts::PI + 1e-12,
            "aperture must lie in (0, 2*pi]"
        );
        Self {
            d2,
            range: Some(r),
            fov: Some(aperture),
        }
    }

    fn d2_ccw(&self) -> Vec<Point2> {
        let p = self.d2.with_orientation(crate::geom::Orientation::Ccw);
        p.vertices().to_vec()
    }
}

/// Observer pose: position plus heading, normalized to [0, 2*pi).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    heading: f64,
}

impl Pose {
    pub fn new(position: Point2, heading: f64) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            position,
            heading: heading.rem_euclid(two_pi),
        }
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }
}

/// Area of the visibility polygon.
pub fn metric_v_area(fs: &FreeSpace, x: Point2) -> Result<f64, MetricError> {
    Ok(visibility_polygon(fs, x)?.area)
}

/// V(x): area of the part of D2 visible from x.
pub fn metric_v(fs: &FreeSpace, cfg: &MetricConfig, x: Point2) -> Result<f64, MetricError> {
    let region = visibility_polygon(fs, x)?;
    let d2 = cfg.d2_ccw();
    let mut total = 0.0;
    for tri in star_fan(x, &region.ring(), 1e-14 * fs.bounding_diameter().powi(2)) {
        let piece = clip_convex(&d2, &tri);
        if piece.len() >= 3 {
            total += signed_area(&piece).max(0.0);
        }
    }
    Ok(total)
}

/// Range-limited metric: area of S(x) ∩ D2 ∩ B_R(x) with exact circular
/// segments.
pub fn metric_v_range(fs: &FreeSpace, cfg: &MetricConfig, x: Point2) -> Result<f64, MetricError> {
    let r = cfg
        .range
        .ok_or_else(|| MetricError::DomainError("range not configured".into()))?;
    let region = visibility_polygon(fs, x)?;
    let d2 = cfg.d2_ccw();
    let mut total = 0.0;
    for tri in star_fan(x, &region.ring(), 1e-14 * fs.bounding_diameter().powi(2)) {
        let piece = clip_convex(&d2, &tri);
        if piece.len() >= 3 {
            total += circle_ring_area(&piece, x, r).max(0.0);
        }
    }
    Ok(total)
}

/// Field-of-view metric: area of S(x) ∩ D2 ∩ C_phi^R(z).
pub fn metric_v_fov(fs: &FreeSpace, cfg: &MetricConfig, z: Pose) -> Result<f64, MetricError> {
    let r = cfg
        .range
        .ok_or_else(|| MetricError::DomainError("range not configured".into()))?;
    let phi = cfg
        .fov
        .ok_or_else(|| MetricError::DomainError("fov not configured".into()))?;
    let two_pi = 2.0 * std::f64::consts::PI;
    if phi >= two_pi - 1e-12 {
        return metric_v_range(fs, cfg, z.position);
    }
    if phi > std::f64::consts::PI {
        // Complement wedge: full range area minus the opposite cone.
        let full = metric_v_range(fs, cfg, z.position)?;
        let opposite = Pose::new(z.position, z.heading() + std::f64::consts::PI);
        let cfg_opp = MetricConfig {
            d2: cfg.d2.clone(),
            range: Some(r),
            fov: Some(two_pi - phi),
        };
        return Ok((full - metric_v_fov(fs, &cfg_opp, opposite)?).max(0.0));
    }
    let x = z.position;
    let region = visibility_polygon(fs, x)?;
    let d2 = cfg.d2_ccw();
    // Wedge of half-aperture phi/2 around the heading: intersection of two
    // half-planes through x (valid because phi <= pi here).
    let lo = UnitVector2::from_angle(z.heading() - 0.5 * phi);
    let hi = UnitVector2::from_angle(z.heading() + 0.5 * phi);
    let far = 4.0 * fs.bounding_diameter();
    let mut total = 0.0;
    for tri in star_fan(x, &region.ring(), 1e-14 * fs.bounding_diameter().powi(2)) {
        let mut piece = clip_convex(&d2, &tri);
        if piece.len() < 3 {
            continue;
        }
        piece = clip_halfplane(&piece, x, x + lo.as_vec() * far);
        if piece.len() < 3 {
            continue;
        }
        piece = clip_halfplane(&piece, x + hi.as_vec() * far, x);
        if piece.len() >= 3 {
            total += circle_ring_area(&piece, x, r).max(0.0);
        }
    }
    Ok(total)
}

/// Area of the symmetric difference of two simple polygons.
pub fn sym_diff_area(a: &[Point2], b: &[Point2]) -> f64 {
    let scale = a
        .iter()
        .chain(b.iter())
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0_f64, f64::max);
    symmetric_difference_area(a, b, 1e-12 * scale * scale)
}

/// f_R(d): area of the symmetric difference of two R-disks with centers d
/// apart; satisfies f_R(d) <= 4 R d.
pub fn disk_symdiff_formula(r: f64, d: f64) -> Result<f64, MetricError> {
    if r <= 0.0 {
        return Err(MetricError::DomainError("radius must be positive".into()));
    }
    if !(0.0..=2.0 * r).contains(&d) {
        return Err(MetricError::DomainError(format!(
            "distance {d} outside [0, {}]",
            2.0 * r
        )));
    }
    Ok(4.0 * r * r * (d / (2.0 * r)).asin() + d * (4.0 * r * r - d * d).sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Max sampled ratio ||S(y1) Δ S(y2)|| / ||y1 - y2||.
    pub estimate: f64,
    /// Analytic bound |Ve_r| D^2 / (4 delta).
    pub bound: f64,
    /// Half the clearance of the region of interest to the reflex vertices.
    pub delta: f64,
    pub pairs: usize,
}

/// Samples close pairs in `roi` and reports the worst symmetric-difference
/// ratio next to the analytic bound.
pub fn lipschitz_estimate(
    fs: &FreeSpace,
    roi: &Polygon,
    n_pairs: usize,
    rng: &mut impl rand::Rng,
) -> Result<LipschitzReport, MetricError> {
    let clearance = fs
        .reflex_vertices()
        .iter()
        .map(|r| {
            let n = roi.len();
            (0..n)
                .map(|i| {
                    crate::geom::dist_point_segment(
                        r.vertex,
                        roi.vertices()[i],
                        roi.vertices()[(i + 1) % n],
                    )
                })
                .fold(
                    if roi.contains(r.vertex, fs.eps_geom()) {
                        0.0
                    } else {
                        f64::INFINITY
                    },
                    f64::min,
                )
        })
        .fold(f64::INFINITY, f64::min);
    let delta = 0.5 * clearance;
    if !(delta > 0.0) {
        return Err(MetricError::DomainError(
            "region of interest touches a reflex vertex".into(),
        ));
    }
    let d = fs.bounding_diameter();
    let bound = if fs.reflex_vertices().is_empty() {
        // Convex environment: the polygon is constant, any bound holds.
        d
    } else {
        fs.reflex_vertices().len() as f64 * d * d / (4.0 * delta)
    };
    let (lo, hi) = roi.bbox();
    let mut estimate = 0.0_f64;
    let mut done = 0;
    let mut guard = 0;
    while done < n_pairs && guard < 200 * n_pairs {
        guard += 1;
        let y1 = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
        if !roi.contains(y1, fs.eps_geom()) || !fs.contains(y1) {
            continue;
        }
        let step = delta * rng.gen_range(0.01..0.2);
        let ang = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let y2 = Point2::new(y1.x + step * ang.cos(), y1.y + step * ang.sin());
        if !roi.contains(y2, fs.eps_geom()) || !fs.contains(y2) {
            continue;
        }
        let s1 = visibility_polygon(fs, y1)?.ring();
        let s2 = visibility_polygon(fs, y2)?.ring();
        let ratio = sym_diff_area(&s1, &s2) / y1.dist(y2);
        estimate = estimate.max(ratio);
        done += 1;
    }
    Ok(LipschitzReport {
        estimate,
        bound,
        delta,
        pairs: done,
    })
}

/// Monte-Carlo estimate of a metric by rejection sampling over D2. Returns
/// (estimate, standard error). Oracle shared by the test suites.
pub fn monte_carlo_metric(
    fs: &FreeSpace,
    cfg: &MetricConfig,
    pose: Pose,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> (f64, f64) {
    let (lo, hi) = cfg.d2.bbox();
    let x = pose.position;
    let mut inside = 0usize;
    let mut hits = 0usize;
    let mut drawn = 0usize;
    while drawn < samples {
        drawn += 1;
        let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if !cfg.d2.contains(p, 0.0) {
            continue;
        }
        inside += 1;
        if !fs.segment_in_free_space(x, p) {
            continue;
        }
        if let Some(r) = cfg.range {
            if x.dist(p) > r {
                continue;
            }
        }
        if let Some(phi) = cfg.fov {
            let ang = (p - x).angle();
            let mut diff = (ang - pose.heading()).rem_euclid(2.0 * std::f64::consts::PI);
            if diff > std::f64::consts::PI {
                diff = 2.0 * std::f64::consts::PI - diff;
            }
            if diff > 0.5 * phi {
                continue;
            }
        }
        hits += 1;
    }
    let area_d2 = cfg.d2.area();
    if inside == 0 {
        return (0.0, f64::INFINITY);
    }
    let frac = hits as f64 / inside as f64;
    let est = frac * area_d2;
    let se = area_d2 * (frac * (1.0 - frac) / inside as f64).sqrt();
    (est, se.max(1e-9 * area_d2))
}

/// True when `poly` stays inside the free space (vertices and edges in F,
/// no hole swallowed).
pub fn polygon_in_free_space(fs: &FreeSpace, poly: &Polygon) -> bool {
    let n = poly.len();
    let vs = poly.vertices();
    for i in 0..n {
        if !fs.contains(vs[i]) {
            return false;
        }
        if !fs.segment_in_free_space(vs[i], vs[(i + 1) % n]) {
            return false;
        }
    }
    for h in &fs.env().holes {
        if poly.contains_strict(h.vertices()[0], fs.eps_geom()) {
            return false;
        }
    }
    true
}

/// Convexity guard shared by the test suites.
pub fn is_convex_ring(ring: &[Point2], eps: f64) -> bool {
    ring_is_convex(ring, eps)
}
