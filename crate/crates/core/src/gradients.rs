//! Analytic directional derivatives of the visibility area and metric, the
//! mu-directional derivative, generalized gradients, and finite-difference
//! oracles.
//!
//! The effective anchor set for a direction is found by probing the anchor
//! set a short step along it, which realizes both on-segment selection
//! rules at once: a probe landing in a face picks up that face's anchors,
//! and a probe staying on a segment picks up the segment's anchor set. The
//! two anchors generating a segment aligned with the direction contribute
//! zero through the cross factor, so no case analysis is needed.

use crate::critical::{CriticalStructure, Located};
use crate::geom::{FreeSpace, Point2, ProjectedRay, UnitVector2, Vec2};
use crate::metrics::MetricConfig;
use crate::visibility::{anchors, AnchorOrientation};
use thiserror::Error;

/// Exclusion radius around reflex vertices, relative to the diameter.
pub const EPS_RV_REL: f64 = 1e-4;
/// Probe step for effective-anchor selection, relative to the diameter.
pub const H_PROBE_REL: f64 = 1e-7;
/// Feasibility horizon for the direction precondition.
pub const H_FEAS_REL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GradError {
    #[error("observer within the exclusion radius of a reflex vertex")]
    TooCloseToReflexVertex,
    #[error("direction leaves the free space")]
    InfeasibleDirection,
    #[error("anchor ray has infinite length")]
    InfiniteRay,
    #[error("observer outside the free space")]
    OutsideFreeSpace,
}

#[derive(Debug, Clone)]
pub struct DirectionalDerivative {
    pub value: f64,
    /// (anchor vertex id, signed contribution).
    pub per_anchor: Vec<(usize, f64)>,
    /// Effective anchor set used for this direction.
    pub anchors_used: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Area,
    Metric,
}

#[derive(Debug, Clone)]
pub struct GeneralizedGradient {
    /// One limit gradient per neighboring partition face.
    pub generators: Vec<Vec2>,
    /// Convex hull of the generators (a point, a segment, or a polygon).
    pub hull: Vec<Vec2>,
}

impl GeneralizedGradient {
    pub fn is_singleton(&self, tol: f64) -> bool {
        self.generators
            .iter()
            .all(|g| (*g + -self.generators[0]).norm() <= tol)
    }

    pub fn contains_zero(&self, tol: f64) -> bool {
        match self.hull.len() {
            0 => false,
            1 => self.hull[0].norm() <= tol,
            2 => {
                let (a, b) = (self.hull[0], self.hull[1]);
                let d = b + -a;
                let t = ((-a.x) * d.x + (-a.y) * d.y) / d.norm_sq().max(1e-300);
                let t = t.clamp(0.0, 1.0);
                (a + d * t).norm() <= tol
            }
            _ => {
                let n = self.hull.len();
                (0..n).all(|i| {
                    let a = self.hull[i];
                    let b = self.hull[(i + 1) % n];
                    (b + -a).cross(-a) >= -tol
                })
            }
        }
    }

    /// When the gradient excludes zero, all generators fit in an open
    /// half-cone of aperture below pi; returns its axis.
    pub fn open_halfcone_axis(&self) -> Option<UnitVector2> {
        if self.generators.is_empty() {
            return None;
        }
        let mut angles: Vec<f64> = self
            .generators
            .iter()
            .filter(|g| g.norm() > 0.0)
            .map(Vec2::angle)
            .collect();
        if angles.is_empty() {
            return None;
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = angles.len();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut best_gap = 0.0;
        let mut axis = 0.0;
        for i in 0..n {
            let next = if i + 1 < n {
                angles[i + 1]
            } else {
                angles[0] + two_pi
            };
            let gap = next - angles[i];
            if gap > best_gap {
                best_gap = gap;
                // Generators span the complement of the gap; the axis is
                // the bisector of that span.
                axis = (next + angles[i]) / 2.0 + std::f64::consts::PI;
            }
        }
        if best_gap > std::f64::consts::PI {
            Some(UnitVector2::from_angle(axis))
        } else {
            None
        }
    }
}

fn check_point(fs: &FreeSpace, x: Point2) -> Result<(), GradError> {
    if !fs.contains(x) {
        return Err(GradError::OutsideFreeSpace);
    }
    if fs.min_reflex_distance(x) < EPS_RV_REL * fs.bounding_diameter() {
        return Err(GradError::TooCloseToReflexVertex);
    }
    Ok(())
}

/// Effective anchors for direction `nu`: the anchor set a probe step along
/// the direction, with rays re-evaluated at `x`.
fn effective_anchors(
    fs: &FreeSpace,
    x: Point2,
    nu: UnitVector2,
) -> Result<Vec<(usize, Point2, AnchorOrientation, ProjectedRay)>, GradError> {
    let h_probe = H_PROBE_REL * fs.bounding_diameter();
    let probe = x + nu.as_vec() * h_probe;
    let set = anchors(fs, probe).map_err(|_| GradError::InfeasibleDirection)?;
    let mut out = Vec::with_capacity(set.anchors.len());
    for a in &set.anchors {
        let ray = fs
            .project_ray(a.vertex, x)
            .map_err(|_| GradError::TooCloseToReflexVertex)?;
        if !ray.is_finite() {
            return Err(GradError::InfiniteRay);
        }
        out.push((a.vertex_id, a.vertex, a.orientation, ray));
    }
    Ok(out)
}

/// Signed area rate across one anchor. The ray sweeps at angular rate
/// cross(unit(x - v_a), nu) / dist; the swept sliver has area r^2/2 per
/// radian. A positively oriented anchor keeps its visible side
/// counter-clockwise of the ray, so a counter-clockwise sweep occludes the
/// sliver and the area shrinks; a negatively oriented anchor gains it.
fn anchor_term(
    x: Point2,
    v_a: Point2,
    orientation: AnchorOrientation,
    ray: &ProjectedRay,
    nu: UnitVector2,
) -> f64 {
    let d = x - v_a;
    let dist = d.norm();
    let unit = d * (1.0 / dist);
    let sign = match orientation {
        AnchorOrientation::Positive => -1.0,
        AnchorOrientation::Negative => 1.0,
    };
    sign * ray.length * ray.length / dist * 0.5 * unit.cross(nu.as_vec())
}

/// Directional derivative of the visibility area.
pub fn dd_area(
    fs: &FreeSpace,
    _cs: &CriticalStructure,
    x: Point2,
    nu: UnitVector2,
) -> Result<DirectionalDerivative, GradError> {
    check_point(fs, x)?;
    let h0 = H_FEAS_REL * fs.bounding_diameter();
    if !fs.direction_feasible(x, nu, h0) {
        return Err(GradError::InfeasibleDirection);
    }
    let eff = effective_anchors(fs, x, nu)?;
    let per_anchor: Vec<(usize, f64)> = eff
        .iter()
        .map(|(id, v, orient, ray)| (*id, anchor_term(x, *v, *orient, ray, nu)))
        .collect();
    Ok(DirectionalDerivative {
        value: per_anchor.iter().map(|(_, c)| c).sum(),
        anchors_used: eff.iter().map(|(id, _, _, _)| *id).collect(),
        per_anchor,
    })
}

/// Directional derivative of the visibility metric: area contributions
/// scaled by the fraction of each swept sliver inside D2.
pub fn dd_metric(
    fs: &FreeSpace,
    cs: &CriticalStructure,
    cfg: &MetricConfig,
    x: Point2,
    nu: UnitVector2,
) -> Result<DirectionalDerivative, GradError> {
    let _ = cs;
    check_point(fs, x)?;
    let h0 = H_FEAS_REL * fs.bounding_diameter();
    if !fs.direction_feasible(x, nu, h0) {
        return Err(GradError::InfeasibleDirection);
    }
    let eff = effective_anchors(fs, x, nu)?;
    let per_anchor: Vec<(usize, f64)> = eff
        .iter()
        .map(|(id, v, orient, ray)| {
            let c = c_fraction(fs, cfg, ray);
            (*id, c * anchor_term(x, *v, *orient, ray, nu))
        })
        .collect();
    Ok(DirectionalDerivative {
        value: per_anchor.iter().map(|(_, c)| c).sum(),
        anchors_used: eff.iter().map(|(id, _, _, _)| *id).collect(),
        per_anchor,
    })
}

/// Limiting fraction of the area change across an anchor that falls inside
/// D2: the apex-weighted line integral (integral of 1_D2 s ds over the
/// projected ray) divided by r^2/2. The limit of the paper's shrinking
/// triangles is the same for every transversal direction, so no direction
/// argument is needed.
pub fn c_fraction(fs: &FreeSpace, cfg: &MetricConfig, ray: &ProjectedRay) -> f64 {
    if !ray.is_finite() || ray.length <= 0.0 {
        return 0.0;
    }
    let r = ray.length;
    let a = ray.origin;
    let b = ray.endpoint.unwrap();
    let d2 = &cfg.d2;
    // Split [0, r] at crossings with the D2 boundary.
    let mut cuts = vec![0.0, r];
    let n = d2.len();
    let dir = ray.direction.as_vec();
    for i in 0..n {
        let (p, q) = (d2.vertices()[i], d2.vertices()[(i + 1) % n]);
        let e = q - p;
        let denom = dir.cross(e);
        if denom.abs() <= 1e-14 * e.norm() {
            // Collinear along the ray: split at projected endpoints.
            if crate::geom::dist_point_segment(p, a, b) <= fs.eps_geom() {
                let s = (p - a).dot(dir);
                if s > 0.0 && s < r {
                    cuts.push(s);
                }
            }
            if crate::geom::dist_point_segment(q, a, b) <= fs.eps_geom() {
                let s = (q - a).dot(dir);
                if s > 0.0 && s < r {
                    cuts.push(s);
                }
            }
            continue;
        }
        let t = (p - a).cross(e) / denom;
        let u = (p - a).cross(dir) / denom;
        if t > 0.0 && t < r && (-1e-12..=1.0 + 1e-12).contains(&u) {
            cuts.push(t);
        }
    }
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let mut weighted = 0.0;
    for w in cuts.windows(2) {
        let (s1, s2) = (w[0], w[1]);
        if s2 - s1 <= 0.0 {
            continue;
        }
        let mid = a + dir * (0.5 * (s1 + s2));
        if d2.contains(mid, 0.0) {
            weighted += 0.5 * (s2 * s2 - s1 * s1);
        }
    }
    (weighted / (0.5 * r * r)).clamp(0.0, 1.0)
}

/// Mu-directional derivative of the visibility polygon: unsigned sum of the
/// per-anchor area contributions. Dominates |dd_area| and |dd_metric| for
/// any D2.
pub fn mu_dd(
    fs: &FreeSpace,
    cs: &CriticalStructure,
    x: Point2,
    nu: UnitVector2,
) -> Result<f64, GradError> {
    let dd = dd_area(fs, cs, x, nu)?;
    Ok(dd.per_anchor.iter().map(|(_, c)| c.abs()).sum())
}

/// Generalized gradient at `x`: one generator per neighboring partition
/// face, computed from that face's anchor set.
pub fn generalized_gradient(
    fs: &FreeSpace,
    cs: &CriticalStructure,
    cfg: &MetricConfig,
    x: Point2,
    objective: Objective,
) -> Result<GeneralizedGradient, GradError> {
    check_point(fs, x)?;
    let face_ids = match cs.locate(fs, x).map_err(|_| GradError::OutsideFreeSpace)? {
        Located::Face(id) => vec![id],
        Located::OnSegments(_) => cs.faces_at(fs, x),
    };
    let mut generators = Vec::new();
    for id in face_ids {
        let face = cs.face(id);
        // Orientations are constant per face; read them at its interior
        // sample where the quadrant test is unambiguous.
        let face_anchors = match anchors(fs, face.rep) {
            Ok(set) => set,
            Err(_) => continue,
        };
        let mut g = Vec2::new(0.0, 0.0);
        let mut ok = true;
        for vid in &face.anchor_set {
            let v = fs.vertex(*vid);
            let orient = match face_anchors.get(*vid) {
                Some(a) => a.orientation,
                None => {
                    ok = false;
                    break;
                }
            };
            let ray = match fs.project_ray(v, x) {
                Ok(r) if r.is_finite() => r,
                _ => {
                    ok = false;
                    break;
                }
            };
            let scale = match objective {
                Objective::Area => 1.0,
                Objective::Metric => c_fraction(fs, cfg, &ray),
            };
            let e1 = UnitVector2::new(1.0, 0.0).unwrap();
            let e2 = UnitVector2::new(0.0, 1.0).unwrap();
            g = g + Vec2::new(
                scale * anchor_term(x, v, orient, &ray, e1),
                scale * anchor_term(x, v, orient, &ray, e2),
            );
        }
        if ok {
            generators.push(g);
        }
    }
    let hull = convex_hull(&generators);
    Ok(GeneralizedGradient { generators, hull })
}

fn convex_hull(pts: &[Vec2]) -> Vec<Vec2> {
    let mut p: Vec<Vec2> = pts.to_vec();
    p.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    p.dedup_by(|a, b| (*a + -*b).norm() < 1e-15);
    if p.len() <= 2 {
        return p;
    }
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a + -o).cross(b + -o);
    let mut hull: Vec<Vec2> = Vec::new();
    for &pt in p.iter().chain(p.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0 {
            hull.pop();
        }
        hull.push(pt);
    }
    hull.pop();
    hull
}

/// One-sided finite difference (f(x + h nu) - f(x)) / h.
pub fn fd_oracle(f: &dyn Fn(Point2) -> f64, x: Point2, nu: UnitVector2, h: f64) -> f64 {
    (f(x + nu.as_vec() * h) - f(x)) / h
}

/// Central finite difference for face-interior points.
pub fn fd_oracle_central(f: &dyn Fn(Point2) -> f64, x: Point2, nu: UnitVector2, h: f64) -> f64 {
    (f(x + nu.as_vec() * h) - f(x - nu.as_vec() * h)) / (2.0 * h)
}
