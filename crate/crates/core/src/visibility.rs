//! Visibility polygon construction and anchor identification.
//!
//! The polygon is assembled from the construction lemma: its vertices are
//! the visible vertices of the free space plus the boundary projections of
//! the anchors, in angular order around the observer. Event directions are
//! resolved with a pair of nudged probe rays that select the boundary edge
//! on each side; exact intersections against those edges keep the output
//! coordinates exact in general position.

use crate::geom::{
    FreeSpace, GeomError, Location, Point2, ProjectedRay, Quadrant, UnitVector2, Vec2,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Probe nudge used to pick the boundary edge on each side of an event ray.
/// Large enough that the displaced ray clears the endpoint-inclusion band of
/// the raw caster at every relevant distance, small enough to separate
/// distinct events in general position.
const EPS_PROBE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum VisError {
    #[error("observer lies outside the free space")]
    ObserverOutsideFreeSpace,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorOrientation {
    Positive,
    Negative,
}

#[derive(Debug, Clone)]
pub struct Anchor {
    pub vertex_id: usize,
    pub vertex: Point2,
    pub orientation: AnchorOrientation,
    pub ray: ProjectedRay,
}

#[derive(Debug, Clone)]
pub struct AnchorSet {
    pub observer: Point2,
    pub anchors: Vec<Anchor>,
}

impl AnchorSet {
    pub fn ids(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.anchors.iter().map(|a| a.vertex_id).collect();
        v.sort_unstable();
        v
    }

    pub fn get(&self, vertex_id: usize) -> Option<&Anchor> {
        self.anchors.iter().find(|a| a.vertex_id == vertex_id)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum RegionEdge {
    Linear {
        a: Point2,
        b: Point2,
    },
    Arc {
        center: Point2,
        radius: f64,
        theta_start: f64,
        theta_end: f64,
    },
}

/// Star-shaped region seen from an observer. All edges are linear for the
/// unlimited-range polygon; range-limited regions also carry circular arcs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisibilityRegion {
    pub observer: Point2,
    pub edges: Vec<RegionEdge>,
    pub area: f64,
}

impl VisibilityRegion {
    /// Vertex ring for an all-linear region.
    pub fn ring(&self) -> Vec<Point2> {
        self.edges
            .iter()
            .map(|e| match e {
                RegionEdge::Linear { a, .. } => *a,
                RegionEdge::Arc { .. } => {
                    panic!("ring() is only defined for all-linear regions")
                }
            })
            .collect()
    }

    pub fn has_arcs(&self) -> bool {
        self.edges
            .iter()
            .any(|e| matches!(e, RegionEdge::Arc { .. }))
    }
}

fn region_area(edges: &[RegionEdge]) -> f64 {
    let mut acc = 0.0;
    for e in edges {
        match e {
            RegionEdge::Linear { a, b } => acc += 0.5 * (a.x * b.y - b.x * a.y),
            RegionEdge::Arc {
                center,
                radius,
                theta_start,
                theta_end,
            } => {
                let (c, r) = (center, radius);
                let dth = theta_end - theta_start;
                let (s0, c0) = theta_start.sin_cos();
                let (s1, c1) = theta_end.sin_cos();
                acc += 0.5 * (r * r * dth + r * (c.x * (s1 - s0) - c.y * (c1 - c0)));
            }
        }
    }
    acc
}

/// All vertices of the free space visible from `x` (closed-segment rule).
pub fn visible_vertices(fs: &FreeSpace, x: Point2) -> Result<Vec<usize>, VisError> {
    if fs.classify(x) == Location::Exterior {
        return Err(VisError::ObserverOutsideFreeSpace);
    }
    Ok(fs
        .vertices()
        .iter()
        .enumerate()
        .filter(|(_, (_, v))| fs.segment_in_free_space(x, *v))
        .map(|(i, _)| i)
        .collect())
}

/// Anchors of the observer: visible reflex vertices whose quadrant test
/// places `x` in M2 or M4. Positive orientation corresponds to M4 and
/// negative to M2. The observer's own vertex is excluded.
pub fn anchors(fs: &FreeSpace, x: Point2) -> Result<AnchorSet, VisError> {
    if fs.classify(x) == Location::Exterior {
        return Err(VisError::ObserverOutsideFreeSpace);
    }
    let mut out = Vec::new();
    for info in fs.reflex_vertices() {
        if x.dist(info.vertex) <= fs.eps_geom() {
            continue;
        }
        let quadrant = match fs.quadrant(info, x) {
            Some(q @ (Quadrant::M2 | Quadrant::M4)) => q,
            _ => continue,
        };
        if !fs.segment_in_free_space(x, info.vertex) {
            continue;
        }
        let ray = fs.project_ray(info.vertex, x)?;
        out.push(Anchor {
            vertex_id: info.vertex_id,
            vertex: info.vertex,
            orientation: if quadrant == Quadrant::M4 {
                AnchorOrientation::Positive
            } else {
                AnchorOrientation::Negative
            },
            ray,
        });
    }
    Ok(AnchorSet {
        observer: x,
        anchors: out,
    })
}

/// First-hit distance from `x` along `dir`, zero when the ray immediately
/// leaves the free space.
fn probe_dist(fs: &FreeSpace, x: Point2, dir: UnitVector2) -> (f64, Option<usize>) {
    match fs.first_hit(x, dir) {
        Some((t, e)) => {
            let mid = x + dir.as_vec() * (0.5 * t);
            if fs.classify(mid) == Location::Exterior {
                (0.0, None)
            } else {
                (t, Some(e))
            }
        }
        None => (0.0, None),
    }
}

/// Distance along the exact ray (x, dir) to the supporting line of edge
/// `edge_idx`; falls back to `fallback` for degenerate configurations.
fn exact_line_dist(fs: &FreeSpace, x: Point2, dir: UnitVector2, edge_idx: usize, fallback: f64) -> f64 {
    let e = fs.edges()[edge_idx];
    let ev = e.b - e.a;
    let denom = dir.as_vec().cross(ev);
    if denom.abs() <= 1e-14 * ev.norm() {
        return fallback;
    }
    let t = (e.a - x).cross(ev) / denom;
    if t > 0.0 && t.is_finite() {
        t
    } else {
        fallback
    }
}

struct EventGroup {
    dir: UnitVector2,
    /// Marked points (exact coordinates) on the event ray, by distance.
    marks: Vec<(f64, Point2)>,
}

/// Visibility polygon of an observer in the free space.
pub fn visibility_polygon(fs: &FreeSpace, x: Point2) -> Result<VisibilityRegion, VisError> {
    if fs.classify(x) == Location::Exterior {
        return Err(VisError::ObserverOutsideFreeSpace);
    }
    let vis = visible_vertices(fs, x)?;
    let anchor_set = anchors(fs, x)?;

    // Marked points: visible vertices and anchor-ray endpoints.
    let mut marked: Vec<(Point2, f64)> = Vec::new();
    for id in &vis {
        let v = fs.vertex(*id);
        let d = v.dist(x);
        if d > fs.eps_geom() {
            marked.push((v, d));
        }
    }
    for a in &anchor_set.anchors {
        if let Some(u) = a.ray.endpoint {
            marked.push((u, u.dist(x)));
        }
    }

    // Group by direction (collinear, same side).
    let mut entries: Vec<(f64, Point2, f64)> = marked
        .iter()
        .map(|(p, d)| ((*p - x).angle(), *p, *d))
        .collect();
    entries.sort_by(|a, b| (a.0, a.2).partial_cmp(&(b.0, b.2)).unwrap());
    let mut groups: Vec<EventGroup> = Vec::new();
    let same_dir = |u: Vec2, w: Vec2| -> bool {
        u.cross(w).abs() <= fs.eps_geom() * u.norm().max(w.norm()) && u.dot(w) > 0.0
    };
    for (_, p, d) in &entries {
        let dirv = *p - x;
        if let Some(g) = groups.last_mut() {
            if same_dir(g.dir.as_vec() * 1.0, dirv) {
                g.marks.push((*d, *p));
                continue;
            }
        }
        groups.push(EventGroup {
            dir: dirv.normalized().expect("nonzero mark direction"),
            marks: vec![(*d, *p)],
        });
    }
    // Wrap-around: first and last group may share a direction.
    if groups.len() > 1 {
        let first_dir = groups[0].dir.as_vec();
        let last_dir = groups.last().unwrap().dir.as_vec();
        if same_dir(first_dir, last_dir) {
            let last = groups.pop().unwrap();
            groups[0].marks.extend(last.marks);
            groups[0]
                .marks
                .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        }
    }

    let snap_tol = (fs.eps_geom() * 100.0).max(fs.bounding_diameter() * 1e-7);
    let join_tol = snap_tol;
    let mut ring: Vec<Point2> = Vec::new();
    let push = |ring: &mut Vec<Point2>, p: Point2| {
        if ring.last().map_or(true, |q| q.dist(p) > fs.eps_geom()) {
            ring.push(p);
        }
    };

    for g in &groups {
        // Edge on the clockwise side (sweep enters the event) and on the
        // counter-clockwise side (sweep leaves it).
        let d_in = g.dir.rotated_cw(EPS_PROBE);
        let d_out = g.dir.rotated_cw(-EPS_PROBE);
        let (t_in_probe, e_in) = probe_dist(fs, x, d_in);
        let (t_out_probe, e_out) = probe_dist(fs, x, d_out);
        let rho_in = match e_in {
            Some(e) => exact_line_dist(fs, x, g.dir, e, t_in_probe),
            None => t_in_probe,
        };
        let rho_out = match e_out {
            Some(e) => exact_line_dist(fs, x, g.dir, e, t_out_probe),
            None => t_out_probe,
        };
        let snap = |rho: f64| -> Point2 {
            g.marks
                .iter()
                .find(|(d, _)| (d - rho).abs() <= snap_tol)
                .map(|(_, p)| *p)
                .unwrap_or_else(|| x + g.dir.as_vec() * rho)
        };
        let p_in = snap(rho_in);
        if rho_in > fs.eps_geom() || rho_out > fs.eps_geom() {
            push(&mut ring, p_in);
            if (rho_out - rho_in).abs() > join_tol {
                push(&mut ring, snap(rho_out));
            }
        }
    }
    if ring.len() >= 2 && ring[0].dist(*ring.last().unwrap()) <= fs.eps_geom() {
        ring.pop();
    }

    let edges: Vec<RegionEdge> = (0..ring.len())
        .map(|i| RegionEdge::Linear {
            a: ring[i],
            b: ring[(i + 1) % ring.len()],
        })
        .collect();
    let area = region_area(&edges).max(0.0);
    Ok(VisibilityRegion {
        observer: x,
        edges,
        area,
    })
}

/// Visibility region clipped to the disk of radius `r` around the observer;
/// pieces of the boundary beyond the range are replaced by circular arcs.
pub fn range_limited_region(
    fs: &FreeSpace,
    x: Point2,
    r: f64,
) -> Result<VisibilityRegion, VisError> {
    assert!(r > 0.0, "range must be positive");
    let full = visibility_polygon(fs, x)?;
    let ring = full.ring();
    let n = ring.len();
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut edges: Vec<RegionEdge> = Vec::new();
    let mut pending_exit: Option<f64> = None;
    let mut first_entry: Option<f64> = None;
    let mut cur_inside = (ring[0] - x).norm_sq() < r * r;

    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        for (p, q, inside) in segment_circle_windows(a, b, x, r) {
            if inside {
                if !cur_inside {
                    // Genuine entry crossing at p.
                    let ang = (p - x).angle();
                    if let Some(exit_ang) = pending_exit.take() {
                        let mut dth = ang - exit_ang;
                        while dth < 0.0 {
                            dth += two_pi;
                        }
                        edges.push(RegionEdge::Arc {
                            center: x,
                            radius: r,
                            theta_start: exit_ang,
                            theta_end: exit_ang + dth,
                        });
                    } else if first_entry.is_none() {
                        first_entry = Some(ang);
                    }
                    cur_inside = true;
                }
                edges.push(RegionEdge::Linear { a: p, b: q });
            } else if cur_inside {
                pending_exit = Some((p - x).angle());
                cur_inside = false;
            }
        }
    }
    if let Some(exit_ang) = pending_exit {
        let entry = first_entry.unwrap_or(exit_ang + two_pi);
        let mut dth = entry - exit_ang;
        while dth < 0.0 {
            dth += two_pi;
        }
        edges.push(RegionEdge::Arc {
            center: x,
            radius: r,
            theta_start: exit_ang,
            theta_end: exit_ang + dth,
        });
    }
    if edges.iter().all(|e| matches!(e, RegionEdge::Arc { .. })) {
        // Whole boundary beyond range: the region is the full disk.
        edges = vec![RegionEdge::Arc {
            center: x,
            radius: r,
            theta_start: 0.0,
            theta_end: two_pi,
        }];
    }
    let area = region_area(&edges).max(0.0);
    Ok(VisibilityRegion {
        observer: x,
        edges,
        area,
    })
}

/// Splits [a, b] at its circle crossings; yields (start, end, inside) per
/// window. Tangencies count as outside (the boundary follows the arc).
fn segment_circle_windows(a: Point2, b: Point2, c: Point2, r: f64) -> Vec<(Point2, Point2, bool)> {
    let d = b - a;
    let pa = d.norm_sq();
    if pa == 0.0 {
        return vec![];
    }
    let ac = a - c;
    let pb = 2.0 * ac.dot(d);
    let pc = ac.norm_sq() - r * r;
    let disc = pb * pb - 4.0 * pa * pc;
    let mut cuts = vec![0.0, 1.0];
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-pb - sq) / (2.0 * pa), (-pb + sq) / (2.0 * pa)] {
            if t > 1e-12 && t < 1.0 - 1e-12 {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let p = |t: f64| a + d * t;
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = p(0.5 * (w[0] + w[1]));
            let inside = (mid - c).norm_sq() < r * r * (1.0 - 1e-12);
            (p(w[0]), p(w[1]), inside)
        })
        .collect()
}
