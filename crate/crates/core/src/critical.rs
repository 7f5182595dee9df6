//! Inflection segments, the convex partition of the reduced free space, and
//! point location.
//!
//! Type I segments are the four quadrant-boundary rays of each reflex
//! vertex; Type II segments are the two projected rays of each mutually
//! visible reflex pair. Crossing a segment flips the anchor status of its
//! `anchor_delta` vertex. Collinear overlapping segments are kept as
//! separate records; the arrangement atomizes them, so every face edge
//! knows all records covering it geometrically.

use crate::geom::{dist_sq_point_segment, orient2d, FreeSpace, Location, Point2};
use crate::visibility::anchors;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CriticalError {
    #[error("arrangement degeneracy between segments {0} and {1}")]
    ArrangementDegeneracy(usize, usize),
    #[error("point lies outside the free space")]
    OutsideFreeSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generators {
    /// Type I: the reflex vertex whose quadrant boundary the ray is part of.
    Reflex(usize),
    /// Type II: ray origin vertex and the vertex it points away from.
    Pair(usize, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InflectionSegment {
    pub id: usize,
    pub kind: SegmentKind,
    pub generators: Generators,
    pub a: Point2,
    pub b: Point2,
    /// Vertex whose anchor status flips across this segment.
    pub anchor_delta: usize,
    /// Lies along the free-space boundary (cannot be crossed transversally).
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionFace {
    pub id: usize,
    /// Convex ring, counter-clockwise.
    pub ring: Vec<Point2>,
    pub anchor_set: Vec<usize>,
    /// Interior sample at which the anchor set was evaluated.
    pub rep: Point2,
    pub area: f64,
}

impl PartitionFace {
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let n = self.ring.len();
        (0..n).all(|i| orient2d(self.ring[i], self.ring[(i + 1) % n], p) >= -tol)
    }
}

#[derive(Debug, Clone)]
pub struct CriticalStructure {
    pub segments: Vec<InflectionSegment>,
    pub faces: Vec<PartitionFace>,
    /// Face pairs sharing a piece of an inflection segment.
    pub adjacency: Vec<(usize, usize)>,
    eps_locate: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Located {
    Face(usize),
    OnSegments(Vec<usize>),
}

/// Enumerates all inflection segments, clipped to the free space.
pub fn inflection_segments(fs: &FreeSpace) -> Vec<InflectionSegment> {
    let mut out: Vec<InflectionSegment> = Vec::new();
    let mut push = |kind, generators, a: Point2, b: Point2, delta: usize, fs: &FreeSpace| {
        let mid = Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
        let on_boundary = fs.classify(mid) == Location::Boundary;
        out.push(InflectionSegment {
            id: out.len(),
            kind,
            generators,
            a,
            b,
            anchor_delta: delta,
            on_boundary,
        });
    };

    // Type I: the four quadrant-boundary rays per reflex vertex. Two point
    // out of the vertex away from its neighbors; two extend the incident
    // edges beyond the neighbors.
    for info in fs.reflex_vertices() {
        let vref = fs.vertices()[info.vertex_id].0;
        let poly = match vref.ring {
            crate::geom::RingId::Outer => &fs.env().outer,
            crate::geom::RingId::Hole(i) => &fs.env().holes[i],
        };
        let n = poly.len();
        let prev = poly.vertices()[(vref.pos + n - 1) % n];
        let next = poly.vertices()[(vref.pos + 1) % n];
        let v = info.vertex;
        for (origin, away) in [(v, prev), (v, next), (prev, v), (next, v)] {
            if let Ok(ray) = fs.project_ray(origin, away) {
                if ray.is_finite() && ray.length > fs.eps_geom() {
                    push(
                        SegmentKind::TypeI,
                        Generators::Reflex(info.vertex_id),
                        origin,
                        ray.endpoint.unwrap(),
                        info.vertex_id,
                        fs,
                    );
                }
            }
        }
    }

    // Type II: the two projected rays per mutually visible reflex pair.
    let reflex = fs.reflex_vertices();
    for i in 0..reflex.len() {
        for j in (i + 1)..reflex.len() {
            let (ri, rj) = (&reflex[i], &reflex[j]);
            if !fs.segment_in_free_space(ri.vertex, rj.vertex) {
                continue;
            }
            for (from, away) in [(ri, rj), (rj, ri)] {
                if let Ok(ray) = fs.project_ray(from.vertex, away.vertex) {
                    if ray.is_finite() && ray.length > fs.eps_geom() {
                        // Crossing the ray from `from` flips visibility of
                        // the far vertex `away`.
                        push(
                            SegmentKind::TypeII,
                            Generators::Pair(from.vertex_id, away.vertex_id),
                            from.vertex,
                            ray.endpoint.unwrap(),
                            away.vertex_id,
                            fs,
                        );
                    }
                }
            }
        }
    }
    out
}

/// Upper bound on the number of inflection segments: 4 n_r + 2 C(n_r, 2).
pub fn segment_count_bound(n_reflex: usize) -> usize {
    4 * n_reflex + n_reflex * (n_reflex.saturating_sub(1))
}

struct InputEdge {
    a: Point2,
    b: Point2,
}

/// Builds the arrangement of the free-space boundary and all inflection
/// segments, extracts the convex faces, and labels each face with the
/// anchor set of an interior sample.
pub fn build_partition(
    fs: &FreeSpace,
    segments: &[InflectionSegment],
) -> Result<CriticalStructure, CriticalError> {
    let eps_snap = 1e-7 * fs.bounding_diameter();
    let mut inputs: Vec<InputEdge> = fs
        .edges()
        .iter()
        .map(|e| InputEdge { a: e.a, b: e.b })
        .collect();
    for s in segments {
        if !s.on_boundary {
            inputs.push(InputEdge { a: s.a, b: s.b });
        }
    }

    // Split every input edge at intersections and collinear-overlap
    // endpoints with every other input edge.
    let mut atomic: Vec<(Point2, Point2)> = Vec::new();
    for (i, e) in inputs.iter().enumerate() {
        let r = e.b - e.a;
        let len = r.norm();
        let mut ts: Vec<f64> = vec![0.0, 1.0];
        for (j, f) in inputs.iter().enumerate() {
            if i == j {
                continue;
            }
            let s = f.b - f.a;
            let denom = r.cross(s);
            if denom.abs() <= 1e-12 * len * s.norm() {
                let online = |p: Point2| -> f64 { orient2d(e.a, e.b, p).abs() / len };
                let lane = online(f.a).max(online(f.b));
                if lane <= eps_snap {
                    // Collinear overlap: split at the other edge's endpoints.
                    for p in [f.a, f.b] {
                        let t = (p - e.a).dot(r) / (len * len);
                        if t > 1e-9 && t < 1.0 - 1e-9 {
                            ts.push(t);
                        }
                    }
                } else if lane <= 30.0 * eps_snap {
                    let near = dist_sq_point_segment(f.a, e.a, e.b).sqrt()
                        <= 30.0 * eps_snap
                        || dist_sq_point_segment(f.b, e.a, e.b).sqrt() <= 30.0 * eps_snap;
                    if near {
                        return Err(CriticalError::ArrangementDegeneracy(i, j));
                    }
                }
                continue;
            }
            let t = (f.a - e.a).cross(s) / denom;
            let u = (f.a - e.a).cross(r) / denom;
            let tol_t = eps_snap / len;
            let tol_u = eps_snap / s.norm();
            if (-tol_u..=1.0 + tol_u).contains(&u) && t > tol_t && t < 1.0 - tol_t {
                ts.push(t);
            }
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a - *b) * len < eps_snap);
        for w in ts.windows(2) {
            let p = e.a + r * w[0];
            let q = e.a + r * w[1];
            if p.dist(q) > eps_snap {
                atomic.push((p, q));
            }
        }
    }

    // Snap endpoints into a canonical vertex set.
    let mut verts: Vec<Point2> = Vec::new();
    let vid = |p: Point2, verts: &mut Vec<Point2>| -> usize {
        for (k, q) in verts.iter().enumerate() {
            if q.dist(p) <= eps_snap * 3.0 {
                return k;
            }
        }
        verts.push(p);
        verts.len() - 1
    };
    let mut edge_keys: Vec<(usize, usize)> = Vec::new();
    for (p, q) in &atomic {
        let a = vid(*p, &mut verts);
        let b = vid(*q, &mut verts);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !edge_keys.contains(&key) {
            edge_keys.push(key);
        }
    }

    // Half-edge structure with rotational next-pointers.
    let nh = edge_keys.len() * 2;
    let mut he_from = vec![0usize; nh];
    let mut he_to = vec![0usize; nh];
    for (k, (a, b)) in edge_keys.iter().enumerate() {
        he_from[2 * k] = *a;
        he_to[2 * k] = *b;
        he_from[2 * k + 1] = *b;
        he_to[2 * k + 1] = *a;
    }
    let twin = |h: usize| h ^ 1;
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for h in 0..nh {
        outgoing[he_from[h]].push(h);
    }
    for (v, list) in outgoing.iter_mut().enumerate() {
        list.sort_by(|&h1, &h2| {
            let a1 = (verts[he_to[h1]] - verts[v]).angle();
            let a2 = (verts[he_to[h2]] - verts[v]).angle();
            a1.partial_cmp(&a2).unwrap()
        });
    }
    let mut next = vec![usize::MAX; nh];
    for h in 0..nh {
        let w = he_to[h];
        let list = &outgoing[w];
        let r = twin(h);
        let i = list.iter().position(|&g| g == r).expect("twin listed");
        next[h] = list[(i + list.len() - 1) % list.len()];
    }

    // Trace faces; keep bounded (counter-clockwise) cycles whose interior
    // sample lies in the free space.
    let mut face_of_he = vec![usize::MAX; nh];
    let mut faces: Vec<PartitionFace> = Vec::new();
    let area_noise = 1e-12 * fs.bounding_diameter() * fs.bounding_diameter();
    const NOT_A_FACE: usize = usize::MAX - 1;
    for h0 in 0..nh {
        if face_of_he[h0] != usize::MAX {
            continue;
        }
        let mut cycle = Vec::new();
        let mut h = h0;
        loop {
            cycle.push(h);
            h = next[h];
            if h == h0 || cycle.len() > nh {
                break;
            }
        }
        let ring: Vec<Point2> = cycle.iter().map(|&g| verts[he_from[g]]).collect();
        let area = crate::geom::signed_area(&ring);
        let face_id = if area > area_noise {
            match face_interior_sample(&ring, fs, faces.len()) {
                Some(rep) if fs.classify(rep) != Location::Exterior => {
                    let set = anchors(fs, rep).map(|s| s.ids()).unwrap_or_default();
                    faces.push(PartitionFace {
                        id: faces.len(),
                        ring,
                        anchor_set: set,
                        rep,
                        area,
                    });
                    faces.len() - 1
                }
                _ => NOT_A_FACE, // hole interior
            }
        } else {
            NOT_A_FACE // unbounded face or numeric sliver
        };
        for g in cycle {
            face_of_he[g] = face_id;
        }
    }

    // Adjacency across atomic edges covered by an inflection segment.
    let seg_cover = |p: Point2, q: Point2| -> bool {
        let mid = Point2::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
        segments.iter().any(|s| {
            !s.on_boundary && dist_sq_point_segment(mid, s.a, s.b) <= eps_snap * eps_snap * 9.0
        })
    };
    let mut adjacency = Vec::new();
    for k in 0..edge_keys.len() {
        let (f1, f2) = (face_of_he[2 * k], face_of_he[2 * k + 1]);
        if f1 < faces.len() && f2 < faces.len() && f1 != f2 {
            let (a, b) = edge_keys[k];
            if seg_cover(verts[a], verts[b]) {
                let pair = (f1.min(f2), f1.max(f2));
                if !adjacency.contains(&pair) {
                    adjacency.push(pair);
                }
            }
        }
    }

    Ok(CriticalStructure {
        segments: segments.to_vec(),
        faces,
        adjacency,
        eps_locate: fs.eps_geom(),
    })
}

/// Interior sample for anchor evaluation: the centroid when it is deep
/// enough, otherwise the deepest of a deterministic sample set.
fn face_interior_sample(ring: &[Point2], fs: &FreeSpace, salt: usize) -> Option<Point2> {
    let n = ring.len();
    let centroid = {
        let (mut cx, mut cy, mut aa) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (p, q) = (ring[i], ring[(i + 1) % n]);
            let w = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
            aa += w;
        }
        if aa.abs() < 1e-300 {
            return None;
        }
        Point2::new(cx / (3.0 * aa), cy / (3.0 * aa))
    };
    let depth = |p: Point2| -> f64 {
        (0..n)
            .map(|i| dist_sq_point_segment(p, ring[i], ring[(i + 1) % n]).sqrt())
            .fold(f64::INFINITY, f64::min)
    };
    let inside = |p: Point2| (0..n).all(|i| orient2d(ring[i], ring[(i + 1) % n], p) > 0.0);
    let deep_enough = 1e-6 * fs.bounding_diameter();
    if inside(centroid) && depth(centroid) > deep_enough {
        return Some(centroid);
    }
    // Sliver face: scan deterministic pseudo-random interior candidates for
    // the deepest one.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed ^ salt as u64);
    let (lo, hi) = {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in ring {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    };
    let mut best: Option<(f64, Point2)> = None;
    for _ in 0..512 {
        let p = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
        if inside(p) {
            let d = depth(p);
            if best.map_or(true, |(bd, _)| d > bd) {
                best = Some((d, p));
            }
        }
    }
    best.map(|(_, p)| p).or(Some(centroid))
}

impl CriticalStructure {
    /// Face containment or the list of inflection-segment records within
    /// eps_geom of `x`.
    pub fn locate(&self, fs: &FreeSpace, x: Point2) -> Result<Located, CriticalError> {
        if fs.classify(x) == Location::Exterior {
            return Err(CriticalError::OutsideFreeSpace);
        }
        let e2 = self.eps_locate * self.eps_locate;
        let hits: Vec<usize> = self
            .segments
            .iter()
            .filter(|s| dist_sq_point_segment(x, s.a, s.b) <= e2)
            .map(|s| s.id)
            .collect();
        if !hits.is_empty() {
            return Ok(Located::OnSegments(hits));
        }
        let tol = 10.0 * self.eps_locate * fs.bounding_diameter();
        for f in &self.faces {
            if f.contains(x, tol) {
                return Ok(Located::Face(f.id));
            }
        }
        // On the free-space boundary between snapped vertices; pick the
        // nearest face.
        self.faces
            .iter()
            .min_by(|f, g| {
                ring_dist(&f.ring, x)
                    .partial_cmp(&ring_dist(&g.ring, x))
                    .unwrap()
            })
            .map(|f| Located::Face(f.id))
            .ok_or(CriticalError::OutsideFreeSpace)
    }

    /// Faces whose closure contains `x`.
    pub fn faces_at(&self, fs: &FreeSpace, x: Point2) -> Vec<usize> {
        let tol = 10.0 * self.eps_locate * fs.bounding_diameter();
        self.faces
            .iter()
            .filter(|f| f.contains(x, tol))
            .map(|f| f.id)
            .collect()
    }

    pub fn face(&self, id: usize) -> &PartitionFace {
        &self.faces[id]
    }
}

fn ring_dist(ring: &[Point2], p: Point2) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| dist_sq_point_segment(p, ring[i], ring[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Environment, FreeSpace, Polygon};
    use approx::assert_relative_eq;

    fn fig1() -> FreeSpace {
        let outer = Polygon::new(vec![
            Point2::new(-1.0, -1.0),
            Point2::new(11.0, -1.0),
            Point2::new(11.0, 1.0),
            Point2::new(9.0, 1.0),
            Point2::new(9.0, 5.0),
            Point2::new(1.0, 5.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ])
        .unwrap();
        let hole = Polygon::new(vec![
            Point2::new(3.0, 1.0),
            Point2::new(7.0, 1.0),
            Point2::new(7.0, 3.0),
            Point2::new(3.0, 3.0),
        ])
        .unwrap();
        FreeSpace::build(Environment::new(outer, vec![hole]).unwrap()).unwrap()
    }

    fn vid_at(fs: &FreeSpace, p: Point2) -> usize {
        fs.vertices()
            .iter()
            .position(|(_, v)| v.dist(p) < 1e-9)
            .unwrap()
    }

    fn has_segment(
        segs: &[InflectionSegment],
        a: Point2,
        b: Point2,
        delta: Point2,
        fs: &FreeSpace,
    ) -> bool {
        let d = vid_at(fs, delta);
        segs.iter().any(|s| {
            s.anchor_delta == d
                && ((s.a.dist(a) < 1e-7 && s.b.dist(b) < 1e-7)
                    || (s.a.dist(b) < 1e-7 && s.b.dist(a) < 1e-7))
        })
    }

    #[test]
    fn fig1_type_i_segments() {
        let fs = fig1();
        let segs = inflection_segments(&fs);
        // q3 rays: down to the bottom wall and right to the obstacle.
        assert!(has_segment(
            &segs,
            Point2::new(1.0, 1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            &fs
        ));
        assert!(has_segment(
            &segs,
            Point2::new(1.0, 1.0),
            Point2::new(3.0, 1.0),
            Point2::new(1.0, 1.0),
            &fs
        ));
        // o1 rays along x=3 and y=1.
        assert!(has_segment(
            &segs,
            Point2::new(3.0, 1.0),
            Point2::new(3.0, -1.0),
            Point2::new(3.0, 1.0),
            &fs
        ));
        assert!(has_segment(
            &segs,
            Point2::new(3.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(3.0, 1.0),
            &fs
        ));
    }

    #[test]
    fn fig1_type_ii_segments() {
        let fs = fig1();
        let segs = inflection_segments(&fs);
        // Pair (o3, q6): rays through (7,3)->(5,5) and (9,1)->(11,-1).
        assert!(has_segment(
            &segs,
            Point2::new(7.0, 3.0),
            Point2::new(5.0, 5.0),
            Point2::new(9.0, 1.0),
            &fs
        ));
        assert!(has_segment(
            &segs,
            Point2::new(9.0, 1.0),
            Point2::new(11.0, -1.0),
            Point2::new(7.0, 3.0),
            &fs
        ));
    }

    #[test]
    fn fig1_segment_count_and_bound() {
        let fs = fig1();
        let segs = inflection_segments(&fs);
        let n_r = fs.reflex_vertices().len();
        assert_eq!(n_r, 6);
        assert_eq!(segment_count_bound(n_r), 54);
        assert!(segs.len() <= 54);
        // Brute-force enumeration of this environment: 20 Type I records
        // (two rays of q3 and q6 leave the free space immediately) and 22
        // Type II records (11 mutually visible reflex pairs).
        assert_eq!(
            segs.iter().filter(|s| s.kind == SegmentKind::TypeI).count(),
            20
        );
        assert_eq!(
            segs.iter()
                .filter(|s| s.kind == SegmentKind::TypeII)
                .count(),
            22
        );
    }

    #[test]
    fn fig1_partition_faces() {
        let fs = fig1();
        let segs = inflection_segments(&fs);
        let cs = build_partition(&fs, &segs).unwrap();
        assert_eq!(cs.faces.len(), 14);
        // Face areas sum to the free-space area.
        let total: f64 = cs.faces.iter().map(|f| f.area).sum();
        assert_relative_eq!(total, fs.area(), max_relative = 1e-6);
        // All faces convex.
        for f in &cs.faces {
            assert!(
                crate::clip::ring_is_convex(&f.ring, 1e-9 * fs.bounding_diameter().powi(2)),
                "face {} not convex: {:?}",
                f.id,
                f.ring
            );
        }
        // Labeled faces from the partition figure.
        let expect = |p: Point2, ids: &[Point2]| {
            let f = cs
                .faces
                .iter()
                .find(|f| f.contains(p, 1e-9))
                .unwrap_or_else(|| panic!("no face contains {p:?}"));
            let mut want: Vec<usize> = ids.iter().map(|q| vid_at(&fs, *q)).collect();
            want.sort_unstable();
            assert_eq!(f.anchor_set, want, "face at {p:?}");
        };
        expect(
            Point2::new(5.0, 0.0),
            &[Point2::new(3.0, 1.0), Point2::new(7.0, 1.0)],
        );
        expect(
            Point2::new(2.0, 2.0),
            &[
                Point2::new(3.0, 1.0),
                Point2::new(3.0, 3.0),
                Point2::new(1.0, 1.0),
            ],
        );
        expect(
            Point2::new(2.0, 4.0),
            &[
                Point2::new(3.0, 1.0),
                Point2::new(7.0, 3.0),
                Point2::new(1.0, 1.0),
            ],
        );
        expect(
            Point2::new(8.0, 2.0),
            &[
                Point2::new(7.0, 3.0),
                Point2::new(7.0, 1.0),
                Point2::new(9.0, 1.0),
            ],
        );
        expect(
            Point2::new(5.0, 3.75),
            &[Point2::new(3.0, 3.0), Point2::new(7.0, 3.0)],
        );
    }

    #[test]
    fn convex_environment_single_face() {
        let outer = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 3.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        let fs = FreeSpace::build(Environment::new(outer, vec![]).unwrap()).unwrap();
        let segs = inflection_segments(&fs);
        assert!(segs.is_empty());
        let cs = build_partition(&fs, &segs).unwrap();
        assert_eq!(cs.faces.len(), 1);
        assert!(cs.faces[0].anchor_set.is_empty());
        assert_relative_eq!(cs.faces[0].area, 12.0, max_relative = 1e-9);
    }

    #[test]
    fn locate_face_and_segments() {
        let fs = fig1();
        let segs = inflection_segments(&fs);
        let cs = build_partition(&fs, &segs).unwrap();
        // Face interior.
        match cs.locate(&fs, Point2::new(5.0, 0.5)).unwrap() {
            Located::Face(id) => {
                let want: Vec<usize> = {
                    let mut v = vec![
                        vid_at(&fs, Point2::new(3.0, 1.0)),
                        vid_at(&fs, Point2::new(7.0, 1.0)),
                    ];
                    v.sort_unstable();
                    v
                };
                assert_eq!(cs.face(id).anchor_set, want);
            }
            other => panic!("expected face, got {other:?}"),
        }
        // (3, 0) lies on both a Type I segment (the quadrant boundary of
        // o4, extended from o1) and a Type II segment of the pair (o1, o4).
        match cs.locate(&fs, Point2::new(3.0, 0.0)).unwrap() {
            Located::OnSegments(ids) => {
                let o1 = vid_at(&fs, Point2::new(3.0, 1.0));
                let o4 = vid_at(&fs, Point2::new(3.0, 3.0));
                let kinds: Vec<(SegmentKind, Generators)> = ids
                    .iter()
                    .map(|&i| (cs.segments[i].kind, cs.segments[i].generators))
                    .collect();
                assert!(kinds.contains(&(SegmentKind::TypeI, Generators::Reflex(o4))));
                assert!(kinds.contains(&(SegmentKind::TypeII, Generators::Pair(o1, o4))));
            }
            other => panic!("expected on-segment, got {other:?}"),
        }
        // Face representative maps back to its own face.
        for f in &cs.faces {
            match cs.locate(&fs, f.rep).unwrap() {
                Located::Face(id) => assert_eq!(id, f.id),
                other => panic!("rep of face {} mislocated: {other:?}", f.id),
            }
        }
        assert!(cs.locate(&fs, Point2::new(5.0, 2.0)).is_err());
    }

    #[test]
    fn anchor_constancy_within_faces() {
        use rand::{Rng, SeedableRng};
        let fs = fig1();
        let segs = inflection_segments(&fs);
        let cs = build_partition(&fs, &segs).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for f in &cs.faces {
            let (lo, hi) = {
                let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in &f.ring {
                    lo.x = lo.x.min(p.x);
                    lo.y = lo.y.min(p.y);
                    hi.x = hi.x.max(p.x);
                    hi.y = hi.y.max(p.y);
                }
                (lo, hi)
            };
            let mut checked = 0;
            let mut tries = 0;
            while checked < 10 && tries < 20_000 {
                tries += 1;
                let p = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
                let n = f.ring.len();
                let deep = (0..n).all(|i| {
                    orient2d(f.ring[i], f.ring[(i + 1) % n], p) > 1e-4 * fs.bounding_diameter()
                });
                if !deep {
                    continue;
                }
                checked += 1;
                assert_eq!(
                    anchors(&fs, p).unwrap().ids(),
                    f.anchor_set,
                    "face {} at {:?}",
                    f.id,
                    p
                );
            }
            assert!(checked >= 5, "face {} too thin to sample", f.id);
        }
    }
}
