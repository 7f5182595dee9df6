//! Robust 2D polygon primitives, free-space construction, reflex-vertex
//! analysis, and projected/rotated rays.
//!
//! Conventions: the outer ring of an environment is stored negatively
//! oriented (clockwise) and hole rings positively oriented
//! (counter-clockwise), so that for every ring the predecessor/successor
//! order matches the angle measured over the free space. All tolerances
//! scale with the bounding diameter of the environment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unit-vector normalization tolerance.
pub const EPS_UNIT: f64 = 1e-12;
/// Relative on-boundary / collinearity tolerance (scaled by diameter).
pub const EPS_GEOM_REL: f64 = 1e-9;
/// Angular nudge used to detect grazing ray contacts.
pub const EPS_ANGLE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("hole {0} is not strictly inside the outer polygon")]
    HoleOutsideOuter(usize),
    #[error("holes {0} and {1} overlap")]
    OverlappingHoles(usize, usize),
    #[error("degenerate ray: vertex coincides with observer")]
    DegenerateRay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: Point2) -> f64 {
        (*self - other).norm()
    }
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(&self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(&self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotate clockwise by `theta` (the paper's rotation convention for
    /// projected rays).
    pub fn rotated_cw(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(self.x * c + self.y * s, -self.x * s + self.y * c)
    }

    pub fn normalized(&self) -> Option<UnitVector2> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(UnitVector2 {
            dx: self.x / n,
            dy: self.y / n,
        })
    }
}

impl std::ops::Sub for Point2 {
    type Output = Vec2;
    fn sub(self, o: Point2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Add<Vec2> for Point2 {
    type Output = Point2;
    fn add(self, v: Vec2) -> Point2 {
        Point2::new(self.x + v.x, self.y + v.y)
    }
}

impl std::ops::Sub<Vec2> for Point2 {
    type Output = Point2;
    fn sub(self, v: Vec2) -> Point2 {
        Point2::new(self.x - v.x, self.y - v.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A direction vector with unit norm (within [`EPS_UNIT`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector2 {
    dx: f64,
    dy: f64,
}

impl UnitVector2 {
    pub fn new(dx: f64, dy: f64) -> Option<Self> {
        let n2 = dx * dx + dy * dy;
        if !(n2.is_finite()) || (n2 - 1.0).abs() > EPS_UNIT {
            return None;
        }
        Some(Self { dx, dy })
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { dx: c, dy: s }
    }

    pub fn x(&self) -> f64 {
        self.dx
    }

    pub fn y(&self) -> f64 {
        self.dy
    }

    pub fn as_vec(&self) -> Vec2 {
        Vec2::new(self.dx, self.dy)
    }

    pub fn angle(&self) -> f64 {
        self.dy.atan2(self.dx)
    }

    pub fn rotated_cw(&self, theta: f64) -> UnitVector2 {
        let v = self.as_vec().rotated_cw(theta);
        UnitVector2 { dx: v.x, dy: v.y }
    }
}

/// Twice the signed area of the triangle (a, b, c). Positive when the
/// triangle winds counter-clockwise.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    s / 2.0
}

/// Squared distance from `p` to the closed segment [a, b].
pub fn dist_sq_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sq();
    if l2 == 0.0 {
        return (p - a).norm_sq();
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm_sq()
}

pub fn dist_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    dist_sq_point_segment(p, a, b).sqrt()
}

/// Even-odd test against a ring, ignoring boundary subtleties (callers
/// resolve on-boundary points separately with a tolerance band).
fn point_in_ring_parity(ring: &[Point2], p: Point2) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            let xi = a.x + t * (b.x - a.x);
            if p.x < xi {
                inside = !inside;
            }
        }
    }
    inside
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Ccw,
    Cw,
}

/// A strictly simple polygon with a recorded orientation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
    orientation: Orientation,
}

impl Polygon {
    /// Builds a polygon, checking strict simplicity: no repeated vertices,
    /// edges meet only at shared endpoints, nonzero area.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeomError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeomError::InvalidPolygon(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidPolygon("non-finite coordinate".into()));
        }
        let scale = vertices
            .iter()
            .flat_map(|v| [v.x.abs(), v.y.abs()])
            .fold(1.0_f64, f64::max);
        let eps = 1e-12 * scale;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            if a.dist(b) <= eps {
                return Err(GeomError::InvalidPolygon(format!(
                    "zero-length edge at vertex {i}"
                )));
            }
        }
        // Pairwise edge checks: non-adjacent edges must be disjoint,
        // adjacent edges share only their common endpoint.
        for i in 0..n {
            let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Shared endpoint allowed; a reversal (spike) is not.
                    let shared = if j == i + 1 { a2 } else { a1 };
                    let (t1, t2) = if j == i + 1 { (a1, b2) } else { (b1, a2) };
                    if orient2d(t1, shared, t2).abs() <= eps * t1.dist(t2).max(1.0)
                        && (t1 - shared).dot(t2 - shared) > 0.0
                    {
                        return Err(GeomError::InvalidPolygon(format!(
                            "spike at vertex between edges {i} and {j}"
                        )));
                    }
                    continue;
                }
                if segments_intersect_closed(a1, a2, b1, b2, eps) {
                    return Err(GeomError::InvalidPolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        let area2 = signed_area(&vertices);
        if area2.abs() <= eps * scale {
            return Err(GeomError::InvalidPolygon("zero signed area".into()));
        }
        let orientation = if area2 > 0.0 {
            Orientation::Ccw
        } else {
            Orientation::Cw
        };
        Ok(Self {
            vertices,
            orientation,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Returns the same polygon with the opposite vertex order.
    pub fn reversed(&self) -> Polygon {
        let mut v = self.vertices.clone();
        v.reverse();
        Polygon {
            vertices: v,
            orientation: match self.orientation {
                Orientation::Ccw => Orientation::Cw,
                Orientation::Cw => Orientation::Ccw,
            },
        }
    }

    pub fn with_orientation(&self, o: Orientation) -> Polygon {
        if self.orientation == o {
            self.clone()
        } else {
            self.reversed()
        }
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Even-odd containment; points within `eps` of the boundary count as
    /// contained.
    pub fn contains(&self, p: Point2, eps: f64) -> bool {
        if self.on_boundary(p, eps) {
            return true;
        }
        point_in_ring_parity(&self.vertices, p)
    }

    pub fn contains_strict(&self, p: Point2, eps: f64) -> bool {
        !self.on_boundary(p, eps) && point_in_ring_parity(&self.vertices, p)
    }

    pub fn on_boundary(&self, p: Point2, eps: f64) -> bool {
        let n = self.vertices.len();
        (0..n).any(|i| {
            dist_sq_point_segment(p, self.vertices[i], self.vertices[(i + 1) % n]) <= eps * eps
        })
    }

    pub fn is_convex(&self, eps: f64) -> bool {
        crate::clip::ring_is_convex(&self.vertices, eps)
    }
}

/// Closed-segment intersection test used by the simplicity check.
fn segments_intersect_closed(a1: Point2, a2: Point2, b1: Point2, b2: Point2, eps: f64) -> bool {
    let d1 = orient2d(b1, b2, a1);
    let d2 = orient2d(b1, b2, a2);
    let d3 = orient2d(a1, a2, b1);
    let d4 = orient2d(a1, a2, b2);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    // Touching or collinear contacts.
    let e2 = eps * eps;
    dist_sq_point_segment(a1, b1, b2) <= e2
        || dist_sq_point_segment(a2, b1, b2) <= e2
        || dist_sq_point_segment(b1, a1, a2) <= e2
        || dist_sq_point_segment(b2, a1, a2) <= e2
}

/// The environment Q together with its obstacles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Environment {
    pub outer: Polygon,
    pub holes: Vec<Polygon>,
}

impl Environment {
    pub fn new(outer: Polygon, holes: Vec<Polygon>) -> Result<Self, GeomError> {
        let scale = {
            let (lo, hi) = outer.bbox();
            (hi - lo).norm().max(1e-300)
        };
        let eps = EPS_GEOM_REL * scale;
        for (i, h) in holes.iter().enumerate() {
            for v in h.vertices() {
                if !outer.contains_strict(*v, eps) {
                    return Err(GeomError::HoleOutsideOuter(i));
                }
            }
            // Edge crossings against the outer ring would also violate
            // strict containment.
            let on = outer.vertices();
            let no = on.len();
            let nh = h.len();
            for a in 0..nh {
                for b in 0..no {
                    if segments_intersect_closed(
                        h.vertices()[a],
                        h.vertices()[(a + 1) % nh],
                        on[b],
                        on[(b + 1) % no],
                        eps,
                    ) {
                        return Err(GeomError::HoleOutsideOuter(i));
                    }
                }
            }
        }
        for i in 0..holes.len() {
            for j in (i + 1)..holes.len() {
                let (hi_, hj) = (&holes[i], &holes[j]);
                let any_cross = (0..hi_.len()).any(|a| {
                    (0..hj.len()).any(|b| {
                        segments_intersect_closed(
                            hi_.vertices()[a],
                            hi_.vertices()[(a + 1) % hi_.len()],
                            hj.vertices()[b],
                            hj.vertices()[(b + 1) % hj.len()],
                            eps,
                        )
                    })
                });
                let nested = hi_.contains_strict(hj.vertices()[0], eps)
                    || hj.contains_strict(hi_.vertices()[0], eps);
                if any_cross || nested {
                    return Err(GeomError::OverlappingHoles(i, j));
                }
            }
        }
        Ok(Self { outer, holes })
    }

    /// Area of the free space: outer area minus hole areas.
    pub fn free_area(&self) -> f64 {
        self.outer.area() - self.holes.iter().map(Polygon::area).sum::<f64>()
    }
}

/// Which ring a vertex or edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingId {
    Outer,
    Hole(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRef {
    pub ring: RingId,
    pub pos: usize,
}

/// Quadrants around a reflex vertex spanned by its incident edge
/// directions. M1 and M3 are open, M2 and M4 closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    M1,
    M2,
    M3,
    M4,
}

#[derive(Debug, Clone)]
pub struct ReflexVertexInfo {
    /// Index into `FreeSpace::all_vertices`.
    pub vertex_id: usize,
    pub vertex: Point2,
    /// Unit vector toward the predecessor vertex in the stored ring order.
    pub e1_hat: UnitVector2,
    /// Unit vector toward the successor vertex.
    pub e2_hat: UnitVector2,
}

/// Ray from a vertex pointing away from the observer, clipped at the first
/// boundary hit whose approach lies in the free space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectedRay {
    pub origin: Point2,
    pub direction: UnitVector2,
    /// `f64::INFINITY` when no boundary hit with a free approach exists.
    pub length: f64,
    pub endpoint: Option<Point2>,
    /// Set when the nudged casts disagree with the exact cast, i.e. the ray
    /// touches a vertex tangentially or runs along the boundary.
    pub grazing: bool,
}

impl ProjectedRay {
    pub fn is_finite(&self) -> bool {
        self.length.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub a: Point2,
    pub b: Point2,
    pub ring: RingId,
    /// Position of `a` within its ring.
    pub pos: usize,
}

/// Immutable free-space structure: normalized rings, flattened vertex list,
/// reflex-vertex info, and the derived tolerances.
#[derive(Debug, Clone)]
pub struct FreeSpace {
    env: Environment,
    all_vertices: Vec<(VertexRef, Point2)>,
    reflex: Vec<ReflexVertexInfo>,
    edges: Vec<Edge>,
    bounding_diameter: f64,
    eps_geom: f64,
    free_area: f64,
}

pub fn build_free_space(env: Environment) -> Result<FreeSpace, GeomError> {
    FreeSpace::build(env)
}

impl FreeSpace {
    /// Normalizes orientations (outer clockwise, holes counter-clockwise, the
    /// convention under which ring order matches the angle over free space)
    /// and classifies reflex vertices.
    pub fn build(env: Environment) -> Result<Self, GeomError> {
        let outer = env.outer.with_orientation(Orientation::Cw);
        let holes: Vec<Polygon> = env
            .holes
            .iter()
            .map(|h| h.with_orientation(Orientation::Ccw))
            .collect();
        let env = Environment { outer, holes };

        let mut bounding_diameter = 0.0_f64;
        let ov = env.outer.vertices();
        for i in 0..ov.len() {
            for j in (i + 1)..ov.len() {
                bounding_diameter = bounding_diameter.max(ov[i].dist(ov[j]));
            }
        }
        let eps_geom = EPS_GEOM_REL * bounding_diameter;

        let mut all_vertices = Vec::new();
        let mut edges = Vec::new();
        let mut rings: Vec<(RingId, &Polygon)> = vec![(RingId::Outer, &env.outer)];
        for (i, h) in env.holes.iter().enumerate() {
            rings.push((RingId::Hole(i), h));
        }
        for (ring_id, poly) in &rings {
            let vs = poly.vertices();
            for (pos, v) in vs.iter().enumerate() {
                all_vertices.push((
                    VertexRef {
                        ring: *ring_id,
                        pos,
                    },
                    *v,
                ));
                edges.push(Edge {
                    a: *v,
                    b: vs[(pos + 1) % vs.len()],
                    ring: *ring_id,
                    pos,
                });
            }
        }

        let mut reflex = Vec::new();
        for (vid, (vref, v)) in all_vertices.iter().enumerate() {
            let poly = match vref.ring {
                RingId::Outer => &env.outer,
                RingId::Hole(i) => &env.holes[i],
            };
            let n = poly.len();
            let prev = poly.vertices()[(vref.pos + n - 1) % n];
            let next = poly.vertices()[(vref.pos + 1) % n];
            let e1 = (prev - *v).normalized().expect("nonzero edge");
            let e2 = (next - *v).normalized().expect("nonzero edge");
            // Angle over the free space exceeds pi iff the unit edge
            // vectors wind clockwise.
            if e1.as_vec().cross(e2.as_vec()) < -EPS_UNIT {
                reflex.push(ReflexVertexInfo {
                    vertex_id: vid,
                    vertex: *v,
                    e1_hat: e1,
                    e2_hat: e2,
                });
            }
        }

        let free_area = env.free_area();
        Ok(Self {
            env,
            all_vertices,
            reflex,
            edges,
            bounding_diameter,
            eps_geom,
            free_area,
        })
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn vertices(&self) -> &[(VertexRef, Point2)] {
        &self.all_vertices
    }

    pub fn vertex(&self, id: usize) -> Point2 {
        self.all_vertices[id].1
    }

    pub fn reflex_vertices(&self) -> &[ReflexVertexInfo] {
        &self.reflex
    }

    pub fn reflex_info(&self, vertex_id: usize) -> Option<&ReflexVertexInfo> {
        self.reflex.iter().find(|r| r.vertex_id == vertex_id)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn bounding_diameter(&self) -> f64 {
        self.bounding_diameter
    }

    pub fn eps_geom(&self) -> f64 {
        self.eps_geom
    }

    pub fn area(&self) -> f64 {
        self.free_area
    }

    pub fn min_reflex_distance(&self, p: Point2) -> f64 {
        self.reflex
            .iter()
            .map(|r| r.vertex.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Ternary point classification with a boundary band of width eps_geom.
    pub fn classify(&self, p: Point2) -> Location {
        if !p.is_finite() {
            return Location::Exterior;
        }
        let e2 = self.eps_geom * self.eps_geom;
        for edge in &self.edges {
            if dist_sq_point_segment(p, edge.a, edge.b) <= e2 {
                return Location::Boundary;
            }
        }
        if !point_in_ring_parity(self.env.outer.vertices(), p) {
            return Location::Exterior;
        }
        for h in &self.env.holes {
            if point_in_ring_parity(h.vertices(), p) {
                return Location::Exterior;
            }
        }
        Location::Interior
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.classify(p) != Location::Exterior
    }

    /// True iff the closed segment [a, b] stays inside the free space
    /// (touching the boundary is allowed).
    pub fn segment_in_free_space(&self, a: Point2, b: Point2) -> bool {
        if !a.is_finite() || !b.is_finite() {
            return false;
        }
        if self.classify(a) == Location::Exterior || self.classify(b) == Location::Exterior {
            return false;
        }
        let ab = b - a;
        let len = ab.norm();
        if len <= self.eps_geom {
            return true;
        }
        let eps_orient = self.eps_geom * len.max(1.0);
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        for edge in &self.edges {
            let d1 = orient2d(a, b, edge.a);
            let d2 = orient2d(a, b, edge.b);
            let d3 = orient2d(edge.a, edge.b, a);
            let d4 = orient2d(edge.a, edge.b, b);
            let proper = ((d1 > eps_orient && d2 < -eps_orient)
                || (d1 < -eps_orient && d2 > eps_orient))
                && ((d3 > eps_orient && d4 < -eps_orient) || (d3 < -eps_orient && d4 > eps_orient));
            if proper {
                // A transversal crossing of a boundary edge leaves the
                // free space on one side.
                return false;
            }
            // Touching or collinear contact: record split parameters.
            let e2 = self.eps_geom * self.eps_geom;
            if dist_sq_point_segment(edge.a, a, b) <= e2 {
                cuts.push(((edge.a - a).dot(ab) / (len * len)).clamp(0.0, 1.0));
            }
            if dist_sq_point_segment(edge.b, a, b) <= e2 {
                cuts.push(((edge.b - a).dot(ab) / (len * len)).clamp(0.0, 1.0));
            }
            if dist_sq_point_segment(a, edge.a, edge.b) <= e2
                || dist_sq_point_segment(b, edge.a, edge.b) <= e2
            {
                // Segment endpoint touches this edge; endpoints are
                // already cut points.
            }
            // Non-collinear single-point touch in the interior of both.
            if !proper
                && d1.abs() > eps_orient
                && d2.abs() > eps_orient
                && ((d3.abs() <= eps_orient) ^ (d4.abs() <= eps_orient))
            {
                // One endpoint of [a,b] on the edge line: handled above.
            } else if !proper && (d1.abs() <= eps_orient) ^ (d2.abs() <= eps_orient) {
                // Edge endpoint on [a,b]: already recorded.
            }
        }
        cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
        cuts.dedup_by(|u, v| (*u - *v).abs() < 1e-12);
        for w in cuts.windows(2) {
            let tm = 0.5 * (w[0] + w[1]);
            if (w[1] - w[0]) * len <= 2.0 * self.eps_geom {
                continue;
            }
            if self.classify(a + ab * tm) == Location::Exterior {
                return false;
            }
        }
        true
    }

    /// First boundary hit of the ray `origin + t * dir` with `t > eps`.
    /// Edges collinear with the ray are skipped.
    pub fn first_hit(&self, origin: Point2, dir: UnitVector2) -> Option<(f64, usize)> {
        let d = dir.as_vec();
        let mut best: Option<(f64, usize)> = None;
        for (idx, edge) in self.edges.iter().enumerate() {
            let e = edge.b - edge.a;
            let denom = d.cross(e);
            if denom.abs() <= 1e-15 * e.norm() {
                continue;
            }
            let ao = edge.a - origin;
            let t = ao.cross(e) / denom;
            let s = ao.cross(d) / denom;
            let s_eps = self.eps_geom / e.norm();
            if t > self.eps_geom && (-s_eps..=1.0 + s_eps).contains(&s) {
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, idx));
                }
            }
        }
        best
    }

    /// Projected ray from `v` pointing away from `x`, clipped at the first
    /// boundary hit whose approach segment lies in the free space.
    pub fn project_ray(&self, v: Point2, x: Point2) -> Result<ProjectedRay, GeomError> {
        self.project_rotated_ray(v, x, 0.0)
    }

    /// As `project_ray` with the direction rotated clockwise by `theta`.
    pub fn project_rotated_ray(
        &self,
        v: Point2,
        x: Point2,
        theta: f64,
    ) -> Result<ProjectedRay, GeomError> {
        let raw = v - x;
        if raw.norm() <= self.eps_geom {
            return Err(GeomError::DegenerateRay);
        }
        let dir = raw
            .rotated_cw(theta)
            .normalized()
            .ok_or(GeomError::DegenerateRay)?;
        let exact = self.first_hit(v, dir);
        let lo = self.first_hit(v, dir.rotated_cw(-EPS_ANGLE));
        let hi = self.first_hit(v, dir.rotated_cw(EPS_ANGLE));
        let tol = 1e-6 * self.bounding_diameter;
        let agree = |a: &Option<(f64, usize)>, b: &Option<(f64, usize)>| match (a, b) {
            (Some((ta, _)), Some((tb, _))) => (ta - tb).abs() <= tol,
            (None, None) => true,
            _ => false,
        };
        let grazing = !(agree(&exact, &lo) && agree(&exact, &hi));
        match exact {
            Some((t, _)) => {
                let endpoint = v + dir.as_vec() * t;
                // Approach must lie in free space, otherwise the ray left
                // the free space immediately and its length is infinite.
                if self.segment_in_free_space(v, endpoint) {
                    Ok(ProjectedRay {
                        origin: v,
                        direction: dir,
                        length: t,
                        endpoint: Some(endpoint),
                        grazing,
                    })
                } else {
                    Ok(ProjectedRay {
                        origin: v,
                        direction: dir,
                        length: f64::INFINITY,
                        endpoint: None,
                        grazing,
                    })
                }
            }
            None => Ok(ProjectedRay {
                origin: v,
                direction: dir,
                length: f64::INFINITY,
                endpoint: None,
                grazing,
            }),
        }
    }

    /// Uniform discretization of the ray bundle over [theta1, theta2].
    pub fn ray_bundle(
        &self,
        v: Point2,
        x: Point2,
        theta1: f64,
        theta2: f64,
        n: usize,
    ) -> Result<Vec<ProjectedRay>, GeomError> {
        assert!(theta1 <= theta2, "theta1 must not exceed theta2");
        assert!(n >= 2, "need at least two rays");
        (0..n)
            .map(|i| {
                let t = theta1 + (theta2 - theta1) * (i as f64) / ((n - 1) as f64);
                self.project_rotated_ray(v, x, t)
            })
            .collect()
    }

    /// True iff x + t*nu stays in the free space for all t in (0, h].
    pub fn direction_feasible(&self, x: Point2, nu: UnitVector2, h: f64) -> bool {
        self.segment_in_free_space(x, x + nu.as_vec() * h)
    }

    /// Quadrant of `x` around a reflex vertex. `None` when x coincides with
    /// the vertex. M2 and M4 are closed, so boundary directions resolve to
    /// them.
    pub fn quadrant(&self, info: &ReflexVertexInfo, x: Point2) -> Option<Quadrant> {
        let d = x - info.vertex;
        if d.norm() <= self.eps_geom {
            return None;
        }
        let u = info.e1_hat.as_vec();
        let w = info.e2_hat.as_vec();
        let c = u.cross(w); // strictly negative for reflex vertices
        let alpha = d.cross(w) / c;
        let beta = u.cross(d) / c;
        let tol = self.eps_geom;
        if alpha >= -tol && beta <= tol {
            Some(Quadrant::M2)
        } else if alpha <= tol && beta >= -tol {
            Some(Quadrant::M4)
        } else if alpha > 0.0 && beta > 0.0 {
            Some(Quadrant::M1)
        } else {
            Some(Quadrant::M3)
        }
    }
}
