//! Polygon clipping and area utilities: Sutherland-Hodgman clipping against
//! convex windows, exact circle/polygon intersection areas via Green's
//! theorem, and triangulation-backed intersection areas for simple polygons.
//!
//! Clipping a concave subject can produce degenerate bridge edges along the
//! window boundary. Those bridges are traversed once in each direction, so
//! every signed-area computation here (shoelace and the per-edge circle
//! accumulation) remains exact.

use crate::geom::{orient2d, signed_area, Point2, Vec2};

/// All turns share one sign (within eps), no reversal spikes.
pub fn ring_is_convex(ring: &[Point2], eps: f64) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0_f64;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let c = ring[(i + 2) % n];
        let o = orient2d(a, b, c);
        if o.abs() <= eps {
            if (b - a).dot(c - b) < 0.0 {
                return false; // spike
            }
            continue;
        }
        if sign == 0.0 {
            sign = o.signum();
        } else if o.signum() != sign {
            return false;
        }
    }
    true
}

/// Clips `subject` against the half-plane on the left of the directed line
/// through `a` toward `b` (inclusive).
pub fn clip_halfplane(subject: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let mut out = Vec::with_capacity(subject.len() + 2);
    let n = subject.len();
    if n == 0 {
        return out;
    }
    let side = |p: Point2| orient2d(a, b, p);
    for i in 0..n {
        let cur = subject[i];
        let nxt = subject[(i + 1) % n];
        let sc = side(cur);
        let sn = side(nxt);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0) {
            let t = sc / (sc - sn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}

/// Sutherland-Hodgman clip of a simple `subject` against a convex `window`
/// given counter-clockwise. The result is area-exact for a counter-clockwise
/// subject even when the true intersection is disconnected.
pub fn clip_convex(subject: &[Point2], window: &[Point2]) -> Vec<Point2> {
    let mut cur = subject.to_vec();
    let m = window.len();
    for i in 0..m {
        if cur.is_empty() {
            break;
        }
        cur = clip_halfplane(&cur, window[i], window[(i + 1) % m]);
    }
    cur
}

/// Area of `subject_ccw` ∩ `window_ccw` for a simple CCW subject and a
/// convex CCW window.
pub fn intersection_area_convex(subject_ccw: &[Point2], window_ccw: &[Point2]) -> f64 {
    let clipped = clip_convex(subject_ccw, window_ccw);
    if clipped.len() < 3 {
        return 0.0;
    }
    signed_area(&clipped).max(0.0)
}

/// Fan triangles of a polygon that is star-shaped with respect to `center`.
/// Returned triangles are CCW; near-degenerate fans are skipped.
pub fn star_fan(center: Point2, ring_ccw: &[Point2], eps: f64) -> Vec<[Point2; 3]> {
    let n = ring_ccw.len();
    let mut tris = Vec::with_capacity(n);
    for i in 0..n {
        let a = ring_ccw[i];
        let b = ring_ccw[(i + 1) % n];
        if orient2d(center, a, b) > eps {
            tris.push([center, a, b]);
        }
    }
    tris
}

fn ring_ccw(ring: &[Point2]) -> Vec<Point2> {
    if signed_area(ring) < 0.0 {
        let mut r = ring.to_vec();
        r.reverse();
        r
    } else {
        ring.to_vec()
    }
}

/// Ear-clipping triangulation of a simple polygon (any orientation).
pub fn triangulate(ring: &[Point2], eps: f64) -> Vec<[Point2; 3]> {
    let mut pts = ring_ccw(ring);
    // Drop exactly duplicated consecutive points.
    pts.dedup_by(|a, b| a.dist(*b) <= eps);
    if pts.len() >= 2 && pts[0].dist(pts[pts.len() - 1]) <= eps {
        pts.pop();
    }
    let mut tris = Vec::new();
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let ia = idx[(k + m - 1) % m];
            let ib = idx[k];
            let ic = idx[(k + 1) % m];
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            let o = orient2d(a, b, c);
            if o <= eps {
                continue; // reflex or collinear corner
            }
            // No other vertex strictly inside the candidate ear.
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = pts[j];
                orient2d(a, b, p) >= -eps
                    && orient2d(b, c, p) >= -eps
                    && orient2d(c, a, p) >= -eps
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // Numerically stuck (collinear runs); drop the flattest corner.
            let m = idx.len();
            let mut best = (f64::INFINITY, 0usize);
            for k in 0..m {
                let a = pts[idx[(k + m - 1) % m]];
                let b = pts[idx[k]];
                let c = pts[idx[(k + 1) % m]];
                let o = orient2d(a, b, c).abs();
                if o < best.0 {
                    best = (o, k);
                }
            }
            idx.remove(best.1);
        }
        guard += 1;
        if guard > 4 * pts.len() * pts.len() + 16 {
            break;
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (pts[idx[0]], pts[idx[1]], pts[idx[2]]);
        if orient2d(a, b, c) > eps {
            tris.push([a, b, c]);
        }
    }
    tris
}

/// Area of the intersection of two simple polygons (any orientations).
pub fn intersection_area(a: &[Point2], b: &[Point2], eps: f64) -> f64 {
    let b_ccw = ring_ccw(b);
    let tris = if ring_is_convex(a, eps) {
        star_fan_from_convex(a, eps)
    } else {
        triangulate(a, eps)
    };
    tris.iter()
        .map(|t| intersection_area_convex(&b_ccw, t))
        .sum()
}

fn star_fan_from_convex(ring: &[Point2], eps: f64) -> Vec<[Point2; 3]> {
    let r = ring_ccw(ring);
    let n = r.len();
    let mut tris = Vec::new();
    for i in 1..n - 1 {
        if orient2d(r[0], r[i], r[i + 1]) > eps {
            tris.push([r[0], r[i], r[i + 1]]);
        }
    }
    tris
}

/// Area of the symmetric difference of two simple polygons.
pub fn symmetric_difference_area(a: &[Point2], b: &[Point2], eps: f64) -> f64 {
    let aa = signed_area(a).abs();
    let ab = signed_area(b).abs();
    let inter = intersection_area(a, b, eps);
    (aa + ab - 2.0 * inter).max(0.0)
}

/// Signed area of `ring` ∩ disk(center, r) computed edge by edge via
/// Green's theorem: chord pieces contribute triangle terms, pieces outside
/// the disk contribute circular-sector terms. The sign follows the ring
/// orientation; contributions are antisymmetric under edge reversal.
pub fn circle_ring_area(ring: &[Point2], center: Point2, r: f64) -> f64 {
    let n = ring.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let a = ring[i] - center;
        let b = ring[(i + 1) % n] - center;
        total += circle_edge_term(a, b, r);
    }
    total
}

fn circle_edge_term(a: Vec2, b: Vec2, r: f64) -> f64 {
    let d = b + (-a);
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return 0.0;
    }
    // |a + t d|^2 = r^2
    let pa = d.norm_sq();
    let pb = 2.0 * a.dot(d);
    let pc = a.norm_sq() - r * r;
    let disc = pb * pb - 4.0 * pa * pc;
    let mut cuts = vec![0.0_f64, 1.0];
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-pb - sq) / (2.0 * pa), (-pb + sq) / (2.0 * pa)] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let p = |t: f64| a + d * t;
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v - u <= 0.0 {
            continue;
        }
        let pu = p(u);
        let pv = p(v);
        let mid = p(0.5 * (u + v));
        // Strictly inside; a tangency (midpoint on the circle) means the
        // boundary follows the arc.
        if mid.norm_sq() < r * r * (1.0 - 1e-12) {
            acc += 0.5 * pu.cross(pv);
        } else {
            // Boundary follows the arc between the same endpoints; a chord
            // subtends less than pi so the wrapped angle is unambiguous.
            let dth = wrap_pi(pv.angle() - pu.angle());
            acc += 0.5 * r * r * dth;
        }
    }
    acc
}

fn wrap_pi(a: f64) -> f64 {
    let mut x = a;
    while x > std::f64::consts::PI {
        x -= 2.0 * std::f64::consts::PI;
    }
    while x < -std::f64::consts::PI {
        x += 2.0 * std::f64::consts::PI;
    }
    x
}

/// Regular polygon approximating a disk, counter-clockwise.
pub fn disk_ngon(center: Point2, r: f64, n: usize) -> Vec<Point2> {
    (0..n)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
            Point2::new(center.x + r * th.cos(), center.y + r * th.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn square(c: Point2, half: f64) -> Vec<Point2> {
        vec![
            Point2::new(c.x - half, c.y - half),
            Point2::new(c.x + half, c.y - half),
            Point2::new(c.x + half, c.y + half),
            Point2::new(c.x - half, c.y + half),
        ]
    }

    #[test]
    fn clip_square_overlap() {
        let a = square(Point2::new(0.0, 0.0), 1.0);
        let b = square(Point2::new(1.0, 1.0), 1.0);
        assert_relative_eq!(intersection_area_convex(&a, &b), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn clip_disjoint() {
        let a = square(Point2::new(0.0, 0.0), 1.0);
        let b = square(Point2::new(5.0, 0.0), 1.0);
        assert_relative_eq!(intersection_area_convex(&a, &b), 0.0);
    }

    #[test]
    fn concave_subject_area_is_exact() {
        // U-shape clipped by a band that splits it into two pieces.
        let u = vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ];
        let band = vec![
            Point2::new(-1.0, 2.0),
            Point2::new(4.0, 2.0),
            Point2::new(4.0, 4.0),
            Point2::new(-1.0, 4.0),
        ];
        // Two 1x1 squares above y=2.
        assert_relative_eq!(intersection_area_convex(&u, &band), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn triangulation_covers_area() {
        let u = vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ];
        let total: f64 = triangulate(&u, 1e-12)
            .iter()
            .map(|t| signed_area(t.as_slice()))
            .sum();
        assert_relative_eq!(total, signed_area(&u), epsilon = 1e-9);
    }

    #[test]
    fn symdiff_basics() {
        let a = square(Point2::new(0.0, 0.0), 1.0);
        assert_relative_eq!(symmetric_difference_area(&a, &a, 1e-12), 0.0);
        let b = square(Point2::new(10.0, 0.0), 1.0);
        assert_relative_eq!(symmetric_difference_area(&a, &b, 1e-12), 8.0);
    }

    #[test]
    fn circle_area_of_big_square() {
        let sq = square(Point2::new(0.0, 0.0), 10.0);
        assert_relative_eq!(
            circle_ring_area(&sq, Point2::new(0.0, 0.0), 1.0),
            PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn circle_area_of_contained_square() {
        let sq = square(Point2::new(0.0, 0.0), 1.0);
        assert_relative_eq!(
            circle_ring_area(&sq, Point2::new(0.0, 0.0), 10.0),
            4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn circle_area_half_plane_limit() {
        // Disk centered on a square edge: half the disk falls inside.
        let sq = square(Point2::new(0.0, 0.0), 10.0);
        assert_relative_eq!(
            circle_ring_area(&sq, Point2::new(10.0, 0.0), 1.0),
            PI / 2.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn circle_area_orientation_sign() {
        let sq = square(Point2::new(0.0, 0.0), 10.0);
        let mut cw = sq.clone();
        cw.reverse();
        assert_relative_eq!(
            circle_ring_area(&cw, Point2::new(0.0, 0.0), 1.0),
            -PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn disk_ngon_area_converges() {
        let d = disk_ngon(Point2::new(2.0, 3.0), 1.5, 512);
        let exact = PI * 1.5 * 1.5;
        assert!((signed_area(&d) - exact).abs() / exact < 1e-4);
    }
}
