//! The Norcent normalized descent/ascent algorithm over augmented
//! visibility metrics: projection machinery, diminishing stepsize
//! schedules, randomized escape below a shrinking gradient threshold, and
//! per-run diagnostics.
//!
//! Maximization runs descend on the negated objective with the same
//! machinery. Both augmented metrics reduce to the internal descent form
//! f(x) = s * base(proj(x)) + ||x - proj(x)|| with s = +1 (minimize) or
//! s = -1 (maximize).

use crate::critical::CriticalStructure;
use crate::geom::{dist_point_segment, FreeSpace, Point2, Polygon, UnitVector2, Vec2};
use crate::gradients::{dd_metric, fd_oracle, GradError, EPS_RV_REL};
use crate::metrics::{metric_v, metric_v_range, MetricConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NorcentError {
    #[error("start {0:?} outside D1 + B(a0)")]
    StartOutsideDomain(Point2),
    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sensing {
    Full,
    Range(f64),
}

/// Augmented objective: base metric composed with the projection onto the
/// agent domain plus the distance to it.
#[derive(Debug, Clone)]
pub struct AugmentedObjective {
    pub d1: Polygon,
    pub d2: Polygon,
    pub sensing: Sensing,
    pub mode: Mode,
}

impl AugmentedObjective {
    fn metric_config(&self) -> MetricConfig {
        match self.sensing {
            Sensing::Full => MetricConfig::full(self.d2.clone()),
            Sensing::Range(r) => MetricConfig::with_range(self.d2.clone(), r),
        }
    }

    fn base(&self, fs: &FreeSpace, x: Point2) -> Result<f64, NorcentError> {
        let cfg = self.metric_config();
        match self.sensing {
            Sensing::Full => metric_v(fs, &cfg, x),
            Sensing::Range(_) => metric_v_range(fs, &cfg, x),
        }
        .map_err(|e| NorcentError::Objective(e.to_string()))
    }

    /// The augmented metric in user orientation: V(proj(x)) + dist for
    /// minimization, V(proj(x)) - dist for maximization.
    pub fn augmented_value(&self, fs: &FreeSpace, x: Point2) -> Result<f64, NorcentError> {
        let (p, _) = project_to_domain(&self.d1, x);
        let base = self.base(fs, p)?;
        let dist = x.dist(p);
        Ok(match self.mode {
            Mode::Minimize => base + dist,
            Mode::Maximize => base - dist,
        })
    }

    /// Internal descent form: minimize mode returns the augmented metric,
    /// maximize mode its negation.
    pub fn descent_value(&self, fs: &FreeSpace, x: Point2) -> Result<f64, NorcentError> {
        let v = self.augmented_value(fs, x)?;
        Ok(match self.mode {
            Mode::Minimize => v,
            Mode::Maximize => -v,
        })
    }
}

/// Nearest point of the filled polygon `d1` (interior points project to
/// themselves). Ties within tolerance return the lexicographically smallest
/// candidate and report the multiplicity.
pub fn project_to_domain(d1: &Polygon, x: Point2) -> (Point2, usize) {
    let (lo, hi) = d1.bbox();
    let scale = (hi - lo).norm().max(x.dist(lo)).max(1.0);
    let eps = 1e-9 * scale;
    if d1.contains(x, eps) {
        return (x, 1);
    }
    let n = d1.len();
    let vs = d1.vertices();
    let mut candidates: Vec<(f64, Point2)> = Vec::new();
    for i in 0..n {
        let (a, b) = (vs[i], vs[(i + 1) % n]);
        let ab = b - a;
        let t = ((x - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
        let p = a + ab * t;
        candidates.push((x.dist(p), p));
    }
    let best = candidates
        .iter()
        .map(|(d, _)| *d)
        .fold(f64::INFINITY, f64::min);
    let mut ties: Vec<Point2> = candidates
        .into_iter()
        .filter(|(d, _)| *d <= best + eps)
        .map(|(_, p)| p)
        .collect();
    ties.sort_by(|p, q| (p.x, p.y).partial_cmp(&(q.x, q.y)).unwrap());
    ties.dedup_by(|p, q| p.dist(*q) <= eps);
    (ties[0], ties.len())
}

/// Distance from `x` to the filled polygon `d1` (zero inside).
pub fn dist_to_domain(d1: &Polygon, x: Point2) -> f64 {
    let (p, _) = project_to_domain(d1, x);
    x.dist(p)
}

/// Stepsize schedules and thresholds. The exponents satisfy the algorithm's
/// requirements: sum a_k = inf, sum a_k^2 < inf (p_a in (1/2, 1]); sum
/// b_k^2 = inf (p_b in (0, 1/2]); thresholds shrink to zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NorcentConfig {
    pub a0: f64,
    pub p_a: f64,
    pub b0: f64,
    pub p_b: f64,
    pub dth0: f64,
    pub p_th: f64,
    pub delta_tol: f64,
    pub max_iter: usize,
    pub patience: usize,
    pub seed: u64,
    pub fd_h: f64,
}

impl NorcentConfig {
    pub fn defaults(fs: &FreeSpace) -> Self {
        let diam = fs.bounding_diameter();
        Self {
            a0: 0.05 * diam,
            p_a: 0.75,
            b0: 0.02 * diam,
            p_b: 0.5,
            dth0: 1e-3 * diam,
            p_th: 0.25,
            delta_tol: 1e-10 * fs.area(),
            max_iter: 5000,
            patience: 10,
            seed: 0,
            fd_h: 1e-6 * diam,
        }
    }

    pub fn validate(&self) -> Result<(), NorcentError> {
        let ok = self.p_a > 0.5
            && self.p_a <= 1.0
            && self.p_b > 0.0
            && self.p_b <= 0.5
            && self.p_th > 0.0
            && self.a0 > 0.0
            && self.b0 > 0.0
            && self.dth0 > 0.0
            && self.delta_tol > 0.0
            && self.patience >= 1;
        if ok {
            Ok(())
        } else {
            Err(NorcentError::Objective("invalid stepsize schedule".into()))
        }
    }

    pub fn a_k(&self, k: usize) -> f64 {
        self.a0 / (1.0 + k as f64).powf(self.p_a)
    }

    pub fn b_k(&self, k: usize) -> f64 {
        self.b0 / (1.0 + k as f64).powf(self.p_b)
    }

    pub fn dth_k(&self, k: usize) -> f64 {
        self.dth0 / (1.0 + k as f64).powf(self.p_th)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Gradient,
    Random,
    Stop,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterateRow {
    pub k: usize,
    pub x: Point2,
    /// Augmented metric (user orientation) at x.
    pub value: f64,
    pub grad_norm: f64,
    pub step_kind: StepKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NorcentRun {
    pub iterates: Vec<IterateRow>,
    pub final_point: Point2,
    pub final_value: f64,
    pub converged: bool,
    pub seed_used: u64,
    /// Gradient evaluations rescued by a random eps_rv perturbation.
    pub perturbations: usize,
}

/// Line-5 numeric gradient of the internal descent objective: analytic
/// directional derivatives when the full-range path applies, one-sided
/// finite differences of the augmented value otherwise.
fn descent_gradient(
    fs: &FreeSpace,
    cs: &CriticalStructure,
    obj: &AugmentedObjective,
    cfg_metric: &MetricConfig,
    cfg: &NorcentConfig,
    x: Point2,
) -> Result<Vec2, GradError> {
    let sign = match obj.mode {
        Mode::Minimize => 1.0,
        Mode::Maximize => -1.0,
    };
    let h_probe = 10.0 * cfg.fd_h;
    let mut out = [0.0_f64; 2];
    let basis = [
        UnitVector2::new(1.0, 0.0).unwrap(),
        UnitVector2::new(0.0, 1.0).unwrap(),
    ];
    let fd_f = |p: Point2| {
        obj.descent_value(fs, p)
            .expect("augmented objective is total")
    };
    for (i, e) in basis.iter().enumerate() {
        let probe = x + e.as_vec() * h_probe;
        let analytic_applicable = matches!(obj.sensing, Sensing::Full)
            && fs.contains(x)
            && obj.d1.contains(x, fs.eps_geom())
            && obj.d1.contains(probe, fs.eps_geom())
            && fs.min_reflex_distance(x) >= EPS_RV_REL * fs.bounding_diameter();
        if analytic_applicable {
            match dd_metric(fs, cs, cfg_metric, x, *e) {
                Ok(dd) => {
                    out[i] = sign * dd.value;
                    continue;
                }
                Err(GradError::TooCloseToReflexVertex) => {
                    return Err(GradError::TooCloseToReflexVertex)
                }
                Err(_) => {}
            }
        }
        if fs.min_reflex_distance(x) < EPS_RV_REL * fs.bounding_diameter()
            && obj.d1.contains(x, fs.eps_geom())
        {
            return Err(GradError::TooCloseToReflexVertex);
        }
        out[i] = fd_oracle(&fd_f, x, *e, cfg.fd_h);
    }
    Ok(Vec2::new(out[0], out[1]))
}

/// One Norcent step from `x` at iteration `k`. Returns the next iterate,
/// the kind of step taken, the gradient norm, and the count of rescue
/// perturbations applied to the evaluation point.
pub fn norcent_step(
    fs: &FreeSpace,
    cs: &CriticalStructure,
    obj: &AugmentedObjective,
    cfg: &NorcentConfig,
    x: Point2,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (Point2, StepKind, f64, usize) {
    let cfg_metric = obj.metric_config();
    let mut eval_point = x;
    let mut perturbations = 0usize;
    let grad = loop {
        match descent_gradient(fs, cs, obj, &cfg_metric, cfg, eval_point) {
            Ok(g) => break g,
            Err(_) => {
                // Too close to a reflex vertex: nudge the evaluation point
                // by eps_rv in a random direction and retry.
                let ang = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let eps_rv = EPS_RV_REL * fs.bounding_diameter();
                eval_point = Point2::new(
                    eval_point.x + eps_rv * ang.cos(),
                    eval_point.y + eps_rv * ang.sin(),
                );
                perturbations += 1;
                if perturbations > 16 {
                    break Vec2::new(0.0, 0.0);
                }
            }
        }
    };
    let norm = grad.norm();
    let in_d1 = obj.d1.contains(x, 0.0) || obj.d1.on_boundary(x, 1e-12 * fs.bounding_diameter());
    if norm <= cfg.dth_k(k) && in_d1 {
        let ang = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let dir = Vec2::new(ang.cos(), ang.sin());
        (x + dir * (-cfg.b_k(k)), StepKind::Random, norm, perturbations)
    } else {
        let dir = if norm > 0.0 {
            grad * (1.0 / norm)
        } else {
            // Degenerate zero gradient outside D1; fall back to a random
            // unit direction but keep the gradient step length.
            let ang = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            Vec2::new(ang.cos(), ang.sin())
        };
        (
            x + dir * (-cfg.a_k(k)),
            StepKind::Gradient,
            norm,
            perturbations,
        )
    }
}

/// Full Norcent run: iterates until the value change stays below delta_tol
/// for `patience` consecutive gradient steps or until max_iter.
pub fn run_norcent(
    fs: &FreeSpace,
    cs: &CriticalStructure,
    obj: &AugmentedObjective,
    cfg: &NorcentConfig,
    x0: Point2,
) -> Result<NorcentRun, NorcentError> {
    cfg.validate()?;
    if dist_to_domain(&obj.d1, x0) >= cfg.a0 {
        return Err(NorcentError::StartOutsideDomain(x0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = x0;
    let mut rows: Vec<IterateRow> = Vec::new();
    let mut streak = 0usize;
    let mut perturbations = 0usize;
    let mut converged = false;
    let mut internal_old = obj.descent_value(fs, x)?;
    let mut k = 0usize;
    loop {
        let value = match obj.mode {
            Mode::Minimize => internal_old,
            Mode::Maximize => -internal_old,
        };
        if k >= cfg.max_iter {
            rows.push(IterateRow {
                k,
                x,
                value,
                grad_norm: 0.0,
                step_kind: StepKind::Stop,
            });
            break;
        }
        let (next, kind, grad_norm, pert) = norcent_step(fs, cs, obj, cfg, x, k, &mut rng);
        perturbations += pert;
        rows.push(IterateRow {
            k,
            x,
            value,
            grad_norm,
            step_kind: kind,
        });
        let internal_new = obj.descent_value(fs, next)?;
        if kind == StepKind::Gradient && (internal_old - internal_new).abs() < cfg.delta_tol {
            streak += 1;
        } else {
            streak = 0;
        }
        x = next;
        internal_old = internal_new;
        k += 1;
        if streak >= cfg.patience {
            let value = match obj.mode {
                Mode::Minimize => internal_old,
                Mode::Maximize => -internal_old,
            };
            rows.push(IterateRow {
                k,
                x,
                value,
                grad_norm,
                step_kind: StepKind::Stop,
            });
            converged = true;
            break;
        }
    }
    let final_row = rows.last().expect("at least one row");
    Ok(NorcentRun {
        final_point: final_row.x,
        final_value: final_row.value,
        converged,
        seed_used: cfg.seed,
        perturbations,
        iterates: rows,
    })
}

/// Independent runs with decorrelated seeds seed_i = seed xor i; results
/// are order-stable and bit-identical regardless of parallelism.
pub fn run_multistart(
    fs: &FreeSpace,
    cs: &CriticalStructure,
    obj: &AugmentedObjective,
    cfg: &NorcentConfig,
    starts: &[Point2],
    parallel: bool,
) -> Vec<Result<NorcentRun, NorcentError>> {
    let job = |(i, x0): (usize, &Point2)| {
        let mut c = cfg.clone();
        c.seed = cfg.seed ^ (i as u64);
        run_norcent(fs, cs, obj, &c, *x0)
    };
    if parallel {
        starts.par_iter().enumerate().map(job).collect()
    } else {
        starts.iter().enumerate().map(job).collect()
    }
}

/// One-sided optimality test at a candidate extremum: every feasible
/// compass direction has a one-sided derivative of the augmented objective
/// at least -tol (minimize) or at most +tol (maximize).
pub fn compass_optimality(
    fs: &FreeSpace,
    obj: &AugmentedObjective,
    x: Point2,
    directions: usize,
    h: f64,
    tol: f64,
) -> bool {
    let f = |p: Point2| {
        obj.descent_value(fs, p)
            .expect("augmented objective is total")
    };
    (0..directions).all(|i| {
        let ang = 2.0 * std::f64::consts::PI * i as f64 / directions as f64;
        let nu = UnitVector2::from_angle(ang);
        fd_oracle(&f, x, nu, h) >= -tol
    })
}

/// Distance from a point to the nearest inflection segment, used by
/// diagnostics.
pub fn dist_to_segments(cs: &CriticalStructure, x: Point2) -> f64 {
    cs.segments
        .iter()
        .map(|s| dist_point_segment(x, s.a, s.b))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::{build_partition, inflection_segments};
    use crate::geom::Environment;
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

    fn fig2_objective(mode: Mode) -> AugmentedObjective {
        AugmentedObjective {
            d1: Polygon::new(vec![
                Point2::new(-1.0, -1.0),
                Point2::new(11.0, -1.0),
                Point2::new(11.0, 1.0),
                Point2::new(-1.0, 1.0),
            ])
            .unwrap(),
            d2: Polygon::new(vec![
                Point2::new(1.0, 3.0),
                Point2::new(9.0, 3.0),
                Point2::new(9.0, 5.0),
                Point2::new(1.0, 5.0),
            ])
            .unwrap(),
            sensing: Sensing::Full,
            mode,
        }
    }

    fn structure(fs: &FreeSpace) -> CriticalStructure {
        build_partition(fs, &inflection_segments(fs)).unwrap()
    }

    #[test]
    fn projection_basics() {
        let d1 = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 2.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        // Inside projects to itself.
        let (p, m) = project_to_domain(&d1, Point2::new(1.0, 1.0));
        assert_eq!(p, Point2::new(1.0, 1.0));
        assert_eq!(m, 1);
        // Outside onto an edge interior: foot of the perpendicular.
        let (p, m) = project_to_domain(&d1, Point2::new(2.0, 5.0));
        assert_relative_eq!(p.x, 2.0);
        assert_relative_eq!(p.y, 2.0);
        assert_eq!(m, 1);
    }

    #[test]
    fn projection_tie_on_nonconvex_domain() {
        // U-shaped domain; a point over the middle notch is equidistant
        // from the two inner corners.
        let d1 = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        let x = Point2::new(1.5, 2.5);
        let (p, m) = project_to_domain(&d1, x);
        assert_eq!(m, 2, "expected a two-way tie");
        // Lexicographically smallest winner.
        assert_relative_eq!(p.x, 1.0);
        assert_relative_eq!(p.y, 2.5);
        // Brute-force nearest over dense boundary sampling agrees.
        let mut best = f64::INFINITY;
        let n = d1.len();
        for i in 0..n {
            let (a, b) = (d1.vertices()[i], d1.vertices()[(i + 1) % n]);
            for t in 0..=1000 {
                let q = a + (b - a) * (t as f64 / 1000.0);
                best = best.min(x.dist(q));
            }
        }
        assert_relative_eq!(x.dist(p), best, epsilon = 1e-6);
    }

    #[test]
    fn augmented_value_inside_and_outside() {
        let fs = fig1();
        let obj = fig2_objective(Mode::Minimize);
        // Inside D1 the augmented metric equals the base metric.
        let x_in = Point2::new(2.0, 0.5);
        let base = obj.base(&fs, x_in).unwrap();
        assert_relative_eq!(obj.augmented_value(&fs, x_in).unwrap(), base);
        // Outside: projection to (0,-1) plus unit distance.
        let x_out = Point2::new(0.0, -2.0);
        let v_proj = obj.base(&fs, Point2::new(0.0, -1.0)).unwrap();
        assert_relative_eq!(
            obj.augmented_value(&fs, x_out).unwrap(),
            v_proj + 1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn step_lengths_are_exact() {
        let fs = fig1();
        let cs = structure(&fs);
        let obj = fig2_objective(Mode::Minimize);
        let cfg = NorcentConfig::defaults(&fs);
        let run = run_norcent(&fs, &cs, &obj, &cfg, Point2::new(2.0, 0.0)).unwrap();
        for w in run.iterates.windows(2) {
            let step = w[0].x.dist(w[1].x);
            let expected = match w[0].step_kind {
                StepKind::Gradient => cfg.a_k(w[0].k),
                StepKind::Random => cfg.b_k(w[0].k),
                StepKind::Stop => continue,
            };
            assert_relative_eq!(step, expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn random_step_direction_uniformity() {
        // Chi-square over 10^4 random-branch directions, 16 bins.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let bins = 16usize;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let ang: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let b = ((ang / (2.0 * std::f64::consts::PI)) * bins as f64) as usize;
            counts[b.min(bins - 1)] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 0.999 quantile of chi-square with 15 degrees of freedom.
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }

    #[test]
    fn outside_domain_step_heads_to_projection() {
        // Convex environment: V(proj(x)) is constant, so outside D1 the
        // numeric Line-5 gradient is the distance gradient alone and the
        // step points exactly at the projection.
        let outer = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 0.0),
            Point2::new(10.0, 6.0),
            Point2::new(0.0, 6.0),
        ])
        .unwrap();
        let fs = FreeSpace::build(Environment::new(outer.clone(), vec![]).unwrap()).unwrap();
        let cs = structure(&fs);
        let obj = AugmentedObjective {
            d1: Polygon::new(vec![
                Point2::new(2.0, 2.0),
                Point2::new(8.0, 2.0),
                Point2::new(8.0, 4.0),
                Point2::new(2.0, 4.0),
            ])
            .unwrap(),
            d2: Polygon::new(vec![
                Point2::new(1.0, 1.0),
                Point2::new(9.0, 1.0),
                Point2::new(9.0, 5.0),
                Point2::new(1.0, 5.0),
            ])
            .unwrap(),
            sensing: Sensing::Full,
            mode: Mode::Minimize,
        };
        let cfg = NorcentConfig::defaults(&fs);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Point2::new(5.5, 1.6); // below D1, projects to (5.5, 2)
        let (next, kind, grad_norm, _) = norcent_step(&fs, &cs, &obj, &cfg, x, 0, &mut rng);
        assert_eq!(kind, StepKind::Gradient);
        assert_relative_eq!(grad_norm, 1.0, epsilon = 1e-6);
        let dir = (next - x).normalized().unwrap();
        assert_relative_eq!(dir.x(), 0.0, epsilon = 1e-6);
        assert_relative_eq!(dir.y(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn distance_to_domain_decreases_outside() {
        let fs = fig1();
        let cs = structure(&fs);
        let obj = fig2_objective(Mode::Minimize);
        let mut cfg = NorcentConfig::defaults(&fs);
        cfg.max_iter = 60;
        cfg.seed = 5;
        let x0 = Point2::new(4.0, -1.3);
        assert!(dist_to_domain(&obj.d1, x0) < cfg.a0);
        let run = run_norcent(&fs, &cs, &obj, &cfg, x0).unwrap();
        for w in run.iterates.windows(2) {
            let d_prev = dist_to_domain(&obj.d1, w[0].x);
            if d_prev > 0.0 && w[0].step_kind != StepKind::Stop {
                let d_next = dist_to_domain(&obj.d1, w[1].x);
                assert!(
                    d_next < d_prev,
                    "distance grew from {d_prev} to {d_next} at k={}",
                    w[0].k
                );
            }
        }
    }

    #[test]
    fn forward_invariance_of_inflated_domain() {
        let fs = fig1();
        let cs = structure(&fs);
        let obj = fig2_objective(Mode::Minimize);
        let mut cfg = NorcentConfig::defaults(&fs);
        cfg.max_iter = 300;
        for seed in 0..5 {
            cfg.seed = seed;
            let run = run_norcent(&fs, &cs, &obj, &cfg, Point2::new(2.0, 0.2)).unwrap();
            let slack = cfg.a0.min(cfg.b0) + 1e-9;
            for row in &run.iterates {
                assert!(
                    dist_to_domain(&obj.d1, row.x) < slack,
                    "iterate {:?} escaped D1 + B(min(a0, b0))",
                    row
                );
            }
        }
    }

    #[test]
    fn fig2_minimization_reaches_hidden_spot() {
        let fs = fig1();
        let cs = structure(&fs);
        let obj = fig2_objective(Mode::Minimize);
        let mut cfg = NorcentConfig::defaults(&fs);
        cfg.max_iter = 600;
        cfg.seed = 7;
        let run = run_norcent(&fs, &cs, &obj, &cfg, Point2::new(2.0, 0.0)).unwrap();
        assert!(
            run.final_value <= 1e-6 * obj.d2.area(),
            "final value {}",
            run.final_value
        );
    }

    #[test]
    fn maximization_is_descent_on_negated_objective() {
        let fs = fig1();
        let cs = structure(&fs);
        let obj = fig2_objective(Mode::Maximize);
        let mut cfg = NorcentConfig::defaults(&fs);
        cfg.max_iter = 40;
        cfg.seed = 3;
        let run = run_norcent(&fs, &cs, &obj, &cfg, Point2::new(2.0, 0.0)).unwrap();
        // Each gradient step moves along -grad(-W) = +grad(W): check the
        // step direction against a finite-difference gradient of W.
        let f = |p: Point2| obj.augmented_value(&fs, p).unwrap();
        let h = 1e-6 * fs.bounding_diameter();
        let mut checked = 0;
        for w in run.iterates.windows(2) {
            if w[0].step_kind != StepKind::Gradient || w[0].grad_norm < 1e-6 {
                continue;
            }
            let g = Vec2::new(
                (f(w[0].x + Vec2::new(h, 0.0)) - f(w[0].x)) / h,
                (f(w[0].x + Vec2::new(0.0, h)) - f(w[0].x)) / h,
            );
            if g.norm() < 1e-9 {
                continue;
            }
            let step = (w[1].x - w[0].x).normalized().unwrap();
            let align = step.as_vec().dot(g * (1.0 / g.norm()));
            assert!(align > 0.99, "ascent step misaligned: {align}");
            checked += 1;
        }
        assert!(checked > 0, "no gradient steps to check");
    }

    #[test]
    fn constant_objective_random_walks_until_budget() {
        // Convex environment with D1 = D2 = whole space: the metric is
        // constant, the first gradient norm is below the threshold, and the
        // run performs random steps to the iteration budget.
        let outer = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 3.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        let fs = FreeSpace::build(Environment::new(outer.clone(), vec![]).unwrap()).unwrap();
        let cs = structure(&fs);
        let obj = AugmentedObjective {
            d1: outer.clone(),
            d2: outer.clone(),
            sensing: Sensing::Full,
            mode: Mode::Minimize,
        };
        let mut cfg = NorcentConfig::defaults(&fs);
        cfg.max_iter = 50;
        let run = run_norcent(&fs, &cs, &obj, &cfg, Point2::new(2.0, 1.5)).unwrap();
        assert!(!run.converged);
        let randoms = run
            .iterates
            .iter()
            .filter(|r| r.step_kind == StepKind::Random)
            .count();
        assert!(randoms > 40, "expected mostly random steps, got {randoms}");
        for r in &run.iterates {
            if r.step_kind != StepKind::Stop {
                assert_relative_eq!(r.value, outer.area(), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn multistart_is_deterministic_and_parallel_safe() {
        let fs = fig1();
        let cs = structure(&fs);
        let obj = fig2_objective(Mode::Minimize);
        let mut cfg = NorcentConfig::defaults(&fs);
        cfg.max_iter = 120;
        cfg.seed = 42;
        let starts = [
            Point2::new(2.0, 0.0),
            Point2::new(5.0, 0.0),
            Point2::new(8.0, 0.0),
            Point2::new(2.0, 0.0),
        ];
        let serial = run_multistart(&fs, &cs, &obj, &cfg, &starts, false);
        let parallel = run_multistart(&fs, &cs, &obj, &cfg, &starts, true);
        let fingerprint = |runs: &[Result<NorcentRun, NorcentError>]| -> Vec<String> {
            runs.iter()
                .map(|r| {
                    let run = r.as_ref().unwrap();
                    run.iterates
                        .iter()
                        .map(|row| {
                            format!(
                                "{}:{:x}:{:x}",
                                row.k,
                                row.x.x.to_bits(),
                                row.x.y.to_bits()
                            )
                        })
                        .collect::<Vec<_>>()
                        .join("|")
                })
                .collect()
        };
        assert_eq!(fingerprint(&serial), fingerprint(&parallel));
        // Identical starts with identical per-run seeds give identical
        // trajectories.
        let mut cfg0 = cfg.clone();
        cfg0.seed = cfg.seed ^ 0;
        let solo = run_norcent(&fs, &cs, &obj, &cfg0, starts[0]).unwrap();
        assert_eq!(
            fingerprint(&serial)[0],
            fingerprint(&[Ok(solo)])[0]
        );
    }

    #[test]
    fn start_outside_inflated_domain_rejected() {
        let fs = fig1();
        let cs = structure(&fs);
        let obj = fig2_objective(Mode::Minimize);
        let cfg = NorcentConfig::defaults(&fs);
        assert!(matches!(
            run_norcent(&fs, &cs, &obj, &cfg, Point2::new(5.0, 4.0)),
            Err(NorcentError::StartOutsideDomain(_))
        ));
    }

    #[test]
    fn schedules_satisfy_requirements() {
        let fs = fig1();
        let cfg = NorcentConfig::defaults(&fs);
        cfg.validate().unwrap();
        // Strictly decreasing.
        for k in 0..100 {
            assert!(cfg.a_k(k + 1) < cfg.a_k(k));
            assert!(cfg.b_k(k + 1) < cfg.b_k(k));
            assert!(cfg.dth_k(k + 1) < cfg.dth_k(k));
        }
        // Partial sums of a_k exceed a multiple of the diameter within the
        // 10^6-term witness horizon (divergence of the harmonic-type sum).
        let mut sum = 0.0;
        let mut hit = None;
        for k in 0..1_000_000usize {
            sum += cfg.a_k(k);
            if hit.is_none() && sum > 4.0 * fs.bounding_diameter() {
                hit = Some(k);
                break;
            }
        }
        assert!(hit.is_some(), "partial sums stalled at {sum}");
        // Square-summability of a_k vs non-square-summability of b_k:
        // the tail sum of a_k^2 over [N, 2N] vanishes while the tail of
        // b_k^2 stays bounded away from zero (logarithmic divergence).
        let n = 100_000usize;
        let tail_a: f64 = (n..2 * n).map(|k| cfg.a_k(k).powi(2)).sum();
        let tail_b: f64 = (n..2 * n).map(|k| cfg.b_k(k).powi(2)).sum();
        assert!(tail_a < 1e-2 * cfg.a0 * cfg.a0);
        assert!(tail_b > 0.5 * cfg.b0 * cfg.b0 * std::f64::consts::LN_2);
        assert!(tail_b > 10.0 * tail_a);
    }
}
