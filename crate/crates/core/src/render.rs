//! Static SVG, CSV, and JSON emission of scenario structures, runs, and
//! fields. All writers are deterministic: identical inputs produce
//! byte-identical output.

use crate::critical::CriticalStructure;
use crate::geom::{FreeSpace, Point2};
use crate::norcent::{NorcentRun, StepKind};
use crate::visibility::{RegionEdge, VisibilityRegion};
use serde::Serialize;

/// Maps environment coordinates into a y-flipped SVG viewport.
pub struct SvgCanvas {
    min: Point2,
    max: Point2,
    scale: f64,
    pad: f64,
}

impl SvgCanvas {
    pub fn for_free_space(fs: &FreeSpace) -> Self {
        let (min, max) = fs.env().outer.bbox();
        let extent = (max - min).norm().max(1e-9);
        Self {
            min,
            max,
            scale: 800.0 / extent,
            pad: 0.05 * 800.0,
        }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        (
            self.pad + (p.x - self.min.x) * self.scale,
            self.pad + (self.max.y - p.y) * self.scale,
        )
    }

    fn fmt(&self, v: f64) -> String {
        format!("{:.3}", v)
    }

    pub fn width(&self) -> f64 {
        2.0 * self.pad + (self.max.x - self.min.x) * self.scale
    }

    pub fn height(&self) -> f64 {
        2.0 * self.pad + (self.max.y - self.min.y) * self.scale
    }

    pub fn polygon(&self, ring: &[Point2], style: &str) -> String {
        let pts: Vec<String> = ring
            .iter()
            .map(|p| {
                let (x, y) = self.map(*p);
                format!("{},{}", self.fmt(x), self.fmt(y))
            })
            .collect();
        format!("<polygon points=\"{}\" style=\"{}\"/>", pts.join(" "), style)
    }

    pub fn polyline(&self, pts: &[Point2], style: &str) -> String {
        let s: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = self.map(*p);
                format!("{},{}", self.fmt(x), self.fmt(y))
            })
            .collect();
        format!("<polyline points=\"{}\" style=\"{}\" fill=\"none\"/>", s.join(" "), style)
    }

    pub fn line(&self, a: Point2, b: Point2, style: &str) -> String {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" style=\"{}\"/>",
            self.fmt(x1),
            self.fmt(y1),
            self.fmt(x2),
            self.fmt(y2),
            style
        )
    }

    pub fn circle(&self, c: Point2, r_px: f64, style: &str) -> String {
        let (x, y) = self.map(c);
        format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" style=\"{}\"/>",
            self.fmt(x),
            self.fmt(y),
            self.fmt(r_px),
            style
        )
    }

    pub fn square(&self, c: Point2, half_px: f64, style: &str) -> String {
        let (x, y) = self.map(c);
        format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" style=\"{}\"/>",
            self.fmt(x - half_px),
            self.fmt(y - half_px),
            self.fmt(2.0 * half_px),
            self.fmt(2.0 * half_px),
            style
        )
    }

    pub fn text(&self, p: Point2, content: &str, style: &str) -> String {
        let (x, y) = self.map(p);
        format!(
            "<text x=\"{}\" y=\"{}\" style=\"{}\">{}</text>",
            self.fmt(x),
            self.fmt(y),
            style,
            content
        )
    }

    /// Path approximating a region boundary with arcs rendered as SVG arcs.
    pub fn region_path(&self, region: &VisibilityRegion, style: &str) -> String {
        let mut d = String::new();
        let mut started = false;
        for e in &region.edges {
            match e {
                RegionEdge::Linear { a, b } => {
                    let (x1, y1) = self.map(*a);
                    let (x2, y2) = self.map(*b);
                    if !started {
                        d.push_str(&format!("M {} {} ", self.fmt(x1), self.fmt(y1)));
                        started = true;
                    }
                    d.push_str(&format!("L {} {} ", self.fmt(x2), self.fmt(y2)));
                }
                RegionEdge::Arc {
                    center,
                    radius,
                    theta_start,
                    theta_end,
                } => {
                    let p0 = Point2::new(
                        center.x + radius * theta_start.cos(),
                        center.y + radius * theta_start.sin(),
                    );
                    let p1 = Point2::new(
                        center.x + radius * theta_end.cos(),
                        center.y + radius * theta_end.sin(),
                    );
                    let (x0, y0) = self.map(p0);
                    let (x1, y1) = self.map(p1);
                    if !started {
                        d.push_str(&format!("M {} {} ", self.fmt(x0), self.fmt(y0)));
                        started = true;
                    } else {
                        d.push_str(&format!("L {} {} ", self.fmt(x0), self.fmt(y0)));
                    }
                    let r_px = radius * self.scale;
                    let large = if theta_end - theta_start > std::f64::consts::PI {
                        1
                    } else {
                        0
                    };
                    // Counter-clockwise in environment coordinates is
                    // clockwise after the y-flip (sweep flag 0).
                    d.push_str(&format!(
                        "A {} {} 0 {} 0 {} {} ",
                        self.fmt(r_px),
                        self.fmt(r_px),
                        large,
                        self.fmt(x1),
                        self.fmt(y1)
                    ));
                }
            }
        }
        d.push('Z');
        format!("<path d=\"{}\" style=\"{}\"/>", d.trim_end(), style)
    }
}

/// A named layer of SVG elements.
pub struct Layer {
    pub id: String,
    pub elements: Vec<String>,
}

impl Layer {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            elements: Vec::new(),
        }
    }

    pub fn push(&mut self, element: String) {
        self.elements.push(element);
    }
}

/// Assembles the final document: one <g> per layer, in order.
pub fn svg_document(canvas: &SvgCanvas, layers: &[Layer]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n",
        canvas.width(),
        canvas.height(),
        canvas.width(),
        canvas.height()
    ));
    for layer in layers {
        out.push_str(&format!("<g id=\"{}\">\n", layer.id));
        for e in &layer.elements {
            out.push_str(e);
            out.push('\n');
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

pub fn environment_layer(fs: &FreeSpace, canvas: &SvgCanvas) -> Layer {
    let mut layer = Layer::new("environment");
    layer.push(canvas.polygon(
        fs.env().outer.vertices(),
        "fill:#e8e8e8;stroke:#000;stroke-width:2",
    ));
    for h in &fs.env().holes {
        layer.push(canvas.polygon(h.vertices(), "fill:#ffffff;stroke:#000;stroke-width:2"));
    }
    layer
}

pub fn domain_layer(id: &str, ring: &[Point2], canvas: &SvgCanvas, color: &str) -> Layer {
    let mut layer = Layer::new(id);
    layer.push(canvas.polygon(
        ring,
        &format!("fill:{color};fill-opacity:0.25;stroke:{color};stroke-width:1"),
    ));
    layer
}

pub fn segments_layer(cs: &CriticalStructure, canvas: &SvgCanvas) -> Layer {
    let mut layer = Layer::new("inflection_segments");
    for s in &cs.segments {
        let style = if s.on_boundary {
            "stroke:#9467bd;stroke-width:1;stroke-dasharray:4 2"
        } else {
            "stroke:#9467bd;stroke-width:1.5"
        };
        layer.push(canvas.line(s.a, s.b, style));
    }
    layer
}

pub fn faces_layer(cs: &CriticalStructure, canvas: &SvgCanvas) -> Layer {
    let mut layer = Layer::new("partition_faces");
    for f in &cs.faces {
        // Stable face tint from the anchor-set cardinality.
        let tint = 30 + 25 * (f.anchor_set.len() % 8);
        layer.push(canvas.polygon(
            &f.ring,
            &format!("fill:rgb({tint},{},230);fill-opacity:0.25;stroke:none", 255 - tint),
        ));
        let label = f
            .anchor_set
            .iter()
            .map(|id| format!("v{id}"))
            .collect::<Vec<_>>()
            .join(",");
        layer.push(canvas.text(
            f.rep,
            &format!("{{{label}}}"),
            "font-size:10px;font-family:monospace;fill:#333",
        ));
    }
    layer
}

pub fn region_layer(region: &VisibilityRegion, canvas: &SvgCanvas) -> Layer {
    let mut layer = Layer::new("visibility_region_at");
    layer.push(canvas.region_path(
        region,
        "fill:#40e0d0;fill-opacity:0.45;stroke:#20b2aa;stroke-width:1",
    ));
    layer.push(canvas.circle(region.observer, 4.0, "fill:#1f3fbf"));
    layer
}

/// Start markers red, final markers blue squares, path in between.
pub fn trajectories_layer(runs: &[&NorcentRun], canvas: &SvgCanvas) -> Layer {
    let mut layer = Layer::new("trajectories");
    for run in runs {
        let pts: Vec<Point2> = run.iterates.iter().map(|r| r.x).collect();
        layer.push(canvas.polyline(&pts, "stroke:#555;stroke-width:1"));
    }
    for run in runs {
        if let Some(first) = run.iterates.first() {
            layer.push(canvas.circle(first.x, 5.0, "fill:#d62728"));
        }
        layer.push(canvas.square(run.final_point, 5.0, "fill:#1f77b4"));
    }
    layer
}

pub fn gradient_field_layer(
    rows: &[GradientGridRow],
    canvas: &SvgCanvas,
    arrow_px: f64,
) -> Layer {
    let mut layer = Layer::new("gradient_field");
    let max_norm = rows
        .iter()
        .filter_map(|r| r.grad.map(|g| (g.0 * g.0 + g.1 * g.1).sqrt()))
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    for row in rows {
        match row.grad {
            Some((gx, gy)) => {
                let n = (gx * gx + gy * gy).sqrt();
                if n <= 0.0 {
                    continue;
                }
                let len = arrow_px * (n / max_norm);
                let tip = Point2::new(row.x + gx / n * 1e-9, row.y + gy / n * 1e-9);
                let _ = tip;
                let (x, y) = {
                    let p = Point2::new(row.x, row.y);
                    let m = canvas.map(p);
                    m
                };
                // SVG y-axis points down, so flip the arrow's y component.
                layer.push(format!(
                    "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" style=\"stroke:#2a7f2a;stroke-width:1\"/>",
                    x,
                    y,
                    x + gx / n * len,
                    y - gy / n * len
                ));
            }
            None => {
                let p = Point2::new(row.x, row.y);
                let (x, y) = canvas.map(p);
                layer.push(format!(
                    "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.5\" style=\"fill:#d62728\"/>"
                ));
            }
        }
    }
    layer
}

/// One gradient-grid sample; `grad` is None at marked (skipped) points.
#[derive(Debug, Clone, Serialize)]
pub struct GradientGridRow {
    pub x: f64,
    pub y: f64,
    pub grad: Option<(f64, f64)>,
    pub face: Option<usize>,
    pub mark: &'static str,
}

/// CSV with one row per iterate: k, x, y, value, grad_norm, step_kind.
pub fn trajectory_csv(runs: &[&NorcentRun]) -> String {
    let mut out = String::from("run,k,x,y,value,grad_norm,step_kind\n");
    for (i, run) in runs.iter().enumerate() {
        for row in &run.iterates {
            let kind = match row.step_kind {
                StepKind::Gradient => "gradient",
                StepKind::Random => "random",
                StepKind::Stop => "stop",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                i, row.k, row.x.x, row.x.y, row.value, row.grad_norm, kind
            ));
        }
    }
    out
}

/// CSV of the gradient grid: x, y, g1, g2, |g|, face id, mark.
pub fn gradient_grid_csv(rows: &[GradientGridRow]) -> String {
    let mut out = String::from("x,y,g1,g2,gnorm,face,mark\n");
    for r in rows {
        match r.grad {
            Some((g1, g2)) => {
                let n = (g1 * g1 + g2 * g2).sqrt();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.x,
                    r.y,
                    g1,
                    g2,
                    n,
                    r.face.map_or(String::new(), |f| f.to_string()),
                    r.mark
                ));
            }
            None => {
                out.push_str(&format!("{},{},,,,,{}\n", r.x, r.y, r.mark));
            }
        }
    }
    out
}

/// Structures dump: segments and faces with ids, kinds, generators, anchor
/// sets and geometry.
#[derive(Serialize)]
pub struct StructuresJson<'a> {
    pub segments: &'a [crate::critical::InflectionSegment],
    pub faces: &'a [crate::critical::PartitionFace],
    pub adjacency: &'a [(usize, usize)],
}

/// Minimal well-formedness check used by tests: tags balance and every
/// requested layer id appears exactly once.
pub fn svg_is_well_formed(svg: &str, layer_ids: &[&str]) -> bool {
    let opens = svg.matches("<g id=").count();
    let closes = svg.matches("</g>").count();
    if opens != closes {
        return false;
    }
    if !(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>")) {
        return false;
    }
    layer_ids
        .iter()
        .all(|id| svg.matches(&format!("<g id=\"{id}\">")).count() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Environment, Polygon};

    fn small_fs() -> FreeSpace {
        let outer = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 3.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        FreeSpace::build(Environment::new(outer, vec![]).unwrap()).unwrap()
    }

    #[test]
    fn svg_layers_are_well_formed() {
        let fs = small_fs();
        let canvas = SvgCanvas::for_free_space(&fs);
        let layers = vec![
            environment_layer(&fs, &canvas),
            domain_layer("d1", fs.env().outer.vertices(), &canvas, "#2ca02c"),
        ];
        let svg = svg_document(&canvas, &layers);
        assert!(svg_is_well_formed(&svg, &["environment", "d1"]));
        assert!(!svg_is_well_formed(&svg, &["environment", "missing"]));
    }

    #[test]
    fn trajectory_csv_is_deterministic() {
        let run = NorcentRun {
            iterates: vec![crate::norcent::IterateRow {
                k: 0,
                x: Point2::new(1.0, 2.0),
                value: 3.5,
                grad_norm: 0.25,
                step_kind: StepKind::Gradient,
            }],
            final_point: Point2::new(1.0, 2.0),
            final_value: 3.5,
            converged: false,
            seed_used: 1,
            perturbations: 0,
        };
        let a = trajectory_csv(&[&run]);
        let b = trajectory_csv(&[&run]);
        assert_eq!(a, b);
        assert!(a.starts_with("run,k,x,y,value,grad_norm,step_kind\n"));
        assert!(a.contains("0,0,1,2,3.5,0.25,gradient"));
    }
}
