//! Scenario files: JSON schema, validation with field-path errors, and the
//! bridge to the optimizer configuration.
//!
//! Lengths are in environment units; angles are degrees in files and
//! radians internally.

use crate::geom::{Environment, FreeSpace, Point2, Polygon};
use crate::metrics::{polygon_in_free_space, MetricConfig};
use crate::norcent::{dist_to_domain, AugmentedObjective, Mode, NorcentConfig, Sensing};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentFile {
    pub outer: Vec<[f64; 2]>,
    #[serde(default)]
    pub holes: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SensingFile {
    Full,
    Range { r: f64 },
    Fov { r: f64, aperture_deg: f64 },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NorcentOverrides {
    pub a0: Option<f64>,
    pub p_a: Option<f64>,
    pub b0: Option<f64>,
    pub p_b: Option<f64>,
    pub dth0: Option<f64>,
    pub p_th: Option<f64>,
    pub delta_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,
    pub fd_h: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub environment: EnvironmentFile,
    pub d1: Vec<[f64; 2]>,
    pub d2: Vec<[f64; 2]>,
    pub sensing: SensingFile,
    pub mode: String,
    pub starts: Vec<[f64; 2]>,
    #[serde(default)]
    pub norcent: NorcentOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensingSpec {
    Full,
    Range(f64),
    Fov { r: f64, aperture: f64 },
}

/// A validated scenario ready for evaluation and optimization.
pub struct Scenario {
    pub name: String,
    pub fs: FreeSpace,
    pub d1: Polygon,
    pub d2: Polygon,
    pub sensing: SensingSpec,
    pub mode: Mode,
    pub starts: Vec<Point2>,
    pub norcent: NorcentConfig,
}

fn ring(points: &[[f64; 2]], path: &str) -> Result<Polygon, ScenarioError> {
    let pts: Vec<Point2> = points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    Polygon::new(pts).map_err(|e| invalid(path, e.to_string()))
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let outer = ring(&file.environment.outer, "environment.outer")?;
        let holes = file
            .environment
            .holes
            .iter()
            .enumerate()
            .map(|(i, h)| ring(h, &format!("environment.holes[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let env = Environment::new(outer, holes)
            .map_err(|e| invalid("environment", e.to_string()))?;
        let fs = FreeSpace::build(env).map_err(|e| invalid("environment", e.to_string()))?;

        let d1 = ring(&file.d1, "d1")?;
        if !polygon_in_free_space(&fs, &d1) {
            return Err(invalid("d1", "not contained in the free space"));
        }
        let d2 = ring(&file.d2, "d2")?;
        if !polygon_in_free_space(&fs, &d2) {
            return Err(invalid("d2", "not contained in the free space"));
        }

        let sensing = match file.sensing {
            SensingFile::Full => SensingSpec::Full,
            SensingFile::Range { r } => {
                if r <= 0.0 {
                    return Err(invalid("sensing.r", "range must be positive"));
                }
                SensingSpec::Range(r)
            }
            SensingFile::Fov { r, aperture_deg } => {
                if r <= 0.0 {
                    return Err(invalid("sensing.r", "range must be positive"));
                }
                if !(aperture_deg > 0.0 && aperture_deg <= 360.0) {
                    return Err(invalid("sensing.aperture_deg", "must lie in (0, 360]"));
                }
                SensingSpec::Fov {
                    r,
                    aperture: aperture_deg.to_radians(),
                }
            }
        };

        let mode = match file.mode.as_str() {
            "min" | "minimize" => Mode::Minimize,
            "max" | "maximize" => Mode::Maximize,
            other => return Err(invalid("mode", format!("unknown mode {other:?}"))),
        };

        let mut norcent = NorcentConfig::defaults(&fs);
        let o = &file.norcent;
        if let Some(v) = o.a0 {
            norcent.a0 = v;
        }
        if let Some(v) = o.p_a {
            norcent.p_a = v;
        }
        if let Some(v) = o.b0 {
            norcent.b0 = v;
        }
        if let Some(v) = o.p_b {
            norcent.p_b = v;
        }
        if let Some(v) = o.dth0 {
            norcent.dth0 = v;
        }
        if let Some(v) = o.p_th {
            norcent.p_th = v;
        }
        if let Some(v) = o.delta_tol {
            norcent.delta_tol = v;
        }
        if let Some(v) = o.max_iter {
            norcent.max_iter = v;
        }
        if let Some(v) = o.patience {
            norcent.patience = v;
        }
        if let Some(v) = o.seed {
            norcent.seed = v;
        }
        if let Some(v) = o.fd_h {
            norcent.fd_h = v;
        }
        norcent
            .validate()
            .map_err(|e| invalid("norcent", e.to_string()))?;

        let starts: Vec<Point2> = file
            .starts
            .iter()
            .map(|p| Point2::new(p[0], p[1]))
            .collect();
        for (i, s) in starts.iter().enumerate() {
            if dist_to_domain(&d1, *s) >= norcent.a0 {
                return Err(invalid(
                    &format!("starts[{i}]"),
                    "outside D1 + B(a0)",
                ));
            }
        }

        Ok(Self {
            name: file.name,
            fs,
            d1,
            d2,
            sensing,
            mode,
            starts,
            norcent,
        })
    }

    pub fn parse(json: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(json)?;
        Self::from_file(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn metric_config(&self) -> MetricConfig {
        match self.sensing {
            SensingSpec::Full => MetricConfig::full(self.d2.clone()),
            SensingSpec::Range(r) => MetricConfig::with_range(self.d2.clone(), r),
            SensingSpec::Fov { r, aperture } => {
                MetricConfig::with_fov(self.d2.clone(), r, aperture)
            }
        }
    }

    /// Optimization objective; FOV scenarios are evaluated, not optimized.
    pub fn objective(&self) -> Result<AugmentedObjective, ScenarioError> {
        let sensing = match self.sensing {
            SensingSpec::Full => Sensing::Full,
            SensingSpec::Range(r) => Sensing::Range(r),
            SensingSpec::Fov { .. } => {
                return Err(invalid(
                    "sensing",
                    "fov scenarios support evaluation and rendering only",
                ))
            }
        };
        Ok(AugmentedObjective {
            d1: self.d1.clone(),
            d2: self.d2.clone(),
            sensing,
            mode: self.mode,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_json() -> String {
        r#"{
            "name": "fig2",
            "environment": {
                "outer": [[-1,-1],[11,-1],[11,1],[9,1],[9,5],[1,5],[1,1],[-1,1]],
                "holes": [[[3,1],[7,1],[7,3],[3,3]]]
            },
            "d1": [[-1,-1],[11,-1],[11,1],[-1,1]],
            "d2": [[1,3],[9,3],[9,5],[1,5]],
            "sensing": {"type": "full"},
            "mode": "min",
            "starts": [[2,0],[8,0]],
            "norcent": {"seed": 7, "max_iter": 500}
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_validates_fig2() {
        let sc = Scenario::parse(&fig2_json()).unwrap();
        assert_eq!(sc.name, "fig2");
        assert_eq!(sc.mode, Mode::Minimize);
        assert_eq!(sc.starts.len(), 2);
        assert_eq!(sc.norcent.seed, 7);
        assert_eq!(sc.norcent.max_iter, 500);
        assert!(sc.objective().is_ok());
    }

    #[test]
    fn rejects_d2_outside_free_space() {
        let json = fig2_json().replace(
            r#""d2": [[1,3],[9,3],[9,5],[1,5]]"#,
            r#""d2": [[2,1.5],[8,1.5],[8,2.5],[2,2.5]]"#,
        );
        match Scenario::parse(&json) {
            Err(ScenarioError::Invalid { path, .. }) => assert_eq!(path, "d2"),
            other => panic!("expected d2 failure, got {:?}", other.err().map(|e| e.to_string())),
        }
    }

    #[test]
    fn rejects_start_outside_inflated_domain() {
        let json = fig2_json().replace("[[2,0],[8,0]]", "[[2,0],[5,4.5]]");
        match Scenario::parse(&json) {
            Err(ScenarioError::Invalid { path, .. }) => assert_eq!(path, "starts[1]"),
            other => panic!("expected start failure, got {:?}", other.err().map(|e| e.to_string())),
        }
    }

    #[test]
    fn fov_requires_degrees_and_blocks_optimize() {
        let json = fig2_json().replace(
            r#""sensing": {"type": "full"}"#,
            r#""sensing": {"type": "fov", "r": 3.0, "aperture_deg": 90}"#,
        );
        let sc = Scenario::parse(&json).unwrap();
        match sc.sensing {
            SensingSpec::Fov { aperture, .. } => {
                assert!((aperture - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
            }
            _ => panic!("expected fov"),
        }
        assert!(sc.objective().is_err());
    }

    #[test]
    fn rejects_unknown_mode() {
        let json = fig2_json().replace(r#""mode": "min""#, r#""mode": "sideways""#);
        assert!(matches!(
            Scenario::parse(&json),
            Err(ScenarioError::Invalid { .. })
        ));
    }
}
