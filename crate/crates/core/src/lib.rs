//! Visibility structure and visibility-driven optimization in polygonal
//! environments with holes.
//!
//! The crate computes visibility polygons and their anchors, enumerates the
//! inflection segments across which the anchor set changes, partitions the
//! free space into convex faces with constant anchor sets, evaluates
//! visibility metrics (full, range-limited, field-of-view-limited) together
//! with their analytic directional derivatives and generalized gradients,
//! and runs the Norcent normalized descent/ascent algorithm to locate
//! optimal hiding and surveillance positions.

pub mod clip;
pub mod critical;
pub mod geom;
pub mod gradients;
pub mod metrics;
pub mod norcent;
pub mod render;
pub mod scenario;
pub mod visibility;

pub use geom::{Environment, FreeSpace, GeomError, Point2, Polygon, ProjectedRay, UnitVector2, Vec2};
pub use visibility::{AnchorSet, VisibilityRegion};
