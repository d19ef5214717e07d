//! Curve-intersection obstructions to autonomy for area-preserving maps of
//! the annulus and the disk.
//!
//! Given a curve `L` and its image `K = g(L)`, the crate finds the transverse
//! crossings of `L` and `K`, recognizes the three-crossing "snake"
//! configurations that no loop of fixed points of an autonomous flow can pass
//! through, and combines that with families of maps that are known to have
//! such a loop crossing `L` to conclude that `g` is not autonomous. A small
//! area-preserving flow simulator supplies autonomous test cases and
//! cross-checks (rotation numbers, fixed loops, flux, linearizations).

pub mod curve;
pub mod family;
pub mod flow;
pub mod geometry;
pub mod intersect;
pub mod io;
pub mod obstruction;
pub mod segment;
pub mod snake;
pub mod svg;

pub use curve::{standard_curve, Curve, CurveError, LiftedCurve};
pub use geometry::{CoverPoint, GeometryError, Point, Surface};
pub use intersect::{
    intersect_curves, order_permutation, IntersectError, IntersectOptions, IntersectionPattern, IntersectionPoint,
    OrderClass,
};
