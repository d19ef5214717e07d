//! Surfaces, points, universal-cover lifts and signed areas.
//!
//! Two surfaces are supported, both normalized to total area 1:
//!
//! - the annulus `S¹ × [0, 1]` with coordinates `(θ, s)`, `θ ∈ ℝ/ℤ`, and area
//!   form `dθ ∧ ds`;
//! - the closed unit disk with chart coordinates `(x, y)` and area form
//!   `(1/π) dx ∧ dy`.
//!
//! A [`Point`] always stores chart coordinates as `(x, y)`; on the annulus
//! `x` is `θ ∈ [0, 1)` and `y` is `s`. Segments between annulus points are
//! always taken along the shortest θ-representative, so a polyline on the
//! annulus is determined by its vertex list as long as consecutive θ-gaps
//! stay below 1/2.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Tolerance for "on ∂Σ" tests and for disk-membership slack.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Tolerance used when a θ-gap is indistinguishable from 1/2.
pub const LIFT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("coordinates ({0}, {1}) are outside the surface")]
    OutOfDomain(f64, f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("consecutive points {0} and {1} are half a turn apart; the lift is ambiguous")]
    AmbiguousLift(usize, usize),
    #[error("polygon has fewer than 3 distinct vertices")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Annulus,
    Disk,
}

impl Surface {
    /// Total area under the normalized area form.
    pub fn total_area(self) -> f64 {
        1.0
    }

    /// Factor converting chart (Euclidean) area into surface area.
    pub fn area_scale(self) -> f64 {
        match self {
            Surface::Annulus => 1.0,
            Surface::Disk => 1.0 / PI,
        }
    }

    pub fn is_on_boundary(self, p: Point) -> bool {
        self.boundary_distance(p) <= BOUNDARY_TOL
    }

    /// Chart distance from `p` to ∂Σ.
    pub fn boundary_distance(self, p: Point) -> f64 {
        match self {
            Surface::Annulus => p.y.min(1.0 - p.y).max(0.0),
            Surface::Disk => (1.0 - p.norm()).max(0.0),
        }
    }

    /// Displacement from `a` to `b` in chart coordinates. On the annulus the
    /// θ-component is the representative in `(-1/2, 1/2]`.
    pub fn delta(self, a: Point, b: Point) -> [f64; 2] {
        match self {
            Surface::Annulus => [wrap_delta(b.x - a.x), b.y - a.y],
            Surface::Disk => [b.x - a.x, b.y - a.y],
        }
    }

    /// Chart distance, minimized over deck translations on the annulus.
    pub fn distance(self, a: Point, b: Point) -> f64 {
        let [dx, dy] = self.delta(a, b);
        dx.hypot(dy)
    }
}

/// A point of a surface in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// A point of the annulus universal cover `ℝ × [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct CoverPoint {
    pub theta: f64,
    pub s: f64,
}

impl CoverPoint {
    pub const fn new(theta: f64, s: f64) -> Self {
        CoverPoint { theta, s }
    }

    pub fn project(self) -> Point {
        Point::new(wrap_unit(self.theta), self.s)
    }

    pub fn shifted(self, k: f64) -> Self {
        CoverPoint::new(self.theta + k, self.s)
    }
}

impl From<[f64; 2]> for CoverPoint {
    fn from([theta, s]: [f64; 2]) -> Self {
        CoverPoint { theta, s }
    }
}

impl From<CoverPoint> for [f64; 2] {
    fn from(p: CoverPoint) -> Self {
        [p.theta, p.s]
    }
}

/// Reduce `θ` into `[0, 1)`.
pub fn wrap_unit(theta: f64) -> f64 {
    let w = theta - theta.floor();
    // `theta.floor()` can leave exactly 1.0 for tiny negative inputs.
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Representative of `d` modulo 1 in `(-1/2, 1/2]`.
pub fn wrap_delta(d: f64) -> f64 {
    let w = d - d.round();
    if w <= -0.5 {
        w + 1.0
    } else {
        w
    }
}

pub fn normalize_point(surface: Surface, x: f64, y: f64) -> Result<Point, GeometryError> {
    if !x.is_finite() || !y.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    match surface {
        Surface::Annulus => {
            if !(-BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&y) {
                return Err(GeometryError::OutOfDomain(x, y));
            }
            Ok(Point::new(wrap_unit(x), y.clamp(0.0, 1.0)))
        }
        Surface::Disk => {
            let r = x.hypot(y);
            if r > 1.0 + BOUNDARY_TOL {
                return Err(GeometryError::OutOfDomain(x, y));
            }
            if r > 1.0 {
                Ok(Point::new(x / r, y / r))
            } else {
                Ok(Point::new(x, y))
            }
        }
    }
}

/// Continuous lift of an annulus path to the universal cover. The first
/// point keeps its θ in `[0, 1)`; every later point differs from its
/// predecessor by the representative of the raw θ-difference closest to 0.
pub fn lift_path(points: &[Point]) -> Result<Vec<CoverPoint>, GeometryError> {
    let mut out = Vec::with_capacity(points.len());
    let Some(first) = points.first() else {
        return Ok(out);
    };
    let mut prev = CoverPoint::new(wrap_unit(first.x), first.y);
    out.push(prev);
    for (i, p) in points.iter().enumerate().skip(1) {
        let d = wrap_delta(p.x - points[i - 1].x);
        if (d.abs() - 0.5).abs() <= LIFT_TOL {
            return Err(GeometryError::AmbiguousLift(i - 1, i));
        }
        prev = CoverPoint::new(prev.theta + d, p.y);
        out.push(prev);
    }
    Ok(out)
}

/// Shoelace signed area of a closed planar polygon given in chart
/// coordinates (no scaling). Positive for counterclockwise order.
pub fn shoelace(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    // Translate to the first vertex to keep cancellation small.
    let [ox, oy] = points[0];
    let mut acc = 0.0;
    for i in 0..n {
        let [ax, ay] = points[i];
        let [bx, by] = points[(i + 1) % n];
        acc += (ax - ox) * (by - oy) - (bx - ox) * (ay - oy);
    }
    0.5 * acc
}

/// Signed area of a closed polygon in surface-area units. Annulus input is
/// interpreted in cover coordinates (the caller supplies a lift); disk input
/// is scaled by `1/π`.
pub fn signed_polygon_area(surface: Surface, points: &[[f64; 2]]) -> Result<f64, GeometryError> {
    let mut distinct: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for p in points {
        if !distinct.contains(p) {
            distinct.push(*p);
            if distinct.len() >= 3 {
                break;
            }
        }
    }
    if distinct.len() < 3 {
        return Err(GeometryError::Degenerate);
    }
    Ok(shoelace(points) * surface.area_scale())
}

/// Euclidean distance from `p` to the segment `[a, b]` in the plane.
pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    (p[0] - q[0]).hypot(p[1] - q[1])
}
