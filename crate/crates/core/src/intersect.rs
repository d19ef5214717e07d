//! Transverse intersections of two curves, crossing signs and the order
//! permutation comparing positions along each curve.
//!
//! Sign convention: at a crossing `x ∈ L ∩ K` the sign is the sign of
//! `det[T_L | T_K]` in the positively oriented chart, i.e. `+1` when `K`
//! passes from the right of `L` to its left.

use crate::curve::{segment_hits, Curve};
use crate::geometry::{Point, Surface};
use crate::segment::{orient, SegmentHit, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub const DEFAULT_ANGLE_TOL: f64 = 1e-6;
pub const DEFAULT_BOUNDARY_MARGIN: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntersectError {
    #[error("curves live on different surfaces")]
    SurfaceMismatch,
    #[error("non-transverse contact near ({}, {})", .0.x, .0.y)]
    NonTransverse(Point),
    #[error("curves share the interior vertex ({}, {})", .0.x, .0.y)]
    SharedVertex(Point),
    #[error("tangents are parallel")]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectOptions {
    /// Minimum crossing angle (radians) for a contact to count as transverse.
    pub angle_tol: f64,
    /// Width of the collar around ∂Σ whose contacts are set aside.
    pub boundary_margin: f64,
}

impl Default for IntersectOptions {
    fn default() -> Self {
        IntersectOptions {
            angle_tol: DEFAULT_ANGLE_TOL,
            boundary_margin: DEFAULT_BOUNDARY_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionPoint {
    pub location: Point,
    pub param_l: f64,
    pub param_k: f64,
    pub sign: i8,
    pub crossing_angle: f64,
}

/// A contact inside the boundary collar; not part of the pattern proper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryContact {
    pub location: Point,
    pub param_l: f64,
    pub param_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionPattern {
    pub surface: Surface,
    /// Interior crossings sorted by `param_l` (ties by `param_k`).
    pub points: Vec<IntersectionPoint>,
    pub order_l: Vec<usize>,
    pub order_k: Vec<usize>,
    /// `sigma[p]` is the L-order position of the point at K-order position `p`.
    pub sigma: Vec<usize>,
    pub circular_l: bool,
    pub circular_k: bool,
    pub boundary: Vec<BoundaryContact>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderClass {
    MonotoneIncreasing,
    MonotoneDecreasing,
    CircularlyMonotone,
    NonMonotone,
}

impl OrderClass {
    /// Whether this order can be realized by points fixed under an
    /// orientation-preserving map taking one curve to the other.
    pub fn preserves_order(self) -> bool {
        matches!(self, OrderClass::MonotoneIncreasing | OrderClass::CircularlyMonotone)
    }
}

pub fn crossing_sign(tangent_l: Vec2, tangent_k: Vec2, sin_tol: f64) -> Result<i8, IntersectError> {
    let det = tangent_l[0] * tangent_k[1] - tangent_l[1] * tangent_k[0];
    let scale = tangent_l[0].hypot(tangent_l[1]) * tangent_k[0].hypot(tangent_k[1]);
    if scale == 0.0 || det.abs() <= sin_tol * scale {
        return Err(IntersectError::Parallel);
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

/// Angle in `[0, π]` between two directions.
fn angle_between(a: Vec2, b: Vec2) -> f64 {
    let c = a[0] * b[1] - a[1] * b[0];
    let d = a[0] * b[0] + a[1] * b[1];
    c.abs().atan2(d)
}

fn transversality(a: Vec2, b: Vec2) -> f64 {
    let ang = angle_between(a, b);
    ang.min(PI - ang)
}

/// Vertex `v` of `c`'s path, including the vertices before the start and
/// after the end of a closed curve (taken on the neighbouring sheet).
fn path_vertex(c: &Curve, v: isize) -> Vec2 {
    let path = c.path();
    let m = c.segment_count() as isize;
    if (0..=m).contains(&v) {
        return path[v as usize];
    }
    debug_assert!(c.is_closed());
    let w = path[m as usize][0] - path[0][0];
    if v < 0 {
        let p = path[(v + m) as usize];
        [p[0] - w, p[1]]
    } else {
        let p = path[(v - m) as usize];
        [p[0] + w, p[1]]
    }
}

fn shift(p: Vec2, k: f64) -> Vec2 {
    [p[0] + k, p[1]]
}

fn is_open_end(c: &Curve, seg: usize, t: f64) -> bool {
    !c.is_closed() && ((seg == 0 && t == 0.0) || (seg + 1 == c.segment_count() && t == 1.0))
}

pub fn intersect_curves(l: &Curve, k: &Curve, opts: &IntersectOptions) -> Result<IntersectionPattern, IntersectError> {
    if l.surface() != k.surface() {
        return Err(IntersectError::SurfaceMismatch);
    }
    let surface = l.surface();
    let mut points = Vec::new();
    let mut boundary = Vec::new();
    for h in segment_hits(l, k, false) {
        let kshift = h.shift as f64;
        let (p1, p2) = l.segment(h.i);
        let (q1, q2) = k.segment(h.j);
        let (q1, q2) = (shift(q1, kshift), shift(q2, kshift));
        let (t, u) = match h.hit {
            SegmentHit::Point { t, u } => (t, u),
            SegmentHit::Overlap => {
                let mid = [(p1[0] + p2[0]) / 2.0, (p1[1] + p2[1]) / 2.0];
                let loc = l.wrap(mid);
                if surface.boundary_distance(loc) < opts.boundary_margin {
                    continue;
                }
                return Err(IntersectError::NonTransverse(loc));
            }
            SegmentHit::None => continue,
        };
        // half-open segments: an interior vertex belongs to the segment it starts
        if t == 1.0 && !is_open_end(l, h.i, t) {
            continue;
        }
        if u == 1.0 && !is_open_end(k, h.j, u) {
            continue;
        }
        let x = [p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1])];
        let location = l.wrap(x);
        let param_l = l.param_of(h.i, t);
        let param_k = k.param_of(h.j, u);
        if is_open_end(l, h.i, t)
            || is_open_end(k, h.j, u)
            || surface.boundary_distance(location) < opts.boundary_margin
        {
            boundary.push(BoundaryContact {
                location,
                param_l,
                param_k,
            });
            continue;
        }
        let tl = l.tangent(h.i);
        let tk = k.tangent(h.j);
        let (sign, angle) = if t > 0.0 && u > 0.0 {
            let s = crossing_sign(tl, tk, 0.0).map_err(|_| IntersectError::NonTransverse(location))?;
            (s, transversality(tl, tk))
        } else if t == 0.0 && u == 0.0 {
            return Err(IntersectError::SharedVertex(location));
        } else if t == 0.0 {
            // vertex of L lying inside a segment of K
            let prev = path_vertex(l, h.i as isize - 1);
            let next = p2;
            let sp = orient(q1, q2, prev);
            let sn = orient(q1, q2, next);
            if sp * sn >= 0.0 {
                return Err(IntersectError::NonTransverse(location));
            }
            let tl_prev = l.tangent((h.i + l.segment_count() - 1) % l.segment_count());
            let sign = if sn > 0.0 { -1 } else { 1 };
            (sign, transversality(tl, tk).min(transversality(tl_prev, tk)))
        } else {
            // vertex of K lying inside a segment of L
            let prev = shift(path_vertex(k, h.j as isize - 1), kshift);
            let next = q2;
            let sp = orient(p1, p2, prev);
            let sn = orient(p1, p2, next);
            if sp * sn >= 0.0 {
                return Err(IntersectError::NonTransverse(location));
            }
            let tk_prev = k.tangent((h.j + k.segment_count() - 1) % k.segment_count());
            let sign = if sn > 0.0 { 1 } else { -1 };
            (sign, transversality(tl, tk).min(transversality(tl, tk_prev)))
        };
        if angle < opts.angle_tol {
            return Err(IntersectError::NonTransverse(location));
        }
        let crossing_angle = angle_between(tl, tk);
        points.push(IntersectionPoint {
            location,
            param_l,
            param_k,
            sign,
            crossing_angle,
        });
    }
    boundary.sort_by(|a, b| a.param_l.total_cmp(&b.param_l).then(a.param_k.total_cmp(&b.param_k)));
    Ok(IntersectionPattern::from_points(
        surface,
        points,
        l.is_closed(),
        k.is_closed(),
        boundary,
    ))
}

/// Whether two curves share any point at all (transverse or not).
pub fn curves_meet(a: &Curve, b: &Curve) -> bool {
    !segment_hits(a, b, false).is_empty()
}

/// Classify a permutation given as `sigma[k_position] = l_position`.
pub fn classify_sigma(sigma: &[usize], circular: bool) -> OrderClass {
    let n = sigma.len();
    if sigma.iter().enumerate().all(|(i, &s)| s == i) {
        return OrderClass::MonotoneIncreasing;
    }
    if circular && sigma.iter().enumerate().all(|(i, &s)| s == (sigma[0] + i) % n) {
        return OrderClass::CircularlyMonotone;
    }
    if sigma.iter().enumerate().all(|(i, &s)| s == n - 1 - i) {
        return OrderClass::MonotoneDecreasing;
    }
    OrderClass::NonMonotone
}

pub fn order_permutation(pattern: &IntersectionPattern) -> (Vec<usize>, OrderClass) {
    let class = classify_sigma(&pattern.sigma, pattern.circular_l || pattern.circular_k);
    (pattern.sigma.clone(), class)
}

impl IntersectionPattern {
    pub fn from_points(
        surface: Surface,
        mut points: Vec<IntersectionPoint>,
        circular_l: bool,
        circular_k: bool,
        boundary: Vec<BoundaryContact>,
    ) -> IntersectionPattern {
        points.sort_by(|a, b| a.param_l.total_cmp(&b.param_l).then(a.param_k.total_cmp(&b.param_k)));
        let order_l: Vec<usize> = (0..points.len()).collect();
        let mut order_k = order_l.clone();
        order_k.sort_by(|&a, &b| points[a].param_k.total_cmp(&points[b].param_k).then(a.cmp(&b)));
        let sigma = order_k.clone();
        IntersectionPattern {
            surface,
            points,
            order_l,
            order_k,
            sigma,
            circular_l,
            circular_k,
            boundary,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Position of each point in K-order.
    pub fn k_positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.points.len()];
        for (p, &idx) in self.order_k.iter().enumerate() {
            pos[idx] = p;
        }
        pos
    }

    /// The sub-pattern formed by the given point indices.
    pub fn restrict(&self, indices: &[usize]) -> IntersectionPattern {
        let pts = indices.iter().map(|&i| self.points[i]).collect();
        IntersectionPattern::from_points(self.surface, pts, self.circular_l, self.circular_k, Vec::new())
    }

    /// The pattern seen with the roles of the two curves exchanged.
    pub fn swapped(&self) -> IntersectionPattern {
        let pts = self
            .points
            .iter()
            .map(|p| IntersectionPoint {
                param_l: p.param_k,
                param_k: p.param_l,
                sign: -p.sign,
                ..*p
            })
            .collect();
        let boundary = self
            .boundary
            .iter()
            .map(|b| BoundaryContact {
                param_l: b.param_k,
                param_k: b.param_l,
                ..*b
            })
            .collect();
        IntersectionPattern::from_points(self.surface, pts, self.circular_k, self.circular_l, boundary)
    }
}
