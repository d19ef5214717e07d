//! Oriented simple polylines on a surface: the curves `L` and `g(L)`.
//!
//! A curve is parameterized by normalized arclength in `[0, 1]`, measured in
//! chart coordinates (cover coordinates on the annulus). For closed curves
//! the closing segment from the last vertex back to the first is implicit.

use crate::geometry::{lift_path, normalize_point, wrap_unit, CoverPoint, GeometryError, Point, Surface};
use crate::segment::{intersect_segments, SegmentHit, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("a curve needs at least {0} vertices")]
    TooFewVertices(usize),
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("curve is not simple: segments {0} and {1} meet")]
    NotSimple(usize, usize),
    #[error("boundary violation at vertex {0}")]
    BoundaryViolation(usize),
    #[error("vertex {index}: {source}")]
    Vertex {
        index: usize,
        #[source]
        source: GeometryError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("bad arc parameters ({0}, {1})")]
    BadParams(f64, f64),
}

/// Wire form of a curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveData {
    pub surface: Surface,
    pub closed: bool,
    pub vertices: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveData", into = "CurveData")]
pub struct Curve {
    surface: Surface,
    closed: bool,
    vertices: Vec<Point>,
    /// Chart polyline (lifted on the annulus); for closed curves the first
    /// vertex is repeated, shifted by the winding.
    path: Vec<Vec2>,
    cum: Vec<f64>,
}

impl TryFrom<CurveData> for Curve {
    type Error = CurveError;
    fn try_from(d: CurveData) -> Result<Self, CurveError> {
        Curve::new(d.surface, d.vertices, d.closed)
    }
}

impl From<Curve> for CurveData {
    fn from(c: Curve) -> Self {
        CurveData {
            surface: c.surface,
            closed: c.closed,
            vertices: c.vertices,
        }
    }
}

/// Continuous lift of an annulus curve to `ℝ × [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedCurve {
    pub points: Vec<CoverPoint>,
    /// θ̃-displacement between the ends of a closed curve; 0 for open curves.
    pub winding: i64,
}

impl LiftedCurve {
    pub fn shifted(&self, k: i64) -> LiftedCurve {
        LiftedCurve {
            points: self.points.iter().map(|p| p.shifted(k as f64)).collect(),
            winding: self.winding,
        }
    }
}

/// Range of integer θ-shifts `k` for which `[b_lo + k, b_hi + k]` can meet
/// `[a_lo, a_hi]`.
pub(crate) fn shift_range(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> std::ops::RangeInclusive<i64> {
    let tol = 1e-9;
    let lo = (a_lo - b_hi - tol).ceil() as i64;
    let hi = (a_hi - b_lo + tol).floor() as i64;
    lo..=hi
}

/// A hit between segment `i` of one curve and segment `j` of another, the
/// latter translated by `shift` in θ (always 0 on the disk).
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairHit {
    pub i: usize,
    pub j: usize,
    pub shift: i64,
    pub hit: SegmentHit,
}

/// Every non-empty segment/segment hit between `a` and `b` (all deck
/// translates on the annulus). With `same`, only pairs `i < j` are scanned.
pub(crate) fn segment_hits(a: &Curve, b: &Curve, same: bool) -> Vec<PairHit> {
    let mut out = Vec::new();
    let annulus = a.surface == Surface::Annulus;
    let bboxes_b: Vec<[f64; 4]> = (0..b.segment_count()).map(|j| b.segment_bbox(j)).collect();
    // bucket b-segments by their y (or s) extent
    let (y0, y1) = bboxes_b
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), bb| {
            (lo.min(bb[3]), hi.max(bb[2]))
        });
    let nb = bboxes_b.len().clamp(1, 4096);
    let scale = if y1 > y0 { nb as f64 / (y1 - y0) } else { 0.0 };
    let bucket = |y: f64| (((y - y0) * scale).floor().max(0.0) as usize).min(nb - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for (j, bb) in bboxes_b.iter().enumerate() {
        for cell in &mut buckets[bucket(bb[3])..=bucket(bb[2])] {
            cell.push(j);
        }
    }
    let mut candidates: Vec<usize> = Vec::new();
    for i in 0..a.segment_count() {
        let (p1, p2) = a.segment(i);
        let ba = a.segment_bbox(i);
        candidates.clear();
        if ba[2] < y0 || ba[3] > y1 {
            continue;
        }
        for cell in &buckets[bucket(ba[3])..=bucket(ba[2])] {
            candidates.extend(
                cell.iter()
                    .copied()
                    .filter(|&j| (!same || j > i) && bboxes_b[j][2] >= ba[3] && bboxes_b[j][3] <= ba[2]),
            );
        }
        candidates.sort_unstable();
        candidates.dedup();
        for &j in &candidates {
            let bb = &bboxes_b[j];
            let shifts = if annulus {
                shift_range(ba[0], ba[1], bb[0], bb[1])
            } else {
                0..=0
            };
            for k in shifts {
                let (q1, q2) = b.segment(j);
                let kf = k as f64;
                let q1 = [q1[0] + kf, q1[1]];
                let q2 = [q2[0] + kf, q2[1]];
                let hit = intersect_segments(p1, p2, q1, q2);
                if hit != SegmentHit::None {
                    out.push(PairHit { i, j, shift: k, hit });
                }
            }
        }
    }
    out
}

impl Curve {
    /// Validates and builds a curve; the standing assumptions are that the
    /// curve is simple and, if open, touches ∂Σ exactly at its endpoints.
    pub fn new(surface: Surface, vertices: Vec<Point>, closed: bool) -> Result<Curve, CurveError> {
        let min = if closed { 3 } else { 2 };
        if vertices.len() < min {
            return Err(CurveError::TooFewVertices(min));
        }
        let vertices = vertices
            .into_iter()
            .enumerate()
            .map(|(index, p)| normalize_point(surface, p.x, p.y).map_err(|source| CurveError::Vertex { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        let n = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            let on_boundary = surface.is_on_boundary(*v);
            let is_end = !closed && (i == 0 || i == n - 1);
            if on_boundary != is_end {
                return Err(CurveError::BoundaryViolation(i));
            }
        }
        let curve = Curve::from_parts(surface, vertices, closed)?;
        curve.check_simple()?;
        Ok(curve)
    }

    /// Builds the cached path without validation. Callers that construct
    /// curves internally use this and validate separately if needed.
    pub(crate) fn from_parts(surface: Surface, vertices: Vec<Point>, closed: bool) -> Result<Curve, CurveError> {
        let mut ring = vertices.clone();
        if closed {
            ring.push(vertices[0]);
        }
        let path: Vec<Vec2> = match surface {
            Surface::Annulus => lift_path(&ring)?.into_iter().map(|c| [c.theta, c.s]).collect(),
            Surface::Disk => ring.iter().map(|p| [p.x, p.y]).collect(),
        };
        let mut cum = Vec::with_capacity(path.len());
        cum.push(0.0);
        for w in path.windows(2) {
            let len = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            cum.push(cum.last().unwrap() + len);
        }
        for i in 1..path.len() {
            if cum[i] == cum[i - 1] {
                return Err(CurveError::DuplicateVertex(i - 1, i % vertices.len()));
            }
        }
        Ok(Curve {
            surface,
            closed,
            vertices,
            path,
            cum,
        })
    }

    fn check_simple(&self) -> Result<(), CurveError> {
        let m = self.segment_count();
        let w = self.winding() as i64;
        for h in segment_hits(self, self, true) {
            let (i, j) = (h.i, h.j);
            let shared = if j == i + 1 && h.shift == 0 {
                Some((1.0, 0.0))
            } else if self.closed && i == 0 && j == m - 1 && h.shift == -w {
                Some((0.0, 1.0))
            } else {
                None
            };
            let ok = match (shared, h.hit) {
                (Some(expect), SegmentHit::Point { t, u }) => (t, u) == expect,
                _ => false,
            };
            if !ok {
                return Err(CurveError::NotSimple(i, j));
            }
        }
        Ok(())
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Chart polyline; lifted on the annulus, closing vertex repeated.
    pub fn path(&self) -> &[Vec2] {
        &self.path
    }

    pub fn segment_count(&self) -> usize {
        self.path.len() - 1
    }

    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        (self.path[i], self.path[i + 1])
    }

    /// `[x_lo, x_hi, y_hi, y_lo]`
    fn segment_bbox(&self, i: usize) -> [f64; 4] {
        let (a, b) = self.segment(i);
        [a[0].min(b[0]), a[0].max(b[0]), a[1].max(b[1]), a[1].min(b[1])]
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.cum[i + 1] - self.cum[i]
    }

    /// Unit tangent of segment `i` in chart coordinates.
    pub fn tangent(&self, i: usize) -> Vec2 {
        let (a, b) = self.segment(i);
        let l = self.segment_length(i);
        [(b[0] - a[0]) / l, (b[1] - a[1]) / l]
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// θ̃-displacement around a closed annulus curve (0 otherwise).
    pub fn winding(&self) -> i32 {
        if self.closed && self.surface == Surface::Annulus {
            (self.path[self.path.len() - 1][0] - self.path[0][0]).round() as i32
        } else {
            0
        }
    }

    /// Normalized arclength of the point at `t ∈ [0, 1]` on segment `i`.
    pub fn param_of(&self, i: usize, t: f64) -> f64 {
        let p = (self.cum[i] + t * self.segment_length(i)) / self.length();
        p.clamp(0.0, 1.0)
    }

    /// Locate a parameter: `(segment, t)`.
    pub fn locate(&self, param: f64) -> (usize, f64) {
        let target = param.clamp(0.0, 1.0) * self.length();
        let m = self.segment_count();
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&target)) {
            Ok(k) => k.min(m - 1),
            Err(k) => (k - 1).min(m - 1),
        };
        let t = ((target - self.cum[i]) / self.segment_length(i)).clamp(0.0, 1.0);
        (i, t)
    }

    /// Chart/cover position at a parameter.
    pub fn chart_at(&self, param: f64) -> Vec2 {
        let (i, t) = self.locate(param);
        let (a, b) = self.segment(i);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    pub fn point_at(&self, param: f64) -> Point {
        self.wrap(self.chart_at(param))
    }

    pub(crate) fn wrap(&self, p: Vec2) -> Point {
        match self.surface {
            Surface::Annulus => Point::new(wrap_unit(p[0]), p[1]),
            Surface::Disk => Point::new(p[0], p[1]),
        }
    }

    /// Continuous lift with the first θ̃ in `[0, 1)`.
    pub fn lift(&self) -> LiftedCurve {
        let points = self.path.iter().map(|&[t, s]| CoverPoint::new(t, s)).collect();
        LiftedCurve {
            points,
            winding: self.winding() as i64,
        }
    }

    pub fn reversed(&self) -> Curve {
        let mut v = self.vertices.clone();
        if self.closed {
            v[1..].reverse();
        } else {
            v.reverse();
        }
        Curve::from_parts(self.surface, v, self.closed).expect("reversal keeps a valid curve valid")
    }

    /// Subdivide every segment uniformly so that no segment exceeds `eps`.
    /// Original vertices are kept.
    pub fn resample(&self, eps: f64) -> Curve {
        assert!(eps > 0.0, "resample step must be positive");
        let mut path: Vec<Vec2> = Vec::with_capacity(self.path.len());
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            let pieces = ((self.segment_length(i) / eps) - 1e-9).ceil().max(1.0) as usize;
            for k in 0..pieces {
                let t = k as f64 / pieces as f64;
                path.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        if !self.closed {
            path.push(*self.path.last().unwrap());
        }
        let vertices = path.iter().map(|&p| self.wrap(p)).collect();
        Curve::from_parts(self.surface, vertices, self.closed).expect("refinement keeps a valid curve valid")
    }

    /// The oriented sub-polyline from parameter `a` to `b`, as chart/cover
    /// coordinates, continuing through parameter 0 on closed curves when
    /// `a > b`.
    pub fn arc_chart(&self, a: f64, b: f64) -> Result<Vec<Vec2>, CurveError> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a == b || (!self.closed && a > b) {
            return Err(CurveError::BadParams(a, b));
        }
        let mut out = vec![self.chart_at(a)];
        let (ia, _) = self.locate(a);
        let (ib, _) = self.locate(b);
        let la = a * self.length();
        let lb = b * self.length();
        if a < b {
            for k in ia + 1..=ib {
                if self.cum[k] > la && self.cum[k] < lb {
                    out.push(self.path[k]);
                }
            }
            out.push(self.chart_at(b));
        } else {
            let m = self.segment_count();
            for k in ia + 1..=m {
                if self.cum[k] > la {
                    out.push(self.path[k]);
                }
            }
            // continue on the next sheet: the closing vertex sits at
            // path[m] = path[0] + winding
            let shift = self.path[m][0] - self.path[0][0];
            for k in 1..=ib {
                if self.cum[k] < lb {
                    out.push([self.path[k][0] + shift, self.path[k][1]]);
                }
            }
            let end = self.chart_at(b);
            out.push([end[0] + shift, end[1]]);
            if out.len() >= 2 && out[out.len() - 2] == out[out.len() - 1] {
                out.pop();
            }
        }
        Ok(out)
    }

    pub fn arc_between(&self, a: f64, b: f64) -> Result<Vec<Point>, CurveError> {
        Ok(self.arc_chart(a, b)?.into_iter().map(|p| self.wrap(p)).collect())
    }
}

/// The standing curve on each surface: `{0} × [0, 1]` on the annulus and the
/// horizontal diameter on the disk, oriented by increasing coordinate.
pub fn standard_curve(surface: Surface) -> Curve {
    let v = match surface {
        Surface::Annulus => vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0)],
        Surface::Disk => vec![Point::new(-1.0, 0.0), Point::new(1.0, 0.0)],
    };
    Curve::new(surface, v, false).expect("standard curve is valid")
}
