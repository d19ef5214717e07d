//! Segment/segment predicates on top of adaptive-precision orientation.

use robust::{orient2d, Coord};

/// Relative collinearity guard: an orientation is treated as zero when the
/// sine of the angle it measures falls below this value.
pub const COLLINEAR_EPS: f64 = 1e-12;

pub type Vec2 = [f64; 2];

/// Signed orientation of `c` with respect to the directed line `a → b`
/// (twice the triangle area), with the collinearity guard applied.
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let o = orient2d(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
    );
    let scale = (b[0] - a[0]).hypot(b[1] - a[1]) * (c[0] - a[0]).hypot(c[1] - a[1]);
    if o.abs() <= COLLINEAR_EPS * scale {
        0.0
    } else {
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentHit {
    None,
    /// A single common point at parameter `t` on the first segment and `u`
    /// on the second, both in `[0, 1]`.
    Point {
        t: f64,
        u: f64,
    },
    /// Collinear with a common sub-segment of positive length.
    Overlap,
}

fn bbox_disjoint(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    p1[0].max(p2[0]) < q1[0].min(q2[0])
        || q1[0].max(q2[0]) < p1[0].min(p2[0])
        || p1[1].max(p2[1]) < q1[1].min(q2[1])
        || q1[1].max(q2[1]) < p1[1].min(p2[1])
}

pub fn intersect_segments(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> SegmentHit {
    if bbox_disjoint(p1, p2, q1, q2) {
        return SegmentHit::None;
    }
    let r1 = orient(p1, p2, q1);
    let r2 = orient(p1, p2, q2);
    let r3 = orient(q1, q2, p1);
    let r4 = orient(q1, q2, p2);
    if (r1 == 0.0 && r2 == 0.0) || (r3 == 0.0 && r4 == 0.0) {
        return collinear_hit(p1, p2, q1, q2);
    }
    if r1 * r2 > 0.0 || r3 * r4 > 0.0 {
        return SegmentHit::None;
    }
    let t = if r3 == 0.0 {
        0.0
    } else if r4 == 0.0 {
        1.0
    } else {
        r3 / (r3 - r4)
    };
    let u = if r1 == 0.0 {
        0.0
    } else if r2 == 0.0 {
        1.0
    } else {
        r1 / (r1 - r2)
    };
    SegmentHit::Point { t, u }
}

fn collinear_hit(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> SegmentHit {
    let d = [p2[0] - p1[0], p2[1] - p1[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return SegmentHit::None;
    }
    let proj = |q: Vec2| ((q[0] - p1[0]) * d[0] + (q[1] - p1[1]) * d[1]) / len2;
    let (a, b) = (proj(q1), proj(q2));
    let lo = a.min(b).max(0.0);
    let hi = a.max(b).min(1.0);
    if hi < lo {
        SegmentHit::None
    } else if hi > lo {
        SegmentHit::Overlap
    } else {
        // single touching point at p-parameter `lo`
        let u = if a == b { 0.0 } else { (lo - a) / (b - a) };
        SegmentHit::Point { t: lo, u }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proper_crossing() {
        let hit = intersect_segments([0.0, 0.0], [2.0, 0.0], [1.0, -1.0], [1.0, 3.0]);
        assert_eq!(hit, SegmentHit::Point { t: 0.5, u: 0.25 });
    }

    #[test]
    fn endpoint_touch() {
        let hit = intersect_segments([0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [0.5, 1.0]);
        assert_eq!(hit, SegmentHit::Point { t: 0.5, u: 0.0 });
    }

    #[test]
    fn collinear_cases() {
        let o = intersect_segments([0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [2.0, 0.0]);
        assert_eq!(o, SegmentHit::Overlap);
        let touch = intersect_segments([0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]);
        assert_eq!(touch, SegmentHit::Point { t: 1.0, u: 0.0 });
        let miss = intersect_segments([0.0, 0.0], [1.0, 0.0], [1.5, 0.0], [2.0, 0.0]);
        assert_eq!(miss, SegmentHit::None);
    }

    #[test]
    fn near_collinear_is_guarded() {
        assert_eq!(orient([0.0, 0.0], [0.0, 1.0], [1e-16, 1.0 / 3.0]), 0.0);
        assert!(orient([0.0, 0.0], [0.0, 1.0], [1e-6, 0.5]) < 0.0);
    }
}
