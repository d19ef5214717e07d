//! Local snake surgery on the image curve: each transverse crossing of
//! `K` with `L` is replaced by a square wave crossing `L` three times.
//!
//! In the skew frame `X + u·t_L + v·d`, with `t_L` the unit tangent of `L`
//! and `d` the unit chord of the removed piece of `K`, the wave runs
//!
//! ```text
//! (0,−c) → (w/2,−a) → (w/2,a) → (0,a) → (0,−a) → (−w/2,−a) → (−w/2,a) → (0,c)
//! ```
//!
//! with `c = 2a`. It crosses `L` at `u = w/2, 0, −w/2` with signs
//! `(σ, −σ, σ)`, so the three crossings are met along `K` in the reverse of
//! their order along `L`.

use crate::curve::{Curve, CurveError};
use crate::geometry::{normalize_point, Point, Surface};
use crate::intersect::{intersect_curves, IntersectError, IntersectOptions, IntersectionPattern, IntersectionPoint};
use crate::obstruction::{obstruct, poly_point_dist, ObstructionReport, SnakeOptions, Verdict, MIN_ISOLATION};
use crate::segment::Vec2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_WIDTH: f64 = 0.02;
pub const DEFAULT_AMPLITUDE: f64 = 0.01;
pub const MAX_SHRINKS: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SnakeError {
    #[error("not enough room for a snake at {0:?}")]
    Crowded(Point),
    #[error("snake insertion produced a non-simple curve: {0}")]
    NotSimple(CurveError),
    #[error("the curves have no interior crossings")]
    NoCrossings,
    #[error("perturbed pair failed verification: {0}")]
    Unverified(String),
    #[error("invalid snake parameters")]
    BadParams,
    #[error(transparent)]
    Intersect(#[from] IntersectError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnakeParams {
    /// Extent along `L`.
    pub w: f64,
    /// Extent across `L`.
    pub a: f64,
    /// Room around each crossing; `None` uses half the smallest distance
    /// between crossings.
    #[serde(default)]
    pub clearance: Option<f64>,
    #[serde(default = "default_margin")]
    pub boundary_margin: f64,
}

fn default_margin() -> f64 {
    crate::intersect::DEFAULT_BOUNDARY_MARGIN
}

impl Default for SnakeParams {
    fn default() -> Self {
        SnakeParams {
            w: DEFAULT_WIDTH,
            a: DEFAULT_AMPLITUDE,
            clearance: None,
            boundary_margin: default_margin(),
        }
    }
}

impl SnakeParams {
    fn halved(self) -> Self {
        SnakeParams {
            w: self.w / 2.0,
            a: self.a / 2.0,
            ..self
        }
    }
}

/// Half the smallest pairwise distance between crossings (infinite for one).
pub fn default_clearance(pattern: &IntersectionPattern) -> f64 {
    let pts = &pattern.points;
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.min(pattern.surface.distance(pts[i].location, pts[j].location));
        }
    }
    0.5 * best
}

struct Cut {
    lo: f64,
    hi: f64,
    wave: Vec<Vec2>,
}

fn plan_cut(
    k: &Curve,
    at: &IntersectionPoint,
    l: &Curve,
    params: &SnakeParams,
    clearance: f64,
) -> Result<Cut, SnakeError> {
    let SnakeParams { w, a, .. } = *params;
    if !(w > 0.0 && a > 0.0 && w.is_finite() && a.is_finite()) {
        return Err(SnakeError::BadParams);
    }
    let crowded = || SnakeError::Crowded(at.location);
    if w >= clearance / 2.0 {
        return Err(crowded());
    }
    let c = 2.0 * a;
    let dp = c / k.length();
    let (lo, hi) = (at.param_k - dp, at.param_k + dp);
    if !k.is_closed() && (lo <= 0.0 || hi >= 1.0) {
        return Err(crowded());
    }
    let x = k.chart_at(at.param_k);
    let e = k.chart_at(lo.rem_euclid(1.0));
    let f = k.chart_at(hi.rem_euclid(1.0));
    // same sheet as x: the cut is short, so unwrap θ against x
    let unwrap = |p: Vec2| match k.surface() {
        Surface::Annulus => [x[0] + crate::geometry::wrap_delta(p[0] - x[0]), p[1]],
        Surface::Disk => p,
    };
    let (e, f) = (unwrap(e), unwrap(f));
    let chord = [f[0] - e[0], f[1] - e[1]];
    let len = chord[0].hypot(chord[1]);
    if len <= 0.0 {
        return Err(crowded());
    }
    let d = [chord[0] / len, chord[1] / len];
    let (seg, _) = l.locate(at.param_l);
    let t = l.tangent(seg);
    let det = t[0] * d[1] - t[1] * d[0];
    if det.signum() as i8 != at.sign {
        return Err(crowded());
    }
    let frame = |u: f64, v: f64| [x[0] + u * t[0] + v * d[0], x[1] + u * t[1] + v * d[1]];
    let h = w / 2.0;
    let wave = vec![
        frame(h, -a),
        frame(h, a),
        frame(0.0, a),
        frame(0.0, -a),
        frame(-h, -a),
        frame(-h, a),
    ];
    let surface = k.surface();
    let need = params.boundary_margin + 2.0 * MIN_ISOLATION;
    for p in wave.iter().chain([&e, &f]) {
        let q = Point::new(p[0], p[1]);
        let room = match surface {
            Surface::Annulus => q.y.min(1.0 - q.y),
            Surface::Disk => 1.0 - q.norm(),
        };
        if room < need {
            return Err(crowded());
        }
    }
    Ok(Cut { lo, hi, wave })
}

fn to_point(surface: Surface, p: Vec2) -> Result<Point, SnakeError> {
    normalize_point(surface, p[0], p[1]).map_err(|_| SnakeError::Crowded(Point::new(p[0], p[1])))
}

/// Rebuild `K` with each cut interval replaced by its wave.
fn splice(k: &Curve, mut cuts: Vec<Cut>) -> Result<Curve, SnakeError> {
    let surface = k.surface();
    cuts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for pair in cuts.windows(2) {
        if pair[0].hi >= pair[1].lo {
            return Err(SnakeError::Crowded(k.point_at(pair[1].lo.rem_euclid(1.0))));
        }
    }
    let mut chart: Vec<Vec2> = Vec::new();
    let closed = k.is_closed();
    let arc = |a: f64, b: f64| {
        let (a, b) = if closed {
            (a.rem_euclid(1.0), b.rem_euclid(1.0))
        } else {
            (a, b)
        };
        k.arc_chart(a, b).map_err(SnakeError::NotSimple)
    };
    if k.is_closed() {
        let m = cuts.len();
        if m > 1 && cuts[m - 1].hi - 1.0 >= cuts[0].lo {
            return Err(SnakeError::Crowded(k.point_at(cuts[0].lo.rem_euclid(1.0))));
        }
        for i in 0..m {
            let next = &cuts[(i + 1) % m];
            chart.extend(arc(cuts[i].hi, next.lo)?);
            chart.extend(next.wave.iter().copied());
        }
    } else {
        let mut from = 0.0;
        for c in &cuts {
            chart.extend(arc(from, c.lo)?);
            chart.extend(c.wave.iter().copied());
            from = c.hi;
        }
        chart.extend(arc(from, 1.0)?);
    }
    let mut vertices: Vec<Point> = Vec::with_capacity(chart.len());
    for p in chart {
        let q = to_point(surface, p)?;
        if vertices.last().is_none_or(|last| surface.distance(*last, q) > 1e-14) {
            vertices.push(q);
        }
    }
    if k.is_closed() && vertices.len() > 1 && surface.distance(vertices[0], *vertices.last().unwrap()) <= 1e-14 {
        vertices.pop();
    }
    Curve::new(surface, vertices, k.is_closed()).map_err(SnakeError::NotSimple)
}

/// Replace the arc of `K` around one crossing with a snake.
pub fn insert_snake(k: &Curve, at: &IntersectionPoint, l: &Curve, params: &SnakeParams) -> Result<Curve, SnakeError> {
    let clearance = params.clearance.unwrap_or(f64::INFINITY);
    splice(k, vec![plan_cut(k, at, l, params, clearance)?])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub curve: Curve,
    pub report: ObstructionReport,
    pub pattern: IntersectionPattern,
    /// Parameters actually used (after any shrinking).
    pub params: SnakeParams,
}

fn perturb_once(
    l: &Curve,
    k: &Curve,
    base: &IntersectionPattern,
    params: &SnakeParams,
    opts: &IntersectOptions,
) -> Result<Perturbation, SnakeError> {
    let clearance = params.clearance.unwrap_or_else(|| default_clearance(base));
    let cuts = base
        .points
        .iter()
        .map(|p| plan_cut(k, p, l, params, clearance))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = splice(k, cuts)?;
    let pattern = intersect_curves(l, &curve, opts)?;
    let n = base.len();
    if pattern.len() != 3 * n {
        return Err(SnakeError::Unverified(format!(
            "{} crossings, expected {}",
            pattern.len(),
            3 * n
        )));
    }
    let report = obstruct(
        &pattern,
        l,
        &curve,
        &SnakeOptions {
            boundary_margin: opts.boundary_margin,
            ..SnakeOptions::default()
        },
    );
    if report.verdict != Verdict::FullyObstructed || report.triples.len() != n {
        return Err(SnakeError::Unverified(format!(
            "{} triples, verdict {:?}",
            report.triples.len(),
            report.verdict
        )));
    }
    Ok(Perturbation {
        curve,
        report,
        pattern,
        params: *params,
    })
}

/// Snake every interior crossing of `(L, K)`. With `auto_shrink`, failures
/// are retried with `(w, a)` halved, up to [`MAX_SHRINKS`] times.
pub fn perturb_all(
    l: &Curve,
    k: &Curve,
    params: &SnakeParams,
    opts: &IntersectOptions,
    auto_shrink: bool,
) -> Result<Perturbation, SnakeError> {
    let base = intersect_curves(l, k, opts)?;
    if base.is_empty() {
        return Err(SnakeError::NoCrossings);
    }
    let mut p = *params;
    let mut attempt = 0;
    loop {
        match perturb_once(l, k, &base, &p, opts) {
            Ok(done) => return Ok(done),
            Err(SnakeError::Crowded(_) | SnakeError::NotSimple(_) | SnakeError::Unverified(_))
                if auto_shrink && attempt < MAX_SHRINKS =>
            {
                attempt += 1;
                p = p.halved();
            }
            Err(e) => return Err(e),
        }
    }
}

/// Hausdorff distance between two curves, sampling each at spacing `eps`
/// against the exact polyline of the other (cover distance on the annulus).
pub fn hausdorff(a: &Curve, b: &Curve, eps: f64) -> f64 {
    let surface = a.surface();
    let one_way = |from: &Curve, to: &Curve| {
        from.resample(eps)
            .path()
            .iter()
            .map(|&q| poly_point_dist(surface, to.path(), q))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}
