//! Snake configurations in an intersection pattern, the coverage verdict,
//! and the two local oracles that rule out fixed-loop explanations of a
//! crossing: order preservation and the sign of the linearized twist.

use crate::curve::{Curve, CurveError};
use crate::flow::{chart_diff, jacobian, FlowError, PeriodicOrbit, SurfaceMap};
use crate::geometry::{point_segment_distance, Point, Surface};
use crate::intersect::{classify_sigma, IntersectionPattern, DEFAULT_BOUNDARY_MARGIN};
use crate::segment::Vec2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_ISOLATION: f64 = 1e-4;
pub const FIXED_TOL: f64 = 1e-6;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Disagreement between the `10h` and `h` differentials above which the
/// Richardson-extrapolated differential is used instead.
pub const FD_DISAGREEMENT: f64 = 1e-3;
pub const ALPHA_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObstructionError {
    #[error("point is not fixed: displacement {0:e}")]
    NotFixed(f64),
    #[error("loop tangent vector is degenerate")]
    DegenerateBasis,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Order pattern of the three L-ranks read in K-order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermType {
    /// (3,2,1): K meets the three points in reverse L-order.
    Reversed,
    /// (2,1,3) or (3,1,2).
    MiddleFirst,
    /// (1,3,2) or (2,3,1).
    MiddleLast,
}

impl PermType {
    fn of(perm: [usize; 3]) -> Option<PermType> {
        match perm {
            [3, 2, 1] => Some(PermType::Reversed),
            [2, 1, 3] | [3, 1, 2] => Some(PermType::MiddleFirst),
            [1, 3, 2] | [2, 3, 1] => Some(PermType::MiddleLast),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnakeTriple {
    /// Pattern indices in K-order.
    pub indices: [usize; 3],
    pub signs: [i8; 3],
    /// 1-based L-ranks of the three points (within the triple) in K-order.
    pub perm: [usize; 3],
    pub perm_type: PermType,
    pub isolation_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FullyObstructed,
    PartiallyObstructed,
    Unobstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionReport {
    pub triples: Vec<SnakeTriple>,
    pub uncovered: Vec<usize>,
    pub boundary_excluded: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderVerdict {
    ConsistentWithFixedPoints,
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnakeOptions {
    pub boundary_margin: f64,
    pub min_isolation: f64,
}

impl Default for SnakeOptions {
    fn default() -> Self {
        SnakeOptions {
            boundary_margin: DEFAULT_BOUNDARY_MARGIN,
            min_isolation: MIN_ISOLATION,
        }
    }
}

/// Necessary condition for every crossing to lie on a loop of fixed points:
/// the crossings are met in the same (possibly cyclic) order along both curves.
pub fn order_preservation_oracle(pattern: &IntersectionPattern) -> OrderVerdict {
    let class = classify_sigma(&pattern.sigma, pattern.circular_l || pattern.circular_k);
    if class.preserves_order() {
        OrderVerdict::ConsistentWithFixedPoints
    } else {
        OrderVerdict::Inconsistent
    }
}

/// Distance on the surface from `q` to a chart/cover polyline.
pub(crate) fn poly_point_dist(surface: Surface, poly: &[Vec2], q: Vec2) -> f64 {
    if poly.len() == 1 {
        let shifts = match surface {
            Surface::Disk => 0.0,
            Surface::Annulus => (poly[0][0] - q[0]).round(),
        };
        return (poly[0][0] - q[0] - shifts).hypot(poly[0][1] - q[1]);
    }
    // segments whose bounding box is already farther than the best are skipped
    let dist = |q: Vec2, mut best: f64| -> f64 {
        for w in poly.windows(2) {
            let dx = (w[0][0].min(w[1][0]) - q[0]).max(q[0] - w[0][0].max(w[1][0])).max(0.0);
            let dy = (w[0][1].min(w[1][1]) - q[1]).max(q[1] - w[0][1].max(w[1][1])).max(0.0);
            if dx >= best || dy >= best {
                continue;
            }
            best = best.min(point_segment_distance(q, w[0], w[1]));
        }
        best
    };
    match surface {
        Surface::Disk => dist(q, f64::INFINITY),
        Surface::Annulus => {
            let lo = poly.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = poly.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            let k0 = (lo - 1.0 - q[0]).floor() as i64;
            let k1 = (hi + 1.0 - q[0]).ceil() as i64;
            (k0..=k1).fold(f64::INFINITY, |best, k| dist([q[0] + k as f64, q[1]], best))
        }
    }
}

/// Distance between two disjoint polylines.
fn poly_poly_dist(surface: Surface, a: &[Vec2], b: &[Vec2]) -> f64 {
    let ab = b
        .iter()
        .map(|&q| poly_point_dist(surface, a, q))
        .fold(f64::INFINITY, f64::min);
    let ba = a
        .iter()
        .map(|&q| poly_point_dist(surface, b, q))
        .fold(f64::INFINITY, f64::min);
    ab.min(ba)
}

fn boundary_clearance(surface: Surface, poly: &[Vec2]) -> f64 {
    poly.iter()
        .map(|p| match surface {
            Surface::Annulus => p[1].min(1.0 - p[1]),
            Surface::Disk => 1.0 - p[0].hypot(p[1]),
        })
        .fold(f64::INFINITY, f64::min)
}

struct Candidate {
    triple: SnakeTriple,
    hull: Vec<Vec<Vec2>>,
    /// Half the clearance to other crossings and to the collar.
    local_radius: f64,
}

fn hull_arcs(l: &Curve, k: &Curve, l_params: [f64; 3], k_params: [f64; 3]) -> Result<Vec<Vec<Vec2>>, CurveError> {
    Ok(vec![
        l.arc_chart(l_params[0], l_params[1])?,
        l.arc_chart(l_params[1], l_params[2])?,
        k.arc_chart(k_params[0], k_params[1])?,
        k.arc_chart(k_params[1], k_params[2])?,
    ])
}

/// Snake triples, greedily matched in K-order: three crossings consecutive
/// along both curves, with alternating signs, an order that no family of
/// fixed points can produce, and a neighbourhood free of other crossings,
/// of other triples and of the boundary collar.
pub fn find_snake_triples(
    pattern: &IntersectionPattern,
    l: &Curve,
    k: &Curve,
    opts: &SnakeOptions,
) -> Vec<SnakeTriple> {
    let n = pattern.len();
    if n < 3 {
        return Vec::new();
    }
    let surface = pattern.surface;
    let mut candidates: Vec<Candidate> = Vec::new();
    let starts = if pattern.circular_k { n } else { n - 2 };
    let mut used = vec![false; n];
    let mut p = 0;
    while p < starts {
        let idx = [
            pattern.order_k[p],
            pattern.order_k[(p + 1) % n],
            pattern.order_k[(p + 2) % n],
        ];
        if idx.iter().any(|&i| used[i]) {
            p += 1;
            continue;
        }
        match candidate(pattern, l, k, idx, opts) {
            Some(c) => {
                for &i in &idx {
                    used[i] = true;
                }
                candidates.push(c);
                p += 3;
            }
            None => p += 1,
        }
    }
    // separation between triples; rejecting one can only enlarge the others
    loop {
        let mut worst: Option<(usize, f64)> = None;
        let radii: Vec<f64> = (0..candidates.len())
            .map(|a| {
                let mut r = candidates[a].local_radius;
                for b in 0..candidates.len() {
                    if a == b {
                        continue;
                    }
                    for ha in &candidates[a].hull {
                        for hb in &candidates[b].hull {
                            r = r.min(0.5 * poly_poly_dist(surface, ha, hb));
                        }
                    }
                }
                r
            })
            .collect();
        for (a, &r) in radii.iter().enumerate() {
            if r < opts.min_isolation && worst.is_none_or(|(_, w)| r < w) {
                worst = Some((a, r));
            }
        }
        match worst {
            Some((a, _)) => {
                candidates.remove(a);
            }
            None => {
                return candidates
                    .into_iter()
                    .zip(radii)
                    .map(|(mut c, r)| {
                        c.triple.isolation_radius = r;
                        c.triple
                    })
                    .collect();
            }
        }
    }
}

fn candidate(
    pattern: &IntersectionPattern,
    l: &Curve,
    k: &Curve,
    idx: [usize; 3],
    opts: &SnakeOptions,
) -> Option<Candidate> {
    let n = pattern.len();
    // points are stored in L-order, so indices are L-positions
    let mut lpos = idx;
    lpos.sort_unstable();
    let l_start = if lpos[1] == lpos[0] + 1 && lpos[2] == lpos[0] + 2 {
        lpos[0]
    } else if pattern.circular_l && n >= 3 {
        // circularly consecutive: {n−2, n−1, 0} or {n−1, 0, 1}
        if lpos == [0, n - 2, n - 1] {
            n - 2
        } else if lpos == [0, 1, n - 1] {
            n - 1
        } else {
            return None;
        }
    } else {
        return None;
    };
    let l_cyc = [l_start, (l_start + 1) % n, (l_start + 2) % n];
    let signs = idx.map(|i| pattern.points[i].sign);
    if !(signs[0] == -signs[1] && signs[1] == -signs[2] && signs[0] != 0) {
        return None;
    }
    let sub = pattern.restrict(&idx);
    if order_preservation_oracle(&sub) != OrderVerdict::Inconsistent {
        return None;
    }
    let perm = idx.map(|i| l_cyc.iter().position(|&j| j == i).unwrap() + 1);
    let perm_type = PermType::of(perm)?;
    let l_params = l_cyc.map(|i| pattern.points[i].param_l);
    let k_params = idx.map(|i| pattern.points[i].param_k);
    let hull = hull_arcs(l, k, l_params, k_params).ok()?;
    let mut clear = hull
        .iter()
        .map(|h| boundary_clearance(pattern.surface, h) - opts.boundary_margin)
        .fold(f64::INFINITY, f64::min);
    for (j, q) in pattern.points.iter().enumerate() {
        if idx.contains(&j) {
            continue;
        }
        for h in &hull {
            clear = clear.min(poly_point_dist(pattern.surface, h, [q.location.x, q.location.y]));
        }
    }
    let local_radius = 0.5 * clear;
    if local_radius < opts.min_isolation {
        return None;
    }
    Some(Candidate {
        triple: SnakeTriple {
            indices: idx,
            signs,
            perm,
            perm_type,
            isolation_radius: local_radius,
        },
        hull,
        local_radius,
    })
}

/// Whether the triples cover every interior crossing. A pattern without
/// crossings gives nothing to obstruct and is reported unobstructed.
pub fn coverage_verdict(pattern: &IntersectionPattern, triples: &[SnakeTriple]) -> ObstructionReport {
    let mut covered = vec![false; pattern.len()];
    for t in triples {
        for &i in &t.indices {
            covered[i] = true;
        }
    }
    let uncovered: Vec<usize> = (0..pattern.len()).filter(|&i| !covered[i]).collect();
    let verdict = if triples.is_empty() {
        Verdict::Unobstructed
    } else if uncovered.is_empty() {
        Verdict::FullyObstructed
    } else {
        Verdict::PartiallyObstructed
    };
    ObstructionReport {
        triples: triples.to_vec(),
        uncovered,
        boundary_excluded: pattern.boundary.len(),
        verdict,
    }
}

pub fn obstruct(pattern: &IntersectionPattern, l: &Curve, k: &Curve, opts: &SnakeOptions) -> ObstructionReport {
    coverage_verdict(pattern, &find_snake_triples(pattern, l, k, opts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearizationResult {
    /// Differential in the basis `(v_c, v_γ)`.
    pub matrix: [[f64; 2]; 2],
    pub alpha: f64,
    pub sign: i8,
    pub fd_step: f64,
    /// `‖matrix − [[1, α], [0, 1]]‖∞`.
    pub residual: f64,
    pub richardson: bool,
}

/// Linearization of a map at a fixed point, in the positively oriented
/// orthonormal basis `(v_c, v_γ)` with `v_γ` the quarter-turn of `v_c`.
/// For a point on a loop of fixed points the matrix is `[[1, α], [0, 1]]`.
pub fn linearization_sign(
    map: &dyn SurfaceMap,
    x: Point,
    v_c: Vec2,
    fd_step: f64,
) -> Result<LinearizationResult, ObstructionError> {
    let len = v_c[0].hypot(v_c[1]);
    if !(len > 1e-12 && len.is_finite()) {
        return Err(ObstructionError::DegenerateBasis);
    }
    let vc = [v_c[0] / len, v_c[1] / len];
    let vg = [-vc[1], vc[0]];
    let p = [x.x, x.y];
    let d = chart_diff(map.surface(), p, map.apply(p)?);
    let off = d[0].hypot(d[1]);
    if off > FIXED_TOL {
        return Err(ObstructionError::NotFixed(off));
    }
    let j_h = jacobian(map, p, fd_step)?;
    let j_coarse = jacobian(map, p, 10.0 * fd_step)?;
    let gap = (0..2)
        .flat_map(|r| (0..2).map(move |c| (r, c)))
        .map(|(r, c)| (j_h[r][c] - j_coarse[r][c]).abs())
        .fold(0.0, f64::max);
    let (j, richardson) = if gap > FD_DISAGREEMENT {
        let j_half = jacobian(map, p, 0.5 * fd_step)?;
        let mut j = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                j[r][c] = (4.0 * j_half[r][c] - j_h[r][c]) / 3.0;
            }
        }
        (j, true)
    } else {
        (j_h, false)
    };
    // M = Bᵀ J B for the orthonormal B = [v_c v_γ]
    let jb = |v: Vec2| [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]];
    let dot = |a: Vec2, b: Vec2| a[0] * b[0] + a[1] * b[1];
    let (jc, jg) = (jb(vc), jb(vg));
    let m = [[dot(vc, jc), dot(vc, jg)], [dot(vg, jc), dot(vg, jg)]];
    let alpha = m[0][1];
    let residual = (m[0][0] - 1.0).abs().max(m[1][0].abs()).max((m[1][1] - 1.0).abs());
    let sign = if alpha.abs() > ALPHA_TOL {
        alpha.signum() as i8
    } else {
        0
    };
    Ok(LinearizationResult {
        matrix: m,
        alpha,
        sign,
        fd_step,
        residual,
        richardson,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignCheck {
    Constant(i8),
    /// Samples whose sign is zero or differs from the first sample's.
    Violated(Vec<Point>),
}

/// Linearization signs at `n_samples` points spread along a loop of fixed
/// points; the tangent at each sample is taken from the neighbouring trace
/// points in the orbit's direction of motion.
pub fn sign_constancy_check(
    map: &dyn SurfaceMap,
    orbit: &PeriodicOrbit,
    n_samples: usize,
) -> Result<SignCheck, ObstructionError> {
    let m = orbit.trace.len();
    if m < 3 || n_samples == 0 {
        return Err(ObstructionError::DegenerateBasis);
    }
    let surface = map.surface();
    let mut signs = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let at = i * m / n_samples;
        let prev = orbit.trace[(at + m - 1) % m];
        let next = orbit.trace[(at + 1) % m];
        let v = chart_diff(surface, [prev.x, prev.y], [next.x, next.y]);
        let x = orbit.trace[at];
        signs.push((x, linearization_sign(map, x, v, DEFAULT_FD_STEP)?.sign));
    }
    let first = signs[0].1;
    let bad: Vec<Point> = signs
        .iter()
        .filter(|(_, s)| *s == 0 || *s != first)
        .map(|(p, _)| *p)
        .collect();
    Ok(if bad.is_empty() {
        SignCheck::Constant(first)
    } else {
        SignCheck::Violated(bad)
    })
}
