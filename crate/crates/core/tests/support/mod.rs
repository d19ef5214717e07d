//! Exact rational brute force for segment-pair crossings of dyadic polylines.
#![allow(dead_code)]

use curve_obstruction::{intersect_curves, Curve, IntersectOptions, Point, Surface};
use num::{BigInt, BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID: i64 = 4096;
const RADIUS: i64 = 2800;

type Q = BigRational;

#[derive(Debug)]
pub struct ExactPattern {
    pub signs: Vec<i8>,
    pub sigma: Vec<usize>,
}

fn cross(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [i64; 2], b: [i64; 2]) -> [i64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A polyline in integer grid units; closed curves repeat no vertex.
pub struct Poly {
    pub v: Vec<[i64; 2]>,
    pub closed: bool,
}

impl Poly {
    pub fn segments(&self) -> Vec<([i64; 2], [i64; 2])> {
        let mut s: Vec<_> = self.v.windows(2).map(|w| (w[0], w[1])).collect();
        if self.closed {
            s.push((self.v[self.v.len() - 1], self.v[0]));
        }
        s
    }

    pub fn curve(&self) -> Option<Curve> {
        let pts = self
            .v
            .iter()
            .map(|p| Point::new(p[0] as f64 / GRID as f64, p[1] as f64 / GRID as f64))
            .collect();
        Curve::new(Surface::Disk, pts, self.closed).ok()
    }
}

/// `None` when any segment pair touches other than at one interior point of
/// both segments.
pub fn exact(l: &Poly, k: &Poly) -> Option<ExactPattern> {
    let mut hits: Vec<(usize, Q, usize, Q, i8)> = Vec::new();
    for (i, &(p1, p2)) in l.segments().iter().enumerate() {
        for (j, &(q1, q2)) in k.segments().iter().enumerate() {
            let (r, s) = (sub(p2, p1), sub(q2, q1));
            let d = cross(r, s);
            let w = sub(q1, p1);
            if d == 0 {
                if cross(w, r) == 0 {
                    // collinear: any overlap or touch is degenerate
                    let dot = |v: [i64; 2]| v[0] * r[0] + v[1] * r[1];
                    let (a, b) = (dot(sub(q1, p1)), dot(sub(q2, p1)));
                    if a.max(b) >= 0 && a.min(b) <= dot(r) {
                        return None;
                    }
                }
                continue;
            }
            let t = q(cross(w, s), d);
            let u = q(cross(w, r), d);
            let zero = Q::zero();
            let one = q(1, 1);
            if t < zero || t > one || u < zero || u > one {
                continue;
            }
            if t.is_zero() || t == one || u.is_zero() || u == one {
                return None;
            }
            hits.push((i, t, j, u, if d > 0 { 1 } else { -1 }));
        }
    }
    hits.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut order_k: Vec<usize> = (0..hits.len()).collect();
    order_k.sort_by(|&a, &b| (hits[a].2, &hits[a].3).cmp(&(hits[b].2, &hits[b].3)));
    Some(ExactPattern {
        signs: hits.iter().map(|h| h.4).collect(),
        sigma: order_k,
    })
}

/// Arc monotone in `axis` (hence simple) from ∂D to ∂D through the axis
/// endpoints.
pub fn monotone_arc(rng: &mut ChaCha8Rng, axis: usize) -> Poly {
    let n = rng.gen_range(1..=8);
    let mut along: Vec<i64> = (0..n).map(|_| rng.gen_range(-RADIUS..=RADIUS) / 2).collect();
    along.sort_unstable();
    along.dedup();
    let mut v: Vec<[i64; 2]> = vec![[-GRID, 0]];
    v.extend(along.into_iter().map(|a| [a, rng.gen_range(-RADIUS..=RADIUS) / 2]));
    v.push([GRID, 0]);
    if rng.gen_bool(0.5) {
        v.reverse();
    }
    if axis == 1 {
        for p in &mut v {
            *p = [p[1], p[0]];
        }
    }
    Poly { v, closed: false }
}

/// Star-shaped loop about a random centre.
pub fn star_loop(rng: &mut ChaCha8Rng) -> Poly {
    let n = rng.gen_range(3..=10);
    let c = [rng.gen_range(-800..=800), rng.gen_range(-800..=800)];
    let mut ang: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    ang.sort_by(f64::total_cmp);
    let v = ang
        .into_iter()
        .map(|a| {
            let r = rng.gen_range(200.0..1600.0);
            [c[0] + (r * a.cos()).round() as i64, c[1] + (r * a.sin()).round() as i64]
        })
        .collect();
    Poly { v, closed: true }
}

pub fn draw(rng: &mut ChaCha8Rng, kind: u32) -> (Poly, Poly) {
    match kind {
        0 => (monotone_arc(rng, 0), monotone_arc(rng, 1)),
        1 => (star_loop(rng), monotone_arc(rng, 0)),
        2 => (monotone_arc(rng, 1), star_loop(rng)),
        _ => (star_loop(rng), star_loop(rng)),
    }
}

/// Draws random pairs until `n` non-degenerate ones have been compared with
/// the engine; returns (skipped draws, crossings exercised) or the first
/// disagreement.
pub fn compare_random_pairs(seed: u64, n: usize) -> Result<(usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = IntersectOptions {
        angle_tol: 1e-12,
        boundary_margin: 0.02,
    };
    let (mut compared, mut skipped, mut crossings) = (0, 0, 0);
    while compared < n {
        let kind = (compared % 4) as u32;
        let (a, b) = draw(&mut rng, kind);
        let (Some(ca), Some(cb)) = (a.curve(), b.curve()) else {
            skipped += 1;
            continue;
        };
        let Some(oracle) = exact(&a, &b) else {
            skipped += 1;
            continue;
        };
        let (a, b) = (&a.v, &b.v);
        let pat = intersect_curves(&ca, &cb, &opts).map_err(|e| format!("engine failed on {a:?} / {b:?}: {e}"))?;
        let signs: Vec<i8> = pat.points.iter().map(|p| p.sign).collect();
        if signs != oracle.signs || pat.sigma != oracle.sigma {
            return Err(format!(
                "{a:?} / {b:?}: engine {signs:?} {:?}, exact {:?} {:?}",
                pat.sigma, oracle.signs, oracle.sigma
            ));
        }
        crossings += pat.len();
        compared += 1;
    }
    Ok((skipped, crossings))
}
