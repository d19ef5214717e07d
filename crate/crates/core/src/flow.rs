//! Autonomous Hamiltonian flows on the annulus and the disk.
//!
//! Vector-field convention: `ι_X ω = dH`, which gives
//! `X = (∂H/∂s, −∂H/∂θ)` on the annulus (`ω = dθ ∧ ds`) and
//! `X = π (∂H/∂y, −∂H/∂x)` on the disk (`ω = (1/π) dx ∧ dy`).
//!
//! Time-`t` maps are integrated with the implicit midpoint rule, composed in
//! a symmetric triple jump so that each step stays symplectic while the
//! global error is fourth order. Annulus trajectories are integrated in the
//! universal cover so that θ̃-displacements are available directly.
//!
//! Disk rotation numbers count turns about the origin clockwise. With this
//! choice a Hamiltonian increasing towards the boundary rotates positively on
//! both surfaces (the annulus embeds in the disk collar with `s = r` and θ
//! measured clockwise, which preserves orientation).

use crate::curve::{standard_curve, Curve, CurveError, LiftedCurve};
use crate::geometry::{normalize_point, shoelace, wrap_delta, wrap_unit, Point, Surface};
use crate::intersect::curves_meet;
use crate::segment::Vec2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 50;
pub const CRITICAL_GRADIENT: f64 = 1e-8;
pub const REGULARITY_TOL: f64 = 1e-8;
pub const IMAGE_CHORD: f64 = 0.01;
pub const IMAGE_SAGITTA: f64 = 1e-7;
/// Transversal samples whose rotation number is this close to an integer
/// count as roots; catches tangential roots such as a bump maximum.
pub const ROTATION_HIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid Hamiltonian: {0}")]
    InvalidSpec(String),
    #[error("point ({0}, {1}) is outside the surface")]
    OutOfDomain(f64, f64),
    #[error("implicit midpoint iteration failed to converge at t = {0}")]
    SolverDiverged(f64),
    #[error("the level through the point is critical")]
    CriticalLevel,
    #[error("the level through the point reaches the boundary without closing")]
    OpenLevel,
    #[error("lift endpoints do not match along the boundary")]
    MismatchedEndpoints,
    #[error("operation requires the {0:?}")]
    WrongSurface(Surface),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// `H = c s² / 2` on the annulus.
    LinearShear { c: f64 },
    /// `H = Σ coeffs[i] sⁱ` on the annulus.
    PolyShear { coeffs: Vec<f64> },
    /// `H = F(s)` with `F′ = A η`, `η(s) = 6 s (1 − s)`, `∫η = 1`.
    BumpShear { amplitude: f64 },
    /// `H = c (x² + y²)` on the disk.
    RadialDisk { c: f64 },
    /// Samples of `H` on a regular grid, interpolated with Catmull–Rom
    /// bicubics. Annulus: `values[j][i] = H(i/nx, j/(ny−1))`, periodic in θ.
    /// Disk: `values[j][i] = H(−1 + 2i/(nx−1), −1 + 2j/(ny−1))`.
    Grid {
        nx: usize,
        ny: usize,
        values: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemData {
    pub surface: Surface,
    #[serde(default = "default_step")]
    pub step: f64,
    pub hamiltonian: HamiltonianSpec,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemData", into = "SystemData")]
pub struct HamiltonianSystem {
    surface: Surface,
    spec: HamiltonianSpec,
    step: f64,
}

impl TryFrom<SystemData> for HamiltonianSystem {
    type Error = FlowError;
    fn try_from(d: SystemData) -> Result<Self, FlowError> {
        HamiltonianSystem::new(d.surface, d.hamiltonian, d.step)
    }
}

impl From<HamiltonianSystem> for SystemData {
    fn from(h: HamiltonianSystem) -> Self {
        SystemData {
            surface: h.surface,
            step: h.step,
            hamiltonian: h.spec,
        }
    }
}

fn invalid(msg: impl Into<String>) -> FlowError {
    FlowError::InvalidSpec(msg.into())
}

/// Catmull–Rom weights and their derivatives for fractional offset `f`.
fn cubic_weights(f: f64) -> ([f64; 4], [f64; 4]) {
    let f2 = f * f;
    let f3 = f2 * f;
    (
        [
            0.5 * (-f3 + 2.0 * f2 - f),
            0.5 * (3.0 * f3 - 5.0 * f2 + 2.0),
            0.5 * (-3.0 * f3 + 4.0 * f2 + f),
            0.5 * (f3 - f2),
        ],
        [
            0.5 * (-3.0 * f2 + 4.0 * f - 1.0),
            0.5 * (9.0 * f2 - 10.0 * f),
            0.5 * (-9.0 * f2 + 8.0 * f + 1.0),
            0.5 * (3.0 * f2 - 2.0 * f),
        ],
    )
}

impl HamiltonianSystem {
    pub fn new(surface: Surface, spec: HamiltonianSpec, step: f64) -> Result<Self, FlowError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("integrator step must be positive"));
        }
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite")))
            }
        };
        match &spec {
            HamiltonianSpec::LinearShear { c } => finite(*c, "c")?,
            HamiltonianSpec::BumpShear { amplitude } => finite(*amplitude, "amplitude")?,
            HamiltonianSpec::PolyShear { coeffs } => {
                if coeffs.is_empty() {
                    return Err(invalid("coeffs must not be empty"));
                }
                for c in coeffs {
                    finite(*c, "coeffs")?;
                }
            }
            HamiltonianSpec::RadialDisk { c } => finite(*c, "c")?,
            HamiltonianSpec::Grid { nx, ny, values } => validate_grid(surface, *nx, *ny, values)?,
        }
        let needs = match spec {
            HamiltonianSpec::RadialDisk { .. } => Some(Surface::Disk),
            HamiltonianSpec::Grid { .. } => None,
            _ => Some(Surface::Annulus),
        };
        if let Some(req) = needs {
            if req != surface {
                return Err(FlowError::WrongSurface(req));
            }
        }
        Ok(HamiltonianSystem { surface, spec, step })
    }

    pub fn linear_shear(c: f64) -> Self {
        Self::new(Surface::Annulus, HamiltonianSpec::LinearShear { c }, DEFAULT_STEP).unwrap()
    }

    pub fn poly_shear(coeffs: Vec<f64>) -> Self {
        Self::new(Surface::Annulus, HamiltonianSpec::PolyShear { coeffs }, DEFAULT_STEP).unwrap()
    }

    pub fn bump_shear(amplitude: f64) -> Self {
        Self::new(Surface::Annulus, HamiltonianSpec::BumpShear { amplitude }, DEFAULT_STEP).unwrap()
    }

    pub fn radial_disk(c: f64) -> Self {
        Self::new(Surface::Disk, HamiltonianSpec::RadialDisk { c }, DEFAULT_STEP).unwrap()
    }

    pub fn with_step(mut self, step: f64) -> Result<Self, FlowError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("integrator step must be positive"));
        }
        self.step = step;
        Ok(self)
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `F′(s)` for shear-type systems: the θ-speed on the circle at height `s`.
    pub fn twist(&self, s: f64) -> Option<f64> {
        match &self.spec {
            HamiltonianSpec::LinearShear { c } => Some(c * s),
            HamiltonianSpec::BumpShear { amplitude } => Some(6.0 * amplitude * s * (1.0 - s)),
            HamiltonianSpec::PolyShear { coeffs } => {
                let mut acc = 0.0;
                for (i, c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * s + i as f64 * c;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    fn shear_potential(&self, s: f64) -> f64 {
        match &self.spec {
            HamiltonianSpec::LinearShear { c } => 0.5 * c * s * s,
            HamiltonianSpec::BumpShear { amplitude } => amplitude * s * s * (3.0 - 2.0 * s),
            HamiltonianSpec::PolyShear { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c),
            _ => unreachable!(),
        }
    }

    pub fn is_shear(&self) -> bool {
        self.twist(0.0).is_some()
    }

    /// `(H, ∂H/∂x, ∂H/∂y)` in chart coordinates.
    pub fn eval(&self, p: Vec2) -> (f64, Vec2) {
        match &self.spec {
            HamiltonianSpec::RadialDisk { c } => (c * (p[0] * p[0] + p[1] * p[1]), [2.0 * c * p[0], 2.0 * c * p[1]]),
            HamiltonianSpec::Grid { nx, ny, values } => grid_eval(self.surface, *nx, *ny, values, p),
            _ => (self.shear_potential(p[1]), [0.0, self.twist(p[1]).unwrap()]),
        }
    }

    pub fn hamiltonian(&self, p: Vec2) -> f64 {
        self.eval(p).0
    }

    pub fn gradient(&self, p: Vec2) -> Vec2 {
        self.eval(p).1
    }

    /// The Hamiltonian vector field at a chart (or cover) point.
    pub fn field(&self, p: Vec2) -> Vec2 {
        match &self.spec {
            HamiltonianSpec::LinearShear { .. }
            | HamiltonianSpec::PolyShear { .. }
            | HamiltonianSpec::BumpShear { .. } => [self.twist(p[1]).unwrap(), 0.0],
            _ => {
                let g = self.gradient(p);
                match self.surface {
                    Surface::Annulus => [g[1], -g[0]],
                    Surface::Disk => [PI * g[1], -PI * g[0]],
                }
            }
        }
    }

    /// Implicit midpoint step of size `h` from `y`.
    fn midpoint_step(&self, y: Vec2, h: f64, t: f64) -> Result<Vec2, FlowError> {
        let x0 = self.field(y);
        let mut d = [h * x0[0], h * x0[1]];
        for _ in 0..FIXED_POINT_MAX_ITER {
            let x = self.field([y[0] + 0.5 * d[0], y[1] + 0.5 * d[1]]);
            let nd = [h * x[0], h * x[1]];
            let err = (nd[0] - d[0]).abs().max((nd[1] - d[1]).abs());
            d = nd;
            if !(d[0].is_finite() && d[1].is_finite()) {
                return Err(FlowError::SolverDiverged(t));
            }
            if err <= FIXED_POINT_TOL {
                return Ok(self.confine([y[0] + d[0], y[1] + d[1]]));
            }
        }
        Err(FlowError::SolverDiverged(t))
    }

    /// Keep an integrated point on the surface (the exact flow is tangent to
    /// ∂Σ; this removes round-off drift).
    fn confine(&self, p: Vec2) -> Vec2 {
        match self.surface {
            Surface::Annulus => [p[0], p[1].clamp(0.0, 1.0)],
            Surface::Disk => {
                let r = p[0].hypot(p[1]);
                if r > 1.0 {
                    [p[0] / r, p[1] / r]
                } else {
                    p
                }
            }
        }
    }

    /// One composed step: triple jump of implicit midpoint substeps.
    fn step_once(&self, y: Vec2, h: f64, t: f64) -> Result<Vec2, FlowError> {
        let cbrt2 = 2f64.cbrt();
        let g1 = 1.0 / (2.0 - cbrt2);
        let g0 = -cbrt2 / (2.0 - cbrt2);
        let y = self.midpoint_step(y, g1 * h, t)?;
        let y = self.midpoint_step(y, g0 * h, t)?;
        self.midpoint_step(y, g1 * h, t)
    }

    /// Integrate from a chart/cover point for time `t`, calling `visit` after
    /// every step with the previous and new positions.
    fn integrate(&self, start: Vec2, t: f64, mut visit: impl FnMut(Vec2, Vec2)) -> Result<Vec2, FlowError> {
        if t == 0.0 {
            return Ok(start);
        }
        let n = (t.abs() / self.step).ceil().max(1.0) as usize;
        let h = t / n as f64;
        let mut y = start;
        for k in 0..n {
            let next = self.step_once(y, h, k as f64 * h)?;
            visit(y, next);
            y = next;
        }
        Ok(y)
    }

    /// Time-`t` map in chart coordinates; on the annulus the result is the
    /// endpoint of the lifted trajectory (θ not wrapped).
    pub fn flow_cover(&self, t: f64, p: Vec2) -> Result<Vec2, FlowError> {
        self.integrate(p, t, |_, _| {})
    }

    fn check_domain(&self, p: Point) -> Result<Point, FlowError> {
        normalize_point(self.surface, p.x, p.y).map_err(|_| FlowError::OutOfDomain(p.x, p.y))
    }

    /// The time-`t` map of the flow.
    pub fn flow_map(&self, t: f64, p: Point) -> Result<Point, FlowError> {
        let p = self.check_domain(p)?;
        let q = self.flow_cover(t, [p.x, p.y])?;
        Ok(match self.surface {
            Surface::Annulus => Point::new(wrap_unit(q[0]), q[1]),
            Surface::Disk => Point::new(q[0], q[1]),
        })
    }

    pub fn vector_field(&self, p: Point) -> Result<Vec2, FlowError> {
        let p = self.check_domain(p)?;
        Ok(self.field([p.x, p.y]))
    }

    /// Turns made by the trajectory of `p` in time `t`: θ̃-displacement on
    /// the annulus, clockwise turns about the origin on the disk.
    pub fn turns(&self, t: f64, p: Vec2) -> Result<(f64, Vec2), FlowError> {
        match self.surface {
            Surface::Annulus => {
                let q = self.flow_cover(t, p)?;
                Ok((q[0] - p[0], q))
            }
            Surface::Disk => {
                let mut angle = 0.0;
                let q = self.integrate(p, t, |a, b| angle += clockwise_angle(a, b))?;
                Ok((angle / (2.0 * PI), q))
            }
        }
    }
}

fn clockwise_angle(a: Vec2, b: Vec2) -> f64 {
    let c = a[0] * b[1] - a[1] * b[0];
    let d = a[0] * b[0] + a[1] * b[1];
    if c == 0.0 && d == 0.0 {
        0.0
    } else {
        -c.atan2(d)
    }
}

fn validate_grid(surface: Surface, nx: usize, ny: usize, values: &[Vec<f64>]) -> Result<(), FlowError> {
    if nx < 4 || ny < 4 {
        return Err(invalid("grid needs at least 4×4 samples"));
    }
    if values.len() != ny || values.iter().any(|row| row.len() != nx) {
        return Err(invalid("grid values must be ny rows of nx samples"));
    }
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("grid values must be finite"));
    }
    let constant = |cells: &mut dyn Iterator<Item = f64>| -> bool {
        let cells: Vec<f64> = cells.collect();
        let first = cells[0];
        cells.iter().all(|v| (v - first).abs() <= 1e-12 * (1.0 + first.abs()))
    };
    match surface {
        Surface::Annulus => {
            let bottom = constant(&mut values[..2].iter().flatten().copied());
            let top = constant(&mut values[ny - 2..].iter().flatten().copied());
            if !(bottom && top) {
                return Err(invalid("H must be constant on the two outermost rows at each boundary"));
            }
        }
        Surface::Disk => {
            let hx = 2.0 / (nx - 1) as f64;
            let hy = 2.0 / (ny - 1) as f64;
            let collar = 1.0 - 2.0 * hx.max(hy);
            let mut outer = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).filter_map(|(i, j)| {
                let x = -1.0 + i as f64 * hx;
                let y = -1.0 + j as f64 * hy;
                (x.hypot(y) >= collar).then(|| values[j][i])
            });
            if !constant(&mut outer) {
                return Err(invalid(
                    "H must be constant on samples within two cells of the boundary",
                ));
            }
        }
    }
    Ok(())
}

fn grid_eval(surface: Surface, nx: usize, ny: usize, values: &[Vec<f64>], p: Vec2) -> (f64, Vec2) {
    let (u, hx, v, hy) = match surface {
        Surface::Annulus => {
            let th = wrap_unit(p[0]);
            (
                th * nx as f64,
                1.0 / nx as f64,
                p[1] * (ny - 1) as f64,
                1.0 / (ny - 1) as f64,
            )
        }
        Surface::Disk => {
            let hx = 2.0 / (nx - 1) as f64;
            let hy = 2.0 / (ny - 1) as f64;
            ((p[0] + 1.0) / hx, hx, (p[1] + 1.0) / hy, hy)
        }
    };
    let i0 = u.floor();
    let j0 = v.floor();
    let (wu, du) = cubic_weights(u - i0);
    let (wv, dv) = cubic_weights(v - j0);
    let (i0, j0) = (i0 as i64, j0 as i64);
    let col = |i: i64| -> usize {
        match surface {
            Surface::Annulus => i.rem_euclid(nx as i64) as usize,
            Surface::Disk => i.clamp(0, nx as i64 - 1) as usize,
        }
    };
    let row = |j: i64| -> usize { j.clamp(0, ny as i64 - 1) as usize };
    let (mut h, mut hxd, mut hyd) = (0.0, 0.0, 0.0);
    for b in 0..4 {
        let r = &values[row(j0 - 1 + b as i64)];
        let (mut acc, mut acc_d) = (0.0, 0.0);
        for a in 0..4 {
            let val = r[col(i0 - 1 + a as i64)];
            acc += wu[a] * val;
            acc_d += du[a] * val;
        }
        h += wv[b] * acc;
        hxd += wv[b] * acc_d;
        hyd += dv[b] * acc;
    }
    (h, [hxd / hx, hyd / hy])
}

/// A map of a surface given by chart coordinates; on the annulus the image
/// may be any lift.
pub trait SurfaceMap: Sync {
    fn surface(&self) -> Surface;
    fn apply(&self, p: Vec2) -> Result<Vec2, FlowError>;
}

/// The time-`t` map of a system, as a [`SurfaceMap`].
pub struct TimeMap<'a> {
    pub system: &'a HamiltonianSystem,
    pub t: f64,
}

impl SurfaceMap for TimeMap<'_> {
    fn surface(&self) -> Surface {
        self.system.surface
    }
    fn apply(&self, p: Vec2) -> Result<Vec2, FlowError> {
        self.system.flow_cover(self.t, p)
    }
}

/// Wraps a closure as a [`SurfaceMap`].
pub struct FnMap<F> {
    pub surface: Surface,
    pub f: F,
}

impl<F: Fn(Vec2) -> Vec2 + Sync> SurfaceMap for FnMap<F> {
    fn surface(&self) -> Surface {
        self.surface
    }
    fn apply(&self, p: Vec2) -> Result<Vec2, FlowError> {
        Ok((self.f)(p))
    }
}

/// Chart difference `b − a`, unwrapping θ on the annulus.
pub(crate) fn chart_diff(surface: Surface, a: Vec2, b: Vec2) -> Vec2 {
    match surface {
        Surface::Annulus => [wrap_delta(b[0] - a[0]), b[1] - a[1]],
        Surface::Disk => [b[0] - a[0], b[1] - a[1]],
    }
}

/// Central-difference Jacobian `J[r][c] = ∂g_r/∂x_c`.
pub fn jacobian(map: &dyn SurfaceMap, p: Vec2, fd_step: f64) -> Result<[[f64; 2]; 2], FlowError> {
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let mut plus = p;
        let mut minus = p;
        plus[c] += fd_step;
        minus[c] -= fd_step;
        let d = chart_diff(map.surface(), map.apply(minus)?, map.apply(plus)?);
        j[0][c] = d[0] / (2.0 * fd_step);
        j[1][c] = d[1] / (2.0 * fd_step);
    }
    Ok(j)
}

/// Determinant of the differential. Both charts carry a constant multiple of
/// the Lebesgue form, so this is also the area distortion.
pub fn jacobian_determinant(map: &dyn SurfaceMap, p: Vec2, fd_step: f64) -> Result<f64, FlowError> {
    let j = jacobian(map, p, fd_step)?;
    Ok(j[0][0] * j[1][1] - j[0][1] * j[1][0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageOptions {
    /// Largest allowed distance between consecutive image points.
    pub chord: f64,
    /// Largest allowed distance between the image of a source midpoint and
    /// the midpoint of the image chord; keeps areas under image polylines
    /// accurate where the image bends.
    pub sagitta: f64,
}

impl Default for ImageOptions {
    fn default() -> Self {
        ImageOptions {
            chord: IMAGE_CHORD,
            sagitta: IMAGE_SAGITTA,
        }
    }
}

/// Apply the time-`t` map to a curve, subdividing source segments at their
/// midpoints until each image segment satisfies the chord and sagitta bounds.
pub fn image_curve(system: &HamiltonianSystem, t: f64, curve: &Curve, opts: &ImageOptions) -> Result<Curve, FlowError> {
    if curve.surface() != system.surface {
        return Err(FlowError::WrongSurface(system.surface));
    }
    if t == 0.0 {
        return Ok(curve.clone());
    }
    let path = curve.path();
    let mut out: Vec<Vec2> = Vec::with_capacity(path.len());
    let mut img_a = system.flow_cover(t, path[0])?;
    out.push(img_a);
    for w in path.windows(2) {
        let img_b = system.flow_cover(t, w[1])?;
        // depth-first; the stack holds (source a, image a, source b, image b, depth)
        let mut stack = vec![(w[0], img_a, w[1], img_b, 0u32)];
        while let Some((sa, ia, sb, ib, depth)) = stack.pop() {
            let sm = [(sa[0] + sb[0]) / 2.0, (sa[1] + sb[1]) / 2.0];
            let im = system.flow_cover(t, sm)?;
            let gap = (ib[0] - ia[0]).hypot(ib[1] - ia[1]);
            let sag = (im[0] - (ia[0] + ib[0]) / 2.0).hypot(im[1] - (ia[1] + ib[1]) / 2.0);
            if (gap <= opts.chord && sag <= opts.sagitta) || depth >= 40 {
                out.push(ib);
                continue;
            }
            stack.push((sm, im, sb, ib, depth + 1));
            stack.push((sa, ia, sm, im, depth + 1));
        }
        img_a = img_b;
    }
    if curve.is_closed() {
        out.pop();
    }
    let surface = system.surface;
    let vertices = out
        .iter()
        .map(|&[x, y]| {
            let p = match surface {
                Surface::Annulus => Point::new(x, y.clamp(0.0, 1.0)),
                Surface::Disk => Point::new(x, y),
            };
            normalize_point(surface, p.x, p.y).map_err(|_| FlowError::OutOfDomain(x, y))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Curve::new(surface, vertices, curve.is_closed())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationOptions {
    /// First horizon is `2^min_exp` time units; horizons double from there.
    pub min_exp: u32,
    /// Longest horizon `2^max_exp`.
    pub max_exp: u32,
    pub tol: f64,
}

impl Default for RotationOptions {
    fn default() -> Self {
        RotationOptions {
            min_exp: 6,
            max_exp: 14,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationEstimate {
    pub value: f64,
    pub converged: bool,
    /// Horizon reached when the estimate was returned.
    pub horizon: f64,
}

/// Asymptotic turns per unit time of the orbit of `p`: displacement over
/// doubling horizons, Richardson-extrapolated (`2 r(2T) − r(T)`), stopping
/// when successive extrapolated values agree to `tol`.
pub fn rotation_number(
    system: &HamiltonianSystem,
    p: Point,
    opts: &RotationOptions,
) -> Result<RotationEstimate, FlowError> {
    let p = system.check_domain(p)?;
    let mut pos = [p.x, p.y];
    let mut turns = 0.0;
    let mut elapsed = 0.0;
    let mut prev_rate: Option<f64> = None;
    let mut prev_est: Option<f64> = None;
    for e in opts.min_exp..=opts.max_exp.max(opts.min_exp) {
        let horizon = 2f64.powi(e as i32);
        let (d, q) = system.turns(horizon - elapsed, pos)?;
        turns += d;
        pos = q;
        elapsed = horizon;
        let rate = turns / horizon;
        let est = match prev_rate {
            Some(r) => 2.0 * rate - r,
            None => rate,
        };
        if let Some(pe) = prev_est {
            if (est - pe).abs() < opts.tol {
                return Ok(RotationEstimate {
                    value: est,
                    converged: true,
                    horizon,
                });
            }
        }
        prev_rate = Some(rate);
        prev_est = Some(est);
    }
    Ok(RotationEstimate {
        value: prev_est.unwrap(),
        converged: false,
        horizon: elapsed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSample {
    pub point: Point,
    pub value: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationProfile {
    pub surface: Surface,
    pub samples: Vec<RotationSample>,
}

impl RotationProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value,converged\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{}\n",
                s.point.x, s.point.y, s.value, s.converged
            ));
        }
        out
    }
}

/// Sample points of an `n × n` grid: `θ = i/n`, `s = j/(n−1)` on the
/// annulus; the square grid over `[−1, 1]²` clipped to the disk.
pub fn profile_grid(surface: Surface, n: usize) -> Vec<Point> {
    let n = n.max(2);
    let mut pts = Vec::new();
    for j in 0..n {
        for i in 0..n {
            match surface {
                Surface::Annulus => pts.push(Point::new(i as f64 / n as f64, j as f64 / (n - 1) as f64)),
                Surface::Disk => {
                    let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                    let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                    if x.hypot(y) <= 1.0 {
                        pts.push(Point::new(x, y));
                    }
                }
            }
        }
    }
    pts
}

pub fn rotation_profile(
    system: &HamiltonianSystem,
    points: &[Point],
    opts: &RotationOptions,
) -> Result<RotationProfile, FlowError> {
    let samples = points
        .par_iter()
        .map(|&p| {
            let r = rotation_number(system, p, opts)?;
            Ok(RotationSample {
                point: p,
                value: r.value,
                converged: r.converged,
            })
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    Ok(RotationProfile {
        surface: system.surface,
        samples,
    })
}

/// Points `(0, s)` on the annulus or `(r, 0)` on the disk, equally spaced
/// over `[lo, hi]`.
pub fn transversal(surface: Surface, lo: f64, hi: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let c = if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            };
            match surface {
                Surface::Annulus => Point::new(0.0, c),
                Surface::Disk => Point::new(c, 0.0),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicOrbit {
    pub trace: Vec<Point>,
    pub period: f64,
    /// Turns per unit time, `winding / period`.
    pub rho: f64,
    pub winding: i64,
    pub regular: bool,
    pub level: f64,
}

impl PeriodicOrbit {
    pub fn as_curve(&self, surface: Surface) -> Result<Curve, CurveError> {
        Curve::new(surface, self.trace.clone(), true)
    }
}

const TRACE_POINTS: usize = 256;
const LEVEL_STEP: f64 = 1e-4;

/// Period of a closed curve `γ(u)`, `u ∈ [0, 1)`, as `∮ dl / |X|`, by the
/// trapezoidal rule (spectrally accurate for smooth periodic integrands).
fn period_on(system: &HamiltonianSystem, gamma: impl Fn(f64) -> (Vec2, Vec2), n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let (p, dp) = gamma(i as f64 / n as f64);
            let x = system.field(p);
            dp[0].hypot(dp[1]) / x[0].hypot(x[1])
        })
        .sum::<f64>()
        / n as f64
}

/// Trace the closed orbit through `p` and measure its period.
pub fn trace_periodic_orbit(system: &HamiltonianSystem, p: Point) -> Result<PeriodicOrbit, FlowError> {
    let p = system.check_domain(p)?;
    let (level, grad) = system.eval([p.x, p.y]);
    if grad[0].hypot(grad[1]) <= CRITICAL_GRADIENT {
        return Err(FlowError::CriticalLevel);
    }
    match &system.spec {
        HamiltonianSpec::RadialDisk { c } => {
            let r = p.norm();
            let a0 = p.y.atan2(p.x);
            let dir = c.signum();
            let circle = |r: f64| {
                move |u: f64| {
                    let a = a0 - dir * 2.0 * PI * u;
                    (
                        [r * a.cos(), r * a.sin()],
                        [2.0 * PI * r * a.sin(), -2.0 * PI * r * a.cos()],
                    )
                }
            };
            let period = period_on(system, circle(r), TRACE_POINTS);
            let trace = (0..TRACE_POINTS).map(|i| {
                let (q, _) = circle(r)(i as f64 / TRACE_POINTS as f64);
                Point::new(q[0], q[1])
            });
            let (lo, hi) = ((r - LEVEL_STEP).max(LEVEL_STEP), (r + LEVEL_STEP).min(1.0));
            let t_lo = period_on(system, circle(lo), TRACE_POINTS);
            let t_hi = period_on(system, circle(hi), TRACE_POINTS);
            let dh = system.hamiltonian([hi, 0.0]) - system.hamiltonian([lo, 0.0]);
            let winding = dir as i64;
            Ok(PeriodicOrbit {
                trace: trace.collect(),
                period,
                rho: winding as f64 / period,
                winding,
                regular: ((t_hi - t_lo) / dh).abs() > REGULARITY_TOL,
                level,
            })
        }
        HamiltonianSpec::Grid { .. } => trace_numeric(system, p, level),
        _ => {
            let s = p.y;
            let speed = system.twist(s).unwrap();
            let dir = speed.signum();
            let line = |s: f64| move |u: f64| ([p.x + dir * u, s], [1.0, 0.0]);
            let period = period_on(system, line(s), 16);
            let (lo, hi) = ((s - LEVEL_STEP).max(0.0), (s + LEVEL_STEP).min(1.0));
            let t_lo = period_on(system, line(lo), 16);
            let t_hi = period_on(system, line(hi), 16);
            let dh = system.hamiltonian([0.0, hi]) - system.hamiltonian([0.0, lo]);
            let trace = (0..TRACE_POINTS)
                .map(|i| Point::new(wrap_unit(p.x + dir * i as f64 / TRACE_POINTS as f64), s))
                .collect();
            let winding = dir as i64;
            Ok(PeriodicOrbit {
                trace,
                period,
                rho: winding as f64 / period,
                winding,
                regular: ((t_hi - t_lo) / dh).abs() > REGULARITY_TOL,
                level,
            })
        }
    }
}

/// Level-set continuation for sampled Hamiltonians: predictor along the
/// flow direction, Newton correction back onto `H = level`.
fn trace_level(system: &HamiltonianSystem, p0: Vec2, level: f64) -> Result<(Vec<Vec2>, f64, f64), FlowError> {
    let surface = system.surface;
    let ds = 2e-3;
    let max_steps = 2_000_000;
    let mut pts = vec![p0];
    let mut p = p0;
    let mut period = 0.0;
    let mut travelled = 0.0;
    let mut turns = 0.0;
    let unit_field = |q: Vec2| -> Result<Vec2, FlowError> {
        let x = system.field(q);
        let n = x[0].hypot(x[1]);
        if n <= CRITICAL_GRADIENT {
            return Err(FlowError::CriticalLevel);
        }
        Ok([x[0] / n, x[1] / n])
    };
    let correct = |mut q: Vec2| -> Result<Vec2, FlowError> {
        for _ in 0..4 {
            let (h, g) = system.eval(q);
            let g2 = g[0] * g[0] + g[1] * g[1];
            if g2 <= CRITICAL_GRADIENT * CRITICAL_GRADIENT {
                return Err(FlowError::CriticalLevel);
            }
            q = [q[0] - (h - level) * g[0] / g2, q[1] - (h - level) * g[1] / g2];
        }
        Ok(q)
    };
    let outside = |q: Vec2| match surface {
        Surface::Annulus => q[1] < 0.0 || q[1] > 1.0,
        Surface::Disk => q[0].hypot(q[1]) > 1.0,
    };
    for _ in 0..max_steps {
        let d0 = unit_field(p)?;
        let mid = [p[0] + 0.5 * ds * d0[0], p[1] + 0.5 * ds * d0[1]];
        let d1 = unit_field(mid)?;
        let mut q = correct([p[0] + ds * d1[0], p[1] + ds * d1[1]])?;
        let gap = chart_diff(surface, p0, q);
        let closing = travelled > 4.0 * ds && gap[0].hypot(gap[1]) < ds;
        if closing {
            // snap onto the start point on the appropriate sheet
            q = [q[0] - gap[0], q[1] - gap[1]];
        }
        if outside(q) {
            return Err(FlowError::OpenLevel);
        }
        let m = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
        let x = system.field(m);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        period += len / x[0].hypot(x[1]);
        travelled += len;
        if surface == Surface::Disk {
            turns += clockwise_angle(p, q) / (2.0 * PI);
        }
        p = q;
        if closing {
            if surface == Surface::Annulus {
                turns = p[0] - p0[0];
            }
            return Ok((pts, period, turns));
        }
        pts.push(p);
    }
    Err(FlowError::OpenLevel)
}

fn trace_numeric(system: &HamiltonianSystem, p: Point, level: f64) -> Result<PeriodicOrbit, FlowError> {
    let p0 = [p.x, p.y];
    let (pts, period, turns) = trace_level(system, p0, level)?;
    let winding = turns.round() as i64;
    let grad = system.gradient(p0);
    let g2 = grad[0] * grad[0] + grad[1] * grad[1];
    let eps = 1e-3;
    let neighbour = |sign: f64| -> Option<(f64, f64)> {
        let q = [p0[0] + sign * eps * grad[0] / g2, p0[1] + sign * eps * grad[1] / g2];
        let h = system.hamiltonian(q);
        trace_level(system, q, h).ok().map(|(_, t, _)| (h, t))
    };
    let regular = match (neighbour(-1.0), neighbour(1.0)) {
        (Some((h0, t0)), Some((h1, t1))) => ((t1 - t0) / (h1 - h0)).abs() > REGULARITY_TOL,
        _ => true,
    };
    Ok(PeriodicOrbit {
        trace: pts
            .iter()
            .map(|&q| match system.surface {
                Surface::Annulus => Point::new(wrap_unit(q[0]), q[1]),
                Surface::Disk => Point::new(q[0], q[1]),
            })
            .collect(),
        period,
        rho: winding as f64 / period,
        winding,
        regular,
        level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSearchOptions {
    /// Samples of the rotation number along the transversal.
    pub samples: usize,
    pub boundary_margin: f64,
    pub rotation: RotationOptions,
    /// Root bracket width at which refinement stops.
    pub root_tol: f64,
}

impl Default for LoopSearchOptions {
    fn default() -> Self {
        LoopSearchOptions {
            samples: 65,
            boundary_margin: crate::intersect::DEFAULT_BOUNDARY_MARGIN,
            rotation: RotationOptions::default(),
            root_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedLoop {
    /// The integer rotation number the loop was located at.
    pub rotation: i64,
    /// Position along the transversal (`s` on the annulus, `r` on the disk).
    pub position: f64,
    pub orbit: PeriodicOrbit,
    pub intersects_l: bool,
}

/// Loops of fixed points of the time-1 map: orbits with nonzero integer
/// rotation number, located by root-finding the rotation number along a
/// transversal (`θ = 0` on the annulus, the positive x-axis on the disk)
/// inside the boundary collar.
pub fn find_fixed_loops(
    system: &HamiltonianSystem,
    l: &Curve,
    opts: &LoopSearchOptions,
) -> Result<Vec<FixedLoop>, FlowError> {
    let surface = system.surface;
    let lo = opts.boundary_margin;
    let hi = 1.0 - opts.boundary_margin;
    let at = |c: f64| match surface {
        Surface::Annulus => Point::new(0.0, c),
        Surface::Disk => Point::new(c, 0.0),
    };
    let rot = |c: f64| rotation_number(system, at(c), &opts.rotation).map(|r| r.value);
    let xs: Vec<f64> = transversal(surface, lo, hi, opts.samples.max(2))
        .iter()
        .map(|p| p.x.max(p.y))
        .collect();
    let ys = xs.par_iter().map(|&c| rot(c)).collect::<Result<Vec<_>, _>>()?;
    let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut roots: Vec<(i64, f64)> = Vec::new();
    for k in ((min - ROTATION_HIT_TOL).ceil() as i64)..=((max + ROTATION_HIT_TOL).floor() as i64) {
        if k == 0 {
            continue;
        }
        let kf = k as f64;
        let f: Vec<f64> = ys.iter().map(|y| y - kf).collect();
        let hit = |v: f64| v.abs() <= ROTATION_HIT_TOL;
        let mut i = 0;
        while i < f.len() {
            if hit(f[i]) {
                // a run of exact hits: report both ends of the plateau
                let start = i;
                while i + 1 < f.len() && hit(f[i + 1]) {
                    i += 1;
                }
                roots.push((k, xs[start]));
                if i > start {
                    roots.push((k, xs[i]));
                }
            } else if i + 1 < f.len() && !hit(f[i + 1]) && f[i].signum() != f[i + 1].signum() {
                let g = |c: f64| rot(c).map(|r| r - kf);
                roots.push((k, refine_root(g, xs[i], xs[i + 1], f[i], f[i + 1], opts.root_tol)?));
            }
            i += 1;
        }
    }
    roots.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut loops = Vec::new();
    for (k, c) in roots {
        let orbit = match trace_periodic_orbit(system, at(c)) {
            Ok(o) => o,
            Err(FlowError::CriticalLevel) | Err(FlowError::OpenLevel) => continue,
            Err(e) => return Err(e),
        };
        let intersects_l = orbit.as_curve(surface).map(|oc| curves_meet(&oc, l)).unwrap_or(false);
        loops.push(FixedLoop {
            rotation: k,
            position: c,
            orbit,
            intersects_l,
        });
    }
    Ok(loops)
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn refine_root(
    f: impl Fn(f64) -> Result<f64, FlowError>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    tol: f64,
) -> Result<f64, FlowError> {
    let mut side = 0;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fa.abs() < 1e-14 {
            return Ok(a);
        }
        if fb.abs() < 1e-14 {
            return Ok(b);
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxReport {
    pub flux: f64,
    pub method: String,
    pub lift_convention: String,
}

/// Signed area between two lifts spanning `ℝ × [0, 1]`, closed up by
/// horizontal boundary segments. Positive when `K̃` lies to the right (+θ)
/// of `L̃`.
pub fn flux_between(lift_l: &LiftedCurve, lift_k: &LiftedCurve) -> Result<FluxReport, FlowError> {
    let (l0, l1) = (lift_l.points.first(), lift_l.points.last());
    let (k0, k1) = (lift_k.points.first(), lift_k.points.last());
    let (Some(l0), Some(l1), Some(k0), Some(k1)) = (l0, l1, k0, k1) else {
        return Err(FlowError::MismatchedEndpoints);
    };
    let tol = 1e-9;
    if (l0.s - k0.s).abs() > tol || (l1.s - k1.s).abs() > tol || (l1.s - l0.s).abs() < 1.0 - tol {
        return Err(FlowError::MismatchedEndpoints);
    }
    let mut poly: Vec<[f64; 2]> = lift_k.points.iter().map(|p| [p.theta, p.s]).collect();
    poly.extend(lift_l.points.iter().rev().map(|p| [p.theta, p.s]));
    let orient = if l1.s > l0.s { 1.0 } else { -1.0 };
    Ok(FluxReport {
        flux: orient * shoelace(&poly),
        method: "area_between_lifts".into(),
        lift_convention: format!(
            "L lifted with first theta in [0,1) at {:.17e}; K lifted from {:.17e}",
            l0.theta, k0.theta
        ),
    })
}

/// The standing curve's image under the time-1 map.
pub fn standard_image(system: &HamiltonianSystem) -> Result<Curve, FlowError> {
    image_curve(system, 1.0, &standard_curve(system.surface), &ImageOptions::default())
}

/// Time-1 displacement (in turns) and rotation number on a boundary circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRotation {
    pub point: Point,
    pub displacement: f64,
    pub rotation: f64,
}

pub fn boundary_rotations(
    system: &HamiltonianSystem,
    opts: &RotationOptions,
) -> Result<Vec<BoundaryRotation>, FlowError> {
    let pts = match system.surface {
        Surface::Annulus => vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0)],
        Surface::Disk => vec![Point::new(1.0, 0.0)],
    };
    pts.into_iter()
        .map(|p| {
            let (d, _) = system.turns(1.0, [p.x, p.y])?;
            let r = rotation_number(system, p, opts)?;
            Ok(BoundaryRotation {
                point: p,
                displacement: d,
                rotation: r.value,
            })
        })
        .collect()
}
