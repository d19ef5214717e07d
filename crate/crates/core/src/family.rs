//! Membership statistics for the displacement, flux and disk-area families,
//! fixed-loop certificates for autonomous members, and the combined
//! non-autonomy verdict.

use crate::curve::Curve;
use crate::flow::{
    find_fixed_loops, flux_between, image_curve, FixedLoop, FlowError, HamiltonianSystem, ImageOptions,
    LoopSearchOptions,
};
use crate::geometry::{signed_polygon_area, Surface};
use crate::intersect::{curves_meet, intersect_curves, IntersectError, IntersectOptions, IntersectionPattern};
use crate::obstruction::{obstruct, ObstructionReport, SnakeOptions, Verdict};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const M1_THRESHOLD: f64 = 4.0;
pub const M2_THRESHOLD: f64 = 1.0;
pub const DISK_AREA_THRESHOLD: f64 = 0.5;
/// Statistics this close to their threshold are reported as non-members.
pub const THRESHOLD_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("the curve must run from s = 0 to s = 1 on the annulus")]
    BoundaryViolation,
    #[error("lift endpoints do not match along the boundary")]
    MismatchedEndpoints,
    #[error("family requires the {0:?}")]
    WrongSurface(Surface),
    #[error("loop must be a closed curve")]
    NotALoop,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Intersect(#[from] IntersectError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Lift-endpoint displacement of `g(L)` above 4.
    M1Displacement,
    /// Flux through `L` above 1.
    M2Flux,
    /// A loop of fixed points enclosing more than half the disk.
    DiskAreaBound,
}

impl Family {
    pub fn threshold(self) -> f64 {
        match self {
            Family::M1Displacement => M1_THRESHOLD,
            Family::M2Flux => M2_THRESHOLD,
            Family::DiskAreaBound => DISK_AREA_THRESHOLD,
        }
    }

    pub fn surface(self) -> Surface {
        match self {
            Family::DiskAreaBound => Surface::Disk,
            _ => Surface::Annulus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyVerdict {
    pub family: Family,
    pub statistic: f64,
    pub threshold: f64,
    pub member: bool,
    pub certificate: Option<FixedLoop>,
    /// A member whose flow shows no fixed loop meeting `L`.
    pub falsification_alarm: bool,
    pub warning: Option<String>,
}

/// Strict comparison with a guard band at the threshold.
pub fn membership(statistic: f64, threshold: f64) -> (bool, Option<String>) {
    if (statistic - threshold).abs() <= THRESHOLD_GUARD {
        (
            false,
            Some(format!(
                "statistic {statistic:.17e} is within {THRESHOLD_GUARD:e} of the threshold {threshold}; treated as not a member"
            )),
        )
    } else {
        (statistic > threshold, None)
    }
}

fn check_spanning(c: &Curve) -> Result<(), FamilyError> {
    if c.surface() != Surface::Annulus {
        return Err(FamilyError::WrongSurface(Surface::Annulus));
    }
    let v = c.vertices();
    if c.is_closed() || v[0].y != 0.0 || v[v.len() - 1].y != 1.0 {
        return Err(FamilyError::BoundaryViolation);
    }
    Ok(())
}

/// θ̃-displacement between the lifted endpoints of `g(L)`; independent of
/// the lift.
pub fn m1_statistic(image: &Curve) -> Result<f64, FamilyError> {
    check_spanning(image)?;
    let lift = image.lift();
    Ok(lift.points[lift.points.len() - 1].theta - lift.points[0].theta)
}

/// Signed area between `L̃` and the lift of `g(L)` that starts nearest to
/// `L̃` on the bottom boundary.
pub fn m2_statistic(l: &Curve, image: &Curve) -> Result<f64, FamilyError> {
    if check_spanning(l).is_err() || check_spanning(image).is_err() {
        return Err(FamilyError::MismatchedEndpoints);
    }
    let ll = l.lift();
    let kl = image.lift();
    let shift = (ll.points[0].theta - kl.points[0].theta).round() as i64;
    flux_between(&ll, &kl.shifted(shift))
        .map(|r| r.flux)
        .map_err(|e| match e {
            FlowError::MismatchedEndpoints => FamilyError::MismatchedEndpoints,
            other => FamilyError::Flow(other),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaBound {
    MustIntersect,
    NoConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaBoundCheck {
    pub bound: AreaBound,
    /// Normalized enclosed area.
    pub area: f64,
    pub intersects: bool,
}

impl AreaBoundCheck {
    /// A loop that must meet `L` does.
    pub fn consistent(&self) -> bool {
        self.bound == AreaBound::NoConstraint || self.intersects
    }
}

/// A simple loop on the disk enclosing more than half its area must meet
/// any diameter.
pub fn disk_area_bound_check(lp: &Curve, l: &Curve) -> Result<AreaBoundCheck, FamilyError> {
    if lp.surface() != Surface::Disk || l.surface() != Surface::Disk {
        return Err(FamilyError::WrongSurface(Surface::Disk));
    }
    if !lp.is_closed() {
        return Err(FamilyError::NotALoop);
    }
    let pts: Vec<[f64; 2]> = lp.vertices().iter().map(|p| [p.x, p.y]).collect();
    let area = signed_polygon_area(Surface::Disk, &pts)
        .map_err(|_| FamilyError::NotALoop)?
        .abs();
    let bound = if area > DISK_AREA_THRESHOLD {
        AreaBound::MustIntersect
    } else {
        AreaBound::NoConstraint
    };
    Ok(AreaBoundCheck {
        bound,
        area,
        intersects: curves_meet(lp, l),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CertifyOptions {
    pub image: ImageOptions,
    pub loops: LoopSearchOptions,
}

fn loop_area(lp: &FixedLoop) -> f64 {
    let pts: Vec<[f64; 2]> = lp.orbit.trace.iter().map(|p| [p.x, p.y]).collect();
    signed_polygon_area(Surface::Disk, &pts).map(f64::abs).unwrap_or(0.0)
}

/// Membership of the time-1 map of an autonomous system, with a fixed loop
/// meeting `L` attached for members. A member without such a loop raises
/// the falsification alarm.
pub fn fl_certificate(
    system: &HamiltonianSystem,
    l: &Curve,
    family: Family,
    opts: &CertifyOptions,
) -> Result<FamilyVerdict, FamilyError> {
    let surface = family.surface();
    if system.surface() != surface || l.surface() != surface {
        return Err(FamilyError::WrongSurface(surface));
    }
    let threshold = family.threshold();
    let (statistic, found) = match family {
        Family::M1Displacement => (m1_statistic(&image_curve(system, 1.0, l, &opts.image)?)?, None),
        Family::M2Flux => (m2_statistic(l, &image_curve(system, 1.0, l, &opts.image)?)?, None),
        Family::DiskAreaBound => {
            let loops = find_fixed_loops(system, l, &opts.loops)?;
            let best = loops
                .into_iter()
                .map(|f| (loop_area(&f), f))
                .max_by(|a, b| a.0.total_cmp(&b.0));
            match best {
                Some((area, f)) => (area, Some(f)),
                None => (0.0, None),
            }
        }
    };
    let (member, warning) = membership(statistic, threshold);
    let mut certificate = None;
    if member {
        certificate = match (family, found) {
            (Family::DiskAreaBound, Some(f)) => f.intersects_l.then_some(f),
            (Family::DiskAreaBound, None) => None,
            _ => find_fixed_loops(system, l, &opts.loops)?
                .into_iter()
                .find(|f| f.intersects_l),
        };
    }
    Ok(FamilyVerdict {
        family,
        statistic,
        threshold,
        member,
        falsification_alarm: member && certificate.is_none(),
        certificate,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Autonomy {
    NonAutonomous,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonAutonomyReport {
    pub verdict: Autonomy,
    pub member: bool,
    pub pattern: IntersectionPattern,
    pub report: ObstructionReport,
}

/// A family member whose image of `L` is fully obstructed is not the time-1
/// map of any autonomous flow.
pub fn nonautonomy_verdict(
    l: &Curve,
    k: &Curve,
    family: &FamilyVerdict,
    opts: &IntersectOptions,
) -> Result<NonAutonomyReport, FamilyError> {
    let pattern = intersect_curves(l, k, opts)?;
    let report = obstruct(
        &pattern,
        l,
        k,
        &SnakeOptions {
            boundary_margin: opts.boundary_margin,
            ..SnakeOptions::default()
        },
    );
    let verdict = if family.member && report.verdict == Verdict::FullyObstructed {
        Autonomy::NonAutonomous
    } else {
        Autonomy::Inconclusive
    };
    Ok(NonAutonomyReport {
        verdict,
        member: family.member,
        pattern,
        report,
    })
}
