//! Acceptance criteria. One PASS/FAIL line per criterion; exits non-zero if
//! any criterion fails. Every tolerance is pinned below.

mod support;

use curve_obstruction::family::{
    disk_area_bound_check, fl_certificate, m2_statistic, nonautonomy_verdict, AreaBound, Autonomy, CertifyOptions,
    Family,
};
use curve_obstruction::flow::{
    boundary_rotations, find_fixed_loops, jacobian_determinant, rotation_number, standard_image, trace_periodic_orbit,
    transversal, HamiltonianSystem, LoopSearchOptions, RotationOptions, TimeMap, DEFAULT_STEP,
};
use curve_obstruction::intersect::curves_meet;
use curve_obstruction::obstruction::{
    linearization_sign, obstruct, order_preservation_oracle, sign_constancy_check, OrderVerdict, SignCheck,
    SnakeOptions, Verdict,
};
use curve_obstruction::snake::{hausdorff, perturb_all, Perturbation, SnakeParams};
use curve_obstruction::{intersect_curves, order_permutation, standard_curve, Curve, IntersectOptions, Point, Surface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

const LINEARIZATION_TOL: f64 = 1e-4;
const LINEARIZATION_FD_STEP: f64 = 1e-5;
const SIGN_SAMPLES: usize = 32;
const AREA_TOL: f64 = 1e-6;
const AREA_FD_STEP: f64 = 1e-5;
const AREA_POINTS: usize = 100;
const ROTATION_TOL: f64 = 1e-6;
const PROFILE_POINTS: usize = 50;
const FLUX_TOL: f64 = 1e-6;
const FLUX_VS_ROTATION_TOL: f64 = 1e-4;
const ROOT_TOL: f64 = 1e-6;
const HALF_DISK: f64 = 0.5;
const HALF_DISK_TOL: f64 = 1e-9;
const RANDOM_LOOPS: usize = 1000;
const ORACLE_PAIRS: usize = 500;
const HAUSDORFF_TOL: f64 = 1e-12;
const HAUSDORFF_SPACING: f64 = 1e-3;

type Outcome = Result<String, String>;
type Profile = Box<dyn Fn(f64) -> f64>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn annulus_l() -> Curve {
    standard_curve(Surface::Annulus)
}

fn shear_pair(c: f64) -> (Curve, Curve) {
    let k = standard_image(&HamiltonianSystem::linear_shear(c)).expect("shear image");
    (annulus_l(), k)
}

/// Perturbed fixtures: the shear images for c = 3, 5, 7 and a tilted
/// diameter on the disk, with default snake parameters.
struct Fixture {
    name: String,
    l: Curve,
    k: Curve,
    out: Perturbation,
}

fn perturbed_fixtures() -> Result<Vec<Fixture>, String> {
    let opts = IntersectOptions::default();
    let mut v = Vec::new();
    for c in [3.0, 5.0, 7.0] {
        let (l, k) = shear_pair(c);
        let out = perturb_all(&l, &k, &SnakeParams::default(), &opts, false).map_err(|e| format!("shear {c}: {e}"))?;
        v.push(Fixture {
            name: format!("shear {c}"),
            l,
            k,
            out,
        });
    }
    let l = standard_curve(Surface::Disk);
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let k = Curve::new(Surface::Disk, vec![Point::new(-c, -s), Point::new(c, s)], false).map_err(|e| e.to_string())?;
    let out = perturb_all(&l, &k, &SnakeParams::default(), &opts, false).map_err(|e| format!("disk: {e}"))?;
    v.push(Fixture {
        name: "tilted diameter".into(),
        l,
        k,
        out,
    });
    Ok(v)
}

fn built_in_systems() -> Vec<(&'static str, HamiltonianSystem)> {
    vec![
        ("linear shear 3", HamiltonianSystem::linear_shear(3.0)),
        ("linear shear -2.5", HamiltonianSystem::linear_shear(-2.5)),
        (
            "poly shear 6s²-4s³",
            HamiltonianSystem::poly_shear(vec![0.0, 0.0, 6.0, -4.0]),
        ),
        ("bump shear 2", HamiltonianSystem::bump_shear(2.0)),
        ("radial disk 1", HamiltonianSystem::radial_disk(1.0)),
        ("radial disk 0.7", HamiltonianSystem::radial_disk(0.7)),
    ]
}

fn obstruction_round_trip() -> Outcome {
    let opts = IntersectOptions::default();
    let mut detail = Vec::new();
    for c in [3.0f64, 5.0, 7.0] {
        let (l, k) = shear_pair(c);
        let pat = intersect_curves(&l, &k, &opts).map_err(|e| e.to_string())?;
        let expected = c.ceil() as usize - 1;
        ensure(pat.len() == expected, || {
            format!("shear {c}: {} crossings, want {expected}", pat.len())
        })?;
        let before = obstruct(&pat, &l, &k, &SnakeOptions::default());
        ensure(before.verdict == Verdict::Unobstructed, || {
            format!("shear {c}: unperturbed verdict {:?}", before.verdict)
        })?;
        let out = perturb_all(&l, &k, &SnakeParams::default(), &opts, false).map_err(|e| e.to_string())?;
        ensure(out.report.verdict == Verdict::FullyObstructed, || {
            format!("shear {c}: {:?}", out.report.verdict)
        })?;
        ensure(out.report.triples.len() == expected, || {
            format!("shear {c}: {} triples, want {expected}", out.report.triples.len())
        })?;
        let sys = HamiltonianSystem::linear_shear(c);
        let fv =
            fl_certificate(&sys, &l, Family::M1Displacement, &CertifyOptions::default()).map_err(|e| e.to_string())?;
        let verdict = nonautonomy_verdict(&l, &out.curve, &fv, &opts)
            .map_err(|e| e.to_string())?
            .verdict;
        let want = if c > 4.0 {
            Autonomy::NonAutonomous
        } else {
            Autonomy::Inconclusive
        };
        ensure(verdict == want, || format!("shear {c}: {verdict:?}, want {want:?}"))?;
        detail.push(format!("c={c}: {expected} triples, {verdict:?}"));
    }
    Ok(detail.join("; "))
}

fn order_oracle() -> Outcome {
    let mut triples = 0;
    for f in perturbed_fixtures()? {
        ensure(f.out.report.verdict == Verdict::FullyObstructed, || {
            format!("{}: not fully obstructed", f.name)
        })?;
        for t in &f.out.report.triples {
            let sub = f.out.pattern.restrict(&t.indices);
            ensure(order_preservation_oracle(&sub) == OrderVerdict::Inconsistent, || {
                format!("{}: triple {:?} is order-consistent", f.name, t.indices)
            })?;
            triples += 1;
        }
    }
    let opts = IntersectOptions::default();
    let mut autonomous = 0;
    for (name, sys) in [
        ("shear 3", HamiltonianSystem::linear_shear(3.0)),
        ("shear 5", HamiltonianSystem::linear_shear(5.0)),
        ("shear 7", HamiltonianSystem::linear_shear(7.0)),
        // profile maxima off the integers keep the images transverse to L
        ("bump 1.7", HamiltonianSystem::bump_shear(1.7)),
        (
            "poly 0.3s+4s²-2s³",
            HamiltonianSystem::poly_shear(vec![0.0, 0.3, 4.0, -2.0]),
        ),
        ("radial 0.7", HamiltonianSystem::radial_disk(0.7)),
    ] {
        let l = standard_curve(sys.surface());
        let k = standard_image(&sys).map_err(|e| e.to_string())?;
        let pat = intersect_curves(&l, &k, &opts).map_err(|e| format!("{name}: {e}"))?;
        let (_, class) = order_permutation(&pat);
        ensure(class.preserves_order(), || format!("{name}: {class:?}"))?;
        ensure(
            order_preservation_oracle(&pat) == OrderVerdict::ConsistentWithFixedPoints,
            || format!("{name}: oracle rejects an autonomous image"),
        )?;
        autonomous += 1;
    }
    Ok(format!(
        "{triples} snake triples inconsistent; {autonomous} autonomous images monotone"
    ))
}

fn linearization() -> Outcome {
    let sys = HamiltonianSystem::linear_shear(3.0);
    let map = TimeMap { system: &sys, t: 1.0 };
    let r = linearization_sign(&map, Point::new(0.5, 1.0 / 3.0), [1.0, 0.0], LINEARIZATION_FD_STEP)
        .map_err(|e| e.to_string())?;
    let want = [[1.0, 3.0], [0.0, 1.0]];
    let err = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (r.matrix[i][j] - want[i][j]).abs())
        .fold(0.0, f64::max);
    ensure(err < LINEARIZATION_TOL, || {
        format!("matrix {:?}, error {err:e}", r.matrix)
    })?;
    let orbit = trace_periodic_orbit(&sys, Point::new(0.0, 1.0 / 3.0)).map_err(|e| e.to_string())?;
    let check = sign_constancy_check(&map, &orbit, SIGN_SAMPLES).map_err(|e| e.to_string())?;
    ensure(check == SignCheck::Constant(1), || format!("shear loop: {check:?}"))?;

    // F = 6s² − 4s³; F′ = 1 on the decreasing branch at s = 1/2 + √(1/6)
    let dec = HamiltonianSystem::poly_shear(vec![0.0, 0.0, 6.0, -4.0]);
    let dmap = TimeMap { system: &dec, t: 1.0 };
    let s_star = 0.5 + (1.0f64 / 6.0).sqrt();
    let dorbit = trace_periodic_orbit(&dec, Point::new(0.0, s_star)).map_err(|e| e.to_string())?;
    let dcheck = sign_constancy_check(&dmap, &dorbit, SIGN_SAMPLES).map_err(|e| e.to_string())?;
    ensure(dcheck == SignCheck::Constant(-1), || {
        format!("decreasing branch: {dcheck:?}")
    })?;
    Ok(format!("max matrix error {err:.1e}, signs +1 / -1"))
}

fn area_preservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for (name, sys) in built_in_systems() {
        ensure(sys.step() == DEFAULT_STEP, || format!("{name}: step {}", sys.step()))?;
        let map = TimeMap { system: &sys, t: 1.0 };
        for _ in 0..AREA_POINTS {
            let p = match sys.surface() {
                Surface::Annulus => [rng.gen_range(0.0..1.0), rng.gen_range(0.01..0.99)],
                Surface::Disk => {
                    let (r, a) = (0.95 * rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..TAU));
                    [r * a.cos(), r * a.sin()]
                }
            };
            let det = jacobian_determinant(&map, p, AREA_FD_STEP).map_err(|e| format!("{name}: {e}"))?;
            ensure((det - 1.0).abs() < AREA_TOL, || format!("{name} at {p:?}: det {det}"))?;
            worst = worst.max((det - 1.0).abs());
        }
    }
    Ok(format!("max |det - 1| = {worst:.1e}"))
}

fn rotation_numbers() -> Outcome {
    let opts = RotationOptions::default();
    let sys = HamiltonianSystem::linear_shear(3.0);
    let mut worst: f64 = 0.0;
    for p in transversal(Surface::Annulus, 0.0, 1.0, PROFILE_POINTS) {
        let r = rotation_number(&sys, p, &opts).map_err(|e| e.to_string())?;
        worst = worst.max((r.value - 3.0 * p.y).abs());
    }
    ensure(worst < ROTATION_TOL, || format!("shear profile error {worst:e}"))?;
    let disk = HamiltonianSystem::radial_disk(1.0);
    let mut dworst: f64 = 0.0;
    for r in [0.2, 0.5, 0.8] {
        let est = rotation_number(&disk, Point::new(r, 0.0), &opts).map_err(|e| e.to_string())?;
        dworst = dworst.max((est.value - 1.0).abs());
    }
    ensure(dworst < ROTATION_TOL, || format!("radial disk error {dworst:e}"))?;
    Ok(format!("shear error {worst:.1e}, disk error {dworst:.1e}"))
}

/// Composite Simpson rule on `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> Result<f64, String>, n: usize) -> Result<f64, String> {
    let h = 1.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f(i as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

fn flux_identity() -> Outcome {
    let l = annulus_l();
    let sys = HamiltonianSystem::bump_shear(2.0);
    let img = standard_image(&sys).map_err(|e| e.to_string())?;
    let m2 = m2_statistic(&l, &img).map_err(|e| e.to_string())?;
    ensure((m2 - 2.0).abs() < FLUX_TOL, || format!("m2 = {m2}"))?;
    let opts = RotationOptions::default();
    let integral = simpson(
        |s| {
            rotation_number(&sys, Point::new(0.0, s), &opts)
                .map(|r| r.value)
                .map_err(|e| e.to_string())
        },
        20,
    )?;
    ensure((m2 - integral).abs() < FLUX_VS_ROTATION_TOL, || {
        format!("m2 {m2} vs ∫ρ {integral}")
    })?;
    let weak = HamiltonianSystem::bump_shear(1.0);
    let fv = fl_certificate(&weak, &l, Family::M2Flux, &CertifyOptions::default()).map_err(|e| e.to_string())?;
    ensure((fv.statistic - 1.0).abs() < FLUX_TOL, || {
        format!("weak m2 = {}", fv.statistic)
    })?;
    ensure(!fv.member, || "F′ = 6s(1−s) accepted as a member".into())?;
    Ok(format!(
        "m2 = {m2:.9}, ∫ρ = {integral:.9}, weak m2 = {:.9} (not member)",
        fv.statistic
    ))
}

/// Roots of `ρ(s) = k` on `[lo, hi]` by bisection on a fine bracket grid;
/// tangential roots are located by bisection on `ρ′`.
fn bisection_roots(fp: impl Fn(f64) -> f64, fpp: impl Fn(f64) -> f64, k: f64, lo: f64, hi: f64) -> Vec<f64> {
    let bisect = |g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64| {
        let ga = g(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (g(m) > 0.0) == (ga > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let n = 4000;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let g = |s: f64| fp(s) - k;
    let mut roots = Vec::new();
    for w in xs.windows(2) {
        let (ga, gb) = (g(w[0]), g(w[1]));
        if ga == 0.0 {
            roots.push(w[0]);
        } else if ga * gb < 0.0 {
            roots.push(bisect(&g, w[0], w[1]));
        } else if fpp(w[0]) * fpp(w[1]) < 0.0 {
            let c = bisect(&fpp, w[0], w[1]);
            if g(c).abs() < 1e-12 {
                roots.push(c);
            }
        }
    }
    if g(hi) == 0.0 {
        roots.push(hi);
    }
    roots
}

fn oracle_positions(fp: &dyn Fn(f64) -> f64, fpp: &dyn Fn(f64) -> f64, margin: f64) -> Vec<f64> {
    let max = (0..=1000)
        .map(|i| fp(i as f64 / 1000.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut all = Vec::new();
    for k in 1..=(max + 1e-9).floor() as i64 {
        all.extend(bisection_roots(fp, fpp, k as f64, margin, 1.0 - margin));
    }
    all.sort_by(f64::total_cmp);
    all
}

fn certificates() -> Outcome {
    let l = annulus_l();
    let opts = CertifyOptions::default();
    let margin = LoopSearchOptions::default().boundary_margin;
    let shear5 = HamiltonianSystem::linear_shear(5.0);
    let bump = HamiltonianSystem::bump_shear(2.0);
    let cases: [(&str, &HamiltonianSystem, Family, Profile, Profile); 2] = [
        (
            "shear 5",
            &shear5,
            Family::M1Displacement,
            Box::new(|s| 5.0 * s),
            Box::new(|_| 5.0),
        ),
        (
            "bump 2",
            &bump,
            Family::M2Flux,
            Box::new(|s| 12.0 * s * (1.0 - s)),
            Box::new(|s| 12.0 - 24.0 * s),
        ),
    ];
    let mut detail = Vec::new();
    for (name, sys, family, fp, fpp) in &cases {
        let fv = fl_certificate(sys, &l, *family, &opts).map_err(|e| e.to_string())?;
        ensure(fv.member && !fv.falsification_alarm, || format!("{name}: {fv:?}"))?;
        let cert = fv
            .certificate
            .as_ref()
            .ok_or_else(|| format!("{name}: no certificate"))?;
        ensure(cert.rotation != 0 && cert.intersects_l, || {
            format!("{name}: certificate {cert:?}")
        })?;
        let oracle = oracle_positions(fp.as_ref(), fpp.as_ref(), margin);
        let loops = find_fixed_loops(sys, &l, &opts.loops).map_err(|e| e.to_string())?;
        let mut found: Vec<f64> = loops.iter().map(|f| f.position).collect();
        found.sort_by(f64::total_cmp);
        ensure(found.len() == oracle.len(), || {
            format!("{name}: loops at {found:?}, oracle {oracle:?}")
        })?;
        let err = found
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(err < ROOT_TOL, || {
            format!("{name}: loops at {found:?}, oracle {oracle:?}")
        })?;
        ensure(oracle.iter().any(|r| (r - cert.position).abs() < ROOT_TOL), || {
            format!("{name}: certificate at {} off the oracle roots", cert.position)
        })?;
        detail.push(format!("{name}: {} loops, max root error {err:.1e}", found.len()));
    }

    let mut alarms = 0;
    let mut members = 0;
    let sweep: Vec<(HamiltonianSystem, Family)> = [0.5, 1.5, 2.5, 3.7, 4.2, 5.0, 5.5, 6.3, 7.0, 8.9]
        .iter()
        .map(|&c| (HamiltonianSystem::linear_shear(c), Family::M1Displacement))
        .chain(
            [0.5, 0.9, 1.2, 1.5, 2.0, 2.5, 3.0, 3.3, 4.0, 5.0]
                .iter()
                .map(|&a| (HamiltonianSystem::bump_shear(a), Family::M2Flux)),
        )
        .collect();
    for (sys, family) in &sweep {
        let fv = fl_certificate(sys, &l, *family, &opts).map_err(|e| e.to_string())?;
        alarms += fv.falsification_alarm as usize;
        members += fv.member as usize;
        if let Some(c) = &fv.certificate {
            ensure(c.rotation != 0 && c.intersects_l, || {
                format!("{:?}: certificate {c:?}", sys.spec())
            })?;
        }
    }
    ensure(alarms == 0, || format!("{alarms} falsification alarms in the sweep"))?;
    detail.push(format!("sweep: {} systems, {members} members, 0 alarms", sweep.len()));
    Ok(detail.join("; "))
}

fn boundary_rotation_bound() -> Outcome {
    let opts = RotationOptions::default();
    let mut n = 0;
    for (name, sys) in built_in_systems() {
        for b in boundary_rotations(&sys, &opts).map_err(|e| format!("{name}: {e}"))? {
            ensure(
                b.rotation > b.displacement - 1.0 && b.rotation < b.displacement + 1.0,
                || format!("{name}: rotation {} vs displacement {}", b.rotation, b.displacement),
            )?;
            n += 1;
        }
    }
    Ok(format!("{n} boundary components inside (Δ−1, Δ+1)"))
}

/// A random simple loop avoiding the diameter: star-shaped about a centre in
/// one half-disk, or a polygon filling most of a half-disk.
fn random_loop(rng: &mut ChaCha8Rng) -> Option<Curve> {
    let up = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let v: Vec<Point> = if rng.gen_bool(0.2) {
        let (gap, rim, n) = (
            rng.gen_range(1e-4..0.05),
            rng.gen_range(0.95..0.9999),
            rng.gen_range(8..64),
        );
        let mut v = vec![Point::new(rim, up * gap)];
        v.extend((0..=n).map(|i| {
            let t = std::f64::consts::PI * i as f64 / n as f64;
            Point::new(rim * t.cos(), up * (rim * t.sin()).max(gap))
        }));
        v.push(Point::new(-rim, up * gap));
        v.dedup_by(|a, b| (a.x - b.x).hypot(a.y - b.y) < 1e-12);
        v
    } else {
        let c = (rng.gen_range(-0.6..0.6), up * rng.gen_range(0.05..0.7));
        let n = rng.gen_range(3..24);
        let mut ang: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        ang.sort_by(f64::total_cmp);
        ang.into_iter()
            .map(|a| {
                let r = rng.gen_range(0.02..0.9);
                Point::new(c.0 + r * a.cos(), c.1 + r * a.sin())
            })
            .collect()
    };
    if v.iter().any(|p| p.norm() >= 0.9999) {
        return None;
    }
    Curve::new(Surface::Disk, v, true).ok()
}

fn disk_area_bound() -> Outcome {
    let l = standard_curve(Surface::Disk);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut accepted, mut largest): (usize, f64) = (0, 0.0);
    while accepted < RANDOM_LOOPS {
        let Some(lp) = random_loop(&mut rng) else { continue };
        if curves_meet(&lp, &l) {
            continue;
        }
        let check = disk_area_bound_check(&lp, &l).map_err(|e| e.to_string())?;
        ensure(check.area <= HALF_DISK + HALF_DISK_TOL, || {
            format!("loop avoiding L with area {}", check.area)
        })?;
        ensure(check.consistent(), || format!("inconsistent check {check:?}"))?;
        largest = largest.max(check.area);
        accepted += 1;
    }
    let circle: Vec<Point> = (0..256)
        .map(|i| {
            let t = TAU * (i as f64 + 0.5) / 256.0;
            Point::new(0.8 * t.cos(), 0.8 * t.sin())
        })
        .collect();
    let circle = Curve::new(Surface::Disk, circle, true).map_err(|e| e.to_string())?;
    let check = disk_area_bound_check(&circle, &l).map_err(|e| e.to_string())?;
    ensure(check.bound == AreaBound::MustIntersect && check.intersects, || {
        format!("circle r=0.8: {check:?}")
    })?;
    Ok(format!(
        "{accepted} loops, largest area {largest:.6}; circle r=0.8 area {:.4} must intersect and does",
        check.area
    ))
}

fn oracle_equivalence() -> Outcome {
    let (skipped, crossings) = support::compare_random_pairs(0x5eed_0001, ORACLE_PAIRS)?;
    Ok(format!(
        "{ORACLE_PAIRS} pairs, {crossings} crossings, {skipped} degenerate draws skipped"
    ))
}

fn snake_geometry() -> Outcome {
    let opts = IntersectOptions::default();
    let mut detail = Vec::new();
    for f in perturbed_fixtures()? {
        let before = intersect_curves(&f.l, &f.k, &opts).map_err(|e| e.to_string())?.len();
        let after = intersect_curves(&f.l, &f.out.curve, &opts)
            .map_err(|e| e.to_string())?
            .len();
        ensure(after == 3 * before, || {
            format!("{}: {before} → {after} crossings", f.name)
        })?;
        let bound = f.out.params.w.max(f.out.params.a);
        let d = hausdorff(&f.k, &f.out.curve, HAUSDORFF_SPACING);
        ensure(d <= bound + HAUSDORFF_TOL, || format!("{}: d_H {d} > {bound}", f.name))?;
        detail.push(format!("{}: {before}→{after}, d_H {d:.4}", f.name));
    }
    Ok(detail.join("; "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("obstruction round-trip", obstruction_round_trip),
        ("order oracle", order_oracle),
        ("linearization sign", linearization),
        ("area preservation", area_preservation),
        ("rotation numbers", rotation_numbers),
        ("flux identity", flux_identity),
        ("fixed-loop certificates", certificates),
        ("boundary rotation bound", boundary_rotation_bound),
        ("disk area bound", disk_area_bound),
        ("exact oracle equivalence", oracle_equivalence),
        ("snake geometry", snake_geometry),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.1}s): {d}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {e}", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
