//! `curvobs`: command-line access to intersection patterns, snake
//! obstructions, flow simulation and family certificates.
//!
//! Every command writes one canonical JSON document (or SVG/CSV) to stdout.
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use curve_obstruction::family::{fl_certificate, nonautonomy_verdict, CertifyOptions, Family, FamilyError};
use curve_obstruction::flow::{
    flux_between, image_curve, profile_grid, rotation_profile, FlowError, HamiltonianSystem, ImageOptions,
    LoopSearchOptions, RotationOptions, IMAGE_CHORD, IMAGE_SAGITTA,
};
use curve_obstruction::intersect::{DEFAULT_ANGLE_TOL, DEFAULT_BOUNDARY_MARGIN};
use curve_obstruction::io::{
    emit_document, parse_curve, parse_family_verdict, parse_system, Document, IoError, Payload,
};
use curve_obstruction::obstruction::{obstruct, SnakeOptions, MIN_ISOLATION};
use curve_obstruction::snake::{perturb_all, SnakeError, SnakeParams, DEFAULT_AMPLITUDE, DEFAULT_WIDTH};
use curve_obstruction::svg::render_svg;
use curve_obstruction::{intersect_curves, standard_curve, Curve, IntersectError, IntersectOptions};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "curvobs",
    version,
    about = "Snake obstructions to autonomy for curves on the annulus and disk"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct IntersectFlags {
    /// Smallest accepted |sin| of a crossing angle.
    #[arg(long, default_value_t = DEFAULT_ANGLE_TOL)]
    pub angle_tol: f64,
    /// Width δ of the boundary collar whose contacts are set aside.
    #[arg(long, default_value_t = DEFAULT_BOUNDARY_MARGIN)]
    pub boundary_margin: f64,
}

impl IntersectFlags {
    fn options(&self) -> IntersectOptions {
        IntersectOptions {
            angle_tol: self.angle_tol,
            boundary_margin: self.boundary_margin,
        }
    }

    fn echo(&self, meta: &mut BTreeMap<String, Value>) {
        meta.insert("angle_tol".into(), json!(self.angle_tol));
        meta.insert("boundary_margin".into(), json!(self.boundary_margin));
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct RotationFlags {
    /// First horizon is 2^min_exp time units.
    #[arg(long, default_value_t = 6)]
    pub min_exp: u32,
    /// Last horizon is 2^max_exp time units.
    #[arg(long, default_value_t = 14)]
    pub max_exp: u32,
    /// Agreement between successive extrapolated estimates.
    #[arg(long, default_value_t = 1e-6)]
    pub rotation_tol: f64,
}

impl RotationFlags {
    fn options(&self) -> RotationOptions {
        RotationOptions {
            min_exp: self.min_exp,
            max_exp: self.max_exp,
            tol: self.rotation_tol,
        }
    }

    fn echo(&self, meta: &mut BTreeMap<String, Value>) {
        meta.insert("min_exp".into(), json!(self.min_exp));
        meta.insert("max_exp".into(), json!(self.max_exp));
        meta.insert("rotation_tol".into(), json!(self.rotation_tol));
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ImageFlags {
    /// Largest distance between consecutive image points.
    #[arg(long, default_value_t = IMAGE_CHORD)]
    pub chord: f64,
    /// Largest deviation of an image midpoint from its chord.
    #[arg(long, default_value_t = IMAGE_SAGITTA)]
    pub sagitta: f64,
    /// Override the integrator step of the Hamiltonian file.
    #[arg(long)]
    pub step: Option<f64>,
}

impl ImageFlags {
    fn options(&self) -> ImageOptions {
        ImageOptions {
            chord: self.chord,
            sagitta: self.sagitta,
        }
    }

    fn echo(&self, sys: &HamiltonianSystem, meta: &mut BTreeMap<String, Value>) {
        meta.insert("chord".into(), json!(self.chord));
        meta.insert("sagitta".into(), json!(self.sagitta));
        meta.insert("step".into(), json!(sys.step()));
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    M1,
    M2,
    Disk,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::M1 => Family::M1Displacement,
            FamilyArg::M2 => Family::M2Flux,
            FamilyArg::Disk => Family::DiskAreaBound,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transverse crossings of L and K with signs and order data.
    Intersect {
        l: PathBuf,
        k: PathBuf,
        #[command(flatten)]
        flags: IntersectFlags,
    },
    /// Snake triples and the coverage verdict for (L, K).
    Obstruct {
        l: PathBuf,
        k: PathBuf,
        #[command(flatten)]
        flags: IntersectFlags,
        /// Smallest accepted isolation radius of a triple.
        #[arg(long, default_value_t = MIN_ISOLATION)]
        min_isolation: f64,
    },
    /// Replace every crossing of K with L by a snake; writes the new K.
    Perturb {
        l: PathBuf,
        k: PathBuf,
        #[command(flatten)]
        flags: IntersectFlags,
        /// Snake extent along L.
        #[arg(long, default_value_t = DEFAULT_WIDTH)]
        w: f64,
        /// Snake extent across L.
        #[arg(long, default_value_t = DEFAULT_AMPLITUDE)]
        a: f64,
        /// Room around each crossing [default: half the smallest crossing distance].
        #[arg(long)]
        clearance: Option<f64>,
        /// Halve (w, a) up to 6 times when a snake does not fit.
        #[arg(long)]
        auto_shrink: bool,
    },
    /// Image of a curve under the time-t map [default curve: the standing L].
    Flow {
        hamiltonian: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        image: ImageFlags,
    },
    /// Rotation numbers on an n×n sample grid.
    RotationProfile {
        hamiltonian: PathBuf,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Write CSV instead of a JSON document.
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        rotation: RotationFlags,
    },
    /// Signed area between the lifts of L and K.
    Flux { l: PathBuf, k: PathBuf },
    /// Family membership of the time-1 map, with a fixed-loop certificate.
    Certify {
        hamiltonian: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Curve L [default: the standing L of the surface].
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Rotation-number samples along the transversal.
        #[arg(long, default_value_t = 65)]
        samples: usize,
        #[command(flatten)]
        image: ImageFlags,
        #[command(flatten)]
        rotation: RotationFlags,
        #[arg(long, default_value_t = DEFAULT_BOUNDARY_MARGIN)]
        boundary_margin: f64,
    },
    /// Non-autonomy verdict for (L, K) given a family verdict for the map.
    Verdict {
        l: PathBuf,
        k: PathBuf,
        #[arg(long)]
        family_verdict: PathBuf,
        #[command(flatten)]
        flags: IntersectFlags,
    },
    /// SVG drawing of curves; with two curves, crossings and snakes are marked.
    Render {
        #[arg(required = true)]
        curves: Vec<PathBuf>,
        /// Draw the curves only.
        #[arg(long)]
        plain: bool,
        #[command(flatten)]
        flags: IntersectFlags,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

fn invalid(e: impl Display) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: e.to_string(),
    }
}

fn numerical(e: impl Display) -> Failure {
    Failure {
        code: EXIT_NUMERICAL,
        message: e.to_string(),
    }
}

fn flow_failure(e: FlowError) -> Failure {
    match e {
        FlowError::SolverDiverged(_) | FlowError::CriticalLevel | FlowError::OpenLevel => numerical(e),
        _ => invalid(e),
    }
}

fn family_failure(e: FamilyError) -> Failure {
    match e {
        FamilyError::Flow(f) => flow_failure(f),
        other => invalid(other),
    }
}

fn intersect_failure(e: IntersectError) -> Failure {
    invalid(e)
}

fn snake_failure(e: SnakeError) -> Failure {
    match e {
        SnakeError::NoCrossings | SnakeError::BadParams => invalid(e),
        SnakeError::Intersect(i) => intersect_failure(i),
        other => numerical(other),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load<T>(path: &Path, parse: fn(&str) -> Result<T, IoError>) -> Result<T, Failure> {
    parse(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_curve(path: &Path) -> Result<Curve, Failure> {
    load(path, parse_curve)
}

fn load_system(path: &Path, step: Option<f64>) -> Result<HamiltonianSystem, Failure> {
    let sys = load(path, parse_system)?;
    match step {
        Some(h) => sys.with_step(h).map_err(flow_failure),
        None => Ok(sys),
    }
}

fn meta(command: &str) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("command".into(), json!(command));
    m
}

fn document(payload: Payload, metadata: BTreeMap<String, Value>) -> String {
    emit_document(&Document::new(payload).with_metadata(metadata))
}

fn execute(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Intersect { l, k, flags } => {
            let (l, k) = (load_curve(&l)?, load_curve(&k)?);
            let pat = intersect_curves(&l, &k, &flags.options()).map_err(intersect_failure)?;
            let mut m = meta("intersect");
            flags.echo(&mut m);
            Ok(document(Payload::IntersectionPattern(pat), m))
        }
        Command::Obstruct {
            l,
            k,
            flags,
            min_isolation,
        } => {
            let (l, k) = (load_curve(&l)?, load_curve(&k)?);
            let pat = intersect_curves(&l, &k, &flags.options()).map_err(intersect_failure)?;
            let opts = SnakeOptions {
                boundary_margin: flags.boundary_margin,
                min_isolation,
            };
            let report = obstruct(&pat, &l, &k, &opts);
            let mut m = meta("obstruct");
            flags.echo(&mut m);
            m.insert("min_isolation".into(), json!(min_isolation));
            Ok(document(Payload::ObstructionReport(report), m))
        }
        Command::Perturb {
            l,
            k,
            flags,
            w,
            a,
            clearance,
            auto_shrink,
        } => {
            let (l, k) = (load_curve(&l)?, load_curve(&k)?);
            let params = SnakeParams {
                w,
                a,
                clearance,
                boundary_margin: flags.boundary_margin,
            };
            let out = perturb_all(&l, &k, &params, &flags.options(), auto_shrink).map_err(snake_failure)?;
            let mut m = meta("perturb");
            flags.echo(&mut m);
            m.insert("w".into(), json!(out.params.w));
            m.insert("a".into(), json!(out.params.a));
            m.insert("clearance".into(), clearance.map_or(json!("auto"), |c| json!(c)));
            m.insert("auto_shrink".into(), json!(auto_shrink));
            m.insert("crossings".into(), json!(out.pattern.len()));
            m.insert("triples".into(), json!(out.report.triples.len()));
            m.insert("verdict".into(), serde_json::to_value(out.report.verdict).unwrap());
            Ok(document(Payload::Curve(out.curve), m))
        }
        Command::Flow {
            hamiltonian,
            t,
            curve,
            image,
        } => {
            let sys = load_system(&hamiltonian, image.step)?;
            let l = match curve {
                Some(p) => load_curve(&p)?,
                None => standard_curve(sys.surface()),
            };
            let img = image_curve(&sys, t, &l, &image.options()).map_err(flow_failure)?;
            let mut m = meta("flow");
            m.insert("t".into(), json!(t));
            image.echo(&sys, &mut m);
            Ok(document(Payload::Curve(img), m))
        }
        Command::RotationProfile {
            hamiltonian,
            grid,
            csv,
            rotation,
        } => {
            let sys = load_system(&hamiltonian, None)?;
            let prof = rotation_profile(&sys, &profile_grid(sys.surface(), grid), &rotation.options())
                .map_err(flow_failure)?;
            if csv {
                return Ok(prof.to_csv());
            }
            let mut m = meta("rotation-profile");
            m.insert("grid".into(), json!(grid));
            m.insert("step".into(), json!(sys.step()));
            rotation.echo(&mut m);
            Ok(document(Payload::RotationProfile(prof), m))
        }
        Command::Flux { l, k } => {
            let (l, k) = (load_curve(&l)?, load_curve(&k)?);
            if l.surface() != curve_obstruction::Surface::Annulus || k.surface() != l.surface() {
                return Err(invalid("flux is defined for annulus curves"));
            }
            let (ll, kl) = (l.lift(), k.lift());
            let shift = (ll.points[0].theta - kl.points[0].theta).round() as i64;
            let report = flux_between(&ll, &kl.shifted(shift)).map_err(flow_failure)?;
            Ok(document(Payload::FluxReport(report), meta("flux")))
        }
        Command::Certify {
            hamiltonian,
            family,
            curve,
            samples,
            image,
            rotation,
            boundary_margin,
        } => {
            let sys = load_system(&hamiltonian, image.step)?;
            let l = match curve {
                Some(p) => load_curve(&p)?,
                None => standard_curve(sys.surface()),
            };
            let opts = CertifyOptions {
                image: image.options(),
                loops: LoopSearchOptions {
                    samples,
                    boundary_margin,
                    rotation: rotation.options(),
                    ..LoopSearchOptions::default()
                },
            };
            let v = fl_certificate(&sys, &l, family.into(), &opts).map_err(family_failure)?;
            let mut m = meta("certify");
            image.echo(&sys, &mut m);
            rotation.echo(&mut m);
            m.insert("samples".into(), json!(samples));
            m.insert("boundary_margin".into(), json!(boundary_margin));
            m.insert("root_tol".into(), json!(opts.loops.root_tol));
            Ok(document(Payload::FamilyVerdict(v), m))
        }
        Command::Verdict {
            l,
            k,
            family_verdict,
            flags,
        } => {
            let (l, k) = (load_curve(&l)?, load_curve(&k)?);
            let fv = load(&family_verdict, parse_family_verdict)?;
            let r = nonautonomy_verdict(&l, &k, &fv, &flags.options()).map_err(family_failure)?;
            let mut m = meta("verdict");
            flags.echo(&mut m);
            Ok(document(Payload::NonAutonomyReport(Box::new(r)), m))
        }
        Command::Render { curves, plain, flags } => {
            let cs = curves.iter().map(|p| load_curve(p)).collect::<Result<Vec<_>, _>>()?;
            if cs.iter().any(|c| c.surface() != cs[0].surface()) {
                return Err(invalid("all curves must lie on the same surface"));
            }
            let refs: Vec<&Curve> = cs.iter().collect();
            if plain || cs.len() != 2 {
                return Ok(render_svg(&refs, None, None));
            }
            let pat = intersect_curves(&cs[0], &cs[1], &flags.options()).map_err(intersect_failure)?;
            let report = obstruct(
                &pat,
                &cs[0],
                &cs[1],
                &SnakeOptions {
                    boundary_margin: flags.boundary_margin,
                    ..SnakeOptions::default()
                },
            );
            Ok(render_svg(&refs, Some(&pat), Some(&report)))
        }
    }
}

/// Parse arguments (including the program name) and run the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            return Outcome { code, stdout, stderr };
        }
    };
    match execute(cli.command) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}
