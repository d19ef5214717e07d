//! JSON documents: a versioned envelope around one payload, parsed strictly
//! and emitted canonically (sorted keys, 17 significant digits).

use crate::curve::Curve;
use crate::family::{FamilyVerdict, NonAutonomyReport};
use crate::flow::{FixedLoop, FluxReport, HamiltonianSystem, PeriodicOrbit, RotationProfile};
use crate::intersect::IntersectionPattern;
use crate::obstruction::ObstructionReport;
use crate::snake::Perturbation;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;
use std::collections::BTreeMap;
use std::io;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Version(u64),
    #[error("expected a {expected} document, found {found}")]
    WrongPayload {
        expected: &'static str,
        found: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Curve(Curve),
    HamiltonianSystem(HamiltonianSystem),
    IntersectionPattern(IntersectionPattern),
    ObstructionReport(ObstructionReport),
    FamilyVerdict(FamilyVerdict),
    RotationProfile(RotationProfile),
    FluxReport(FluxReport),
    PeriodicOrbit(PeriodicOrbit),
    FixedLoops(Vec<FixedLoop>),
    Perturbation(Box<Perturbation>),
    NonAutonomyReport(Box<NonAutonomyReport>),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Curve(_) => "curve",
            Payload::HamiltonianSystem(_) => "hamiltonian_system",
            Payload::IntersectionPattern(_) => "intersection_pattern",
            Payload::ObstructionReport(_) => "obstruction_report",
            Payload::FamilyVerdict(_) => "family_verdict",
            Payload::RotationProfile(_) => "rotation_profile",
            Payload::FluxReport(_) => "flux_report",
            Payload::PeriodicOrbit(_) => "periodic_orbit",
            Payload::FixedLoops(_) => "fixed_loops",
            Payload::Perturbation(_) => "perturbation",
            Payload::NonAutonomyReport(_) => "non_autonomy_report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub schema_version: u32,
    pub payload: Payload,
    /// Parameters the producing command ran with.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Value>,
}

impl Document {
    pub fn new(payload: Payload) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            payload,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, Value>) -> Self {
        self.metadata = metadata;
        self
    }
}

fn from_value<T: DeserializeOwned>(value: Value) -> Result<T, IoError> {
    serde_path_to_error::deserialize(value).map_err(|e| IoError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn to_value_tree(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Schema {
        path: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn parse_document(text: &str) -> Result<Document, IoError> {
    let value = to_value_tree(text)?;
    match value.get("schema_version") {
        None => {
            return Err(IoError::Schema {
                path: ".".into(),
                message: "missing field `schema_version`".into(),
            })
        }
        Some(v) => match v.as_u64() {
            Some(n) if n == SCHEMA_VERSION as u64 => {}
            Some(n) => return Err(IoError::Version(n)),
            None => {
                return Err(IoError::Schema {
                    path: "schema_version".into(),
                    message: "expected an integer".into(),
                })
            }
        },
    }
    from_value(value)
}

/// Parse either a document or a bare payload object of type `T`.
pub fn parse_payload<T: DeserializeOwned>(
    text: &str,
    extract: impl Fn(Payload) -> Option<T>,
    expected: &'static str,
) -> Result<T, IoError> {
    let value = to_value_tree(text)?;
    if value.get("schema_version").is_some() {
        let doc = parse_document(text)?;
        let found = doc.payload.kind();
        extract(doc.payload).ok_or(IoError::WrongPayload { expected, found })
    } else {
        from_value(value)
    }
}

pub fn parse_curve(text: &str) -> Result<Curve, IoError> {
    parse_payload(
        text,
        |p| match p {
            Payload::Curve(c) => Some(c),
            _ => None,
        },
        "curve",
    )
}

pub fn parse_system(text: &str) -> Result<HamiltonianSystem, IoError> {
    parse_payload(
        text,
        |p| match p {
            Payload::HamiltonianSystem(h) => Some(h),
            _ => None,
        },
        "hamiltonian_system",
    )
}

pub fn parse_family_verdict(text: &str) -> Result<FamilyVerdict, IoError> {
    parse_payload(
        text,
        |p| match p {
            Payload::FamilyVerdict(v) => Some(v),
            _ => None,
        },
        "family_verdict",
    )
}

/// Writes floats with 17 significant digits so they round-trip exactly.
struct Canonical;

impl Formatter for Canonical {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            // one spelling for both zeros
            return writer.write_all(b"0.0");
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Canonical JSON for any serializable value: keys sorted, floats with 17
/// significant digits, no insignificant whitespace, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    // going through Value sorts struct fields along with map keys
    let tree = serde_json::to_value(value).expect("payload types serialize to JSON");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical);
    tree.serialize(&mut ser).expect("writing to memory");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn emit_document(doc: &Document) -> String {
    to_canonical_json(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::standard_curve;
    use crate::flow::standard_image;
    use crate::geometry::Surface;

    #[test]
    fn bare_curve_is_standing_l() {
        let c = parse_curve(r#"{"surface":"annulus","closed":false,"vertices":[[0,0],[0,1]]}"#).unwrap();
        assert_eq!(c, standard_curve(Surface::Annulus));
    }

    #[test]
    fn out_of_domain_vertex_reports_path() {
        let err = parse_curve(r#"{"surface":"annulus","closed":false,"vertices":[[0,0],[0,1.5]]}"#).unwrap_err();
        assert!(matches!(err, IoError::Schema { .. }), "{err:?}");
        let doc = r#"{"schema_version":1,"payload":{"curve":{"surface":"annulus","closed":false,"vertices":[[0,0],[0,1.5]]}}}"#;
        match parse_document(doc).unwrap_err() {
            IoError::Schema { path, .. } => assert!(path.starts_with("payload.curve"), "{path}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_versions_rejected() {
        assert!(parse_curve(r#"{"surface":"annulus","closed":false,"vertices":[[0,0],[0,1]],"x":1}"#).is_err());
        let doc =
            r#"{"schema_version":2,"payload":{"curve":{"surface":"annulus","closed":false,"vertices":[[0,0],[0,1]]}}}"#;
        assert_eq!(parse_document(doc), Err(IoError::Version(2)));
        let doc = r#"{"payload":{"curve":{"surface":"annulus","closed":false,"vertices":[[0,0],[0,1]]}}}"#;
        assert!(parse_document(doc).is_err());
    }

    #[test]
    fn emit_parse_is_byte_stable() {
        let img = standard_image(&crate::flow::HamiltonianSystem::linear_shear(3.0)).unwrap();
        let doc = Document::new(Payload::Curve(img));
        let text = emit_document(&doc);
        let back = parse_document(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(emit_document(&back), text);
    }

    #[test]
    fn canonical_numbers_and_key_order() {
        let text = to_canonical_json(&standard_curve(Surface::Annulus));
        assert_eq!(
            text,
            "{\"closed\":false,\"surface\":\"annulus\",\"vertices\":[[0.0,0.0],[0.0,1.0000000000000000e0]]}\n"
        );
        let third = to_canonical_json(&(1.0f64 / 3.0));
        assert_eq!(third, "3.3333333333333331e-1\n");
    }

    #[test]
    fn wrong_payload_kind() {
        let doc = emit_document(&Document::new(Payload::HamiltonianSystem(
            crate::flow::HamiltonianSystem::linear_shear(1.0),
        )));
        assert_eq!(
            parse_curve(&doc),
            Err(IoError::WrongPayload {
                expected: "curve",
                found: "hamiltonian_system"
            })
        );
        assert!(parse_system(&doc).is_ok());
    }
}
