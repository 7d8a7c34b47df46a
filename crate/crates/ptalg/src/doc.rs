//! The JSON surface document: the single input/output format of the tool.
//!
//! Rationals are serialized as strings ("3", "-1/2"), prime-field elements
//! as integers. Unknown fields are rejected and all maps are emitted in
//! sorted key order, so equal surfaces produce identical bytes.

use crate::error::{Error, Result};
use crate::field::{is_probably_prime, parse_rat, Field, Fp, Rat};
use crate::surface::{RawSurface, Surface};
use crate::surgery::RibbonGraph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDocument {
    pub version: u64,
    pub ring: RingDoc,
    pub points: Vec<PointDoc>,
    #[serde(default)]
    pub boundaries: Vec<BoundaryDoc>,
    pub arcs: Vec<ArcDoc>,
    pub rotations: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub faces: Vec<FaceDoc>,
    pub declared: DeclaredDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum RingDoc {
    Q,
    Fp { p: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub id: String,
    pub m: u64,
    pub lambda: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDoc {
    pub id: String,
    pub points: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ArcDoc {
    pub id: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FaceDoc {
    pub anchor: String,
    #[serde(default)]
    pub punctures: Vec<String>,
    #[serde(default)]
    pub holes: u64,
    #[serde(default)]
    pub genus: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DeclaredDoc {
    pub genus: u64,
    #[serde(rename = "boundaryCount")]
    pub boundary_count: u64,
}

/// Brauer-graph input for `import-brauer`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BrauerDocument {
    pub version: u64,
    pub ring: RingDoc,
    pub vertices: Vec<PointDoc>,
    pub edges: Vec<ArcDoc>,
    pub rotations: BTreeMap<String, Vec<String>>,
}

fn scalar_from_json<F: Field>(
    v: &serde_json::Value,
    ring: &RingDoc,
    make: &dyn Fn(&str) -> Result<F>,
) -> Result<F> {
    let _ = ring;
    match v {
        serde_json::Value::String(s) => make(s),
        serde_json::Value::Number(n) => make(&n.to_string()),
        _ => Err(Error::Parse(format!("bad scalar {v}"))),
    }
}

pub fn rat_from_str(s: &str) -> Result<Rat> {
    parse_rat(s).map_err(Error::Parse)
}

pub fn raw_from_doc_rat(doc: &SurfaceDocument) -> Result<RawSurface<Rat>> {
    raw_from_doc(doc, &|s| rat_from_str(s))
}

pub fn raw_from_doc_fp(doc: &SurfaceDocument, p: u64) -> Result<RawSurface<Fp>> {
    raw_from_doc(doc, &|s| {
        let n: i128 = s
            .parse()
            .map_err(|e| Error::Parse(format!("bad integer {s}: {e}")))?;
        Ok(Fp::new(n, p))
    })
}

fn raw_from_doc<F: Field>(
    doc: &SurfaceDocument,
    make: &dyn Fn(&str) -> Result<F>,
) -> Result<RawSurface<F>> {
    if doc.version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported document version {}",
            doc.version
        )));
    }
    let mut points = Vec::new();
    for p in &doc.points {
        points.push((
            p.id.clone(),
            p.m,
            scalar_from_json(&p.lambda, &doc.ring, make)?,
            p.boundary.clone(),
        ));
    }
    Ok(RawSurface {
        points,
        boundaries: doc
            .boundaries
            .iter()
            .map(|b| (b.id.clone(), b.points.clone()))
            .collect(),
        arcs: doc
            .arcs
            .iter()
            .map(|a| (a.id.clone(), a.from.clone(), a.to.clone()))
            .collect(),
        rotations: doc.rotations.clone(),
        faces: doc
            .faces
            .iter()
            .map(|f| (f.anchor.clone(), f.punctures.clone(), f.holes, f.genus))
            .collect(),
        genus: doc.declared.genus,
        boundary_count: doc.declared.boundary_count,
    })
}

pub fn doc_from_raw<F: Field>(raw: &RawSurface<F>, ring: RingDoc) -> SurfaceDocument {
    SurfaceDocument {
        version: FORMAT_VERSION,
        ring,
        points: raw
            .points
            .iter()
            .map(|(id, m, l, b)| PointDoc {
                id: id.clone(),
                m: *m,
                lambda: serde_json::Value::String(format!("{l}")),
                boundary: b.clone(),
            })
            .collect(),
        boundaries: raw
            .boundaries
            .iter()
            .map(|(id, pts)| BoundaryDoc {
                id: id.clone(),
                points: pts.clone(),
            })
            .collect(),
        arcs: raw
            .arcs
            .iter()
            .map(|(id, from, to)| ArcDoc {
                id: id.clone(),
                from: from.clone(),
                to: to.clone(),
            })
            .collect(),
        rotations: raw.rotations.clone(),
        faces: raw
            .faces
            .iter()
            .map(|(anchor, punctures, holes, genus)| FaceDoc {
                anchor: anchor.clone(),
                punctures: punctures.clone(),
                holes: *holes,
                genus: *genus,
            })
            .collect(),
        declared: DeclaredDoc {
            genus: raw.genus,
            boundary_count: raw.boundary_count,
        },
    }
}

pub fn parse_document(text: &str) -> Result<SurfaceDocument> {
    let doc: SurfaceDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("{e}")))?;
    if let RingDoc::Fp { p } = doc.ring {
        if !is_probably_prime(p) {
            return Err(Error::Parse(format!("{p} is not prime")));
        }
    }
    Ok(doc)
}

pub fn parse_brauer(text: &str) -> Result<BrauerDocument> {
    let doc: BrauerDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("{e}")))?;
    if doc.version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported document version {}",
            doc.version
        )));
    }
    if let RingDoc::Fp { p } = doc.ring {
        if !is_probably_prime(p) {
            return Err(Error::Parse(format!("{p} is not prime")));
        }
    }
    Ok(doc)
}

pub fn ribbon_from_brauer_rat(doc: &BrauerDocument) -> Result<RibbonGraph<Rat>> {
    let mut vertices = Vec::new();
    for v in &doc.vertices {
        vertices.push((
            v.id.clone(),
            v.m,
            scalar_from_json(&v.lambda, &doc.ring, &|s| rat_from_str(s))?,
        ));
    }
    Ok(RibbonGraph {
        vertices,
        edges: doc
            .edges
            .iter()
            .map(|e| (e.id.clone(), e.from.clone(), e.to.clone()))
            .collect(),
        rotations: doc.rotations.clone(),
    })
}

pub fn render_document(doc: &SurfaceDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

/// Parse a document and build the surface over Q, failing on F_p input.
pub fn surface_rat_from_text(text: &str) -> Result<Surface<Rat>> {
    let doc = parse_document(text)?;
    match doc.ring {
        RingDoc::Q => Surface::from_raw(&raw_from_doc_rat(&doc)?),
        RingDoc::Fp { .. } => Err(Error::Parse(
            "document uses a prime field; this entry point is rational-only".into(),
        )),
    }
}
