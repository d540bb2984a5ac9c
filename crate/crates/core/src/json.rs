//! Versioned JSON documents. Rationals are strings `p` or `p/q`, polynomial terms
//! are listed in canonical order (weighted degree, then exponent), and every
//! document emitted carries `"schema": "carnot-kit/1"`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::CatalogEntry;
use crate::coords::{AffineMap, CoordinateChange};
use crate::error::{check_dim, Error, Result};
use crate::graded::{Decay, MultiIndex, ScalingReport, WeightVector};
use crate::group::StructureConstants;
use crate::linalg::Matrix;
use crate::poly::{PolyMap, RationalPoly};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::verify::VerificationReport;
use crate::vfield::{Frame, PolyVectorField};

pub const SCHEMA: &str = "carnot-kit/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    exp: Vec<u32>,
    coef: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDoc {
    vars: usize,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyMapDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    vars: usize,
    components: Vec<PolyDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    weights: WeightVector,
    base_point: Vec<String>,
    fields: Vec<Vec<PolyDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BracketDoc {
    i: usize,
    j: usize,
    k: usize,
    coef: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    weights: WeightVector,
    brackets: Vec<BracketDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineDoc {
    matrix: Vec<Vec<String>>,
    offset: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChangeDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    weights: WeightVector,
    affine: AffineDoc,
    triangular: PolyMapDoc,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn check_schema(schema: &Option<String>) -> Result<()> {
    match schema.as_deref() {
        None | Some(SCHEMA) => Ok(()),
        Some(other) => Err(Error::Parse(format!(
            "unsupported schema `{other}`, expected `{SCHEMA}`"
        ))),
    }
}

fn rationals_to_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn strings_to_rationals(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn poly_doc(p: &RationalPoly, w: &[u32]) -> PolyDoc {
    PolyDoc {
        vars: p.nvars(),
        terms: p
            .sorted_terms(w)
            .into_iter()
            .map(|(e, c)| TermDoc {
                exp: e.0.clone(),
                coef: format_rational(c),
            })
            .collect(),
    }
}

fn poly_from_doc(d: &PolyDoc) -> Result<RationalPoly> {
    let mut p = RationalPoly::zero(d.vars);
    for t in &d.terms {
        check_dim(d.vars, t.exp.len())?;
        let e = MultiIndex(t.exp.clone());
        if !p.coeff(&e.0).is_zero() {
            return Err(Error::Parse(format!("repeated exponent {:?}", t.exp)));
        }
        p.add_term(e, parse_rational(&t.coef)?);
    }
    Ok(p)
}

fn polymap_doc(m: &PolyMap, w: &[u32]) -> PolyMapDoc {
    PolyMapDoc {
        schema: None,
        vars: m.nvars(),
        components: m.components().iter().map(|c| poly_doc(c, w)).collect(),
    }
}

fn polymap_from_doc(d: &PolyMapDoc) -> Result<PolyMap> {
    check_schema(&d.schema)?;
    let comps = d
        .components
        .iter()
        .map(|c| {
            check_dim(d.vars, c.vars)?;
            poly_from_doc(c)
        })
        .collect::<Result<Vec<_>>>()?;
    PolyMap::new(d.vars, comps)
}

fn to_value<T: Serialize>(doc: &T) -> Value {
    serde_json::to_value(doc).expect("documents serialize")
}

/// Polynomial with terms ordered by the given weights.
pub fn poly_to_json(p: &RationalPoly, w: &[u32]) -> Value {
    to_value(&poly_doc(p, w))
}

pub fn poly_from_json(v: &Value) -> Result<RationalPoly> {
    poly_from_doc(&PolyDoc::deserialize(v).map_err(parse_err)?)
}

/// Polynomial map `{"schema", "vars", "components": [poly, …]}`.
pub fn polymap_to_json(m: &PolyMap, w: &[u32]) -> Value {
    let mut d = polymap_doc(m, w);
    d.schema = Some(SCHEMA.into());
    to_value(&d)
}

pub fn polymap_from_json(v: &Value) -> Result<PolyMap> {
    polymap_from_doc(&PolyMapDoc::deserialize(v).map_err(parse_err)?)
}

pub fn point_to_json(p: &[Rational]) -> Value {
    json!({ "schema": SCHEMA, "point": rationals_to_strings(p) })
}

fn frame_doc(frame: &Frame, name: Option<&str>) -> FrameDoc {
    let w = frame.weights();
    FrameDoc {
        schema: Some(SCHEMA.into()),
        name: name.map(str::to_string),
        weights: w.clone(),
        base_point: rationals_to_strings(frame.base_point()),
        fields: frame
            .fields()
            .iter()
            .map(|x| x.coeffs().iter().map(|c| poly_doc(c, w)).collect())
            .collect(),
    }
}

pub fn frame_to_json(frame: &Frame) -> Value {
    to_value(&frame_doc(frame, None))
}

/// Fields in the frame layout without a base point check, e.g. model fields.
pub fn fields_to_json(fields: &[PolyVectorField], w: &WeightVector) -> Value {
    json!({
        "schema": SCHEMA,
        "weights": w,
        "fields": fields
            .iter()
            .map(|x| x.coeffs().iter().map(|c| to_value(&poly_doc(c, w))).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

/// Reads a frame document, or the `frame` member of a catalog bundle.
pub fn frame_from_json(v: &Value) -> Result<Frame> {
    if let Some(inner) = bundle_member(v, "frame")? {
        return frame_from_json(inner);
    }
    let d = FrameDoc::deserialize(v).map_err(parse_err)?;
    check_schema(&d.schema)?;
    let n = d.weights.dim();
    check_dim(n, d.fields.len())?;
    let fields = d
        .fields
        .iter()
        .map(|f| {
            check_dim(n, f.len())?;
            let coeffs = f
                .iter()
                .map(|c| {
                    check_dim(n, c.vars)?;
                    poly_from_doc(c)
                })
                .collect::<Result<Vec<_>>>()?;
            PolyVectorField::new(coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    Frame::new(fields, d.weights, strings_to_rationals(&d.base_point)?)
}

fn bundle_member<'a>(v: &'a Value, key: &str) -> Result<Option<&'a Value>> {
    let Some(obj) = v.as_object() else {
        return Err(Error::Parse("expected a JSON object".into()));
    };
    if obj.contains_key("algebra") && obj.contains_key("frame") {
        check_schema(&obj.get("schema").and_then(Value::as_str).map(str::to_string))?;
        return Ok(obj.get(key));
    }
    Ok(None)
}

fn algebra_doc(l: &StructureConstants) -> AlgebraDoc {
    AlgebraDoc {
        schema: Some(SCHEMA.into()),
        name: None,
        weights: l.weights().clone(),
        brackets: l
            .entries()
            .map(|(i, j, k, c)| BracketDoc {
                i: i + 1,
                j: j + 1,
                k: k + 1,
                coef: format_rational(c),
            })
            .collect(),
    }
}

/// Structure constants with 1-based indices, `[e_i, e_j] = Σ coef e_k` for `i < j`.
pub fn algebra_to_json(l: &StructureConstants) -> Value {
    to_value(&algebra_doc(l))
}

/// Reads structure constants, or the `algebra` member of a catalog bundle.
pub fn algebra_from_json(v: &Value) -> Result<StructureConstants> {
    if let Some(inner) = bundle_member(v, "algebra")? {
        return algebra_from_json(inner);
    }
    let d = AlgebraDoc::deserialize(v).map_err(parse_err)?;
    check_schema(&d.schema)?;
    let n = d.weights.dim();
    let mut entries = Vec::with_capacity(d.brackets.len());
    for b in &d.brackets {
        if b.i == 0 || b.j == 0 || b.k == 0 || b.i > n || b.j > n || b.k > n {
            return Err(Error::Parse(format!(
                "bracket index ({}, {}, {}) out of range 1..={n}",
                b.i, b.j, b.k
            )));
        }
        entries.push((b.i - 1, b.j - 1, b.k - 1, parse_rational(&b.coef)?));
    }
    StructureConstants::from_entries(d.weights, entries)
}

pub fn change_to_json(c: &CoordinateChange) -> Value {
    let w = c.weights();
    let m = c.affine().matrix();
    to_value(&ChangeDoc {
        schema: Some(SCHEMA.into()),
        weights: w.clone(),
        affine: AffineDoc {
            matrix: m.to_rows().iter().map(|r| rationals_to_strings(r)).collect(),
            offset: rationals_to_strings(c.affine().offset()),
        },
        triangular: polymap_doc(c.triangular(), w),
    })
}

pub fn change_from_json(v: &Value) -> Result<CoordinateChange> {
    let d = ChangeDoc::deserialize(v).map_err(parse_err)?;
    check_schema(&d.schema)?;
    let rows = d
        .affine
        .matrix
        .iter()
        .map(|r| strings_to_rationals(r))
        .collect::<Result<Vec<_>>>()?;
    let affine = AffineMap::new(Matrix::from_rows(rows)?, strings_to_rationals(&d.affine.offset)?)?;
    CoordinateChange::new(affine, polymap_from_doc(&d.triangular)?, d.weights)
}

/// Catalog entry as a bundle holding both the algebra and the frame.
pub fn catalog_to_json(e: &CatalogEntry) -> Value {
    let mut algebra = algebra_doc(&e.algebra);
    algebra.schema = None;
    let mut frame = frame_doc(&e.frame, None);
    frame.schema = None;
    json!({
        "schema": SCHEMA,
        "name": e.name,
        "group_frame": e.is_group_frame,
        "algebra": to_value(&algebra),
        "frame": to_value(&frame),
    })
}

fn scaling_to_json(name: &str, s: &ScalingReport) -> Value {
    json!({
        "residual": name,
        "m": s.m,
        "threshold": s.threshold,
        "t_grid": s.t_grid,
        "pass": s.pass,
        "directions": s.directions.iter().map(|d| {
            let (kind, slope, samples) = match d.decay {
                Decay::Exact => ("exact", None, 0),
                Decay::Slope { slope, samples } => ("slope", Some(slope), samples),
            };
            json!({
                "direction": d.direction,
                "decay": kind,
                "slope": slope.map(finite_or_string),
                "samples": samples,
                "pass": d.pass,
            })
        }).collect::<Vec<_>>(),
    })
}

fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

/// Report with witnesses; float data is kept under `numeric`.
pub fn report_to_json(r: &VerificationReport, w: &[u32]) -> Value {
    let witnesses: Vec<Value> = r
        .witnesses
        .iter()
        .map(|x| {
            json!({
                "identity": x.identity,
                "component": x.component,
                "detail": x.detail,
                "residual": x.residual.as_ref().map(|p| poly_to_json(p, w)),
            })
        })
        .collect();
    let mut doc = json!({
        "schema": SCHEMA,
        "check": r.check,
        "verdict": r.verdict,
        "frame": r.frame_id,
        "base_point": rationals_to_strings(&r.base_point),
        "witnesses": witnesses,
    });
    let slopes: Vec<Value> = r
        .witnesses
        .iter()
        .filter_map(|x| {
            x.slope
                .map(|s| json!({ "identity": x.identity, "slope": finite_or_string(s) }))
        })
        .collect();
    if !r.scaling.is_empty() || !slopes.is_empty() {
        doc["numeric"] = json!({
            "scaling": r.scaling.iter().map(|(n, s)| scaling_to_json(n, s)).collect::<Vec<_>>(),
            "failing_slopes": slopes,
        });
    }
    doc
}

/// Canonical text form of a document.
pub fn to_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

pub fn parse(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(parse_err)
}
