//! Resolution of `--frame`, `--algebra` and `--change` arguments.

use std::io::Read;
use std::path::Path;

use carnot_core::catalog;
use carnot_core::coords::{canonical_exact, linearize, psi_map, AffineMap, CanonicalKind};
use carnot_core::json;
use carnot_core::rational::parse_point;
use carnot_core::{epsilon, CoordinateChange, Error, Frame, Result, StructureConstants};
use serde_json::Value;

use crate::FrameArgs;

/// A parsed input document and the label reports refer to it by.
pub struct Source {
    pub label: String,
    pub doc: Value,
}

/// Inline JSON, a file, a catalog name, or stdin when `arg` is absent or `-`.
pub fn load(arg: Option<&str>) -> Result<Source> {
    match arg {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::InvalidInput(format!("reading stdin: {e}")))?;
            Ok(Source {
                label: "stdin".into(),
                doc: json::parse(&s)?,
            })
        }
        Some(a) if a.trim_start().starts_with('{') => Ok(Source {
            label: "inline".into(),
            doc: json::parse(a)?,
        }),
        Some(a) if Path::new(a).exists() => {
            let s = std::fs::read_to_string(a).map_err(|e| Error::InvalidInput(format!("reading {a}: {e}")))?;
            Ok(Source {
                label: a.to_string(),
                doc: json::parse(&s)?,
            })
        }
        Some(a) => match catalog::lookup(a) {
            Ok(e) => Ok(Source {
                label: a.to_string(),
                doc: json::catalog_to_json(&e),
            }),
            Err(_) => Err(Error::InvalidInput(format!(
                "`{a}` is neither a file nor a catalog entry"
            ))),
        },
    }
}

pub fn frame(args: &FrameArgs) -> Result<(String, Frame)> {
    let src = load(args.frame.as_deref())?;
    let mut f = json::frame_from_json(&src.doc)?;
    if let Some(at) = &args.at {
        f = f.at(parse_point(at)?)?;
    }
    Ok((src.label, f))
}

pub fn algebra(arg: Option<&str>) -> Result<StructureConstants> {
    json::algebra_from_json(&load(arg)?.doc)
}

/// A named construction at the frame's base point, or a change document.
pub fn change(frame: &Frame, arg: &str) -> Result<CoordinateChange> {
    Ok(match arg {
        "epsilon" => epsilon(frame)?,
        "linear" => linearize(frame)?.0,
        "psi" => psi_change(frame)?,
        "first-kind" => canonical_exact(frame, CanonicalKind::First)?.chart,
        "second-kind" => canonical_exact(frame, CanonicalKind::Second)?.chart,
        "identity" => CoordinateChange::identity(frame.weights().clone()),
        _ => json::change_from_json(&load(Some(arg))?.doc)?,
    })
}

/// `ψ̂_a ∘ T_a`.
pub fn psi_change(frame: &Frame) -> Result<CoordinateChange> {
    let (linear, linearized) = linearize(frame)?;
    let psi = psi_map(&linearized)?;
    CoordinateChange::from_triangular(AffineMap::clone(linear.affine()), &psi)
}
