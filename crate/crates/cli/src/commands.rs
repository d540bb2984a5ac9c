use carnot_core::catalog::{self, ALGEBRAS, FRAMES};
use carnot_core::coords::flow::DEFAULT_STEP;
use carnot_core::coords::{canonical_exact, canonical_numeric, epsilon_pipeline, CanonicalKind, NumericOptions};
use carnot_core::graded::dyadic_grid;
use carnot_core::group::AlgebraReport;
use carnot_core::json::{self, SCHEMA};
use carnot_core::rational::{format_rational, parse_point};
use carnot_core::selftest::{self, CriterionResult};
use carnot_core::verify::{osculation_report, unit_directions};
use carnot_core::{
    check_carnot, check_privileged, validate_algebra, CoordinateChange, Error, Frame, NilpotentGroup, PolyVectorField,
    Rational, Result, VerificationReport,
};
use serde_json::{json, Value};

use crate::input::{self, Source};
use crate::{FrameArgs, NumericArgs};

pub struct Context {
    pub text: bool,
    pub seed: Option<u64>,
}

impl Context {
    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidInput("randomized command: pass --seed or set CARNOT_SEED".into()))
    }

    fn emit(&self, doc: Value, text: impl FnOnce() -> String) -> Outcome {
        Outcome {
            output: if self.text { text() } else { json::to_string(&doc) },
            pass: true,
        }
    }
}

pub struct Outcome {
    pub output: String,
    pub pass: bool,
}

impl Outcome {
    fn verdict(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

fn point_text(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

fn fields_text(fields: &[PolyVectorField]) -> String {
    fields
        .iter()
        .enumerate()
        .map(|(j, x)| format!("X{} = {x}", j + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

fn frame_text(f: &Frame) -> String {
    format!(
        "weights {:?}, base point {}\n{}",
        f.weights().as_slice(),
        point_text(f.base_point()),
        fields_text(f.fields())
    )
}

fn change_text(c: &CoordinateChange) -> String {
    let rows: Vec<String> = c.affine().matrix().to_rows().iter().map(|r| point_text(r)).collect();
    format!(
        "affine: x -> M(x - {})\n  M rows: {}\npolynomial part: {}\nforward: {}",
        point_text(c.affine().offset()),
        rows.join(" "),
        c.triangular(),
        c.forward()
    )
}

fn report_outcome(ctx: &Context, r: &VerificationReport, w: &[u32]) -> Outcome {
    ctx.emit(json::report_to_json(r, w), || r.to_string())
        .verdict(r.passed())
}

fn algebra_report_json(r: &AlgebraReport) -> Value {
    json!({
        "kind": "algebra",
        "antisymmetry": r.antisymmetry,
        "grading": r.grading,
        "jacobi": r.jacobi,
        "valid": r.pass(),
        "violation": r.violation,
    })
}

fn validate_algebra_doc(doc: &Value) -> Result<AlgebraReport> {
    match json::algebra_from_json(doc) {
        Ok(l) => Ok(validate_algebra(&l)),
        Err(Error::InvalidAlgebra(msg)) => Ok(AlgebraReport::antisymmetry_failure(msg)),
        Err(e) => Err(e),
    }
}

fn validate_frame_doc(doc: &Value) -> Result<(Value, String)> {
    let f = json::frame_from_json(doc)?;
    let tangent = f.structure_constants_at()?.graded;
    let adapted = f.is_adapted();
    let doc = json!({
        "kind": "frame",
        "valid": true,
        "dim": f.dim(),
        "weights": f.weights(),
        "base_point": f.base_point().iter().map(format_rational).collect::<Vec<_>>(),
        "adapted": adapted,
        "tangent_algebra": json::algebra_to_json(&tangent),
    });
    let text = format!(
        "frame: valid, dim {}, weights {:?}, adapted {adapted}\ntangent brackets: {}",
        f.dim(),
        f.weights().as_slice(),
        tangent
            .entries()
            .map(|(i, j, k, c)| format!("[e{},e{}] += {c} e{}", i + 1, j + 1, k + 1))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok((doc, text))
}

pub fn validate(ctx: &Context, frame: Option<String>, algebra: Option<String>) -> Result<Outcome> {
    let (want_frame, want_algebra, src) = match (frame, algebra) {
        (Some(f), _) => (true, false, input::load(Some(&f))?),
        (None, Some(a)) => (false, true, input::load(Some(&a))?),
        (None, None) => {
            let src = input::load(None)?;
            let obj = src.doc.as_object();
            let has = |k: &str| obj.is_some_and(|o| o.contains_key(k));
            let bundle = has("algebra") && has("frame");
            (bundle || !has("brackets"), bundle || has("brackets"), src)
        }
    };
    let Source { label, doc } = src;
    let mut out = json!({ "schema": SCHEMA, "input": label });
    let mut lines = Vec::new();
    let mut pass = true;
    if want_algebra {
        let r = validate_algebra_doc(&doc)?;
        pass &= r.pass();
        out["algebra"] = algebra_report_json(&r);
        lines.push(match &r.violation {
            Some(v) if !r.pass() => format!("algebra: invalid, {v}"),
            _ => "algebra: valid".to_string(),
        });
    }
    if want_frame {
        let (v, t) = validate_frame_doc(&doc)?;
        out["frame"] = v;
        lines.push(t);
    }
    Ok(ctx.emit(out, || lines.join("\n")).verdict(pass))
}

pub fn group_law(ctx: &Context, algebra: Option<String>, x: Option<String>, y: Option<String>) -> Result<Outcome> {
    let l = input::algebra(algebra.as_deref())?;
    let g = NilpotentGroup::new(l)?;
    match (x, y) {
        (Some(x), Some(y)) => {
            let p = g.product(&parse_point(&x)?, &parse_point(&y)?)?;
            Ok(ctx.emit(json::point_to_json(&p), || point_text(&p)))
        }
        _ => {
            let w = g.algebra().weights().doubled();
            Ok(ctx.emit(json::polymap_to_json(g.law(), &w), || g.law().to_string()))
        }
    }
}

/// `linear`, `psi` or `epsilon`: the change, or the frame pushed through it.
pub fn stage(ctx: &Context, args: &FrameArgs, which: &str, pushed: bool) -> Result<Outcome> {
    let (_, f) = input::frame(args)?;
    let change = input::change(&f, which)?;
    if pushed {
        let p = change.push_frame(&f, f.weights().step())?;
        return Ok(ctx.emit(json::frame_to_json(&p), || frame_text(&p)));
    }
    Ok(ctx.emit(json::change_to_json(&change), || change_text(&change)))
}

pub fn model_fields(ctx: &Context, args: &FrameArgs) -> Result<Outcome> {
    let (_, f) = input::frame(args)?;
    let p = epsilon_pipeline(&f)?;
    let mut doc = json::fields_to_json(&p.model_fields, f.weights());
    doc["base_point"] = json!(f.base_point().iter().map(format_rational).collect::<Vec<_>>());
    Ok(ctx.emit(doc, || fields_text(&p.model_fields)))
}

pub fn order(
    ctx: &Context,
    args: &FrameArgs,
    change: Option<String>,
    function: Option<String>,
    max_weight: Option<u32>,
) -> Result<Outcome> {
    let (_, f) = input::frame(args)?;
    let w = f.weights();
    let bound = max_weight.unwrap_or(w.step() + 1);
    if let Some(src) = function {
        let p = json::poly_from_json(&input::load(Some(&src))?.doc)?;
        let order = f.function_order(&p, bound)?;
        return Ok(ctx.emit(json!({ "schema": SCHEMA, "order": order.to_string() }), || {
            format!("order {order}")
        }));
    }
    let c = input::change(&f, change.as_deref().unwrap_or("epsilon"))?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut matches = true;
    for (k, comp) in c.forward().components().iter().enumerate() {
        let order = f.function_order(comp, bound)?;
        matches &= order == carnot_core::Order::Exact(w[k]);
        rows.push(json!({ "component": k + 1, "weight": w[k], "order": order.to_string() }));
        lines.push(format!("component {}: order {order}, weight {}", k + 1, w[k]));
    }
    let doc = json!({ "schema": SCHEMA, "orders": rows, "matches_weights": matches });
    Ok(ctx.emit(doc, || lines.join("\n")))
}

pub fn canonical(ctx: &Context, args: &FrameArgs, kind: u8, numeric: &NumericArgs) -> Result<Outcome> {
    let (_, f) = input::frame(args)?;
    let kind = if kind == 1 {
        CanonicalKind::First
    } else {
        CanonicalKind::Second
    };
    if numeric.numeric {
        let opts = NumericOptions {
            seed: ctx.seed()?,
            radius: numeric.radius,
            step: numeric.step.unwrap_or(DEFAULT_STEP),
            ..NumericOptions::default()
        };
        let chart = canonical_numeric(&f, kind, &opts)?;
        let doc = json!({
            "schema": SCHEMA,
            "numeric": serde_json::to_value(&chart).map_err(|e| Error::InvalidInput(e.to_string()))?,
        });
        return Ok(ctx.emit(doc, || {
            format!(
                "{:?} kind, degree {}, {} samples on radius {}, max residual {:.3e}",
                chart.kind, chart.degree, chart.samples, chart.radius, chart.max_residual
            )
        }));
    }
    let c = canonical_exact(&f, kind)?.chart;
    Ok(ctx.emit(json::change_to_json(&c), || change_text(&c)))
}

pub fn check(ctx: &Context, args: &FrameArgs, change: &str, carnot: bool) -> Result<Outcome> {
    let (label, f) = input::frame(args)?;
    let c = input::change(&f, change)?;
    let r = if carnot {
        check_carnot(&f, &c)?
    } else {
        check_privileged(&f, &c)?
    }
    .with_frame_id(label);
    Ok(report_outcome(ctx, &r, f.weights().as_slice()))
}

pub fn osculate(
    ctx: &Context,
    args: &FrameArgs,
    change: &str,
    directions: usize,
    t_grid: Option<String>,
) -> Result<Outcome> {
    let seed = ctx.seed()?;
    let (label, f) = input::frame(args)?;
    let c = input::change(&f, change)?;
    let grid = match t_grid {
        None => dyadic_grid(10),
        Some(s) => s
            .split(',')
            .map(|t| match t.trim().parse::<f64>() {
                Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
                _ => Err(Error::InvalidInput(format!(
                    "t grid entries must lie in (0, 1), got `{t}`"
                ))),
            })
            .collect::<Result<_>>()?,
    };
    let dirs = unit_directions(&f.weights().doubled(), directions, seed);
    let r = osculation_report(&f, &c, &dirs, &grid)?.with_frame_id(label);
    Ok(report_outcome(ctx, &r, f.weights().as_slice()))
}

pub fn catalog(ctx: &Context, name: Option<String>) -> Result<Outcome> {
    match name {
        Some(n) => {
            let e = catalog::lookup(&n)?;
            Ok(ctx.emit(json::catalog_to_json(&e), || format!("{n}\n{}", frame_text(&e.frame))))
        }
        None => {
            let doc = json!({ "schema": SCHEMA, "algebras": ALGEBRAS, "frames": FRAMES });
            Ok(ctx.emit(doc, || FRAMES.join("\n")))
        }
    }
}

pub fn selftest(ctx: &Context, criterion: Option<u32>) -> Result<Outcome> {
    let seed = ctx.seed()?;
    let results: Vec<CriterionResult> = match criterion {
        Some(id) if (1..=14).contains(&id) => vec![selftest::run_criterion(id, seed)],
        Some(id) => return Err(Error::InvalidInput(format!("no criterion {id}, expected 1..=14"))),
        None => std::thread::scope(|s| {
            let handles: Vec<_> = (1..=14)
                .map(|id| s.spawn(move || selftest::run_criterion(id, seed)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("criterion panicked"))
                .collect()
        }),
    };
    let failed = results.iter().filter(|r| !r.pass).count();
    let doc = json!({
        "schema": SCHEMA,
        "seed": seed,
        "criteria": results,
        "passed": results.len() - failed,
        "failed": failed,
    });
    let text = || {
        let mut lines: Vec<String> = results.iter().map(ToString::to_string).collect();
        lines.push(format!("selftest: {} passed, {failed} failed", results.len() - failed));
        lines.join("\n")
    };
    Ok(ctx.emit(doc, text).verdict(failed == 0))
}
