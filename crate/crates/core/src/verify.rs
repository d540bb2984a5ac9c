//! Executable checks: privileged and Carnot coordinates, characterization
//! generators, osculation by the tangent group and group charts.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coords::canonical::{canonical_parametrization, canonical_parametrization_numeric, CanonicalKind};
use crate::coords::{epsilon, epsilon_pipeline, CoordinateChange};
use crate::error::{check_dim, Error, Result};
use crate::graded::{dilate, ow_scaling_test, ow_violations, LowWeightTerm, MultiIndex, ScalingReport, WeightVector};
use crate::group::{left_invariant_fields, NilpotentGroup, StructureConstants};
use crate::poly::{format_term, PolyMap, RationalPoly};
use crate::rational::{from_f64, rat, to_f64, Rational};
use crate::vfield::{Frame, Order, PolyVectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One identity that was checked and found violated.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub identity: String,
    /// 1-based component or field index.
    pub component: Option<usize>,
    /// Offending residual; a single monomial for weight violations.
    pub residual: Option<RationalPoly>,
    pub slope: Option<f64>,
    pub detail: String,
}

impl Witness {
    fn message(identity: &str, detail: String) -> Self {
        Self {
            identity: identity.to_string(),
            component: None,
            residual: None,
            slope: None,
            detail,
        }
    }

    fn low_weight(identity: &str, t: &LowWeightTerm, nvars: usize) -> Self {
        Self {
            identity: identity.to_string(),
            component: Some(t.component + 1),
            residual: Some(RationalPoly::monomial(nvars, &t.exponent.0, t.coefficient.clone())),
            slope: None,
            detail: format!(
                "{} in component {}",
                format_term(&t.exponent, &t.coefficient),
                t.component + 1
            ),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.identity, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub frame_id: Option<String>,
    pub base_point: Vec<Rational>,
    /// Slope tables of numeric checks, by residual name.
    pub scaling: Vec<(String, ScalingReport)>,
}

impl VerificationReport {
    fn new(check: &str, base_point: &[Rational]) -> Self {
        Self {
            check: check.to_string(),
            verdict: Verdict::Pass,
            witnesses: Vec::new(),
            frame_id: None,
            base_point: base_point.to_vec(),
            scaling: Vec::new(),
        }
    }

    fn finish(mut self) -> Self {
        let scaling_ok = self.scaling.iter().all(|(_, s)| s.pass);
        self.verdict = if self.witnesses.is_empty() && scaling_ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    pub fn with_frame_id(mut self, id: impl Into<String>) -> Self {
        self.frame_id = Some(id.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "pass" } else { "fail" };
        write!(f, "{}: {verdict}", self.check)?;
        if let Some(id) = &self.frame_id {
            write!(f, " ({id})")?;
        }
        for w in &self.witnesses {
            write!(f, "\n  {w}")?;
        }
        for (name, s) in &self.scaling {
            write!(f, "\n  {name}: {}", if s.pass { "pass" } else { "fail" })?;
            for d in &s.directions {
                match d.decay {
                    crate::graded::Decay::Exact => write!(f, "\n    exact")?,
                    crate::graded::Decay::Slope { slope, samples } => {
                        write!(f, "\n    slope {slope:.4} over {samples} samples")?
                    }
                }
            }
        }
        Ok(())
    }
}

/// Weight bound up to which pushed fields are trusted when the inverse is truncated.
fn push_bound(w: &WeightVector) -> u32 {
    2 * w.step()
}

fn check_weights(frame: &Frame, change: &CoordinateChange) -> Result<()> {
    check_dim(frame.dim(), change.weights().dim())?;
    if frame.weights() != change.weights() {
        return Err(Error::InvalidInput("frame and change have different weights".into()));
    }
    Ok(())
}

fn privileged_witnesses(
    frame: &Frame,
    change: &CoordinateChange,
    pushed: &Frame,
    out: &mut Vec<Witness>,
) -> Result<()> {
    let w = frame.weights();
    let n = w.dim();
    for (k, v) in pushed.base_point().iter().enumerate() {
        if !v.is_zero() {
            out.push(Witness {
                component: Some(k + 1),
                ..Witness::message("change(a) = 0", format!("component {} of change(a) is {v}", k + 1))
            });
        }
    }
    for j in 0..n {
        let v = pushed.field(j).at(pushed.base_point())?;
        for (k, c) in v.iter().enumerate() {
            let expected = if k == j { Rational::one() } else { Rational::zero() };
            if *c != expected {
                out.push(Witness {
                    component: Some(j + 1),
                    ..Witness::message(
                        &format!("X{}(change(a)) = d{}", j + 1, j + 1),
                        format!("coefficient of d{} is {c}", k + 1),
                    )
                });
            }
        }
    }
    for j in 0..n {
        let x = pushed.field(j);
        let expected = -(w[j] as i64);
        let identity = format!("X{} has weight -{}", j + 1, w[j]);
        if let Some(low) = x.weight(w) {
            if low < expected {
                out.push(field_term_witness(&identity, j, &x.homogeneous_part(low, w), w));
            }
        }
        if x.homogeneous_part(expected, w).is_zero() {
            out.push(Witness {
                component: Some(j + 1),
                ..Witness::message(&identity, format!("no part of degree {expected}"))
            });
        }
    }
    let fwd = change.forward();
    for k in 0..n {
        match frame.function_order(fwd.component(k), w[k] + 1)? {
            Order::Exact(o) if o == w[k] => {}
            o => out.push(Witness {
                component: Some(k + 1),
                ..Witness::message(
                    &format!("order of x{} at a is {}", k + 1, w[k]),
                    format!("order is {o}"),
                )
            }),
        }
    }
    Ok(())
}

/// Witness built from the first term of a nonzero field, in weighted order.
fn field_term_witness(identity: &str, j: usize, field: &PolyVectorField, w: &[u32]) -> Witness {
    let n = field.dim();
    for (k, c) in field.coeffs().iter().enumerate() {
        if let Some((e, coef)) = c.sorted_terms(w).into_iter().next() {
            return Witness {
                identity: identity.to_string(),
                component: Some(k + 1),
                residual: Some(RationalPoly::monomial(n, &e.0, coef.clone())),
                slope: None,
                detail: format!("{} d{} in X{}", format_term(e, coef), k + 1, j + 1),
            };
        }
    }
    Witness::message(identity, "zero field".into())
}

/// Witnesses for the nonzero components of `diff`, one lowest-weight term each.
fn map_witnesses(identity: &str, diff: &PolyMap, w: &[u32]) -> Vec<Witness> {
    let n = diff.nvars();
    diff.components()
        .iter()
        .enumerate()
        .filter_map(|(k, c)| {
            let (e, coef) = c.sorted_terms(w).into_iter().next()?;
            Some(Witness {
                identity: identity.to_string(),
                component: Some(k + 1),
                residual: Some(RationalPoly::monomial(n, &e.0, coef.clone())),
                slope: None,
                detail: format!("{} in component {}", format_term(e, coef), k + 1),
            })
        })
        .collect()
}

fn push_or_witness(frame: &Frame, change: &CoordinateChange, out: &mut Vec<Witness>) -> Option<Frame> {
    match change.push_frame(frame, push_bound(frame.weights())) {
        Ok(p) => Some(p),
        Err(e) => {
            out.push(Witness::message("change is a diffeomorphism", e.to_string()));
            None
        }
    }
}

/// Whether `change` gives privileged coordinates at the base point of `frame`:
/// centered, linearly adapted, each pushed field of weight exactly `−w_j`, and
/// each new coordinate of order `w_k` for the original frame.
pub fn check_privileged(frame: &Frame, change: &CoordinateChange) -> Result<VerificationReport> {
    check_weights(frame, change)?;
    let mut report = VerificationReport::new("privileged", frame.base_point());
    if let Some(pushed) = push_or_witness(frame, change, &mut report.witnesses) {
        privileged_witnesses(frame, change, &pushed, &mut report.witnesses)?;
    }
    Ok(report.finish())
}

/// Whether `change` gives Carnot coordinates: privileged, and the model field of
/// each pushed `X_j` is the left-invariant field of the tangent algebra at `a`.
///
/// On failure the offending terms of `change ∘ ε_a⁻¹ − id` are listed first.
pub fn check_carnot(frame: &Frame, change: &CoordinateChange) -> Result<VerificationReport> {
    check_weights(frame, change)?;
    let w = frame.weights();
    let mut report = VerificationReport::new("carnot", frame.base_point());
    let Some(pushed) = push_or_witness(frame, change, &mut report.witnesses) else {
        return Ok(report.finish());
    };
    privileged_witnesses(frame, change, &pushed, &mut report.witnesses)?;
    let algebra = frame.structure_constants_at()?.graded;
    let left = left_invariant_fields(&algebra)?;
    let mut model = Vec::new();
    for j in 0..w.dim() {
        let part = pushed.field(j).homogeneous_part(-(w[j] as i64), w);
        let diff = part.checked_sub(&left[j])?;
        if !diff.is_zero() {
            model.push(field_term_witness(
                &format!("model field of X{} is left-invariant", j + 1),
                j,
                &diff,
                w,
            ));
        }
    }
    if !model.is_empty() {
        let eps = epsilon(frame)?;
        let diff = change
            .forward()
            .compose(&eps.inverse(push_bound(w))?)?
            .checked_sub(&PolyMap::identity(w.dim()))?;
        let mut front: Vec<Witness> = ow_violations(&diff, 1, w, w)
            .iter()
            .map(|t| Witness::low_weight("change = eps_a + O_w(|x|^(w+1))", t, w.dim()))
            .collect();
        front.append(&mut report.witnesses);
        front.append(&mut model);
        report.witnesses = front;
    }
    Ok(report.finish())
}

/// Whether every component `k` is `w`-homogeneous of degree `w_k` with identity differential.
pub fn is_homogeneous_diffeo(m: &PolyMap, w: &WeightVector) -> bool {
    m.nvars() == w.dim()
        && m.dim_out() == w.dim()
        && m.linear_part().is_identity()
        && m.components()
            .iter()
            .enumerate()
            .all(|(k, c)| c.terms().all(|(e, _)| e.weighted(w) == w[k]))
}

fn check_perturbation(p: &PolyMap, w: &WeightVector) -> Result<()> {
    check_dim(w.dim(), p.nvars())?;
    check_dim(w.dim(), p.dim_out())?;
    if !ow_violations(p, 1, w, w).is_empty() {
        return Err(Error::ShapeViolation("perturbation is not O_w(|x|^(w+1))".into()));
    }
    Ok(())
}

/// `(hom + perturbation) ∘ change`; privileged whenever `change` is.
pub fn generate_privileged_variants(
    change: &CoordinateChange,
    hom: &PolyMap,
    perturbation: &PolyMap,
) -> Result<CoordinateChange> {
    let w = change.weights();
    if !is_homogeneous_diffeo(hom, w) {
        return Err(Error::ShapeViolation(
            "expected a w-homogeneous map with identity differential".into(),
        ));
    }
    check_perturbation(perturbation, w)?;
    change.then(&hom.checked_add(perturbation)?)
}

/// `(id + perturbation) ∘ change`; Carnot whenever `change` is.
pub fn generate_carnot_variants(change: &CoordinateChange, perturbation: &PolyMap) -> Result<CoordinateChange> {
    let w = change.weights();
    check_perturbation(perturbation, w)?;
    change.then(&PolyMap::identity(w.dim()).checked_add(perturbation)?)
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let c = rat(rng.gen_range(-3..=3), rng.gen_range(1..=3));
        if !c.is_zero() {
            return c;
        }
    }
}

/// Random map `x_k + Σ c x^α` over `⟨α⟩ = w_k`, `|α| ≥ 2`.
pub fn random_homogeneous_diffeo<R: Rng>(w: &WeightVector, rng: &mut R) -> PolyMap {
    let n = w.dim();
    let comps = (0..n)
        .map(|k| {
            let mut c = RationalPoly::var(n, k);
            for alpha in MultiIndex::up_to_weight(w, w[k]) {
                if alpha.order() >= 2 && alpha.weighted(w) == w[k] && rng.gen_bool(0.5) {
                    c.add_term(alpha, small_rational(rng));
                }
            }
            c
        })
        .collect();
    PolyMap::new(n, comps).expect("dimensions match")
}

/// A homogeneous map as above that is not the identity; `None` when `w` admits none.
pub fn random_nontrivial_homogeneous_diffeo<R: Rng>(w: &WeightVector, rng: &mut R) -> Option<PolyMap> {
    let exists = (0..w.dim()).any(|k| {
        MultiIndex::up_to_weight(w, w[k])
            .iter()
            .any(|a| a.order() >= 2 && a.weighted(w) == w[k])
    });
    if !exists {
        return None;
    }
    loop {
        let m = random_homogeneous_diffeo(w, rng);
        if !m.is_identity() {
            return Some(m);
        }
    }
}

/// Random nonlinear map in `O_w(‖x‖^{w+1})`: up to two monomials per component `k`,
/// of weight `w_k + 1` or `w_k + 2`.
pub fn random_perturbation<R: Rng>(w: &WeightVector, rng: &mut R) -> PolyMap {
    let n = w.dim();
    let comps = (0..n)
        .map(|k| {
            let candidates: Vec<MultiIndex> = MultiIndex::up_to_weight(w, w[k] + 2)
                .into_iter()
                .filter(|a| a.order() >= 2 && a.weighted(w) > w[k])
                .collect();
            let mut c = RationalPoly::zero(n);
            for _ in 0..rng.gen_range(0..=2) {
                let alpha = candidates[rng.gen_range(0..candidates.len())].clone();
                c.add_term(alpha, small_rational(rng));
            }
            c
        })
        .collect();
    PolyMap::new(n, comps).expect("dimensions match")
}

/// Directions of pseudo-norm exactly 1 whose entries are dyadic: `x_j = ±q_j^{w_j}`
/// with dyadic `q_j > 0` summing to 1.
pub fn unit_directions(w: &[u32], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = w.len();
    let total = 1usize << (n + 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut cuts: Vec<usize> = sample(&mut rng, total - 1, n - 1).into_iter().map(|c| c + 1).collect();
            cuts.sort_unstable();
            cuts.push(total);
            let mut prev = 0;
            cuts.iter()
                .zip(w)
                .map(|(&c, &wj)| {
                    let q = (c - prev) as f64 / total as f64;
                    prev = c;
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * q.powi(wj as i32)
                })
                .collect()
        })
        .collect()
}

fn rationals(x: &[f64]) -> Result<Vec<Rational>> {
    x.iter().map(|v| from_f64(*v)).collect()
}

fn sub_f64(a: &[Rational], b: &[Rational]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| to_f64(&(u - v))).collect()
}

/// Osculation by the tangent group in Carnot coordinates: with `ε_y` recomputed
/// at nearby points `y`, both `ε_y(x) − (−y)·x` and `ε_y⁻¹(x) − y·x` are scaled
/// against `O_w(‖(x,y)‖^{w+1})` on `ℝⁿ×ℝⁿ`.
pub fn osculation_report(
    frame: &Frame,
    carnot_change: &CoordinateChange,
    directions: &[Vec<f64>],
    t_grid: &[f64],
) -> Result<VerificationReport> {
    check_weights(frame, carnot_change)?;
    let w = frame.weights().clone();
    let n = w.dim();
    let mut report = VerificationReport::new("osculation", frame.base_point());
    let Some(carnot) = push_or_witness(frame, carnot_change, &mut report.witnesses) else {
        return Ok(report.finish());
    };
    let group = NilpotentGroup::new(carnot.structure_constants_at()?.graded)?;
    let bound = push_bound(&w);
    let mut cache: HashMap<Vec<u64>, (PolyMap, PolyMap)> = HashMap::new();
    let mut charts = |y: &[f64]| -> Result<(PolyMap, PolyMap)> {
        let key: Vec<u64> = y.iter().map(|v| v.to_bits()).collect();
        if let Some(c) = cache.get(&key) {
            return Ok(c.clone());
        }
        let eps = epsilon(&carnot.at(rationals(y)?)?)?;
        let pair = (eps.forward(), eps.inverse(bound)?);
        cache.insert(key, pair.clone());
        Ok(pair)
    };
    let doubled = w.doubled();
    for inverse in [false, true] {
        let name = if inverse {
            "eps_y^-1(x) - y.x"
        } else {
            "eps_y(x) - (-y).x"
        };
        let scaling = ow_scaling_test(
            |xy| {
                let (x, y) = xy.split_at(n);
                let (fwd, inv) = charts(y)?;
                let xq = rationals(x)?;
                let yq = rationals(y)?;
                if inverse {
                    Ok(sub_f64(&inv.evaluate(&xq)?, &group.product(&yq, &xq)?))
                } else {
                    let neg: Vec<Rational> = yq.iter().map(|v| -v).collect();
                    Ok(sub_f64(&fwd.evaluate(&xq)?, &group.product(&neg, &xq)?))
                }
            },
            1,
            &doubled,
            &w,
            directions,
            t_grid,
        );
        match scaling {
            Ok(s) => {
                for d in s.directions.iter().filter(|d| !d.pass) {
                    if let crate::graded::Decay::Slope { slope, .. } = d.decay {
                        report.witnesses.push(Witness {
                            slope: Some(slope),
                            ..Witness::message(name, format!("slope {slope:.4} along {:?}", d.direction))
                        });
                    }
                }
                report.scaling.push((name.to_string(), s));
            }
            Err(e) => report.witnesses.push(Witness::message(name, e.to_string())),
        }
    }
    Ok(report.finish())
}

/// `ε_a` of the left-invariant frame equals left translation by `−a`.
pub fn group_chart_check(algebra: &StructureConstants, a: &[Rational]) -> Result<VerificationReport> {
    let w = algebra.weights().clone();
    check_dim(w.dim(), a.len())?;
    let frame = Frame::new(left_invariant_fields(algebra)?, w.clone(), a.to_vec())?;
    let eps = epsilon(&frame)?.forward();
    let neg: Vec<Rational> = a.iter().map(|v| -v).collect();
    let expected = NilpotentGroup::new(algebra.clone())?.left_translation(&neg)?;
    let mut report = VerificationReport::new("group_chart", a);
    report.witnesses = map_witnesses("eps_a(x) = (-a).x", &eps.checked_sub(&expected)?, &w);
    Ok(report.finish())
}

fn dilation_map(t: &Rational, w: &[u32]) -> PolyMap {
    let n = w.len();
    let comps = (0..n)
        .map(|k| RationalPoly::var(n, k).scale(&crate::rational::pow(t, w[k])))
        .collect();
    PolyMap::new(n, comps).expect("dimensions match")
}

/// `ε_y^{X̂}(x) = t⁻¹·ε_{t·y}^X(t·x)` where `X̂_j = t^{w_j} δ_t^* X_j` and `y` is the base point.
pub fn rescaling_check(frame: &Frame, t: &Rational) -> Result<VerificationReport> {
    if t.is_zero() {
        return Err(Error::ZeroScale);
    }
    let w = frame.weights();
    let y = frame.base_point();
    let hat_fields = frame
        .fields()
        .iter()
        .enumerate()
        .map(|(j, x)| Ok(x.rescale(t, w)?.scale(&crate::rational::pow(t, w[j]))))
        .collect::<Result<Vec<_>>>()?;
    let hat = Frame::new(hat_fields, w.clone(), y.to_vec())?;
    let lhs = epsilon(&hat)?.forward();
    let far = frame.at(dilate(y, t, w)?)?;
    let inv_t = Rational::one() / t;
    let rhs = dilation_map(&inv_t, w)
        .compose(&epsilon(&far)?.forward())?
        .compose(&dilation_map(t, w))?;
    let mut report = VerificationReport::new("rescaling", y);
    report.witnesses = map_witnesses("eps_y(hat X) = t^-1 . eps_(t.y)(X)(t.x)", &lhs.checked_sub(&rhs)?, w);
    Ok(report.finish())
}

/// For an adapted step-2 frame at 0, the closed form
/// `x_k − ¼ Σ_{w_i + w_j = w_k} (∂_i b_jk(0) + ∂_j b_ik(0)) x_i x_j` over ordered pairs,
/// `b_jk` being the `∂_k` coefficient of `X_j`.
pub fn step_two_quadratic_map(frame: &Frame) -> Result<PolyMap> {
    let w = frame.weights();
    if w.step() > 2 {
        return Err(Error::InvalidInput("closed form needs step at most 2".into()));
    }
    if frame.first_unadapted().is_some() || !frame.base_point().iter().all(Zero::is_zero) {
        return Err(Error::NotAdapted(frame.first_unadapted().map_or(1, |j| j + 1)));
    }
    let n = w.dim();
    let zero = vec![Rational::zero(); n];
    let quarter = rat(1, 4);
    let db = |i: usize, j: usize, k: usize| -> Result<Rational> { frame.field(j).coeff(k).partial(i)?.evaluate(&zero) };
    let mut comps = Vec::with_capacity(n);
    for k in 0..n {
        let mut c = RationalPoly::var(n, k);
        for i in 0..n {
            for j in 0..n {
                if w[i] + w[j] != w[k] {
                    continue;
                }
                let s = db(i, j, k)? + db(j, i, k)?;
                if s.is_zero() {
                    continue;
                }
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                c.add_term(MultiIndex(e), -(&quarter * s));
            }
        }
        comps.push(c);
    }
    PolyMap::new(n, comps)
}

/// Compares `ε̂_a` from the pipeline with [`step_two_quadratic_map`] on the linearized frame.
pub fn quadratic_check(frame: &Frame) -> Result<VerificationReport> {
    let p = epsilon_pipeline(frame)?;
    let formula = step_two_quadratic_map(&p.linearized)?;
    let diff = p.epsilon_hat.map().checked_sub(&formula)?;
    let mut report = VerificationReport::new("step_two_quadratic", frame.base_point());
    report.witnesses = map_witnesses("eps_hat = quadratic closed form", &diff, frame.weights());
    Ok(report.finish())
}

/// `ε_a(exp(Σ x_j X_j)(a)) − x` lies in `O_w(‖x‖^{w+1})`, exactly.
pub fn first_kind_check(frame: &Frame) -> Result<VerificationReport> {
    let w = frame.weights();
    let param = canonical_parametrization(frame, CanonicalKind::First)?;
    let theta = epsilon(frame)?
        .forward()
        .compose(&param)?
        .checked_sub(&PolyMap::identity(w.dim()))?;
    let mut report = VerificationReport::new("first_kind", frame.base_point());
    report.witnesses = ow_violations(&theta, 1, w, w)
        .iter()
        .map(|t| Witness::low_weight("eps_a(exp(x.X)(a)) = x + O_w(|x|^(w+1))", t, w.dim()))
        .collect();
    Ok(report.finish())
}

/// Numeric form of [`first_kind_check`] with RK4 flows and the scaling test.
pub fn first_kind_check_numeric(
    frame: &Frame,
    directions: &[Vec<f64>],
    t_grid: &[f64],
    step: f64,
) -> Result<VerificationReport> {
    let w = frame.weights();
    let eps = epsilon(frame)?.forward();
    let s = ow_scaling_test(
        |x| {
            let p = canonical_parametrization_numeric(frame, CanonicalKind::First, x, step);
            let e = eps.evaluate_f64(&p)?;
            Ok(e.iter().zip(x).map(|(u, v)| u - v).collect())
        },
        1,
        w,
        w,
        directions,
        t_grid,
    )?;
    let mut report = VerificationReport::new("first_kind_numeric", frame.base_point());
    for d in s.directions.iter().filter(|d| !d.pass) {
        if let crate::graded::Decay::Slope { slope, .. } = d.decay {
            report.witnesses.push(Witness {
                slope: Some(slope),
                ..Witness::message(
                    "eps_a(exp(x.X)(a)) - x",
                    format!("slope {slope:.4} along {:?}", d.direction),
                )
            });
        }
    }
    report.scaling.push(("eps_a(exp(x.X)(a)) - x".into(), s));
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::coords::{canonical_exact, AffineMap};
    use crate::graded::{dyadic_grid, pseudo_norm};
    use crate::linalg::Matrix;
    use crate::rational::int;

    fn x(n: usize, j: usize) -> RationalPoly {
        RationalPoly::var(n, j)
    }

    #[test]
    fn psi_changes_are_privileged() {
        for name in catalog::FRAMES {
            let f = catalog::lookup(name).unwrap().frame;
            let p = epsilon_pipeline(&f).unwrap();
            let change = CoordinateChange::from_triangular(p.linear.affine().clone(), &p.psi).unwrap();
            assert!(check_privileged(&f, &change).unwrap().passed(), "{name}");
        }
    }

    #[test]
    fn identity_off_base_is_not_adapted() {
        let h = catalog::lookup("heisenberg_3")
            .unwrap()
            .frame
            .at(vec![int(1), int(2), int(3)])
            .unwrap();
        let r = check_privileged(&h, &CoordinateChange::identity(h.weights().clone())).unwrap();
        assert!(!r.passed());
        assert!(r.witnesses.iter().any(|w| w.identity == "change(a) = 0"));
        assert!(r.witnesses.iter().any(|w| w.identity == "X2(change(a)) = d2"));
    }

    #[test]
    fn second_kind_is_privileged_not_carnot() {
        let h = catalog::lookup("heisenberg_3").unwrap().frame;
        let c = canonical_exact(&h, CanonicalKind::Second).unwrap().chart;
        assert!(check_privileged(&h, &c).unwrap().passed());
        let r = check_carnot(&h, &c).unwrap();
        assert!(!r.passed());
        assert_eq!(r.witnesses[0].detail, "x1*x2/2 in component 3");
    }

    #[test]
    fn epsilon_is_carnot() {
        for name in catalog::FRAMES {
            let f = catalog::lookup(name).unwrap().frame;
            let r = check_carnot(&f, &epsilon(&f).unwrap()).unwrap();
            assert!(r.passed(), "{name}: {r}");
        }
    }

    #[test]
    fn darboux_chart_is_carnot() {
        // Contact form dx3 − x1 dx2 brought to dv3 + (v2 dv1 − v1 dv2)/2 around a.
        let f = catalog::heisenberg_contact_frame().unwrap();
        for a in [vec![int(0), int(0), int(0)], vec![int(2), rat(-1, 3), int(5)]] {
            let fa = f.at(a.clone()).unwrap();
            let m = Matrix::from_rows(vec![
                vec![int(1), int(0), int(0)],
                vec![int(0), int(1), int(0)],
                vec![int(0), -a[0].clone(), int(1)],
            ])
            .unwrap();
            let affine = AffineMap::new(m, a).unwrap();
            let tri = PolyMap::new(
                3,
                vec![x(3, 0), x(3, 1), &x(3, 2) - &(&x(3, 0) * &x(3, 1)).scale(&rat(1, 2))],
            )
            .unwrap();
            let c = CoordinateChange::new(affine, tri, f.weights().clone()).unwrap();
            assert!(check_carnot(&fa, &c).unwrap().passed());
        }
    }

    #[test]
    fn variant_examples() {
        let w = WeightVector::new(vec![1, 1, 2]).unwrap();
        let h = catalog::lookup("heisenberg_3").unwrap().frame;
        let eps = epsilon(&h).unwrap();
        let id = PolyMap::identity(3);
        let zero = PolyMap::zero(3, 3);
        assert_eq!(generate_privileged_variants(&eps, &id, &zero).unwrap(), eps);
        assert_eq!(generate_carnot_variants(&eps, &zero).unwrap(), eps);

        let cube = PolyMap::new(3, vec![RationalPoly::zero(3), RationalPoly::zero(3), x(3, 0).pow(3)]).unwrap();
        let v = generate_privileged_variants(&eps, &id, &cube).unwrap();
        assert!(check_privileged(&h, &v).unwrap().passed());

        let shear = PolyMap::new(3, vec![x(3, 0), x(3, 1), &x(3, 2) + &(&x(3, 0) * &x(3, 1))]).unwrap();
        let v = generate_privileged_variants(&eps, &shear, &zero).unwrap();
        assert!(check_privileged(&h, &v).unwrap().passed());
        assert!(!check_carnot(&h, &v).unwrap().passed());

        let p = PolyMap::new(
            3,
            vec![
                RationalPoly::zero(3),
                RationalPoly::zero(3),
                &(&x(3, 0) * &x(3, 1)) * &x(3, 2),
            ],
        )
        .unwrap();
        let v = generate_carnot_variants(&eps, &p).unwrap();
        assert!(check_carnot(&h, &v).unwrap().passed());

        assert!(generate_carnot_variants(&eps, &shear.checked_sub(&id).unwrap()).is_err());
        assert!(generate_privileged_variants(&eps, &cube.checked_add(&id).unwrap(), &zero).is_err());
        assert!(is_homogeneous_diffeo(&shear, &w));
    }

    #[test]
    fn random_variants_keep_verdicts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = catalog::lookup("perturbed_heisenberg_3").unwrap().frame;
        let eps = epsilon(&f).unwrap();
        let w = f.weights();
        for _ in 0..5 {
            let hom = random_homogeneous_diffeo(w, &mut rng);
            let p = random_perturbation(w, &mut rng);
            let v = generate_privileged_variants(&eps, &hom, &p).unwrap();
            assert!(check_privileged(&f, &v).unwrap().passed());
            let v = generate_carnot_variants(&eps, &p).unwrap();
            assert!(check_carnot(&f, &v).unwrap().passed());
            let bad = random_nontrivial_homogeneous_diffeo(w, &mut rng).unwrap();
            assert!(!check_carnot(&f, &eps.then(&bad).unwrap()).unwrap().passed());
        }
    }

    #[test]
    fn unit_directions_have_unit_norm() {
        let w = [1, 1, 2, 1, 1, 2];
        for d in unit_directions(&w, 8, 7) {
            assert_eq!(pseudo_norm(&d, &w).unwrap(), 1.0);
        }
    }

    #[test]
    fn osculation_examples() {
        let grid = dyadic_grid(10);
        for (name, exact) in [("heisenberg_3", true), ("perturbed_heisenberg_3", false)] {
            let f = catalog::lookup(name).unwrap().frame;
            let w = f.weights().doubled();
            let dirs = unit_directions(&w, 4, 1);
            let r = osculation_report(&f, &epsilon(&f).unwrap(), &dirs, &grid).unwrap();
            assert!(r.passed(), "{name}: {r}");
            let all_exact = r
                .scaling
                .iter()
                .all(|(_, s)| s.directions.iter().all(|d| d.decay == crate::graded::Decay::Exact));
            assert_eq!(all_exact, exact, "{name}");
        }
    }

    #[test]
    fn group_chart_examples() {
        let h = catalog::lookup("heisenberg_3").unwrap().algebra;
        assert!(group_chart_check(&h, &[int(1), int(2), int(3)]).unwrap().passed());
        assert!(group_chart_check(&h, &[int(0), int(0), int(0)]).unwrap().passed());
    }

    #[test]
    fn rescaling_on_perturbed_frame() {
        let f = catalog::lookup("perturbed_heisenberg_3")
            .unwrap()
            .frame
            .at(vec![rat(1, 2), int(-1), int(2)])
            .unwrap();
        for t in [rat(1, 2), rat(1, 3), int(2)] {
            assert!(rescaling_check(&f, &t).unwrap().passed());
        }
    }

    #[test]
    fn heisenberg_manifold_quadratic() {
        let f = catalog::heisenberg_manifold_frame(int(2), int(3)).unwrap();
        let q = step_two_quadratic_map(&f).unwrap();
        let expected = &x(3, 2) - &(&x(3, 0) * &x(3, 1)).scale(&rat(5, 2));
        assert_eq!(q.component(2), &expected);
        assert!(quadratic_check(&f).unwrap().passed());
    }

    #[test]
    fn first_kind_residuals() {
        for name in catalog::FRAMES {
            let f = catalog::lookup(name).unwrap().frame;
            assert!(first_kind_check(&f).unwrap().passed(), "{name}");
        }
        let f = catalog::lookup("perturbed_heisenberg_3").unwrap().frame;
        let dirs = unit_directions(f.weights(), 4, 2);
        let r = first_kind_check_numeric(&f, &dirs, &dyadic_grid(10), 1e-3).unwrap();
        assert!(r.passed(), "{r}");
    }
}
