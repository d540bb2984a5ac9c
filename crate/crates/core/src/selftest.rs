//! The acceptance suite as library code, shared by the test target and `carnot selftest`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{self, ALGEBRAS, FRAMES};
use crate::coords::canonical::{canonical_exact, CanonicalKind};
use crate::coords::flow::{exact_flow, exp_map, numeric_flow, F64Field, DEFAULT_STEP};
use crate::coords::{epsilon, epsilon_pipeline, CoordinateChange};
use crate::error::Result;
use crate::graded::{dilate, dyadic_grid, MultiIndex, WeightVector};
use crate::group::{left_invariant_fields, NilpotentGroup};
use crate::poly::RationalPoly;
use crate::rational::{int, rat, to_f64, Rational};
use crate::verify::{
    check_carnot, check_privileged, first_kind_check, first_kind_check_numeric, generate_carnot_variants,
    generate_privileged_variants, group_chart_check, osculation_report, quadratic_check, random_homogeneous_diffeo,
    random_nontrivial_homogeneous_diffeo, random_perturbation, rescaling_check, unit_directions,
};
use crate::vfield::{Frame, Order, PolyVectorField};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {:2} {}: {}", self.id, self.title, self.detail)
    }
}

pub const TITLES: [&str; 14] = [
    "group axioms",
    "dilation automorphism",
    "exp of canonical basis",
    "left-invariant bracket table",
    "psi privileged order",
    "epsilon Carnot certification",
    "group-law chart identity",
    "step-two quadratic coefficients",
    "rescaling equivariance",
    "first-kind canonical residual",
    "second-kind canonical witness",
    "osculation by the tangent group",
    "characterization generators",
    "RK4 against exact flows",
];

fn result(id: u32, outcome: Result<std::result::Result<String, String>>) -> CriterionResult {
    let (pass, detail) = match outcome {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        title: TITLES[id as usize - 1],
        pass,
        detail,
    }
}

fn rng(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(id) << 32))
}

fn random_rational<R: Rng>(rng: &mut R, max: i64, den: i64) -> Rational {
    rat(rng.gen_range(-max..=max), rng.gen_range(1..=den))
}

fn random_point<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng, 5, 4)).collect()
}

fn neg(x: &[Rational]) -> Vec<Rational> {
    x.iter().map(|v| -v).collect()
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: u32, seed: u64) -> CriterionResult {
    let mut r = rng(seed, id);
    let outcome = match id {
        1 => group_axioms(&mut r),
        2 => dilation_automorphism(&mut r),
        3 => exp_identity(),
        4 => bracket_table(),
        5 => psi_order(),
        6 => epsilon_carnot(&mut r),
        7 => group_law_chart(&mut r),
        8 => quadratic(&mut r),
        9 => rescaling(&mut r),
        10 => first_kind(seed),
        11 => second_kind(),
        12 => osculation(seed),
        13 => generators(&mut r),
        14 => rk4_agreement(&mut r),
        _ => Ok(Err(format!("no criterion {id}"))),
    };
    result(id, outcome)
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=14).map(|id| run_criterion(id, seed)).collect()
}

type Outcome = Result<std::result::Result<String, String>>;

fn group_axioms<R: Rng>(rng: &mut R) -> Outcome {
    for name in ALGEBRAS {
        let g = NilpotentGroup::new(catalog::lookup(name)?.algebra)?;
        let n = g.dim();
        let zero = vec![Rational::zero(); n];
        for _ in 0..100 {
            let (x, y, z) = (random_point(rng, n), random_point(rng, n), random_point(rng, n));
            let left = g.product(&g.product(&x, &y)?, &z)?;
            let right = g.product(&x, &g.product(&y, &z)?)?;
            if left != right {
                return Ok(Err(format!("{name}: associativity fails at x={x:?}")));
            }
            if g.product(&x, &zero)? != x || g.product(&zero, &x)? != x {
                return Ok(Err(format!("{name}: 0 is not a unit at {x:?}")));
            }
            if g.product(&x, &neg(&x))? != zero || g.product(&neg(&x), &x)? != zero {
                return Ok(Err(format!("{name}: -x is not an inverse at {x:?}")));
            }
        }
    }
    Ok(Ok("100 triples per algebra".into()))
}

fn dilation_automorphism<R: Rng>(rng: &mut R) -> Outcome {
    for name in ALGEBRAS {
        let g = NilpotentGroup::new(catalog::lookup(name)?.algebra)?;
        let w = g.algebra().weights().clone();
        for _ in 0..20 {
            let (x, y) = (random_point(rng, w.dim()), random_point(rng, w.dim()));
            let mut t = random_rational(rng, 5, 4);
            if t.is_zero() {
                t = int(3);
            }
            let lhs = dilate(&g.product(&x, &y)?, &t, &w)?;
            let rhs = g.product(&dilate(&x, &t, &w)?, &dilate(&y, &t, &w)?)?;
            if lhs != rhs {
                return Ok(Err(format!("{name}: fails at t={t}")));
            }
        }
    }
    Ok(Ok("20 samples per algebra".into()))
}

fn exp_identity() -> Outcome {
    for name in ALGEBRAS {
        let l = catalog::lookup(name)?.algebra;
        let e = exp_map(&left_invariant_fields(&l)?, l.weights())?;
        if !e.is_identity() {
            return Ok(Err(format!("{name}: exp is {}", e.map())));
        }
    }
    Ok(Ok(format!("{} algebras", ALGEBRAS.len())))
}

fn bracket_table() -> Outcome {
    for name in ALGEBRAS {
        let l = catalog::lookup(name)?.algebra;
        let w = l.weights().clone();
        let frame = Frame::new(left_invariant_fields(&l)?, w.clone(), vec![Rational::zero(); w.dim()])?;
        let table = frame.structure_constants_at()?;
        let input: BTreeMap<_, _> = l.entries().map(|(i, j, k, c)| ((i, j, k), c.clone())).collect();
        if table.full != input || table.graded != l {
            return Ok(Err(format!("{name}: bracket table differs")));
        }
    }
    Ok(Ok(format!("{} algebras", ALGEBRAS.len())))
}

fn psi_order() -> Outcome {
    for name in FRAMES {
        let frame = catalog::lookup(name)?.frame;
        let p = epsilon_pipeline(&frame)?;
        let w = frame.weights();
        for k in 0..w.dim() {
            let order = p.privileged.function_order(&RationalPoly::var(w.dim(), k), w[k] + 1)?;
            if order != Order::Exact(w[k]) {
                return Ok(Err(format!("{name}: x{} has order {order}, expected {}", k + 1, w[k])));
            }
        }
    }
    Ok(Ok(format!("{} frames", FRAMES.len())))
}

fn epsilon_carnot<R: Rng>(rng: &mut R) -> Outcome {
    let mut count = 0;
    for name in FRAMES {
        let base = catalog::lookup(name)?.frame;
        let mut points = vec![vec![Rational::zero(); base.dim()]];
        points.push(random_point(rng, base.dim()));
        points.push(random_point(rng, base.dim()));
        for a in points {
            let frame = base.at(a)?;
            let r = check_carnot(&frame, &epsilon(&frame)?)?;
            if !r.passed() {
                return Ok(Err(format!("{name}: {r}")));
            }
            count += 1;
        }
    }
    Ok(Ok(format!("{count} frame/base-point pairs")))
}

fn group_law_chart<R: Rng>(rng: &mut R) -> Outcome {
    let h = catalog::lookup("heisenberg_3")?;
    let at = h.frame.at(vec![int(1), int(2), int(3)])?;
    let value = epsilon(&at)?.apply(&[int(4), int(6), int(10)])?;
    if value != vec![int(3), int(4), int(8)] {
        return Ok(Err(format!("eps_(1,2,3)(4,6,10) = {value:?}")));
    }
    for name in ["heisenberg_3", "engel_4"] {
        let l = catalog::lookup(name)?.algebra;
        for _ in 0..5 {
            let a = random_point(rng, l.dim());
            let r = group_chart_check(&l, &a)?;
            if !r.passed() {
                return Ok(Err(format!("{name}: {r}")));
            }
        }
    }
    Ok(Ok("eps_(1,2,3)(4,6,10) = (3,4,8); 5 random points each".into()))
}

/// Step-two frame with random linear and quadratic coefficients on the weight-2 directions.
fn random_step_two_frame<R: Rng>(rng: &mut R) -> Result<Frame> {
    let layers: &[u32] = [&[1, 1, 2][..], &[1, 1, 1, 2], &[1, 1, 1, 2, 2]][rng.gen_range(0..3)];
    let w = WeightVector::new(layers.to_vec())?;
    let n = w.dim();
    let mut fields = Vec::with_capacity(n);
    for j in 0..n {
        let mut coeffs = PolyVectorField::coordinate(n, j).coeffs().to_vec();
        if w[j] == 1 {
            for k in (0..n).filter(|&k| w[k] == 2) {
                for alpha in MultiIndex::up_to_weight(&vec![1; n], 2) {
                    let order = alpha.order();
                    let low = alpha.support().all(|v| w[v] == 1);
                    if (1..=2).contains(&order) && low && rng.gen_bool(0.5) {
                        coeffs[k].add_term(alpha, random_rational(rng, 3, 2));
                    }
                }
            }
        }
        fields.push(PolyVectorField::new(coeffs)?);
    }
    Frame::new(fields, w, vec![Rational::zero(); n])
}

fn quadratic<R: Rng>(rng: &mut R) -> Outcome {
    for i in 0..20 {
        let f = random_step_two_frame(rng)?;
        let r = quadratic_check(&f)?;
        if !r.passed() {
            return Ok(Err(format!("random frame {i}: {r}")));
        }
    }
    let f = catalog::heisenberg_manifold_frame(int(2), int(-1))?;
    let p = epsilon_pipeline(&f)?;
    let x = |j| RationalPoly::var(3, j);
    let expected = &x(2) - &(&x(0) * &x(1)).scale(&rat(1, 2));
    if p.epsilon_hat.map().component(2) != &expected {
        return Ok(Err(format!("Heisenberg manifold: {}", p.epsilon_hat.map())));
    }
    Ok(Ok("20 random frames and the Heisenberg manifold".into()))
}

fn rescaling<R: Rng>(rng: &mut R) -> Outcome {
    let mut frames = vec![
        catalog::lookup("perturbed_heisenberg_3")?.frame,
        catalog::lookup("perturbed_engel_4")?.frame,
        catalog::lookup("step3_filiform_5")?.frame,
    ];
    frames.push(catalog::heisenberg_manifold_frame(int(1), int(2))?);
    let mut count = 0;
    for base in frames {
        let frame = base.at(random_point(rng, base.dim()))?;
        for t in [rat(1, 2), rat(1, 3), int(2)] {
            let r = rescaling_check(&frame, &t)?;
            if !r.passed() {
                return Ok(Err(format!("t = {t}: {r}")));
            }
            count += 1;
        }
    }
    Ok(Ok(format!("{count} frame/scale pairs")))
}

fn first_kind(seed: u64) -> Outcome {
    for name in FRAMES {
        let r = first_kind_check(&catalog::lookup(name)?.frame)?;
        if !r.passed() {
            return Ok(Err(format!("{name}: {r}")));
        }
    }
    let f = catalog::lookup("perturbed_heisenberg_3")?.frame;
    let dirs = unit_directions(f.weights(), 8, seed);
    let r = first_kind_check_numeric(&f, &dirs, &dyadic_grid(10), DEFAULT_STEP)?;
    if !r.passed() {
        return Ok(Err(format!("numeric: {r}")));
    }
    let worst = min_slope(&r.scaling);
    Ok(Ok(format!(
        "exact on {} frames; numeric min slope {worst:.3}",
        FRAMES.len()
    )))
}

fn min_slope(scaling: &[(String, crate::graded::ScalingReport)]) -> f64 {
    scaling
        .iter()
        .flat_map(|(_, s)| s.directions.iter())
        .filter_map(|d| match d.decay {
            crate::graded::Decay::Slope { slope, .. } => Some(slope),
            crate::graded::Decay::Exact => None,
        })
        .fold(f64::INFINITY, f64::min)
}

fn second_kind() -> Outcome {
    let mut notes = Vec::new();
    for name in ["heisenberg_3", "engel_4"] {
        let frame = catalog::lookup(name)?.frame;
        let chart = canonical_exact(&frame, CanonicalKind::Second)?.chart;
        if !check_privileged(&frame, &chart)?.passed() {
            return Ok(Err(format!("{name}: second-kind chart is not privileged")));
        }
        let r = check_carnot(&frame, &chart)?;
        let Some(first) = r.witnesses.first() else {
            return Ok(Err(format!("{name}: second-kind chart passed the Carnot check")));
        };
        let w = frame.weights();
        let (Some(k), Some(res)) = (first.component, &first.residual) else {
            return Ok(Err(format!("{name}: witness without a residual term")));
        };
        if res.min_weight(w) != Some(w[k - 1]) {
            return Ok(Err(format!("{name}: witness {} has the wrong weight", first.detail)));
        }
        if name == "heisenberg_3" && first.detail != "x1*x2/2 in component 3" {
            return Ok(Err(format!("heisenberg_3: witness {}", first.detail)));
        }
        notes.push(format!("{name}: {}", first.detail));
    }
    Ok(Ok(notes.join("; ")))
}

fn osculation(seed: u64) -> Outcome {
    let grid = dyadic_grid(10);
    let mut notes = Vec::new();
    for (name, exact) in [
        ("heisenberg_3", true),
        ("engel_4", true),
        ("perturbed_heisenberg_3", false),
        ("perturbed_engel_4", false),
    ] {
        let f = catalog::lookup(name)?.frame;
        let dirs = unit_directions(&f.weights().doubled(), 8, seed);
        let r = osculation_report(&f, &epsilon(&f)?, &dirs, &grid)?;
        if !r.passed() {
            return Ok(Err(format!("{name}: {r}")));
        }
        let slope = min_slope(&r.scaling);
        if exact && slope.is_finite() {
            return Ok(Err(format!("{name}: residual is not identically zero")));
        }
        notes.push(if !slope.is_finite() {
            format!("{name} exact")
        } else {
            format!("{name} min slope {slope:.3}")
        });
    }
    Ok(Ok(notes.join("; ")))
}

fn generators<R: Rng>(rng: &mut R) -> Outcome {
    let frames: Vec<(&str, Frame)> = FRAMES
        .iter()
        .map(|n| Ok((*n, catalog::lookup(n)?.frame)))
        .collect::<Result<_>>()?;
    let pick = |rng: &mut R| rng.gen_range(0..frames.len());
    let mut changes: BTreeMap<usize, CoordinateChange> = BTreeMap::new();
    let mut eps = |i: usize| -> Result<CoordinateChange> {
        if let Some(c) = changes.get(&i) {
            return Ok(c.clone());
        }
        let c = epsilon(&frames[i].1)?;
        changes.insert(i, c.clone());
        Ok(c)
    };
    for _ in 0..50 {
        let i = pick(rng);
        let (name, f) = &frames[i];
        let w = f.weights();
        let v = generate_privileged_variants(
            &eps(i)?,
            &random_homogeneous_diffeo(w, rng),
            &random_perturbation(w, rng),
        )?;
        if !check_privileged(f, &v)?.passed() {
            return Ok(Err(format!("{name}: privileged variant rejected")));
        }
    }
    for _ in 0..50 {
        let i = pick(rng);
        let (name, f) = &frames[i];
        let v = generate_carnot_variants(&eps(i)?, &random_perturbation(f.weights(), rng))?;
        if !check_carnot(f, &v)?.passed() {
            return Ok(Err(format!("{name}: Carnot variant rejected")));
        }
    }
    let mut flips = 0;
    while flips < 10 {
        let i = pick(rng);
        let (name, f) = &frames[i];
        let Some(bad) = random_nontrivial_homogeneous_diffeo(f.weights(), rng) else {
            continue;
        };
        let v = eps(i)?.then(&bad)?;
        if check_carnot(f, &v)?.passed() {
            return Ok(Err(format!("{name}: homogeneous composition kept the Carnot verdict")));
        }
        flips += 1;
    }
    Ok(Ok("50 privileged, 50 Carnot, 10 adversarial".into()))
}

/// Random graded-triangular fields on `w = (1,1,2,3)` with small coefficients.
fn random_triangular_fields<R: Rng>(rng: &mut R, w: &WeightVector, count: usize) -> Result<Vec<PolyVectorField>> {
    let n = w.dim();
    (0..count)
        .map(|_| {
            let coeffs = (0..n)
                .map(|k| {
                    let lower: Vec<u32> = (0..n).map(|l| if w[l] < w[k] { 1 } else { 0 }).collect();
                    let mut c = RationalPoly::zero(n);
                    for alpha in MultiIndex::up_to_weight(&vec![1; n], 2) {
                        let allowed = alpha.0.iter().zip(&lower).all(|(a, ok)| *a == 0 || *ok == 1);
                        if allowed && rng.gen_bool(0.4) {
                            c.add_term(alpha, random_rational(rng, 2, 2));
                        }
                    }
                    c
                })
                .collect();
            PolyVectorField::new(coeffs)
        })
        .collect()
}

fn rk4_agreement<R: Rng>(rng: &mut R) -> Outcome {
    let w = WeightVector::new(vec![1, 1, 2, 3])?;
    let n = w.dim();
    let mut worst = 0f64;
    for _ in 0..50 {
        let m = rng.gen_range(1..=3);
        let fields = random_triangular_fields(rng, &w, m)?;
        let d = (n + m) as i64;
        let y: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-8..=8), 8 * d)).collect();
        let xi: Vec<Rational> = (0..m).map(|_| rat(rng.gen_range(-8..=8), 8 * d)).collect();
        let exact = exact_flow(&fields, &w)?.endpoint(&int(1), &y, &xi)?;
        let xi_f: Vec<f64> = xi.iter().map(to_f64).collect();
        let y_f: Vec<f64> = y.iter().map(to_f64).collect();
        let num = numeric_flow(&F64Field::combination(&fields, &xi_f), &y_f, 1.0, DEFAULT_STEP);
        for (a, b) in exact.iter().zip(&num) {
            worst = worst.max((to_f64(a) - b).abs());
        }
    }
    if worst <= 1e-9 {
        Ok(Ok(format!("max deviation {worst:.2e} over 50 flows")))
    } else {
        Ok(Err(format!("max deviation {worst:.2e} exceeds 1e-9")))
    }
}
