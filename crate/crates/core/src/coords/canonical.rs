//! Canonical coordinates of the first and second kind.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded::MultiIndex;
use crate::poly::{PolyMap, RationalPoly};
use crate::rational::to_f64;
use crate::triangular::invert_unipotent;
use crate::vfield::Frame;

use super::change::{AffineMap, CoordinateChange};
use super::flow::{exact_flow, numeric_flow, F64Field, DEFAULT_STEP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalKind {
    /// `x ↦ exp(x_1 X_1 + ⋯ + x_n X_n)(a)`.
    First,
    /// `x ↦ exp(x_1 X_1) ∘ ⋯ ∘ exp(x_n X_n)(a)`.
    Second,
}

/// Exact canonical chart: the parametrization and the chart inverting it.
#[derive(Clone, Debug)]
pub struct CanonicalChart {
    pub kind: CanonicalKind,
    /// The parametrization `x ↦ exp(…)(a)`.
    pub parametrization: PolyMap,
    /// Its inverse, as a coordinate change centered at `a`.
    pub chart: CoordinateChange,
}

/// Parametrization by exact flows; the frame must be graded-triangular.
pub fn canonical_parametrization(frame: &Frame, kind: CanonicalKind) -> Result<PolyMap> {
    let w = frame.weights();
    let n = w.dim();
    let a: Vec<RationalPoly> = frame
        .base_point()
        .iter()
        .map(|c| RationalPoly::constant(n, c.clone()))
        .collect();
    let xs: Vec<RationalPoly> = (0..n).map(|j| RationalPoly::var(n, j)).collect();
    match kind {
        CanonicalKind::First => {
            let flow = exact_flow(frame.fields(), w)?;
            flow.substitute(RationalPoly::one(n), a, xs)
        }
        CanonicalKind::Second => {
            let mut p = a;
            for j in (0..n).rev() {
                let flow = exact_flow(&frame.fields()[j..=j], w)?;
                p = flow
                    .substitute(RationalPoly::one(n), p, vec![xs[j].clone()])?
                    .into_components();
            }
            PolyMap::new(n, p)
        }
    }
}

/// Canonical chart in exact arithmetic.
///
/// Writing the parametrization as `F = T_a⁻¹ ∘ U`, the chart is `U⁻¹ ∘ T_a`; this
/// requires `U` to be unipotent triangular, which holds for the catalog frames.
pub fn canonical_exact(frame: &Frame, kind: CanonicalKind) -> Result<CanonicalChart> {
    let parametrization = canonical_parametrization(frame, kind)?;
    let a = frame.base_point().to_vec();
    let bt = frame.coefficient_matrix(&a)?.transpose();
    let affine = AffineMap::new(bt.inverse()?, a)?;
    let u = affine.to_map().compose(&parametrization)?;
    let u_inv = invert_unipotent(&u, frame.weights()).map_err(|_| {
        Error::NotInvertible("canonical parametrization has no polynomial inverse; use numeric mode".into())
    })?;
    let chart = CoordinateChange::with_inverse(affine, u_inv, frame.weights().clone(), Some(u))?;
    Ok(CanonicalChart {
        kind,
        parametrization,
        chart,
    })
}

/// Parametrization evaluated with RK4 flows.
pub fn canonical_parametrization_numeric(frame: &Frame, kind: CanonicalKind, x: &[f64], step: f64) -> Vec<f64> {
    let a: Vec<f64> = frame.base_point().iter().map(to_f64).collect();
    match kind {
        CanonicalKind::First => {
            let field = F64Field::combination(frame.fields(), x);
            numeric_flow(&field, &a, 1.0, step)
        }
        CanonicalKind::Second => {
            let mut p = a;
            for j in (0..frame.dim()).rev() {
                if x[j] != 0.0 {
                    p = numeric_flow(&F64Field::new(frame.field(j)), &p, x[j], step);
                }
            }
            p
        }
    }
}

/// Canonical chart from sampled flows and a least-squares polynomial fit in
/// `z = p − a`.
#[derive(Clone, Debug, Serialize)]
pub struct NumericChart {
    pub kind: CanonicalKind,
    pub base_point: Vec<f64>,
    pub degree: u32,
    pub radius: f64,
    pub samples: usize,
    pub monomials: Vec<Vec<u32>>,
    /// `coefficients[k][i]` multiplies `monomials[i]` in component `k`.
    pub coefficients: Vec<Vec<f64>>,
    /// Largest absolute fit residual over the samples.
    pub max_residual: f64,
}

impl NumericChart {
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = p.iter().zip(&self.base_point).map(|(a, b)| a - b).collect();
        let basis: Vec<f64> = self.monomials.iter().map(|e| monomial(e, &z)).collect();
        self.coefficients
            .iter()
            .map(|c| c.iter().zip(&basis).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn monomial(e: &[u32], z: &[f64]) -> f64 {
    e.iter().zip(z).fold(1.0, |acc, (&a, &v)| acc * v.powi(a as i32))
}

#[derive(Clone, Debug)]
pub struct NumericOptions {
    pub seed: u64,
    pub radius: f64,
    pub step: f64,
    /// Samples per fitted coefficient.
    pub oversampling: usize,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            radius: 0.25,
            step: DEFAULT_STEP,
            oversampling: 3,
        }
    }
}

/// Canonical chart fitted with total degree `r + 1` on the box of the given radius.
pub fn canonical_numeric(frame: &Frame, kind: CanonicalKind, opts: &NumericOptions) -> Result<NumericChart> {
    let n = frame.dim();
    let degree = frame.weights().step() + 1;
    let monomials: Vec<Vec<u32>> = MultiIndex::up_to_weight(&vec![1; n], degree)
        .into_iter()
        .map(|m| m.0)
        .collect();
    let samples = monomials.len() * opts.oversampling.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let a: Vec<f64> = frame.base_point().iter().map(to_f64).collect();
    let mut design = DMatrix::<f64>::zeros(samples, monomials.len());
    let mut targets = DMatrix::<f64>::zeros(samples, n);
    for s in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-opts.radius..=opts.radius)).collect();
        let p = canonical_parametrization_numeric(frame, kind, &x, opts.step);
        let z: Vec<f64> = p.iter().zip(&a).map(|(u, v)| u - v).collect();
        for (i, e) in monomials.iter().enumerate() {
            design[(s, i)] = monomial(e, &z);
        }
        for k in 0..n {
            targets[(s, k)] = x[k];
        }
    }
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&targets, 1e-14)
        .map_err(|e| Error::NotInvertible(format!("least-squares fit failed: {e}")))?;
    let fitted = &design * &sol;
    let max_residual = (&fitted - &targets).abs().max();
    let coefficients = (0..n)
        .map(|k| DVector::from(sol.column(k)).iter().copied().collect())
        .collect();
    Ok(NumericChart {
        kind,
        base_point: a,
        degree,
        radius: opts.radius,
        samples,
        monomials,
        coefficients,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{int, rat};

    fn x(j: usize) -> RationalPoly {
        RationalPoly::var(3, j)
    }

    #[test]
    fn abelian_charts_are_translations() {
        let f = catalog::lookup("abelian_2")
            .unwrap()
            .frame
            .at(vec![int(1), int(2)])
            .unwrap();
        for kind in [CanonicalKind::First, CanonicalKind::Second] {
            let c = canonical_exact(&f, kind).unwrap();
            assert!(c.chart.triangular().is_identity());
            assert_eq!(c.chart.affine(), &AffineMap::translation(vec![int(1), int(2)]));
        }
    }

    #[test]
    fn heisenberg_charts() {
        let h = catalog::lookup("heisenberg_3").unwrap().frame;
        let first = canonical_exact(&h, CanonicalKind::First).unwrap();
        assert!(first.chart.forward().is_identity());
        let second = canonical_exact(&h, CanonicalKind::Second).unwrap();
        let fwd = PolyMap::new(3, vec![x(0), x(1), &x(2) - &(&x(0) * &x(1)).scale(&rat(1, 2))]).unwrap();
        assert_eq!(second.parametrization, fwd);
        let chart = PolyMap::new(3, vec![x(0), x(1), &x(2) + &(&x(0) * &x(1)).scale(&rat(1, 2))]).unwrap();
        assert_eq!(second.chart.forward(), chart);
    }

    #[test]
    fn group_first_kind_is_left_translation() {
        // exp(Σ x_j X_j)(a) = a·x for left-invariant fields.
        let e = catalog::lookup("engel_4").unwrap();
        let a = vec![int(1), rat(-1, 2), int(2), rat(1, 3)];
        let f = e.frame.at(a.clone()).unwrap();
        let c = canonical_exact(&f, CanonicalKind::First).unwrap();
        let g = crate::group::NilpotentGroup::new(e.algebra).unwrap();
        assert_eq!(c.parametrization, g.left_translation(&a).unwrap());
    }

    #[test]
    fn numeric_matches_exact_parametrization() {
        let p = catalog::lookup("perturbed_heisenberg_3").unwrap().frame;
        let pt = [0.2, -0.1, 0.05];
        for kind in [CanonicalKind::First, CanonicalKind::Second] {
            let exact = canonical_parametrization(&p, kind).unwrap();
            let ev = exact.evaluate_f64(&pt).unwrap();
            let num = canonical_parametrization_numeric(&p, kind, &pt, DEFAULT_STEP);
            for (u, v) in ev.iter().zip(&num) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn numeric_fit_inverts_parametrization() {
        let p = catalog::lookup("perturbed_heisenberg_3").unwrap().frame;
        let chart = canonical_numeric(&p, CanonicalKind::First, &NumericOptions::default()).unwrap();
        assert!(chart.max_residual < 1e-3, "{}", chart.max_residual);
        let x = [0.1, 0.05, -0.08];
        let q = canonical_parametrization_numeric(&p, CanonicalKind::First, &x, DEFAULT_STEP);
        let back = chart.apply(&q);
        for (u, v) in back.iter().zip(&x) {
            assert!((u - v).abs() < 1e-3);
        }
    }
}
