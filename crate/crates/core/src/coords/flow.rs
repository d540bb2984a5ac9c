//! Exact flows of graded-triangular fields, exponential maps, and an RK4 integrator.

use crate::error::{check_dim, Error, Result};
use crate::graded::WeightVector;
use crate::poly::{PolyMap, RationalPoly};
use crate::rational::Rational;
use crate::triangular::{invert_triangular, TriangularMap};
use crate::vfield::PolyVectorField;

/// Checks that the `∂_k` coefficient of every field only involves variables of
/// weight below `w_k`.
pub fn check_graded_triangular(fields: &[PolyVectorField], w: &[u32]) -> Result<()> {
    for (j, f) in fields.iter().enumerate() {
        check_dim(w.len(), f.dim())?;
        for (k, a) in f.coeffs().iter().enumerate() {
            if let Some(l) = (0..w.len()).find(|&l| w[l] >= w[k] && a.depends_on(l)) {
                return Err(Error::NonTriangular(format!(
                    "coefficient of d{} in field {} depends on x{} (weight {} ≥ {})",
                    k + 1,
                    j + 1,
                    l + 1,
                    w[l],
                    w[k]
                )));
            }
        }
    }
    Ok(())
}

/// Flow of `Σ_j ξ_j Y_j` from `y`, as polynomials in `(t, y_1..y_n, ξ_1..ξ_m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowResult {
    n: usize,
    m: usize,
    components: Vec<RationalPoly>,
}

impl FlowResult {
    /// Number of variables of the flow polynomials, `1 + n + m`.
    pub fn nvars(&self) -> usize {
        1 + self.n + self.m
    }

    /// `x_k(t; y, ξ)`; variable 0 is `t`, then `y`, then `ξ`.
    pub fn components(&self) -> &[RationalPoly] {
        &self.components
    }

    /// Substitutes polynomials for `t`, `y` and `ξ`.
    pub fn substitute(&self, t: RationalPoly, y: Vec<RationalPoly>, xi: Vec<RationalPoly>) -> Result<PolyMap> {
        check_dim(self.n, y.len())?;
        check_dim(self.m, xi.len())?;
        let nv = t.nvars();
        let mut sub = vec![t];
        sub.extend(y);
        sub.extend(xi);
        let sub = PolyMap::new(nv, sub)?;
        PolyMap::new(self.nvars(), self.components.clone())?.compose(&sub)
    }

    /// The endpoint `x(t)` for concrete data.
    pub fn endpoint(&self, t: &Rational, y: &[Rational], xi: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.n, y.len())?;
        check_dim(self.m, xi.len())?;
        let mut p = vec![t.clone()];
        p.extend_from_slice(y);
        p.extend_from_slice(xi);
        self.components.iter().map(|c| c.evaluate(&p)).collect()
    }
}

/// Integrates `x' = Σ_j ξ_j Y_j(x)`, `x(0) = y` exactly, coordinate by coordinate
/// in order of increasing weight.
pub fn exact_flow(fields: &[PolyVectorField], w: &WeightVector) -> Result<FlowResult> {
    check_graded_triangular(fields, w)?;
    let n = w.dim();
    let m = fields.len();
    let nv = 1 + n + m;
    let mut x: Vec<RationalPoly> = (0..n).map(|k| RationalPoly::var(nv, 1 + k)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| w[k]);
    for &k in &order {
        // Coordinates of weight ≥ w_k are not read by the ∂_k coefficients.
        let current = PolyMap::new(nv, x.clone())?;
        let mut rhs = RationalPoly::zero(nv);
        for (j, f) in fields.iter().enumerate() {
            let b = f.coeff(k);
            if b.is_zero() {
                continue;
            }
            let xi = RationalPoly::var(nv, 1 + n + j);
            rhs = &rhs + &(&xi * &b.substitute(&current)?);
        }
        x[k] = &RationalPoly::var(nv, 1 + k) + &rhs.integrate(0);
    }
    Ok(FlowResult { n, m, components: x })
}

/// `exp_Y(x) = exp(x_1 Y_1 + ⋯ + x_n Y_n)(0)`.
pub fn exp_map(fields: &[PolyVectorField], w: &WeightVector) -> Result<TriangularMap> {
    let n = w.dim();
    check_dim(n, fields.len())?;
    let flow = exact_flow(fields, w)?;
    let map = flow.substitute(
        RationalPoly::one(n),
        vec![RationalPoly::zero(n); n],
        (0..n).map(|j| RationalPoly::var(n, j)).collect(),
    )?;
    TriangularMap::new(map, w.clone())
}

/// Inverse of an exponential map; the input must be `w`-homogeneous.
pub fn log_map(m: &TriangularMap) -> Result<TriangularMap> {
    if !m.is_homogeneous() {
        return Err(Error::ShapeViolation(
            "logarithm expects a w-homogeneous exponential map".into(),
        ));
    }
    Ok(invert_triangular(m))
}

/// Floating-point copy of a polynomial field for integration.
#[derive(Clone, Debug)]
pub struct F64Field {
    coeffs: Vec<Vec<(Vec<u32>, f64)>>,
}

impl F64Field {
    pub fn new(field: &PolyVectorField) -> Self {
        Self {
            coeffs: field.coeffs().iter().map(RationalPoly::to_f64_terms).collect(),
        }
    }

    /// `Σ_j ξ_j Y_j`.
    pub fn combination(fields: &[PolyVectorField], xi: &[f64]) -> Self {
        let n = fields.first().map_or(0, PolyVectorField::dim);
        let mut coeffs = vec![Vec::new(); n];
        for (f, &s) in fields.iter().zip(xi) {
            for (k, a) in f.coeffs().iter().enumerate() {
                coeffs[k].extend(a.to_f64_terms().into_iter().map(|(e, c)| (e, c * s)));
            }
        }
        Self { coeffs }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, terms) in out.iter_mut().zip(&self.coeffs) {
            *o = terms
                .iter()
                .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&a, &xi)| acc * xi.powi(a as i32)))
                .sum();
        }
    }
}

/// Classic fixed-step RK4 for `x' = X(x)`, `x(0) = y`, up to time `duration`.
/// The step is shrunk so that it divides `duration`.
pub fn numeric_flow(field: &F64Field, y: &[f64], duration: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "step must be positive");
    let n = y.len();
    let steps = (duration.abs() / step).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let mut x = y.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for _ in 0..steps {
        field.eval(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        field.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        field.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        field.eval(&tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{int, rat};

    #[test]
    fn coordinate_fields_flow_linearly() {
        let w = WeightVector::new(vec![1, 2]).unwrap();
        let fields: Vec<_> = (0..2).map(|j| PolyVectorField::coordinate(2, j)).collect();
        let f = exact_flow(&fields, &w).unwrap();
        let e = f.endpoint(&rat(1, 2), &[int(1), int(2)], &[int(3), int(-4)]).unwrap();
        assert_eq!(e, vec![rat(5, 2), int(0)]);
        assert!(exp_map(&fields, &w).unwrap().is_identity());
    }

    #[test]
    fn heisenberg_flow_from_origin_is_linear() {
        let h = catalog::lookup("heisenberg_3").unwrap();
        let f = exact_flow(h.frame.fields(), h.frame.weights()).unwrap();
        let xi = [rat(1, 3), int(2), rat(-1, 2)];
        let t = rat(3, 4);
        let e = f.endpoint(&t, &[int(0), int(0), int(0)], &xi).unwrap();
        assert_eq!(e, xi.iter().map(|v| v * &t).collect::<Vec<_>>());
    }

    #[test]
    fn non_triangular_is_rejected() {
        let w = WeightVector::new(vec![1, 1]).unwrap();
        let mut c = PolyVectorField::coordinate(2, 0).coeffs().to_vec();
        c[0] = &c[0] + &RationalPoly::var(2, 1);
        let f = PolyVectorField::new(c).unwrap();
        assert!(matches!(exact_flow(&[f], &w), Err(Error::NonTriangular(_))));
    }

    #[test]
    fn exp_of_left_invariant_basis_is_identity() {
        for name in catalog::ALGEBRAS {
            let e = catalog::lookup(name).unwrap();
            assert!(
                exp_map(e.frame.fields(), e.frame.weights()).unwrap().is_identity(),
                "{name}"
            );
        }
    }

    #[test]
    fn log_requires_homogeneity() {
        let w = WeightVector::new(vec![1, 1, 3]).unwrap();
        let x = |j| RationalPoly::var(3, j);
        let m = TriangularMap::new(PolyMap::new(3, vec![x(0), x(1), &x(2) + &(&x(0) * &x(1))]).unwrap(), w).unwrap();
        assert!(log_map(&m).is_err());
        let id = TriangularMap::identity(WeightVector::new(vec![1, 2]).unwrap());
        assert!(log_map(&id).unwrap().is_identity());
    }

    #[test]
    fn flow_semigroup_law_on_engel() {
        let e = catalog::lookup("engel_4").unwrap();
        let w = e.frame.weights();
        let f = exact_flow(e.frame.fields(), w).unwrap();
        let nv = f.nvars();
        let (s, t) = (rat(1, 3), rat(2, 5));
        let var = |i| RationalPoly::var(nv, i);
        let ys: Vec<_> = (1..=4).map(var).collect();
        let xis: Vec<_> = (5..=8).map(var).collect();
        let whole = f
            .substitute(RationalPoly::constant(nv, &s + &t), ys.clone(), xis.clone())
            .unwrap();
        let first = f.substitute(RationalPoly::constant(nv, s), ys, xis.clone()).unwrap();
        let second = f
            .substitute(RationalPoly::constant(nv, t), first.into_components(), xis)
            .unwrap();
        assert_eq!(whole, second);
    }

    #[test]
    fn rk4_examples() {
        let d1 = F64Field::new(&PolyVectorField::coordinate(3, 0));
        let end = numeric_flow(&d1, &[0.0; 3], 1.0, DEFAULT_STEP);
        for (a, b) in end.iter().zip([1.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let h = catalog::lookup("heisenberg_3").unwrap();
        let x1 = F64Field::new(h.frame.field(0));
        let end = numeric_flow(&x1, &[0.0, 1.0, 0.0], 1.0, DEFAULT_STEP);
        for (a, b) in end.iter().zip([1.0, 1.0, -0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
