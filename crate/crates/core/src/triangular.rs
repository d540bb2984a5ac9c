//! Triangular polynomial diffeomorphisms `x_k ↦ x_k + (terms in lower-weight variables)`.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{check_dim, Error, Result};
use crate::graded::{MultiIndex, WeightVector};
use crate::linalg::Matrix;
use crate::poly::{PolyMap, RationalPoly};
use crate::rational::Rational;

/// A map `x_k + Σ d_{kα} x^α` with `|α| ≥ 2`, `⟨α⟩ ≤ w_k`, where each monomial
/// only involves variables of weight below `w_k`. Such maps form a group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularMap {
    map: PolyMap,
    w: WeightVector,
}

impl TriangularMap {
    pub fn new(map: PolyMap, w: WeightVector) -> Result<Self> {
        check_shape(&map, &w)?;
        Ok(Self { map, w })
    }

    pub fn identity(w: WeightVector) -> Self {
        Self {
            map: PolyMap::identity(w.dim()),
            w,
        }
    }

    pub fn map(&self) -> &PolyMap {
        &self.map
    }

    pub fn into_map(self) -> PolyMap {
        self.map
    }

    pub fn weights(&self) -> &WeightVector {
        &self.w
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_identity()
    }

    /// Correction coefficients `d_{kα}` of component `k`.
    pub fn corrections(&self, k: usize) -> BTreeMap<MultiIndex, Rational> {
        let n = self.w.dim();
        let lin = MultiIndex::unit(n, k);
        self.map
            .component(k)
            .terms()
            .filter(|(e, _)| **e != lin)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect()
    }

    /// Whether every correction term has `⟨α⟩ = w_k`.
    pub fn is_homogeneous(&self) -> bool {
        (0..self.w.dim()).all(|k| self.corrections(k).keys().all(|e| e.weighted(&self.w) == self.w[k]))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &TriangularMap) -> Result<TriangularMap> {
        if self.w != inner.w {
            return Err(Error::InvalidWeights("composing maps with different weights".into()));
        }
        let map = self.map.compose(&inner.map)?;
        Ok(TriangularMap { map, w: self.w.clone() })
    }

    pub fn inverse(&self) -> TriangularMap {
        invert_triangular(self)
    }

    pub fn apply(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.map.evaluate(x)
    }
}

fn check_shape(map: &PolyMap, w: &WeightVector) -> Result<()> {
    let n = w.dim();
    check_dim(n, map.nvars())?;
    check_dim(n, map.dim_out())?;
    for k in 0..n {
        let lin = MultiIndex::unit(n, k);
        let comp = map.component(k);
        if comp.coeff(&lin.0) != Rational::from_integer(1.into()) {
            return Err(Error::ShapeViolation(format!(
                "component {} must have coefficient 1 on x{}",
                k + 1,
                k + 1
            )));
        }
        for (e, c) in comp.terms() {
            if *e == lin {
                continue;
            }
            let bad = if e.order() < 2 {
                Some("has total degree below 2")
            } else if e.weighted(w) > w[k] {
                Some("exceeds the component weight")
            } else if e.support().any(|l| w[l] >= w[k]) {
                Some("involves a variable of weight ≥ the component weight")
            } else {
                None
            };
            if let Some(why) = bad {
                return Err(Error::ShapeViolation(format!(
                    "term {} in component {} {why}",
                    crate::poly::format_term(e, c),
                    k + 1
                )));
            }
        }
    }
    Ok(())
}

/// Inverse of a triangular map, by the weight-increasing recursion
/// `m⁻¹_k = x_k − Σ d_{kα} Π_l (m⁻¹_l)^{α_l}`.
pub fn invert_triangular(m: &TriangularMap) -> TriangularMap {
    let map = invert_unipotent(&m.map, &m.w).expect("triangular maps are unipotent");
    TriangularMap { map, w: m.w.clone() }
}

/// Whether `m_k − x_k` depends only on variables of weight below `w_k` for every `k`.
pub fn is_unipotent(m: &PolyMap, w: &[u32]) -> bool {
    let n = w.len();
    if m.nvars() != n || m.dim_out() != n {
        return false;
    }
    (0..n).all(|k| {
        let rest = m.component(k) - &RationalPoly::var(n, k);
        (0..n).all(|l| w[l] < w[k] || !rest.depends_on(l))
    })
}

/// Exact inverse of `x_k ↦ x_k + p_k(x)` where `p_k` only uses variables of
/// weight below `w_k`.
pub fn invert_unipotent(m: &PolyMap, w: &[u32]) -> Result<PolyMap> {
    let n = w.len();
    if !is_unipotent(m, w) {
        return Err(Error::NotInvertible(
            "map is not unipotent triangular with respect to the weights".into(),
        ));
    }
    let mut inv: Vec<RationalPoly> = (0..n).map(|l| RationalPoly::var(n, l)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| w[k]);
    for &k in &order {
        let rest = m.component(k) - &RationalPoly::var(n, k);
        if rest.is_zero() {
            continue;
        }
        // `rest` only reads components of lower weight, which are final already.
        let partial = PolyMap::new(n, inv.clone())?;
        inv[k] = &RationalPoly::var(n, k) - &rest.substitute(&partial)?;
    }
    PolyMap::new(n, inv)
}

/// Truncated inverse of a map with `m(0) = 0` and invertible differential at 0.
///
/// Returns `g` with `m∘g = id` up to terms of weighted degree above `max_weight`.
pub fn invert_perturbed_triangular(m: &PolyMap, w: &WeightVector, max_weight: u32) -> Result<PolyMap> {
    let n = w.dim();
    check_dim(n, m.nvars())?;
    check_dim(n, m.dim_out())?;
    if m.constant_part().iter().any(|c| !c.is_zero()) {
        return Err(Error::NotInvertible("map does not fix the origin".into()));
    }
    let lin = m.linear_part();
    let lin_inv = lin
        .inverse()
        .map_err(|_| Error::NotInvertible("differential at 0 is singular".into()))?;
    let nonlinear = m.map_components(|_, c| c.filter(|e| e.order() >= 2));
    let lin_inv_map = PolyMap::affine(&lin_inv, &vec![Rational::zero(); n])?;
    let id = PolyMap::identity(n);
    let mut g = lin_inv_map.truncate(max_weight, w);
    let max_iter = (max_weight as usize + 1) * (n + 1) + 2;
    for _ in 0..max_iter {
        let rhs = id.checked_sub(&nonlinear.compose_truncated(&g, max_weight, w)?)?;
        let next = lin_inv_map.compose(&rhs)?.truncate(max_weight, w);
        if next == g {
            return Ok(g);
        }
        g = next;
    }
    Ok(g)
}

/// Linear part of `m` at 0 must be the identity.
pub fn has_identity_differential(m: &PolyMap) -> bool {
    m.linear_part() == Matrix::identity(m.nvars()) && m.constant_part().iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::ow_class_poly;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn x(n: usize, j: usize) -> RationalPoly {
        RationalPoly::var(n, j)
    }

    fn w112() -> WeightVector {
        WeightVector::new(vec![1, 1, 2]).unwrap()
    }

    #[test]
    fn shape_is_validated() {
        let w = w112();
        let ok = PolyMap::new(3, vec![x(3, 0), x(3, 1), &x(3, 2) + &(&x(3, 0) * &x(3, 1))]).unwrap();
        assert!(TriangularMap::new(ok, w.clone()).is_ok());
        let linear = PolyMap::new(3, vec![x(3, 0), x(3, 1), &x(3, 2) + &x(3, 0)]).unwrap();
        assert!(matches!(
            TriangularMap::new(linear, w.clone()),
            Err(Error::ShapeViolation(_))
        ));
        let heavy = PolyMap::new(3, vec![x(3, 0), x(3, 1), &x(3, 2) + &x(3, 0).pow(3)]).unwrap();
        assert!(TriangularMap::new(heavy, w.clone()).is_err());
        let same = PolyMap::new(3, vec![x(3, 0) + x(3, 1).pow(2), x(3, 1), x(3, 2)]).unwrap();
        assert!(TriangularMap::new(same, w).is_err());
    }

    #[test]
    fn hand_inverse() {
        let w = w112();
        let m = TriangularMap::new(
            PolyMap::new(3, vec![x(3, 0), x(3, 1), &x(3, 2) + &(&x(3, 0) * &x(3, 1))]).unwrap(),
            w.clone(),
        )
        .unwrap();
        let expected = PolyMap::new(3, vec![x(3, 0), x(3, 1), &x(3, 2) - &(&x(3, 0) * &x(3, 1))]).unwrap();
        assert_eq!(invert_triangular(&m).map(), &expected);
        assert!(invert_triangular(&TriangularMap::identity(w)).is_identity());
    }

    #[test]
    fn perturbed_inverse_truncates() {
        let w = w112();
        let m = PolyMap::new(3, vec![x(3, 0), x(3, 1), &x(3, 2) + &x(3, 0).pow(3)]).unwrap();
        assert!(invert_perturbed_triangular(&m, &w, 2).unwrap().is_identity());
        let shifted = PolyMap::new(3, vec![&x(3, 0) + &RationalPoly::one(3), x(3, 1), x(3, 2)]).unwrap();
        assert!(invert_perturbed_triangular(&shifted, &w, 2).is_err());
        let singular = PolyMap::new(3, vec![x(3, 0), x(3, 0), x(3, 2)]).unwrap();
        assert!(invert_perturbed_triangular(&singular, &w, 2).is_err());
    }

    #[test]
    fn perturbed_inverse_with_linear_part() {
        let w = WeightVector::new(vec![1, 1, 2, 3]).unwrap();
        let n = 4;
        let m = PolyMap::new(
            n,
            vec![
                &x(n, 0).scale(&int(2)) + &x(n, 1),
                &x(n, 1) + &(&x(n, 0) * &x(n, 1)),
                &x(n, 2) + &(&x(n, 0) * &x(n, 0)).scale(&rat(1, 3)),
                &(&x(n, 3) - &x(n, 2)) + &(&x(n, 0) * &x(n, 2)),
            ],
        )
        .unwrap();
        let g = invert_perturbed_triangular(&m, &w, 4).unwrap();
        let resid = m.compose(&g).unwrap().checked_sub(&PolyMap::identity(n)).unwrap();
        assert!(resid
            .components()
            .iter()
            .all(|c| c.min_weight(&w).is_none_or(|d| d > 4)));
        assert!(ow_class_poly(&resid, 1, &w).unwrap());
    }

    fn arb_triangular() -> impl Strategy<Value = TriangularMap> {
        // Random corrections for w = (1,1,2,3).
        let w = [1u32, 1, 2, 3];
        let candidates: Vec<(usize, MultiIndex)> = (0..4)
            .flat_map(|k| {
                MultiIndex::up_to_weight(&w, w[k])
                    .into_iter()
                    .filter(move |e| e.order() >= 2 && e.support().all(|l| w[l] < w[k]))
                    .map(move |e| (k, e))
            })
            .collect();
        let len = candidates.len();
        proptest::collection::vec((-3i64..=3, 1i64..=3), len).prop_map(move |cs| {
            let mut comps: Vec<RationalPoly> = (0..4).map(|k| RationalPoly::var(4, k)).collect();
            for ((k, e), (p, q)) in candidates.iter().zip(cs) {
                comps[*k].add_term(e.clone(), rat(p, q));
            }
            TriangularMap::new(PolyMap::new(4, comps).unwrap(), WeightVector::new(w.to_vec()).unwrap()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn inverse_is_two_sided(m in arb_triangular()) {
            let inv = invert_triangular(&m);
            prop_assert!(m.compose(&inv).unwrap().is_identity());
            prop_assert!(inv.compose(&m).unwrap().is_identity());
        }

        #[test]
        fn class_is_closed_under_composition(a in arb_triangular(), b in arb_triangular()) {
            let c = a.compose(&b).unwrap();
            prop_assert!(TriangularMap::new(c.map().clone(), c.weights().clone()).is_ok());
        }

        #[test]
        fn perturbed_inverse_of_triangular_is_exact(m in arb_triangular()) {
            let g = invert_perturbed_triangular(m.map(), m.weights(), 3).unwrap();
            let inv = invert_triangular(&m);
            prop_assert_eq!(&g, inv.map());
        }
    }
}
