//! Affine charts and composite coordinate changes.

use num_traits::Zero;

use crate::error::{check_dim, Error, Result};
use crate::graded::WeightVector;
use crate::linalg::Matrix;
use crate::poly::PolyMap;
use crate::rational::Rational;
use crate::triangular::{invert_perturbed_triangular, invert_unipotent, TriangularMap};
use crate::vfield::{Frame, PolyVectorField};

/// `T(x) = M(x − a)`, so `T(a) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    matrix: Matrix,
    offset: Vec<Rational>,
}

impl AffineMap {
    pub fn new(matrix: Matrix, offset: Vec<Rational>) -> Result<Self> {
        check_dim(matrix.rows(), matrix.cols())?;
        check_dim(matrix.rows(), offset.len())?;
        matrix.inverse()?;
        Ok(Self { matrix, offset })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n),
            offset: vec![Rational::zero(); n],
        }
    }

    /// Translation `x ↦ x − a`.
    pub fn translation(a: Vec<Rational>) -> Self {
        Self {
            matrix: Matrix::identity(a.len()),
            offset: a,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// The point sent to 0.
    pub fn offset(&self) -> &[Rational] {
        &self.offset
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn to_map(&self) -> PolyMap {
        let b: Vec<Rational> = self
            .matrix
            .mul_vec(&self.offset)
            .expect("dimensions checked")
            .into_iter()
            .map(|v| -v)
            .collect();
        PolyMap::affine(&self.matrix, &b).expect("dimensions checked")
    }

    /// `x ↦ M⁻¹x + a`.
    pub fn inverse_map(&self) -> PolyMap {
        let inv = self.matrix.inverse().expect("invertible by construction");
        PolyMap::affine(&inv, &self.offset).expect("dimensions checked")
    }

    pub fn apply(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim(), x.len())?;
        let d: Vec<Rational> = x.iter().zip(&self.offset).map(|(p, q)| p - q).collect();
        self.matrix.mul_vec(&d)
    }
}

/// `m = triangular ∘ affine`. The polynomial part is usually a [`TriangularMap`]
/// but any map fixing 0 with identity differential is accepted, in which case
/// the inverse is only known up to a weight bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    affine: AffineMap,
    triangular: PolyMap,
    w: WeightVector,
    inverse: Option<PolyMap>,
}

impl CoordinateChange {
    pub fn new(affine: AffineMap, triangular: PolyMap, w: WeightVector) -> Result<Self> {
        Self::with_inverse(affine, triangular, w, None)
    }

    /// Like [`new`](Self::new) with a known exact inverse of the polynomial part.
    pub fn with_inverse(
        affine: AffineMap,
        triangular: PolyMap,
        w: WeightVector,
        inverse: Option<PolyMap>,
    ) -> Result<Self> {
        let n = w.dim();
        check_dim(n, affine.dim())?;
        check_dim(n, triangular.nvars())?;
        check_dim(n, triangular.dim_out())?;
        if triangular.constant_part().iter().any(|c| !c.is_zero()) {
            return Err(Error::ShapeViolation("polynomial part must fix 0".into()));
        }
        if !triangular.linear_part().is_identity() {
            return Err(Error::ShapeViolation(
                "polynomial part must have identity differential at 0".into(),
            ));
        }
        let inverse = match inverse {
            Some(inv) => Some(inv),
            None => invert_unipotent(&triangular, &w).ok(),
        };
        Ok(Self {
            affine,
            triangular,
            w,
            inverse,
        })
    }

    pub fn identity(w: WeightVector) -> Self {
        let n = w.dim();
        Self {
            affine: AffineMap::identity(n),
            triangular: PolyMap::identity(n),
            w,
            inverse: Some(PolyMap::identity(n)),
        }
    }

    pub fn from_affine(affine: AffineMap, w: WeightVector) -> Result<Self> {
        Self::new(affine, PolyMap::identity(w.dim()), w)
    }

    pub fn from_triangular(affine: AffineMap, t: &TriangularMap) -> Result<Self> {
        let inv = t.inverse().into_map();
        Self::with_inverse(affine, t.map().clone(), t.weights().clone(), Some(inv))
    }

    pub fn affine(&self) -> &AffineMap {
        &self.affine
    }

    pub fn triangular(&self) -> &PolyMap {
        &self.triangular
    }

    pub fn weights(&self) -> &WeightVector {
        &self.w
    }

    /// Whether the polynomial part lies in the triangular group.
    pub fn as_triangular(&self) -> Option<TriangularMap> {
        TriangularMap::new(self.triangular.clone(), self.w.clone()).ok()
    }

    /// Whether the inverse of the polynomial part is known exactly.
    pub fn has_exact_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// `x ↦ triangular(affine(x))`.
    pub fn forward(&self) -> PolyMap {
        self.triangular
            .compose(&self.affine.to_map())
            .expect("dimensions checked")
    }

    /// Inverse map. Exact when available; otherwise correct up to terms of
    /// weighted degree above `max_weight` in the new coordinates.
    pub fn inverse(&self, max_weight: u32) -> Result<PolyMap> {
        let inner = match &self.inverse {
            Some(inv) => inv.clone(),
            None => invert_perturbed_triangular(&self.triangular, &self.w, max_weight)?,
        };
        self.affine.inverse_map().compose(&inner)
    }

    pub fn apply(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.triangular.evaluate(&self.affine.apply(x)?)
    }

    /// `outer ∘ self`, where `outer` fixes 0 with identity differential.
    pub fn then(&self, outer: &PolyMap) -> Result<Self> {
        let tri = outer.compose(&self.triangular)?;
        let inverse = match (&self.inverse, invert_unipotent(outer, &self.w).ok()) {
            (Some(inner), Some(outer_inv)) => Some(inner.compose(&outer_inv)?),
            _ => None,
        };
        Self::with_inverse(self.affine.clone(), tri, self.w.clone(), inverse)
    }

    /// The frame expressed in the new coordinates, based at the image of its base point.
    ///
    /// When the inverse is only known up to weight `max_weight`, coefficient terms
    /// beyond that weight are unreliable and dropped.
    pub fn push_frame(&self, frame: &Frame, max_weight: u32) -> Result<Frame> {
        let fwd = self.forward();
        let inv = self.inverse(max_weight)?;
        if self.has_exact_inverse() {
            return frame.push(&fwd, &inv);
        }
        let fields = frame
            .fields()
            .iter()
            .map(|x| {
                let coeffs = fwd
                    .components()
                    .iter()
                    .map(|mk| x.apply(mk)?.substitute_truncated(&inv, max_weight, &self.w))
                    .collect::<Result<Vec<_>>>()?;
                PolyVectorField::new(coeffs)
            })
            .collect::<Result<Vec<_>>>()?;
        Frame::new(fields, self.w.clone(), fwd.evaluate(frame.base_point())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::RationalPoly;
    use crate::rational::{int, rat};

    #[test]
    fn affine_roundtrip() {
        let m = Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(0), rat(1, 2)]]).unwrap();
        let a = AffineMap::new(m, vec![int(1), int(-1)]).unwrap();
        assert_eq!(a.apply(&[int(1), int(-1)]).unwrap(), vec![int(0), int(0)]);
        assert!(a.to_map().compose(&a.inverse_map()).unwrap().is_identity());
        assert!(AffineMap::new(Matrix::zeros(2, 2), vec![int(0), int(0)]).is_err());
    }

    #[test]
    fn change_inverse_is_exact_for_unipotent_parts() {
        let w = WeightVector::new(vec![1, 1, 2]).unwrap();
        let x = |j| RationalPoly::var(3, j);
        let tri = PolyMap::new(3, vec![x(0), x(1), &x(2) + &(&x(0) * &x(1))]).unwrap();
        let c = CoordinateChange::new(AffineMap::translation(vec![int(1), int(2), int(3)]), tri, w).unwrap();
        assert!(c.has_exact_inverse());
        let round = c.forward().compose(&c.inverse(0).unwrap()).unwrap();
        assert!(round.is_identity());
    }

    #[test]
    fn change_rejects_bad_shapes() {
        let w = WeightVector::new(vec![1, 1, 2]).unwrap();
        let x = |j| RationalPoly::var(3, j);
        let shifted = PolyMap::new(3, vec![&x(0) + &RationalPoly::one(3), x(1), x(2)]).unwrap();
        assert!(CoordinateChange::new(AffineMap::identity(3), shifted, w.clone()).is_err());
        let scaled = PolyMap::new(3, vec![x(0).scale(&int(2)), x(1), x(2)]).unwrap();
        assert!(CoordinateChange::new(AffineMap::identity(3), scaled, w).is_err());
    }

    #[test]
    fn truncated_inverse_for_perturbed_parts() {
        let w = WeightVector::new(vec![1, 1, 2]).unwrap();
        let x = |j| RationalPoly::var(3, j);
        let tri = PolyMap::new(3, vec![x(0), x(1), &x(2) + &(&(&x(0) * &x(1)) * &x(2))]).unwrap();
        let c = CoordinateChange::new(AffineMap::identity(3), tri, w.clone()).unwrap();
        assert!(!c.has_exact_inverse());
        let round = c.forward().compose(&c.inverse(6).unwrap()).unwrap();
        let resid = round.checked_sub(&PolyMap::identity(3)).unwrap();
        assert!(resid
            .components()
            .iter()
            .all(|p| p.min_weight(&w).is_none_or(|d| d > 6)));
    }
}
