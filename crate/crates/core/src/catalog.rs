//! Named example algebras and frames.

use crate::error::{Error, Result};
use crate::graded::WeightVector;
use crate::group::{left_invariant_fields, validate_algebra, StructureConstants};
use crate::poly::RationalPoly;
use crate::rational::{int, Rational};
use crate::vfield::{Frame, PolyVectorField};

/// Algebras with a group frame in exponential coordinates.
pub const ALGEBRAS: [&str; 5] = [
    "abelian_2",
    "heisenberg_3",
    "heisenberg_5",
    "engel_4",
    "step3_filiform_5",
];

/// Every fixed-name entry, including the non-group frames.
pub const FRAMES: [&str; 7] = [
    "abelian_2",
    "heisenberg_3",
    "heisenberg_5",
    "engel_4",
    "step3_filiform_5",
    "perturbed_heisenberg_3",
    "perturbed_engel_4",
];

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    /// Graded constants of the tangent algebra at the base point.
    pub algebra: StructureConstants,
    /// Polynomial frame based at 0.
    pub frame: Frame,
    /// Whether `frame` is the left-invariant frame of `algebra`.
    pub is_group_frame: bool,
}

/// Looks up `name`; `abelian_<n>` is accepted for `1 ≤ n ≤ 8`.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let unknown = || Error::UnknownCatalog(name.to_string());
    let (algebra, perturbation): (StructureConstants, Option<(usize, usize, RationalPoly)>) = match name {
        "heisenberg_3" => (constants(&[1, 1, 2], &[(1, 2, 3, int(1))]), None),
        "heisenberg_5" => (
            constants(&[1, 1, 1, 1, 2], &[(1, 3, 5, int(1)), (2, 4, 5, int(1))]),
            None,
        ),
        "engel_4" => (engel(), None),
        "step3_filiform_5" => (
            constants(
                &[1, 1, 2, 3, 3],
                &[(1, 2, 3, int(1)), (1, 3, 4, int(1)), (2, 3, 5, int(1))],
            ),
            None,
        ),
        // X_1 gains x_1² ∂_3, a term of degree 0.
        "perturbed_heisenberg_3" => (
            constants(&[1, 1, 2], &[(1, 2, 3, int(1))]),
            Some((0, 2, RationalPoly::var(3, 0).pow(2))),
        ),
        // X_1 gains x_1 ∂_4, which breaks the weights of the exponential coordinates.
        "perturbed_engel_4" => (engel(), Some((0, 3, RationalPoly::var(4, 0)))),
        _ => {
            let n: usize = name
                .strip_prefix("abelian_")
                .and_then(|s| s.parse().ok())
                .filter(|n| (1..=8).contains(n))
                .ok_or_else(unknown)?;
            (StructureConstants::new(WeightVector::unit(n)), None)
        }
    };
    debug_assert!(validate_algebra(&algebra).pass());
    let mut fields = left_invariant_fields(&algebra)?;
    let is_group_frame = perturbation.is_none();
    if let Some((j, k, extra)) = perturbation {
        let mut c = fields[j].coeffs().to_vec();
        c[k] = &c[k] + &extra;
        fields[j] = PolyVectorField::new(c)?;
    }
    let n = algebra.dim();
    let frame = Frame::new(
        fields,
        algebra.weights().clone(),
        vec![Rational::from_integer(0.into()); n],
    )?;
    Ok(CatalogEntry {
        name: name.to_string(),
        algebra,
        frame,
        is_group_frame,
    })
}

fn engel() -> StructureConstants {
    constants(&[1, 1, 2, 3], &[(1, 2, 3, int(1)), (1, 3, 4, int(1))])
}

/// Constants from 1-based `(i, j, k, L_ij^k)`.
fn constants(w: &[u32], brackets: &[(usize, usize, usize, Rational)]) -> StructureConstants {
    StructureConstants::from_entries(
        WeightVector::new(w.to_vec()).expect("catalog weights are valid"),
        brackets.iter().map(|(i, j, k, c)| (i - 1, j - 1, k - 1, c.clone())),
    )
    .expect("catalog constants are antisymmetric")
}

/// A step-two frame `X_j = ∂_j + Σ_{w_k=2} (Σ_{w_i=1} c_{ijk} x_i) ∂_k` from its
/// linear coefficients `c[(i, j, k)]` (0-based). Such frames are adapted at 0.
pub fn step_two_frame(w: &WeightVector, c: &[(usize, usize, usize, Rational)]) -> Result<Frame> {
    let n = w.dim();
    let mut fields: Vec<Vec<RationalPoly>> = (0..n)
        .map(|j| PolyVectorField::coordinate(n, j).coeffs().to_vec())
        .collect();
    for (i, j, k, v) in c {
        if w[*i] != 1 || w[*k] != 2 || w[*j] != 1 {
            return Err(Error::InvalidInput(
                "step-two coefficients must map weight 1 to weight 2".into(),
            ));
        }
        fields[*j][*k] = &fields[*j][*k] + &RationalPoly::var(n, *i).scale(v);
    }
    let fields = fields.into_iter().map(PolyVectorField::new).collect::<Result<_>>()?;
    Frame::new(fields, w.clone(), vec![int(0); n])
}

/// Heisenberg-manifold frame `X_1 = ∂_1 + c12 x_2 ∂_3`, `X_2 = ∂_2 + c21 x_1 ∂_3`, `X_3 = ∂_3`.
pub fn heisenberg_manifold_frame(c12: Rational, c21: Rational) -> Result<Frame> {
    let w = WeightVector::new(vec![1, 1, 2])?;
    step_two_frame(&w, &[(1, 0, 2, c12), (0, 1, 2, c21)])
}

/// Contact presentation of the Heisenberg group: `X_1 = ∂_1`, `X_2 = ∂_2 + x_1 ∂_3`, `X_3 = ∂_3`.
pub fn heisenberg_contact_frame() -> Result<Frame> {
    heisenberg_manifold_frame(int(0), int(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_entries_load() {
        for name in FRAMES {
            let e = lookup(name).unwrap();
            assert!(validate_algebra(&e.algebra).pass(), "{name}");
            assert_eq!(e.frame.structure_constants_at().unwrap().graded, e.algebra, "{name}");
        }
        assert!(lookup("abelian_6").unwrap().algebra.is_abelian());
        assert!(matches!(lookup("nonsense"), Err(Error::UnknownCatalog(_))));
        assert!(lookup("abelian_0").is_err());
    }

    #[test]
    fn perturbed_heisenberg_keeps_bracket() {
        let p = lookup("perturbed_heisenberg_3").unwrap();
        let f = p.frame.fields();
        assert_eq!(f[0].bracket(&f[1]).unwrap(), PolyVectorField::coordinate(3, 2));
        assert!(!p.is_group_frame);
    }

    #[test]
    fn heisenberg_manifold_constants() {
        let f = heisenberg_manifold_frame(int(1), int(0)).unwrap();
        let t = f.structure_constants_at().unwrap();
        assert_eq!(t.graded.get(0, 1, 2), int(-1));
    }
}
