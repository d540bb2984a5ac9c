//! The ε-Carnot construction `ε_a = exp_{X^{(a)}}⁻¹ ∘ ψ̂_a ∘ T_a` and its stages.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graded::MultiIndex;
use crate::poly::{PolyMap, RationalPoly};
use crate::rational::Rational;
use crate::triangular::TriangularMap;
use crate::vfield::{Frame, PolyVectorField};

use super::change::{AffineMap, CoordinateChange};
use super::flow::{exp_map, log_map};

/// `T_a(x) = (B_X(a)ᵗ)⁻¹(x − a)` and the frame in the new coordinates.
pub fn linearize(frame: &Frame) -> Result<(CoordinateChange, Frame)> {
    let a = frame.base_point().to_vec();
    let bt = frame.coefficient_matrix(&a)?.transpose();
    let affine = AffineMap::new(bt.inverse()?, a)?;
    let change = CoordinateChange::from_affine(affine, frame.weights().clone())?;
    let pushed = change.push_frame(frame, frame.weights().step())?;
    Ok((change, pushed))
}

/// `X^α f = X_1^{α_1}(⋯ X_n^{α_n} f)`, applying `X_n` first.
fn apply_multi(fields: &[PolyVectorField], alpha: &MultiIndex, f: &RationalPoly) -> Result<RationalPoly> {
    let mut g = f.clone();
    for (j, &a) in alpha.0.iter().enumerate().rev() {
        for _ in 0..a {
            if g.is_zero() {
                return Ok(g);
            }
            g = fields[j].apply(&g)?;
        }
    }
    Ok(g)
}

/// The map `ψ̂` turning linearly adapted coordinates into privileged ones:
/// `ψ̂_k = x_k + Σ a_{kα} x^α` over `2 ≤ |α|`, `⟨α⟩ < w_k`, with coefficients
/// fixed level by level in `|α|` so that `X^α ψ̂_k (0) = 0`.
pub fn psi_map(frame: &Frame) -> Result<TriangularMap> {
    if let Some(j) = frame.first_unadapted() {
        return Err(Error::NotAdapted(j + 1));
    }
    if !frame.base_point().iter().all(Zero::is_zero) {
        return Err(Error::NotAdapted(1));
    }
    let w = frame.weights();
    let n = w.dim();
    let zero = vec![Rational::zero(); n];
    let mut comps: Vec<RationalPoly> = (0..n).map(|k| RationalPoly::var(n, k)).collect();
    for k in 0..n {
        if w[k] < 3 {
            continue;
        }
        let candidates: Vec<MultiIndex> = MultiIndex::up_to_weight(w, w[k] - 1)
            .into_iter()
            .filter(|a| a.order() >= 2)
            .collect();
        let max_level = candidates.iter().map(MultiIndex::order).max().unwrap_or(0);
        for level in 2..=max_level {
            let current = comps[k].clone();
            for alpha in candidates.iter().filter(|a| a.order() == level) {
                let v = apply_multi(frame.fields(), alpha, &current)?.evaluate(&zero)?;
                if !v.is_zero() {
                    let c = -v / Rational::from_integer(alpha.factorial());
                    comps[k].add_term(alpha.clone(), c);
                }
            }
        }
    }
    TriangularMap::new(PolyMap::new(n, comps)?, w.clone())
}

/// Every stage of the ε-Carnot construction at the frame's base point.
#[derive(Clone, Debug)]
pub struct EpsilonPipeline {
    /// `T_a`.
    pub linear: CoordinateChange,
    /// Frame in linearly adapted coordinates.
    pub linearized: Frame,
    /// `ψ̂_a`.
    pub psi: TriangularMap,
    /// Frame in `ψ`-privileged coordinates.
    pub privileged: Frame,
    /// Model fields `X_j^{(a)}`.
    pub model_fields: Vec<PolyVectorField>,
    /// `exp_{X^{(a)}}`.
    pub exp: TriangularMap,
    /// `exp_{X^{(a)}}⁻¹`.
    pub log: TriangularMap,
    /// `ε̂_a = exp⁻¹ ∘ ψ̂_a`.
    pub epsilon_hat: TriangularMap,
    /// `ε_a = ε̂_a ∘ T_a`.
    pub change: CoordinateChange,
}

/// Runs the full construction.
pub fn epsilon_pipeline(frame: &Frame) -> Result<EpsilonPipeline> {
    let (linear, linearized) = linearize(frame)?;
    let psi = psi_map(&linearized)?;
    let psi_change = CoordinateChange::from_triangular(super::change::AffineMap::identity(frame.dim()), &psi)?;
    let privileged = psi_change.push_frame(&linearized, frame.weights().step())?;
    let model_fields = privileged.model_fields()?;
    let exp = exp_map(&model_fields, frame.weights())?;
    let log = log_map(&exp)?;
    let epsilon_hat = log.compose(&psi)?;
    let change = CoordinateChange::from_triangular(linear.affine().clone(), &epsilon_hat)?;
    Ok(EpsilonPipeline {
        linear,
        linearized,
        psi,
        privileged,
        model_fields,
        exp,
        log,
        epsilon_hat,
        change,
    })
}

/// `ε_a` as a coordinate change.
pub fn epsilon(frame: &Frame) -> Result<CoordinateChange> {
    Ok(epsilon_pipeline(frame)?.change)
}

/// `φ_Y = exp_Y ∘ exp_{X^{(a)}}⁻¹`, the `w`-homogeneous map carrying the model
/// fields onto another basis with the same structure constants.
pub fn convert_nilpotent_approx(
    model_fields: &[PolyVectorField],
    target: &[PolyVectorField],
    w: &crate::graded::WeightVector,
) -> Result<TriangularMap> {
    let n = w.dim();
    let zero = vec![Rational::zero(); n];
    let lx = Frame::new(model_fields.to_vec(), w.clone(), zero.clone())?.structure_constants_at()?;
    let ly = Frame::new(target.to_vec(), w.clone(), zero)?.structure_constants_at()?;
    if lx.full != ly.full {
        return Err(Error::StructureMismatch("bases have different brackets at 0".into()));
    }
    let ex = exp_map(model_fields, w)?;
    let ey = exp_map(target, w)?;
    ey.compose(&log_map(&ex)?)
}
