//! Polynomial vector fields and frames.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::graded::{MultiIndex, WeightVector};
use crate::group::StructureConstants;
use crate::linalg::Matrix;
use crate::poly::{PolyMap, RationalPoly};
use crate::rational::{pow, Rational};

/// `X = Σ a_k(x) ∂_k` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    coeffs: Vec<RationalPoly>,
}

impl PolyVectorField {
    pub fn new(coeffs: Vec<RationalPoly>) -> Result<Self> {
        let n = coeffs.len();
        for c in &coeffs {
            check_dim(n, c.nvars())?;
        }
        Ok(Self { coeffs })
    }

    /// Values and Jacobian `∂_l a_k` of the coefficients at `x`.
    fn jet1_at(&self, x: &[Rational]) -> Result<(Vec<Rational>, Vec<Vec<Rational>>)> {
        let vals = self.at(x)?;
        let jac = self
            .coeffs
            .iter()
            .map(|a| (0..self.dim()).map(|l| a.partial(l)?.evaluate(x)).collect())
            .collect::<Result<_>>()?;
        Ok((vals, jac))
    }

    /// `[X, Y](x)` from the values and first derivatives of the coefficients at `x`.
    pub fn bracket_at(&self, other: &Self, x: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim(), other.dim())?;
        Ok(bracket_from_jets(&self.jet1_at(x)?, &other.jet1_at(x)?))
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coeffs: vec![RationalPoly::zero(n); n],
        }
    }

    /// `∂_j` (0-based).
    pub fn coordinate(n: usize, j: usize) -> Self {
        let mut f = Self::zero(n);
        f.coeffs[j] = RationalPoly::one(n);
        f
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[RationalPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &RationalPoly {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RationalPoly::is_zero)
    }

    /// `Σ a_k ∂_k f`.
    pub fn apply(&self, f: &RationalPoly) -> Result<RationalPoly> {
        check_dim(self.dim(), f.nvars())?;
        let mut out = RationalPoly::zero(self.dim());
        for (k, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let d = f.partial(k)?;
            if !d.is_zero() {
                out = &out + &(a * &d);
            }
        }
        Ok(out)
    }

    /// `[X, Y]`, with coefficients `X(b_k) − Y(a_k)`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let coeffs = (0..self.dim())
            .map(|k| Ok(&self.apply(&other.coeffs[k])? - &other.apply(&self.coeffs[k])?))
            .collect::<Result<_>>()?;
        Ok(Self { coeffs })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// `f·X` for a polynomial `f`.
    pub fn mul_poly(&self, f: &RationalPoly) -> Result<Self> {
        check_dim(self.dim(), f.nvars())?;
        Ok(Self {
            coeffs: self.coeffs.iter().map(|a| a * f).collect(),
        })
    }

    /// Coefficients at a point.
    pub fn at(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.coeffs.iter().map(|a| a.evaluate(x)).collect()
    }

    pub fn at_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.coeffs.iter().map(|a| a.evaluate_f64(x)).collect()
    }

    /// Pullback by the dilation, `δ_t^*X = Σ t^{-w_k} a_k(t·x) ∂_k`.
    pub fn rescale(&self, t: &Rational, w: &[u32]) -> Result<Self> {
        check_dim(self.dim(), w.len())?;
        if t.is_zero() {
            return Err(Error::ZeroScale);
        }
        let n = self.dim();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                RationalPoly::from_terms(
                    n,
                    a.terms().map(|(e, c)| {
                        let ell = e.weighted(w) as i64 - w[k] as i64;
                        (e.clone(), c * int_pow(t, ell))
                    }),
                )
            })
            .collect::<Result<_>>()?;
        Ok(Self { coeffs })
    }

    /// Homogeneous decomposition `δ_t^*X = Σ_ℓ t^ℓ X^{[ℓ]}`, keyed by `ℓ`.
    ///
    /// A term `c x^α ∂_k` sits in degree `⟨α⟩ − w_k`.
    pub fn expand(&self, w: &[u32]) -> BTreeMap<i64, Self> {
        let n = self.dim();
        let mut out: BTreeMap<i64, Self> = BTreeMap::new();
        for (k, a) in self.coeffs.iter().enumerate() {
            for (e, c) in a.terms() {
                let ell = e.weighted(w) as i64 - w[k] as i64;
                out.entry(ell).or_insert_with(|| Self::zero(n)).coeffs[k].add_term(e.clone(), c.clone());
            }
        }
        out
    }

    /// Part of homogeneous degree `ell`.
    pub fn homogeneous_part(&self, ell: i64, w: &[u32]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.filter(|e| e.weighted(w) as i64 - w[k] as i64 == ell))
            .collect();
        Self { coeffs }
    }

    /// Lowest degree present in [`expand`](Self::expand); `None` for the zero field.
    pub fn weight(&self, w: &[u32]) -> Option<i64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(k, a)| a.min_weight(w).map(|d| d as i64 - w[k] as i64))
            .min()
    }

    /// `m_*X` given `m` and an inverse `m⁻¹`: the field `(X(m_k))∘m⁻¹`.
    pub fn push(&self, m: &PolyMap, m_inv: &PolyMap) -> Result<Self> {
        check_dim(self.dim(), m.nvars())?;
        let coeffs = m
            .components()
            .iter()
            .map(|mk| self.apply(mk)?.substitute(m_inv))
            .collect::<Result<_>>()?;
        Self::new(coeffs)
    }

    /// Drops coefficient terms of weighted degree above `max_weight`.
    pub fn truncate(&self, max_weight: u32, w: &[u32]) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.truncate(max_weight, w)).collect(),
        }
    }
}

/// `t^e` for a possibly negative integer exponent.
fn int_pow(t: &Rational, e: i64) -> Rational {
    if e >= 0 {
        pow(t, e as u32)
    } else {
        pow(&t.recip(), (-e) as u32)
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(k, a)| {
                if a.num_terms() == 1 && *a == RationalPoly::one(a.nvars()) {
                    format!("d{}", k + 1)
                } else {
                    format!("({a})*d{}", k + 1)
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Ordered frame `(X_1, …, X_n)` adapted to the weights, with a base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    fields: Vec<PolyVectorField>,
    w: WeightVector,
    base_point: Vec<Rational>,
}

/// Brackets of a frame at its base point in the frame basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketTable {
    /// Entries with `w_k = w_i + w_j`, the tangent-group algebra.
    pub graded: StructureConstants,
    /// All entries `L_ij^k(a)` with `i < j` (0-based); only `w_k ≤ w_i + w_j` can be nonzero.
    pub full: BTreeMap<(usize, usize, usize), Rational>,
}

type Jet1 = (Vec<Rational>, Vec<Vec<Rational>>);

fn bracket_from_jets((a, ja): &Jet1, (b, jb): &Jet1) -> Vec<Rational> {
    (0..a.len())
        .map(|k| {
            let mut v = Rational::zero();
            for l in 0..a.len() {
                v += &a[l] * &jb[k][l] - &b[l] * &ja[k][l];
            }
            v
        })
        .collect()
}

/// Result of the order computation: either exact or bounded below by the search cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Order {
    Exact(u32),
    AtLeast(u32),
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact(n) => write!(f, "{n}"),
            Order::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

impl Frame {
    /// Validates dimensions, invertibility of `B_X(a)` and bracket compatibility at `a`.
    pub fn new(fields: Vec<PolyVectorField>, w: WeightVector, base_point: Vec<Rational>) -> Result<Self> {
        let n = w.dim();
        check_dim(n, fields.len())?;
        check_dim(n, base_point.len())?;
        for f in &fields {
            check_dim(n, f.dim())?;
        }
        let frame = Self { fields, w, base_point };
        frame.coefficient_matrix(&frame.base_point)?.inverse()?;
        frame.structure_constants_at()?;
        Ok(frame)
    }

    pub fn fields(&self) -> &[PolyVectorField] {
        &self.fields
    }

    pub fn field(&self, j: usize) -> &PolyVectorField {
        &self.fields[j]
    }

    pub fn weights(&self) -> &WeightVector {
        &self.w
    }

    pub fn base_point(&self) -> &[Rational] {
        &self.base_point
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// Same fields at another base point.
    pub fn at(&self, base_point: Vec<Rational>) -> Result<Self> {
        Self::new(self.fields.clone(), self.w.clone(), base_point)
    }

    /// `B_X(x)`: row `j` holds the coefficients of `X_j` at `x`.
    pub fn coefficient_matrix(&self, x: &[Rational]) -> Result<Matrix> {
        let rows = self.fields.iter().map(|f| f.at(x)).collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(rows)
    }

    /// Whether the base point is 0 and `X_j(0) = ∂_j` for all `j`.
    pub fn is_adapted(&self) -> bool {
        self.base_point.iter().all(Zero::is_zero)
            && self
                .coefficient_matrix(&self.base_point)
                .map(|b| b.is_identity())
                .unwrap_or(false)
    }

    /// First field that is not `∂_j` at 0, if any.
    pub fn first_unadapted(&self) -> Option<usize> {
        let zero = vec![Rational::zero(); self.dim()];
        (0..self.dim()).find(|&j| {
            let v = self.fields[j].at(&zero).expect("dimension checked");
            v.iter()
                .enumerate()
                .any(|(k, c)| if k == j { !c.is_one() } else { !c.is_zero() })
        })
    }

    /// Structure constants `L_ij^k(a)` of the frame at its base point.
    pub fn structure_constants_at(&self) -> Result<BracketTable> {
        let n = self.dim();
        let bt = self.coefficient_matrix(&self.base_point)?.transpose();
        let bt_inv = bt.inverse()?;
        let mut graded = StructureConstants::new(self.w.clone());
        let mut full = BTreeMap::new();
        let jets = self
            .fields
            .iter()
            .map(|x| x.jet1_at(&self.base_point))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..n {
            for j in i + 1..n {
                let v = bracket_from_jets(&jets[i], &jets[j]);
                let c = bt_inv.mul_vec(&v)?;
                let wij = self.w[i] + self.w[j];
                for (k, ck) in c.into_iter().enumerate() {
                    if ck.is_zero() {
                        continue;
                    }
                    if self.w[k] > wij {
                        return Err(Error::BracketIncompatible {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            wk: self.w[k],
                            wij,
                        });
                    }
                    if self.w[k] == wij {
                        graded.set(i, j, k, ck.clone())?;
                    }
                    full.insert((i, j, k), ck);
                }
            }
        }
        Ok(BracketTable { graded, full })
    }

    /// Order of `f` at the base point: the least `⟨I⟩` with `X_I f(a) ≠ 0`, searching
    /// sequences with `⟨I⟩ < n_max`.
    pub fn function_order(&self, f: &RationalPoly, n_max: u32) -> Result<Order> {
        check_dim(self.dim(), f.nvars())?;
        let mut best = n_max;
        self.order_search(f, 0, &mut best)?;
        Ok(if best < n_max {
            Order::Exact(best)
        } else {
            Order::AtLeast(n_max)
        })
    }

    fn order_search(&self, g: &RationalPoly, weight: u32, best: &mut u32) -> Result<()> {
        if weight >= *best || g.is_zero() {
            return Ok(());
        }
        if !g.evaluate(&self.base_point)?.is_zero() {
            *best = weight;
            return Ok(());
        }
        for (i, x) in self.fields.iter().enumerate() {
            let wi = weight + self.w[i];
            if wi >= *best {
                continue;
            }
            let h = x.apply(g)?;
            self.order_search(&h, wi, best)?;
        }
        Ok(())
    }

    /// Model field of `X_j` read off the homogeneous expansion: its part of degree `−w_j`.
    pub fn model_field(&self, j: usize) -> Result<PolyVectorField> {
        if let Some(k) = self.first_unadapted() {
            return Err(Error::NotAdapted(k + 1));
        }
        if !self.base_point.iter().all(Zero::is_zero) {
            return Err(Error::NotAdapted(j + 1));
        }
        let x = &self.fields[j];
        let expected = -(self.w[j] as i64);
        match x.weight(&self.w) {
            Some(l) if l < expected => Err(Error::NotPrivileged {
                field: j + 1,
                weight: l,
                expected,
            }),
            _ => Ok(x.homogeneous_part(expected, &self.w)),
        }
    }

    /// Model field from the jets of the coefficients,
    /// `∂_j + Σ_{w_k > w_j} Σ_{⟨α⟩ = w_k − w_j} (∂^α b_jk(0)/α!) x^α ∂_k`.
    pub fn model_field_from_jets(&self, j: usize) -> Result<PolyVectorField> {
        if let Some(k) = self.first_unadapted() {
            return Err(Error::NotAdapted(k + 1));
        }
        let n = self.dim();
        let zero = vec![Rational::zero(); n];
        let x = &self.fields[j];
        if let Some(l) = x.weight(&self.w) {
            let expected = -(self.w[j] as i64);
            if l < expected {
                return Err(Error::NotPrivileged {
                    field: j + 1,
                    weight: l,
                    expected,
                });
            }
        }
        let mut out = PolyVectorField::coordinate(n, j);
        for k in 0..n {
            if self.w[k] <= self.w[j] {
                continue;
            }
            let target = self.w[k] - self.w[j];
            for alpha in MultiIndex::up_to_weight(&self.w, target) {
                if alpha.weighted(&self.w) != target {
                    continue;
                }
                let mut d = x.coeffs[k].clone();
                for (v, &a) in alpha.0.iter().enumerate() {
                    for _ in 0..a {
                        d = d.partial(v)?;
                    }
                }
                let c = d.evaluate(&zero)? / Rational::from_integer(alpha.factorial());
                out.coeffs[k].add_term(alpha, c);
            }
        }
        Ok(out)
    }

    /// All model fields `X_j^{(0)}` of an adapted frame.
    pub fn model_fields(&self) -> Result<Vec<PolyVectorField>> {
        (0..self.dim()).map(|j| self.model_field(j)).collect()
    }

    /// Frame pushed through `m` (with inverse `m_inv`), based at `m(a)`.
    pub fn push(&self, m: &PolyMap, m_inv: &PolyMap) -> Result<Frame> {
        let fields = self
            .fields
            .iter()
            .map(|x| x.push(m, m_inv))
            .collect::<Result<Vec<_>>>()?;
        let a = m.evaluate(&self.base_point)?;
        Frame::new(fields, self.w.clone(), a)
    }
}
