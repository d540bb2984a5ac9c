//! Graded nilpotent Lie algebras and their group law in exponential coordinates.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::graded::WeightVector;
use crate::linalg::Matrix;
use crate::poly::{PolyMap, RationalPoly};
use crate::rational::{factorial, int, Rational};
use crate::vfield::PolyVectorField;

/// Structure constants `[e_i, e_j] = Σ_k L_ij^k e_k` (0-based indices).
///
/// Only `i < j` is stored; `L_ji^k = −L_ij^k` on read.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StructureConstants {
    w: WeightVector,
    entries: BTreeMap<(usize, usize, usize), Rational>,
}

impl StructureConstants {
    /// The abelian algebra.
    pub fn new(w: WeightVector) -> Self {
        Self {
            w,
            entries: BTreeMap::new(),
        }
    }

    /// Builds constants from `(i, j, k, L_ij^k)` with 0-based indices. Either
    /// ordering of `(i, j)` is accepted; contradicting pairs and diagonal
    /// entries violate antisymmetry.
    pub fn from_entries<I>(w: WeightVector, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, Rational)>,
    {
        let mut given: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        let n = w.dim();
        for (i, j, k, c) in entries {
            if i >= n || j >= n || k >= n {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket index ({}, {}, {}) out of range 1..={n}",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            if i == j {
                if !c.is_zero() {
                    return Err(Error::InvalidAlgebra(format!(
                        "antisymmetry: L_{}{}^{} = {c} must vanish",
                        i + 1,
                        i + 1,
                        k + 1
                    )));
                }
                continue;
            }
            let (key, val) = if i < j { ((i, j, k), c) } else { ((j, i, k), -c) };
            if let Some(prev) = given.get(&key) {
                if *prev != val {
                    return Err(Error::InvalidAlgebra(format!(
                        "antisymmetry: L_{}{}^{} is given inconsistently",
                        key.0 + 1,
                        key.1 + 1,
                        key.2 + 1
                    )));
                }
            }
            given.insert(key, val);
        }
        given.retain(|_, c| !c.is_zero());
        Ok(Self { w, entries: given })
    }

    pub fn weights(&self) -> &WeightVector {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn is_abelian(&self) -> bool {
        self.entries.is_empty()
    }

    /// `L_ij^k`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> Rational {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.entries.get(&(i, j, k)).cloned().unwrap_or_else(Rational::zero),
            Greater => -self.entries.get(&(j, i, k)).cloned().unwrap_or_else(Rational::zero),
            Equal => Rational::zero(),
        }
    }

    /// Sets `L_ij^k` (and thereby `L_ji^k = −L_ij^k`).
    pub fn set(&mut self, i: usize, j: usize, k: usize, c: Rational) -> Result<()> {
        let n = self.dim();
        if i >= n || j >= n || k >= n || i == j {
            return Err(Error::InvalidAlgebra("bad bracket index".into()));
        }
        let (key, val) = if i < j { ((i, j, k), c) } else { ((j, i, k), -c) };
        if val.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, val);
        }
        Ok(())
    }

    /// Stored entries `(i, j, k, L_ij^k)` with `i < j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &Rational)> {
        self.entries.iter().map(|(&(i, j, k), c)| (i, j, k, c))
    }

    /// `[x, y]` for coefficient vectors over any commutative ring of scalars.
    fn bracket_with<T: Scalar>(&self, x: &[T], y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero_like(&x[0]); self.dim()];
        for (&(i, j, k), c) in &self.entries {
            // L_ij^k (x_i y_j − x_j y_i)
            let t = x[i].mul(&y[j]).sub(&x[j].mul(&y[i]));
            if !t.is_zero_value() {
                out[k] = out[k].add(&t.scale(c));
            }
        }
        out
    }

    /// Lie bracket of two points of the algebra.
    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(self.bracket_with(x, y))
    }
}

/// Outcome of [`validate_algebra`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraReport {
    pub antisymmetry: bool,
    pub grading: bool,
    pub jacobi: bool,
    /// First violated identity, if any.
    pub violation: Option<String>,
}

impl AlgebraReport {
    pub fn pass(&self) -> bool {
        self.antisymmetry && self.grading && self.jacobi
    }

    /// Report for constants that could not even be assembled antisymmetrically.
    pub fn antisymmetry_failure(msg: String) -> Self {
        Self {
            antisymmetry: false,
            grading: false,
            jacobi: false,
            violation: Some(msg),
        }
    }
}

/// Checks grading (`L_ij^k ≠ 0 ⇒ w_i + w_j = w_k`) and the Jacobi identity exactly.
/// Antisymmetry holds by construction.
pub fn validate_algebra(l: &StructureConstants) -> AlgebraReport {
    let w = &l.w;
    let n = l.dim();
    let mut violation = None;
    let mut grading = true;
    for (i, j, k, c) in l.entries() {
        if w[i] + w[j] != w[k] {
            grading = false;
            violation.get_or_insert_with(|| {
                format!(
                    "grading: L_{}{}^{} = {c} but w_{} + w_{} = {} ≠ w_{} = {}",
                    i + 1,
                    j + 1,
                    k + 1,
                    i + 1,
                    j + 1,
                    w[i] + w[j],
                    k + 1,
                    w[k]
                )
            });
        }
    }
    let mut jacobi = true;
    'outer: for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for t in 0..n {
                    let mut s = Rational::zero();
                    for m in 0..n {
                        s += l.get(i, j, m) * l.get(m, k, t)
                            + l.get(j, k, m) * l.get(m, i, t)
                            + l.get(k, i, m) * l.get(m, j, t);
                    }
                    if !s.is_zero() {
                        jacobi = false;
                        violation.get_or_insert_with(|| {
                            format!(
                                "jacobi: component {} of [[e{},e{}],e{}] + cyclic is {s}",
                                t + 1,
                                i + 1,
                                j + 1,
                                k + 1
                            )
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    AlgebraReport {
        antisymmetry: true,
        grading,
        jacobi,
        violation,
    }
}

fn require_valid(l: &StructureConstants) -> Result<()> {
    let r = validate_algebra(l);
    match r.violation {
        Some(v) if !r.pass() => Err(Error::InvalidAlgebra(v)),
        _ => Ok(()),
    }
}

/// Matrix of `ad_x` on a point: `A(x)_{kj} = Σ_{w_i+w_j=w_k} L_ij^k x_i`.
pub fn adjoint_matrix(l: &StructureConstants, x: &[Rational]) -> Result<Matrix> {
    check_dim(l.dim(), x.len())?;
    let mut a = Matrix::zeros(l.dim(), l.dim());
    for_each_graded(l, |i, j, k, c| {
        a[(k, j)] += c * &x[i];
        a[(k, i)] -= c * &x[j];
    });
    Ok(a)
}

/// `ad_x` with symbolic entries: `x` is a vector of polynomials.
pub fn adjoint_matrix_symbolic(l: &StructureConstants, x: &[RationalPoly]) -> Result<Vec<Vec<RationalPoly>>> {
    check_dim(l.dim(), x.len())?;
    let nv = x.first().map_or(0, RationalPoly::nvars);
    let n = l.dim();
    let mut a = vec![vec![RationalPoly::zero(nv); n]; n];
    for_each_graded(l, |i, j, k, c| {
        a[k][j] = &a[k][j] + &x[i].scale(c);
        a[k][i] = &a[k][i] - &x[j].scale(c);
    });
    Ok(a)
}

fn for_each_graded<F: FnMut(usize, usize, usize, &Rational)>(l: &StructureConstants, mut f: F) {
    for (i, j, k, c) in l.entries() {
        if l.w[i] + l.w[j] == l.w[k] {
            f(i, j, k, c);
        }
    }
}

/// Minimal ring interface shared by numeric points and symbolic coordinates.
trait Scalar: Clone {
    fn zero_like(&self) -> Self;
    fn is_zero_value(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: &Rational) -> Self;
}

impl Scalar for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &Rational) -> Self {
        self * c
    }
}

impl Scalar for RationalPoly {
    fn zero_like(&self) -> Self {
        RationalPoly::zero(self.nvars())
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &Rational) -> Self {
        RationalPoly::scale(self, c)
    }
}

/// One Dynkin word: blocks `(a_j, b_j)` read as `ad_x^{a_1} ad_y^{b_1} ⋯`.
type Word = Vec<(u32, u32)>;

/// All words with at most `r` letters that can contribute: every block is
/// nonempty and the last block is `(a, 1)` or `(1, 0)`.
fn dynkin_words(r: u32) -> Vec<Word> {
    fn rec(left: u32, cur: &mut Word, out: &mut Vec<Word>) {
        // Close the word with a final block.
        for a in 0..left {
            cur.push((a, 1));
            out.push(cur.clone());
            cur.pop();
        }
        if left >= 1 {
            cur.push((1, 0));
            out.push(cur.clone());
            cur.pop();
        }
        // Or extend with a middle block.
        for a in 0..=left {
            for b in 0..=left - a {
                if a + b == 0 || a + b >= left {
                    continue;
                }
                cur.push((a, b));
                rec(left - a - b, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(r, &mut Vec::new(), &mut out);
    out
}

fn dynkin_coefficient(word: &Word) -> Rational {
    let n = word.len() as i64;
    let letters: u32 = word.iter().map(|(a, b)| a + b).sum();
    let denom: num_bigint::BigInt = word.iter().map(|&(a, b)| factorial(a) * factorial(b)).product();
    let sign = if n % 2 == 1 { int(1) } else { int(-1) };
    sign / (int(n) * int(letters as i64) * Rational::from_integer(denom))
}

/// Dynkin series `log(e^x e^y)` truncated at the step, generic in the scalars.
fn dynkin_sum<T: Scalar>(l: &StructureConstants, x: &[T], y: &[T]) -> Vec<T> {
    let r = l.w.step();
    let mut out: Vec<T> = x.iter().zip(y).map(|(a, b)| a.add(b)).collect();
    if l.is_abelian() {
        return out;
    }
    for word in dynkin_words(r) {
        let letters: u32 = word.iter().map(|(a, b)| a + b).sum();
        if letters < 2 {
            continue;
        }
        let (last_a, last_b) = *word.last().unwrap();
        // The innermost factor is ad_x^{a} y, or the bare x when the word ends in (1, 0).
        let (mut v, inner) = if last_b == 1 {
            (y.to_vec(), last_a)
        } else {
            (x.to_vec(), 0)
        };
        let mut alive = apply_ad(l, &mut v, x, inner);
        for &(a, b) in word[..word.len() - 1].iter().rev() {
            alive = alive && apply_ad(l, &mut v, y, b) && apply_ad(l, &mut v, x, a);
            if !alive {
                break;
            }
        }
        if !alive {
            continue;
        }
        let c = dynkin_coefficient(&word);
        for (o, vi) in out.iter_mut().zip(&v) {
            if !vi.is_zero_value() {
                *o = o.add(&vi.scale(&c));
            }
        }
    }
    out
}

/// `v ← ad_z^times v`; false once `v` vanishes.
fn apply_ad<T: Scalar>(l: &StructureConstants, v: &mut Vec<T>, z: &[T], times: u32) -> bool {
    for _ in 0..times {
        *v = l.bracket_with(z, v);
        if v.iter().all(Scalar::is_zero_value) {
            return false;
        }
    }
    true
}

/// `x·y` in exponential coordinates via the Dynkin series.
pub fn dynkin_product(x: &[Rational], y: &[Rational], l: &StructureConstants) -> Result<Vec<Rational>> {
    check_dim(l.dim(), x.len())?;
    check_dim(l.dim(), y.len())?;
    require_valid(l)?;
    Ok(dynkin_sum(l, x, y))
}

/// `x⁻¹ = −x`.
pub fn group_inverse(x: &[Rational]) -> Vec<Rational> {
    x.iter().map(|v| -v.clone()).collect()
}

/// Group law as a polynomial map `ℝ^{2n} → ℝⁿ` in `(x, y)`.
pub fn group_law(l: &StructureConstants) -> Result<PolyMap> {
    require_valid(l)?;
    let n = l.dim();
    let x: Vec<_> = (0..n).map(|i| RationalPoly::var(2 * n, i)).collect();
    let y: Vec<_> = (0..n).map(|i| RationalPoly::var(2 * n, n + i)).collect();
    PolyMap::new(2 * n, dynkin_sum(l, &x, &y))
}

/// A graded nilpotent group with its precomputed law.
#[derive(Clone, Debug)]
pub struct NilpotentGroup {
    algebra: StructureConstants,
    law: PolyMap,
}

impl NilpotentGroup {
    pub fn new(algebra: StructureConstants) -> Result<Self> {
        let law = group_law(&algebra)?;
        Ok(Self { algebra, law })
    }

    pub fn algebra(&self) -> &StructureConstants {
        &self.algebra
    }

    pub fn law(&self) -> &PolyMap {
        &self.law
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn product(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        let xy: Vec<Rational> = x.iter().chain(y).cloned().collect();
        self.law.evaluate(&xy)
    }

    /// Left translation `z ↦ a·z` as a polynomial map.
    pub fn left_translation(&self, a: &[Rational]) -> Result<PolyMap> {
        let n = self.dim();
        check_dim(n, a.len())?;
        let mut sub: Vec<RationalPoly> = a.iter().map(|c| RationalPoly::constant(n, c.clone())).collect();
        sub.extend((0..n).map(|i| RationalPoly::var(n, i)));
        self.law.compose(&PolyMap::new(n, sub)?)
    }

    /// Right translation `z ↦ z·b` as a polynomial map.
    pub fn right_translation(&self, b: &[Rational]) -> Result<PolyMap> {
        let n = self.dim();
        check_dim(n, b.len())?;
        let mut sub: Vec<RationalPoly> = (0..n).map(|i| RationalPoly::var(n, i)).collect();
        sub.extend(b.iter().map(|c| RationalPoly::constant(n, c.clone())));
        self.law.compose(&PolyMap::new(n, sub)?)
    }

    /// `X_j f(x) = d/dt f(x·(t e_j))` at `t = 0`.
    pub fn left_invariant_fields(&self) -> Result<Vec<PolyVectorField>> {
        let n = self.dim();
        let zero = Rational::zero();
        (0..n)
            .map(|j| {
                let coeffs = self
                    .law
                    .components()
                    .iter()
                    .map(|c| {
                        let mut d = c.partial(n + j)?;
                        for v in n..2 * n {
                            d = d.specialize(v, &zero);
                        }
                        d.restrict(0..n)
                    })
                    .collect::<Result<Vec<_>>>()?;
                PolyVectorField::new(coeffs)
            })
            .collect()
    }
}

/// Left-invariant fields `X_1^a, …, X_n^a` of the group with these constants.
pub fn left_invariant_fields(l: &StructureConstants) -> Result<Vec<PolyVectorField>> {
    NilpotentGroup::new(l.clone())?.left_invariant_fields()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graded::dilate;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn h3() -> StructureConstants {
        catalog::lookup("heisenberg_3").unwrap().algebra
    }

    fn pt(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(p, q)| rat(p, q)).collect()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_algebra(&h3()).pass());
        let ab = StructureConstants::new(WeightVector::new(vec![1, 1]).unwrap());
        assert!(validate_algebra(&ab).pass());
        let bad =
            StructureConstants::from_entries(WeightVector::new(vec![1, 1, 3]).unwrap(), [(0, 1, 2, int(1))]).unwrap();
        let r = validate_algebra(&bad);
        assert!(!r.grading && !r.pass());
        assert!(r.violation.unwrap().starts_with("grading"));
        let w = WeightVector::new(vec![1, 1, 2]).unwrap();
        assert!(StructureConstants::from_entries(w.clone(), [(0, 0, 2, int(1))]).is_err());
        assert!(StructureConstants::from_entries(w.clone(), [(0, 1, 2, int(1)), (1, 0, 2, int(1))]).is_err());
        let ok = StructureConstants::from_entries(w, [(0, 1, 2, int(1)), (1, 0, 2, int(-1))]).unwrap();
        assert_eq!(ok, h3());
    }

    #[test]
    fn jacobi_violation_is_found() {
        // [e1,e2] = e4 and [e4,e3] = e5 only: [[e1,e2],e3] + cyclic = e5.
        let w = WeightVector::new(vec![1, 1, 1, 2, 3]).unwrap();
        let l = StructureConstants::from_entries(w, [(0, 1, 3, int(1)), (3, 2, 4, int(1))]).unwrap();
        let r = validate_algebra(&l);
        assert!(r.grading && !r.jacobi);
        assert!(r.violation.unwrap().starts_with("jacobi"));
    }

    #[test]
    fn adjoint_examples() {
        let a = adjoint_matrix(&h3(), &pt(&[(1, 1), (0, 1), (0, 1)])).unwrap();
        let mut expected = Matrix::zeros(3, 3);
        expected[(2, 1)] = int(1);
        assert_eq!(a, expected);
        let z = adjoint_matrix(&h3(), &pt(&[(0, 1), (0, 1), (0, 1)])).unwrap();
        assert_eq!(z, Matrix::zeros(3, 3));
    }

    #[test]
    fn adjoint_is_nilpotent() {
        for name in catalog::ALGEBRAS {
            let l = catalog::lookup(name).unwrap().algebra;
            let n = l.dim();
            let x: Vec<_> = (0..n).map(|i| RationalPoly::var(n, i)).collect();
            let a = adjoint_matrix_symbolic(&l, &x).unwrap();
            let mul = |p: &Vec<Vec<RationalPoly>>, q: &Vec<Vec<RationalPoly>>| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (0..n).fold(RationalPoly::zero(n), |acc, k| &acc + &(&p[i][k] * &q[k][j])))
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>()
            };
            let mut power = a.clone();
            for _ in 1..l.weights().step() {
                power = mul(&power, &a);
            }
            assert!(power.iter().flatten().all(RationalPoly::is_zero), "{name}");
        }
    }

    #[test]
    fn heisenberg_product() {
        let p = dynkin_product(&pt(&[(1, 1), (0, 1), (0, 1)]), &pt(&[(0, 1), (1, 1), (0, 1)]), &h3()).unwrap();
        assert_eq!(p, pt(&[(1, 1), (1, 1), (1, 2)]));
        let x = pt(&[(1, 1), (2, 1), (3, 1)]);
        assert_eq!(group_inverse(&x), pt(&[(-1, 1), (-2, 1), (-3, 1)]));
        let z = dynkin_product(&x, &group_inverse(&x), &h3()).unwrap();
        assert!(z.iter().all(Zero::is_zero));
        let bad =
            StructureConstants::from_entries(WeightVector::new(vec![1, 1, 3]).unwrap(), [(0, 1, 2, int(1))]).unwrap();
        assert!(dynkin_product(&x, &x, &bad).is_err());
    }

    #[test]
    fn low_degree_law_matches_closed_form() {
        // (x·y)_k = x_k + y_k + ½ Σ L_ij^k x_i y_j for w_k ≤ 2.
        for name in catalog::ALGEBRAS {
            let g = NilpotentGroup::new(catalog::lookup(name).unwrap().algebra).unwrap();
            let l = g.algebra().clone();
            let n = l.dim();
            let w = l.weights().to_vec();
            for k in (0..n).filter(|&k| w[k] <= 2) {
                let mut expected = &RationalPoly::var(2 * n, k) + &RationalPoly::var(2 * n, n + k);
                for i in 0..n {
                    for j in 0..n {
                        let c = l.get(i, j, k);
                        if !c.is_zero() {
                            let t = &RationalPoly::var(2 * n, i) * &RationalPoly::var(2 * n, n + j);
                            expected = &expected + &t.scale(&(c / int(2)));
                        }
                    }
                }
                assert_eq!(g.law().component(k), &expected, "{name} component {k}");
            }
        }
    }

    #[test]
    fn heisenberg_left_invariant_fields() {
        let f = left_invariant_fields(&h3()).unwrap();
        let x = |j| RationalPoly::var(3, j);
        let d = |j| PolyVectorField::coordinate(3, j);
        let x1 = d(0)
            .checked_add(&d(2).mul_poly(&x(1).scale(&rat(-1, 2))).unwrap())
            .unwrap();
        let x2 = d(1)
            .checked_add(&d(2).mul_poly(&x(0).scale(&rat(1, 2))).unwrap())
            .unwrap();
        assert_eq!(f, vec![x1, x2, d(2)]);
        let ab = left_invariant_fields(&catalog::lookup("abelian_2").unwrap().algebra).unwrap();
        assert_eq!(ab, vec![d2(0), d2(1)]);
        fn d2(j: usize) -> PolyVectorField {
            PolyVectorField::coordinate(2, j)
        }
    }

    #[test]
    fn left_invariant_fields_are_homogeneous_and_adapted() {
        for name in catalog::ALGEBRAS {
            let l = catalog::lookup(name).unwrap().algebra;
            let w = l.weights().clone();
            let t = rat(2, 5);
            for (j, f) in left_invariant_fields(&l).unwrap().iter().enumerate() {
                assert_eq!(f.rescale(&t, &w).unwrap().scale(&crate::rational::pow(&t, w[j])), *f);
                assert_eq!(
                    f.at(&vec![int(0); l.dim()]).unwrap(),
                    PolyVectorField::coordinate(l.dim(), j)
                        .at(&vec![int(0); l.dim()])
                        .unwrap()
                );
            }
        }
    }

    #[test]
    fn left_invariance_identity() {
        // X_j(f∘λ_x)(y) = (X_j f)(x·y) for f = monomials of weight ≤ r, symbolic in (x, y).
        for name in catalog::ALGEBRAS {
            let g = NilpotentGroup::new(catalog::lookup(name).unwrap().algebra).unwrap();
            let n = g.dim();
            let w = g.algebra().weights().clone();
            let fields = g.left_invariant_fields().unwrap();
            // Fields acting on the y block of 2n variables.
            let lift = |x: &PolyVectorField| {
                let mut c = vec![RationalPoly::zero(2 * n); n];
                c.extend(x.coeffs().iter().map(|a| a.embed(2 * n, n)));
                PolyVectorField::new(c).unwrap()
            };
            for alpha in crate::graded::MultiIndex::up_to_weight(&w, w.step()) {
                let f = RationalPoly::monomial(n, &alpha.0, int(1));
                let f_lx = f.substitute(g.law()).unwrap();
                for x in &fields {
                    let lhs = lift(x).apply(&f_lx).unwrap();
                    let rhs = x.apply(&f).unwrap().substitute(g.law()).unwrap();
                    assert_eq!(lhs, rhs, "{name} {alpha:?}");
                }
            }
        }
    }

    #[test]
    fn bracket_table_reproduces_constants() {
        for name in catalog::ALGEBRAS {
            let l = catalog::lookup(name).unwrap().algebra;
            let f = left_invariant_fields(&l).unwrap();
            let n = l.dim();
            for i in 0..n {
                for j in 0..n {
                    let b = f[i].bracket(&f[j]).unwrap();
                    let mut expected = PolyVectorField::zero(n);
                    for (k, fk) in f.iter().enumerate() {
                        expected = expected.checked_add(&fk.scale(&l.get(i, j, k))).unwrap();
                    }
                    assert_eq!(b, expected, "{name} [{i},{j}]");
                }
            }
        }
    }

    fn arb_point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::vec((-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q)), n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn engel_group_axioms(x in arb_point(4), y in arb_point(4), z in arb_point(4)) {
            let g = NilpotentGroup::new(catalog::lookup("engel_4").unwrap().algebra).unwrap();
            let lhs = g.product(&g.product(&x, &y).unwrap(), &z).unwrap();
            let rhs = g.product(&x, &g.product(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let zero = vec![Rational::zero(); 4];
            prop_assert_eq!(g.product(&x, &zero).unwrap(), x.clone());
            prop_assert_eq!(g.product(&zero, &x).unwrap(), x.clone());
            prop_assert!(g.product(&x, &group_inverse(&x)).unwrap().iter().all(Zero::is_zero));
            // The symbolic law agrees with the direct numeric sum.
            prop_assert_eq!(g.product(&x, &y).unwrap(), dynkin_product(&x, &y, g.algebra()).unwrap());
        }

        #[test]
        fn dilations_are_automorphisms(x in arb_point(5), y in arb_point(5), t in (-5i64..=5, 1i64..=3)) {
            let g = NilpotentGroup::new(catalog::lookup("step3_filiform_5").unwrap().algebra).unwrap();
            let w = g.algebra().weights().clone();
            let t = rat(t.0, t.1);
            let lhs = dilate(&g.product(&x, &y).unwrap(), &t, &w).unwrap();
            let rhs = g.product(&dilate(&x, &t, &w).unwrap(), &dilate(&y, &t, &w).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
