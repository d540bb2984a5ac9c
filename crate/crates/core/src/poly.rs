//! Sparse multivariate polynomials with exact rational coefficients, and
//! polynomial maps between coordinate spaces.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::graded::MultiIndex;
use crate::rational::{int, pow, to_f64, Rational};

/// Polynomial in `nvars` variables. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl RationalPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(nvars, &vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The coordinate function `x_j` (0-based).
    pub fn var(nvars: usize, j: usize) -> Self {
        assert!(j < nvars, "variable index {j} out of range for {nvars} variables");
        Self::monomial(nvars, &MultiIndex::unit(nvars, j).0, Rational::one())
    }

    pub fn monomial(nvars: usize, exps: &[u32], c: Rational) -> Self {
        assert_eq!(exps.len(), nvars, "exponent length must equal variable count");
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(MultiIndex(exps.to_vec()), c);
        }
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            check_dim(nvars, e.len())?;
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    /// Terms ordered by `(⟨α⟩, α)` for the given weights.
    pub fn sorted_terms(&self, w: &[u32]) -> Vec<(&MultiIndex, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| (a.0.weighted(w), a.0).cmp(&(b.0.weighted(w), b.0)));
        v
    }

    pub fn coeff(&self, e: &[u32]) -> Rational {
        self.terms
            .get(&MultiIndex(e.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn add_term(&mut self, e: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn map_terms<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&MultiIndex, &Rational) -> Option<(MultiIndex, Rational)>,
    {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if let Some((e2, c2)) = f(e, c) {
                out.add_term(e2, c2);
            }
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.nvars, other.nvars)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.nvars, other.nvars)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.nvars, other.nvars)?;
        let mut acc: BTreeMap<MultiIndex, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                *acc.entry(e1.add(e2)).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Self {
            nvars: self.nvars,
            terms: acc,
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        self.map_terms(|e, v| Some((e.clone(), v * c)))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `∂f/∂x_j` (0-based).
    pub fn partial(&self, j: usize) -> Result<Self> {
        if j >= self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: j + 1,
            });
        }
        Ok(self.map_terms(|e, c| {
            let a = e.0[j];
            if a == 0 {
                return None;
            }
            let mut e2 = e.clone();
            e2.0[j] -= 1;
            Some((e2, c * int(a as i64)))
        }))
    }

    /// Antiderivative in `x_j` vanishing on `x_j = 0`.
    pub fn integrate(&self, j: usize) -> Self {
        self.map_terms(|e, c| {
            let mut e2 = e.clone();
            e2.0[j] += 1;
            let d = int(e2.0[j] as i64);
            Some((e2, c / d))
        })
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        check_dim(self.nvars, x.len())?;
        let mut cache = PowCache::new(x.to_vec());
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &a) in e.0.iter().enumerate() {
                if a > 0 {
                    term *= cache.get(i, a);
                }
            }
            total += term;
        }
        Ok(total)
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.nvars, x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| {
                e.0.iter()
                    .zip(x)
                    .fold(to_f64(c), |acc, (&a, &xi)| acc * xi.powi(a as i32))
            })
            .sum())
    }

    /// Fixes `x_j = v` while keeping the variable count.
    pub fn specialize(&self, j: usize, v: &Rational) -> Self {
        self.map_terms(|e, c| {
            let a = e.0[j];
            let mut e2 = e.clone();
            e2.0[j] = 0;
            Some((e2, c * pow(v, a)))
        })
    }

    /// `f ∘ m`, expanded.
    pub fn substitute(&self, m: &PolyMap) -> Result<Self> {
        self.substitute_bounded(m, None)
    }

    /// `f ∘ m` without the terms of weighted degree above `max_weight`.
    ///
    /// Every intermediate product is truncated, which is exact because monomial
    /// weights are nonnegative.
    pub fn substitute_truncated(&self, m: &PolyMap, max_weight: u32, w: &[u32]) -> Result<Self> {
        check_dim(m.nvars, w.len())?;
        self.substitute_bounded(m, Some((max_weight, w)))
    }

    fn substitute_bounded(&self, m: &PolyMap, bound: Option<(u32, &[u32])>) -> Result<Self> {
        check_dim(self.nvars, m.dim_out())?;
        let mut cache = PolyPowCache::new(&m.components, bound);
        let mut out = Self::zero(m.nvars);
        for (e, c) in &self.terms {
            let mut term = Self::constant(m.nvars, c.clone());
            for (i, &a) in e.0.iter().enumerate() {
                if a > 0 {
                    term = term.mul_bounded(cache.get(i, a), bound);
                    if term.is_zero() {
                        break;
                    }
                }
            }
            for (e2, c2) in term.terms {
                out.add_term(e2, c2);
            }
        }
        Ok(out)
    }

    fn mul_bounded(&self, other: &Self, bound: Option<(u32, &[u32])>) -> Self {
        let Some((max, w)) = bound else {
            return self * other;
        };
        let mut acc: BTreeMap<MultiIndex, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            let d1 = e1.weighted(w);
            if d1 > max {
                continue;
            }
            for (e2, c2) in &other.terms {
                if d1 + e2.weighted(w) <= max {
                    *acc.entry(e1.add(e2)).or_insert_with(Rational::zero) += c1 * c2;
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Self {
            nvars: self.nvars,
            terms: acc,
        }
    }

    /// Terms with `⟨α⟩ = d`.
    pub fn homogeneous_part(&self, d: i64, w: &[u32]) -> Self {
        self.map_terms(|e, c| (e.weighted(w) as i64 == d).then(|| (e.clone(), c.clone())))
    }

    /// Homogeneous components keyed by weighted degree.
    pub fn split_by_weight(&self, w: &[u32]) -> BTreeMap<u32, Self> {
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (e, c) in &self.terms {
            out.entry(e.weighted(w))
                .or_insert_with(|| Self::zero(self.nvars))
                .terms
                .insert(e.clone(), c.clone());
        }
        out
    }

    pub fn min_weight(&self, w: &[u32]) -> Option<u32> {
        self.terms.keys().map(|e| e.weighted(w)).min()
    }

    pub fn max_weight(&self, w: &[u32]) -> Option<u32> {
        self.terms.keys().map(|e| e.weighted(w)).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.order()).max()
    }

    /// Drops all terms with `⟨α⟩ > max_weight`.
    pub fn truncate(&self, max_weight: u32, w: &[u32]) -> Self {
        self.map_terms(|e, c| (e.weighted(w) <= max_weight).then(|| (e.clone(), c.clone())))
    }

    /// Keeps the terms satisfying `keep`.
    pub fn filter<F: Fn(&MultiIndex) -> bool>(&self, keep: F) -> Self {
        self.map_terms(|e, c| keep(e).then(|| (e.clone(), c.clone())))
    }

    pub fn depends_on(&self, j: usize) -> bool {
        self.terms.keys().any(|e| e.0[j] > 0)
    }

    /// Re-embeds into `nvars` variables, sending `x_i` to `x_{offset+i}`.
    pub fn embed(&self, nvars: usize, offset: usize) -> Self {
        assert!(offset + self.nvars <= nvars, "embedding does not fit");
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            e2[offset..offset + self.nvars].copy_from_slice(&e.0);
            out.terms.insert(MultiIndex(e2), c.clone());
        }
        out
    }

    /// Keeps the variables in `range`, which must contain every occurring one.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> Result<Self> {
        let n = range.len();
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            if e.0.iter().enumerate().any(|(i, &a)| a > 0 && !range.contains(&i)) {
                return Err(Error::InvalidInput("polynomial depends on a dropped variable".into()));
            }
            out.terms.insert(MultiIndex(e.0[range.clone()].to_vec()), c.clone());
        }
        Ok(out)
    }

    pub fn to_f64_terms(&self) -> Vec<(Vec<u32>, f64)> {
        self.terms.iter().map(|(e, c)| (e.0.clone(), to_f64(c))).collect()
    }
}

struct PowCache {
    x: Vec<Rational>,
    pows: Vec<Vec<Rational>>,
}

impl PowCache {
    fn new(x: Vec<Rational>) -> Self {
        let pows = x.iter().map(|v| vec![Rational::one(), v.clone()]).collect();
        Self { x, pows }
    }

    fn get(&mut self, i: usize, a: u32) -> &Rational {
        let row = &mut self.pows[i];
        while row.len() <= a as usize {
            let next = row.last().unwrap() * &self.x[i];
            row.push(next);
        }
        &row[a as usize]
    }
}

struct PolyPowCache<'a> {
    base: &'a [RationalPoly],
    pows: Vec<Vec<RationalPoly>>,
    bound: Option<(u32, &'a [u32])>,
}

impl<'a> PolyPowCache<'a> {
    fn new(base: &'a [RationalPoly], bound: Option<(u32, &'a [u32])>) -> Self {
        let pows = base
            .iter()
            .map(|p| {
                vec![match bound {
                    Some((max, w)) => p.truncate(max, w),
                    None => p.clone(),
                }]
            })
            .collect();
        Self { base, pows, bound }
    }

    fn get(&mut self, i: usize, a: u32) -> &RationalPoly {
        let row = &mut self.pows[i];
        while row.len() < a as usize {
            let next = row.last().unwrap().mul_bounded(&self.base[i], self.bound);
            row.push(next);
        }
        &row[a as usize - 1]
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&RationalPoly> for &RationalPoly {
            type Output = RationalPoly;
            /// Panics when the variable counts differ.
            fn $method(self, rhs: &RationalPoly) -> RationalPoly {
                self.$checked(rhs)
                    .expect("polynomials in different variable counts")
            }
        }
        impl $trait<RationalPoly> for RationalPoly {
            type Output = RationalPoly;
            fn $method(self, rhs: RationalPoly) -> RationalPoly {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&RationalPoly> for RationalPoly {
            type Output = RationalPoly;
            fn $method(self, rhs: &RationalPoly) -> RationalPoly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        self.map_terms(|e, c| Some((e.clone(), -c.clone())))
    }
}

impl Neg for RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        -&self
    }
}

/// Writes `c·x^α` as e.g. `x1*x2/2`, `-3*x1^2`, `1/2`.
fn write_term(f: &mut fmt::Formatter<'_>, e: &MultiIndex, c: &Rational, first: bool) -> fmt::Result {
    let neg = c.is_negative();
    let abs = c.abs();
    if neg {
        write!(f, "{}", if first { "-" } else { " - " })?;
    } else if !first {
        write!(f, " + ")?;
    }
    let vars: Vec<String> =
        e.0.iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| {
                if a == 1 {
                    format!("x{}", i + 1)
                } else {
                    format!("x{}^{a}", i + 1)
                }
            })
            .collect();
    if vars.is_empty() {
        return write!(f, "{abs}");
    }
    let numer = abs.numer();
    let denom = abs.denom();
    if !numer.is_one() {
        write!(f, "{numer}*")?;
    }
    write!(f, "{}", vars.join("*"))?;
    if !denom.is_one() {
        write!(f, "/{denom}")?;
    }
    Ok(())
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let unit = vec![1; self.nvars];
        for (i, (e, c)) in self.sorted_terms(&unit).into_iter().enumerate() {
            write_term(f, e, c, i == 0)?;
        }
        Ok(())
    }
}

/// Single-term display used in witnesses, e.g. `x1*x2/2`.
pub fn format_term(e: &MultiIndex, c: &Rational) -> String {
    struct T<'a>(&'a MultiIndex, &'a Rational);
    impl fmt::Display for T<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_term(f, self.0, self.1, true)
        }
    }
    T(e, c).to_string()
}

/// Polynomial map `ℝ^{nvars} → ℝ^{components.len()}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMap {
    nvars: usize,
    components: Vec<RationalPoly>,
}

impl PolyMap {
    pub fn new(nvars: usize, components: Vec<RationalPoly>) -> Result<Self> {
        for c in &components {
            check_dim(nvars, c.nvars)?;
        }
        Ok(Self { nvars, components })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nvars: n,
            components: (0..n).map(|j| RationalPoly::var(n, j)).collect(),
        }
    }

    pub fn zero(nvars: usize, dim_out: usize) -> Self {
        Self {
            nvars,
            components: vec![RationalPoly::zero(nvars); dim_out],
        }
    }

    /// Affine map `x ↦ M x + b`.
    pub fn affine(matrix: &crate::linalg::Matrix, b: &[Rational]) -> Result<Self> {
        check_dim(matrix.rows(), b.len())?;
        let n = matrix.cols();
        let comps = (0..matrix.rows())
            .map(|i| {
                let mut p = RationalPoly::constant(n, b[i].clone());
                for j in 0..n {
                    p.add_term(MultiIndex::unit(n, j), matrix[(i, j)].clone());
                }
                p
            })
            .collect();
        Ok(Self {
            nvars: n,
            components: comps,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn dim_out(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[RationalPoly] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &RationalPoly {
        &self.components[k]
    }

    pub fn into_components(self) -> Vec<RationalPoly> {
        self.components
    }

    pub fn is_identity(&self) -> bool {
        self.nvars == self.dim_out() && *self == Self::identity(self.nvars)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(RationalPoly::is_zero)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        check_dim(self.nvars, inner.dim_out())?;
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(inner))
            .collect::<Result<_>>()?;
        Ok(PolyMap {
            nvars: inner.nvars,
            components,
        })
    }

    /// `self ∘ inner` without terms of weighted degree above `max_weight`.
    pub fn compose_truncated(&self, inner: &PolyMap, max_weight: u32, w: &[u32]) -> Result<PolyMap> {
        check_dim(self.nvars, inner.dim_out())?;
        let components = self
            .components
            .iter()
            .map(|c| c.substitute_truncated(inner, max_weight, w))
            .collect::<Result<_>>()?;
        Ok(PolyMap {
            nvars: inner.nvars,
            components,
        })
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.components.iter().map(|c| c.evaluate(x)).collect()
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.evaluate_f64(x)).collect()
    }

    pub fn checked_add(&self, other: &PolyMap) -> Result<PolyMap> {
        check_dim(self.dim_out(), other.dim_out())?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        PolyMap::new(self.nvars, components)
    }

    pub fn checked_sub(&self, other: &PolyMap) -> Result<PolyMap> {
        check_dim(self.dim_out(), other.dim_out())?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.checked_sub(b))
            .collect::<Result<_>>()?;
        PolyMap::new(self.nvars, components)
    }

    /// Drops terms of weighted degree above `max_weight` in every component.
    pub fn truncate(&self, max_weight: u32, w: &[u32]) -> PolyMap {
        PolyMap {
            nvars: self.nvars,
            components: self.components.iter().map(|c| c.truncate(max_weight, w)).collect(),
        }
    }

    pub fn map_components<F: FnMut(usize, &RationalPoly) -> RationalPoly>(&self, mut f: F) -> PolyMap {
        PolyMap {
            nvars: self.nvars,
            components: self.components.iter().enumerate().map(|(k, c)| f(k, c)).collect(),
        }
    }

    /// Jacobian matrix `∂m_k/∂x_j` at 0.
    pub fn linear_part(&self) -> crate::linalg::Matrix {
        let n = self.nvars;
        crate::linalg::Matrix::from_fn(self.dim_out(), n, |k, j| {
            self.components[k].coeff(&MultiIndex::unit(n, j).0)
        })
    }

    /// Value at 0.
    pub fn constant_part(&self) -> Vec<Rational> {
        self.components.iter().map(|c| c.constant_term()).collect()
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    pub fn x(n: usize, j: usize) -> RationalPoly {
        RationalPoly::var(n, j)
    }

    pub fn arb_poly(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = RationalPoly> {
        proptest::collection::vec(
            (proptest::collection::vec(0..=max_deg, nvars), -9i64..=9, 1i64..=4),
            0..=max_terms,
        )
        .prop_map(move |ts| {
            RationalPoly::from_terms(nvars, ts.into_iter().map(|(e, p, q)| (MultiIndex(e), rat(p, q)))).unwrap()
        })
    }

    #[test]
    fn ring_examples() {
        let (x1, x2) = (x(2, 0), x(2, 1));
        let lhs = &(&x1 + &x2) * &(&x1 - &x2);
        assert_eq!(lhs, &x1.pow(2) - &x2.pow(2));
        let x13 = RationalPoly::monomial(3, &[2, 0, 1], int(1));
        assert_eq!(x13.partial(0).unwrap(), RationalPoly::monomial(3, &[1, 0, 1], int(2)));
        assert!(x13.partial(3).is_err());
        assert!(x1.checked_add(&x(3, 0)).is_err());
    }

    #[test]
    fn substitution_examples() {
        let f = x(3, 2);
        assert_eq!(f.substitute(&PolyMap::identity(3)).unwrap(), f);
        let f = &x(2, 0) * &x(2, 1);
        let m = PolyMap::new(2, vec![&x(2, 0) + &RationalPoly::one(2), x(2, 1)]).unwrap();
        assert_eq!(f.substitute(&m).unwrap(), &f + &x(2, 1));
        assert!(f.substitute(&PolyMap::identity(3)).is_err());
    }

    #[test]
    fn homogeneous_examples() {
        let w = [1, 1, 2];
        let f = &x(3, 0) + &x(3, 2);
        assert_eq!(f.homogeneous_part(2, &w), x(3, 2));
        assert!(f.homogeneous_part(-1, &w).is_zero());
    }

    #[test]
    fn display_witness_format() {
        let p = RationalPoly::monomial(3, &[1, 1, 0], rat(1, 2));
        assert_eq!(p.to_string(), "x1*x2/2");
        let q = RationalPoly::monomial(3, &[2, 0, 0], rat(-3, 2));
        assert_eq!(q.to_string(), "-3*x1^2/2");
        assert_eq!((&p + &x(3, 2)).to_string(), "x3 + x1*x2/2");
        assert_eq!(RationalPoly::constant(1, rat(-1, 2)).to_string(), "-1/2");
    }

    #[test]
    fn evaluate_exact() {
        let p = RationalPoly::monomial(2, &[2, 1], rat(1, 3));
        assert_eq!(p.evaluate(&[int(3), rat(1, 2)]).unwrap(), rat(3, 2));
        assert!((p.evaluate_f64(&[3.0, 0.5]).unwrap() - 1.5).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn leibniz(f in arb_poly(3, 3, 5), g in arb_poly(3, 3, 5), j in 0usize..3) {
            let lhs = (&f * &g).partial(j).unwrap();
            let rhs = &(&f * &g.partial(j).unwrap()) + &(&g * &f.partial(j).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ring_axioms(f in arb_poly(2, 3, 4), g in arb_poly(2, 3, 4), h in arb_poly(2, 3, 4)) {
            prop_assert_eq!(&f * &g, &g * &f);
            prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
            prop_assert!((&f - &f).is_zero());
        }

        #[test]
        fn substitution_is_associative(
            f in arb_poly(2, 2, 3),
            m in proptest::collection::vec(arb_poly(2, 2, 3), 2),
            m2 in proptest::collection::vec(arb_poly(2, 2, 3), 2),
        ) {
            let m = PolyMap::new(2, m).unwrap();
            let m2 = PolyMap::new(2, m2).unwrap();
            let lhs = f.substitute(&m).unwrap().substitute(&m2).unwrap();
            let rhs = f.substitute(&m.compose(&m2).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn weight_split_partitions(f in arb_poly(3, 3, 6)) {
            let w = [1, 2, 2];
            let parts = f.split_by_weight(&w);
            let sum = parts.iter().fold(RationalPoly::zero(3), |acc, (d, p)| {
                assert_eq!(*p, f.homogeneous_part(*d as i64, &w));
                &acc + p
            });
            prop_assert_eq!(sum, f);
        }

        #[test]
        fn homogeneous_scaling_identity(f in arb_poly(3, 3, 6), d in 0i64..6) {
            // f_d(t·x) = t^d f_d(x) with t adjoined as a fourth variable.
            let w = [1, 1, 2];
            let h = f.homogeneous_part(d, &w).embed(4, 0);
            let t = x(4, 3);
            let dil = PolyMap::new(4, vec![
                &t * &x(4, 0), &t * &x(4, 1), &t.pow(2) * &x(4, 2), t.clone(),
            ]).unwrap();
            let lhs = h.substitute(&dil).unwrap();
            prop_assert_eq!(lhs, &t.pow(d as u32) * &h);
        }

        #[test]
        fn evaluation_is_a_ring_map(
            f in arb_poly(2, 3, 4), g in arb_poly(2, 3, 4),
            a in (-5i64..5, 1i64..4), b in (-5i64..5, 1i64..4),
        ) {
            let pt = [rat(a.0, a.1), rat(b.0, b.1)];
            let prod = (&f * &g).evaluate(&pt).unwrap();
            prop_assert_eq!(prod, f.evaluate(&pt).unwrap() * g.evaluate(&pt).unwrap());
        }
    }
}
