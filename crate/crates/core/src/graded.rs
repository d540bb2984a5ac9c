//! Weights, anisotropic dilations, pseudo-norms and the weighted residual classes.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::poly::PolyMap;
use crate::rational::{factorial, pow, Rational};

/// Nondecreasing sequence of positive coordinate weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(weights: Vec<u32>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("weight vector is empty".into()));
        }
        if weights.contains(&0) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        if weights.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::InvalidWeights(format!(
                "weights {weights:?} are not nondecreasing"
            )));
        }
        Ok(Self(weights))
    }

    /// All weights equal to one (the Riemannian case).
    pub fn unit(n: usize) -> Self {
        Self(vec![1; n.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The step `r`, i.e. the largest weight.
    pub fn step(&self) -> u32 {
        *self.0.last().expect("nonempty")
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Weights on the product space, `(w, w)`.
    pub fn doubled(&self) -> Vec<u32> {
        let mut out = self.0.clone();
        out.extend_from_slice(&self.0);
        out
    }

    pub fn degree(&self, alpha: &MultiIndex) -> u32 {
        alpha.weighted(&self.0)
    }
}

impl Deref for WeightVector {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl TryFrom<Vec<u32>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<u32> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        Self(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `|α|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Weighted degree `⟨α⟩`.
    pub fn weighted(&self, w: &[u32]) -> u32 {
        self.0.iter().zip(w).map(|(a, w)| a * w).sum()
    }

    pub fn factorial(&self) -> num_bigint::BigInt {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Variables that occur with a positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &a)| a > 0).map(|(i, _)| i)
    }

    /// All exponents in `n` variables whose weighted degree is at most `max_weight`,
    /// in lexicographic order.
    pub fn up_to_weight(w: &[u32], max_weight: u32) -> Vec<MultiIndex> {
        fn rec(w: &[u32], k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if k == w.len() {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            let mut a = 0;
            while a * w[k] <= left {
                cur.push(a);
                rec(w, k + 1, left - a * w[k], cur, out);
                cur.pop();
                a += 1;
            }
        }
        let mut out = Vec::new();
        rec(w, 0, max_weight, &mut Vec::with_capacity(w.len()), &mut out);
        out
    }
}

/// `δ_t x = (t^{w_1} x_1, …, t^{w_n} x_n)`.
pub fn dilate(x: &[Rational], t: &Rational, w: &[u32]) -> Result<Vec<Rational>> {
    check_dim(w.len(), x.len())?;
    Ok(x.iter().zip(w).map(|(xi, &wi)| xi * pow(t, wi)).collect())
}

pub fn dilate_f64(x: &[f64], t: f64, w: &[u32]) -> Vec<f64> {
    x.iter().zip(w).map(|(xi, &wi)| xi * t.powi(wi as i32)).collect()
}

/// `‖x‖ = Σ |x_j|^{1/w_j}`.
pub fn pseudo_norm(x: &[f64], w: &[u32]) -> Result<f64> {
    check_dim(w.len(), x.len())?;
    Ok(x.iter().zip(w).map(|(xi, &wi)| xi.abs().powf(1.0 / wi as f64)).sum())
}

/// Monomial of a residual that is too low in weight for the requested class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowWeightTerm {
    pub component: usize,
    pub exponent: MultiIndex,
    pub coefficient: Rational,
    pub weight: u32,
}

/// Monomials of component `k` with `⟨α⟩ < w_k + m`, where `⟨α⟩` uses the domain weights.
pub fn ow_violations(residual: &PolyMap, m: i64, domain: &[u32], codomain: &[u32]) -> Vec<LowWeightTerm> {
    let mut out = Vec::new();
    for (k, comp) in residual.components().iter().enumerate() {
        let bound = codomain[k] as i64 + m;
        for (alpha, c) in comp.terms() {
            let d = alpha.weighted(domain);
            if (d as i64) < bound {
                out.push(LowWeightTerm {
                    component: k,
                    exponent: alpha.clone(),
                    coefficient: c.clone(),
                    weight: d,
                });
            }
        }
    }
    out
}

/// Whether `residual` is `O_w(‖x‖^{w+m})`: every monomial in component `k` has
/// weighted degree at least `w_k + m`. Maps on the product space `ℝⁿ×ℝⁿ` are
/// weighted with `(w, w)`.
pub fn ow_class_poly(residual: &PolyMap, m: i64, w: &WeightVector) -> Result<bool> {
    check_dim(w.dim(), residual.dim_out())?;
    let domain = if residual.nvars() == w.dim() {
        w.to_vec()
    } else if residual.nvars() == 2 * w.dim() {
        w.doubled()
    } else {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: residual.nvars(),
        });
    };
    Ok(ow_violations(residual, m, &domain, w).is_empty())
}

/// Outcome of the scaling test along one direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    /// Every sample vanished.
    Exact,
    /// Least-squares slope of `log‖t⁻¹·f(t·x)‖` against `log t`.
    Slope { slope: f64, samples: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionResult {
    pub direction: Vec<f64>,
    pub decay: Decay,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub m: i64,
    pub threshold: f64,
    pub t_grid: Vec<f64>,
    pub directions: Vec<DirectionResult>,
    pub pass: bool,
}

/// Slack allowed below the target exponent.
pub const SLOPE_TOLERANCE: f64 = 0.1;

/// `2^{-1}, …, 2^{-k}`.
pub fn dyadic_grid(k: u32) -> Vec<f64> {
    (1..=k as i32).map(|i| 2f64.powi(-i)).collect()
}

/// Empirical check that `t^{-1}·f(t·x) = O(t^m)`.
///
/// `f` maps points weighted by `domain` to points weighted by `codomain`. The
/// output is rescaled by `t^{-w_k}` componentwise and measured in the Euclidean
/// norm, so a component with monomials of weight `w_k + m` decays like `t^m`.
pub fn ow_scaling_test<F>(
    mut f: F,
    m: i64,
    domain: &[u32],
    codomain: &[u32],
    directions: &[Vec<f64>],
    t_grid: &[f64],
) -> Result<ScalingReport>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if t_grid.len() < 2 {
        return Err(Error::InvalidInput("t grid needs at least two values".into()));
    }
    if t_grid.iter().any(|t| t.is_nan() || *t <= 0.0) || t_grid.windows(2).any(|p| p[0] <= p[1]) {
        return Err(Error::InvalidInput(
            "t grid must be positive and strictly decreasing".into(),
        ));
    }
    let threshold = m as f64 - SLOPE_TOLERANCE;
    let mut results = Vec::with_capacity(directions.len());
    for dir in directions {
        check_dim(domain.len(), dir.len())?;
        if dir.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidInput("scaling direction is zero".into()));
        }
        let mut pts = Vec::new();
        for &t in t_grid {
            let y = f(&dilate_f64(dir, t, domain))?;
            check_dim(codomain.len(), y.len())?;
            let norm = y
                .iter()
                .zip(codomain)
                .map(|(v, &wk)| (v / t.powi(wk as i32)).powi(2))
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                pts.push((t.ln(), norm.ln()));
            }
        }
        let decay = match pts.len() {
            0 => Decay::Exact,
            1 => Decay::Slope {
                slope: f64::INFINITY,
                samples: 1,
            },
            k => Decay::Slope {
                slope: ls_slope(&pts),
                samples: k,
            },
        };
        let pass = match decay {
            Decay::Exact => true,
            Decay::Slope { slope, .. } => slope >= threshold,
        };
        results.push(DirectionResult {
            direction: dir.clone(),
            decay,
            pass,
        });
    }
    Ok(ScalingReport {
        m,
        threshold,
        t_grid: t_grid.to_vec(),
        pass: results.iter().all(|r| r.pass),
        directions: results,
    })
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
