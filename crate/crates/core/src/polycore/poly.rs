use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector `α ∈ ℕⁿ`.
///
/// Ordered graded-lexicographically: by total degree first, then by the first
/// differing exponent, larger exponent first. For `n = 2` this gives
/// `1, x₁, x₂, x₁², x₁x₂, x₂², …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit multi-index `e_k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![0; n];
        v[k] = 1;
        MultiIndex(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Evaluates the monomial `x^α`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &xi)| if a == 0 { 1.0 } else { xi.powi(a as i32) }).product()
    }

    /// Concatenation `(α, β)` as an index in `n + m` variables.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.0.len(), rhs.0.len(), "multi-index length mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| {
                for (a, b) in self.0.iter().zip(&other.0) {
                    match b.cmp(a) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.0.len().cmp(&other.0.len()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All `α ∈ ℕⁿ` with `|α| = deg`, in graded-lex order.
pub fn exponents_of_degree(n: usize, deg: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if n == 1 {
            prefix.push(deg);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=deg).rev() {
            prefix.push(a);
            rec(n - 1, deg - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, deg, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `ℕⁿ_d` in graded-lex order.
pub fn exponents_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
    (0..=d).flat_map(|k| exponents_of_degree(n, k)).collect()
}

/// Real polynomial stored as a map from exponent to nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsePolynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl SparsePolynomial {
    pub fn zero(n: usize) -> Self {
        SparsePolynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    /// The coordinate polynomial `x_k`.
    pub fn var(n: usize, k: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::unit(n, k), 1.0);
        p
    }

    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Self::zero(alpha.len());
        p.add_term(alpha, c);
        p
    }

    /// Builds a polynomial, summing repeated exponents and dropping zeros.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(Error::Dimension { expected: n, got: alpha.len() });
            }
            if !c.is_finite() {
                return Err(Error::Validation(format!("non-finite coefficient at {alpha}")));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        debug_assert_eq!(alpha.len(), self.n);
        let entry = self.terms.entry(alpha.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&alpha);
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|α|` over stored terms (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.degree()).max().unwrap_or(0)
    }

    pub fn coef(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, c)| (a, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: x.len() });
        }
        Ok(self.terms.iter().map(|(a, c)| c * a.eval(x)).sum())
    }

    pub fn scale(&self, a: f64) -> SparsePolynomial {
        if a == 0.0 {
            return Self::zero(self.n);
        }
        SparsePolynomial { n: self.n, terms: self.terms.iter().map(|(k, v)| (k.clone(), a * v)).collect() }
    }

    /// `self + a * other`
    pub fn add_scaled(&self, a: f64, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.n, other.n, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), a * v);
        }
        out
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn prune(&self, tol: f64) -> SparsePolynomial {
        SparsePolynomial {
            n: self.n,
            terms: self.terms.iter().filter(|(_, v)| v.abs() > tol).map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }

    /// Partial derivative `∂/∂x_k`.
    pub fn derivative(&self, k: usize) -> SparsePolynomial {
        let mut out = Self::zero(self.n);
        for (alpha, c) in &self.terms {
            let e = alpha.exponents()[k];
            if e == 0 {
                continue;
            }
            let mut ex = alpha.exponents().to_vec();
            ex[k] -= 1;
            out.add_term(MultiIndex::new(ex), c * e as f64);
        }
        out
    }

    /// Re-embeds the polynomial in `n + extra` variables (new variables appended).
    pub fn lift(&self, extra: usize) -> SparsePolynomial {
        let pad = MultiIndex::zero(extra);
        SparsePolynomial {
            n: self.n + extra,
            terms: self.terms.iter().map(|(a, c)| (a.concat(&pad), *c)).collect(),
        }
    }

    fn product(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.n, other.n, "polynomial dimension mismatch");
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> SparsePolynomial {
        let mut out = Self::constant(self.n, 1.0);
        for _ in 0..k {
            out = out.product(self);
        }
        out
    }
}

impl Add for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        self.product(rhs)
    }
}

impl Neg for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        self.scale(-1.0)
    }
}

impl Add for SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: SparsePolynomial) -> SparsePolynomial {
        &self + &rhs
    }
}

impl Sub for SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: SparsePolynomial) -> SparsePolynomial {
        &self - &rhs
    }
}

impl Mul for SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, rhs: SparsePolynomial) -> SparsePolynomial {
        &self * &rhs
    }
}

/// Evaluates `f` at `x`.
pub fn eval_poly(f: &SparsePolynomial, x: &[f64]) -> Result<f64> {
    f.eval(x)
}

/// Symbolic Hessian `∇²f` as an `n × n` matrix of polynomials.
pub fn hessian(f: &SparsePolynomial) -> Vec<Vec<SparsePolynomial>> {
    let n = f.nvars();
    let grad: Vec<SparsePolynomial> = (0..n).map(|i| f.derivative(i)).collect();
    (0..n).map(|i| (0..n).map(|j| grad[i].derivative(j)).collect()).collect()
}
