use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::poly::{exponents_up_to, MultiIndex};
use super::sym::SymMatrix;
use crate::error::{Error, Result};

/// Ordered list of monomials `v(x) = (x^{b₀}, x^{b₁}, …)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialBasis {
    n: usize,
    d: u32,
    order: Vec<MultiIndex>,
}

/// Canonical basis of polynomials of degree at most `d` in `n` variables.
pub fn monomial_basis(n: usize, d: u32) -> Result<MonomialBasis> {
    if n == 0 {
        return Err(Error::Validation("number of variables must be at least 1".into()));
    }
    Ok(MonomialBasis { n, d, order: exponents_up_to(n, d) })
}

impl MonomialBasis {
    /// Basis made of the given monomials, sorted graded-lex with duplicates removed.
    pub fn from_monomials(n: usize, monomials: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("number of variables must be at least 1".into()));
        }
        let mut order: Vec<MultiIndex> = monomials.into_iter().collect();
        if let Some(bad) = order.iter().find(|a| a.len() != n) {
            return Err(Error::Dimension { expected: n, got: bad.len() });
        }
        order.sort();
        order.dedup();
        let d = order.iter().map(|a| a.degree()).max().unwrap_or(0);
        Ok(MonomialBasis { n, d, order })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    /// Largest monomial degree in the basis.
    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.order
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.order.binary_search(alpha).ok()
    }

    /// `v(x)`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.order.iter().map(|a| a.eval(x)).collect()
    }

    /// All pairwise sums `bᵢ + bⱼ`, graded-lex sorted.
    pub fn pair_sums(&self) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = Vec::new();
        for i in 0..self.order.len() {
            for j in i..self.order.len() {
                out.push(&self.order[i] + &self.order[j]);
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// The matrices `B_α` with `v(x)v(x)ᵀ = Σ_α x^α B_α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisMatrixTable {
    basis: MonomialBasis,
    /// For each α, the upper-triangle positions `(i, j)` with `bᵢ + bⱼ = α`.
    pattern: BTreeMap<MultiIndex, Vec<(usize, usize)>>,
}

pub fn basis_matrices(n: usize, d: u32) -> Result<BasisMatrixTable> {
    Ok(BasisMatrixTable::for_basis(monomial_basis(n, d)?))
}

impl BasisMatrixTable {
    pub fn for_basis(basis: MonomialBasis) -> Self {
        let mut pattern: BTreeMap<MultiIndex, Vec<(usize, usize)>> = BTreeMap::new();
        let b = basis.monomials();
        for i in 0..b.len() {
            for j in i..b.len() {
                pattern.entry(&b[i] + &b[j]).or_default().push((i, j));
            }
        }
        BasisMatrixTable { basis, pattern }
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Order of every `B_α`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Exponents α with nonzero `B_α`, graded-lex.
    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.pattern.keys()
    }

    pub fn support_len(&self) -> usize {
        self.pattern.len()
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.pattern.contains_key(alpha)
    }

    /// Upper-triangle positions of the unit entries of `B_α`.
    pub fn positions(&self, alpha: &MultiIndex) -> &[(usize, usize)] {
        self.pattern.get(alpha).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `B_α` as a dense symmetric matrix (zero when α is outside the support).
    pub fn get(&self, alpha: &MultiIndex) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.dim());
        for &(i, j) in self.positions(alpha) {
            m.set(i, j, 1.0);
        }
        m
    }

    /// `Σ_α w(α) B_α`.
    pub fn combine(&self, mut w: impl FnMut(&MultiIndex) -> f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.dim());
        for (alpha, pos) in &self.pattern {
            let v = w(alpha);
            for &(i, j) in pos {
                m.set(i, j, v);
            }
        }
        m
    }

    /// `⟨B_α, Q⟩` for a Gram-type matrix `Q`.
    pub fn inner(&self, alpha: &MultiIndex, q: &SymMatrix) -> f64 {
        self.positions(alpha)
            .iter()
            .map(|&(i, j)| if i == j { q.get(i, i) } else { 2.0 * q.get(i, j) })
            .sum()
    }
}
