use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::basis::{monomial_basis, BasisMatrixTable, MonomialBasis};
use super::poly::{exponents_up_to, MultiIndex, SparsePolynomial};
use super::sym::SymMatrix;
use crate::error::{Error, Result};

/// Truncated moment sequence `(y_α)`, complete over its support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    n: usize,
    d: u32,
    values: BTreeMap<MultiIndex, f64>,
}

impl MomentVector {
    /// Moments over all of `ℕⁿ_{2d}`; every entry must be present.
    pub fn new(n: usize, d: u32, values: BTreeMap<MultiIndex, f64>) -> Result<Self> {
        Self::from_support(n, d, &exponents_up_to(n, 2 * d), values)
    }

    /// Moments over an explicit support (used with reduced bases).
    pub fn from_support(
        n: usize,
        d: u32,
        support: &[MultiIndex],
        values: BTreeMap<MultiIndex, f64>,
    ) -> Result<Self> {
        for alpha in support {
            if !values.contains_key(alpha) {
                return Err(Error::IncompleteMoments(alpha.to_string()));
            }
        }
        if let Some(a) = values.keys().find(|a| a.len() != n) {
            return Err(Error::Dimension { expected: n, got: a.len() });
        }
        if let Some(a) = values.keys().find(|a| a.degree() > 2 * d) {
            return Err(Error::DegreeOverflow { degree: a.degree(), bound: 2 * d });
        }
        if values.len() != support.len() {
            return Err(Error::Validation("moment vector has entries outside its support".into()));
        }
        Ok(MomentVector { n, d, values })
    }

    /// Builds the vector from values listed in the order of `support`.
    pub fn from_slice(n: usize, d: u32, support: &[MultiIndex], values: &[f64]) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::Dimension { expected: support.len(), got: values.len() });
        }
        let map = support.iter().cloned().zip(values.iter().copied()).collect();
        Self::from_support(n, d, support, map)
    }

    /// `y_α = x^α` for all `|α| ≤ 2d`.
    pub fn point_mass(x: &[f64], d: u32) -> Self {
        let n = x.len();
        let values = exponents_up_to(n, 2 * d).into_iter().map(|a| {
            let v = a.eval(x);
            (a, v)
        });
        MomentVector { n, d, values: values.collect() }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn half_degree(&self) -> u32 {
        self.d
    }

    pub fn get(&self, alpha: &MultiIndex) -> Result<f64> {
        self.values.get(alpha).copied().ok_or_else(|| Error::IncompleteMoments(alpha.to_string()))
    }

    pub fn y0(&self) -> f64 {
        self.values.get(&MultiIndex::zero(self.n)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.values.iter().map(|(a, v)| (a, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, a: f64) -> MomentVector {
        MomentVector {
            n: self.n,
            d: self.d,
            values: self.values.iter().map(|(k, v)| (k.clone(), a * v)).collect(),
        }
    }
}

/// `M_d(y) = Σ_α y_α B_α` over the canonical basis of degree `d`.
pub fn moment_matrix(y: &MomentVector) -> Result<SymMatrix> {
    moment_matrix_in(y, &monomial_basis(y.n, y.d)?)
}

/// Moment matrix indexed by an arbitrary basis.
pub fn moment_matrix_in(y: &MomentVector, basis: &MonomialBasis) -> Result<SymMatrix> {
    let table = BasisMatrixTable::for_basis(basis.clone());
    for alpha in table.support() {
        y.get(alpha)?;
    }
    Ok(table.combine(|a| y.values[a]))
}

/// Riesz functional `L_y(f) = Σ_α f_α y_α`.
pub fn apply_ly(y: &MomentVector, f: &SparsePolynomial) -> Result<f64> {
    if f.nvars() != y.n {
        return Err(Error::Dimension { expected: y.n, got: f.nvars() });
    }
    if f.degree() > 2 * y.d {
        return Err(Error::DegreeOverflow { degree: f.degree(), bound: 2 * y.d });
    }
    let mut acc = 0.0;
    for (alpha, c) in f.terms() {
        acc += c * y.get(alpha)?;
    }
    Ok(acc)
}
