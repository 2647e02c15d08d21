//! Compact LMI sets, SOS-convex semi-algebraic functions and fractional programs.

mod checks;
mod eval;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{SparsePolynomial, SymMatrix};

pub use checks::{check_assumption2, lmi_margin, check_slater, validate, validate_with, CheckItem, CheckReport, CheckStatus, ValidateOptions};
pub use eval::{box_intervals, eval_semialg, eval_semialg_sdp, eval_semialg_with_dual, InnerSolution};

/// `Ω = {y ∈ ℝˢ : ∃ z ∈ ℝᵖ, A₀ + Σ yⱼAⱼ + Σ z_ℓB_ℓ ⪰ 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LMISet {
    pub s: usize,
    pub p: usize,
    pub t: usize,
    /// `A₀, …, A_s`
    pub a: Vec<SymMatrix>,
    /// `B₁, …, B_p`
    pub b: Vec<SymMatrix>,
}

impl LMISet {
    pub fn new(a: Vec<SymMatrix>, b: Vec<SymMatrix>) -> Result<Self> {
        let Some(first) = a.first() else {
            return Err(Error::Validation("an LMI needs at least A_0".into()));
        };
        let t = first.dim();
        for m in a.iter().chain(&b) {
            if m.dim() != t {
                return Err(Error::Dimension { expected: t, got: m.dim() });
            }
        }
        Ok(LMISet { s: a.len() - 1, p: b.len(), t, a, b })
    }

    /// The empty LMI of order 0 used by pure polynomials.
    pub fn trivial() -> Self {
        LMISet { s: 0, p: 0, t: 0, a: vec![SymMatrix::zeros(0)], b: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.t == 0
    }

    /// `A₀ + Σ yⱼAⱼ + Σ z_ℓB_ℓ`
    pub fn pencil(&self, y: &[f64], z: &[f64]) -> SymMatrix {
        let mut m = self.a[0].clone();
        for (j, v) in y.iter().enumerate() {
            m.axpy(*v, &self.a[j + 1]);
        }
        for (l, v) in z.iter().enumerate() {
            m.axpy(*v, &self.b[l]);
        }
        m
    }

    /// Appends `extra` to every matrix as a direct summand (`A₀ ⊕ extra`, `Aⱼ ⊕ 0`).
    pub fn with_block(&self, extra: &SymMatrix) -> LMISet {
        let zero = SymMatrix::zeros(extra.dim());
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(j, m)| m.direct_sum(if j == 0 { extra } else { &zero }))
            .collect();
        let b = self.b.iter().map(|m| m.direct_sum(&zero)).collect();
        LMISet { s: self.s, p: self.p, t: self.t + extra.dim(), a, b }
    }
}

/// `f(x) = sup_{y ∈ Ω} h₀(x) + Σ yⱼhⱼ(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiAlgFunction {
    /// `h₀, …, h_s`
    pub h: Vec<SparsePolynomial>,
    pub omega: LMISet,
}

impl SemiAlgFunction {
    pub fn new(h: Vec<SparsePolynomial>, omega: LMISet) -> Result<Self> {
        if h.len() != omega.s + 1 {
            return Err(Error::Validation(format!(
                "function has {} polynomials but Omega has s = {}",
                h.len(),
                omega.s
            )));
        }
        Ok(SemiAlgFunction { h, omega })
    }

    /// A plain polynomial (trivial Ω).
    pub fn polynomial(h0: SparsePolynomial) -> Self {
        SemiAlgFunction { h: vec![h0], omega: LMISet::trivial() }
    }

    pub fn nvars(&self) -> usize {
        self.h[0].nvars()
    }

    pub fn degree(&self) -> u32 {
        self.h.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// `h₀ + Σ yⱼhⱼ` for a fixed `y`.
    pub fn section(&self, y: &[f64]) -> SparsePolynomial {
        let mut g = self.h[0].clone();
        for (j, v) in y.iter().enumerate() {
            g = g.add_scaled(*v, &self.h[j + 1]);
        }
        g
    }

    /// Multiplies the function by `c > 0` (scales every `hⱼ`, keeps Ω).
    pub fn scale(&self, c: f64) -> SemiAlgFunction {
        SemiAlgFunction { h: self.h.iter().map(|p| p.scale(c)).collect(), omega: self.omega.clone() }
    }
}

/// `min { f_{m+1}(x) / (−f_{m+2}(x)) : fᵢ(x) ≤ 0, i = 1..m }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalProgram {
    pub n: usize,
    pub d: u32,
    pub constraints: Vec<SemiAlgFunction>,
    pub numerator: SemiAlgFunction,
    /// `f_{m+2}`; the denominator of the ratio is `−f_{m+2}`.
    pub denominator_neg: SemiAlgFunction,
}

impl FractionalProgram {
    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// `f₁, …, f_{m+2}` with their 1-based indices.
    pub fn functions(&self) -> impl Iterator<Item = (usize, &SemiAlgFunction)> {
        self.constraints
            .iter()
            .chain([&self.numerator, &self.denominator_neg])
            .enumerate()
            .map(|(i, f)| (i + 1, f))
    }

    /// Label `f{i}` used in reports and layouts.
    pub fn label(i: usize) -> String {
        format!("f{i}")
    }

    /// `f_{m+1}(x) / (−f_{m+2}(x))` together with the denominator `−f_{m+2}(x)`.
    pub fn ratio(&self, x: &[f64]) -> Result<(f64, f64)> {
        let num = eval_semialg(&self.numerator, x)?;
        let den = -eval_semialg(&self.denominator_neg, x)?;
        Ok((num / den, den))
    }

    /// Largest constraint value `maxᵢ fᵢ(x)` (`−∞` when m = 0).
    pub fn max_constraint(&self, x: &[f64]) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for f in &self.constraints {
            worst = worst.max(eval_semialg(f, x)?);
        }
        Ok(worst)
    }
}
