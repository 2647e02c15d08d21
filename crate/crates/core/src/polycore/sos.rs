//! Sum-of-squares certificates via Gram matrices.

use serde::{Deserialize, Serialize};

use super::basis::{monomial_basis, BasisMatrixTable, MonomialBasis};
use super::newton::newton_reduce;
use super::poly::{hessian, MultiIndex, SparsePolynomial};
use super::sym::SymMatrix;
use crate::error::Result;
use crate::relax::conic::{ProgramBuilder, Sense};
use crate::sdpsolve::{solve, SolveOptions, SolveStatus};

/// Infeasibility rays shorter than this are not trusted as "not SOS" evidence.
pub const NOT_SOS_MARGIN: f64 = 1e-7;

/// `f = v(x)ᵀ Q v(x)` with `Q ⪰ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramCertificate {
    pub basis: MonomialBasis,
    pub gram: SymMatrix,
}

impl GramCertificate {
    /// The polynomial `Σ_α ⟨B_α, Q⟩ x^α`.
    pub fn reconstruct(&self) -> SparsePolynomial {
        let table = BasisMatrixTable::for_basis(self.basis.clone());
        let n = self.basis.nvars();
        let terms: Vec<(MultiIndex, f64)> =
            table.support().map(|a| (a.clone(), table.inner(a, &self.gram))).collect();
        SparsePolynomial::from_terms(n, terms).expect("basis monomials share the dimension")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.gram.min_eigenvalue()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SosOutcome {
    Sos(GramCertificate),
    /// `margin` is the certificate margin of the infeasible Gram problem, absent
    /// when the rejection is structural (odd degree, monomial outside the basis).
    NotSos { margin: Option<f64> },
    Undetermined { status: SolveStatus },
}

impl SosOutcome {
    pub fn is_sos(&self) -> bool {
        matches!(self, SosOutcome::Sos(_))
    }

    pub fn is_not_sos(&self) -> bool {
        matches!(self, SosOutcome::NotSos { .. })
    }

    pub fn certificate(&self) -> Option<&GramCertificate> {
        match self {
            SosOutcome::Sos(c) => Some(c),
            _ => None,
        }
    }
}

fn gram_opts() -> SolveOptions {
    SolveOptions::with_tol(1e-10)
}

/// Searches for `Q ⪰ 0` with `f = v(x)ᵀQv(x)` over the given basis.
///
/// The search runs over the Newton-polytope reduction of `basis`; the returned
/// Gram matrix is expressed in `basis`, with zero rows for pruned monomials.
pub fn gram_feasibility(f: &SparsePolynomial, basis: &MonomialBasis) -> SosOutcome {
    let full = BasisMatrixTable::for_basis(basis.clone());
    if f.terms().any(|(a, _)| !full.contains(a)) {
        return SosOutcome::NotSos { margin: None };
    }
    let scale = f.max_abs_coef();
    if scale == 0.0 {
        let gram = SymMatrix::zeros(basis.len());
        return SosOutcome::Sos(GramCertificate { basis: basis.clone(), gram });
    }
    let support: Vec<MultiIndex> = f.terms().map(|(a, _)| a.clone()).collect();
    let kept = newton_reduce(&support, basis.monomials());
    let reduced = MonomialBasis::from_monomials(basis.nvars(), kept).expect("subset of a valid basis");
    let table = BasisMatrixTable::for_basis(reduced.clone());
    if reduced.is_empty() || f.terms().any(|(a, _)| !table.contains(a)) {
        return SosOutcome::NotSos { margin: None };
    }
    let mut pb = ProgramBuilder::new(Sense::Minimize);
    let q = pb.psd("Q", reduced.len());
    for alpha in table.support() {
        let terms = pb.inner_terms(q, &table.get(alpha), 1.0);
        pb.add_row(format!("coef {alpha}"), terms, f.coef(alpha) / scale);
    }
    let cp = pb.build();
    let sol = solve(&cp, &gram_opts());
    match sol.status {
        SolveStatus::Optimal => {
            let small = cp.layout.matrix("Q", &sol.x).expect("Q span").scale(scale);
            let pos: Vec<usize> =
                reduced.monomials().iter().map(|m| basis.position(m).expect("pruned basis")).collect();
            let mut gram = SymMatrix::zeros(basis.len());
            for i in 0..pos.len() {
                for j in i..pos.len() {
                    gram.set(pos[i], pos[j], small.get(i, j));
                }
            }
            SosOutcome::Sos(GramCertificate { basis: basis.clone(), gram })
        }
        SolveStatus::Infeasible => {
            let margin = sol.certificate.as_ref().map(|c| c.margin).unwrap_or(0.0);
            if margin > NOT_SOS_MARGIN {
                SosOutcome::NotSos { margin: Some(margin) }
            } else {
                SosOutcome::Undetermined { status: sol.status }
            }
        }
        status => SosOutcome::Undetermined { status },
    }
}

/// Decides whether `f` is a sum of squares (Gram basis `ℕⁿ_{deg f / 2}`).
pub fn check_sos(f: &SparsePolynomial) -> Result<SosOutcome> {
    let deg = f.degree();
    if deg % 2 == 1 {
        return Ok(SosOutcome::NotSos { margin: None });
    }
    let basis = monomial_basis(f.nvars(), deg / 2)?;
    Ok(gram_feasibility(f, &basis))
}

/// `g(x, w) = wᵀ ∇²f(x) w` in the variables `(x, w)`.
pub fn hessian_form(f: &SparsePolynomial) -> SparsePolynomial {
    let n = f.nvars();
    let h = hessian(f);
    let mut g = SparsePolynomial::zero(2 * n);
    for i in 0..n {
        for j in 0..n {
            if h[i][j].is_zero() {
                continue;
            }
            let wi = SparsePolynomial::var(2 * n, n + i);
            let wj = SparsePolynomial::var(2 * n, n + j);
            g = &g + &(&(&h[i][j].lift(n) * &wi) * &wj);
        }
    }
    g
}

/// SOS-convexity test: `f` is SOS-convex iff `wᵀ∇²f(x)w` is SOS in `(x, w)`.
pub fn check_sos_convex(f: &SparsePolynomial) -> Result<SosOutcome> {
    let n = f.nvars();
    let g = hessian_form(f);
    let hdeg = if g.is_zero() { 0 } else { g.degree() - 2 };
    if f.degree() <= 1 || g.is_zero() {
        let basis = MonomialBasis::from_monomials(2 * n, (0..n).map(|k| MultiIndex::unit(2 * n, n + k)))?;
        let gram = SymMatrix::zeros(basis.len());
        return Ok(SosOutcome::Sos(GramCertificate { basis, gram }));
    }
    if hdeg % 2 == 1 {
        return Ok(SosOutcome::NotSos { margin: None });
    }
    let xs = monomial_basis(n, hdeg / 2)?;
    let monomials = (0..n).flat_map(|k| {
        let w = MultiIndex::unit(n, k);
        xs.monomials().iter().map(move |a| a.concat(&w)).collect::<Vec<_>>()
    });
    let basis = MonomialBasis::from_monomials(2 * n, monomials)?;
    Ok(gram_feasibility(&g, &basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, k: usize) -> SparsePolynomial {
        SparsePolynomial::var(n, k)
    }

    #[test]
    fn square_has_diagonal_gram() {
        let f = x(2, 0).pow(2);
        let out = check_sos(&f).unwrap();
        let cert = out.certificate().expect("x1^2 is SOS");
        let want = SymMatrix::diagonal(&[0.0, 1.0, 0.0]);
        let mut diff = cert.gram.clone();
        diff.axpy(-1.0, &want);
        assert!(diff.max_abs() < 1e-6, "{:?}", cert.gram);
    }

    #[test]
    fn negative_at_origin_is_not_sos() {
        let f = &x(1, 0).pow(2) - &SparsePolynomial::constant(1, 1.0);
        let out = check_sos(&f).unwrap();
        assert!(out.is_not_sos(), "{out:?}");
    }

    #[test]
    fn odd_degree_is_not_sos() {
        assert!(check_sos(&x(1, 0).pow(3)).unwrap().is_not_sos());
    }

    #[test]
    fn gram_reconstruction_matches() {
        let q = &(&x(2, 0) * &x(2, 1)) - &SparsePolynomial::constant(2, 0.5);
        let f = &(&q * &q) + &(&x(2, 1) + &SparsePolynomial::constant(2, 2.0)).pow(2);
        let cert = check_sos(&f).unwrap().certificate().cloned().expect("SOS");
        let diff = &cert.reconstruct() - &f;
        assert!(diff.max_abs_coef() < 1e-8 * f.max_abs_coef());
        assert!(cert.min_eigenvalue() > -1e-8);
    }

    #[test]
    fn sos_convexity_examples() {
        let f = &x(2, 0).pow(2) + &x(2, 1).pow(2);
        assert!(check_sos_convex(&f).unwrap().is_sos());

        let g = &(&(&x(2, 0).pow(8) + &x(2, 0).pow(2)) + &(&x(2, 0) * &x(2, 1))) + &x(2, 1).pow(2);
        assert!(check_sos_convex(&g).unwrap().is_sos());

        assert!(check_sos_convex(&x(1, 0).pow(3)).unwrap().is_not_sos());
        assert!(check_sos_convex(&x(2, 1)).unwrap().is_sos());
    }

    #[test]
    fn hessian_form_of_quartic() {
        // f = x⁴: g = 12 x² w²
        let g = hessian_form(&x(1, 0).pow(4));
        assert_eq!(g, SparsePolynomial::monomial(MultiIndex::new(vec![2, 2]), 12.0));
    }
}
