use serde::{Deserialize, Serialize};

use super::{LMISet, SemiAlgFunction};
use crate::error::{Error, Result};
use crate::polycore::SymMatrix;
use crate::relax::conic::{ProgramBuilder, Sense};
use crate::sdpsolve::{solve, SolveOptions, SolveStatus};

/// Value of `f(x)` together with a maximizing dual matrix `W ⪰ 0` satisfying
/// `⟨Aⱼ, W⟩ = −hⱼ(x)`, `⟨B_ℓ, W⟩ = 0` and `h₀(x) + ⟨A₀, W⟩ = f(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSolution {
    pub value: f64,
    pub w: SymMatrix,
}

fn inner_opts() -> SolveOptions {
    SolveOptions::with_tol(1e-10)
}

/// Per-coordinate bounds `[lo_j, hi_j]` with the rows that attain them, when Ω
/// is a box given by a diagonal LMI in which every row involves one `yⱼ`.
///
/// `Ok(None)` means the fast path does not apply.
#[allow(clippy::type_complexity)]
pub fn box_intervals(omega: &LMISet) -> Result<Option<Vec<((f64, usize), (f64, usize))>>> {
    if omega.p > 0 || omega.t == 0 || !omega.a.iter().all(SymMatrix::is_diagonal) {
        return Ok(None);
    }
    let mut bounds = vec![((f64::NEG_INFINITY, usize::MAX), (f64::INFINITY, usize::MAX)); omega.s];
    for k in 0..omega.t {
        let a0 = omega.a[0].get(k, k);
        let active: Vec<usize> = (1..=omega.s).filter(|&j| omega.a[j].get(k, k) != 0.0).collect();
        match active.as_slice() {
            [] if a0 < 0.0 => return Err(Error::EmptyOmega),
            [] => {}
            [j] => {
                let a = omega.a[*j].get(k, k);
                let bound = -a0 / a;
                let (lo, hi) = &mut bounds[j - 1];
                if a > 0.0 && bound > lo.0 {
                    *lo = (bound, k);
                } else if a < 0.0 && bound < hi.0 {
                    *hi = (bound, k);
                }
            }
            _ => return Ok(None),
        }
    }
    if bounds.iter().any(|(lo, hi)| !lo.0.is_finite() || !hi.0.is_finite()) {
        return Ok(None);
    }
    if bounds.iter().any(|(lo, hi)| lo.0 > hi.0) {
        return Err(Error::EmptyOmega);
    }
    Ok(Some(bounds))
}

fn h_values(f: &SemiAlgFunction, x: &[f64]) -> Result<Vec<f64>> {
    f.h.iter().map(|p| p.eval(x)).collect()
}

/// `f(x)`; closed form for box-type Ω, otherwise one small SDP.
pub fn eval_semialg(f: &SemiAlgFunction, x: &[f64]) -> Result<f64> {
    let hv = h_values(f, x)?;
    if f.omega.is_trivial() {
        return Ok(hv[0]);
    }
    if let Some(bounds) = box_intervals(&f.omega)? {
        let sup: f64 = bounds.iter().zip(&hv[1..]).map(|((lo, hi), h)| (lo.0 * h).max(hi.0 * h)).sum();
        return Ok(hv[0] + sup);
    }
    Ok(solve_inner(f, &hv)?.value)
}

/// `f(x)` with the dual matrix `W` of the inner problem.
pub fn eval_semialg_with_dual(f: &SemiAlgFunction, x: &[f64]) -> Result<InnerSolution> {
    let hv = h_values(f, x)?;
    if f.omega.is_trivial() {
        return Ok(InnerSolution { value: hv[0], w: SymMatrix::zeros(0) });
    }
    if let Some(bounds) = box_intervals(&f.omega)? {
        let mut w = SymMatrix::zeros(f.omega.t);
        let mut value = hv[0];
        for (j, ((lo, hi), h)) in bounds.iter().zip(&hv[1..]).enumerate() {
            let (bound, row) = if *h > 0.0 {
                *hi
            } else if *h < 0.0 {
                *lo
            } else {
                continue;
            };
            value += bound * h;
            let a = f.omega.a[j + 1].get(row, row);
            w.add_to(row, row, -h / a);
        }
        return Ok(InnerSolution { value, w });
    }
    solve_inner(f, &hv)
}

/// `f(x)` through the inner SDP even when a closed form exists.
pub fn eval_semialg_sdp(f: &SemiAlgFunction, x: &[f64]) -> Result<InnerSolution> {
    let hv = h_values(f, x)?;
    if f.omega.is_trivial() {
        return Ok(InnerSolution { value: hv[0], w: SymMatrix::zeros(0) });
    }
    solve_inner(f, &hv)
}

/// `min ⟨A₀, W⟩ s.t. ⟨Aⱼ, W⟩ = −hⱼ(x), ⟨B_ℓ, W⟩ = 0, W ⪰ 0`.
fn solve_inner(f: &SemiAlgFunction, hv: &[f64]) -> Result<InnerSolution> {
    let om = &f.omega;
    let mut pb = ProgramBuilder::new(Sense::Minimize);
    let w = pb.psd("W", om.t);
    let obj = pb.inner_terms(w, &om.a[0], 1.0);
    pb.add_objective(obj);
    for j in 1..=om.s {
        let terms = pb.inner_terms(w, &om.a[j], 1.0);
        pb.add_row(format!("A{j}"), terms, -hv[j]);
    }
    for (l, b) in om.b.iter().enumerate() {
        let terms = pb.inner_terms(w, b, 1.0);
        pb.add_row(format!("B{}", l + 1), terms, 0.0);
    }
    let cp = pb.build();
    let sol = solve(&cp, &inner_opts());
    match sol.status {
        SolveStatus::Optimal => Ok(InnerSolution {
            value: hv[0] + sol.primal_objective,
            w: cp.layout.matrix("W", &sol.x).expect("W span"),
        }),
        SolveStatus::Infeasible => Err(Error::OmegaNotCompact),
        SolveStatus::Unbounded => Err(Error::EmptyOmega),
        status => Err(Error::Solver(status)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::SparsePolynomial;

    fn box_omega() -> LMISet {
        let a0 = SymMatrix::identity(4);
        let a1 = SymMatrix::diagonal(&[-1.0, 1.0, 0.0, 0.0]);
        let a2 = SymMatrix::diagonal(&[0.0, 0.0, -1.0, 1.0]);
        LMISet::new(vec![a0, a1, a2], vec![]).unwrap()
    }

    fn ball_omega() -> LMISet {
        let a1 = SymMatrix::from_row_major(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let a2 = SymMatrix::from_row_major(3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        LMISet::new(vec![SymMatrix::identity(3), a1, a2], vec![]).unwrap()
    }

    fn abs_sum() -> SemiAlgFunction {
        let h = vec![SparsePolynomial::zero(2), SparsePolynomial::var(2, 0), SparsePolynomial::var(2, 1)];
        SemiAlgFunction::new(h, box_omega()).unwrap()
    }

    #[test]
    fn box_closed_form_matches_sdp() {
        let f = abs_sum();
        for x in [[0.3, -1.2], [-2.0, 0.0], [0.0, 0.0]] {
            let fast = eval_semialg_with_dual(&f, &x).unwrap();
            let sdp = eval_semialg_sdp(&f, &x).unwrap();
            let want = x[0].abs() + x[1].abs();
            assert!((fast.value - want).abs() < 1e-14);
            assert!((sdp.value - want).abs() < 1e-8, "{} vs {want}", sdp.value);
            for j in 1..=2 {
                assert!((f.omega.a[j].inner(&fast.w) + x[j - 1]).abs() < 1e-14);
            }
            assert!(fast.w.min_eigenvalue() >= 0.0);
        }
    }

    #[test]
    fn ball_gives_euclidean_norm() {
        let h = vec![
            SparsePolynomial::zero(2),
            &SparsePolynomial::var(2, 0).scale(3.0) + &SparsePolynomial::var(2, 1),
            &SparsePolynomial::var(2, 0) + &SparsePolynomial::var(2, 1),
        ];
        let f = SemiAlgFunction::new(h, ball_omega()).unwrap();
        let v = eval_semialg(&f, &[1.0, 1.0]).unwrap();
        assert!((v - 20f64.sqrt()).abs() < 1e-8, "{v}");
        let inner = eval_semialg_with_dual(&f, &[1.0, 1.0]).unwrap();
        assert!(inner.w.min_eigenvalue() > -1e-9);
        assert!((f.omega.a[1].inner(&inner.w) + 4.0).abs() < 1e-8);
    }

    #[test]
    fn empty_and_unbounded_sets() {
        let neg = LMISet::new(vec![SymMatrix::diagonal(&[-1.0]), SymMatrix::diagonal(&[0.0])], vec![]).unwrap();
        let h = vec![SparsePolynomial::zero(1), SparsePolynomial::var(1, 0)];
        let f = SemiAlgFunction::new(h.clone(), neg).unwrap();
        assert!(matches!(eval_semialg(&f, &[1.0]), Err(Error::EmptyOmega)));

        // y ≥ 0 only: sup of y·x is unbounded for x > 0.
        let half = LMISet::new(vec![SymMatrix::diagonal(&[0.0]), SymMatrix::diagonal(&[1.0])], vec![]).unwrap();
        let f = SemiAlgFunction::new(h, half).unwrap();
        assert!(matches!(eval_semialg(&f, &[1.0]), Err(Error::OmegaNotCompact)));
        assert!(eval_semialg(&f, &[-1.0]).unwrap().abs() < 1e-8);
    }
}
