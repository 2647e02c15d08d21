//! Newton-polytope pruning of monomial bases.

use std::collections::BTreeSet;

use super::poly::MultiIndex;
use crate::relax::conic::{ProgramBuilder, Sense};
use crate::sdpsolve::{solve, SolveOptions, SolveStatus};

/// True unless an LP proves `point ∉ conv(vertices)`.
pub fn in_convex_hull(point: &[f64], vertices: &[Vec<f64>]) -> bool {
    if vertices.is_empty() {
        return false;
    }
    if vertices.iter().any(|v| v.as_slice() == point) {
        return true;
    }
    let dim = point.len();
    for k in 0..dim {
        let lo = vertices.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
        let hi = vertices.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
        if point[k] < lo || point[k] > hi {
            return false;
        }
    }
    let mut pb = ProgramBuilder::new(Sense::Minimize);
    let lam = pb.nonneg("lambda", vertices.len());
    pb.add_row("sum", (0..vertices.len()).map(|i| (lam, i, 1.0)).collect(), 1.0);
    for k in 0..dim {
        let terms = vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v[k] != 0.0)
            .map(|(i, v)| (lam, i, v[k]))
            .collect();
        pb.add_row(format!("coord {k}"), terms, point[k]);
    }
    let sol = solve(&pb.build(), &SolveOptions::default());
    sol.status != SolveStatus::Infeasible
}

/// Candidates `m` with `2m ∈ conv(support)`, followed by removal of monomials
/// whose diagonal Gram entry is forced to zero.
pub fn newton_reduce(support: &[MultiIndex], candidates: &[MultiIndex]) -> Vec<MultiIndex> {
    let vertices: Vec<Vec<f64>> =
        support.iter().map(|a| a.exponents().iter().map(|&e| e as f64).collect()).collect();
    let mut basis: Vec<MultiIndex> = candidates
        .iter()
        .filter(|m| {
            let p: Vec<f64> = m.exponents().iter().map(|&e| 2.0 * e as f64).collect();
            in_convex_hull(&p, &vertices)
        })
        .cloned()
        .collect();
    let supp: BTreeSet<&MultiIndex> = support.iter().collect();
    loop {
        let keep: Vec<bool> = basis
            .iter()
            .map(|m| {
                let sq = m + m;
                if supp.contains(&sq) {
                    return true;
                }
                basis.iter().enumerate().any(|(i, a)| {
                    basis[i + 1..].iter().any(|b| a != b && (a + b) == sq)
                })
            })
            .collect();
        if keep.iter().all(|k| *k) {
            break;
        }
        basis = basis.into_iter().zip(keep).filter(|(_, k)| *k).map(|(m, _)| m).collect();
    }
    basis
}
