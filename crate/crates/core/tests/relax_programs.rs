mod common;

use common::*;
use fracsos::relax::conic::{svec_index, ConicProgram, SpanKind};
use fracsos::relax::{build_dinkelbach, build_q, build_qhat, charnes_cooper_point, RelaxKind, RelaxOptions};
use fracsos::sdpsolve::{solve, SolveOptions, SolveStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn psd_order(cp: &ConicProgram, name: &str) -> usize {
    match cp.layout.get(name).unwrap_or_else(|| panic!("span {name}")).kind {
        SpanKind::Psd(k) => k,
        k => panic!("{name} is {k:?}"),
    }
}

fn coef(cp: &ConicProgram, row: &str, span: &str, k: usize) -> f64 {
    let r = cp.row_labels.iter().position(|l| l == row).unwrap_or_else(|| panic!("row {row}"));
    cp.a[(r, cp.layout.get(span).unwrap().offset + k)]
}

#[test]
fn ex2_moment_layout() {
    let rel = build_q(&ex2(), &RelaxOptions::default()).unwrap();
    assert_eq!(rel.kind, RelaxKind::Moment);
    let cp = &rel.cp;
    assert_eq!(cp.layout.get("y").unwrap().len, 6);
    assert!(cp.layout.get("Z1").is_none());
    assert_eq!(psd_order(cp, "Z2"), 3);
    assert_eq!(psd_order(cp, "Z3"), 4);
    assert_eq!(psd_order(cp, "S"), 3);
    assert_eq!(cp.layout.get("slack").unwrap().len, 2);
    // 2 slack rows, 2 + 2 coupling rows, 6 moment rows
    assert_eq!(cp.num_rows(), 12);
    assert_eq!(cp.row_labels.iter().filter(|l| l.starts_with("coupling")).count(), 4);
    assert_eq!(cp.row_labels.iter().filter(|l| l.starts_with("moment")).count(), 6);
    // 1 - 3 y00 + <A0^3, Z3> <= 0 becomes -3 y00 + <I, Z3> + slack = -1
    assert_eq!(coef(cp, "normalization", "y", 0), -3.0);
    assert_eq!(cp.b[0], -1.0);
    // y20 + y02 - 4 y10 - 2 y01 + 4 y00 <= 0
    let want = [4.0, -4.0, -2.0, 1.0, 0.0, 1.0];
    for (k, w) in want.iter().enumerate() {
        assert_eq!(coef(cp, "constraint f1", "y", k), *w, "y index {k}");
    }
}

#[test]
fn ex1_reduced_shapes() {
    let prog = ex1();
    let reduced = build_q(&prog, &RelaxOptions { basis_reduction: true }).unwrap();
    assert_eq!(reduced.support.len(), 15);
    assert_eq!(reduced.basis.len(), 6);
    for name in ["Z1", "Z2", "Z3"] {
        assert_eq!(psd_order(&reduced.cp, name), 4);
    }
    let names: Vec<String> = reduced.basis.monomials().iter().map(|m| m.to_string()).collect();
    let full = build_q(&prog, &RelaxOptions::default()).unwrap();
    assert_eq!(full.support.len(), 45);
    assert_eq!(full.basis.len(), 15);
    let qhat = build_qhat(&prog, &RelaxOptions { basis_reduction: true }).unwrap();
    assert_eq!(psd_order(&qhat.cp, "X"), 6, "{names:?}");
}

#[test]
fn ex2_sos_rows_follow_the_general_formula() {
    let rel = build_qhat(&ex2(), &RelaxOptions::default()).unwrap();
    let cp = &rel.cp;
    assert_eq!(psd_order(cp, "X"), 3);
    assert_eq!(psd_order(cp, "U2"), 3);
    assert_eq!(psd_order(cp, "U3"), 4);
    let r00 = "coef (0,0)";
    // 4 λ0¹ − 3 λ0³ + λ1³ + λ2³ = X11
    assert_eq!(coef(cp, r00, "lambda0", 0), 4.0);
    assert_eq!(coef(cp, r00, "lambda0", 2), -3.0);
    assert_eq!(coef(cp, r00, "lambda f3", 0), 1.0);
    assert_eq!(coef(cp, r00, "lambda f3", 1), 1.0);
    assert_eq!(coef(cp, r00, "X", svec_index(3, 0, 0)), -1.0);
    // −4 λ0¹ + 3 λ1² + λ2² − λ1³ = 2 X12
    let r10 = "coef (1,0)";
    assert_eq!(coef(cp, r10, "lambda0", 0), -4.0);
    assert_eq!(coef(cp, r10, "lambda f2", 0), 3.0);
    assert_eq!(coef(cp, r10, "lambda f2", 1), 1.0);
    assert_eq!(coef(cp, r10, "lambda f3", 0), -1.0);
    assert!((coef(cp, r10, "X", svec_index(3, 0, 1)) + 2f64.sqrt()).abs() < 1e-15);
    // λ0¹ = X22 and 0 = 2 X23
    assert_eq!(coef(cp, "coef (2,0)", "lambda0", 0), 1.0);
    assert_eq!(coef(cp, "coef (1,1)", "lambda0", 0), 0.0);
}

#[test]
fn ex2_q_and_qhat_agree() {
    let prog = ex2();
    let opts = RelaxOptions::default();
    let q = solve(&build_q(&prog, &opts).unwrap().cp, &SolveOptions::default());
    let qh = solve(&build_qhat(&prog, &opts).unwrap().cp, &SolveOptions::default());
    assert_eq!((q.status, qh.status), (SolveStatus::Optimal, SolveStatus::Optimal));
    let want = 20f64.sqrt() / 3.0;
    assert!((q.primal_objective - want).abs() < 1e-6);
    assert!((qh.primal_objective - want).abs() < 1e-6);
}

#[test]
fn weak_duality_on_feasible_points() {
    // Charnes–Cooper images are feasible for (Q); optimal (Q̂) points bound them from below.
    let prog = ex2();
    let opts = RelaxOptions::default();
    let rel = build_q(&prog, &opts).unwrap();
    let qh = build_qhat(&prog, &opts).unwrap();
    let sol = solve(&qh.cp, &SolveOptions::default());
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(qh.cp.feasibility_residual(&sol.x) < 1e-7);
    let lower = qh.cp.objective(&sol.x);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let x = [2.0 + rng.gen_range(-0.6..0.6), 1.0 + rng.gen_range(-0.6..0.6)];
        let v = charnes_cooper_point(&prog, &rel, &x).unwrap();
        assert!(rel.cp.feasibility_residual(&v) < 1e-6);
        assert!(lower <= rel.cp.objective(&v) + 1e-7);
    }
}

#[test]
fn charnes_cooper_rejects_bad_input() {
    let prog = ex2();
    let qh = build_qhat(&prog, &RelaxOptions::default()).unwrap();
    assert!(charnes_cooper_point(&prog, &qh, &[2.0, 1.0]).is_err());
    let q = build_q(&prog, &RelaxOptions::default()).unwrap();
    // −f3 < 0 far from the box center
    assert!(charnes_cooper_point(&prog, &q, &[6.0, 6.0]).is_err());
}

#[test]
fn dinkelbach_program_shape() {
    let prog = ex2();
    let rel = build_dinkelbach(&prog, 1.5, &RelaxOptions::default()).unwrap();
    assert_eq!(rel.kind, RelaxKind::Dinkelbach);
    assert_eq!(coef(&rel.cp, "coef (0,0)", "t", 0), -1.0);
    assert_eq!(coef(&rel.cp, "gamma", "lambda0", 2), 1.0);
    assert!(build_dinkelbach(&prog, -1.0, &RelaxOptions::default()).is_err());
}

#[test]
fn sparse_export_is_deterministic() {
    let a = build_q(&ex2(), &RelaxOptions::default()).unwrap().cp.to_sparse_text();
    let b = build_q(&ex2(), &RelaxOptions::default()).unwrap().cp.to_sparse_text();
    assert_eq!(a, b);
    assert!(a.starts_with("# fracsos conic program\nsense min\n"));
    assert!(a.contains("span y 0 6 free"));
}
