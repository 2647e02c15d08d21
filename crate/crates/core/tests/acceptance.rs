mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use fracsos::extract::{dinkelbach_check, solve_program, SolveOptionsExt, SolveReport};
use fracsos::model::{check_assumption2, check_slater, eval_semialg, FractionalProgram};
use fracsos::polycore::{apply_ly, check_sos, MomentVector, MultiIndex, SparsePolynomial};
use fracsos::relax::{build_q, build_qhat, charnes_cooper_point, RelaxOptions};
use fracsos::sdpsolve::{solve, SolveOptions, SolveStatus};
use fracsos::verify::{grid_oracle, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Line);

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line { pass, detail: detail.into() }
}

fn timed_solve(prog: &FractionalProgram, reduction: bool) -> (SolveReport, Duration) {
    let opts = SolveOptionsExt { relax: RelaxOptions { basis_reduction: reduction }, ..Default::default() };
    let t = Instant::now();
    let r = solve_program(prog, &opts).expect("solve_program");
    (r, t.elapsed())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ex1_value() -> Line {
    let (r, dt) = timed_solve(&ex1(), true);
    let v = r.optimal_value.unwrap_or(f64::NAN);
    let x = r.x_bar.clone().unwrap_or_default();
    let ok = close(v, 0.0558, 1e-3)
        && x.len() == 2
        && close(x[0], -0.3820, 1e-3)
        && close(x[1], 0.0, 1e-3)
        && dt < Duration::from_secs(10);
    line(ok, format!("value {v:.6} x_bar {x:.6?} status {:?} in {dt:.2?}", r.status))
}

fn ex2_value() -> Line {
    let (r, dt) = timed_solve(&ex2(), false);
    let v = r.optimal_value.unwrap_or(f64::NAN);
    let x = r.x_bar.clone().unwrap_or_default();
    let ok = close(v, 1.4907, 1e-3)
        && x.len() == 2
        && close(x[0], 1.0, 1e-3)
        && close(x[1], 1.0, 1e-3)
        && dt < Duration::from_secs(5);
    line(ok, format!("value {v:.6} x_bar {x:.6?} status {:?} in {dt:.2?}", r.status))
}

fn moment_vectors() -> Line {
    let (r2, _) = timed_solve(&ex2(), false);
    let worst2 = r2.y_bar.iter().map(|e| (e.value - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    let ok2 = r2.y_bar.len() == 6 && worst2 <= 5e-3;
    let (r1, _) = timed_solve(&ex1(), true);
    let y0 = r1.moment(&[0, 0]).unwrap_or(f64::NAN);
    let y10 = r1.moment(&[1, 0]).unwrap_or(f64::NAN);
    let ok1 = close(y0, 0.1056, 5e-3) && close(y10, -0.0403, 5e-3);
    line(ok1 && ok2, format!("ex2 max |y - 1/3| = {worst2:.2e}; ex1 y0 = {y0:.4}, y10 = {y10:.4}"))
}

fn dinkelbach_zero() -> Line {
    let v = dinkelbach_check(&ex2(), 20f64.sqrt() / 3.0).expect("dinkelbach");
    line((-1e-4..=1e-4).contains(&v), format!("value {v:+.3e}"))
}

fn random_duality() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_gap: f64 = 0.0;
    let mut worst_oracle: f64 = f64::INFINITY;
    let mut bad = Vec::new();
    for k in 0..50 {
        let n = 1 + k % 2;
        let d = 1 + (k / 2 % 2) as u32;
        let inst = random_instance(&mut rng, n, d);
        let opts = RelaxOptions::default();
        let q = solve(&build_q(&inst.prog, &opts).unwrap().cp, &SolveOptions::default());
        let qh = solve(&build_qhat(&inst.prog, &opts).unwrap().cp, &SolveOptions::default());
        if q.status != SolveStatus::Optimal || qh.status != SolveStatus::Optimal {
            bad.push(format!("#{k}: {:?}/{:?}", q.status, qh.status));
            continue;
        }
        let val = q.primal_objective;
        let gap = (qh.primal_objective - val).abs() / (1.0 + val.abs());
        worst_gap = worst_gap.max(gap);
        let oracle = grid_oracle(&inst.prog, &GridSpec::new(inst.bounds.clone(), 101).unwrap()).expect("oracle");
        worst_oracle = worst_oracle.min(oracle.value - val);
        if gap > 1e-5 || oracle.value < val - 1e-4 {
            bad.push(format!("#{k}: gap {gap:.2e}, oracle - val {:.2e}", oracle.value - val));
        }
    }
    line(
        bad.is_empty(),
        format!("max rel |val(Qhat) - val(Q)| {worst_gap:.2e}; min oracle - val(Q) {worst_oracle:.2e}; bad {bad:?}"),
    )
}

fn jensen() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::INFINITY;
    for k in 0..200 {
        let n = 1 + k % 3;
        let d = 1 + (k / 3 % 2) as u32;
        let f = random_sos_convex(&mut rng, n, d);
        let atoms = rng.gen_range(1..=4);
        let mut w: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        let mut values: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for wi in &w {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            for (a, v) in MomentVector::point_mass(&x, d).entries() {
                *values.entry(a.clone()).or_default() += wi * v;
            }
        }
        if k % 2 == 1 {
            // Extra mass on x_k^{2d} keeps M(y) PSD without being a measure.
            for j in 0..n {
                let mut e = vec![0; n];
                e[j] = 2 * d;
                *values.get_mut(&MultiIndex::new(e)).unwrap() += rng.gen_range(0.0..0.5);
            }
        }
        let y = MomentVector::new(n, d, values).unwrap();
        let mean: Vec<f64> = (0..n).map(|j| apply_ly(&y, &SparsePolynomial::var(n, j)).unwrap()).collect();
        let slack = apply_ly(&y, &f).unwrap() - f.eval(&mean).unwrap();
        worst = worst.min(slack);
    }
    line(worst >= -1e-8, format!("min L_y(f) - f(L_y(x)) = {worst:+.3e} over 200 pairs"))
}

fn sos_round_trip() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for k in 0..50 {
        let n = 1 + k % 3;
        let deg = 1 + (k / 3 % 2) as u32;
        let terms = rng.gen_range(1..=3);
        let f = random_sum_of_squares(&mut rng, n, deg, terms);
        match check_sos(&f).unwrap().certificate() {
            Some(cert) => {
                let err = (&cert.reconstruct() - &f).max_abs_coef() / f.max_abs_coef().max(1.0);
                worst = worst.max(err);
            }
            None => misses += 1,
        }
    }
    let mut wrong = 0;
    for k in 0..20 {
        let n = 1 + k % 3;
        let deg = 1 + (k / 3 % 2) as u32;
        let g = random_sum_of_squares(&mut rng, n, deg, 2);
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let delta = rng.gen_range(0.1..1.0);
        let f = &g - &constant(n, g.eval(&x0).unwrap() + delta);
        if !check_sos(&f).unwrap().is_not_sos() {
            wrong += 1;
        }
    }
    line(
        worst <= 1e-8 && misses == 0 && wrong == 0,
        format!("max reconstruction error {worst:.2e}, {misses} missed SOS, {wrong} negatives not rejected"),
    )
}

fn charnes_cooper() -> Line {
    let prog = ex2();
    let rel = build_q(&prog, &RelaxOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_res, mut worst_obj): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for _ in 0..20 {
        let rho = rng.gen_range(0.0..0.95f64);
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = [2.0 + rho * th.cos(), 1.0 + rho * th.sin()];
        let v = charnes_cooper_point(&prog, &rel, &x).unwrap();
        let num = eval_semialg(&prog.numerator, &x).unwrap();
        let den = -eval_semialg(&prog.denominator_neg, &x).unwrap();
        worst_res = worst_res.max(rel.cp.feasibility_residual(&v));
        worst_obj = worst_obj.max(rel.cp.objective(&v) - num / den);
    }
    line(
        worst_res <= 1e-6 && worst_obj <= 1e-6,
        format!("max residual {worst_res:.2e}, max objective - ratio {worst_obj:+.2e}"),
    )
}

fn assumptions() -> Line {
    let prog = ex2();
    let a2 = check_assumption2(&prog);
    let margins: Vec<f64> = a2.items.iter().filter_map(|i| i.margin).collect();
    let a2_ok = a2.passed() && margins.len() == 2 && margins.iter().all(|m| *m >= 0.99);
    let f1 = eval_semialg(&prog.constraints[0], &[0.0, 0.0]).unwrap();
    let slater = check_slater(&prog, &[0.0, 0.0]).unwrap();
    line(
        a2_ok && slater.passed(),
        format!(
            "assumption2 margins {margins:?} ({}); slater at (0,0): {} with f1(0,0) = {f1}",
            if a2_ok { "pass" } else { "fail" },
            if slater.passed() { "pass" } else { "fail" },
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("ex1 value and minimizer", ex1_value),
        ("ex2 value and minimizer", ex2_value),
        ("moment vectors", moment_vectors),
        ("dinkelbach zero", dinkelbach_zero),
        ("random Q/Qhat duality and oracle", random_duality),
        ("jensen inequality", jensen),
        ("sos round trip", sos_round_trip),
        ("charnes-cooper map", charnes_cooper),
        ("assumption2 and slater", assumptions),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let l = run();
        println!("criterion {} [{}] {name}: {}", i + 1, if l.pass { "PASS" } else { "FAIL" }, l.detail);
        if !l.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
