mod common;

use std::collections::BTreeMap;

use common::*;
use fracsos::extract::{certify, dinkelbach_check, extract_x, solve_program, ReportStatus, SolveOptionsExt};
use fracsos::model::{FractionalProgram, SemiAlgFunction};
use fracsos::polycore::{MomentVector, MultiIndex};
use fracsos::relax::RelaxOptions;
use fracsos::verify::{grid_oracle, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gamma_star() -> f64 {
    20f64.sqrt() / 3.0
}

#[test]
fn extract_from_point_mass() {
    let y = MomentVector::point_mass(&[2.0, -1.0], 2);
    assert_eq!(extract_x(&y, 1e-6).unwrap(), Some(vec![2.0, -1.0]));
}

#[test]
fn extract_from_rounded_moments() {
    let vals = |pairs: &[([u32; 2], f64)]| -> BTreeMap<MultiIndex, f64> {
        let mut m: BTreeMap<MultiIndex, f64> =
            fracsos::polycore::exponents_up_to(2, 2).into_iter().map(|a| (a, 0.0)).collect();
        for (a, v) in pairs {
            m.insert(MultiIndex::new(a.to_vec()), *v);
        }
        m
    };
    let y = MomentVector::new(2, 1, vals(&[([0, 0], 1.0 / 3.0), ([1, 0], 1.0 / 3.0), ([0, 1], 1.0 / 3.0)])).unwrap();
    let x = extract_x(&y, 1e-6).unwrap().unwrap();
    assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);

    let y = MomentVector::new(2, 1, vals(&[([0, 0], 0.1056), ([1, 0], -0.0403)])).unwrap();
    let x = extract_x(&y, 1e-6).unwrap().unwrap();
    assert!((x[0] + 0.3820).abs() < 1e-3, "{x:?}");
    assert_eq!(x[1], 0.0);

    let y = MomentVector::new(2, 1, vals(&[([0, 0], 1e-9), ([1, 0], 0.2)])).unwrap();
    assert_eq!(extract_x(&y, 1e-6).unwrap(), None);
}

#[test]
fn certify_examples() {
    let prog = ex2();
    let ok = certify(&prog, &[1.0, 1.0], gamma_star()).unwrap();
    assert!(ok.passed, "{:?}", ok.failures);
    assert!(ok.constraints[0].value.abs() < 1e-12);
    assert!((ok.ratio_at_xbar.unwrap() - gamma_star()).abs() < 1e-8);

    let bad = certify(&prog, &[5.0, 5.0], gamma_star()).unwrap();
    assert!(!bad.passed);
    assert!((bad.constraints[0].value - 24.0).abs() < 1e-12);

    let x = [(-3.0 + 5f64.sqrt()) / 2.0, 0.0];
    let c = certify(&ex1(), &x, 0.0558).unwrap();
    assert!((c.ratio_at_xbar.unwrap() - 0.0558).abs() < 1e-4);
}

#[test]
fn dinkelbach_signs() {
    let prog = ex2();
    let at_star = dinkelbach_check(&prog, gamma_star()).unwrap();
    assert!(at_star.abs() < 1e-5, "{at_star}");
    let at_zero = dinkelbach_check(&prog, 0.0).unwrap();
    // min ‖Q^{1/2} x‖ over the disk is positive and below the value at (1, 1)
    assert!(at_zero > 0.1 && at_zero < 20f64.sqrt(), "{at_zero}");
    let above = dinkelbach_check(&prog, gamma_star() + 0.1).unwrap();
    assert!(above < 0.0, "{above}");
}

#[test]
fn solve_reports_for_examples() {
    let r = solve_program(&ex2(), &SolveOptionsExt::default()).unwrap();
    assert_eq!(r.status, ReportStatus::Certified);
    assert!(!r.degenerate);
    let cert = r.certification.as_ref().unwrap();
    assert!(cert.dinkelbach_residual.unwrap().abs() < 1e-5);
    assert_eq!(r.z_blocks.iter().map(|z| z.name.as_str()).collect::<Vec<_>>(), ["Z2", "Z3"]);
    // known optimal Z2 for this instance
    let z2 = &r.z_blocks[0].entries;
    for (got, want) in z2.iter().zip([0.5963, 0.2981, -0.6667, 0.2981, 0.1491, -0.3333, -0.6667, -0.3333, 0.7454]) {
        assert!((got - want).abs() < 1e-3, "{z2:?}");
    }

    let r1 = solve_program(&ex1(), &SolveOptionsExt::default()).unwrap();
    assert_eq!(r1.status, ReportStatus::Certified);
    let x = r1.x_bar.unwrap();
    assert!((x[0] + 0.3820).abs() < 1e-3 && x[1].abs() < 1e-3);
}

#[test]
fn zero_numerator_gives_zero() {
    let mut prog = ex2();
    prog.numerator = SemiAlgFunction::polynomial(constant(2, 0.0));
    let r = solve_program(&prog, &SolveOptionsExt::default()).unwrap();
    assert!(r.optimal_value.unwrap().abs() < 1e-7);
    if let Some(x) = &r.x_bar {
        assert!(prog.max_constraint(x).unwrap() <= 1e-6);
    }
}

#[test]
fn scale_covariance() {
    let prog = ex2();
    let mut scaled = prog.clone();
    scaled.numerator = prog.numerator.scale(7.0);
    scaled.denominator_neg = prog.denominator_neg.scale(7.0);
    let a = solve_program(&prog, &SolveOptionsExt::default()).unwrap();
    let b = solve_program(&scaled, &SolveOptionsExt::default()).unwrap();
    assert!((a.optimal_value.unwrap() - b.optimal_value.unwrap()).abs() < 1e-6);
    for (u, v) in a.x_bar.unwrap().iter().zip(b.x_bar.unwrap()) {
        assert!((u - v).abs() < 1e-6);
    }
}

#[test]
fn lower_bound_and_extraction_feasibility_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..12 {
        let inst = random_instance(&mut rng, 1 + k % 2, 1 + (k / 2 % 2) as u32);
        let r = solve_program(&inst.prog, &SolveOptionsExt::default()).unwrap();
        let value = r.optimal_value.expect("optimal");
        if let Some(x) = &r.x_bar {
            assert!(inst.prog.max_constraint(x).unwrap() <= 1e-6, "instance {k}");
            let dk = r.certification.as_ref().unwrap().dinkelbach_residual;
            if let Some(dk) = dk {
                assert!(dk.abs() <= 1e-5, "instance {k}: {dk}");
            }
        }
        for _ in 0..20 {
            let x: Vec<f64> = inst.bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
            if inst.prog.max_constraint(&x).unwrap() <= 0.0 {
                let (ratio, _) = inst.prog.ratio(&x).unwrap();
                assert!(value <= ratio + 1e-6, "instance {k}: {value} > {ratio}");
            }
        }
    }
}

#[test]
fn oracle_on_examples() {
    let o2 = grid_oracle(&ex2(), &GridSpec::new(vec![(0.0, 2.0), (0.0, 2.0)], 201).unwrap()).unwrap();
    assert!((o2.value - 1.4907).abs() < 5e-3);
    assert!((o2.argmin[0] - 1.0).abs() < 0.02 && (o2.argmin[1] - 1.0).abs() < 0.02);

    let o1 = grid_oracle(&ex1(), &GridSpec::new(vec![(-1.5, 0.5), (-1.0, 1.0)], 201).unwrap()).unwrap();
    assert!((o1.value - 0.0558).abs() < 5e-3, "{}", o1.value);

    let one = grid_oracle(&ex2(), &GridSpec::new(vec![(1.0, 1.0), (1.0, 1.0)], 2).unwrap()).unwrap();
    assert_eq!(one.grid_points, 1);
    assert!((one.value - gamma_star()).abs() < 1e-9);
}

#[test]
fn oracle_dominates_sdp_value() {
    let r = solve_program(&ex1(), &SolveOptionsExt { relax: RelaxOptions { basis_reduction: true }, ..Default::default() })
        .unwrap();
    let o = grid_oracle(&ex1(), &GridSpec::new(vec![(-1.5, 0.5), (-1.0, 1.0)], 51).unwrap()).unwrap();
    assert!(o.value >= r.optimal_value.unwrap() - 1e-4);
}

#[test]
fn oracle_refuses_large_n() {
    let x = |k| var(4, k);
    let prog = FractionalProgram {
        n: 4,
        d: 1,
        constraints: vec![],
        numerator: SemiAlgFunction::polynomial(&x(0) * &x(0)),
        denominator_neg: SemiAlgFunction::polynomial(constant(4, -1.0)),
    };
    let err = grid_oracle(&prog, &GridSpec::new(vec![(0.0, 1.0); 4], 3).unwrap()).unwrap_err();
    assert!(err.to_string().contains("oracle limited to n <= 3"));
}
