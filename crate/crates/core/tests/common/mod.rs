#![allow(dead_code)]

use std::path::PathBuf;

use fracsos::cli::load_problem;
use fracsos::model::{FractionalProgram, LMISet, SemiAlgFunction};
use fracsos::polycore::{MultiIndex, SparsePolynomial, SymMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn example_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

pub fn ex1() -> FractionalProgram {
    load_problem(&example_path("ex1.json")).expect("ex1.json")
}

pub fn ex2() -> FractionalProgram {
    load_problem(&example_path("ex2.json")).expect("ex2.json")
}

pub fn var(n: usize, k: usize) -> SparsePolynomial {
    SparsePolynomial::var(n, k)
}

pub fn constant(n: usize, c: f64) -> SparsePolynomial {
    SparsePolynomial::constant(n, c)
}

/// `a·x + b`
pub fn affine(a: &[f64], b: f64) -> SparsePolynomial {
    let n = a.len();
    a.iter().enumerate().fold(constant(n, b), |acc, (k, c)| acc.add_scaled(*c, &var(n, k)))
}

/// `[−1, 1]^s` as a diagonal LMI of order `2s`.
pub fn box_omega(s: usize) -> LMISet {
    let mut a = vec![SymMatrix::identity(2 * s)];
    for j in 0..s {
        let mut d = vec![0.0; 2 * s];
        d[2 * j] = -1.0;
        d[2 * j + 1] = 1.0;
        a.push(SymMatrix::diagonal(&d));
    }
    LMISet::new(a, vec![]).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Random SOS-convex polynomial of degree `2d`: a convex quadratic, powers of
/// linear forms, and `Σ x_k^{2d}` so the Newton polytope is full.
pub fn random_sos_convex(rng: &mut ChaCha8Rng, n: usize, d: u32) -> SparsePolynomial {
    let mut f = SparsePolynomial::zero(n);
    for _ in 0..n {
        let a: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
        f = &f + &affine(&a, uniform(rng, -0.5, 0.5)).pow(2);
    }
    if d >= 2 {
        let a: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
        f = f.add_scaled(uniform(rng, 0.1, 1.0), &affine(&a, uniform(rng, -0.5, 0.5)).pow(2 * d));
    }
    for k in 0..n {
        f = f.add_scaled(uniform(rng, 0.1, 0.5), &var(n, k).pow(2 * d));
    }
    f
}

/// Upper bound of `|p|` on the box `Π [c_k − r, c_k + r]`.
fn abs_bound(p: &SparsePolynomial, c: &[f64], r: f64) -> f64 {
    p.terms()
        .map(|(a, v)| {
            v.abs() * a.exponents().iter().zip(c).map(|(&e, ck)| (ck.abs() + r).powi(e as i32)).product::<f64>()
        })
        .sum()
}

pub struct RandomInstance {
    pub prog: FractionalProgram,
    /// Box containing the feasible set.
    pub bounds: Vec<(f64, f64)>,
    pub center: Vec<f64>,
}

/// Ball constraint, numerator `g + Σ|affine|` with `g` SOS-convex, and
/// denominator `−(q + Σ|affine| − M)` with `M` large enough on the ball.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, d: u32) -> RandomInstance {
    let center: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let r = uniform(rng, 0.3, 1.0);
    let ball = (0..n).fold(constant(n, -r * r), |acc, k| &acc + &(&var(n, k) - &constant(n, center[k])).pow(2));
    let s = rng.gen_range(1..=2usize);
    let aff = |rng: &mut ChaCha8Rng| {
        let a: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
        affine(&a, uniform(rng, -0.5, 0.5))
    };
    let mut hn = vec![random_sos_convex(rng, n, d)];
    hn.extend((0..s).map(|_| aff(rng)));
    let numerator = SemiAlgFunction::new(hn, box_omega(s)).unwrap();

    let q = random_sos_convex(rng, n, 1).scale(uniform(rng, 0.1, 1.0));
    let mut hd = vec![q.clone()];
    hd.extend((0..s).map(|_| aff(rng)));
    let bound = hd.iter().map(|p| abs_bound(p, &center, r)).sum::<f64>();
    hd[0] = &q - &constant(n, bound + uniform(rng, 0.5, 2.0));
    let denominator_neg = SemiAlgFunction::new(hd, box_omega(s)).unwrap();

    let prog = FractionalProgram {
        n,
        d,
        constraints: vec![SemiAlgFunction::polynomial(ball)],
        numerator,
        denominator_neg,
    };
    let bounds = center.iter().map(|c| (c - r, c + r)).collect();
    RandomInstance { prog, bounds, center }
}

/// Random polynomial with terms of degree `≤ deg`.
pub fn random_poly(rng: &mut ChaCha8Rng, n: usize, deg: u32) -> SparsePolynomial {
    let terms: Vec<(MultiIndex, f64)> = fracsos::polycore::exponents_up_to(n, deg)
        .into_iter()
        .map(|a| (a, uniform(rng, -1.0, 1.0)))
        .collect();
    SparsePolynomial::from_terms(n, terms).unwrap()
}

/// `Σ qᵢ²` with `k` random `qᵢ` of degree `≤ deg`.
pub fn random_sum_of_squares(rng: &mut ChaCha8Rng, n: usize, deg: u32, k: usize) -> SparsePolynomial {
    (0..k).fold(SparsePolynomial::zero(n), |acc, _| &acc + &random_poly(rng, n, deg).pow(2))
}

pub fn in_bounds(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
}
