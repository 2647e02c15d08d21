use serde::{Deserialize, Serialize};

use super::conic::{svec, ConicProgram, ProgramBuilder, Sense, SpanId, Term};
use crate::error::{Error, Result};
use crate::model::{eval_semialg_with_dual, validate_with, FractionalProgram, ValidateOptions};
use crate::polycore::{exponents_up_to, in_convex_hull, monomial_basis, BasisMatrixTable, MonomialBasis, MultiIndex};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxOptions {
    /// Restrict the moment basis to the Newton polytope of the data.
    pub basis_reduction: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxKind {
    /// Moment side, variables `y`, `Zᵢ`, `S`.
    Moment,
    /// SOS side, variables `λ`, `z`, `Uᵢ`, `X`.
    Sos,
    /// SOS side with `λ₀^{m+2}` fixed, maximizing the constant shift `t`.
    Dinkelbach,
}

/// An assembled relaxation with the monomial data needed to interpret it.
#[derive(Clone, Debug)]
pub struct Relaxation {
    pub kind: RelaxKind,
    pub cp: ConicProgram,
    pub basis: MonomialBasis,
    /// Exponents indexing `y` (or the coefficient rows), graded-lex.
    pub support: Vec<MultiIndex>,
}

fn check_structure(prog: &FractionalProgram) -> Result<()> {
    let report = validate_with(prog, &ValidateOptions { samples: 0, ..Default::default() });
    if report.passed() {
        return Ok(());
    }
    let msgs: Vec<String> = report.failures().map(|i| format!("{}: {}", i.name, i.message)).collect();
    Err(Error::Validation(msgs.join("; ")))
}

/// Moment basis and `y` support, optionally reduced to the Newton polytope.
pub fn moment_support(prog: &FractionalProgram, opts: &RelaxOptions) -> Result<(MonomialBasis, Vec<MultiIndex>)> {
    let n = prog.n;
    let mut data: Vec<MultiIndex> = Vec::new();
    for (_, f) in prog.functions() {
        for h in &f.h {
            data.extend(h.terms().map(|(a, _)| a.clone()));
        }
    }
    data.sort();
    data.dedup();
    if !opts.basis_reduction {
        let basis = monomial_basis(n, prog.d)?;
        return Ok((basis, exponents_up_to(n, 2 * prog.d)));
    }
    let vertices: Vec<Vec<f64>> =
        data.iter().map(|a| a.exponents().iter().map(|&e| e as f64).collect()).collect();
    let mut kept: Vec<MultiIndex> = exponents_up_to(n, prog.d)
        .into_iter()
        .filter(|a| {
            a.degree() <= 1 || {
                let p: Vec<f64> = a.exponents().iter().map(|&e| 2.0 * e as f64).collect();
                in_convex_hull(&p, &vertices)
            }
        })
        .collect();
    kept.sort();
    let basis = MonomialBasis::from_monomials(n, kept)?;
    let mut support = basis.pair_sums();
    support.extend(data);
    support.sort();
    support.dedup();
    Ok((basis, support))
}

fn moment_terms(f: &crate::polycore::SparsePolynomial, y: SpanId, support: &[MultiIndex]) -> Vec<Term> {
    f.terms()
        .map(|(a, c)| {
            let k = support.binary_search(a).expect("support covers every data monomial");
            (y, k, c)
        })
        .collect()
}

/// The moment relaxation: minimize `L_y(h₀^{m+1}) + ⟨A₀^{m+1}, Z_{m+1}⟩` subject to
/// the normalization row, the constraint rows, the coupling equalities and `M(y) ⪰ 0`.
pub fn build_q(prog: &FractionalProgram, opts: &RelaxOptions) -> Result<Relaxation> {
    check_structure(prog)?;
    let (basis, support) = moment_support(prog, opts)?;
    let m = prog.m();
    let mut pb = ProgramBuilder::new(Sense::Minimize);
    let y = pb.free("y", support.len());
    let mut zs: Vec<Option<SpanId>> = Vec::new();
    for (i, f) in prog.functions() {
        zs.push((f.omega.t > 0).then(|| pb.psd(format!("Z{i}"), f.omega.t)));
    }
    let s = pb.psd("S", basis.len());
    let slack = pb.nonneg("slack", m + 1);

    let funcs: Vec<_> = prog.functions().collect();
    let base = |pb: &ProgramBuilder, idx: usize| {
        let (_, f) = funcs[idx];
        let mut terms = moment_terms(&f.h[0], y, &support);
        if let Some(z) = zs[idx] {
            terms.extend(pb.inner_terms(z, &f.omega.a[0], 1.0));
        }
        terms
    };

    let mut obj = base(&pb, m);
    obj.retain(|t| t.2 != 0.0);
    pb.add_objective(obj);

    let mut den = base(&pb, m + 1);
    den.push((slack, 0, 1.0));
    pb.add_row("normalization", den, -1.0);
    for i in 0..m {
        let mut row = base(&pb, i);
        row.push((slack, i + 1, 1.0));
        pb.add_row(format!("constraint f{}", i + 1), row, 0.0);
    }
    for (idx, (i, f)) in funcs.iter().enumerate() {
        for j in 1..=f.omega.s {
            let mut row = moment_terms(&f.h[j], y, &support);
            if let Some(z) = zs[idx] {
                row.extend(pb.inner_terms(z, &f.omega.a[j], 1.0));
            }
            pb.add_row(format!("coupling f{i} h{j}"), row, 0.0);
        }
    }
    for (idx, (i, f)) in funcs.iter().enumerate() {
        for (l, b) in f.omega.b.iter().enumerate() {
            let z = zs[idx].expect("B matrices imply t > 0");
            pb.add_row(format!("lift f{i} B{}", l + 1), pb.inner_terms(z, b, 1.0), 0.0);
        }
    }
    // svec(S) = Σ_α y_α svec(B_α)
    let dim = basis.len();
    for r in 0..dim {
        for c in r..dim {
            let k = super::conic::svec_index(dim, r, c);
            let w = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
            let alpha = &basis.monomials()[r] + &basis.monomials()[c];
            let ya = support.binary_search(&alpha).expect("pair sums are in the support");
            pb.add_row(format!("moment {r},{c}"), vec![(s, k, 1.0), (y, ya, -w)], 0.0);
        }
    }
    Ok(Relaxation { kind: RelaxKind::Moment, cp: pb.build(), basis, support })
}

fn build_sos_side(prog: &FractionalProgram, opts: &RelaxOptions, gamma: Option<f64>) -> Result<Relaxation> {
    check_structure(prog)?;
    let (basis, support) = moment_support(prog, opts)?;
    let table = BasisMatrixTable::for_basis(basis.clone());
    let m = prog.m();
    let mut pb = ProgramBuilder::new(Sense::Maximize);
    let lam0 = pb.nonneg("lambda0", m + 2);
    let mut lams = Vec::new();
    let mut zs = Vec::new();
    let mut us = Vec::new();
    for (i, f) in prog.functions() {
        lams.push((f.omega.s > 0).then(|| pb.free(format!("lambda f{i}"), f.omega.s)));
        zs.push((f.omega.p > 0).then(|| pb.free(format!("z f{i}"), f.omega.p)));
        us.push((f.omega.t > 0).then(|| pb.psd(format!("U{i}"), f.omega.t)));
    }
    let x = pb.psd("X", basis.len());
    let shift = gamma.map(|_| pb.free("t", 1));

    let funcs: Vec<_> = prog.functions().collect();
    for alpha in &support {
        let mut row: Vec<Term> = Vec::new();
        for (idx, (_, f)) in funcs.iter().enumerate() {
            let c0 = f.h[0].coef(alpha);
            if c0 != 0.0 {
                row.push((lam0, idx, c0));
            }
            if let Some(l) = lams[idx] {
                for j in 1..=f.omega.s {
                    let c = f.h[j].coef(alpha);
                    if c != 0.0 {
                        row.push((l, j - 1, c));
                    }
                }
            }
        }
        if table.contains(alpha) {
            row.extend(pb.inner_terms(x, &table.get(alpha), -1.0));
        }
        if let (Some(t), true) = (shift, alpha.is_zero()) {
            row.push((t, 0, -1.0));
        }
        pb.add_row(format!("coef {alpha}"), row, 0.0);
    }
    for (idx, (i, f)) in funcs.iter().enumerate() {
        let Some(u) = us[idx] else { continue };
        let om = &f.omega;
        let a0 = svec(&om.a[0]);
        let aj: Vec<Vec<f64>> = om.a[1..].iter().map(svec).collect();
        let bl: Vec<Vec<f64>> = om.b.iter().map(svec).collect();
        for k in 0..a0.len() {
            let mut row = vec![(u, k, 1.0)];
            if a0[k] != 0.0 {
                row.push((lam0, idx, -a0[k]));
            }
            for (j, v) in aj.iter().enumerate() {
                if v[k] != 0.0 {
                    row.push((lams[idx].expect("s > 0"), j, -v[k]));
                }
            }
            for (l, v) in bl.iter().enumerate() {
                if v[k] != 0.0 {
                    row.push((zs[idx].expect("p > 0"), l, -v[k]));
                }
            }
            pb.add_row(format!("lmi f{i} {k}"), row, 0.0);
        }
    }
    pb.add_row("numerator weight", vec![(lam0, m, 1.0)], 1.0);
    let kind = match (gamma, shift) {
        (Some(g), Some(t)) => {
            pb.add_row("gamma", vec![(lam0, m + 1, 1.0)], g);
            pb.add_objective([(t, 0, 1.0)]);
            RelaxKind::Dinkelbach
        }
        _ => {
            pb.add_objective([(lam0, m + 1, 1.0)]);
            RelaxKind::Sos
        }
    };
    Ok(Relaxation { kind, cp: pb.build(), basis, support })
}

/// The SOS relaxation: maximize `λ₀^{m+2}` such that
/// `Σᵢ λ₀ⁱh₀ⁱ + Σⱼ λⱼⁱhⱼⁱ = ⟨v vᵀ, X⟩` with the LMI multipliers `Uᵢ ⪰ 0`.
pub fn build_qhat(prog: &FractionalProgram, opts: &RelaxOptions) -> Result<Relaxation> {
    build_sos_side(prog, opts, None)
}

/// The SOS bound for `min_K f_{m+1} + γ f_{m+2}`: maximize `t` with `λ₀^{m+2} = γ`.
pub fn build_dinkelbach(prog: &FractionalProgram, gamma: f64, opts: &RelaxOptions) -> Result<Relaxation> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Validation(format!("gamma must be finite and nonnegative, got {gamma}")));
    }
    build_sos_side(prog, opts, Some(gamma))
}

/// Maps a strictly feasible `x` to the moment relaxation:
/// `y = v(x)/(−f_{m+2}(x))`, `Zᵢ = Wᵢ/(−f_{m+2}(x))` with `Wᵢ` the inner duals.
pub fn charnes_cooper_point(prog: &FractionalProgram, rel: &Relaxation, x: &[f64]) -> Result<Vec<f64>> {
    if rel.kind != RelaxKind::Moment {
        return Err(Error::Validation("Charnes-Cooper point needs the moment relaxation".into()));
    }
    let m = prog.m();
    let inner: Vec<_> = prog.functions().map(|(_, f)| eval_semialg_with_dual(f, x)).collect::<Result<_>>()?;
    let den = -inner[m + 1].value;
    if !(den > 0.0) {
        return Err(Error::Validation(format!("denominator {den} is not positive at x")));
    }
    let y: Vec<f64> = rel.support.iter().map(|a| a.eval(x) / den).collect();
    let mut blocks = vec![("y".to_string(), y)];
    for ((i, _), sol) in prog.functions().zip(&inner) {
        if sol.w.dim() > 0 {
            blocks.push((format!("Z{i}"), svec(&sol.w.scale(1.0 / den))));
        }
    }
    let table = BasisMatrixTable::for_basis(rel.basis.clone());
    let mm = table.combine(|a| a.eval(x) / den);
    blocks.push(("S".into(), svec(&mm)));
    let mut slack = vec![0.0; m + 1];
    slack[0] = -(1.0 + inner[m + 1].value / den);
    for i in 0..m {
        slack[i + 1] = -inner[i].value / den;
    }
    blocks.push(("slack".into(), slack));
    rel.cp.layout.pack(&blocks)
}
