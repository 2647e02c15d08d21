use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eval_semialg, FractionalProgram, LMISet, SemiAlgFunction};
use crate::error::{Error, Result};
use crate::polycore::{check_sos_convex, hessian_form, SosOutcome, SparsePolynomial};
use crate::relax::conic::{ProgramBuilder, Sense};
use crate::sdpsolve::{solve, SolveOptions, SolveStatus};

pub const ASSUMPTION2_MARGIN: f64 = 1e-7;
pub const SLATER_MARGIN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub status: CheckStatus,
    pub margin: Option<f64>,
    pub message: String,
    /// Informational items do not affect [`CheckReport::passed`].
    pub informational: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    fn push(&mut self, name: impl Into<String>, status: CheckStatus, margin: Option<f64>, message: impl Into<String>) {
        self.items.push(CheckItem {
            name: name.into(),
            status,
            margin: margin.filter(|m| m.is_finite()),
            message: message.into(),
            informational: false,
        });
    }

    fn info(&mut self, name: impl Into<String>, ok: bool, margin: f64, message: impl Into<String>) {
        self.items.push(CheckItem {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            margin: Some(margin).filter(|m| m.is_finite()),
            message: message.into(),
            informational: true,
        });
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.informational || i.status == CheckStatus::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.informational && i.status != CheckStatus::Pass)
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.items.extend(other.items);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for it in &self.items {
            let status = match it.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Undetermined => "undetermined",
            };
            let margin = it.margin.map(|m| format!(" margin={m:.6e}")).unwrap_or_default();
            let info = if it.informational { " (info)" } else { "" };
            writeln!(f, "{:<28} {status}{margin}{info}  {}", it.name, it.message)?;
        }
        Ok(())
    }
}

/// Largest `τ ≤ 1` with `A₀ + Σ yⱼAⱼ + Σ z_ℓB_ℓ ⪰ τI` for some `(y, z)`.
///
/// Returns the solver status and the optimal `τ`.
pub fn lmi_margin(omega: &LMISet) -> (SolveStatus, f64) {
    let mut pb = ProgramBuilder::new(Sense::Maximize);
    let y = pb.free("y", omega.s);
    let z = pb.free("z", omega.p);
    let tau = pb.free("tau", 1);
    let cap = pb.nonneg("cap", 1);
    let slack = pb.psd("S", omega.t);
    let t = omega.t;
    for i in 0..t {
        for j in i..t {
            let k = crate::relax::conic::svec_index(t, i, j);
            let w = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
            let mut terms = vec![(slack, k, 1.0)];
            for jj in 0..omega.s {
                let v = omega.a[jj + 1].get(i, j);
                if v != 0.0 {
                    terms.push((y, jj, -w * v));
                }
            }
            for l in 0..omega.p {
                let v = omega.b[l].get(i, j);
                if v != 0.0 {
                    terms.push((z, l, -w * v));
                }
            }
            if i == j {
                terms.push((tau, 0, 1.0));
            }
            pb.add_row(format!("lmi {i},{j}"), terms, w * omega.a[0].get(i, j));
        }
    }
    pb.add_row("cap", vec![(tau, 0, 1.0), (cap, 0, 1.0)], 1.0);
    pb.add_objective([(tau, 0, 1.0)]);
    let cp = pb.build();
    let sol = solve(&cp, &SolveOptions::with_tol(1e-9));
    (sol.status, sol.primal_objective)
}

/// Strict feasibility of every LMI (interior point of each Ω).
pub fn check_assumption2(prog: &FractionalProgram) -> CheckReport {
    let mut report = CheckReport::default();
    for (i, f) in prog.functions() {
        let name = format!("assumption2 {}", FractionalProgram::label(i));
        if f.omega.is_trivial() {
            report.push(name, CheckStatus::Pass, None, "polynomial, no LMI");
            continue;
        }
        let (status, tau) = lmi_margin(&f.omega);
        match status {
            SolveStatus::Optimal if tau > ASSUMPTION2_MARGIN => {
                report.push(name, CheckStatus::Pass, Some(tau), "strictly feasible LMI")
            }
            SolveStatus::Optimal => report.push(name, CheckStatus::Fail, Some(tau.max(0.0)), "LMI has no interior point"),
            SolveStatus::Infeasible => report.push(name, CheckStatus::Fail, None, "LMI is infeasible"),
            s => report.push(name, CheckStatus::Undetermined, None, format!("solver status {s:?}")),
        }
    }
    report
}

/// Strict feasibility of `xhat` for the constraints, plus sign checks of the
/// numerator and denominator at `xhat`.
pub fn check_slater(prog: &FractionalProgram, xhat: &[f64]) -> Result<CheckReport> {
    if xhat.len() != prog.n {
        return Err(Error::Dimension { expected: prog.n, got: xhat.len() });
    }
    let mut report = CheckReport::default();
    for (i, f) in prog.constraints.iter().enumerate() {
        let v = eval_semialg(f, xhat)?;
        let status = if v < -SLATER_MARGIN { CheckStatus::Pass } else { CheckStatus::Fail };
        report.push(format!("slater {}", FractionalProgram::label(i + 1)), status, Some(-v), format!("value {v:.6e}"));
    }
    let m = prog.m();
    let num = eval_semialg(&prog.numerator, xhat)?;
    let den = -eval_semialg(&prog.denominator_neg, xhat)?;
    report.info(format!("numerator {} >= 0", FractionalProgram::label(m + 1)), num >= 0.0, num, format!("value {num:.6e}"));
    report.info(format!("denominator -{} > 0", FractionalProgram::label(m + 2)), den > 0.0, den, format!("value {den:.6e}"));
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    /// Points of Ω sampled per function for the SOS-convexity spot check (0 disables it).
    pub samples: usize,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { samples: 8, seed: 0x5eed }
    }
}

pub fn validate(prog: &FractionalProgram) -> CheckReport {
    validate_with(prog, &ValidateOptions::default())
}

fn structural_problems(prog: &FractionalProgram, f: &SemiAlgFunction) -> Vec<String> {
    let mut out = Vec::new();
    let om = &f.omega;
    if f.h.len() != om.s + 1 {
        out.push(format!("{} polynomials for s = {}", f.h.len(), om.s));
    }
    if om.a.len() != om.s + 1 {
        out.push(format!("{} A matrices for s = {}", om.a.len(), om.s));
    }
    if om.b.len() != om.p {
        out.push(format!("{} B matrices for p = {}", om.b.len(), om.p));
    }
    if om.a.iter().chain(&om.b).any(|m| m.dim() != om.t) {
        out.push(format!("matrix order differs from t = {}", om.t));
    }
    if om.t == 0 && (om.s > 0 || om.p > 0) {
        out.push("Omega with s > 0 or p > 0 needs t >= 1".into());
    }
    for (j, h) in f.h.iter().enumerate() {
        if h.nvars() != prog.n {
            out.push(format!("h{j} has {} variables, expected {}", h.nvars(), prog.n));
        }
        if h.degree() > 2 * prog.d {
            out.push(format!("h{j}: degree exceeds 2d ({} > {})", h.degree(), 2 * prog.d));
        }
    }
    out
}

/// Points of Ω maximizing random linear objectives.
fn sample_omega(omega: &LMISet, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let r: Vec<f64> = (0..omega.s).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut pb = ProgramBuilder::new(Sense::Minimize);
        let w = pb.psd("W", omega.t);
        let obj = pb.inner_terms(w, &omega.a[0], 1.0);
        pb.add_objective(obj);
        for j in 1..=omega.s {
            let terms = pb.inner_terms(w, &omega.a[j], 1.0);
            pb.add_row(format!("A{j}"), terms, -r[j - 1]);
        }
        for (l, b) in omega.b.iter().enumerate() {
            let terms = pb.inner_terms(w, b, 1.0);
            pb.add_row(format!("B{l}"), terms, 0.0);
        }
        let sol = solve(&pb.build(), &SolveOptions::with_tol(1e-9));
        match sol.status {
            // The maximizer is minus the multiplier of the A_j rows.
            SolveStatus::Optimal => out.push(sol.y[..omega.s].iter().map(|v| -v).collect()),
            SolveStatus::Infeasible => return Err(Error::OmegaNotCompact),
            SolveStatus::Unbounded => return Err(Error::EmptyOmega),
            s => return Err(Error::Solver(s)),
        }
    }
    Ok(out)
}

/// Structural checks plus a sampled SOS-convexity check of `h₀ + Σ yⱼhⱼ`.
/// Every violation is reported; nothing aborts early.
pub fn validate_with(prog: &FractionalProgram, opts: &ValidateOptions) -> CheckReport {
    let mut report = CheckReport::default();
    if prog.n == 0 {
        report.push("dimension", CheckStatus::Fail, None, "n must be at least 1");
        return report;
    }
    report.push("dimension", CheckStatus::Pass, None, format!("n = {}, d = {}", prog.n, prog.d));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut proven: Vec<SparsePolynomial> = Vec::new();
    for (i, f) in prog.functions() {
        let label = FractionalProgram::label(i);
        let problems = structural_problems(prog, f);
        if problems.is_empty() {
            report.push(format!("structure {label}"), CheckStatus::Pass, None, "ok");
        } else {
            report.push(format!("structure {label}"), CheckStatus::Fail, None, problems.join("; "));
            continue;
        }
        if opts.samples == 0 {
            continue;
        }
        let name = format!("sos-convex {label}");
        let points = if f.omega.s == 0 {
            vec![Vec::new()]
        } else {
            match sample_omega(&f.omega, opts.samples, &mut rng) {
                Ok(p) => p,
                Err(e) => {
                    report.push(name, CheckStatus::Fail, None, format!("sampling Omega: {e}"));
                    continue;
                }
            }
        };
        let mut status = CheckStatus::Pass;
        let mut message = format!("{} sample(s) SOS-convex", points.len());
        for y in &points {
            let g = f.section(y);
            let form = hessian_form(&g).prune(1e-12);
            if proven.contains(&form) {
                continue;
            }
            match check_sos_convex(&g) {
                Ok(SosOutcome::Sos(_)) => proven.push(form),
                Ok(SosOutcome::NotSos { .. }) => {
                    status = CheckStatus::Fail;
                    message = format!("not SOS-convex at y = {y:?}");
                    break;
                }
                Ok(SosOutcome::Undetermined { status: s }) => {
                    status = CheckStatus::Undetermined;
                    message = format!("undetermined at y = {y:?} ({s:?})");
                }
                Err(e) => {
                    status = CheckStatus::Fail;
                    message = e.to_string();
                    break;
                }
            }
        }
        report.push(name, status, None, message);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::SymMatrix;

    #[test]
    fn interval_margin_is_one() {
        let om = LMISet::new(vec![SymMatrix::identity(2), SymMatrix::diagonal(&[-1.0, 1.0])], vec![]).unwrap();
        let (status, tau) = lmi_margin(&om);
        assert_eq!(status, SolveStatus::Optimal);
        assert!((tau - 1.0).abs() < 1e-6, "{tau}");
    }

    #[test]
    fn flat_spectrahedron_has_zero_margin() {
        let om = LMISet::new(vec![SymMatrix::zeros(2), SymMatrix::diagonal(&[1.0, -1.0])], vec![]).unwrap();
        let (_, tau) = lmi_margin(&om);
        assert!(tau.abs() < 1e-6, "{tau}");
        assert!(tau <= ASSUMPTION2_MARGIN);
    }

    #[test]
    fn margin_ignores_redundant_identity_block() {
        let om = LMISet::new(vec![SymMatrix::identity(2), SymMatrix::diagonal(&[-1.0, 1.0])], vec![]).unwrap();
        let (_, a) = lmi_margin(&om);
        let (_, b) = lmi_margin(&om.with_block(&SymMatrix::identity(2)));
        assert!((a - b).abs() < 1e-6);
    }
}
