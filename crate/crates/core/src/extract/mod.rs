//! Recovery of the minimizer from the moment relaxation and its certification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eval_semialg, FractionalProgram};
use crate::polycore::{MomentVector, MultiIndex};
use crate::relax::{build_dinkelbach, build_q, RelaxOptions, Relaxation};
use crate::sdpsolve::{solve, SolveOptions, SolveStatus};

pub const DEGENERACY_TOL: f64 = 1e-6;
pub const FEASIBILITY_TOL: f64 = 1e-6;
pub const RATIO_TOL: f64 = 1e-5;

/// `x̄ = (y_{e₁}, …, y_{eₙ}) / y₀`, or `None` when `|y₀| ≤ tol0`.
pub fn extract_x(y: &MomentVector, tol0: f64) -> Result<Option<Vec<f64>>> {
    let y0 = y.y0();
    if y0.abs() <= tol0 {
        return Ok(None);
    }
    let n = y.nvars();
    (0..n).map(|k| Ok(y.get(&MultiIndex::unit(n, k))? / y0)).collect::<Result<Vec<_>>>().map(Some)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub label: String,
    pub value: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub constraints: Vec<ConstraintCheck>,
    /// `−f_{m+2}(x̄)`
    pub denominator: f64,
    pub ratio_at_xbar: Option<f64>,
    pub ratio_gap: Option<f64>,
    pub dinkelbach_residual: Option<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Feasibility of `x̄`, positivity of the denominator and agreement of the ratio with `sdp_value`.
pub fn certify(prog: &FractionalProgram, x_bar: &[f64], sdp_value: f64) -> Result<Certification> {
    let mut failures = Vec::new();
    let mut constraints = Vec::with_capacity(prog.m());
    for (i, f) in prog.constraints.iter().enumerate() {
        let value = eval_semialg(f, x_bar)?;
        let ok = value <= FEASIBILITY_TOL;
        let label = FractionalProgram::label(i + 1);
        if !ok {
            failures.push(format!("{label}(x) = {value:.6e} > {FEASIBILITY_TOL:e}"));
        }
        constraints.push(ConstraintCheck { label, value, ok });
    }
    let denominator = -eval_semialg(&prog.denominator_neg, x_bar)?;
    let (mut ratio_at_xbar, mut ratio_gap) = (None, None);
    if denominator > 0.0 {
        let ratio = eval_semialg(&prog.numerator, x_bar)? / denominator;
        let gap = (ratio - sdp_value).abs();
        if gap > RATIO_TOL * (1.0 + sdp_value.abs()) {
            failures.push(format!("|ratio - value| = {gap:.6e}"));
        }
        ratio_at_xbar = Some(ratio);
        ratio_gap = Some(gap);
    } else {
        failures.push(format!("denominator {denominator:.6e} is not positive"));
    }
    Ok(Certification {
        constraints,
        denominator,
        ratio_at_xbar,
        ratio_gap,
        dinkelbach_residual: None,
        passed: failures.is_empty(),
        failures,
    })
}

/// SOS lower bound of `min_K f_{m+1} + γ f_{m+2}`; zero at the optimal ratio.
pub fn dinkelbach_check(prog: &FractionalProgram, gamma: f64) -> Result<f64> {
    dinkelbach_check_with(prog, gamma, &RelaxOptions::default(), &SolveOptions::default())
}

pub fn dinkelbach_check_with(
    prog: &FractionalProgram,
    gamma: f64,
    relax: &RelaxOptions,
    opts: &SolveOptions,
) -> Result<f64> {
    let rel = build_dinkelbach(prog, gamma, relax)?;
    let sol = solve(&rel.cp, opts);
    match sol.status {
        SolveStatus::Optimal => Ok(sol.primal_objective),
        s => Err(Error::Solver(s)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptionsExt {
    pub solver: SolveOptions,
    pub relax: RelaxOptions,
    pub tol0: f64,
    /// Run the Dinkelbach cross-check after a successful extraction.
    pub dinkelbach: bool,
}

impl Default for SolveOptionsExt {
    fn default() -> Self {
        SolveOptionsExt {
            solver: SolveOptions::default(),
            relax: RelaxOptions::default(),
            tol0: DEGENERACY_TOL,
            dinkelbach: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Certified,
    Uncertified,
    Degenerate,
    Infeasible,
    Unbounded,
    SolverFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubSolve {
    pub name: String,
    pub status: SolveStatus,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub alpha: Vec<u32>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub order: usize,
    /// Row-major entries.
    pub entries: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: ReportStatus,
    pub optimal_value: Option<f64>,
    pub x_bar: Option<Vec<f64>>,
    pub y_bar: Vec<MomentEntry>,
    pub z_blocks: Vec<NamedMatrix>,
    pub degenerate: bool,
    pub certification: Option<Certification>,
    pub sub_solves: Vec<SubSolve>,
    pub basis_reduction: bool,
    pub basis_size: usize,
    pub support_size: usize,
}

impl SolveReport {
    pub fn y_bar(&self, n: usize, d: u32) -> Result<MomentVector> {
        let support: Vec<MultiIndex> = self.y_bar.iter().map(|e| MultiIndex::new(e.alpha.clone())).collect();
        let values: Vec<f64> = self.y_bar.iter().map(|e| e.value).collect();
        MomentVector::from_slice(n, d, &support, &values)
    }

    pub fn moment(&self, alpha: &[u32]) -> Option<f64> {
        self.y_bar.iter().find(|e| e.alpha == alpha).map(|e| e.value)
    }
}

fn sub_solve(name: &str, sol: &crate::sdpsolve::ConicSolution) -> SubSolve {
    SubSolve { name: name.into(), status: sol.status, iterations: sol.iterations }
}

/// Builds and solves the moment relaxation, extracts `x̄` and certifies it.
///
/// A full-basis solve that stalls is retried once with the Newton-polytope basis.
pub fn solve_program(prog: &FractionalProgram, opts: &SolveOptionsExt) -> Result<SolveReport> {
    opts.solver.validate()?;
    let mut relax = opts.relax.clone();
    let mut rel: Relaxation = build_q(prog, &relax)?;
    let mut sol = solve(&rel.cp, &opts.solver);
    let mut sub_solves = vec![sub_solve("moment relaxation", &sol)];
    if !relax.basis_reduction && matches!(sol.status, SolveStatus::MaxIter | SolveStatus::NumericalFailure) {
        relax.basis_reduction = true;
        rel = build_q(prog, &relax)?;
        sol = solve(&rel.cp, &opts.solver);
        sub_solves.push(sub_solve("moment relaxation (reduced basis)", &sol));
    }
    let mut report = SolveReport {
        status: ReportStatus::SolverFailure,
        optimal_value: None,
        x_bar: None,
        y_bar: Vec::new(),
        z_blocks: Vec::new(),
        degenerate: false,
        certification: None,
        sub_solves,
        basis_reduction: relax.basis_reduction,
        basis_size: rel.basis.len(),
        support_size: rel.support.len(),
    };
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            report.status = ReportStatus::Infeasible;
            return Ok(report);
        }
        SolveStatus::Unbounded => {
            report.status = ReportStatus::Unbounded;
            return Ok(report);
        }
        _ => return Ok(report),
    }
    let value = sol.primal_objective;
    report.optimal_value = Some(value);
    let yv = rel.cp.layout.slice("y", &sol.x).expect("y span");
    report.y_bar = rel
        .support
        .iter()
        .zip(yv)
        .map(|(a, v)| MomentEntry { alpha: a.exponents().to_vec(), value: *v })
        .collect();
    for span in rel.cp.layout.spans() {
        if span.name.starts_with('Z') {
            let m = rel.cp.layout.matrix(&span.name, &sol.x).expect("Z span");
            report.z_blocks.push(NamedMatrix { name: span.name.clone(), order: m.dim(), entries: m.to_row_major() });
        }
    }
    let y = MomentVector::from_slice(prog.n, prog.d, &rel.support, yv)?;
    let Some(x_bar) = extract_x(&y, opts.tol0)? else {
        report.degenerate = true;
        report.status = ReportStatus::Degenerate;
        return Ok(report);
    };
    let mut cert = certify(prog, &x_bar, value)?;
    if opts.dinkelbach && value >= 0.0 {
        let dk = build_dinkelbach(prog, value, &relax)?;
        let dsol = solve(&dk.cp, &opts.solver);
        report.sub_solves.push(sub_solve("dinkelbach", &dsol));
        if dsol.status == SolveStatus::Optimal {
            cert.dinkelbach_residual = Some(dsol.primal_objective);
        }
    }
    report.status = if cert.passed { ReportStatus::Certified } else { ReportStatus::Uncertified };
    report.x_bar = Some(x_bar);
    report.certification = Some(cert);
    Ok(report)
}
