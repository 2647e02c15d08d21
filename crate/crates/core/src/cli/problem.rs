use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, FractionalProgram, LMISet, SemiAlgFunction};
use crate::polycore::{MultiIndex, SparsePolynomial, SymMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub alpha: Vec<u32>,
    pub coef: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSpec {
    pub s: usize,
    #[serde(default)]
    pub p: usize,
    pub t: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B", default)]
    pub b: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub h: Vec<Vec<TermSpec>>,
    /// Absent for plain polynomials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaSpec>,
}

/// On-disk form of a fractional program. The minimized ratio is
/// `numerator / (−denominator_neg)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub d: u32,
    #[serde(default)]
    pub constraints: Vec<FunctionSpec>,
    pub numerator: FunctionSpec,
    pub denominator_neg: FunctionSpec,
}

fn poly_from_spec(n: usize, terms: &[TermSpec], what: &str, errs: &mut Vec<String>) -> SparsePolynomial {
    let mut ok = Vec::with_capacity(terms.len());
    for t in terms {
        if t.alpha.len() != n {
            errs.push(format!("{what}: exponent {:?} has {} entries, expected n = {n}", t.alpha, t.alpha.len()));
        } else if !t.coef.is_finite() {
            errs.push(format!("{what}: coefficient {} is not finite", t.coef));
        } else {
            ok.push((MultiIndex::new(t.alpha.clone()), t.coef));
        }
    }
    SparsePolynomial::from_terms(n, ok).unwrap_or_else(|e| {
        errs.push(format!("{what}: {e}"));
        SparsePolynomial::zero(n)
    })
}

fn matrix_from_spec(t: usize, data: &[f64], what: &str, errs: &mut Vec<String>) -> SymMatrix {
    if data.iter().any(|v| !v.is_finite()) {
        errs.push(format!("{what}: entries must be finite"));
        return SymMatrix::zeros(t);
    }
    SymMatrix::from_row_major(t, data).unwrap_or_else(|e| {
        errs.push(format!("{what}: {}", e.to_string().trim_start_matches("validation error: ")));
        SymMatrix::zeros(t)
    })
}

fn function_from_spec(n: usize, spec: &FunctionSpec, label: &str, errs: &mut Vec<String>) -> SemiAlgFunction {
    let h: Vec<SparsePolynomial> =
        spec.h.iter().enumerate().map(|(j, p)| poly_from_spec(n, p, &format!("{label} h{j}"), errs)).collect();
    let h = if h.is_empty() {
        errs.push(format!("{label}: h must contain at least h0"));
        vec![SparsePolynomial::zero(n)]
    } else {
        h
    };
    let Some(om) = &spec.omega else {
        if h.len() != 1 {
            errs.push(format!("{label}: {} polynomials given but omega is absent", h.len()));
        }
        return SemiAlgFunction::polynomial(h[0].clone());
    };
    let before = errs.len();
    if om.a.len() != om.s + 1 {
        errs.push(format!("{label}: omega has s = {} but {} A matrices", om.s, om.a.len()));
    }
    if om.b.len() != om.p {
        errs.push(format!("{label}: omega has p = {} but {} B matrices", om.p, om.b.len()));
    }
    if h.len() != om.s + 1 {
        errs.push(format!("{label}: omega has s = {} but {} polynomials", om.s, h.len()));
    }
    if om.t == 0 {
        errs.push(format!("{label}: omega needs t >= 1"));
    }
    let a: Vec<SymMatrix> =
        om.a.iter().enumerate().map(|(j, m)| matrix_from_spec(om.t, m, &format!("{label} A{j}"), errs)).collect();
    let b: Vec<SymMatrix> =
        om.b.iter().enumerate().map(|(l, m)| matrix_from_spec(om.t, m, &format!("{label} B{}", l + 1), errs)).collect();
    if errs.len() > before {
        return SemiAlgFunction::polynomial(h[0].clone());
    }
    match LMISet::new(a, b).and_then(|o| SemiAlgFunction::new(h.clone(), o)) {
        Ok(f) => f,
        Err(e) => {
            errs.push(format!("{label}: {e}"));
            SemiAlgFunction::polynomial(h[0].clone())
        }
    }
}

impl ProblemFile {
    /// Converts to a validated program, collecting every violation instead of stopping at the first.
    pub fn to_program(&self) -> Result<FractionalProgram> {
        let prog = self.to_program_unvalidated()?;
        let report = validate(&prog);
        if !report.passed() {
            let msgs: Vec<String> = report.failures().map(|i| format!("{}: {}", i.name, i.message)).collect();
            return Err(Error::Parse(msgs.join("; ")));
        }
        Ok(prog)
    }

    /// Shape checks only; no degree or SOS-convexity validation.
    pub fn to_program_unvalidated(&self) -> Result<FractionalProgram> {
        let mut errs = Vec::new();
        if self.n == 0 {
            errs.push("n must be at least 1".to_string());
        }
        let n = self.n.max(1);
        let m = self.constraints.len();
        let constraints: Vec<SemiAlgFunction> = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, f)| function_from_spec(n, f, &FractionalProgram::label(i + 1), &mut errs))
            .collect();
        let numerator = function_from_spec(n, &self.numerator, &FractionalProgram::label(m + 1), &mut errs);
        let denominator_neg = function_from_spec(n, &self.denominator_neg, &FractionalProgram::label(m + 2), &mut errs);
        if !errs.is_empty() {
            return Err(Error::Parse(errs.join("; ")));
        }
        Ok(FractionalProgram { n, d: self.d, constraints, numerator, denominator_neg })
    }

    pub fn from_program(prog: &FractionalProgram) -> Self {
        let func = |f: &SemiAlgFunction| FunctionSpec {
            h: f
                .h
                .iter()
                .map(|p| p.terms().map(|(a, c)| TermSpec { alpha: a.exponents().to_vec(), coef: c }).collect())
                .collect(),
            omega: (!f.omega.is_trivial()).then(|| OmegaSpec {
                s: f.omega.s,
                p: f.omega.p,
                t: f.omega.t,
                a: f.omega.a.iter().map(SymMatrix::to_row_major).collect(),
                b: f.omega.b.iter().map(SymMatrix::to_row_major).collect(),
            }),
        };
        ProblemFile {
            n: prog.n,
            d: prog.d,
            constraints: prog.constraints.iter().map(func).collect(),
            numerator: func(&prog.numerator),
            denominator_neg: func(&prog.denominator_neg),
        }
    }
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> Result<FractionalProgram> {
    parse_problem_file(text)?.to_program()
}

pub fn load_problem(path: &Path) -> Result<FractionalProgram> {
    parse_problem(&std::fs::read_to_string(path)?)
}
