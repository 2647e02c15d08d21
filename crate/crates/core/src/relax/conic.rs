//! Standard-form conic programs.
//!
//! A [`ConicProgram`] is `min/max cᵀv  s.t.  A v = b,  v ∈ ℝ^f × ℝ^l₊ × S₊^{k₁} × …`,
//! with PSD blocks stored as scaled half-vectorizations ([`svec`]).

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::SymMatrix;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Position of entry `(i, j)` (any order) inside `svec` of a `dim × dim` matrix.
#[inline]
pub fn svec_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * i.saturating_sub(1) / 2 + j - i
}

#[inline]
pub fn svec_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Upper triangle row by row, off-diagonal entries scaled by √2 so that
/// `⟨M, N⟩ = svec(M) · svec(N)`.
pub fn svec(m: &SymMatrix) -> Vec<f64> {
    let dim = m.dim();
    let mut out = Vec::with_capacity(svec_len(dim));
    for i in 0..dim {
        for j in i..dim {
            let v = m.get(i, j);
            out.push(if i == j { v } else { SQRT2 * v });
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64]) -> Result<SymMatrix> {
    let dim = triangular_root(v.len()).ok_or_else(|| {
        Error::Validation(format!("svec length {} is not a triangular number", v.len()))
    })?;
    let mut m = SymMatrix::zeros(dim);
    let mut k = 0;
    for i in 0..dim {
        for j in i..dim {
            m.set(i, j, if i == j { v[k] } else { v[k] / SQRT2 });
            k += 1;
        }
    }
    Ok(m)
}

pub(crate) fn triangular_root(len: usize) -> Option<usize> {
    let mut dim = 0;
    while svec_len(dim) < len {
        dim += 1;
    }
    (svec_len(dim) == len).then_some(dim)
}

/// Cone structure of the variable vector: free block, nonnegative block, then PSD blocks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeDims {
    pub free: usize,
    pub nonneg: usize,
    pub psd: Vec<usize>,
}

impl ConeDims {
    pub fn total(&self) -> usize {
        self.free + self.nonneg + self.psd.iter().map(|&k| svec_len(k)).sum::<usize>()
    }

    /// Length of the conic (non-free) part.
    pub fn cone_len(&self) -> usize {
        self.total() - self.free
    }

    /// Barrier degree `l + Σ kⱼ`.
    pub fn degree(&self) -> usize {
        self.nonneg + self.psd.iter().sum::<usize>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanKind {
    Free,
    Nonneg,
    /// PSD block of the given matrix order.
    Psd(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub name: String,
    pub offset: usize,
    pub len: usize,
    pub kind: SpanKind,
}

/// Named spans mapping model variables onto coordinates of the conic vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableLayout {
    spans: Vec<Span>,
}

impl VariableLayout {
    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn get(&self, name: &str) -> Option<&Span> {
        self.spans.iter().find(|s| s.name == name)
    }

    pub fn total_len(&self) -> usize {
        self.spans.iter().map(|s| s.len).sum()
    }

    /// Slice of `v` belonging to span `name`.
    pub fn slice<'a>(&self, name: &str, v: &'a [f64]) -> Option<&'a [f64]> {
        self.get(name).map(|s| &v[s.offset..s.offset + s.len])
    }

    /// PSD span `name` read back as a matrix.
    pub fn matrix(&self, name: &str, v: &[f64]) -> Option<SymMatrix> {
        let s = self.get(name)?;
        match s.kind {
            SpanKind::Psd(_) => smat(&v[s.offset..s.offset + s.len]).ok(),
            _ => None,
        }
    }

    /// Splits a full vector into one block per span, in layout order.
    pub fn unpack(&self, v: &[f64]) -> Vec<(String, Vec<f64>)> {
        self.spans
            .iter()
            .map(|s| (s.name.clone(), v[s.offset..s.offset + s.len].to_vec()))
            .collect()
    }

    /// Assembles a full vector from named blocks; every span must be supplied exactly once.
    pub fn pack(&self, blocks: &[(String, Vec<f64>)]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.total_len()];
        let mut filled = vec![false; self.spans.len()];
        for (name, data) in blocks {
            let (idx, span) = self
                .spans
                .iter()
                .enumerate()
                .find(|(_, s)| &s.name == name)
                .ok_or_else(|| Error::Validation(format!("unknown span {name}")))?;
            if data.len() != span.len {
                return Err(Error::Dimension { expected: span.len, got: data.len() });
            }
            if filled[idx] {
                return Err(Error::Validation(format!("span {name} supplied twice")));
            }
            filled[idx] = true;
            out[span.offset..span.offset + span.len].copy_from_slice(data);
        }
        if let Some(i) = filled.iter().position(|f| !f) {
            return Err(Error::Validation(format!("span {} missing", self.spans[i].name)));
        }
        Ok(out)
    }
}

/// A standard-form conic program with a named variable layout.
#[derive(Clone, Debug)]
pub struct ConicProgram {
    pub c: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub cones: ConeDims,
    pub sense: Sense,
    pub layout: VariableLayout,
    pub row_labels: Vec<String>,
}

impl ConicProgram {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Objective value in the program's own sense.
    pub fn objective(&self, v: &[f64]) -> f64 {
        self.c.iter().zip(v).map(|(c, x)| c * x).sum()
    }

    /// Largest equality violation `‖A v − b‖∞`.
    pub fn equality_residual(&self, v: &[f64]) -> f64 {
        let av = &self.a * nalgebra::DVector::from_column_slice(v);
        av.iter().zip(&self.b).fold(0.0, |m, (l, r)| m.max((l - r).abs()))
    }

    /// Largest cone violation: most negative nonnegative entry or PSD eigenvalue (as a positive number).
    pub fn cone_violation(&self, v: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let start = self.cones.free;
        for x in &v[start..start + self.cones.nonneg] {
            worst = worst.max(-x);
        }
        let mut off = start + self.cones.nonneg;
        for &k in &self.cones.psd {
            let len = svec_len(k);
            if k > 0 {
                let m = smat(&v[off..off + len]).expect("svec block");
                worst = worst.max(-m.min_eigenvalue());
            }
            off += len;
        }
        worst
    }

    /// Max of equality residual and cone violation.
    pub fn feasibility_residual(&self, v: &[f64]) -> f64 {
        self.equality_residual(v).max(self.cone_violation(v))
    }

    /// Sparse text export: header lines describing cones and sizes, then
    /// `A row col value`, `b row value` and `c col value` lines for nonzeros.
    pub fn to_sparse_text(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        };
        let _ = writeln!(out, "# fracsos conic program");
        let _ = writeln!(out, "sense {sense}");
        let _ = writeln!(out, "vars {} rows {}", self.num_vars(), self.num_rows());
        let _ = writeln!(out, "free {}", self.cones.free);
        let _ = writeln!(out, "nonneg {}", self.cones.nonneg);
        let psd: Vec<String> = self.cones.psd.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "psd {}", psd.join(" "));
        for s in self.layout.spans() {
            let kind = match s.kind {
                SpanKind::Free => "free".to_string(),
                SpanKind::Nonneg => "nonneg".to_string(),
                SpanKind::Psd(k) => format!("psd{k}"),
            };
            let _ = writeln!(out, "span {} {} {} {}", s.name, s.offset, s.len, kind);
        }
        for (j, v) in self.c.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "c {j} {v:e}");
            }
        }
        for i in 0..self.num_rows() {
            for j in 0..self.num_vars() {
                let v = self.a[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "A {i} {j} {v:e}");
                }
            }
        }
        for (i, v) in self.b.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "b {i} {v:e}");
            }
        }
        out
    }
}

/// Handle to a declared span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpanId(usize);

/// Coefficient on coordinate `index` of span `span`.
pub type Term = (SpanId, usize, f64);

/// Incremental assembly of a [`ConicProgram`]; spans are reordered into
/// free / nonnegative / PSD order on [`ProgramBuilder::build`].
#[derive(Debug)]
pub struct ProgramBuilder {
    sense: Sense,
    decls: Vec<(String, SpanKind, usize)>,
    rows: Vec<(String, Vec<Term>, f64)>,
    objective: Vec<Term>,
}

impl ProgramBuilder {
    pub fn new(sense: Sense) -> Self {
        ProgramBuilder { sense, decls: Vec::new(), rows: Vec::new(), objective: Vec::new() }
    }

    pub fn free(&mut self, name: impl Into<String>, len: usize) -> SpanId {
        self.decls.push((name.into(), SpanKind::Free, len));
        SpanId(self.decls.len() - 1)
    }

    pub fn nonneg(&mut self, name: impl Into<String>, len: usize) -> SpanId {
        self.decls.push((name.into(), SpanKind::Nonneg, len));
        SpanId(self.decls.len() - 1)
    }

    pub fn psd(&mut self, name: impl Into<String>, dim: usize) -> SpanId {
        self.decls.push((name.into(), SpanKind::Psd(dim), svec_len(dim)));
        SpanId(self.decls.len() - 1)
    }

    pub fn add_objective(&mut self, terms: impl IntoIterator<Item = Term>) {
        self.objective.extend(terms);
    }

    pub fn add_row(&mut self, label: impl Into<String>, terms: Vec<Term>, rhs: f64) {
        self.rows.push((label.into(), terms, rhs));
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Terms expressing `⟨m, X⟩` for the PSD span `span`.
    pub fn inner_terms(&self, span: SpanId, m: &SymMatrix, scale: f64) -> Vec<Term> {
        let (_, kind, _) = &self.decls[span.0];
        let SpanKind::Psd(dim) = *kind else {
            panic!("inner_terms on non-PSD span");
        };
        assert_eq!(dim, m.dim(), "matrix order does not match PSD span");
        svec(m)
            .into_iter()
            .enumerate()
            .filter(|(_, v)| *v != 0.0)
            .map(|(k, v)| (span, k, scale * v))
            .collect()
    }

    pub fn build(self) -> ConicProgram {
        let mut order: Vec<usize> = Vec::with_capacity(self.decls.len());
        for pass in 0..3 {
            for (i, (_, kind, _)) in self.decls.iter().enumerate() {
                let p = match kind {
                    SpanKind::Free => 0,
                    SpanKind::Nonneg => 1,
                    SpanKind::Psd(_) => 2,
                };
                if p == pass {
                    order.push(i);
                }
            }
        }
        let mut offsets = vec![0usize; self.decls.len()];
        let mut spans = Vec::with_capacity(self.decls.len());
        let mut cones = ConeDims::default();
        let mut off = 0;
        for &i in &order {
            let (name, kind, len) = &self.decls[i];
            offsets[i] = off;
            spans.push(Span { name: name.clone(), offset: off, len: *len, kind: *kind });
            match kind {
                SpanKind::Free => cones.free += len,
                SpanKind::Nonneg => cones.nonneg += len,
                SpanKind::Psd(k) => cones.psd.push(*k),
            }
            off += len;
        }
        let nvars = off;
        let locate = |(span, idx, _): &Term| {
            let (_, _, len) = &self.decls[span.0];
            assert!(idx < len, "term index out of span range");
            offsets[span.0] + idx
        };
        let mut c = vec![0.0; nvars];
        for t in &self.objective {
            c[locate(t)] += t.2;
        }
        let mut a = DMatrix::zeros(self.rows.len(), nvars);
        let mut b = Vec::with_capacity(self.rows.len());
        let mut labels = Vec::with_capacity(self.rows.len());
        for (r, (label, terms, rhs)) in self.rows.iter().enumerate() {
            for t in terms {
                a[(r, locate(t))] += t.2;
            }
            b.push(*rhs);
            labels.push(label.clone());
        }
        ConicProgram {
            c,
            a,
            b,
            cones,
            sense: self.sense,
            layout: VariableLayout { spans },
            row_labels: labels,
        }
    }
}
