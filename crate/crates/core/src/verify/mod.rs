//! Brute-force grid oracle for small fractional programs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eval_semialg, FractionalProgram};

pub const DEFAULT_STEPS: usize = 201;
pub const MAX_ORACLE_VARS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Vec<(f64, f64)>,
    pub steps: usize,
}

impl GridSpec {
    /// `lo ≤ hi` is accepted so that a collapsed box samples a single point.
    pub fn new(bounds: Vec<(f64, f64)>, steps: usize) -> Result<Self> {
        let spec = GridSpec { bounds, steps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Validation(format!("steps must be at least 2, got {}", self.steps)));
        }
        for (k, (lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Validation(format!("bad interval [{lo}, {hi}] for x{}", k + 1)));
            }
        }
        Ok(())
    }

    /// Parses `"lo1:hi1,lo2:hi2"`.
    pub fn parse_box(text: &str, steps: usize) -> Result<Self> {
        let bounds = text
            .split(',')
            .map(|part| {
                let (lo, hi) = part
                    .split_once(':')
                    .ok_or_else(|| Error::Validation(format!("interval {part:?} is not lo:hi")))?;
                let num = |s: &str| {
                    s.trim().parse::<f64>().map_err(|e| Error::Validation(format!("bad bound {s:?}: {e}")))
                };
                Ok((num(lo)?, num(hi)?))
            })
            .collect::<Result<Vec<_>>>()?;
        GridSpec::new(bounds, steps)
    }

    fn axis(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.bounds[k];
        if lo == hi {
            return vec![lo];
        }
        let h = (hi - lo) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { hi } else { lo + h * i as f64 }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub feasible_points: usize,
    pub grid_points: usize,
}

fn ratio_at(prog: &FractionalProgram, x: &[f64]) -> Result<Option<f64>> {
    for f in &prog.constraints {
        if eval_semialg(f, x)? > 0.0 {
            return Ok(None);
        }
    }
    let den = -eval_semialg(&prog.denominator_neg, x)?;
    if den <= 0.0 {
        return Ok(None);
    }
    Ok(Some(eval_semialg(&prog.numerator, x)? / den))
}

/// Smallest ratio over feasible grid points with positive denominator.
///
/// Ties go to the point that comes first in lexicographic order of grid indices.
pub fn grid_oracle(prog: &FractionalProgram, spec: &GridSpec) -> Result<OracleResult> {
    spec.validate()?;
    let n = prog.n;
    if n > MAX_ORACLE_VARS {
        return Err(Error::Validation(format!("oracle limited to n <= {MAX_ORACLE_VARS}")));
    }
    if spec.bounds.len() != n {
        return Err(Error::Dimension { expected: n, got: spec.bounds.len() });
    }
    let axes: Vec<Vec<f64>> = (0..n).map(|k| spec.axis(k)).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let point = |mut idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let len = axes[k].len();
            x[k] = axes[k][idx % len];
            idx /= len;
        }
        x
    };
    let evals: Vec<(usize, Option<f64>)> = (0..total)
        .into_par_iter()
        .map(|i| ratio_at(prog, &point(i)).map(|r| (i, r)))
        .collect::<Result<_>>()?;
    let feasible_points = evals.iter().filter(|(_, r)| r.is_some()).count();
    let best = evals
        .into_iter()
        .filter_map(|(i, r)| r.map(|v| (i, v)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv <= v => acc,
            _ => Some((i, v)),
        });
    let Some((i, value)) = best else {
        return Err(Error::Validation("empty grid sample: no feasible grid point".into()));
    };
    Ok(OracleResult { value, argmin: point(i), feasible_points, grid_points: total })
}
