//! Product cone ℝ^l₊ × S₊^{k₁} × … in svec coordinates, with Nesterov–Todd scaling.

use nalgebra::{DMatrix, DVector};

use crate::relax::conic::{svec_index, svec_len};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Debug)]
pub(crate) struct Blocks {
    pub nonneg: usize,
    /// (offset into the cone vector, matrix order)
    pub psd: Vec<(usize, usize)>,
    pub len: usize,
}

impl Blocks {
    pub fn new(nonneg: usize, psd_dims: &[usize]) -> Self {
        let mut off = nonneg;
        let mut psd = Vec::with_capacity(psd_dims.len());
        for &k in psd_dims {
            psd.push((off, k));
            off += svec_len(k);
        }
        Blocks { nonneg, psd, len: off }
    }

    pub fn degree(&self) -> usize {
        self.nonneg + self.psd.iter().map(|(_, k)| k).sum::<usize>()
    }

    /// Identity element `e`.
    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.len];
        e[..self.nonneg].fill(1.0);
        for &(off, k) in &self.psd {
            for i in 0..k {
                e[off + svec_index(k, i, i)] = 1.0;
            }
        }
        e
    }

    /// Smallest `t` with `v + t·e` in the cone, i.e. minus the smallest eigenvalue.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let mut t = f64::NEG_INFINITY;
        for x in &v[..self.nonneg] {
            t = t.max(-x);
        }
        for &(off, k) in &self.psd {
            if k == 0 {
                continue;
            }
            let m = unpack(&v[off..off + svec_len(k)], k);
            let ev = m.symmetric_eigenvalues();
            t = t.max(-ev.min());
        }
        t
    }
}

pub(crate) fn unpack(v: &[f64], k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            let val = if i == j { v[idx] } else { v[idx] / SQRT2 };
            m[(i, j)] = val;
            m[(j, i)] = val;
            idx += 1;
        }
    }
    m
}

pub(crate) fn pack_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let k = m.nrows();
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            out[idx] = if i == j { m[(i, i)] } else { SQRT2 * 0.5 * (m[(i, j)] + m[(j, i)]) };
            idx += 1;
        }
    }
}

#[derive(Clone, Debug)]
struct PsdScaling {
    r: DMatrix<f64>,
    /// `R Rᵀ`, so that `WᵀW X = (R Rᵀ) X (R Rᵀ)`.
    rrt: DMatrix<f64>,
    lambda: DVector<f64>,
}

/// Nesterov–Todd scaling `W` with `W z = W⁻ᵀ s = λ`.
#[derive(Clone, Debug)]
pub(crate) struct Scaling {
    blocks: Blocks,
    w: Vec<f64>,
    lambda_l: Vec<f64>,
    psd: Vec<PsdScaling>,
}

impl Scaling {
    /// Returns `None` when `s` or `z` is not strictly interior.
    pub fn new(blocks: &Blocks, s: &[f64], z: &[f64]) -> Option<Self> {
        let l = blocks.nonneg;
        let mut w = Vec::with_capacity(l);
        let mut lambda_l = Vec::with_capacity(l);
        for i in 0..l {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return None;
            }
            w.push((s[i] / z[i]).sqrt());
            lambda_l.push((s[i] * z[i]).sqrt());
        }
        let mut psd = Vec::with_capacity(blocks.psd.len());
        for &(off, k) in &blocks.psd {
            let len = svec_len(k);
            let sm = unpack(&s[off..off + len], k);
            let zm = unpack(&z[off..off + len], k);
            let ls = sm.cholesky()?.l();
            let lz = zm.cholesky()?.l();
            let m = lz.transpose() * &ls;
            let svd = m.svd(false, true);
            let vt = svd.v_t?;
            let sig = svd.singular_values;
            if sig.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return None;
            }
            let inv_sqrt = DMatrix::from_diagonal(&sig.map(|x| 1.0 / x.sqrt()));
            let r = &ls * vt.transpose() * &inv_sqrt;
            let rrt = &r * r.transpose();
            psd.push(PsdScaling { r, rrt, lambda: sig });
        }
        Some(Scaling { blocks: blocks.clone(), w, lambda_l, psd })
    }

    /// The scaled point `λ` as a cone vector.
    pub fn lambda(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.blocks.len];
        out[..self.blocks.nonneg].copy_from_slice(&self.lambda_l);
        for (sc, &(off, k)) in self.psd.iter().zip(&self.blocks.psd) {
            for i in 0..k {
                out[off + svec_index(k, i, i)] = sc.lambda[i];
            }
        }
        out
    }

    fn map_psd(&self, v: &[f64], f: impl Fn(&PsdScaling, &DMatrix<f64>) -> DMatrix<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.blocks.len];
        for (sc, &(off, k)) in self.psd.iter().zip(&self.blocks.psd) {
            let len = svec_len(k);
            let m = unpack(&v[off..off + len], k);
            pack_into(&f(sc, &m), &mut out[off..off + len]);
        }
        out
    }

    /// `W v`
    pub fn apply_w(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.map_psd(v, |sc, m| sc.r.transpose() * m * &sc.r);
        for i in 0..self.blocks.nonneg {
            out[i] = self.w[i] * v[i];
        }
        out
    }

    /// `Wᵀ v`
    pub fn apply_wt(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.map_psd(v, |sc, m| &sc.r * m * sc.r.transpose());
        for i in 0..self.blocks.nonneg {
            out[i] = self.w[i] * v[i];
        }
        out
    }

    /// `WᵀW v`
    pub fn apply_wtw(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.map_psd(v, |sc, m| &sc.rrt * m * &sc.rrt);
        for i in 0..self.blocks.nonneg {
            out[i] = self.w[i] * self.w[i] * v[i];
        }
        out
    }

    /// `λ ⋄ r`: the solution `u` of `λ ∘ u = r`.
    pub fn lambda_div(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.blocks.len];
        for i in 0..self.blocks.nonneg {
            out[i] = r[i] / self.lambda_l[i];
        }
        for (sc, &(off, k)) in self.psd.iter().zip(&self.blocks.psd) {
            for i in 0..k {
                for j in i..k {
                    let idx = off + svec_index(k, i, j);
                    out[idx] = 2.0 * r[idx] / (sc.lambda[i] + sc.lambda[j]);
                }
            }
        }
        out
    }

    /// Largest `α` with `λ + α d` in the cone (`∞` when unrestricted).
    pub fn max_step(&self, d: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.blocks.nonneg {
            if d[i] < 0.0 {
                alpha = alpha.min(-self.lambda_l[i] / d[i]);
            }
        }
        for (sc, &(off, k)) in self.psd.iter().zip(&self.blocks.psd) {
            if k == 0 {
                continue;
            }
            let mut m = unpack(&d[off..off + svec_len(k)], k);
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] /= (sc.lambda[i] * sc.lambda[j]).sqrt();
                }
            }
            let emin = m.symmetric_eigenvalues().min();
            if emin < 0.0 {
                alpha = alpha.min(-1.0 / emin);
            }
        }
        alpha
    }
}

/// Jordan product `u ∘ v` (elementwise on ℝ₊, `(UV + VU)/2` on PSD blocks).
pub(crate) fn jordan(blocks: &Blocks, u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; blocks.len];
    for i in 0..blocks.nonneg {
        out[i] = u[i] * v[i];
    }
    for &(off, k) in &blocks.psd {
        let len = svec_len(k);
        let um = unpack(&u[off..off + len], k);
        let vm = unpack(&v[off..off + len], k);
        let prod = &um * &vm;
        let sym = (&prod + prod.transpose()) * 0.5;
        pack_into(&sym, &mut out[off..off + len]);
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
