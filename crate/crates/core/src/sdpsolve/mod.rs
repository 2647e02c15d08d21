//! Primal-dual interior-point solver for standard-form conic programs.
//!
//! The solver runs a Mehrotra predictor-corrector method on the homogeneous
//! self-dual embedding of
//!
//! ```text
//! min cᵀx  s.t.  A x = b,  x ∈ ℝ^f × ℝ^l₊ × S₊^{k₁} × …
//! ```
//!
//! with Nesterov–Todd scaling on the cone. Free coordinates stay free; the
//! cone coordinates enter through `G = −E` (`E` selects the conic part), so
//! the embedding is the usual one for `Gx + s = h, Ax = b, s ⪰ 0` with `h = 0`.
//! Infeasibility and unboundedness are reported with normalized rays.

mod cones;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::relax::conic::{ConicProgram, Sense};
use cones::{dot, jordan, norm, Blocks, Scaling};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    pub verbosity: u8,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol_gap: 1e-8, tol_feas: 1e-8, max_iter: 200, verbosity: 0 }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol_gap: tol, tol_feas: tol, ..Default::default() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.tol_gap > 0.0 && self.tol_feas > 0.0) {
            return Err(crate::Error::Validation("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(crate::Error::Validation("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖A x − b‖₂ / (1 + ‖b‖₂)`
    pub primal: f64,
    /// `‖c − Aᵀy − z‖₂ / (1 + ‖c‖₂)` (signs flipped for maximization)
    pub dual: f64,
    /// `|pobj − dobj| / (1 + |pobj| + |dobj|)`
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// `Aᵀu ∈ K*` with zero free part and `bᵀu = −1`: no primal point exists.
    PrimalInfeasible,
    /// `A d = 0`, `d ∈ K`, objective decreases along `d` (increases for maximization).
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// `u` (length = rows) for infeasibility, `d` (length = vars) for unboundedness.
    pub ray: Vec<f64>,
    /// Cone slack paired with `ray` for infeasibility certificates (`Aᵀu` target).
    pub slack: Vec<f64>,
    /// Normalized residual of the defining equations.
    pub residual: f64,
    /// Improvement per unit ray length: `1/‖ray‖` after normalization.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Dual slack, same length as `x` (zero on free coordinates).
    pub z: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

/// Recomputes [`Residuals`] for a candidate primal-dual triple.
pub fn residuals(cp: &ConicProgram, x: &[f64], y: &[f64], z: &[f64]) -> Residuals {
    let a = &cp.a;
    let xv = DVector::from_column_slice(x);
    let yv = DVector::from_column_slice(y);
    let ax = a * &xv;
    let rp: Vec<f64> = ax.iter().zip(&cp.b).map(|(l, r)| l - r).collect();
    let aty = a.transpose() * &yv;
    let sign = match cp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let rd: Vec<f64> = (0..x.len()).map(|j| sign * (cp.c[j] - aty[j]) - z[j]).collect();
    let pobj = dot(&cp.c, x);
    let dobj = dot(&cp.b, y);
    Residuals {
        primal: norm(&rp) / (1.0 + norm(&cp.b)),
        dual: norm(&rd) / (1.0 + norm(&cp.c)),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    }
}

/// Factored reduced system `[0 A_fᵀ; A_f −M]` with `M = A_c WᵀW A_cᵀ`.
struct Kkt {
    kr: DMatrix<f64>,
    /// Absent when the reduced system is empty.
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

const STEP_FRACTION: f64 = 0.99;
const REG: f64 = 1e-13;
const REFINE_STEPS: usize = 4;
/// Iterations without a new best merit before giving up.
const STAGNATION_ITERS: usize = 25;

struct Solver<'a> {
    cp: &'a ConicProgram,
    c: Vec<f64>,
    nfree: usize,
    nvar: usize,
    nrow: usize,
    blocks: Blocks,
    at: DMatrix<f64>,
    /// Cone columns of `A`.
    ac: DMatrix<f64>,
}

impl<'a> Solver<'a> {
    fn new(cp: &'a ConicProgram) -> Self {
        let c = match cp.sense {
            Sense::Minimize => cp.c.clone(),
            Sense::Maximize => cp.c.iter().map(|v| -v).collect(),
        };
        let blocks = Blocks::new(cp.cones.nonneg, &cp.cones.psd);
        let nfree = cp.cones.free;
        let nvar = cp.num_vars();
        Solver {
            cp,
            c,
            nfree,
            nvar,
            nrow: cp.num_rows(),
            blocks,
            at: cp.a.transpose(),
            ac: cp.a.columns(nfree, nvar - nfree).into_owned(),
        }
    }

    fn mul_a(&self, x: &[f64]) -> Vec<f64> {
        (&self.cp.a * DVector::from_column_slice(x)).iter().copied().collect()
    }

    fn mul_at(&self, y: &[f64]) -> Vec<f64> {
        (&self.at * DVector::from_column_slice(y)).iter().copied().collect()
    }

    /// `Gᵀz` with `G = −E`.
    fn mul_gt(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nvar];
        for (o, v) in out[self.nfree..].iter_mut().zip(z) {
            *o = -v;
        }
        out
    }

    /// `G x = −x_cone`
    fn mul_g(&self, x: &[f64]) -> Vec<f64> {
        x[self.nfree..].iter().map(|v| -v).collect()
    }

    fn wtw(scaling: Option<&Scaling>, v: &[f64]) -> Vec<f64> {
        match scaling {
            Some(sc) => sc.apply_wtw(v),
            None => v.to_vec(),
        }
    }

    fn factor(&self, scaling: Option<&Scaling>) -> Option<Kkt> {
        let nf = self.nfree;
        let p = self.nrow;
        let nc = self.nvar - nf;
        let mut t = DMatrix::zeros(nc, p);
        for i in 0..p {
            let col: Vec<f64> = self.ac.row(i).iter().copied().collect();
            let w = Self::wtw(scaling, &col);
            t.column_mut(i).copy_from_slice(&w);
        }
        let m = &self.ac * t;
        let mut kr = DMatrix::zeros(nf + p, nf + p);
        kr.view_mut((nf, nf), (p, p)).copy_from(&(-&m));
        kr.view_mut((0, nf), (nf, p)).copy_from(&self.at.rows(0, nf));
        kr.view_mut((nf, 0), (p, nf)).copy_from(&self.cp.a.columns(0, nf));
        if nf + p == 0 {
            return Some(Kkt { kr, lu: None });
        }
        let mut k = kr.clone();
        let scale = 1.0 + m.amax();
        for i in 0..nf {
            k[(i, i)] += REG * scale;
        }
        for i in nf..nf + p {
            k[(i, i)] -= REG * scale;
        }
        let lu = k.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Kkt { kr, lu: Some(lu) })
    }

    /// Solves `[0 Aᵀ Gᵀ; A 0 0; G 0 −WᵀW] [dx; dy; dz] = [bx; by; bz]`, refining
    /// against the unreduced system.
    fn kkt_solve(
        &self,
        kkt: &Kkt,
        scaling: Option<&Scaling>,
        bx: &[f64],
        by: &[f64],
        bz: &[f64],
    ) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (mut dx, mut dy, mut dz) = self.kkt_solve_reduced(kkt, scaling, bx, by, bz)?;
        let scale = 1.0 + norm(bx).max(norm(by)).max(norm(bz));
        let mut prev = f64::INFINITY;
        for _ in 0..REFINE_STEPS {
            let (rx, ry, rz) = self.kkt_residual(scaling, (&dx, &dy, &dz), (bx, by, bz));
            let res = norm(&rx).max(norm(&ry)).max(norm(&rz));
            if res <= 1e-15 * scale || res >= 0.5 * prev {
                break;
            }
            prev = res;
            let (cx, cy, cz) = self.kkt_solve_reduced(kkt, scaling, &rx, &ry, &rz)?;
            axpy(&mut dx, 1.0, &cx);
            axpy(&mut dy, 1.0, &cy);
            axpy(&mut dz, 1.0, &cz);
        }
        Some((dx, dy, dz))
    }

    #[allow(clippy::type_complexity)]
    fn kkt_residual(
        &self,
        scaling: Option<&Scaling>,
        (dx, dy, dz): (&[f64], &[f64], &[f64]),
        (bx, by, bz): (&[f64], &[f64], &[f64]),
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let aty = self.mul_at(dy);
        let gtz = self.mul_gt(dz);
        let rx = (0..self.nvar).map(|i| bx[i] - aty[i] - gtz[i]).collect();
        let ax = self.mul_a(dx);
        let ry = by.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let gx = self.mul_g(dx);
        let wz = Self::wtw(scaling, dz);
        let rz = (0..bz.len()).map(|i| bz[i] - gx[i] + wz[i]).collect();
        (rx, ry, rz)
    }

    fn kkt_solve_reduced(
        &self,
        kkt: &Kkt,
        scaling: Option<&Scaling>,
        bx: &[f64],
        by: &[f64],
        bz: &[f64],
    ) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let nf = self.nfree;
        let p = self.nrow;
        let bxc = &bx[nf..];
        let wb = Self::wtw(scaling, bxc);
        let diff: Vec<f64> = bz.iter().zip(&wb).map(|(a, b)| a - b).collect();
        let acd = &self.ac * DVector::from_column_slice(&diff);
        let mut rhs = DVector::zeros(nf + p);
        rhs.rows_mut(0, nf).copy_from_slice(&bx[..nf]);
        for i in 0..p {
            rhs[nf + i] = by[i] + acd[i];
        }
        let mut sol = rhs.clone();
        if let Some(lu) = &kkt.lu {
            sol = lu.solve(&rhs)?;
            for _ in 0..REFINE_STEPS {
                let r = &rhs - &kkt.kr * &sol;
                if r.amax() <= 1e-15 * (1.0 + rhs.amax()) {
                    break;
                }
                sol += lu.solve(&r)?;
            }
        }
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dy: Vec<f64> = sol.rows(nf, p).iter().copied().collect();
        let acty = self.ac.transpose() * DVector::from_column_slice(&dy);
        let dz: Vec<f64> = acty.iter().zip(bxc).map(|(a, b)| a - b).collect();
        let wdz = Self::wtw(scaling, &dz);
        let mut dx = Vec::with_capacity(self.nvar);
        dx.extend(sol.rows(0, nf).iter().copied());
        dx.extend(bz.iter().zip(&wdz).map(|(a, b)| -a - b));
        Some((dx, dy, dz))
    }
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Indices of a maximal linearly independent subset of the rows of `A`, or
/// `None` when every row is needed (full rank, or dependent rows with
/// inconsistent right-hand sides).
fn independent_rows(cp: &ConicProgram) -> Option<Vec<usize>> {
    let p = cp.num_rows();
    if p == 0 {
        return None;
    }
    let at = cp.a.transpose();
    let qr = at.clone().col_piv_qr();
    let r = qr.r();
    let top = r[(0, 0)].abs();
    if top == 0.0 {
        return None;
    }
    let rank = (0..p.min(r.nrows())).take_while(|&k| r[(k, k)].abs() > 1e-10 * top).count();
    if rank == p {
        return None;
    }
    let mut order = DMatrix::from_fn(1, p, |_, j| j as f64);
    qr.p().permute_columns(&mut order);
    let mut keep: Vec<usize> = order.iter().take(rank).map(|v| *v as usize).collect();
    keep.sort_unstable();
    let kept = at.select_columns(&keep);
    let svd = kept.clone().svd(true, true);
    let bk = DVector::from_iterator(keep.len(), keep.iter().map(|&i| cp.b[i]));
    let bnorm = 1.0 + norm(&cp.b);
    for i in (0..p).filter(|i| !keep.contains(i)) {
        let coeffs = svd.solve(&at.column(i).into_owned(), 1e-12).ok()?;
        let fit = &kept * &coeffs - at.column(i);
        if fit.amax() > 1e-9 * (1.0 + at.column(i).amax()) {
            return None;
        }
        if (coeffs.dot(&bk) - cp.b[i]).abs() > 1e-9 * bnorm {
            return None;
        }
    }
    Some(keep)
}

/// Solves `cp` to the tolerances in `opts`. Deterministic for identical inputs.
///
/// Redundant equality rows are dropped before the solve; their multipliers are
/// reported as zero.
pub fn solve(cp: &ConicProgram, opts: &SolveOptions) -> ConicSolution {
    let Some(keep) = independent_rows(cp) else {
        return solve_full_rank(cp, opts);
    };
    let mut reduced = cp.clone();
    reduced.a = cp.a.select_rows(&keep);
    reduced.b = keep.iter().map(|&i| cp.b[i]).collect();
    reduced.row_labels = keep.iter().map(|&i| cp.row_labels[i].clone()).collect();
    let mut sol = solve_full_rank(&reduced, opts);
    let mut y = vec![0.0; cp.num_rows()];
    for (k, &i) in keep.iter().enumerate() {
        y[i] = sol.y[k];
    }
    sol.y = y;
    if let Some(cert) = sol.certificate.as_mut() {
        if cert.kind == CertificateKind::PrimalInfeasible {
            let mut ray = vec![0.0; cp.num_rows()];
            for (k, &i) in keep.iter().enumerate() {
                ray[i] = cert.ray[k];
            }
            cert.ray = ray;
        }
    }
    sol.residuals = residuals(cp, &sol.x, &sol.y, &sol.z);
    sol
}

fn solve_full_rank(cp: &ConicProgram, opts: &SolveOptions) -> ConicSolution {
    let solver = Solver::new(cp);
    let nc = solver.blocks.len;
    let nu = solver.blocks.degree() as f64;
    let e = solver.blocks.identity();
    let zero_b = vec![0.0; solver.nrow];
    let zero_x = vec![0.0; solver.nvar];
    let zero_z = vec![0.0; nc];

    let fail = |it: usize| ConicSolution {
        status: SolveStatus::NumericalFailure,
        x: vec![0.0; solver.nvar],
        y: vec![0.0; solver.nrow],
        z: vec![0.0; solver.nvar],
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        residuals: Residuals { primal: f64::NAN, dual: f64::NAN, gap: f64::NAN },
        iterations: it,
        certificate: None,
    };

    // Starting point: least-norm primal and dual solutions, shifted into the cone.
    let Some(kkt0) = solver.factor(None) else {
        return fail(0);
    };
    let Some((x0, _, zp)) = solver.kkt_solve(&kkt0, None, &zero_x, &cp.b, &zero_z) else {
        return fail(0);
    };
    let mut s: Vec<f64> = zp.iter().map(|v| -v).collect();
    let neg_c: Vec<f64> = solver.c.iter().map(|v| -v).collect();
    let Some((_, y0, mut z)) = solver.kkt_solve(&kkt0, None, &neg_c, &zero_b, &zero_z) else {
        return fail(0);
    };
    for v in [&mut s, &mut z] {
        let t = solver.blocks.max_violation(v);
        if t >= -1e-8 * norm(v).max(1.0) {
            axpy(v, 1.0 + t, &e);
        }
    }
    let mut it = Iterate { x: x0, y: y0, z, s, tau: 1.0, kappa: 1.0 };

    let cnorm = norm(&solver.c).max(1.0);
    let bnorm = norm(&cp.b).max(1.0);
    let mut stalls = 0usize;
    let mut iter = 0usize;
    let status;
    let mut certificate = None;
    let mut best: Option<(f64, usize, Vec<f64>, Vec<f64>, Vec<f64>)> = None;

    loop {
        // Residuals of the embedding.
        let aty = solver.mul_at(&it.y);
        let gtz = solver.mul_gt(&it.z);
        let r1: Vec<f64> = (0..solver.nvar).map(|j| aty[j] + gtz[j] + solver.c[j] * it.tau).collect();
        let ax = solver.mul_a(&it.x);
        let r2: Vec<f64> = (0..solver.nrow).map(|i| ax[i] - cp.b[i] * it.tau).collect();
        let gx = solver.mul_g(&it.x);
        let r3: Vec<f64> = (0..nc).map(|i| it.s[i] + gx[i]).collect();
        let cx = dot(&solver.c, &it.x);
        let by = dot(&cp.b, &it.y);
        let r4 = it.kappa + cx + by;
        let gap = dot(&it.s, &it.z);
        let mu = (gap + it.tau * it.kappa) / (nu + 1.0);

        let (xr, yr, zr) = recover(&solver, &it);
        let res = residuals(cp, &xr, &yr, &zr);
        if opts.verbosity > 0 {
            eprintln!(
                "{iter:3} pobj {:+.8e} dobj {:+.8e} pres {:.2e} dres {:.2e} gap {:.2e} tau {:.2e} kappa {:.2e}",
                dot(&cp.c, &xr),
                dot(&cp.b, &yr),
                res.primal,
                res.dual,
                res.gap,
                it.tau,
                it.kappa
            );
        }
        if res.primal <= opts.tol_feas && res.dual <= opts.tol_feas && res.gap <= opts.tol_gap {
            status = SolveStatus::Optimal;
            best = None;
            break;
        }
        let merit = (res.primal / opts.tol_feas).max(res.dual / opts.tol_feas).max(res.gap / opts.tol_gap);
        if merit.is_finite() && best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, iter, xr, yr, zr));
        }
        if best.as_ref().is_some_and(|b| iter >= b.1 + STAGNATION_ITERS) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        // Infeasibility: bᵀy < 0 with Aᵀy + Gᵀz ≈ 0.
        if by < 0.0 {
            let aty_gtz: Vec<f64> = (0..solver.nvar).map(|j| aty[j] + gtz[j]).collect();
            let pinf = norm(&aty_gtz) / cnorm / (-by);
            if pinf <= opts.tol_feas {
                let scale = -1.0 / by;
                let ray: Vec<f64> = it.y.iter().map(|v| v * scale).collect();
                let mut slack = vec![0.0; solver.nvar];
                for (o, v) in slack[solver.nfree..].iter_mut().zip(&it.z) {
                    *o = v * scale;
                }
                let len = (norm(&ray).powi(2) + norm(&slack).powi(2)).sqrt();
                certificate = Some(Certificate {
                    kind: CertificateKind::PrimalInfeasible,
                    ray,
                    slack,
                    residual: pinf,
                    margin: 1.0 / len,
                });
                status = SolveStatus::Infeasible;
                break;
            }
        }
        if cx < 0.0 {
            let axn = norm(&ax) / bnorm;
            let sgx = norm(&r3);
            let dinf = axn.max(sgx) / (-cx);
            if dinf <= opts.tol_feas {
                let scale = -1.0 / cx;
                let mut ray = vec![0.0; solver.nvar];
                for j in 0..solver.nfree {
                    ray[j] = it.x[j] * scale;
                }
                for (o, v) in ray[solver.nfree..].iter_mut().zip(&it.s) {
                    *o = v * scale;
                }
                let len = norm(&ray);
                certificate = Some(Certificate {
                    kind: CertificateKind::Unbounded,
                    ray,
                    slack: Vec::new(),
                    residual: dinf,
                    margin: 1.0 / len,
                });
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if iter >= opts.max_iter {
            status = SolveStatus::MaxIter;
            break;
        }
        if stalls >= 3 {
            status = SolveStatus::NumericalFailure;
            break;
        }

        let Some(sc) = Scaling::new(&solver.blocks, &it.s, &it.z) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some(kkt) = solver.factor(Some(&sc)) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let lambda = sc.lambda();
        let lam_sq = jordan(&solver.blocks, &lambda, &lambda);

        // (x1, y1, z1) solves K u = (−c, b, h).
        let Some((x1, y1, z1)) = solver.kkt_solve(&kkt, Some(&sc), &neg_c, &cp.b, &zero_z) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let denom = dot(&solver.c, &x1) + dot(&cp.b, &y1) - it.kappa / it.tau;

        let direction = |eta: f64, rc: &[f64], rtk: f64| {
            let f = 1.0 - eta;
            let bx: Vec<f64> = r1.iter().map(|v| -f * v).collect();
            let byv: Vec<f64> = r2.iter().map(|v| -f * v).collect();
            let wt = sc.apply_wt(&sc.lambda_div(rc));
            let bz: Vec<f64> = (0..nc).map(|i| -f * r3[i] - wt[i]).collect();
            let (x2, y2, z2) = solver.kkt_solve(&kkt, Some(&sc), &bx, &byv, &bz)?;
            let btau = -f * r4 - rtk / it.tau;
            let dtau = (btau - dot(&solver.c, &x2) - dot(&cp.b, &y2)) / denom;
            let mut dx = x2;
            axpy(&mut dx, dtau, &x1);
            let mut dy = y2;
            axpy(&mut dy, dtau, &y1);
            let mut dz = z2;
            axpy(&mut dz, dtau, &z1);
            let dkappa = (rtk - it.kappa * dtau) / it.tau;
            let dz_s = sc.apply_w(&dz);
            let ld = sc.lambda_div(rc);
            let ds_s: Vec<f64> = (0..nc).map(|i| ld[i] - dz_s[i]).collect();
            let ds = sc.apply_wt(&ds_s);
            Some((dx, dy, dz, ds, dtau, dkappa, dz_s, ds_s))
        };
        let max_step = |dz_s: &[f64], ds_s: &[f64], dtau: f64, dkappa: f64| {
            let mut a = sc.max_step(dz_s).min(sc.max_step(ds_s));
            if dtau < 0.0 {
                a = a.min(-it.tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-it.kappa / dkappa);
            }
            a
        };

        // Predictor.
        let rc_aff: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let rtk_aff = -it.tau * it.kappa;
        let Some((_, _, _, _, dtau_a, dkappa_a, dz_a, ds_a)) = direction(0.0, &rc_aff, rtk_aff) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let alpha_a = max_step(&dz_a, &ds_a, dtau_a, dkappa_a).min(1.0);
        let sigma = (1.0 - alpha_a).powi(3).clamp(0.0, 1.0);

        // Corrector.
        let cross = jordan(&solver.blocks, &ds_a, &dz_a);
        let rc: Vec<f64> = (0..nc).map(|i| -lam_sq[i] - cross[i] + sigma * mu * e[i]).collect();
        let rtk = -it.tau * it.kappa - dtau_a * dkappa_a + sigma * mu;
        let Some((dx, dy, dz, ds, dtau, dkappa, dz_s, ds_s)) = direction(sigma, &rc, rtk) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let alpha = (STEP_FRACTION * max_step(&dz_s, &ds_s, dtau, dkappa)).min(1.0);
        if alpha < 1e-12 {
            stalls += 1;
        } else {
            stalls = 0;
        }
        axpy(&mut it.x, alpha, &dx);
        axpy(&mut it.y, alpha, &dy);
        axpy(&mut it.z, alpha, &dz);
        axpy(&mut it.s, alpha, &ds);
        it.tau += alpha * dtau;
        it.kappa += alpha * dkappa;
        iter += 1;
    }

    let (x, y, z) = match (status, best) {
        (SolveStatus::MaxIter | SolveStatus::NumericalFailure, Some((_, _, x, y, z))) => (x, y, z),
        _ => recover(&solver, &it),
    };
    let res = residuals(cp, &x, &y, &z);
    ConicSolution {
        status,
        primal_objective: dot(&cp.c, &x),
        dual_objective: dot(&cp.b, &y),
        x,
        y,
        z,
        residuals: res,
        iterations: iter,
        certificate,
    }
}

/// Maps the embedded iterate back to a primal-dual triple in the program's sense.
fn recover(solver: &Solver<'_>, it: &Iterate) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let inv = 1.0 / it.tau;
    let mut x = vec![0.0; solver.nvar];
    for j in 0..solver.nfree {
        x[j] = it.x[j] * inv;
    }
    for (o, v) in x[solver.nfree..].iter_mut().zip(&it.s) {
        *o = v * inv;
    }
    let ysign = match solver.cp.sense {
        Sense::Minimize => -1.0,
        Sense::Maximize => 1.0,
    };
    let y: Vec<f64> = it.y.iter().map(|v| ysign * v * inv).collect();
    let mut z = vec![0.0; solver.nvar];
    for (o, v) in z[solver.nfree..].iter_mut().zip(&it.z) {
        *o = v * inv;
    }
    (x, y, z)
}
