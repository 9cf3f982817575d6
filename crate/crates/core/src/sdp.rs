//! Dense semidefinite feasibility/optimization kernel.
//!
//! Problems arrive in the affine form
//!
//! ```text
//!   maximize  c·y (+ t)   s.t.   F0 + Σ yᵢ Fᵢ (− t·𝟙) ⪰ 0,   A y = b
//! ```
//!
//! over real symmetric matrices; Hermitian problems are real-embedded by the
//! compiler before they get here. Linear equalities are eliminated onto the
//! affine subspace, then an infeasible-start primal-dual path-following
//! method with a symmetrized HKM Newton direction and Mehrotra
//! predictor-corrector steps runs to the target residuals. Step lengths use
//! the fraction-to-boundary rule with factor 0.98, with positive-definiteness
//! probed by Cholesky bisection. A single solve is sequential and
//! deterministic.

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::{
    affine_parameterization, cholesky, chol_inverse, heig, CMatrix, RMatrix,
};

/// Symmetric sparse matrix as a full entry list (both triangles present).
#[derive(Debug, Clone, Default)]
pub struct SparseSym {
    pub entries: Vec<(u32, u32, f64)>,
}

impl SparseSym {
    pub fn from_entries(entries: Vec<(u32, u32, f64)>) -> Self {
        SparseSym { entries }
    }

    /// Build from upper-triangle entries, mirroring below the diagonal.
    pub fn from_upper(upper: &[(u32, u32, f64)]) -> Self {
        let mut entries = Vec::with_capacity(upper.len() * 2);
        for &(i, j, v) in upper {
            entries.push((i, j, v));
            if i != j {
                entries.push((j, i, v));
            }
        }
        SparseSym { entries }
    }

    pub fn neg_identity(n: usize) -> Self {
        SparseSym {
            entries: (0..n as u32).map(|i| (i, i, -1.0)).collect(),
        }
    }

    pub fn from_dense(m: &RMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows {
            for j in 0..m.cols {
                if m[(i, j)] != 0.0 {
                    entries.push((i as u32, j as u32, m[(i, j)]));
                }
            }
        }
        SparseSym { entries }
    }

    pub fn add_into(&self, target: &mut RMatrix, scale: f64) {
        for &(i, j, v) in &self.entries {
            target[(i as usize, j as usize)] += scale * v;
        }
    }

    pub fn dot_dense(&self, m: &RMatrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| v * m[(i as usize, j as usize)])
            .sum()
    }

    pub fn rows(&self) -> Vec<u32> {
        let mut r: Vec<u32> = self.entries.iter().map(|e| e.0).collect();
        r.sort_unstable();
        r.dedup();
        r
    }

    /// Linear combination Σ wᵢ·matᵢ merged into one sparse matrix.
    pub fn combine(mats: &[SparseSym], weights: &[f64]) -> SparseSym {
        use std::collections::HashMap;
        let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
        for (m, &w) in mats.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for &(i, j, v) in &m.entries {
                *acc.entry((i, j)).or_insert(0.0) += w * v;
            }
        }
        let mut entries: Vec<(u32, u32, f64)> = acc
            .into_iter()
            .filter(|&(_, v)| v.abs() > 0.0)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        SparseSym { entries }
    }
}

/// Affine-parameterized symmetric feasibility/optimization problem.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    /// Side length of the PSD matrix.
    pub dim: usize,
    /// Constant term F0.
    pub base: RMatrix,
    /// Free-variable direction matrices Fᵢ.
    pub directions: Vec<SparseSym>,
    /// Objective coefficients over y (maximized).
    pub objective: Vec<f64>,
    /// Constant objective offset.
    pub objective_shift: f64,
    /// When set, an extra slack variable t with direction −𝟙 and objective
    /// coefficient 1 turns the problem into max-λmin.
    pub lambda_slack: bool,
    /// Optional equality rows a·y = b over the y variables.
    pub equalities: Vec<(Vec<f64>, f64)>,
}

/// Solver tolerances and limits; all tolerances used by the solve live here.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Target for residuals and normalized duality gap.
    pub tol: f64,
    /// Feasibility margin on t_star for membership verdicts.
    pub feas_tol: f64,
    pub max_iters: usize,
    /// Cap on the embedded matrix dimension.
    pub dim_cap: usize,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            feas_tol: 1e-7,
            max_iters: 200,
            dim_cap: 400,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIters,
    NumericalFailure,
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy)]
pub struct IterLog {
    pub iter: usize,
    pub pobj: f64,
    pub dobj: f64,
    pub gap: f64,
    pub res_primal: f64,
    pub res_dual: f64,
}

/// Primal-dual solution with certificates.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Free-variable vector in the original coordinates (slack excluded).
    pub y: Vec<f64>,
    /// max-λmin value for slack problems, λmin of the achieved matrix
    /// otherwise.
    pub t_star: f64,
    /// Achieved objective c·y (+ t) + shift.
    pub objective: f64,
    /// The achieved LMI matrix F0 + Σ y F (− t𝟙).
    pub x_mat: RMatrix,
    /// Dual multiplier matrix (infeasibility witness when t_star < 0).
    pub z_mat: RMatrix,
    pub gap: f64,
    pub res_primal: f64,
    pub res_dual: f64,
    pub iters: usize,
    pub status: SolverStatus,
    pub history: Vec<IterLog>,
}

/// Real embedding of a Hermitian matrix: [[Re H, −Im H], [Im H, Re H]].
/// PSD is preserved and the spectrum doubles in multiplicity.
pub fn embed_hermitian(h: &CMatrix) -> Result<RMatrix> {
    let h = h.hermitized(1e-8)?;
    let d = h.rows;
    let mut out = RMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let v = h[(i, j)];
            out[(i, j)] = v.re;
            out[(i + d, j + d)] = v.re;
            out[(i, j + d)] = -v.im;
            out[(i + d, j)] = v.im;
        }
    }
    Ok(out)
}

/// Inverse of [`embed_hermitian`]; averages the two copies.
pub fn unembed_hermitian(m: &RMatrix) -> CMatrix {
    assert!(m.rows % 2 == 0 && m.rows == m.cols);
    let d = m.rows / 2;
    CMatrix::from_fn(d, d, |i, j| {
        c64::new(
            0.5 * (m[(i, j)] + m[(i + d, j + d)]),
            0.5 * (m[(i + d, j)] - m[(i, j + d)]),
        )
    })
}

/// Embed a complex entry of a Hermitian matrix into the four real slots of
/// the embedding, appending to `out`.
pub fn embed_entry(out: &mut Vec<(u32, u32, f64)>, d: usize, p: usize, q: usize, v: c64) {
    let d = d as u32;
    let (p, q) = (p as u32, q as u32);
    if v.re != 0.0 {
        out.push((p, q, v.re));
        out.push((p + d, q + d, v.re));
    }
    if v.im != 0.0 {
        out.push((p, q + d, -v.im));
        out.push((p + d, q, v.im));
    }
}

/// Gram factor of a PSD Hermitian matrix: V with V†V = G, eigenvalues inside
/// [−clip_tol, clip_tol] clipped to zero and the zero rows dropped, so V has
/// rank(G) rows. Errors when an eigenvalue sits below −clip_tol.
pub fn gram_vectors(g: &CMatrix, clip_tol: f64) -> Result<CMatrix> {
    let (vals, q) = heig(g);
    if let Some(&min) = vals.first() {
        if min < -clip_tol {
            return Err(Error::NotPsd {
                min_eig: min,
                tol: clip_tol,
            });
        }
    }
    let kept: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > clip_tol).collect();
    let n = g.rows;
    let mut v = CMatrix::zeros(kept.len(), n);
    for (row, &e) in kept.iter().enumerate() {
        let s = vals[e].sqrt();
        for col in 0..n {
            v[(row, col)] = q[(col, e)].conj() * s;
        }
    }
    Ok(v)
}

struct Kernel {
    n: usize,
    f0: RMatrix,
    dirs: Vec<SparseSym>,
    b: Vec<f64>,
}

impl Kernel {
    fn lmi(&self, u: &[f64]) -> RMatrix {
        let mut m = self.f0.clone();
        for (d, &w) in self.dirs.iter().zip(u) {
            d.add_into(&mut m, w);
        }
        m
    }
}

/// Largest step α ∈ (0, 1] with M + α·ΔM still positive definite, after the
/// 0.98 fraction-to-boundary rule. Probes definiteness by Cholesky.
fn max_step(m: &RMatrix, dm: &RMatrix) -> f64 {
    const GAMMA: f64 = 0.98;
    let psd_at = |alpha: f64| -> bool {
        let cand = m.add(&dm.scale(alpha));
        cholesky(&cand).is_some()
    };
    if psd_at(1.0 / GAMMA) {
        return 1.0;
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0 / GAMMA;
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if psd_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut alpha = GAMMA * lo;
    for _ in 0..12 {
        if alpha <= 1e-14 || psd_at(alpha) {
            break;
        }
        alpha *= 0.9;
    }
    alpha.min(1.0)
}

fn frob(m: &RMatrix) -> f64 {
    m.frobenius_norm()
}

/// Solve the canonical form max b·u s.t. F0 + Σ uᵢFᵢ ⪰ 0.
fn solve_canonical(k: &Kernel, opts: &SolverOptions) -> Result<SdpSolution> {
    let n = k.n;
    let m = k.dirs.len();
    if m == 0 {
        let s = k.f0.clone();
        return Ok(SdpSolution {
            y: vec![],
            t_star: 0.0,
            objective: 0.0,
            x_mat: s.clone(),
            z_mat: RMatrix::zeros(n, n),
            gap: 0.0,
            res_primal: 0.0,
            res_dual: 0.0,
            iters: 0,
            status: SolverStatus::Optimal,
            history: vec![],
        });
    }

    let tau = 1.0 + k.f0.max_abs();
    let mut u = vec![0.0f64; m];
    let mut s = RMatrix::identity(n).scale(tau);
    let mut x = RMatrix::identity(n).scale(tau);
    let norm_f0 = 1.0 + frob(&k.f0);
    let norm_b = 1.0 + k.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut history = Vec::new();
    let mut status = SolverStatus::MaxIters;
    let mut iters = opts.max_iters;
    let mut stalls = 0usize;

    let dir_rows: Vec<Vec<u32>> = k.dirs.iter().map(|d| d.rows()).collect();

    for iter in 0..opts.max_iters {
        // residuals
        let lmi = k.lmi(&u);
        let rs = lmi.sub(&s);
        let r: Vec<f64> = (0..m)
            .map(|i| k.b[i] + k.dirs[i].dot_dense(&x))
            .collect();
        let xs: f64 = x.dot(&s);
        let mu = xs / n as f64;
        let pobj = k.f0.dot(&x);
        let dobj: f64 = k.b.iter().zip(&u).map(|(b, u)| b * u).sum();
        let gap = xs.abs() / (1.0 + pobj.abs() + dobj.abs());
        let res_p = frob(&rs) / norm_f0;
        let res_d = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm_b;
        history.push(IterLog {
            iter,
            pobj,
            dobj,
            gap,
            res_primal: res_p,
            res_dual: res_d,
        });
        if opts.verbose {
            eprintln!(
                "  iter {iter:3}  gap {gap:9.3e}  res_p {res_p:9.3e}  res_d {res_d:9.3e}  pobj {pobj:+.6e}  dobj {dobj:+.6e}"
            );
        }
        if gap <= opts.tol && res_p <= opts.tol && res_d <= opts.tol {
            status = SolverStatus::Optimal;
            iters = iter;
            break;
        }

        // factor S
        let chol_s = match cholesky(&s) {
            Some(l) => l,
            None => {
                status = SolverStatus::NumericalFailure;
                iters = iter;
                break;
            }
        };
        let sinv = chol_inverse(&chol_s);

        // Schur complement H[i][j] = <F_i, S^{-1} F_j X>
        let mut h = RMatrix::zeros(m, m);
        let mut t = RMatrix::zeros(n, n);
        for j in 0..m {
            for v in t.data.iter_mut() {
                *v = 0.0;
            }
            // A = F_j X, only rows of F_j populated; T = S^{-1} A
            let mut a_rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(dir_rows[j].len());
            for &row in &dir_rows[j] {
                a_rows.push((row as usize, vec![0.0; n]));
            }
            for &(p, q, v) in &k.dirs[j].entries {
                let slot = a_rows
                    .binary_search_by_key(&(p as usize), |e| e.0)
                    .expect("row present");
                let dst = &mut a_rows[slot].1;
                let xrow = q as usize * n;
                for c in 0..n {
                    dst[c] += v * x.data[xrow + c];
                }
            }
            for (row, arow) in &a_rows {
                for rr in 0..n {
                    let w = sinv[(rr, *row)];
                    if w == 0.0 {
                        continue;
                    }
                    let trow = rr * n;
                    for c in 0..n {
                        t.data[trow + c] += w * arow[c];
                    }
                }
            }
            for i in 0..m {
                h[(i, j)] = k.dirs[i].dot_dense(&t);
            }
        }
        h.symmetrize();

        let h_scale = 1.0 + (0..m).map(|i| h[(i, i)].abs()).fold(0.0, f64::max);
        let chol_h = match [0.0, 1e-12, 1e-9, 1e-6]
            .iter()
            .find_map(|&reg| {
                let mut hreg = h.clone();
                for i in 0..m {
                    hreg[(i, i)] += reg * h_scale;
                }
                cholesky(&hreg)
            }) {
            Some(l) => l,
            None => {
                status = SolverStatus::NumericalFailure;
                iters = iter;
                break;
            }
        };

        // W = S^{-1} Rs X, shared by both rhs builds
        let w_rs = sinv.matmul(&rs).matmul(&x);
        let newton = |sigma_mu: f64, corr: Option<&RMatrix>| -> (Vec<f64>, RMatrix, RMatrix) {
            let rhs: Vec<f64> = (0..m)
                .map(|i| {
                    let mut v = k.b[i] - k.dirs[i].dot_dense(&w_rs);
                    if sigma_mu != 0.0 {
                        v += sigma_mu * k.dirs[i].dot_dense(&sinv);
                    }
                    if let Some(c) = corr {
                        v -= k.dirs[i].dot_dense(c);
                    }
                    v
                })
                .collect();
            let du = crate::linalg::chol_solve(&chol_h, &rhs);
            let mut ds = rs.clone();
            for (d, &w) in k.dirs.iter().zip(&du) {
                d.add_into(&mut ds, w);
            }
            // ΔX = σμ S^{-1} − X − S^{-1} ΔS X (− corrector term), symmetrized
            let mut dx = sinv.matmul(&ds).matmul(&x).scale(-1.0).sub(&x);
            if sigma_mu != 0.0 {
                dx = dx.add(&sinv.scale(sigma_mu));
            }
            if let Some(c) = corr {
                dx = dx.sub(c);
            }
            let mut dxs = dx.add(&dx.transpose()).scale(0.5);
            dxs.symmetrize();
            (du, ds, dxs)
        };

        // predictor
        let (_du_aff, ds_aff, dx_aff) = newton(0.0, None);
        let ap_aff = max_step(&x, &dx_aff);
        let ad_aff = max_step(&s, &ds_aff);
        let x_aff = x.add(&dx_aff.scale(ap_aff));
        let s_aff = s.add(&ds_aff.scale(ad_aff));
        let mu_aff = x_aff.dot(&s_aff) / n as f64;
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-8, 0.99);

        // corrector with second-order term S^{-1} ΔS_aff ΔX_aff
        let corr = sinv.matmul(&ds_aff).matmul(&dx_aff);
        let (du, ds, dx) = newton(sigma * mu, Some(&corr));
        let ap = max_step(&x, &dx);
        let ad = max_step(&s, &ds);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                status = SolverStatus::NumericalFailure;
                iters = iter;
                break;
            }
        } else {
            stalls = 0;
        }
        for (ui, d) in u.iter_mut().zip(&du) {
            *ui += ad * d;
        }
        s = s.add(&ds.scale(ad));
        x = x.add(&dx.scale(ap));
    }

    let last = history.last().copied().unwrap_or(IterLog {
        iter: 0,
        pobj: 0.0,
        dobj: 0.0,
        gap: f64::INFINITY,
        res_primal: f64::INFINITY,
        res_dual: f64::INFINITY,
    });
    let achieved = k.lmi(&u);
    Ok(SdpSolution {
        y: u,
        t_star: 0.0,
        objective: last.dobj,
        x_mat: achieved,
        z_mat: x,
        gap: last.gap,
        res_primal: last.res_primal,
        res_dual: last.res_dual,
        iters,
        status,
        history,
    })
}

/// Solve an [`SdpProblem`]: eliminate equalities, append the λ-slack when
/// requested, run the interior-point method, and map back to the original
/// variables.
pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let n = problem.dim;
    if n > opts.dim_cap {
        return Err(Error::invalid(format!(
            "problem dimension {n} exceeds the cap {}",
            opts.dim_cap
        )));
    }
    let m0 = problem.directions.len();
    if problem.objective.len() != m0 {
        return Err(Error::invalid("objective length must match directions"));
    }

    // equality elimination: y = y0 + B z
    let (y0, basis) = if problem.equalities.is_empty() {
        (vec![0.0; m0], RMatrix::identity(m0))
    } else {
        let rows = problem.equalities.len();
        let a = RMatrix::from_fn(rows, m0, |i, j| problem.equalities[i].0[j]);
        let b: Vec<f64> = problem.equalities.iter().map(|e| e.1).collect();
        affine_parameterization(&a, &b)?
    };

    let mut base = problem.base.clone();
    for (d, &w) in problem.directions.iter().zip(&y0) {
        d.add_into(&mut base, w);
    }
    let mz = basis.cols;
    let mut dirs: Vec<SparseSym> = (0..mz)
        .map(|j| {
            let weights: Vec<f64> = (0..m0).map(|i| basis[(i, j)]).collect();
            SparseSym::combine(&problem.directions, &weights)
        })
        .collect();
    let mut b_obj: Vec<f64> = (0..mz)
        .map(|j| (0..m0).map(|i| problem.objective[i] * basis[(i, j)]).sum())
        .collect();

    if problem.lambda_slack {
        dirs.push(SparseSym::neg_identity(n));
        b_obj.push(1.0);
    }

    let kernel = Kernel {
        n,
        f0: base,
        dirs,
        b: b_obj,
    };
    let mut sol = solve_canonical(&kernel, opts)?;

    // map back to original coordinates
    let (z_coords, t) = if problem.lambda_slack {
        let (z, t) = sol.y.split_at(mz);
        (z.to_vec(), t.first().copied().unwrap_or(0.0))
    } else {
        (sol.y.clone(), 0.0)
    };
    let mut y_full = y0;
    for j in 0..mz {
        for i in 0..m0 {
            y_full[i] += basis[(i, j)] * z_coords[j];
        }
    }
    // achieved LMI matrix in original terms (without the slack shift)
    let mut achieved = problem.base.clone();
    for (d, &w) in problem.directions.iter().zip(&y_full) {
        d.add_into(&mut achieved, w);
    }
    let slack_mat = if problem.lambda_slack {
        achieved.sub(&RMatrix::identity(n).scale(t))
    } else {
        achieved.clone()
    };
    sol.t_star = if problem.lambda_slack {
        t
    } else {
        let (vals, _) = crate::linalg::eig_sym(&achieved);
        vals.first().copied().unwrap_or(0.0)
    };
    sol.objective = problem
        .objective
        .iter()
        .zip(&y_full)
        .map(|(c, y)| c * y)
        .sum::<f64>()
        + problem.objective_shift
        + if problem.lambda_slack { t } else { 0.0 };
    sol.y = y_full;
    sol.x_mat = slack_mat;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn embedding_examples() {
        let id = CMatrix::identity(2);
        let e = embed_hermitian(&id).unwrap();
        assert!(e.sub(&RMatrix::identity(4)).max_abs() == 0.0);

        let y = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(0.0, -1.0),
            (1, 0) => c64::new(0.0, 1.0),
            _ => c64::new(0.0, 0.0),
        });
        let ey = embed_hermitian(&y).unwrap();
        let (vals, _) = crate::linalg::eig_sym(&ey);
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (v, e) in vals.iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-12);
        }

        let d = CMatrix::diag(&[1.0, 0.0]);
        let ed = embed_hermitian(&d).unwrap();
        let (vals, _) = crate::linalg::eig_sym(&ed);
        assert!((vals[0]).abs() < 1e-12 && (vals[1]).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12 && (vals[3] - 1.0).abs() < 1e-12);

        // round trip
        let h = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                c64::new(1.0 + i as f64, 0.0)
            } else if i < j {
                c64::new(0.3, 0.7)
            } else {
                c64::new(0.3, -0.7)
            }
        });
        let back = unembed_hermitian(&embed_hermitian(&h).unwrap());
        assert!(back.sub(&h).max_abs() == 0.0);
    }

    #[test]
    fn embedding_spectrum_doubles_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let h = crate::fixtures::random_hermitian(&mut rng, 5);
            let (cv, _) = heig(&h);
            let (rv, _) = crate::linalg::eig_sym(&embed_hermitian(&h).unwrap());
            for (i, v) in cv.iter().enumerate() {
                assert!((rv[2 * i] - v).abs() < 1e-9);
                assert!((rv[2 * i + 1] - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gram_vectors_examples() {
        // identity: unitary V
        let v = gram_vectors(&CMatrix::identity(3), 1e-10).unwrap();
        assert_eq!(v.rows, 3);
        let vtv = v.adjoint().matmul(&v);
        assert!(vtv.sub(&CMatrix::identity(3)).max_abs() < 1e-10);

        // all-ones 2x2: rank 1, equal columns with norm² = 1
        let ones = CMatrix::from_fn(2, 2, |_, _| c64::new(1.0, 0.0));
        let v = gram_vectors(&ones, 1e-10).unwrap();
        assert_eq!(v.rows, 1);
        let back = v.adjoint().matmul(&v);
        assert!(back.sub(&ones).max_abs() < 1e-10);

        // tiny negative eigenvalue within the clip is fine
        let near = CMatrix::diag(&[1.0, -1e-12]);
        assert!(gram_vectors(&near, 1e-10).is_ok());
        // real negative eigenvalue is not
        let bad = CMatrix::diag(&[1.0, -1e-3]);
        assert!(matches!(gram_vectors(&bad, 1e-10), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn gram_vectors_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let n = rng.gen_range(1..=30);
            let g = crate::fixtures::random_hermitian(&mut rng, n);
            let psd = g.matmul(&g.adjoint());
            let v = gram_vectors(&psd, 1e-10).unwrap();
            let back = v.adjoint().matmul(&v);
            let dev = back.sub(&psd).frobenius_norm();
            assert!(dev <= 1e-8 * psd.frobenius_norm().max(1.0), "dev {dev}");
        }
    }

    fn smallest_eig_problem() -> SdpProblem {
        SdpProblem {
            dim: 2,
            base: RMatrix::from_fn(2, 2, |i, j| if i == j { (i + 1) as f64 } else { 0.0 }),
            directions: vec![],
            objective: vec![],
            objective_shift: 0.0,
            lambda_slack: true,
            equalities: vec![],
        }
    }

    #[test]
    fn solve_smallest_eigenvalue() {
        let sol = solve(&smallest_eig_problem(), &opts()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.t_star - 1.0).abs() < 1e-6, "t_star {}", sol.t_star);
    }

    #[test]
    fn solve_free_offdiagonal() {
        // maximize t s.t. [[1,y],[y,1]] − t𝟙 ⪰ 0 → t* = 1 at y = 0
        let p = SdpProblem {
            dim: 2,
            base: RMatrix::identity(2),
            directions: vec![SparseSym::from_upper(&[(0, 1, 1.0)])],
            objective: vec![0.0],
            objective_shift: 0.0,
            lambda_slack: true,
            equalities: vec![],
        };
        let sol = solve(&p, &opts()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.t_star - 1.0).abs() < 1e-6);
        assert!(sol.y[0].abs() < 1e-5);
    }

    #[test]
    fn solve_with_equalities() {
        // maximize t s.t. diag(y1, y2) − t𝟙 ⪰ 0, y1 + y2 = 2.
        // Optimum puts y1 = y2 = 1, t = 1.
        let p = SdpProblem {
            dim: 2,
            base: RMatrix::zeros(2, 2),
            directions: vec![
                SparseSym::from_upper(&[(0, 0, 1.0)]),
                SparseSym::from_upper(&[(1, 1, 1.0)]),
            ],
            objective: vec![0.0, 0.0],
            objective_shift: 0.0,
            lambda_slack: true,
            equalities: vec![(vec![1.0, 1.0], 2.0)],
        };
        let sol = solve(&p, &opts()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.t_star - 1.0).abs() < 1e-6);
        assert!((sol.y[0] - 1.0).abs() < 1e-5 && (sol.y[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn solve_linear_objective() {
        // maximize y s.t. [[1, y],[y, 1]] ⪰ 0 → y* = 1
        let p = SdpProblem {
            dim: 2,
            base: RMatrix::identity(2),
            directions: vec![SparseSym::from_upper(&[(0, 1, 1.0)])],
            objective: vec![1.0],
            objective_shift: 0.0,
            lambda_slack: false,
            equalities: vec![],
        };
        let sol = solve(&p, &opts()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-6, "obj {}", sol.objective);
    }

    #[test]
    fn random_strictly_feasible_problems_reach_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for case in 0..12 {
            let n = rng.gen_range(5..=40);
            let m = rng.gen_range(1..=5);
            let g = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
            let mut base = g.matmul(&g.transpose());
            for i in 0..n {
                base[(i, i)] += 0.5;
            }
            let dirs: Vec<SparseSym> = (0..m)
                .map(|_| {
                    let d = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
                    let mut sym = d.add(&d.transpose()).scale(0.5);
                    sym.symmetrize();
                    SparseSym::from_dense(&sym)
                })
                .collect();
            let p = SdpProblem {
                dim: n,
                base,
                directions: dirs,
                objective: vec![0.0; m],
                objective_shift: 0.0,
                lambda_slack: true,
                equalities: vec![],
            };
            let sol = solve(&p, &opts()).unwrap();
            assert_eq!(sol.status, SolverStatus::Optimal, "case {case} n {n} m {m}");
            assert!(sol.gap <= 1e-8);
            assert!(sol.iters <= 60, "iters {}", sol.iters);
            // the reported matrix is PSD at the reported margin
            let (vals, _) = crate::linalg::eig_sym(&sol.x_mat);
            assert!(vals[0] >= -1e-7);
        }
    }

    #[test]
    fn weak_duality_along_the_path() {
        let p = smallest_eig_problem();
        let sol = solve(&p, &opts()).unwrap();
        for log in &sol.history {
            // once near-feasible, the maximization objective cannot exceed
            // the minimization objective by more than the residual slack
            if log.res_primal < 1e-9 && log.res_dual < 1e-9 {
                assert!(log.dobj <= log.pobj + 1e-6);
            }
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let mut p = smallest_eig_problem();
        p.dim = 500;
        p.base = RMatrix::identity(500);
        assert!(solve(&p, &opts()).is_err());
    }
}
