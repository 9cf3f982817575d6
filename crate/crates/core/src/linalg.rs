//! Dense complex/real matrices and the eigen/Cholesky kernels built on them.
//!
//! Everything in this crate works at desk scale (embedded dimensions of a few
//! hundred), so the implementations favour determinism and simplicity over
//! asymptotics: cyclic Jacobi for eigendecompositions, unblocked Cholesky,
//! Gaussian elimination for the small affine systems of the compiler.

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<c64>,
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![c64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> c64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(d: &[f64]) -> Self {
        let mut m = CMatrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = c64::new(v, 0.0);
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: c64) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        m
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        m
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row = k * other.cols;
                let orow = i * other.cols;
                for j in 0..other.cols {
                    out.data[orow + j] += a * other.data[row + j];
                }
            }
        }
        out
    }

    /// A · v for a column vector v.
    pub fn matvec(&self, v: &[c64]) -> Vec<c64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![c64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = c64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> c64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn kron(&self, other: &CMatrix) -> Self {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Hermitian deviation ‖A − A†‖_max.
    pub fn hermitian_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol
    }

    /// Symmetrize to (A + A†)/2, rejecting inputs whose anti-Hermitian part
    /// exceeds `tol` in max-norm.
    pub fn hermitized(&self, tol: f64) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::invalid("hermitized: matrix not square"));
        }
        let dev = self.hermitian_deviation();
        if dev > tol {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian: anti-Hermitian part {dev:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        }))
    }

    /// Trace over the first tensor factor: input acts on C^da ⊗ C^db,
    /// output on C^db.
    pub fn partial_trace_first(&self, da: usize, db: usize) -> CMatrix {
        assert_eq!(self.rows, da * db);
        assert!(self.is_square());
        CMatrix::from_fn(db, db, |l, m| {
            (0..da).map(|k| self[(k * db + l, k * db + m)]).sum()
        })
    }

    /// Trace over the second tensor factor: input acts on C^da ⊗ C^db,
    /// output on C^da.
    pub fn partial_trace_second(&self, da: usize, db: usize) -> CMatrix {
        assert_eq!(self.rows, da * db);
        assert!(self.is_square());
        CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|l| self[(i * db + l, j * db + l)]).sum()
        })
    }

    /// Extract the d×d block at block position (bi, bj) of a matrix made of
    /// d×d blocks.
    pub fn block(&self, bi: usize, bj: usize, d: usize) -> CMatrix {
        CMatrix::from_fn(d, d, |i, j| self[(bi * d + i, bj * d + j)])
    }

    pub fn set_block(&mut self, bi: usize, bj: usize, d: usize, b: &CMatrix) {
        for i in 0..d {
            for j in 0..d {
                self[(bi * d + i, bj * d + j)] = b[(i, j)];
            }
        }
    }

    /// Minimum eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = heig(self);
        vals.first().copied().unwrap_or(0.0)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = c64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &c64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut c64 {
        &mut self.data[i * self.cols + j]
    }
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = RMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        RMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    pub fn add(&self, other: &RMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        m
    }

    pub fn sub(&self, other: &RMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        m
    }

    pub fn matmul(&self, other: &RMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = RMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = k * other.cols;
                let orow = i * other.cols;
                for j in 0..other.cols {
                    out.data[orow + j] += a * other.data[row + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// ⟨A, B⟩ = Σ A_ij B_ij.
    pub fn dot(&self, other: &RMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn symmetrize(&mut self) {
        assert!(self.rows == self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for RMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns of `q` (A = q diag(vals) qᵀ).
pub fn eig_sym(a: &RMatrix) -> (Vec<f64>, RMatrix) {
    assert!(a.rows == a.cols, "eig_sym: matrix not square");
    let n = a.rows;
    let mut m = a.clone();
    m.symmetrize();
    let mut q = RMatrix::identity(n);
    let norm = m.frobenius_norm().max(1.0);
    let tol = 1e-14 * norm;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = m[(p, r)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(r, r)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotate rows/columns p and r of m, columns of q.
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkr;
                    m[(k, r)] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mrk;
                    m[(r, k)] = s * mpk + c * mrk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)], i)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vecs = RMatrix::zeros(n, n);
    for (new, &(_, old)) in pairs.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = q[(k, old)];
        }
    }
    (vals, vecs)
}

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi with
/// phased rotations.
///
/// Returns eigenvalues ascending and unitary `q` with A = q diag(vals) q†.
pub fn heig(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(a.is_square(), "heig: matrix not square");
    let n = a.rows;
    let mut m = CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut q = CMatrix::identity(n);
    let norm = m.frobenius_norm().max(1.0);
    let tol = 1e-14 * norm;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = m[(p, r)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(r, r)].re;
                let tau = (app - aqq) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U differs from identity at U[p,p]=c, U[p,r]=-s·phase,
                // U[r,p]=s·conj(phase), U[r,r]=c; apply m ← U† m U, q ← q U.
                let u_pp = c64::new(c, 0.0);
                let u_pr = -phase * s;
                let u_rp = phase.conj() * s;
                let u_rr = c64::new(c, 0.0);
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = mkp * u_pp + mkr * u_rp;
                    m[(k, r)] = mkp * u_pr + mkr * u_rr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = u_pp.conj() * mpk + u_rp.conj() * mrk;
                    m[(r, k)] = u_pr.conj() * mpk + u_rr.conj() * mrk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = qkp * u_pp + qkr * u_rp;
                    q[(k, r)] = qkp * u_pr + qkr * u_rr;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)].re, i)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (new, &(_, old)) in pairs.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = q[(k, old)];
        }
    }
    (vals, vecs)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix,
/// or None if a pivot fails.
pub fn cholesky(a: &RMatrix) -> Option<RMatrix> {
    assert!(a.rows == a.cols);
    let n = a.rows;
    let mut l = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Solve L x = b with L lower triangular.
pub fn solve_lower(l: &RMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = l[(i, k)] * x[k];
            x[i] -= v;
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Solve Lᵀ x = b with L lower triangular.
pub fn solve_lower_transpose(l: &RMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let v = l[(k, i)] * x[k];
            x[i] -= v;
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Solve A x = b via a Cholesky factor L of A.
pub fn chol_solve(l: &RMatrix, b: &[f64]) -> Vec<f64> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

/// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
pub fn chol_inverse(l: &RMatrix) -> RMatrix {
    let n = l.rows;
    let mut inv = RMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = chol_solve(l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    // symmetrize against round-off
    inv.symmetrize();
    inv
}

/// Particular solution and nullspace basis of `A y = b`.
///
/// Returns `(y0, basis)` with `A y0 = b` and the columns of `basis` spanning
/// the nullspace, so the solution set is `{y0 + basis·z}`. Errors if the
/// system is inconsistent.
pub fn affine_parameterization(a: &RMatrix, b: &[f64]) -> Result<(Vec<f64>, RMatrix)> {
    let rows = a.rows;
    let cols = a.cols;
    assert_eq!(rows, b.len());
    // Reduced row echelon form of [A | b] with partial pivoting.
    let mut m = RMatrix::zeros(rows, cols + 1);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = a[(i, j)];
        }
        m[(i, cols)] = b[i];
    }
    let scale = m.max_abs().max(1.0);
    let tol = 1e-11 * scale;
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        // find pivot
        let (mut best, mut best_abs) = (row, 0.0);
        for r in row..rows {
            if m[(r, col)].abs() > best_abs {
                best = r;
                best_abs = m[(r, col)].abs();
            }
        }
        if best_abs <= tol {
            continue;
        }
        if best != row {
            for j in 0..=cols {
                let t = m[(row, j)];
                m[(row, j)] = m[(best, j)];
                m[(best, j)] = t;
            }
        }
        let piv = m[(row, col)];
        for j in 0..=cols {
            m[(row, j)] /= piv;
        }
        for r in 0..rows {
            if r != row {
                let f = m[(r, col)];
                if f != 0.0 {
                    for j in 0..=cols {
                        let v = f * m[(row, j)];
                        m[(r, j)] -= v;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    // consistency: zero rows must have zero rhs
    for r in row..rows {
        if m[(r, cols)].abs() > 1e-8 * scale {
            return Err(Error::invalid(format!(
                "inconsistent linear constraints (residual {:.3e})",
                m[(r, cols)]
            )));
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut y0 = vec![0.0; cols];
    for (r, &pc) in pivots.iter().enumerate() {
        y0[pc] = m[(r, cols)];
    }
    let mut basis = RMatrix::zeros(cols, free.len());
    for (k, &fc) in free.iter().enumerate() {
        basis[(fc, k)] = 1.0;
        for (r, &pc) in pivots.iter().enumerate() {
            basis[(pc, k)] = -m[(r, fc)];
        }
    }
    Ok((y0, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| c64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        g.add(&g.adjoint()).scale(c64::new(0.5, 0.0))
    }

    #[test]
    fn eig_sym_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 17] {
            let g = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
            let mut a = g.add(&g.transpose());
            a.symmetrize();
            let (vals, q) = eig_sym(&a);
            let lam = RMatrix::from_fn(n, n, |i, j| if i == j { vals[i] } else { 0.0 });
            let back = q.matmul(&lam).matmul(&q.transpose());
            assert!(back.sub(&a).max_abs() < 1e-10, "n={n}");
            // orthonormal
            let qtq = q.transpose().matmul(&q);
            assert!(qtq.sub(&RMatrix::identity(n)).max_abs() < 1e-11);
            // ascending
            for w in vals.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }

    #[test]
    fn heig_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 8, 20] {
            let a = random_hermitian(&mut rng, n);
            let (vals, q) = heig(&a);
            let lam = CMatrix::diag(&vals);
            let back = q.matmul(&lam).matmul(&q.adjoint());
            assert!(back.sub(&a).max_abs() < 1e-10, "n={n}");
            let qdq = q.adjoint().matmul(&q);
            assert!(qdq.sub(&CMatrix::identity(n)).max_abs() < 1e-11);
        }
    }

    #[test]
    fn heig_pauli_y() {
        let y = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(0.0, -1.0),
            (1, 0) => c64::new(0.0, 1.0),
            _ => c64::new(0.0, 0.0),
        });
        let (vals, _) = heig(&y);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let g = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        let mut a = g.matmul(&g.transpose());
        for i in 0..n {
            a[(i, i)] += 0.5;
        }
        let l = cholesky(&a).expect("pd");
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let x = chol_solve(&l, &b);
        let r = a.matvec(&x);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-9);
        }
        assert!(cholesky(&RMatrix::from_fn(2, 2, |i, j| if i == j { -1.0 } else { 0.0 })).is_none());
    }

    #[test]
    fn affine_parameterization_solves() {
        // y1 + y2 = 1, y3 free
        let a = RMatrix::from_fn(1, 3, |_, j| if j < 2 { 1.0 } else { 0.0 });
        let (y0, basis) = affine_parameterization(&a, &[1.0]).unwrap();
        assert_eq!(basis.cols, 2);
        let r = a.matvec(&y0);
        assert!((r[0] - 1.0).abs() < 1e-12);
        for k in 0..basis.cols {
            let col: Vec<f64> = (0..3).map(|i| basis[(i, k)]).collect();
            assert!(a.matvec(&col)[0].abs() < 1e-12);
        }
        // inconsistent system
        let a2 = RMatrix::from_fn(2, 1, |_, _| 1.0);
        assert!(affine_parameterization(&a2, &[0.0, 1.0]).is_err());
    }
}
