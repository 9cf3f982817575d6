//! Tomographically complete projective frames and linear-inversion
//! reconstruction.
//!
//! A frame is a measurement set whose projectors span the full d²-dimensional
//! real space of Hermitian matrices, together with dual operators D_{b|y}
//! satisfying Σ Tr(Π_{b|y} H)·D_{b|y} = H. The dual is computed from the
//! Moore-Penrose pseudo-inverse of the frame Gram matrix; the frame is
//! overcomplete, and any valid dual reconstructs identically on the span.

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, CMatrix, RMatrix};
use crate::quantum::{assemblage_correlation, Assemblage, Correlation, MeasurementSet};

/// A tomographically complete projective measurement set with its dual frame.
#[derive(Debug, Clone)]
pub struct TomographyFrame {
    pub dim: usize,
    pub measurements: MeasurementSet,
    duals: Vec<CMatrix>,
    pub name: String,
}

/// Dimension of the real span of a set of Hermitian operators.
pub fn hermitian_span_rank(ops: &[CMatrix], dim: usize) -> usize {
    let k = ops.len();
    if k == 0 {
        return 0;
    }
    // Gram of the operators as real vectors; rank = eigenvalues above cutoff.
    let mut gram = RMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = ops[i].adjoint().matmul(&ops[j]).trace().re;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let (vals, _) = eig_sym(&gram);
    let top = vals.last().copied().unwrap_or(0.0).max(1e-30);
    let cut = top * 1e-10 * (dim * dim) as f64;
    vals.iter().filter(|&&v| v > cut).count()
}

/// True iff the operators span the full d²-dimensional Hermitian space.
pub fn is_tomographically_complete(meas: &MeasurementSet, dim: usize) -> bool {
    hermitian_span_rank(meas.ops(), dim) == dim * dim
}

impl TomographyFrame {
    /// Build a frame from a measurement set, computing the dual operators and
    /// verifying the reconstruction identity on a Hermitian basis.
    pub fn new(measurements: MeasurementSet, name: impl Into<String>) -> Result<Self> {
        let dim = measurements.dim;
        let ops = measurements.ops();
        let rank = hermitian_span_rank(ops, dim);
        if rank != dim * dim {
            return Err(Error::invalid(format!(
                "measurements are not tomographically complete: span rank {rank} < {}",
                dim * dim
            )));
        }
        let k = ops.len();
        let mut gram = RMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = ops[i].adjoint().matmul(&ops[j]).trace().re;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let (vals, q) = eig_sym(&gram);
        let top = vals.last().copied().unwrap_or(0.0).max(1e-30);
        let cut = top * 1e-12 * k as f64;
        // pinv(G) = Q Λ⁺ Qᵀ
        let mut pinv = RMatrix::zeros(k, k);
        for e in 0..k {
            if vals[e] <= cut {
                continue;
            }
            let inv = 1.0 / vals[e];
            for i in 0..k {
                let qi = q[(i, e)] * inv;
                if qi == 0.0 {
                    continue;
                }
                for j in 0..k {
                    pinv[(i, j)] += qi * q[(j, e)];
                }
            }
        }
        let duals: Vec<CMatrix> = (0..k)
            .map(|j| {
                let mut d = CMatrix::zeros(dim, dim);
                for i in 0..k {
                    let w = pinv[(j, i)];
                    if w != 0.0 {
                        d = d.add(&ops[i].scale(c64::new(w, 0.0)));
                    }
                }
                d
            })
            .collect();
        let frame = TomographyFrame {
            dim,
            measurements,
            duals,
            name: name.into(),
        };
        frame.verify_reconstruction(1e-9)?;
        Ok(frame)
    }

    pub fn duals(&self) -> &[CMatrix] {
        &self.duals
    }

    pub fn dual(&self, output: usize, input: usize) -> &CMatrix {
        &self.duals[input * self.measurements.n_outputs + output]
    }

    /// Number of (b,y) slots, i.e. the length of a probability vector.
    pub fn len(&self) -> usize {
        self.duals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.duals.is_empty()
    }

    /// Flat index of the (output, input) slot, matching [`MeasurementSet::op`].
    pub fn slot(&self, output: usize, input: usize) -> usize {
        input * self.measurements.n_outputs + output
    }

    /// Check Σ Tr(Π H)·D = H on a basis of Hermitian matrices.
    fn verify_reconstruction(&self, tol: f64) -> Result<()> {
        let d = self.dim;
        let mut basis: Vec<CMatrix> = Vec::new();
        for i in 0..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, i)] = c64::new(1.0, 0.0);
            basis.push(m);
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let mut s = CMatrix::zeros(d, d);
                s[(i, j)] = c64::new(1.0, 0.0);
                s[(j, i)] = c64::new(1.0, 0.0);
                basis.push(s);
                let mut a = CMatrix::zeros(d, d);
                a[(i, j)] = c64::new(0.0, -1.0);
                a[(j, i)] = c64::new(0.0, 1.0);
                basis.push(a);
            }
        }
        for h in &basis {
            let probs = self.expectation_vector(h);
            let back = self.reconstruct(&probs)?;
            let dev = back.sub(h).max_abs();
            if dev > tol {
                return Err(Error::invalid(format!(
                    "dual frame does not reconstruct the Hermitian basis: deviation {dev:.3e}"
                )));
            }
        }
        Ok(())
    }

    /// The vector Tr(Π_{b|y} H) over all slots.
    pub fn expectation_vector(&self, h: &CMatrix) -> Vec<f64> {
        let m = &self.measurements;
        let mut out = vec![0.0; self.len()];
        for y in 0..m.n_inputs {
            for b in 0..m.n_outputs {
                out[self.slot(b, y)] = m.op(b, y).matmul(h).trace().re;
            }
        }
        out
    }

    /// Linear inversion: Σ probs\[b,y\]·D_{b|y}.
    pub fn reconstruct(&self, probs: &[f64]) -> Result<CMatrix> {
        if probs.len() != self.len() {
            return Err(Error::invalid(format!(
                "reconstruct: expected {} probabilities, got {}",
                self.len(),
                probs.len()
            )));
        }
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (p, d) in probs.iter().zip(&self.duals) {
            if *p != 0.0 {
                acc = acc.add(&d.scale(c64::new(*p, 0.0)));
            }
        }
        Ok(acc)
    }

    /// Complex-linear extension of the reconstruction map, used when lifting
    /// moment-matrix entries rather than physical probabilities.
    pub fn reconstruct_complex(&self, coeffs: &[c64]) -> Result<CMatrix> {
        if coeffs.len() != self.len() {
            return Err(Error::invalid(format!(
                "reconstruct: expected {} coefficients, got {}",
                self.len(),
                coeffs.len()
            )));
        }
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (z, d) in coeffs.iter().zip(&self.duals) {
            if z.norm_sqr() != 0.0 {
                acc = acc.add(&d.scale(*z));
            }
        }
        Ok(acc)
    }
}

fn qubit_basis_vectors(which: usize) -> [[c64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match which {
        // X
        0 => [
            [c64::new(h, 0.0), c64::new(h, 0.0)],
            [c64::new(h, 0.0), c64::new(-h, 0.0)],
        ],
        // Y
        1 => [
            [c64::new(h, 0.0), c64::new(0.0, h)],
            [c64::new(h, 0.0), c64::new(0.0, -h)],
        ],
        // Z
        _ => [
            [c64::new(1.0, 0.0), c64::new(0.0, 0.0)],
            [c64::new(0.0, 0.0), c64::new(1.0, 0.0)],
        ],
    }
}

/// The Pauli frame on n qubits: the 3ⁿ eigenbases of tensor products of
/// {X,Y,Z}. Capped at n ≤ 3 (d ≤ 8).
pub fn pauli_frame(n_qubits: usize) -> Result<TomographyFrame> {
    if n_qubits < 1 || n_qubits > 3 {
        return Err(Error::invalid(format!(
            "pauli_frame supports 1..=3 qubits, got {n_qubits}"
        )));
    }
    let d = 1usize << n_qubits;
    let n_settings = 3usize.pow(n_qubits as u32);
    let mut ops = Vec::with_capacity(n_settings * d);
    for setting in 0..n_settings {
        // ternary digits pick X/Y/Z per qubit
        let mut digits = Vec::with_capacity(n_qubits);
        let mut s = setting;
        for _ in 0..n_qubits {
            digits.push(s % 3);
            s /= 3;
        }
        digits.reverse();
        for outcome in 0..d {
            let mut proj = CMatrix::identity(1);
            for (q, &axis) in digits.iter().enumerate() {
                let bit = (outcome >> (n_qubits - 1 - q)) & 1;
                let v = qubit_basis_vectors(axis)[bit];
                let p = CMatrix::from_fn(2, 2, |i, j| v[i] * v[j].conj());
                proj = proj.kron(&p);
            }
            ops.push(proj);
        }
    }
    let meas = MeasurementSet::new(d, d, n_settings, ops)?;
    TomographyFrame::new(meas, format!("pauli:{n_qubits}"))
}

/// Projective frame for arbitrary d from the eigenbases of the generalized
/// Gell-Mann operators: the computational basis plus, for every pair j<k, the
/// symmetric and antisymmetric two-level rotations. Measurements are padded
/// with zero operators to a uniform d outcomes.
pub fn gell_mann_frame(d: usize) -> Result<TomographyFrame> {
    if d < 2 {
        return Err(Error::invalid("gell_mann_frame needs d >= 2"));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut settings: Vec<Vec<CMatrix>> = Vec::new();
    let comp: Vec<CMatrix> = (0..d)
        .map(|j| {
            let mut m = CMatrix::zeros(d, d);
            m[(j, j)] = c64::new(1.0, 0.0);
            m
        })
        .collect();
    settings.push(comp);
    for j in 0..d {
        for k in (j + 1)..d {
            for antisym in [false, true] {
                let mut vp = vec![c64::new(0.0, 0.0); d];
                let mut vm = vec![c64::new(0.0, 0.0); d];
                vp[j] = c64::new(h, 0.0);
                vm[j] = c64::new(h, 0.0);
                if antisym {
                    vp[k] = c64::new(0.0, h);
                    vm[k] = c64::new(0.0, -h);
                } else {
                    vp[k] = c64::new(h, 0.0);
                    vm[k] = c64::new(-h, 0.0);
                }
                let pp = CMatrix::from_fn(d, d, |r, c| vp[r] * vp[c].conj());
                let pm = CMatrix::from_fn(d, d, |r, c| vm[r] * vm[c].conj());
                let rest = CMatrix::identity(d).sub(&pp).sub(&pm);
                let mut outcomes = vec![pp, pm, rest];
                while outcomes.len() < d {
                    outcomes.push(CMatrix::zeros(d, d));
                }
                outcomes.truncate(d.max(3));
                // for d = 2 the rest-projector is zero and the list is
                // truncated back to the two genuine outcomes
                if d == 2 {
                    outcomes.truncate(2);
                }
                settings.push(outcomes);
            }
        }
    }
    let n_inputs = settings.len();
    let n_outputs = settings[0].len();
    let ops: Vec<CMatrix> = settings.into_iter().flatten().collect();
    let meas = MeasurementSet::new(d, n_outputs, n_inputs, ops)?;
    TomographyFrame::new(meas, format!("gell-mann:{d}"))
}

/// Default frame for dimension d: Pauli for powers of two up to 8, Gell-Mann
/// eigenbases otherwise. d = 1 gets the trivial single-outcome frame.
pub fn default_frame(d: usize) -> Result<TomographyFrame> {
    match d {
        1 => TomographyFrame::new(MeasurementSet::trivial(1), "trivial:1"),
        2 => pauli_frame(1),
        4 => pauli_frame(2),
        8 => pauli_frame(3),
        _ => gell_mann_frame(d),
    }
}

/// Tomographic correlation of an assemblage: Bob measures the frame.
pub fn tomographic_correlation(
    assemblage: &Assemblage,
    frame: &TomographyFrame,
) -> Result<Correlation> {
    let mut corr = assemblage_correlation(assemblage, &frame.measurements)?;
    corr.tomographic_frame = Some(frame.name.clone());
    Ok(corr)
}
