//! Assemblages, correlations, measurements and the Born rule.
//!
//! Assemblage elements are subnormalised d×d PSD blocks indexed by the joint
//! outcome/input labels of the black-box parties; their traces are the
//! outcome probabilities and their sum over outcomes is input-independent
//! exactly when the assemblage is non-signalling.

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::words::{PartyDims, PartyLayout, Scenario};

/// Eigenvalues above -PSD_TOL count as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;
/// Anti-Hermitian parts above this max-norm are rejected on load.
pub const HERM_TOL: f64 = 1e-8;
/// Default non-signalling tolerance gating marginals and compilation.
pub const NS_TOL: f64 = 1e-7;

/// Flat index of a digit tuple with per-position radices (first digit most
/// significant).
pub fn flat_index(digits: &[usize], radices: &[usize]) -> usize {
    debug_assert_eq!(digits.len(), radices.len());
    let mut idx = 0;
    for (d, r) in digits.iter().zip(radices) {
        debug_assert!(d < r);
        idx = idx * r + d;
    }
    idx
}

/// All digit tuples for the given radices, in flat-index order.
pub fn all_tuples(radices: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = radices.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0usize; radices.len()];
    for _ in 0..total {
        out.push(cur.clone());
        for pos in (0..radices.len()).rev() {
            cur[pos] += 1;
            if cur[pos] < radices[pos] {
                break;
            }
            cur[pos] = 0;
        }
    }
    out
}

/// A complete set of measurements on a `dim`-dimensional system: operators
/// indexed by (output, input), PSD and summing to the identity per input.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub dim: usize,
    pub n_outputs: usize,
    pub n_inputs: usize,
    ops: Vec<CMatrix>,
}

impl MeasurementSet {
    pub fn new(dim: usize, n_outputs: usize, n_inputs: usize, ops: Vec<CMatrix>) -> Result<Self> {
        if ops.len() != n_outputs * n_inputs {
            return Err(Error::invalid(format!(
                "measurement set needs {} operators, got {}",
                n_outputs * n_inputs,
                ops.len()
            )));
        }
        let mut herm = Vec::with_capacity(ops.len());
        for (i, op) in ops.iter().enumerate() {
            if op.rows != dim || op.cols != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.rows,
                    context: format!("measurement operator {i}"),
                });
            }
            let h = op.hermitized(HERM_TOL)?;
            let min_eig = h.min_eigenvalue();
            if min_eig < -PSD_TOL {
                return Err(Error::NotPsd {
                    min_eig,
                    tol: PSD_TOL,
                });
            }
            herm.push(h);
        }
        let set = MeasurementSet {
            dim,
            n_outputs,
            n_inputs,
            ops: herm,
        };
        for y in 0..n_inputs {
            let mut sum = CMatrix::zeros(dim, dim);
            for b in 0..n_outputs {
                sum = sum.add(set.op(b, y));
            }
            let dev = sum.sub(&CMatrix::identity(dim)).max_abs();
            if dev > 1e-9 {
                return Err(Error::invalid(format!(
                    "measurement input {y} not complete: deviation from identity {dev:.3e}"
                )));
            }
        }
        Ok(set)
    }

    pub fn op(&self, output: usize, input: usize) -> &CMatrix {
        &self.ops[input * self.n_outputs + output]
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        self.ops
            .iter()
            .all(|m| m.matmul(m).sub(m).max_abs() <= tol)
    }

    /// The single trivial measurement {𝟙}.
    pub fn trivial(dim: usize) -> MeasurementSet {
        MeasurementSet {
            dim,
            n_outputs: 1,
            n_inputs: 1,
            ops: vec![CMatrix::identity(dim)],
        }
    }

    pub fn dims(&self) -> PartyDims {
        PartyDims {
            n_outputs: self.n_outputs,
            n_inputs: self.n_inputs,
        }
    }
}

/// An assemblage: one d×d Hermitian block per joint outcome/input tuple of
/// the black-box parties.
#[derive(Debug, Clone)]
pub struct Assemblage {
    pub scenario: Scenario,
    elements: Vec<CMatrix>,
}

impl Assemblage {
    pub fn new(scenario: Scenario, elements: Vec<CMatrix>) -> Result<Self> {
        scenario.validate()?;
        let expected = scenario.n_output_tuples() * scenario.n_input_tuples();
        if elements.len() != expected {
            return Err(Error::invalid(format!(
                "assemblage needs {expected} elements, got {}",
                elements.len()
            )));
        }
        let d = scenario.bob_dim;
        let mut herm = Vec::with_capacity(elements.len());
        for el in &elements {
            if el.rows != d || el.cols != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: el.rows,
                    context: "assemblage element".into(),
                });
            }
            herm.push(el.hermitized(HERM_TOL)?);
        }
        Ok(Assemblage {
            scenario,
            elements: herm,
        })
    }

    /// Build from a closure over (outputs, inputs).
    pub fn from_fn(
        scenario: Scenario,
        mut f: impl FnMut(&[usize], &[usize]) -> CMatrix,
    ) -> Result<Self> {
        let out_radices = vec![scenario.n_outputs; scenario.n_parties];
        let in_radices = vec![scenario.n_inputs; scenario.n_parties];
        let mut elements = Vec::new();
        for a in all_tuples(&out_radices) {
            for x in all_tuples(&in_radices) {
                elements.push(f(&a, &x));
            }
        }
        Assemblage::new(scenario, elements)
    }

    fn index(&self, outputs: &[usize], inputs: &[usize]) -> usize {
        let s = &self.scenario;
        debug_assert_eq!(outputs.len(), s.n_parties);
        debug_assert_eq!(inputs.len(), s.n_parties);
        let oa = flat_index(outputs, &vec![s.n_outputs; s.n_parties]);
        let ox = flat_index(inputs, &vec![s.n_inputs; s.n_parties]);
        oa * s.n_input_tuples() + ox
    }

    pub fn element(&self, outputs: &[usize], inputs: &[usize]) -> &CMatrix {
        &self.elements[self.index(outputs, inputs)]
    }

    pub fn element_mut(&mut self, outputs: &[usize], inputs: &[usize]) -> &mut CMatrix {
        let i = self.index(outputs, inputs);
        &mut self.elements[i]
    }

    pub fn output_tuples(&self) -> Vec<Vec<usize>> {
        all_tuples(&vec![self.scenario.n_outputs; self.scenario.n_parties])
    }

    pub fn input_tuples(&self) -> Vec<Vec<usize>> {
        all_tuples(&vec![self.scenario.n_inputs; self.scenario.n_parties])
    }

    /// Marginal assemblage element for the parties in `subset` (sorted,
    /// deduplicated indices) at the given subset outputs/inputs: sums out the
    /// other parties' outputs at fixed input 0, which is well defined only
    /// for non-signalling assemblages.
    pub fn marginal(
        &self,
        subset: &[usize],
        outputs_s: &[usize],
        inputs_s: &[usize],
        tol: f64,
    ) -> Result<CMatrix> {
        let report = check_nonsignalling(self, tol);
        if report.max_ns_violation > tol {
            return Err(Error::IllDefinedMarginal {
                violation: report.max_ns_violation,
                tol,
            });
        }
        Ok(self.marginal_unchecked(subset, outputs_s, inputs_s))
    }

    /// Marginal without the non-signalling gate (callers that already
    /// verified the assemblage).
    pub fn marginal_unchecked(
        &self,
        subset: &[usize],
        outputs_s: &[usize],
        inputs_s: &[usize],
    ) -> CMatrix {
        let s = &self.scenario;
        assert_eq!(subset.len(), outputs_s.len());
        assert_eq!(subset.len(), inputs_s.len());
        let others: Vec<usize> = (0..s.n_parties).filter(|k| !subset.contains(k)).collect();
        let mut inputs = vec![0usize; s.n_parties];
        for (pos, &k) in subset.iter().enumerate() {
            inputs[k] = inputs_s[pos];
        }
        let mut acc = CMatrix::zeros(s.bob_dim, s.bob_dim);
        for rest in all_tuples(&vec![s.n_outputs; others.len()]) {
            let mut outputs = vec![0usize; s.n_parties];
            for (pos, &k) in subset.iter().enumerate() {
                outputs[k] = outputs_s[pos];
            }
            for (pos, &k) in others.iter().enumerate() {
                outputs[k] = rest[pos];
            }
            acc = acc.add(self.element(&outputs, &inputs));
        }
        acc
    }

    /// Bob's reduced state ρ_R = Σ_a σ_{a|x} (input-independent for
    /// non-signalling assemblages).
    pub fn reduced_state(&self, tol: f64) -> Result<CMatrix> {
        self.marginal(&[], &[], &[], tol)
    }

    pub fn reduced_state_unchecked(&self) -> CMatrix {
        self.marginal_unchecked(&[], &[], &[])
    }
}

/// Verdict of the non-signalling check with the three violation magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct NsReport {
    pub ok: bool,
    pub max_psd_violation: f64,
    pub max_ns_violation: f64,
    pub trace_deviation: f64,
}

impl std::fmt::Display for NsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "non-signalling check: {}", if self.ok { "ok" } else { "FAILED" })?;
        writeln!(f, "  max PSD violation:   {:.3e}", self.max_psd_violation)?;
        writeln!(f, "  max NS violation:    {:.3e}", self.max_ns_violation)?;
        write!(f, "  trace deviation:     {:.3e}", self.trace_deviation)
    }
}

/// Check positivity, per-party no-signalling of the partial sums, and unit
/// trace of the total. Violations are reported, not thrown.
pub fn check_nonsignalling(assemblage: &Assemblage, tol: f64) -> NsReport {
    let s = &assemblage.scenario;
    let mut psd: f64 = 0.0;
    for a in assemblage.output_tuples() {
        for x in assemblage.input_tuples() {
            let el = assemblage.element(&a, &x);
            let min_eig = el.min_eigenvalue();
            psd = psd.max(-min_eig);
        }
    }

    let mut ns: f64 = 0.0;
    for k in 0..s.n_parties {
        let others: Vec<usize> = (0..s.n_parties).filter(|j| *j != k).collect();
        for a_rest in all_tuples(&vec![s.n_outputs; others.len()]) {
            for x_rest in all_tuples(&vec![s.n_inputs; others.len()]) {
                // partial sums over party k's outputs, one per x_k
                let mut sums: Vec<CMatrix> = Vec::with_capacity(s.n_inputs);
                for xk in 0..s.n_inputs {
                    let mut acc = CMatrix::zeros(s.bob_dim, s.bob_dim);
                    for ak in 0..s.n_outputs {
                        let mut a = vec![0usize; s.n_parties];
                        let mut x = vec![0usize; s.n_parties];
                        a[k] = ak;
                        x[k] = xk;
                        for (pos, &j) in others.iter().enumerate() {
                            a[j] = a_rest[pos];
                            x[j] = x_rest[pos];
                        }
                        acc = acc.add(assemblage.element(&a, &x));
                    }
                    sums.push(acc);
                }
                for i in 1..sums.len() {
                    ns = ns.max(sums[i].sub(&sums[0]).max_abs());
                }
            }
        }
    }

    let mut trace_dev: f64 = 0.0;
    for x in assemblage.input_tuples() {
        let mut acc = c64::new(0.0, 0.0);
        for a in assemblage.output_tuples() {
            acc += assemblage.element(&a, &x).trace();
        }
        trace_dev = trace_dev.max((acc - c64::new(1.0, 0.0)).norm());
    }

    NsReport {
        ok: psd <= tol && ns <= tol && trace_dev <= tol,
        max_psd_violation: psd,
        max_ns_violation: ns,
        trace_deviation: trace_dev,
    }
}

/// Born-rule assemblage: σ_{a⃗|x⃗} = Tr_A((⊗ₖ M⁽ᵏ⁾_{aₖ|xₖ}) ⊗ 𝟙_B ρ).
///
/// `alice_dims` declares the local dimension of each black-box party; `state`
/// is a density matrix on ⊗ₖ H_{A_k} ⊗ H_B ordered parties first, Bob last.
pub fn born_assemblage(
    state: &CMatrix,
    alice_dims: &[usize],
    alice_meas: &[MeasurementSet],
    scenario: &Scenario,
) -> Result<Assemblage> {
    scenario.validate()?;
    if alice_dims.len() != scenario.n_parties || alice_meas.len() != scenario.n_parties {
        return Err(Error::invalid(
            "born_assemblage: one dimension and one measurement set per party required",
        ));
    }
    let da: usize = alice_dims.iter().product();
    let d = scenario.bob_dim;
    let total = da * d;
    if state.rows != total || state.cols != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: state.rows,
            context: "born_assemblage state".into(),
        });
    }
    let rho = state.hermitized(HERM_TOL)?;
    let min_eig = rho.min_eigenvalue();
    if min_eig < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eig,
            tol: PSD_TOL,
        });
    }
    if (rho.trace().re - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!(
            "born_assemblage: state trace {} is not 1",
            rho.trace().re
        )));
    }
    for (k, m) in alice_meas.iter().enumerate() {
        if m.dim != alice_dims[k] {
            return Err(Error::DimensionMismatch {
                expected: alice_dims[k],
                got: m.dim,
                context: format!("measurement set of party {k}"),
            });
        }
        if m.n_outputs != scenario.n_outputs || m.n_inputs != scenario.n_inputs {
            return Err(Error::invalid(format!(
                "measurement set of party {k} does not match the scenario cardinalities"
            )));
        }
    }

    Assemblage::from_fn(*scenario, |a, x| {
        let mut op = CMatrix::identity(1);
        for k in 0..scenario.n_parties {
            op = op.kron(alice_meas[k].op(a[k], x[k]));
        }
        op = op.kron(&CMatrix::identity(d));
        op.matmul(&rho).partial_trace_first(da, d)
    })
}

/// A conditional probability distribution over the joint outputs of a
/// collection of parties (black boxes, plus optionally Bob as the last
/// party). Probabilities are stored dense, outputs-major.
#[derive(Debug, Clone)]
pub struct Correlation {
    pub layout: PartyLayout,
    p: Vec<f64>,
    /// Set when the last party's statistics come from a tomographically
    /// complete frame; names the frame so lifting knows it.
    pub tomographic_frame: Option<String>,
}

impl Correlation {
    pub fn new(layout: PartyLayout, p: Vec<f64>) -> Result<Self> {
        layout.validate()?;
        let n_out: usize = layout.0.iter().map(|d| d.n_outputs).product();
        let n_in: usize = layout.0.iter().map(|d| d.n_inputs).product();
        if p.len() != n_out * n_in {
            return Err(Error::invalid(format!(
                "correlation needs {} probabilities, got {}",
                n_out * n_in,
                p.len()
            )));
        }
        let c = Correlation {
            layout,
            p,
            tomographic_frame: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_fn(layout: PartyLayout, mut f: impl FnMut(&[usize], &[usize]) -> f64) -> Result<Self> {
        let out_r: Vec<usize> = layout.0.iter().map(|d| d.n_outputs).collect();
        let in_r: Vec<usize> = layout.0.iter().map(|d| d.n_inputs).collect();
        let mut p = Vec::new();
        for a in all_tuples(&out_r) {
            for x in all_tuples(&in_r) {
                p.push(f(&a, &x));
            }
        }
        Correlation::new(layout, p)
    }

    fn validate(&self) -> Result<()> {
        for &v in &self.p {
            // same slack as the PSD tolerance: traces of barely-PSD blocks
            if !(v >= -PSD_TOL && v <= 1.0 + PSD_TOL) {
                return Err(Error::invalid(format!(
                    "probability {v} outside [0,1]"
                )));
            }
        }
        let in_r: Vec<usize> = self.layout.0.iter().map(|d| d.n_inputs).collect();
        let out_r: Vec<usize> = self.layout.0.iter().map(|d| d.n_outputs).collect();
        for x in all_tuples(&in_r) {
            let total: f64 = all_tuples(&out_r).iter().map(|a| self.prob(a, &x)).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "correlation not normalized at inputs {x:?}: total {total}"
                )));
            }
        }
        Ok(())
    }

    fn index(&self, outputs: &[usize], inputs: &[usize]) -> usize {
        let out_r: Vec<usize> = self.layout.0.iter().map(|d| d.n_outputs).collect();
        let in_r: Vec<usize> = self.layout.0.iter().map(|d| d.n_inputs).collect();
        let n_in: usize = in_r.iter().product();
        flat_index(outputs, &out_r) * n_in + flat_index(inputs, &in_r)
    }

    pub fn prob(&self, outputs: &[usize], inputs: &[usize]) -> f64 {
        self.p[self.index(outputs, inputs)]
    }

    /// Marginal probability of the parties in `subset`, summing out the
    /// others at fixed input 0. Well defined for non-signalling correlations.
    pub fn marginal_prob(&self, subset: &[usize], outputs_s: &[usize], inputs_s: &[usize]) -> f64 {
        let n = self.layout.n_parties();
        let others: Vec<usize> = (0..n).filter(|k| !subset.contains(k)).collect();
        let other_out: Vec<usize> = others.iter().map(|&k| self.layout.0[k].n_outputs).collect();
        let mut inputs = vec![0usize; n];
        for (pos, &k) in subset.iter().enumerate() {
            inputs[k] = inputs_s[pos];
        }
        let mut total = 0.0;
        for rest in all_tuples(&other_out) {
            let mut outputs = vec![0usize; n];
            for (pos, &k) in subset.iter().enumerate() {
                outputs[k] = outputs_s[pos];
            }
            for (pos, &k) in others.iter().enumerate() {
                outputs[k] = rest[pos];
            }
            total += self.prob(&outputs, &inputs);
        }
        total
    }

    /// Largest no-signalling violation: how much any party's marginal moves
    /// when that party's input changes, everything else fixed.
    pub fn ns_violation(&self) -> f64 {
        let n = self.layout.n_parties();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let others: Vec<usize> = (0..n).filter(|j| *j != k).collect();
            let other_out: Vec<usize> = others.iter().map(|&j| self.layout.0[j].n_outputs).collect();
            let other_in: Vec<usize> = others.iter().map(|&j| self.layout.0[j].n_inputs).collect();
            for a_rest in all_tuples(&other_out) {
                for x_rest in all_tuples(&other_in) {
                    let mut sums = Vec::with_capacity(self.layout.0[k].n_inputs);
                    for xk in 0..self.layout.0[k].n_inputs {
                        let mut acc = 0.0;
                        for ak in 0..self.layout.0[k].n_outputs {
                            let mut a = vec![0usize; n];
                            let mut x = vec![0usize; n];
                            a[k] = ak;
                            x[k] = xk;
                            for (pos, &j) in others.iter().enumerate() {
                                a[j] = a_rest[pos];
                                x[j] = x_rest[pos];
                            }
                            acc += self.prob(&a, &x);
                        }
                        sums.push(acc);
                    }
                    for i in 1..sums.len() {
                        worst = worst.max((sums[i] - sums[0]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Correlations from an assemblage and a measurement set for Bob:
/// p(a⃗b|x⃗y) = Tr(N_{b|y} σ_{a⃗|x⃗}). Bob enters as the last party.
pub fn assemblage_correlation(assemblage: &Assemblage, bob: &MeasurementSet) -> Result<Correlation> {
    let s = &assemblage.scenario;
    if bob.dim != s.bob_dim {
        return Err(Error::DimensionMismatch {
            expected: s.bob_dim,
            got: bob.dim,
            context: "bob measurement set".into(),
        });
    }
    let layout = s.layout().with_party(bob.dims());
    Correlation::from_fn(layout, |ab, xy| {
        let n = s.n_parties;
        let (a, b) = (&ab[..n], ab[n]);
        let (x, y) = (&xy[..n], xy[n]);
        let sigma = assemblage.element(a, x);
        bob.op(b, y).matmul(sigma).trace().re
    })
}
