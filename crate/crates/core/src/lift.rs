//! From assemblage certificates to Bell correlations and back.
//!
//! Forward: a certified assemblage measured by any projective Bob produces a
//! correlation whose Bell almost-quantum membership must hold (the commuting
//! realization of the certificate absorbs Bob's measurements as one more
//! party). Backward: a Bell certificate of a tomographic correlation is cut
//! into per-Alice-word-pair vectors over Bob's (b,y) slots and mapped block
//! by block through the frame's reconstruction, producing an EPR certificate
//! whose data row carries the assemblage marginals.
//!
//! Λ indexing: the Bell matrix entry used for the (v,w) block slot (b,y) is
//! Γ_B(w, v·(b|y)), which makes the lifted matrix equal to
//! Tr_K((Π_w†Π_v ⊗ 𝟙)ρ) on commuting realizations, a conjugated Gram
//! matrix, hence PSD, with Γ(∅, a_S|x_S) = σ_S.

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::fixtures::QuantumModel;
use crate::linalg::CMatrix;
use crate::moment::{
    bell_membership, MembershipReport, MomentKind, MomentMatrix,
};
use crate::quantum::{assemblage_correlation, Assemblage, MeasurementSet, PSD_TOL};
use crate::sdp::{gram_vectors, SolverOptions};
use crate::tomography::TomographyFrame;
use crate::words::{
    generate_aq_words_layout, Letter, PartyDims, PartyLayout, Scenario, Word, DEFAULT_WORD_CAP,
};

/// The Λ blocks of a Bell moment matrix: one vector over Bob's (b,y) slots
/// per ordered pair of Alice words.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub alice_words: Vec<Word>,
    pub slots: usize,
    blocks: Vec<Vec<c64>>,
}

impl BlockDecomposition {
    pub fn lambda(&self, v: usize, w: usize) -> &[c64] {
        &self.blocks[v * self.alice_words.len() + w]
    }
}

/// Scalar Bell moment matrix of a commuting quantum realization: the black
/// boxes contribute their projective measurements, Bob (appended as the last
/// party) the given projective set, and Γ_B(v,w) = Tr(Π_v† Π_w ρ).
pub fn bell_moment_from_model(model: &QuantumModel, bob: &MeasurementSet) -> Result<MomentMatrix> {
    if !bob.is_projective(1e-9) {
        return Err(Error::invalid("bob measurement set must be projective"));
    }
    for m in &model.alice_meas {
        if !m.is_projective(1e-9) {
            return Err(Error::invalid("model measurements must be projective"));
        }
    }
    let n_alices = model.alice_dims.len();
    let layout = PartyLayout(
        model
            .alice_meas
            .iter()
            .map(|m| m.dims())
            .chain(std::iter::once(bob.dims()))
            .collect(),
    );
    let words = generate_aq_words_layout(&layout, DEFAULT_WORD_CAP)?;

    // full-space operator of one letter
    let da: usize = model.alice_dims.iter().product();
    let full = da * model.bob_dim;
    let letter_op = |l: &Letter| -> CMatrix {
        let mut op = CMatrix::identity(1);
        for (k, &dim) in model.alice_dims.iter().enumerate() {
            if l.party == k {
                op = op.kron(model.alice_meas[k].op(l.output, l.input));
            } else {
                op = op.kron(&CMatrix::identity(dim));
            }
        }
        if l.party == n_alices {
            op = op.kron(bob.op(l.output, l.input));
        } else {
            op = op.kron(&CMatrix::identity(model.bob_dim));
        }
        op
    };

    // ρ = C C† lets every word act on the factor columns once
    let factor = gram_vectors(&model.state, PSD_TOL)?.adjoint();
    debug_assert_eq!(factor.rows, full);
    let n = words.len();
    let mut applied: Vec<CMatrix> = Vec::with_capacity(n);
    for w in &words {
        let mut acc = factor.clone();
        for l in w.letters().iter().rev() {
            acc = letter_op(l).matmul(&acc);
        }
        applied.push(acc);
    }
    let mut entries = CMatrix::zeros(n, n);
    for v in 0..n {
        for w in 0..n {
            entries[(v, w)] = applied[v].adjoint().matmul(&applied[w]).trace();
        }
    }
    Ok(MomentMatrix {
        layout,
        words,
        kind: MomentKind::Scalar,
        entries,
    })
}

/// Cut a Bell moment matrix (Bob last) into Λ vectors over the frame slots:
/// Λ_{v,w}\[b,y\] = Γ_B(w, v·(b|y)).
pub fn decompose_bell_moment(
    gamma_b: &MomentMatrix,
    frame: &TomographyFrame,
) -> Result<BlockDecomposition> {
    if gamma_b.kind != MomentKind::Scalar {
        return Err(Error::invalid("decompose expects a scalar Bell matrix"));
    }
    let n_parties = gamma_b.layout.n_parties();
    if n_parties < 2 {
        return Err(Error::invalid("need at least one Alice plus Bob"));
    }
    let bob = gamma_b.layout.0[n_parties - 1];
    let fdims = PartyDims {
        n_outputs: frame.measurements.n_outputs,
        n_inputs: frame.measurements.n_inputs,
    };
    if bob != fdims {
        return Err(Error::invalid(format!(
            "last party has {}x{} labels but the frame provides {}x{}",
            bob.n_outputs, bob.n_inputs, fdims.n_outputs, fdims.n_inputs
        )));
    }
    let alice_layout = PartyLayout(gamma_b.layout.0[..n_parties - 1].to_vec());
    let alice_words = generate_aq_words_layout(&alice_layout, DEFAULT_WORD_CAP)?;

    let index_of = |w: &Word| -> Result<usize> {
        gamma_b
            .word_index(w)
            .ok_or_else(|| Error::invalid(format!("word '{w}' missing from the Bell matrix")))
    };
    let n = alice_words.len();
    let slots = frame.len();
    let mut blocks = Vec::with_capacity(n * n);
    for v in &alice_words {
        for w in &alice_words {
            let wi = index_of(w)?;
            let mut lam = vec![c64::new(0.0, 0.0); slots];
            for y in 0..fdims.n_inputs {
                for b in 0..fdims.n_outputs {
                    let extended = v.concat(&Word::single(Letter::new(n_parties - 1, b, y)));
                    lam[frame.slot(b, y)] = gamma_b.scalar(wi, index_of(&extended)?);
                }
            }
            blocks.push(lam);
        }
    }
    Ok(BlockDecomposition {
        alice_words,
        slots,
        blocks,
    })
}

/// Result of lifting a Bell certificate.
#[derive(Debug, Clone)]
pub struct LiftReport {
    pub gamma: MomentMatrix,
    pub lambda_min: f64,
    pub structure_violation: f64,
    /// λ_min ≥ −1e-8; guaranteed when the certificate came from a factorised
    /// realization, checked and reported otherwise.
    pub psd_ok: bool,
}

/// Lift a Bell certificate of a tomographic correlation to an EPR moment
/// matrix via the frame's reconstruction map.
pub fn lift(gamma_b: &MomentMatrix, frame: &TomographyFrame) -> Result<LiftReport> {
    let dec = decompose_bell_moment(gamma_b, frame)?;
    let n = dec.alice_words.len();
    let d = frame.dim;
    let mut entries = CMatrix::zeros(n * d, n * d);
    for v in 0..n {
        for w in 0..n {
            let block = frame.reconstruct_complex(dec.lambda(v, w))?;
            entries.set_block(v, w, d, &block);
        }
    }
    // Hermiticity holds structurally when the input satisfies its own
    // symmetry constraints; symmetrize away round-off
    let herm_dev = entries.hermitian_deviation();
    if herm_dev > 1e-6 {
        return Err(Error::LiftInconsistency(format!(
            "lifted matrix is not Hermitian (deviation {herm_dev:.3e}); \
             the Bell certificate violates its symmetry constraints"
        )));
    }
    let entries = entries.hermitized(1.0)?;
    let n_parties = gamma_b.layout.n_parties();
    let gamma = MomentMatrix {
        layout: PartyLayout(gamma_b.layout.0[..n_parties - 1].to_vec()),
        words: dec.alice_words.clone(),
        kind: MomentKind::Block(d),
        entries,
    };
    let sv = gamma.structure_violation();
    if sv > 1e-7 {
        return Err(Error::LiftInconsistency(format!(
            "lifted matrix violates the moment structure by {sv:.3e}"
        )));
    }
    let lambda_min = gamma.min_eigenvalue();
    Ok(LiftReport {
        lambda_min,
        structure_violation: sv,
        psd_ok: lambda_min >= -1e-8,
        gamma,
    })
}

/// Validate that a moment matrix is a feasible certificate for an
/// assemblage: matching shape, structural constraints, PSD, and the data row
/// pinned to the assemblage marginals.
pub fn validate_certificate(
    cert: &MomentMatrix,
    assemblage: &Assemblage,
    tol: f64,
) -> Result<()> {
    let s = assemblage.scenario;
    if cert.kind != MomentKind::Block(s.bob_dim) {
        return Err(Error::invalid("certificate block dimension mismatch"));
    }
    if cert.layout != s.layout() {
        return Err(Error::invalid("certificate layout does not match the scenario"));
    }
    let sv = cert.structure_violation();
    if sv > tol {
        return Err(Error::InconsistentMomentMatrix(format!(
            "certificate structure violation {sv:.3e} above {tol:.1e}"
        )));
    }
    let min_eig = cert.min_eigenvalue();
    if min_eig < -tol {
        return Err(Error::NotPsd { min_eig, tol });
    }
    for (i, w) in cert.words.iter().enumerate() {
        if !w.is_single_per_party() {
            continue;
        }
        let parties: Vec<usize> = w.letters().iter().map(|l| l.party).collect();
        let outs: Vec<usize> = w.letters().iter().map(|l| l.output).collect();
        let ins: Vec<usize> = w.letters().iter().map(|l| l.input).collect();
        let target = assemblage.marginal_unchecked(&parties, &outs, &ins);
        let dev = cert.block(0, i).sub(&target).max_abs();
        if dev > tol {
            return Err(Error::InconsistentMomentMatrix(format!(
                "certificate data row deviates from the assemblage at '{w}' by {dev:.3e}"
            )));
        }
    }
    Ok(())
}

/// Outcome of checking one Bob measurement against a certified assemblage.
#[derive(Debug)]
pub struct CertifiedCorrelationReport {
    pub bell: MembershipReport,
}

/// Check that a certified assemblage only generates Bell-feasible
/// correlations: verify the certificate, form p(a⃗b|x⃗y) with the given
/// projective Bob, and run Bell almost-quantum membership on it.
pub fn certified_correlation_check(
    assemblage: &Assemblage,
    certificate: &MomentMatrix,
    bob: &MeasurementSet,
    opts: &SolverOptions,
) -> Result<CertifiedCorrelationReport> {
    validate_certificate(certificate, assemblage, 1e-6)?;
    if !bob.is_projective(1e-8) {
        return Err(Error::invalid("certified_correlation_check requires a projective Bob"));
    }
    let corr = assemblage_correlation(assemblage, bob)?;
    let bell = bell_membership(&corr, opts)?;
    Ok(CertifiedCorrelationReport { bell })
}

/// PR-product assemblage: two binary Alices sharing a PR box, Bob holding a
/// fixed state ρ0. σ_{a1a2|x1x2} = P_PR(a1a2|x1x2)·ρ0 with P_PR = 1/2 iff
/// a1⊕a2 = x1·x2. Non-signalling by construction, but admits no
/// almost-quantum certificate.
pub fn build_pr_product_fixture(bob_state: &CMatrix) -> Result<Assemblage> {
    let d = bob_state.rows;
    let rho = bob_state.hermitized(1e-8)?;
    let min_eig = rho.min_eigenvalue();
    if min_eig < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eig,
            tol: PSD_TOL,
        });
    }
    if (rho.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("bob_state must have unit trace"));
    }
    let scenario = Scenario::new(2, 2, 2, d)?;
    Assemblage::from_fn(scenario, |a, x| {
        if (a[0] ^ a[1]) == (x[0] & x[1]) {
            rho.scale(c64::new(0.5, 0.0))
        } else {
            CMatrix::zeros(d, d)
        }
    })
}

/// Mixture weights over deterministic single-party strategies reproducing a
/// single-party box exactly: w(f) = Π_z p(f(z)|z). Used to exhibit locality
/// of the PR-product correlation across the Alices|Bob cut.
pub fn group_box_deterministic_mixture(
    p: &dyn Fn(usize, usize) -> f64,
    n_inputs: usize,
    n_outputs: usize,
) -> Vec<(Vec<usize>, f64)> {
    let mut strategies = vec![(Vec::new(), 1.0f64)];
    for z in 0..n_inputs {
        let mut next = Vec::with_capacity(strategies.len() * n_outputs);
        for (assign, weight) in &strategies {
            for c in 0..n_outputs {
                let mut a = assign.clone();
                a.push(c);
                next.push((a, weight * p(c, z)));
            }
        }
        strategies = next;
    }
    strategies
}
