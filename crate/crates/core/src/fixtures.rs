//! Reference objects for tests and the CLI: the named fixtures of the tool
//! (singlet, product, deterministic, PR box, PR-product) and seeded random
//! generators for states, measurements, Born assemblages and non-signalling
//! assemblages. A fixed seed fully determines every random output.

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::CMatrix;
use crate::quantum::{born_assemblage, Assemblage, Correlation, MeasurementSet};
use crate::words::{PartyLayout, Scenario};

/// A quantum realization of an assemblage: global state, local dimensions
/// and projective measurement sets for the black-box parties.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    pub state: CMatrix,
    pub alice_dims: Vec<usize>,
    pub alice_meas: Vec<MeasurementSet>,
    pub bob_dim: usize,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; both uniforms drawn unconditionally to keep the stream
    // deterministic.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_complex(rng: &mut ChaCha8Rng) -> c64 {
    c64::new(normal(rng), normal(rng))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    g.add(&g.adjoint()).scale(c64::new(0.5, 0.0))
}

/// Haar-ish random unitary by Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    let mut cols: Vec<Vec<c64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<c64> = (0..dim).map(|i| g[(i, j)]).collect();
        for u in &cols {
            let overlap: c64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= overlap * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    CMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

pub fn random_pure_state(rng: &mut ChaCha8Rng, dim: usize) -> Vec<c64> {
    let mut v: Vec<c64> = (0..dim).map(|_| random_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

pub fn projector_from_state(v: &[c64]) -> CMatrix {
    CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

/// Random complete projective measurement set: `n_outputs` rank partitions of
/// a random orthonormal basis per input. Requires n_outputs ≤ dim.
pub fn random_projective(
    rng: &mut ChaCha8Rng,
    dim: usize,
    n_outputs: usize,
    n_inputs: usize,
) -> MeasurementSet {
    assert!(n_outputs <= dim, "projective set needs n_outputs <= dim");
    let mut ops = Vec::with_capacity(n_outputs * n_inputs);
    for _y in 0..n_inputs {
        let u = random_unitary(rng, dim);
        let base = dim / n_outputs;
        let rem = dim % n_outputs;
        let mut col = 0;
        for b in 0..n_outputs {
            let size = base + usize::from(b < rem);
            let mut p = CMatrix::zeros(dim, dim);
            for _ in 0..size {
                let v: Vec<c64> = (0..dim).map(|i| u[(i, col)]).collect();
                p = p.add(&projector_from_state(&v));
                col += 1;
            }
            ops.push(p);
        }
    }
    MeasurementSet::new(dim, n_outputs, n_inputs, ops).expect("random projective set is valid")
}

/// Measurement set {Z basis, X basis} on a qubit.
pub fn pauli_zx_measurements() -> MeasurementSet {
    let z0 = CMatrix::diag(&[1.0, 0.0]);
    let z1 = CMatrix::diag(&[0.0, 1.0]);
    let half = c64::new(0.5, 0.0);
    let xp = CMatrix::from_fn(2, 2, |_, _| half);
    let xm = CMatrix::from_fn(2, 2, |i, j| if i == j { half } else { -half });
    MeasurementSet::new(2, 2, 2, vec![z0, z1, xp, xm]).unwrap()
}

/// The "singlet" fixture: |Φ+⟩ = (|00⟩+|11⟩)/√2 shared between one Alice and
/// a qubit Bob, Alice measuring Z (x=0) and X (x=1).
pub fn singlet() -> Assemblage {
    singlet_model().0
}

pub fn singlet_model() -> (Assemblage, QuantumModel) {
    let scenario = Scenario::new(1, 2, 2, 2).unwrap();
    let mut psi = CMatrix::zeros(4, 1);
    psi[(0, 0)] = c64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[(3, 0)] = c64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rho = psi.matmul(&psi.adjoint());
    let meas = pauli_zx_measurements();
    let asm = born_assemblage(&rho, &[2], &[meas.clone()], &scenario).unwrap();
    let model = QuantumModel {
        state: rho,
        alice_dims: vec![2],
        alice_meas: vec![meas],
        bob_dim: 2,
    };
    (asm, model)
}

/// Unsteered product fixture σ_{a|x} = p(a|x)·ρ0 with a biased coin and a
/// fixed mixed ρ0. Returns the assemblage together with ρ0.
pub fn product() -> (Assemblage, CMatrix) {
    let scenario = Scenario::new(1, 2, 2, 2).unwrap();
    let rho0 = CMatrix::diag(&[0.7, 0.3]);
    let p = [0.6, 0.4];
    let rho = rho0.clone();
    let asm = Assemblage::from_fn(scenario, |a, _x| rho.scale(c64::new(p[a[0]], 0.0))).unwrap();
    (asm, rho0)
}

/// Deterministic fixture σ_{a|x} = δ_{a,0}|0⟩⟨0|.
pub fn deterministic() -> Assemblage {
    let scenario = Scenario::new(1, 2, 2, 2).unwrap();
    Assemblage::from_fn(scenario, |a, _x| {
        if a[0] == 0 {
            CMatrix::diag(&[1.0, 0.0])
        } else {
            CMatrix::zeros(2, 2)
        }
    })
    .unwrap()
}

/// The PR box as a two-party binary correlation: p = 1/2 iff a1⊕a2 = x1·x2.
pub fn pr_box_correlation() -> Correlation {
    let layout = PartyLayout::uniform(2, 2, 2);
    Correlation::from_fn(layout, |a, x| {
        if (a[0] ^ a[1]) == (x[0] & x[1]) {
            0.5
        } else {
            0.0
        }
    })
    .unwrap()
}

/// PR-product assemblage fixture; see [`crate::lift::build_pr_product_fixture`].
pub fn pr_product(bob_state: &CMatrix) -> Result<Assemblage> {
    crate::lift::build_pr_product_fixture(bob_state)
}

/// Seeded random Born assemblage over a uniform scenario; every black box
/// gets local dimension `n_outputs` and rank-1 projective measurements.
/// Returns the assemblage and its quantum model.
pub fn random_born(
    seed: u64,
    n_parties: usize,
    n_inputs: usize,
    n_outputs: usize,
    bob_dim: usize,
) -> (Assemblage, QuantumModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
    let scenario = Scenario::new(n_parties, n_inputs, n_outputs, bob_dim).unwrap();
    let alice_dims = vec![n_outputs; n_parties];
    let total: usize = alice_dims.iter().product::<usize>() * bob_dim;
    let psi = random_pure_state(&mut rng, total);
    let rho = projector_from_state(&psi);
    let meas: Vec<MeasurementSet> = (0..n_parties)
        .map(|_| random_projective(&mut rng, n_outputs, n_outputs, n_inputs))
        .collect();
    let asm = born_assemblage(&rho, &alice_dims, &meas, &scenario).unwrap();
    let model = QuantumModel {
        state: rho,
        alice_dims,
        alice_meas: meas,
        bob_dim,
    };
    (asm, model)
}

/// Seeded random bipartite non-signalling assemblage: a random Born
/// assemblage mixed toward white noise and nudged by an NS-preserving
/// perturbation (per input x, add ±E_x to the two outcomes so all partial
/// sums stay fixed). Binary outcomes, `n_inputs` inputs, Bob dimension d.
pub fn random_ns(seed: u64, n_inputs: usize, bob_dim: usize) -> Assemblage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x51_7c_c1_b7).wrapping_add(3));
    let (born, _) = random_born(seed ^ 0xabcd_1234, 1, n_inputs, 2, bob_dim);
    let scenario = born.scenario;
    let d = bob_dim;
    // mix toward p_uniform · 𝟙/d to move strictly inside the PSD cone
    let eta = 0.25;
    let noise = CMatrix::identity(d).scale(c64::new(eta / (2.0 * d as f64), 0.0));
    let mixed = Assemblage::from_fn(scenario, |a, x| {
        born.element(a, x)
            .scale(c64::new(1.0 - eta, 0.0))
            .add(&noise)
    })
    .unwrap();
    // smallest eigenvalue across elements bounds the safe perturbation size
    let mut floor = f64::INFINITY;
    for a in mixed.output_tuples() {
        for x in mixed.input_tuples() {
            floor = floor.min(mixed.element(&a, &x).min_eigenvalue());
        }
    }
    let perturbations: Vec<CMatrix> = (0..n_inputs)
        .map(|_| {
            let e = random_hermitian(&mut rng, d);
            let scale = 0.5 * floor / e.max_abs().max(1e-12) / d as f64;
            e.scale(c64::new(scale, 0.0))
        })
        .collect();
    Assemblage::from_fn(scenario, |a, x| {
        let sign = if a[0] == 0 { 1.0 } else { -1.0 };
        mixed
            .element(a, x)
            .add(&perturbations[x[0]].scale(c64::new(sign, 0.0)))
    })
    .unwrap()
}
