//! Cross-module invariants that tie the compiler, the constructions and the
//! solver together.

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eprkit_core::fixtures;
use eprkit_core::lift::build_pr_product_fixture;
use eprkit_core::linalg::CMatrix;
use eprkit_core::moment::{compile_bell, compile_epr, membership};
use eprkit_core::quantum::{check_nonsignalling, Assemblage, Correlation};
use eprkit_core::sdp::unembed_hermitian;
use eprkit_core::tomography::{pauli_frame, tomographic_correlation};
use eprkit_core::words::PartyLayout;
use eprkit_core::{Scenario, SolverOptions};

/// Mixing toward white noise never flips feasible → infeasible as the noise
/// grows (the almost-quantum set is convex and contains the noise point).
#[test]
fn noise_ladders_are_monotone() {
    let opts = SolverOptions::default();
    let noise_element = |d: usize, n_outputs: usize, n_parties: usize| -> CMatrix {
        let p_uniform = 1.0 / (n_outputs as f64).powi(n_parties as i32);
        CMatrix::identity(d).scale(c64::new(p_uniform / d as f64, 0.0))
    };

    let ladders: Vec<Assemblage> = vec![
        build_pr_product_fixture(&CMatrix::identity(2).scale(c64::new(0.5, 0.0))).unwrap(),
        fixtures::random_born(7, 2, 2, 2, 2).0,
        fixtures::random_ns(3, 2, 2),
        fixtures::random_ns(4, 3, 2),
        fixtures::singlet(),
    ];
    for (li, start) in ladders.iter().enumerate() {
        let s = start.scenario;
        let noise = noise_element(s.bob_dim, s.n_outputs, s.n_parties);
        let mut was_feasible = false;
        for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mixed = Assemblage::from_fn(s, |a, x| {
                start
                    .element(a, x)
                    .scale(c64::new(1.0 - eta, 0.0))
                    .add(&noise.scale(c64::new(eta, 0.0)))
            })
            .unwrap();
            let report = membership(&compile_epr(&mixed).unwrap(), &opts).unwrap();
            assert!(
                !(was_feasible && !report.feasible),
                "ladder {li}: feasibility flipped back off at eta={eta}"
            );
            was_feasible = was_feasible || report.feasible;
        }
        assert!(was_feasible, "ladder {li}: even white noise infeasible");
    }
}

/// For a trivial Bob (d = 1) the block compiler reduces to the scalar Bell
/// compiler of the Alices-only correlation: same pinned base, same verdicts.
#[test]
fn epr_with_trivial_bob_matches_bell_compilation() {
    // PR distribution as 1×1 blocks, and a local deterministic one
    let cases: Vec<(&str, Box<dyn Fn(&[usize], &[usize]) -> f64>)> = vec![
        (
            "pr",
            Box::new(|a: &[usize], x: &[usize]| {
                if (a[0] ^ a[1]) == (x[0] & x[1]) {
                    0.5
                } else {
                    0.0
                }
            }),
        ),
        (
            "local",
            Box::new(|a: &[usize], _x: &[usize]| {
                if a[0] == 0 && a[1] == 0 {
                    1.0
                } else {
                    0.0
                }
            }),
        ),
    ];
    let opts = SolverOptions::default();
    for (name, p) in cases {
        let scenario = Scenario::new(2, 2, 2, 1).unwrap();
        let asm = Assemblage::from_fn(scenario, |a, x| CMatrix::diag(&[p(a, x)])).unwrap();
        let corr = Correlation::from_fn(PartyLayout::uniform(2, 2, 2), |a, x| p(a, x)).unwrap();

        let epr = compile_epr(&asm).unwrap();
        let bell = compile_bell(&corr).unwrap();
        // identical pinned bases entry by entry (after unembedding)
        let epr_base = unembed_hermitian(&epr.problem.base);
        let n = bell.problem.dim;
        for i in 0..n {
            for j in 0..n {
                let b = bell.problem.base[(i, j)];
                let e = epr_base[(i, j)];
                assert!((e.re - b).abs() < 1e-12 && e.im.abs() < 1e-12, "{name} ({i},{j})");
            }
        }
        // identical verdicts and margins
        let re = membership(&epr, &opts).unwrap();
        let rb = membership(&bell, &opts).unwrap();
        assert_eq!(re.feasible, rb.feasible, "{name}");
        assert!(
            (re.t_star - rb.t_star).abs() < 1e-6,
            "{name}: t_epr {:+.4e} vs t_bell {:+.4e}",
            re.t_star,
            rb.t_star
        );
    }
}

/// Born-rule assemblages are non-signalling and reduce to Tr_A(ρ), across
/// 100 random states/measurements with dims up to 2²·2.
#[test]
fn born_assemblages_nonsignalling_randomized_100() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for case in 0..100 {
        let n_parties = rng.gen_range(1..=2);
        let n_inputs = rng.gen_range(1..=2);
        let (asm, model) = fixtures::random_born(case as u64 + 7000, n_parties, n_inputs, 2, 2);
        let report = check_nonsignalling(&asm, 1e-9);
        assert!(report.ok, "case {case}: {report}");
        let rho_r = asm.reduced_state(1e-7).unwrap();
        let da: usize = model.alice_dims.iter().product();
        let target = model.state.partial_trace_first(da, 2);
        assert!(rho_r.sub(&target).max_abs() < 1e-9, "case {case}");
    }
}

/// The tomographic correlation determines the assemblage: element-wise
/// reconstruction recovers every block.
#[test]
fn tomographic_correlation_determines_assemblage() {
    let frame = pauli_frame(1).unwrap();
    for seed in 0..10u64 {
        let asm = fixtures::random_ns(seed + 40, 2, 2);
        let corr = tomographic_correlation(&asm, &frame).unwrap();
        for a in asm.output_tuples() {
            for x in asm.input_tuples() {
                let mut probs = vec![0.0; frame.len()];
                for y in 0..frame.measurements.n_inputs {
                    for b in 0..frame.measurements.n_outputs {
                        let mut outs = a.clone();
                        outs.push(b);
                        let mut ins = x.clone();
                        ins.push(y);
                        probs[frame.slot(b, y)] = corr.prob(&outs, &ins);
                    }
                }
                let back = frame.reconstruct(&probs).unwrap();
                let dev = back.sub(asm.element(&a, &x)).max_abs();
                assert!(dev < 1e-9, "seed {seed}: deviation {dev:.3e}");
            }
        }
    }
}

/// Solver certificates for block problems reassemble into valid moment
/// matrices: exact pins, structural constraints, eigenvalue at the margin.
#[test]
fn solver_certificates_reassemble_consistently() {
    let opts = SolverOptions::default();
    let (asm, _) = fixtures::random_born(321, 2, 2, 2, 2);
    let compiled = compile_epr(&asm).unwrap();
    let report = membership(&compiled, &opts).unwrap();
    assert!(report.feasible);
    let cert = &report.certificate;
    assert!(cert.structure_violation() < 1e-7);
    // pinned blocks are constants of the compilation, so they match the
    // assemblage marginals exactly
    for (i, w) in cert.words.iter().enumerate() {
        let parties: Vec<usize> = w.letters().iter().map(|l| l.party).collect();
        let outs: Vec<usize> = w.letters().iter().map(|l| l.output).collect();
        let ins: Vec<usize> = w.letters().iter().map(|l| l.input).collect();
        let target = asm.marginal_unchecked(&parties, &outs, &ins);
        assert!(cert.block(0, i).sub(&target).max_abs() < 1e-12, "word {w}");
    }
    // the complex certificate's spectrum agrees with the embedded solve
    assert!((cert.min_eigenvalue() - report.t_star).abs() < 1e-6);
}

/// The constructive GHJW certificate is accepted by the membership solver.
#[test]
fn constructive_certificates_agree_with_solver() {
    let opts = SolverOptions::default();
    for seed in 0..5u64 {
        let asm = fixtures::random_ns(seed + 60, 3, 2);
        let gamma = eprkit_core::ghjw::ns_to_moment(&asm).unwrap();
        assert!(gamma.min_eigenvalue() >= -1e-9);
        let report = membership(&compile_epr(&asm).unwrap(), &opts).unwrap();
        assert!(report.feasible, "seed {seed}: t_star {:+.3e}", report.t_star);
    }
}
