//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured margins (run with `--nocapture` to see them on success).

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eprkit_core::fixtures;
use eprkit_core::ghjw;
use eprkit_core::lift;
use eprkit_core::linalg::{eig_sym, heig, CMatrix, RMatrix};
use eprkit_core::moment;
use eprkit_core::sdp;
use eprkit_core::tomography;
use eprkit_core::words;
use eprkit_core::{Scenario, SolverOptions, SolverStatus};

fn pass(criterion: usize, name: &str, detail: String) {
    println!("[acceptance] criterion {criterion} ({name}): PASS — {detail}");
}

/// 1. Constructive realization round trip on 50 seeded random bipartite
/// non-signalling assemblages (3 inputs, binary outcomes, qubit Bob).
#[test]
fn criterion_1_ghjw_round_trip() {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let asm = fixtures::random_ns(seed, 3, 2);
        let r = ghjw::realize(&asm).expect("realize");
        assert!(r.invariant_deviation() <= 1e-8, "seed {seed}: invariants");
        let dev = ghjw::verify_realization(&r, &asm).expect("verify");
        assert!(dev <= 1e-6, "seed {seed}: deviation {dev:.3e}");
        worst = worst.max(dev);
    }
    pass(1, "GHJW round trip", format!("50 assemblages, worst deviation {worst:.3e}"));
}

/// 2. Every quantum assemblage is almost-quantum: 20 random Born assemblages
/// (two Alices, binary, qubit Bob) pass EPR membership.
#[test]
fn criterion_2_quantum_subset_of_almost_quantum() {
    let opts = SolverOptions::default();
    let mut worst = f64::INFINITY;
    for seed in 0..20u64 {
        let (asm, _) = fixtures::random_born(seed, 2, 2, 2, 2);
        let report = moment::epr_membership(&asm, &opts).expect("membership");
        assert!(
            report.t_star >= -1e-7,
            "seed {seed}: t_star {:+.3e}",
            report.t_star
        );
        worst = worst.min(report.t_star);
    }
    pass(2, "quantum ⊆ almost-quantum", format!("20 Born assemblages, min t_star {worst:+.3e}"));
}

/// 3. PR box rejection at both levels.
#[test]
fn criterion_3_pr_rejection() {
    let opts = SolverOptions::default();
    let pr = fixtures::pr_box_correlation();
    let bell = moment::bell_membership(&pr, &opts).expect("bell membership");
    assert!(!bell.feasible && bell.t_star <= -1e-3, "bell t_star {:+.3e}", bell.t_star);

    let rho0 = CMatrix::identity(2).scale(c64::new(0.5, 0.0));
    let asm = lift::build_pr_product_fixture(&rho0).expect("fixture");
    let epr = moment::epr_membership(&asm, &opts).expect("epr membership");
    assert!(!epr.feasible && epr.t_star <= -1e-3, "epr t_star {:+.3e}", epr.t_star);
    pass(
        3,
        "PR box rejection",
        format!("bell t_star {:+.3e}, epr t_star {:+.3e}", bell.t_star, epr.t_star),
    );
}

/// 4. CHSH over the almost-quantum set reproduces the Tsirelson value; the
/// brute-force local bound over the 16 deterministic strategies is exactly 2.
#[test]
fn criterion_4_tsirelson() {
    let opts = SolverOptions::default();
    let scenario = Scenario::new(2, 2, 2, 1).unwrap();
    let f = moment::chsh_functional();
    let aq = moment::maximize_functional(&scenario, &f, &opts).expect("maximize");
    let tsirelson = 2.0 * std::f64::consts::SQRT_2;
    assert!((aq - tsirelson).abs() <= 1e-4, "got {aq}");
    let local = moment::local_bound_2x2(&f);
    assert_eq!(local, 2.0);
    pass(
        4,
        "Tsirelson reproduction",
        format!("AQ value {aq:.6} (|Δ| = {:.2e}), local bound {local}", (aq - tsirelson).abs()),
    );
}

/// 5. Certified assemblages only generate Bell-feasible correlations,
/// whatever projective measurement Bob adds.
#[test]
fn criterion_5_certified_assemblages_give_almost_quantum_correlations() {
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = f64::INFINITY;
    let mut count = 0;
    // bipartite assemblages certified analytically by the GHJW construction
    for seed in 0..14u64 {
        let asm = fixtures::random_ns(seed.wrapping_add(100), 2, 2);
        let cert = ghjw::ns_to_moment(&asm).expect("certificate");
        let n_inputs = rng.gen_range(1..=2);
        let bob = fixtures::random_projective(&mut rng, 2, 2, n_inputs);
        let report = lift::certified_correlation_check(&asm, &cert, &bob, &opts).expect("certified check");
        assert!(
            report.bell.t_star >= -1e-7,
            "seed {seed}: t_star {:+.3e}",
            report.bell.t_star
        );
        worst = worst.min(report.bell.t_star);
        count += 1;
    }
    // two-Alice Born assemblages certified by the membership solver
    for seed in 0..6u64 {
        let (asm, _) = fixtures::random_born(seed.wrapping_add(500), 2, 2, 2, 2);
        let epr = moment::epr_membership(&asm, &opts).expect("epr membership");
        assert!(epr.feasible);
        let bob = fixtures::random_projective(&mut rng, 2, 2, 1);
        let report = lift::certified_correlation_check(&asm, &epr.certificate, &bob, &opts).expect("certified check");
        assert!(
            report.bell.t_star >= -1e-7,
            "seed {seed}: t_star {:+.3e}",
            report.bell.t_star
        );
        worst = worst.min(report.bell.t_star);
        count += 1;
    }
    pass(
        5,
        "certified-correlation suite",
        format!("{count} certified assemblages × random Bob, min t_star {worst:+.3e}"),
    );
}

/// 6. Lift round trip: analytic commuting-realization Bell certificates of
/// tomographic correlations decompose and lift back to the assemblage.
#[test]
fn criterion_6_lift_round_trip() {
    let frame = tomography::pauli_frame(1).unwrap();
    let mut worst_dev: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    let mut cases: Vec<(fixtures::QuantumModel, eprkit_core::Assemblage)> = Vec::new();
    // 7 bipartite + 3 two-Alice fixtures, all with qubit Bob
    for seed in 0..7u64 {
        let (asm, model) = fixtures::random_born(seed.wrapping_add(900), 1, 2, 2, 2);
        cases.push((model, asm));
    }
    for seed in 0..3u64 {
        let (asm, model) = fixtures::random_born(seed.wrapping_add(950), 2, 2, 2, 2);
        cases.push((model, asm));
    }
    for (i, (model, asm)) in cases.iter().enumerate() {
        let gamma_b = lift::bell_moment_from_model(model, &frame.measurements).expect("bell cert");
        let report = lift::lift(&gamma_b, &frame).expect("lift");
        assert!(
            report.lambda_min >= -1e-8,
            "case {i}: lambda_min {:+.3e}",
            report.lambda_min
        );
        worst_eig = worst_eig.min(report.lambda_min);
        let gamma = &report.gamma;
        for (w_idx, w) in gamma.words.iter().enumerate() {
            if !w.is_single_per_party() {
                continue;
            }
            let parties: Vec<usize> = w.letters().iter().map(|l| l.party).collect();
            let outs: Vec<usize> = w.letters().iter().map(|l| l.output).collect();
            let ins: Vec<usize> = w.letters().iter().map(|l| l.input).collect();
            let sigma = asm.marginal_unchecked(&parties, &outs, &ins);
            let dev = gamma.block(0, w_idx).sub(&sigma).max_abs();
            assert!(dev <= 1e-6, "case {i}, word {w}: deviation {dev:.3e}");
            worst_dev = worst_dev.max(dev);
        }
    }
    pass(
        6,
        "lift round trip",
        format!("10 fixtures, worst data deviation {worst_dev:.3e}, min λ {worst_eig:+.3e}"),
    );
}

/// 7. Word algebra: counts by enumeration, canonicalization idempotence and
/// product-key dagger symmetry on 1000 random words.
#[test]
fn criterion_7_word_algebra() {
    for n in 1..=3usize {
        for a in 1..=3usize {
            for x in 1..=3usize {
                let layout = words::PartyLayout::uniform(n, a, x);
                let ws = words::generate_aq_words_layout(&layout, 20_000).unwrap();
                assert_eq!(ws.len(), (1 + a * x).pow(n as u32), "n={n} a={a} x={x}");
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let random_word = |rng: &mut ChaCha8Rng| -> words::Word {
        let len = rng.gen_range(0..6);
        let letters: Vec<words::Letter> = (0..len)
            .map(|_| {
                words::Letter::new(rng.gen_range(0..3), rng.gen_range(0..2), rng.gen_range(0..2))
            })
            .collect();
        words::Word::from_letters(&letters)
    };
    for _ in 0..1000 {
        let v = random_word(&mut rng);
        let w = random_word(&mut rng);
        let again = words::Word::from_letters(v.letters());
        assert_eq!(v, again, "canonicalization not idempotent");
        let k_vw = words::product_key(&v, &w);
        let k_wv = words::product_key(&w, &v);
        assert_eq!(k_vw, k_wv.dagger(), "product-key dagger symmetry");
        if k_vw.is_null() {
            assert!(v.dagger().concat(&w).is_null());
        }
    }
    pass(7, "word algebra", "27 count checks, 1000 random word pairs".into());
}

/// 8. Numerics: embedding spectrum doubling, Gram reconstruction, solver
/// convergence on random strictly feasible problems.
#[test]
fn criterion_8_numerics() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    // embedding doubles the spectrum on 100 random Hermitian matrices
    for _ in 0..100 {
        let n = rng.gen_range(1..=8);
        let h = fixtures::random_hermitian(&mut rng, n);
        let (cv, _) = heig(&h);
        let (rv, _) = eig_sym(&sdp::embed_hermitian(&h).unwrap());
        for (i, v) in cv.iter().enumerate() {
            assert!((rv[2 * i] - v).abs() < 1e-9 && (rv[2 * i + 1] - v).abs() < 1e-9);
        }
    }
    // gram reconstruction on 100 random PSD matrices of dim ≤ 60
    let mut worst_gram: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=60);
        let g = fixtures::random_hermitian(&mut rng, n);
        let psd = g.matmul(&g.adjoint());
        let v = sdp::gram_vectors(&psd, 1e-10).unwrap();
        let dev = v.adjoint().matmul(&v).sub(&psd).frobenius_norm();
        let rel = dev / psd.frobenius_norm().max(1.0);
        assert!(rel <= 1e-8, "gram deviation {rel:.3e} at n={n}");
        worst_gram = worst_gram.max(rel);
    }
    // 50 random strictly feasible problems reach optimal with gap ≤ 1e-8
    let opts = SolverOptions::default();
    let mut worst_iters = 0;
    for case in 0..50 {
        let n = rng.gen_range(5..=100);
        let m = rng.gen_range(1..=6);
        let g = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        let mut base = g.matmul(&g.transpose());
        for i in 0..n {
            base[(i, i)] += 0.5;
        }
        let dirs: Vec<sdp::SparseSym> = (0..m)
            .map(|_| {
                let d = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
                let mut sym = d.add(&d.transpose()).scale(0.5);
                sym.symmetrize();
                sdp::SparseSym::from_dense(&sym)
            })
            .collect();
        let p = sdp::SdpProblem {
            dim: n,
            base,
            directions: dirs,
            objective: vec![0.0; m],
            objective_shift: 0.0,
            lambda_slack: true,
            equalities: vec![],
        };
        let sol = sdp::solve(&p, &opts).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal, "case {case} (n={n}, m={m})");
        assert!(sol.gap <= 1e-8);
        worst_iters = worst_iters.max(sol.iters);
    }
    pass(
        8,
        "numerics",
        format!("embedding ×100, gram ×100 (worst {worst_gram:.3e}), solver ×50 (max {worst_iters} iters)"),
    );
}

/// 9. Tomography round trip in dimensions 2 and 4.
#[test]
fn criterion_9_tomography_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for (d, frame) in [
        (2usize, tomography::pauli_frame(1).unwrap()),
        (4, tomography::pauli_frame(2).unwrap()),
    ] {
        for _ in 0..50 {
            let h = fixtures::random_hermitian(&mut rng, d);
            let probs = frame.expectation_vector(&h);
            let back = frame.reconstruct(&probs).unwrap();
            let dev = back.sub(&h).max_abs();
            assert!(dev <= 1e-9, "d={d}: deviation {dev:.3e}");
            worst = worst.max(dev);
        }
    }
    pass(9, "tomography round trip", format!("100 matrices, worst deviation {worst:.3e}"));
}
