use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use eprkit_core::fixtures;
use eprkit_core::ghjw;
use eprkit_core::moment;
use eprkit_core::words::{generate_aq_words_layout, PartyLayout};
use eprkit_core::SolverOptions;

fn bench_words(c: &mut Criterion) {
    c.bench_function("aq_words_n3_binary", |b| {
        let layout = PartyLayout::uniform(3, 3, 3);
        b.iter(|| generate_aq_words_layout(&layout, 20_000).unwrap().len())
    });
}

fn bench_bell_membership(c: &mut Criterion) {
    let pr = fixtures::pr_box_correlation();
    let opts = SolverOptions::default();
    c.bench_function("bell_membership_pr_box", |b| {
        b.iter_batched(
            || moment::compile_bell(&pr).unwrap(),
            |compiled| moment::membership(&compiled, &opts).unwrap().t_star,
            BatchSize::SmallInput,
        )
    });
}

fn bench_ghjw_roundtrip(c: &mut Criterion) {
    let asm = fixtures::random_ns(5, 3, 2);
    c.bench_function("ghjw_realize_roundtrip", |b| {
        b.iter(|| {
            let r = ghjw::realize(&asm).unwrap();
            ghjw::verify_realization(&r, &asm).unwrap()
        })
    });
}

fn bench_epr_membership(c: &mut Criterion) {
    let asm = fixtures::singlet();
    let opts = SolverOptions::default();
    c.bench_function("epr_membership_singlet", |b| {
        b.iter_batched(
            || moment::compile_epr(&asm).unwrap(),
            |compiled| moment::membership(&compiled, &opts).unwrap().t_star,
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_words,
    bench_bell_membership,
    bench_ghjw_roundtrip,
    bench_epr_membership
);
criterion_main!(benches);
