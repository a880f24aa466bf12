use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use voatrace_bench::monomials_up_to;
use voatrace_core::fock::{bracket_to_round, brute_force_z, BracketMonomial};
use voatrace_core::lattice::{enumerate_vectors, lattice_trace_batch, theta_weighted};
use voatrace_core::modforms::{eisenstein, eta_power, qm_from_series, qm_to_series};
use voatrace_core::scalar::{rat, ratio, GaussianRational};
use voatrace_core::zhu::reduce_boson_trace;
use voatrace_core::{CosetRep, Lattice, QuasiModular};

fn bench_series(c: &mut Criterion) {
    let mut g = c.benchmark_group("series");
    g.bench_function("eta_power(-8) to order 12", |b| {
        b.iter(|| eta_power(-8, &rat(12)))
    });
    g.bench_function("eisenstein(12) to order 24", |b| {
        b.iter(|| eisenstein(12, &rat(24)).unwrap())
    });
    g.bench_function("qm round trip weight 8", |b| {
        let p = QuasiModular::e4().pow(2);
        b.iter(|| {
            let s = qm_to_series(&p, &rat(20));
            qm_from_series(&s, 8).unwrap()
        })
    });
    g.finish();
}

fn bench_boson(c: &mut Criterion) {
    let mut g = c.benchmark_group("boson");
    g.sample_size(20);
    let monomials = monomials_up_to(2, 6);
    g.bench_function("symbolic reduction, rank 2 weight <= 6", |b| {
        b.iter_batched(
            || monomials.clone(),
            |ms| {
                for m in &ms {
                    std::hint::black_box(reduce_boson_trace(m));
                }
            },
            BatchSize::SmallInput,
        )
    });
    let quartic = BracketMonomial::new(vec![(1, 1); 4], 1);
    let state = bracket_to_round(&quartic);
    let t = ratio(167, 24);
    g.bench_function("brute-force trace of a quartic state", |b| {
        b.iter(|| brute_force_z(&state, &t).unwrap())
    });
    g.finish();
}

fn bench_lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    g.sample_size(10);
    let e8 = Lattice::e8();
    let zero = CosetRep::zero(8);
    g.bench_function("enumerate E8 below norm 4", |b| {
        b.iter(|| enumerate_vectors(&e8, &zero, &rat(4)).unwrap())
    });
    g.bench_function("E8 plain theta to order 6", |b| {
        let a = vec![GaussianRational::zero(); 8];
        b.iter(|| theta_weighted(&e8, &zero, &a, 0, &rat(6)).unwrap())
    });
    let monomials = monomials_up_to(8, 2);
    g.bench_function("E8 symbolic trace batch, weight <= 2", |b| {
        b.iter(|| lattice_trace_batch(&e8, &zero, &monomials, &rat(4)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_series, bench_boson, bench_lattice);
criterion_main!(benches);
