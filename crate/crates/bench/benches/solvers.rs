use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use discrete_auction::dominance::DEFAULT_EXACT_BUDGET;
use discrete_auction::enumerate::DEFAULT_NODE_BUDGET;
use discrete_auction::{
    enumerate_pure_equilibria, expected_revenue, is_equilibrium, reduce, solve_symmetric, Scope,
    Structure, TieRule,
};
use discrete_auction_bench::{staggered_profile, uniform};

fn payoff_check(c: &mut Criterion) {
    let mut group = c.benchmark_group("is_equilibrium");
    for x in [10, 20, 40] {
        let spec = uniform(Structure::FirstPrice, TieRule::FairTies, 3, x);
        let profile = staggered_profile(3, x);
        group.bench_with_input(BenchmarkId::from_parameter(x), &x, |b, _| {
            b.iter(|| is_equilibrium(black_box(&spec), black_box(&profile)).unwrap())
        });
    }
    group.finish();

    let spec = uniform(Structure::AllPay, TieRule::NoWinnerOnTies, 4, 12);
    let profile = staggered_profile(4, 12);
    c.bench_function("expected_revenue/ap_n4_x12", |b| {
        b.iter(|| expected_revenue(black_box(&spec), black_box(&profile)).unwrap())
    });
}

fn symmetric(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_symmetric");
    for (name, structure, tie, n, x) in [
        (
            "fp_none_n2_x20",
            Structure::FirstPrice,
            TieRule::NoWinnerOnTies,
            2,
            20,
        ),
        (
            "fp_none_n5_x20",
            Structure::FirstPrice,
            TieRule::NoWinnerOnTies,
            5,
            20,
        ),
        (
            "fp_fair_n3_x13",
            Structure::FirstPrice,
            TieRule::FairTies,
            3,
            13,
        ),
        (
            "ap_fair_n3_x12",
            Structure::AllPay,
            TieRule::FairTies,
            3,
            12,
        ),
    ] {
        let spec = uniform(structure, tie, n, x);
        group.bench_function(name, |b| {
            b.iter(|| solve_symmetric(black_box(&spec), 16).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    for (name, structure, tie, n, x) in [
        (
            "fp_fair_n3_s8",
            Structure::FirstPrice,
            TieRule::FairTies,
            3,
            7,
        ),
        ("ap_fair_n3_s7", Structure::AllPay, TieRule::FairTies, 3, 6),
        (
            "ap_none_n2_s9",
            Structure::AllPay,
            TieRule::NoWinnerOnTies,
            2,
            8,
        ),
    ] {
        let spec = uniform(structure, tie, n, x);
        group.bench_function(name, |b| {
            b.iter(|| {
                let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET).unwrap();
                enumerate_pure_equilibria(
                    &spec,
                    &reduced,
                    Scope::MonotoneUndominated,
                    DEFAULT_NODE_BUDGET,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, payoff_check, symmetric, enumeration);
criterion_main!(benches);
