//! Criterion benchmarks for the three hot kernels: Schur expansion in the
//! time variables, nested tau expansion, and the entry-level chain oracle.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, Criterion};

use tauforge_core::{
    chain_evaluate, expand_tau, schur, Exponents, MatrixChainPlan, NestedSpec, Partition, Scalar,
    Sign, WeightGen,
};

fn bench_schur(c: &mut Criterion) {
    let lam = Partition::new(vec![4, 3, 2, 1]);
    c.bench_function("schur_4321_cap10", |b| {
        b.iter(|| schur(std::hint::black_box(&lam), "t", 10))
    });
}

fn bench_expand_tau(c: &mut Criterion) {
    let spec = NestedSpec {
        n: 0,
        m: 1,
        sigma: vec![Sign::Plus],
        weights: vec![
            WeightGen::plus(Scalar::from_ratio(1, 7)),
            WeightGen::minus(Scalar::from_ratio(1, 9)),
        ],
        caps: vec![4, 4, 4],
        insertions: BTreeMap::new(),
    };
    c.bench_function("expand_tau_m1_caps444", |b| {
        b.iter(|| expand_tau(std::hint::black_box(&spec)).unwrap())
    });
}

fn bench_chain_evaluate(c: &mut Criterion) {
    let plan = MatrixChainPlan::simple_maps_chain(3);
    let mut query = BTreeMap::new();
    query.insert("t0".to_string(), Exponents::from_pairs(vec![(1, 1), (2, 1)]));
    query.insert("t1".to_string(), Exponents::from_pairs(vec![(3, 1)]));
    query.insert("t2".to_string(), Exponents::from_pairs(vec![(2, 1)]));
    c.bench_function("chain_evaluate_simple_maps_deg3", |b| {
        b.iter(|| chain_evaluate(std::hint::black_box(&plan), &query, 8).unwrap())
    });
}

criterion_group!(kernels, bench_schur, bench_expand_tau, bench_chain_evaluate);
criterion_main!(kernels);
