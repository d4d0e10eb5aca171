use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ensemble_instability::axioms::check_unanimity_implies_mcr_restricted;
use ensemble_instability::consistency::{convergence_experiment, four_cell_problem, ExperimentConfig};
use ensemble_instability::search::{enumerate_family, find_witnesses, FamilySpec, Generator, ScanOptions};
use ensemble_instability::{Aggregator, Axiom, Execution, LabelSet};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn mcr_scan(c: &mut Criterion) {
    let labels = LabelSet::alphabetic(3).unwrap().shared();
    let family = enumerate_family(&FamilySpec::new(labels, 2, Generator::Grid(4))).unwrap();
    let mut group = c.benchmark_group("mcr_scan_grid4_m2");
    group.sample_size(10);
    for (name, exec) in MODES {
        // a large budget keeps the scan from stopping at the first witness
        let opts = ScanOptions { budget: 10_000, exec, ..ScanOptions::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| find_witnesses(&Aggregator::SoftVoting, &family, &[Axiom::Mcr, Axiom::Idc], black_box(opts)).unwrap())
        });
    }
    group.finish();
}

fn restricted_lemma(c: &mut Criterion) {
    let labels = LabelSet::alphabetic(3).unwrap().shared();
    let family = enumerate_family(&FamilySpec::new(labels, 3, Generator::CommonStrict)).unwrap().materialize(usize::MAX).unwrap();
    let mut group = c.benchmark_group("common_order_pairs_m3");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| check_unanimity_implies_mcr_restricted(&Aggregator::SoftVoting, black_box(&family), exec).unwrap())
        });
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let problem = four_cell_problem();
    let mut group = c.benchmark_group("convergence_small");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = ExperimentConfig {
            n_schedule: vec![100, 1_000],
            n_mc: 500,
            n_pairs: 500,
            exec,
            ..ExperimentConfig::default()
        };
        group.bench_function(name, |b| b.iter(|| convergence_experiment(&problem, black_box(&config)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, mcr_scan, restricted_lemma, simulation);
criterion_main!(benches);
