use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lora_maxmin::analytic::{interference_laplace, zone_throughput};
use lora_maxmin::optimize::iterative_balancing;
use lora_maxmin::simulate::{estimate_success_prob, simulate_finite_population};
use lora_maxmin::{DutyMode, IbOptions, NetworkConfig, Partition, SfTable};
use lora_maxmin_bench::{benchmark_scenario, reference_zone};

fn closed_form(c: &mut Criterion) {
    let zone = reference_zone(7, 0.005);
    c.bench_function("zone_throughput", |b| {
        b.iter(|| zone_throughput(black_box(&zone)))
    });
    let z = 1.0 / zone.received_power_w;
    c.bench_function("interference_laplace", |b| {
        b.iter(|| interference_laplace(black_box(z), black_box(&zone)))
    });
}

fn balancing(c: &mut Criterion) {
    let table = SfTable::default();
    let mut group = c.benchmark_group("iterative_balancing");
    for rc in [1000.0, 2645.0] {
        let cfg = NetworkConfig {
            cell_radius_m: rc,
            ..NetworkConfig::default()
        };
        let start = Partition::equal_area(rc).unwrap();
        let opts = IbOptions::from_config(&cfg);
        group.bench_with_input(BenchmarkId::from_parameter(rc), &rc, |b, _| {
            b.iter(|| iterative_balancing(&cfg, &table, &start, DutyMode::Optimal, opts).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for sf in [7u8, 12] {
        let zone = reference_zone(sf, 0.01);
        group.bench_with_input(
            BenchmarkId::new("success_prob_10k", sf),
            &zone,
            |b, zone| b.iter(|| estimate_success_prob(zone, zone.outer_radius_m, 10_000, 1)),
        );
    }
    let scenario = benchmark_scenario(1000.0);
    group.bench_function("finite_population_1k", |b| {
        b.iter(|| simulate_finite_population(&scenario, 1_000, 1))
    });
    group.finish();
}

criterion_group!(benches, closed_form, balancing, monte_carlo);
criterion_main!(benches);
