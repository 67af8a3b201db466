//! Sequential vs parallel runs of the heavy sweeps.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mechlib::instances::{gen_random_mech_lb, gen_random_separable, gen_random_tabulated, gen_three_bidder_no_c};
use mechlib::oracle::{best_monotone_ratio_with, exact_random_hypergrid_stats_with, monte_carlo_random_hypergrid_with};
use mechlib::par::Execution;
use mechlib::revenue::{exact_m_revenue, BaseRuleFamily, JointPrior, MParams};
use mechlib::valuation::compute_c;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn search(c: &mut Criterion) {
    let v = gen_three_bidder_no_c().unwrap();
    let mut g = c.benchmark_group("monotone_search");
    g.sample_size(10);
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::new(label, "three_bidder"), |b| {
            b.iter(|| best_monotone_ratio_with(black_box(&v), 10_000_000, exec).unwrap())
        });
    }
    g.finish();
}

fn random_orders(c: &mut Criterion) {
    let (v, cv, _) = gen_random_tabulated(7, 1, 3).unwrap();
    let cv = cv.as_f64();
    let top = v.space().top();
    let mut g = c.benchmark_group("exact_random_order");
    g.sample_size(10);
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::new(label, "n7"), |b| {
            b.iter(|| exact_random_hypergrid_stats_with(black_box(&v), &top, cv, exec).unwrap())
        });
    }
    g.finish();

    let lb = gen_random_mech_lb(64, 2.0).unwrap();
    let ones = vec![1; 65];
    let mut g = c.benchmark_group("monte_carlo_random_order");
    g.sample_size(10);
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::new(label, "mech_lb_64_x2000"), |b| {
            b.iter(|| monte_carlo_random_hypergrid_with(black_box(&lb), &ones, 2_000, 1, 2.0, exec).unwrap())
        });
    }
    g.finish();
}

fn revenue(c: &mut Criterion) {
    let v = gen_random_separable(3, 2, 1.5, 11).unwrap();
    let cv = compute_c(&v).unwrap().as_f64();
    let prior = JointPrior::uniform(v.space().clone()).unwrap();
    let family = BaseRuleFamily::random_hypergrid(&v, cv).unwrap();
    let params = MParams::new(2.0 * cv, 1.0, 0.5).unwrap();
    let mut g = c.benchmark_group("exact_m_revenue");
    g.sample_size(10);
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::new(label, "separable_3x2"), |b| {
            b.iter(|| exact_m_revenue(black_box(&v), &prior, &family, params, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, search, random_orders, revenue);
criterion_main!(benches);
