//! Acceptance run: every criterion at its stated tolerance, one PASS/FAIL
//! line each. Runs without the libtest harness so the lines always print.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mechlib::instances::*;
use mechlib::mechanisms::*;
use mechlib::oracle::*;
use mechlib::par::Execution;
use mechlib::revenue::*;
use mechlib::valuation::{alpha_approximates, compute_c, compute_d};
use mechlib::{approx_le, SignalSpace, ValuationInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn finite_c(v: &ValuationInstance) -> Option<f64> {
    compute_c(v).unwrap().finite()
}

/// Concave up to rounding in the measured ratios.
fn unit_d(v: &ValuationInstance) -> bool {
    compute_d(v).unwrap().finite().is_some_and(|d| approx_le(d, 1.0))
}

fn with_signal(s: &[usize], i: usize, t: usize) -> Vec<usize> {
    let mut p = s.to_vec();
    p[i] = t;
    p
}

/// Every named generator at a desk-scale parameter setting, tabulated.
fn generator_instances() -> Vec<ValuationInstance> {
    let mut out = vec![
        gen_oil_sc(4).unwrap(),
        gen_oil_no_sc(4).unwrap(),
        gen_retail(8).unwrap(),
        gen_det_impossibility(3.0).unwrap(),
        gen_rand_impossibility(3).unwrap(),
        gen_rand_c_lb(2, 1.5).unwrap(),
        gen_rand_c_lb(3, 2.0).unwrap(),
        gen_two_by_two_tight(2.0).unwrap(),
        gen_three_bidder_no_c().unwrap(),
        gen_tight_hypergrid(3, 1.5).unwrap(),
        gen_tight_hypergrid(4, 2.0).unwrap(),
        gen_random_mech_lb(4, 2.0).unwrap().tabulate(1 << 20).unwrap(),
    ];
    for seed in 0..3 {
        out.push(gen_random_separable(3, 2, 2.0, seed).unwrap());
        out.push(gen_random_separable(2, 3, 1.5, seed).unwrap());
        out.push(gen_random_tabulated(3, 2, seed).unwrap().0);
        out.push(gen_random_tabulated(2, 3, seed).unwrap().0);
    }
    out.retain(|v| v.space().profile_count().is_some_and(|c| c <= 10_000));
    out
}

fn name(v: &ValuationInstance) -> String {
    v.spec().map(|s| format!("{}{:?}", s.name, s.params)).unwrap_or_else(|| "table".into())
}

fn c1_truthfulness() -> Verdict {
    fn violations(rule: &dyn AllocationRule, v: &ValuationInstance, run: impl Fn(&[usize]) -> Outcome + Sync + Send) -> usize {
        check_allocation_monotone(rule).unwrap().len() + check_expost_truthful(v, run).unwrap().len()
    }
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut audit = |label: String, rule: &dyn AllocationRule, v: &ValuationInstance| {
        checked += 1;
        let bad = violations(rule, v, |s| outcome(rule, v, s));
        if bad > 0 {
            failures.push(format!("{label}: {bad} violations"));
        }
    };
    let mut random_runs = Vec::new();
    for v in generator_instances() {
        let Some(c) = finite_c(&v) else { continue };
        let n = v.n();
        let label = name(&v);
        if c == 1.0 {
            audit(format!("vcg on {label}"), &generalized_vcg(&v).unwrap(), &v);
        }
        if n == 2 {
            audit(format!("two-bidder on {label}"), &two_bidder_coloring(&v).unwrap(), &v);
        }
        if v.space().sizes().iter().all(|&k| k == 1) {
            audit(format!("high-if-possible on {label}"), &high_if_possible(&v).unwrap(), &v);
        }
        let orders = if n <= 4 {
            Permutation::all(n)
        } else {
            (0..4).map(|seed| random_permutation(n, seed)).collect()
        };
        for pi in orders {
            let table = hypergrid_coloring(&v, &pi).unwrap();
            audit(format!("hypergrid {:?} on {label}", pi.to_one_based()), &table, &v);
        }
        for seed in 0..3 {
            random_runs.push((v.clone(), seed, c));
        }
    }
    for (v, seed, c) in random_runs {
        // The realized order of the random variant, run lazily.
        let (_, pi) = random_hypergrid_outcome(&v, &v.space().zero(), seed, c).unwrap();
        let rule = LazyHypergrid::new(&v, pi.clone(), c).unwrap();
        checked += 1;
        if violations(&rule, &v, |s| random_hypergrid_outcome(&v, s, seed, c).unwrap().0) > 0 {
            failures.push(format!("random order {:?} on {}", pi.to_one_based(), name(&v)));
        }
    }
    verdict(
        failures.is_empty(),
        format!("{checked} mechanism/instance pairs, violations: {:?}", failures),
    )
}

fn c2_approximation() -> Verdict {
    let mut worst_slack: f64 = 0.0;
    let mut failures = Vec::new();
    let mut check = |family: &str, seed: u64, v: &ValuationInstance, ratio: f64, bound: f64| {
        worst_slack = worst_slack.max(ratio / bound);
        if !approx_le(ratio, bound) {
            failures.push(format!("{family} seed {seed}: {ratio} > {bound}"));
        }
        let _ = v;
    };
    for seed in 0..200u64 {
        let k = 1 + (seed % 3) as usize;
        let cs = 1.0 + 0.5 * (seed % 4) as f64;
        let two = [
            ("random_tabulated", gen_random_tabulated(2, k, seed).unwrap().0),
            ("random_separable", gen_random_separable(2, k, cs, seed).unwrap()),
        ];
        for (fam, v) in &two {
            let c = finite_c(v).unwrap();
            let r = welfare_ratio(&two_bidder_coloring(v).unwrap(), v).unwrap().worst;
            check(&format!("two-bidder/{fam}"), seed, v, r, c);
        }
        let n = 2 + (seed % 3) as usize;
        let binary = [
            ("random_tabulated", gen_random_tabulated(n, 1, seed).unwrap().0),
            ("random_separable", gen_random_separable(n, 1, cs, seed).unwrap()),
        ];
        for (fam, v) in &binary {
            let c = finite_c(v).unwrap();
            let r = welfare_ratio(&high_if_possible(v).unwrap(), v).unwrap().worst;
            check(&format!("high-if-possible/{fam}"), seed, v, r, c);
        }
        let kh = 1 + (seed % 2) as usize;
        let general = [
            ("random_tabulated", gen_random_tabulated(n, kh, seed).unwrap().0),
            ("random_separable", gen_random_separable(n, kh, cs, seed).unwrap()),
        ];
        for (fam, v) in &general {
            let c = finite_c(v).unwrap();
            let pi = random_permutation(n, seed);
            let r = welfare_ratio(&hypergrid_coloring(v, &pi).unwrap(), v).unwrap().worst;
            check(&format!("hypergrid/{fam}"), seed, v, r, (n - 1) as f64 * c);
        }
    }
    verdict(
        failures.is_empty(),
        format!("6 families x 200 instances, max ratio/bound = {worst_slack:.6}, failures: {failures:?}"),
    )
}

fn c3_tightness() -> Verdict {
    let mut rows = Vec::new();
    let mut ok = true;
    for n in 3..=5 {
        for c in [1.5, 2.0, 3.0] {
            let v = gen_tight_hypergrid(n, c).unwrap();
            let table = hypergrid_coloring(&v, &Permutation::identity(n)).unwrap();
            let worst = welfare_ratio(&table, &v).unwrap().worst;
            let target = (n - 1) as f64 * c;
            ok &= (worst - target).abs() <= 1e-9 * target;
            rows.push(format!("n={n},c={c}:{worst}"));
        }
    }
    verdict(ok, rows.join(" "))
}

fn c4_impossibility() -> Verdict {
    let mut ok = true;
    let mut rows = Vec::new();
    for r in [2.0, 5.0, 10.0] {
        let rep = best_monotone_ratio(&gen_det_impossibility(r).unwrap(), DEFAULT_TABLE_CAP).unwrap();
        ok &= (rep.best_ratio - r).abs() <= 1e-9 * r;
        rows.push(format!("det r={r}: {}", rep.best_ratio));
    }
    for c in [1.5, 2.0, 4.0] {
        let rep = best_monotone_ratio(&gen_two_by_two_tight(c).unwrap(), DEFAULT_TABLE_CAP).unwrap();
        ok &= (rep.best_ratio - c).abs() <= 1e-9 * c;
        rows.push(format!("2x2 c={c}: {}", rep.best_ratio));
    }
    let v = gen_three_bidder_no_c().unwrap();
    let rep = best_monotone_ratio(&v, DEFAULT_TABLE_CAP).unwrap();
    let c = compute_c(&v).unwrap().as_f64();
    ok &= rep.best_ratio > 2.0 + 1e-6;
    rows.push(format!(
        "three-bidder (measured c={c}): best {} over {} monotone tables, margin {:.6}",
        rep.best_ratio,
        rep.monotone_count,
        rep.best_ratio - 2.0
    ));
    verdict(ok, rows.join("; "))
}

fn small_instances() -> Vec<ValuationInstance> {
    let mut out: Vec<ValuationInstance> = generator_instances()
        .into_iter()
        .filter(|v| v.n() <= 4 && v.space().sizes().iter().all(|&k| k <= 3))
        .collect();
    for seed in 0..40u64 {
        let n = 2 + (seed % 3) as usize;
        let k = 1 + (seed % 3) as usize;
        out.push(gen_random_tabulated(n, k, 100 + seed).unwrap().0);
        out.push(gen_random_separable(n, k, 1.0 + (seed % 5) as f64 * 0.5, 100 + seed).unwrap());
    }
    out
}

fn c5_lazy_equivalence() -> Verdict {
    let (mut winners, mut payments, mut compared) = (0, 0, 0u64);
    for v in small_instances() {
        let Some(c) = finite_c(&v) else { continue };
        for pi in Permutation::all(v.n()) {
            let table = hypergrid_coloring(&v, &pi).unwrap();
            let lazy = LazyHypergrid::new(&v, pi.clone(), c).unwrap().with_lemma_checks(true);
            for s in v.space().profiles() {
                compared += 1;
                if lazy_winner(&v, &pi, &s, c).unwrap() != table.winner(&s).unwrap() {
                    winners += 1;
                }
                if outcome(&lazy, &v, &s).payment != payment_linear(&lazy, &v, &s) {
                    payments += 1;
                }
            }
        }
    }
    verdict(
        winners + payments == 0,
        format!("{compared} (instance, order, profile) triples; winner mismatches {winners}, payment mismatches {payments}"),
    )
}

/// `v_i = L_i + γ L_i²` with `L_i = Σ_j a_ij s_j`: increments grow with
/// the other signals, so the instance is d-concave for a bounded d > 1.
fn engineered_d_concave(n: usize, k: usize, seed: u64) -> ValuationInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let x = rng.random_range(0..=8) as f64 / 8.0;
                    if i == j { 0.5 + x / 2.0 } else { x }
                })
                .collect()
        })
        .collect();
    let gamma = [0.02, 0.05, 0.1][rng.random_range(0..3)];
    ValuationInstance::from_fn(SignalSpace::new(vec![k; n]).unwrap(), |i, s| {
        let l: f64 = (0..n).map(|j| a[i][j] * s[j] as f64).sum();
        l + gamma * l * l
    })
    .unwrap()
}

fn c6_concave_random() -> Verdict {
    let mut concave = vec![gen_two_by_two_tight(2.0).unwrap(), gen_oil_sc(3).unwrap(), gen_rand_c_lb(2, 2.0).unwrap()];
    for n in 3..=6 {
        for c in [1.5, 2.0] {
            concave.push(gen_tight_hypergrid(n, c).unwrap());
        }
    }
    for seed in 0..20u64 {
        let n = 2 + (seed % 5) as usize;
        let k = if n <= 3 { 2 } else { 1 };
        concave.push(gen_random_separable(n, k, 1.0 + (seed % 4) as f64 * 0.5, 200 + seed).unwrap());
    }
    let (mut profiles, mut violations, mut lemma) = (0, 0, 0);
    let mut used = 0;
    for v in &concave {
        if !unit_d(v) || v.n() > 6 {
            continue;
        }
        let Some(c) = finite_c(v) else { continue };
        used += 1;
        for s in v.space().profiles() {
            profiles += 1;
            let st = exact_random_hypergrid_stats(v, &s, c).unwrap();
            lemma += st.lemma_violations;
            if !approx_le(optimal_welfare(v, &s) / (2.0 * c), st.expected_value) {
                violations += 1;
            }
        }
    }
    let (mut d_used, mut d_profiles, mut d_viol) = (0, 0, 0);
    let mut d_range = (f64::INFINITY, 0.0f64);
    for seed in 0..40u64 {
        let v = engineered_d_concave(2 + (seed % 2) as usize, 1 + (seed % 3) as usize, seed);
        let d = compute_d(&v).unwrap().as_f64();
        let Some(c) = finite_c(&v) else { continue };
        if !(d > 1.0 && d <= 3.0) {
            continue;
        }
        d_used += 1;
        d_range = (d_range.0.min(d), d_range.1.max(d));
        for s in v.space().profiles() {
            d_profiles += 1;
            let st = exact_random_hypergrid_stats(&v, &s, c).unwrap();
            lemma += st.lemma_violations;
            if !approx_le(optimal_welfare(&v, &s) / (c * (d + 1.0)), st.expected_value) {
                d_viol += 1;
            }
        }
    }
    verdict(
        violations + d_viol + lemma == 0 && used > 0 && d_used > 0,
        format!(
            "1-concave: {used} instances, {profiles} profiles, {violations} below OPT/2c; d-concave: {d_used} instances \
             (d in [{:.3}, {:.3}]), {d_profiles} profiles, {d_viol} below OPT/(c(d+1)); lemma failures {lemma}",
            d_range.0, d_range.1
        ),
    )
}

fn c7_general_random() -> Verdict {
    let (mut instances, mut profiles, mut violations) = (0, 0, 0);
    let mut min_slack = f64::INFINITY;
    for n in 2..=8usize {
        for seed in 0..3u64 {
            let k = if n <= 4 { 1 + (seed % 2) as usize } else { 1 };
            let (v, c, _) = gen_random_tabulated(n, k, 300 + seed + 10 * n as u64).unwrap();
            let Some(c) = c.finite() else { continue };
            instances += 1;
            let all: Vec<Vec<usize>> = v.space().profiles().collect();
            let chosen: Vec<Vec<usize>> = if n <= 6 {
                all
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut pick: Vec<Vec<usize>> = (0..11).map(|_| all[rng.random_range(0..all.len())].clone()).collect();
                pick.push(v.space().top());
                pick
            };
            let bound_factor = 2.0 * c.powf(1.5) * (n as f64).sqrt();
            for s in chosen {
                profiles += 1;
                let st = exact_random_hypergrid_stats(&v, &s, c).unwrap();
                let opt = optimal_welfare(&v, &s);
                if opt > 0.0 {
                    min_slack = min_slack.min(st.expected_value * bound_factor / opt);
                }
                if !approx_le(opt / bound_factor, st.expected_value) {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!(
            "{instances} instances (n = 2..8), {profiles} profiles by exact enumeration, {violations} below \
             OPT/(2c^1.5 sqrt n); smallest mean/bound {min_slack:.4}"
        ),
    )
}

fn c8_mech_lb() -> Verdict {
    let (n, c) = (64usize, 2.0);
    let v = gen_random_mech_lb(n, c).unwrap();
    let g = mech_lb_groups(n).unwrap().len() as f64;
    let ones = vec![1; n + 1];
    let opt = optimal_welfare(&v, &ones);
    let (mean, se) = monte_carlo_random_hypergrid(&v, &ones, 100_000, 8, c).unwrap();
    let root = (n as f64).sqrt();
    let fraction = (1.0 - 2.0 / root) / (c * g) + 2.0 / root;
    let bound = opt * fraction * 1.1;
    verdict(
        mean <= bound,
        format!("groups {g}, OPT {opt}, mean winner value {mean} (se {se:.2e}) <= {bound:.4}"),
    )
}

fn c9_closed_forms() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for eps in [0.1, 0.01] {
            let r = closed_form_rand_impossibility(n, eps).unwrap();
            worst = worst.max((r.uniform_welfare - r.bound).abs());
            worst = worst.max((r.enumerated_opt - r.opt).abs());
            worst = worst.max((r.bound / r.opt - 1.0 / (n as f64 * (1.0 - eps) + eps)).abs());
        }
    }
    verdict(worst <= 1e-12, format!("largest deviation {worst:.3e} over n = 2..6, eps in {{0.1, 0.01}}"))
}

fn c10_revenue() -> Verdict {
    let mut instances = vec![
        gen_two_by_two_tight(1.5).unwrap(),
        gen_two_by_two_tight(2.0).unwrap(),
        gen_oil_sc(1).unwrap(),
        gen_rand_c_lb(2, 2.0).unwrap(),
        gen_tight_hypergrid(3, 1.5).unwrap(),
        gen_tight_hypergrid(3, 2.0).unwrap(),
    ];
    for seed in 0..8u64 {
        instances.push(gen_random_separable(2 + (seed % 2) as usize, 1, 1.0 + (seed % 3) as f64 * 0.5, 400 + seed).unwrap());
    }
    let (mut cases, mut violations) = (0, 0);
    let mut min_slack = f64::INFINITY;
    for (idx, v) in instances.iter().enumerate() {
        if !unit_d(v) {
            continue;
        }
        let c = finite_c(v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
        let mut priors = vec![JointPrior::uniform(v.space().clone()).unwrap()];
        let marginals = (0..v.n())
            .map(|_| {
                let p = rng.random_range(1..=9) as f64 / 10.0;
                vec![1.0 - p, p]
            })
            .collect();
        priors.push(JointPrior::product(v.space().clone(), marginals).unwrap());
        for prior in &priors {
            let det = BaseRuleFamily::high_if_possible(v, c).unwrap();
            let alpha = det.measured_alpha().unwrap();
            let params = MParams::new(alpha, 1.0, 1.0).unwrap();
            let rev = exact_m_revenue(v, prior, &det, params, Execution::default()).unwrap();
            let la = family_lookahead(prior, &det).unwrap();
            cases += 1;
            min_slack = min_slack.min(rev * params.factor() / la);
            if !approx_le(la / params.factor(), rev) {
                violations += 1;
            }
            let rnd = BaseRuleFamily::random_hypergrid(v, c).unwrap();
            let params = MParams::new(2.0 * c, 1.0, 0.5).unwrap();
            let rev = exact_m_revenue(v, prior, &rnd, params, Execution::default()).unwrap();
            let la = family_lookahead(prior, &rnd).unwrap();
            cases += 1;
            min_slack = min_slack.min(rev * params.factor() / la);
            if !approx_le(la / params.factor(), rev) {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!("{cases} (instance, prior, base) cases, {violations} violations; smallest rev*factor/lookahead {min_slack:.3}"),
    )
}

fn c11_lemmas() -> Verdict {
    let (mut contapx, mut corollary, mut key, mut lemma, mut checks) = (0, 0, 0, 0, 0u64);
    let mut instances = generator_instances();
    for seed in 0..20 {
        instances.push(gen_random_tabulated(2 + seed % 3, 1 + seed % 2, 500 + seed as u64).unwrap().0);
    }
    for v in &instances {
        let Some(c) = finite_c(v) else { continue };
        let n = v.n();
        let space = v.space();
        for alpha in [c, c + 0.5, 2.0 * c] {
            for s in space.profiles() {
                for i in 0..n {
                    for j in 0..n {
                        let here = alpha_approximates(v, i, j, &s, alpha);
                        for t in 0..=space.max_signal(i) {
                            let p = with_signal(&s, i, t);
                            let vi = v.value(i, &p);
                            let vj = v.value(j, &p);
                            checks += 1;
                            // Approximation survives raising i's own signal.
                            if t > s[i] && here && !approx_le(vj, alpha * vi) {
                                contapx += 1;
                            }
                            // Failure to approximate survives lowering it.
                            if t < s[i] && !here && vj * (1.0 + 1e-9) < alpha * vi {
                                corollary += 1;
                            }
                        }
                        if v.value(i, &s) < v.value(j, &s) / alpha {
                            continue;
                        }
                        for l in (0..n).filter(|&l| l != j) {
                            for t in s[l]..=space.max_signal(l) {
                                let p = with_signal(&s, l, t);
                                let best = v.value(i, &p).max(v.value(l, &p));
                                if !approx_le(v.value(j, &p) / (alpha + c), best) {
                                    key += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        let orders = if n <= 4 { Permutation::all(n) } else { (0..6).map(|s| random_permutation(n, s)).collect() };
        for pi in orders {
            let rule = LazyHypergrid::new(v, pi, c).unwrap();
            for s in space.profiles() {
                lemma += rule.trace(&s).lemma_violations(c).len();
            }
        }
    }
    let ok = contapx + corollary + key + lemma == 0;
    verdict(
        ok,
        format!(
            "{checks} own-signal checks; lemma {contapx}, corollary {corollary}, key lemma {key}, tentative-winner/bounded-change {lemma} violations"
        ),
    )
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Verdict);
    let criteria: Vec<Criterion> = vec![
        ("truthfulness sweep", Duration::from_secs(60), c1_truthfulness),
        ("approximation bounds", Duration::from_secs(120), c2_approximation),
        ("hypergrid tightness", Duration::from_secs(60), c3_tightness),
        ("impossibility certificates", Duration::from_secs(300), c4_impossibility),
        ("lazy/table equivalence", Duration::from_secs(300), c5_lazy_equivalence),
        ("randomized concave bound", Duration::from_secs(300), c6_concave_random),
        ("randomized general bound", Duration::from_secs(300), c7_general_random),
        ("random-order lower bound", Duration::from_secs(300), c8_mech_lb),
        ("closed-form impossibility", Duration::from_secs(60), c9_closed_forms),
        ("revenue bound", Duration::from_secs(300), c10_revenue),
        ("lemma suites", Duration::from_secs(300), c11_lemmas),
    ];
    let mut failed = 0;
    for (i, (title, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(v) => (v.ok && elapsed <= budget, v.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} ({title}): {detail} [{:.1}s of {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
