//! Brute-force ground truth: exhaustive search over monotone tables, exact
//! averages over bidder orders, and closed forms for the randomized
//! impossibility instance.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{MechError, Result};
use crate::instances::gen_rand_impossibility;
use crate::mechanisms::{
    check_allocation_monotone, profile_ratio, random_permutation, welfare_ratio, AllocationTable, LazyHypergrid,
    Permutation,
};
use crate::par::{derive_seed, map_range, map_slice, mean_and_se, Execution};
use crate::valuation::ValuationInstance;

/// Default cap on complete monotone tables visited by [`best_monotone_ratio`].
pub const DEFAULT_TABLE_CAP: u64 = 10_000_000;

/// Largest bidder count for which [`exact_random_hypergrid_stats`] enumerates all orders.
pub const MAX_EXACT_BIDDERS: usize = 8;

/// Largest profile count for which [`best_monotone_ratio_unpruned`] is allowed.
pub const MAX_UNPRUNED_PROFILES: usize = 6;

pub fn optimal_welfare(v: &ValuationInstance, s: &[usize]) -> f64 {
    v.values(s).into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    #[serde(serialize_with = "crate::serialize_ratio")]
    pub best_ratio: f64,
    pub witness_table: Option<AllocationTable>,
    /// Partial tables extended during the search.
    pub tables_scanned: u64,
    /// Complete monotone tables reached.
    pub monotone_count: u64,
}

struct Search<'a> {
    n: usize,
    /// `ratio[idx * n + w]`: welfare ratio at profile `idx` if `w` wins.
    ratio: Vec<f64>,
    /// `(bidder, index of the profile one step down that bidder's axis)`.
    below: Vec<Vec<(usize, usize)>>,
    cap: u64,
    leaves: &'a AtomicU64,
}

struct Subtree {
    best: f64,
    witness: Option<Vec<usize>>,
    scanned: u64,
    monotone: u64,
}

impl Search<'_> {
    /// The only winner monotonicity allows at `idx`, `Some(None)` if any
    /// winner is allowed, or `None` if two lower neighbours force different
    /// winners.
    fn forced(&self, table: &[usize], idx: usize) -> Option<Option<usize>> {
        let mut forced = None;
        for &(i, lower) in &self.below[idx] {
            if table[lower] == i {
                match forced {
                    Some(f) if f != i => return None,
                    _ => forced = Some(i),
                }
            }
        }
        Some(forced)
    }

    fn dfs(&self, table: &mut Vec<usize>, worst: f64, out: &mut Subtree) -> Result<()> {
        out.scanned += 1;
        let idx = table.len();
        if idx == self.below.len() {
            out.monotone += 1;
            if self.leaves.fetch_add(1, Ordering::Relaxed) + 1 > self.cap {
                return Err(MechError::EnumerationCap(format!(
                    "more than {} monotone tables; try a smaller instance or raise the cap",
                    self.cap
                )));
            }
            if worst < out.best || out.witness.is_none() {
                out.best = worst;
                out.witness = Some(table.clone());
            }
            return Ok(());
        }
        let Some(forced) = self.forced(table, idx) else {
            return Ok(());
        };
        let choices = match forced {
            Some(w) => w..w + 1,
            None => 0..self.n,
        };
        for w in choices {
            table.push(w);
            let r = worst.max(self.ratio[idx * self.n + w]);
            let res = self.dfs(table, r, out);
            table.pop();
            res?;
        }
        Ok(())
    }
}

/// Best worst-case welfare ratio over every monotone table that always
/// allocates, by depth-first search that abandons a partial table as soon as
/// it breaks monotonicity.
pub fn best_monotone_ratio(v: &ValuationInstance, cap: u64) -> Result<SearchReport> {
    best_monotone_ratio_with(v, cap, Execution::default())
}

/// [`best_monotone_ratio`] with an explicit execution mode. The subtrees for
/// each winner at the all-zero profile are searched independently.
pub fn best_monotone_ratio_with(v: &ValuationInstance, cap: u64, exec: Execution) -> Result<SearchReport> {
    let space = v.space();
    let count = space.require_enumerable(crate::space::DEFAULT_PROFILE_CAP)?;
    let strides = space.strides()?;
    let n = v.n();
    let mut ratio = Vec::with_capacity(count * n);
    let mut below = Vec::with_capacity(count);
    for (idx, s) in space.profiles().enumerate() {
        let vals = v.values(&s);
        ratio.extend((0..n).map(|w| profile_ratio(&vals, Some(w))));
        below.push((0..n).filter(|&i| s[i] > 0).map(|i| (i, idx - strides[i])).collect());
    }
    let leaves = AtomicU64::new(0);
    let search = Search { n, ratio, below, cap, leaves: &leaves };
    let parts = map_range(exec, n, |w| {
        let mut out = Subtree { best: f64::INFINITY, witness: None, scanned: 0, monotone: 0 };
        let mut table = vec![w];
        search.dfs(&mut table, search.ratio[w], &mut out).map(|_| out)
    });
    let mut best = f64::INFINITY;
    let mut witness = None;
    let (mut scanned, mut monotone) = (1, 0);
    for part in parts {
        let part = part?;
        scanned += part.scanned;
        monotone += part.monotone;
        if part.witness.is_some() && (witness.is_none() || part.best < best) {
            best = part.best;
            witness = part.witness;
        }
    }
    let witness_table = witness
        .map(|w| AllocationTable::new(space.clone(), w.into_iter().map(Some).collect()))
        .transpose()?;
    Ok(SearchReport { best_ratio: best, witness_table, tables_scanned: scanned, monotone_count: monotone })
}

/// Plain enumeration of all `n^P` tables, filtered with
/// [`check_allocation_monotone`] and scored with [`welfare_ratio`]. Only for
/// cross-checking the pruned search on tiny grids.
pub fn best_monotone_ratio_unpruned(v: &ValuationInstance) -> Result<SearchReport> {
    let space = v.space();
    let count = space.require_enumerable(MAX_UNPRUNED_PROFILES as u64)?;
    let n = v.n();
    let total = (n as u64).pow(count as u32);
    let mut best = f64::INFINITY;
    let mut witness: Option<AllocationTable> = None;
    let mut monotone = 0;
    for code in 0..total {
        let mut rest = code;
        let mut winners = vec![None; count];
        for slot in winners.iter_mut().rev() {
            *slot = Some((rest % n as u64) as usize);
            rest /= n as u64;
        }
        let table = AllocationTable::new(space.clone(), winners)?;
        if !check_allocation_monotone(&table)?.is_empty() {
            continue;
        }
        monotone += 1;
        let worst = welfare_ratio(&table, v)?.worst;
        if witness.is_none() || worst < best {
            best = worst;
            witness = Some(table);
        }
    }
    Ok(SearchReport { best_ratio: best, witness_table: witness, tables_scanned: total, monotone_count: monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderValue {
    pub permutation: Permutation,
    /// 1-based in JSON, like every other bidder index.
    #[serde(serialize_with = "one_based")]
    pub winner: usize,
    pub value: f64,
}

fn one_based<S: serde::Serializer>(w: &usize, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    serializer.serialize_u64(*w as u64 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomOrderStats {
    /// Winner's value averaged over all orders with equal weight.
    pub expected_value: f64,
    pub per_order: Vec<OrderValue>,
    /// Tentative-winner lemma failures seen along the way.
    pub lemma_violations: usize,
}

/// Exact expectation of the winner's value at `s` when the bidder order of
/// hypergrid coloring is uniform, by enumerating all `n!` orders.
pub fn exact_random_hypergrid_stats(v: &ValuationInstance, s: &[usize], c: f64) -> Result<RandomOrderStats> {
    exact_random_hypergrid_stats_with(v, s, c, Execution::default())
}

pub fn exact_random_hypergrid_stats_with(
    v: &ValuationInstance,
    s: &[usize],
    c: f64,
    exec: Execution,
) -> Result<RandomOrderStats> {
    v.space().check(s)?;
    let n = v.n();
    if n > MAX_EXACT_BIDDERS {
        return Err(MechError::Precondition(format!(
            "{n} bidders is too many to enumerate every order; use the Monte Carlo estimator"
        )));
    }
    // Validates c once up front.
    LazyHypergrid::new(v, Permutation::identity(n), c)?;
    let results = map_slice(exec, &Permutation::all(n), |pi| {
        let trace = LazyHypergrid::new(v, pi.clone(), c).expect("validated").trace(s);
        let w = trace.final_winner();
        let entry = OrderValue { permutation: pi.clone(), winner: w, value: v.value(w, s) };
        (entry, trace.lemma_violations(c).len())
    });
    let lemma_violations = results.iter().map(|(_, k)| k).sum();
    let per_order: Vec<OrderValue> = results.into_iter().map(|(e, _)| e).collect();
    let expected_value = per_order.iter().map(|e| e.value).sum::<f64>() / per_order.len() as f64;
    Ok(RandomOrderStats { expected_value, per_order, lemma_violations })
}

/// Mean and standard error of the winner's value at `s` over `samples`
/// seeded uniform orders. Sample `t` uses the order drawn from
/// `derive_seed(seed, t)`, so the estimate does not depend on scheduling.
pub fn monte_carlo_random_hypergrid(
    v: &ValuationInstance,
    s: &[usize],
    samples: usize,
    seed: u64,
    c: f64,
) -> Result<(f64, f64)> {
    monte_carlo_random_hypergrid_with(v, s, samples, seed, c, Execution::default())
}

pub fn monte_carlo_random_hypergrid_with(
    v: &ValuationInstance,
    s: &[usize],
    samples: usize,
    seed: u64,
    c: f64,
    exec: Execution,
) -> Result<(f64, f64)> {
    v.space().check(s)?;
    let n = v.n();
    let base = LazyHypergrid::new(v, Permutation::identity(n), c)?;
    let values = map_range(exec, samples, |t| {
        let pi = random_permutation(n, derive_seed(seed, t as u64));
        let rule = LazyHypergrid::new(base.valuation(), pi, c).expect("validated");
        v.value(rule.winner_at(s), s)
    });
    Ok(mean_and_se(&values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandImpossibility {
    /// `ε^n + n ε^(n-1) (1-ε)`.
    pub opt: f64,
    /// `ε^(n-1)`, the most any monotone mechanism can earn.
    pub bound: f64,
    /// Expected welfare of allocating uniformly at random, by enumeration.
    pub uniform_welfare: f64,
    /// Expected optimal welfare, by enumeration.
    pub enumerated_opt: f64,
}

/// Closed forms for the product-of-others instance where every signal is
/// high independently with probability `ε`, checked against enumeration of
/// all `2^n` profiles.
pub fn closed_form_rand_impossibility(n: usize, epsilon: f64) -> Result<RandImpossibility> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(MechError::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let v = gen_rand_impossibility(n)?;
    let nf = n as f64;
    let opt = epsilon.powi(n as i32) + nf * epsilon.powi(n as i32 - 1) * (1.0 - epsilon);
    let bound = epsilon.powi(n as i32 - 1);
    let (mut uniform_welfare, mut enumerated_opt) = (0.0, 0.0);
    for s in v.space().profiles() {
        let high = s.iter().filter(|&&x| x == 1).count() as i32;
        let p = epsilon.powi(high) * (1.0 - epsilon).powi(n as i32 - high);
        let vals = v.values(&s);
        uniform_welfare += p * vals.iter().sum::<f64>() / nf;
        enumerated_opt += p * vals.iter().fold(0.0f64, |m, &x| m.max(x));
    }
    Ok(RandImpossibility { opt, bound, uniform_welfare, enumerated_opt })
}
