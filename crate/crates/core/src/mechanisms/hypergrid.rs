use serde::Serialize;

use super::{AllocationRule, AllocationTable, Permutation};
use crate::error::{MechError, Result};
use crate::space::SignalSpace;
use crate::valuation::{compute_c, intermediate_profile, ValuationInstance};
use crate::approx_le;

/// Whether the tentative winner `w` must give way to the newcomer `b` in
/// iteration `j` (0-based), given all values at the current profile.
#[inline]
fn triggers(vals: &[f64], prefix: &[usize], w: usize, b: usize, c: f64, j: usize) -> bool {
    let top = prefix.iter().map(|&i| vals[i]).fold(f64::NEG_INFINITY, f64::max);
    top > j as f64 * c * vals[w] || vals[b] > c * vals[w]
}

fn check_order(v: &ValuationInstance, pi: &Permutation) -> Result<()> {
    if pi.len() != v.n() {
        return Err(MechError::InvalidParameter(format!(
            "permutation has {} entries for {} bidders",
            pi.len(),
            v.n()
        )));
    }
    Ok(())
}

/// Hypergrid coloring over the full table, with `c` measured from `v`.
pub fn hypergrid_coloring(v: &ValuationInstance, pi: &Permutation) -> Result<AllocationTable> {
    let c = compute_c(v)?.require_finite("c")?;
    hypergrid_coloring_with_c(v, pi, c)
}

/// Hypergrid coloring over the full table.
///
/// Bidders join in the order `pi`. The first one wins on its own axis. When
/// bidder `π_j` joins, its signal is swept upward: each layer copies the
/// layer below and hands the item to `π_j` wherever the current winner falls
/// short of `(j-1)c` times the top value among the first `j` bidders, or of
/// `c` times `π_j`'s value.
pub fn hypergrid_coloring_with_c(v: &ValuationInstance, pi: &Permutation, c: f64) -> Result<AllocationTable> {
    check_order(v, pi)?;
    let space = v.space();
    let count = space.profile_count().ok_or(MechError::NotEnumerable)?;
    let strides = space.strides()?.to_vec();
    let order = pi.order();
    let n = v.n();
    let mut winners: Vec<Option<usize>> = vec![None; count];
    let mut vals = vec![0.0; n];
    for (idx, s) in space.profiles().enumerate() {
        if order[1..].iter().all(|&b| s[b] == 0) {
            winners[idx] = Some(order[0]);
        }
    }
    for j in 1..n {
        let b = order[j];
        let prefix = &order[..=j];
        let later = &order[j + 1..];
        for (idx, s) in space.profiles().enumerate() {
            if later.iter().any(|&l| s[l] != 0) {
                continue;
            }
            let src = if s[b] > 0 { idx - strides[b] } else { idx };
            let mut w = winners[src].expect("layer below is assigned");
            if w != b {
                v.values_into(&s, &mut vals);
                if triggers(&vals, prefix, w, b, c, j) {
                    w = b;
                }
            }
            winners[idx] = Some(w);
        }
    }
    AllocationTable::new(space.clone(), winners)
}

/// Per-profile evaluator for hypergrid coloring, `O(n^2 k)` value lookups.
#[derive(Clone)]
pub struct LazyHypergrid {
    v: ValuationInstance,
    pi: Permutation,
    c: f64,
    check_lemmas: bool,
}

/// Tentative winners at each intermediate profile.
#[derive(Debug, Clone, Serialize)]
pub struct HypergridTrace {
    /// `winners[t]` is the tentative winner at the intermediate profile with
    /// the first `t + 1` bidders of the order switched on.
    pub winners: Vec<usize>,
    /// `values[t]` holds every bidder's value at the intermediate profile
    /// with `t` bidders switched on (`values[0]` is the origin).
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LemmaViolation {
    /// The tentative winner's value dropped between iterations `t` and `t + 1`.
    TentativeValueDropped { t: usize, before: f64, after: f64 },
    /// The top bidder's value grew by more than `c²` times the final winner's value.
    ChangeTooLarge { t: usize, increase: f64, bound: f64 },
}

impl HypergridTrace {
    pub fn final_winner(&self) -> usize {
        *self.winners.last().expect("at least one bidder")
    }

    /// Checks the tentative-winner chain and bounded-change properties.
    pub fn lemma_violations(&self, c: f64) -> Vec<LemmaViolation> {
        let n = self.winners.len();
        let mut out = Vec::new();
        let tentative: Vec<f64> = (0..n).map(|t| self.values[t + 1][self.winners[t]]).collect();
        for t in 1..n {
            if !approx_le(tentative[t - 1], tentative[t]) {
                out.push(LemmaViolation::TentativeValueDropped {
                    t,
                    before: tentative[t - 1],
                    after: tentative[t],
                });
            }
        }
        let full = &self.values[n];
        let top = super::argmax(full);
        let bound = c * c * full[self.final_winner()];
        for t in 1..=n {
            let increase = self.values[t][top] - self.values[t - 1][top];
            if !approx_le(increase, bound) {
                out.push(LemmaViolation::ChangeTooLarge { t, increase, bound });
            }
        }
        out
    }
}

impl LazyHypergrid {
    pub fn new(v: &ValuationInstance, pi: Permutation, c: f64) -> Result<Self> {
        check_order(v, &pi)?;
        if !(c >= 1.0 && c.is_finite()) {
            return Err(MechError::Precondition(format!("c must be a finite number ≥ 1, got {c}")));
        }
        Ok(Self {
            v: v.clone(),
            pi,
            c,
            check_lemmas: false,
        })
    }

    /// With checks on, debug builds assert the tentative-winner lemmas at
    /// every evaluated profile. Only meaningful when `c` bounds the true
    /// single-crossing constant.
    pub fn with_lemma_checks(mut self, on: bool) -> Self {
        self.check_lemmas = on;
        self
    }

    pub fn permutation(&self) -> &Permutation {
        &self.pi
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn valuation(&self) -> &ValuationInstance {
        &self.v
    }

    /// Final winner at `s`.
    pub fn winner_at(&self, s: &[usize]) -> usize {
        let order = self.pi.order();
        let n = order.len();
        let mut vals = vec![0.0; n];
        let mut w = order[0];
        let mut p = intermediate_profile(s, order, 1);
        for j in 1..n {
            let b = order[j];
            for sb in 0..=s[b] {
                p[b] = sb;
                self.v.values_into(&p, &mut vals);
                if triggers(&vals, &order[..=j], w, b, self.c, j) {
                    w = b;
                    break;
                }
            }
            p[b] = s[b];
        }
        w
    }

    /// Winner at `s` together with every tentative winner along the way.
    pub fn trace(&self, s: &[usize]) -> HypergridTrace {
        let order = self.pi.order();
        let n = order.len();
        let mut vals = vec![0.0; n];
        let mut values = vec![self.v.values(&vec![0; n])];
        let mut p = intermediate_profile(s, order, 1);
        values.push(self.v.values(&p));
        let mut winners = vec![order[0]];
        let mut w = order[0];
        for j in 1..n {
            let b = order[j];
            for sb in 0..=s[b] {
                p[b] = sb;
                self.v.values_into(&p, &mut vals);
                if triggers(&vals, &order[..=j], w, b, self.c, j) {
                    w = b;
                    break;
                }
            }
            p[b] = s[b];
            winners.push(w);
            values.push(self.v.values(&p));
        }
        HypergridTrace { winners, values }
    }
}

impl AllocationRule for LazyHypergrid {
    fn space(&self) -> &SignalSpace {
        self.v.space()
    }

    fn winner(&self, profile: &[usize]) -> Option<usize> {
        if cfg!(debug_assertions) && self.check_lemmas {
            let trace = self.trace(profile);
            let violations = trace.lemma_violations(self.c);
            debug_assert!(
                violations.is_empty(),
                "tentative-winner lemmas fail at {profile:?}: {violations:?}"
            );
            return Some(trace.final_winner());
        }
        Some(self.winner_at(profile))
    }
}

/// Hypergrid-coloring winner at one profile, without building the table.
pub fn lazy_winner(v: &ValuationInstance, pi: &Permutation, s: &[usize], c: f64) -> Result<usize> {
    v.space().check(s)?;
    Ok(LazyHypergrid::new(v, pi.clone(), c)?.winner_at(s))
}
