use serde::Serialize;

use super::{AllocationRule, Outcome};
use crate::error::Result;
use crate::par::{map_range, Execution};
use crate::space::DEFAULT_PROFILE_CAP;
use crate::valuation::ValuationInstance;

/// A bidder who wins at `profile` but loses one step up its own signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AllocationViolation {
    pub bidder: usize,
    pub profile: Vec<usize>,
    pub higher: Vec<usize>,
    pub winner_at_higher: Option<usize>,
}

/// Checks that winning is preserved as the winner's own signal rises.
/// Adjacent steps suffice since longer steps chain through them.
pub fn check_allocation_monotone<R: AllocationRule + ?Sized>(rule: &R) -> Result<Vec<AllocationViolation>> {
    let space = rule.space();
    let count = space.require_enumerable(DEFAULT_PROFILE_CAP)?;
    let winners = map_range(Execution::default(), count, |idx| rule.winner(&space.profile_at(idx)));
    let strides = space.strides()?;
    let mut out = Vec::new();
    for (idx, s) in space.profiles().enumerate() {
        let Some(i) = winners[idx] else { continue };
        if s[i] < space.max_signal(i) {
            let up = winners[idx + strides[i]];
            if up != Some(i) {
                let mut higher = s.clone();
                higher[i] += 1;
                out.push(AllocationViolation {
                    bidder: i,
                    profile: s,
                    higher,
                    winner_at_higher: up,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeviationKind {
    /// Misreporting raises the bidder's utility.
    Incentive,
    /// Truthful utility is negative.
    Participation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub kind: DeviationKind,
    pub bidder: usize,
    pub profile: Vec<usize>,
    /// The profitable report (equal to the true signal for participation failures).
    pub report: usize,
    pub truthful_utility: f64,
    pub deviation_utility: f64,
}

/// Sweeps every profile, bidder and misreport, comparing utilities at true
/// values. Tolerance is `1e-9` times the largest value in the instance.
pub fn check_expost_truthful<F>(v: &ValuationInstance, outcome_of: F) -> Result<Vec<Deviation>>
where
    F: Fn(&[usize]) -> Outcome + Send + Sync,
{
    let space = v.space();
    let count = space.require_enumerable(DEFAULT_PROFILE_CAP)?;
    let table = v.tabulate(DEFAULT_PROFILE_CAP)?;
    let t = table.table().expect("tabulated");
    let outcomes = map_range(Execution::default(), count, |idx| outcome_of(&space.profile_at(idx)));
    let scale = t.iter().flatten().fold(0.0f64, |m, &x| m.max(x));
    let tol = crate::REL_TOL * if scale > 0.0 { scale } else { 1.0 };
    let strides = space.strides()?;
    let mut out = Vec::new();
    for (idx, s) in space.profiles().enumerate() {
        for (i, row) in t.iter().enumerate() {
            let value = row[idx];
            let truthful = outcomes[idx].utility(i, value);
            if truthful < -tol {
                out.push(Deviation {
                    kind: DeviationKind::Participation,
                    bidder: i,
                    profile: s.clone(),
                    report: s[i],
                    truthful_utility: truthful,
                    deviation_utility: truthful,
                });
            }
            let base = idx - s[i] * strides[i];
            for b in (0..=space.max_signal(i)).filter(|&b| b != s[i]) {
                let dev = outcomes[base + b * strides[i]].utility(i, value);
                if dev > truthful + tol {
                    out.push(Deviation {
                        kind: DeviationKind::Incentive,
                        bidder: i,
                        profile: s.clone(),
                        report: b,
                        truthful_utility: truthful,
                        deviation_utility: dev,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareReport {
    /// Largest per-profile ratio (`inf` if some profile is unbounded).
    #[serde(serialize_with = "crate::serialize_ratio")]
    pub worst: f64,
    /// Profile attaining `worst` (the first in row-major order).
    pub worst_profile: Vec<usize>,
    #[serde(serialize_with = "crate::serialize_ratios")]
    pub per_profile: Vec<f64>,
}

/// `max_j v_j(s) / v_winner(s)`, with `0/0 = 1` and an unallocated item or a
/// zero-valued winner facing a positive maximum counted as unbounded.
pub fn profile_ratio(values: &[f64], winner: Option<usize>) -> f64 {
    let top = values.iter().fold(0.0f64, |m, &x| m.max(x));
    match winner {
        _ if top == 0.0 => 1.0,
        None => f64::INFINITY,
        Some(w) if values[w] == 0.0 => f64::INFINITY,
        Some(w) => top / values[w],
    }
}

/// Per-profile and worst-case welfare ratios of a rule.
pub fn welfare_ratio<R: AllocationRule + ?Sized>(rule: &R, v: &ValuationInstance) -> Result<WelfareReport> {
    let space = v.space();
    let count = space.require_enumerable(DEFAULT_PROFILE_CAP)?;
    let per_profile = map_range(Execution::default(), count, |idx| {
        let s = space.profile_at(idx);
        profile_ratio(&v.values(&s), rule.winner(&s))
    });
    let mut worst_idx = 0;
    for (idx, &r) in per_profile.iter().enumerate() {
        if r > per_profile[worst_idx] {
            worst_idx = idx;
        }
    }
    Ok(WelfareReport {
        worst: per_profile[worst_idx],
        worst_profile: space.profile_at(worst_idx),
        per_profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{outcome, AllocationTable};
    use crate::space::SignalSpace;

    #[test]
    fn crossed_table_has_one_violation() {
        // (0,0) unassigned, 1 wins (0,1) and (1,1), 2 wins (1,0).
        let space = SignalSpace::new(vec![1, 1]).unwrap();
        let t = AllocationTable::new(space, vec![None, Some(0), Some(1), Some(0)]).unwrap();
        let viol = check_allocation_monotone(&t).unwrap();
        assert_eq!(viol.len(), 1);
        assert_eq!(viol[0].bidder, 1);
        assert_eq!(viol[0].profile, vec![1, 0]);
    }

    #[test]
    fn constant_table_is_monotone() {
        let space = SignalSpace::new(vec![2, 3]).unwrap();
        let t = AllocationTable::constant(space, Some(1)).unwrap();
        assert!(check_allocation_monotone(&t).unwrap().is_empty());
    }

    #[test]
    fn free_allocation_invites_misreports() {
        // Bidder 1 wins only at high signal and pays nothing: bidder 1 with a
        // low signal gains by overbidding.
        let space = SignalSpace::new(vec![1, 0]).unwrap();
        let v = ValuationInstance::tabulated(space.clone(), vec![vec![1.0, 2.0], vec![0.5, 0.5]]).unwrap();
        let t = AllocationTable::new(space, vec![Some(1), Some(0)]).unwrap();
        let zero_pay = |s: &[usize]| {
            let mut o = outcome(&t, &v, s);
            o.payment = 0.0;
            o
        };
        assert!(!check_expost_truthful(&v, zero_pay).unwrap().is_empty());
        assert!(check_expost_truthful(&v, |s: &[usize]| outcome(&t, &v, s)).unwrap().is_empty());
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(profile_ratio(&[0.0, 0.0], Some(0)), 1.0);
        assert_eq!(profile_ratio(&[0.0, 0.0], None), 1.0);
        assert_eq!(profile_ratio(&[0.0, 1.0], Some(0)), f64::INFINITY);
        assert_eq!(profile_ratio(&[2.0, 1.0], None), f64::INFINITY);
        assert_eq!(profile_ratio(&[2.0, 6.0], Some(0)), 3.0);
    }
}
