use super::{argmax, AllocationTable};
use crate::error::{MechError, Result};
use crate::valuation::{compute_c, ValuationInstance};

/// Order in which profiles of equal Hamming weight are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HipOrder {
    #[default]
    Lexicographic,
    ReverseLexicographic,
}

/// High-if-possible for two-signal spaces, using the measured `c`.
pub fn high_if_possible(v: &ValuationInstance) -> Result<AllocationTable> {
    let c = compute_c(v)?.require_finite("c")?;
    high_if_possible_with_order(v, c, HipOrder::Lexicographic)
}

/// High-if-possible with an explicit `c` and visiting order.
///
/// Profiles are visited by increasing number of high signals. An unassigned
/// profile goes to the best high-signal bidder when that bidder's value is
/// within a factor `c` of the top value; otherwise it goes to the top bidder,
/// and if that bidder's signal is low the win is propagated to the profile
/// where it is high.
pub fn high_if_possible_with_order(v: &ValuationInstance, c: f64, order: HipOrder) -> Result<AllocationTable> {
    let space = v.space().clone();
    if let Some(i) = space.sizes().iter().position(|&k| k != 1) {
        return Err(MechError::NotApplicable(format!(
            "high-if-possible needs two signals per bidder; bidder {} has {}",
            i + 1,
            space.max_signal(i) + 1
        )));
    }
    let count = space.profile_count().ok_or(MechError::NotEnumerable)?;
    let n = space.n();
    let mut profiles: Vec<Vec<usize>> = space.profiles().collect();
    if order == HipOrder::ReverseLexicographic {
        profiles.reverse();
    }
    // Stable sort keeps the (reverse) lexicographic order within each weight.
    profiles.sort_by_key(|s| s.iter().sum::<usize>());

    let mut winners: Vec<Option<usize>> = vec![None; count];
    let mut buf = vec![0.0; n];
    for s in &profiles {
        let idx = space.index(s);
        if winners[idx].is_some() {
            continue;
        }
        v.values_into(s, &mut buf);
        let top = argmax(&buf);
        let high = (0..n)
            .filter(|&i| s[i] == 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if buf[b] >= buf[i] => Some(b),
                _ => Some(i),
            });
        match high {
            Some(h) if buf[top] <= c * buf[h] => winners[idx] = Some(h),
            _ => {
                winners[idx] = Some(top);
                if s[top] == 0 {
                    let mut up = s.clone();
                    up[top] = 1;
                    let uidx = space.index(&up);
                    match winners[uidx] {
                        Some(prev) if prev != top => {
                            return Err(MechError::PropagationConflict {
                                profile: up,
                                first: prev,
                                second: top,
                            })
                        }
                        _ => winners[uidx] = Some(top),
                    }
                }
            }
        }
    }
    AllocationTable::new(space, winners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{check_allocation_monotone, welfare_ratio, AllocationRule};
    use crate::space::SignalSpace;

    fn c_lb(n: usize, c: f64) -> ValuationInstance {
        ValuationInstance::from_fn(SignalSpace::new(vec![1; n]).unwrap(), move |i, s| {
            let others_high = s.iter().enumerate().all(|(j, &x)| j == i || x == 1);
            match (s[i], others_high) {
                (0, false) => 0.0,
                (1, false) => 1.0 / c,
                (0, true) => 1.0,
                _ => 1.0 + 1.0 / c,
            }
        })
        .unwrap()
    }

    #[test]
    fn lower_bound_instance_hits_ratio_c() {
        let v = c_lb(3, 2.0);
        let t = high_if_possible(&v).unwrap();
        let w = t.winner(&[0, 1, 1]).unwrap();
        assert!(w == 1 || w == 2);
        assert!(check_allocation_monotone(&t).unwrap().is_empty());
        assert_eq!(welfare_ratio(&t, &v).unwrap().worst, 2.0);
    }

    #[test]
    fn order_within_weight_does_not_matter() {
        let v = c_lb(4, 3.0);
        let a = high_if_possible_with_order(&v, 3.0, HipOrder::Lexicographic).unwrap();
        let b = high_if_possible_with_order(&v, 3.0, HipOrder::ReverseLexicographic).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_three_signal_bidders() {
        let v = ValuationInstance::from_fn(SignalSpace::new(vec![2, 1]).unwrap(), |_, _| 0.0).unwrap();
        assert!(matches!(high_if_possible(&v), Err(MechError::NotApplicable(_))));
    }

    #[test]
    fn all_zero_values_have_ratio_one() {
        let v = ValuationInstance::from_fn(SignalSpace::new(vec![1, 1, 1]).unwrap(), |_, _| 0.0).unwrap();
        let t = high_if_possible(&v).unwrap();
        assert_eq!(welfare_ratio(&t, &v).unwrap().worst, 1.0);
        assert!(check_allocation_monotone(&t).unwrap().is_empty());
    }
}
