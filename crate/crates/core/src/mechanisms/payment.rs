use super::{AllocationRule, Outcome};
use crate::space::with_signal;
use crate::valuation::ValuationInstance;

/// Smallest signal at which `bidder` wins with the others fixed at `s`, found
/// by binary search (valid because the rule is monotone). `None` when the
/// bidder loses even at its top signal.
pub fn critical_signal<R: AllocationRule + ?Sized>(rule: &R, bidder: usize, s: &[usize]) -> Option<usize> {
    let mut p = s.to_vec();
    let top = rule.space().max_signal(bidder);
    p[bidder] = top;
    if rule.winner(&p) != Some(bidder) {
        return None;
    }
    let (mut lo, mut hi) = (0, top);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        p[bidder] = mid;
        if rule.winner(&p) == Some(bidder) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// Linear-scan counterpart of [`critical_signal`]; needs no monotonicity.
pub fn critical_signal_linear<R: AllocationRule + ?Sized>(rule: &R, bidder: usize, s: &[usize]) -> Option<usize> {
    (0..=rule.space().max_signal(bidder)).find(|&b| rule.winner(&with_signal(s, bidder, b)) == Some(bidder))
}

/// Winner at `s`, who pays their value at their critical signal.
pub fn outcome<R: AllocationRule + ?Sized>(rule: &R, v: &ValuationInstance, s: &[usize]) -> Outcome {
    match rule.winner(s) {
        None => Outcome::NO_SALE,
        Some(w) => {
            let b = critical_signal(rule, w, s).unwrap_or(s[w]);
            Outcome {
                winner: Some(w),
                payment: v.value(w, &with_signal(s, w, b)),
                critical_signal: Some(b),
            }
        }
    }
}

/// Payment computed with the linear scan, for cross-checking [`outcome`].
pub fn payment_linear<R: AllocationRule + ?Sized>(rule: &R, v: &ValuationInstance, s: &[usize]) -> f64 {
    match rule.winner(s) {
        None => 0.0,
        Some(w) => {
            let b = critical_signal_linear(rule, w, s).expect("the winner wins at its own report");
            v.value(w, &with_signal(s, w, b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::AllocationTable;
    use crate::space::SignalSpace;

    #[test]
    fn binary_search_finds_threshold() {
        let space = SignalSpace::new(vec![5, 0]).unwrap();
        let winners = (0..6).map(|s| Some(if s >= 3 { 0 } else { 1 })).collect();
        let t = AllocationTable::new(space, winners).unwrap();
        assert_eq!(critical_signal(&t, 0, &[5, 0]), Some(3));
        assert_eq!(critical_signal_linear(&t, 0, &[0, 0]), Some(3));
        assert_eq!(critical_signal(&t, 1, &[0, 0]), Some(0));
    }

    #[test]
    fn tight_square_payment() {
        let c = 2.0;
        let space = SignalSpace::new(vec![1, 1]).unwrap();
        let v = ValuationInstance::tabulated(space.clone(), vec![vec![0.0, c, 1.0, c + 1.0], vec![0.0, 1.0, c, c + 1.0]]).unwrap();
        let t = AllocationTable::constant(space, Some(0)).unwrap();
        let o = outcome(&t, &v, &[1, 1]);
        assert_eq!(o.winner, Some(0));
        assert_eq!(o.critical_signal, Some(0));
        assert_eq!(o.payment, c);
        assert_eq!(payment_linear(&t, &v, &[1, 1]), c);
    }

    #[test]
    fn no_winner_pays_nothing() {
        let space = SignalSpace::new(vec![1]).unwrap();
        let v = ValuationInstance::tabulated(space.clone(), vec![vec![1.0, 2.0]]).unwrap();
        let t = AllocationTable::constant(space, None).unwrap();
        assert_eq!(outcome(&t, &v, &[1]), Outcome::NO_SALE);
    }
}
