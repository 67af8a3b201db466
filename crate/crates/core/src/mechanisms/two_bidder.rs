use super::{argmax, AllocationTable};
use crate::error::{MechError, Result};
use crate::valuation::ValuationInstance;

/// Two-bidder coloring: a staircase walk from the origin.
///
/// At the current cell the higher-valued bidder wins (ties to bidder 0), the
/// win is propagated along the winner's own axis, and the walk steps up the
/// loser's signal. It stops once the loser's signal would leave the grid; by
/// then every cell is colored.
pub fn two_bidder_coloring(v: &ValuationInstance) -> Result<AllocationTable> {
    if v.n() != 2 {
        return Err(MechError::NotApplicable(format!(
            "two-bidder coloring needs exactly 2 bidders, got {}",
            v.n()
        )));
    }
    let space = v.space().clone();
    let count = space.profile_count().ok_or(MechError::NotEnumerable)?;
    let k = [space.max_signal(0), space.max_signal(1)];
    let mut winners: Vec<Option<usize>> = vec![None; count];
    let mut pos = [0usize, 0usize];
    loop {
        let w = argmax(&v.values(&pos));
        let l = 1 - w;
        let mut cell = pos;
        for t in pos[w]..=k[w] {
            cell[w] = t;
            let idx = space.index(&cell);
            match winners[idx] {
                Some(prev) if prev != w => {
                    return Err(MechError::PropagationConflict {
                        profile: cell.to_vec(),
                        first: prev,
                        second: w,
                    })
                }
                _ => winners[idx] = Some(w),
            }
        }
        if pos[l] == k[l] {
            break;
        }
        pos[l] += 1;
    }
    if let Some(idx) = winners.iter().position(Option::is_none) {
        return Err(MechError::Precondition(format!(
            "walk left profile {:?} uncolored",
            space.profile_at(idx)
        )));
    }
    AllocationTable::new(space, winners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{check_allocation_monotone, welfare_ratio, AllocationRule};
    use crate::space::SignalSpace;

    #[test]
    fn tight_square_goes_to_bidder_one() {
        let c = 2.0;
        // (0,0) (0,1) (1,0) (1,1)
        let space = SignalSpace::new(vec![1, 1]).unwrap();
        let v = ValuationInstance::tabulated(space, vec![vec![0.0, c, 1.0, c + 1.0], vec![0.0, 1.0, c, c + 1.0]]).unwrap();
        let t = two_bidder_coloring(&v).unwrap();
        assert!(t.winners().iter().all(|&w| w == Some(0)));
        let report = welfare_ratio(&t, &v).unwrap();
        assert_eq!(report.worst, c);
        assert_eq!(report.per_profile[v.space().index(&[1, 0])], c);
    }

    #[test]
    fn dominated_second_bidder_never_wins() {
        let v = ValuationInstance::from_fn(SignalSpace::new(vec![3, 2]).unwrap(), |i, _| if i == 0 { 1.0 } else { 0.0 }).unwrap();
        let t = two_bidder_coloring(&v).unwrap();
        assert!(v.space().profiles().all(|s| t.winner(&s) == Some(0)));
    }

    #[test]
    fn staircase_is_monotone() {
        let v = ValuationInstance::from_fn(SignalSpace::new(vec![4, 4]).unwrap(), |i, s| {
            let (a, b) = (s[0] as f64, s[1] as f64);
            if i == 0 { 1.0 + 2.0 * a + b } else { 0.5 + a + 2.5 * b }
        })
        .unwrap();
        let t = two_bidder_coloring(&v).unwrap();
        assert!(check_allocation_monotone(&t).unwrap().is_empty());
        assert!(t.winners().contains(&Some(1)));
    }

    #[test]
    fn rejects_other_bidder_counts() {
        let v = ValuationInstance::from_fn(SignalSpace::new(vec![1, 1, 1]).unwrap(), |_, _| 1.0).unwrap();
        assert!(matches!(two_bidder_coloring(&v), Err(MechError::NotApplicable(_))));
    }
}
