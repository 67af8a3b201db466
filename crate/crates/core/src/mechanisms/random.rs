use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{outcome, LazyHypergrid, Outcome, Permutation};
use crate::error::Result;
use crate::valuation::ValuationInstance;

/// Uniform permutation of `0..n` from a Fisher-Yates shuffle seeded by `seed`.
pub fn random_permutation(n: usize, seed: u64) -> Permutation {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Permutation::new(order).expect("shuffle of 0..n")
}

/// Draws the bidder order uniformly, then runs hypergrid coloring for that
/// order at `s` with critical-signal payments. Returns the realized order too.
pub fn random_hypergrid_outcome(v: &ValuationInstance, s: &[usize], seed: u64, c: f64) -> Result<(Outcome, Permutation)> {
    v.space().check(s)?;
    let pi = random_permutation(v.n(), seed);
    let rule = LazyHypergrid::new(v, pi.clone(), c)?;
    Ok((outcome(&rule, v, s), pi))
}
