//! Allocation rules, critical-signal payments and the checks that certify them.
//!
//! Bidder indices are 0-based in the API. The JSON forms of tables, outcomes
//! and permutations use 1-based indices, matching how bidders are numbered in
//! reports and on the command line.

mod high_if_possible;
mod hypergrid;
mod payment;
mod random;
mod two_bidder;
mod vcg;
mod verify;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::space::SignalSpace;

pub use high_if_possible::{high_if_possible, high_if_possible_with_order, HipOrder};
pub use hypergrid::{
    hypergrid_coloring, hypergrid_coloring_with_c, lazy_winner, HypergridTrace, LazyHypergrid, LemmaViolation,
};
pub use payment::{critical_signal, critical_signal_linear, outcome, payment_linear};
pub use random::{random_hypergrid_outcome, random_permutation};
pub use two_bidder::two_bidder_coloring;
pub use vcg::generalized_vcg;
pub use verify::{
    check_allocation_monotone, check_expost_truthful, profile_ratio, welfare_ratio, AllocationViolation, Deviation,
    DeviationKind, WelfareReport,
};

/// A deterministic allocation rule: maps each reported profile to a winner.
pub trait AllocationRule: Send + Sync {
    fn space(&self) -> &SignalSpace;

    /// Winner at `profile`, or `None` if the item stays unallocated.
    fn winner(&self, profile: &[usize]) -> Option<usize>;
}

impl<R: AllocationRule + ?Sized> AllocationRule for &R {
    fn space(&self) -> &SignalSpace {
        (**self).space()
    }

    fn winner(&self, profile: &[usize]) -> Option<usize> {
        (**self).winner(profile)
    }
}

impl<R: AllocationRule + ?Sized> AllocationRule for Box<R> {
    fn space(&self) -> &SignalSpace {
        (**self).space()
    }

    fn winner(&self, profile: &[usize]) -> Option<usize> {
        (**self).winner(profile)
    }
}

/// Lowest index attaining the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in values.iter().enumerate().skip(1) {
        if x > values[best] {
            best = i;
        }
    }
    best
}

/// A winner for every profile, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationTable {
    space: SignalSpace,
    winners: Vec<Option<usize>>,
}

impl AllocationTable {
    pub fn new(space: SignalSpace, winners: Vec<Option<usize>>) -> Result<Self> {
        let count = space.profile_count().ok_or(MechError::NotEnumerable)?;
        if winners.len() != count {
            return Err(MechError::InvalidParameter(format!(
                "table has {} entries, the space has {count} profiles",
                winners.len()
            )));
        }
        let n = space.n();
        if let Some(&bad) = winners.iter().flatten().find(|&&w| w >= n) {
            return Err(MechError::BidderOutOfRange { bidder: bad, n });
        }
        Ok(Self { space, winners })
    }

    /// Tabulates any rule over its (enumerable) space.
    pub fn from_rule<R: AllocationRule + ?Sized>(rule: &R, cap: u64) -> Result<Self> {
        let space = rule.space().clone();
        space.require_enumerable(cap)?;
        let winners = space.profiles().map(|s| rule.winner(&s)).collect();
        Self::new(space, winners)
    }

    pub fn constant(space: SignalSpace, winner: Option<usize>) -> Result<Self> {
        let count = space.profile_count().ok_or(MechError::NotEnumerable)?;
        Self::new(space, vec![winner; count])
    }

    pub fn winners(&self) -> &[Option<usize>] {
        &self.winners
    }

    pub fn winner_at(&self, index: usize) -> Option<usize> {
        self.winners[index]
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            sizes: Vec<usize>,
            winner: Vec<Option<usize>>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| MechError::Parse(e.to_string()))?;
        let winners = doc
            .winner
            .into_iter()
            .map(|w| match w {
                Some(0) => Err(MechError::Parse("winner indices are 1-based".into())),
                other => Ok(other.map(|x| x - 1)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(SignalSpace::new(doc.sizes)?, winners)
    }
}

impl AllocationRule for AllocationTable {
    fn space(&self) -> &SignalSpace {
        &self.space
    }

    fn winner(&self, profile: &[usize]) -> Option<usize> {
        self.winners[self.space.index(profile)]
    }
}

impl Serialize for AllocationTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("AllocationTable", 2)?;
        st.serialize_field("sizes", self.space.sizes())?;
        let one_based: Vec<Option<usize>> = self.winners.iter().map(|w| w.map(|x| x + 1)).collect();
        st.serialize_field("winner", &one_based)?;
        st.end()
    }
}

/// Realized result of one mechanism run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub winner: Option<usize>,
    pub payment: f64,
    /// The winner's critical signal `b*`.
    pub critical_signal: Option<usize>,
}

impl Outcome {
    pub const NO_SALE: Outcome = Outcome {
        winner: None,
        payment: 0.0,
        critical_signal: None,
    };

    /// Utility of `bidder` whose true value is `value`.
    pub fn utility(&self, bidder: usize, value: f64) -> f64 {
        if self.winner == Some(bidder) {
            value - self.payment
        } else {
            0.0
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Outcome", 3)?;
        st.serialize_field("winner", &self.winner.map(|w| w + 1))?;
        st.serialize_field("payment", &self.payment)?;
        st.serialize_field("critical_signal", &self.critical_signal)?;
        st.end()
    }
}

/// An ordering of the bidders (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &b in &order {
            if b >= n || std::mem::replace(&mut seen[b], true) {
                return Err(MechError::InvalidParameter(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    /// Parses 1-based bidder numbers.
    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        if order.contains(&0) {
            return Err(MechError::InvalidParameter("permutation entries are 1-based".into()));
        }
        Self::new(order.iter().map(|b| b - 1).collect())
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.order.iter().map(|b| b + 1).collect()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Every permutation of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        use itertools::Itertools;
        (0..n)
            .permutations(n)
            .map(|order| Permutation { order })
            .collect()
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

/// A rule over a subset `members` of the bidders, lifted to the full space.
///
/// `inner` runs on the sub-space of the members' signals; the other signals
/// are held at the values in `fixed`, and only members can win.
pub struct RestrictedRule<R> {
    space: SignalSpace,
    members: Vec<usize>,
    inner: R,
}

impl<R: AllocationRule> RestrictedRule<R> {
    pub fn new(space: SignalSpace, members: Vec<usize>, inner: R) -> Result<Self> {
        if inner.space().n() != members.len() {
            return Err(MechError::InvalidParameter(
                "inner rule does not match the restriction set".into(),
            ));
        }
        Ok(Self { space, members, inner })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Winner when only members' signals may move from the embedded profile.
    pub fn winner_in(&self, profile: &[usize]) -> Option<usize> {
        let sub: Vec<usize> = self.members.iter().map(|&m| profile[m]).collect();
        self.inner.winner(&sub).map(|w| self.members[w])
    }
}

impl<R: AllocationRule> AllocationRule for RestrictedRule<R> {
    fn space(&self) -> &SignalSpace {
        &self.space
    }

    fn winner(&self, profile: &[usize]) -> Option<usize> {
        self.winner_in(profile)
    }
}
