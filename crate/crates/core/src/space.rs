//! Signal spaces and profiles.
//!
//! Bidder `i` observes a signal in `{0, 1, …, k_i}`. Profiles are stored in
//! row-major order: the last bidder's signal varies fastest, so the index of
//! `s` is `Σ s_i · ∏_{j>i} (k_j + 1)`. That order is part of the JSON file
//! format.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};

/// Default cap on the number of profiles an enumerable space may hold.
pub const DEFAULT_PROFILE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalSpace {
    sizes: Vec<usize>,
    /// Row-major strides, present only when the space is enumerable.
    strides: Option<Vec<usize>>,
    count: Option<usize>,
}

impl SignalSpace {
    /// Builds an enumerable space, rejecting it when it holds more than
    /// [`DEFAULT_PROFILE_CAP`] profiles.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        Self::with_cap(sizes, DEFAULT_PROFILE_CAP)
    }

    pub fn with_cap(sizes: Vec<usize>, cap: u64) -> Result<Self> {
        let space = Self::unbounded(sizes)?;
        let count = space.exact_count();
        if count > cap as u128 {
            return Err(MechError::ProfileCapExceeded { count, cap });
        }
        Ok(space)
    }

    /// Builds a space that may be too large to enumerate. Such spaces can only
    /// be used with per-profile evaluators (oracle-backed valuations and the
    /// lazy hypergrid rule).
    pub fn unbounded(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(MechError::InvalidSpace("at least one bidder is required".into()));
        }
        let mut count: Option<usize> = Some(1);
        for &k in &sizes {
            count = count.and_then(|c| c.checked_mul(k.checked_add(1)?));
        }
        let strides = count.map(|_| {
            let mut strides = vec![1usize; sizes.len()];
            for i in (0..sizes.len().saturating_sub(1)).rev() {
                strides[i] = strides[i + 1] * (sizes[i + 1] + 1);
            }
            strides
        });
        Ok(Self {
            sizes,
            strides,
            count,
        })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    /// Largest signal of each bidder (`k_i`).
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn max_signal(&self, bidder: usize) -> usize {
        self.sizes[bidder]
    }

    /// Number of profiles, or `None` when it does not fit in a `usize`.
    pub fn profile_count(&self) -> Option<usize> {
        self.count
    }

    /// Exact number of profiles (saturating at `u128::MAX`).
    pub fn exact_count(&self) -> u128 {
        self.sizes
            .iter()
            .try_fold(1u128, |acc, &k| acc.checked_mul(k as u128 + 1))
            .unwrap_or(u128::MAX)
    }

    pub fn is_enumerable(&self) -> bool {
        self.count.is_some()
    }

    /// Checks that the space has at most `cap` profiles and returns the count.
    pub fn require_enumerable(&self, cap: u64) -> Result<usize> {
        let count = self.exact_count();
        if count > cap as u128 {
            return Err(MechError::ProfileCapExceeded { count, cap });
        }
        self.count.ok_or(MechError::NotEnumerable)
    }

    pub fn strides(&self) -> Result<&[usize]> {
        self.strides.as_deref().ok_or(MechError::NotEnumerable)
    }

    pub fn contains(&self, profile: &[usize]) -> bool {
        profile.len() == self.n() && profile.iter().zip(&self.sizes).all(|(s, k)| s <= k)
    }

    pub fn check(&self, profile: &[usize]) -> Result<()> {
        if profile.len() != self.n() {
            return Err(MechError::InvalidProfile(format!(
                "profile has {} signals, space has {} bidders",
                profile.len(),
                self.n()
            )));
        }
        for (i, (s, k)) in profile.iter().zip(&self.sizes).enumerate() {
            if s > k {
                return Err(MechError::InvalidProfile(format!(
                    "signal {s} of bidder {} exceeds its maximum {k}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Validates and wraps a profile.
    pub fn profile(&self, signals: Vec<usize>) -> Result<SignalProfile> {
        self.check(&signals)?;
        Ok(SignalProfile(signals))
    }

    /// Row-major index of an in-bounds profile.
    ///
    /// Panics if the space is not enumerable.
    pub fn index(&self, profile: &[usize]) -> usize {
        let strides = self.strides.as_ref().expect("space is not enumerable");
        profile.iter().zip(strides).map(|(s, st)| s * st).sum()
    }

    /// Profile at a row-major index.
    pub fn profile_at(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides.as_ref().expect("space is not enumerable");
        let mut out = vec![0; self.n()];
        for (o, st) in out.iter_mut().zip(strides) {
            *o = index / st;
            index %= st;
        }
        out
    }

    /// Iterates over all profiles in row-major order.
    pub fn profiles(&self) -> Profiles<'_> {
        Profiles {
            sizes: &self.sizes,
            next: Some(vec![0; self.n()]),
        }
    }

    pub fn zero(&self) -> Vec<usize> {
        vec![0; self.n()]
    }

    pub fn top(&self) -> Vec<usize> {
        self.sizes.clone()
    }
}

impl Serialize for SignalSpace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.sizes.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignalSpace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let sizes = Vec::<usize>::deserialize(deserializer)?;
        SignalSpace::new(sizes).map_err(serde::de::Error::custom)
    }
}

/// Row-major odometer over a signal space.
pub struct Profiles<'a> {
    sizes: &'a [usize],
    next: Option<Vec<usize>>,
}

impl Iterator for Profiles<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if succ[pos] < self.sizes[pos] {
                succ[pos] += 1;
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// A validated signal profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalProfile(Vec<usize>);

impl SignalProfile {
    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for SignalProfile {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Returns `s` with coordinate `bidder` replaced by `signal`.
pub fn with_signal(profile: &[usize], bidder: usize, signal: usize) -> Vec<usize> {
    let mut out = profile.to_vec();
    out[bidder] = signal;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_index_puts_last_bidder_fastest() {
        let space = SignalSpace::new(vec![2, 1, 1]).unwrap();
        assert_eq!(space.profile_count(), Some(12));
        assert_eq!(space.index(&[0, 0, 1]), 1);
        assert_eq!(space.index(&[0, 1, 0]), 2);
        assert_eq!(space.index(&[1, 0, 0]), 4);
        assert_eq!(space.index(&[2, 1, 1]), 11);
        for (idx, p) in space.profiles().enumerate() {
            assert_eq!(space.index(&p), idx);
            assert_eq!(space.profile_at(idx), p);
        }
    }

    #[test]
    fn single_signal_bidders_are_allowed() {
        let space = SignalSpace::new(vec![1, 0]).unwrap();
        let all: Vec<_> = space.profiles().collect();
        assert_eq!(all, vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            SignalSpace::with_cap(vec![9, 9, 9], 999),
            Err(MechError::ProfileCapExceeded { count: 1000, cap: 999 })
        ));
        assert!(SignalSpace::with_cap(vec![9, 9, 9], 1000).is_ok());
    }

    #[test]
    fn huge_spaces_are_not_enumerable() {
        let space = SignalSpace::unbounded(vec![1; 65]).unwrap();
        assert!(!space.is_enumerable());
        assert_eq!(space.exact_count(), 1u128 << 65);
        assert!(space.contains(&vec![1; 65]));
        assert!(SignalSpace::new(vec![1; 65]).is_err());
    }

    #[test]
    fn profile_bounds_are_checked() {
        let space = SignalSpace::new(vec![2, 1]).unwrap();
        assert!(space.profile(vec![2, 1]).is_ok());
        assert!(space.profile(vec![3, 0]).is_err());
        assert!(space.profile(vec![0]).is_err());
        assert!(SignalSpace::new(vec![]).is_err());
    }
}
