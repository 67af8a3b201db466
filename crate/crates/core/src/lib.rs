//! Truthful mechanisms for single-item auctions with interdependent values
//! on discrete signal spaces.
//!
//! Each bidder `i` holds a private integer signal `s_i ∈ {0, …, k_i}` and has a
//! publicly known valuation `v_i(s)` over the whole signal profile. When the
//! valuations are only *c-single-crossing* (a bidder's own signal moves their
//! value at least `1/c` times as much as it moves anyone else's), full
//! efficiency is out of reach, but monotone allocation rules still give
//! bounded welfare approximations:
//!
//! * [`mechanisms::two_bidder_coloring`] and [`mechanisms::high_if_possible`]
//!   are deterministic `c`-approximations for two bidders or two signals;
//! * [`mechanisms::hypergrid_coloring`] is a deterministic `(n-1)c`
//!   approximation, with a polynomial-time per-profile evaluator in
//!   [`mechanisms::lazy_winner`];
//! * [`mechanisms::random_hypergrid_outcome`] draws the bidder order at
//!   random, which is a `2c`-approximation on concave valuations.
//!
//! [`revenue`] turns any of these allocation rules into a revenue mechanism
//! via conditional monopoly reserves, and [`oracle`] holds the brute-force
//! ground truth (exhaustive monotone-table search, exact permutation
//! averages, closed forms) that the test suites check everything against.
//!
//! Heavy sweeps run on rayon when the `parallel` feature is enabled (the
//! default); see [`par::Execution`].

pub mod error;
pub mod instances;
pub mod mechanisms;
pub mod oracle;
pub mod par;
pub mod revenue;
pub mod space;
pub mod valuation;

pub use error::{MechError, Result};
pub use mechanisms::{AllocationRule, AllocationTable, Outcome, Permutation};
pub use space::{SignalProfile, SignalSpace};
pub use valuation::{ScParameter, ValuationInstance, ValuationOracle};

/// Relative tolerance used when comparing floating-point quantities that are
/// equal in exact arithmetic.
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` up to [`REL_TOL`] relative to the larger magnitude.
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b || a - b <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Equality up to [`REL_TOL`] relative to the larger magnitude.
pub fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

/// Serializes a ratio, writing unbounded values as `"INFINITE"` (JSON has no
/// infinity).
pub fn serialize_ratio<S: serde::Serializer>(x: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        serializer.serialize_str("INFINITE")
    } else {
        serializer.serialize_f64(*x)
    }
}

pub fn serialize_ratios<S: serde::Serializer>(xs: &[f64], serializer: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = serializer.serialize_seq(Some(xs.len()))?;
    for x in xs {
        if x.is_infinite() {
            seq.serialize_element("INFINITE")?;
        } else {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}
