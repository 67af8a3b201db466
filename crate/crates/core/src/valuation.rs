//! Valuation functions and their structural parameters.
//!
//! A [`ValuationInstance`] is either a dense table (one row-major array per
//! bidder) or an oracle that evaluates `v_i(s)` on demand. Oracles exist for
//! spaces far too large to tabulate, such as the 65-bidder lower-bound family.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::instances::{self, InstanceSpec};
use crate::space::{SignalSpace, DEFAULT_PROFILE_CAP};

/// Per-profile valuation evaluator. Must be deterministic and side-effect free.
pub trait ValuationOracle: Send + Sync {
    fn value(&self, bidder: usize, profile: &[usize]) -> f64;

    /// Writes every bidder's value at `profile` into `out`. Override when all
    /// values share work (the default calls [`ValuationOracle::value`] `n` times).
    fn values_into(&self, profile: &[usize], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.value(i, profile);
        }
    }
}

#[derive(Clone)]
enum Values {
    Tabulated(Arc<Vec<Vec<f64>>>),
    Oracle(Arc<dyn ValuationOracle>),
}

#[derive(Clone)]
pub struct ValuationInstance {
    space: SignalSpace,
    values: Values,
    /// For discretized continuous examples: the real signal value of each index.
    signal_values: Option<Vec<Vec<f64>>>,
    spec: Option<InstanceSpec>,
}

impl fmt::Debug for ValuationInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValuationInstance")
            .field("sizes", &self.space.sizes())
            .field("tabulated", &self.is_tabulated())
            .field("spec", &self.spec)
            .finish()
    }
}

fn check_value(bidder: usize, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(MechError::InvalidValuation(format!(
            "value {x} of bidder {} is not a nonnegative finite number",
            bidder + 1
        )));
    }
    Ok(())
}

impl ValuationInstance {
    /// Builds a tabulated instance; `values[i]` is bidder `i`'s row-major table.
    pub fn tabulated(space: SignalSpace, values: Vec<Vec<f64>>) -> Result<Self> {
        let count = space.require_enumerable(DEFAULT_PROFILE_CAP)?;
        if values.len() != space.n() {
            return Err(MechError::InvalidValuation(format!(
                "expected {} value rows, found {}",
                space.n(),
                values.len()
            )));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != count {
                return Err(MechError::InvalidValuation(format!(
                    "bidder {} has {} values, the space has {count} profiles",
                    i + 1,
                    row.len()
                )));
            }
            for &x in row {
                check_value(i, x)?;
            }
        }
        Ok(Self {
            space,
            values: Values::Tabulated(Arc::new(values)),
            signal_values: None,
            spec: None,
        })
    }

    /// Tabulates `f(bidder, profile)` over the whole space.
    pub fn from_fn(space: SignalSpace, f: impl Fn(usize, &[usize]) -> f64) -> Result<Self> {
        let n = space.n();
        let count = space.require_enumerable(DEFAULT_PROFILE_CAP)?;
        let mut values = vec![Vec::with_capacity(count); n];
        for s in space.profiles() {
            for (i, row) in values.iter_mut().enumerate() {
                row.push(f(i, &s));
            }
        }
        Self::tabulated(space, values)
    }

    /// Wraps an oracle. Values are validated lazily by the checks that read them.
    pub fn oracle(space: SignalSpace, oracle: Arc<dyn ValuationOracle>) -> Self {
        Self {
            space,
            values: Values::Oracle(oracle),
            signal_values: None,
            spec: None,
        }
    }

    pub fn with_spec(mut self, spec: InstanceSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn with_signal_values(mut self, grid: Vec<Vec<f64>>) -> Self {
        self.signal_values = Some(grid);
        self
    }

    pub fn spec(&self) -> Option<&InstanceSpec> {
        self.spec.as_ref()
    }

    pub fn signal_values(&self) -> Option<&[Vec<f64>]> {
        self.signal_values.as_deref()
    }

    pub fn space(&self) -> &SignalSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.values, Values::Tabulated(_))
    }

    /// The dense tables, if this instance is tabulated.
    pub fn table(&self) -> Option<&[Vec<f64>]> {
        match &self.values {
            Values::Tabulated(t) => Some(t.as_slice()),
            Values::Oracle(_) => None,
        }
    }

    #[inline]
    pub fn value(&self, bidder: usize, profile: &[usize]) -> f64 {
        match &self.values {
            Values::Tabulated(t) => t[bidder][self.space.index(profile)],
            Values::Oracle(o) => o.value(bidder, profile),
        }
    }

    pub fn values_into(&self, profile: &[usize], out: &mut [f64]) {
        match &self.values {
            Values::Tabulated(t) => {
                let idx = self.space.index(profile);
                for (o, row) in out.iter_mut().zip(t.iter()) {
                    *o = row[idx];
                }
            }
            Values::Oracle(o) => o.values_into(profile, out),
        }
    }

    pub fn values(&self, profile: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.values_into(profile, &mut out);
        out
    }

    /// Value by row-major index. Only valid on enumerable spaces.
    pub fn value_at(&self, bidder: usize, index: usize) -> f64 {
        match &self.values {
            Values::Tabulated(t) => t[bidder][index],
            Values::Oracle(o) => o.value(bidder, &self.space.profile_at(index)),
        }
    }

    /// Materializes an oracle-backed instance. Refuses spaces above `cap`.
    pub fn tabulate(&self, cap: u64) -> Result<Self> {
        if self.is_tabulated() {
            return Ok(self.clone());
        }
        self.space.require_enumerable(cap)?;
        let mut out = Self::from_fn(self.space.clone(), |i, s| self.value(i, s))?;
        out.signal_values = self.signal_values.clone();
        out.spec = self.spec.clone();
        Ok(out)
    }

    /// Multiplies every value by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(MechError::InvalidParameter(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        let values = match &self.values {
            Values::Tabulated(t) => Values::Tabulated(Arc::new(
                t.iter()
                    .map(|row| row.iter().map(|x| x * factor).collect())
                    .collect(),
            )),
            Values::Oracle(o) => Values::Oracle(Arc::new(Scaled {
                inner: o.clone(),
                factor,
            })),
        };
        Ok(Self {
            space: self.space.clone(),
            values,
            signal_values: self.signal_values.clone(),
            spec: None,
        })
    }

    /// Sub-instance over the bidders in `members` (ascending, 0-based). The
    /// other bidders' signals are held at `fixed`, and member `a` of the
    /// sub-instance has value `v_{members[a]}` at the embedded profile.
    pub fn restrict(&self, members: &[usize], fixed: &[usize]) -> Result<Self> {
        self.space.check(fixed)?;
        if members.is_empty() {
            return Err(MechError::InvalidParameter("restriction to an empty set".into()));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) || members.iter().any(|&m| m >= self.n()) {
            return Err(MechError::InvalidParameter(format!(
                "restriction set {members:?} must be strictly increasing bidder indices"
            )));
        }
        let sizes = members.iter().map(|&m| self.space.max_signal(m)).collect();
        let space = SignalSpace::unbounded(sizes)?;
        let oracle = Restricted {
            base: self.clone(),
            members: members.to_vec(),
            fixed: fixed.to_vec(),
        };
        Ok(Self::oracle(space, Arc::new(oracle)))
    }

    /// Serializes to the instance JSON schema. Tabulated instances write the
    /// full `values` arrays; oracle-backed ones write their generator spec.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let doc = match (&self.values, &self.spec) {
            (Values::Tabulated(t), spec) => InstanceDocument::Table(TableDocument {
                sizes: self.space.sizes().to_vec(),
                values: t.as_ref().clone(),
                signal_values: self.signal_values.clone(),
                name: spec.as_ref().map(|s| s.name.clone()),
                params: spec.as_ref().map(|s| s.params.clone()),
                provenance: spec.as_ref().map(|s| s.provenance.clone()),
            }),
            (Values::Oracle(_), Some(spec)) => InstanceDocument::Generated(GeneratedDocument {
                generator: spec.name.clone(),
                params: spec.params.clone(),
                provenance: Some(spec.provenance.clone()),
            }),
            (Values::Oracle(_), None) => {
                return Err(MechError::NotEnumerable);
            }
        };
        serde_json::to_value(doc).map_err(|e| MechError::Parse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: InstanceDocument =
            serde_json::from_str(text).map_err(|e| MechError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let doc: InstanceDocument =
            serde_json::from_value(value).map_err(|e| MechError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    fn from_document(doc: InstanceDocument) -> Result<Self> {
        match doc {
            InstanceDocument::Table(t) => {
                let space = SignalSpace::new(t.sizes)?;
                let mut inst = Self::tabulated(space, t.values)?;
                inst.signal_values = t.signal_values;
                if let Some(name) = t.name {
                    inst.spec = Some(InstanceSpec {
                        name,
                        params: t.params.unwrap_or_default(),
                        provenance: t.provenance.unwrap_or_default(),
                        c: None,
                        d: None,
                    });
                }
                Ok(inst)
            }
            InstanceDocument::Generated(g) => instances::generate(&g.generator, &g.params),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum InstanceDocument {
    Generated(GeneratedDocument),
    Table(TableDocument),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratedDocument {
    generator: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    sizes: Vec<usize>,
    values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signal_values: Option<Vec<Vec<f64>>>,
}

struct Scaled {
    inner: Arc<dyn ValuationOracle>,
    factor: f64,
}

impl ValuationOracle for Scaled {
    fn value(&self, bidder: usize, profile: &[usize]) -> f64 {
        self.inner.value(bidder, profile) * self.factor
    }

    fn values_into(&self, profile: &[usize], out: &mut [f64]) {
        self.inner.values_into(profile, out);
        for o in out.iter_mut() {
            *o *= self.factor;
        }
    }
}

struct Restricted {
    base: ValuationInstance,
    members: Vec<usize>,
    fixed: Vec<usize>,
}

impl Restricted {
    fn embed(&self, profile: &[usize]) -> Vec<usize> {
        let mut full = self.fixed.clone();
        for (&m, &s) in self.members.iter().zip(profile) {
            full[m] = s;
        }
        full
    }
}

impl ValuationOracle for Restricted {
    fn value(&self, bidder: usize, profile: &[usize]) -> f64 {
        self.base.value(self.members[bidder], &self.embed(profile))
    }

    fn values_into(&self, profile: &[usize], out: &mut [f64]) {
        let full = self.base.values(&self.embed(profile));
        for (o, &m) in out.iter_mut().zip(&self.members) {
            *o = full[m];
        }
    }
}

/// A structural constant `c` or `d`: a real at least 1, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScParameter {
    Finite(f64),
    Infinite,
}

impl ScParameter {
    pub fn is_finite(self) -> bool {
        matches!(self, ScParameter::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ScParameter::Finite(x) => Some(x),
            ScParameter::Infinite => None,
        }
    }

    /// The value as a float, with `Infinite` mapped to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Requires a finite parameter, naming it in the error.
    pub fn require_finite(self, what: &str) -> Result<f64> {
        self.finite()
            .ok_or_else(|| MechError::Precondition(format!("{what} must be finite")))
    }
}

impl fmt::Display for ScParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScParameter::Finite(x) => write!(f, "{x}"),
            ScParameter::Infinite => f.write_str("INFINITE"),
        }
    }
}

impl Serialize for ScParameter {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ScParameter::Finite(x) => serializer.serialize_f64(*x),
            ScParameter::Infinite => serializer.serialize_str("INFINITE"),
        }
    }
}

impl<'de> Deserialize<'de> for ScParameter {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(x) if x >= 1.0 && x.is_finite() => Ok(ScParameter::Finite(x)),
            Raw::Num(x) => Err(serde::de::Error::custom(format!("parameter {x} is below 1"))),
            Raw::Str(s) if s == "INFINITE" => Ok(ScParameter::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unknown parameter `{s}`"))),
        }
    }
}

/// A measured structural constant together with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    /// The constant, clamped to at least 1.
    pub value: ScParameter,
    /// Supremum of the defining ratio before clamping (`inf` when unbounded,
    /// 0 when no constraint is active).
    pub raw: f64,
    /// `(i, j, s)` attaining the supremum: for `c`, direction `i` and affected
    /// bidder `j`; for `d`, bidder `i` and direction `j`.
    pub witness: Option<(usize, usize, Vec<usize>)>,
}

/// Increment `v_j(s) - v_j(s - e_i)`.
pub fn discrete_derivative(v: &ValuationInstance, target: usize, direction: usize, s: &[usize]) -> Result<f64> {
    let n = v.n();
    for b in [target, direction] {
        if b >= n {
            return Err(MechError::BidderOutOfRange { bidder: b, n });
        }
    }
    v.space().check(s)?;
    if s[direction] == 0 {
        return Err(MechError::Precondition(format!(
            "signal of bidder {} is 0, no lower neighbour",
            direction + 1
        )));
    }
    let mut lower = s.to_vec();
    lower[direction] -= 1;
    Ok(v.value(target, s) - v.value(target, &lower))
}

/// One failure of value monotonicity: `v_bidder` drops when signal
/// `direction` steps up to `profile`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueViolation {
    pub bidder: usize,
    pub direction: usize,
    pub profile: Vec<usize>,
    pub lower_value: f64,
    pub value: f64,
}

/// Lists every adjacent pair where some valuation decreases.
pub fn check_value_monotone(v: &ValuationInstance) -> Result<Vec<ValueViolation>> {
    let space = v.space();
    space.require_enumerable(DEFAULT_PROFILE_CAP)?;
    let n = v.n();
    let strides = space.strides()?.to_vec();
    let table = v.tabulate(DEFAULT_PROFILE_CAP)?;
    let t = table.table().expect("tabulated");
    let mut out = Vec::new();
    for (idx, s) in space.profiles().enumerate() {
        for j in 0..n {
            if s[j] == 0 {
                continue;
            }
            let lower = idx - strides[j];
            for (i, row) in t.iter().enumerate() {
                if row[lower] > row[idx] {
                    out.push(ValueViolation {
                        bidder: i,
                        direction: j,
                        profile: s.clone(),
                        lower_value: row[lower],
                        value: row[idx],
                    });
                }
            }
        }
    }
    Ok(out)
}

fn require_monotone(v: &ValuationInstance) -> Result<ValuationInstance> {
    let violations = check_value_monotone(v)?;
    if let Some(first) = violations.into_iter().next() {
        return Err(MechError::NonMonotone {
            bidder: first.bidder,
            direction: first.direction,
            profile: first.profile,
        });
    }
    v.tabulate(DEFAULT_PROFILE_CAP)
}

/// Measures the single-crossing constant: the smallest `c ≥ 1` with
/// `c · Δ_i v_i(s) ≥ Δ_i v_j(s)` for all `i`, `j ≠ i` and `s` with `s_i ≥ 1`.
pub fn measure_c(v: &ValuationInstance) -> Result<Measurement> {
    let table = require_monotone(v)?;
    let t = table.table().expect("tabulated");
    let space = table.space();
    let strides = space.strides()?;
    let n = space.n();
    let mut raw = 0.0f64;
    let mut witness = None;
    for (idx, s) in space.profiles().enumerate() {
        for i in 0..n {
            if s[i] == 0 {
                continue;
            }
            let lower = idx - strides[i];
            let own = t[i][idx] - t[i][lower];
            for j in (0..n).filter(|&j| j != i) {
                let cross = t[j][idx] - t[j][lower];
                if cross <= 0.0 {
                    continue;
                }
                let ratio = if own == 0.0 { f64::INFINITY } else { cross / own };
                if ratio > raw {
                    raw = ratio;
                    witness = Some((i, j, s.clone()));
                }
            }
        }
    }
    Ok(finish(raw, witness))
}

pub fn compute_c(v: &ValuationInstance) -> Result<ScParameter> {
    Ok(measure_c(v)?.value)
}

fn finish(raw: f64, witness: Option<(usize, usize, Vec<usize>)>) -> Measurement {
    let value = if raw.is_infinite() {
        ScParameter::Infinite
    } else {
        ScParameter::Finite(raw.max(1.0))
    };
    Measurement { value, raw, witness }
}

/// Measures the concavity constant: the smallest `d ≥ 1` such that
/// `d · Δ_j v_i(s) ≥ Δ_j v_i(s')` whenever `s ≤ s'` agree in coordinate `j`.
///
/// For each `(i, j)` a suffix maximum over the dominance order is built by
/// sweeping profiles in descending row-major order, so every profile is
/// compared against the largest increment above it in `O(n)` work.
#[allow(clippy::needless_range_loop)]
pub fn measure_d(v: &ValuationInstance) -> Result<Measurement> {
    let table = require_monotone(v)?;
    let t = table.table().expect("tabulated");
    let space = table.space();
    let strides = space.strides()?;
    let sizes = space.sizes();
    let n = space.n();
    let count = space.profile_count().expect("enumerable");
    let mut raw = 0.0f64;
    let mut witness = None;
    let mut best = vec![0.0f64; count];
    for i in 0..n {
        for j in 0..n {
            if sizes[j] == 0 {
                continue;
            }
            for idx in (0..count).rev() {
                let s = space.profile_at(idx);
                if s[j] == 0 {
                    continue;
                }
                let inc = t[i][idx] - t[i][idx - strides[j]];
                let mut above = f64::NEG_INFINITY;
                for l in (0..n).filter(|&l| l != j) {
                    if s[l] < sizes[l] {
                        above = above.max(best[idx + strides[l]]);
                    }
                }
                best[idx] = inc.max(above);
                if above > 0.0 {
                    let ratio = if inc == 0.0 { f64::INFINITY } else { above / inc };
                    if ratio > raw {
                        raw = ratio;
                        witness = Some((i, j, s));
                    }
                }
            }
        }
    }
    Ok(finish(raw, witness))
}

pub fn compute_d(v: &ValuationInstance) -> Result<ScParameter> {
    Ok(measure_d(v)?.value)
}

/// True iff `v_j(s) ≤ α · v_i(s)`, compared exactly.
pub fn alpha_approximates(v: &ValuationInstance, i: usize, j: usize, s: &[usize], alpha: f64) -> bool {
    v.value(j, s) <= alpha * v.value(i, s)
}

/// Keeps the signals of the first `i` bidders of `order` and zeroes the rest.
/// `order` holds 0-based bidder indices.
pub fn intermediate_profile(s: &[usize], order: &[usize], i: usize) -> Vec<usize> {
    let mut out = vec![0; s.len()];
    for &b in &order[..i] {
        out[b] = s[b];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(sizes: Vec<usize>, f: impl Fn(usize, &[usize]) -> f64) -> ValuationInstance {
        ValuationInstance::from_fn(SignalSpace::new(sizes).unwrap(), f).unwrap()
    }

    #[test]
    fn derivative_of_oil_instance() {
        let v = inst(vec![3, 3], |i, s| if i == 0 { 3.0 * s[0] as f64 } else { 2.0 * s[0] as f64 });
        assert_eq!(discrete_derivative(&v, 1, 0, &[1, 0]).unwrap(), 2.0);
        assert_eq!(discrete_derivative(&v, 0, 1, &[2, 1]).unwrap(), 0.0);
        assert!(matches!(discrete_derivative(&v, 1, 0, &[0, 2]), Err(MechError::Precondition(_))));
        assert!(matches!(
            discrete_derivative(&v, 2, 0, &[1, 0]),
            Err(MechError::BidderOutOfRange { bidder: 2, n: 2 })
        ));
    }

    #[test]
    fn constructed_value_violation_is_reported_once() {
        let space = SignalSpace::new(vec![1, 1]).unwrap();
        // profiles (0,0) (0,1) (1,0) (1,1)
        let v = ValuationInstance::tabulated(space, vec![vec![7.0, 7.0, 5.0, 8.0], vec![0.0; 4]]).unwrap();
        let viol = check_value_monotone(&v).unwrap();
        assert_eq!(viol.len(), 1);
        assert_eq!((viol[0].bidder, viol[0].direction, viol[0].profile.clone()), (0, 0, vec![1, 0]));
        assert!(matches!(measure_c(&v), Err(MechError::NonMonotone { bidder: 0, direction: 0, .. })));
    }

    #[test]
    fn c_is_clamped_but_raw_is_kept() {
        let v = inst(vec![3, 3], |i, s| if i == 0 { 3.0 * s[0] as f64 } else { 2.0 * s[0] as f64 });
        let m = measure_c(&v).unwrap();
        assert_eq!(m.value, ScParameter::Finite(1.0));
        assert!((m.raw - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_own_increment_makes_c_infinite() {
        let v = inst(vec![1, 0], |i, s| match (i, s[0]) {
            (0, _) => 3.0,
            (_, 0) => 1.0,
            _ => 9.0,
        });
        assert_eq!(compute_c(&v).unwrap(), ScParameter::Infinite);
    }

    #[test]
    fn product_valuations_have_infinite_d() {
        let v = inst(vec![1, 1, 1], |i, s| (0..3).filter(|&j| j != i).map(|j| s[j] as f64).product());
        assert_eq!(compute_d(&v).unwrap(), ScParameter::Infinite);
    }

    #[test]
    fn quadratic_cross_term_has_measured_d() {
        // Both Δ_0 v_0 = 1 + s_1 and Δ_1 v_0 = 1 + s_0 range over {1, 2, 3}: d = 3.
        let v = inst(vec![2, 2], |i, s| if i == 0 { (s[0] * (1 + s[1]) + s[1]) as f64 } else { s[1] as f64 });
        assert_eq!(compute_d(&v).unwrap(), ScParameter::Finite(3.0));
    }

    #[test]
    fn intermediate_profile_keeps_prefix() {
        let s = [1, 2, 3, 4, 5];
        let order = [4, 1, 2, 0, 3];
        assert_eq!(intermediate_profile(&s, &order, 3), vec![0, 2, 3, 0, 5]);
        assert_eq!(intermediate_profile(&s, &order, 0), vec![0; 5]);
        assert_eq!(intermediate_profile(&s, &order, 5), s.to_vec());
    }

    #[test]
    fn alpha_approximation_is_exact() {
        let v = inst(vec![2, 0], |i, s| if i == 0 { (2 * s[0]) as f64 - 1.0 } else { (3 * s[0]) as f64 - 2.0 }.max(0.0));
        assert!(alpha_approximates(&v, 0, 1, &[2, 0], 1.5));
        assert!(!alpha_approximates(&v, 0, 1, &[2, 0], 1.3));
        assert!(alpha_approximates(&v, 1, 1, &[1, 0], 1.0));
    }

    #[test]
    fn json_round_trip_preserves_table() {
        let v = inst(vec![2, 1], |i, s| (i + s[0] * 2 + s[1]) as f64 * 0.1);
        let json = v.to_json().unwrap();
        let back = ValuationInstance::from_json_value(json).unwrap();
        assert_eq!(back.table(), v.table());
        assert!(ValuationInstance::from_json_str("").is_err());
        assert!(ValuationInstance::from_json_str(r#"{"sizes":[1],"values":[[1.0]]}"#).is_err());
        assert!(ValuationInstance::from_json_str(r#"{"sizes":[1],"values":[[1.0,-2.0]]}"#).is_err());
    }

    #[test]
    fn restriction_embeds_fixed_signals() {
        let v = inst(vec![1, 1, 1], |i, s| (i * 100 + s[0] * 4 + s[1] * 2 + s[2]) as f64);
        let r = v.restrict(&[0, 2], &[0, 1, 0]).unwrap();
        assert_eq!(r.n(), 2);
        assert_eq!(r.value(0, &[1, 1]), v.value(0, &[1, 1, 1]));
        assert_eq!(r.value(1, &[0, 1]), v.value(2, &[0, 1, 1]));
        assert_eq!(r.values(&[1, 0]), vec![v.value(0, &[1, 1, 0]), v.value(2, &[1, 1, 0])]);
    }
}
