//! Named instance generators and random families for property tests.
//!
//! Every generator is a pure function of its parameters (and seed, for the
//! random families). [`generate`] dispatches by name so that instance files
//! can say `{"generator": "tight_hypergrid", "params": {"n": 4, "c": 2}}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::space::SignalSpace;
use crate::valuation::{measure_c, measure_d, ScParameter, ValuationInstance, ValuationOracle};

/// Where an instance came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub provenance: String,
    /// Single-crossing constant the construction guarantees, when it is exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<ScParameter>,
    /// Concavity constant the construction guarantees, when it is exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<ScParameter>,
}

impl InstanceSpec {
    fn new(name: &str, params: &[(&str, f64)], provenance: &str) -> Self {
        Self {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            provenance: provenance.to_string(),
            c: None,
            d: None,
        }
    }

    fn with_cd(mut self, c: Option<ScParameter>, d: Option<ScParameter>) -> Self {
        self.c = c;
        self.d = d;
        self
    }
}

fn fin(x: f64) -> Option<ScParameter> {
    Some(ScParameter::Finite(x))
}

const INF: Option<ScParameter> = Some(ScParameter::Infinite);

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(MechError::InvalidParameter(msg()))
    }
}

/// Oil drilling with single crossing: `v_1 = 3 s_1`, `v_2 = 2 s_1` on `{0..k}²`.
pub fn gen_oil_sc(k: usize) -> Result<ValuationInstance> {
    require(k >= 1, || "k must be at least 1".into())?;
    let space = SignalSpace::new(vec![k, k])?;
    let v = ValuationInstance::from_fn(space, |i, s| if i == 0 { 3.0 } else { 2.0 } * s[0] as f64)?;
    Ok(v.with_spec(
        InstanceSpec::new("oil_sc", &[("k", k as f64)], "oil drilling, firm 1 with the larger margin")
            .with_cd(fin(1.0), fin(1.0)),
    ))
}

/// Oil drilling with fixed costs: `v_1 = 2 s_1 - 1`, `v_2 = 3 s_1 - 2`, both
/// clamped at 0 (only `s_1 = 0` is affected).
pub fn gen_oil_no_sc(k: usize) -> Result<ValuationInstance> {
    require(k >= 1, || "k must be at least 1".into())?;
    let space = SignalSpace::new(vec![k, k])?;
    let v = ValuationInstance::from_fn(space, |i, s| {
        let x = s[0] as f64;
        if i == 0 { 2.0 * x - 1.0 } else { 3.0 * x - 2.0 }.max(0.0)
    })?;
    let c = if k >= 2 { 1.5 } else { 1.0 };
    Ok(v.with_spec(
        InstanceSpec::new(
            "oil_no_sc",
            &[("k", k as f64)],
            "oil drilling with fixed costs; negative values at s_1 = 0 clamped to 0",
        )
        .with_cd(fin(c), fin(1.0)),
    ))
}

/// Retail chains: signals are `k + 1` equally spaced points of `[1, 2]`,
/// `v_1 = 0.06 + m` and `v_2 = m^1.1` for the mean signal `m`.
pub fn gen_retail(k: usize) -> Result<ValuationInstance> {
    require(k >= 1, || "k must be at least 1".into())?;
    let grid: Vec<f64> = (0..=k).map(|t| 1.0 + t as f64 / k as f64).collect();
    let space = SignalSpace::new(vec![k, k])?;
    let v = ValuationInstance::from_fn(space, |i, s| {
        let m = (grid[s[0]] + grid[s[1]]) / 2.0;
        if i == 0 {
            0.06 + m
        } else {
            m.powf(1.1)
        }
    })?;
    Ok(v
        .with_signal_values(vec![grid.clone(), grid])
        .with_spec(InstanceSpec::new(
            "retail",
            &[("k", k as f64)],
            "retail chains selling normal and luxury goods; c is measured on the grid",
        )))
}

/// Two bidders, `S_1 = {0, 1}`, `S_2 = {0}`: `v_1 = (r, r)`, `v_2 = (1, r²)`.
pub fn gen_det_impossibility(r: f64) -> Result<ValuationInstance> {
    require(r > 1.0 && r.is_finite(), || format!("r must exceed 1, got {r}"))?;
    let space = SignalSpace::new(vec![1, 0])?;
    let v = ValuationInstance::tabulated(space, vec![vec![r, r], vec![1.0, r * r]])?;
    Ok(v.with_spec(
        InstanceSpec::new(
            "det_impossibility",
            &[("r", r)],
            "no deterministic prior-free mechanism beats ratio r without single crossing",
        )
        .with_cd(INF, fin(1.0)),
    ))
}

/// `v_i(s) = ∏_{j≠i} s_j` with binary signals.
pub fn gen_rand_impossibility(n: usize) -> Result<ValuationInstance> {
    require(n >= 2, || "n must be at least 2".into())?;
    let space = SignalSpace::new(vec![1; n])?;
    let v = ValuationInstance::from_fn(space, |i, s| {
        s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x as f64).product()
    })?;
    let d = if n == 2 { fin(1.0) } else { INF };
    Ok(v.with_spec(
        InstanceSpec::new(
            "rand_impossibility",
            &[("n", n as f64)],
            "randomized impossibility: each value is the product of the others' signals",
        )
        .with_cd(INF, d),
    ))
}

/// Binary signals; a bidder's value is `0`, `1/c`, `1` or `1 + 1/c` by whether
/// its own signal is high and whether every other signal is high.
pub fn gen_rand_c_lb(n: usize, c: f64) -> Result<ValuationInstance> {
    require(n >= 2, || "n must be at least 2".into())?;
    require(c >= 1.0 && c.is_finite(), || format!("c must be at least 1, got {c}"))?;
    let space = SignalSpace::new(vec![1; n])?;
    let v = ValuationInstance::from_fn(space, |i, s| {
        let others_high = s.iter().enumerate().all(|(j, &x)| j == i || x == 1);
        match (s[i], others_high) {
            (0, false) => 0.0,
            (_, false) => 1.0 / c,
            (0, true) => 1.0,
            _ => 1.0 + 1.0 / c,
        }
    })?;
    let d = if n == 2 { fin(1.0) } else { INF };
    Ok(v.with_spec(
        InstanceSpec::new(
            "rand_c_lb",
            &[("n", n as f64), ("c", c)],
            "randomized lower bound tending to c for binary signals",
        )
        .with_cd(fin(c), d),
    ))
}

/// Two bidders with binary signals: `v_1 = s_1 + c s_2`, `v_2 = c s_1 + s_2`.
///
/// Beating ratio `c` would require bidder 1 at `(0,1)` and bidder 2 at
/// `(1,0)`, and propagating both collides at `(1,1)`.
pub fn gen_two_by_two_tight(c: f64) -> Result<ValuationInstance> {
    require(c > 1.0 && c.is_finite(), || format!("c must exceed 1, got {c}"))?;
    let space = SignalSpace::new(vec![1, 1])?;
    let v = ValuationInstance::from_fn(space, |i, s| {
        let (a, b) = (s[0] as f64, s[1] as f64);
        if i == 0 {
            a + c * b
        } else {
            c * a + b
        }
    })?;
    Ok(v.with_spec(
        InstanceSpec::new(
            "two_by_two_tight",
            &[("c", c)],
            "two bidders, two signals: no deterministic mechanism beats ratio c",
        )
        .with_cd(fin(c), fin(1.0)),
    ))
}

/// Three bidders with sizes `(2, 1, 1)` and `c = 2` where no monotone rule
/// reaches ratio 2. Values are listed per profile in row-major order.
pub fn gen_three_bidder_no_c() -> Result<ValuationInstance> {
    #[rustfmt::skip]
    const ROWS: [[f64; 3]; 12] = [
        // s = (0,0,0) (0,0,1) (0,1,0) (0,1,1)
        [0.0,      0.000676, 0.003170],
        [0.002231, 0.000686, 0.004286],
        [0.007219, 0.004286, 0.003180],
        [0.009449, 0.004295, 0.004295],
        // s = (1,0,0) (1,0,1) (1,1,0) (1,1,1)
        [0.000100, 0.000876, 0.003370],
        [0.002331, 0.000886, 0.004486],
        [0.014529, 0.008091, 0.017799],
        [0.016760, 0.008101, 0.018915],
        // s = (2,0,0) (2,0,1) (2,1,0) (2,1,1)
        [0.003381, 0.007436, 0.003380],
        [0.005611, 0.007446, 0.004495],
        [0.017809, 0.014651, 0.017809],
        [0.020040, 0.014661, 0.018925],
    ];
    let space = SignalSpace::new(vec![2, 1, 1])?;
    let values = (0..3).map(|i| ROWS.iter().map(|r| r[i]).collect()).collect();
    let v = ValuationInstance::tabulated(space, values)?;
    Ok(v.with_spec(
        InstanceSpec::new(
            "three_bidder_no_c",
            &[],
            "three bidders with c = 2 where no monotone rule is a 2-approximation",
        )
        .with_cd(fin(2.0), None),
    ))
}

/// Binary signals; `v_i = s_i` for `i ≠ 2` and `v_2 = c` times the number of
/// other high signals (bidder 2 is index 1).
pub fn gen_tight_hypergrid(n: usize, c: f64) -> Result<ValuationInstance> {
    require(n >= 3, || "n must be at least 3".into())?;
    require(c >= 1.0 && c.is_finite(), || format!("c must be at least 1, got {c}"))?;
    let space = SignalSpace::new(vec![1; n])?;
    let v = ValuationInstance::from_fn(space, |i, s| {
        if i == 1 {
            c * s.iter().enumerate().filter(|&(j, &x)| j != 1 && x == 1).count() as f64
        } else {
            s[i] as f64
        }
    })?;
    Ok(v.with_spec(
        InstanceSpec::new(
            "tight_hypergrid",
            &[("n", n as f64), ("c", c)],
            "hypergrid coloring with the identity order is off by exactly (n-1)c",
        )
        .with_cd(fin(c), fin(1.0)),
    ))
}

/// Group layout for [`gen_random_mech_lb`]: `round(√n / log₂ n)` groups; all
/// but the last have `round(log₂ n · √n)` members and the last takes the rest.
pub fn mech_lb_groups(n: usize) -> Result<Vec<usize>> {
    let root = (n as f64).sqrt().round() as usize;
    require(n >= 4 && root * root == n, || format!("n must be a perfect square of at least 4, got {n}"))?;
    let log = (n as f64).log2();
    let g = ((n as f64).sqrt() / log).round() as usize;
    require(g >= 1, || format!("n = {n} yields no groups"))?;
    let size = (log * (n as f64).sqrt()).round() as usize;
    let full = (g - 1) * size;
    require(full < n, || format!("n = {n} leaves the last group empty"))?;
    let mut groups = vec![size; g - 1];
    groups.push(n - full);
    Ok(groups)
}

struct MechLb {
    /// Group id of each of the first `n` bidders.
    group_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    c: f64,
}

impl MechLb {
    fn high_groups(&self, s: &[usize]) -> Vec<bool> {
        self.members.iter().map(|m| m.iter().all(|&b| s[b] == 1)).collect()
    }
}

impl ValuationOracle for MechLb {
    fn value(&self, bidder: usize, s: &[usize]) -> f64 {
        if bidder < self.group_of.len() {
            let g = self.group_of[bidder];
            if self.members[g].iter().all(|&b| s[b] == 1) { 1.0 } else { 0.0 }
        } else {
            self.c * self.high_groups(s).iter().filter(|&&h| h).count() as f64
        }
    }

    fn values_into(&self, s: &[usize], out: &mut [f64]) {
        let high = self.high_groups(s);
        let n = self.group_of.len();
        for (o, &g) in out[..n].iter_mut().zip(&self.group_of) {
            *o = if high[g] { 1.0 } else { 0.0 };
        }
        out[n] = self.c * high.iter().filter(|&&h| h).count() as f64;
    }
}

/// Random-order lower-bound family: `n` bidders in fixed groups, each valuing
/// the item at 1 iff their whole group is high, plus a last bidder valuing it
/// at `c` times the number of fully-high groups. Oracle-backed.
pub fn gen_random_mech_lb(n: usize, c: f64) -> Result<ValuationInstance> {
    require(c >= 1.0 && c.is_finite(), || format!("c must be at least 1, got {c}"))?;
    let sizes = mech_lb_groups(n)?;
    let mut group_of = Vec::with_capacity(n);
    let mut members = Vec::with_capacity(sizes.len());
    for (g, &len) in sizes.iter().enumerate() {
        members.push((group_of.len()..group_of.len() + len).collect());
        group_of.extend(std::iter::repeat_n(g, len));
    }
    let space = SignalSpace::unbounded(vec![1; n + 1])?;
    let largest = sizes.iter().copied().max().unwrap_or(1);
    let d = if largest >= 2 { INF } else { fin(1.0) };
    let v = ValuationInstance::oracle(space, Arc::new(MechLb { group_of, members, c }));
    Ok(v.with_spec(
        InstanceSpec::new(
            "random_mech_lb",
            &[("n", n as f64), ("c", c)],
            "random-order hypergrid coloring is off by about c·√n / log n here",
        )
        .with_cd(fin(c), d),
    ))
}

/// Random separable valuations `v_j(s) = Σ_i f_ji(s_i)`. Each increment of a
/// cross term `f_ji` is at most `c` times the matching increment of `f_ii`,
/// so the result is `c`-single-crossing and concave.
#[allow(clippy::needless_range_loop)]
pub fn gen_random_separable(n: usize, k: usize, c: f64, seed: u64) -> Result<ValuationInstance> {
    require(n >= 1 && k >= 1, || "n and k must be at least 1".into())?;
    require(c >= 1.0 && c.is_finite(), || format!("c must be at least 1, got {c}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // f[j][i][t] = f_ji(t)
    let mut f = vec![vec![vec![0.0; k + 1]; n]; n];
    for i in 0..n {
        let own: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        for j in 0..n {
            let mut acc = rng.random::<f64>() * 0.5;
            f[j][i][0] = acc;
            for t in 0..k {
                let inc = if i == j { own[t] } else { rng.random::<f64>() * c * own[t] };
                acc += inc;
                f[j][i][t + 1] = acc;
            }
        }
    }
    let space = SignalSpace::new(vec![k; n])?;
    let v = ValuationInstance::from_fn(space, |j, s| (0..n).map(|i| f[j][i][s[i]]).sum())?;
    let params = [("n", n as f64), ("k", k as f64), ("c", c), ("seed", seed as f64)];
    Ok(v.with_spec(
        InstanceSpec::new("random_separable", &params, "random separable c-single-crossing family")
            .with_cd(None, fin(1.0)),
    ))
}

/// Random monotone tables: each `v_i` is the dominance-order cumulative sum of
/// nonnegative noise, with the noise on bidder `i`'s own axis kept positive so
/// that own increments never vanish and `c` is finite. Returns the instance
/// with its measured `c` and `d`.
pub fn gen_random_tabulated(n: usize, k: usize, seed: u64) -> Result<(ValuationInstance, ScParameter, ScParameter)> {
    require(n >= 1 && k >= 1, || "n and k must be at least 1".into())?;
    let space = SignalSpace::new(vec![k; n])?;
    let count = space.profile_count().expect("capped");
    let strides = space.strides()?.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc: Vec<f64> = space
            .profiles()
            .map(|s| {
                let on_axis = s[i] >= 1 && s.iter().enumerate().all(|(j, &x)| j == i || x == 0);
                let x: f64 = if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random() };
                if on_axis {
                    x + 0.05
                } else {
                    x
                }
            })
            .collect();
        // Prefix sums along each axis in turn give the dominance-order sum.
        for (j, &st) in strides.iter().enumerate() {
            for idx in 0..count {
                if (idx / st) % (space.max_signal(j) + 1) > 0 {
                    acc[idx] += acc[idx - st];
                }
            }
        }
        values.push(acc);
    }
    let v = ValuationInstance::tabulated(space, values)?;
    let c = measure_c(&v)?.value;
    let d = measure_d(&v)?.value;
    let params = [("n", n as f64), ("k", k as f64), ("seed", seed as f64)];
    let v = v.with_spec(InstanceSpec::new("random_tabulated", &params, "random monotone tables").with_cd(Some(c), Some(d)));
    Ok((v, c, d))
}

/// Names accepted by [`generate`].
pub const GENERATORS: &[&str] = &[
    "oil_sc",
    "oil_no_sc",
    "retail",
    "det_impossibility",
    "rand_impossibility",
    "rand_c_lb",
    "two_by_two_tight",
    "three_bidder_no_c",
    "tight_hypergrid",
    "random_mech_lb",
    "random_separable",
    "random_tabulated",
];

fn real(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| MechError::InvalidParameter(format!("missing parameter `{key}`")))
}

fn int(params: &BTreeMap<String, f64>, key: &str) -> Result<usize> {
    let x = real(params, key)?;
    if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
        return Err(MechError::InvalidParameter(format!(
            "parameter `{key}` must be a nonnegative integer, got {x}"
        )));
    }
    Ok(x as usize)
}

fn seed(params: &BTreeMap<String, f64>) -> Result<u64> {
    match params.get("seed") {
        None => Ok(0),
        Some(_) => Ok(int(params, "seed")? as u64),
    }
}

/// Builds a named instance from numeric parameters.
pub fn generate(name: &str, params: &BTreeMap<String, f64>) -> Result<ValuationInstance> {
    match name {
        "oil_sc" => gen_oil_sc(int(params, "k")?),
        "oil_no_sc" => gen_oil_no_sc(int(params, "k")?),
        "retail" => gen_retail(int(params, "k")?),
        "det_impossibility" => gen_det_impossibility(real(params, "r")?),
        "rand_impossibility" => gen_rand_impossibility(int(params, "n")?),
        "rand_c_lb" => gen_rand_c_lb(int(params, "n")?, real(params, "c")?),
        "two_by_two_tight" => gen_two_by_two_tight(real(params, "c")?),
        "three_bidder_no_c" => gen_three_bidder_no_c(),
        "tight_hypergrid" => gen_tight_hypergrid(int(params, "n")?, real(params, "c")?),
        "random_mech_lb" => gen_random_mech_lb(int(params, "n")?, real(params, "c")?),
        "random_separable" => {
            gen_random_separable(int(params, "n")?, int(params, "k")?, real(params, "c")?, seed(params)?)
        }
        "random_tabulated" => Ok(gen_random_tabulated(int(params, "n")?, int(params, "k")?, seed(params)?)?.0),
        other => Err(MechError::UnknownGenerator(other.to_string())),
    }
}
