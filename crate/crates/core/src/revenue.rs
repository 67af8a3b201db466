//! Revenue from any monotone allocation rule via conditional monopoly
//! reserves.
//!
//! Mechanism M runs one of two branches. In the first, the winner of the base
//! rule is offered the item at their winning conditional monopoly reserve. In
//! the second, the base rule is rerun on a uniformly random subset `Z` of the
//! bidders and the restricted winner gets the analogous offer. Branch
//! probabilities come from the welfare guarantee `α` of the base rule, the
//! concavity constant `d` and, for randomized base rules, the probability `p`
//! that a run achieves `α`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx_eq;
use crate::error::{MechError, Result};
use crate::mechanisms::{
    critical_signal, high_if_possible_with_order, profile_ratio, AllocationRule, AllocationTable, HipOrder,
    LazyHypergrid, Outcome, Permutation, RestrictedRule,
};
use crate::par::{derive_seed, map_range, map_slice, mean_and_se, Execution};
use crate::space::{with_signal, SignalSpace, DEFAULT_PROFILE_CAP};
use crate::valuation::ValuationInstance;

/// Probabilities must sum to one within this absolute tolerance.
pub const PRIOR_TOL: f64 = 1e-12;

/// Default bound on `profiles × branches × subsets × orders` for exact evaluation.
pub const DEFAULT_EVALUATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
enum PriorKind {
    Product(Vec<Vec<f64>>),
    Sparse(HashMap<Vec<usize>, f64>),
}

/// A discrete joint distribution over signal profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPrior {
    space: SignalSpace,
    kind: PriorKind,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum PriorDocument {
    Product { marginals: Vec<Vec<f64>> },
    Sparse { atoms: Vec<Atom> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Atom {
    profile: Vec<usize>,
    p: f64,
}

fn check_probabilities(ps: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    let mut total = 0.0;
    for p in ps {
        if !(p.is_finite() && p >= 0.0) {
            return Err(MechError::InvalidPrior(format!("{what} has the invalid probability {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > PRIOR_TOL {
        return Err(MechError::InvalidPrior(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

impl JointPrior {
    /// Independent signals with the given per-bidder marginals.
    pub fn product(space: SignalSpace, marginals: Vec<Vec<f64>>) -> Result<Self> {
        if marginals.len() != space.n() {
            return Err(MechError::InvalidPrior(format!(
                "{} marginals for {} bidders",
                marginals.len(),
                space.n()
            )));
        }
        for (i, m) in marginals.iter().enumerate() {
            if m.len() != space.max_signal(i) + 1 {
                return Err(MechError::InvalidPrior(format!(
                    "marginal {} has {} entries, bidder has {} signals",
                    i + 1,
                    m.len(),
                    space.max_signal(i) + 1
                )));
            }
            check_probabilities(m.iter().copied(), &format!("marginal {}", i + 1))?;
        }
        Ok(Self { space, kind: PriorKind::Product(marginals) })
    }

    /// An explicit list of profiles with positive probability.
    pub fn sparse(space: SignalSpace, atoms: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let mut map = HashMap::with_capacity(atoms.len());
        check_probabilities(atoms.iter().map(|a| a.1), "atom list")?;
        for (profile, p) in atoms {
            space.check(&profile)?;
            if map.insert(profile.clone(), p).is_some() {
                return Err(MechError::InvalidPrior(format!("profile {profile:?} listed twice")));
            }
        }
        Ok(Self { space, kind: PriorKind::Sparse(map) })
    }

    pub fn uniform(space: SignalSpace) -> Result<Self> {
        let marginals = space.sizes().iter().map(|&k| vec![1.0 / (k + 1) as f64; k + 1]).collect();
        Self::product(space, marginals)
    }

    pub fn point_mass(space: SignalSpace, profile: Vec<usize>) -> Result<Self> {
        Self::sparse(space, vec![(profile, 1.0)])
    }

    pub fn space(&self) -> &SignalSpace {
        &self.space
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, PriorKind::Product(_))
    }

    pub fn probability(&self, profile: &[usize]) -> f64 {
        match &self.kind {
            PriorKind::Product(m) => profile.iter().zip(m).map(|(&s, mi)| mi[s]).product(),
            PriorKind::Sparse(map) => map.get(profile).copied().unwrap_or(0.0),
        }
    }

    /// Profiles with positive probability, in row-major order.
    pub fn support(&self) -> Vec<(Vec<usize>, f64)> {
        match &self.kind {
            PriorKind::Product(_) => self
                .space
                .profiles()
                .map(|s| {
                    let p = self.probability(&s);
                    (s, p)
                })
                .filter(|(_, p)| *p > 0.0)
                .collect(),
            PriorKind::Sparse(map) => {
                let mut atoms: Vec<_> = map.iter().filter(|(_, &p)| p > 0.0).map(|(s, &p)| (s.clone(), p)).collect();
                atoms.sort_by(|a, b| a.0.cmp(&b.0));
                atoms
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        fn pick<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = (usize, f64)>, last: usize) -> usize {
            let mut u: f64 = rng.random();
            for (i, w) in weights {
                if u < w {
                    return i;
                }
                u -= w;
            }
            last
        }
        match &self.kind {
            PriorKind::Product(m) => m
                .iter()
                .map(|mi| {
                    let last = mi.iter().rposition(|&p| p > 0.0).unwrap_or(0);
                    pick(rng, mi.iter().copied().enumerate(), last)
                })
                .collect(),
            PriorKind::Sparse(_) => {
                let atoms = self.support();
                let i = pick(rng, atoms.iter().map(|a| a.1).enumerate(), atoms.len() - 1);
                atoms[i].0.clone()
            }
        }
    }

    /// Parses the prior JSON schema against `space`.
    pub fn from_json_str(text: &str, space: SignalSpace) -> Result<Self> {
        let doc: PriorDocument = serde_json::from_str(text).map_err(|e| MechError::Parse(e.to_string()))?;
        match doc {
            PriorDocument::Product { marginals } => Self::product(space, marginals),
            PriorDocument::Sparse { atoms } => Self::sparse(space, atoms.into_iter().map(|a| (a.profile, a.p)).collect()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = match &self.kind {
            PriorKind::Product(m) => PriorDocument::Product { marginals: m.clone() },
            PriorKind::Sparse(_) => PriorDocument::Sparse {
                atoms: self.support().into_iter().map(|(profile, p)| Atom { profile, p }).collect(),
            },
        };
        serde_json::to_value(doc).expect("prior documents serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Condition {
    Winning,
    Losing,
}

/// A monopoly price for one bidder on one line `s_{-i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReserveQuote {
    pub price: f64,
    /// `price · Pr[v_i ≥ price | condition, s_{-i}]`.
    pub expected_revenue: f64,
    pub condition: Condition,
    pub bidder: usize,
    /// The other bidders' signals.
    pub context: Vec<usize>,
    /// The bidder's critical signal on this line, if it ever wins.
    pub critical_signal: Option<usize>,
}

fn quote(
    prior: &JointPrior,
    v: &ValuationInstance,
    i: usize,
    s: &[usize],
    signals: std::ops::Range<usize>,
    condition: Condition,
    critical: Option<usize>,
) -> Result<ReserveQuote> {
    let points: Vec<(f64, f64)> = signals
        .map(|t| {
            let p = with_signal(s, i, t);
            (v.value(i, &p), prior.probability(&p))
        })
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let total: f64 = points.iter().map(|p| p.1).sum();
    let context: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
    if points.is_empty() || total <= 0.0 {
        return Err(MechError::UndefinedReserve(format!(
            "bidder {} has zero probability of {} given {context:?}",
            i + 1,
            if condition == Condition::Winning { "winning" } else { "losing" }
        )));
    }
    let mut prices: Vec<f64> = points.iter().map(|p| p.0).collect();
    prices.sort_by(|a, b| b.total_cmp(a));
    prices.dedup();
    let revenue_at = |price: f64| price * points.iter().filter(|p| p.0 >= price).map(|p| p.1).sum::<f64>() / total;
    let mut best = (prices[0], revenue_at(prices[0]));
    for &price in &prices[1..] {
        let rev = revenue_at(price);
        // Prices are visited from high to low, so keeping the incumbent on a
        // tie prefers the higher price.
        if rev > best.1 && !approx_eq(rev, best.1) {
            best = (price, rev);
        }
    }
    Ok(ReserveQuote {
        price: best.0,
        expected_revenue: best.1,
        condition,
        bidder: i,
        context,
        critical_signal: critical,
    })
}

/// Monopoly price for bidder `i` given `s_{-i}` and `s_i ≥ b_i*`, where `b_i*`
/// is the critical signal under `rule`. Ties go to the higher price.
pub fn winning_reserve<R: AllocationRule + ?Sized>(
    prior: &JointPrior,
    v: &ValuationInstance,
    rule: &R,
    i: usize,
    s: &[usize],
) -> Result<ReserveQuote> {
    v.space().check(s)?;
    let b = critical_signal(rule, i, s);
    let lo = b.unwrap_or(v.space().max_signal(i) + 1);
    quote(prior, v, i, s, lo..v.space().max_signal(i) + 1, Condition::Winning, b)
}

/// Monopoly price for bidder `i` given `s_{-i}` and `s_i < b_i*` (every
/// signal, if `i` never wins on this line).
pub fn losing_reserve<R: AllocationRule + ?Sized>(
    prior: &JointPrior,
    v: &ValuationInstance,
    rule: &R,
    i: usize,
    s: &[usize],
) -> Result<ReserveQuote> {
    v.space().check(s)?;
    let b = critical_signal(rule, i, s);
    let hi = b.unwrap_or(v.space().max_signal(i) + 1);
    quote(prior, v, i, s, 0..hi, Condition::Losing, b)
}

/// Offers the item to `rule`'s winner at their winning reserve; the sale
/// happens iff their value at `s` meets the price. An undefined reserve
/// means no sale.
pub fn posted_price_outcome<R: AllocationRule + ?Sized>(
    prior: &JointPrior,
    v: &ValuationInstance,
    rule: &R,
    s: &[usize],
) -> Outcome {
    let Some(w) = rule.winner(s) else {
        return Outcome::NO_SALE;
    };
    let q = match winning_reserve(prior, v, rule, w, s) {
        Ok(q) => q,
        Err(e) => {
            log::info!("no offer at {s:?}: {e}");
            return Outcome::NO_SALE;
        }
    };
    if let Some(b) = q.critical_signal {
        let critical_value = v.value(w, &with_signal(s, w, b));
        if !crate::approx_le(critical_value, q.price) {
            log::warn!(
                "reserve {} for bidder {} at {s:?} is below the critical value {critical_value}",
                q.price,
                w + 1
            );
        }
    }
    if v.value(w, s) >= q.price {
        Outcome { winner: Some(w), payment: q.price, critical_signal: q.critical_signal }
    } else {
        Outcome { winner: None, payment: 0.0, critical_signal: q.critical_signal }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BaseKind {
    Hypergrid(Permutation),
    RandomHypergrid,
    HighIfPossible(AllocationTable),
}

/// A base allocation rule together with its restrictions to subsets of the
/// bidders. A restricted rule runs the same algorithm on the members only,
/// with everyone else's signals frozen at the reported profile and only
/// members eligible to win. Randomized families are uniform mixtures of
/// finitely many deterministic realizations.
#[derive(Debug, Clone)]
pub struct BaseRuleFamily {
    v: ValuationInstance,
    c: f64,
    kind: BaseKind,
}

/// The `r`-th permutation of `0..m` in lexicographic order.
fn nth_permutation(m: usize, mut r: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..m).collect();
    let mut fact: usize = (1..m).product();
    let mut out = Vec::with_capacity(m);
    for left in (1..=m).rev() {
        let i = r / fact;
        r %= fact;
        out.push(pool.remove(i));
        if left > 1 {
            fact /= left - 1;
        }
    }
    out
}

impl BaseRuleFamily {
    /// Hypergrid coloring with a fixed order; restrictions keep the members
    /// in the same relative order.
    pub fn hypergrid(v: &ValuationInstance, pi: Permutation, c: f64) -> Result<Self> {
        LazyHypergrid::new(v, pi.clone(), c)?;
        Ok(Self { v: v.clone(), c, kind: BaseKind::Hypergrid(pi) })
    }

    /// Hypergrid coloring with a uniformly random order of the members.
    pub fn random_hypergrid(v: &ValuationInstance, c: f64) -> Result<Self> {
        LazyHypergrid::new(v, Permutation::identity(v.n()), c)?;
        Ok(Self { v: v.clone(), c, kind: BaseKind::RandomHypergrid })
    }

    /// High-if-possible on binary signals.
    pub fn high_if_possible(v: &ValuationInstance, c: f64) -> Result<Self> {
        let table = high_if_possible_with_order(v, c, HipOrder::Lexicographic)?;
        Ok(Self { v: v.clone(), c, kind: BaseKind::HighIfPossible(table) })
    }

    pub fn valuation(&self) -> &ValuationInstance {
        &self.v
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self.kind, BaseKind::RandomHypergrid)
    }

    /// Number of equally likely deterministic realizations over `m` members.
    pub fn realizations(&self, m: usize) -> usize {
        match self.kind {
            BaseKind::RandomHypergrid => (1..=m).product(),
            _ => 1,
        }
    }

    /// Realization `r` of the rule restricted to `members` (ascending), with
    /// non-members frozen at `s`.
    pub fn rule(&self, members: &[usize], r: usize, s: &[usize]) -> Result<Box<dyn AllocationRule + '_>> {
        let n = self.v.n();
        let full = members.len() == n;
        match &self.kind {
            BaseKind::Hypergrid(pi) if full => Ok(Box::new(LazyHypergrid::new(&self.v, pi.clone(), self.c)?)),
            BaseKind::HighIfPossible(table) if full => Ok(Box::new(table)),
            BaseKind::RandomHypergrid if full => {
                let pi = Permutation::new(nth_permutation(n, r))?;
                Ok(Box::new(LazyHypergrid::new(&self.v, pi, self.c)?))
            }
            kind => {
                let sub = self.v.restrict(members, s)?;
                let space = self.v.space().clone();
                let position = |b: usize| members.iter().position(|&m| m == b);
                match kind {
                    BaseKind::Hypergrid(pi) => {
                        let order = pi.order().iter().filter_map(|&b| position(b)).collect();
                        let inner = LazyHypergrid::new(&sub, Permutation::new(order)?, self.c)?;
                        Ok(Box::new(RestrictedRule::new(space, members.to_vec(), inner)?))
                    }
                    BaseKind::RandomHypergrid => {
                        let pi = Permutation::new(nth_permutation(members.len(), r))?;
                        let inner = LazyHypergrid::new(&sub, pi, self.c)?;
                        Ok(Box::new(RestrictedRule::new(space, members.to_vec(), inner)?))
                    }
                    BaseKind::HighIfPossible(_) => {
                        let sub = sub.tabulate(DEFAULT_PROFILE_CAP)?;
                        let inner = high_if_possible_with_order(&sub, self.c, HipOrder::Lexicographic)?;
                        Ok(Box::new(RestrictedRule::new(space, members.to_vec(), inner)?))
                    }
                }
            }
        }
    }

    /// Largest welfare ratio of any realization of the full rule or any
    /// restriction, over every profile, measured against the members' values.
    pub fn measured_alpha(&self) -> Result<f64> {
        let space = self.v.space();
        let count = space.require_enumerable(DEFAULT_PROFILE_CAP)?;
        let n = self.v.n();
        let subsets: Vec<Vec<usize>> = (1u32..1 << n).map(|mask| members_of(mask, n)).collect();
        let worst = map_range(Execution::default(), count, |idx| -> Result<f64> {
            let s = space.profile_at(idx);
            let vals = self.v.values(&s);
            let mut worst: f64 = 1.0;
            for z in &subsets {
                let zvals: Vec<f64> = z.iter().map(|&m| vals[m]).collect();
                for r in 0..self.realizations(z.len()) {
                    let w = self.rule(z, r, &s)?.winner(&s);
                    let local = w.map(|w| z.iter().position(|&m| m == w).expect("winner is a member"));
                    worst = worst.max(profile_ratio(&zvals, local));
                }
            }
            Ok(worst)
        });
        worst.into_iter().try_fold(1.0f64, |m, r| Ok(m.max(r?)))
    }
}

fn members_of(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Branch-(a) probability `(α² + 1) / (α² + 4αd/p² + 1)`.
pub fn branch_a_probability(alpha: f64, d: f64, p: f64) -> f64 {
    (alpha * alpha + 1.0) / approximation_factor(alpha, d, p)
}

/// Revenue guarantee `α² + 4αd/p² + 1` of mechanism M.
pub fn approximation_factor(alpha: f64, d: f64, p: f64) -> f64 {
    alpha * alpha + 4.0 * alpha * d / (p * p) + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MParams {
    pub alpha: f64,
    pub d: f64,
    pub p: f64,
}

impl MParams {
    pub fn new(alpha: f64, d: f64, p: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite() && d >= 1.0 && d.is_finite() && p > 0.0 && p <= 1.0) {
            return Err(MechError::InvalidParameter(format!(
                "need α ≥ 1, d ≥ 1 finite and 0 < p ≤ 1; got α = {alpha}, d = {d}, p = {p}"
            )));
        }
        Ok(Self { alpha, d, p })
    }

    pub fn branch_a_probability(&self) -> f64 {
        branch_a_probability(self.alpha, self.d, self.p)
    }

    pub fn factor(&self) -> f64 {
        approximation_factor(self.alpha, self.d, self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Branch {
    Full,
    /// Members of `Z`, 0-based.
    Restricted(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MDraw {
    pub outcome: Outcome,
    pub branch: Branch,
    /// Which realization of a randomized base rule was drawn.
    pub realization: usize,
}

/// One run of mechanism M at reported profile `s`.
pub fn mechanism_m_outcome(
    v: &ValuationInstance,
    prior: &JointPrior,
    family: &BaseRuleFamily,
    params: MParams,
    s: &[usize],
    seed: u64,
) -> Result<MDraw> {
    v.space().check(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = v.n();
    let (members, branch) = if rng.random::<f64>() < params.branch_a_probability() {
        ((0..n).collect(), Branch::Full)
    } else {
        let z: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
        (z.clone(), Branch::Restricted(z))
    };
    if members.is_empty() {
        return Ok(MDraw { outcome: Outcome::NO_SALE, branch, realization: 0 });
    }
    let r = rng.random_range(0..family.realizations(members.len()));
    let rule = family.rule(&members, r, s)?;
    Ok(MDraw { outcome: posted_price_outcome(prior, v, &*rule, s), branch, realization: r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevenueEstimate {
    pub value: f64,
    /// `None` for exact evaluation.
    pub standard_error: Option<f64>,
    pub exact: bool,
}

/// `E_s[f(s)]` under `prior`, by enumerating its support.
pub fn expected_value<F>(prior: &JointPrior, f: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Send + Sync,
{
    let support = prior.support();
    map_slice(Execution::default(), &support, |(s, p)| p * f(s)).into_iter().sum()
}

/// Number of deterministic runs exact evaluation of M needs.
pub fn enumeration_size(prior: &JointPrior, family: &BaseRuleFamily) -> u128 {
    let n = family.valuation().n();
    let per_profile: u128 = (0u32..1 << n)
        .map(|mask| family.realizations(mask.count_ones() as usize) as u128)
        .sum();
    prior.support().len() as u128 * per_profile
}

/// Exact expected revenue of mechanism M, averaging over the prior, both
/// branches, every subset `Z` and every realization of the base rule.
pub fn exact_m_revenue(
    v: &ValuationInstance,
    prior: &JointPrior,
    family: &BaseRuleFamily,
    params: MParams,
    exec: Execution,
) -> Result<f64> {
    let n = v.n();
    let q = params.branch_a_probability();
    let subsets: Vec<Vec<usize>> = (1u32..1 << n).map(|mask| members_of(mask, n)).collect();
    let support = prior.support();
    let per_profile = map_slice(exec, &support, |(s, ps)| -> Result<f64> {
        let average = |members: &[usize]| -> Result<f64> {
            let count = family.realizations(members.len());
            let mut total = 0.0;
            for r in 0..count {
                let rule = family.rule(members, r, s)?;
                let o = posted_price_outcome(prior, v, &*rule, s);
                debug_assert!(o.winner.is_none_or(|w| v.value(w, s) >= o.payment));
                total += o.payment;
            }
            Ok(total / count as f64)
        };
        let all: Vec<usize> = (0..n).collect();
        let a = average(&all)?;
        let mut b = 0.0;
        for z in &subsets {
            b += average(z)?;
        }
        b /= (1u64 << n) as f64;
        Ok(ps * (q * a + (1.0 - q) * b))
    });
    per_profile.into_iter().try_fold(0.0, |acc, x| Ok(acc + x?))
}

/// Expected revenue of M: exact when the enumeration fits under `cap`,
/// otherwise a seeded Monte Carlo estimate over `samples` draws.
pub fn expected_revenue(
    v: &ValuationInstance,
    prior: &JointPrior,
    family: &BaseRuleFamily,
    params: MParams,
    cap: u64,
    samples: usize,
    seed: u64,
) -> Result<RevenueEstimate> {
    if enumeration_size(prior, family) <= cap as u128 {
        let value = exact_m_revenue(v, prior, family, params, Execution::default())?;
        return Ok(RevenueEstimate { value, standard_error: None, exact: true });
    }
    let draws = map_range(Execution::default(), samples, |t| -> Result<f64> {
        let base = derive_seed(seed, t as u64);
        let s = prior.sample(&mut ChaCha8Rng::seed_from_u64(base));
        Ok(mechanism_m_outcome(v, prior, family, params, &s, derive_seed(base, 1))?.outcome.payment)
    });
    let draws = draws.into_iter().collect::<Result<Vec<f64>>>()?;
    let (value, se) = mean_and_se(&draws);
    Ok(RevenueEstimate { value, standard_error: Some(se), exact: false })
}

/// `E_s[R_1 + v_2(s)]`: the winner's winning-reserve revenue on their line
/// plus the best value among the others. Lines where the reserve is
/// undefined contribute only the second term.
pub fn lookahead_benchmark<R: AllocationRule + ?Sized>(prior: &JointPrior, v: &ValuationInstance, rule: &R) -> f64 {
    expected_value(prior, |s| {
        let vals = v.values(s);
        match rule.winner(s) {
            None => vals.iter().fold(0.0, |m: f64, &x| m.max(x)),
            Some(w) => {
                let r1 = winning_reserve(prior, v, rule, w, s).map(|q| q.expected_revenue).unwrap_or(0.0);
                let v2 = vals.iter().enumerate().filter(|&(j, _)| j != w).fold(0.0, |m: f64, (_, &x)| m.max(x));
                r1 + v2
            }
        }
    })
}

/// Lookahead benchmark of the family's full rule, averaged over its
/// realizations.
pub fn family_lookahead(prior: &JointPrior, family: &BaseRuleFamily) -> Result<f64> {
    let n = family.valuation().n();
    let all: Vec<usize> = (0..n).collect();
    let count = family.realizations(n);
    let zero = vec![0; n];
    let mut total = 0.0;
    for r in 0..count {
        let rule = family.rule(&all, r, &zero)?;
        total += lookahead_benchmark(prior, family.valuation(), &*rule);
    }
    Ok(total / count as f64)
}
