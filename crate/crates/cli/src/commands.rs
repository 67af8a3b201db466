use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use mechlib::instances::generate;
use mechlib::mechanisms::{
    check_allocation_monotone, generalized_vcg, high_if_possible_with_order, hypergrid_coloring_with_c, outcome,
    profile_ratio, random_hypergrid_outcome, two_bidder_coloring, HipOrder, LazyHypergrid,
};
use mechlib::oracle::{
    best_monotone_ratio, exact_random_hypergrid_stats, monte_carlo_random_hypergrid, optimal_welfare,
    MAX_EXACT_BIDDERS,
};
use mechlib::revenue::{
    expected_revenue, family_lookahead, mechanism_m_outcome, BaseRuleFamily, Branch, JointPrior, MParams,
};
use mechlib::valuation::{check_value_monotone, compute_c, compute_d};
use mechlib::{AllocationRule, AllocationTable, MechError, Outcome, Permutation, ScParameter, ValuationInstance};
use serde_json::{json, Value};

use crate::config::{parse_params, FileConfig, Format, MechanismName, DEFAULT_CAP, DEFAULT_SAMPLES};
use crate::output::{self, num, one_based, Report};
use crate::{Cli, Command, InstanceArg, MParamArgs, MechArgs};

struct Ctx {
    file: FileConfig,
    cap: u64,
    seed: u64,
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let format = cli.format.or(file.format).unwrap_or(Format::Json);
    let out = cli.out.clone().or_else(|| file.out.clone());
    let ctx = Ctx {
        cap: cli.cap.or(file.cap).unwrap_or(DEFAULT_CAP),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        file,
    };
    let report = match cli.command {
        Command::Check { instance } => check(&ctx, &instance)?,
        Command::Generate { name, params } => generate_cmd(&ctx, &name, &params)?,
        Command::Run { instance, mech, profile, prior, m } => run(&ctx, &instance, &mech, profile, prior, &m)?,
        Command::Table { instance, mech } => table(&ctx, &instance, &mech)?,
        Command::Evaluate { instance, mech, profile, prior, samples, m } => {
            evaluate(&ctx, &instance, &mech, profile, prior, samples, &m)?
        }
        Command::Search { instance, witness } => search(&ctx, &instance, witness)?,
        Command::Revenue { instance, mech, prior, samples, m } => revenue(&ctx, &instance, &mech, prior, samples, &m)?,
    };
    output::write(&report, format, out.as_deref())
}

fn load_instance(ctx: &Ctx, arg: &InstanceArg) -> Result<ValuationInstance> {
    let source = arg
        .positional
        .clone()
        .or_else(|| arg.flag.clone())
        .or_else(|| ctx.file.instance.clone())
        .ok_or_else(|| anyhow!("no instance given (pass a file or gen:NAME:key=value,...)"))?;
    if let Some(rest) = source.strip_prefix("gen:") {
        let (name, params) = rest.split_once(':').unwrap_or((rest, ""));
        let mut merged = ctx.file.params.clone();
        merged.extend(parse_params(&params.split(',').map(str::to_string).collect::<Vec<_>>())?);
        return Ok(generate(name, &merged)?);
    }
    let text = std::fs::read_to_string(&source).with_context(|| format!("reading instance {source}"))?;
    ValuationInstance::from_json_str(&text).with_context(|| format!("instance {source}"))
}

fn load_prior(ctx: &Ctx, v: &ValuationInstance, flag: Option<String>) -> Result<Option<JointPrior>> {
    let Some(source) = flag.or_else(|| ctx.file.prior.clone()) else { return Ok(None) };
    if source == "uniform" {
        return Ok(Some(JointPrior::uniform(v.space().clone())?));
    }
    let text = std::fs::read_to_string(&source).with_context(|| format!("reading prior {source}"))?;
    Ok(Some(JointPrior::from_json_str(&text, v.space().clone()).with_context(|| format!("prior {source}"))?))
}

fn enumerable(ctx: &Ctx, v: &ValuationInstance) -> bool {
    v.space().exact_count() <= ctx.cap as u128 && v.space().is_enumerable()
}

/// Measured when the space can be swept, otherwise the generator's own value.
fn measured_or_advertised(ctx: &Ctx, v: &ValuationInstance) -> Result<(ScParameter, ScParameter, bool)> {
    if enumerable(ctx, v) {
        return Ok((compute_c(v)?, compute_d(v)?, true));
    }
    let spec = v.spec().ok_or(MechError::NotEnumerable)?;
    match (spec.c, spec.d) {
        (Some(c), Some(d)) => Ok((c, d, false)),
        _ => Err(MechError::NotEnumerable.into()),
    }
}

fn resolve_c(ctx: &Ctx, v: &ValuationInstance, mech: &MechArgs) -> Result<f64> {
    if let Some(c) = mech.c.or(ctx.file.c) {
        if !(c >= 1.0 && c.is_finite()) {
            bail!(MechError::InvalidParameter(format!("c must be finite and at least 1, got {c}")));
        }
        return Ok(c);
    }
    Ok(measured_or_advertised(ctx, v)?.0.require_finite("the single-crossing constant")?)
}

fn resolve_mechanism(ctx: &Ctx, mech: &MechArgs) -> Result<MechanismName> {
    match (mech.mechanism, &ctx.file.mechanism) {
        (Some(m), _) => Ok(m),
        (None, Some(text)) => MechanismName::parse(text),
        (None, None) => bail!("no mechanism given (--mechanism)"),
    }
}

fn resolve_pi(ctx: &Ctx, v: &ValuationInstance, mech: &MechArgs) -> Result<Permutation> {
    match mech.pi.clone().or_else(|| ctx.file.pi.clone()) {
        Some(order) if order.len() != v.n() => {
            bail!(MechError::InvalidParameter(format!("--pi has {} entries for {} bidders", order.len(), v.n())))
        }
        Some(order) => Ok(Permutation::from_one_based(&order)?),
        None => Ok(Permutation::identity(v.n())),
    }
}

fn resolve_profile(ctx: &Ctx, v: &ValuationInstance, flag: Option<Vec<usize>>) -> Result<Option<Vec<usize>>> {
    let Some(s) = flag.or_else(|| ctx.file.profile.clone()) else { return Ok(None) };
    v.space().check(&s)?;
    Ok(Some(s))
}

fn build_table(ctx: &Ctx, v: &ValuationInstance, name: MechanismName, mech: &MechArgs) -> Result<AllocationTable> {
    v.space().require_enumerable(ctx.cap)?;
    Ok(match name {
        MechanismName::Vcg => generalized_vcg(v)?,
        MechanismName::TwoBidder => two_bidder_coloring(v)?,
        MechanismName::HighIfPossible => high_if_possible_with_order(v, resolve_c(ctx, v, mech)?, HipOrder::Lexicographic)?,
        MechanismName::Hypergrid => hypergrid_coloring_with_c(v, &resolve_pi(ctx, v, mech)?, resolve_c(ctx, v, mech)?)?,
        MechanismName::RandomHypergrid => bail!(MechError::NotApplicable(
            "random-hypergrid has no single table; use run or evaluate".into()
        )),
    })
}

/// A deterministic rule that can be queried per profile. Hypergrid runs
/// lazily so that it works on spaces too large to tabulate.
fn build_rule<'a>(
    ctx: &Ctx,
    v: &'a ValuationInstance,
    name: MechanismName,
    mech: &MechArgs,
) -> Result<Box<dyn AllocationRule + 'a>> {
    if name == MechanismName::Hypergrid {
        let rule = LazyHypergrid::new(v, resolve_pi(ctx, v, mech)?, resolve_c(ctx, v, mech)?)?;
        return Ok(Box::new(rule));
    }
    Ok(Box::new(build_table(ctx, v, name, mech)?))
}

fn outcome_json(o: &Outcome) -> Value {
    json!({
        "winner": o.winner.map(|w| w + 1),
        "payment": num(o.payment),
        "critical_signal": o.critical_signal,
    })
}

fn check(ctx: &Ctx, arg: &InstanceArg) -> Result<Report> {
    let v = load_instance(ctx, arg)?;
    let (c, d, measured) = measured_or_advertised(ctx, &v)?;
    let count = v.space().exact_count();
    let mut report = json!({
        "n": v.n(),
        "sizes": v.space().sizes(),
        "profile_count": u64::try_from(count).map(Value::from).unwrap_or_else(|_| Value::from(count.to_string())),
        "c": c,
        "d": d,
        "measured": measured,
    });
    if measured {
        let violations = check_value_monotone(&v)?.len();
        report["monotone"] = json!(violations == 0);
        report["monotonicity_violations"] = json!(violations);
    }
    if let Some(spec) = v.spec() {
        report["name"] = json!(spec.name);
        report["provenance"] = json!(spec.provenance);
    }
    Ok(Report::single(report))
}

fn generate_cmd(ctx: &Ctx, name: &str, params: &[String]) -> Result<Report> {
    let mut merged = ctx.file.params.clone();
    merged.extend(parse_params(params)?);
    if !merged.contains_key("seed") && matches!(name, "random_separable" | "random_tabulated") {
        merged.insert("seed".into(), ctx.seed as f64);
    }
    let v = generate(name, &merged)?;
    Ok(Report::single(v.to_json()?))
}

fn run(
    ctx: &Ctx,
    arg: &InstanceArg,
    mech: &MechArgs,
    profile: Option<Vec<usize>>,
    prior: Option<String>,
    m: &MParamArgs,
) -> Result<Report> {
    let v = load_instance(ctx, arg)?;
    let name = resolve_mechanism(ctx, mech)?;
    let s = resolve_profile(ctx, &v, profile)?.ok_or_else(|| anyhow!("no profile given (--profile)"))?;
    let mut report = json!({ "mechanism": name.label(), "profile": s, "seed": ctx.seed });
    if let Some(prior) = load_prior(ctx, &v, prior)? {
        let (family, params) = m_setup(ctx, &v, name, mech, m)?;
        let draw = mechanism_m_outcome(&v, &prior, &family, params, &s, ctx.seed)?;
        merge(&mut report, outcome_json(&draw.outcome));
        report["mechanism"] = json!(format!("m/{}", name.label()));
        report["branch"] = match &draw.branch {
            Branch::Full => json!("full"),
            Branch::Restricted(z) => json!({ "restricted": one_based(z) }),
        };
        report["realization"] = json!(draw.realization);
        return Ok(Report::single(report));
    }
    match name {
        MechanismName::RandomHypergrid => {
            let (o, pi) = random_hypergrid_outcome(&v, &s, ctx.seed, resolve_c(ctx, &v, mech)?)?;
            merge(&mut report, outcome_json(&o));
            report["pi"] = json!(pi);
        }
        _ => {
            let rule = build_rule(ctx, &v, name, mech)?;
            merge(&mut report, outcome_json(&outcome(&*rule, &v, &s)));
        }
    }
    Ok(Report::single(report))
}

fn merge(into: &mut Value, from: Value) {
    if let (Some(a), Value::Object(b)) = (into.as_object_mut(), from) {
        a.extend(b);
    }
}

fn table(ctx: &Ctx, arg: &InstanceArg, mech: &MechArgs) -> Result<Report> {
    let v = load_instance(ctx, arg)?;
    let name = resolve_mechanism(ctx, mech)?;
    let t = build_table(ctx, &v, name, mech)?;
    let violations = check_allocation_monotone(&t)?.len();
    if violations > 0 {
        log::warn!("{} table has {violations} monotonicity violations", name.label());
    }
    let rows = v
        .space()
        .profiles()
        .map(|s| json!({ "profile": s, "winner": t.winner(&s).map(|w| w + 1) }))
        .collect();
    Ok(Report { json: serde_json::to_value(&t)?, rows: Some(rows) })
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    ctx: &Ctx,
    arg: &InstanceArg,
    mech: &MechArgs,
    profile: Option<Vec<usize>>,
    prior: Option<String>,
    samples: Option<usize>,
    m: &MParamArgs,
) -> Result<Report> {
    let v = load_instance(ctx, arg)?;
    let name = resolve_mechanism(ctx, mech)?;
    let c = resolve_c(ctx, &v, mech)?;
    let samples = samples.or(ctx.file.samples).unwrap_or(DEFAULT_SAMPLES);
    let profiles: Vec<Vec<usize>> = match resolve_profile(ctx, &v, profile)? {
        Some(s) => vec![s],
        None => {
            v.space().require_enumerable(ctx.cap)?;
            v.space().profiles().collect()
        }
    };
    let mut rows = Vec::with_capacity(profiles.len());
    // (profile, value delivered) for the prior-weighted summary.
    let mut delivered = Vec::with_capacity(profiles.len());
    if name == MechanismName::RandomHypergrid {
        for s in &profiles {
            let opt = optimal_welfare(&v, s);
            let (mean, se) = if v.n() <= MAX_EXACT_BIDDERS {
                (exact_random_hypergrid_stats(&v, s, c)?.expected_value, 0.0)
            } else {
                monte_carlo_random_hypergrid(&v, s, samples, ctx.seed, c)?
            };
            let ratio = if opt == 0.0 { 1.0 } else if mean == 0.0 { f64::INFINITY } else { opt / mean };
            rows.push(json!({
                "profile": s,
                "optimal": num(opt),
                "expected_value": num(mean),
                "standard_error": num(se),
                "ratio": num(ratio),
            }));
            delivered.push((s.clone(), mean, ratio));
        }
    } else {
        let rule = build_rule(ctx, &v, name, mech)?;
        for s in &profiles {
            let vals = v.values(s);
            let w = rule.winner(s);
            let value = w.map_or(0.0, |w| vals[w]);
            let ratio = profile_ratio(&vals, w);
            rows.push(json!({
                "profile": s,
                "optimal": num(optimal_welfare(&v, s)),
                "winner": w.map(|w| w + 1),
                "value": num(value),
                "ratio": num(ratio),
            }));
            delivered.push((s.clone(), value, ratio));
        }
    }
    let (worst_profile, worst) = delivered
        .iter()
        .fold((None, f64::NEG_INFINITY), |acc, (s, _, r)| if *r > acc.1 { (Some(s.clone()), *r) } else { acc });
    let mut report = json!({
        "mechanism": name.label(),
        "c": num(c),
        "profiles_evaluated": rows.len(),
        "worst_ratio": num(worst),
        "worst_profile": worst_profile,
        "rows": rows.clone(),
    });
    if let Some(prior) = load_prior(ctx, &v, prior)? {
        if profiles.len() as u128 == v.space().exact_count() {
            let welfare: f64 = delivered.iter().map(|(s, x, _)| prior.probability(s) * x).sum();
            let optimum: f64 = profiles.iter().map(|s| prior.probability(s) * optimal_welfare(&v, s)).sum();
            report["expected_welfare"] = num(welfare);
            report["expected_optimal_welfare"] = num(optimum);
        }
        report["revenue"] = match revenue_report(ctx, &v, &prior, name, mech, m, samples) {
            Ok(r) => r,
            Err(e) => serde_json::from_str(&output::error_json(&e))?,
        };
    }
    Ok(Report { json: report, rows: Some(rows) })
}

fn search(ctx: &Ctx, arg: &InstanceArg, witness: Option<PathBuf>) -> Result<Report> {
    let v = load_instance(ctx, arg)?;
    let rep = best_monotone_ratio(&v, ctx.cap)?;
    if let Some(path) = witness {
        let table = rep.witness_table.as_ref().ok_or_else(|| anyhow!("the search produced no witness table"))?;
        let mut text = serde_json::to_string_pretty(table)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Report::single(serde_json::to_value(&rep)?))
}

fn m_setup(
    ctx: &Ctx,
    v: &ValuationInstance,
    name: MechanismName,
    mech: &MechArgs,
    m: &MParamArgs,
) -> Result<(BaseRuleFamily, MParams)> {
    let c = resolve_c(ctx, v, mech)?;
    let family = match name {
        MechanismName::Hypergrid => BaseRuleFamily::hypergrid(v, resolve_pi(ctx, v, mech)?, c)?,
        MechanismName::RandomHypergrid => BaseRuleFamily::random_hypergrid(v, c)?,
        MechanismName::HighIfPossible => BaseRuleFamily::high_if_possible(v, c)?,
        other => bail!(MechError::NotApplicable(format!(
            "mechanism M runs on hypergrid, random-hypergrid or high-if-possible, not {}",
            other.label()
        ))),
    };
    let d = match m.d.or(ctx.file.d) {
        Some(d) => d,
        None => compute_d(v)?.require_finite("d (pass --d to override)")?,
    };
    let alpha = match m.alpha.or(ctx.file.alpha) {
        Some(a) => a,
        None if family.is_randomized() => c * (d + 1.0),
        None => family.measured_alpha()?,
    };
    let p = m.p.or(ctx.file.p).unwrap_or(if family.is_randomized() { 0.5 } else { 1.0 });
    Ok((family, MParams::new(alpha, d, p)?))
}

fn revenue_report(
    ctx: &Ctx,
    v: &ValuationInstance,
    prior: &JointPrior,
    name: MechanismName,
    mech: &MechArgs,
    m: &MParamArgs,
    samples: usize,
) -> Result<Value> {
    let (family, params) = m_setup(ctx, v, name, mech, m)?;
    let est = expected_revenue(v, prior, &family, params, ctx.cap, samples, ctx.seed)?;
    let lookahead = family_lookahead(prior, &family)?;
    let ratio = if est.value > 0.0 { lookahead / est.value } else { f64::INFINITY };
    Ok(json!({
        "base": name.label(),
        "expected_revenue": num(est.value),
        "standard_error": est.standard_error.map(num),
        "exact": est.exact,
        "lookahead": num(lookahead),
        "ratio": num(ratio),
        "alpha": num(params.alpha),
        "d": num(params.d),
        "p": num(params.p),
        "factor": num(params.factor()),
    }))
}

fn revenue(
    ctx: &Ctx,
    arg: &InstanceArg,
    mech: &MechArgs,
    prior: Option<String>,
    samples: Option<usize>,
    m: &MParamArgs,
) -> Result<Report> {
    let v = load_instance(ctx, arg)?;
    let name = resolve_mechanism(ctx, mech)?;
    let prior = load_prior(ctx, &v, prior)?.ok_or_else(|| anyhow!("no prior given (--prior FILE or --prior uniform)"))?;
    let samples = samples.or(ctx.file.samples).unwrap_or(DEFAULT_SAMPLES);
    Ok(Report::single(revenue_report(ctx, &v, &prior, name, mech, m, samples)?))
}
