//! `mechlib` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, MechanismName};

#[derive(Parser, Debug)]
#[command(name = "mechlib", version, about = "Truthful mechanisms for interdependent-value auctions")]
struct Cli {
    /// TOML file with defaults for any flag; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Enumeration cap (profiles, tables or mechanism runs).
    #[arg(long, global = true, env = "MECHLIB_CAP")]
    cap: Option<u64>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

/// Where the valuations come from: a JSON file, or `gen:NAME[:key=value,...]`.
#[derive(Args, Debug, Clone, Default)]
struct InstanceArg {
    #[arg(value_name = "INSTANCE")]
    positional: Option<String>,

    #[arg(long = "instance", value_name = "INSTANCE", conflicts_with = "positional")]
    flag: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report c, d, monotonicity and size of an instance.
    Check {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Build a named instance and write its JSON.
    Generate {
        name: String,
        /// `key=value` pairs, repeatable or comma-separated.
        #[arg(long = "param", alias = "params", value_delimiter = ',')]
        params: Vec<String>,
    },
    /// Run a mechanism at one reported profile.
    Run {
        #[command(flatten)]
        instance: InstanceArg,
        #[command(flatten)]
        mech: MechArgs,
        /// Reported signals, comma-separated.
        #[arg(long, value_delimiter = ',')]
        profile: Option<Vec<usize>>,
        /// Run mechanism M on top of the chosen rule with this prior.
        #[arg(long)]
        prior: Option<String>,
        #[command(flatten)]
        m: MParamArgs,
    },
    /// Tabulate a deterministic mechanism's winners.
    Table {
        #[command(flatten)]
        instance: InstanceArg,
        #[command(flatten)]
        mech: MechArgs,
    },
    /// Welfare ratios per profile, plus revenue when a prior is given.
    Evaluate {
        #[command(flatten)]
        instance: InstanceArg,
        #[command(flatten)]
        mech: MechArgs,
        /// Evaluate only this profile.
        #[arg(long, value_delimiter = ',')]
        profile: Option<Vec<usize>>,
        #[arg(long)]
        prior: Option<String>,
        /// Monte Carlo draws when exact enumeration is out of reach.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        m: MParamArgs,
    },
    /// Exhaustive search for the best monotone deterministic rule.
    Search {
        #[command(flatten)]
        instance: InstanceArg,
        /// Dump the optimal table here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Expected revenue of mechanism M against the lookahead benchmark.
    Revenue {
        #[command(flatten)]
        instance: InstanceArg,
        #[command(flatten)]
        mech: MechArgs,
        /// Prior JSON file, or `uniform`.
        #[arg(long)]
        prior: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        m: MParamArgs,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct MechArgs {
    #[arg(long, value_enum)]
    mechanism: Option<MechanismName>,
    /// Bidder order for hypergrid, 1-based and comma-separated.
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<usize>>,
    /// Single-crossing constant to run with instead of the measured one.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct MParamArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", output::error_json(&e));
            ExitCode::FAILURE
        }
    }
}
