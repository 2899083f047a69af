//! `corrchan`: output purity of correlated two-qubit depolarizing channels.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, parse or I/O
//! error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use config::flag_text;

#[derive(Parser, Debug)]
#[command(name = "corrchan", version, about = "Output purity of correlated two-qubit depolarizing channels")]
struct Cli {
    /// JSON file with "command" and option values; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Evaluate cells one at a time instead of in parallel.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// p-norm, Rényi entropy and spectrum of one channel output.
    Norm(NormArgs),
    /// Maximal output purity: closed form, numerical search, or both.
    Optimize(OptimizeArgs),
    /// Data behind the figures as CSV or JSON lines.
    Figures(FigureArgs),
    /// Self-check suites; exits 1 when any check fails.
    Verify(VerifyArgs),
    /// Random inputs against the conjectured optimum.
    CheckConjecture(CheckArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormArgs {
    /// Correlation probability in [0, 1]; fractions like 1/3 are accepted.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "flag_text")]
    pub mu: Option<String>,
    /// Depolarizing parameter in [-1/3, 1]; may be omitted when mu = 1.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "flag_text")]
    pub lambda: Option<String>,
    /// Order: a number > 1, "inf", or "entropy" [default: 2].
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub p: Option<String>,
    /// bell0, singlet, product00, product-yy, a JSON state literal, or a file.
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub input: Option<String>,
    /// beta0, bell0..bell3, singlet, or {"unitary": [[[re,im],..],..]} [default: beta0].
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub beta: Option<String>,
    /// Print JSON instead of text.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
    Both,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeArgs {
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub mu: Option<String>,
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub lambda: Option<String>,
    /// Order: a number > 1, "inf", or "entropy" [default: 2].
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub p: Option<String>,
    /// [default: analytic]
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    /// [default: 0]
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Random inputs tried by the numerical search [default: 200].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Lattice sizes over (theta, phi, |a|) [default: 21,13,21].
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub lattice: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureArgs {
    #[arg(value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub which: Option<Figure>,
    /// mu values for fig1/fig2: "start:stop:count" or a comma list.
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub mu_grid: Option<String>,
    /// lambda values for fig1/fig2, same syntax.
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub lambda_grid: Option<String>,
    /// fig3 panel mu (with --lambda); default is both standard panels.
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub mu: Option<String>,
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub lambda: Option<String>,
    /// fig3 orders, comma separated.
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub p_grid: Option<String>,
    /// fig3 random inputs per panel [default: 500].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output file [default: $CORRCHAN_OUT_DIR/<figure>.<format>].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// lemmas, covariance, majorization, tables, perturbation [default: all].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Random draws for sampled checks [default: 10000].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Also write the JSON summary here.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckArgs {
    /// Random (mu, lambda) cells [default: 2000].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    /// Random inputs per cell [default: 50].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<usize>,
    /// Orders, comma separated [default: 1.1,1.5,2,3,5,inf].
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub p_grid: Option<String>,
    /// Lattice over (theta, phi, |a|) per cell, or "none" [default: 7,5,7].
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub lattice: Option<String>,
    /// Fixed mu values (with --lambda) instead of random cells.
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub mu: Option<String>,
    #[arg(long)]
    #[serde(default, deserialize_with = "flag_text")]
    pub lambda: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Per-row report [default: $CORRCHAN_OUT_DIR/conjecture.<format>].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn resolve(cli: Cli) -> Result<Command> {
    let cfg = match &cli.config {
        Some(p) => Some(config::load(p)?),
        None => None,
    };
    let named = cfg
        .as_ref()
        .and_then(|c| c.get("command"))
        .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| anyhow!("config \"command\" must be a string")))
        .transpose()?;
    let Some(cfg) = cfg else {
        return cli
            .command
            .ok_or_else(|| anyhow!("no command given (see --help)"));
    };
    let command = match (cli.command, named.as_deref()) {
        (Some(c), None) => c,
        (Some(c), Some(n)) if n == command_name(&c) => c,
        (Some(c), Some(n)) => bail!(
            "config is for '{n}' but the command line asks for '{}'",
            command_name(&c)
        ),
        (None, Some("norm")) => Command::Norm(NormArgs::default()),
        (None, Some("optimize")) => Command::Optimize(OptimizeArgs::default()),
        (None, Some("figures")) => Command::Figures(FigureArgs::default()),
        (None, Some("verify")) => Command::Verify(VerifyArgs::default()),
        (None, Some("check-conjecture")) => Command::CheckConjecture(CheckArgs::default()),
        (None, Some(n)) => bail!("unknown command '{n}' in config"),
        (None, None) => bail!("no command on the command line or in the config"),
    };
    Ok(match command {
        Command::Norm(a) => Command::Norm(config::merge(&a, &cfg)?),
        Command::Optimize(a) => Command::Optimize(config::merge(&a, &cfg)?),
        Command::Figures(a) => Command::Figures(config::merge(&a, &cfg)?),
        Command::Verify(a) => Command::Verify(config::merge(&a, &cfg)?),
        Command::CheckConjecture(a) => Command::CheckConjecture(config::merge(&a, &cfg)?),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Norm(_) => "norm",
        Command::Optimize(_) => "optimize",
        Command::Figures(_) => "figures",
        Command::Verify(_) => "verify",
        Command::CheckConjecture(_) => "check-conjecture",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        corrchan::Exec::Sequential
    } else {
        corrchan::Exec::Parallel
    };
    let result = resolve(cli).and_then(|cmd| match cmd {
        Command::Norm(a) => commands::norm(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Figures(a) => commands::figures(&a, exec),
        Command::Verify(a) => commands::verify(&a, exec),
        Command::CheckConjecture(a) => commands::check_conjecture(&a, exec),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
