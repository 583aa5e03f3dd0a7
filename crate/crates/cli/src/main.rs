//! `entspec` — deterministic experiments on coset-walk entropy spectra.
//!
//! Six subcommands wrap the `entspec-core` library: `spectrum` (parabolic
//! interval unions from Lyapunov exponents), `free-entropy` (exact entropy
//! curves of coset walks averaged over sampled covers), `sweep` (cover
//! estimates across a removal-probability grid), `ball` (Schreier ball
//! export), `shadows` (boundary shadow measures by two estimators), and
//! `lyapunov` (QR estimation of Lyapunov spectra).
//!
//! Every stochastic run requires an explicit `--seed`; identical command
//! lines (plus config file contents) produce byte-identical outputs. The
//! merged effective configuration is echoed into every output header.
//!
//! Exit codes: 0 success, 2 configuration error, 3 memory-budget error
//! (see `ENTSPEC_BUDGET_MB`), 4 internal error.

mod commands;
mod config;
mod emit;
mod errors;
mod parse;

use clap::{Parser, Subcommand};
use errors::CliError;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "entspec", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy-spectrum report for SL(d,R) from Lyapunov exponents.
    Spectrum(commands::spectrum::Args),
    /// Exact entropy curve of a coset walk, averaged over sampled covers.
    #[command(name = "free-entropy")]
    FreeEntropy(commands::free_entropy::Args),
    /// Cover-entropy estimates across a grid of removal probabilities.
    Sweep(commands::sweep::Args),
    /// Materialize a Schreier ball and export it as DOT or CSV.
    Ball(commands::ball::Args),
    /// Boundary shadow measures: hitting Monte Carlo next to the prefix law.
    Shadows(commands::shadows::Args),
    /// Lyapunov spectrum of i.i.d. matrix products via QR renormalization.
    Lyapunov(commands::lyapunov::Args),
}

/// Flags shared by every subcommand. All value-carrying flags across the
/// CLI are plain strings: values may equally come from the `--config` TOML
/// table, and both sources go through the same parsers so semantics and
/// error messages match exactly. Flags win over config keys.
#[derive(clap::Args, Default)]
struct Common {
    /// TOML table of parameter defaults; command-line flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
    /// Worker threads for parallel estimators (default: library choice).
    #[arg(long, value_name = "N")]
    threads: Option<String>,
}

fn run(cli: Cli) -> Result<(String, Option<PathBuf>), CliError> {
    match cli.command {
        Command::Spectrum(a) => commands::spectrum::run(a),
        Command::FreeEntropy(a) => commands::free_entropy::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Ball(a) => commands::ball::run(a),
        Command::Shadows(a) => commands::shadows::run(a),
        Command::Lyapunov(a) => commands::lyapunov::run(a),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli).and_then(|(content, out)| {
        emit::write_output(out.as_deref(), &content)
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
