//! `entspec sweep` — cover-entropy estimates across a grid of removal
//! probabilities, sharing nmax/samples, with an adjacent-difference
//! column as the continuity diagnostic.

use super::{resolve_out, resolve_seed, resolve_threads, with_thread_opt};
use crate::config::{resolve_budget, Resolver};
use crate::emit::{fmt_f64, header, Csv};
use crate::errors::CliError;
use crate::parse;
use entspec_core::entropy::p_sweep;
use entspec_core::words::RngStream;
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    common: crate::Common,
    /// Block size ℓ of the base subgroup (>= 2).
    #[arg(long)]
    ell: Option<String>,
    /// Probability grid: lo:hi:step (inclusive) or a comma list.
    #[arg(long = "p-grid")]
    p_grid: Option<String>,
    /// Step distribution (srw:K, point:K:WORD, atoms:K:w=p;...).
    #[arg(long)]
    mu: Option<String>,
    /// Walk time of each estimate (>= 1).
    #[arg(long)]
    nmax: Option<String>,
    /// Covers per grid point at 0 < p < 1.
    #[arg(long)]
    samples: Option<String>,
    /// Base RNG seed (required when the grid has interior points).
    #[arg(long)]
    seed: Option<String>,
    /// Output format (csv only).
    #[arg(long)]
    format: Option<String>,
}

pub fn run(args: Args) -> Result<(String, Option<PathBuf>), CliError> {
    let mut r = Resolver::new(args.common.config.as_deref())?;
    let threads = resolve_threads(&mut r, &args.common.threads)?;
    with_thread_opt(threads, move || body(args, r))
}

fn body(args: Args, mut r: Resolver) -> Result<(String, Option<PathBuf>), CliError> {
    let out = resolve_out(&mut r, &args.common.out)?;
    let budget = resolve_budget(&mut r)?;
    let format = r.resolve_or("format", &args.format, "csv")?;
    if format != "csv" {
        return Err(CliError::usage(format!(
            "--format for sweep must be csv, got \"{format}\""
        )));
    }
    let ell: u32 = parse::num("ell", &r.resolve_or("ell", &args.ell, 2u32)?)?;
    let grid = parse::grid("p-grid", &r.require("p-grid", &args.p_grid)?)?;
    let mu = parse::mu_spec("mu", &r.resolve_or("mu", &args.mu, "srw:2")?)?;
    let nmax: usize = parse::num("nmax", &r.require("nmax", &args.nmax)?)?;
    let samples: u64 = parse::num("samples", &r.resolve_or("samples", &args.samples, 32u64)?)?;
    let stochastic = grid.iter().any(|&p| p != 0.0 && p != 1.0);
    let seed = resolve_seed(
        &mut r,
        &args.seed,
        stochastic,
        "the grid has interior points, so cover sampling is stochastic",
    )?;
    r.finish()?;

    let points = p_sweep(
        ell,
        &grid,
        &mu,
        nmax,
        samples,
        &RngStream::new(seed, 0),
        budget,
    )?;

    let mut csv = Csv::new(&[
        "p",
        "estimate",
        "ci",
        "adjacent_diff",
        "nmax",
        "samples",
        "seed",
    ]);
    for (j, pt) in points.iter().enumerate() {
        let diff = if j == 0 {
            String::new()
        } else {
            fmt_f64(pt.estimate.value - points[j - 1].estimate.value)
        };
        csv.row(&[
            fmt_f64(pt.p),
            fmt_f64(pt.estimate.value),
            fmt_f64(pt.estimate.ci_halfwidth),
            diff,
            nmax.to_string(),
            samples.to_string(),
            seed.to_string(),
        ]);
    }
    let content = header("#", "sweep", Some("nats"), r.echo()) + &csv.finish();
    Ok((content, out))
}
