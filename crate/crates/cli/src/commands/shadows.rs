//! `entspec shadows` — boundary shadow measures on a sphere partition by
//! two estimators side by side: hitting Monte Carlo (first sphere crossing
//! of escaping trajectories) and the prefix law (geodesic prefix of long
//! group words), with their total-variation distance per prefix length.

use super::{resolve_out, resolve_seed, resolve_threads, with_thread_opt};
use crate::config::{resolve_budget, Resolver};
use crate::emit::{fmt_f64, header, Csv};
use crate::errors::CliError;
use crate::parse;
use entspec_core::entropy::{hitting_distribution_mc, prefix_phi, ShadowMeasure};
use entspec_core::schreier::LoopOracle;
use entspec_core::words::RngStream;
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    common: crate::Common,
    /// Coset graph; overrides the --ell/--p cover shorthand.
    #[arg(long)]
    oracle: Option<String>,
    /// Block size ℓ for the cover shorthand (default 2).
    #[arg(long)]
    ell: Option<String>,
    /// Loop-removal probability for the cover shorthand.
    #[arg(long)]
    p: Option<String>,
    /// Step distribution (srw:K, point:K:WORD, atoms:K:w=p;...).
    #[arg(long)]
    mu: Option<String>,
    /// Sphere radius carrying the shadow partition (>= 1).
    #[arg(long)]
    sphere: Option<String>,
    /// Comma list of prefix lengths t (> sphere), ascending.
    #[arg(long)]
    t: Option<String>,
    /// Trajectory horizon for the hitting estimator (> sphere + margin).
    #[arg(long)]
    horizon: Option<String>,
    /// Escape margin beyond the sphere for decided samples.
    #[arg(long)]
    margin: Option<String>,
    /// Monte Carlo samples per estimator.
    #[arg(long)]
    samples: Option<String>,
    /// Base RNG seed (always required; also seeds the shorthand cover).
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
            "--format for shadows must be csv, got \"{format}\""
        )));
    }
    let seed = resolve_seed(&mut r, &args.seed, true, "shadow estimation is Monte Carlo")?;
    let oracle = match r.resolve("oracle", &args.oracle)? {
        Some(spec) => {
            // The shorthand keys are unused in this mode; consult them so a
            // config file shared across runs does not trip the typo check.
            let _ = r.resolve("ell", &args.ell)?;
            let _ = r.resolve("p", &args.p)?;
            parse::oracle_spec("oracle", &spec)?
        }
        None => {
            let ell: u32 = parse::num("ell", &r.resolve_or("ell", &args.ell, 2u32)?)?;
            let p: f64 = parse::num("p", &r.require("p", &args.p)?)?;
            r.record("cover_seed", seed);
            LoopOracle::bernoulli_cover(ell, p, seed)?
        }
    };
    let mu = parse::mu_spec("mu", &r.resolve_or("mu", &args.mu, "srw:2")?)?;
    let sphere: usize = parse::num("sphere", &r.require("sphere", &args.sphere)?)?;
    let ts = parse::usize_list("t", &r.require("t", &args.t)?)?;
    for w in ts.windows(2) {
        if w[1] <= w[0] {
            return Err(CliError::usage(
                "--t values must be strictly increasing".to_string(),
            ));
        }
    }
    let margin: usize = parse::num("margin", &r.resolve_or("margin", &args.margin, 8usize)?)?;
    let default_horizon = 256.max(sphere + margin + 1);
    let horizon: usize = parse::num(
        "horizon",
        &r.resolve_or("horizon", &args.horizon, default_horizon)?,
    )?;
    let samples: u64 = parse::num("samples", &r.resolve_or("samples", &args.samples, 8192u64)?)?;

    let hitting = hitting_distribution_mc(
        &oracle,
        &mu,
        sphere,
        horizon,
        margin,
        samples,
        &RngStream::new(seed, 1),
        budget,
    )?;
    let mut prefixes: Vec<(usize, ShadowMeasure, f64, f64)> = Vec::new();
    for (j, &t) in ts.iter().enumerate() {
        let m = prefix_phi(
            &oracle,
            &mu,
            sphere,
            t,
            margin,
            samples,
            &RngStream::new(seed, 2 + j as u64),
            budget,
        )?;
        let tv = m.total_variation(&hitting)?;
        let sigma = m.tv_noise_sigma(&hitting)?;
        r.record(format!("tv_t{t}"), fmt_f64(tv));
        r.record(format!("tv_sigma_t{t}"), fmt_f64(sigma));
        prefixes.push((t, m, tv, sigma));
    }
    r.finish()?;

    let mut csv = Csv::new(&[
        "method",
        "t",
        "vertex",
        "mass",
        "undecided_fraction",
        "tv_to_hitting",
    ]);
    let cells = hitting.partition().cells();
    let uf = fmt_f64(hitting.undecided_fraction());
    for (cell, mass) in cells.iter().zip(hitting.masses()) {
        csv.row(&[
            "hitting-mc".to_string(),
            String::new(),
            cell.to_string(),
            fmt_f64(mass),
            uf.clone(),
            String::new(),
        ]);
    }
    for (t, m, tv, _) in &prefixes {
        let uf = fmt_f64(m.undecided_fraction());
        for (cell, mass) in m.partition().cells().iter().zip(m.masses()) {
            csv.row(&[
                "prefix-phi".to_string(),
                t.to_string(),
                cell.to_string(),
                fmt_f64(mass),
                uf.clone(),
                fmt_f64(*tv),
            ]);
        }
    }
    let content = header("#", "shadows", Some("probability mass"), r.echo()) + &csv.finish();
    Ok((content, out))
}
