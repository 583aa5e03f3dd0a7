//! `entspec lyapunov` — the Lyapunov spectrum of i.i.d. products from a
//! matrix-distribution file, by QR renormalization over parallel replicas.

use super::{resolve_out, resolve_seed, resolve_threads, with_thread_opt};
use crate::config::Resolver;
use crate::emit::{echo_json, fmt_f64, header, Csv};
use crate::errors::CliError;
use crate::parse;
use entspec_core::lyapunov::{check_sl_constraint, lyapunov_qr};
use entspec_core::stats::kahan_sum;
use entspec_core::words::RngStream;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    common: crate::Common,
    /// Matrix-distribution TOML file (atoms or a named family).
    #[arg(long, value_name = "FILE")]
    dist: Option<String>,
    /// Product steps per replica.
    #[arg(long)]
    steps: Option<String>,
    /// Independent replicas (their spread gives the CI).
    #[arg(long)]
    replicas: Option<String>,
    /// Steps between QR re-factorizations.
    #[arg(long = "qr-period")]
    qr_period: Option<String>,
    /// Discarded initial steps per replica (default: 10% of steps).
    #[arg(long = "burn-in")]
    burn_in: Option<String>,
    /// Base RNG seed (required for stochastic distributions).
    #[arg(long)]
    seed: Option<String>,
    /// Output format: csv or json.
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
    let format = r.resolve_or("format", &args.format, "csv")?;
    let dist_path = r.require("dist", &args.dist)?;
    let (dist, desc) = parse::dist_file("dist", Path::new(&dist_path))?;
    r.record("dist_kind", &desc);
    let steps: u64 = parse::num("steps", &r.require("steps", &args.steps)?)?;
    let replicas: u64 = parse::num("replicas", &r.resolve_or("replicas", &args.replicas, 8u64)?)?;
    let qr_period: u64 =
        parse::num("qr-period", &r.resolve_or("qr-period", &args.qr_period, 1u64)?)?;
    let burn_in: u64 =
        parse::num("burn-in", &r.resolve_or("burn-in", &args.burn_in, steps / 10)?)?;
    let seed = resolve_seed(
        &mut r,
        &args.seed,
        dist.is_stochastic(),
        "sampling a stochastic matrix distribution",
    )?;
    r.finish()?;

    let spec = lyapunov_qr(
        &dist,
        steps,
        qr_period,
        replicas,
        burn_in,
        &RngStream::new(seed, 0),
    )?;
    let sum = kahan_sum(spec.exponents.iter().copied());
    r.record("sum_lambda", fmt_f64(sum));
    r.record("sl_constraint_ok", check_sl_constraint(&spec));

    let content = match format.as_str() {
        "csv" => {
            let mut csv = Csv::new(&["index", "value", "ci"]);
            for (i, (v, ci)) in spec
                .exponents
                .iter()
                .zip(&spec.ci_halfwidths)
                .enumerate()
            {
                csv.row(&[(i + 1).to_string(), fmt_f64(*v), fmt_f64(*ci)]);
            }
            header("#", "lyapunov", Some("nats per step"), r.echo()) + &csv.finish()
        }
        "json" => {
            let v = serde_json::json!({
                "config": echo_json(r.echo()),
                "exponents": spec.exponents,
                "ci_halfwidths": spec.ci_halfwidths,
                "sum": sum,
                "sl_constraint_ok": check_sl_constraint(&spec),
            });
            let mut s = serde_json::to_string_pretty(&v)
                .map_err(|e| CliError::Io(format!("rendering JSON: {e}")))?;
            s.push('\n');
            s
        }
        other => {
            return Err(CliError::usage(format!(
                "--format for lyapunov must be csv or json, got \"{other}\""
            )))
        }
    };
    Ok((content, out))
}
