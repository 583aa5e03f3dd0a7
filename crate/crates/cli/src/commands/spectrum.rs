//! `entspec spectrum` — the entropy spectrum of SL(d,R) as a union of
//! closed intervals, from Lyapunov exponents given directly (`--lambda`)
//! or estimated from a matrix distribution (`--dist`).

use super::{resolve_out, resolve_seed, resolve_threads, with_thread_opt};
use crate::config::Resolver;
use crate::emit::{echo_json, fmt_f64, header};
use crate::errors::CliError;
use crate::parse;
use entspec_core::flag::{entropy_spectrum, poset_to_dot, spectrum_to_json};
use entspec_core::lyapunov::lyapunov_qr;
use entspec_core::words::RngStream;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    common: crate::Common,
    /// Matrix dimension d (inferred from --lambda or --dist when omitted).
    #[arg(long)]
    d: Option<String>,
    /// Comma-separated Lyapunov exponents, non-increasing, summing to 0.
    #[arg(long)]
    lambda: Option<String>,
    /// Matrix-distribution TOML file; exponents are estimated first.
    #[arg(long, value_name = "FILE")]
    dist: Option<String>,
    /// Product steps per replica when estimating exponents.
    #[arg(long)]
    steps: Option<String>,
    /// Independent estimation replicas.
    #[arg(long)]
    replicas: Option<String>,
    /// Steps between QR re-factorizations.
    #[arg(long = "qr-period")]
    qr_period: Option<String>,
    /// Discarded initial steps per replica (default: 10% of steps).
    #[arg(long = "burn-in")]
    burn_in: Option<String>,
    /// Base RNG seed (required when estimation is stochastic).
    #[arg(long)]
    seed: Option<String>,
    /// Output format: json (interval report) or dot (bold-edge poset).
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
    let format = r.resolve_or("format", &args.format, "json")?;
    let lambda_s = r.resolve("lambda", &args.lambda)?;
    let dist_s = r.resolve("dist", &args.dist)?;
    let d_s = r.resolve("d", &args.d)?;

    let (lambda, d) = match (lambda_s, dist_s) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                "give exactly one of --lambda and --dist".to_string(),
            ))
        }
        (None, None) => {
            return Err(CliError::usage(
                "give --lambda (exponents) or --dist (estimate them)".to_string(),
            ))
        }
        (Some(ls), None) => {
            let lambda = parse::f64_list("lambda", &ls)?;
            let d: u8 = match &d_s {
                Some(ds) => parse::num("d", ds)?,
                None => u8::try_from(lambda.len()).map_err(|_| {
                    CliError::usage("--lambda has too many entries".to_string())
                })?,
            };
            if usize::from(d) != lambda.len() {
                return Err(CliError::usage(format!(
                    "--d is {d} but --lambda has {} entries",
                    lambda.len()
                )));
            }
            r.record("d", d);
            (lambda, d)
        }
        (None, Some(df)) => {
            let (dist, desc) = parse::dist_file("dist", Path::new(&df))?;
            r.record("dist_kind", &desc);
            let steps: u64 =
                parse::num("steps", &r.resolve_or("steps", &args.steps, 100_000u64)?)?;
            let replicas: u64 =
                parse::num("replicas", &r.resolve_or("replicas", &args.replicas, 8u64)?)?;
            let qr_period: u64 =
                parse::num("qr-period", &r.resolve_or("qr-period", &args.qr_period, 1u64)?)?;
            let burn_in: u64 =
                parse::num("burn-in", &r.resolve_or("burn-in", &args.burn_in, steps / 10)?)?;
            let seed = resolve_seed(
                &mut r,
                &args.seed,
                dist.is_stochastic(),
                "estimating exponents of a stochastic matrix distribution",
            )?;
            let spec = lyapunov_qr(
                &dist,
                steps,
                qr_period,
                replicas,
                burn_in,
                &RngStream::new(seed, 0),
            )?;
            let lambda = spec.recentered();
            let d = u8::try_from(lambda.len())
                .map_err(|_| CliError::usage("distribution dimension too large".to_string()))?;
            if let Some(ds) = &d_s {
                let want: u8 = parse::num("d", ds)?;
                if want != d {
                    return Err(CliError::usage(format!(
                        "--d is {want} but the distribution is {d}-dimensional"
                    )));
                }
            }
            r.record("d", d);
            r.record(
                "lambda_estimated",
                lambda.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","),
            );
            r.record(
                "lambda_ci",
                spec.ci_halfwidths
                    .iter()
                    .map(|x| fmt_f64(*x))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            (lambda, d)
        }
    };
    r.finish()?;

    // Validates λ (sorted, zero-sum) in either output mode.
    let report = entropy_spectrum(&lambda, d)?;
    let content = match format.as_str() {
        "json" => {
            let mut v: serde_json::Value = serde_json::from_str(&spectrum_to_json(&report))
                .map_err(|e| CliError::Io(format!("re-parsing spectrum JSON: {e}")))?;
            v["config"] = echo_json(r.echo());
            let mut s = serde_json::to_string_pretty(&v)
                .map_err(|e| CliError::Io(format!("rendering JSON: {e}")))?;
            s.push('\n');
            s
        }
        "dot" => header("//", "spectrum", None, r.echo()) + &poset_to_dot(d)?,
        other => {
            return Err(CliError::usage(format!(
                "--format for spectrum must be json or dot, got \"{other}\""
            )))
        }
    };
    Ok((content, out))
}
