//! `entspec ball` — materialize the radius-r ball of a coset graph and
//! export it as DOT (for rendering) or CSV (edge list).

use super::{resolve_out, resolve_threads, with_thread_opt};
use crate::config::{resolve_budget, Resolver};
use crate::emit::header;
use crate::errors::CliError;
use crate::parse;
use entspec_core::schreier::ball::{ball_to_csv, ball_to_dot, materialize_ball};
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    common: crate::Common,
    /// Coset graph: trivial[:K], kl[:ELL], normal[:K[:G]], cover:ELL:P:SEED.
    #[arg(long)]
    oracle: Option<String>,
    /// Ball radius.
    #[arg(long)]
    radius: Option<String>,
    /// Output format: dot or csv.
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
    let oracle = parse::oracle_spec("oracle", &r.require("oracle", &args.oracle)?)?;
    let radius: usize = parse::num("radius", &r.require("radius", &args.radius)?)?;
    let format = r.resolve_or("format", &args.format, "dot")?;
    r.finish()?;

    let ball = materialize_ball(&oracle, radius, budget)?;
    r.record("vertices", ball.vertices.len());
    r.record("self_loops", ball.loops.len());
    let content = match format.as_str() {
        "dot" => header("//", "ball", None, r.echo()) + &ball_to_dot(&ball),
        "csv" => header("#", "ball", None, r.echo()) + &ball_to_csv(&ball),
        other => {
            return Err(CliError::usage(format!(
                "--format for ball must be dot or csv, got \"{other}\""
            )))
        }
    };
    Ok((content, out))
}
