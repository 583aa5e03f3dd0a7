//! The six subcommand implementations. Each `run` resolves its parameters
//! (flags over config), executes inside the requested thread pool, and
//! returns the fully rendered output plus the destination path; writing
//! happens once, in `main`, after all parallel work has merged.

pub mod ball;
pub mod free_entropy;
pub mod lyapunov;
pub mod shadows;
pub mod spectrum;
pub mod sweep;

use crate::config::Resolver;
use crate::errors::CliError;
use crate::parse;
use std::path::PathBuf;

/// Resolves `--threads` (0 is rejected; absent means the library picks).
pub(crate) fn resolve_threads(
    r: &mut Resolver,
    flag: &Option<String>,
) -> Result<Option<usize>, CliError> {
    match r.resolve("threads", flag)? {
        None => Ok(None),
        Some(s) => {
            let n: usize = parse::num("threads", &s)?;
            if n == 0 {
                return Err(CliError::usage("--threads must be at least 1".to_string()));
            }
            Ok(Some(n))
        }
    }
}

/// Resolves `--out` (flag or config key; stdout when absent).
pub(crate) fn resolve_out(
    r: &mut Resolver,
    flag: &Option<String>,
) -> Result<Option<PathBuf>, CliError> {
    Ok(r.resolve("out", flag)?.map(PathBuf::from))
}

/// Resolves `--seed`. Stochastic runs must name one explicitly — there is
/// no wall-clock fallback, so outputs stay reproducible. Deterministic
/// runs fall back to 0 (echoed, never consulted materially).
pub(crate) fn resolve_seed(
    r: &mut Resolver,
    flag: &Option<String>,
    required: bool,
    why: &str,
) -> Result<u64, CliError> {
    match r.resolve("seed", flag)? {
        Some(s) => parse::num::<u64>("seed", &s),
        None if required => Err(CliError::usage(format!(
            "--seed is required: {why} (there is no wall-clock default)"
        ))),
        None => {
            r.record("seed", 0);
            Ok(0)
        }
    }
}

/// Runs `f` under the requested thread count (library default when None).
pub(crate) fn with_thread_opt<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> T {
    entspec_core::exec::with_threads(threads, f)
}
