//! Parsers shared by flags and config values: numbers, lists, probability
//! grids, step distributions, loop oracles, and matrix-distribution files.

use crate::errors::CliError;
use entspec_core::lyapunov::{DMatrix, MatrixDistribution};
use entspec_core::schreier::LoopOracle;
use entspec_core::words::{ReducedWord, StepDistribution};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Parses one scalar, naming the offending parameter on failure.
pub fn num<T: FromStr>(key: &str, s: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| CliError::usage(format!("--{key}: cannot parse \"{s}\": {e}")))
}

pub fn f64_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<f64> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| num::<f64>(key, p))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::usage(format!("--{key}: empty list")));
    }
    Ok(items)
}

pub fn usize_list(key: &str, s: &str) -> Result<Vec<usize>, CliError> {
    let items: Vec<usize> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| num::<usize>(key, p))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::usage(format!("--{key}: empty list")));
    }
    Ok(items)
}

/// Snaps away float-accumulation dust (`0.30000000000000004` → `0.3`) so
/// grid points and their echoes stay clean; exact for any 12-decimal grid.
fn snap(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// A probability grid: either `lo:hi:step` (inclusive endpoints, snapped
/// to 12 decimals) or an explicit comma list. Must be strictly increasing
/// within [0, 1].
pub fn grid(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let pts: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!(
                "--{key}: expected lo:hi:step, got \"{s}\""
            )));
        }
        let lo: f64 = num(key, parts[0])?;
        let hi: f64 = num(key, parts[1])?;
        let step: f64 = num(key, parts[2])?;
        if !(step > 0.0) || !step.is_finite() {
            return Err(CliError::usage(format!("--{key}: step must be > 0")));
        }
        if hi < lo {
            return Err(CliError::usage(format!("--{key}: need lo <= hi")));
        }
        let mut out = Vec::new();
        for i in 0..=1_000_000u64 {
            if i == 1_000_000 {
                return Err(CliError::usage(format!(
                    "--{key}: grid has more than a million points"
                )));
            }
            let p = snap(lo + (i as f64) * step);
            if p > hi + 1e-9 * step.max(1.0) {
                break;
            }
            out.push(p.min(hi));
        }
        out
    } else {
        f64_list(key, s)?.into_iter().map(snap).collect()
    };
    if pts.is_empty() {
        return Err(CliError::usage(format!("--{key}: empty grid")));
    }
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            return Err(CliError::usage(format!(
                "--{key}: grid must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if pts[0] < 0.0 || *pts.last().unwrap() > 1.0 {
        return Err(CliError::usage(format!(
            "--{key}: grid points must lie in [0, 1]"
        )));
    }
    Ok(pts)
}

/// A step distribution on reduced words:
/// `srw:K` (uniform on the 2K one-letter steps), `point:K:WORD`, or
/// `atoms:K:w1=p1;w2=p2;...` (words over a..z with A meaning a⁻¹).
pub fn mu_spec(key: &str, s: &str) -> Result<StepDistribution, CliError> {
    let t = s.trim();
    if let Some(rest) = t.strip_prefix("srw:") {
        return StepDistribution::srw(num(key, rest)?).map_err(CliError::from);
    }
    if let Some(rest) = t.strip_prefix("point:") {
        let (k, w) = rest.split_once(':').ok_or_else(|| {
            CliError::usage(format!("--{key}: expected point:K:WORD, got \"{t}\""))
        })?;
        let word: ReducedWord = w.parse()?;
        return StepDistribution::point_mass(num(key, k)?, word).map_err(CliError::from);
    }
    if let Some(rest) = t.strip_prefix("atoms:") {
        let (k, list) = rest.split_once(':').ok_or_else(|| {
            CliError::usage(format!(
                "--{key}: expected atoms:K:w1=p1;w2=p2, got \"{t}\""
            ))
        })?;
        let k: u8 = num(key, k)?;
        let mut atoms = Vec::new();
        for part in list.split(';').filter(|p| !p.trim().is_empty()) {
            let (w, p) = part.split_once('=').ok_or_else(|| {
                CliError::usage(format!("--{key}: atom \"{part}\" is not WORD=PROB"))
            })?;
            atoms.push((w.trim().parse::<ReducedWord>()?, num::<f64>(key, p)?));
        }
        return StepDistribution::new(k, atoms).map_err(CliError::from);
    }
    Err(CliError::usage(format!(
        "--{key}: unknown step distribution \"{t}\" \
         (expected srw:K, point:K:WORD, or atoms:K:w1=p1;w2=p2)"
    )))
}

/// A loop oracle: `trivial[:K]` (free tree), `kl[:ELL]` (index-ℓ
/// two-block subgroup of the rank-2 free group), `normal[:K[:G]]`
/// (normal closure of one generator), or `cover:ELL:P:SEED` (Bernoulli
/// cover with its own seed).
pub fn oracle_spec(key: &str, s: &str) -> Result<LoopOracle, CliError> {
    let t = s.trim();
    let parts: Vec<&str> = t.split(':').collect();
    let arity = |max: usize| -> Result<(), CliError> {
        if parts.len() > max {
            Err(CliError::usage(format!(
                "--{key}: too many fields in oracle \"{t}\""
            )))
        } else {
            Ok(())
        }
    };
    match parts[0] {
        "trivial" => {
            arity(2)?;
            let k: u8 = if parts.len() > 1 { num(key, parts[1])? } else { 2 };
            LoopOracle::trivial(k).map_err(CliError::from)
        }
        "kl" => {
            arity(2)?;
            let ell: u32 = if parts.len() > 1 { num(key, parts[1])? } else { 2 };
            LoopOracle::kl_base(ell).map_err(CliError::from)
        }
        "normal" => {
            arity(3)?;
            let k: u8 = if parts.len() > 1 { num(key, parts[1])? } else { 2 };
            let g: u8 = if parts.len() > 2 { num(key, parts[2])? } else { 1 };
            LoopOracle::normal_closure(k, g).map_err(CliError::from)
        }
        "cover" => {
            arity(4)?;
            if parts.len() != 4 {
                return Err(CliError::usage(format!(
                    "--{key}: cover oracle needs cover:ELL:P:SEED, got \"{t}\""
                )));
            }
            LoopOracle::bernoulli_cover(num(key, parts[1])?, num(key, parts[2])?, num(key, parts[3])?)
                .map_err(CliError::from)
        }
        other => Err(CliError::usage(format!(
            "--{key}: unknown oracle \"{other}\" \
             (expected trivial[:K], kl[:ELL], normal[:K[:G]], cover:ELL:P:SEED)"
        ))),
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct DistFile {
    d: Option<usize>,
    family: Option<String>,
    sigma: Option<f64>,
    #[serde(default)]
    atom: Vec<AtomSpec>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSpec {
    matrix: Vec<Vec<f64>>,
    prob: Option<f64>,
}

/// Loads a matrix-distribution TOML file. Two shapes:
///
/// * `family = "exp-gaussian"` with `d` and `sigma` (or `family =
///   "sanov"`, the four ±2 shear matrices in d = 2);
/// * one or more `[[atom]]` tables, each with a square row-major `matrix`
///   and optional `prob` (omit `prob` on every atom for uniform weights).
///
/// Determinants are normalized to absolute value one by the library.
/// Returns the distribution and a short description for the header echo.
pub fn dist_file(key: &str, path: &Path) -> Result<(MatrixDistribution, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::usage(format!("--{key}: cannot read {}: {e}", path.display()))
    })?;
    let file: DistFile = toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("--{key}: {}: {e}", path.display())))?;
    match file.family.as_deref() {
        Some("exp-gaussian") => {
            if !file.atom.is_empty() {
                return Err(CliError::usage(format!(
                    "--{key}: give either a family or [[atom]] tables, not both"
                )));
            }
            let d = file.d.ok_or_else(|| {
                CliError::usage(format!("--{key}: family \"exp-gaussian\" needs d"))
            })?;
            let sigma = file.sigma.ok_or_else(|| {
                CliError::usage(format!("--{key}: family \"exp-gaussian\" needs sigma"))
            })?;
            let dist = MatrixDistribution::exp_gaussian(d, sigma)?;
            Ok((dist, format!("exp-gaussian(d={d},sigma={sigma})")))
        }
        Some("sanov") => {
            if !file.atom.is_empty() || file.sigma.is_some() {
                return Err(CliError::usage(format!(
                    "--{key}: family \"sanov\" takes no atoms and no sigma"
                )));
            }
            if let Some(d) = file.d {
                if d != 2 {
                    return Err(CliError::usage(format!(
                        "--{key}: family \"sanov\" is 2-dimensional, got d = {d}"
                    )));
                }
            }
            Ok((MatrixDistribution::sanov(), "sanov".to_string()))
        }
        Some(other) => Err(CliError::usage(format!(
            "--{key}: unknown family \"{other}\" (expected exp-gaussian or sanov)"
        ))),
        None => {
            if file.atom.is_empty() {
                return Err(CliError::usage(format!(
                    "--{key}: {} has neither a family nor [[atom]] tables",
                    path.display()
                )));
            }
            if file.sigma.is_some() {
                return Err(CliError::usage(format!(
                    "--{key}: sigma only applies to family = \"exp-gaussian\""
                )));
            }
            let with_prob = file.atom.iter().filter(|a| a.prob.is_some()).count();
            if with_prob != 0 && with_prob != file.atom.len() {
                return Err(CliError::usage(format!(
                    "--{key}: give prob on every atom or on none (uniform)"
                )));
            }
            let uniform = 1.0 / file.atom.len() as f64;
            let mut atoms = Vec::with_capacity(file.atom.len());
            for (i, a) in file.atom.iter().enumerate() {
                let rows = a.matrix.len();
                if rows == 0 || a.matrix.iter().any(|r| r.len() != rows) {
                    return Err(CliError::usage(format!(
                        "--{key}: atom {i} matrix must be square and row-major"
                    )));
                }
                let m = DMatrix::from_fn(rows, rows, |r, c| a.matrix[r][c]);
                atoms.push((m, a.prob.unwrap_or(uniform)));
            }
            if let Some(d) = file.d {
                if d != atoms[0].0.nrows() {
                    return Err(CliError::usage(format!(
                        "--{key}: d = {d} does not match the {}x{} atom matrices",
                        atoms[0].0.nrows(),
                        atoms[0].0.nrows()
                    )));
                }
            }
            let n = atoms.len();
            let dist = MatrixDistribution::finite(atoms)?;
            let desc = format!("finite({n} atoms,d={})", dist.d());
            Ok((dist, desc))
        }
    }
}
