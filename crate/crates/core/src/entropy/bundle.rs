//! Entropy of walks on random Bernoulli covers: sample covers from the
//! invariant family, run the exact (or plug-in) per-cover estimator, and
//! average. The per-cover graph is pinned by a 64-bit seed, so the whole
//! estimate is reproducible from one stream.

use super::exact::entropy_increments;
use super::mc::plugin_entropy_mc;
use super::{EntropyEstimate, EstimateMethod};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::schreier::LoopOracle;
use crate::stats::{batch_means_ci, mean_ci};
use crate::words::{RngStream, StepDistribution};
use rand::Rng;

fn check_bundle_args(p: f64, nmax: usize, samples: u64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Config(format!(
            "loop-removal probability must lie in [0, 1]; got {p}"
        )));
    }
    if nmax == 0 {
        return Err(Error::Config("bundle estimate needs nmax >= 1".into()));
    }
    if samples == 0 {
        return Err(Error::Config("bundle estimate needs at least 1 cover".into()));
    }
    Ok(())
}

/// Runs the exact per-cover DP for every sampled cover and returns the
/// per-cover entropy curves `H_0..H_nmax`. Covers at `p ∈ {0, 1}` are
/// deterministic, so a single cover is computed.
fn cover_curves(
    ell: u32,
    p: f64,
    mu: &StepDistribution,
    nmax: usize,
    samples: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<Vec<Vec<f64>>> {
    let deterministic = p == 0.0 || p == 1.0;
    let covers = if deterministic { 1 } else { samples };
    map_indexed(covers as usize, |i| -> Result<Vec<f64>> {
        let seed = stream.offset(i as u64).rng().gen::<u64>();
        let oracle = LoopOracle::bernoulli_cover(ell, p, seed)?;
        let curve = entropy_increments(&oracle, mu, nmax, budget_bytes)?;
        Ok(curve.values().to_vec())
    })
    .into_iter()
    .collect()
}

fn final_increment_estimate(curves: &[Vec<f64>], nmax: usize) -> EntropyEstimate {
    let values: Vec<f64> = curves
        .iter()
        .map(|h| h[nmax] - h[nmax - 1])
        .collect();
    let (value, ci_halfwidth) = if values.len() == 1 {
        (values[0], 0.0)
    } else {
        batch_means_ci(&values, values.len().min(8))
    };
    EntropyEstimate {
        value,
        ci_halfwidth,
        method: EstimateMethod::ExactDp,
        n_used: nmax,
        samples_used: values.len() as u64,
    }
}

/// Mean final entropy increment over `samples` Bernoulli covers of the
/// two-block coset graph, each computed exactly by per-cover dynamic
/// programming. The CI is a batch-means halfwidth over the cover samples.
///
/// At `p = 0` every loop is retained and at `p = 1` every loop is removed,
/// so the cover is deterministic; a single cover is computed and the CI
/// is exactly zero.
pub fn bundle_entropy_estimate(
    ell: u32,
    p: f64,
    mu: &StepDistribution,
    nmax: usize,
    samples: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<EntropyEstimate> {
    check_bundle_args(p, nmax, samples)?;
    let curves = cover_curves(ell, p, mu, nmax, samples, stream, budget_bytes)?;
    Ok(final_increment_estimate(&curves, nmax))
}

/// The full cover-averaged entropy curve: per-time mean of `H_n` over the
/// sampled covers with batch-means halfwidths, plus the final-increment
/// estimate (identical to [`bundle_entropy_estimate`] for the same stream).
#[derive(Clone, Debug, PartialEq)]
pub struct BundleCurve {
    /// Mean `H_n` over covers, for `n = 0..=nmax`.
    pub mean_h: Vec<f64>,
    /// 95% halfwidth of each `mean_h` entry over the cover samples.
    pub ci_h: Vec<f64>,
    pub estimate: EntropyEstimate,
}

/// Computes [`BundleCurve`] for one cover family; shares seed derivation
/// with [`bundle_entropy_estimate`], so the final estimates agree exactly.
pub fn bundle_entropy_curve(
    ell: u32,
    p: f64,
    mu: &StepDistribution,
    nmax: usize,
    samples: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<BundleCurve> {
    check_bundle_args(p, nmax, samples)?;
    let curves = cover_curves(ell, p, mu, nmax, samples, stream, budget_bytes)?;
    let mut mean_h = Vec::with_capacity(nmax + 1);
    let mut ci_h = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let column: Vec<f64> = curves.iter().map(|h| h[n]).collect();
        let (m, ci) = if column.len() == 1 {
            (column[0], 0.0)
        } else {
            batch_means_ci(&column, column.len().min(8))
        };
        mean_h.push(m);
        ci_h.push(ci);
    }
    Ok(BundleCurve {
        mean_h,
        ci_h,
        estimate: final_increment_estimate(&curves, nmax),
    })
}

/// Plug-in fallback for covers too large for exact dynamic programming:
/// per cover, the final increment is estimated as the difference of two
/// Miller–Madow plug-in entropies at `nmax` and `nmax − 1`, each from
/// `walkers` trajectories. The CI is the spread of per-cover estimates.
pub fn bundle_entropy_estimate_mc(
    ell: u32,
    p: f64,
    mu: &StepDistribution,
    nmax: usize,
    covers: u64,
    walkers: u64,
    stream: &RngStream,
) -> Result<EntropyEstimate> {
    check_bundle_args(p, nmax, covers)?;
    if covers < 2 {
        return Err(Error::Config(
            "plug-in bundle estimate needs at least 2 covers for a CI".into(),
        ));
    }
    if walkers < 2 {
        return Err(Error::Config(
            "plug-in bundle estimate needs at least 2 walkers per cover".into(),
        ));
    }
    // Each cover consumes a contiguous block of stream offsets: one for its
    // seed and `walkers` for each of the two plug-in runs.
    let block = 2 * walkers + 1;
    let values = map_indexed(covers as usize, |i| -> Result<f64> {
        let job = stream.offset(i as u64 * block);
        let seed = job.rng().gen::<u64>();
        let oracle = LoopOracle::bernoulli_cover(ell, p, seed)?;
        let top = plugin_entropy_mc(&oracle, mu, nmax, walkers, &job.offset(1))?;
        let below = plugin_entropy_mc(&oracle, mu, nmax - 1, walkers, &job.offset(1 + walkers))?;
        Ok(top.value - below.value)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (value, ci_halfwidth) = mean_ci(&values);
    Ok(EntropyEstimate {
        value,
        ci_halfwidth,
        method: EstimateMethod::PluginMc,
        n_used: nmax,
        samples_used: covers,
    })
}

/// One grid point of a loop-removal sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub estimate: EntropyEstimate,
}

/// Runs [`bundle_entropy_estimate`] over a grid of removal probabilities,
/// giving each grid point a disjoint block of the seed stream.
pub fn p_sweep(
    ell: u32,
    p_grid: &[f64],
    mu: &StepDistribution,
    nmax: usize,
    samples: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<Vec<SweepPoint>> {
    if p_grid.is_empty() {
        return Err(Error::Config("sweep needs a non-empty p grid".into()));
    }
    p_grid
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let sub = stream.offset(j as u64 * samples);
            let estimate =
                bundle_entropy_estimate(ell, p, mu, nmax, samples, &sub, budget_bytes)?;
            Ok(SweepPoint { p, estimate })
        })
        .collect()
}
