//! Monte Carlo estimators over coset-walk trajectories: Kingman-style
//! pathwise entropy, plug-in endpoint entropy, boundary hitting measures,
//! prefix-traced boundary measures, and two-sided strip occupancy.
//!
//! Every estimator draws replica `i` from `stream.offset(i)`, computes
//! per-replica results (in parallel when the `parallel` feature is on), and
//! merges them in index order — results are bit-identical for a fixed seed
//! regardless of thread count.

use super::exact::WalkDp;
use super::{
    EntropyEstimate, EstimateMethod, ShadowMeasure, ShadowPartition, ShadowProvenance,
};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::schreier::{LoopOracle, Walker};
use crate::stats::{kahan_sum, mean_ci, Z95};
use crate::words::{ReducedWord, RngStream, StepDistribution};

/// Result of [`strip_occupancy`]: how often a forward and a backward walk
/// exit through different root branches, plus both marginal cell measures
/// over the decided pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct StripStats {
    /// Fraction of decided pairs whose two sphere cells hang under
    /// different root branches.
    pub occupancy: f64,
    /// 95% binomial halfwidth for `occupancy`.
    pub ci_halfwidth: f64,
    /// Decided pairs that occupied a strip.
    pub occupied: u64,
    /// Pairs where both walks escaped past `n + margin`.
    pub decided_pairs: u64,
    /// Total pairs drawn.
    pub samples: u64,
    /// Cell measure of the forward walk over decided pairs.
    pub forward: ShadowMeasure,
    /// Cell measure of the backward (reflected-step) walk over decided pairs.
    pub backward: ShadowMeasure,
}

impl StripStats {
    /// Fraction of pairs that could not be decided.
    pub fn undecided_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            1.0 - (self.decided_pairs as f64 / self.samples as f64)
        }
    }
}

fn check_rank(oracle: &LoopOracle, mu: &StepDistribution) -> Result<()> {
    if mu.k() != oracle.k() {
        return Err(Error::Config(format!(
            "step distribution uses {} generators but the coset graph has {}",
            mu.k(),
            oracle.k()
        )));
    }
    Ok(())
}

/// Runs one coset walk of `steps` draws from `mu` and returns the walker.
fn run_walk<'a>(
    oracle: &'a LoopOracle,
    mu: &StepDistribution,
    steps: usize,
    stream: &RngStream,
    replica: u64,
) -> Walker<'a> {
    let mut rng = stream.offset(replica).rng();
    let mut w = Walker::new(oracle);
    for _ in 0..steps {
        w.step_word(mu.sample(&mut rng));
    }
    w
}

/// Pathwise entropy estimate: the mean of `−(1/n)·ln Pⁿ(root, ξₙ)` over
/// independent length-`n` trajectories, with the exact time-`n` law
/// computed once by dynamic programming.
///
/// Its expectation is exactly `H_n / n`, the Cesàro average of the
/// increments, so it converges to the walk entropy from above as `n` grows.
pub fn kingman_entropy_estimate(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    trajectories: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<EntropyEstimate> {
    check_rank(oracle, mu)?;
    if n == 0 {
        return Err(Error::Config("pathwise estimate needs n >= 1".into()));
    }
    if trajectories < 2 {
        return Err(Error::Config(
            "pathwise estimate needs at least 2 trajectories for a CI".into(),
        ));
    }
    let mut dp = WalkDp::new(oracle, budget_bytes);
    for _ in 0..n {
        dp.step(mu)?;
    }
    let atlas = dp.atlas();
    let masses = dp.masses();
    let values = map_indexed(trajectories as usize, |i| -> Result<f64> {
        let w = run_walk(oracle, mu, n, stream, i as u64);
        // The endpoint has positive exact mass, so its node and the
        // transitions along its geodesic were materialized by the DP.
        let mut node = atlas.root();
        for &l in w.word().letters() {
            node = atlas.try_step(node, l).ok_or_else(|| {
                Error::Internal("trajectory endpoint missing from the exact law's atlas".into())
            })?;
        }
        let mass = masses[node as usize];
        if mass <= 0.0 {
            return Err(Error::Internal(
                "trajectory endpoint carries zero exact mass".into(),
            ));
        }
        Ok(-mass.ln() / n as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (value, ci_halfwidth) = mean_ci(&values);
    Ok(EntropyEstimate {
        value,
        ci_halfwidth,
        method: EstimateMethod::KingmanMc,
        n_used: n,
        samples_used: trajectories,
    })
}

/// Miller–Madow bias-corrected plug-in entropy of a sorted sample of
/// endpoint words: `−Σ (c/N)·ln(c/N) + (K−1)/(2N)` over the `K` distinct
/// values.
fn miller_madow(sorted: &[ReducedWord]) -> f64 {
    let n = sorted.len() as f64;
    let mut terms = Vec::new();
    let mut cells = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let f = (j - i) as f64 / n;
        terms.push(-f * f.ln());
        cells += 1;
        i = j;
    }
    kahan_sum(terms) + (cells as f64 - 1.0) / (2.0 * n)
}

/// Plug-in Monte Carlo entropy of the walk's time-`n` position: empirical
/// endpoint frequencies with Miller–Madow bias correction. The value uses
/// all samples; the CI is the spread of per-batch estimates over up to 20
/// contiguous replica batches.
pub fn plugin_entropy_mc(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    samples: u64,
    stream: &RngStream,
) -> Result<EntropyEstimate> {
    check_rank(oracle, mu)?;
    if samples < 2 {
        return Err(Error::Config(
            "plug-in estimate needs at least 2 samples".into(),
        ));
    }
    let mut endpoints = map_indexed(samples as usize, |i| {
        run_walk(oracle, mu, n, stream, i as u64).word()
    });
    let batches = (samples as usize).min(20);
    let mut batch_values = Vec::with_capacity(batches);
    let base = samples as usize / batches;
    let extra = samples as usize % batches;
    let mut start = 0;
    for b in 0..batches {
        let len = base + usize::from(b < extra);
        let mut chunk = endpoints[start..start + len].to_vec();
        chunk.sort_unstable();
        batch_values.push(miller_madow(&chunk));
        start += len;
    }
    endpoints.sort_unstable();
    let value = miller_madow(&endpoints);
    let (_, ci_halfwidth) = mean_ci(&batch_values);
    Ok(EntropyEstimate {
        value,
        ci_halfwidth,
        method: EstimateMethod::PluginMc,
        n_used: n,
        samples_used: samples,
    })
}

/// Empirical hitting measure on the sphere-`n` boundary cells: each sample
/// walks `horizon` steps and is decided when its final distance exceeds
/// `n + margin`, in which case it lands in the cell of its sphere-`n`
/// ancestor. Undecided samples are discarded and reported, never imputed.
pub fn hitting_distribution_mc(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    horizon: usize,
    margin: usize,
    samples: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<ShadowMeasure> {
    check_rank(oracle, mu)?;
    if n == 0 {
        return Err(Error::Config("hitting measure needs a sphere radius >= 1".into()));
    }
    if horizon <= n + margin {
        return Err(Error::Config(format!(
            "horizon {horizon} must exceed sphere radius {n} plus margin {margin}"
        )));
    }
    let partition = ShadowPartition::new(oracle, n, budget_bytes)?;
    let cells = map_indexed(samples as usize, |i| -> Result<Option<usize>> {
        let w = run_walk(oracle, mu, horizon, stream, i as u64);
        if w.depth() <= n + margin {
            return Ok(None);
        }
        let cell = w.prefix_cell(n).expect("depth checked above");
        let idx = partition.index_of(&cell).ok_or_else(|| {
            Error::Internal(format!("walker reached unknown sphere cell {cell}"))
        })?;
        Ok(Some(idx))
    })
    .into_iter()
    .collect::<Result<Vec<Option<usize>>>>()?;
    let mut counts = vec![0u64; partition.cells().len()];
    for idx in cells.into_iter().flatten() {
        counts[idx] += 1;
    }
    Ok(ShadowMeasure::from_counts(
        partition,
        counts,
        samples,
        ShadowProvenance::HittingMc { horizon, margin },
    ))
}

/// Boundary measure via stabilized prefixes of the *group* walk: each
/// sample runs the free-group walk until its reduced word first reaches
/// length `t + margin` (declared stable), traces the length-`t` prefix
/// through the coset graph, and lands in the cell of that position's
/// sphere-`n` ancestor. Samples whose word never reaches the stable length
/// within an internal step budget, or whose traced prefix stays closer
/// than `n` to the root, are undecided.
pub fn prefix_phi(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    t: usize,
    margin: usize,
    samples: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<ShadowMeasure> {
    check_rank(oracle, mu)?;
    if n == 0 {
        return Err(Error::Config("prefix measure needs a sphere radius >= 1".into()));
    }
    if t <= n {
        return Err(Error::Config(format!(
            "prefix length {t} must exceed sphere radius {n}"
        )));
    }
    let partition = ShadowPartition::new(oracle, n, budget_bytes)?;
    let step_cap = 64 * (t + margin) + 4096;
    let cells = map_indexed(samples as usize, |i| -> Result<Option<usize>> {
        let mut rng = stream.offset(i as u64).rng();
        let mut word = ReducedWord::empty();
        let mut steps = 0usize;
        while word.len() < t + margin {
            if steps >= step_cap {
                return Ok(None);
            }
            for &l in mu.sample(&mut rng).letters() {
                word.push(l);
            }
            steps += 1;
        }
        let prefix = word.prefix(t);
        let mut w = Walker::new(oracle);
        w.step_word(&prefix);
        match w.prefix_cell(n) {
            None => Ok(None),
            Some(cell) => {
                let idx = partition.index_of(&cell).ok_or_else(|| {
                    Error::Internal(format!("prefix trace reached unknown sphere cell {cell}"))
                })?;
                Ok(Some(idx))
            }
        }
    })
    .into_iter()
    .collect::<Result<Vec<Option<usize>>>>()?;
    let mut counts = vec![0u64; partition.cells().len()];
    for idx in cells.into_iter().flatten() {
        counts[idx] += 1;
    }
    Ok(ShadowMeasure::from_counts(
        partition,
        counts,
        samples,
        ShadowProvenance::PrefixPhi { t, margin },
    ))
}

/// Two-sided boundary occupancy: for each sample pair, one walk driven by
/// `mu` and one by its letter-reversed reflection run `horizon` steps; the
/// pair is decided when both final distances exceed `n + margin`, and it
/// occupies a "strip" when the two sphere-`n` cells hang under different
/// root branches (their geodesics start with different letters). Returns
/// the occupancy frequency together with both marginal cell measures over
/// the decided pairs.
pub fn strip_occupancy(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    horizon: usize,
    margin: usize,
    samples: u64,
    stream: &RngStream,
    budget_bytes: Option<u64>,
) -> Result<StripStats> {
    check_rank(oracle, mu)?;
    if n == 0 {
        return Err(Error::Config("strip occupancy needs a sphere radius >= 1".into()));
    }
    if horizon <= n + margin {
        return Err(Error::Config(format!(
            "horizon {horizon} must exceed sphere radius {n} plus margin {margin}"
        )));
    }
    let partition = ShadowPartition::new(oracle, n, budget_bytes)?;
    let reversed = mu.reflected();
    let pairs = map_indexed(samples as usize, |i| -> Result<Option<(usize, usize)>> {
        let fwd = run_walk(oracle, mu, horizon, stream, 2 * i as u64);
        let bwd = run_walk(oracle, &reversed, horizon, stream, 2 * i as u64 + 1);
        if fwd.depth() <= n + margin || bwd.depth() <= n + margin {
            return Ok(None);
        }
        let cf = fwd.prefix_cell(n).expect("depth checked above");
        let cb = bwd.prefix_cell(n).expect("depth checked above");
        let fi = partition
            .index_of(&cf)
            .ok_or_else(|| Error::Internal(format!("unknown forward sphere cell {cf}")))?;
        let bi = partition
            .index_of(&cb)
            .ok_or_else(|| Error::Internal(format!("unknown backward sphere cell {cb}")))?;
        Ok(Some((fi, bi)))
    })
    .into_iter()
    .collect::<Result<Vec<Option<(usize, usize)>>>>()?;

    let mut fwd_counts = vec![0u64; partition.cells().len()];
    let mut bwd_counts = vec![0u64; partition.cells().len()];
    let mut decided = 0u64;
    let mut occupied = 0u64;
    for (fi, bi) in pairs.into_iter().flatten() {
        decided += 1;
        fwd_counts[fi] += 1;
        bwd_counts[bi] += 1;
        let lf = partition.cells()[fi].letters()[0];
        let lb = partition.cells()[bi].letters()[0];
        if lf != lb {
            occupied += 1;
        }
    }
    let occupancy = if decided == 0 {
        0.0
    } else {
        occupied as f64 / decided as f64
    };
    let ci_halfwidth = if decided == 0 {
        0.0
    } else {
        Z95 * (occupancy * (1.0 - occupancy) / decided as f64).sqrt()
    };
    let provenance = ShadowProvenance::HittingMc { horizon, margin };
    Ok(StripStats {
        occupancy,
        ci_halfwidth,
        occupied,
        decided_pairs: decided,
        samples,
        forward: ShadowMeasure::from_counts(
            partition.clone(),
            fwd_counts,
            samples,
            provenance,
        ),
        backward: ShadowMeasure::from_counts(partition, bwd_counts, samples, provenance),
    })
}
