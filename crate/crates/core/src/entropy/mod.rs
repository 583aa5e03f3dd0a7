//! Entropy of coset random walks: exact distributions and increments,
//! Monte Carlo estimators, boundary hitting measures, and divergence bounds.
//!
//! The exact layer pushes the walk's law through the coset transition as a
//! sparse vector over a lazily grown [`crate::schreier::atlas::BallAtlas`];
//! entropies are Shannon entropies of those vectors. The Monte Carlo layer
//! samples trajectories with per-replica [`crate::words::RngStream`]s and
//! merges counts in index order, so every estimate is reproducible
//! bit-for-bit and independent of thread count.

mod bundle;
mod divergence;
mod exact;
mod mc;

pub use bundle::{
    bundle_entropy_curve, bundle_entropy_estimate, bundle_entropy_estimate_mc, p_sweep,
    BundleCurve, SweepPoint,
};
pub use divergence::{kl_between_shadows, kl_on_partition, reverse_pinsker_gap_bound, KlValue};
pub use exact::{
    entropy_increments, exact_coset_distribution, mutual_information, mutual_information_detail,
    MutualInformation,
};
pub use mc::{
    hitting_distribution_mc, kingman_entropy_estimate, plugin_entropy_mc, prefix_phi,
    strip_occupancy, StripStats,
};

use crate::error::{Error, Result};
use crate::stats::KahanSum;
use crate::words::ReducedWord;

/// Exact law of the coset walk at a fixed time, as a sparse sorted map from
/// canonical vertex words to probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetDistribution {
    n: usize,
    entries: Vec<(ReducedWord, f64)>,
}

impl CosetDistribution {
    /// Builds and validates a distribution: entries sorted by word, strictly
    /// positive masses summing to 1 within 1e-10.
    pub fn new(n: usize, mut entries: Vec<(ReducedWord, f64)>) -> Result<Self> {
        entries.retain(|&(_, p)| p != 0.0);
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut sum = KahanSum::new();
        for (w, p) in &entries {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::Internal(format!(
                    "coset distribution has invalid mass {p} at {w}"
                )));
            }
            sum.add(*p);
        }
        let total = sum.value();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Internal(format!(
                "coset distribution mass {total} deviates from 1 by more than 1e-10"
            )));
        }
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Internal(format!(
                    "coset distribution has duplicate vertex {}",
                    pair[0].0
                )));
            }
        }
        Ok(CosetDistribution { n, entries })
    }

    /// The walk time this law belongs to.
    pub fn time(&self) -> usize {
        self.n
    }

    /// Sorted (vertex, mass) pairs.
    pub fn entries(&self) -> &[(ReducedWord, f64)] {
        &self.entries
    }

    /// Mass at one vertex (0 if absent).
    pub fn mass_of(&self, w: &ReducedWord) -> f64 {
        self.entries
            .binary_search_by(|(v, _)| v.cmp(w))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Mass at the root vertex.
    pub fn root_mass(&self) -> f64 {
        self.mass_of(&ReducedWord::empty())
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        crate::words::shannon_entropy(self.entries.iter().map(|&(_, p)| p))
            .expect("validated masses")
    }
}

/// Exact entropy values `H_0..H_nmax` of one walk, with their increments.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyCurve {
    h: Vec<f64>,
}

impl EntropyCurve {
    pub(crate) fn from_values(h: Vec<f64>) -> Self {
        debug_assert!(!h.is_empty());
        EntropyCurve { h }
    }

    /// Largest time on the curve.
    pub fn nmax(&self) -> usize {
        self.h.len() - 1
    }

    /// `H_n` for `n ≤ nmax`.
    pub fn h(&self, n: usize) -> f64 {
        self.h[n]
    }

    /// All values `H_0..H_nmax`.
    pub fn values(&self) -> &[f64] {
        &self.h
    }

    /// Increments `δ_n = H_n − H_{n−1}` for `n = 1..nmax`.
    pub fn increments(&self) -> Vec<f64> {
        self.h.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// The final increment `δ_nmax`, the curve's entropy estimate.
    pub fn last_increment(&self) -> f64 {
        let n = self.h.len();
        self.h[n - 1] - self.h[n - 2]
    }
}

/// How an [`EntropyEstimate`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMethod {
    /// Exact dynamic programming over the coset law (no within-sample
    /// noise; sampling over covers may still contribute a CI).
    ExactDp,
    /// Monte Carlo mean of `−(1/n)·log Pⁿ(root, endpoint)`.
    KingmanMc,
    /// Plug-in entropy of endpoint frequencies with Miller–Madow bias
    /// correction.
    PluginMc,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimateMethod::ExactDp => "exact-dp",
            EstimateMethod::KingmanMc => "kingman-mc",
            EstimateMethod::PluginMc => "plugin-mc",
        })
    }
}

/// A scalar entropy estimate with a 95% confidence halfwidth.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub ci_halfwidth: f64,
    pub method: EstimateMethod,
    pub n_used: usize,
    pub samples_used: u64,
}

/// The sphere-`n` partition of the boundary of a tree-like coset graph:
/// every infinite ray deeper than `n` passes through exactly one sphere
/// vertex, which names its cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowPartition {
    n: usize,
    cells: Vec<ReducedWord>,
}

impl ShadowPartition {
    /// Materializes the partition for an oracle.
    pub fn new(
        oracle: &crate::schreier::LoopOracle,
        n: usize,
        budget_bytes: Option<u64>,
    ) -> Result<Self> {
        let cells = crate::schreier::ball::materialize_sphere(oracle, n, budget_bytes)?;
        Ok(ShadowPartition { n, cells })
    }

    pub fn sphere_radius(&self) -> usize {
        self.n
    }

    /// Sorted cell vertices.
    pub fn cells(&self) -> &[ReducedWord] {
        &self.cells
    }

    /// Index of the cell owning `vertex` (a sphere-`n` word).
    pub fn index_of(&self, vertex: &ReducedWord) -> Option<usize> {
        self.cells.binary_search(vertex).ok()
    }
}

/// Where a [`ShadowMeasure`]'s samples came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShadowProvenance {
    /// Endpoint cells of length-`horizon` coset walks, decided when the
    /// final distance exceeds `n + margin`.
    HittingMc { horizon: usize, margin: usize },
    /// Cells of stabilized length-`t` prefixes of the group walk traced
    /// through the coset graph.
    PrefixPhi { t: usize, margin: usize },
}

/// An empirical measure on a [`ShadowPartition`]: per-cell hit counts over
/// the decided samples, with the undecided fraction reported separately.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowMeasure {
    partition: ShadowPartition,
    counts: Vec<u64>,
    decided: u64,
    samples: u64,
    provenance: ShadowProvenance,
    /// Optional external error bound on the approximation (none when no
    /// computable bound exists).
    pub error_bound: Option<f64>,
}

impl ShadowMeasure {
    pub(crate) fn from_counts(
        partition: ShadowPartition,
        counts: Vec<u64>,
        samples: u64,
        provenance: ShadowProvenance,
    ) -> Self {
        debug_assert_eq!(counts.len(), partition.cells().len());
        let decided = counts.iter().sum();
        ShadowMeasure {
            partition,
            counts,
            decided,
            samples,
            provenance,
            error_bound: None,
        }
    }

    pub fn partition(&self) -> &ShadowPartition {
        &self.partition
    }

    pub fn provenance(&self) -> ShadowProvenance {
        self.provenance
    }

    /// Per-cell raw hit counts (aligned with `partition().cells()`).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of decided samples.
    pub fn decided(&self) -> u64 {
        self.decided
    }

    /// Total samples drawn.
    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Fraction of samples that could not be assigned a cell.
    pub fn undecided_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            1.0 - (self.decided as f64 / self.samples as f64)
        }
    }

    /// Whether more than half the samples were undecided — results should
    /// be treated as unreliable.
    pub fn undecided_warning(&self) -> bool {
        self.undecided_fraction() > 0.5
    }

    /// Cell masses over decided samples; they sum to 1 exactly (up to float
    /// addition) when any sample was decided.
    pub fn masses(&self) -> Vec<f64> {
        if self.decided == 0 {
            return vec![0.0; self.counts.len()];
        }
        let d = self.decided as f64;
        self.counts.iter().map(|&c| c as f64 / d).collect()
    }

    /// Total variation distance to another measure on the same partition.
    pub fn total_variation(&self, other: &ShadowMeasure) -> Result<f64> {
        if self.partition != other.partition {
            return Err(Error::Config(
                "total variation requires identical shadow partitions".into(),
            ));
        }
        Ok(crate::stats::total_variation(
            &self.masses(),
            &other.masses(),
        ))
    }

    /// One-sigma sampling noise for the total variation distance between
    /// this measure and `other`, from per-cell binomial variances.
    pub fn tv_noise_sigma(&self, other: &ShadowMeasure) -> Result<f64> {
        if self.partition != other.partition {
            return Err(Error::Config(
                "total variation requires identical shadow partitions".into(),
            ));
        }
        Ok(crate::stats::tv_noise_sigma(
            &self.masses(),
            &other.masses(),
            self.decided.max(1) as usize,
            other.decided.max(1) as usize,
        ))
    }
}
