//! Exact coset-walk laws by sparse dynamic programming.
//!
//! The walk's law at time `n` is a sparse probability vector indexed by
//! atlas nodes. One step pushes every massive node through every atom of
//! the step distribution, tracing the atom's letters through the lazily
//! grown atlas — vertices are materialized only as mass reaches them, and
//! no set of length-`n` words is ever enumerated.

use super::{CosetDistribution, EntropyCurve};
use crate::error::{Error, Result};
use crate::schreier::atlas::BallAtlas;
use crate::schreier::LoopOracle;
use crate::stats::KahanSum;
use crate::words::{shannon_entropy, StepDistribution};

/// Sparse law of the walk over a growing atlas.
pub(crate) struct WalkDp<'a> {
    atlas: BallAtlas<'a>,
    masses: Vec<f64>,
    time: usize,
}

impl<'a> WalkDp<'a> {
    pub(crate) fn new(oracle: &'a LoopOracle, budget_bytes: Option<u64>) -> Self {
        let atlas = BallAtlas::new(oracle, budget_bytes);
        WalkDp {
            atlas,
            masses: vec![1.0],
            time: 0,
        }
    }

    pub(crate) fn atlas(&self) -> &BallAtlas<'a> {
        &self.atlas
    }

    pub(crate) fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Restarts the law at a point mass on `node` (keeping the atlas).
    pub(crate) fn reset_to(&mut self, node: u32) {
        self.masses.clear();
        self.masses.resize(self.atlas.node_count(), 0.0);
        self.masses[node as usize] = 1.0;
        self.time = 0;
    }

    /// Advances the law by one step of `mu`.
    pub(crate) fn step(&mut self, mu: &StepDistribution) -> Result<()> {
        let mut next = vec![0.0; self.atlas.node_count()];
        for node in 0..self.masses.len() {
            let q = self.masses[node];
            if q == 0.0 {
                continue;
            }
            for (atom, p) in mu.atoms() {
                let mut v = node as u32;
                for &l in atom.letters() {
                    v = self.atlas.step(v, l)?;
                }
                let vi = v as usize;
                if vi >= next.len() {
                    next.resize(self.atlas.node_count(), 0.0);
                }
                next[vi] += q * p;
            }
        }
        next.resize(self.atlas.node_count(), 0.0);
        self.masses = next;
        self.time += 1;
        Ok(())
    }

    /// Shannon entropy of the current law, in nats.
    pub(crate) fn entropy(&self) -> Result<f64> {
        shannon_entropy(self.masses.iter().copied())
    }

    /// Extracts the current law as a sorted `CosetDistribution`.
    pub(crate) fn distribution(&self) -> Result<CosetDistribution> {
        let mut entries = Vec::new();
        for (node, &q) in self.masses.iter().enumerate() {
            if q > 0.0 {
                entries.push((self.atlas.word(node as u32), q));
            }
        }
        CosetDistribution::new(self.time, entries)
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

/// Exact law of the coset walk at time `n`, by sparse DP over the lazily
/// grown ball atlas.
pub fn exact_coset_distribution(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    budget_bytes: Option<u64>,
) -> Result<CosetDistribution> {
    check_rank(oracle, mu)?;
    let mut dp = WalkDp::new(oracle, budget_bytes);
    for _ in 0..n {
        dp.step(mu)?;
    }
    dp.distribution()
}

/// Exact entropy curve `H_0..H_nmax` of the coset walk.
pub fn entropy_increments(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    nmax: usize,
    budget_bytes: Option<u64>,
) -> Result<EntropyCurve> {
    check_rank(oracle, mu)?;
    let mut dp = WalkDp::new(oracle, budget_bytes);
    let mut h = Vec::with_capacity(nmax + 1);
    h.push(dp.entropy()?);
    for _ in 0..nmax {
        dp.step(mu)?;
        h.push(dp.entropy()?);
    }
    Ok(EntropyCurve::from_values(h))
}

/// Mutual information between the walk's position at time 1 and at time
/// `n`, with both computation routes exposed.
#[derive(Clone, Debug, PartialEq)]
pub struct MutualInformation {
    /// `I(ξ₁, ξₙ)` as the KL divergence of the joint law from the product
    /// of its marginals.
    pub joint_kl: f64,
    /// `H(ξₙ)`.
    pub marginal_entropy: f64,
    /// `H(ξₙ | ξ₁)`.
    pub conditional_entropy: f64,
}

impl MutualInformation {
    /// The chain-rule route `H(ξₙ) − H(ξₙ|ξ₁)`; equals `joint_kl` up to
    /// float roundoff.
    pub fn chain_rule(&self) -> f64 {
        self.marginal_entropy - self.conditional_entropy
    }
}

/// Mutual information `I(ξ₁, ξₙ)` of the coset walk, in nats.
pub fn mutual_information(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    budget_bytes: Option<u64>,
) -> Result<f64> {
    Ok(mutual_information_detail(oracle, mu, n, budget_bytes)?.joint_kl)
}

/// Mutual information with marginal and conditional entropies broken out.
///
/// Computed exactly over one shared atlas: the time-1 law, the time-`n`
/// law, and for every time-1 vertex the conditional time-`n` law of the
/// walk restarted there for `n−1` steps. The joint-KL and chain-rule
/// routes are both derived from these laws.
pub fn mutual_information_detail(
    oracle: &LoopOracle,
    mu: &StepDistribution,
    n: usize,
    budget_bytes: Option<u64>,
) -> Result<MutualInformation> {
    check_rank(oracle, mu)?;
    if n == 0 {
        return Err(Error::Config(
            "mutual information needs a time n >= 1".into(),
        ));
    }
    let mut dp = WalkDp::new(oracle, budget_bytes);
    dp.step(mu)?;
    let first = dp.masses().to_vec();
    for _ in 1..n {
        dp.step(mu)?;
    }
    let marginal = dp.masses().to_vec();
    let marginal_entropy = shannon_entropy(marginal.iter().copied())?;

    let mut joint_kl = KahanSum::new();
    let mut conditional_entropy = KahanSum::new();
    for (v1, &p1) in first.iter().enumerate() {
        if p1 == 0.0 {
            continue;
        }
        dp.reset_to(v1 as u32);
        for _ in 1..n {
            dp.step(mu)?;
        }
        let cond = dp.masses();
        conditional_entropy.add(p1 * shannon_entropy(cond.iter().copied())?);
        // KL of the conditional law against the marginal, weighted by the
        // time-1 mass: sums to the joint-vs-product divergence because the
        // joint density factors as p1 · cond.
        let mut kl_v = KahanSum::new();
        for (u, &c) in cond.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let m = marginal[u];
            debug_assert!(m > 0.0, "conditional mass outside marginal support");
            kl_v.add(c * (c / m).ln());
        }
        joint_kl.add(p1 * kl_v.value());
    }
    Ok(MutualInformation {
        joint_kl: joint_kl.value(),
        marginal_entropy,
        conditional_entropy: conditional_entropy.value(),
    })
}
