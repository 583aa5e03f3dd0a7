//! Block combinatorics of the parabolic subgroups of `SL(d, R)` and the
//! entropy spectrum they generate from a Lyapunov vector.
//!
//! A subset of the `d − 1` simple roots cuts `d` into diagonal blocks; the
//! reduction map removes every isolated root (an isolated root contributes a
//! 2×2 block, the only rank-one factor such a block decomposition can
//! produce). Each subset `I` contributes the closed interval from its own
//! flag entropy to that of its reduction, and the spectrum is the merged
//! union of these intervals plus any isolated points.

use crate::error::{Error, Result};
use crate::stats::kahan_sum;

/// Largest supported matrix dimension for exhaustive subset enumeration.
pub const MAX_FLAG_D: u8 = 16;

/// A subset of the simple roots `{1, …, d−1}` of `SL(d, R)`, stored as a
/// bitset.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootSubset {
    d: u8,
    bits: u32,
}

impl RootSubset {
    fn check_d(d: u8) -> Result<()> {
        if !(2..=MAX_FLAG_D).contains(&d) {
            return Err(Error::Config(format!(
                "matrix dimension must lie in 2..={MAX_FLAG_D}; got {d}"
            )));
        }
        Ok(())
    }

    /// The empty subset (minimal parabolic, full flag variety).
    pub fn empty(d: u8) -> Result<Self> {
        Self::check_d(d)?;
        Ok(RootSubset { d, bits: 0 })
    }

    /// The full set `{1, …, d−1}` (the whole group).
    pub fn full(d: u8) -> Result<Self> {
        Self::check_d(d)?;
        Ok(RootSubset {
            d,
            bits: (1u32 << (d - 1)) - 1,
        })
    }

    /// Builds a subset from explicit members in `1..=d-1`.
    pub fn new(d: u8, members: impl IntoIterator<Item = u8>) -> Result<Self> {
        Self::check_d(d)?;
        let mut bits = 0u32;
        for r in members {
            if r == 0 || r >= d {
                return Err(Error::Config(format!(
                    "root {r} outside the simple roots 1..={} of SL({d})",
                    d - 1
                )));
            }
            bits |= 1 << (r - 1);
        }
        Ok(RootSubset { d, bits })
    }

    fn from_bits(d: u8, bits: u32) -> Self {
        debug_assert_eq!(bits >> (d - 1), 0);
        RootSubset { d, bits }
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    /// Members in increasing order.
    pub fn members(&self) -> Vec<u8> {
        (1..self.d).filter(|&r| self.contains(r)).collect()
    }

    pub fn contains(&self, r: u8) -> bool {
        r >= 1 && r < self.d && (self.bits >> (r - 1)) & 1 == 1
    }

    pub fn len(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Whether every member of `self` is a member of `other`.
    pub fn is_subset_of(&self, other: &RootSubset) -> bool {
        self.d == other.d && self.bits & !other.bits == 0
    }

    /// This subset with root `r` added.
    pub fn with(&self, r: u8) -> Result<Self> {
        if r == 0 || r >= self.d {
            return Err(Error::Config(format!(
                "root {r} outside the simple roots of SL({})",
                self.d
            )));
        }
        Ok(RootSubset {
            d: self.d,
            bits: self.bits | (1 << (r - 1)),
        })
    }

    /// Whether `r` is a member with no neighboring members (a run of
    /// length one).
    pub fn is_isolated(&self, r: u8) -> bool {
        self.contains(r) && !self.contains(r.wrapping_sub(1)) && !self.contains(r + 1)
    }

    /// All `2^(d−1)` subsets for dimension `d`, in bitset order.
    pub fn all_subsets(d: u8) -> Result<impl Iterator<Item = RootSubset>> {
        Self::check_d(d)?;
        let count = 1u32 << (d - 1);
        Ok((0..count).map(move |bits| RootSubset::from_bits(d, bits)))
    }
}

impl std::fmt::Display for RootSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        write!(f, "{{")?;
        for (i, r) in self.members().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}}")
    }
}

impl std::fmt::Debug for RootSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(self, f)
    }
}

/// An ordered partition `d = d_1 + … + d_ℓ` into diagonal block sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    sizes: Vec<u8>,
}

impl BlockPartition {
    pub fn sizes(&self) -> &[u8] {
        &self.sizes
    }

    pub fn d(&self) -> u8 {
        self.sizes.iter().sum()
    }

    /// Ends of the cumulative block ranges `r_1 < r_2 < … = d`.
    pub fn cumulative(&self) -> Vec<u8> {
        let mut acc = 0;
        self.sizes
            .iter()
            .map(|&s| {
                acc += s;
                acc
            })
            .collect()
    }
}

/// The block partition cut by the complement of `subset`: walking the roots
/// in increasing order, each missing root closes a block.
pub fn blocks_of(subset: &RootSubset) -> BlockPartition {
    let d = subset.d();
    let mut sizes = Vec::new();
    let mut start = 0u8;
    for r in 1..d {
        if !subset.contains(r) {
            sizes.push(r - start);
            start = r;
        }
    }
    sizes.push(d - start);
    BlockPartition { sizes }
}

/// The reduction of `subset`: the largest subset of it whose runs all have
/// length at least two, obtained by dropping every isolated member. One
/// pass suffices — removing an isolated member cannot change any other run.
pub fn f_map(subset: &RootSubset) -> RootSubset {
    let mut bits = 0u32;
    for r in 1..subset.d() {
        if subset.contains(r) && !subset.is_isolated(r) {
            bits |= 1 << (r - 1);
        }
    }
    RootSubset::from_bits(subset.d(), bits)
}

/// Definition-level reference for [`f_map`]: enumerate every subset of
/// `subset` with no run of length one and return their union, checking that
/// the union itself has no singleton run. Exponential in `|subset|`; meant
/// for cross-validation at small `d`.
pub fn f_map_bruteforce(subset: &RootSubset) -> Result<RootSubset> {
    if subset.d() > 12 {
        return Err(Error::Config(
            "brute-force reduction is limited to d <= 12".into(),
        ));
    }
    let members = subset.members();
    let mut union_bits = 0u32;
    for mask in 0u32..(1 << members.len()) {
        let mut cand = RootSubset::from_bits(subset.d(), 0);
        for (i, &r) in members.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                cand = cand.with(r)?;
            }
        }
        let has_singleton = (1..subset.d()).any(|r| cand.is_isolated(r));
        if !has_singleton {
            union_bits |= cand.bits;
        }
    }
    let union = RootSubset::from_bits(subset.d(), union_bits);
    for r in 1..subset.d() {
        if union.is_isolated(r) {
            return Err(Error::Internal(format!(
                "reduction union {union} of {subset} has isolated root {r}"
            )));
        }
    }
    Ok(union)
}

fn check_lambda(lambda: &[f64], d: u8) -> Result<()> {
    if lambda.len() != d as usize {
        return Err(Error::Config(format!(
            "need {d} Lyapunov exponents; got {}",
            lambda.len()
        )));
    }
    if lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("Lyapunov exponents must be finite".into()));
    }
    for w in lambda.windows(2) {
        if w[1] > w[0] + 1e-12 {
            return Err(Error::Config(format!(
                "Lyapunov exponents must be sorted non-increasing; {} precedes {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Boundary entropy of the flag variety selected by `subset`, for a sorted
/// Lyapunov vector: the sum of `λ_i − λ_j` over all pairs `i < j` lying in
/// different blocks of `blocks_of(subset)`.
pub fn flag_entropy(lambda: &[f64], subset: &RootSubset) -> Result<f64> {
    check_lambda(lambda, subset.d())?;
    let blocks = blocks_of(subset);
    let mut block_id = vec![0usize; lambda.len()];
    let mut idx = 0usize;
    for (b, &size) in blocks.sizes().iter().enumerate() {
        for _ in 0..size {
            block_id[idx] = b;
            idx += 1;
        }
    }
    let mut terms = Vec::new();
    for i in 0..lambda.len() {
        for j in (i + 1)..lambda.len() {
            if block_id[i] != block_id[j] {
                terms.push(lambda[i] - lambda[j]);
            }
        }
    }
    Ok(kahan_sum(terms))
}

/// A closed interval of entropy values, in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// One subset's contribution to the spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub subset: RootSubset,
    pub blocks: BlockPartition,
    pub reduction: RootSubset,
    /// Flag entropy of `subset` (the interval's lower end).
    pub h_lo: f64,
    /// Flag entropy of `reduction` (the interval's upper end).
    pub h_hi: f64,
}

/// The entropy spectrum of `SL(d, R)` for one Lyapunov vector: all subset
/// rows, the merged disjoint intervals, and the isolated points.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub d: u8,
    pub lambda: Vec<f64>,
    pub rows: Vec<SpectrumRow>,
    pub merged: Vec<Interval>,
    pub points: Vec<f64>,
}

/// Tolerance for merging adjacent closed intervals and for classifying a
/// merged component as a point.
const MERGE_TOL: f64 = 1e-12;

/// Assembles the entropy spectrum: one closed interval
/// `[h(subset), h(reduction)]` per subset of the simple roots, merged into
/// disjoint components; components of zero width are reported as points.
pub fn entropy_spectrum(lambda: &[f64], d: u8) -> Result<SpectrumReport> {
    check_lambda(lambda, d)?;
    let sum = kahan_sum(lambda.iter().copied());
    if sum.abs() > 1e-9 {
        return Err(Error::Config(format!(
            "Lyapunov exponents of a determinant-one product must sum to 0; got {sum:e} \
             (recenter estimated exponents first)"
        )));
    }
    let mut rows = Vec::new();
    for subset in RootSubset::all_subsets(d)? {
        let reduction = f_map(&subset);
        let h_lo = flag_entropy(lambda, &subset)?;
        let h_hi = flag_entropy(lambda, &reduction)?;
        debug_assert!(h_lo <= h_hi + MERGE_TOL, "reduction must not shrink entropy");
        rows.push(SpectrumRow {
            subset,
            blocks: blocks_of(&subset),
            reduction,
            h_lo,
            h_hi,
        });
    }
    let mut intervals: Vec<(f64, f64)> = rows.iter().map(|r| (r.h_lo, r.h_hi)).collect();
    intervals.sort_by(|a, b| a.partial_cmp(b).expect("finite entropies"));
    let mut components: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in intervals {
        match components.last_mut() {
            Some(last) if lo <= last.1 + MERGE_TOL => last.1 = last.1.max(hi),
            _ => components.push((lo, hi)),
        }
    }
    let mut merged = Vec::new();
    let mut points = Vec::new();
    for (lo, hi) in components {
        if hi - lo <= MERGE_TOL {
            points.push(lo);
        } else {
            merged.push(Interval { lo, hi });
        }
    }
    Ok(SpectrumReport {
        d,
        lambda: lambda.to_vec(),
        rows,
        merged,
        points,
    })
}

/// One covering edge of the parabolic poset: `from ⊂ to` differing by the
/// single root `added`; `bold` marks edges where the larger subset gains
/// only a rank-one factor (the added root is isolated in `to`).
#[derive(Clone, Debug, PartialEq)]
pub struct PosetEdge {
    pub from: RootSubset,
    pub to: RootSubset,
    pub added: u8,
    pub bold: bool,
}

/// All covering edges of the subset poset of the simple roots of
/// `SL(d, R)`, with rank-one extensions marked bold.
pub fn poset_edges(d: u8) -> Result<Vec<PosetEdge>> {
    if d > 10 {
        return Err(Error::Config(
            "poset enumeration is limited to d <= 10".into(),
        ));
    }
    let mut edges = Vec::new();
    for from in RootSubset::all_subsets(d)? {
        for r in 1..d {
            if from.contains(r) {
                continue;
            }
            let to = from.with(r)?;
            let bold = to.is_isolated(r);
            edges.push(PosetEdge {
                from,
                to,
                added: r,
                bold,
            });
        }
    }
    Ok(edges)
}

/// Serializes a spectrum report as JSON with stable field order.
pub fn spectrum_to_json(report: &SpectrumReport) -> String {
    use serde_json::{json, Value};
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "I": r.subset.members(),
                "blocks": r.blocks.sizes(),
                "fI": r.reduction.members(),
                "h_lo": r.h_lo,
                "h_hi": r.h_hi,
            })
        })
        .collect();
    let merged: Vec<Value> = report
        .merged
        .iter()
        .map(|iv| json!({"lo": iv.lo, "hi": iv.hi}))
        .collect();
    let doc = json!({
        "d": report.d,
        "lambda": report.lambda,
        "rows": rows,
        "merged": merged,
        "points": report.points,
    });
    serde_json::to_string_pretty(&doc).expect("report serialization is infallible")
}

/// DOT rendering of the parabolic poset: one node per subset, covering
/// edges drawn upward, rank-one extensions in bold.
pub fn poset_to_dot(d: u8) -> Result<String> {
    let edges = poset_edges(d)?;
    let mut out = String::from("graph parabolic_poset {\n  rankdir=BT;\n");
    for s in RootSubset::all_subsets(d)? {
        out.push_str(&format!("  s{} [label=\"{}\"];\n", s.bits, s));
    }
    for e in &edges {
        let style = if e.bold { " [style=bold]" } else { "" };
        out.push_str(&format!("  s{} -- s{}{};\n", e.from.bits, e.to.bits, style));
    }
    out.push_str("}\n");
    Ok(out)
}
