//! Reference construction of coset graphs by edge folding.
//!
//! A subgroup given by explicit generator words is turned into its core
//! automaton: trace each generator as a loop at the root, then repeatedly
//! identify states that share an equally-labelled edge. Membership of a word
//! is then "traces a loop at the root". For the subgroups used here —
//! generated by conjugates of basis letters — the folded core is tree-like,
//! and finite balls of the full coset graph are read off by unrolling free
//! tree hair beyond the core.
//!
//! This module is deliberately independent of the closed-form loop rule in
//! [`super::kl_loop_rule`]; the two are cross-validated in tests and in the
//! acceptance suite. Folding enumerates conjugators explicitly, so its cost
//! grows exponentially with the radius; it is a reference and checking tool,
//! not the production path.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::words::{Letter, ReducedWord};

use super::ball::{materialize_ball, trace_step, SchreierBall};
use super::cover::CoverParams;
use super::LoopOracle;

const UNSET: u32 = u32::MAX;

/// Mutable folding workspace: a partial inverse automaton over `2k` signed
/// letters with union-find state identification.
struct Folder {
    stride: usize,
    parent: Vec<u32>,
    size: Vec<u32>,
    trans: Vec<u32>,
    pending: Vec<(u32, u32)>,
}

impl Folder {
    fn new(k: u8) -> Self {
        let mut f = Folder {
            stride: 2 * k as usize,
            parent: Vec::new(),
            size: Vec::new(),
            trans: Vec::new(),
            pending: Vec::new(),
        };
        f.new_state(); // root = 0
        f
    }

    fn new_state(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        self.trans.extend(std::iter::repeat(UNSET).take(self.stride));
        id
    }

    fn dir(&self, l: Letter) -> usize {
        (l.generator() as usize - 1) * 2 + usize::from(!l.is_positive())
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let up = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = up;
            v = up;
        }
        v
    }

    fn get(&mut self, state: u32, d: usize) -> u32 {
        let t = self.trans[state as usize * self.stride + d];
        if t == UNSET {
            UNSET
        } else {
            self.find(t)
        }
    }

    /// Identifies two states and folds until the automaton is deterministic
    /// again.
    fn merge(&mut self, a: u32, b: u32) {
        self.pending.push((a, b));
        while let Some((x, y)) = self.pending.pop() {
            let (mut rx, mut ry) = (self.find(x), self.find(y));
            if rx == ry {
                continue;
            }
            if self.size[rx as usize] < self.size[ry as usize] {
                std::mem::swap(&mut rx, &mut ry);
            }
            self.parent[ry as usize] = rx;
            self.size[rx as usize] += self.size[ry as usize];
            for d in 0..self.stride {
                let ty = self.trans[ry as usize * self.stride + d];
                if ty == UNSET {
                    continue;
                }
                let tx = self.trans[rx as usize * self.stride + d];
                if tx == UNSET {
                    self.trans[rx as usize * self.stride + d] = ty;
                } else {
                    let (fx, fy) = (self.find(tx), self.find(ty));
                    if fx != fy {
                        self.pending.push((fx, fy));
                    }
                }
            }
        }
    }

    /// Ensures an `l`-edge out of `u`, targeting `want` when given (merging
    /// if an edge already exists elsewhere); returns the resolved target.
    fn ensure_edge(&mut self, u: u32, l: Letter, want: Option<u32>) -> u32 {
        let u = self.find(u);
        let d = self.dir(l);
        let dinv = self.dir(l.inverse());
        let existing = self.get(u, d);
        if existing != UNSET {
            if let Some(v) = want {
                let v = self.find(v);
                if v != existing {
                    self.merge(existing, v);
                }
                return self.find(existing);
            }
            return existing;
        }
        let v = match want {
            Some(v) => self.find(v),
            None => self.new_state(),
        };
        // If v already receives an l-edge from some w, identifying u with w
        // keeps the automaton deterministic instead of adding a parallel
        // edge.
        let w = self.get(v, dinv);
        if w != UNSET {
            self.merge(u, w);
            return self.find(v);
        }
        self.trans[u as usize * self.stride + d] = v;
        self.trans[v as usize * self.stride + dinv] = u;
        v
    }

    /// Attaches one generator word as a loop at `at`.
    fn add_loop_at(&mut self, at: u32, word: &ReducedWord) {
        let letters = word.letters();
        if letters.is_empty() {
            return;
        }
        let mut v = self.find(at);
        for &l in &letters[..letters.len() - 1] {
            v = self.ensure_edge(v, l, None);
        }
        let close = self.find(at);
        self.ensure_edge(v, letters[letters.len() - 1], Some(close));
    }

    /// Attaches one generator as a loop at the root.
    fn add_generator_loop(&mut self, word: &ReducedWord) {
        self.add_loop_at(0, word);
    }

    /// Traces `word` from the root, creating missing edges.
    fn trace_from_root(&mut self, word: &ReducedWord) -> u32 {
        let mut v = self.find(0);
        for &l in word.letters() {
            v = self.ensure_edge(v, l, None);
        }
        v
    }

    /// Compacts into a dense deterministic automaton, states renumbered in
    /// breadth-first order from the root.
    fn compact(mut self, k: u8) -> FoldedGraph {
        let root = self.find(0);
        let mut remap: HashMap<u32, u32> = HashMap::new();
        remap.insert(root, 0);
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for d in 0..self.stride {
                let t = self.get(v, d);
                if t != UNSET && !remap.contains_key(&t) {
                    remap.insert(t, order.len() as u32);
                    order.push(t);
                }
            }
        }
        let mut trans = vec![UNSET; order.len() * self.stride];
        for (new_id, &old) in order.iter().enumerate() {
            for d in 0..self.stride {
                let t = self.get(old, d);
                if t != UNSET {
                    trans[new_id * self.stride + d] = remap[&t];
                }
            }
        }
        FoldedGraph {
            k,
            stride: self.stride,
            trans,
        }
    }
}

/// Folded core automaton of a finitely generated subgroup. The root is state
/// 0; a word lies in the subgroup iff it traces a loop at the root.
pub struct FoldedGraph {
    k: u8,
    stride: usize,
    trans: Vec<u32>,
}

impl FoldedGraph {
    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn state_count(&self) -> usize {
        self.trans.len() / self.stride
    }

    fn step(&self, state: u32, l: Letter) -> Option<u32> {
        let d = (l.generator() as usize - 1) * 2 + usize::from(!l.is_positive());
        let t = self.trans[state as usize * self.stride + d];
        if t == UNSET {
            None
        } else {
            Some(t)
        }
    }

    /// Whether `word` belongs to the subgroup.
    pub fn membership(&self, word: &ReducedWord) -> bool {
        let mut v = 0u32;
        for &l in word.letters() {
            match self.step(v, l) {
                Some(t) => v = t,
                None => return false,
            }
        }
        v == 0
    }

    /// Whether the attached generators generate the whole free group: true
    /// iff every basis letter is a member.
    pub fn generates_full_group(&self) -> bool {
        (1..=self.k).all(|g| {
            self.membership(&ReducedWord::from_letters([Letter::new(g, true)]))
        })
    }
}

/// Folds a list of subgroup generator words over `F_k`.
pub fn fold_words(k: u8, words: &[ReducedWord]) -> Result<FoldedGraph> {
    if k == 0 || k > crate::words::MAX_GENERATORS {
        return Err(Error::Config(format!("free rank {k} out of range")));
    }
    for w in words {
        if w.max_generator() > k {
            return Err(Error::Config(format!(
                "generator word {w} uses letters beyond rank {k}"
            )));
        }
    }
    let mut folder = Folder::new(k);
    for w in words {
        folder.add_generator_loop(w);
    }
    Ok(folder.compact(k))
}

/// Reads the radius-`radius` ball of the subgroup's coset graph off the
/// folded core, unrolling loop-free tree hair beyond the core. Errors with
/// `Internal` if the core is not tree-like (never for subgroups generated by
/// conjugates of basis letters).
pub fn extract_ball(folded: &FoldedGraph, radius: usize) -> Result<SchreierBall> {
    struct Item {
        word: ReducedWord,
        node: Option<u32>,
    }
    let k = folded.k;
    let mut items = vec![Item {
        word: ReducedWord::empty(),
        node: Some(0),
    }];
    let mut visited: HashMap<u32, usize> = HashMap::new();
    visited.insert(0, 0);
    let mut edges_seq: Vec<(usize, Letter, usize)> = Vec::new();
    let mut loops_seq: Vec<(usize, u8)> = Vec::new();
    let mut head = 0;
    while head < items.len() {
        let (word, node) = (items[head].word.clone(), items[head].node);
        let depth = word.len();
        let last = word.last();
        // Loops at this vertex (including at the boundary).
        if let Some(nd) = node {
            for g in 1..=k {
                let l = Letter::new(g, true);
                if folded.step(nd, l) == Some(nd) {
                    loops_seq.push((head, g));
                }
            }
        }
        if depth < radius {
            for g in 1..=k {
                for positive in [true, false] {
                    let l = Letter::new(g, positive);
                    if last == Some(l.inverse()) {
                        continue; // tree backtrack
                    }
                    let child_node = match node {
                        Some(nd) => match folded.step(nd, l) {
                            Some(t) if t == nd => continue, // self-loop
                            Some(t) => {
                                if visited.insert(t, items.len()).is_some() {
                                    return Err(Error::Internal(format!(
                                        "folded core is not tree-like near state {t}"
                                    )));
                                }
                                Some(t)
                            }
                            None => None,
                        },
                        None => None,
                    };
                    let mut child_word = word.clone();
                    child_word.push(l);
                    debug_assert_eq!(child_word.len(), depth + 1);
                    edges_seq.push((head, l, items.len()));
                    items.push(Item {
                        word: child_word,
                        node: child_node,
                    });
                }
            }
        }
        head += 1;
    }

    // Renumber in canonical word order.
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&x, &y| items[x].word.cmp(&items[y].word));
    let mut rank = vec![0u32; items.len()];
    for (idx, &seq) in order.iter().enumerate() {
        rank[seq] = idx as u32;
    }
    let vertices: Vec<ReducedWord> = order.iter().map(|&s| items[s].word.clone()).collect();
    let mut edges: Vec<(u32, Letter, u32)> = edges_seq
        .into_iter()
        .map(|(s, l, t)| (rank[s], l, rank[t]))
        .collect();
    edges.sort_unstable_by_key(|&(s, l, t)| (s, l.code(), t));
    let mut loops: Vec<(u32, u8)> = loops_seq.into_iter().map(|(s, g)| (rank[s], g)).collect();
    loops.sort_unstable();
    Ok(SchreierBall {
        k,
        radius,
        vertices,
        edges,
        loops,
    })
}

/// All words in the block subgroup generated by `a^ell` and `b^ell` of
/// length at most `max_len`, including the empty word, sorted
/// length-lexicographically.
pub fn block_subgroup_words(ell: u32, max_len: usize) -> Vec<ReducedWord> {
    let mut out = vec![ReducedWord::empty()];
    let blocks: Vec<ReducedWord> = (1..=2u8)
        .flat_map(|g| {
            [true, false].map(|pos| {
                ReducedWord::from_letters(vec![Letter::new(g, pos); ell as usize])
            })
        })
        .collect();
    let mut stack = vec![(ReducedWord::empty(), usize::MAX)];
    while let Some((w, last_block)) = stack.pop() {
        for (i, b) in blocks.iter().enumerate() {
            // Skip the inverse of the previous block (i^1 flips the sign).
            if last_block != usize::MAX && i == (last_block ^ 1) {
                continue;
            }
            if w.len() + ell as usize > max_len {
                continue;
            }
            let next = crate::words::multiply(&w, b);
            debug_assert_eq!(next.len(), w.len() + ell as usize);
            out.push(next.clone());
            stack.push((next, i));
        }
    }
    out.sort();
    out
}

/// The conjugated-letter generators of the block-and-conjugate family: all
/// `h = x^j y x^(−j)` for `{x, y} = {a, b}` and `0 < j < ell`.
pub fn conjugated_letter_generators(ell: u32) -> Vec<ReducedWord> {
    let mut out = Vec::new();
    for (x, y) in [(1u8, 2u8), (2, 1)] {
        for j in 1..ell {
            let mut w = ReducedWord::empty();
            for _ in 0..j {
                w.push(Letter::new(x, true));
            }
            w.push(Letter::new(y, true));
            for _ in 0..j {
                w.push(Letter::new(x, false));
            }
            out.push(w);
        }
    }
    out.sort();
    out
}

/// Folds the generating set of `K(ell)` truncated to conjugators of length
/// at most `conj_bound`.
pub fn fold_kl_truncated(ell: u32, conj_bound: usize) -> Result<FoldedGraph> {
    if ell == 0 {
        return Err(Error::Config("block length ell must be at least 1".into()));
    }
    let hs = conjugated_letter_generators(ell);
    let mut folder = Folder::new(2);
    for g in block_subgroup_words(ell, conj_bound) {
        // Attaching g·h·g⁻¹ as a loop at the root folds to the same core as
        // attaching h as a loop at the end of the g-path (the g⁻¹ tail folds
        // back onto the g prefix deterministically); the latter avoids a
        // transient chain of |g| dead states per conjugate.
        let v = folder.trace_from_root(&g);
        for h in &hs {
            folder.add_loop_at(v, h);
        }
    }
    Ok(folder.compact(2))
}

/// Edge-tracing operations per folding pass before
/// [`stallings_fold_reference`] gives up; bounds both time and the folder's
/// transient memory on unstable inputs.
const FOLD_COST_CAP: u64 = 100_000_000;

fn fold_cost_estimate(ell: u32, conj_bound: usize) -> u64 {
    let m = conj_bound / ell as usize;
    let mut words: u64 = 1;
    let mut layer: u64 = 4;
    for _ in 0..m {
        words = words.saturating_add(layer);
        layer = layer.saturating_mul(3);
    }
    // Per conjugator: trace |g| ≤ conj_bound letters plus all conjugated
    // letter generators (2(ℓ−1) words of ≤ 2ℓ−1 letters each).
    let per = conj_bound as u64 + 4 * (ell as u64) * (ell as u64);
    words.saturating_mul(per)
}

/// Reference ball of the `K(ell)` coset graph by bounded folding with
/// stabilization doubling: conjugators are enumerated up to a bound, the
/// bound is doubled, and the ball is accepted once two consecutive bounds
/// agree. Errors with `UnstableBall` when the next pass would exceed the
/// internal cost cap.
pub fn stallings_fold_reference(ell: u32, radius: usize) -> Result<SchreierBall> {
    if ell == 0 {
        return Err(Error::Config("block length ell must be at least 1".into()));
    }
    let mut bound = radius + 2 * ell as usize + 1;
    let mut prev: Option<SchreierBall> = None;
    loop {
        for b in [bound, 2 * bound] {
            if fold_cost_estimate(ell, b) > FOLD_COST_CAP {
                return Err(Error::UnstableBall {
                    radius,
                    max_bound: b,
                });
            }
        }
        let b1 = match prev.take() {
            Some(b) => b,
            None => extract_ball(&fold_kl_truncated(ell, bound)?, radius)?,
        };
        let b2 = extract_ball(&fold_kl_truncated(ell, 2 * bound)?, radius)?;
        if b1 == b2 {
            return Ok(b1);
        }
        prev = Some(b2);
        bound *= 2;
    }
}

/// Byte budget for the base-graph balls enumerated while folding cover
/// generators; exceeding it means the requested radius is out of reach for
/// the reference construction, reported as `UnstableBall`.
const COVER_BASE_BUDGET: u64 = 512 * 1024 * 1024;

/// The retained loop-generator words `c·s·c⁻¹` of a Bernoulli cover, for
/// base self-loops whose conjugator `c` has length at most `bound`.
fn retained_cover_generators(params: &CoverParams, bound: usize) -> Result<Vec<ReducedWord>> {
    let base = LoopOracle::kl_base(params.ell)?;
    let ball = materialize_ball(&base, bound, Some(COVER_BASE_BUDGET))?;
    let mut words = Vec::new();
    for &(v, g) in &ball.loops {
        let c = &ball.vertices[v as usize];
        if params.retained_raw(c.letters(), g) {
            let mut w = c.clone();
            w.push(Letter::new(g, true));
            for &l in c.letters().iter().rev() {
                w.push(l.inverse());
            }
            words.push(w);
        }
    }
    Ok(words)
}

/// Reference ball of a Bernoulli cover by explicit folding of the retained
/// generator set, independent of the cover walker: enumerate the base
/// graph's self-loops out to a conjugator bound, keep exactly those the
/// cover's coins retain, fold their conjugate words, and accept the ball
/// once two consecutive bounds agree (same stabilization doubling as
/// [`stallings_fold_reference`]). Errors with `UnstableBall` when the next
/// pass would exceed the internal cost caps.
pub fn cover_fold_reference(params: &CoverParams, radius: usize) -> Result<SchreierBall> {
    if params.ell < 2 {
        return Err(Error::Config(
            "cover folding needs block length ell >= 2".into(),
        ));
    }
    let fold_at = |b: usize| -> Result<SchreierBall> {
        let demote = |e: Error| match e {
            Error::BudgetExceeded { .. } => Error::UnstableBall {
                radius,
                max_bound: b,
            },
            other => other,
        };
        let gens = retained_cover_generators(params, b).map_err(demote)?;
        let cost: u64 = gens.iter().map(|w| w.len() as u64).sum();
        if cost > FOLD_COST_CAP {
            return Err(Error::UnstableBall {
                radius,
                max_bound: b,
            });
        }
        extract_ball(&fold_words(2, &gens)?, radius)
    };
    let mut bound = radius + 2 * params.ell as usize + 1;
    let mut prev: Option<SchreierBall> = None;
    loop {
        let b1 = match prev.take() {
            Some(b) => b,
            None => fold_at(bound)?,
        };
        let b2 = fold_at(2 * bound)?;
        if b1 == b2 {
            return Ok(b1);
        }
        prev = Some(b2);
        bound *= 2;
    }
}

/// Folding-backed reference for the `K(ell)` self-loop predicate: traces
/// `vertex` through a stabilized reference ball and reads the loop off the
/// endpoint. Balls are cached per `ell` and regrown on demand.
pub fn kl_self_loop(ell: u32, vertex: &ReducedWord, generator: u8) -> Result<bool> {
    static CACHE: OnceLock<Mutex<HashMap<u32, SchreierBall>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let needed = vertex.len() + 1;
    let mut guard = cache.lock().expect("reference ball cache");
    let ball = match guard.get(&ell) {
        Some(b) if b.radius >= needed => b,
        _ => {
            let fresh = stallings_fold_reference(ell, needed)?;
            guard.insert(ell, fresh);
            guard.get(&ell).expect("just inserted")
        }
    };
    let mut v = 0u32;
    for &l in vertex.letters() {
        v = trace_step(ball, v, l).ok_or_else(|| {
            Error::Internal("reference ball too small for trace".into())
        })?;
    }
    Ok(ball.has_loop(v, generator))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::ball::{materialize_ball, verify_tree_like};
    use crate::schreier::LoopOracle;
    use std::str::FromStr;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::from_str(s).unwrap()
    }

    #[test]
    fn membership_of_single_conjugate() {
        let folded = fold_words(2, &[w("abA")]).unwrap();
        assert!(folded.membership(&w("abA")));
        assert!(folded.membership(&w("aBA"))); // inverse of the generator
        assert!(folded.membership(&w("abbA"))); // square of the loop: a b b a⁻¹
        assert!(!folded.membership(&w("a")));
        assert!(!folded.membership(&w("b")));
        assert!(!folded.membership(&w("ab")));
        assert!(folded.membership(&w("")));
    }

    #[test]
    fn full_group_detection() {
        assert!(fold_words(2, &[w("a"), w("b")]).unwrap().generates_full_group());
        assert!(fold_words(2, &[w("ab"), w("b")]).unwrap().generates_full_group());
        assert!(!fold_words(2, &[w("abA")]).unwrap().generates_full_group());
        assert!(!fold_words(2, &[w("a")]).unwrap().generates_full_group());
        assert!(fold_words(1, &[w("a")]).unwrap().generates_full_group());
    }

    #[test]
    fn empty_generating_set_gives_free_tree() {
        let folded = fold_words(2, &[]).unwrap();
        assert_eq!(folded.state_count(), 1);
        let ball = extract_ball(&folded, 3).unwrap();
        let tree = materialize_ball(&LoopOracle::trivial(2).unwrap(), 3, None).unwrap();
        assert_eq!(ball, tree);
    }

    #[test]
    fn block_subgroup_enumeration_counts() {
        // Words of length ≤ 2ℓ in <a^ℓ, b^ℓ>: ε, 4 blocks, 4·3 two-block
        // words.
        for ell in [1u32, 2, 3] {
            let words = block_subgroup_words(ell, 2 * ell as usize);
            assert_eq!(words.len(), 1 + 4 + 12, "ell={ell}");
            let longer = block_subgroup_words(ell, 3 * ell as usize);
            assert_eq!(longer.len(), 1 + 4 + 12 + 36, "ell={ell}");
        }
    }

    #[test]
    fn conjugated_letter_generator_lists() {
        assert!(conjugated_letter_generators(1).is_empty());
        let h2 = conjugated_letter_generators(2);
        assert_eq!(h2, vec![w("abA"), w("baB")]);
        let h3 = conjugated_letter_generators(3);
        assert_eq!(h3.len(), 4);
        assert!(h3.contains(&w("aabAA")));
        assert!(h3.contains(&w("bbaBB")));
    }

    #[test]
    fn reference_ball_matches_rule_ball_small_radius() {
        for ell in [1u32, 2, 3] {
            let reference = stallings_fold_reference(ell, 3).unwrap();
            let rule = materialize_ball(&LoopOracle::kl_base(ell).unwrap(), 3, None).unwrap();
            assert_eq!(reference, rule, "ell={ell}");
            assert!(verify_tree_like(&reference));
        }
    }

    #[test]
    fn reference_self_loop_spot_checks() {
        assert!(kl_self_loop(2, &w("a"), 2).unwrap());
        assert!(!kl_self_loop(2, &w("a"), 1).unwrap());
        assert!(!kl_self_loop(2, &w("aa"), 2).unwrap());
        assert!(kl_self_loop(2, &w("aab"), 1).unwrap());
        assert!(kl_self_loop(3, &w("aa"), 2).unwrap());
        assert!(!kl_self_loop(3, &w("aaa"), 2).unwrap());
    }

    #[test]
    fn unstable_signal_when_cost_cap_blocks_folding() {
        match stallings_fold_reference(2, 40) {
            Err(Error::UnstableBall { radius, .. }) => assert_eq!(radius, 40),
            other => panic!("expected UnstableBall, got {other:?}"),
        }
    }

    #[test]
    fn cover_fold_matches_cover_oracle() {
        for (ell, p, seed) in [(2u32, 0.5, 42u64), (2, 0.3, 7), (3, 0.6, 1)] {
            let params = CoverParams { ell, p, seed };
            let reference = cover_fold_reference(&params, 3).unwrap();
            let oracle = LoopOracle::bernoulli_cover(ell, p, seed).unwrap();
            let walked = materialize_ball(&oracle, 3, None).unwrap();
            assert_eq!(reference, walked, "ell={ell} p={p} seed={seed}");
            assert!(verify_tree_like(&reference));
        }
    }

    #[test]
    fn cover_fold_endpoints_are_the_plain_graphs() {
        // p = 0 retains everything: the cover is the base graph.
        let all = CoverParams {
            ell: 2,
            p: 0.0,
            seed: 5,
        };
        let base = materialize_ball(&LoopOracle::kl_base(2).unwrap(), 4, None).unwrap();
        assert_eq!(cover_fold_reference(&all, 4).unwrap(), base);
        // p = 1 removes everything: the cover is the free tree.
        let none = CoverParams {
            ell: 2,
            p: 1.0,
            seed: 5,
        };
        let tree = materialize_ball(&LoopOracle::trivial(2).unwrap(), 4, None).unwrap();
        assert_eq!(cover_fold_reference(&none, 4).unwrap(), tree);
    }
}
