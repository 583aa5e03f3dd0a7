//! Coset graphs of free-group subgroups, driven by self-loop oracles.
//!
//! Every subgroup handled here has a *tree-like* coset graph: the underlying
//! simple graph is a tree rooted at the subgroup's own coset, and the only
//! cycles are single-edge self-loops. A vertex is identified with the unique
//! geodesic word from the root, so the entire graph is described by one
//! predicate — "does vertex `c` carry a self-loop labelled by generator `s`?"
//! — which is what [`LoopOracle`] answers. Walks, balls, and exact
//! distributions are all built on that predicate.
//!
//! Submodules: [`folding`] is a reference implementation that builds the
//! graph from explicit subgroup generators by edge folding; [`cover`] holds
//! the state machine for loop-erased Bernoulli covers; [`atlas`] grows the
//! reachable ball lazily for dynamic programming; [`ball`] materializes and
//! checks finite balls and exports them.

pub mod atlas;
pub mod ball;
pub mod cover;
pub mod folding;

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::words::{Letter, ReducedWord};

use cover::{cover_self_loop, CoverParams, CoverWalker};

/// Self-loop predicate for a tree-like coset graph over the free group on
/// `k` generators.
///
/// The graph is rooted at the trivial coset (empty word). For a canonical
/// geodesic vertex `c` and a positive generator `s`, `self_loop(c, s)` says
/// whether both `s`- and `s⁻¹`-edges at `c` return to `c`. All other edges
/// move one step toward or away from the root.
pub enum LoopOracle {
    /// No loops anywhere: the coset graph is the `2k`-regular tree.
    Trivial { k: u8 },
    /// Loops labelled `generator` at every vertex: the coset graph of the
    /// normal closure of that generator.
    NormalClosure { k: u8, generator: u8 },
    /// The two-generator family `K(ell)`: the subgroup generated by all
    /// conjugates `g·h·g⁻¹` with `g` ranging over words in `a^ell, b^ell`
    /// and `h` over `a^k b a^(−k)`, `b^k a b^(−k)` for `0 < k < ell`.
    /// Loops are decided by a closed-form syllable rule (see
    /// [`kl_loop_rule`]), cross-validated against [`folding`].
    KlBase { ell: u32 },
    /// Bernoulli cover of `K(ell)`: each base self-loop is kept or removed
    /// by an independent coin of removal probability `p`, and the cover
    /// walks the resulting loop-erased graph. Loop queries replay the word
    /// through [`cover::CoverWalker`]; results are memoized.
    BernoulliCover {
        params: CoverParams,
        memo: RwLock<HashMap<(ReducedWord, u8), bool>>,
    },
}

impl LoopOracle {
    /// Loop-free oracle on `k` generators.
    pub fn trivial(k: u8) -> Result<Self> {
        check_rank(k)?;
        Ok(LoopOracle::Trivial { k })
    }

    /// Normal closure of one generator (`1..=k`) in the free group on `k`.
    pub fn normal_closure(k: u8, generator: u8) -> Result<Self> {
        check_rank(k)?;
        if generator == 0 || generator > k {
            return Err(Error::Config(format!(
                "normal-closure generator {generator} out of range 1..={k}"
            )));
        }
        Ok(LoopOracle::NormalClosure { k, generator })
    }

    /// Base subgroup `K(ell)` of the free group on two generators.
    /// `ell = 1` yields the trivial subgroup (no loops at all).
    pub fn kl_base(ell: u32) -> Result<Self> {
        check_ell(ell)?;
        Ok(LoopOracle::KlBase { ell })
    }

    /// Bernoulli cover of `K(ell)` with removal probability `p`, coins
    /// derived deterministically from `seed`.
    pub fn bernoulli_cover(ell: u32, p: f64, seed: u64) -> Result<Self> {
        check_ell(ell)?;
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::Config(format!(
                "cover removal probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(LoopOracle::BernoulliCover {
            params: CoverParams { ell, p, seed },
            memo: RwLock::new(HashMap::new()),
        })
    }

    /// Number of free generators of the ambient group.
    pub fn k(&self) -> u8 {
        match self {
            LoopOracle::Trivial { k } => *k,
            LoopOracle::NormalClosure { k, .. } => *k,
            LoopOracle::KlBase { .. } | LoopOracle::BernoulliCover { .. } => 2,
        }
    }

    /// Whether the canonical vertex `vertex` carries a self-loop labelled by
    /// the positive generator `generator`.
    ///
    /// `vertex` must be a canonical geodesic word for this graph (for the
    /// tree and normal closures every reduced word without, respectively any,
    /// loop letters is canonical; for `K(ell)` and its covers canonical words
    /// are exactly those produced by [`canonicalize`]).
    pub fn self_loop(&self, vertex: &ReducedWord, generator: u8) -> bool {
        debug_assert!(generator >= 1 && generator <= self.k());
        match self {
            LoopOracle::Trivial { .. } => false,
            LoopOracle::NormalClosure { generator: g, .. } => generator == *g,
            LoopOracle::KlBase { ell } => kl_loop_rule(vertex.letters(), *ell, generator),
            LoopOracle::BernoulliCover { params, memo } => {
                let key = (vertex.clone(), generator);
                if let Some(&hit) = memo.read().expect("memo lock").get(&key) {
                    return hit;
                }
                // Trace the word through the cover with the full one-letter
                // group action; for canonical cover words the endpoint is the
                // vertex itself.
                let mut state = cover::CoverState::root();
                for &l in vertex.letters() {
                    state = cover::cover_step(params, &state, l);
                }
                let answer = cover_self_loop(params, &state, generator);
                // Idempotent insert: concurrent computations agree, so a
                // racing writer stores the same value.
                memo.write().expect("memo lock").insert(key, answer);
                answer
            }
        }
    }
}

fn check_rank(k: u8) -> Result<()> {
    if k == 0 || k > crate::words::MAX_GENERATORS {
        return Err(Error::Config(format!(
            "free rank {k} out of range 1..={}",
            crate::words::MAX_GENERATORS
        )));
    }
    Ok(())
}

fn check_ell(ell: u32) -> Result<()> {
    if ell == 0 {
        return Err(Error::Config("block length ell must be at least 1".into()));
    }
    Ok(())
}

/// Closed-form self-loop rule for `K(ell)` on two generators.
///
/// Writing the canonical vertex as syllables `x1^{e1} x2^{e2} … xm^{em}`
/// (adjacent syllables use different letters), the vertex carries loops
/// labelled `generator` if and only if
///
/// * the word is nonempty,
/// * every non-final exponent `e1..e_{m−1}` is divisible by `ell`,
/// * the final exponent `em` is **not** divisible by `ell`, and
/// * `generator` differs from the final syllable's letter.
///
/// Equivalently: the vertex is `g·x^j` with `g` a word in `a^ell, b^ell`,
/// `0 < j mod ell`, and the loop letter is the other generator — exactly the
/// conjugators appearing in the subgroup's generating set. The rule is
/// cross-checked exhaustively against [`folding::stallings_fold_reference`]
/// in the test suite.
pub fn kl_loop_rule(letters: &[Letter], ell: u32, generator: u8) -> bool {
    if letters.is_empty() {
        return false;
    }
    let ell = ell as u64;
    let mut last_gen = letters[0].generator();
    let mut run: u64 = 0;
    for &l in letters {
        let g = l.generator();
        if g == last_gen {
            run += 1;
        } else {
            if run % ell != 0 {
                return false; // non-final syllable with bad exponent
            }
            last_gen = g;
            run = 1;
        }
    }
    run % ell != 0 && generator != last_gen
}

/// Incremental walker through a tree-like coset graph.
///
/// Feeding group letters one at a time maintains the canonical geodesic word
/// of the current vertex in amortized O(1) stack operations per step (plus a
/// syllable scan for loop queries): a letter cancelling the last edge pops
/// it, a letter matching a self-loop is dropped, anything else is pushed.
/// Cancellation and loops never compete: a loop letter at the parent that
/// would cancel was already dropped on the way down.
pub struct Walker<'a> {
    oracle: &'a LoopOracle,
    letters: Vec<Letter>,
    cover: Option<CoverWalker>,
}

impl<'a> Walker<'a> {
    /// Starts at the root vertex.
    pub fn new(oracle: &'a LoopOracle) -> Self {
        let cover = match oracle {
            LoopOracle::BernoulliCover { params, .. } => Some(CoverWalker::new(params.clone())),
            _ => None,
        };
        Walker {
            oracle,
            letters: Vec::new(),
            cover,
        }
    }

    /// Applies one group letter.
    pub fn step(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
            if let Some(c) = &mut self.cover {
                c.undo_step();
            }
            return;
        }
        if self.is_loop(l.generator()) {
            return;
        }
        self.letters.push(l);
        if let Some(c) = &mut self.cover {
            c.apply(l);
        }
    }

    /// Applies all letters of a reduced word in order.
    pub fn step_word(&mut self, w: &ReducedWord) {
        for &l in w.letters() {
            self.step(l);
        }
    }

    fn is_loop(&self, generator: u8) -> bool {
        match self.oracle {
            LoopOracle::Trivial { .. } => false,
            LoopOracle::NormalClosure { generator: g, .. } => generator == *g,
            LoopOracle::KlBase { ell } => kl_loop_rule(&self.letters, *ell, generator),
            LoopOracle::BernoulliCover { params, .. } => {
                let c = self.cover.as_ref().expect("cover walker present");
                cover_self_loop(params, c.state(), generator)
            }
        }
    }

    /// Distance from the root.
    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    /// Canonical word of the current vertex.
    pub fn word(&self) -> ReducedWord {
        ReducedWord::from_letters(self.letters.clone())
    }

    /// The sphere-`n` ancestor on the geodesic to the current vertex, or
    /// `None` when the vertex is closer than `n` to the root.
    pub fn prefix_cell(&self, n: usize) -> Option<ReducedWord> {
        if self.letters.len() < n {
            return None;
        }
        Some(ReducedWord::from_letters(self.letters[..n].to_vec()))
    }
}

/// Canonical geodesic representative of the coset reached by tracing `word`
/// from the root of the oracle's graph.
pub fn canonicalize(oracle: &LoopOracle, word: &ReducedWord) -> ReducedWord {
    let mut w = Walker::new(oracle);
    w.step_word(word);
    w.word()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::from_str(s).expect("valid word literal")
    }

    #[test]
    fn trivial_oracle_never_loops() {
        let o = LoopOracle::trivial(2).unwrap();
        for v in ["", "a", "ab", "BAba"] {
            for g in 1..=2 {
                assert!(!o.self_loop(&w(v), g));
            }
        }
    }

    #[test]
    fn normal_closure_loops_everywhere_on_its_generator() {
        let o = LoopOracle::normal_closure(2, 2).unwrap();
        assert!(o.self_loop(&w(""), 2));
        assert!(o.self_loop(&w("aaA"), 2)); // "aa" canonically
        assert!(!o.self_loop(&w("a"), 1));
        // Canonical form drops loop letters entirely: b-letters vanish.
        assert_eq!(canonicalize(&o, &w("abAb")), w("aA"));
        assert_eq!(canonicalize(&o, &w("aabaa")), w("aaaa"));
    }

    #[test]
    fn normal_closure_graph_is_a_line_for_rank_one_quotient() {
        // Killing b leaves the coset graph of <<b>> in F2 looking like the
        // integer line in the a-direction with a b-loop at every vertex.
        let o = LoopOracle::normal_closure(2, 2).unwrap();
        assert_eq!(canonicalize(&o, &w("babab")), w("aa"));
        assert_eq!(canonicalize(&o, &w("BaBaB")), w("aa"));
        assert_eq!(canonicalize(&o, &w("bAb")), w("A"));
    }

    #[test]
    fn kl_rule_matches_hand_cases_ell_2() {
        // Loops at g·x^j with g in <a², b²> and j odd, labelled by the other
        // letter.
        let cases = [
            ("", 1, false),
            ("", 2, false),
            ("a", 1, false),
            ("a", 2, true),
            ("A", 2, true),
            ("aa", 1, false),
            ("aa", 2, false),
            ("aab", 1, true),
            ("aab", 2, false),
            ("ab", 1, false),
            ("ab", 2, false), // non-final exponent 1 not divisible
            ("bba", 2, true),
            ("bbA", 2, true),
            ("aabbab", 1, false), // non-final syllable a^1 breaks divisibility
            ("aabba", 2, true),
            ("aabbaab", 1, true), // a²b²a²b: prefix exponents all even
            ("baab", 1, false),   // first syllable b^1 bad
        ];
        for (v, g, expect) in cases {
            assert_eq!(
                kl_loop_rule(w(v).letters(), 2, g),
                expect,
                "vertex {v:?} generator {g}"
            );
        }
    }

    #[test]
    fn kl_rule_matches_hand_cases_ell_3() {
        let cases = [
            ("a", 2, true),
            ("aa", 2, true),
            ("aaa", 2, false),
            ("aaab", 1, true),
            ("aab", 1, false),
            ("AAAb", 1, true),
            ("AA", 2, true),
        ];
        for (v, g, expect) in cases {
            assert_eq!(
                kl_loop_rule(w(v).letters(), 3, g),
                expect,
                "vertex {v:?} generator {g}"
            );
        }
    }

    #[test]
    fn ell_one_has_no_loops() {
        let o = LoopOracle::kl_base(1).unwrap();
        for v in ["", "a", "ab", "bbA"] {
            for g in 1..=2 {
                assert!(!o.self_loop(&w(v), g));
            }
        }
    }

    #[test]
    fn canonicalize_drops_loops_and_backtracks() {
        let o = LoopOracle::kl_base(2).unwrap();
        // At vertex "a" the letter b is a loop: ab ~ a.
        assert_eq!(canonicalize(&o, &w("ab")), w("a"));
        assert_eq!(canonicalize(&o, &w("aB")), w("a"));
        // Loop letters inside a longer trace: both b's loop at "a", then the
        // final a extends: abba ~ aa.
        assert_eq!(canonicalize(&o, &w("abba")), w("aa"));
        // A genuinely canonical length-4 vertex survives unchanged: at "aa"
        // the letter b is a tree edge (exponent 2 is divisible), and at
        // "aab" the letter b extends the final syllable.
        assert_eq!(canonicalize(&o, &w("aabb")), w("aabb"));
        // The subgroup generator a·b·a⁻¹ (h with k=1) traces a loop at the
        // root: a, then b loops at "a", then a⁻¹ cancels back to ε.
        assert_eq!(canonicalize(&o, &w("abA")), w(""));
        // A conjugated generator a²·(aba⁻¹)·a⁻² = a³ b a⁻³ also returns to
        // the root: the b-letter loops at the canonical vertex a³.
        assert_eq!(canonicalize(&o, &w("aaabAAA")), w(""));
    }

    #[test]
    fn walker_depth_tracks_canonical_length() {
        let o = LoopOracle::kl_base(2).unwrap();
        let mut walker = Walker::new(&o);
        walker.step_word(&w("aabb"));
        assert_eq!(walker.depth(), 4);
        assert_eq!(walker.word(), w("aabb"));
        assert_eq!(walker.prefix_cell(2), Some(w("aa")));
        assert_eq!(walker.prefix_cell(5), None);
    }

    #[test]
    fn cover_oracle_memo_agrees_with_direct_walk() {
        let o = LoopOracle::bernoulli_cover(2, 0.5, 12345).unwrap();
        let vs = ["a", "b", "aab", "bba", "aabba"];
        let query_all = |oracle: &LoopOracle| -> Vec<bool> {
            vs.iter()
                .flat_map(|v| (1..=2).map(|g| oracle.self_loop(&w(v), g)).collect::<Vec<_>>())
                .collect()
        };
        assert_eq!(query_all(&o), query_all(&o));
    }

    #[test]
    fn cover_extremes_match_base_and_tree() {
        let base = LoopOracle::kl_base(2).unwrap();
        let keep_all = LoopOracle::bernoulli_cover(2, 0.0, 7).unwrap();
        let drop_all = LoopOracle::bernoulli_cover(2, 1.0, 7).unwrap();
        // All of these are canonical vertices of the base graph (and of the
        // p=0 cover, which coincides with it).
        for v in ["", "a", "A", "aa", "aab", "bba", "aabba", "aabb"] {
            for g in 1..=2 {
                assert_eq!(
                    keep_all.self_loop(&w(v), g),
                    base.self_loop(&w(v), g),
                    "p=0 keeps every loop ({v:?}, {g})"
                );
                assert!(!drop_all.self_loop(&w(v), g), "p=1 removes every loop");
            }
        }
    }

    #[test]
    fn construction_validation() {
        assert!(LoopOracle::trivial(0).is_err());
        assert!(LoopOracle::normal_closure(2, 0).is_err());
        assert!(LoopOracle::normal_closure(2, 3).is_err());
        assert!(LoopOracle::kl_base(0).is_err());
        assert!(LoopOracle::bernoulli_cover(2, 1.5, 0).is_err());
        assert!(LoopOracle::bernoulli_cover(2, f64::NAN, 0).is_err());
    }
}
