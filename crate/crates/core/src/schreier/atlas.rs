//! Lazily grown ball of a tree-like coset graph, with O(1) loop queries.
//!
//! Nodes are created on first visit and addressed by dense `u32` ids; the
//! root is id 0. Each node stores its parent edge and a small per-oracle
//! payload (syllable summary for the base subgroups, cover state for
//! Bernoulli covers), so both self-loop tests and child-state construction
//! are constant-time without re-deriving the vertex word. Transitions are
//! memoized per (node, signed letter) slot, making repeated dynamic
//! programming sweeps over the same ball cheap.

use crate::error::{Error, Result};
use crate::words::{Letter, ReducedWord};

use super::cover::{cover_self_loop, cover_step, CoverState};
use super::LoopOracle;

const UNSET: u32 = u32::MAX;

/// Syllable summary of a canonical vertex for the `K(ell)` loop rule:
/// whether every non-final syllable exponent is divisible by `ell`, plus the
/// final syllable's letter and its exponent mod `ell`.
#[derive(Clone, Copy, Debug)]
struct KlSummary {
    prefix_divisible: bool,
    last_generator: u8,
    exp_mod: u32,
}

impl KlSummary {
    fn root() -> Self {
        KlSummary {
            prefix_divisible: true,
            last_generator: 0, // no syllable yet
            exp_mod: 0,
        }
    }

    /// Summary after appending a non-cancelling letter. Within a syllable all
    /// letters share a sign, so the exponent magnitude always grows by one.
    fn push(self, l: Letter, ell: u32) -> Self {
        let g = l.generator();
        if g == self.last_generator {
            KlSummary {
                exp_mod: (self.exp_mod + 1) % ell,
                ..self
            }
        } else {
            KlSummary {
                prefix_divisible: self.prefix_divisible && self.exp_mod == 0,
                last_generator: g,
                exp_mod: 1 % ell,
            }
        }
    }

    /// The closed-form loop rule, evaluated on the summary.
    fn has_loop(self, generator: u8) -> bool {
        self.last_generator != 0
            && self.prefix_divisible
            && self.exp_mod != 0
            && generator != self.last_generator
    }
}

#[derive(Clone, Debug)]
enum NodeState {
    Plain(KlSummary),
    Cover(Box<CoverState>),
}

struct Node {
    parent: u32,
    letter: Letter, // edge label from parent to this node (root: unused)
    depth: u32,
    state: NodeState,
}

/// Lazily materialized ball of the oracle's coset graph.
pub struct BallAtlas<'a> {
    oracle: &'a LoopOracle,
    stride: usize,
    nodes: Vec<Node>,
    trans: Vec<u32>,
    budget_bytes: Option<u64>,
    used_bytes: u64,
}

impl<'a> BallAtlas<'a> {
    pub fn new(oracle: &'a LoopOracle, budget_bytes: Option<u64>) -> Self {
        let stride = 2 * oracle.k() as usize;
        let root_state = match oracle {
            LoopOracle::BernoulliCover { .. } => NodeState::Cover(Box::new(CoverState::root())),
            _ => NodeState::Plain(KlSummary::root()),
        };
        let mut atlas = BallAtlas {
            oracle,
            stride,
            nodes: Vec::new(),
            trans: Vec::new(),
            budget_bytes: None, // the root itself is never budgeted
            used_bytes: 0,
        };
        atlas
            .push_node(Node {
                parent: UNSET,
                letter: Letter::new(1, true),
                depth: 0,
                state: root_state,
            })
            .expect("unbudgeted push cannot fail");
        atlas.budget_bytes = budget_bytes;
        atlas
    }

    /// The root vertex (empty word).
    pub fn root(&self) -> u32 {
        0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self, node: u32) -> u32 {
        self.nodes[node as usize].depth
    }

    pub fn parent(&self, node: u32) -> Option<u32> {
        if node == 0 {
            None
        } else {
            Some(self.nodes[node as usize].parent)
        }
    }

    /// Edge label from the parent, `None` at the root.
    pub fn parent_letter(&self, node: u32) -> Option<Letter> {
        if node == 0 {
            None
        } else {
            Some(self.nodes[node as usize].letter)
        }
    }

    /// Canonical word of a node, reconstructed along the parent chain.
    pub fn word(&self, node: u32) -> ReducedWord {
        let mut letters = Vec::with_capacity(self.depth(node) as usize);
        let mut v = node;
        while v != 0 {
            let n = &self.nodes[v as usize];
            letters.push(n.letter);
            v = n.parent;
        }
        letters.reverse();
        ReducedWord::from_letters(letters)
    }

    /// Ancestor of `node` at distance `n` from the root, or `None` when the
    /// node is closer than `n`.
    pub fn sphere_ancestor(&self, node: u32, n: u32) -> Option<u32> {
        let mut v = node;
        let d = self.depth(node);
        if d < n {
            return None;
        }
        for _ in 0..(d - n) {
            v = self.nodes[v as usize].parent;
        }
        Some(v)
    }

    /// Whether the node's vertex carries a self-loop labelled `generator`.
    pub fn self_loop_at(&self, node: u32, generator: u8) -> bool {
        let n = &self.nodes[node as usize];
        match (self.oracle, &n.state) {
            (LoopOracle::Trivial { .. }, _) => false,
            (LoopOracle::NormalClosure { generator: g, .. }, _) => generator == *g,
            (LoopOracle::KlBase { .. }, NodeState::Plain(s)) => {
                n.depth > 0 && s.has_loop(generator)
            }
            (LoopOracle::BernoulliCover { params, .. }, NodeState::Cover(st)) => {
                cover_self_loop(params, st, generator)
            }
            _ => unreachable!("node state matches oracle kind by construction"),
        }
    }

    /// Read-only variant of [`BallAtlas::step`]: the node reached by one
    /// group letter, or `None` when it is not yet materialized. Agrees with
    /// `step` wherever both are defined, and never grows the atlas — safe to
    /// call concurrently from shared references.
    pub fn try_step(&self, node: u32, l: Letter) -> Option<u32> {
        let cached = self.trans[node as usize * self.stride + self.dir(l)];
        if cached != UNSET {
            return Some(cached);
        }
        let n = &self.nodes[node as usize];
        if node != 0 && l == n.letter.inverse() {
            return Some(n.parent);
        }
        if self.self_loop_at(node, l.generator()) {
            return Some(node);
        }
        None
    }

    /// The node reached from `node` by one group letter, materializing it if
    /// necessary. Fails only when creating the node would exceed the byte
    /// budget.
    pub fn step(&mut self, node: u32, l: Letter) -> Result<u32> {
        let slot = node as usize * self.stride + self.dir(l);
        let cached = self.trans[slot];
        if cached != UNSET {
            return Ok(cached);
        }
        let target = self.compute_step(node, l)?;
        let forward_slot = node as usize * self.stride + self.dir(l);
        self.trans[forward_slot] = target;
        Ok(target)
    }

    fn compute_step(&mut self, node: u32, l: Letter) -> Result<u32> {
        let n = &self.nodes[node as usize];
        // Backtracking letter: one step toward the root. (Normally already
        // cached at child creation; kept for totality.)
        if node != 0 && l == n.letter.inverse() {
            return Ok(n.parent);
        }
        if self.self_loop_at(node, l.generator()) {
            // A self-loop serves both directions.
            let slot = node as usize * self.stride + self.dir(l.inverse());
            self.trans[slot] = node;
            return Ok(node);
        }
        let state = match (&self.oracle, &self.nodes[node as usize].state) {
            (LoopOracle::KlBase { ell }, NodeState::Plain(s)) => NodeState::Plain(s.push(l, *ell)),
            (_, NodeState::Plain(s)) => NodeState::Plain(*s), // summary unused
            (LoopOracle::BernoulliCover { params, .. }, NodeState::Cover(st)) => {
                NodeState::Cover(Box::new(cover_step(params, st, l)))
            }
            _ => unreachable!("node state matches oracle kind by construction"),
        };
        let depth = self.nodes[node as usize].depth + 1;
        let child = self.push_node(Node {
            parent: node,
            letter: l,
            depth,
            state,
        })?;
        let back_slot = child as usize * self.stride + self.dir(l.inverse());
        self.trans[back_slot] = node;
        Ok(child)
    }

    fn push_node(&mut self, node: Node) -> Result<u32> {
        let cost = self.node_cost(&node.state);
        if let Some(budget) = self.budget_bytes {
            if self.used_bytes + cost > budget {
                return Err(Error::BudgetExceeded {
                    context: "ball atlas growth",
                    needed_mb: (self.used_bytes + cost).div_ceil(1 << 20),
                    budget_mb: budget.div_ceil(1 << 20),
                });
            }
        }
        let id = u32::try_from(self.nodes.len())
            .map_err(|_| Error::Internal("ball atlas exceeded u32 node ids".into()))?;
        self.used_bytes += cost;
        self.nodes.push(node);
        self.trans.extend(std::iter::repeat(UNSET).take(self.stride));
        Ok(id)
    }

    fn node_cost(&self, state: &NodeState) -> u64 {
        let base = (std::mem::size_of::<Node>() + self.stride * 4) as u64;
        match state {
            NodeState::Plain(_) => base,
            NodeState::Cover(st) => {
                base + 64 + st.base.len() as u64 + 48 * st.fiber.len() as u64
            }
        }
    }

    fn dir(&self, l: Letter) -> usize {
        let g = l.generator() as usize;
        debug_assert!(g >= 1 && g <= self.stride / 2);
        (g - 1) * 2 + usize::from(!l.is_positive())
    }

    /// All signed letters of the alphabet, in deterministic order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        let k = self.stride as u8 / 2;
        (1..=k).flat_map(|g| [Letter::new(g, true), Letter::new(g, false)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::canonicalize;
    use crate::words::RngStream;
    use rand::Rng;
    use std::str::FromStr;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::from_str(s).unwrap()
    }

    #[test]
    fn tree_atlas_grows_spheres_of_the_free_group() {
        let o = LoopOracle::trivial(2).unwrap();
        let mut atlas = BallAtlas::new(&o, None);
        // Fully expand to radius 3: sphere sizes 1, 4, 12, 36.
        let mut frontier = vec![atlas.root()];
        let mut sizes = vec![1usize];
        for _ in 0..3 {
            let mut next = Vec::new();
            for &v in &frontier {
                for l in atlas.letters().collect::<Vec<_>>() {
                    let t = atlas.step(v, l).unwrap();
                    if atlas.depth(t) > atlas.depth(v) {
                        next.push(t);
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            sizes.push(next.len());
            frontier = next;
        }
        assert_eq!(sizes, vec![1, 4, 12, 36]);
        assert_eq!(atlas.node_count(), 1 + 4 + 12 + 36);
    }

    #[test]
    fn atlas_words_match_walker_canonical_forms() {
        // Random traces through the atlas and through fresh canonicalization
        // must agree on the endpoint for every oracle family.
        let oracles = vec![
            LoopOracle::trivial(2).unwrap(),
            LoopOracle::normal_closure(2, 1).unwrap(),
            LoopOracle::kl_base(2).unwrap(),
            LoopOracle::kl_base(3).unwrap(),
            LoopOracle::bernoulli_cover(2, 0.5, 99).unwrap(),
        ];
        for o in &oracles {
            let mut atlas = BallAtlas::new(o, None);
            let mut rng = RngStream::new(5, 1).rng();
            let mut node = atlas.root();
            let mut trace = ReducedWord::empty();
            for _ in 0..400 {
                let g = rng.gen_range(1..=2u8);
                let pos = rng.gen_bool(0.5);
                let l = Letter::new(g, pos);
                node = atlas.step(node, l).unwrap();
                trace = multiply_letter(&trace, l);
                let direct = canonicalize(o, &trace);
                assert_eq!(atlas.word(node), direct);
                assert_eq!(atlas.depth(node) as usize, direct.len());
            }
        }

        fn multiply_letter(wd: &ReducedWord, l: Letter) -> ReducedWord {
            let mut out = wd.clone();
            out.push(l);
            out
        }
    }

    #[test]
    fn kl_summary_rule_matches_direct_rule_on_ball() {
        for ell in [2u32, 3, 4] {
            let o = LoopOracle::kl_base(ell).unwrap();
            let mut atlas = BallAtlas::new(&o, None);
            let mut frontier = vec![atlas.root()];
            for _ in 0..6 {
                let mut next = Vec::new();
                for &v in frontier.iter() {
                    for l in atlas.letters().collect::<Vec<_>>() {
                        let t = atlas.step(v, l).unwrap();
                        if atlas.depth(t) > atlas.depth(v) {
                            next.push(t);
                        }
                    }
                }
                next.sort_unstable();
                next.dedup();
                frontier = next;
            }
            for v in 0..atlas.node_count() as u32 {
                let word = atlas.word(v);
                for g in 1..=2u8 {
                    assert_eq!(
                        atlas.self_loop_at(v, g),
                        super::super::kl_loop_rule(word.letters(), ell, g),
                        "ell={ell} vertex {word} generator {g}"
                    );
                }
            }
        }
    }

    #[test]
    fn sphere_ancestor_walks_up() {
        let o = LoopOracle::trivial(2).unwrap();
        let mut atlas = BallAtlas::new(&o, None);
        let mut node = atlas.root();
        for c in "abab".chars() {
            node = atlas.step(node, Letter::from_char(c).unwrap()).unwrap();
        }
        let anc = atlas.sphere_ancestor(node, 2).unwrap();
        assert_eq!(atlas.word(anc), w("ab"));
        assert_eq!(atlas.sphere_ancestor(node, 4), Some(node));
        assert_eq!(atlas.sphere_ancestor(node, 5), None);
        assert_eq!(atlas.sphere_ancestor(node, 0), Some(atlas.root()));
    }

    #[test]
    fn budget_is_enforced() {
        let o = LoopOracle::trivial(2).unwrap();
        let mut atlas = BallAtlas::new(&o, Some(2_000));
        let mut frontier = vec![atlas.root()];
        let mut hit_budget = false;
        'outer: for _ in 0..6 {
            let mut next = Vec::new();
            for &v in &frontier {
                for l in atlas.letters().collect::<Vec<_>>() {
                    match atlas.step(v, l) {
                        Ok(t) => {
                            if atlas.depth(t) > atlas.depth(v) {
                                next.push(t);
                            }
                        }
                        Err(Error::BudgetExceeded { .. }) => {
                            hit_budget = true;
                            break 'outer;
                        }
                        Err(e) => panic!("unexpected error {e}"),
                    }
                }
            }
            frontier = next;
        }
        assert!(hit_budget, "a 2KB budget cannot hold radius-6 tree balls");
    }
}
