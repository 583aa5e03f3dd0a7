//! Loop-erased Bernoulli covers of the base graphs `K(ell)`.
//!
//! The base coset graph of `K(ell)` is a tree with a family of self-loops.
//! A cover instance keeps each loop independently with probability `1 − p`
//! (an exact deterministic coin derived from `seed` and the loop's
//! identity) and unwinds the removed loops: walking a removed loop letter
//! moves to a new sheet instead of staying put. The resulting graph is the
//! coset graph of the subgroup generated by the *retained* loop words
//! `c·s·c⁻¹`, and is again tree-like.
//!
//! A cover vertex is addressed by a [`CoverState`]: the base vertex it
//! projects to, plus a reduced word in the removed loops that records which
//! sheet the walk is on. Because the retained loop words generate a free
//! factor complementary to the removed ones, stripping *leading retained
//! letters* from the sheet word yields a well-defined transversal: two
//! states describe the same cover vertex iff they agree after stripping.

use crate::words::{Letter, ReducedWord};

use super::kl_loop_rule;

/// Parameters identifying one Bernoulli cover: base block length, removal
/// probability, and the seed all loop coins derive from.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverParams {
    pub ell: u32,
    pub p: f64,
    pub seed: u64,
}

impl CoverParams {
    /// Whether the base self-loop `id` survives in this cover.
    pub fn retained(&self, id: &LoopId) -> bool {
        self.retained_raw(id.base_vertex.letters(), id.generator)
    }

    /// Same coin, addressed by raw letters (avoids an allocation).
    pub fn retained_raw(&self, base_letters: &[Letter], generator: u8) -> bool {
        if self.p <= 0.0 {
            return true;
        }
        if self.p >= 1.0 {
            return false;
        }
        let h = stable_coin(self.seed, base_letters, generator);
        // Uniform in [0,1) from the top 53 bits; removed iff u < p.
        let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u >= self.p
    }
}

/// Deterministic, platform-independent hash of (seed, base word, generator).
/// SplitMix64 chain over the letter bytes; quality only needs to be good
/// enough for independent-looking coins, and reproducibility is exact.
fn stable_coin(seed: u64, letters: &[Letter], generator: u8) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let mut h = splitmix(seed ^ 0x6c62_272e_07bb_0142);
    for &l in letters {
        h = splitmix(h ^ (l.code() as i64 as u64));
    }
    splitmix(h ^ ((generator as u64) << 32) ^ (letters.len() as u64))
}

/// Identity of one base self-loop: the canonical base vertex carrying it and
/// the positive generator labelling it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopId {
    pub base_vertex: ReducedWord,
    pub generator: u8,
}

/// One signed letter of the sheet word: a base loop traversed forward or
/// backward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberLetter {
    pub id: LoopId,
    pub positive: bool,
}

impl FiberLetter {
    fn cancels(&self, other: &FiberLetter) -> bool {
        self.id == other.id && self.positive != other.positive
    }
}

/// A cover vertex: base projection plus reduced sheet word with leading
/// retained letters stripped. The root has empty base and empty sheet.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoverState {
    pub base: ReducedWord,
    pub fiber: Vec<FiberLetter>,
}

impl CoverState {
    /// The cover's root vertex.
    pub fn root() -> Self {
        CoverState::default()
    }

    pub fn is_root(&self) -> bool {
        self.base.is_empty() && self.fiber.is_empty()
    }

    /// Length of the base projection (not the cover distance; the canonical
    /// cover word is maintained by the walker driving this state).
    pub fn base_depth(&self) -> usize {
        self.base.len()
    }
}

/// Whether the cover vertex `state` carries a self-loop labelled
/// `generator`: exactly when the base vertex does, the sheet word is empty,
/// and the loop's coin retained it.
pub fn cover_self_loop(params: &CoverParams, state: &CoverState, generator: u8) -> bool {
    state.fiber.is_empty()
        && kl_loop_rule(state.base.letters(), params.ell, generator)
        && params.retained_raw(state.base.letters(), generator)
}

/// One edge transition of the cover graph: the state reached from `state` by
/// the group letter `l`.
///
/// If the base vertex carries an `l`-loop, the base stays put and the sheet
/// word absorbs the loop (free reduction, then stripping leading retained
/// letters — a retained loop traversed at an empty sheet is a cover
/// self-loop and leaves the state unchanged). Otherwise the letter moves the
/// base one edge, cancelling the last base letter when it backtracks.
pub fn cover_step(params: &CoverParams, state: &CoverState, l: Letter) -> CoverState {
    let g = l.generator();
    if kl_loop_rule(state.base.letters(), params.ell, g) {
        let id = LoopId {
            base_vertex: state.base.clone(),
            generator: g,
        };
        let incoming = FiberLetter {
            id,
            positive: l.is_positive(),
        };
        let mut fiber = state.fiber.clone();
        if fiber.last().is_some_and(|t| t.cancels(&incoming)) {
            fiber.pop();
        } else {
            fiber.push(incoming);
        }
        while let Some(first) = fiber.first() {
            if params.retained(&first.id) {
                fiber.remove(0);
            } else {
                break;
            }
        }
        CoverState {
            base: state.base.clone(),
            fiber,
        }
    } else {
        let mut base = state.base.clone();
        base.push(l); // reduced push: cancels iff it backtracks
        CoverState {
            base,
            fiber: state.fiber.clone(),
        }
    }
}

enum Undo {
    BasePushed,
    BasePopped(Letter),
    FiberPushed,
    FiberPopped(FiberLetter),
}

/// Incremental, reversible version of [`cover_step`] for long walks: `apply`
/// performs one non-loop transition in place, `undo_step` reverses the most
/// recent one in O(1). The driving walker handles self-loops (no state
/// change) and decides when a step is an undo (canonical-word backtrack).
pub struct CoverWalker {
    params: CoverParams,
    state: CoverState,
    undo: Vec<Undo>,
}

impl CoverWalker {
    pub fn new(params: CoverParams) -> Self {
        CoverWalker {
            params,
            state: CoverState::root(),
            undo: Vec::new(),
        }
    }

    pub fn params(&self) -> &CoverParams {
        &self.params
    }

    pub fn state(&self) -> &CoverState {
        &self.state
    }

    /// Applies a letter known not to be a cover self-loop at the current
    /// state. Matches [`cover_step`] exactly (verified by tests).
    pub fn apply(&mut self, l: Letter) {
        let g = l.generator();
        if kl_loop_rule(self.state.base.letters(), self.params.ell, g) {
            let incoming = FiberLetter {
                id: LoopId {
                    base_vertex: self.state.base.clone(),
                    generator: g,
                },
                positive: l.is_positive(),
            };
            let fiber = &mut self.state.fiber;
            if fiber.last().is_some_and(|t| t.cancels(&incoming)) {
                let popped = fiber.pop().expect("nonempty fiber");
                self.undo.push(Undo::FiberPopped(popped));
            } else {
                debug_assert!(
                    !(fiber.is_empty() && self.params.retained(&incoming.id)),
                    "caller must treat retained loops at empty sheet as self-loops"
                );
                fiber.push(incoming);
                self.undo.push(Undo::FiberPushed);
            }
        } else if self.state.base.last() == Some(l.inverse()) {
            let popped = self.state.base.pop().expect("nonempty base");
            self.undo.push(Undo::BasePopped(popped));
        } else {
            self.state.base.push(l);
            self.undo.push(Undo::BasePushed);
        }
    }

    /// Reverses the most recent `apply`.
    pub fn undo_step(&mut self) {
        match self.undo.pop().expect("undo stack nonempty") {
            Undo::BasePushed => {
                self.state.base.pop();
            }
            Undo::BasePopped(l) => self.state.base.push(l),
            Undo::FiberPushed => {
                self.state.fiber.pop();
            }
            Undo::FiberPopped(fl) => self.state.fiber.push(fl),
        }
    }
}
