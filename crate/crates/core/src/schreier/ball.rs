//! Finite balls of coset graphs: materialization, structural checking, and
//! deterministic text exports.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::Result;
use crate::words::{Letter, ReducedWord};

use super::atlas::BallAtlas;
use super::LoopOracle;

/// A radius-`radius` ball of a coset graph, stored explicitly.
///
/// `vertices` are canonical words sorted length-lexicographically (the root
/// is index 0). `edges` hold each non-loop edge once, oriented away from the
/// root; `loops` list (vertex, positive generator) pairs. Both lists are
/// sorted, so equal balls compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchreierBall {
    pub k: u8,
    pub radius: usize,
    pub vertices: Vec<ReducedWord>,
    pub edges: Vec<(u32, Letter, u32)>,
    pub loops: Vec<(u32, u8)>,
}

impl SchreierBall {
    /// Vertex count.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Index of a canonical word, if present.
    pub fn index_of(&self, w: &ReducedWord) -> Option<u32> {
        self.vertices.binary_search(w).ok().map(|i| i as u32)
    }

    /// Whether `vertex` carries a loop labelled `generator`.
    pub fn has_loop(&self, vertex: u32, generator: u8) -> bool {
        self.loops.binary_search(&(vertex, generator)).is_ok()
    }

    /// Canonical words on the sphere of radius `n`, sorted.
    pub fn sphere(&self, n: usize) -> Vec<ReducedWord> {
        self.vertices
            .iter()
            .filter(|w| w.len() == n)
            .cloned()
            .collect()
    }
}

/// Materializes the radius-`radius` ball of the oracle's coset graph by
/// breadth-first exploration, including self-loops at boundary vertices.
pub fn materialize_ball(
    oracle: &LoopOracle,
    radius: usize,
    budget_bytes: Option<u64>,
) -> Result<SchreierBall> {
    let mut atlas = BallAtlas::new(oracle, budget_bytes);
    let letters: Vec<Letter> = atlas.letters().collect();
    let mut frontier = vec![atlas.root()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &v in &frontier {
            for &l in &letters {
                let t = atlas.step(v, l)?;
                if atlas.depth(t) > atlas.depth(v) {
                    next.push(t);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        frontier = next;
    }

    // Sort vertices canonically and remap node ids to sorted indices.
    let n = atlas.node_count();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let words: Vec<ReducedWord> = (0..n as u32).map(|v| atlas.word(v)).collect();
    order.sort_by(|&x, &y| words[x as usize].cmp(&words[y as usize]));
    let mut rank = vec![0u32; n];
    for (idx, &node) in order.iter().enumerate() {
        rank[node as usize] = idx as u32;
    }

    let vertices: Vec<ReducedWord> = order.iter().map(|&v| words[v as usize].clone()).collect();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for node in 1..n as u32 {
        let parent = atlas.parent(node).expect("non-root has a parent");
        let letter = atlas.parent_letter(node).expect("non-root has a letter");
        edges.push((rank[parent as usize], letter, rank[node as usize]));
    }
    edges.sort_unstable_by_key(|&(s, l, t)| (s, l.code(), t));

    let mut loops = Vec::new();
    for node in 0..n as u32 {
        for g in 1..=oracle.k() {
            if atlas.self_loop_at(node, g) {
                loops.push((rank[node as usize], g));
            }
        }
    }
    loops.sort_unstable();

    Ok(SchreierBall {
        k: oracle.k(),
        radius,
        vertices,
        edges,
        loops,
    })
}

/// Canonical words of the sphere of radius `n`, sorted.
pub fn materialize_sphere(
    oracle: &LoopOracle,
    n: usize,
    budget_bytes: Option<u64>,
) -> Result<Vec<ReducedWord>> {
    Ok(materialize_ball(oracle, n, budget_bytes)?.sphere(n))
}

/// Structural check that a ball is a valid piece of a tree-like coset graph:
/// edge indices in range, at most one edge per (vertex, signed letter)
/// counting loops in both directions, no cycle among non-loop edges, and a
/// single connected component.
pub fn verify_tree_like(ball: &SchreierBall) -> bool {
    let n = ball.vertices.len();
    if n == 0 {
        return false;
    }
    let mut used: HashSet<(u32, i8)> = HashSet::new();
    for &(s, l, t) in &ball.edges {
        if s as usize >= n || t as usize >= n {
            return false;
        }
        if !used.insert((s, l.code())) || !used.insert((t, l.inverse().code())) {
            return false;
        }
    }
    for &(v, g) in &ball.loops {
        if v as usize >= n || g == 0 || g > ball.k {
            return false;
        }
        let l = Letter::new(g, true);
        if !used.insert((v, l.code())) || !used.insert((v, l.inverse().code())) {
            return false;
        }
    }
    // Union-find over non-loop edges: acyclic and connected.
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut v: u32) -> u32 {
        while parent[v as usize] != v {
            parent[v as usize] = parent[parent[v as usize] as usize];
            v = parent[v as usize];
        }
        v
    }
    let mut components = n;
    for &(s, _, t) in &ball.edges {
        let (rs, rt) = (find(&mut parent, s), find(&mut parent, t));
        if rs == rt {
            return false; // a cycle that is not a self-loop
        }
        parent[rs as usize] = rt;
        components -= 1;
    }
    components == 1
}

/// Graphviz rendering: vertices labelled by canonical words, one undirected
/// edge per tree edge, self-loops drawn at their vertex with the positive
/// generator label. Output is deterministic.
pub fn ball_to_dot(ball: &SchreierBall) -> String {
    let mut out = String::new();
    out.push_str("graph schreier_ball {\n");
    let _ = writeln!(out, "  // k={} radius={}", ball.k, ball.radius);
    for (i, w) in ball.vertices.iter().enumerate() {
        let _ = writeln!(out, "  v{i} [label=\"{w}\"];");
    }
    for &(s, l, t) in &ball.edges {
        let _ = writeln!(out, "  v{s} -- v{t} [label=\"{}\"];", l.to_char());
    }
    for &(v, g) in &ball.loops {
        let _ = writeln!(
            out,
            "  v{v} -- v{v} [label=\"{}\"];",
            Letter::new(g, true).to_char()
        );
    }
    out.push_str("}\n");
    out
}

/// CSV rendering with header `vertex,letter,target,is_loop`; tree edges are
/// oriented away from the root and loops carry their positive label. Rows
/// are grouped by source vertex in canonical order.
pub fn ball_to_csv(ball: &SchreierBall) -> String {
    let mut rows: Vec<(u32, i8, u32, bool)> = ball
        .edges
        .iter()
        .map(|&(s, l, t)| (s, l.code(), t, false))
        .chain(
            ball.loops
                .iter()
                .map(|&(v, g)| (v, Letter::new(g, true).code(), v, true)),
        )
        .collect();
    rows.sort_unstable_by_key(|&(s, code, t, is_loop)| (s, code, t, is_loop));
    let mut out = String::from("vertex,letter,target,is_loop\n");
    for (s, code, t, is_loop) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            ball.vertices[s as usize],
            Letter::from_code(code).to_char(),
            ball.vertices[t as usize],
            u8::from(is_loop)
        );
    }
    out
}

/// Extends a ball into an explicit automaton map for tracing: returns, for
/// the vertex `v` and signed letter `l`, the target vertex if the edge stays
/// inside the ball.
pub fn trace_step(ball: &SchreierBall, from: u32, l: Letter) -> Option<u32> {
    // Loops first.
    if ball.has_loop(from, l.generator()) {
        return Some(from);
    }
    // Tree edges: away from root if the edge exists, toward root otherwise.
    let from_word = &ball.vertices[from as usize];
    if from_word.last() == Some(l.inverse()) {
        let mut parent = from_word.clone();
        parent.pop();
        return ball.index_of(&parent);
    }
    let mut child = from_word.clone();
    child.push(l);
    if child.len() == from_word.len() + 1 {
        ball.index_of(&child).filter(|&c| {
            // The child must really be this vertex's child in the ball (it
            // is, whenever present: canonical words are unique).
            ball.edges.binary_search_by_key(&(from, l.code(), c), |&(s, e, t)| (s, e.code(), t)).is_ok()
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::from_str(s).unwrap()
    }

    #[test]
    fn tree_ball_counts() {
        let o = LoopOracle::trivial(2).unwrap();
        let ball = materialize_ball(&o, 4, None).unwrap();
        assert_eq!(ball.len(), 1 + 4 + 12 + 36 + 108);
        assert_eq!(ball.edges.len(), ball.len() - 1);
        assert!(ball.loops.is_empty());
        assert!(verify_tree_like(&ball));
        assert_eq!(ball.vertices[0], w(""));
        assert_eq!(ball.sphere(2).len(), 12);
    }

    #[test]
    fn k2_ball_counts_and_loops() {
        // Sphere sizes of the K(2) coset graph: 1, 4, 4, 12, 12, 36, 36, …
        let o = LoopOracle::kl_base(2).unwrap();
        let ball = materialize_ball(&o, 4, None).unwrap();
        assert_eq!(ball.len(), 1 + 4 + 4 + 12 + 12);
        for (n, expect) in [(0usize, 1usize), (1, 4), (2, 4), (3, 12), (4, 12)] {
            assert_eq!(ball.sphere(n).len(), expect, "sphere {n}");
        }
        // Loops sit exactly on odd spheres within this radius.
        assert_eq!(ball.loops.len(), 4 + 12);
        assert!(verify_tree_like(&ball));
        // Spot checks.
        let a = ball.index_of(&w("a")).unwrap();
        assert!(ball.has_loop(a, 2));
        assert!(!ball.has_loop(a, 1));
        let aa = ball.index_of(&w("aa")).unwrap();
        assert!(!ball.has_loop(aa, 1));
        assert!(!ball.has_loop(aa, 2));
    }

    #[test]
    fn k2_ball_10_vertex_count() {
        let o = LoopOracle::kl_base(2).unwrap();
        let ball = materialize_ball(&o, 10, None).unwrap();
        assert_eq!(ball.len(), 969);
        assert!(verify_tree_like(&ball));
    }

    #[test]
    fn loops_counted_at_boundary() {
        let o = LoopOracle::kl_base(2).unwrap();
        let ball = materialize_ball(&o, 1, None).unwrap();
        // Boundary vertices a, A, b, B all carry loops.
        assert_eq!(ball.loops.len(), 4);
    }

    #[test]
    fn four_cycle_fails_verification() {
        // A square a-b-a⁻¹-b⁻¹: determinism holds, but the cycle is not a
        // self-loop.
        let ball = SchreierBall {
            k: 2,
            radius: 2,
            vertices: vec![w(""), w("a"), w("b"), w("ab")],
            edges: vec![
                (0, Letter::new(1, true), 1),
                (0, Letter::new(2, true), 2),
                (1, Letter::new(2, true), 3),
                (2, Letter::new(1, true), 3),
            ],
            loops: vec![],
        };
        assert!(!verify_tree_like(&ball));
    }

    #[test]
    fn duplicate_labels_fail_verification() {
        let ball = SchreierBall {
            k: 2,
            radius: 1,
            vertices: vec![w(""), w("a"), w("b")],
            edges: vec![
                (0, Letter::new(1, true), 1),
                (0, Letter::new(1, true), 2),
            ],
            loops: vec![],
        };
        assert!(!verify_tree_like(&ball));
    }

    #[test]
    fn loop_conflicting_with_edge_fails_verification() {
        let ball = SchreierBall {
            k: 2,
            radius: 1,
            vertices: vec![w(""), w("a")],
            edges: vec![(0, Letter::new(1, true), 1)],
            loops: vec![(0, 1)],
        };
        assert!(!verify_tree_like(&ball));
    }

    #[test]
    fn disconnected_fails_verification() {
        let ball = SchreierBall {
            k: 2,
            radius: 1,
            vertices: vec![w(""), w("a")],
            edges: vec![],
            loops: vec![],
        };
        assert!(!verify_tree_like(&ball));
    }

    #[test]
    fn dot_export_shape() {
        let o = LoopOracle::kl_base(2).unwrap();
        let ball = materialize_ball(&o, 1, None).unwrap();
        let dot = ball_to_dot(&ball);
        assert!(dot.starts_with("graph schreier_ball {"));
        assert!(dot.contains("v0 [label=\"ε\"];"));
        assert!(dot.contains("-- v0") || dot.contains("v0 --"));
        // Four loops, one at each sphere-1 vertex, drawn as v -- v.
        let self_edges = (0..ball.len())
            .filter(|i| dot.contains(&format!("v{i} -- v{i} ")))
            .count();
        assert_eq!(self_edges, 4);
        assert!(dot.trim_end().ends_with('}'));
    }

    #[test]
    fn csv_export_shape() {
        let o = LoopOracle::kl_base(2).unwrap();
        let ball = materialize_ball(&o, 1, None).unwrap();
        let csv = ball_to_csv(&ball);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("vertex,letter,target,is_loop"));
        // 4 tree edges + 4 loops.
        assert_eq!(csv.lines().count(), 1 + 4 + 4);
        assert!(csv.contains("a,b,a,1"));
        assert!(csv.contains("ε,a,a,0"));
    }

    #[test]
    fn trace_step_follows_edges_and_loops() {
        let o = LoopOracle::kl_base(2).unwrap();
        let ball = materialize_ball(&o, 3, None).unwrap();
        let root = 0u32;
        let a = trace_step(&ball, root, Letter::new(1, true)).unwrap();
        assert_eq!(ball.vertices[a as usize], w("a"));
        // b loops at "a".
        assert_eq!(trace_step(&ball, a, Letter::new(2, true)), Some(a));
        // A cancels back to the root.
        assert_eq!(trace_step(&ball, a, Letter::new(1, false)), Some(root));
        // Off the ball: no target.
        let aab = ball.index_of(&w("aab")).unwrap();
        assert_eq!(trace_step(&ball, aab, Letter::new(2, true)), None);
    }
}
