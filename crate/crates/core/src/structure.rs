//! Structure of the right side of a matchable graph.
//!
//! Relative to the set of all left-perfect matchings of a fixed graph, a right
//! node is *blocked* if every matching uses it, *free* if no matching uses it,
//! and *half-free* otherwise. Two non-blocked nodes are joined in the
//! auxiliary graph `H` when some matching leaves both unmatched at once; the
//! non-blocked nodes split into classes of nodes that are pairwise never
//! simultaneously unmatched.
//!
//! Everything here is polynomial and works from a single maximum matching
//! plus alternating-path searches. [`enumerate_left_perfect_matchings`]
//! gives the exhaustive view used to cross-check the fast routines.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::BipartiteMultigraph;
use crate::matching::hopcroft_karp;

/// Upper bound on the enumeration search space.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

/// Class of a right node with respect to all left-perfect matchings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Blocked,
    Free,
    HalfFree,
}

/// `b` blocked nodes plus the sorted sizes of the classes of non-blocked nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BIVector {
    pub b: usize,
    pub sizes: Vec<usize>,
}

impl BIVector {
    /// Sorts `sizes`; rejects empty classes.
    pub fn new(b: usize, mut sizes: Vec<usize>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidParameter("class sizes must be positive".into()));
        }
        sizes.sort_unstable();
        Ok(Self { b, sizes })
    }

    /// Number of classes.
    pub fn r(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of right nodes, `b + sum(sizes)`.
    pub fn m(&self) -> usize {
        self.b + self.sizes.iter().sum::<usize>()
    }
}

impl fmt::Display for BIVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b={} classes={}", self.b, join(&self.sizes))
    }
}

/// Blocked set plus the equivalence classes of the non-blocked nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorePartition {
    pub blocked: Vec<usize>,
    /// Classes sorted by size, ties by smallest member; members ascending.
    pub classes: Vec<Vec<usize>>,
    pub bi: BIVector,
}

impl CorePartition {
    /// Builds the partition from class member lists, normalising the order.
    pub fn from_parts(mut blocked: Vec<usize>, mut classes: Vec<Vec<usize>>) -> Self {
        blocked.sort_unstable();
        for class in &mut classes {
            class.sort_unstable();
        }
        classes.sort_by(|a, b| (a.len(), a.first()).cmp(&(b.len(), b.first())));
        let bi = BIVector { b: blocked.len(), sizes: classes.iter().map(Vec::len).collect() };
        Self { blocked, classes, bi }
    }

    /// `b=<b> classes=<i1,...>`, then `blocked=<members>` and one
    /// `class=<members>` line per class.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CorePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.bi)?;
        writeln!(f, "blocked={}", join(&self.blocked))?;
        for class in &self.classes {
            writeln!(f, "class={}", join(class))?;
        }
        Ok(())
    }
}

fn join(items: &[usize]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Iterator over all left-perfect matchings of the support graph.
///
/// Each item maps left node `x` to `item[x]`. Matchings come out in
/// lexicographic order of that vector.
pub struct Matchings {
    adj: Vec<Vec<usize>>,
    used: Vec<bool>,
    // cursor[x] is the index into adj[x] of the current choice for node x.
    cursor: Vec<usize>,
    depth: usize,
    started: bool,
    done: bool,
}

impl Iterator for Matchings {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let n = self.adj.len();
        if n == 0 {
            self.done = true;
            return Some(Vec::new());
        }
        if self.started {
            // Resume by advancing the last node.
            self.depth = n - 1;
            let v = self.adj[self.depth][self.cursor[self.depth]];
            self.used[v] = false;
            self.cursor[self.depth] += 1;
        }
        self.started = true;
        loop {
            let x = self.depth;
            match self.adj[x].get(self.cursor[x]..).and_then(|rest| rest.iter().position(|&v| !self.used[v])) {
                Some(offset) => {
                    self.cursor[x] += offset;
                    let v = self.adj[x][self.cursor[x]];
                    self.used[v] = true;
                    if x + 1 == n {
                        return Some((0..n).map(|y| self.adj[y][self.cursor[y]]).collect());
                    }
                    self.depth += 1;
                    self.cursor[self.depth] = 0;
                }
                None => {
                    if x == 0 {
                        self.done = true;
                        return None;
                    }
                    self.depth -= 1;
                    let p = self.depth;
                    let v = self.adj[p][self.cursor[p]];
                    self.used[v] = false;
                    self.cursor[p] += 1;
                }
            }
        }
    }
}

/// Enumerates every left-perfect matching of `g`'s support graph.
///
/// Refuses instances whose search space (the product of the left support
/// sizes) exceeds [`ENUMERATION_LIMIT`].
pub fn enumerate_left_perfect_matchings(g: &BipartiteMultigraph) -> Result<Matchings> {
    let adj = g.support_adjacency();
    let mut bound: u128 = 1;
    for nbrs in &adj {
        bound = bound.saturating_mul(nbrs.len() as u128);
        if bound > ENUMERATION_LIMIT {
            return Err(Error::InstanceTooLarge(format!(
                "matching enumeration over more than {ENUMERATION_LIMIT} states"
            )));
        }
    }
    let n = adj.len();
    Ok(Matchings {
        used: vec![false; g.right_count()],
        cursor: vec![0; n],
        adj,
        depth: 0,
        started: false,
        done: false,
    })
}

/// A left-perfect matching stored from both sides.
#[derive(Clone)]
struct PerfectMatching {
    l2r: Vec<usize>,
    r2l: Vec<Option<usize>>,
}

/// Exposable right nodes and, for each, the step that frees it: `(x, u)`
/// means left node `x` moves from this node to `u`.
struct Exposure {
    exposable: Vec<bool>,
    parent: Vec<Option<(usize, usize)>>,
}

impl PerfectMatching {
    /// Right nodes that some left-perfect matching leaves unmatched, with
    /// `forbidden` deleted from the graph. The matching must avoid
    /// `forbidden`.
    ///
    /// A node is exposable iff it is unmatched, or its partner can move to an
    /// exposable node. Search runs breadth-first from the unmatched nodes in
    /// ascending index order.
    fn exposure(&self, radj: &[Vec<usize>], forbidden: Option<usize>) -> Exposure {
        let m = self.r2l.len();
        let mut exposable = vec![false; m];
        let mut parent = vec![None; m];
        let mut queue = VecDeque::new();
        for u in 0..m {
            if self.r2l[u].is_none() && Some(u) != forbidden {
                exposable[u] = true;
                queue.push_back(u);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &x in &radj[u] {
                let v = self.l2r[x];
                if v != u && !exposable[v] {
                    exposable[v] = true;
                    parent[v] = Some((x, u));
                    queue.push_back(v);
                }
            }
        }
        Exposure { exposable, parent }
    }

    /// Shifts the matching along the recorded alternating path so that `v`
    /// becomes unmatched.
    fn expose(&mut self, v: usize, exposure: &Exposure) {
        let mut cur = v;
        self.r2l[v] = None;
        while let Some((x, u)) = exposure.parent[cur] {
            self.l2r[x] = u;
            self.r2l[u] = Some(x);
            cur = u;
        }
    }
}

/// A left-perfect matching together with the right-side adjacency needed for
/// alternating-path searches.
struct Analysis {
    radj: Vec<Vec<usize>>,
    matching: PerfectMatching,
    base: Exposure,
}

impl Analysis {
    fn new(g: &BipartiteMultigraph) -> Result<Self> {
        let adj = g.support_adjacency();
        let mm = hopcroft_karp(&adj, g.right_count());
        if !mm.is_left_perfect() {
            return Err(Error::NoMatchingExists);
        }
        let radj = g.right_adjacency();
        let matching = PerfectMatching {
            l2r: mm.left_to_right.into_iter().map(|v| v.expect("left-perfect")).collect(),
            r2l: mm.right_to_left,
        };
        let base = matching.exposure(&radj, None);
        Ok(Self { radj, matching, base })
    }

    fn m(&self) -> usize {
        self.radj.len()
    }

    fn is_non_blocked(&self, v: usize) -> bool {
        self.base.exposable[v]
    }

    fn classify(&self) -> Vec<NodeClass> {
        (0..self.m())
            .map(|v| {
                if self.radj[v].is_empty() {
                    NodeClass::Free
                } else if self.is_non_blocked(v) {
                    NodeClass::HalfFree
                } else {
                    NodeClass::Blocked
                }
            })
            .collect()
    }

    /// Nodes that some matching leaves unmatched together with `v`, which
    /// must be non-blocked.
    fn co_exposable(&self, v: usize) -> Vec<bool> {
        let mut shifted = self.matching.clone();
        shifted.expose(v, &self.base);
        let mut ex = shifted.exposure(&self.radj, Some(v)).exposable;
        ex[v] = false;
        ex
    }
}

/// Classifies each right node of `g` as blocked, free or half-free.
///
/// Blocked nodes are exactly those no alternating path can free. A node with
/// no incident edge is free; any other node that some matching leaves
/// unmatched is half-free, because a neighbour can always be moved onto it.
pub fn classify_right_nodes(g: &BipartiteMultigraph) -> Result<Vec<NodeClass>> {
    Ok(Analysis::new(g)?.classify())
}

/// Edges of `H_V` for `V = v_set`: pairs `(v1, v2)`, `v1 < v2`, that some
/// left-perfect matching leaves unmatched simultaneously.
///
/// For each `v1` the matching is shifted to free `v1`, then `v1` is deleted
/// and the nodes still exposable are exactly the partners of `v1`.
pub fn h_graph_edges(g: &BipartiteMultigraph, v_set: &[usize]) -> Result<Vec<(usize, usize)>> {
    let analysis = Analysis::new(g)?;
    let mut nodes = v_set.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    if let Some(&v) = nodes.iter().find(|&&v| v >= analysis.m() || !analysis.is_non_blocked(v)) {
        return Err(Error::PreconditionViolated(format!("right node {v} is not a non-blocked node")));
    }
    let mut edges = Vec::new();
    for (i, &v1) in nodes.iter().enumerate() {
        let partners = analysis.co_exposable(v1);
        edges.extend(nodes[i + 1..].iter().filter(|&&v2| partners[v2]).map(|&v2| (v1, v2)));
    }
    Ok(edges)
}

/// Splits the right nodes into the blocked set and the classes of
/// non-blocked nodes that are never unmatched together.
///
/// One alternating-path search per class: the class of the smallest
/// unassigned node `v` is `v` plus every non-blocked node that cannot be
/// unmatched together with `v`.
pub fn bi_partition(g: &BipartiteMultigraph) -> Result<CorePartition> {
    let analysis = Analysis::new(g)?;
    let m = analysis.m();
    let blocked: Vec<usize> = (0..m).filter(|&v| !analysis.is_non_blocked(v)).collect();
    let mut assigned: Vec<bool> = (0..m).map(|v| !analysis.is_non_blocked(v)).collect();
    let mut classes = Vec::new();
    for v in 0..m {
        if assigned[v] {
            continue;
        }
        assigned[v] = true;
        let mut class = vec![v];
        if !analysis.radj[v].is_empty() {
            let partners = analysis.co_exposable(v);
            for w in v + 1..m {
                if !assigned[w] && !partners[w] {
                    assigned[w] = true;
                    class.push(w);
                }
            }
        }
        classes.push(class);
    }
    Ok(CorePartition::from_parts(blocked, classes))
}
