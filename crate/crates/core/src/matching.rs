//! Left-perfect matchings.
//!
//! Matching works on the support graph: parallel edges are collapsed, since a
//! right node can be used once regardless of multiplicity. When no
//! left-perfect matching exists the result carries a Hall violator, a set of
//! left nodes with fewer distinct neighbours than members.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::BipartiteMultigraph;

const UNREACHED: u32 = u32::MAX;

/// A maximum matching, stored from both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximumMatching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    pub size: usize,
}

impl MaximumMatching {
    pub fn is_left_perfect(&self) -> bool {
        self.size == self.left_to_right.len()
    }
}

/// Hopcroft–Karp on a simple bipartite graph given by left adjacency lists.
///
/// Neighbours are scanned in list order, so the result is deterministic for a
/// given adjacency. The DFS is iterative; augmenting paths can be long in
/// large near-critical graphs.
pub fn hopcroft_karp(adj: &[Vec<usize>], m: usize) -> MaximumMatching {
    let n = adj.len();
    let mut l2r: Vec<Option<usize>> = vec![None; n];
    let mut r2l: Vec<Option<usize>> = vec![None; m];
    let mut size = 0;

    // Cheap greedy start: most left nodes in sparse random graphs match
    // without any augmentation.
    for (x, nbrs) in adj.iter().enumerate() {
        if let Some(&v) = nbrs.iter().find(|&&v| r2l[v].is_none()) {
            l2r[x] = Some(v);
            r2l[v] = Some(x);
            size += 1;
        }
    }

    let mut dist = vec![UNREACHED; n];
    let mut next_edge = vec![0usize; n];
    let mut queue = VecDeque::new();
    let mut stack = Vec::new();
    while size < n {
        // Layer the graph from the unmatched left nodes.
        queue.clear();
        for x in 0..n {
            if l2r[x].is_none() {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = UNREACHED;
            }
        }
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &v in &adj[x] {
                match r2l[v] {
                    None => found = true,
                    Some(y) if dist[y] == UNREACHED => {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }

        next_edge.iter_mut().for_each(|e| *e = 0);
        for root in 0..n {
            if l2r[root].is_some() || dist[root] != 0 {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&x) = stack.last() {
                let Some(&v) = adj[x].get(next_edge[x]) else {
                    dist[x] = UNREACHED;
                    stack.pop();
                    continue;
                };
                match r2l[v] {
                    None => {
                        for &y in &stack {
                            let w = adj[y][next_edge[y]];
                            l2r[y] = Some(w);
                            r2l[w] = Some(y);
                        }
                        size += 1;
                        break;
                    }
                    Some(y) if dist[y] != UNREACHED && dist[y] == dist[x] + 1 => stack.push(y),
                    Some(_) => next_edge[x] += 1,
                }
            }
        }
    }

    MaximumMatching { left_to_right: l2r, right_to_left: r2l, size }
}

/// Outcome of a left-perfect matching query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingResult {
    /// `(left, right)` pairs sorted by left node.
    Matched(Vec<(usize, usize)>),
    /// Left nodes whose joint neighbourhood is smaller than the set, ascending.
    Unmatched(Vec<usize>),
}

impl MatchingResult {
    pub fn is_matched(&self) -> bool {
        matches!(self, Self::Matched(_))
    }

    /// Checks the witness against `g`: an injective assignment along edges of
    /// `g`, or a set violating Hall's condition.
    pub fn is_sound_for(&self, g: &BipartiteMultigraph) -> bool {
        match self {
            Self::Matched(pairs) => {
                let mut used = vec![false; g.right_count()];
                pairs.iter().all(|&(x, v)| {
                    x < g.left_count()
                        && v < g.right_count()
                        && g.neighbors(x).contains(&v)
                        && !std::mem::replace(&mut used[v], true)
                })
            }
            Self::Unmatched(violator) => {
                let mut nbhd: Vec<usize> = violator.iter().flat_map(|&x| g.support(x)).collect();
                nbhd.sort_unstable();
                nbhd.dedup();
                violator.len() > nbhd.len()
            }
        }
    }
}

impl std::fmt::Display for MatchingResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Matched(pairs) => {
                let list: Vec<String> = pairs.iter().map(|(x, v)| format!("{x}:{v}")).collect();
                write!(f, "MATCHED assignment={}", list.join(","))
            }
            Self::Unmatched(violator) => {
                let list: Vec<String> = violator.iter().map(ToString::to_string).collect();
                write!(f, "UNMATCHED violator={}", list.join(","))
            }
        }
    }
}

/// Decides whether every left node of `g` can be matched.
///
/// ```
/// use leftmatch::matching::has_left_perfect_matching;
/// use leftmatch::{BipartiteMultigraph, MatchingResult};
///
/// let g = BipartiteMultigraph::new(1, vec![vec![0], vec![0]]).unwrap();
/// assert_eq!(has_left_perfect_matching(&g), MatchingResult::Unmatched(vec![0, 1]));
/// ```
pub fn has_left_perfect_matching(g: &BipartiteMultigraph) -> MatchingResult {
    let all: Vec<usize> = (0..g.left_count()).collect();
    solve(g, &all)
}

/// Same as [`has_left_perfect_matching`] for the subgraph induced by
/// `subset` (all right nodes kept). Node labels in the result refer to `g`.
pub fn has_matching_for_subset(g: &BipartiteMultigraph, subset: &[usize]) -> Result<MatchingResult> {
    let mut nodes = subset.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    if let Some(&x) = nodes.last().filter(|&&x| x >= g.left_count()) {
        return Err(Error::InvalidParameter(format!("left node {x} out of range")));
    }
    Ok(solve(g, &nodes))
}

fn solve(g: &BipartiteMultigraph, nodes: &[usize]) -> MatchingResult {
    let adj: Vec<Vec<usize>> = nodes.iter().map(|&x| g.support(x)).collect();
    let mm = hopcroft_karp(&adj, g.right_count());
    if mm.is_left_perfect() {
        let pairs = mm
            .left_to_right
            .iter()
            .enumerate()
            .map(|(i, v)| (nodes[i], v.expect("left-perfect")))
            .collect();
        return MatchingResult::Matched(pairs);
    }
    let mut violator: Vec<usize> = hall_violator(&adj, &mm).into_iter().map(|i| nodes[i]).collect();
    violator.sort_unstable();
    MatchingResult::Unmatched(violator)
}

/// Left nodes reachable by alternating paths from the unmatched left nodes
/// of a maximum matching. Every right node reached is matched (otherwise the
/// matching could be augmented), so the set has exactly as many neighbours
/// as it has matched members.
pub fn hall_violator(adj: &[Vec<usize>], mm: &MaximumMatching) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = (0..adj.len()).filter(|&x| mm.left_to_right[x].is_none()).collect();
    for &x in &queue {
        seen[x] = true;
    }
    while let Some(x) = queue.pop_front() {
        for &v in &adj[x] {
            let y = mm.right_to_left[v].expect("maximum matching has no augmenting path");
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    (0..adj.len()).filter(|&x| seen[x]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(m: usize, adj: &[&[usize]]) -> BipartiteMultigraph {
        BipartiteMultigraph::new(m, adj.iter().map(|a| a.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = graph(1, &[&[0]]);
        assert_eq!(has_left_perfect_matching(&g), MatchingResult::Matched(vec![(0, 0)]));
    }

    #[test]
    fn pigeonhole() {
        let g = graph(1, &[&[0], &[0]]);
        let r = has_left_perfect_matching(&g);
        assert_eq!(r, MatchingResult::Unmatched(vec![0, 1]));
        assert_eq!(r.to_string(), "UNMATCHED violator=0,1");
    }

    #[test]
    fn three_nodes_two_targets() {
        let g = graph(3, &[&[0, 1], &[0, 1], &[0, 1]]);
        assert_eq!(has_left_perfect_matching(&g), MatchingResult::Unmatched(vec![0, 1, 2]));
    }

    #[test]
    fn parallel_edges_do_not_count_twice() {
        let g = graph(2, &[&[0, 0, 0], &[0, 0]]);
        assert!(!has_left_perfect_matching(&g).is_matched());
    }

    #[test]
    fn subsets() {
        let g = graph(1, &[&[0], &[0]]);
        assert_eq!(has_matching_for_subset(&g, &[]).unwrap(), MatchingResult::Matched(vec![]));
        assert_eq!(has_matching_for_subset(&g, &[1]).unwrap(), MatchingResult::Matched(vec![(1, 0)]));
        assert_eq!(has_matching_for_subset(&g, &[0, 1]).unwrap(), MatchingResult::Unmatched(vec![0, 1]));
        assert!(has_matching_for_subset(&g, &[2]).is_err());
    }

    #[test]
    fn augmenting_paths_are_found() {
        // Greedy takes 0->0 and then needs to reroute.
        let g = graph(3, &[&[0, 1], &[0], &[1, 2]]);
        let r = has_left_perfect_matching(&g);
        assert!(r.is_matched());
        assert!(r.is_sound_for(&g));
    }

    #[test]
    fn violator_is_sound_on_deficient_component() {
        let g = graph(5, &[&[0, 1], &[1], &[0, 1], &[2, 3, 4], &[3]]);
        let r = has_left_perfect_matching(&g);
        assert_eq!(r, MatchingResult::Unmatched(vec![0, 1, 2]));
        assert!(r.is_sound_for(&g));
    }

    #[test]
    fn display_of_matched() {
        let g = graph(3, &[&[2], &[0]]);
        assert_eq!(has_left_perfect_matching(&g).to_string(), "MATCHED assignment=0:2,1:0");
    }
}
