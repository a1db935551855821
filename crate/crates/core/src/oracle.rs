//! Exhaustive reference implementations.
//!
//! Each routine here answers a question by enumerating outcomes directly,
//! sharing as little code as possible with the fast paths it checks: its own
//! augmenting-path matcher, explicit neighbour tuples, and the definitions of
//! blocked/free nodes and classes read off the list of all matchings.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::graph::{BipartiteMultigraph, DegreeSpec, SamplingMode};
use crate::structure::{enumerate_left_perfect_matchings, CorePartition, NodeClass, ENUMERATION_LIMIT};

/// Plain recursive augmenting-path matcher; true if every left node of `adj`
/// can be matched into `0..m`.
pub fn kuhn_left_perfect(adj: &[Vec<usize>], m: usize) -> bool {
    fn augment(x: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[x] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].map_or(true, |y| augment(y, adj, seen, owner)) {
                owner[v] = Some(x);
                return true;
            }
        }
        false
    }
    if adj.len() > m {
        return false;
    }
    let mut owner = vec![None; m];
    (0..adj.len()).all(|x| augment(x, adj, &mut vec![false; m], &mut owner))
}

/// All left-perfect matchings as sets of used right nodes.
fn used_sets(g: &BipartiteMultigraph) -> Result<Vec<Vec<bool>>> {
    let m = g.right_count();
    let sets: Vec<Vec<bool>> = enumerate_left_perfect_matchings(g)?
        .map(|assignment| {
            let mut used = vec![false; m];
            for v in assignment {
                used[v] = true;
            }
            used
        })
        .collect();
    if sets.is_empty() {
        return Err(Error::NoMatchingExists);
    }
    Ok(sets)
}

/// Node classes straight from the definition: used by every matching, by
/// none, or by some.
pub fn classify_by_enumeration(g: &BipartiteMultigraph) -> Result<Vec<NodeClass>> {
    let sets = used_sets(g)?;
    Ok((0..g.right_count())
        .map(|v| {
            let uses = sets.iter().filter(|s| s[v]).count();
            if uses == sets.len() {
                NodeClass::Blocked
            } else if uses == 0 {
                NodeClass::Free
            } else {
                NodeClass::HalfFree
            }
        })
        .collect())
}

/// Pairs of `v_set` left unmatched together by some matching.
pub fn h_edges_by_enumeration(g: &BipartiteMultigraph, v_set: &[usize]) -> Result<Vec<(usize, usize)>> {
    let sets = used_sets(g)?;
    let mut nodes = v_set.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    if let Some(&v) = nodes.iter().find(|&&v| v >= g.right_count() || sets.iter().all(|s| s[v])) {
        return Err(Error::PreconditionViolated(format!("right node {v} is not a non-blocked node")));
    }
    let mut edges = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if sets.iter().any(|s| !s[a] && !s[b]) {
                edges.push((a, b));
            }
        }
    }
    Ok(edges)
}

/// Blocked set and classes as connected components of the "never unmatched
/// together" relation on the non-blocked nodes.
pub fn partition_by_enumeration(g: &BipartiteMultigraph) -> Result<CorePartition> {
    let sets = used_sets(g)?;
    let m = g.right_count();
    let blocked: Vec<usize> = (0..m).filter(|&v| sets.iter().all(|s| s[v])).collect();
    let open: Vec<usize> = (0..m).filter(|v| !blocked.contains(v)).collect();
    let mut component = vec![usize::MAX; m];
    let mut classes = Vec::new();
    for &start in &open {
        if component[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        component[start] = id;
        let mut members = vec![start];
        let mut i = 0;
        while i < members.len() {
            let a = members[i];
            for &b in &open {
                if component[b] == usize::MAX && !sets.iter().any(|s| !s[a] && !s[b]) {
                    component[b] = id;
                    members.push(b);
                }
            }
            i += 1;
        }
        classes.push(members);
    }
    Ok(CorePartition::from_parts(blocked, classes))
}

/// Calls `f` on every tuple in `0..m` of length `len`, in lexicographic order.
fn for_each_tuple(len: usize, m: usize, mut f: impl FnMut(&[usize])) {
    let mut tuple = vec![0usize; len];
    loop {
        f(&tuple);
        let Some(pos) = (0..len).rev().find(|&i| tuple[i] + 1 < m) else {
            return;
        };
        tuple[pos] += 1;
        for t in &mut tuple[pos + 1..] {
            *t = 0;
        }
    }
}

fn dedup(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Counts the neighbour tuples for two extra nodes of degrees `dy`, `dz`
/// (drawn with replacement) that make `g_rest` unmatchable. Returns
/// `(failures, m^(dy+dz))`.
pub fn fail_counts(dy: u32, dz: u32, g_rest: &BipartiteMultigraph) -> Result<(u64, u64)> {
    let m = g_rest.right_count();
    let mut base = g_rest.support_adjacency();
    if !kuhn_left_perfect(&base, m) {
        return Err(Error::NoMatchingExists);
    }
    let total = (m as u128).checked_pow(dy + dz).filter(|&t| t <= ENUMERATION_LIMIT).ok_or_else(|| {
        Error::InstanceTooLarge(format!("{m}^{} neighbour tuples exceed {ENUMERATION_LIMIT}", dy + dz))
    })?;
    let (dy, dz) = (dy as usize, dz as usize);
    base.push(Vec::new());
    base.push(Vec::new());
    let n = base.len();
    let mut failures = 0u64;
    for_each_tuple(dy + dz, m, |t| {
        base[n - 2] = dedup(t[..dy].to_vec());
        base[n - 1] = dedup(t[dy..].to_vec());
        if !kuhn_left_perfect(&base, m) {
            failures += 1;
        }
    });
    Ok((failures, total as u64))
}

/// [`fail_counts`] as an exact probability.
pub fn fail_by_enumeration(dy: u32, dz: u32, g_rest: &BipartiteMultigraph) -> Result<BigRational> {
    let (failures, total) = fail_counts(dy, dz, g_rest)?;
    Ok(BigRational::new(BigInt::from(failures), BigInt::from(total)))
}

/// Permanent of a square matrix by Ryser's inclusion–exclusion formula.
pub fn permanent(matrix: &[Vec<i64>]) -> Result<i128> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter("permanent needs a square matrix".into()));
    }
    if n > 20 {
        return Err(Error::InstanceTooLarge(format!("permanent of a {n}x{n} matrix")));
    }
    if n == 0 {
        return Ok(1);
    }
    let mut total: i128 = 0;
    for cols in 1u32..(1 << n) {
        let mut product: i128 = 1;
        for row in matrix {
            let s: i128 = (0..n).filter(|&j| cols >> j & 1 == 1).map(|j| row[j] as i128).sum();
            product *= s;
            if product == 0 {
                break;
            }
        }
        if (n - cols.count_ones() as usize) % 2 == 0 {
            total += product;
        } else {
            total -= product;
        }
    }
    Ok(total)
}

/// Number of left-perfect matchings of the support graph, via permanents
/// of the square submatrices on every `n`-subset of right nodes.
pub fn count_matchings_by_permanent(g: &BipartiteMultigraph) -> Result<i128> {
    let (n, m) = (g.left_count(), g.right_count());
    if n > m {
        return Ok(0);
    }
    if m > 20 {
        return Err(Error::InstanceTooLarge(format!("{m} right nodes")));
    }
    let support = g.support_adjacency();
    let mut total = 0;
    for cols in 0u32..(1 << m) {
        if cols.count_ones() as usize != n {
            continue;
        }
        let chosen: Vec<usize> = (0..m).filter(|&v| cols >> v & 1 == 1).collect();
        let matrix: Vec<Vec<i64>> = support
            .iter()
            .map(|nbrs| chosen.iter().map(|v| nbrs.contains(v) as i64).collect())
            .collect();
        total += permanent(&matrix)?;
    }
    Ok(total)
}

/// Success probability by walking every degree outcome and every neighbour
/// tuple (with replacement) or neighbour subset (without).
pub fn success_probability_by_enumeration(spec: &DegreeSpec, m: usize, mode: SamplingMode) -> Result<f64> {
    let mut work: u128 = 1;
    for dist in spec.distributions() {
        let per_node: u128 = dist.support().iter().map(|&(d, _)| (m as u128).saturating_pow(d)).sum();
        work = work.saturating_mul(per_node);
        if work > ENUMERATION_LIMIT {
            return Err(Error::InstanceTooLarge(format!("more than {ENUMERATION_LIMIT} outcomes")));
        }
    }
    // Outcomes for one node: (probability, neighbour set).
    let mut options: Vec<Vec<(f64, Vec<usize>)>> = Vec::new();
    for dist in spec.distributions() {
        let mut node = Vec::new();
        for &(d, p) in dist.support() {
            let d = d as usize;
            match mode {
                SamplingMode::WithReplacement => {
                    let each = p / (m as f64).powi(d as i32);
                    for_each_tuple(d, m, |t| node.push((each, dedup(t.to_vec()))));
                }
                SamplingMode::WithoutReplacement => {
                    if d > m {
                        return Err(Error::DegreeExceedsM { degree: d as u32, m });
                    }
                    let mut subsets = Vec::new();
                    for_each_tuple(d, m, |t| {
                        if t.windows(2).all(|w| w[0] < w[1]) {
                            subsets.push(t.to_vec());
                        }
                    });
                    let each = p / subsets.len() as f64;
                    node.extend(subsets.into_iter().map(|s| (each, s)));
                }
            }
        }
        options.push(node);
    }
    let n = options.len();
    let mut adj = vec![Vec::new(); n];
    let mut total = 0.0;
    let mut choice = vec![0usize; n];
    loop {
        let mut p = 1.0;
        for x in 0..n {
            let (q, set) = &options[x][choice[x]];
            p *= q;
            adj[x].clone_from(set);
        }
        if kuhn_left_perfect(&adj, m) {
            total += p;
        }
        let Some(pos) = (0..n).rev().find(|&x| choice[x] + 1 < options[x].len()) else {
            break;
        };
        choice[pos] += 1;
        for c in &mut choice[pos + 1..] {
            *c = 0;
        }
    }
    Ok(total)
}
