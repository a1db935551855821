use leftmatch::matching::has_left_perfect_matching;
use leftmatch::oracle::{classify_by_enumeration, count_matchings_by_permanent, partition_by_enumeration};
use leftmatch::structure::{bi_partition, classify_right_nodes, h_graph_edges, BIVector, NodeClass};
use leftmatch::verify::structure_suite;
use leftmatch::{BipartiteMultigraph, MatchingResult};

use NodeClass::{Blocked, Free, HalfFree};

fn g(m: usize, adj: &[&[usize]]) -> BipartiteMultigraph {
    BipartiteMultigraph::new(m, adj.iter().map(|a| a.to_vec()).collect()).unwrap()
}

#[test]
fn forced_matching() {
    let graph = g(3, &[&[0, 1], &[1]]);
    assert_eq!(classify_right_nodes(&graph).unwrap(), vec![Blocked, Blocked, Free]);
    let p = bi_partition(&graph).unwrap();
    assert_eq!((p.blocked, p.classes), (vec![0, 1], vec![vec![2]]));
    assert_eq!(p.bi, BIVector::new(2, vec![1]).unwrap());
}

#[test]
fn one_node_two_choices() {
    let graph = g(3, &[&[0, 1, 1]]);
    assert_eq!(classify_right_nodes(&graph).unwrap(), vec![HalfFree, HalfFree, Free]);
    assert_eq!(h_graph_edges(&graph, &[0, 1, 2]).unwrap(), vec![(0, 2), (1, 2)]);
    let p = bi_partition(&graph).unwrap();
    assert_eq!(p.classes, vec![vec![2], vec![0, 1]]);
    assert_eq!(p.to_text(), "b=0 classes=1,2\nblocked=\nclass=2\nclass=0,1\n");
    // Matchings live on the support graph, so the parallel edge counts once.
    assert_eq!(count_matchings_by_permanent(&graph).unwrap(), 2);
}

#[test]
fn residual_with_isolated_node() {
    let graph = g(4, &[&[0], &[2, 3]]);
    let p = bi_partition(&graph).unwrap();
    assert_eq!((p.blocked.clone(), p.classes.clone()), (vec![0], vec![vec![1], vec![2, 3]]));
    assert_eq!(p, partition_by_enumeration(&graph).unwrap());
    assert_eq!(classify_right_nodes(&graph).unwrap(), classify_by_enumeration(&graph).unwrap());
}

#[test]
fn blocked_nodes_are_rejected_from_h() {
    let graph = g(3, &[&[0, 1], &[1]]);
    assert!(h_graph_edges(&graph, &[1, 2]).is_err());
}

#[test]
fn hall_violator() {
    let graph = g(2, &[&[0], &[0], &[0, 1]]);
    assert_eq!(has_left_perfect_matching(&graph), MatchingResult::Unmatched(vec![0, 1]));
    assert!(bi_partition(&graph).is_err());
}

#[test]
fn randomized_agreement_with_enumeration() {
    let (oracle, claims) = structure_suite(200, 99, 6).unwrap();
    assert!(oracle.passed() && claims.passed(), "{oracle}\n{claims}");
    assert_eq!((oracle.total, claims.total), (200, 200));
}
