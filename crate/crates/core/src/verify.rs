//! Property suites over enumerated grids and seeded random instances.
//!
//! Grid suites sweep every right-side shape `(b; i_1 <= ... <= i_r)` with
//! `r >= 2` and `b + sum(i) = m` for `2 <= m <= max_m`, comparing `fail`
//! values in exact arithmetic. Instance suites compare the fast routines
//! with the exhaustive ones in [`crate::oracle`] on small seeded graphs.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::failprob::{
    blocked_power_exact, degree_transfer_exact, diagonal_convexity_exact, epsilon_shift, fail_closed_form,
    fail_exact, fail_total, fail_total_exact, mixed_convexity_exact, success_probability_exact, ExactInequality,
    NormalizedBI,
};
use crate::graph::{BipartiteMultigraph, DegreeDistribution, DegreeSpec, SamplingMode};
use crate::matching::has_left_perfect_matching;
use crate::oracle;
use crate::seed::{derive_seed, rng_from_seed};
use crate::structure::{bi_partition, classify_right_nodes, h_graph_edges, BIVector, NodeClass};

/// Largest degree in the transfer grid.
pub const TRANSFER_MAX_K: u32 = 6;
/// Degree range of the diagonal and mixed convexity grids.
pub const DIAGONAL_L: (u32, u32) = (2, 5);
/// Detailed messages kept per suite.
const KEPT_MESSAGES: usize = 20;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub total: u64,
    pub holds: u64,
    /// Cases where both sides are exactly equal.
    pub ties: u64,
    /// Cases where the strict inequality is reversed, or an equivalence check
    /// disagrees.
    pub counterexamples: u64,
    /// When set, the suite only tabulates and never fails.
    pub informational: bool,
    pub messages: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        Self { suite, total: 0, holds: 0, ties: 0, counterexamples: 0, informational: false, messages: Vec::new() }
    }

    fn note(&mut self, message: impl FnOnce() -> String) {
        if self.messages.len() < KEPT_MESSAGES {
            self.messages.push(message());
        }
    }

    fn record(&mut self, ok: bool, message: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.holds += 1;
        } else {
            self.counterexamples += 1;
            self.note(message);
        }
    }

    fn record_inequality(&mut self, check: &ExactInequality, what: impl FnOnce() -> String) {
        self.total += 1;
        if check.holds() {
            self.holds += 1;
        } else if check.is_tie() {
            self.ties += 1;
            self.note(|| format!("tie: {}", what()));
        } else {
            self.counterexamples += 1;
            self.note(|| format!("reversed: {}", what()));
        }
    }

    pub fn passed(&self) -> bool {
        self.informational || self.holds == self.total
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.informational {
            "INFO"
        } else if self.passed() {
            "PASS"
        } else {
            "FAIL"
        };
        write!(
            f,
            "suite={} total={} holds={} ties={} counterexamples={} status={}",
            self.suite, self.total, self.holds, self.ties, self.counterexamples, status
        )
    }
}

/// One row of a grid sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub bi: BIVector,
    pub k: Option<u32>,
    pub l: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub const GRID_HEADER: &str = "m,b,sizes,k,l,lhs,rhs,holds";

impl fmt::Display for GridRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.bi.sizes.iter().map(ToString::to_string).collect();
        let k = self.k.map(|k| k.to_string()).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            self.bi.m(),
            self.bi.b,
            sizes.join(" "),
            k,
            self.l,
            self.lhs,
            self.rhs,
            self.holds
        )
    }
}

/// Integer partitions of `total` into at least `min_parts` parts, each part
/// listed in ascending order.
fn partitions(total: usize, min_parts: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, smallest: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(current.clone());
            return;
        }
        for part in smallest..=rest {
            current.push(part);
            go(rest - part, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if total > 0 {
        go(total, 1, &mut Vec::new(), &mut out);
    }
    out.retain(|p| p.len() >= min_parts);
    out
}

/// Every BI-vector with `r >= 2` and `2 <= m <= max_m`.
pub fn bi_grid(max_m: usize) -> Vec<BIVector> {
    let mut grid = Vec::new();
    for m in 2..=max_m {
        for b in 0..=m - 2 {
            for sizes in partitions(m - b, 2) {
                grid.push(BIVector { b, sizes });
            }
        }
    }
    grid
}

fn row(bi: &BIVector, k: Option<u32>, l: u32, check: &ExactInequality) -> GridRow {
    GridRow {
        bi: bi.clone(),
        k,
        l,
        lhs: check.lhs.to_f64().unwrap_or(f64::NAN),
        rhs: check.rhs.to_f64().unwrap_or(f64::NAN),
        holds: check.holds(),
    }
}

/// `fail(k, l) > fail(k-1, l+1)` for `1 <= l`, `l + 2 <= k <= 6`.
pub fn transfer_grid(max_m: usize) -> Result<(SuiteReport, Vec<GridRow>)> {
    let mut report = SuiteReport::new("transfer");
    let mut rows = Vec::new();
    for bi in bi_grid(max_m) {
        for k in 3..=TRANSFER_MAX_K {
            for l in 1..=k - 2 {
                let check = degree_transfer_exact(k, l, &bi)?;
                report.record_inequality(&check, || format!("{bi} k={k} l={l}"));
                rows.push(row(&bi, Some(k), l, &check));
            }
        }
    }
    Ok((report, rows))
}

/// `fail(l+1, l) + fail(l, l-1) > 2 fail(l, l)` for `2 <= l <= 5`.
pub fn diagonal_grid(max_m: usize) -> Result<(SuiteReport, Vec<GridRow>)> {
    let mut report = SuiteReport::new("diagonal");
    let mut rows = Vec::new();
    for bi in bi_grid(max_m) {
        for l in DIAGONAL_L.0..=DIAGONAL_L.1 {
            let check = diagonal_convexity_exact(l, &bi)?;
            report.record_inequality(&check, || format!("{bi} l={l}"));
            rows.push(row(&bi, None, l, &check));
        }
    }
    Ok((report, rows))
}

/// Tabulates `K > 0` over the grid (it can go either way) and checks that
/// the cancelled form and the raw `fail` combination agree in sign.
pub fn mixed_grid(max_m: usize) -> Result<(SuiteReport, Vec<GridRow>)> {
    let mut report = SuiteReport::new("mixed");
    let mut rows = Vec::new();
    let mut disagreements = 0u64;
    for bi in bi_grid(max_m) {
        for l in DIAGONAL_L.0..=DIAGONAL_L.1 {
            let check = mixed_convexity_exact(l, &bi)?;
            let raw = fail_exact(l, l, &bi) + fail_exact(l + 1, l + 1, &bi) - fail_exact(l, l + 1, &bi) * BigRational::from_integer(2.into());
            let reduced = &check.lhs - &check.rhs;
            if raw.signum() != reduced.signum() {
                disagreements += 1;
            }
            let nbi = NormalizedBI::from_bi(&bi)?;
            let k_float = fail_closed_form(l, l, &nbi) + fail_closed_form(l + 1, l + 1, &nbi)
                - 2.0 * fail_closed_form(l, l + 1, &nbi);
            if !reduced.is_zero() && k_float.abs() > 1e-12 && (k_float > 0.0) != reduced.is_positive() {
                disagreements += 1;
            }
            report.record_inequality(&check, || format!("{bi} l={l}"));
            rows.push(row(&bi, None, l, &check));
        }
    }
    // Tabulation only, unless the two forms disagree.
    report.informational = disagreements == 0;
    if disagreements > 0 {
        report.messages.insert(0, format!("{disagreements} sign disagreements between reduced and raw forms"));
    }
    Ok((report, rows))
}

/// Counts grid points where `K > 0`, for the tabulation in [`mixed_grid`].
pub fn mixed_positive_count(rows: &[GridRow]) -> usize {
    rows.iter().filter(|r| r.holds).count()
}

/// `(b/m)^l (1 - b/m) > (b/m)^(k-1) (1 - b/m)` for `0 < b < m <= max_m`.
pub fn blocked_power_grid(max_m: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("blocked-power");
    for m in 2..=max_m {
        for b in 1..m {
            for k in 3..=TRANSFER_MAX_K {
                for l in 1..=k - 2 {
                    let check = blocked_power_exact(l, k, b, m)?;
                    report.record_inequality(&check, || format!("m={m} b={b} k={k} l={l}"));
                }
            }
        }
    }
    Ok(report)
}

/// Random matchable graph with `1 <= n <= m <= max_m` and degrees 1..=3,
/// drawn with replacement. Retries with fresh seeds until matchable.
pub fn random_matchable_graph(seed: u64, max_n: usize, max_m: usize) -> BipartiteMultigraph {
    for attempt in 0u64.. {
        let mut rng = rng_from_seed(derive_seed(seed, &[attempt]));
        let m = rng.gen_range(1..=max_m);
        let n = rng.gen_range(1..=max_n.min(m));
        let adjacency = (0..n)
            .map(|_| {
                let d = rng.gen_range(1..=3);
                (0..d).map(|_| rng.gen_range(0..m)).collect()
            })
            .collect();
        let g = BipartiteMultigraph::new(m, adjacency).expect("valid by construction");
        if has_left_perfect_matching(&g).is_matched() {
            return g;
        }
    }
    unreachable!()
}

fn instance_seed(seed: u64, suite: u64, i: u64) -> u64 {
    derive_seed(seed, &[suite, i])
}

/// Classification, `H` edges and partition against enumeration, plus the
/// structural claims on `H`:
/// * every `H_V` with an edge is connected;
/// * "no edge" is transitive on the non-blocked nodes;
/// * nodes in distinct classes are always joined.
pub fn structure_suite(instances: u64, seed: u64, max_size: usize) -> Result<(SuiteReport, SuiteReport)> {
    let mut oracle_report = SuiteReport::new("structure-oracle");
    let mut claims = SuiteReport::new("structure-claims");
    for i in 0..instances {
        let g = random_matchable_graph(instance_seed(seed, 1, i), max_size, max_size);
        let classes = classify_right_nodes(&g)?;
        let open: Vec<usize> = (0..g.right_count()).filter(|&v| classes[v] != NodeClass::Blocked).collect();
        let edges = h_graph_edges(&g, &open)?;
        let partition = bi_partition(&g)?;
        let agree = classes == oracle::classify_by_enumeration(&g)?
            && edges == oracle::h_edges_by_enumeration(&g, &open)?
            && partition == oracle::partition_by_enumeration(&g)?
            && partition.bi.m() == g.right_count();
        oracle_report.record(agree, || format!("instance {i}:\n{}", g.to_text()));

        let m = g.right_count();
        let mut adj = vec![vec![false; m]; m];
        for &(a, b) in &edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        let connected_ok = (1u32..1 << open.len()).all(|mask| {
            let v: Vec<usize> = (0..open.len()).filter(|&j| mask >> j & 1 == 1).map(|j| open[j]).collect();
            induced_connected_or_empty(&v, &adj)
        });
        let transitive_ok = open.iter().all(|&a| {
            open.iter().all(|&b| {
                open.iter().all(|&c| a == b || b == c || a == c || adj[a][b] || adj[b][c] || !adj[a][c])
            })
        });
        let mut class_of = vec![usize::MAX; m];
        for (j, class) in partition.classes.iter().enumerate() {
            for &v in class {
                class_of[v] = j;
            }
        }
        let complete_ok = open.iter().all(|&a| open.iter().all(|&b| class_of[a] == class_of[b] || adj[a][b]));
        claims.record(connected_ok && transitive_ok && complete_ok, || {
            format!(
                "instance {i}: connected={connected_ok} transitive={transitive_ok} complete={complete_ok}\n{}",
                g.to_text()
            )
        });
    }
    Ok((oracle_report, claims))
}

/// True if the subgraph induced on `v` has no edges, or is connected.
fn induced_connected_or_empty(v: &[usize], adj: &[Vec<bool>]) -> bool {
    let has_edge = v.iter().any(|&a| v.iter().any(|&b| adj[a][b]));
    if !has_edge {
        return true;
    }
    let mut seen = vec![false; v.len()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..v.len() {
            if !seen[j] && adj[v[i]][v[j]] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Closed form against exhaustive neighbour enumeration on random matchable
/// residual graphs; exact equality plus a binary64 tolerance.
pub fn failprob_suite(instances: u64, seed: u64, max_size: usize, tolerance: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("failprob");
    for i in 0..instances {
        let g = random_matchable_graph(instance_seed(seed, 2, i), max_size, max_size);
        let mut rng = rng_from_seed(instance_seed(seed, 3, i));
        let dy = rng.gen_range(1..=3);
        let dz = rng.gen_range(1..=3);
        let brute = oracle::fail_by_enumeration(dy, dz, &g)?;
        let exact = fail_total_exact(dy, dz, &g)?;
        let float = fail_total(dy, dz, &g)?;
        let gap = (float - brute.to_f64().unwrap_or(f64::NAN)).abs();
        report.record(exact == brute && gap <= tolerance, || {
            format!("instance {i} dy={dy} dz={dz}: closed form {exact} vs enumeration {brute}\n{}", g.to_text())
        });
    }
    Ok(report)
}

fn random_distribution(rng: &mut ChaCha8Rng, max_degree: u32) -> Result<DegreeDistribution> {
    let mut entries = Vec::new();
    for d in 1..=max_degree {
        if rng.gen_bool(0.6) {
            entries.push((d, rng.gen_range(0.1..1.0)));
        }
    }
    if entries.is_empty() {
        entries.push((rng.gen_range(1..=max_degree), 1.0));
    }
    let total: f64 = entries.iter().map(|e| e.1).sum();
    entries.iter_mut().for_each(|e| e.1 /= total);
    DegreeDistribution::new(&entries)
}

/// A tiny configuration and the node whose distribution has a support gap.
#[derive(Debug, Clone)]
pub struct ShiftCase {
    pub spec: DegreeSpec,
    pub m: usize,
    pub node: usize,
    pub low: u32,
    pub high: u32,
    pub epsilon: f64,
}

/// Random configuration with `2 <= n <= m <= max_size`, where one node
/// mixes two degrees at distance at least 2.
pub fn random_shift_case(seed: u64, max_size: usize) -> Result<ShiftCase> {
    let mut rng = rng_from_seed(seed);
    let m = rng.gen_range(2..=max_size);
    let n = rng.gen_range(2..=m);
    let mut per_node = (0..n).map(|_| random_distribution(&mut rng, 3)).collect::<Result<Vec<_>>>()?;
    let node = rng.gen_range(0..n);
    let low = rng.gen_range(1..=2);
    let high = rng.gen_range(low + 2..=4);
    let p = rng.gen_range(0.2..0.8);
    per_node[node] = DegreeDistribution::new(&[(low, p), (high, 1.0 - p)])?;
    let epsilon = p.min(1.0 - p) * rng.gen_range(0.25..=1.0);
    Ok(ShiftCase { spec: DegreeSpec::new(per_node)?, m, node, low, high, epsilon })
}

/// Exact success probability strictly increases when one node's degree
/// mass is pulled together by an `epsilon` shift.
pub fn concentration_suite(instances: u64, seed: u64, max_size: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("concentration");
    for i in 0..instances {
        let case = random_shift_case(instance_seed(seed, 4, i), max_size)?;
        let dist = case.spec.distribution(case.node);
        let shifted = case.spec.with_distribution(case.node, epsilon_shift(dist, case.low, case.high, case.epsilon)?)?;
        let before = success_probability_exact(&case.spec, case.m, SamplingMode::WithReplacement)?;
        let after = success_probability_exact(&shifted, case.m, SamplingMode::WithReplacement)?;
        report.record(after > before, || {
            format!("instance {i}: n={} m={} before={before} after={after}", case.spec.node_count(), case.m)
        });
    }
    Ok(report)
}

/// Suite names accepted by [`run_suite`].
pub const SUITES: &[&str] = &["transfer", "diagonal", "mixed", "blocked-power", "structure", "failprob", "concentration"];

/// Parameters shared by the suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteParams {
    pub max_m: usize,
    pub instances: Option<u64>,
    pub seed: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self { max_m: 12, instances: None, seed: 0 }
    }
}

/// Runs one named suite and returns its reports plus any grid rows.
pub fn run_suite(name: &str, params: SuiteParams) -> Result<(Vec<SuiteReport>, Vec<GridRow>)> {
    let count = |default| params.instances.unwrap_or(default);
    Ok(match name {
        "transfer" => {
            let (r, rows) = transfer_grid(params.max_m)?;
            (vec![r], rows)
        }
        "diagonal" => {
            let (r, rows) = diagonal_grid(params.max_m)?;
            (vec![r], rows)
        }
        "mixed" => {
            let (r, rows) = mixed_grid(params.max_m)?;
            (vec![r], rows)
        }
        "blocked-power" => (vec![blocked_power_grid(params.max_m)?], Vec::new()),
        "structure" => {
            let (a, b) = structure_suite(count(1000), params.seed, 7)?;
            (vec![a, b], Vec::new())
        }
        "failprob" => (vec![failprob_suite(count(500), params.seed, 6, 1e-12)?], Vec::new()),
        "concentration" => (vec![concentration_suite(count(50), params.seed, 5)?], Vec::new()),
        other => return Err(Error::InvalidParameter(format!("unknown suite `{other}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        // p(6) = 11, minus the single-part partition.
        assert_eq!(partitions(6, 2).len(), 10);
        assert!(partitions(1, 2).is_empty());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(bi_grid(2), vec![BIVector { b: 0, sizes: vec![1, 1] }]);
        assert!(bi_grid(12).iter().all(|bi| bi.r() >= 2 && bi.m() <= 12));
    }

    #[test]
    fn transfer_ties_come_only_from_empty_blocked_sets() {
        let (report, rows) = transfer_grid(6).unwrap();
        assert_eq!(report.counterexamples, 0);
        assert!(report.ties > 0);
        assert!(rows.iter().filter(|r| !r.holds).all(|r| r.bi.b == 0));
        assert!(rows.iter().filter(|r| r.bi.b > 0).all(|r| r.holds));
    }

    #[test]
    fn diagonal_grid_holds() {
        let (report, _) = diagonal_grid(8).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn mixed_grid_goes_both_ways() {
        let (report, rows) = mixed_grid(8).unwrap();
        assert!(report.informational && report.passed());
        let positive = mixed_positive_count(&rows);
        assert!(positive > 0 && positive < rows.len());
    }

    #[test]
    fn small_instance_suites() {
        let (oracle_report, claims) = structure_suite(50, 9, 6).unwrap();
        assert!(oracle_report.passed() && claims.passed());
        assert!(failprob_suite(20, 9, 5, 1e-12).unwrap().passed());
        assert!(concentration_suite(5, 9, 4).unwrap().passed());
        assert!(blocked_power_grid(6).unwrap().passed());
    }

    #[test]
    fn report_line() {
        let mut r = SuiteReport::new("x");
        r.record(true, String::new);
        assert_eq!(r.to_string(), "suite=x total=1 holds=1 ties=0 counterexamples=0 status=PASS");
    }

    #[test]
    fn grid_row_csv() {
        let row = GridRow { bi: BIVector { b: 1, sizes: vec![1, 2] }, k: Some(4), l: 2, lhs: 0.5, rhs: 0.25, holds: true };
        assert_eq!(row.to_string(), "4,1,1 2,4,2,0.5,0.25,true");
    }
}
