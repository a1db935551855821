//! Degree distributions, degree specifications and the random graph sampler.
//!
//! A graph is drawn node by node in index order: node `x` first draws its
//! degree `d_x` from `rho_x`, then draws `d_x` right neighbours, either with
//! replacement (the multigraph model) or as a uniform `d_x`-subset. All
//! randomness comes from one ChaCha8 stream seeded by the caller.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Tolerance for the probability sum of a validated distribution.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Largest deviation of the raw sum from 1 that is silently renormalised.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// A probability mass function over left degrees.
///
/// Atoms are stored sorted by degree. Entries with zero probability are
/// dropped after validation, so the stored support is exactly the set of
/// degrees with positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    support: Vec<(u32, f64)>,
}

impl DegreeDistribution {
    /// Validates `entries` and builds a distribution.
    ///
    /// Sums within [`RENORMALIZE_TOLERANCE`] of one are rescaled to sum to
    /// one; anything further away is rejected.
    pub fn new(entries: &[(u32, f64)]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut sorted = entries.to_vec();
        sorted.sort_by_key(|&(d, _)| d);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateDegree(w[0].0));
            }
        }
        for &(degree, probability) in &sorted {
            if degree == 0 {
                return Err(Error::DegreeZero);
            }
            if probability.is_nan() || probability < 0.0 {
                return Err(Error::NegativeProbability { degree, probability });
            }
        }
        let sum: f64 = sorted.iter().map(|&(_, p)| p).sum();
        if !sum.is_finite() || (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::SumNotOne { sum });
        }
        let support = sorted
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .map(|(d, p)| (d, p / sum))
            .collect();
        Ok(Self { support })
    }

    pub fn point_mass(degree: u32) -> Result<Self> {
        Self::new(&[(degree, 1.0)])
    }

    /// `(degree, probability)` pairs with positive probability, ascending.
    pub fn support(&self) -> &[(u32, f64)] {
        &self.support
    }

    pub fn probability(&self, degree: u32) -> f64 {
        self.support
            .iter()
            .find(|&&(d, _)| d == degree)
            .map_or(0.0, |&(_, p)| p)
    }

    /// The mean degree `sum_l l * rho(l)`.
    pub fn mean(&self) -> f64 {
        self.support.iter().map(|&(d, p)| f64::from(d) * p).sum()
    }

    pub fn min_degree(&self) -> u32 {
        self.support[0].0
    }

    pub fn max_degree(&self) -> u32 {
        self.support[self.support.len() - 1].0
    }

    pub fn is_point_mass(&self) -> bool {
        self.support.len() == 1
    }

    /// Checks that every degree fits into `m` right nodes.
    pub fn validate_for(&self, m: usize) -> Result<()> {
        let degree = self.max_degree();
        if degree as usize > m {
            return Err(Error::DegreeExceedsM { degree, m });
        }
        Ok(())
    }

    /// Draws a degree. Point masses consume no randomness; otherwise one
    /// uniform `f64` is compared against the cumulative sums.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if let [(d, _)] = self.support[..] {
            return d;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(d, p) in &self.support {
            acc += p;
            if u < acc {
                return d;
            }
        }
        self.max_degree()
    }
}

/// Builds a validated distribution from `(degree, probability)` entries.
pub fn make_distribution(entries: &[(u32, f64)]) -> Result<DegreeDistribution> {
    DegreeDistribution::new(entries)
}

/// One degree distribution per left node.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSpec {
    per_node: Vec<DegreeDistribution>,
    average_mean: f64,
}

impl DegreeSpec {
    pub fn new(per_node: Vec<DegreeDistribution>) -> Result<Self> {
        if per_node.is_empty() {
            return Err(Error::InvalidParameter("a degree spec needs at least one node".into()));
        }
        let average_mean = per_node.iter().map(DegreeDistribution::mean).sum::<f64>() / per_node.len() as f64;
        Ok(Self { per_node, average_mean })
    }

    /// `count_low` nodes with point mass at `low`, the rest at `low + 1`.
    pub fn two_point_fixed(n: usize, low: u32, count_low: usize) -> Result<Self> {
        if count_low > n {
            return Err(Error::InvalidParameter(format!("{count_low} low-degree nodes out of {n}")));
        }
        let lo = DegreeDistribution::point_mass(low)?;
        let hi = DegreeDistribution::point_mass(low + 1)?;
        let per_node = (0..n).map(|x| if x < count_low { lo.clone() } else { hi.clone() }).collect();
        Self::new(per_node)
    }

    /// Every node independently has degree `low` with probability `p_low`
    /// and `low + 1` otherwise.
    pub fn two_point_iid(n: usize, low: u32, p_low: f64) -> Result<Self> {
        let dist = DegreeDistribution::new(&[(low, p_low), (low + 1, 1.0 - p_low)])?;
        Self::new(vec![dist; n])
    }

    pub fn node_count(&self) -> usize {
        self.per_node.len()
    }

    pub fn distributions(&self) -> &[DegreeDistribution] {
        &self.per_node
    }

    pub fn distribution(&self, x: usize) -> &DegreeDistribution {
        &self.per_node[x]
    }

    /// `(1/n) * sum_x mean(rho_x)`.
    pub fn average_mean(&self) -> f64 {
        self.average_mean
    }

    pub fn max_degree(&self) -> u32 {
        self.per_node.iter().map(DegreeDistribution::max_degree).max().unwrap_or(0)
    }

    /// Returns a copy with node `x`'s distribution replaced.
    pub fn with_distribution(&self, x: usize, dist: DegreeDistribution) -> Result<Self> {
        if x >= self.per_node.len() {
            return Err(Error::InvalidParameter(format!("node {x} out of range")));
        }
        let mut per_node = self.per_node.clone();
        per_node[x] = dist;
        Self::new(per_node)
    }
}

/// The average mean degree of a spec.
pub fn average_mean(spec: &DegreeSpec) -> f64 {
    spec.average_mean()
}

/// How the per-node probability of the lower degree is assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum NearOptimalMode {
    /// A fixed `alpha * n` nodes get the lower degree, the rest the upper.
    Fixed,
    /// Every node has the lower degree with probability `alpha`.
    Binomial,
    /// Node `x` has the lower degree with probability `p[x]`.
    Custom(Vec<f64>),
}

/// Degree specs concentrated on `floor(dbar)` and `ceil(dbar)` with average
/// mean `dbar`, where `alpha = ceil(dbar) - dbar` is the average weight on the
/// lower degree. Integral `dbar` gives point masses at `dbar` in every mode.
pub fn near_optimal_spec(n: usize, dbar: f64, mode: &NearOptimalMode) -> Result<DegreeSpec> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {n}")));
    }
    if !(dbar.is_finite() && dbar >= 2.0) {
        return Err(Error::InvalidParameter(format!("average degree must be >= 2, got {dbar}")));
    }
    let low = dbar.floor();
    let alpha = dbar.ceil() - dbar;
    let low_degree = low as u32;
    if alpha == 0.0 {
        if let NearOptimalMode::Custom(p) = mode {
            check_custom(n, p, 0.0)?;
        }
        let point = DegreeDistribution::point_mass(low_degree)?;
        return DegreeSpec::new(vec![point; n]);
    }
    match mode {
        NearOptimalMode::Fixed => {
            let split = alpha * n as f64;
            let rounded = split.round();
            if (split - rounded).abs() > RENORMALIZE_TOLERANCE {
                return Err(Error::NonIntegralSplit { value: split });
            }
            DegreeSpec::two_point_fixed(n, low_degree, rounded as usize)
        }
        NearOptimalMode::Binomial => DegreeSpec::two_point_iid(n, low_degree, alpha),
        NearOptimalMode::Custom(p) => {
            check_custom(n, p, alpha)?;
            let per_node = p
                .iter()
                .map(|&px| DegreeDistribution::new(&[(low_degree, px), (low_degree + 1, 1.0 - px)]))
                .collect::<Result<Vec<_>>>()?;
            DegreeSpec::new(per_node)
        }
    }
}

fn check_custom(n: usize, p: &[f64], alpha: f64) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidParameter(format!("expected {n} probabilities, got {}", p.len())));
    }
    if let Some(&bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidParameter(format!("probability {bad} outside [0, 1]")));
    }
    let mean = p.iter().sum::<f64>() / n as f64;
    if (mean - alpha).abs() > RENORMALIZE_TOLERANCE {
        return Err(Error::MeanMismatch { expected: alpha, actual: mean });
    }
    Ok(())
}

/// How the `d_x` neighbours of a left node are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Independent uniform picks; repeats are kept as parallel edges.
    #[default]
    WithReplacement,
    /// A uniform `d_x`-subset of the right nodes.
    WithoutReplacement,
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with_replacement" | "with-replacement" | "replacement" => Ok(Self::WithReplacement),
            "without_replacement" | "without-replacement" | "distinct" => Ok(Self::WithoutReplacement),
            other => Err(Error::InvalidParameter(format!("unknown sampling mode `{other}`"))),
        }
    }
}

/// A bipartite multigraph with `n` left nodes and `m` right nodes.
///
/// Left node `x` stores the multiset of its right neighbours in draw order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    m: usize,
    adjacency: Vec<Vec<usize>>,
}

impl BipartiteMultigraph {
    /// Every left node needs at least one neighbour and every index must be
    /// below `m`.
    pub fn new(m: usize, adjacency: Vec<Vec<usize>>) -> Result<Self> {
        for (x, nbrs) in adjacency.iter().enumerate() {
            if nbrs.is_empty() {
                return Err(Error::InvalidParameter(format!("left node {x} has no neighbours")));
            }
            if let Some(&v) = nbrs.iter().find(|&&v| v >= m) {
                return Err(Error::InvalidParameter(format!(
                    "left node {x} has neighbour {v} outside 0..{m}"
                )));
            }
        }
        Ok(Self { m, adjacency })
    }

    pub fn left_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn right_count(&self) -> usize {
        self.m
    }

    /// Neighbour multiset of `x`, in draw order.
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Distinct neighbours of `x`, ascending.
    pub fn support(&self, x: usize) -> Vec<usize> {
        let mut s = self.adjacency[x].clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// The simple graph underlying the multigraph.
    pub fn support_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.left_count()).map(|x| self.support(x)).collect()
    }

    /// Left nodes adjacent to each right node, ascending and without repeats.
    pub fn right_adjacency(&self) -> Vec<Vec<usize>> {
        let mut radj = vec![Vec::new(); self.m];
        for (x, nbrs) in self.support_adjacency().iter().enumerate() {
            for &v in nbrs {
                radj[v].push(x);
            }
        }
        radj
    }

    /// The subgraph on the given left nodes (in the given order) with all
    /// right nodes kept.
    pub fn induced(&self, left: &[usize]) -> Result<Self> {
        let adjacency = left
            .iter()
            .map(|&x| {
                self.adjacency
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("left node {x} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m: self.m, adjacency })
    }

    /// Returns a copy with extra left nodes appended.
    pub fn with_extra_left(&self, extra: &[Vec<usize>]) -> Result<Self> {
        let mut adjacency = self.adjacency.clone();
        adjacency.extend(extra.iter().cloned());
        Self::new(self.m, adjacency)
    }

    /// Line-oriented text: `n m`, then one line of neighbour indices per
    /// left node.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for BipartiteMultigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.left_count(), self.m)?;
        for nbrs in &self.adjacency {
            let line: Vec<String> = nbrs.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for BipartiteMultigraph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line, message: String| Error::Parse { line, message };
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing `n m` header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [n, m] = fields[..] else {
            return Err(parse_err(hline, format!("expected `n m`, got `{header}`")));
        };
        let n: usize = n.parse().map_err(|e| parse_err(hline, format!("bad n: {e}")))?;
        let m: usize = m.parse().map_err(|e| parse_err(hline, format!("bad m: {e}")))?;
        let mut adjacency = Vec::with_capacity(n);
        for (line, content) in lines {
            if adjacency.len() == n {
                return Err(parse_err(line, format!("more than {n} node lines")));
            }
            let nbrs = content
                .split_whitespace()
                .map(|tok| match tok.parse::<usize>() {
                    Ok(v) if v < m => Ok(v),
                    Ok(v) => Err(parse_err(line, format!("neighbour {v} outside 0..{m}"))),
                    Err(e) => Err(parse_err(line, format!("bad neighbour `{tok}`: {e}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            adjacency.push(nbrs);
        }
        if adjacency.len() != n {
            return Err(parse_err(hline, format!("header announces {n} nodes, found {}", adjacency.len())));
        }
        Self::new(m, adjacency)
    }
}

/// Samples a graph from `spec` with `m` right nodes.
///
/// Nodes are processed in index order; each draws its degree and then its
/// neighbours from the same ChaCha8 stream seeded with `seed`, so the result
/// is a pure function of the arguments.
pub fn sample_graph(spec: &DegreeSpec, m: usize, seed: u64, mode: SamplingMode) -> Result<BipartiteMultigraph> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one right node".into()));
    }
    if mode == SamplingMode::WithoutReplacement {
        for dist in spec.distributions() {
            dist.validate_for(m)?;
        }
    }
    let mut rng = rng_from_seed(seed);
    let adjacency = spec
        .distributions()
        .iter()
        .map(|dist| {
            let d = dist.sample(&mut rng) as usize;
            match mode {
                SamplingMode::WithReplacement => (0..d).map(|_| rng.gen_range(0..m)).collect(),
                SamplingMode::WithoutReplacement => index::sample(&mut rng, m, d).into_vec(),
            }
        })
        .collect();
    Ok(BipartiteMultigraph { m, adjacency })
}
