//! Conditional failure probabilities for two additional left nodes.
//!
//! Fix a matchable graph on all but two left nodes `y` and `z` and let `B` be
//! its blocked right nodes and `I_1, ..., I_r` the classes of the non-blocked
//! ones. Adding `y` and `z` with neighbour sets `N_y`, `N_z` fails exactly
//! when `N_y ⊆ B`, `N_z ⊆ B`, or both sets fall into a single `B ∪ I_j`. With
//! `beta = |B|/m` and `gamma_j = |I_j|/m`, neighbours drawn with replacement
//! fail with probability
//!
//! ```text
//! fail(dy, dz) = beta^dy + beta^dz - beta^(dy+dz)
//!              + sum_j [(gamma_j + beta)^dy - beta^dy] * [(gamma_j + beta)^dz - beta^dz]
//! ```
//!
//! This module evaluates that expression in binary64 and exactly, computes
//! exact success probabilities of small random graphs, and checks the
//! inequalities between `fail` values that govern how degree mass should be
//! distributed between nodes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{BipartiteMultigraph, DegreeDistribution, DegreeSpec, SamplingMode};
use crate::structure::{bi_partition, BIVector};

/// Tolerance on `beta + sum(gamma) = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Largest right side handled by [`success_probability_exact`].
pub const EXACT_MAX_RIGHT: usize = 10;

/// Work budget (family × neighbour-set transitions) for
/// [`success_probability_exact`].
pub const EXACT_WORK_LIMIT: u64 = 100_000_000;

/// A BI-vector scaled by `1/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBI {
    beta: f64,
    gammas: Vec<f64>,
}

impl NormalizedBI {
    pub fn new(beta: f64, mut gammas: Vec<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta = {beta} outside [0, 1)")));
        }
        if gammas.is_empty() || gammas.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::InvalidParameter("class fractions must be positive".into()));
        }
        let total = beta + gammas.iter().sum::<f64>();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidParameter(format!("beta + sum(gamma) = {total}, expected 1")));
        }
        gammas.sort_by(f64::total_cmp);
        Ok(Self { beta, gammas })
    }

    pub fn from_bi(bi: &BIVector) -> Result<Self> {
        let m = bi.m() as f64;
        Self::new(bi.b as f64 / m, bi.sizes.iter().map(|&i| i as f64 / m).collect())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn r(&self) -> usize {
        self.gammas.len()
    }
}

fn powi(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

/// Failure probability for degrees `dy`, `dz` given the normalised
/// BI-vector. A single class always fails, so `r = 1` returns exactly 1.
///
/// ```
/// use leftmatch::failprob::{fail_closed_form, NormalizedBI};
///
/// let nbi = NormalizedBI::new(0.25, vec![0.25, 0.5]).unwrap();
/// assert!((fail_closed_form(2, 3, &nbi) - 77.0 / 256.0).abs() < 1e-15);
/// ```
pub fn fail_closed_form(dy: u32, dz: u32, nbi: &NormalizedBI) -> f64 {
    if nbi.r() == 1 {
        return 1.0;
    }
    let b = nbi.beta;
    let (by, bz) = (powi(b, dy), powi(b, dz));
    let classes: f64 = nbi
        .gammas
        .iter()
        .map(|&g| (powi(g + b, dy) - by) * (powi(g + b, dz) - bz))
        .sum();
    (by + bz - by * bz + classes).clamp(0.0, 1.0)
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rpow(x: &BigRational, e: u32) -> BigRational {
    x.pow(e as i32)
}

/// [`fail_closed_form`] in exact rational arithmetic, with `m = bi.m()`.
pub fn fail_exact(dy: u32, dz: u32, bi: &BIVector) -> BigRational {
    let m = bi.m();
    let b = ratio(bi.b, m);
    let (by, bz) = (rpow(&b, dy), rpow(&b, dz));
    let mut total = &by + &bz - &by * &bz;
    for &i in &bi.sizes {
        let s = ratio(i, m) + &b;
        total += (rpow(&s, dy) - &by) * (rpow(&s, dz) - &bz);
    }
    total
}

/// Failure probability of adding two nodes of degrees `dy`, `dz` to the
/// fixed residual graph `g_rest`.
pub fn fail_total(dy: u32, dz: u32, g_rest: &BipartiteMultigraph) -> Result<f64> {
    let bi = bi_partition(g_rest)?.bi;
    if bi.r() == 0 {
        // Every right node is blocked.
        return Ok(1.0);
    }
    Ok(fail_closed_form(dy, dz, &NormalizedBI::from_bi(&bi)?))
}

/// [`fail_total`] in exact arithmetic.
pub fn fail_total_exact(dy: u32, dz: u32, g_rest: &BipartiteMultigraph) -> Result<BigRational> {
    Ok(fail_exact(dy, dz, &bi_partition(g_rest)?.bi))
}

/// Probability that a node with distribution `dist` picks one particular
/// neighbour set of each size `a = 0..=m`.
fn neighbor_set_weights(dist: &DegreeDistribution, m: usize, mode: SamplingMode) -> Result<Vec<f64>> {
    let mut weights = vec![0.0; m + 1];
    for &(d, p) in dist.support() {
        let d = d as usize;
        match mode {
            SamplingMode::WithoutReplacement => {
                if d > m {
                    return Err(Error::DegreeExceedsM { degree: d as u32, m });
                }
                weights[d] += p / binomial(m, d).to_f64().unwrap_or(f64::INFINITY);
            }
            SamplingMode::WithReplacement => {
                let total = BigInt::from(m).pow(d as u32);
                for (a, w) in weights.iter_mut().enumerate().skip(1).take(d.min(m)) {
                    let onto = surjections(d, a);
                    *w += p * BigRational::new(onto, total.clone()).to_f64().unwrap_or(0.0);
                }
            }
        }
    }
    Ok(weights)
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Number of maps from a `d`-set onto an `a`-set.
fn surjections(d: usize, a: usize) -> BigInt {
    let mut total = BigInt::zero();
    for j in 0..=a {
        let term = binomial(a, j) * BigInt::from(a - j).pow(d as u32);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Set of right-node subsets, as a bitset indexed by subset mask.
type Family = Vec<u64>;

fn family_members(f: &Family) -> impl Iterator<Item = usize> + '_ {
    f.iter().enumerate().flat_map(|(w, &word)| {
        let mut bits = word;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let t = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(w * 64 + t)
        })
    })
}

/// Exact probability that a graph drawn from `spec` with `m` right nodes has
/// a left-perfect matching.
///
/// Nodes are added one at a time. The state after `i` nodes is the family of
/// `i`-subsets of right nodes that the first `i` nodes can be matched onto
/// exactly; adding a node with neighbour set `A` maps the family to
/// `{R ∪ {v} : R in family, v in A \ R}`. An empty family means failure.
/// Neighbour sets are enumerated as sets weighted by their probability, so
/// the state space does not depend on the degrees.
pub fn success_probability_exact(spec: &DegreeSpec, m: usize, mode: SamplingMode) -> Result<f64> {
    if m == 0 || m > EXACT_MAX_RIGHT {
        return Err(Error::InstanceTooLarge(format!(
            "exact success probability supports 1..={EXACT_MAX_RIGHT} right nodes, got {m}"
        )));
    }
    let subsets = 1usize << m;
    let words = subsets.div_ceil(64);
    let mut start: Family = vec![0; words];
    start[0] = 1;
    let mut states: BTreeMap<Family, f64> = BTreeMap::from([(start, 1.0)]);
    let mut work: u64 = 0;
    for dist in spec.distributions() {
        let weights = neighbor_set_weights(dist, m, mode)?;
        let mut next: BTreeMap<Family, f64> = BTreeMap::new();
        for (family, &p) in &states {
            let members: Vec<usize> = family_members(family).collect();
            for set in 1..subsets {
                let w = weights[set.count_ones() as usize];
                if w == 0.0 {
                    continue;
                }
                work += members.len() as u64;
                if work > EXACT_WORK_LIMIT {
                    return Err(Error::InstanceTooLarge(format!(
                        "exact success probability exceeded {EXACT_WORK_LIMIT} steps"
                    )));
                }
                let mut grown: Family = vec![0; words];
                let mut any = false;
                for &r in &members {
                    let mut free = set & !r;
                    while free != 0 {
                        let bit = free & free.wrapping_neg();
                        let s = r | bit;
                        grown[s / 64] |= 1 << (s % 64);
                        any = true;
                        free &= free - 1;
                    }
                }
                if any {
                    *next.entry(grown).or_insert(0.0) += p * w;
                }
            }
        }
        states = next;
    }
    Ok(states.values().sum::<f64>().min(1.0))
}

/// Moves mass `eps` from degrees `low` and `high` (at least two apart) to
/// `low + 1` and `high - 1`. The mean is unchanged.
pub fn epsilon_shift(dist: &DegreeDistribution, low: u32, high: u32, eps: f64) -> Result<DegreeDistribution> {
    if high < low + 2 {
        return Err(Error::PreconditionViolated(format!("degrees {low} and {high} are less than 2 apart")));
    }
    let limit = dist.probability(low).min(dist.probability(high));
    if !(eps > 0.0 && eps <= limit) {
        return Err(Error::PreconditionViolated(format!("shift {eps} outside (0, {limit}]")));
    }
    let mut mass: BTreeMap<u32, f64> = dist.support().iter().copied().collect();
    *mass.entry(low).or_insert(0.0) -= eps;
    *mass.entry(high).or_insert(0.0) -= eps;
    *mass.entry(low + 1).or_insert(0.0) += eps;
    *mass.entry(high - 1).or_insert(0.0) += eps;
    let entries: Vec<(u32, f64)> = mass.into_iter().map(|(d, p)| (d, p.max(0.0))).collect();
    DegreeDistribution::new(&entries)
}

/// Both sides of a strict inequality `lhs > rhs`, plus named intermediate
/// quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub derived: BTreeMap<&'static str, f64>,
}

impl InequalityReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, holds: lhs > rhs, derived: BTreeMap::new() }
    }

    fn with(mut self, key: &'static str, value: f64) -> Self {
        self.derived.insert(key, value);
        self
    }
}

/// Exact counterpart of [`InequalityReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactInequality {
    pub lhs: BigRational,
    pub rhs: BigRational,
}

impl ExactInequality {
    pub fn holds(&self) -> bool {
        self.lhs > self.rhs
    }

    pub fn is_tie(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn need_classes(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::PreconditionViolated(format!("need at least 2 classes, got {r}")));
    }
    Ok(())
}

fn transfer_pre(k: u32, l: u32, r: usize) -> Result<()> {
    if l < 1 || k < l + 2 {
        return Err(Error::PreconditionViolated(format!("need l >= 1 and k - l >= 2, got k={k}, l={l}")));
    }
    need_classes(r)
}

/// Moving one unit of degree from the larger to the smaller node:
/// `fail(k, l) > fail(k-1, l+1)` for `k - l >= 2`.
pub fn degree_transfer_check(k: u32, l: u32, nbi: &NormalizedBI) -> Result<InequalityReport> {
    transfer_pre(k, l, nbi.r())?;
    let lhs = fail_closed_form(k, l, nbi);
    let rhs = fail_closed_form(k - 1, l + 1, nbi);
    // Same comparison after cancelling common terms; better conditioned.
    let b = nbi.beta;
    let gap = (1.0 - b) * (powi(b, l) - powi(b, k - 1))
        - nbi
            .gammas
            .iter()
            .map(|&g| g * (powi(b, l) * powi(g + b, k - 1) - powi(b, k - 1) * powi(g + b, l)))
            .sum::<f64>();
    Ok(InequalityReport::new(lhs, rhs).with("reduced_gap", gap))
}

/// Exact version of [`degree_transfer_check`].
pub fn degree_transfer_exact(k: u32, l: u32, bi: &BIVector) -> Result<ExactInequality> {
    transfer_pre(k, l, bi.r())?;
    Ok(ExactInequality { lhs: fail_exact(k, l, bi), rhs: fail_exact(k - 1, l + 1, bi) })
}

fn diagonal_pre(l: u32, r: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::PreconditionViolated(format!("need l >= 2, got {l}")));
    }
    need_classes(r)
}

/// `fail(l+1, l) + fail(l, l-1) > 2 fail(l, l)`.
///
/// Also reports `K0 = fail(l, l-1) + fail(l+1, l) - fail(l, l) - fail(l+1, l-1)`
/// and `K1 = fail(l+1, l-1) - fail(l, l)`; the inequality is `K1 > -K0`.
pub fn diagonal_convexity_check(l: u32, nbi: &NormalizedBI) -> Result<InequalityReport> {
    diagonal_pre(l, nbi.r())?;
    let f = |a, b| fail_closed_form(a, b, nbi);
    let (up, down, mid, wide) = (f(l + 1, l), f(l, l - 1), f(l, l), f(l + 1, l - 1));
    Ok(InequalityReport::new(up + down, 2.0 * mid)
        .with("K0", down + up - mid - wide)
        .with("K1", wide - mid))
}

/// Exact version of [`diagonal_convexity_check`].
pub fn diagonal_convexity_exact(l: u32, bi: &BIVector) -> Result<ExactInequality> {
    diagonal_pre(l, bi.r())?;
    Ok(ExactInequality {
        lhs: fail_exact(l + 1, l, bi) + fail_exact(l, l - 1, bi),
        rhs: fail_exact(l, l, bi) * BigRational::from_integer(BigInt::from(2)),
    })
}

/// `fail(l, l) + fail(l+1, l+1) > 2 fail(l, l+1)`, i.e. `K > 0`.
///
/// Evaluated in the cancelled form
/// `sum_j [(gamma_j + beta)^l (1 - gamma_j - beta) - beta^l (1 - beta)]^2 > beta^(2l) (1 - beta)^2`.
/// This can go either way. `K` from the raw `fail` values is reported as
/// `derived["K"]`.
pub fn mixed_convexity_check(l: u32, nbi: &NormalizedBI) -> Result<InequalityReport> {
    diagonal_pre(l, nbi.r())?;
    let b = nbi.beta;
    let base = powi(b, l) * (1.0 - b);
    let lhs: f64 = nbi
        .gammas
        .iter()
        .map(|&g| {
            let t = powi(g + b, l) * (1.0 - g - b) - base;
            t * t
        })
        .sum();
    let rhs = base * base;
    let f = |a, c| fail_closed_form(a, c, nbi);
    let k = f(l, l) - 2.0 * f(l, l + 1) + f(l + 1, l + 1);
    Ok(InequalityReport::new(lhs, rhs).with("K", k))
}

/// Exact version of [`mixed_convexity_check`] (cancelled form).
pub fn mixed_convexity_exact(l: u32, bi: &BIVector) -> Result<ExactInequality> {
    diagonal_pre(l, bi.r())?;
    let m = bi.m();
    let b = ratio(bi.b, m);
    let one = BigRational::one();
    let base = rpow(&b, l) * (&one - &b);
    let mut lhs = BigRational::zero();
    for &i in &bi.sizes {
        let s = ratio(i, m) + &b;
        let t = rpow(&s, l) * (&one - &s) - &base;
        lhs += &t * &t;
    }
    Ok(ExactInequality { lhs, rhs: &base * &base })
}

/// `(b/m)^l (1 - b/m) > (b/m)^(k-1) (1 - b/m)` for `0 < b < m`, `k - l >= 2`:
/// concentrating a node's degree strictly lowers the chance that all its
/// picks land on `b` blocked nodes.
pub fn blocked_power_check(l: u32, k: u32, b: usize, m: usize) -> Result<InequalityReport> {
    if b == 0 || b >= m {
        return Err(Error::PreconditionViolated(format!("need 0 < b < m, got b={b}, m={m}")));
    }
    if k < l + 2 {
        return Err(Error::PreconditionViolated(format!("need k - l >= 2, got k={k}, l={l}")));
    }
    let x = b as f64 / m as f64;
    Ok(InequalityReport::new(powi(x, l) * (1.0 - x), powi(x, k - 1) * (1.0 - x)))
}

/// Exact version of [`blocked_power_check`].
pub fn blocked_power_exact(l: u32, k: u32, b: usize, m: usize) -> Result<ExactInequality> {
    blocked_power_check(l, k, b, m)?;
    let x = ratio(b, m);
    let rest = BigRational::one() - &x;
    Ok(ExactInequality { lhs: rpow(&x, l) * &rest, rhs: rpow(&x, k - 1) * rest })
}

/// Degree probabilities `p = rho_y(l)`, `q = rho_z(l-1 or l)` and a shift
/// `eps` applied as `p + eps`, `q - eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
}

impl PerturbationSpec {
    pub fn new(p: f64, q: f64, epsilon: f64) -> Result<Self> {
        let unit = 0.0..=1.0;
        if !unit.contains(&p) || !unit.contains(&q) {
            return Err(Error::InvalidParameter(format!("p={p}, q={q} must lie in [0, 1]")));
        }
        if !unit.contains(&(p + epsilon)) || !unit.contains(&(q - epsilon)) {
            return Err(Error::InvalidParameter(format!("shift {epsilon} moves masses outside [0, 1]")));
        }
        Ok(Self { p, q, epsilon })
    }

    /// `L = (p - q) K0 + K1`.
    pub fn l_value(&self, k0: f64, k1: f64) -> f64 {
        (self.p - self.q) * k0 + k1
    }

    /// Change in failure probability, `-eps^2 K0 - eps L`; negative means
    /// the shift helps.
    pub fn failure_change(&self, k0: f64, k1: f64) -> f64 {
        let e = self.epsilon;
        -e * e * k0 - e * self.l_value(k0, k1)
    }
}

/// Direction of a small shift that strictly lowers the failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationVerdict {
    ImproveWithPositiveEps,
    ImproveWithNegativeEps,
    NoStrictImprovement,
}

/// Sign analysis of `-eps^2 K0 - eps L < 0` for small `eps != 0`.
///
/// For small `|eps|` the linear term dominates, so the sign of `eps` follows
/// the sign of `L`. When `L = 0` only `K0 > 0` helps (either sign works; the
/// positive one is reported). `K0 = K1 = 0` and `K0 < 0 = L` give no strict
/// improvement.
pub fn perturbation_sign(spec: &PerturbationSpec, k0: f64, k1: f64) -> PerturbationVerdict {
    let l = spec.l_value(k0, k1);
    if l > 0.0 {
        PerturbationVerdict::ImproveWithPositiveEps
    } else if l < 0.0 {
        PerturbationVerdict::ImproveWithNegativeEps
    } else if k0 > 0.0 {
        PerturbationVerdict::ImproveWithPositiveEps
    } else {
        PerturbationVerdict::NoStrictImprovement
    }
}
