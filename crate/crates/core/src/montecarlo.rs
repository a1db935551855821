//! Seeded, parallel failure-rate experiments.
//!
//! Trial `t` of grid point `i` in seed stream `s` samples its graph from
//! `derive_seed(base_seed, [s, i, t])`, so each trial is a pure function of
//! its coordinates and the failure count does not depend on scheduling or
//! thread count. Stream 0 is used for fixed-mode runs and stream 1 for
//! binomial-mode runs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{sample_graph, DegreeSpec, SamplingMode};
use crate::matching::hopcroft_karp;
use crate::seed::derive_seed;
use crate::threshold::ThresholdQuery;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Failures out of `trials` at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    /// `alpha` or `c`, depending on the sweep.
    pub param: f64,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Average mean degree of the spec actually simulated.
    pub realized_dbar: f64,
}

impl ExperimentRecord {
    pub fn new(param: f64, trials: u64, failures: u64, realized_dbar: f64) -> Self {
        let rate = failures as f64 / trials as f64;
        let (ci_low, ci_high) = wilson_interval(failures, trials);
        Self { param, trials, failures, rate, ci_low, ci_high, realized_dbar }
    }
}

/// Wilson score interval at 95%, widened if needed so that it contains the
/// observed rate despite rounding.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Newcombe's interval for a difference of two proportions, built from the
/// two Wilson intervals.
pub fn difference_interval(a: &ExperimentRecord, b: &ExperimentRecord) -> (f64, f64) {
    let diff = a.rate - b.rate;
    let low = diff - ((a.rate - a.ci_low).powi(2) + (b.ci_high - b.rate).powi(2)).sqrt();
    let high = diff + ((a.ci_high - a.rate).powi(2) + (b.rate - b.ci_low).powi(2)).sqrt();
    (low.min(diff), high.max(diff))
}

/// Counts trials whose graph has no left-perfect matching.
pub fn count_failures(
    spec: &DegreeSpec,
    m: usize,
    trials: u64,
    base_seed: u64,
    stream: u64,
    grid_index: u64,
    sampling: SamplingMode,
) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one right node".into()));
    }
    if sampling == SamplingMode::WithoutReplacement {
        for dist in spec.distributions() {
            dist.validate_for(m)?;
        }
    }
    if spec.node_count() > m {
        return Ok(trials);
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = sample_graph(spec, m, derive_seed(base_seed, &[stream, grid_index, t]), sampling)?;
            Ok(u64::from(!hopcroft_karp(&g.support_adjacency(), m).is_left_perfect()))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Failure rate of `spec` over `trials` graphs; `param` is `n/m`.
pub fn failure_rate(
    spec: &DegreeSpec,
    m: usize,
    trials: u64,
    base_seed: u64,
    sampling: SamplingMode,
) -> Result<ExperimentRecord> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let failures = count_failures(spec, m, trials, base_seed, 0, 0, sampling)?;
    Ok(ExperimentRecord::new(spec.node_count() as f64 / m as f64, trials, failures, spec.average_mean()))
}

/// `round(alpha n)` nodes (ties to even) of degree `l`, the rest `l + 1`.
pub fn fixed_split_spec(n: usize, l: u32, alpha: f64) -> Result<DegreeSpec> {
    let count_low = (alpha * n as f64).round_ties_even() as usize;
    DegreeSpec::two_point_fixed(n, l, count_low.min(n))
}

/// Fixed near-optimal spec for average degree `dbar`, rounding the split.
pub fn fixed_spec(n: usize, dbar: f64) -> Result<DegreeSpec> {
    let q = ThresholdQuery::from_dbar(dbar)?;
    fixed_split_spec(n, q.l, q.alpha)
}

/// Every node independently of degree `floor(dbar)` or `floor(dbar) + 1`
/// with mean `dbar`.
pub fn binomial_spec(n: usize, dbar: f64) -> Result<DegreeSpec> {
    let q = ThresholdQuery::from_dbar(dbar)?;
    DegreeSpec::two_point_iid(n, q.l, q.alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    Fixed,
    Binomial,
}

impl ExperimentMode {
    pub fn stream(self) -> u64 {
        match self {
            Self::Fixed => 0,
            Self::Binomial => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Fraction of degree-`floor(dbar)` nodes, at fixed load `c`.
    AlphaGrid { alphas: Vec<f64>, c: f64 },
    /// Loads `c = n/m`.
    CGrid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub dbar: f64,
    pub mode: ExperimentMode,
    pub sweep: Sweep,
    pub trials: u64,
    pub base_seed: u64,
    pub sampling: SamplingMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        ThresholdQuery::from_dbar(self.dbar)?;
        let check_c = |c: f64| {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::InvalidParameter(format!("load c = {c} outside (0, 1]")));
            }
            if self.node_count(c) < 2 {
                return Err(Error::InvalidParameter(format!("load c = {c} gives fewer than 2 left nodes")));
            }
            Ok(())
        };
        match &self.sweep {
            Sweep::AlphaGrid { alphas, c } => {
                check_c(*c)?;
                if alphas.is_empty() {
                    return Err(Error::InvalidParameter("empty alpha grid".into()));
                }
                if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                    return Err(Error::InvalidParameter(format!("alpha = {a} outside [0, 1]")));
                }
            }
            Sweep::CGrid(cs) => {
                if cs.is_empty() {
                    return Err(Error::InvalidParameter("empty c grid".into()));
                }
                cs.iter().try_for_each(|&c| check_c(c))?;
            }
        }
        Ok(())
    }

    /// `round(c m)`, ties to even.
    pub fn node_count(&self, c: f64) -> usize {
        (c * self.m as f64).round_ties_even() as usize
    }

    fn spec_for_c(&self, mode: ExperimentMode, c: f64) -> Result<DegreeSpec> {
        let n = self.node_count(c);
        match mode {
            ExperimentMode::Fixed => fixed_spec(n, self.dbar),
            ExperimentMode::Binomial => binomial_spec(n, self.dbar),
        }
    }

    fn run(&self, mode: ExperimentMode, grid_index: usize, param: f64, spec: &DegreeSpec) -> Result<ExperimentRecord> {
        let failures =
            count_failures(spec, self.m, self.trials, self.base_seed, mode.stream(), grid_index as u64, self.sampling)?;
        Ok(ExperimentRecord::new(param, self.trials, failures, spec.average_mean()))
    }
}

/// One record per `alpha`: `round(alpha n)` nodes of degree `floor(dbar)`
/// and the rest one higher (fixed mode), or each node independently of the
/// lower degree with probability `alpha` (binomial mode).
pub fn sweep_alpha(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let Sweep::AlphaGrid { alphas, c } = &cfg.sweep else {
        return Err(Error::InvalidParameter("sweep_alpha needs an alpha grid".into()));
    };
    let n = cfg.node_count(*c);
    let l = cfg.dbar.floor() as u32;
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let spec = match cfg.mode {
                ExperimentMode::Fixed => fixed_split_spec(n, l, alpha)?,
                ExperimentMode::Binomial => DegreeSpec::two_point_iid(n, l, alpha)?,
            };
            cfg.run(cfg.mode, i, alpha, &spec)
        })
        .collect()
}

/// One record per load `c` in the configured mode.
pub fn sweep_c(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let Sweep::CGrid(cs) = &cfg.sweep else {
        return Err(Error::InvalidParameter("sweep_c needs a c grid".into()));
    };
    cs.iter().enumerate().map(|(i, &c)| cfg.run(cfg.mode, i, c, &cfg.spec_for_c(cfg.mode, c)?)).collect()
}

/// Fixed minus binomial failure rate at one load.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub c: f64,
    pub diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub fixed: ExperimentRecord,
    pub binomial: ExperimentRecord,
}

/// Runs both modes on the configured c grid (the configured mode is ignored).
pub fn compare_fixed_binomial(cfg: &ExperimentConfig) -> Result<Vec<Comparison>> {
    cfg.validate()?;
    let Sweep::CGrid(cs) = &cfg.sweep else {
        return Err(Error::InvalidParameter("comparison needs a c grid".into()));
    };
    cs.iter()
        .enumerate()
        .map(|(i, &c)| {
            let fixed = cfg.run(ExperimentMode::Fixed, i, c, &cfg.spec_for_c(ExperimentMode::Fixed, c)?)?;
            let binomial = cfg.run(ExperimentMode::Binomial, i, c, &cfg.spec_for_c(ExperimentMode::Binomial, c)?)?;
            let (ci_low, ci_high) = difference_interval(&fixed, &binomial);
            Ok(Comparison { c, diff: fixed.rate - binomial.rate, ci_low, ci_high, fixed, binomial })
        })
        .collect()
}

pub const RECORD_HEADER: &str = "param,trials,failures,rate,ci_low,ci_high,realized_dbar";
pub const COMPARISON_HEADER: &str = "c,diff,ci_low,ci_high,rate_fixed,rate_binomial";

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.param, r.trials, r.failures, r.rate, r.ci_low, r.ci_high, r.realized_dbar
        ));
    }
    out
}

pub fn comparisons_to_csv(rows: &[Comparison]) -> String {
    let mut out = format!("{COMPARISON_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.c, r.diff, r.ci_low, r.ci_high, r.fixed.rate, r.binomial.rate
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DegreeDistribution;

    fn c_config(cs: Vec<f64>, trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            m: 200,
            dbar: 3.5,
            mode: ExperimentMode::Fixed,
            sweep: Sweep::CGrid(cs),
            trials,
            base_seed: 42,
            sampling: SamplingMode::WithReplacement,
        }
    }

    #[test]
    fn wilson_edges() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(100, 100);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.95);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert!((lo - 0.40383).abs() < 1e-4);
    }

    #[test]
    fn forced_collision_always_fails() {
        let spec = DegreeSpec::new(vec![DegreeDistribution::point_mass(1).unwrap(); 2]).unwrap();
        let r = failure_rate(&spec, 1, 50, 3, SamplingMode::WithReplacement).unwrap();
        assert_eq!((r.failures, r.rate), (50, 1.0));
        assert_eq!(r.param, 2.0);
    }

    #[test]
    fn single_node_never_fails() {
        let spec = DegreeSpec::new(vec![DegreeDistribution::point_mass(1).unwrap()]).unwrap();
        let r = failure_rate(&spec, 5, 10_000, 3, SamplingMode::WithReplacement).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.ci_low <= r.rate && r.rate <= r.ci_high);
    }

    #[test]
    fn fixed_spec_rounds_half_to_even() {
        // 0.5 * 5 = 2.5 rounds to 2 nodes of degree 3.
        let spec = fixed_spec(5, 3.5).unwrap();
        assert_eq!(spec.distributions().iter().filter(|d| d.max_degree() == 3).count(), 2);
        assert!((spec.average_mean() - 3.6).abs() < 1e-12);
        let spec = fixed_spec(4, 3.0).unwrap();
        assert_eq!(spec.average_mean(), 3.0);
    }

    #[test]
    fn validation() {
        assert!(c_config(vec![0.5], 0).validate().is_err());
        assert!(c_config(vec![1.5], 1).validate().is_err());
        assert!(c_config(vec![0.001], 1).validate().is_err());
        assert!(c_config(vec![], 1).validate().is_err());
        let mut cfg = c_config(vec![0.5], 1);
        cfg.sweep = Sweep::AlphaGrid { alphas: vec![0.5, 1.1], c: 0.5 };
        assert!(cfg.validate().is_err());
        assert!(sweep_c(&cfg).is_err());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = c_config(vec![0.9, 0.97], 300);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sweep_c(&cfg).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn tiny_loads_compare_equal() {
        let rows = compare_fixed_binomial(&c_config(vec![0.01], 50)).unwrap();
        assert_eq!(rows[0].diff, 0.0);
        assert!(rows[0].ci_low <= 0.0 && rows[0].ci_high >= 0.0);
    }

    #[test]
    fn alpha_sweep_of_one_equals_failure_rate() {
        let mut cfg = c_config(vec![], 200);
        cfg.sweep = Sweep::AlphaGrid { alphas: vec![0.5], c: 0.95 };
        let records = sweep_alpha(&cfg).unwrap();
        let direct = failure_rate(&fixed_split_spec(190, 3, 0.5).unwrap(), 200, 200, 42, SamplingMode::WithReplacement)
            .unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].failures, direct.failures);
        assert_eq!(records[0].param, 0.5);
    }

    #[test]
    fn csv_layout() {
        let csv = records_to_csv(&[ExperimentRecord::new(0.5, 4, 1, 3.5)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(RECORD_HEADER));
        assert!(lines.next().unwrap().starts_with("0.5,4,1,0.25,"));
    }
}
