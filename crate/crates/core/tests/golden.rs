//! Values computed independently (high-precision root finding and exhaustive
//! enumeration in exact arithmetic outside this crate) and frozen here.

use leftmatch::failprob::{
    degree_transfer_check, fail_closed_form, fail_exact, fail_total, fail_total_exact, success_probability_exact,
    NormalizedBI,
};
use leftmatch::oracle::{fail_by_enumeration, success_probability_by_enumeration};
use leftmatch::structure::BIVector;
use leftmatch::threshold::{core_density, threshold_c_star, xi_fixed_point, ThresholdQuery};
use leftmatch::{BipartiteMultigraph, DegreeDistribution, DegreeSpec, SamplingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn point(d: u32) -> DegreeDistribution {
    DegreeDistribution::point_mass(d).unwrap()
}

const THRESHOLDS: [(f64, f64); 7] = [
    // dbar = 2.1 has l = 2: the core appears continuously at 2 alpha c = 1
    // and is already denser than 1 there, so c* = 1/1.8.
    (2.1, 0.555_555_555_556),
    (2.5, 0.810_342_363_521),
    (3.0, 0.917_935_276_658),
    (3.5, 0.957_079_637_689),
    (4.0, 0.976_770_164_878),
    (4.5, 0.986_863_762_884),
    (5.0, 0.992_438_391_262),
];

#[test]
fn thresholds_match_reference() {
    for (dbar, expected) in THRESHOLDS {
        let got = threshold_c_star(dbar).unwrap();
        assert!((got - expected).abs() < 1e-6, "dbar={dbar}: {got} vs {expected}");
    }
}

#[test]
fn thresholds_are_continuous_in_dbar() {
    let values: Vec<f64> = THRESHOLDS.iter().map(|&(d, _)| threshold_c_star(d).unwrap()).collect();
    // Between 2.1 and 2.5 the threshold rises by about 0.255, the one step
    // wider than 0.2 on this grid.
    assert!((values[1] - values[0] - 0.254_787).abs() < 1e-3);
    for pair in values[1..].windows(2) {
        assert!((pair[1] - pair[0]).abs() < 0.2, "{pair:?}");
    }
    // A finer grid has no jumps: c* is continuous and increasing. Starts at
    // 2.25 because for l = 2 and large alpha the fixed-point iteration runs
    // to its cap and each value takes seconds.
    let mut previous = threshold_c_star(2.25).unwrap();
    for i in 1..=55 {
        let dbar = 2.25 + i as f64 * 0.05;
        let c = threshold_c_star(dbar).unwrap();
        assert!(c >= previous - 1e-9 && c - previous < 0.05, "dbar={dbar}: {previous} -> {c}");
        previous = c;
    }
}

#[test]
fn fixed_point_values() {
    let k3 = ThresholdQuery::new(3, 1.0).unwrap();
    assert!((xi_fixed_point(0.918, &k3) - 2.149_475_927_820).abs() < 1e-9);
    let mixed = ThresholdQuery::new(3, 0.5).unwrap();
    assert!((xi_fixed_point(0.957, &mixed) - 2.894_707_895_744).abs() < 1e-9);
    let d = core_density(0.957, &mixed).density.unwrap();
    assert!((d - 0.999_916_787_338).abs() < 1e-9);
}

#[test]
fn uniform_closed_form_threshold() {
    // c* = xi / (k (1 - e^-xi)^(k-1)) with xi solving
    // k = xi (1 - e^-xi) / (1 - e^-xi - xi e^-xi).
    for (k, expected) in [(3, 0.917_935_276_658), (4, 0.976_770_164_878), (5, 0.992_438_391_262)] {
        assert!((threshold_c_star(k as f64).unwrap() - expected).abs() < 1e-6);
    }
}

#[test]
fn fail_on_four_right_nodes() {
    // Right 0 blocked, right 1 isolated, {2, 3} one class: beta = 1/4,
    // gamma = (1/4, 1/2).
    let g = BipartiteMultigraph::new(4, vec![vec![0], vec![2, 3]]).unwrap();
    assert_eq!(fail_by_enumeration(2, 3, &g).unwrap(), rational(77, 256));
    assert_eq!(fail_total_exact(2, 3, &g).unwrap(), rational(77, 256));
    let nbi = NormalizedBI::new(0.25, vec![0.25, 0.5]).unwrap();
    assert!((fail_closed_form(2, 3, &nbi) - 77.0 / 256.0).abs() < 1e-15);
    assert_eq!(fail_exact(2, 3, &BIVector::new(1, vec![1, 2]).unwrap()), rational(77, 256));
}

#[test]
fn fail_on_empty_residual() {
    // No other nodes: every right node is free and forms its own class.
    let g = BipartiteMultigraph::new(3, vec![]).unwrap();
    for (dy, dz) in [(1, 1), (1, 2), (2, 2), (3, 1)] {
        assert_eq!(fail_total_exact(dy, dz, &g).unwrap(), fail_by_enumeration(dy, dz, &g).unwrap());
    }
    assert_eq!(fail_total_exact(1, 1, &g).unwrap(), rational(1, 3));
    assert!((fail_total(1, 1, &g).unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn success_probabilities() {
    let single = DegreeSpec::new(vec![point(1), point(1)]).unwrap();
    assert_eq!(success_probability_exact(&single, 2, SamplingMode::WithReplacement).unwrap(), 0.5);
    let double = DegreeSpec::new(vec![point(2), point(2)]).unwrap();
    assert!((success_probability_exact(&double, 2, SamplingMode::WithReplacement).unwrap() - 0.875).abs() < 1e-15);
}

#[test]
fn concentrating_one_node_helps() {
    let spread = DegreeDistribution::new(&[(1, 0.5), (3, 0.5)]).unwrap();
    let before = DegreeSpec::new(vec![point(1), point(1), spread]).unwrap();
    let after = DegreeSpec::new(vec![point(1), point(1), point(2)]).unwrap();
    let p0 = success_probability_exact(&before, 3, SamplingMode::WithReplacement).unwrap();
    let p1 = success_probability_exact(&after, 3, SamplingMode::WithReplacement).unwrap();
    assert!((p0 - 28.0 / 81.0).abs() < 1e-15);
    assert!((p1 - 10.0 / 27.0).abs() < 1e-15);
}

#[test]
fn exact_dp_matches_enumeration() {
    let specs = [
        (vec![DegreeDistribution::new(&[(1, 0.3), (2, 0.7)]).unwrap(), point(2), point(1)], 3),
        (vec![DegreeDistribution::new(&[(1, 0.5), (3, 0.5)]).unwrap(), point(2)], 4),
        (vec![point(3), point(3), point(3)], 3),
        (vec![point(1); 4], 4),
    ];
    for (nodes, m) in specs {
        let spec = DegreeSpec::new(nodes).unwrap();
        for mode in [SamplingMode::WithReplacement, SamplingMode::WithoutReplacement] {
            let dp = success_probability_exact(&spec, m, mode).unwrap();
            let brute = success_probability_by_enumeration(&spec, m, mode).unwrap();
            assert!((dp - brute).abs() < 1e-12, "m={m} {mode:?}: {dp} vs {brute}");
        }
    }
}

#[test]
fn transfer_without_blocked_nodes_is_an_equality() {
    // Both sides reduce to sum_j gamma_j^(k+l) = 2 * (1/2)^4.
    let r = degree_transfer_check(3, 1, &NormalizedBI::new(0.0, vec![0.5, 0.5]).unwrap()).unwrap();
    assert_eq!((r.lhs, r.rhs, r.holds), (0.125, 0.125, false));
    let bi = BIVector::new(0, vec![2, 3]).unwrap();
    assert_eq!(fail_exact(5, 1, &bi), fail_exact(4, 2, &bi));
    let expected = 0.4f64.powi(6) + 0.6f64.powi(6);
    assert!((fail_exact(5, 1, &bi).to_f64().unwrap() - expected).abs() < 1e-15);
}
