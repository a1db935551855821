//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use leftmatch::failprob::{mixed_convexity_check, NormalizedBI};
use leftmatch::montecarlo::{compare_fixed_binomial, sweep_c, ExperimentConfig, ExperimentMode, Sweep};
use leftmatch::threshold::threshold_c_star;
use leftmatch::verify::{concentration_suite, diagonal_grid, failprob_suite, structure_suite, transfer_grid};
use leftmatch::SamplingMode;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn threshold_cli() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_leftmatch")).args(["threshold", "--dbar", "3.5"]).output().unwrap();
    let elapsed = start.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let value: Option<f64> = text.lines().nth(1).and_then(|l| l.split(',').nth(1)).and_then(|v| v.parse().ok());
    let pass = out.status.success() && value.is_some_and(|c| (c - 0.957).abs() <= 0.002) && elapsed < Duration::from_secs(1);
    outcome(pass, format!("c*={value:?} time={elapsed:.2?}"))
}

/// Uniform degree `k`: `k = xi (1 - e^-xi) / (1 - e^-xi - xi e^-xi)` by
/// bisection, then `c* = xi / (k (1 - e^-xi)^(k-1))`.
fn uniform_oracle(k: f64) -> f64 {
    let g = |xi: f64| {
        let e = (-xi).exp();
        xi * (1.0 - e) / (1.0 - e - xi * e) - k
    };
    let (mut lo, mut hi) = (1e-3, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi = 0.5 * (lo + hi);
    xi / (k * (1.0 - (-xi).exp()).powf(k - 1.0))
}

fn integral_cross_check() -> Outcome {
    let start = Instant::now();
    let c = threshold_c_star(3.0).unwrap();
    let elapsed = start.elapsed();
    let oracle = uniform_oracle(3.0);
    let pass = (c - 0.91794).abs() <= 0.0005 && (c - oracle).abs() <= 0.0005 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("c*={c:.9} oracle={oracle:.9} time={elapsed:.2?}"))
}

fn config(m: usize, cs: Vec<f64>, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        m,
        dbar: 3.5,
        mode: ExperimentMode::Fixed,
        sweep: Sweep::CGrid(cs),
        trials,
        base_seed: SEED,
        sampling: SamplingMode::WithReplacement,
    }
}

fn desk_scale_transition() -> Outcome {
    let start = Instant::now();
    let r = sweep_c(&config(10_000, vec![0.94, 0.97], 1000)).unwrap();
    let pass = r[0].rate <= 0.1 && r[1].rate >= 0.9;
    outcome(pass, format!("rate(0.94)={} rate(0.97)={} time={:.1?}", r[0].rate, r[1].rate, start.elapsed()))
}

fn fixed_vs_binomial_sign() -> Outcome {
    let start = Instant::now();
    let rows = compare_fixed_binomial(&config(1000, vec![0.93, 0.985], 100_000)).unwrap();
    let (low, high) = (&rows[0], &rows[1]);
    let pass = low.ci_high < 0.0 && high.ci_low > 0.0;
    let show = |r: &leftmatch::montecarlo::Comparison| {
        format!(
            "c={} fixed={} binomial={} diff={:.5} ci=[{:.5},{:.5}]",
            r.c, r.fixed.rate, r.binomial.rate, r.diff, r.ci_low, r.ci_high
        )
    };
    outcome(pass, format!("{}; {}; time={:.1?}", show(low), show(high), start.elapsed()))
}

fn failprob_oracle() -> Outcome {
    let r = failprob_suite(500, SEED, 6, 1e-12).unwrap();
    outcome(r.passed() && r.total == 500, r.to_string())
}

fn inequality_grids() -> Outcome {
    let (transfer, _) = transfer_grid(12).unwrap();
    let (diagonal, _) = diagonal_grid(12).unwrap();
    let full = |r: &leftmatch::verify::SuiteReport| r.total > 0 && r.holds == r.total;
    outcome(full(&transfer) && full(&diagonal), format!("{transfer}; {diagonal}"))
}

fn section_events() -> Outcome {
    let even = NormalizedBI::new(0.0, vec![0.5, 0.5]).unwrap();
    let blocked = NormalizedBI::new(0.5, vec![0.25, 0.25]).unwrap();
    let a = mixed_convexity_check(2, &even).unwrap();
    let b = mixed_convexity_check(2, &blocked).unwrap();
    outcome(a.holds && !b.holds, format!("beta=0: {} ; beta=1/2: {}", a.holds, b.holds))
}

fn concentration() -> Outcome {
    let r = concentration_suite(50, SEED, 5).unwrap();
    outcome(r.passed() && r.total == 50, r.to_string())
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut record = |n: u32, o: Outcome| {
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };
    record(1, threshold_cli());
    record(2, integral_cross_check());
    record(3, desk_scale_transition());
    record(4, fixed_vs_binomial_sign());
    let (oracle, claims) = structure_suite(1000, SEED, 7).unwrap();
    record(5, outcome(oracle.passed() && oracle.total == 1000, oracle.to_string()));
    record(6, failprob_oracle());
    record(7, inequality_grids());
    record(8, outcome(claims.passed() && claims.total == 1000, claims.to_string()));
    record(9, section_events());
    record(10, concentration());
    let failed: Vec<u32> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {failed:?}");
        ExitCode::FAILURE
    }
}
