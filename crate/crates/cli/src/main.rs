//! `leftmatch` command-line tool.
//!
//! Exit status: 0 on success, 1 on domain errors (including failed
//! verification suites), 2 on usage errors and malformed input files.

mod config;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leftmatch::failprob::{fail_total, fail_total_exact};
use leftmatch::graph::sample_graph;
use leftmatch::matching::has_left_perfect_matching;
use leftmatch::montecarlo::{
    binomial_spec, compare_fixed_binomial, comparisons_to_csv, fixed_spec, records_to_csv, sweep_alpha, sweep_c,
    Sweep,
};
use leftmatch::structure::{bi_partition, classify_right_nodes, NodeClass};
use leftmatch::threshold::{empirical_threshold, threshold_c_star};
use leftmatch::verify::{run_suite, SuiteParams, GRID_HEADER, SUITES};
use leftmatch::{BipartiteMultigraph, DegreeDistribution, DegreeSpec, SamplingMode};

use crate::config::{load_config, ConfigError};

#[derive(Parser)]
#[command(name = "leftmatch", version, about = "Left-perfect matchings in random bipartite multigraphs")]
struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DegreeMode {
    Fixed,
    Binomial,
}

#[derive(Args)]
struct GraphInput {
    /// Graph file (default: standard input).
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random graph and print it in the text format.
    Generate {
        /// Left nodes.
        #[arg(long)]
        n: usize,
        /// Right nodes.
        #[arg(long)]
        m: usize,
        /// Average degree, split between floor(dbar) and floor(dbar) + 1.
        #[arg(long, conflicts_with = "degrees", required_unless_present = "degrees")]
        dbar: Option<f64>,
        /// How the degree split is assigned when --dbar is used.
        #[arg(long, value_enum, default_value = "fixed")]
        mode: DegreeMode,
        /// One distribution for every node, as `degree:probability,...`.
        #[arg(long)]
        degrees: Option<String>,
        #[arg(long, default_value = "with_replacement")]
        sampling: SamplingMode,
        #[arg(long)]
        seed: u64,
    },
    /// Decide whether every left node can be matched.
    Match(GraphInput),
    /// Blocked set and classes of the right nodes (graph must be matchable).
    Classify {
        #[command(flatten)]
        input: GraphInput,
        /// Also list each right node's class.
        #[arg(long)]
        nodes: bool,
    },
    /// Failure probability of adding two nodes of degrees dy and dz.
    Fail {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        dy: u32,
        #[arg(long)]
        dz: u32,
    },
    /// Matchability threshold c*(dbar), as CSV.
    Threshold {
        /// Average degrees (> 2), comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dbar: Vec<f64>,
        /// Locate the crossing by simulation instead.
        #[arg(long, requires_all = ["m", "trials", "seed"])]
        empirical: bool,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.005)]
        resolution: f64,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run a failure-rate sweep described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Run fixed and binomial modes on the c grid and report the difference.
        #[arg(long)]
        compare: bool,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run property suites; exits 1 if any suite fails.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Largest m in grid suites.
        #[arg(long, default_value_t = 12)]
        max_m: usize,
        /// Instances for the randomized suites.
        #[arg(long)]
        instances: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print grid rows as CSV instead of summaries.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Domain(#[from] leftmatch::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] io::Error),
    /// Output was produced, but a check failed.
    #[error("verification failed")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Usage(_) | Self::Domain(leftmatch::Error::Parse { .. }) => 2,
            Self::Domain(_) | Self::Io(_) | Self::Failed(_) => 1,
        }
    }
}

fn read_graph(input: &GraphInput) -> Result<BipartiteMultigraph, CliError> {
    let text = match &input.input {
        Some(path) => fs::read_to_string(path)?,
        None => {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    Ok(BipartiteMultigraph::from_text(&text)?)
}

fn parse_degrees(text: &str) -> Result<DegreeDistribution, CliError> {
    let entries = text
        .split(',')
        .map(|item| {
            let (d, p) = item.split_once(':').ok_or_else(|| CliError::Usage(format!("bad degree entry `{item}`")))?;
            let d = d.trim().parse().map_err(|_| CliError::Usage(format!("bad degree `{d}`")))?;
            let p = p.trim().parse().map_err(|_| CliError::Usage(format!("bad probability `{p}`")))?;
            Ok((d, p))
        })
        .collect::<Result<Vec<(u32, f64)>, CliError>>()?;
    Ok(DegreeDistribution::new(&entries)?)
}

fn class_name(c: NodeClass) -> &'static str {
    match c {
        NodeClass::Blocked => "blocked",
        NodeClass::Free => "free",
        NodeClass::HalfFree => "half-free",
    }
}

/// Accepts role-based suite names plus the lemma-style aliases.
fn canonical_suite(name: &str) -> Option<&'static str> {
    let canonical = match name {
        "lemma2" => "transfer",
        "lemma3" => "diagonal",
        "convexity" => "mixed",
        "appendix-a" => "blocked-power",
        "lemma1" => "concentration",
        other => other,
    };
    SUITES.iter().copied().find(|&s| s == canonical)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut out = String::new();
    match cli.command {
        Command::Generate { n, m, dbar, mode, degrees, sampling, seed } => {
            let spec = match (dbar, degrees) {
                (Some(dbar), _) => match mode {
                    DegreeMode::Fixed => fixed_spec(n, dbar)?,
                    DegreeMode::Binomial => binomial_spec(n, dbar)?,
                },
                (None, Some(text)) => DegreeSpec::new(vec![parse_degrees(&text)?; n])?,
                (None, None) => return Err(CliError::Usage("give --dbar or --degrees".into())),
            };
            out = sample_graph(&spec, m, seed, sampling)?.to_text();
        }
        Command::Match(input) => {
            out = format!("{}\n", has_left_perfect_matching(&read_graph(&input)?));
        }
        Command::Classify { input, nodes } => {
            let g = read_graph(&input)?;
            out = bi_partition(&g)?.to_text();
            if nodes {
                out.push_str("node,class\n");
                for (v, c) in classify_right_nodes(&g)?.into_iter().enumerate() {
                    out.push_str(&format!("{v},{}\n", class_name(c)));
                }
            }
        }
        Command::Fail { input, dy, dz } => {
            if dy == 0 || dz == 0 {
                return Err(CliError::Usage("degrees must be at least 1".into()));
            }
            let g = read_graph(&input)?;
            out = format!("dy,dz,fail,exact\n{dy},{dz},{},{}\n", fail_total(dy, dz, &g)?, fail_total_exact(dy, dz, &g)?);
        }
        Command::Threshold { dbar, empirical, m, trials, seed, resolution, format: _ } => {
            if empirical {
                let (m, trials, seed) = (m.unwrap_or(0), trials.unwrap_or(0), seed.unwrap_or(0));
                out.push_str("dbar,c_low,c_high\n");
                for d in dbar {
                    let (lo, hi) = empirical_threshold(d, m, trials, seed, resolution)?;
                    out.push_str(&format!("{d},{lo:.6},{hi:.6}\n"));
                }
            } else {
                out.push_str("dbar,c_star\n");
                for d in dbar {
                    out.push_str(&format!("{d},{:.6}\n", threshold_c_star(d)?));
                }
            }
        }
        Command::Experiment { config, compare, format: _ } => {
            let cfg = load_config(&config)?;
            out = if compare {
                if !matches!(cfg.sweep, Sweep::CGrid(_)) {
                    return Err(CliError::Usage("--compare needs a c_grid".into()));
                }
                comparisons_to_csv(&compare_fixed_binomial(&cfg)?)
            } else {
                match cfg.sweep {
                    Sweep::CGrid(_) => records_to_csv(&sweep_c(&cfg)?),
                    Sweep::AlphaGrid { .. } => records_to_csv(&sweep_alpha(&cfg)?),
                }
            };
        }
        Command::Verify { suite, max_m, instances, seed, format } => {
            let names: Vec<&'static str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                vec![canonical_suite(&suite).ok_or_else(|| {
                    CliError::Usage(format!("unknown suite `{suite}`; expected one of {} or all", SUITES.join(", ")))
                })?]
            };
            let params = SuiteParams { max_m, instances, seed };
            let csv = format.is_some();
            if csv {
                out.push_str(GRID_HEADER);
                out.push('\n');
            }
            let mut failed = false;
            for name in names {
                let (reports, rows) = run_suite(name, params)?;
                for report in &reports {
                    failed |= !report.passed();
                    if !csv {
                        out.push_str(&format!("{report}\n"));
                        for message in &report.messages {
                            out.push_str(&format!("  {}\n", message.replace('\n', "\n  ")));
                        }
                    }
                }
                if csv {
                    for row in rows {
                        out.push_str(&format!("{row}\n"));
                    }
                }
            }
            if failed {
                return Err(CliError::Failed(out));
            }
        }
    }
    Ok(out)
}

fn emit(path: &Option<PathBuf>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out_path = cli.out.clone();
    let result = run(cli);
    let (text, code) = match result {
        Ok(text) => (text, 0),
        Err(CliError::Failed(text)) => (text, 1),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if let Err(e) = emit(&out_path, &text) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
