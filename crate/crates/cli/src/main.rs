//! Command-line front end. Each subcommand drives one core pipeline and
//! emits a single JSON report; progress streams as JSON lines on stderr.
//! Exit codes: 0 success, 2 input error, 3 budget exhaustion, 4 invariant
//! violation flagged by an audit, 5 refused by a precondition guard.

mod commands;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use fgdyn_core::words::DEFAULT_MAX_WORD_LEN;
use report::{Failure, Outcome, Progress};

#[derive(Parser)]
#[command(name = "fgdyn", version, about = "Experimental dynamics of free-group automorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print the full JSON report on stdout instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Directory to receive report.json and progress.jsonl.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Global word-length cap; overrides the FGDYN_MAX_WORD_LEN variable.
    #[arg(long, global = true, value_name = "N")]
    max_len: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan for periodic conjugacy classes and certify hyperbolicity.
    Hyperbolic {
        /// Automorphism file ("g->word" clauses).
        #[arg(long, value_name = "FILE")]
        auto: PathBuf,
        /// Longest conjugacy class scanned.
        #[arg(long, default_value_t = 5)]
        class_len: usize,
        /// Largest period scanned.
        #[arg(long, default_value_t = 5)]
        max_iter: usize,
    },
    /// Collect attracting boundary fixed points across sampled lifts.
    FixedPoints {
        /// Automorphism file ("g->word" clauses).
        #[arg(long, value_name = "FILE")]
        auto: PathBuf,
        /// Longest inner twist sampled.
        #[arg(long, default_value_t = 2)]
        twist_bound: usize,
        /// Longest convergence seed word.
        #[arg(long, default_value_t = 2)]
        seed_len: usize,
        /// Stable prefix depth a point must reach.
        #[arg(long, default_value_t = 32)]
        depth: usize,
        /// Iterations allowed per convergence run.
        #[arg(long, default_value_t = 48)]
        max_iter: usize,
    },
    /// Compute stabilized subword fingerprints, one per generator orbit.
    Laminate {
        /// Automorphism file ("g->word" clauses).
        #[arg(long, value_name = "FILE")]
        auto: PathBuf,
        /// Subword length of the fingerprint.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Iterations allowed for stabilization.
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
    },
    /// Classify the weak-limit lines of one conjugacy class orbit.
    Limits {
        /// Automorphism file ("g->word" clauses).
        #[arg(long, value_name = "FILE")]
        auto: PathBuf,
        /// Conjugacy class to iterate, as a word.
        #[arg(long, value_name = "WORD")]
        class: String,
        /// Window and fingerprint subword length.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Orbit iterations.
        #[arg(long, default_value_t = 12)]
        max_iter: usize,
        /// Longest inner twist sampled for the fixed-point context.
        #[arg(long, default_value_t = 2)]
        twist_bound: usize,
        /// Stable prefix depth for line ends.
        #[arg(long, default_value_t = 32)]
        depth: usize,
    },
    /// Build the boundary identification graph of the cyclic extension.
    CtGraph {
        /// Automorphism file ("g->word" clauses).
        #[arg(long, value_name = "FILE")]
        auto: PathBuf,
        /// Inverse automorphism file; defaults to the "inverse:" block of
        /// the --auto file, then to a basis search.
        #[arg(long, value_name = "FILE")]
        inverse: Option<PathBuf>,
        /// Longest conjugacy class sampled for weak limits.
        #[arg(long, default_value_t = 2)]
        max_sample_len: usize,
        /// Window and fingerprint subword length.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Orbit iterations per sample.
        #[arg(long, default_value_t = 12)]
        max_iter: usize,
        /// Longest inner twist sampled.
        #[arg(long, default_value_t = 2)]
        twist_bound: usize,
        /// Stable prefix depth; also the point-merge depth of the graph.
        #[arg(long, default_value_t = 32)]
        depth: usize,
    },
    /// Probe a finitely generated subgroup for quasiconvexity obstructions.
    Qc {
        /// Automorphism file ("g->word" clauses).
        #[arg(long, value_name = "FILE")]
        auto: PathBuf,
        /// Inverse automorphism file; same fallbacks as ct-graph.
        #[arg(long, value_name = "FILE")]
        inverse: Option<PathBuf>,
        /// Comma-separated generator words, e.g. "aa,bb".
        #[arg(long, value_name = "WORDS")]
        subgroup: String,
        /// Longest inner twist sampled.
        #[arg(long, default_value_t = 2)]
        twist_bound: usize,
        /// Leaf segment length for the fingerprint carriage check.
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Stable prefix depth for collected fixed points.
        #[arg(long, default_value_t = 32)]
        depth: usize,
    },
    /// Check two automorphisms for a common attracting lamination.
    Compat {
        /// Automorphism file; pass exactly twice.
        #[arg(long, value_name = "FILE")]
        auto: Vec<PathBuf>,
        /// Fingerprint subword length compared.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Iterations allowed for stabilization.
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Hyperbolic { .. } => "hyperbolic",
            Command::FixedPoints { .. } => "fixed-points",
            Command::Laminate { .. } => "laminate",
            Command::Limits { .. } => "limits",
            Command::CtGraph { .. } => "ct-graph",
            Command::Qc { .. } => "qc",
            Command::Compat { .. } => "compat",
        }
    }
}

fn resolve_max_len(cli: &Cli) -> Result<usize, Failure> {
    let n = match cli.max_len {
        Some(n) => n,
        None => match std::env::var("FGDYN_MAX_WORD_LEN") {
            Err(_) => DEFAULT_MAX_WORD_LEN,
            Ok(s) => s.trim().parse().map_err(|_| {
                Failure::Input(format!("FGDYN_MAX_WORD_LEN: {s:?} is not a positive integer"))
            })?,
        },
    };
    if n == 0 {
        return Err(Failure::Input("word-length cap must be positive".into()));
    }
    Ok(n)
}

fn run(cli: &Cli, max_len: usize, progress: &mut Progress) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Hyperbolic { auto, class_len, max_iter } => {
            commands::hyperbolic(auto, *class_len, *max_iter, max_len, progress)
        }
        Command::FixedPoints { auto, twist_bound, seed_len, depth, max_iter } => {
            commands::fixed_points(
                auto,
                *twist_bound,
                *seed_len,
                *depth,
                *max_iter,
                max_len,
                progress,
            )
        }
        Command::Laminate { auto, k, max_iter } => {
            commands::laminate(auto, *k, *max_iter, max_len, progress)
        }
        Command::Limits { auto, class, k, max_iter, twist_bound, depth } => {
            commands::limits(auto, class, *k, *max_iter, *twist_bound, *depth, max_len, progress)
        }
        Command::CtGraph { auto, inverse, max_sample_len, k, max_iter, twist_bound, depth } => {
            commands::ct_graph(
                auto,
                inverse.as_deref(),
                *max_sample_len,
                *k,
                *max_iter,
                *twist_bound,
                *depth,
                max_len,
                progress,
            )
        }
        Command::Qc { auto, inverse, subgroup, twist_bound, k, depth } => commands::qc(
            auto,
            inverse.as_deref(),
            subgroup,
            *twist_bound,
            *k,
            *depth,
            max_len,
            progress,
        ),
        Command::Compat { auto, k, max_iter } => {
            commands::compat(auto, *k, *max_iter, max_len, progress)
        }
    }
}

fn fail(f: &Failure) -> ! {
    eprintln!("fgdyn: {}", f.message());
    std::process::exit(f.code());
}

fn main() {
    let cli = Cli::parse();
    let max_len = resolve_max_len(&cli).unwrap_or_else(|f| fail(&f));
    let mut progress = Progress::new(cli.out.as_deref()).unwrap_or_else(|f| fail(&f));
    progress.event(
        "start",
        json!({ "command": cli.command.name(), "max_word_len": max_len }),
    );
    match run(&cli, max_len, &mut progress) {
        Ok(outcome) => {
            if let Some(dir) = &cli.out {
                if let Err(f) = report::write_report(dir, &outcome.report) {
                    progress.event("error", json!({ "exit": f.code(), "message": f.message() }));
                    fail(&f);
                }
            }
            if cli.json {
                print!("{}", outcome.report.to_json());
            } else {
                for line in &outcome.summary {
                    println!("{line}");
                }
            }
            match &outcome.violation {
                None => progress.event("done", json!({ "exit": 0 })),
                Some(v) => {
                    let f = Failure::Invariant(format!("invariant violation: {v}"));
                    progress.event("done", json!({ "exit": f.code(), "violation": v }));
                    eprintln!("fgdyn: {}", f.message());
                    std::process::exit(f.code());
                }
            }
        }
        Err(f) => {
            progress.event("error", json!({ "exit": f.code(), "message": f.message() }));
            fail(&f);
        }
    }
}
