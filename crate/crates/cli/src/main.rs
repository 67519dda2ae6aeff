mod commands;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orientcount::Error;
use serde_json::json;

/// Count and sample orientations of graphs with prescribed imbalances.
///
/// Results are JSON on standard output (or --output); logs go to standard
/// error. Set RAYON_NUM_THREADS to bound the worker threads.
#[derive(Debug, Parser)]
#[command(name = "orientcount", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Edge-list file, or generator spec such as k:9, c:12, circ:10:1,2,
    /// gnp:20:7:0.3 or rr:30:1:4
    #[arg(long, short = 'g')]
    pub graph: String,
    /// Imbalance vector: `0`, an inline list like 1,1,-1,-1, or a file
    #[arg(long, short = 'b', allow_hyphen_values = true)]
    pub imbalance: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    /// Solver tolerance on the balance-equation residual
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Oracle::Auto)]
    pub oracle: Oracle,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of standard output
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Log progress to standard error
    #[arg(long, short = 'v')]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Auto,
    Brute,
    Dp,
    Quadrature,
    None,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feasibility verdict for the imbalance vector
    Check(Common),
    /// Maximum-likelihood merits and the assumption report
    Solve {
        #[command(flatten)]
        common: Common,
        /// Finish with Newton steps on log r
        #[arg(long)]
        newton: bool,
    },
    /// Asymptotic count, optionally compared with an exact oracle
    Count(Common),
    /// Exact count from an oracle
    Exact(Common),
    /// Number of Eulerian orientations from its closed form
    Eulerian {
        #[command(flatten)]
        common: Common,
        /// Number of undirected Hamiltonian cycles of the graph, to report
        /// the expected number of directed ones
        #[arg(long)]
        hamiltonian_cycles: Option<String>,
    },
    /// Probability that a uniform orientation contains the given arcs
    SubgraphProb {
        #[command(flatten)]
        common: Common,
        /// Arcs as j>k, 1-indexed, comma separated
        #[arg(long, default_value = "")]
        arcs: String,
    },
    /// Independent orientations from the fitted merit model
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, short = 'n', default_value_t = 10)]
        count: u64,
    },
    /// Run every applicable invariant check on the instance
    Validate(Common),
    /// Write the graph as an edge list
    Gen(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Check(c) | Command::Count(c) | Command::Exact(c) | Command::Validate(c) | Command::Gen(c) => c,
            Command::Solve { common, .. }
            | Command::Eulerian { common, .. }
            | Command::SubgraphProb { common, .. }
            | Command::Sample { common, .. } => common,
        }
    }
}

/// What a command produced: a JSON report or raw text.
pub enum Output {
    Json(serde_json::Value),
    Text(String),
}

/// Exit status for a failed run: 2 when the instance itself admits no
/// answer, 1 otherwise.
fn exit_code(e: &Error) -> u8 {
    if e.is_instance_error() {
        2
    } else {
        1
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    let detail = match e {
        Error::Parity { vertex } => {
            format!("imbalance parity does not match degree parity at vertex {}", vertex + 1)
        }
        other => other.to_string(),
    };
    json!({ "error": { "kind": e.kind(), "detail": detail } })
}

fn render(out: &Output) -> String {
    match out {
        Output::Json(v) => serde_json::to_string_pretty(v).expect("JSON values always serialize") + "\n",
        Output::Text(t) => t.clone(),
    }
}

fn emit(common: &Common, text: &str) -> std::io::Result<()> {
    match &common.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = config.command.common().clone();
    if common.verbose {
        eprintln!("orientcount: {:?}", config.command);
    }
    let (text, code) = match commands::run(&config.command) {
        Ok((out, code)) => (render(&out), code),
        Err(e) => {
            eprintln!("orientcount: {}: {e}", e.kind());
            (render(&Output::Json(error_json(&e))), exit_code(&e))
        }
    };
    if let Err(e) = emit(&common, &text) {
        eprintln!("orientcount: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
