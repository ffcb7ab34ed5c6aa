//! Command-line front end: code/ordering/trellis reports, one-shot decoding,
//! and Monte Carlo sweeps.
//!
//! Output files given as relative paths land in `$LOCCODE_OUT_DIR` when that
//! variable is set; reports go to stdout as JSON unless directed to a file.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use loccode::cyclic::CyclicCode;
use loccode::locosd::{locality_aware_decode, ScoreOn, StructureSpec};
use loccode::ordering::{chain_ordering, Chain};
use loccode::osd::{osd_decode, DecodeOutcome, OsdConfig};
use loccode::sim::{load_json, report_code, report_trellis, run_sim, write_csv, CodeSpecFile, SimSpec};
use loccode::trellis::Trellis;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Environment variable naming the default directory for output files.
const OUT_DIR_VAR: &str = "LOCCODE_OUT_DIR";

#[derive(Parser)]
#[command(name = "loccode", version, about = "Locality and trellis tooling for binary cyclic codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural report: dimension, cosets, generator polynomial, locality,
    /// hierarchies.
    Code {
        /// Code specification file ({n, q, zero_representatives}).
        spec: PathBuf,
    },
    /// Coordinate permutation induced by a divisor chain.
    Order {
        spec: PathBuf,
        /// Comma-separated divisor chain, e.g. 3,21.
        #[arg(long, value_delimiter = ',', required = true)]
        chain: Vec<usize>,
    },
    /// State-complexity report of the minimal trellis under a chain ordering.
    Trellis {
        spec: PathBuf,
        /// Comma-separated divisor chain; omit for the identity order.
        #[arg(long, value_delimiter = ',')]
        chain: Option<Vec<usize>>,
        /// Write the built trellis (levels and edges) as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Write the state profile as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Decode a single observation vector.
    Decode {
        spec: PathBuf,
        /// JSON file holding the real-valued observation array.
        #[arg(long)]
        y: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Reprocessing order for OSD-based schemes.
        #[arg(long, default_value_t = 0)]
        order: usize,
        /// Structure file (required for the locality-aware scheme).
        #[arg(long)]
        structure: Option<PathBuf>,
        /// One-sided noise density N0 (required for the locality-aware scheme).
        #[arg(long)]
        n0: Option<f64>,
        /// Divisor chain for the Viterbi scheme; omit for the identity order.
        #[arg(long, value_delimiter = ',')]
        chain: Option<Vec<usize>>,
        /// Candidate scoring signal for the locality-aware scheme.
        #[arg(long, value_enum, default_value_t = ScoreArg::Channel)]
        score_on: ScoreArg,
    },
    /// Monte Carlo FER/BER sweep driven by a simulation spec file.
    Sim {
        spec: PathBuf,
        /// Worker threads (0 = machine default).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// CSV output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Osd,
    LocalityAware,
    Viterbi,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    Channel,
    Llr,
}

impl From<ScoreArg> for ScoreOn {
    fn from(s: ScoreArg) -> ScoreOn {
        match s {
            ScoreArg::Channel => ScoreOn::Channel,
            ScoreArg::Llr => ScoreOn::Llr,
        }
    }
}

/// Resolve an output path: absolute paths pass through, relative ones land
/// in `$LOCCODE_OUT_DIR` when set.
fn out_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}

fn load_code(spec: &Path) -> Result<CyclicCode> {
    let spec_file: CodeSpecFile =
        load_json(spec).with_context(|| format!("loading code spec {}", spec.display()))?;
    Ok(spec_file.build()?)
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    let resolved = out_path(path);
    if let Some(parent) = resolved.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(&resolved, text).with_context(|| format!("writing {}", resolved.display()))
}

/// Write to stdout, exiting quietly when the reader closed the pipe.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => Ok(other?),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn decode_report(
    n: usize,
    word: &loccode::bits::BitVec,
    stage: serde_json::Value,
    score: f64,
    ml_certified: bool,
    candidates: usize,
) -> serde_json::Value {
    let bits: String = (0..n).map(|i| if word.get(i) { '1' } else { '0' }).collect();
    json!({
        "n": n,
        "word": bits,
        "weight": word.weight(),
        "stage": stage,
        "score": score,
        "ml_certified": ml_certified,
        "candidates": candidates,
    })
}

fn outcome_report(n: usize, outcome: &DecodeOutcome) -> Result<serde_json::Value> {
    Ok(decode_report(
        n,
        &outcome.word,
        serde_json::to_value(outcome.stage)?,
        outcome.score,
        outcome.ml_certified,
        outcome.candidates,
    ))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Code { spec } => {
            let code = load_code(&spec)?;
            print_json(&report_code(&code)?)
        }
        Command::Order { spec, chain } => {
            let code = load_code(&spec)?;
            let chain = Chain::new(code.n(), chain)?;
            let order = chain_ordering(&chain);
            print_json(&json!({
                "n": order.n(),
                "chain": order.chain().elems(),
                "permutation": order.permutation(),
            }))
        }
        Command::Trellis {
            spec,
            chain,
            export,
            profile,
        } => {
            let code = load_code(&spec)?;
            let chain = Chain::new(code.n(), chain.unwrap_or_default())?;
            let report = report_trellis(&code, &chain)?;
            if let Some(path) = profile {
                write_output(&path, &report.profile_csv())?;
            }
            if let Some(path) = export {
                let trellis = Trellis::build(&code, &chain_ordering(&chain))?;
                let edges: Vec<Vec<(u32, u32, u8)>> = trellis
                    .edges()
                    .iter()
                    .map(|level| level.iter().map(|e| (e.from, e.to, e.bit as u8)).collect())
                    .collect();
                let body = json!({
                    "n": trellis.n(),
                    "k": trellis.k(),
                    "chain": chain.elems(),
                    "state_dims": trellis.state_dims(),
                    "levels": trellis.levels(),
                    "edges": edges,
                });
                write_output(&path, &serde_json::to_string(&body)?)?;
            }
            print_json(&report)
        }
        Command::Decode {
            spec,
            y,
            scheme,
            order,
            structure,
            n0,
            chain,
            score_on,
        } => {
            let code = load_code(&spec)?;
            let y: Vec<f64> =
                load_json(&y).with_context(|| format!("loading observation {}", y.display()))?;
            let config = OsdConfig::new(order);
            let report = match scheme {
                SchemeArg::Osd => outcome_report(code.n(), &osd_decode(&code, &y, &config)?)?,
                SchemeArg::LocalityAware => {
                    let Some(structure) = structure else {
                        bail!("the locality-aware scheme needs --structure");
                    };
                    let Some(n0) = n0 else {
                        bail!("the locality-aware scheme needs --n0");
                    };
                    let spec: StructureSpec = load_json(&structure)
                        .with_context(|| format!("loading structure {}", structure.display()))?;
                    let structure = spec.build(&code)?;
                    let out =
                        locality_aware_decode(&code, &structure, &y, n0, &config, score_on.into())?;
                    outcome_report(code.n(), &out)?
                }
                SchemeArg::Viterbi => {
                    let chain = Chain::new(code.n(), chain.unwrap_or_default())?;
                    let trellis = Trellis::build(&code, &chain_ordering(&chain))?;
                    let metrics: Vec<[f64; 2]> = y.iter().map(|&v| [-v, v]).collect();
                    let out = trellis.viterbi_decode(&metrics)?;
                    decode_report(code.n(), &out.word, json!("viterbi"), -out.cost, true, 1)
                }
            };
            print_json(&report)
        }
        Command::Sim { spec, workers, out } => {
            let sim: SimSpec =
                load_json(&spec).with_context(|| format!("loading sim spec {}", spec.display()))?;
            let base = spec.parent().unwrap_or_else(|| Path::new("."));
            let task = sim.resolve(base, workers)?;
            let records = run_sim(&task)?;
            let mut buf = Vec::new();
            write_csv(&records, &mut buf)?;
            let text = String::from_utf8(buf)?;
            match out {
                Some(path) => write_output(&path, &text),
                None => emit(&text),
            }
        }
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
