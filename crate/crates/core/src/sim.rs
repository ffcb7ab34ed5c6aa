//! Monte Carlo harness and report builders.
//!
//! Every trial derives its own counter-keyed generator from (seed, SNR
//! index, trial index), so results do not depend on worker scheduling:
//! any worker count reproduces the single-worker counts bit for bit.  Trials
//! run in fixed-size chunks and the early-stop condition is evaluated only
//! at chunk boundaries, which keeps the executed trial set deterministic.

use crate::cyclic::CyclicCode;
use crate::locality::punctured_locality;
use crate::locosd::{locality_aware_decode, LocalStructure, ScoreOn, StructureSpec};
use crate::ordering::{chain_ordering, enumerate_chains, Chain};
use crate::osd::{osd_decode, DecodeStage, OsdConfig, SnrConvention, transmit_with};
use crate::trellis::{dimension_profile, max_state_bound, state_profile_bound, Trellis};
use crate::bits::BitVec;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Trials executed between early-stop checks.  Part of the reproducibility
/// contract: changing it changes which trials an early-stopped run performs.
const TRIAL_CHUNK: u64 = 256;

/// On-disk description of a cyclic code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpecFile {
    pub n: usize,
    pub q: u64,
    pub zero_representatives: Vec<usize>,
}

impl CodeSpecFile {
    pub fn build(&self) -> Result<CyclicCode> {
        CyclicCode::from_zero_representatives(self.n, self.q, &self.zero_representatives)
    }
}

/// Read a JSON value from disk, tagging errors with the path.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: Some(path.display().to_string()),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: Some(path.display().to_string()),
        source: e,
    })
}

/// Write a value to disk as pretty JSON.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        path: Some(path.display().to_string()),
        source: e,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Io {
        path: Some(path.display().to_string()),
        source: e,
    })
}

/// Decoder selection for a simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    Osd {
        order: usize,
    },
    LocalityAware {
        order: usize,
        #[serde(default)]
        score_on: ScoreOn,
    },
    Viterbi {
        #[serde(default)]
        chain: Vec<usize>,
    },
}

fn default_frame_errors() -> u64 {
    100
}

/// On-disk simulation request.  The code and structure fields are paths,
/// resolved relative to the directory the spec was loaded from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub code: String,
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub structure: Option<String>,
    pub snr_db: Vec<f64>,
    pub convention: SnrConvention,
    pub max_trials: u64,
    #[serde(default = "default_frame_errors")]
    pub max_frame_errors: u64,
    pub seed: u64,
}

/// A fully resolved simulation: code and decoder built, ready to run.
pub struct SimTask {
    pub code: CyclicCode,
    pub decoder: Decoder,
    pub snr_db: Vec<f64>,
    pub convention: SnrConvention,
    pub max_trials: u64,
    pub max_frame_errors: u64,
    pub seed: u64,
    /// Worker threads; 0 picks the machine default.
    pub workers: usize,
}

pub enum Decoder {
    Osd(OsdConfig),
    LocalityAware {
        structure: LocalStructure,
        config: OsdConfig,
        score_on: ScoreOn,
    },
    Viterbi(Trellis),
}

impl SimSpec {
    /// Build the task, loading referenced files relative to `base`.
    pub fn resolve(&self, base: &Path, workers: usize) -> Result<SimTask> {
        if self.snr_db.is_empty() {
            return Err(Error::invalid("SNR grid must be nonempty"));
        }
        if self.max_trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        let code_spec: CodeSpecFile = load_json(&base.join(&self.code))?;
        let code = code_spec.build()?;
        let structure = match &self.structure {
            Some(path) => {
                let spec: StructureSpec = load_json(&base.join(path))?;
                Some(spec.build(&code)?)
            }
            None => None,
        };
        let decoder = match &self.scheme {
            SchemeSpec::Osd { order } => Decoder::Osd(OsdConfig::new(*order)),
            SchemeSpec::LocalityAware { order, score_on } => {
                let structure = structure.ok_or_else(|| {
                    Error::config("locality-aware decoding needs a structure file")
                })?;
                Decoder::LocalityAware {
                    structure,
                    config: OsdConfig::new(*order),
                    score_on: *score_on,
                }
            }
            SchemeSpec::Viterbi { chain } => {
                let chain = Chain::new(code.n(), chain.clone())?;
                Decoder::Viterbi(Trellis::build(&code, &chain_ordering(&chain))?)
            }
        };
        Ok(SimTask {
            code,
            decoder,
            snr_db: self.snr_db.clone(),
            convention: self.convention,
            max_trials: self.max_trials,
            max_frame_errors: self.max_frame_errors,
            seed: self.seed,
            workers,
        })
    }
}

/// Per-SNR simulation result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub snr_db: f64,
    pub convention: String,
    pub trials: u64,
    pub frame_errs: u64,
    pub bit_errs: u64,
    pub fer: f64,
    pub ber: f64,
    /// Fraction of trials certified at the quick-look stage (zero for
    /// decoders without one).
    pub qmld_rate: f64,
    pub mean_candidates: f64,
    /// Wall time; the one column exempt from byte-identical reproduction.
    pub seconds: f64,
}

struct TrialOutcome {
    frame_err: bool,
    bit_errs: u64,
    qmld: bool,
    candidates: usize,
}

fn trial_seed(seed: u64, snr_idx: usize, trial: u64) -> [u8; 32] {
    let mut s = [0u8; 32];
    s[0..8].copy_from_slice(&seed.to_le_bytes());
    s[8..16].copy_from_slice(&(snr_idx as u64).to_le_bytes());
    s[16..24].copy_from_slice(&trial.to_le_bytes());
    s
}

fn run_trial(task: &SimTask, n0: f64, snr_idx: usize, trial: u64) -> Result<TrialOutcome> {
    let zero = BitVec::zeros(task.code.n());
    let mut rng = ChaCha8Rng::from_seed(trial_seed(task.seed, snr_idx, trial));
    let rx = transmit_with(&zero, n0, &mut rng);
    let (word, qmld, candidates) = match &task.decoder {
        Decoder::Osd(config) => {
            let out = osd_decode(&task.code, &rx.y, config)?;
            (out.word, false, out.candidates)
        }
        Decoder::LocalityAware {
            structure,
            config,
            score_on,
        } => {
            let out = locality_aware_decode(&task.code, structure, &rx.y, n0, config, *score_on)?;
            (out.word, out.stage == DecodeStage::Qmld, out.candidates)
        }
        Decoder::Viterbi(trellis) => {
            let metrics: Vec<[f64; 2]> = rx.y.iter().map(|&v| [-v, v]).collect();
            (trellis.viterbi_decode(&metrics)?.word, false, 1)
        }
    };
    let bit_errs = word.weight() as u64;
    Ok(TrialOutcome {
        frame_err: bit_errs > 0,
        bit_errs,
        qmld,
        candidates,
    })
}

/// Run the full SNR sweep.  Early stop triggers at chunk boundaries once the
/// frame-error budget is spent; the estimators always use the trials that
/// actually ran.
pub fn run_sim(task: &SimTask) -> Result<Vec<SimRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(task.workers)
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    let n = task.code.n();
    let k = task.code.k();
    let mut records = Vec::with_capacity(task.snr_db.len());
    for (snr_idx, &snr_db) in task.snr_db.iter().enumerate() {
        let n0 = task.convention.n0(snr_db, n, k);
        let start = Instant::now();
        let mut trials = 0u64;
        let mut frame_errs = 0u64;
        let mut bit_errs = 0u64;
        let mut qmld_hits = 0u64;
        let mut candidate_sum = 0u128;
        while trials < task.max_trials && frame_errs < task.max_frame_errors {
            let end = (trials + TRIAL_CHUNK).min(task.max_trials);
            let outcomes: Result<Vec<TrialOutcome>> = pool.install(|| {
                (trials..end)
                    .into_par_iter()
                    .map(|t| run_trial(task, n0, snr_idx, t))
                    .collect()
            });
            for out in outcomes? {
                frame_errs += out.frame_err as u64;
                bit_errs += out.bit_errs;
                qmld_hits += out.qmld as u64;
                candidate_sum += out.candidates as u128;
            }
            trials = end;
        }
        records.push(SimRecord {
            snr_db,
            convention: task.convention.tag().to_string(),
            trials,
            frame_errs,
            bit_errs,
            fer: frame_errs as f64 / trials as f64,
            ber: bit_errs as f64 / (trials * n as u64) as f64,
            qmld_rate: qmld_hits as f64 / trials as f64,
            mean_candidates: candidate_sum as f64 / trials as f64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(records)
}

/// CSV schema version written in the header comment.
pub const CSV_VERSION: &str = "loccode-sim-csv v1";

/// Emit records in the fixed CSV schema.
pub fn write_csv(records: &[SimRecord], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "# {CSV_VERSION}")?;
    writeln!(
        out,
        "snr_db,convention,trials,frame_errs,bit_errs,fer,ber,qmld_rate,mean_candidates,seconds"
    )?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.convention,
            r.trials,
            r.frame_errs,
            r.bit_errs,
            r.fer,
            r.ber,
            r.qmld_rate,
            r.mean_candidates,
            r.seconds
        )?;
    }
    Ok(())
}

/// Locality summary of one divisor length, for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalityReportEntry {
    pub n1: usize,
    pub r: usize,
    pub delta: usize,
    pub delta_exact: bool,
    pub local_dim: usize,
    pub punctured_zeros: Vec<usize>,
    pub groups: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HierarchyLevelEntry {
    pub n1: usize,
    /// Dimension of the local code at this level.
    pub r: usize,
    pub delta: usize,
    pub delta_exact: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HierarchyReportEntry {
    pub chain: Vec<usize>,
    pub levels: Vec<HierarchyLevelEntry>,
}

/// Structural report of a code: zeros, cosets, generator polynomial,
/// locality at every divisor, and hierarchical profiles per chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeReport {
    pub n: usize,
    pub k: usize,
    pub zeros: Vec<usize>,
    pub cosets: Vec<Vec<usize>>,
    pub g_coeffs: Vec<u8>,
    pub dual_zeros: Vec<usize>,
    pub locality: Vec<LocalityReportEntry>,
    pub chains: Vec<Vec<usize>>,
    pub hierarchies: Vec<HierarchyReportEntry>,
}

fn proper_divisors(n: usize) -> Vec<usize> {
    (2..n).filter(|d| n % d == 0).collect()
}

pub fn report_code(code: &CyclicCode) -> Result<CodeReport> {
    let mut locality = Vec::new();
    for n1 in proper_divisors(code.n()) {
        if let Some(profile) = punctured_locality(code, n1)? {
            locality.push(LocalityReportEntry {
                n1,
                r: profile.r,
                delta: profile.delta,
                delta_exact: profile.delta_exact,
                local_dim: profile.local_dim,
                punctured_zeros: profile.punctured_zeros.to_vec(),
                groups: profile.groups.len(),
            });
        }
    }
    let chains: Vec<Vec<usize>> = enumerate_chains(code.n())
        .iter()
        .map(|c| c.elems().to_vec())
        .collect();
    let mut hierarchies = Vec::new();
    for chain in &chains {
        if let Ok(levels) = crate::locality::hierarchical_profile(code, chain) {
            hierarchies.push(HierarchyReportEntry {
                chain: chain.clone(),
                levels: levels
                    .iter()
                    .map(|l| HierarchyLevelEntry {
                        n1: l.n1,
                        r: l.r,
                        delta: l.delta,
                        delta_exact: l.delta_exact,
                    })
                    .collect(),
            });
        }
    }
    Ok(CodeReport {
        n: code.n(),
        k: code.k(),
        zeros: code.zeros().to_vec(),
        cosets: code.zeros().cosets(),
        g_coeffs: code.generator_poly().to_vec(),
        dual_zeros: code.dual_zeros().to_vec(),
        locality,
        chains,
        hierarchies,
    })
}

/// One row of the state-profile table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRow {
    pub i: usize,
    /// Dimension of the subcode supported on the first i coordinates.
    pub p_sub: usize,
    /// Dimension of the subcode supported on the rest.
    pub f_sub: usize,
    /// Rank of the first i columns.
    pub p_rank: usize,
    /// Rank of the remaining columns.
    pub f_rank: usize,
    pub s: usize,
    pub mu: i64,
    pub mu_perp: i64,
}

/// Trellis complexity report under one chain ordering.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrellisReport {
    pub n: usize,
    pub k: usize,
    pub chain: Vec<usize>,
    pub rows: Vec<ProfileRow>,
    pub vertices: usize,
    pub edges: usize,
    pub per_bit_additions: usize,
    pub per_bit_comparisons: usize,
    pub per_bit_total: usize,
    pub max_state_dim: usize,
    /// Closed-form bound on the maximum state dimension (nonempty chains).
    pub max_state_bound: Option<usize>,
    /// True when the trellis itself exceeds construction caps, making the
    /// figures analytic only.
    pub analytic_only: bool,
}

impl TrellisReport {
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("i,p_i,f_i,p_up_i,f_up_i,s_i,mu_i,mu_perp_i\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.i, r.p_sub, r.f_sub, r.p_rank, r.f_rank, r.s, r.mu, r.mu_perp
            ));
        }
        out
    }
}

pub fn report_trellis(code: &CyclicCode, chain: &Chain) -> Result<TrellisReport> {
    let order = chain_ordering(chain);
    let profile = dimension_profile(code, &order)?;
    let bound = state_profile_bound(code, chain)?;
    let complexity = profile.complexity()?;
    let rows = (0..=code.n())
        .map(|i| ProfileRow {
            i,
            p_sub: profile.prefix_subcode[i],
            f_sub: profile.suffix_subcode[i],
            p_rank: profile.prefix_rank[i],
            f_rank: profile.suffix_rank[i],
            s: profile.state_dims[i],
            mu: bound.mu[i],
            mu_perp: bound.mu_dual[i],
        })
        .collect();
    let analytic_only = matches!(Trellis::build(code, &order), Err(Error::Capacity(_)));
    Ok(TrellisReport {
        n: code.n(),
        k: code.k(),
        chain: chain.elems().to_vec(),
        rows,
        vertices: complexity.vertices,
        edges: complexity.edges,
        per_bit_additions: complexity.per_bit_additions,
        per_bit_comparisons: complexity.per_bit_comparisons,
        per_bit_total: complexity.per_bit_total,
        max_state_dim: profile.max_state_dim(),
        max_state_bound: if chain.is_empty() {
            None
        } else {
            Some(max_state_bound(code, chain)?)
        },
        analytic_only,
    })
}
