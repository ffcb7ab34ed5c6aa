//! AWGN channel with BPSK signalling and ordered-statistics decoding.
//!
//! Bit 0 maps to +1 and bit 1 to -1, so the all-zero codeword is the
//! all-ones signal and positive log-likelihood ratios favour bit 0.

use crate::bits::{BitMatrix, BitVec};
use crate::cyclic::CyclicCode;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// How an SNR figure in dB translates to the noise density N0.  Symbol
/// energy is fixed at one, so the symbol convention is SNR = 10·log10(1/N0);
/// the information-bit convention scales the energy by n/k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    SymbolEnergy,
    InfoBitEnergy,
}

impl SnrConvention {
    pub fn n0(self, snr_db: f64, n: usize, k: usize) -> f64 {
        let base = 10f64.powf(-snr_db / 10.0);
        match self {
            SnrConvention::SymbolEnergy => base,
            SnrConvention::InfoBitEnergy => base * n as f64 / k as f64,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SnrConvention::SymbolEnergy => "es",
            SnrConvention::InfoBitEnergy => "eb",
        }
    }
}

/// Noise level, SNR bookkeeping tag, and the seed used by [`transmit`].
#[derive(Clone, Debug)]
pub struct ChannelSpec {
    pub n0: f64,
    pub convention: SnrConvention,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn new(n0: f64, seed: u64) -> Result<ChannelSpec> {
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(Error::invalid("noise density N0 must be positive"));
        }
        Ok(ChannelSpec {
            n0,
            convention: SnrConvention::SymbolEnergy,
            seed,
        })
    }

    pub fn from_snr(
        snr_db: f64,
        convention: SnrConvention,
        n: usize,
        k: usize,
        seed: u64,
    ) -> Result<ChannelSpec> {
        let mut spec = ChannelSpec::new(convention.n0(snr_db, n, k), seed)?;
        spec.convention = convention;
        Ok(spec)
    }

    /// Noise standard deviation per coordinate: sqrt(N0/2).
    pub fn noise_sd(&self) -> f64 {
        (self.n0 / 2.0).sqrt()
    }

    /// Transmit with a fresh generator seeded from this spec, so the same
    /// spec always yields the same received word.
    pub fn transmit(&self, word: &BitVec) -> ReceivedWord {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        transmit_with(word, self.n0, &mut rng)
    }
}

/// Channel output, carrying the transmitted word for error accounting.
#[derive(Clone, Debug)]
pub struct ReceivedWord {
    pub y: Vec<f64>,
    pub reference: Option<BitVec>,
}

/// BPSK-modulate `word` and add white Gaussian noise of variance N0/2.
pub fn transmit_with(word: &BitVec, n0: f64, rng: &mut impl Rng) -> ReceivedWord {
    let noise = Normal::new(0.0, (n0 / 2.0).sqrt()).expect("positive noise density");
    let y = (0..word.len())
        .map(|i| if word.get(i) { -1.0 } else { 1.0 } + noise.sample(rng))
        .collect();
    ReceivedWord {
        y,
        reference: Some(word.clone()),
    }
}

/// Log-likelihood ratios of an AWGN/BPSK observation: 4·y/N0.
pub fn llr(y: &[f64], n0: f64) -> Result<Vec<f64>> {
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::invalid("noise density N0 must be positive"));
    }
    Ok(y.iter().map(|&v| 4.0 * v / n0).collect())
}

/// Generator systematized on the most reliable independent positions.
#[derive(Clone, Debug)]
pub struct Systemization {
    /// The k accepted positions in decreasing reliability order; row i of
    /// `generator` is the unique row with a one at `positions[i]` and zeros
    /// at every other accepted position.
    pub positions: Vec<usize>,
    pub generator: BitMatrix,
    /// All n positions ranked by decreasing |y| (ties toward lower index).
    pub ranking: Vec<usize>,
}

/// Rank positions by reliability and keep the first k whose generator
/// columns are linearly independent.
pub fn find_mri(gen: &BitMatrix, y: &[f64]) -> Result<Systemization> {
    let k = gen.nrows();
    let n = gen.ncols();
    if y.len() != n {
        return Err(Error::invalid(format!(
            "received length {} != code length {n}",
            y.len()
        )));
    }
    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.sort_by(|&a, &b| {
        y[b].abs()
            .partial_cmp(&y[a].abs())
            .expect("reliabilities must not be NaN")
            .then(a.cmp(&b))
    });

    let mut rows = gen.rows.clone();
    let mut positions = Vec::with_capacity(k);
    for &pos in &ranking {
        if positions.len() == k {
            break;
        }
        let next = positions.len();
        let Some(pivot) = (next..k).find(|&r| rows[r].get(pos)) else {
            continue;
        };
        rows.swap(next, pivot);
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row.get(pos) {
                row.xor_assign(&pivot_row);
            }
        }
        positions.push(pos);
    }
    if positions.len() < k {
        return Err(Error::construction("generator matrix is rank deficient"));
    }
    Ok(Systemization {
        positions,
        generator: BitMatrix::new(rows, n),
        ranking,
    })
}

/// Reprocessing depth for ordered-statistics decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OsdConfig {
    pub order: usize,
}

/// Candidates a budget guard refuses to enumerate past.
const MAX_CANDIDATES: u128 = 1 << 22;

impl OsdConfig {
    pub fn new(order: usize) -> OsdConfig {
        OsdConfig { order }
    }

    /// Exact candidate budget: sum of C(k, i) for i = 0..=order.
    pub fn budget(&self, k: usize) -> u128 {
        (0..=self.order.min(k)).map(|i| binomial(k, i)).sum()
    }
}

pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Which stage of the pipeline produced a decoded word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStage {
    Qmld,
    BpOsd,
    Osd,
}

/// Decoded word with its score and provenance.
#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    pub word: BitVec,
    pub stage: DecodeStage,
    /// Correlation of the winning candidate with the scored observation.
    pub score: f64,
    /// True when the result is provably maximum likelihood.
    pub ml_certified: bool,
    /// Number of candidate codewords scored.
    pub candidates: usize,
}

/// Correlation between an observation and a word's BPSK image.
pub fn correlation(y: &[f64], word: &BitVec) -> f64 {
    (0..word.len())
        .map(|i| if word.get(i) { -y[i] } else { y[i] })
        .sum()
}

/// Order-l ordered-statistics decoding: hard-decide the most reliable
/// independent positions, then rescore every re-encoding obtained by
/// flipping at most l of them.  Flip patterns run in (count, lexicographic)
/// order and ties keep the earlier candidate.
pub fn osd_decode(code: &CyclicCode, y: &[f64], config: &OsdConfig) -> Result<DecodeOutcome> {
    osd_decode_scored(code.generator_matrix(), y, y, config)
}

/// OSD with separate ordering and scoring observations: `y_order` drives
/// reliabilities and hard decisions, `y_score` the correlation metric.  The
/// locality-aware pipeline orders by updated beliefs but scores against the
/// channel output; plain OSD passes the same vector twice.
pub fn osd_decode_scored(
    gen: &BitMatrix,
    y_order: &[f64],
    y_score: &[f64],
    config: &OsdConfig,
) -> Result<DecodeOutcome> {
    let k = gen.nrows();
    let n = gen.ncols();
    if y_score.len() != n {
        return Err(Error::invalid(format!(
            "scoring length {} != code length {n}",
            y_score.len()
        )));
    }
    if config.order > k {
        return Err(Error::invalid(format!(
            "reprocessing order {} exceeds dimension {k}",
            config.order
        )));
    }
    if config.budget(k) > MAX_CANDIDATES {
        return Err(Error::capacity(format!(
            "candidate budget {} exceeds {MAX_CANDIDATES}",
            config.budget(k)
        )));
    }
    let sys = find_mri(gen, y_order)?;

    let mut base = BitVec::zeros(n);
    for (i, &pos) in sys.positions.iter().enumerate() {
        if y_order[pos] < 0.0 {
            base.xor_assign(&sys.generator.rows[i]);
        }
    }

    let mut best = base.clone();
    let mut best_score = correlation(y_score, &base);
    let mut candidates = 1usize;
    let mut flips: Vec<usize> = Vec::new();
    for count in 1..=config.order {
        flips.clear();
        flips.extend(0..count);
        loop {
            let mut word = base.clone();
            for &f in &flips {
                word.xor_assign(&sys.generator.rows[f]);
            }
            let score = correlation(y_score, &word);
            candidates += 1;
            if score > best_score {
                best_score = score;
                best = word;
            }
            // Advance to the next lexicographic count-subset of 0..k; stop
            // after the last one.
            let mut advanced = false;
            let mut idx = count;
            while idx > 0 {
                idx -= 1;
                if flips[idx] < k - count + idx {
                    flips[idx] += 1;
                    for j in idx + 1..count {
                        flips[j] = flips[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    Ok(DecodeOutcome {
        word: best,
        stage: DecodeStage::Osd,
        score: best_score,
        ml_certified: config.order >= k,
        candidates,
    })
}
