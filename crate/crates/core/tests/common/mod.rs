//! Brute-force oracles the acceptance suite checks the library against.
//! Everything here recomputes results from first principles (exhaustive
//! enumeration, direct transform evaluation) rather than reusing the
//! library's own derivations.

// Not every test binary sharing this module uses every oracle.
#![allow(dead_code)]

use loccode::bits::BitVec;
use loccode::cyclic::CyclicCode;
use loccode::galois::{multiplicative_order, Field};
use loccode::locosd::{locality_aware_decode, LocalStructure, ScoreOn};
use loccode::osd::{correlation, transmit_with, OsdConfig};
use rand_chacha::ChaCha8Rng;

/// Every codeword, by Gray-code walk over the generator rows.
pub fn all_codewords(code: &CyclicCode) -> Vec<BitVec> {
    let gen = code.generator_matrix();
    let k = gen.nrows();
    assert!(k <= 20, "exhaustive enumeration is capped at 2^20 words");
    let mut words = Vec::with_capacity(1 << k);
    let mut current = BitVec::zeros(code.n());
    words.push(current.clone());
    for step in 1u32..(1 << k) {
        let row = step.trailing_zeros() as usize;
        current.xor_assign(&gen.rows[row]);
        words.push(current.clone());
    }
    words
}

/// Exhaustive maximum-likelihood decoding by correlation.
pub fn ml_codeword(words: &[BitVec], y: &[f64]) -> (BitVec, f64) {
    let mut best = words[0].clone();
    let mut best_score = correlation(y, &best);
    for w in &words[1..] {
        let score = correlation(y, w);
        if score > best_score {
            best_score = score;
            best = w.clone();
        }
    }
    (best, best_score)
}

/// Restriction of a word to a support set, kept in support order.
pub fn restrict(word: &BitVec, support: &[usize]) -> Vec<bool> {
    support.iter().map(|&i| word.get(i)).collect()
}

/// Zero set of a set of length-n1 binary words, straight from the transform
/// definition: lambda is a zero when every word evaluates to zero at
/// beta^lambda. The words come from restricting a length-n parent code, so
/// beta must be alpha^(n/n1) for the parent's own primitive n-th root alpha:
/// an arbitrary primitive n1-th root would rescale the zero set by a unit
/// mod n1, which moves any zero set that is not scale-invariant.
pub fn dft_zero_set(words: &[Vec<bool>], n: usize, n1: usize) -> Vec<usize> {
    let m = multiplicative_order(2, n as u64).expect("n odd");
    let field = Field::new(2, m).expect("field exists");
    let alpha = field.nth_root(n as u32).expect("n divides field order");
    let beta = field.pow(alpha, (n / n1) as u64);
    (0..n1)
        .filter(|&lambda| {
            words.iter().all(|w| {
                let mut acc = field.zero();
                for (j, &bit) in w.iter().enumerate() {
                    if bit {
                        acc = field.add(acc, field.pow(beta, (j * lambda) as u64));
                    }
                }
                acc.is_zero()
            })
        })
        .collect()
}

/// Exhaustive ML over the even-weight words of one group.
pub fn spc_ml(y: &[f64]) -> Vec<bool> {
    let l = y.len();
    assert!(l <= 16);
    let mut best: Option<(f64, u32)> = None;
    for pattern in 0u32..(1 << l) {
        if pattern.count_ones() % 2 != 0 {
            continue;
        }
        let score: f64 = (0..l)
            .map(|j| if pattern >> j & 1 == 1 { -y[j] } else { y[j] })
            .sum();
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, pattern));
        }
    }
    let (_, pattern) = best.expect("at least the all-zero pattern");
    (0..l).map(|j| pattern >> j & 1 == 1).collect()
}

/// Deterministic per-trial generator, independent of iteration order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut s = [0u8; 32];
    s[0..8].copy_from_slice(&seed.to_le_bytes());
    s[8..16].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(s)
}

/// Fraction of trials where the quick look certifies and returns the
/// transmitted (all-zero) word.
pub fn quick_look_success_rate(
    code: &CyclicCode,
    structure: &LocalStructure,
    n0: f64,
    trials: u64,
    seed: u64,
) -> f64 {
    use rayon::prelude::*;
    let zero = BitVec::zeros(code.n());
    let config = OsdConfig::new(0);
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let rx = transmit_with(&zero, n0, &mut rng);
            let out =
                locality_aware_decode(code, structure, &rx.y, n0, &config, ScoreOn::default())
                    .expect("decode succeeds");
            (out.stage == loccode::osd::DecodeStage::Qmld && out.word.is_zero()) as u64
        })
        .sum();
    hits as f64 / trials as f64
}

/// 95% confidence interval of a Bernoulli estimate intersects [lo, hi].
pub fn ci_overlaps(p_hat: f64, trials: u64, lo: f64, hi: f64) -> bool {
    let sigma = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    p_hat - 1.96 * sigma <= hi && p_hat + 1.96 * sigma >= lo
}

/// Print the per-criterion verdict line, then enforce it.
pub fn verdict(number: usize, description: &str, pass: bool, detail: &str) {
    let state = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {number} ({description}): {state} [{detail}]");
    assert!(pass, "acceptance {number} ({description}) failed: {detail}");
}
