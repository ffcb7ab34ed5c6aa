//! Locality-aware decoding.
//!
//! The pipeline decodes the locality supercode first — independent
//! single-parity-check groups or middle-code trellises — and halts with an
//! ML certificate when the result already lies in the full code.  Otherwise
//! one round of belief propagation over the local checks refines the
//! log-likelihood ratios before ordered-statistics reprocessing.

use crate::bits::{BitMatrix, BitVec};
use crate::cyclic::CyclicCode;
use crate::locality::support_sets;
use crate::ordering::{chain_ordering, Chain};
use crate::osd::{
    binomial, correlation, llr, osd_decode_scored, DecodeOutcome, DecodeStage, OsdConfig,
};
use crate::trellis::Trellis;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Magnitude cap applied to LLRs before tanh; beyond this tanh(x/2) is 1.0
/// in double precision anyway.
const LLR_CLIP: f64 = 31.0;
/// atanh argument cap, preserving sign and finiteness.
const ATANH_CLIP: f64 = 1.0 - 1e-12;

/// Local constraint structure of a code: a supercode cut out by per-group
/// constraints that every codeword satisfies.
#[derive(Clone)]
pub enum LocalStructure {
    /// Disjoint groups, each constrained to even parity.
    DisjointSpc { n: usize, groups: Vec<Vec<usize>> },
    /// Disjoint middle-code supports sharing one local code and trellis,
    /// with the base-level parity groups used for belief propagation.
    Hierarchical {
        n: usize,
        middle_code: CyclicCode,
        middle_trellis: Trellis,
        middle_supports: Vec<Vec<usize>>,
        base_groups: Vec<Vec<usize>>,
    },
    /// Orthogonal parity checks per coordinate.
    Availability {
        n: usize,
        checks: Vec<Vec<Vec<usize>>>,
    },
}

/// Serializable description of a [`LocalStructure`]; built against a code,
/// which re-validates every constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum StructureSpec {
    DisjointSpc {
        groups: Vec<Vec<usize>>,
    },
    Hierarchical {
        base_groups: Vec<Vec<usize>>,
        middle_supports: Vec<Vec<usize>>,
        /// Zero representatives of the shared middle code.
        middle_zeros: Vec<usize>,
        /// Divisor chain for the middle trellis ordering; empty = identity.
        #[serde(default)]
        middle_chain: Vec<usize>,
    },
    Availability {
        checks: Vec<Vec<Vec<usize>>>,
    },
}

fn check_disjoint_groups(n: usize, groups: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for group in groups {
        if group.is_empty() {
            return Err(Error::invalid("empty local group"));
        }
        for &c in group {
            if c >= n {
                return Err(Error::invalid(format!("coordinate {c} out of range")));
            }
            if seen[c] {
                return Err(Error::invalid(format!(
                    "coordinate {c} appears in two local groups"
                )));
            }
            seen[c] = true;
        }
    }
    Ok(())
}

fn rows_have_even_parity(gen: &BitMatrix, support: &[usize]) -> bool {
    gen.rows
        .iter()
        .all(|row| support.iter().filter(|&&c| row.get(c)).count() % 2 == 0)
}

fn restrict(word: &BitVec, support: &[usize]) -> BitVec {
    let mut out = BitVec::zeros(support.len());
    for (j, &c) in support.iter().enumerate() {
        out.set(j, word.get(c));
    }
    out
}

impl LocalStructure {
    /// Canonical disjoint single-parity-check structure at group length
    /// `group_length`, which must carry an SPC punctured code.
    pub fn disjoint_spc(code: &CyclicCode, group_length: usize) -> Result<LocalStructure> {
        let punct = code.punctured_zeros(group_length)?;
        if punct.to_vec() != vec![0] {
            return Err(Error::config(format!(
                "punctured code at length {group_length} is not single-parity-check \
                 (zeros {:?})",
                punct.to_vec()
            )));
        }
        Self::disjoint_spc_from_groups(code, support_sets(code.n(), group_length)?)
    }

    /// Disjoint SPC structure with explicit groups, each verified to be an
    /// even-parity constraint on the code.
    pub fn disjoint_spc_from_groups(
        code: &CyclicCode,
        groups: Vec<Vec<usize>>,
    ) -> Result<LocalStructure> {
        let n = code.n();
        check_disjoint_groups(n, &groups)?;
        for group in &groups {
            if !rows_have_even_parity(code.generator_matrix(), group) {
                return Err(Error::config(format!(
                    "group {group:?} is not an even-parity constraint of the code"
                )));
            }
        }
        Ok(LocalStructure::DisjointSpc { n, groups })
    }

    /// Canonical two-level structure: single-parity-check groups at
    /// `base_length` and middle codes at `middle_length`, with the middle
    /// trellis ordered by `middle_chain` (empty chain = identity order).
    pub fn hierarchical(
        code: &CyclicCode,
        base_length: usize,
        middle_length: usize,
        middle_chain: &Chain,
    ) -> Result<LocalStructure> {
        if middle_length % base_length != 0 || middle_length == base_length {
            return Err(Error::config(
                "base length must properly divide the middle length",
            ));
        }
        let base_punct = code.punctured_zeros(base_length)?;
        if base_punct.to_vec() != vec![0] {
            return Err(Error::config(format!(
                "punctured code at length {base_length} is not single-parity-check"
            )));
        }
        let middle_zeros = code.punctured_zeros(middle_length)?;
        if middle_zeros.is_empty() {
            return Err(Error::config(format!(
                "no locality at middle length {middle_length}"
            )));
        }
        Self::hierarchical_from_parts(
            code,
            support_sets(code.n(), base_length)?,
            support_sets(code.n(), middle_length)?,
            middle_zeros.to_vec(),
            middle_chain,
        )
    }

    pub fn hierarchical_from_parts(
        code: &CyclicCode,
        base_groups: Vec<Vec<usize>>,
        middle_supports: Vec<Vec<usize>>,
        middle_zero_reps: Vec<usize>,
        middle_chain: &Chain,
    ) -> Result<LocalStructure> {
        let n = code.n();
        check_disjoint_groups(n, &base_groups)?;
        check_disjoint_groups(n, &middle_supports)?;
        let Some(middle_length) = middle_supports.first().map(Vec::len) else {
            return Err(Error::config("no middle supports"));
        };
        if middle_supports.iter().any(|s| s.len() != middle_length) {
            return Err(Error::config("middle supports differ in length"));
        }
        if middle_chain.n() != middle_length {
            return Err(Error::invalid("middle chain is for the wrong length"));
        }
        let middle_code =
            CyclicCode::from_zero_representatives(middle_length, code.zeros().q(), &middle_zero_reps)?;
        let middle_trellis = Trellis::build(&middle_code, &chain_ordering(middle_chain))?;
        for group in &base_groups {
            if !rows_have_even_parity(code.generator_matrix(), group) {
                return Err(Error::config(format!(
                    "base group {group:?} is not an even-parity constraint of the code"
                )));
            }
        }
        for support in &middle_supports {
            for row in &code.generator_matrix().rows {
                if !middle_code.contains(&restrict(row, support))? {
                    return Err(Error::config(format!(
                        "the code does not embed the middle code on support {support:?}"
                    )));
                }
            }
        }
        Ok(LocalStructure::Hierarchical {
            n,
            middle_code,
            middle_trellis,
            middle_supports,
            base_groups,
        })
    }

    /// Availability structure from per-coordinate orthogonal check supports.
    pub fn availability(code: &CyclicCode, checks: Vec<Vec<Vec<usize>>>) -> Result<LocalStructure> {
        let n = code.n();
        if checks.len() != n {
            return Err(Error::invalid(format!(
                "need one check list per coordinate, got {}",
                checks.len()
            )));
        }
        for (i, list) in checks.iter().enumerate() {
            for (a, check) in list.iter().enumerate() {
                if !check.contains(&i) {
                    return Err(Error::config(format!(
                        "check {check:?} does not involve its coordinate {i}"
                    )));
                }
                if !rows_have_even_parity(code.generator_matrix(), check) {
                    return Err(Error::config(format!(
                        "support {check:?} is not a parity check of the code"
                    )));
                }
                for other in &list[a + 1..] {
                    let overlap: Vec<usize> =
                        check.iter().filter(|c| other.contains(c)).copied().collect();
                    if overlap != vec![i] {
                        return Err(Error::config(format!(
                            "checks for coordinate {i} intersect at {overlap:?}"
                        )));
                    }
                }
            }
        }
        Ok(LocalStructure::Availability { n, checks })
    }

    pub fn n(&self) -> usize {
        match self {
            LocalStructure::DisjointSpc { n, .. }
            | LocalStructure::Hierarchical { n, .. }
            | LocalStructure::Availability { n, .. } => *n,
        }
    }

    /// Parity groups driving the belief-propagation stage: the SPC groups
    /// themselves, or the base-level groups of a hierarchy.
    pub fn bp_groups(&self) -> Option<&[Vec<usize>]> {
        match self {
            LocalStructure::DisjointSpc { groups, .. } => Some(groups),
            LocalStructure::Hierarchical { base_groups, .. } => Some(base_groups),
            LocalStructure::Availability { .. } => None,
        }
    }

    pub fn to_spec(&self) -> StructureSpec {
        match self {
            LocalStructure::DisjointSpc { groups, .. } => StructureSpec::DisjointSpc {
                groups: groups.clone(),
            },
            LocalStructure::Hierarchical {
                middle_code,
                middle_trellis,
                middle_supports,
                base_groups,
                ..
            } => StructureSpec::Hierarchical {
                base_groups: base_groups.clone(),
                middle_supports: middle_supports.clone(),
                middle_zeros: middle_code.zeros().to_vec(),
                middle_chain: middle_trellis.order().chain().elems().to_vec(),
            },
            LocalStructure::Availability { checks, .. } => StructureSpec::Availability {
                checks: checks.clone(),
            },
        }
    }
}

impl StructureSpec {
    pub fn build(&self, code: &CyclicCode) -> Result<LocalStructure> {
        match self {
            StructureSpec::DisjointSpc { groups } => {
                LocalStructure::disjoint_spc_from_groups(code, groups.clone())
            }
            StructureSpec::Hierarchical {
                base_groups,
                middle_supports,
                middle_zeros,
                middle_chain,
            } => {
                let middle_length = middle_supports.first().map(Vec::len).unwrap_or(0);
                let chain = Chain::new(middle_length, middle_chain.clone())?;
                LocalStructure::hierarchical_from_parts(
                    code,
                    base_groups.clone(),
                    middle_supports.clone(),
                    middle_zeros.clone(),
                    &chain,
                )
            }
            StructureSpec::Availability { checks } => {
                LocalStructure::availability(code, checks.clone())
            }
        }
    }
}

/// Quick-look result: the ML word of the locality supercode and whether it
/// already lies in the full code (which certifies it as the ML word there).
#[derive(Clone, Debug)]
pub struct QuickLook {
    pub word: BitVec,
    pub in_code: bool,
}

fn hard_decisions(n: usize, y: &[f64]) -> BitVec {
    let mut word = BitVec::zeros(n);
    for (i, &v) in y.iter().enumerate() {
        if v < 0.0 {
            word.set(i, true);
        }
    }
    word
}

/// ML decoding of disjoint single-parity-check groups: hard-decide, then fix
/// each odd-parity group by flipping its least reliable coordinate (ties
/// toward the lower index).  Coordinates outside every group stay at their
/// hard decisions.
pub fn qmld_spc(code: &CyclicCode, structure: &LocalStructure, y: &[f64]) -> Result<QuickLook> {
    let LocalStructure::DisjointSpc { n, groups } = structure else {
        return Err(Error::config("structure is not disjoint single-parity-check"));
    };
    check_observation(*n, code, y)?;
    let mut word = hard_decisions(*n, y);
    for group in groups {
        let parity = group.iter().filter(|&&c| word.get(c)).count() % 2;
        if parity == 1 {
            let weakest = *group
                .iter()
                .min_by(|&&a, &&b| {
                    y[a].abs()
                        .partial_cmp(&y[b].abs())
                        .expect("reliabilities must not be NaN")
                        .then(a.cmp(&b))
                })
                .expect("groups are nonempty");
            word.set(weakest, !word.get(weakest));
        }
    }
    let in_code = code.contains(&word)?;
    Ok(QuickLook { word, in_code })
}

/// ML decoding of each middle code by its trellis, concatenated over the
/// disjoint supports.
pub fn qmld_hier(code: &CyclicCode, structure: &LocalStructure, y: &[f64]) -> Result<QuickLook> {
    let LocalStructure::Hierarchical {
        n,
        middle_trellis,
        middle_supports,
        ..
    } = structure
    else {
        return Err(Error::config("structure is not hierarchical"));
    };
    check_observation(*n, code, y)?;
    let mut word = hard_decisions(*n, y);
    for support in middle_supports {
        // Min-sum correlation metric: bit 0 costs -y, bit 1 costs +y.
        let metrics: Vec<[f64; 2]> = support.iter().map(|&c| [-y[c], y[c]]).collect();
        let local = middle_trellis.viterbi_decode(&metrics)?;
        for (j, &c) in support.iter().enumerate() {
            word.set(c, local.word.get(j));
        }
    }
    let in_code = code.contains(&word)?;
    Ok(QuickLook { word, in_code })
}

/// Stage-1 decoding for any structure variant.  Availability structures have
/// no local decoder, so their quick look is the plain hard-decision word,
/// which still certifies ML when it lies in the code.
pub fn quick_look(code: &CyclicCode, structure: &LocalStructure, y: &[f64]) -> Result<QuickLook> {
    match structure {
        LocalStructure::DisjointSpc { .. } => qmld_spc(code, structure, y),
        LocalStructure::Hierarchical { .. } => qmld_hier(code, structure, y),
        LocalStructure::Availability { n, .. } => {
            check_observation(*n, code, y)?;
            let word = hard_decisions(*n, y);
            let in_code = code.contains(&word)?;
            Ok(QuickLook { word, in_code })
        }
    }
}

fn check_observation(n: usize, code: &CyclicCode, y: &[f64]) -> Result<()> {
    if code.n() != n {
        return Err(Error::invalid("structure and code lengths differ"));
    }
    if y.len() != n {
        return Err(Error::invalid(format!(
            "observation length {} != code length {n}",
            y.len()
        )));
    }
    Ok(())
}

/// Lower bound on the probability that every length-`group_length` group
/// hard-decodes to the transmitted local word: a union bound on pairwise
/// error within each group, raised to the number of groups.
pub fn qmld_success_bound(n: usize, group_length: usize, n0: f64) -> Result<f64> {
    if group_length == 0 || n % group_length != 0 {
        return Err(Error::invalid("group length must divide the code length"));
    }
    if !(n0 > 0.0) {
        return Err(Error::invalid("noise density N0 must be positive"));
    }
    let pairwise = gaussian_tail((4.0 / n0).sqrt());
    let per_group = (1.0 - binomial(group_length, 2) as f64 * pairwise).clamp(0.0, 1.0);
    Ok(per_group.powi((n / group_length) as i32))
}

/// Upper tail of the standard Gaussian.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn extrinsic(llrs: &[f64], group: &[usize], skip: usize) -> f64 {
    let mut product = 1.0;
    for &a in group {
        if a == skip {
            continue;
        }
        product *= (llrs[a].clamp(-LLR_CLIP, LLR_CLIP) / 2.0).tanh();
    }
    2.0 * product.clamp(-ATANH_CLIP, ATANH_CLIP).atanh()
}

/// One belief-propagation round over disjoint parity groups: every member
/// coordinate gains the extrinsic term of its group; coordinates outside any
/// group pass through unchanged.
pub fn bp_round_spc(llr0: &[f64], groups: &[Vec<usize>]) -> Vec<f64> {
    let mut out = llr0.to_vec();
    for group in groups {
        for &j in group {
            out[j] = llr0[j] + extrinsic(llr0, group, j);
        }
    }
    out
}

/// A posteriori update over per-coordinate orthogonal checks: each
/// coordinate gains one extrinsic term per check it participates in.
pub fn app_update(llr0: &[f64], checks: &[Vec<Vec<usize>>]) -> Result<Vec<f64>> {
    if checks.len() != llr0.len() {
        return Err(Error::invalid("need one check list per coordinate"));
    }
    let mut out = llr0.to_vec();
    for (i, list) in checks.iter().enumerate() {
        for check in list {
            if !check.contains(&i) {
                return Err(Error::invalid(format!(
                    "check {check:?} does not involve coordinate {i}"
                )));
            }
            out[i] += extrinsic(llr0, check, i);
        }
    }
    Ok(out)
}

/// Which observation the final candidate rescore uses: the channel output
/// (default) or the updated beliefs themselves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreOn {
    #[default]
    Channel,
    Llr,
}

/// Full pipeline: quick look first, with an ML certificate when it lands in
/// the code; otherwise one belief-propagation round on the local checks and
/// ordered-statistics reprocessing ordered by the updated beliefs.
pub fn locality_aware_decode(
    code: &CyclicCode,
    structure: &LocalStructure,
    y: &[f64],
    n0: f64,
    config: &OsdConfig,
    score_on: ScoreOn,
) -> Result<DecodeOutcome> {
    let look = quick_look(code, structure, y)?;
    if look.in_code {
        return Ok(DecodeOutcome {
            score: correlation(y, &look.word),
            word: look.word,
            stage: DecodeStage::Qmld,
            ml_certified: true,
            candidates: 1,
        });
    }
    let llr0 = llr(y, n0)?;
    let llr1 = match structure {
        LocalStructure::Availability { checks, .. } => app_update(&llr0, checks)?,
        _ => bp_round_spc(&llr0, structure.bp_groups().expect("parity groups present")),
    };
    let score_vec: &[f64] = match score_on {
        ScoreOn::Channel => y,
        ScoreOn::Llr => &llr1,
    };
    let mut outcome = osd_decode_scored(code.generator_matrix(), &llr1, score_vec, config)?;
    outcome.stage = DecodeStage::BpOsd;
    outcome.ml_certified = false;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osd::transmit_with;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn code_63_36() -> CyclicCode {
        CyclicCode::from_zero_representatives(63, 2, &[0, 1, 3, 5, 7, 21]).unwrap()
    }

    fn code_63_33() -> CyclicCode {
        CyclicCode::from_zero_representatives(63, 2, &[0, 1, 3, 5, 7, 21, 27]).unwrap()
    }

    /// [21,9] code whose punctured code at length 7 is single-parity-check;
    /// small enough for exhaustive ML oracles.
    fn small_spc_code() -> CyclicCode {
        CyclicCode::from_zero_representatives(21, 2, &[0, 7, 1, 3]).unwrap()
    }

    fn all_codewords(code: &CyclicCode) -> Vec<BitVec> {
        let k = code.k();
        (0..1u32 << k)
            .map(|m| {
                let msg =
                    BitVec::from_bits(&(0..k).map(|i| (m >> i & 1) as u8).collect::<Vec<_>>());
                code.encode(&msg).unwrap()
            })
            .collect()
    }

    #[test]
    fn spc_structure_of_the_rate_36_code() {
        let code = code_63_36();
        assert_eq!(code.k(), 36);
        let structure = LocalStructure::disjoint_spc(&code, 7).unwrap();
        let LocalStructure::DisjointSpc { groups, .. } = &structure else {
            panic!("wrong variant");
        };
        assert_eq!(groups.len(), 9);
        assert_eq!(groups[0], vec![0, 9, 18, 27, 36, 45, 54]);
        // No single-parity-check structure at 21 for this code.
        assert!(LocalStructure::disjoint_spc(&code, 21).is_err());
        // The high-rate [63,51] code has no locality at 7 at all.
        let high = CyclicCode::from_zero_representatives(63, 2, &[1, 3]).unwrap();
        assert!(LocalStructure::disjoint_spc(&high, 7).is_err());
    }

    #[test]
    fn quick_look_fixes_single_odd_group() {
        let code = small_spc_code();
        let structure = LocalStructure::disjoint_spc(&code, 7).unwrap();
        let word = BitVec::zeros(21);
        let mut y = vec![1.0; 21];
        // Flip coordinate 6 (group 0 mod 3) and make coordinate 9 the least
        // reliable of that group; the decoder must still flip 6 back only if
        // it is weakest, so weaken it the most.
        y[6] = -0.4;
        y[9] = 0.6;
        let look = qmld_spc(&code, &structure, &y).unwrap();
        assert_eq!(look.word, word);
        assert!(look.in_code);
        // All-even parities: the hard-decision word comes straight through.
        let clean: Vec<f64> = vec![0.9; 21];
        let look = qmld_spc(&code, &structure, &clean).unwrap();
        assert_eq!(look.word, word);
    }

    #[test]
    fn quick_look_groups_match_exhaustive_spc_ml() {
        // Per-group output equals brute force over all even-weight words.
        let code = small_spc_code();
        let structure = LocalStructure::disjoint_spc(&code, 7).unwrap();
        let LocalStructure::DisjointSpc { groups, .. } = &structure else {
            unreachable!()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let zero = BitVec::zeros(21);
        for _ in 0..1000 {
            let rx = transmit_with(&zero, 2.5, &mut rng);
            let look = qmld_spc(&code, &structure, &rx.y).unwrap();
            for group in groups {
                // Brute-force SPC maximum likelihood on this group.
                let members = group.len();
                let mut best: Option<(f64, u32)> = None;
                for pattern in 0..1u32 << members {
                    if pattern.count_ones() % 2 == 1 {
                        continue;
                    }
                    let corr: f64 = (0..members)
                        .map(|j| {
                            let s = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 };
                            s * rx.y[group[j]]
                        })
                        .sum();
                    if best.is_none() || corr > best.unwrap().0 {
                        best = Some((corr, pattern));
                    }
                }
                let pattern = best.unwrap().1;
                for (j, &c) in group.iter().enumerate() {
                    assert_eq!(look.word.get(c), pattern >> j & 1 == 1);
                }
            }
        }
    }

    #[test]
    fn certified_quick_look_is_maximum_likelihood() {
        let code = small_spc_code();
        let structure = LocalStructure::disjoint_spc(&code, 7).unwrap();
        let words = all_codewords(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let zero = BitVec::zeros(21);
        let mut certified = 0;
        for _ in 0..1000 {
            let rx = transmit_with(&zero, 0.4, &mut rng);
            let look = qmld_spc(&code, &structure, &rx.y).unwrap();
            if look.in_code {
                certified += 1;
                let ml = words
                    .iter()
                    .max_by(|a, b| {
                        correlation(&rx.y, a)
                            .partial_cmp(&correlation(&rx.y, b))
                            .unwrap()
                    })
                    .unwrap();
                assert_eq!(&look.word, ml);
            }
        }
        assert!(certified > 500, "only {certified} certified trials");
    }

    #[test]
    fn success_bound_reproduces_known_values() {
        // 3.52 dB in the symbol convention: N0 = 10^(-0.352) ≈ 4/9.
        let b1 = qmld_success_bound(63, 7, 10f64.powf(-0.352)).unwrap();
        assert!((b1 - 0.77).abs() < 0.005, "bound {b1}");
        let b2 = qmld_success_bound(63, 7, 10f64.powf(-0.45)).unwrap();
        assert!((b2 - 0.93).abs() < 0.005, "bound {b2}");
        assert!((qmld_success_bound(63, 7, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!(qmld_success_bound(63, 8, 1.0).is_err());
        // Extreme noise drives the per-group term to the clamp.
        assert_eq!(qmld_success_bound(63, 7, 1e9).unwrap(), 0.0);
    }

    #[test]
    fn bp_round_matches_scalar_reference() {
        let llr0 = vec![1.0, -0.5, 2.0];
        let groups = vec![vec![0, 1, 2]];
        let llr1 = bp_round_spc(&llr0, &groups);
        let expected0 = 1.0 + 2.0 * ((-0.25f64).tanh() * 1.0f64.tanh()).atanh();
        assert!((llr1[0] - expected0).abs() < 1e-12);
        let expected1 = -0.5 + 2.0 * (0.5f64.tanh() * 1.0f64.tanh()).atanh();
        assert!((llr1[1] - expected1).abs() < 1e-12);
        // A zero neighbor wipes out the extrinsic term.
        let with_zero = bp_round_spc(&[0.0, 3.0, -1.2], &groups);
        assert_eq!(with_zero[1], 3.0);
        assert_eq!(with_zero[2], -1.2);
        // Coordinates outside every group pass through.
        let partial = bp_round_spc(&[1.0, 2.0, 3.0, -4.0], &[vec![0, 1]]);
        assert_eq!(partial[2], 3.0);
        assert_eq!(partial[3], -4.0);
        // Unanimous strong agreement: positive extrinsic, signs kept.
        let strong = bp_round_spc(&[8.0, 8.0, 8.0], &groups);
        for (a, b) in strong.iter().zip([8.0, 8.0, 8.0]) {
            assert!(*a > b);
        }
        // Saturation stays finite under the clips.
        let extreme = bp_round_spc(&[100.0, 100.0, 100.0], &groups);
        assert!(extreme.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn app_update_closed_forms() {
        // Weight-2 checks: the extrinsic is exactly the neighbor's LLR.
        let llr0 = vec![0.3, 1.0, -2.0, 0.7];
        let checks = vec![
            vec![vec![0, 1], vec![0, 2], vec![0, 3]],
            vec![],
            vec![],
            vec![],
        ];
        let llr1 = app_update(&llr0, &checks).unwrap();
        assert!((llr1[0] - (0.3 + 1.0 - 2.0 + 0.7)).abs() < 1e-9);
        assert_eq!(&llr1[1..], &llr0[1..]);
        // A single check coincides with one BP round on that group.
        let single = vec![vec![vec![0, 1, 2]], vec![], vec![]];
        let a = app_update(&[1.0, -0.5, 2.0], &single).unwrap();
        let b = bp_round_spc(&[1.0, -0.5, 2.0], &[vec![0, 1, 2]]);
        assert!((a[0] - b[0]).abs() < 1e-12);
        // Malformed check rejected.
        let bad = vec![vec![vec![1, 2]], vec![], vec![]];
        assert!(app_update(&[0.0; 3], &bad).is_err());
    }

    #[test]
    fn hierarchical_structure_and_middle_ml() {
        let code = code_63_33();
        let chain = Chain::new(21, vec![7]).unwrap();
        let structure = LocalStructure::hierarchical(&code, 7, 21, &chain).unwrap();
        let LocalStructure::Hierarchical {
            middle_code,
            middle_supports,
            base_groups,
            ..
        } = &structure
        else {
            panic!("wrong variant");
        };
        assert_eq!(middle_code.k(), 15);
        assert_eq!(middle_supports.len(), 3);
        assert_eq!(base_groups.len(), 9);

        // Viterbi on each middle support equals exhaustive middle-code ML.
        let middle_words = all_codewords(middle_code);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let zero = BitVec::zeros(63);
        for _ in 0..20 {
            let rx = transmit_with(&zero, 1.0, &mut rng);
            let look = qmld_hier(&code, &structure, &rx.y).unwrap();
            for support in middle_supports {
                let local_y: Vec<f64> = support.iter().map(|&c| rx.y[c]).collect();
                let ml = middle_words
                    .iter()
                    .max_by(|a, b| {
                        correlation(&local_y, a)
                            .partial_cmp(&correlation(&local_y, b))
                            .unwrap()
                    })
                    .unwrap();
                assert_eq!(&restrict(&look.word, support), ml);
            }
        }

        // The high-rate code embeds no such hierarchy.
        let high = CyclicCode::from_zero_representatives(63, 2, &[1, 3]).unwrap();
        assert!(LocalStructure::hierarchical(&high, 7, 21, &chain).is_err());
    }

    #[test]
    fn pipeline_stages_and_certificates() {
        let code = code_63_36();
        let structure = LocalStructure::disjoint_spc(&code, 7).unwrap();
        let word = BitVec::zeros(63);
        let clean: Vec<f64> = vec![1.0; 63];
        let out =
            locality_aware_decode(&code, &structure, &clean, 0.5, &OsdConfig::new(1), ScoreOn::Channel)
                .unwrap();
        assert_eq!(out.word, word);
        assert_eq!(out.stage, DecodeStage::Qmld);
        assert!(out.ml_certified);
        assert_eq!(out.candidates, 1);

        // Noisy trials: either certified quick look or a reprocessed word,
        // always a codeword.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut saw_bp = false;
        let mut saw_qmld = false;
        for _ in 0..200 {
            let rx = transmit_with(&word, 0.7, &mut rng);
            let out = locality_aware_decode(
                &code,
                &structure,
                &rx.y,
                0.7,
                &OsdConfig::new(1),
                ScoreOn::Channel,
            )
            .unwrap();
            assert!(code.contains(&out.word).unwrap());
            match out.stage {
                DecodeStage::Qmld => {
                    saw_qmld = true;
                    assert!(out.ml_certified);
                }
                DecodeStage::BpOsd => {
                    saw_bp = true;
                    assert!(!out.ml_certified);
                    assert_eq!(out.candidates, 37);
                }
                DecodeStage::Osd => panic!("plain OSD stage out of the pipeline"),
            }
        }
        assert!(saw_bp && saw_qmld);
    }

    #[test]
    fn quick_look_success_rate_near_the_reported_value() {
        // Nine 7-bit groups at 3.52 dB: certified-halt rate close to 0.82,
        // comfortably above the 0.77 analytic bound.
        let code = code_63_36();
        let structure = LocalStructure::disjoint_spc(&code, 7).unwrap();
        let n0 = 10f64.powf(-0.352);
        let zero = BitVec::zeros(63);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 4000;
        let mut hits = 0;
        for _ in 0..trials {
            let rx = transmit_with(&zero, n0, &mut rng);
            if qmld_spc(&code, &structure, &rx.y).unwrap().in_code {
                hits += 1;
            }
        }
        let rate = hits as f64 / trials as f64;
        assert!((rate - 0.82).abs() < 0.02, "rate {rate}");
        assert!(rate > qmld_success_bound(63, 7, n0).unwrap());
    }

    #[test]
    fn structure_spec_round_trips_through_json() {
        let code = code_63_33();
        let chain = Chain::new(21, vec![7]).unwrap();
        for structure in [
            LocalStructure::disjoint_spc(&code, 7).unwrap(),
            LocalStructure::hierarchical(&code, 7, 21, &chain).unwrap(),
        ] {
            let spec = structure.to_spec();
            let json = serde_json::to_string(&spec).unwrap();
            let parsed: StructureSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed, spec);
            let rebuilt = parsed.build(&code).unwrap();
            assert_eq!(rebuilt.to_spec(), spec);
        }
        // Tampered spec: a group that is not a constraint of the code.
        let bad = StructureSpec::DisjointSpc {
            groups: vec![vec![0, 1, 2]],
        };
        assert!(bad.build(&code).is_err());
    }

    #[test]
    fn availability_structure_and_update() {
        // One orthogonal check per coordinate for the [7,4] Hamming code.
        let code = CyclicCode::from_zero_representatives(7, 2, &[1]).unwrap();
        let report =
            crate::locality::orthogonal_checks(code.generator_matrix(), 3, 1, None).unwrap();
        assert!(report.t.iter().all(|&t| t == 1));
        let structure = LocalStructure::availability(&code, report.checks.clone()).unwrap();

        // Quick look = hard decision; certified only when it is a codeword.
        let word = BitVec::zeros(7);
        let clean = vec![1.0; 7];
        let look = quick_look(&code, &structure, &clean).unwrap();
        assert!(look.in_code);
        assert_eq!(look.word, word);
        let mut flipped = clean.clone();
        flipped[2] = -1.0;
        let look = quick_look(&code, &structure, &flipped).unwrap();
        assert!(!look.in_code);

        // The pipeline falls through to the update + reprocessing stage and
        // still corrects the single error.
        let out = locality_aware_decode(
            &code,
            &structure,
            &flipped,
            1.0,
            &OsdConfig::new(1),
            ScoreOn::Channel,
        )
        .unwrap();
        assert_eq!(out.stage, DecodeStage::BpOsd);
        assert_eq!(out.word, word);

        // JSON round trip.
        let spec = structure.to_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let parsed: StructureSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.build(&code).unwrap().to_spec(), spec);

        // Two genuine parity checks that meet at {0, 6} are rejected for
        // coordinate 0.
        let mut bad = report.checks.clone();
        bad[0] = vec![vec![0, 3, 5, 6], vec![0, 1, 4, 6]];
        assert!(LocalStructure::availability(&code, bad).is_err());
    }
}
