//! Repair locality read off the zero set.
//!
//! For a proper divisor n1 of n the coordinates split into n/n1 interleaved
//! support sets I_i = {i, i + n/n1, ...}.  Puncturing a cyclic code to any of
//! them yields one fixed length-n1 cyclic code, whose zeros are the residues
//! a mod n1 with the whole train {a, a + n1, ..., a + n - n1} inside the zero
//! set.  A nonempty punctured zero set therefore hands every symbol a local
//! code: (r, delta) locality, two-level hierarchies when two divisors nest,
//! and availability when several low-weight dual words meet only in one
//! coordinate.

use crate::bits::{BitMatrix, BitVec};
use crate::cyclic::{cyclotomic_coset, CyclicCode, ZeroSet};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Arithmetic progression {residue, residue + n1, ..., residue + n - n1}
/// of step n1 inside [0, n): the exponents that must all be zeros for the
/// punctured code to gain the zero `residue`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalityTrain {
    n: usize,
    n1: usize,
    residue: usize,
}

impl LocalityTrain {
    pub fn residue(&self) -> usize {
        self.residue
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.n / self.n1)
            .map(|j| self.residue + j * self.n1)
            .collect()
    }

    pub fn is_inside(&self, zeros: &ZeroSet) -> bool {
        self.members().iter().all(|&m| zeros.contains(m))
    }

    pub fn intersects(&self, zeros: &ZeroSet) -> bool {
        self.members().iter().any(|&m| zeros.contains(m))
    }
}

/// The n1 trains of step n1 inside [0, n); requires a proper divisor.
pub fn locality_trains(n: usize, n1: usize) -> Result<Vec<LocalityTrain>> {
    check_proper_divisor(n1, n)?;
    Ok((0..n1)
        .map(|residue| LocalityTrain { n, n1, residue })
        .collect())
}

/// Interleaved support sets I_i = {i, i + stride, ...} of size n1, where
/// stride = n/n1; there are stride of them and they partition [0, n).
pub fn support_sets(n: usize, n1: usize) -> Result<Vec<Vec<usize>>> {
    check_proper_divisor(n1, n)?;
    let stride = n / n1;
    Ok((0..stride)
        .map(|i| (0..n1).map(|t| i + t * stride).collect())
        .collect())
}

/// Locality parameters of the length-n1 punctured code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalityProfile {
    /// Local block length.
    pub n1: usize,
    /// Locality in the (r, delta) sense: n1 - delta + 1 erased symbols short
    /// of the full block suffice for repair.
    pub r: usize,
    /// Minimum distance of the local code (lower bound when not exact).
    pub delta: usize,
    /// Whether `delta` is exact (exhaustive) or only the progression bound.
    pub delta_exact: bool,
    /// Dimension of the local code, n1 minus the punctured zero count.
    pub local_dim: usize,
    /// Zero set of the local code.
    pub punctured_zeros: ZeroSet,
    /// The repair groups: interleaved support sets of size n1.
    pub groups: Vec<Vec<usize>>,
}

/// Read (r, delta) locality for divisor n1 off the punctured zero set.
/// Returns None when the punctured code has no zeros, i.e. no local parity.
pub fn punctured_locality(code: &CyclicCode, n1: usize) -> Result<Option<LocalityProfile>> {
    let punctured = code.punctured_zeros(n1)?;
    if punctured.is_empty() {
        return Ok(None);
    }
    if punctured.len() == n1 {
        return Err(Error::invariant(
            "punctured code collapsed to the zero code on a nontrivial code",
        ));
    }
    let local = CyclicCode::from_zero_set(punctured.clone())?;
    let (delta, delta_exact) = if n1 <= 24 {
        (local.min_distance_exhaustive()?, true)
    } else {
        (crate::cyclic::bch_bound(&punctured), false)
    };
    Ok(Some(LocalityProfile {
        n1,
        r: n1 - delta + 1,
        delta,
        delta_exact,
        local_dim: local.k(),
        punctured_zeros: punctured,
        groups: support_sets(code.n(), n1)?,
    }))
}

/// One level of a nested locality hierarchy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchyLevel {
    pub n1: usize,
    /// Locality in the dimension sense used for hierarchies: the dimension of
    /// the level's local code.
    pub r: usize,
    pub delta: usize,
    pub delta_exact: bool,
    pub groups: Vec<Vec<usize>>,
}

/// Multi-level locality for nested divisors (ascending: base level first).
/// Every level must actually carry local parity; groups of finer levels nest
/// inside groups of coarser ones.
pub fn hierarchical_profile(code: &CyclicCode, lengths: &[usize]) -> Result<Vec<HierarchyLevel>> {
    if lengths.is_empty() {
        return Err(Error::invalid("hierarchy needs at least one level"));
    }
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != lengths.len() {
        return Err(Error::invalid("hierarchy lengths must be distinct"));
    }
    for pair in sorted.windows(2) {
        if pair[1] % pair[0] != 0 {
            return Err(Error::invalid(format!(
                "hierarchy lengths must nest: {} does not divide {}",
                pair[0], pair[1]
            )));
        }
    }
    let mut levels = Vec::with_capacity(sorted.len());
    for &n1 in &sorted {
        let Some(profile) = punctured_locality(code, n1)? else {
            return Err(Error::config(format!(
                "no local parity at block length {n1}; the hierarchy does not exist"
            )));
        };
        levels.push(HierarchyLevel {
            n1,
            r: profile.local_dim,
            delta: profile.delta,
            delta_exact: profile.delta_exact,
            groups: profile.groups,
        });
    }
    // Nesting check: each base group lies inside exactly one group per
    // coarser level, because strides divide each other.
    for window in levels.windows(2) {
        let (fine, coarse) = (&window[0], &window[1]);
        for fg in &fine.groups {
            let hit = coarse
                .groups
                .iter()
                .filter(|cg| {
                    let set: BTreeSet<usize> = cg.iter().copied().collect();
                    fg.iter().all(|c| set.contains(c))
                })
                .count();
            if hit != 1 {
                return Err(Error::invariant(
                    "fine repair group does not nest inside one coarse group",
                ));
            }
        }
    }
    Ok(levels)
}

/// Per-coordinate orthogonal check sets: each check contains the coordinate,
/// and any two selected checks for the same coordinate meet only there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvailabilityReport {
    /// Achieved number of orthogonal checks per coordinate.
    pub t: Vec<usize>,
    /// Selected check supports per coordinate, each sorted ascending.
    pub checks: Vec<Vec<Vec<usize>>>,
}

/// Greedily select orthogonal parity checks of weight <= r_max + 1 for every
/// coordinate.  Candidate checks come from `supplied` when given (each is
/// verified to be a parity check of the code), otherwise from exhaustive dual
/// enumeration, which needs n - k <= 24.  `t_target` caps the number of
/// checks kept per coordinate; 0 means no cap.
pub fn orthogonal_checks(
    gen: &BitMatrix,
    r_max: usize,
    t_target: usize,
    supplied: Option<&[Vec<usize>]>,
) -> Result<AvailabilityReport> {
    let n = gen.ncols();
    let k = gen.nrows();
    let max_weight = r_max + 1;

    let mut candidates: Vec<Vec<usize>> = Vec::new();
    match supplied {
        Some(words) => {
            for support in words {
                let w = BitVec::from_support(n, support);
                if support.iter().any(|&c| c >= n) {
                    return Err(Error::invalid("check support outside the code length"));
                }
                if !gen.mul_right(&w).is_zero() {
                    return Err(Error::invalid(
                        "supplied check is not orthogonal to the code",
                    ));
                }
                if w.weight() == 0 || w.weight() > max_weight {
                    continue;
                }
                candidates.push(w.support());
            }
        }
        None => {
            if n - k > 24 {
                return Err(Error::capacity(format!(
                    "dual dimension {} too large for exhaustive check enumeration; \
                     supply checks explicitly",
                    n - k
                )));
            }
            let dual_basis = gen.null_space();
            let mut word = BitVec::zeros(n);
            for idx in 1u64..1 << dual_basis.len() {
                word.xor_assign(&dual_basis[idx.trailing_zeros() as usize]);
                let wt = word.weight();
                if wt > 0 && wt <= max_weight {
                    candidates.push(word.support());
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    candidates.dedup();

    let mut t = vec![0usize; n];
    let mut checks: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for (i, (slot, count)) in checks.iter_mut().zip(t.iter_mut()).enumerate() {
        let mut used = BitVec::zeros(n); // union of selected supports minus i
        for cand in candidates.iter().filter(|c| c.contains(&i)) {
            if t_target != 0 && *count >= t_target {
                break;
            }
            let disjoint = cand.iter().all(|&c| c == i || !used.get(c));
            if disjoint {
                for &c in cand {
                    if c != i {
                        used.set(c, true);
                    }
                }
                slot.push(cand.clone());
                *count += 1;
            }
        }
    }
    Ok(AvailabilityReport { t, checks })
}

/// Enlarge the zero set by whole trains: take the closure of `residues`
/// under doubling mod x, and add every member of each train as a zero.
/// The result stays coset-closed, so it is again a cyclic code, a subcode of
/// the original with locality at block length x.
pub fn add_trains(code: &CyclicCode, x: usize, residues: &[usize]) -> Result<CyclicCode> {
    check_proper_divisor(x, code.n())?;
    let mut reps: Vec<usize> = code.zeros().to_vec();
    let mut residue_closure: BTreeSet<usize> = BTreeSet::new();
    for &r in residues {
        residue_closure.extend(cyclotomic_coset(code.zeros().q(), x, r));
    }
    for a in residue_closure {
        reps.extend(
            LocalityTrain {
                n: code.n(),
                n1: x,
                residue: a,
            }
            .members(),
        );
    }
    CyclicCode::from_zero_representatives(code.n(), 2, &reps)
}

/// Number of trains of step x that are complete in the new zero set, not
/// complete in the old one, and touch the old one.  This is the quantity that
/// predicts the trellis state-complexity drop at aligned boundaries.
pub fn count_intersecting_trains(
    old: &CyclicCode,
    new: &CyclicCode,
    x: usize,
) -> Result<usize> {
    if old.n() != new.n() {
        return Err(Error::invalid("codes have different lengths"));
    }
    let trains = locality_trains(old.n(), x)?;
    Ok(trains
        .iter()
        .filter(|t| {
            t.is_inside(new.zeros()) && !t.is_inside(old.zeros()) && t.intersects(old.zeros())
        })
        .count())
}

fn check_proper_divisor(n1: usize, n: usize) -> Result<()> {
    if n1 == 0 || n1 >= n || n % n1 != 0 {
        return Err(Error::invalid(format!(
            "{n1} is not a proper divisor of {n}"
        )));
    }
    Ok(())
}
