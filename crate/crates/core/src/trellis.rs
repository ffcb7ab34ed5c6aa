//! Minimal trellises and state-complexity bounds.
//!
//! States at depth i are partial syndromes: a vertex survives when it is
//! reachable from the zero syndrome over the first i columns of the parity
//! matrix and can still be cancelled by the remaining columns.  The number of
//! surviving vertices at depth i is forced to be 2^(s_i) with s_i the state
//! dimension read off the past/future subcode profile, which the builder
//! cross-checks.  Analytic bounds predict the profile of block-aligned
//! orderings straight from the zero set, without touching a generator matrix.

use crate::bits::BitVec;
use crate::cyclic::CyclicCode;
use crate::locality::count_intersecting_trains;
use crate::ordering::{chain_ordering, Chain, ChainOrdering};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Largest dual dimension for which syndrome labels stay in one machine word
/// and enumeration stays at desk scale.
const MAX_DUAL_DIM: usize = 24;
/// Largest per-level state dimension the builder will materialise.
const MAX_STATE_DIM: usize = 22;

/// Past/future subcode dimensions and state dimensions of a code under a
/// fixed coordinate ordering.  All vectors have length n + 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionProfile {
    pub n: usize,
    pub k: usize,
    /// Rank of the first i columns: dimension of the code punctured to them.
    pub prefix_rank: Vec<usize>,
    /// Rank of the last n - i columns.
    pub suffix_rank: Vec<usize>,
    /// Dimension of the subcode supported on the first i coordinates.
    pub prefix_subcode: Vec<usize>,
    /// Dimension of the subcode supported on the last n - i coordinates.
    pub suffix_subcode: Vec<usize>,
    /// State dimensions s_i; the vertex count at depth i is 2^(s_i).
    pub state_dims: Vec<usize>,
}

impl DimensionProfile {
    pub fn max_state_dim(&self) -> usize {
        self.state_dims.iter().copied().max().unwrap_or(0)
    }

    /// Branch-space dimensions: depth i holds 2^(e_i) edges with
    /// e_i = k - p_i - f_(i+1).
    pub fn edge_dims(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.k - self.prefix_subcode[i] - self.suffix_subcode[i + 1])
            .collect()
    }

    /// Decoding totals computed from the profile alone, without building the
    /// trellis.  Fails only when the counts overflow a machine word.
    pub fn complexity(&self) -> Result<ComplexityReport> {
        let mut vertices = 0usize;
        for &s in &self.state_dims {
            vertices = vertices
                .checked_add(1usize.checked_shl(s as u32).ok_or_else(too_big)?)
                .ok_or_else(too_big)?;
        }
        let mut edges = 0usize;
        for e in self.edge_dims() {
            edges = edges
                .checked_add(1usize.checked_shl(e as u32).ok_or_else(too_big)?)
                .ok_or_else(too_big)?;
        }
        Ok(ComplexityReport::from_counts(vertices, edges, self.k))
    }
}

fn too_big() -> Error {
    Error::capacity("operation counts overflow a machine word")
}

/// Row start/end positions after one-sided Gaussian elimination.  Sweeping
/// from the left gives each row a distinct first support index; sweeping from
/// the right gives distinct last indices.  The two sweeps are independent,
/// which makes the four state-dimension expressions a real cross-check.
fn row_extremes(rows: &mut Vec<BitVec>, n: usize, from_left: bool) -> Vec<usize> {
    let cols: Vec<usize> = if from_left {
        (0..n).collect()
    } else {
        (0..n).rev().collect()
    };
    let mut extreme = vec![usize::MAX; rows.len()];
    let mut assigned = vec![false; rows.len()];
    for col in cols {
        let Some(pivot) = (0..rows.len()).find(|&r| !assigned[r] && rows[r].get(col)) else {
            continue;
        };
        let pivot_row = rows[pivot].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot && !assigned[r] && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        assigned[pivot] = true;
        extreme[pivot] = col;
    }
    extreme
}

/// Compute the dimension profile of `code` under `order`.
pub fn dimension_profile(code: &CyclicCode, order: &ChainOrdering) -> Result<DimensionProfile> {
    let n = code.n();
    let k = code.k();
    if order.n() != n {
        return Err(Error::invalid(format!(
            "ordering length {} != code length {n}",
            order.n()
        )));
    }
    let gen = order.permute_columns(code.generator_matrix())?;

    let mut left_rows = gen.rows.clone();
    let starts = row_extremes(&mut left_rows, n, true);
    let mut right_rows = gen.rows.clone();
    let ends = row_extremes(&mut right_rows, n, false);
    if starts.contains(&usize::MAX) || ends.contains(&usize::MAX) {
        return Err(Error::construction("generator matrix is rank deficient"));
    }

    let mut prefix_rank = vec![0usize; n + 1];
    let mut suffix_subcode = vec![0usize; n + 1];
    let mut prefix_subcode = vec![0usize; n + 1];
    let mut suffix_rank = vec![0usize; n + 1];
    for i in 0..=n {
        prefix_rank[i] = starts.iter().filter(|&&s| s < i).count();
        suffix_subcode[i] = k - prefix_rank[i];
        prefix_subcode[i] = ends.iter().filter(|&&e| e < i).count();
        suffix_rank[i] = k - prefix_subcode[i];
    }

    let mut state_dims = vec![0usize; n + 1];
    for i in 0..=n {
        let a = k as isize - prefix_subcode[i] as isize - suffix_subcode[i] as isize;
        let b = prefix_rank[i] as isize - prefix_subcode[i] as isize;
        let c = prefix_rank[i] as isize + suffix_rank[i] as isize - k as isize;
        let d = suffix_rank[i] as isize - suffix_subcode[i] as isize;
        if a != b || b != c || c != d || a < 0 {
            return Err(Error::invariant(format!(
                "state dimension expressions disagree at depth {i}: {a} {b} {c} {d}"
            )));
        }
        if a as usize > k.min(n - k) {
            return Err(Error::invariant(format!(
                "state dimension {a} at depth {i} violates the dual-dimension cap"
            )));
        }
        state_dims[i] = a as usize;
    }
    Ok(DimensionProfile {
        n,
        k,
        prefix_rank,
        suffix_rank,
        prefix_subcode,
        suffix_subcode,
        state_dims,
    })
}

/// One trellis branch between consecutive depths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub bit: bool,
}

/// Minimal trellis of a code under a coordinate ordering.
#[derive(Clone)]
pub struct Trellis {
    n: usize,
    k: usize,
    order: ChainOrdering,
    /// Syndrome label per vertex, per depth; labels sorted ascending.
    levels: Vec<Vec<u32>>,
    /// Edges from depth i to i + 1, sorted by (bit, from) so that ties in
    /// the decoder resolve toward the smaller path bit.
    edges: Vec<Vec<Edge>>,
    state_dims: Vec<usize>,
}

/// Decoding totals for one trellis pass, with per-information-bit figures
/// rounded to the nearest integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityReport {
    pub vertices: usize,
    pub edges: usize,
    /// One real addition per edge.
    pub additions: usize,
    /// One comparison per surviving merge: edges - vertices + 1.
    pub comparisons: usize,
    pub total: usize,
    pub per_bit_additions: usize,
    pub per_bit_comparisons: usize,
    pub per_bit_total: usize,
}

impl ComplexityReport {
    fn from_counts(vertices: usize, edges: usize, k: usize) -> ComplexityReport {
        let additions = edges;
        let comparisons = edges - vertices + 1;
        let per_bit = |x: usize| (x as f64 / k as f64).round() as usize;
        ComplexityReport {
            vertices,
            edges,
            additions,
            comparisons,
            total: additions + comparisons,
            per_bit_additions: per_bit(additions),
            per_bit_comparisons: per_bit(comparisons),
            per_bit_total: per_bit(additions + comparisons),
        }
    }
}

/// Decoded word and its accumulated branch metric.
#[derive(Clone, Debug)]
pub struct ViterbiOutcome {
    pub word: BitVec,
    pub cost: f64,
}

impl Trellis {
    /// Build the minimal trellis of `code` under `order`.  Refuses to
    /// materialise anything with more than 2^22 states per depth or a dual
    /// dimension above 24; the analytic profile remains available through
    /// [`dimension_profile`] in those cases.
    pub fn build(code: &CyclicCode, order: &ChainOrdering) -> Result<Trellis> {
        let n = code.n();
        let k = code.k();
        let dual_dim = n - k;
        if dual_dim > MAX_DUAL_DIM {
            return Err(Error::capacity(format!(
                "dual dimension {dual_dim} exceeds the trellis cap of {MAX_DUAL_DIM}"
            )));
        }
        let profile = dimension_profile(code, order)?;
        if profile.max_state_dim() > MAX_STATE_DIM {
            return Err(Error::capacity(format!(
                "max state dimension {} exceeds the trellis cap of {MAX_STATE_DIM}",
                profile.max_state_dim()
            )));
        }

        let parity = order.permute_columns(code.parity_matrix())?;
        // Column j of the parity matrix as one syndrome word.
        let columns: Vec<u32> = (0..n)
            .map(|j| {
                let mut word = 0u32;
                for r in 0..dual_dim {
                    if parity.get(r, j) {
                        word |= 1 << r;
                    }
                }
                word
            })
            .collect();

        // Echelon bases of the suffix column spans; a syndrome is cancellable
        // from depth i exactly when it reduces to zero against bases[i].
        let mut bases: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        for i in (0..n).rev() {
            let mut basis = bases[i + 1].clone();
            insert_echelon(&mut basis, columns[i]);
            bases[i] = basis;
        }

        let mut levels: Vec<Vec<u32>> = Vec::with_capacity(n + 1);
        let mut edges: Vec<Vec<Edge>> = Vec::with_capacity(n);
        levels.push(vec![0]);
        for i in 0..n {
            let mut next: BTreeSet<u32> = BTreeSet::new();
            for &state in &levels[i] {
                for bit in [false, true] {
                    let target = state ^ if bit { columns[i] } else { 0 };
                    if reduce(&bases[i + 1], target) == 0 {
                        next.insert(target);
                    }
                }
            }
            let next: Vec<u32> = next.into_iter().collect();
            if next.len() != 1 << profile.state_dims[i + 1] {
                return Err(Error::invariant(format!(
                    "vertex count {} at depth {} does not match 2^{}",
                    next.len(),
                    i + 1,
                    profile.state_dims[i + 1]
                )));
            }
            let index_of = |s: u32| next.binary_search(&s).expect("state present") as u32;
            let mut level_edges = Vec::new();
            for bit in [false, true] {
                for (from, &state) in levels[i].iter().enumerate() {
                    let target = state ^ if bit { columns[i] } else { 0 };
                    if reduce(&bases[i + 1], target) == 0 {
                        level_edges.push(Edge {
                            from: from as u32,
                            to: index_of(target),
                            bit,
                        });
                    }
                }
            }
            edges.push(level_edges);
            levels.push(next);
        }
        if levels[n] != vec![0] {
            return Err(Error::invariant("final depth is not the zero syndrome"));
        }
        Ok(Trellis {
            n,
            k,
            order: order.clone(),
            levels,
            edges,
            state_dims: profile.state_dims,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> &ChainOrdering {
        &self.order
    }

    pub fn levels(&self) -> &[Vec<u32>] {
        &self.levels
    }

    pub fn edges(&self) -> &[Vec<Edge>] {
        &self.edges
    }

    pub fn state_dims(&self) -> &[usize] {
        &self.state_dims
    }

    pub fn vertex_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn complexity(&self) -> ComplexityReport {
        ComplexityReport::from_counts(self.vertex_count(), self.edge_count(), self.k)
    }

    /// Min-sum decoding.  `metrics[c][b]` is the branch cost of bit b at
    /// original coordinate c; the decoder handles the trellis ordering
    /// internally and returns the word in original coordinates.  Metric ties
    /// resolve toward the smaller path bit, then the smaller predecessor.
    pub fn viterbi_decode(&self, metrics: &[[f64; 2]]) -> Result<ViterbiOutcome> {
        if metrics.len() != self.n {
            return Err(Error::invalid(format!(
                "metric table length {} != code length {}",
                metrics.len(),
                self.n
            )));
        }
        if metrics.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::invalid("branch metrics must be finite"));
        }
        let perm = self.order.permutation();
        let mut costs: Vec<Vec<f64>> = self
            .levels
            .iter()
            .map(|l| vec![f64::INFINITY; l.len()])
            .collect();
        let mut back: Vec<Vec<u32>> = self
            .levels
            .iter()
            .map(|l| vec![u32::MAX; l.len()])
            .collect();
        costs[0][0] = 0.0;
        for (i, level_edges) in self.edges.iter().enumerate() {
            let metric = metrics[perm[i]];
            for (e_idx, e) in level_edges.iter().enumerate() {
                let cand = costs[i][e.from as usize] + metric[e.bit as usize];
                if cand < costs[i + 1][e.to as usize] {
                    costs[i + 1][e.to as usize] = cand;
                    back[i + 1][e.to as usize] = e_idx as u32;
                }
            }
        }
        let mut word = BitVec::zeros(self.n);
        let mut vertex = 0usize;
        for i in (0..self.n).rev() {
            let e = self.edges[i][back[i + 1][vertex] as usize];
            if e.bit {
                word.set(perm[i], true);
            }
            vertex = e.from as usize;
        }
        Ok(ViterbiOutcome {
            word,
            cost: costs[self.n][0],
        })
    }
}

fn insert_echelon(basis: &mut Vec<u32>, value: u32) {
    let reduced = reduce(basis, value);
    if reduced != 0 {
        basis.push(reduced);
        basis.sort_unstable_by(|a, b| b.cmp(a));
    }
}

fn reduce(basis: &[u32], mut value: u32) -> u32 {
    for &b in basis {
        if value ^ b < value {
            value ^= b;
        }
    }
    value
}

/// Pointwise state-dimension bound computed from the zero set alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateBoundProfile {
    /// Upper envelope of the prefix ranks of the code.
    pub phi: Vec<usize>,
    /// Upper envelope of the prefix ranks of the dual code.
    pub phi_dual: Vec<usize>,
    /// State-dimension bound from the code side: phi_i + phi_(n-i) - k.
    pub mu: Vec<i64>,
    /// State-dimension bound from the dual side.
    pub mu_dual: Vec<i64>,
    /// Final pointwise bound: min of the two sides, clamped at zero.
    pub bound: Vec<usize>,
}

/// Upper envelope of prefix ranks given exact anchors and per-block caps.
fn rank_envelope(
    n: usize,
    k: usize,
    anchors: &[(usize, usize)],
    block_caps: &[(usize, usize)],
) -> Result<Vec<usize>> {
    let mut ub = vec![k; n + 1];
    for &(pos, val) in anchors {
        ub[pos] = ub[pos].min(val);
    }
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if ub[i] + 1 < ub[i + 1] {
                ub[i + 1] = ub[i] + 1;
                changed = true;
            }
        }
        for i in (0..n).rev() {
            if ub[i + 1] < ub[i] {
                ub[i] = ub[i + 1];
                changed = true;
            }
        }
        for &(x, cap) in block_caps {
            for j in 0..n / x {
                if ub[j * x] + cap < ub[(j + 1) * x] {
                    ub[(j + 1) * x] = ub[j * x] + cap;
                    changed = true;
                }
            }
        }
    }
    for &(pos, val) in anchors {
        if ub[pos] != val {
            return Err(Error::invariant(format!(
                "rank envelope inconsistent at anchor {pos}: {} < {val}",
                ub[pos]
            )));
        }
    }
    Ok(ub)
}

fn anchors_and_caps(
    zeros: &crate::cyclic::ZeroSet,
    k: usize,
    chain: &Chain,
) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let n = zeros.n();
    let mut anchors = vec![(0usize, 0usize), (n, k)];
    let mut caps = Vec::new();
    for &x in chain.elems() {
        let punct_dim = x - zeros.punctured(x)?.len();
        let short_dim = x - zeros.shortened(x)?.len();
        anchors.push((x, punct_dim));
        anchors.push((n - x, k - short_dim));
        caps.push((x, punct_dim));
    }
    Ok((anchors, caps))
}

/// Pointwise upper bound on the state-dimension profile of the code under
/// the block-aligned ordering of `chain`, from the zero set alone.
pub fn state_profile_bound(code: &CyclicCode, chain: &Chain) -> Result<StateBoundProfile> {
    let n = code.n();
    let k = code.k();
    if chain.n() != n {
        return Err(Error::invalid("chain length does not match the code"));
    }
    let (anchors, caps) = anchors_and_caps(code.zeros(), k, chain)?;
    let phi = rank_envelope(n, k, &anchors, &caps)?;
    let dual = code.dual_zeros();
    let (anchors_d, caps_d) = anchors_and_caps(&dual, n - k, chain)?;
    let phi_dual = rank_envelope(n, n - k, &anchors_d, &caps_d)?;

    let mu: Vec<i64> = (0..=n)
        .map(|i| phi[i] as i64 + phi[n - i] as i64 - k as i64)
        .collect();
    let mu_dual: Vec<i64> = (0..=n)
        .map(|i| phi_dual[i] as i64 + phi_dual[n - i] as i64 - (n - k) as i64)
        .collect();
    let bound: Vec<usize> = (0..=n)
        .map(|i| mu[i].min(mu_dual[i]).max(0) as usize)
        .collect();
    Ok(StateBoundProfile {
        phi,
        phi_dual,
        mu,
        mu_dual,
        bound,
    })
}

/// Closed-form bound on the maximum state dimension under the block-aligned
/// ordering of a nonempty chain x_1 | ... | x_L (with x_(L+1) = n): the
/// smallest of k, n - k, and one telescoped sum per side of the duality.
pub fn max_state_bound(code: &CyclicCode, chain: &Chain) -> Result<usize> {
    if chain.is_empty() {
        return Err(Error::invalid("chain must be nonempty for the state bound"));
    }
    if chain.n() != code.n() {
        return Err(Error::invalid("chain length does not match the code"));
    }
    let n = code.n();
    let k = code.k();
    let zeros = code.zeros();
    let xs: Vec<usize> = chain.elems().to_vec();
    let mut t3 = xs[0] as i64 - k as i64;
    let mut t4 = xs[0] as i64 - (n - k) as i64;
    for (l, &x) in xs.iter().enumerate() {
        let next = if l + 1 < xs.len() { xs[l + 1] } else { n };
        let reps = (next / x - 1) as i64;
        let punct_dim = (x - zeros.punctured(x)?.len()) as i64;
        let short_dim = (x - zeros.shortened(x)?.len()) as i64;
        t3 += reps * punct_dim;
        t4 += reps * (x as i64 - short_dim);
    }
    Ok((k as i64).min((n - k) as i64).min(t3).min(t4).max(0) as usize)
}

/// Search every nonempty divisor chain for the ordering with the smallest
/// per-bit decode total, judged analytically from the dimension profile.
/// Returns `None` for prime lengths, which admit no chains.  Ties go to the
/// earlier chain in [`enumerate_chains`] order.
pub fn best_chain(code: &CyclicCode) -> Result<Option<(Chain, ComplexityReport)>> {
    let mut best: Option<(Chain, ComplexityReport)> = None;
    for chain in crate::ordering::enumerate_chains(code.n()) {
        let profile = dimension_profile(code, &chain_ordering(&chain))?;
        let report = profile.complexity()?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.per_bit_total < b.per_bit_total)
        {
            best = Some((chain, report));
        }
    }
    Ok(best)
}

/// State-dimension drop at an aligned boundary x when moving from `old` to a
/// subcode `new` obtained by completing locality trains.  The drop equals the
/// number of completed trains that touch the old zero set, and shows up at
/// depth n - x as well; both facts are checked.
pub fn state_drop(
    old: &CyclicCode,
    new: &CyclicCode,
    x: usize,
    order: &ChainOrdering,
) -> Result<usize> {
    if old.n() != new.n() {
        return Err(Error::invalid("codes have different lengths"));
    }
    if !order.chain().elems().contains(&x) {
        return Err(Error::invalid(format!(
            "depth {x} is not a block boundary of the ordering chain"
        )));
    }
    if old.zeros().iter().any(|z| !new.zeros().contains(z)) {
        return Err(Error::invalid("new code is not a subcode of the old one"));
    }
    let prof_old = dimension_profile(old, order)?;
    let prof_new = dimension_profile(new, order)?;
    let n = old.n();
    let at_x = prof_old.state_dims[x] as i64 - prof_new.state_dims[x] as i64;
    let at_mirror = prof_old.state_dims[n - x] as i64 - prof_new.state_dims[n - x] as i64;
    let trains = count_intersecting_trains(old, new, x)? as i64;
    if at_x != trains || at_mirror != trains {
        return Err(Error::invariant(format!(
            "state drop {at_x} (mirror {at_mirror}) does not match the {trains} \
             completed trains touching the old zero set"
        )));
    }
    Ok(at_x as usize)
}
