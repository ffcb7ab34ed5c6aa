//! Coordinate orderings built from chains of divisors.
//!
//! A chain x_1 | x_2 | ... | x_L of proper divisors of n induces a nested
//! partition of the index set [0, n): first into residue classes mod n/x_L,
//! then mod n/x_(L-1), down to classes mod n/x_1.  Reading that tree with
//! cosets ordered by minimal representative and leaves sorted ascending gives
//! a permutation under which every aligned block of x_l consecutive positions
//! is one interleaved support set of size x_l.  Trellises built under such an
//! ordering concentrate their state-complexity dips at the block boundaries.

use crate::bits::{BitMatrix, BitVec};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Divisor chain for a length n: strictly increasing proper divisors of n
/// (excluding 1 and n), each dividing the next.  May be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    n: usize,
    elems: Vec<usize>,
}

impl Chain {
    pub fn new(n: usize, mut elems: Vec<usize>) -> Result<Chain> {
        if n == 0 {
            return Err(Error::invalid("length must be positive"));
        }
        elems.sort_unstable();
        elems.dedup();
        for &x in &elems {
            if x <= 1 || x >= n || n % x != 0 {
                return Err(Error::invalid(format!(
                    "{x} is not a proper divisor of {n} (1 and {n} are excluded)"
                )));
            }
        }
        for pair in elems.windows(2) {
            if pair[1] % pair[0] != 0 {
                return Err(Error::invalid(format!(
                    "{} does not divide {}; chain elements must nest",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Chain { n, elems })
    }

    pub fn empty(n: usize) -> Chain {
        Chain { n, elems: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

/// All nonempty divisor chains for n, ordered by length then lexicographically.
/// A prime n has no proper divisors besides 1, so the list is empty.
pub fn enumerate_chains(n: usize) -> Vec<Chain> {
    let divisors: Vec<usize> = (2..n).filter(|d| n % d == 0).collect();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = divisors.iter().map(|&d| vec![d]).collect();
    while let Some(chain) = stack.pop() {
        let last = *chain.last().expect("chains on the stack are nonempty");
        for &d in &divisors {
            if d > last && d % last == 0 {
                let mut longer = chain.clone();
                longer.push(d);
                stack.push(longer);
            }
        }
        out.push(chain);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.into_iter()
        .map(|elems| Chain { n, elems })
        .collect()
}

/// Permutation of [0, n) derived from a divisor chain.  `perm[j]` is the
/// original coordinate placed at position j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainOrdering {
    chain: Chain,
    perm: Vec<usize>,
}

/// Build the nested-coset ordering for a chain.
///
/// ```
/// use loccode::ordering::{chain_ordering, Chain};
/// let order = chain_ordering(&Chain::new(16, vec![4, 8]).unwrap());
/// assert_eq!(
///     order.permutation(),
///     &[0, 4, 8, 12, 2, 6, 10, 14, 1, 5, 9, 13, 3, 7, 11, 15]
/// );
/// ```
pub fn chain_ordering(chain: &Chain) -> ChainOrdering {
    let n = chain.n;
    // Strides from coarsest split to finest: n/x_L, ..., n/x_1.
    let strides: Vec<usize> = chain.elems.iter().rev().map(|&x| n / x).collect();
    let mut perm = Vec::with_capacity(n);
    split((0..n).collect(), &strides, &mut perm);
    ChainOrdering {
        chain: chain.clone(),
        perm,
    }
}

fn split(elems: Vec<usize>, strides: &[usize], perm: &mut Vec<usize>) {
    let Some((&stride, rest)) = strides.split_first() else {
        perm.extend(elems); // leaf coset, already ascending
        return;
    };
    // Residue classes mod stride; the map key is each class's minimal member
    // because inputs arrive sorted.
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in elems {
        groups.entry(e % stride).or_default().push(e);
    }
    for (_, group) in groups {
        split(group, rest, perm);
    }
}

impl ChainOrdering {
    pub fn identity(n: usize) -> ChainOrdering {
        chain_ordering(&Chain::empty(n))
    }

    pub fn n(&self) -> usize {
        self.chain.n
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Reorder a slice: output position j takes input coordinate perm[j].
    pub fn permute_slice<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        if data.len() != self.perm.len() {
            return Err(Error::invalid(format!(
                "slice length {} != ordering length {}",
                data.len(),
                self.perm.len()
            )));
        }
        Ok(self.perm.iter().map(|&i| data[i]).collect())
    }

    /// Undo [`permute_slice`](Self::permute_slice).
    pub fn unpermute_slice<T: Copy + Default>(&self, data: &[T]) -> Result<Vec<T>> {
        if data.len() != self.perm.len() {
            return Err(Error::invalid(format!(
                "slice length {} != ordering length {}",
                data.len(),
                self.perm.len()
            )));
        }
        let mut out = vec![T::default(); data.len()];
        for (j, &i) in self.perm.iter().enumerate() {
            out[i] = data[j];
        }
        Ok(out)
    }

    pub fn permute_bits(&self, word: &BitVec) -> Result<BitVec> {
        if word.len() != self.perm.len() {
            return Err(Error::invalid(format!(
                "word length {} != ordering length {}",
                word.len(),
                self.perm.len()
            )));
        }
        let mut out = BitVec::zeros(word.len());
        for (j, &i) in self.perm.iter().enumerate() {
            if word.get(i) {
                out.set(j, true);
            }
        }
        Ok(out)
    }

    pub fn unpermute_bits(&self, word: &BitVec) -> Result<BitVec> {
        if word.len() != self.perm.len() {
            return Err(Error::invalid(format!(
                "word length {} != ordering length {}",
                word.len(),
                self.perm.len()
            )));
        }
        let mut out = BitVec::zeros(word.len());
        for (j, &i) in self.perm.iter().enumerate() {
            if word.get(j) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Reorder matrix columns the same way as [`permute_slice`](Self::permute_slice).
    pub fn permute_columns(&self, m: &BitMatrix) -> Result<BitMatrix> {
        if m.ncols() != self.perm.len() {
            return Err(Error::invalid(format!(
                "matrix width {} != ordering length {}",
                m.ncols(),
                self.perm.len()
            )));
        }
        Ok(m.select_columns(&self.perm))
    }
}
