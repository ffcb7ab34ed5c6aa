//! Binary cyclic codes described by their zero sets.
//!
//! A length-n cyclic code over GF(2) (n odd) is fixed by the set of exponents
//! lambda for which every codeword polynomial vanishes at alpha^lambda, with
//! alpha a primitive n-th root of unity in GF(2^m).  That zero set is closed
//! under doubling mod n, the dimension is n minus the number of zeros, and
//! the generator polynomial is the product of (x - alpha^lambda) over the
//! zero set.  Shortening or puncturing to one of the n1 | n interleaved
//! support sets acts on the zero set by plain residue arithmetic, which is
//! what the locality and trellis machinery build on.

use crate::bits::{BitMatrix, BitVec};
use crate::galois::{gcd, multiplicative_order, Field};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Orbit of `a` under multiplication by `q` modulo `n`, sorted ascending.
pub fn cyclotomic_coset(q: u64, n: usize, a: usize) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut cur = a % n;
    while seen.insert(cur) {
        cur = (cur as u64 * q % n as u64) as usize;
    }
    seen.into_iter().collect()
}

/// Subset of [0, n) closed under multiplication by q modulo n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroSet {
    n: usize,
    q: u64,
    elems: BTreeSet<usize>,
}

impl ZeroSet {
    /// Close `reps` under multiplication by q mod n.
    pub fn closure(n: usize, q: u64, reps: &[usize]) -> Result<ZeroSet> {
        if n == 0 {
            return Err(Error::invalid("length must be positive"));
        }
        if gcd(q, n as u64) != 1 {
            return Err(Error::invalid(format!(
                "alphabet size {q} and length {n} are not coprime"
            )));
        }
        let mut elems = BTreeSet::new();
        for &r in reps {
            elems.extend(cyclotomic_coset(q, n, r));
        }
        Ok(ZeroSet { n, q, elems })
    }

    /// Accept `elems` only if it is already coset-closed.
    pub fn strict(n: usize, q: u64, elems: &[usize]) -> Result<ZeroSet> {
        let closed = ZeroSet::closure(n, q, elems)?;
        let given: BTreeSet<usize> = elems.iter().map(|&e| e % n).collect();
        if closed.elems != given {
            return Err(Error::invalid(format!(
                "zero set is not closed under multiplication by {q} mod {n}"
            )));
        }
        Ok(closed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn contains(&self, lambda: usize) -> bool {
        self.elems.contains(&(lambda % self.n))
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.elems.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.elems.iter().copied().collect()
    }

    /// Residues of the set modulo a proper divisor n1: the zero set of the
    /// shortening to a length-n1 support set.
    pub fn shortened(&self, n1: usize) -> Result<ZeroSet> {
        check_proper_divisor(n1, self.n)?;
        let elems: BTreeSet<usize> = self.elems.iter().map(|&l| l % n1).collect();
        Ok(ZeroSet {
            n: n1,
            q: self.q,
            elems,
        })
    }

    /// Residues a in [0, n1) whose whole train {a, a + n1, ..., a + n - n1}
    /// lies in the set: the zero set of the puncturing to a length-n1
    /// support set.
    pub fn punctured(&self, n1: usize) -> Result<ZeroSet> {
        check_proper_divisor(n1, self.n)?;
        let stride_count = self.n / n1;
        let elems: BTreeSet<usize> = (0..n1)
            .filter(|&a| (0..stride_count).all(|j| self.elems.contains(&(a + j * n1))))
            .collect();
        Ok(ZeroSet {
            n: n1,
            q: self.q,
            elems,
        })
    }

    /// Distinct cosets making up the set, each sorted, ordered by minimum.
    pub fn cosets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for &e in &self.elems {
            if seen.contains(&e) {
                continue;
            }
            let coset = cyclotomic_coset(self.q, self.n, e);
            seen.extend(coset.iter().copied());
            out.push(coset);
        }
        out
    }
}

/// Binary cyclic code with generator and parity-check matrices materialised.
#[derive(Clone)]
pub struct CyclicCode {
    n: usize,
    k: usize,
    zeros: ZeroSet,
    gen_poly: Vec<u8>,
    gen: BitMatrix,
    parity: BitMatrix,
}

impl CyclicCode {
    /// Build the binary cyclic code whose zero set is the coset closure of
    /// `reps` modulo `n`.
    pub fn from_zero_representatives(n: usize, q: u64, reps: &[usize]) -> Result<CyclicCode> {
        if q != 2 {
            return Err(Error::invalid(
                "only binary codes are constructed; zero-set arithmetic alone supports other q",
            ));
        }
        Self::from_zero_set(ZeroSet::closure(n, q, reps)?)
    }

    /// As above but rejects a representative list that is not already closed.
    pub fn from_zero_set_strict(n: usize, q: u64, zeros: &[usize]) -> Result<CyclicCode> {
        if q != 2 {
            return Err(Error::invalid(
                "only binary codes are constructed; zero-set arithmetic alone supports other q",
            ));
        }
        Self::from_zero_set(ZeroSet::strict(n, q, zeros)?)
    }

    pub fn from_zero_set(zeros: ZeroSet) -> Result<CyclicCode> {
        let n = zeros.n;
        let k = n - zeros.len();
        if k == 0 {
            return Err(Error::invalid(
                "zero set covers every exponent; the code would be trivial",
            ));
        }

        let gen_poly = generator_polynomial(&zeros)?;
        debug_assert_eq!(gen_poly.len(), n - k + 1);

        // Rows are the cyclic shifts x^i g(x); deg g = n - k so nothing wraps.
        let mut gen = BitMatrix::zeros(k, n);
        for row in 0..k {
            for (j, &c) in gen_poly.iter().enumerate() {
                if c != 0 {
                    gen.set(row, row + j, true);
                }
            }
        }
        if gen.rank() != k {
            return Err(Error::construction("generator matrix is rank deficient"));
        }

        let parity_rows = gen.null_space();
        if parity_rows.len() != n - k {
            return Err(Error::construction("parity-check basis has wrong size"));
        }
        let parity = BitMatrix::new(parity_rows, n);

        let code = CyclicCode {
            n,
            k,
            zeros,
            gen_poly,
            gen,
            parity,
        };
        code.verify_zeros()?;
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn zeros(&self) -> &ZeroSet {
        &self.zeros
    }

    /// Generator polynomial coefficients, ascending degree.
    pub fn generator_poly(&self) -> &[u8] {
        &self.gen_poly
    }

    pub fn generator_matrix(&self) -> &BitMatrix {
        &self.gen
    }

    pub fn parity_matrix(&self) -> &BitMatrix {
        &self.parity
    }

    pub fn encode(&self, msg: &BitVec) -> Result<BitVec> {
        if msg.len() != self.k {
            return Err(Error::invalid(format!(
                "message length {} != dimension {}",
                msg.len(),
                self.k
            )));
        }
        Ok(self.gen.mul_left(msg))
    }

    pub fn contains(&self, word: &BitVec) -> Result<bool> {
        if word.len() != self.n {
            return Err(Error::invalid(format!(
                "word length {} != block length {}",
                word.len(),
                self.n
            )));
        }
        Ok(self.parity.mul_right(word).is_zero())
    }

    /// Zero set of the dual code: negate the complement of the zero set.
    pub fn dual_zeros(&self) -> ZeroSet {
        let elems: BTreeSet<usize> = (0..self.n)
            .filter(|&l| !self.zeros.contains(l))
            .map(|l| (self.n - l) % self.n)
            .collect();
        ZeroSet {
            n: self.n,
            q: self.zeros.q,
            elems,
        }
    }

    /// Zero set of the code shortened to a length-n1 support set.
    pub fn shortened_zeros(&self, n1: usize) -> Result<ZeroSet> {
        self.zeros.shortened(n1)
    }

    /// Zero set of the code punctured to a length-n1 support set.
    pub fn punctured_zeros(&self, n1: usize) -> Result<ZeroSet> {
        self.zeros.punctured(n1)
    }

    /// Exact minimum distance by enumerating all nonzero codewords in Gray
    /// order.  Refuses dimensions above 24.
    pub fn min_distance_exhaustive(&self) -> Result<usize> {
        if self.k > 24 {
            return Err(Error::capacity(format!(
                "dimension {} too large for exhaustive distance enumeration",
                self.k
            )));
        }
        let mut word = BitVec::zeros(self.n);
        let mut best = self.n + 1;
        for i in 1u64..1 << self.k {
            let row = i.trailing_zeros() as usize;
            word.xor_assign(&self.gen.rows[row]);
            best = best.min(word.weight());
        }
        Ok(best)
    }

    /// Every generator row must vanish at every declared zero.
    fn verify_zeros(&self) -> Result<()> {
        let m = multiplicative_order(2, self.n as u64)?;
        let field = Field::new(2, m)?;
        let beta = field.nth_root(self.n as u32)?;
        let coeffs: Vec<u32> = self.gen_poly.iter().map(|&c| c as u32).collect();
        for lambda in self.zeros.iter() {
            let point = field.pow(beta, lambda as u64);
            if !field.eval_poly(&coeffs, point)?.is_zero() {
                return Err(Error::invariant(format!(
                    "generator polynomial does not vanish at exponent {lambda}"
                )));
            }
        }
        Ok(())
    }
}

fn check_proper_divisor(n1: usize, n: usize) -> Result<()> {
    if n1 == 0 || n1 >= n || n % n1 != 0 {
        return Err(Error::invalid(format!(
            "{n1} is not a proper divisor of {n}"
        )));
    }
    Ok(())
}

/// Coefficients of prod (x - alpha^lambda) over the zero set, all of which
/// must land in the base field.
fn generator_polynomial(zeros: &ZeroSet) -> Result<Vec<u8>> {
    let n = zeros.n;
    let m = multiplicative_order(2, n as u64)?;
    let field = Field::new(2, m)?;
    let beta = field.nth_root(n as u32)?;

    let mut poly = vec![field.one()];
    for lambda in zeros.iter() {
        let root = field.pow(beta, lambda as u64);
        // Multiply by (x + root); characteristic two makes minus a plus.
        let mut next = vec![field.zero(); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] = field.add(next[i + 1], c);
            next[i] = field.add(next[i], field.mul(c, root));
        }
        poly = next;
    }

    poly.iter()
        .map(|&c| {
            let v = field.value(c);
            if v <= 1 {
                Ok(v as u8)
            } else {
                Err(Error::invariant(
                    "generator polynomial has a coefficient outside GF(2)",
                ))
            }
        })
        .collect()
}

/// BCH-style distance lower bound for a zero set: one plus the longest run of
/// zeros in arithmetic progression with a step coprime to the length.
pub fn bch_bound(zeros: &ZeroSet) -> usize {
    let n = zeros.n;
    let mut longest = 0usize;
    for step in 1..n.max(2) {
        if gcd(step as u64, n as u64) != 1 {
            continue;
        }
        for start in zeros.iter() {
            let mut len = 0;
            let mut cur = start;
            while zeros.contains(cur) && len < n {
                len += 1;
                cur = (cur + step) % n;
            }
            longest = longest.max(len);
        }
    }
    longest + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosets_mod_63() {
        assert_eq!(cyclotomic_coset(2, 63, 1), vec![1, 2, 4, 8, 16, 32]);
        assert_eq!(cyclotomic_coset(2, 63, 3), vec![3, 6, 12, 24, 33, 48]);
        assert_eq!(cyclotomic_coset(2, 63, 21), vec![21, 42]);
        assert_eq!(cyclotomic_coset(2, 63, 27), vec![27, 45, 54]);
        assert_eq!(cyclotomic_coset(2, 63, 0), vec![0]);
        // Every coset size divides the order of 2 mod 63.
        for a in 0..63 {
            assert_eq!(6 % cyclotomic_coset(2, 63, a).len(), 0);
        }
    }

    #[test]
    fn hamming_code_from_zeros() {
        let code = CyclicCode::from_zero_representatives(7, 2, &[1]).unwrap();
        assert_eq!((code.n(), code.k()), (7, 4));
        assert_eq!(code.generator_poly(), &[1, 1, 0, 1]); // 1 + x + x^3
        assert_eq!(code.min_distance_exhaustive().unwrap(), 3);
        let dual = code.dual_zeros();
        assert_eq!(dual.to_vec(), vec![0, 1, 2, 4]);
    }

    #[test]
    fn bch_63_51_structure() {
        let code = CyclicCode::from_zero_representatives(63, 2, &[1, 3]).unwrap();
        assert_eq!((code.n(), code.k()), (63, 51));
        assert_eq!(code.generator_poly().len(), 13);
        let shortened = code.shortened_zeros(21).unwrap();
        assert_eq!(shortened.to_vec(), vec![1, 2, 3, 4, 6, 8, 11, 12, 16]);
        let punctured = code.punctured_zeros(21).unwrap();
        assert!(punctured.is_empty());
    }

    #[test]
    fn example_code_63_33_locality_zeros() {
        let code = CyclicCode::from_zero_representatives(63, 2, &[0, 1, 3, 5, 7, 21, 27]).unwrap();
        assert_eq!((code.n(), code.k()), (63, 33));
        assert_eq!(
            code.punctured_zeros(21).unwrap().to_vec(),
            vec![0, 3, 6, 7, 12, 14]
        );
        assert_eq!(code.punctured_zeros(7).unwrap().to_vec(), vec![0]);
        assert_eq!(code.punctured_zeros(9).unwrap().to_vec(), Vec::<usize>::new());
    }

    #[test]
    fn encode_and_membership_agree() {
        let code = CyclicCode::from_zero_representatives(15, 2, &[1, 3]).unwrap();
        assert_eq!((code.n(), code.k()), (15, 7));
        for msg_bits in 0u32..1 << 7 {
            let msg = BitVec::from_bits(
                &(0..7).map(|i| (msg_bits >> i & 1) as u8).collect::<Vec<_>>(),
            );
            let word = code.encode(&msg).unwrap();
            assert!(code.contains(&word).unwrap());
        }
        let mut bad = BitVec::zeros(15);
        bad.set(0, true);
        assert!(!code.contains(&bad).unwrap());
        assert_eq!(code.min_distance_exhaustive().unwrap(), 5);
    }

    #[test]
    fn dual_zeros_are_coset_closed_and_complementary() {
        for (n, reps) in [(63usize, vec![1usize, 3]), (15, vec![1]), (9, vec![0, 3])] {
            let code = CyclicCode::from_zero_representatives(n, 2, &reps).unwrap();
            let dual = code.dual_zeros();
            assert_eq!(dual.len(), code.k());
            let again = ZeroSet::strict(n, 2, &dual.to_vec()).unwrap();
            assert_eq!(again, dual);
        }
    }

    #[test]
    fn strict_construction_rejects_open_sets() {
        assert!(CyclicCode::from_zero_set_strict(7, 2, &[1]).is_err());
        assert!(CyclicCode::from_zero_set_strict(7, 2, &[1, 2, 4]).is_ok());
        assert!(CyclicCode::from_zero_representatives(6, 2, &[1]).is_err()); // gcd(2,6) != 1
        assert!(CyclicCode::from_zero_representatives(7, 3, &[1]).is_err()); // non-binary
    }

    #[test]
    fn divisor_checks() {
        let code = CyclicCode::from_zero_representatives(63, 2, &[1]).unwrap();
        assert!(code.shortened_zeros(5).is_err());
        assert!(code.shortened_zeros(63).is_err());
        assert!(code.shortened_zeros(0).is_err());
        assert!(code.punctured_zeros(10).is_err());
    }

    #[test]
    fn distance_cap_is_enforced() {
        let code = CyclicCode::from_zero_representatives(63, 2, &[1, 3]).unwrap();
        assert!(matches!(
            code.min_distance_exhaustive(),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn bch_bound_known_cases() {
        // Middle code of the length-63 example: delta >= 3.
        let zeros = ZeroSet::strict(21, 2, &[0, 3, 6, 7, 12, 14]).unwrap();
        assert_eq!(bch_bound(&zeros), 3);
        // Single parity check: zeros {0} -> bound 2.
        let spc = ZeroSet::strict(7, 2, &[0]).unwrap();
        assert_eq!(bch_bound(&spc), 2);
        // Empty zero set -> trivial bound 1.
        let empty = ZeroSet::closure(7, 2, &[]).unwrap();
        assert_eq!(bch_bound(&empty), 1);
        // Narrow-sense BCH with zeros {1,2,3,4,...}: consecutive run.
        let code = CyclicCode::from_zero_representatives(15, 2, &[1, 3]).unwrap();
        assert_eq!(bch_bound(code.zeros()), 5);
    }

    #[test]
    fn bch_255_codes_construct() {
        let a = CyclicCode::from_zero_representatives(255, 2, &[0, 1, 3, 5, 7, 9, 11]).unwrap();
        assert_eq!((a.n(), a.k()), (255, 206));
        let b = CyclicCode::from_zero_representatives(
            255,
            2,
            &[0, 1, 3, 5, 7, 9, 11, 17, 51, 85, 119],
        )
        .unwrap();
        assert_eq!((b.n(), b.k()), (255, 192));
        assert_eq!(b.punctured_zeros(17).unwrap().to_vec(), vec![0]);
        assert!(a.punctured_zeros(17).unwrap().is_empty());
    }
}
