//! Dense GF(2) vectors and matrices, bit-packed into 64-bit words.

/// Fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = BitVec::zeros(len);
        for &i in support {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the dot product with `other`.
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 != 0
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Index of the first set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate() {
            if word != 0 {
                return Some((w << 6) + word.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Index of the last set bit, if any.
    pub fn last_one(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate().rev() {
            if word != 0 {
                return Some((w << 6) + 63 - word.leading_zeros() as usize);
            }
        }
        None
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        Ok(())
    }
}

/// Row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    pub rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    pub fn new(rows: Vec<BitVec>, cols: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        BitMatrix { rows, cols }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        BitMatrix {
            rows: vec![BitVec::zeros(ncols); nrows],
            cols: ncols,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v);
    }

    /// Row-reduce in place scanning columns left to right; returns the pivot
    /// column of each (reordered) row.  After the call the matrix is in
    /// reduced row echelon form with zero rows, if any, at the bottom.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(pivot_row) = (row..self.rows.len()).find(|&r| self.rows[r].get(col)) else {
                continue;
            };
            self.rows.swap(row, pivot_row);
            let pivot = self.rows[row].clone();
            for (r, other) in self.rows.iter_mut().enumerate() {
                if r != row && other.get(col) {
                    other.xor_assign(&pivot);
                }
            }
            pivots.push(col);
            row += 1;
            if row == self.rows.len() {
                break;
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut copy = self.clone();
        copy.row_reduce().len()
    }

    /// Basis of the right null space: all v with M v^T = 0.
    pub fn null_space(&self) -> Vec<BitVec> {
        let mut reduced = self.clone();
        let pivots = reduced.row_reduce();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = BitVec::zeros(self.cols);
            v.set(f, true);
            for (r, &p) in pivots.iter().enumerate() {
                if reduced.rows[r].get(f) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Left-multiply by a message row vector: msg * M.
    pub fn mul_left(&self, msg: &BitVec) -> BitVec {
        debug_assert_eq!(msg.len(), self.rows.len());
        let mut out = BitVec::zeros(self.cols);
        for (r, row) in self.rows.iter().enumerate() {
            if msg.get(r) {
                out.xor_assign(row);
            }
        }
        out
    }

    /// Right-multiply by a column vector: M * v^T, one parity bit per row.
    pub fn mul_right(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            out.set(r, row.dot(v));
        }
        out
    }

    /// Keep only the listed columns, in the listed order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows.len(), cols.len());
        for (r, row) in self.rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if row.get(c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row:?}")?;
        }
        Ok(())
    }
}

/// Solve M x^T = rhs for x, given that a unique solution exists on the pivot
/// columns.  Returns None when the system is inconsistent or underdetermined.
pub fn solve_unique(m: &BitMatrix, rhs: &BitVec) -> Option<BitVec> {
    let ncols = m.ncols();
    // Augment with the right-hand side as an extra column and reduce.
    let mut aug = BitMatrix::zeros(m.nrows(), ncols + 1);
    for (r, row) in m.rows.iter().enumerate() {
        for c in 0..ncols {
            if row.get(c) {
                aug.set(r, c, true);
            }
        }
        if rhs.get(r) {
            aug.set(r, ncols, true);
        }
    }
    let pivots = aug.row_reduce();
    if pivots.contains(&ncols) {
        return None; // inconsistent
    }
    if pivots.len() < ncols {
        return None; // underdetermined
    }
    let mut x = BitVec::zeros(ncols);
    for (r, &p) in pivots.iter().enumerate() {
        if aug.rows[r].get(ncols) {
            x.set(p, true);
        }
    }
    Some(x)
}
