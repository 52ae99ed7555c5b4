//! Bit-packed linear algebra over GF(2).
//!
//! Vectors and matrix rows are stored as little-endian `u64` words: bit `i`
//! lives at word `i / 64`, position `i % 64`. Storage past the logical length
//! is always zero, so whole-word operations never need masking on read.

use std::fmt;

use crate::error::{invalid, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Dense vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Unit vector with a single one at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bits<I>(bits: I) -> Self
    where
        I: IntoIterator<Item = bool>,
    {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from 0/1 bytes; any nonzero byte counts as one.
    pub fn from_u8s(bits: &[u8]) -> Self {
        Self::from_bits(bits.iter().map(|&b| b != 0))
    }

    /// Builds a vector from raw words, clearing any bits past `len`.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        (self.words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_u8s(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, ")")
    }
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stacks the given vectors as rows. All rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(invalid(format!(
                    "row {i} has length {}, expected {cols}",
                    row.len()
                )));
            }
            m.row_words_mut(i).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Builds a matrix from 0/1 byte rows.
    pub fn from_u8_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let vecs: Vec<BitVector> = rows.iter().map(|r| BitVector::from_u8s(r)).collect();
        Self::from_rows(cols, &vecs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.data[row * self.stride..(row + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.data[row * self.stride..(row + 1) * self.stride]
    }

    pub fn row(&self, row: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(row).to_vec())
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index out of range");
        (self.data[row * self.stride + col / WORD_BITS] >> (col % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols, "index out of range");
        let idx = row * self.stride + col / WORD_BITS;
        let mask = 1u64 << (col % WORD_BITS);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    /// Appends a row; the row must match the column count.
    pub fn push_row(&mut self, row: &BitVector) -> Result<()> {
        if row.len() != self.cols {
            return Err(invalid(format!(
                "row has length {}, expected {}",
                row.len(),
                self.cols
            )));
        }
        self.data.extend_from_slice(row.words());
        self.rows += 1;
        Ok(())
    }

    /// Sub-matrix made of the listed rows, in the order given.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), self.cols);
        for (dst, &src) in rows.iter().enumerate() {
            out.row_words_mut(dst).copy_from_slice(self.row_words(src));
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for (w, &word) in self.row_words(r).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let c = w * WORD_BITS + bits.trailing_zeros() as usize;
                    t.set(c, r, true);
                    bits &= bits - 1;
                }
            }
        }
        t
    }

    /// `self` on top of `other`.
    pub fn vstack(&self, other: &BitMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(invalid(format!(
                "cannot stack matrices with {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        eliminate(&mut work, self.rows, self.cols, self.stride)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix({}x{})", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Forward elimination in place; returns the rank. Pivot columns are taken
/// left to right, pivot rows are the first remaining row with that bit set.
fn eliminate(data: &mut [u64], rows: usize, cols: usize, stride: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let w = col / WORD_BITS;
        let mask = 1u64 << (col % WORD_BITS);
        let Some(pivot) = (rank..rows).find(|&r| data[r * stride + w] & mask != 0) else {
            continue;
        };
        if pivot != rank {
            for k in 0..stride {
                data.swap(pivot * stride + k, rank * stride + k);
            }
        }
        let (head, tail) = data.split_at_mut((rank + 1) * stride);
        let pivot_row = &head[rank * stride + w..(rank + 1) * stride];
        for row in tail.chunks_exact_mut(stride) {
            if row[w] & mask != 0 {
                for (a, b) in row[w..].iter_mut().zip(pivot_row) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a matrix over GF(2).
pub fn rank(m: &BitMatrix) -> usize {
    m.rank()
}

/// Incremental echelon basis keyed by each vector's lowest set bit.
struct EchelonBasis {
    stride: usize,
    by_pivot: Vec<Option<usize>>,
    rows: Vec<u64>,
    scratch: Vec<u64>,
}

impl EchelonBasis {
    fn new(cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            stride,
            by_pivot: vec![None; cols],
            rows: Vec::new(),
            scratch: vec![0; stride],
        }
    }

    /// Reduces `row` against the basis; keeps it and returns true when it is
    /// independent.
    fn insert(&mut self, row: &[u64]) -> bool {
        self.scratch.copy_from_slice(row);
        let mut w = 0;
        while w < self.stride {
            let word = self.scratch[w];
            if word == 0 {
                w += 1;
                continue;
            }
            let pivot = w * WORD_BITS + word.trailing_zeros() as usize;
            match self.by_pivot[pivot] {
                Some(slot) => {
                    let base = &self.rows[slot * self.stride..(slot + 1) * self.stride];
                    for (a, b) in self.scratch[w..].iter_mut().zip(&base[w..]) {
                        *a ^= b;
                    }
                }
                None => {
                    self.by_pivot[pivot] = Some(self.rows.len() / self.stride);
                    self.rows.extend_from_slice(&self.scratch);
                    return true;
                }
            }
        }
        false
    }
}

/// Dimension of the intersection of the row spaces of `basis_u` and `basis_v`,
/// `rank(U) + rank(V) - rank([U; V])`.
///
/// The rows of `U` and then `V` are fed through one incremental basis, which
/// yields `rank(U)` and `rank([U; V])` in a single pass.
pub fn intersection_dim(basis_u: &BitMatrix, basis_v: &BitMatrix) -> Result<usize> {
    if basis_u.cols() != basis_v.cols() {
        return Err(invalid(format!(
            "ambient dimensions differ: {} vs {}",
            basis_u.cols(),
            basis_v.cols()
        )));
    }
    let mut basis = EchelonBasis::new(basis_u.cols());
    let rank_u = (0..basis_u.rows())
        .filter(|&r| basis.insert(basis_u.row_words(r)))
        .count();
    let added_by_v = (0..basis_v.rows())
        .filter(|&r| basis.insert(basis_v.row_words(r)))
        .count();
    let rank_stacked = rank_u + added_by_v;
    Ok(rank_u + basis_v.rank() - rank_stacked)
}

/// Masks selecting the lower bit of every `(j, j + h)` pair inside a word.
const PAIR_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// In-place `x = v G^{⊗m}` on packed words holding `n = 2^m` bits.
///
/// Each stage XORs position `j + h` into position `j` for every pair with
/// `j & h == 0`. Output order is the natural Kronecker order (no bit reversal).
pub fn polar_transform_words(words: &mut [u64], n: usize) {
    debug_assert!(n.is_power_of_two());
    debug_assert_eq!(words.len(), words_for(n));
    let mut h = 1;
    let mut level = 0;
    while h < n && h < WORD_BITS {
        let mask = PAIR_MASKS[level];
        for w in words.iter_mut() {
            *w ^= (*w >> h) & mask;
        }
        h <<= 1;
        level += 1;
    }
    while h < n {
        let hw = h / WORD_BITS;
        for block in words.chunks_exact_mut(2 * hw) {
            let (lo, hi) = block.split_at_mut(hw);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= b;
            }
        }
        h <<= 1;
    }
}

/// Polar transform `v G^{⊗m}` with `G = [[1,0],[1,1]]`.
pub fn polar_transform(v: &BitVector) -> Result<BitVector> {
    let n = v.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("length {n} is not a power of two")));
    }
    let mut words = v.words().to_vec();
    polar_transform_words(&mut words, n);
    Ok(BitVector::from_words(n, words))
}

/// The full `n x n` matrix `G^{⊗m}`; row `i` has ones exactly at the columns
/// whose index bits are a subset of `i`'s.
pub fn kronecker_power(m: u32) -> BitMatrix {
    let n = 1usize << m;
    let mut g = BitMatrix::zeros(n, n);
    for i in 0..n {
        let mut row = BitVector::unit(n, i);
        let mut words = row.words().to_vec();
        polar_transform_words(&mut words, n);
        row = BitVector::from_words(n, words);
        g.row_words_mut(i).copy_from_slice(row.words());
    }
    g
}
