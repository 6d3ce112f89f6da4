//! Bit-packed linear algebra over GF(2).
//!
//! Rows are stored as contiguous `u64` words so that row operations are
//! word-parallel XORs. Column `c` lives in word `c / 64`, bit `c % 64`.

#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / 64] >> (i % 64)) & 1 == 1
}

#[inline]
pub fn set_bit(words: &mut [u64], i: usize, value: bool) {
    let mask = 1u64 << (i % 64);
    if value {
        words[i / 64] |= mask;
    } else {
        words[i / 64] &= !mask;
    }
}

#[inline]
pub fn flip_bit(words: &mut [u64], i: usize) {
    words[i / 64] ^= 1u64 << (i % 64);
}

#[inline]
pub fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// Parity of the bitwise AND of two packed vectors (the GF(2) dot product).
#[inline]
pub fn dot(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1
        == 1
}

#[inline]
pub fn is_zero(words: &[u64]) -> bool {
    words.iter().all(|&w| w == 0)
}

/// Index of the lowest set bit, if any.
#[inline]
pub fn lowest_set(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Dense GF(2) matrix with bit-packed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            stride: words_for(cols).max(1),
            data: Vec::new(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols).max(1);
        Self {
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.stride
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Appends a row given as packed words; extra words are ignored and
    /// missing words are zero.
    pub fn push_row(&mut self, words: &[u64]) {
        let start = self.data.len();
        self.data.resize(start + self.stride, 0);
        let n = words.len().min(self.stride);
        self.data[start..start + n].copy_from_slice(&words[..n]);
        if !self.cols.is_multiple_of(64) {
            let last = start + self.stride - 1;
            self.data[last] &= (1u64 << (self.cols % 64)) - 1;
        }
    }

    /// Appends a row built from concatenating several packed segments, each of
    /// the given bit length.
    pub fn push_concat(&mut self, segments: &[(&[u64], usize)]) {
        let mut row = vec![0u64; self.stride];
        let mut offset = 0;
        for (words, len) in segments {
            for i in 0..*len {
                if get_bit(words, i) {
                    set_bit(&mut row, offset + i, true);
                }
            }
            offset += len;
        }
        debug_assert!(offset <= self.cols);
        self.push_row(&row);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        get_bit(self.row(r), c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let stride = self.stride;
        set_bit(&mut self.data[r * stride..(r + 1) * stride], c, value);
    }

    fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        xor_into(a, b);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        for k in 0..s {
            self.data.swap(a * s + k, b * s + k);
        }
    }

    /// Reduces to reduced row echelon form in place and returns the pivot
    /// column of each nonzero row. Zero rows are moved to the bottom.
    pub fn rref(&mut self) -> Vec<usize> {
        let rows = self.rows();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..rows {
                if i != r && self.get(i, c) {
                    self.xor_rows(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank via forward elimination (no back substitution).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let rows = m.rows();
        let mut r = 0;
        for c in 0..m.cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.swap_rows(r, p);
            for i in r + 1..rows {
                if m.get(i, c) {
                    m.xor_rows(i, r);
                }
            }
            r += 1;
        }
        r
    }

    /// Basis of the right kernel `{v : M v = 0}` as packed vectors of
    /// `cols` bits.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; words_for(self.cols).max(1)];
            set_bit(&mut v, free, true);
            for (row, &pc) in pivots.iter().enumerate() {
                if m.get(row, free) {
                    set_bit(&mut v, pc, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `M x = rhs` for one particular solution (free variables zero).
    pub fn solve(&self, rhs: &[bool]) -> Option<Vec<u64>> {
        assert_eq!(rhs.len(), self.rows());
        let mut aug = BitMatrix::new(self.cols + 1);
        for (r, &b) in rhs.iter().enumerate() {
            let mut row = self.row(r).to_vec();
            row.resize(words_for(self.cols + 1).max(1), 0);
            set_bit(&mut row, self.cols, b);
            aug.push_row(&row);
        }
        let pivots = aug.rref();
        let mut x = vec![0u64; words_for(self.cols).max(1)];
        for (row, &pc) in pivots.iter().enumerate() {
            if pc == self.cols {
                return None;
            }
            if aug.get(row, self.cols) {
                set_bit(&mut x, pc, true);
            }
        }
        Some(x)
    }
}
