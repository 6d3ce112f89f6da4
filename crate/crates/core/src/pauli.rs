//! n-qubit Pauli operators in the binary symplectic representation.
//!
//! An operator is stored as `i^phase · Π_k X_k^{x_k} Z_k^{z_k}` with the X and
//! Z components packed into `u64` words. `Y = i·X·Z`, so a `Y` factor is the bit
//! pair `x = z = 1` together with one extra unit of `phase`.

use crate::error::{Error, Result};
use crate::gf2::{self, words_for};

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// The operator `kind` on `qubit`, identity elsewhere, sign `+`.
    pub fn single(n: usize, qubit: usize, kind: Pauli1) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
        let mut p = Self::identity(n);
        p.set(qubit, kind);
        p
    }

    /// Builds `sign · ⊗_k factors[k]` where `negative` selects sign `-1`.
    pub fn from_factors(factors: &[Pauli1], negative: bool) -> Self {
        let mut p = Self::identity(factors.len());
        for (q, &f) in factors.iter().enumerate() {
            p.set(q, f);
        }
        if negative {
            p.phase = (p.phase + 2) % 4;
        }
        p
    }

    /// Raw constructor: `i^phase · X^x Z^z`. Bits beyond `n` are cleared.
    pub fn from_parts(n: usize, mut x: Vec<u64>, mut z: Vec<u64>, phase: u8) -> Self {
        let w = words_for(n);
        x.resize(w, 0);
        z.resize(w, 0);
        if !n.is_multiple_of(64) && w > 0 {
            let m = (1u64 << (n % 64)) - 1;
            x[w - 1] &= m;
            z[w - 1] &= m;
        }
        Self {
            n,
            x,
            z,
            phase: phase % 4,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> &[u64] {
        &self.x
    }

    pub fn z_bits(&self) -> &[u64] {
        &self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Exponent `s` such that the operator is `i^s` times the plain tensor
    /// product of I/X/Y/Z factors.
    pub fn sign_exp(&self) -> u8 {
        ((self.phase as u32 + 4 - self.y_count() % 4) % 4) as u8
    }

    /// Hermitian with sign `±1`.
    pub fn is_hermitian(&self) -> bool {
        self.sign_exp().is_multiple_of(2)
    }

    pub fn is_negative(&self) -> bool {
        self.sign_exp() == 2
    }

    pub fn is_identity(&self) -> bool {
        gf2::is_zero(&self.x) && gf2::is_zero(&self.z)
    }

    pub fn get(&self, qubit: usize) -> Pauli1 {
        Pauli1::from_bits(gf2::get_bit(&self.x, qubit), gf2::get_bit(&self.z, qubit))
    }

    /// Overwrites the factor on `qubit`, keeping the overall sign.
    pub fn set(&mut self, qubit: usize, kind: Pauli1) {
        let sign = self.sign_exp();
        let (xb, zb) = kind.bits();
        gf2::set_bit(&mut self.x, qubit, xb);
        gf2::set_bit(&mut self.z, qubit, zb);
        self.phase = ((sign as u32 + self.y_count()) % 4) as u8;
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli1::I).collect()
    }

    /// Same Pauli string with sign `+1`.
    pub fn positive(&self) -> Self {
        let mut p = self.clone();
        p.phase = (self.y_count() % 4) as u8;
        p
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase = (p.phase + 2) % 4;
        p
    }

    /// Multiplies the operator by `i^k`.
    pub fn times_i_pow(&self, k: u8) -> Self {
        let mut p = self.clone();
        p.phase = (p.phase + k) % 4;
        p
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// `true` when the operators anticommute. Sizes must agree.
    #[inline]
    pub fn anticommutes(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u32;
        for k in 0..self.x.len() {
            acc ^= ((self.x[k] & other.z[k]) ^ (self.z[k] & other.x[k])).count_ones();
        }
        acc & 1 == 1
    }

    /// Symplectic inner product: 0 when the operators commute, 1 otherwise.
    pub fn symplectic_product(&self, other: &Self) -> Result<u8> {
        self.check_dim(other)?;
        Ok(self.anticommutes(other) as u8)
    }

    /// In-place right multiplication `self ← self · other`, exact in phase.
    #[inline]
    pub fn mul_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        // Z^a X^b = (-1)^{a·b} X^b Z^a
        let mut flips = 0u32;
        for k in 0..self.x.len() {
            flips += (self.z[k] & other.x[k]).count_ones();
            self.x[k] ^= other.x[k];
            self.z[k] ^= other.z[k];
        }
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * (flips & 1)) % 4) as u8;
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out.mul_assign(other);
        Ok(out)
    }

    /// The tensor factors on `qubits`, as an operator on `|qubits|` qubits
    /// (relabelled in ascending order) with sign `+1`.
    pub fn restrict(&self, qubits: &QubitSet) -> Result<Self> {
        Ok(self.restrict_keep_sign(qubits)?.positive())
    }

    /// Like [`restrict`](Self::restrict) but keeps the overall sign. Exact for
    /// operators that act trivially outside `qubits`.
    pub fn restrict_keep_sign(&self, qubits: &QubitSet) -> Result<Self> {
        if qubits.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: qubits.n(),
            });
        }
        let m = qubits.len();
        let mut x = vec![0u64; words_for(m)];
        let mut z = vec![0u64; words_for(m)];
        for (i, &q) in qubits.iter().enumerate() {
            gf2::set_bit(&mut x, i, gf2::get_bit(&self.x, q));
            gf2::set_bit(&mut z, i, gf2::get_bit(&self.z, q));
        }
        let mut p = Self::from_parts(m, x, z, 0);
        p.phase = ((self.sign_exp() as u32 + p.y_count()) % 4) as u8;
        Ok(p)
    }

    /// Places this operator on `qubits` of an `qubits.n()`-qubit register,
    /// keeping the sign. Inverse of [`restrict_keep_sign`](Self::restrict_keep_sign).
    pub fn embed(&self, qubits: &QubitSet) -> Result<Self> {
        if qubits.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: qubits.len(),
                found: self.n,
            });
        }
        let n = qubits.n();
        let mut x = vec![0u64; words_for(n)];
        let mut z = vec![0u64; words_for(n)];
        for (i, &q) in qubits.iter().enumerate() {
            gf2::set_bit(&mut x, q, gf2::get_bit(&self.x, i));
            gf2::set_bit(&mut z, q, gf2::get_bit(&self.z, i));
        }
        Ok(Self::from_parts(n, x, z, self.phase))
    }

    /// Zeroes every factor outside `qubits`, staying on the full register,
    /// with sign `+1`.
    pub fn mask_to(&self, qubits: &QubitSet) -> Self {
        debug_assert_eq!(qubits.n(), self.n);
        let mut p = self.clone();
        for (k, m) in qubits.mask().iter().enumerate() {
            p.x[k] &= m;
            p.z[k] &= m;
        }
        p.positive()
    }

    /// `true` iff both bits vanish on every qubit of `qubits`.
    pub fn acts_trivially_on(&self, qubits: &QubitSet) -> Result<bool> {
        if qubits.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: qubits.n(),
            });
        }
        Ok(self.trivial_on_mask(qubits.mask()))
    }

    #[inline]
    pub(crate) fn trivial_on_mask(&self, mask: &[u64]) -> bool {
        mask.iter()
            .enumerate()
            .all(|(k, m)| (self.x[k] | self.z[k]) & m == 0)
    }

    /// Symplectic row in interleaved column order `x0, z0, x1, z1, ...`; the
    /// lowest set column, if any.
    pub(crate) fn leading_column(&self) -> Option<usize> {
        for k in 0..self.x.len() {
            let any = self.x[k] | self.z[k];
            if any != 0 {
                let q = k * 64 + any.trailing_zeros() as usize;
                return Some(if gf2::get_bit(&self.x, q) {
                    2 * q
                } else {
                    2 * q + 1
                });
            }
        }
        None
    }

    #[inline]
    pub(crate) fn column(&self, col: usize) -> bool {
        let q = col / 2;
        if col.is_multiple_of(2) {
            gf2::get_bit(&self.x, q)
        } else {
            gf2::get_bit(&self.z, q)
        }
    }

    pub(crate) fn same_string(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }
}

/// Ordered set of distinct qubit indices in `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QubitSet {
    n: usize,
    indices: Vec<usize>,
    mask: Vec<u64>,
}

impl QubitSet {
    pub fn new(n: usize, qubits: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![0u64; words_for(n)];
        let mut indices = Vec::new();
        for q in qubits {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if gf2::get_bit(&mask, q) {
                return Err(Error::DuplicateQubit(q));
            }
            gf2::set_bit(&mut mask, q, true);
            indices.push(q);
        }
        indices.sort_unstable();
        Ok(Self { n, indices, mask })
    }

    pub fn all(n: usize) -> Self {
        Self::new(n, 0..n).expect("full range is valid")
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, std::iter::empty()).expect("empty set is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, q: usize) -> bool {
        q < self.n && gf2::get_bit(&self.mask, q)
    }

    pub fn iter(&self) -> impl Iterator<Item = &usize> + '_ {
        self.indices.iter()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn mask(&self) -> &[u64] {
        &self.mask
    }

    pub fn complement(&self) -> Self {
        Self::new(self.n, (0..self.n).filter(|&q| !self.contains(q))).unwrap()
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self::new(
            self.n,
            (0..self.n).filter(|&q| self.contains(q) || other.contains(q)),
        )
        .unwrap()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self::new(
            self.n,
            (0..self.n).filter(|&q| self.contains(q) && other.contains(q)),
        )
        .unwrap()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| a & b == 0)
    }

    /// Position of each member inside the ascending list, i.e. the relabelling
    /// used by [`PauliOperator::restrict`].
    pub fn relabel(&self, q: usize) -> Option<usize> {
        self.indices.binary_search(&q).ok()
    }
}
