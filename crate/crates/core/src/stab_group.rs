//! Stabilizer groups kept as independent generator lists together with a
//! canonical reduced echelon basis.
//!
//! Echelon columns are ordered `x0, z0, x1, z1, ...`, so pivots go to the
//! lowest qubit first and the X bit before the Z bit. Row operations are exact
//! Pauli products, which keeps every basis element a genuine group element
//! with its true sign.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator};
use crate::rng::rng_for;

/// Result of a membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    NotMember,
    MemberPlus,
    MemberMinus,
}

/// Incrementally built reduced row echelon form over Pauli rows.
///
/// Invariant: every pivot column is set in exactly one row, and rows are
/// sorted by pivot.
#[derive(Clone, Debug)]
pub(crate) struct PauliEchelon {
    n: usize,
    rows: Vec<PauliOperator>,
    pivots: Vec<usize>,
}

pub(crate) enum Insert {
    Independent,
    /// The operator times the reconstructing product; `±I` (or `±iI`).
    Dependent(PauliOperator),
}

impl PauliEchelon {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[PauliOperator] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<PauliOperator> {
        self.rows
    }

    /// `p` multiplied by every row whose pivot it hits.
    pub fn reduce(&self, p: &PauliOperator) -> PauliOperator {
        let mut r = p.clone();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if r.column(col) {
                r.mul_assign(row);
            }
        }
        r
    }

    pub fn in_span(&self, p: &PauliOperator) -> bool {
        self.reduce(p).is_identity()
    }

    pub fn insert(&mut self, p: &PauliOperator) -> Insert {
        debug_assert_eq!(p.n(), self.n);
        let r = self.reduce(p);
        let Some(col) = r.leading_column() else {
            return Insert::Dependent(r);
        };
        for row in &mut self.rows {
            if row.column(col) {
                row.mul_assign(&r);
            }
        }
        let at = self.pivots.partition_point(|&c| c < col);
        self.pivots.insert(at, col);
        self.rows.insert(at, r);
        Insert::Independent
    }
}

/// Canonical echelon basis of the span of `gens` and its rank.
///
/// Dependent inputs are dropped. Basis phases are exact products of the
/// inputs.
pub fn echelon_form(gens: &[PauliOperator]) -> Result<(Vec<PauliOperator>, usize)> {
    let Some(first) = gens.first() else {
        return Ok((Vec::new(), 0));
    };
    let mut ech = PauliEchelon::new(first.n());
    for g in gens {
        if g.n() != first.n() {
            return Err(Error::DimensionMismatch {
                expected: first.n(),
                found: g.n(),
            });
        }
        ech.insert(g);
    }
    let rank = ech.rank();
    Ok((ech.into_rows(), rank))
}

/// Abelian subgroup of the Pauli group with real signs, not containing `-I`.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliOperator>,
    echelon: PauliEchelon,
    phase_agnostic: bool,
}

impl PartialEq for StabilizerGroup {
    /// Groups are equal when they have the same elements (same canonical
    /// basis, signs included) and the same phase mode.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.phase_agnostic == other.phase_agnostic
            && self.echelon.rows == other.echelon.rows
    }
}

impl Eq for StabilizerGroup {}

impl StabilizerGroup {
    /// Builds a group from independent, pairwise commuting, Hermitian
    /// generators. The generator order is preserved.
    pub fn new(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        Self::check_operators(n, &generators)?;
        let mut echelon = PauliEchelon::new(n);
        for (i, g) in generators.iter().enumerate() {
            if let Insert::Dependent(r) = echelon.insert(g) {
                return Err(if r.phase_exp() == 2 {
                    Error::Contradiction
                } else {
                    Error::Dependent(i)
                });
            }
        }
        Ok(Self {
            n,
            generators,
            echelon,
            phase_agnostic: false,
        })
    }

    /// The group generated by a possibly dependent list. Generators become the
    /// canonical basis.
    pub fn generated_by(n: usize, ops: &[PauliOperator]) -> Result<Self> {
        Self::check_operators(n, ops)?;
        let mut echelon = PauliEchelon::new(n);
        for g in ops {
            if let Insert::Dependent(r) = echelon.insert(g) {
                if r.phase_exp() == 2 {
                    return Err(Error::Contradiction);
                }
            }
        }
        Ok(Self {
            n,
            generators: echelon.rows.clone(),
            echelon,
            phase_agnostic: false,
        })
    }

    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            generators: Vec::new(),
            echelon: PauliEchelon::new(n),
            phase_agnostic: false,
        }
    }

    fn check_operators(n: usize, ops: &[PauliOperator]) -> Result<()> {
        for g in ops {
            if g.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.n(),
                });
            }
            if !g.is_hermitian() {
                return Err(Error::NonHermitian);
            }
        }
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                if ops[i].anticommutes(&ops[j]) {
                    return Err(Error::NotCommuting(i, j));
                }
            }
        }
        Ok(())
    }

    /// Same group with every sign dropped to `+`.
    pub fn phase_agnostic(&self) -> Self {
        let generators = self
            .generators
            .iter()
            .map(PauliOperator::positive)
            .collect();
        let mut echelon = self.echelon.clone();
        for r in &mut echelon.rows {
            *r = r.positive();
        }
        Self {
            n: self.n,
            generators,
            echelon,
            phase_agnostic: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn is_maximal(&self) -> bool {
        self.rank() == self.n
    }

    pub fn is_phase_agnostic(&self) -> bool {
        self.phase_agnostic
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn canonical_basis(&self) -> &[PauliOperator] {
        self.echelon.rows()
    }

    pub(crate) fn echelon(&self) -> &PauliEchelon {
        &self.echelon
    }

    /// Same elements up to sign.
    pub fn same_up_to_phases(&self, other: &Self) -> bool {
        self.n == other.n
            && self.rank() == other.rank()
            && self
                .canonical_basis()
                .iter()
                .zip(other.canonical_basis())
                .all(|(a, b)| a.same_string(b))
    }

    pub fn contains(&self, p: &PauliOperator) -> Result<Membership> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.n(),
            });
        }
        if !p.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        let r = self.echelon.reduce(p);
        if !r.is_identity() {
            return Ok(Membership::NotMember);
        }
        if self.phase_agnostic || r.phase_exp() == 0 {
            Ok(Membership::MemberPlus)
        } else {
            Ok(Membership::MemberMinus)
        }
    }

    /// Every element of the group, in Gray-code order starting at `I`.
    /// Intended for small ranks only.
    pub fn elements(&self) -> Vec<PauliOperator> {
        let k = self.rank();
        assert!(k < 31, "group too large to enumerate");
        let mut out = Vec::with_capacity(1 << k);
        let mut cur = PauliOperator::identity(self.n);
        out.push(cur.clone());
        for i in 1u32..(1u32 << k) {
            let bit = i.trailing_zeros() as usize;
            cur.mul_assign(&self.generators[bit]);
            out.push(cur.clone());
        }
        out
    }
}

/// The group generated by both inputs.
pub fn group_product(g1: &StabilizerGroup, g2: &StabilizerGroup) -> Result<StabilizerGroup> {
    if g1.n() != g2.n() {
        return Err(Error::DimensionMismatch {
            expected: g1.n(),
            found: g2.n(),
        });
    }
    let ops: Vec<PauliOperator> = g1
        .generators()
        .iter()
        .chain(g2.generators())
        .cloned()
        .collect();
    let g = StabilizerGroup::generated_by(g1.n(), &ops)?;
    Ok(if g1.is_phase_agnostic() || g2.is_phase_agnostic() {
        g.phase_agnostic()
    } else {
        g
    })
}

/// Column-major stabilizer tableau: one bit-vector over generators per qubit,
/// so each gate is a handful of word operations.
struct ColumnTableau {
    x: Vec<Vec<u64>>,
    z: Vec<Vec<u64>>,
    sign: Vec<u64>,
}

impl ColumnTableau {
    fn computational(n: usize) -> Self {
        let w = crate::gf2::words_for(n);
        let x = vec![vec![0u64; w]; n];
        let mut z = vec![vec![0u64; w]; n];
        for (q, col) in z.iter_mut().enumerate() {
            crate::gf2::set_bit(col, q, true);
        }
        Self {
            x,
            z,
            sign: vec![0; w],
        }
    }

    fn h(&mut self, q: usize) {
        for k in 0..self.sign.len() {
            self.sign[k] ^= self.x[q][k] & self.z[q][k];
        }
        std::mem::swap(&mut self.x[q], &mut self.z[q]);
    }

    fn s(&mut self, q: usize) {
        for k in 0..self.sign.len() {
            self.sign[k] ^= self.x[q][k] & self.z[q][k];
            self.z[q][k] ^= self.x[q][k];
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        for k in 0..self.sign.len() {
            let (xc, zc, xt, zt) = (self.x[c][k], self.z[c][k], self.x[t][k], self.z[t][k]);
            self.sign[k] ^= xc & zt & !(xt ^ zc);
            self.x[t][k] = xt ^ xc;
            self.z[c][k] = zc ^ zt;
        }
    }

    fn pauli_x(&mut self, q: usize) {
        for k in 0..self.sign.len() {
            self.sign[k] ^= self.z[q][k];
        }
    }

    fn pauli_z(&mut self, q: usize) {
        for k in 0..self.sign.len() {
            self.sign[k] ^= self.x[q][k];
        }
    }

    fn generators(&self) -> Vec<PauliOperator> {
        let n = self.x.len();
        (0..n)
            .map(|row| {
                let mut factors = Vec::with_capacity(n);
                for q in 0..n {
                    factors.push(Pauli1::from_bits(
                        crate::gf2::get_bit(&self.x[q], row),
                        crate::gf2::get_bit(&self.z[q], row),
                    ));
                }
                PauliOperator::from_factors(&factors, crate::gf2::get_bit(&self.sign, row))
            })
            .collect()
    }
}

/// Number of random conjugations applied by [`random_stabilizer`].
pub fn clifford_depth(n: usize) -> usize {
    2 * n * n
}

/// Random maximal group: `⟨Z_1, …, Z_n⟩` conjugated by `2n²` random
/// Hadamard, phase, CNOT and Pauli gates. Deterministic in `seed`.
pub fn random_stabilizer(n: usize, seed: u64) -> Result<StabilizerGroup> {
    if n == 0 {
        return Err(Error::ZeroQubits);
    }
    let mut rng = rng_for(seed, 0);
    let mut t = ColumnTableau::computational(n);
    for _ in 0..clifford_depth(n) {
        if n >= 2 && rng.random_bool(0.5) {
            let c = rng.random_range(0..n);
            let mut d = rng.random_range(0..n - 1);
            if d >= c {
                d += 1;
            }
            t.cnot(c, d);
        } else {
            let q = rng.random_range(0..n);
            match rng.random_range(0..4u8) {
                0 => t.h(q),
                1 => t.s(q),
                2 => t.pauli_x(q),
                _ => t.pauli_z(q),
            }
        }
    }
    StabilizerGroup::new(n, t.generators())
}
