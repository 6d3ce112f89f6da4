//! Bipartite structure of stabilizer groups: local subgroups, the
//! `S = S_A · S_B · S_AB` split, the entanglement rank `e_AB`, and the
//! symplectic center/pair form of operator lists.

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::pauli::{PauliOperator, QubitSet};
use crate::stab_group::{Insert, PauliEchelon, StabilizerGroup};

/// Split of the `n` qubits into two disjoint blocks covering everything.
/// Either block may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    a: QubitSet,
    b: QubitSet,
}

impl Bipartition {
    pub fn new(n: usize, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        let a = QubitSet::new(n, a)?;
        let b = QubitSet::new(n, b)?;
        Self::from_sets(a, b)
    }

    pub fn from_sets(a: QubitSet, b: QubitSet) -> Result<Self> {
        if a.n() != b.n() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                found: b.n(),
            });
        }
        if !a.is_disjoint(&b) {
            return Err(Error::InvalidPartition("blocks overlap".into()));
        }
        if a.len() + b.len() != a.n() {
            return Err(Error::InvalidPartition(
                "blocks do not cover every qubit".into(),
            ));
        }
        Ok(Self { a, b })
    }

    /// `A` = `a`, `B` = everything else.
    pub fn with_a(n: usize, a: Vec<usize>) -> Result<Self> {
        let a = QubitSet::new(n, a)?;
        let b = a.complement();
        Ok(Self { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn a(&self) -> &QubitSet {
        &self.a
    }

    pub fn b(&self) -> &QubitSet {
        &self.b
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// Supported entirely inside `A` or entirely inside `B`.
    pub fn is_local(&self, p: &PauliOperator) -> bool {
        p.trivial_on_mask(self.a.mask()) || p.trivial_on_mask(self.b.mask())
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n(),
            });
        }
        Ok(())
    }
}

/// `S = S_A · S_B · S_AB` with `e_ab = rank(S_AB)`.
#[derive(Clone, Debug)]
pub struct EntanglementDecomposition {
    pub s_a: StabilizerGroup,
    pub s_b: StabilizerGroup,
    pub s_ab: StabilizerGroup,
    pub e_ab: usize,
}

/// Center generators plus hyperbolic pairs `(g_j, ḡ_j)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CenterPairForm {
    pub center: Vec<PauliOperator>,
    pub pairs: Vec<(PauliOperator, PauliOperator)>,
}

impl CenterPairForm {
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// All operators, pairs first.
    pub fn operators(&self) -> impl Iterator<Item = &PauliOperator> + '_ {
        self.pairs
            .iter()
            .flat_map(|(g, h)| [g, h])
            .chain(self.center.iter())
    }
}

/// Subgroup of `group` acting trivially on `qubits`, with exact phases.
///
/// Eliminates the generators on the columns of `qubits` using full Pauli
/// products; the rows left without a pivot span the kernel.
pub fn trivial_subgroup(group: &StabilizerGroup, qubits: &QubitSet) -> Result<StabilizerGroup> {
    if qubits.n() != group.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            found: qubits.n(),
        });
    }
    let mut rows: Vec<PauliOperator> = group.generators().to_vec();
    let mut done = 0;
    'cols: for &q in qubits.iter() {
        for col in [2 * q, 2 * q + 1] {
            if done == rows.len() {
                break 'cols;
            }
            let Some(p) = (done..rows.len()).find(|&i| rows[i].column(col)) else {
                continue;
            };
            rows.swap(done, p);
            let (head, tail) = rows.split_at_mut(done + 1);
            let pivot = &head[done];
            for r in tail.iter_mut() {
                if r.column(col) {
                    r.mul_assign(pivot);
                }
            }
            done += 1;
        }
    }
    let kernel = rows.split_off(done);
    let g = StabilizerGroup::new(group.n(), kernel)?;
    Ok(if group.is_phase_agnostic() {
        g.phase_agnostic()
    } else {
        g
    })
}

/// `(S_A, S_B)`: the elements of `group` acting trivially on `B`, resp. `A`.
pub fn local_subgroup(
    group: &StabilizerGroup,
    part: &Bipartition,
) -> Result<(StabilizerGroup, StabilizerGroup)> {
    part.check(group.n())?;
    Ok((
        trivial_subgroup(group, part.b())?,
        trivial_subgroup(group, part.a())?,
    ))
}

/// GF(2) rank of the generators restricted to `qubits`.
pub fn restricted_rank(ops: &[PauliOperator], qubits: &QubitSet) -> usize {
    let w = qubits.mask().len();
    let mut m = BitMatrix::new(128 * w.max(1));
    let mut row = vec![0u64; 2 * w.max(1)];
    for g in ops {
        for k in 0..w {
            row[k] = g.x_bits()[k] & qubits.mask()[k];
            row[w + k] = g.z_bits()[k] & qubits.mask()[k];
        }
        m.push_row(&row);
    }
    m.rank()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntanglementRank {
    pub e_ab: usize,
    /// `e_ab / 2`; an entropy in ebits when the group is maximal.
    pub entropy_ebits: f64,
}

/// `e_AB = rank(S) - rank(S_A · S_B)`, computed from restricted ranks:
/// `rank(S_A) = rank(S) - rank(S|_B)` and symmetrically for `B`.
pub fn entanglement_rank(group: &StabilizerGroup, part: &Bipartition) -> Result<EntanglementRank> {
    part.check(group.n())?;
    let k = group.rank();
    let ra = restricted_rank(group.generators(), part.a());
    let rb = restricted_rank(group.generators(), part.b());
    let e_ab = ra + rb - k;
    Ok(EntanglementRank {
        e_ab,
        entropy_ebits: e_ab as f64 / 2.0,
    })
}

pub fn decompose(group: &StabilizerGroup, part: &Bipartition) -> Result<EntanglementDecomposition> {
    let (s_a, s_b) = local_subgroup(group, part)?;
    let mut ech = PauliEchelon::new(group.n());
    for g in s_a.generators().iter().chain(s_b.generators()) {
        ech.insert(g);
    }
    let mut rest = Vec::new();
    for g in group.canonical_basis() {
        if let Insert::Independent = ech.insert(g) {
            rest.push(g.clone());
        }
    }
    let mut s_ab = StabilizerGroup::new(group.n(), rest)?;
    if group.is_phase_agnostic() {
        s_ab = s_ab.phase_agnostic();
    }
    let e_ab = group.rank() - s_a.rank() - s_b.rank();
    debug_assert_eq!(s_ab.rank(), e_ab);
    Ok(EntanglementDecomposition {
        s_a,
        s_b,
        s_ab,
        e_ab,
    })
}

/// Commutation matrix `C[i][j] = ⟨ops_i|_Q, ops_j|_Q⟩` of restrictions to `Q`.
pub fn restricted_gram(ops: &[PauliOperator], qubits: &QubitSet) -> BitMatrix {
    let masked: Vec<PauliOperator> = ops.iter().map(|g| g.mask_to(qubits)).collect();
    let k = ops.len();
    let mut c = BitMatrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            if masked[i].anticommutes(&masked[j]) {
                c.set(i, j, true);
                c.set(j, i, true);
            }
        }
    }
    c
}

/// Number of locally anticommuting pairs of `h` across `part`: half the rank
/// of the commutation matrix of the generators restricted to `A`.
pub fn pair_count(h: &StabilizerGroup, part: &Bipartition) -> Result<usize> {
    part.check(h.n())?;
    let rank = restricted_gram(h.generators(), part.a()).rank();
    debug_assert!(rank.is_multiple_of(2));
    Ok(rank / 2)
}

/// Symplectic Gram-Schmidt: re-bases `span(ops)` into a center (commuting
/// with everything) and anticommuting pairs that commute across pairs.
/// Output operators carry sign `+`.
pub fn center_and_pairs(ops: &[PauliOperator]) -> Result<CenterPairForm> {
    let Some(first) = ops.first() else {
        return Ok(CenterPairForm::default());
    };
    let n = first.n();
    let mut ech = PauliEchelon::new(n);
    for op in ops {
        if op.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: op.n(),
            });
        }
        if let Insert::Dependent(_) = ech.insert(op) {
            return Err(Error::RankDeficient);
        }
    }
    let mut rest: Vec<PauliOperator> = ops.iter().map(PauliOperator::positive).collect();
    let mut form = CenterPairForm::default();
    while !rest.is_empty() {
        let u = rest.remove(0);
        let Some(j) = rest.iter().position(|w| w.anticommutes(&u)) else {
            form.center.push(u);
            continue;
        };
        let v = rest.remove(j);
        for w in &mut rest {
            let with_u = w.anticommutes(&u);
            let with_v = w.anticommutes(&v);
            if with_v {
                w.mul_assign(&u);
            }
            if with_u {
                w.mul_assign(&v);
            }
            *w = w.positive();
        }
        form.pairs.push((u, v));
    }
    Ok(form)
}

/// Basis of the operators supported on `qubits` that commute with every
/// element of `ops`, each embedded on the full register with sign `+`.
pub fn commutant_on(ops: &[PauliOperator], qubits: &QubitSet) -> Vec<PauliOperator> {
    let m = qubits.len();
    let mut sys = BitMatrix::new(2 * m);
    let mut row = vec![0u64; crate::gf2::words_for(2 * m).max(1)];
    for c in ops {
        row.iter_mut().for_each(|w| *w = 0);
        for (i, &q) in qubits.iter().enumerate() {
            // ⟨c, v⟩ = c_x·v_z + c_z·v_x with v = (v_x | v_z).
            crate::gf2::set_bit(&mut row, i, crate::gf2::get_bit(c.z_bits(), q));
            crate::gf2::set_bit(&mut row, m + i, crate::gf2::get_bit(c.x_bits(), q));
        }
        sys.push_row(&row);
    }
    sys.nullspace()
        .into_iter()
        .map(|v| {
            let mut x = vec![0u64; crate::gf2::words_for(qubits.n())];
            let mut z = vec![0u64; crate::gf2::words_for(qubits.n())];
            for (i, &q) in qubits.iter().enumerate() {
                crate::gf2::set_bit(&mut x, q, crate::gf2::get_bit(&v, i));
                crate::gf2::set_bit(&mut z, q, crate::gf2::get_bit(&v, m + i));
            }
            PauliOperator::from_parts(qubits.n(), x, z, 0).positive()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn group(gens: &[&str]) -> StabilizerGroup {
        let ops: Vec<_> = gens.iter().map(|s| p(s)).collect();
        StabilizerGroup::new(ops[0].n(), ops).unwrap()
    }

    fn cut(n: usize, a: &[usize]) -> Bipartition {
        Bipartition::with_a(n, a.to_vec()).unwrap()
    }

    #[test]
    fn local_subgroup_examples() {
        let (sa, sb) = local_subgroup(&group(&["XX", "ZZ"]), &cut(2, &[0])).unwrap();
        assert_eq!((sa.rank(), sb.rank()), (0, 0));

        let (sa, sb) = local_subgroup(&group(&["ZI", "IZ"]), &cut(2, &[0])).unwrap();
        assert_eq!(sa.generators(), &[p("ZI")]);
        assert_eq!(sb.generators(), &[p("IZ")]);

        let ghz = group(&["XXX", "ZZI", "IZZ"]);
        let (sa, sb) = local_subgroup(&ghz, &cut(3, &[0])).unwrap();
        assert_eq!(sa.rank(), 0);
        assert_eq!(sb.canonical_basis(), &[p("IZZ")]);
    }

    #[test]
    fn local_subgroup_keeps_exact_signs() {
        let g = group(&["XXI", "-ZZI", "IIZ"]);
        let (sa, sb) = local_subgroup(&g, &cut(3, &[0, 1])).unwrap();
        assert_eq!(sa.rank(), 2);
        assert_eq!(sb.generators(), &[p("IIZ")]);
        assert_eq!(
            sa.contains(&p("YYI")).unwrap(),
            crate::Membership::MemberPlus
        );
    }

    #[test]
    fn entanglement_examples() {
        let e = entanglement_rank(&group(&["XX", "ZZ"]), &cut(2, &[0])).unwrap();
        assert_eq!(e.e_ab, 2);
        assert_eq!(e.entropy_ebits, 1.0);
        assert_eq!(
            entanglement_rank(&group(&["ZI", "IZ"]), &cut(2, &[0]))
                .unwrap()
                .e_ab,
            0
        );
        assert_eq!(
            entanglement_rank(&group(&["XXX", "ZZI", "IZZ"]), &cut(3, &[0]))
                .unwrap()
                .e_ab,
            2
        );
        // Degenerate cuts.
        assert_eq!(
            entanglement_rank(&group(&["XX", "ZZ"]), &cut(2, &[]))
                .unwrap()
                .e_ab,
            0
        );
        assert_eq!(
            entanglement_rank(&group(&["XX", "ZZ"]), &cut(2, &[0, 1]))
                .unwrap()
                .e_ab,
            0
        );
    }

    #[test]
    fn decompose_examples() {
        let bell = group(&["XX", "ZZ"]);
        let d = decompose(&bell, &cut(2, &[0])).unwrap();
        assert_eq!(d.e_ab, 2);
        assert!(d.s_ab.same_up_to_phases(&bell));

        // Bell pairs on (0,2) and (1,3).
        let two = group(&["XIXI", "ZIZI", "IXIX", "IZIZ"]);
        let d = decompose(&two, &cut(4, &[0, 1])).unwrap();
        assert_eq!(d.s_ab.rank(), 4);

        let d = decompose(&group(&["ZI", "IZ"]), &cut(2, &[0])).unwrap();
        assert_eq!(d.s_ab.rank(), 0);
        assert_eq!(d.e_ab, 0);
    }

    #[test]
    fn pair_count_examples() {
        assert_eq!(pair_count(&group(&["XX", "ZZ"]), &cut(2, &[0])).unwrap(), 1);
        assert_eq!(pair_count(&group(&["ZZ"]), &cut(2, &[0])).unwrap(), 0);
        assert_eq!(pair_count(&group(&["ZI", "IZ"]), &cut(2, &[0])).unwrap(), 0);
        let c = restricted_gram(&[p("XX"), p("ZZ")], cut(2, &[0]).a());
        assert!(c.get(0, 1) && c.get(1, 0) && !c.get(0, 0));
    }

    #[test]
    fn center_pair_examples() {
        let f = center_and_pairs(&[p("X"), p("Z")]).unwrap();
        assert!(f.center.is_empty());
        assert_eq!(f.pairs, vec![(p("X"), p("Z"))]);

        let f = center_and_pairs(&[p("ZI"), p("IZ")]).unwrap();
        assert_eq!(f.center, vec![p("ZI"), p("IZ")]);
        assert!(f.pairs.is_empty());

        let f = center_and_pairs(&[p("XI"), p("ZI"), p("IZ")]).unwrap();
        assert_eq!(f.center, vec![p("IZ")]);
        assert_eq!(f.pairs, vec![(p("XI"), p("ZI"))]);

        assert_eq!(
            center_and_pairs(&[p("XI"), p("XI")]).unwrap_err(),
            Error::RankDeficient
        );
    }
}
