//! Strong super-additivity of the entanglement of formation for stabilizer
//! states, checked constructively.
//!
//! For a pure stabilizer state and a four-way split `A = A1 ∪ A2`,
//! `B = B1 ∪ B2`, we pick a complete commuting set of `{A,B}`-local
//! measurements on partition 2 (then on partition 1), read off the common
//! group of the branch states left on the other partition, and compare
//! `e_AB(S^M_1) + e_AB(S^M_2)` with `e_AB(S)`. Every intermediate counting
//! bound of the argument is evaluated and reported alongside.
//!
//! Also here: the entanglement of formation of code projectors
//! `ρ ∝ Σ_{g∈H} g`, which equals the number of locally anticommuting pairs of
//! `H`, together with a maximal completion of `H` that witnesses it.

use serde::Serialize;

use crate::bipartite::{
    center_and_pairs, commutant_on, decompose, entanglement_rank, pair_count, restricted_gram,
    trivial_subgroup, Bipartition,
};
use crate::error::{Error, Result};
use crate::measurement::{build_trace_out_plan, measure, trace_out, MeasureMode};
use crate::pauli::{Pauli1, PauliOperator, QubitSet};
use crate::stab_group::{Insert, PauliEchelon, StabilizerGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Which partition gets traced out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TracedPart {
    Part1,
    Part2,
}

impl TracedPart {
    pub fn other(self) -> Self {
        match self {
            TracedPart::Part1 => TracedPart::Part2,
            TracedPart::Part2 => TracedPart::Part1,
        }
    }
}

/// `A = A1 ∪ A2`, `B = B1 ∪ B2`; partition 1 is `A1 ∪ B1`, partition 2 is
/// `A2 ∪ B2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourWayPartition {
    a1: QubitSet,
    a2: QubitSet,
    b1: QubitSet,
    b2: QubitSet,
    a: QubitSet,
    b: QubitSet,
    part1: QubitSet,
    part2: QubitSet,
}

impl FourWayPartition {
    pub fn new(
        n: usize,
        a1: Vec<usize>,
        a2: Vec<usize>,
        b1: Vec<usize>,
        b2: Vec<usize>,
    ) -> Result<Self> {
        let blocks = [a1, a2, b1, b2]
            .into_iter()
            .map(|b| QubitSet::new(n, b))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..4 {
            for j in i + 1..4 {
                if !blocks[i].is_disjoint(&blocks[j]) {
                    return Err(Error::InvalidPartition("blocks overlap".into()));
                }
            }
        }
        if blocks.iter().map(QubitSet::len).sum::<usize>() != n {
            return Err(Error::InvalidPartition(
                "blocks do not cover every qubit".into(),
            ));
        }
        let [a1, a2, b1, b2]: [QubitSet; 4] = blocks.try_into().unwrap();
        Ok(Self {
            a: a1.union(&a2),
            b: b1.union(&b2),
            part1: a1.union(&b1),
            part2: a2.union(&b2),
            a1,
            a2,
            b1,
            b2,
        })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn a1(&self) -> &QubitSet {
        &self.a1
    }

    pub fn a2(&self) -> &QubitSet {
        &self.a2
    }

    pub fn b1(&self) -> &QubitSet {
        &self.b1
    }

    pub fn b2(&self) -> &QubitSet {
        &self.b2
    }

    pub fn a(&self) -> &QubitSet {
        &self.a
    }

    pub fn b(&self) -> &QubitSet {
        &self.b
    }

    pub fn part1(&self) -> &QubitSet {
        &self.part1
    }

    pub fn part2(&self) -> &QubitSet {
        &self.part2
    }

    pub fn side(&self, side: Side) -> &QubitSet {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn traced(&self, t: TracedPart) -> &QubitSet {
        match t {
            TracedPart::Part1 => &self.part1,
            TracedPart::Part2 => &self.part2,
        }
    }

    pub fn kept(&self, t: TracedPart) -> &QubitSet {
        self.traced(t.other())
    }

    /// The block of `side` inside the traced partition (`A2` for `A`,
    /// partition 2).
    pub fn block(&self, side: Side, part: TracedPart) -> &QubitSet {
        match (side, part) {
            (Side::A, TracedPart::Part1) => &self.a1,
            (Side::A, TracedPart::Part2) => &self.a2,
            (Side::B, TracedPart::Part1) => &self.b1,
            (Side::B, TracedPart::Part2) => &self.b2,
        }
    }

    pub fn bipartition(&self) -> Bipartition {
        Bipartition::from_sets(self.a.clone(), self.b.clone()).expect("blocks partition the qubits")
    }

    /// The `{A,B}` cut restricted to the qubits kept after tracing `t`,
    /// relabelled in ascending order.
    pub fn kept_bipartition(&self, t: TracedPart) -> Bipartition {
        let kept = self.kept(t);
        let a: Vec<usize> = kept
            .iter()
            .enumerate()
            .filter(|(_, q)| self.a.contains(**q))
            .map(|(i, _)| i)
            .collect();
        Bipartition::with_a(kept.len(), a).expect("relabelled block is valid")
    }
}

/// `S_X = S_X^1 · S_X^2 · S_X^{12}` for a local group `S_X`.
#[derive(Clone, Debug)]
pub struct LocalRefinement {
    /// Elements acting trivially on partition 2.
    pub s1: StabilizerGroup,
    /// Elements acting trivially on partition 1.
    pub s2: StabilizerGroup,
    /// Deterministic completion: the straddling remainder.
    pub s12: StabilizerGroup,
}

/// Generators of `group` completing the span of `parts` to all of `group`.
fn complement_in(group: &StabilizerGroup, parts: &[&StabilizerGroup]) -> Result<StabilizerGroup> {
    let mut ech = PauliEchelon::new(group.n());
    for g in parts.iter().flat_map(|p| p.generators()) {
        ech.insert(g);
    }
    let mut rest = Vec::new();
    for g in group.canonical_basis() {
        if let Insert::Independent = ech.insert(g) {
            rest.push(g.clone());
        }
    }
    let out = StabilizerGroup::new(group.n(), rest)?;
    Ok(if group.is_phase_agnostic() {
        out.phase_agnostic()
    } else {
        out
    })
}

pub fn refine_local(
    s_local: &StabilizerGroup,
    fw: &FourWayPartition,
    side: Side,
) -> Result<LocalRefinement> {
    if s_local.n() != fw.n() {
        return Err(Error::DimensionMismatch {
            expected: fw.n(),
            found: s_local.n(),
        });
    }
    let outside = fw.side(side.other());
    if let Some(g) = s_local
        .generators()
        .iter()
        .find(|g| !g.trivial_on_mask(outside.mask()))
    {
        return Err(Error::InvalidPartition(format!(
            "generator {g} is not supported inside side {side:?}"
        )));
    }
    let s1 = trivial_subgroup(s_local, &fw.part2)?;
    let s2 = trivial_subgroup(s_local, &fw.part1)?;
    let s12 = complement_in(s_local, &[&s1, &s2])?;
    Ok(LocalRefinement { s1, s2, s12 })
}

/// `P_2(g_1 ⊗ g_2) = I_1 ⊗ g_2`, up to phase, on the full register.
pub fn project_p2(g: &PauliOperator, fw: &FourWayPartition) -> PauliOperator {
    g.mask_to(&fw.part2)
}

/// `P_1(g_1 ⊗ g_2) = g_1 ⊗ I_2`, up to phase.
pub fn project_p1(g: &PauliOperator, fw: &FourWayPartition) -> PauliOperator {
    g.mask_to(&fw.part1)
}

/// Counting data of one side for one traced partition, from the static
/// refinement of the original group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StaticSideCount {
    /// Number of qubits in the traced block of this side.
    pub block_size: usize,
    /// Rank of the part of the local group supported in that block.
    pub block_rank: usize,
    pub pairs: usize,
    /// `block_size - block_rank - pairs`.
    pub reducing: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OpRole {
    /// Partner `ḡ_j` of an anticommuting pair; leaves `e_AB` unchanged.
    Pair,
    /// Already in the group.
    Local,
    /// Center element of the projected straddling group; reduces `e_AB`.
    Center,
    /// Completion operator; reduces `e_AB`.
    Completion,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectedOp {
    #[serde(serialize_with = "ser_display")]
    pub op: PauliOperator,
    pub role: OpRole,
    pub e_before: usize,
    pub e_after: usize,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_display_vec<S: serde::Serializer>(v: &[PauliOperator], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|p| p.to_string()))
}

/// Operators chosen on one side's traced block, in emission order:
/// pair partners, existing local generators, center, completion.
#[derive(Clone, Debug, Serialize)]
pub struct SideSelection {
    pub side: Side,
    pub e_before: usize,
    pub e_after: usize,
    pub pair_ops: Vec<SelectedOp>,
    #[serde(serialize_with = "ser_display_vec")]
    pub local_ops: Vec<PauliOperator>,
    pub center_ops: Vec<SelectedOp>,
    pub completion_ops: Vec<SelectedOp>,
}

impl SideSelection {
    pub fn ops(&self) -> Vec<PauliOperator> {
        self.pair_ops
            .iter()
            .map(|s| s.op.clone())
            .chain(self.local_ops.iter().cloned())
            .chain(self.center_ops.iter().map(|s| s.op.clone()))
            .chain(self.completion_ops.iter().map(|s| s.op.clone()))
            .collect()
    }

    /// Number of measured operators that reduced `e_AB`.
    pub fn reducing_measured(&self) -> usize {
        self.center_ops.len() + self.completion_ops.len()
    }

    /// `(e_before - e_after) / 2`.
    pub fn achieved(&self) -> usize {
        (self.e_before - self.e_after) / 2
    }
}

/// Measurement operators for one traced partition.
#[derive(Clone, Debug, Serialize)]
pub struct Selection {
    pub traced: TracedPart,
    pub first_side: Side,
    /// Static counts for side A and side B (`N_{A2}`, `N_{B2}` when tracing
    /// partition 2).
    pub static_counts: [StaticSideCount; 2],
    pub sides: Vec<SideSelection>,
    #[serde(skip)]
    pub ops: Vec<PauliOperator>,
    pub e_initial: usize,
    pub e_final: usize,
}

impl Selection {
    /// Total reduction `(e_initial - e_final) / 2`.
    pub fn achieved(&self) -> usize {
        (self.e_initial - self.e_final) / 2
    }
}

fn e_of(g: &StabilizerGroup, bip: &Bipartition) -> Result<usize> {
    Ok(entanglement_rank(g, bip)?.e_ab)
}

fn violated(msg: impl Into<String>) -> Error {
    Error::InvariantViolated(msg.into())
}

/// Static count `n_block - |S_X^block| - p` for one side.
pub fn static_side_count(
    group: &StabilizerGroup,
    fw: &FourWayPartition,
    side: Side,
    traced: TracedPart,
) -> Result<StaticSideCount> {
    let bip = fw.bipartition();
    let s_side = trivial_subgroup(group, fw.side(side.other()))?;
    let _ = bip;
    let block = fw.block(side, traced);
    let block_sub = trivial_subgroup(&s_side, fw.kept(traced))?;
    let rest_sub = trivial_subgroup(&s_side, fw.traced(traced))?;
    let s12 = complement_in(&s_side, &[&rest_sub, &block_sub])?;
    let pairs = restricted_gram(s12.generators(), block).rank() / 2;
    Ok(StaticSideCount {
        block_size: block.len(),
        block_rank: block_sub.rank(),
        pairs,
        reducing: block.len() as i64 - block_sub.rank() as i64 - pairs as i64,
    })
}

/// First operator supported in `block`, commuting with `local` and outside
/// its span: single-qubit `Z` then `X` in ascending order, then any element
/// of the commutant.
fn completion_candidate(local: &StabilizerGroup, block: &QubitSet) -> Option<PauliOperator> {
    let gens = local.generators();
    let singles = block.iter().flat_map(|&q| {
        [Pauli1::Z, Pauli1::X]
            .into_iter()
            .map(move |k| PauliOperator::single(block.n(), q, k))
    });
    singles
        .chain(commutant_on(gens, block))
        .find(|c| !gens.iter().any(|g| g.anticommutes(c)) && !local.echelon().in_span(c))
}

/// Runs the selection on one side, measuring each chosen operator on `group`
/// (all outcomes `+1`) and checking the expected change of `e_AB` at every
/// step.
fn select_side(
    mut group: StabilizerGroup,
    fw: &FourWayPartition,
    side: Side,
    traced: TracedPart,
) -> Result<(StabilizerGroup, SideSelection)> {
    let bip = fw.bipartition();
    let outside = fw.side(side.other());
    let block = fw.block(side, traced);
    let traced_set = fw.traced(traced);
    let kept_set = fw.kept(traced);

    let e_before = e_of(&group, &bip)?;
    let s_side = trivial_subgroup(&group, outside)?;
    let local_ops = trivial_subgroup(&s_side, kept_set)?.generators().to_vec();
    let mut sel = SideSelection {
        side,
        e_before,
        e_after: e_before,
        pair_ops: Vec::new(),
        local_ops,
        center_ops: Vec::new(),
        completion_ops: Vec::new(),
    };

    loop {
        let s_side = trivial_subgroup(&group, outside)?;
        let on_kept = trivial_subgroup(&s_side, traced_set)?;
        let on_block = trivial_subgroup(&s_side, kept_set)?;
        if on_block.rank() == block.len() {
            break;
        }
        let s12 = complement_in(&s_side, &[&on_kept, &on_block])?;
        let projections: Vec<PauliOperator> =
            s12.generators().iter().map(|g| g.mask_to(block)).collect();
        let form = center_and_pairs(&projections)
            .map_err(|_| violated("projections of the straddling subgroup are dependent"))?;

        let (op, role) = if let Some((_, partner)) = form.pairs.first() {
            (partner.clone(), OpRole::Pair)
        } else if let Some(z) = form.center.first() {
            (z.clone(), OpRole::Center)
        } else {
            let c = completion_candidate(&on_block, block)
                .ok_or_else(|| violated("no completion operator on a non-complete block"))?;
            (c, OpRole::Completion)
        };

        let e_pre = e_of(&group, &bip)?;
        group = measure(&group, &op, MeasureMode::BranchAgnostic)?.post_group;
        let e_post = e_of(&group, &bip)?;
        match role {
            OpRole::Pair => {
                if e_post > e_pre {
                    return Err(violated(format!("local measurement of {op} raised e_AB")));
                }
                let s_side = trivial_subgroup(&group, outside)?;
                let kept_after = trivial_subgroup(&s_side, traced_set)?.rank();
                let block_after = trivial_subgroup(&s_side, kept_set)?.rank();
                if kept_after != on_kept.rank() + 1 || block_after != on_block.rank() + 1 {
                    return Err(violated(format!(
                        "measuring pair partner {op} did not move one generator into each block"
                    )));
                }
            }
            _ => {
                if e_post + 2 > e_pre {
                    return Err(violated(format!(
                        "measuring {op} reduced e_AB from {e_pre} only to {e_post}"
                    )));
                }
            }
        }
        let entry = SelectedOp {
            op,
            role,
            e_before: e_pre,
            e_after: e_post,
        };
        match role {
            OpRole::Pair => sel.pair_ops.push(entry),
            OpRole::Center => sel.center_ops.push(entry),
            OpRole::Completion => sel.completion_ops.push(entry),
            OpRole::Local => unreachable!(),
        }
    }
    sel.e_after = e_of(&group, &bip)?;
    Ok((group, sel))
}

/// Selection with a fixed side order.
pub fn select_measurement_ops_ordered(
    group: &StabilizerGroup,
    fw: &FourWayPartition,
    traced: TracedPart,
    first_side: Side,
) -> Result<Selection> {
    if !group.is_maximal() {
        return Err(Error::NotMaximal {
            rank: group.rank(),
            n: group.n(),
        });
    }
    if group.n() != fw.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            found: fw.n(),
        });
    }
    let static_counts = [
        static_side_count(group, fw, Side::A, traced)?,
        static_side_count(group, fw, Side::B, traced)?,
    ];
    let e_initial = e_of(group, &fw.bipartition())?;
    let (g1, first) = select_side(group.clone(), fw, first_side, traced)?;
    let (_, second) = select_side(g1, fw, first_side.other(), traced)?;
    let ops: Vec<PauliOperator> = first.ops().into_iter().chain(second.ops()).collect();
    let counted = |s: &SideSelection| match s.side {
        Side::A => static_counts[0].reducing,
        Side::B => static_counts[1].reducing,
    };
    if (first.reducing_measured() as i64) < counted(&first) {
        return Err(violated(format!(
            "side {:?} measured {} reducing operators, fewer than the count {}",
            first.side,
            first.reducing_measured(),
            counted(&first)
        )));
    }
    let e_final = second.e_after;
    Ok(Selection {
        traced,
        first_side,
        static_counts,
        sides: vec![first, second],
        ops,
        e_initial,
        e_final,
    })
}

/// Measurement operators on the traced partition. Both side orders are
/// tried and the one leaving less entanglement is kept (ties go to `A`
/// first).
pub fn select_measurement_ops(
    group: &StabilizerGroup,
    fw: &FourWayPartition,
    traced: TracedPart,
) -> Result<Selection> {
    let a_first = select_measurement_ops_ordered(group, fw, traced, Side::A)?;
    let b_first = select_measurement_ops_ordered(group, fw, traced, Side::B)?;
    Ok(if b_first.e_final < a_first.e_final {
        b_first
    } else {
        a_first
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// One evaluated inequality or identity of the argument.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(name: &'static str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        // All quantities are integers or half-integers, so comparisons are exact.
        let holds = match relation {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        };
        Self {
            name,
            lhs,
            relation,
            rhs,
            holds,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RefinementRanks {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub size_a1: usize,
    pub size_a2: usize,
    pub size_b1: usize,
    pub size_b2: usize,
    pub s_a: usize,
    pub s_b: usize,
    pub s_a1: usize,
    pub s_a2: usize,
    pub s_a12: usize,
    pub s_b1: usize,
    pub s_b2: usize,
    pub s_b12: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Explain {
    pub trace_part2: Selection,
    #[serde(serialize_with = "ser_display_vec")]
    pub plan_part2: Vec<PauliOperator>,
    pub trace_part1: Selection,
    #[serde(serialize_with = "ser_display_vec")]
    pub plan_part1: Vec<PauliOperator>,
}

/// Everything computed by [`verify_ssa`].
#[derive(Clone, Debug, Serialize)]
pub struct SsaReport {
    pub e_global: usize,
    pub e1: usize,
    pub e2: usize,
    pub n_a2: i64,
    pub n_b2: i64,
    pub n_a1: i64,
    pub n_b1: i64,
    pub p_a: usize,
    pub p_b: usize,
    pub ranks: RefinementRanks,
    pub bounds: Vec<BoundCheck>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture_components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explain: Option<Explain>,
}

impl SsaReport {
    pub fn all_bounds_hold(&self) -> bool {
        self.bounds.iter().all(|b| b.holds)
    }

    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

fn traced_result(
    group: &StabilizerGroup,
    fw: &FourWayPartition,
    traced: TracedPart,
) -> Result<(Selection, Vec<PauliOperator>, usize)> {
    let sel = select_measurement_ops(group, fw, traced)?;
    let plan = build_trace_out_plan(group, &fw.bipartition(), fw.traced(traced), &sel.ops)?;
    if plan.ops.len() != sel.ops.len() {
        return Err(violated("selected operators were not already complete"));
    }
    let reduced = trace_out(group, &plan)?;
    let e = e_of(&reduced, &fw.kept_bipartition(traced))?;
    if e != sel.e_final {
        return Err(violated(format!(
            "e_AB of the kept-qubit group ({e}) differs from the full register ({})",
            sel.e_final
        )));
    }
    Ok((sel, plan.ops, e))
}

/// Checks `e_AB(S^M_1) + e_AB(S^M_2) <= e_AB(S)` and every bound used on the
/// way. A `false` verdict is a genuine counterexample and must be reported.
pub fn verify_ssa(group: &StabilizerGroup, fw: &FourWayPartition) -> Result<SsaReport> {
    if group.n() != fw.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            found: fw.n(),
        });
    }
    if !group.is_maximal() {
        return Err(Error::NotMaximal {
            rank: group.rank(),
            n: group.n(),
        });
    }
    let bip = fw.bipartition();
    let n = group.n();
    let dec = decompose(group, &bip)?;
    let e = dec.e_ab;
    let ra = refine_local(&dec.s_a, fw, Side::A)?;
    let rb = refine_local(&dec.s_b, fw, Side::B)?;

    let pairs_on =
        |r: &LocalRefinement, q: &QubitSet| restricted_gram(r.s12.generators(), q).rank() / 2;
    let p_a = pairs_on(&ra, &fw.a2);
    let p_b = pairs_on(&rb, &fw.b2);
    if p_a != pairs_on(&ra, &fw.a1) || p_b != pairs_on(&rb, &fw.b1) {
        return Err(violated("pair counts differ between the two projections"));
    }

    let ranks = RefinementRanks {
        n,
        n1: fw.part1.len(),
        n2: fw.part2.len(),
        size_a1: fw.a1.len(),
        size_a2: fw.a2.len(),
        size_b1: fw.b1.len(),
        size_b2: fw.b2.len(),
        s_a: dec.s_a.rank(),
        s_b: dec.s_b.rank(),
        s_a1: ra.s1.rank(),
        s_a2: ra.s2.rank(),
        s_a12: ra.s12.rank(),
        s_b1: rb.s1.rank(),
        s_b2: rb.s2.rank(),
        s_b12: rb.s12.rank(),
    };
    let count = |size: usize, rank: usize, p: usize| size as i64 - rank as i64 - p as i64;
    let n_a2 = count(ranks.size_a2, ranks.s_a2, p_a);
    let n_b2 = count(ranks.size_b2, ranks.s_b2, p_b);
    let n_a1 = count(ranks.size_a1, ranks.s_a1, p_a);
    let n_b1 = count(ranks.size_b1, ranks.s_b1, p_b);

    let (sel2, plan2, e1) = traced_result(group, fw, TracedPart::Part2)?;
    let (sel1, plan1, e2) = traced_result(group, fw, TracedPart::Part1)?;
    let static_a2 = sel2.static_counts[0].reducing;
    let static_b2 = sel2.static_counts[1].reducing;
    if (static_a2, static_b2) != (n_a2, n_b2)
        || (
            sel1.static_counts[0].reducing,
            sel1.static_counts[1].reducing,
        ) != (n_a1, n_b1)
    {
        return Err(violated(
            "static counts disagree between refinement and selection",
        ));
    }

    let f = |v: usize| v as f64;
    let half_12 = 0.5 * f(ranks.s_a12) + 0.5 * f(ranks.s_b12);
    let max2 = n_a2.max(n_b2) as f64;
    let max1 = n_a1.max(n_b1) as f64;
    let bounds = vec![
        BoundCheck::new(
            "pairs_a_le_half_s_a12",
            f(p_a),
            Relation::Le,
            0.5 * f(ranks.s_a12),
        ),
        BoundCheck::new(
            "pairs_b_le_half_s_b12",
            f(p_b),
            Relation::Le,
            0.5 * f(ranks.s_b12),
        ),
        BoundCheck::new(
            "n_a2_ge_counting_bound",
            n_a2 as f64,
            Relation::Ge,
            f(ranks.size_a2) - f(ranks.s_a2) - 0.5 * f(ranks.s_a12),
        ),
        BoundCheck::new(
            "n_b2_ge_counting_bound",
            n_b2 as f64,
            Relation::Ge,
            f(ranks.size_b2) - f(ranks.s_b2) - 0.5 * f(ranks.s_b12),
        ),
        BoundCheck::new(
            "achieved_part2_ge_max_side_count",
            f(sel2.achieved()),
            Relation::Ge,
            max2,
        ),
        BoundCheck::new(
            "achieved_part1_ge_max_side_count",
            f(sel1.achieved()),
            Relation::Ge,
            max1,
        ),
        BoundCheck::new(
            "max_side_count_part2_ge_mean",
            max2,
            Relation::Ge,
            (n_a2 + n_b2) as f64 / 2.0,
        ),
        BoundCheck::new(
            "max_side_count_part1_ge_mean",
            max1,
            Relation::Ge,
            (n_a1 + n_b1) as f64 / 2.0,
        ),
        BoundCheck::new("e1_le_e_minus_2n", f(e1), Relation::Le, f(e) - 2.0 * max2),
        BoundCheck::new("e2_le_e_minus_2n", f(e2), Relation::Le, f(e) - 2.0 * max1),
        BoundCheck::new(
            "e1_le_rank_bound",
            f(e1),
            Relation::Le,
            f(e) - f(ranks.n2) + f(ranks.s_a2) + f(ranks.s_b2) + half_12,
        ),
        BoundCheck::new(
            "e2_le_rank_bound",
            f(e2),
            Relation::Le,
            f(e) - f(ranks.n1) + f(ranks.s_a1) + f(ranks.s_b1) + half_12,
        ),
        BoundCheck::new(
            "refinement_ranks_a",
            f(ranks.s_a1 + ranks.s_a2 + ranks.s_a12),
            Relation::Eq,
            f(ranks.s_a),
        ),
        BoundCheck::new(
            "refinement_ranks_b",
            f(ranks.s_b1 + ranks.s_b2 + ranks.s_b12),
            Relation::Eq,
            f(ranks.s_b),
        ),
        BoundCheck::new(
            "local_ranks",
            f(ranks.s_a + ranks.s_b),
            Relation::Eq,
            f(n) - f(e),
        ),
        BoundCheck::new("superadditivity", f(e1 + e2), Relation::Le, f(e)),
    ];
    Ok(SsaReport {
        e_global: e,
        e1,
        e2,
        n_a2,
        n_b2,
        n_a1,
        n_b1,
        p_a,
        p_b,
        ranks,
        bounds,
        holds: e1 + e2 <= e,
        mixture_components: None,
        explain: Some(Explain {
            trace_part2: sel2,
            plan_part2: plan2,
            trace_part1: sel1,
            plan_part1: plan1,
        }),
    })
}

/// Mixture of stabilizer states sharing one group up to signs.
pub fn verify_ssa_mixed(
    components: &[(f64, StabilizerGroup)],
    fw: &FourWayPartition,
) -> Result<SsaReport> {
    let Some((_, first)) = components.first() else {
        return Err(Error::InvalidMixture("no components".into()));
    };
    if components.iter().any(|(w, _)| !w.is_finite() || *w <= 0.0) {
        return Err(Error::InvalidMixture("weights must be positive".into()));
    }
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMixture(format!(
            "weights sum to {total}, not 1"
        )));
    }
    if let Some((_, g)) = components.iter().find(|(_, g)| !g.same_up_to_phases(first)) {
        return Err(Error::InvalidMixture(format!(
            "component group of rank {} differs from the first beyond signs",
            g.rank()
        )));
    }
    let mut report = verify_ssa(&first.phase_agnostic(), fw)?;
    report.mixture_components = Some(components.len());
    Ok(report)
}

/// Normalized projector onto the joint `+1` eigenspace of `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeProjector {
    pub h: StabilizerGroup,
}

#[derive(Clone, Debug)]
pub struct EfResult {
    /// Entanglement of formation in ebits.
    pub p: usize,
    /// Maximal group containing `h` whose sign-branches decompose the
    /// projector with average entanglement `p`.
    pub witness: StabilizerGroup,
}

/// Extends `h` to a maximal group using `{A,B}`-local operators only, so
/// the locally anticommuting pair count is unchanged and `e_AB = 2p`.
pub fn complete_to_maximal(h: &StabilizerGroup, part: &Bipartition) -> Result<StabilizerGroup> {
    if h.n() != part.n() {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            found: part.n(),
        });
    }
    let n = h.n();
    let p = pair_count(h, part)?;
    let mut gens = h.generators().to_vec();
    let mut ech = h.echelon().clone();
    let mut try_add = |c: PauliOperator, gens: &mut Vec<PauliOperator>| {
        if gens.iter().any(|g| g.anticommutes(&c)) || ech.in_span(&c) {
            return false;
        }
        ech.insert(&c);
        gens.push(c);
        true
    };
    for q in 0..n {
        for kind in [Pauli1::Z, Pauli1::X] {
            if gens.len() < n {
                try_add(PauliOperator::single(n, q, kind), &mut gens);
            }
        }
    }
    'local: while gens.len() < n {
        for side in [part.a(), part.b()] {
            for c in commutant_on(&gens, side) {
                if try_add(c, &mut gens) {
                    continue 'local;
                }
            }
        }
        break;
    }
    // A local completion always exists; this only runs if that fails.
    while gens.len() < n {
        let all = QubitSet::all(n);
        let Some(c) = commutant_on(&gens, &all)
            .into_iter()
            .find(|c| try_add(c.clone(), &mut gens.clone()))
        else {
            break;
        };
        try_add(c, &mut gens);
    }
    let witness = StabilizerGroup::new(n, gens)?;
    let achieved = entanglement_rank(&witness, part)?.e_ab;
    if !witness.is_maximal() || achieved != 2 * p {
        return Err(Error::CompletionNotAchieved {
            achieved,
            expected: 2 * p,
        });
    }
    Ok(if h.is_phase_agnostic() {
        witness.phase_agnostic()
    } else {
        witness
    })
}

pub fn ef_code_projector(cp: &CodeProjector, part: &Bipartition) -> Result<EfResult> {
    let p = pair_count(&cp.h, part)?;
    let witness = complete_to_maximal(&cp.h, part)?;
    Ok(EfResult { p, witness })
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

    fn fw4() -> FourWayPartition {
        FourWayPartition::new(4, vec![0], vec![1], vec![2], vec![3]).unwrap()
    }

    fn two_bell() -> StabilizerGroup {
        group(&["XIXI", "ZIZI", "IXIX", "IZIZ"])
    }

    fn ghz4() -> StabilizerGroup {
        group(&["XXXX", "ZZII", "IZZI", "IIZZ"])
    }

    #[test]
    fn partition_views() {
        let fw = FourWayPartition::new(5, vec![0, 4], vec![1], vec![2], vec![3]).unwrap();
        assert_eq!(fw.a().indices(), &[0, 1, 4]);
        assert_eq!(fw.part1().indices(), &[0, 2, 4]);
        assert_eq!(fw.part2().indices(), &[1, 3]);
        assert_eq!(
            fw.kept_bipartition(TracedPart::Part2).a().indices(),
            &[0, 2]
        );
        assert!(FourWayPartition::new(3, vec![0], vec![0], vec![1], vec![2]).is_err());
        assert!(FourWayPartition::new(3, vec![0], vec![], vec![1], vec![]).is_err());
    }

    #[test]
    fn refine_examples() {
        let fw = FourWayPartition::new(3, vec![0], vec![1], vec![2], vec![]).unwrap();
        let r = refine_local(&group(&["ZII", "IZI"]), &fw, Side::A).unwrap();
        assert_eq!(r.s1.generators(), &[p("ZII")]);
        assert_eq!(r.s2.generators(), &[p("IZI")]);
        assert_eq!(r.s12.rank(), 0);

        let r = refine_local(&group(&["ZZI"]), &fw, Side::A).unwrap();
        assert_eq!((r.s1.rank(), r.s2.rank()), (0, 0));
        assert_eq!(r.s12.generators(), &[p("ZZI")]);

        let r = refine_local(&StabilizerGroup::trivial(3), &fw, Side::A).unwrap();
        assert_eq!((r.s1.rank(), r.s2.rank(), r.s12.rank()), (0, 0, 0));

        assert!(refine_local(&group(&["ZIZ"]), &fw, Side::A).is_err());
    }

    #[test]
    fn projection_examples() {
        let fw = FourWayPartition::new(2, vec![0], vec![1], vec![], vec![]).unwrap();
        assert_eq!(project_p2(&p("XZ"), &fw), p("IZ"));
        assert!(project_p2(&p("-XI"), &fw).is_identity());
        assert_eq!(project_p2(&p("-IY"), &fw), p("IY"));
    }

    #[test]
    fn selection_two_bell_pairs() {
        let sel = select_measurement_ops(&two_bell(), &fw4(), TracedPart::Part2).unwrap();
        assert_eq!(sel.static_counts[0].reducing, 1);
        assert_eq!(sel.static_counts[0].pairs, 0);
        assert_eq!(sel.static_counts[0].block_rank, 0);
        let a_side = sel.sides.iter().find(|s| s.side == Side::A).unwrap();
        assert_eq!(a_side.completion_ops[0].op, p("IZII"));
        assert_eq!(sel.e_initial, 4);
        assert_eq!(sel.e_final, 2);
    }

    #[test]
    fn selection_product_state() {
        let prod = group(&["ZIII", "IZII", "IIZI", "IIIZ"]);
        let sel = select_measurement_ops(&prod, &fw4(), TracedPart::Part2).unwrap();
        assert_eq!(sel.static_counts[0].reducing, 0);
        assert_eq!(sel.static_counts[1].reducing, 0);
        assert_eq!(sel.ops.len(), 2);
        assert_eq!(sel.e_final, 0);
    }

    #[test]
    fn selection_ghz4() {
        let sel = select_measurement_ops(&ghz4(), &fw4(), TracedPart::Part2).unwrap();
        let a = sel.static_counts[0];
        assert_eq!((a.pairs, a.block_rank, a.reducing), (0, 0, 1));
        let a_side = sel.sides.iter().find(|s| s.side == Side::A).unwrap();
        if sel.first_side == Side::A {
            assert_eq!(a_side.center_ops[0].op, p("IZII"));
        }
        assert_eq!(sel.e_final, 0);
    }

    #[test]
    fn verify_examples() {
        let r = verify_ssa(&two_bell(), &fw4()).unwrap();
        assert_eq!((r.e_global, r.e1, r.e2), (4, 2, 2));
        assert!(r.holds && r.all_bounds_hold());

        let r = verify_ssa(&ghz4(), &fw4()).unwrap();
        assert_eq!((r.e_global, r.e1, r.e2), (2, 0, 0));
        assert!(r.holds && r.all_bounds_hold());

        let prod = group(&["XIII", "IYII", "IIZI", "IIIZ"]);
        let r = verify_ssa(&prod, &fw4()).unwrap();
        assert_eq!((r.e_global, r.e1, r.e2), (0, 0, 0));
        assert!(r.holds);

        assert!(matches!(
            verify_ssa(&group(&["ZZII"]).phase_agnostic(), &fw4()),
            Err(Error::NotMaximal { .. })
        ));
    }

    #[test]
    fn mixed_examples() {
        let fw = fw4();
        let s = two_bell();
        let single = verify_ssa_mixed(&[(1.0, s.clone())], &fw).unwrap();
        let pure = verify_ssa(&s, &fw).unwrap();
        assert_eq!(
            (single.e1, single.e2, single.holds),
            (pure.e1, pure.e2, pure.holds)
        );

        let plus = group(&["XXII", "ZZII", "IIZI", "IIIZ"]);
        let minus = group(&["-XXII", "ZZII", "IIZI", "IIIZ"]);
        let fw = FourWayPartition::new(4, vec![0], vec![2], vec![1], vec![3]).unwrap();
        let r = verify_ssa_mixed(&[(0.5, plus.clone()), (0.5, minus.clone())], &fw).unwrap();
        assert!(r.holds);
        assert_eq!(r.mixture_components, Some(2));

        assert!(verify_ssa_mixed(&[(0.4, plus.clone()), (0.4, minus)], &fw).is_err());
        let other = group(&["ZIII", "IZII", "IIZI", "IIIZ"]);
        assert!(verify_ssa_mixed(&[(0.5, plus), (0.5, other)], &fw).is_err());
    }

    #[test]
    fn completion_examples() {
        let cut = Bipartition::with_a(2, vec![0]).unwrap();
        let w = complete_to_maximal(&group(&["ZZ"]), &cut).unwrap();
        assert_eq!(w.generators(), &[p("ZZ"), p("ZI")]);
        let bell = group(&["XX", "ZZ"]);
        assert_eq!(complete_to_maximal(&bell, &cut).unwrap(), bell);
        let one = Bipartition::with_a(1, vec![0]).unwrap();
        let w = complete_to_maximal(&StabilizerGroup::trivial(1), &one).unwrap();
        assert_eq!(w.generators(), &[p("Z")]);
    }

    #[test]
    fn ef_examples() {
        let cut = Bipartition::with_a(2, vec![0]).unwrap();
        let r = ef_code_projector(
            &CodeProjector {
                h: group(&["XX", "ZZ"]),
            },
            &cut,
        )
        .unwrap();
        assert_eq!(r.p, 1);
        let r = ef_code_projector(&CodeProjector { h: group(&["ZZ"]) }, &cut).unwrap();
        assert_eq!(r.p, 0);
        assert_eq!(entanglement_rank(&r.witness, &cut).unwrap().e_ab, 0);

        let cut3 = Bipartition::with_a(3, vec![0]).unwrap();
        let r = ef_code_projector(
            &CodeProjector {
                h: group(&["XXI", "ZZI"]),
            },
            &cut3,
        )
        .unwrap();
        assert_eq!(r.p, 1);
        assert_eq!(r.witness.generators()[2], p("IIZ"));
        assert_eq!(entanglement_rank(&r.witness, &cut3).unwrap().e_ab, 2);
    }
}
