//! Pauli measurements on stabilizer groups and the measurement-based
//! decomposition of a partial trace.
//!
//! Measuring a complete commuting set of operators on the traced qubits
//! splits the reduced state into equally weighted pure stabilizer states
//! that share one group up to signs; [`trace_out`] returns that shared group
//! on the kept qubits.

use rand::Rng;

use crate::bipartite::{commutant_on, trivial_subgroup, Bipartition};
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator, QubitSet};
use crate::rng::rng_for;
use crate::stab_group::{Insert, Membership, PauliEchelon, StabilizerGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    fn apply(self, p: &PauliOperator) -> PauliOperator {
        match self {
            Sign::Plus => p.clone(),
            Sign::Minus => p.negated(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    /// Random outcomes drawn from a PRNG keyed by the seed.
    Sampled { seed: u64 },
    /// Every random outcome resolved to `+1`.
    BranchAgnostic,
    /// Random outcomes resolved to the given sign; used to enumerate branches.
    Forced(Sign),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    Deterministic(Sign),
    Random,
}

#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub kind: OutcomeKind,
    /// Realized eigenvalue.
    pub value: Sign,
    pub post_group: StabilizerGroup,
}

fn draw(mode: MeasureMode) -> Sign {
    match mode {
        MeasureMode::BranchAgnostic => Sign::Plus,
        MeasureMode::Forced(s) => s,
        MeasureMode::Sampled { seed } => {
            if rng_for(seed, 0).random_bool(0.5) {
                Sign::Minus
            } else {
                Sign::Plus
            }
        }
    }
}

/// Measures the Hermitian Pauli `m` on the state (or code) stabilized by
/// `group`.
///
/// When `m` anticommutes with some generators, the first one in generator
/// order (`s₁`) is replaced by `±m` and the other anticommuting generators are
/// multiplied by `s₁`.
pub fn measure(
    group: &StabilizerGroup,
    m: &PauliOperator,
    mode: MeasureMode,
) -> Result<MeasurementOutcome> {
    if m.n() != group.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            found: m.n(),
        });
    }
    if !m.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    let gens = group.generators();
    let anti: Vec<usize> = (0..gens.len())
        .filter(|&i| gens[i].anticommutes(m))
        .collect();
    let finish = |g: StabilizerGroup| {
        if group.is_phase_agnostic() {
            g.phase_agnostic()
        } else {
            g
        }
    };

    let Some(&first) = anti.first() else {
        return Ok(match group.contains(m)? {
            Membership::MemberPlus => MeasurementOutcome {
                kind: OutcomeKind::Deterministic(Sign::Plus),
                value: Sign::Plus,
                post_group: group.clone(),
            },
            Membership::MemberMinus => MeasurementOutcome {
                kind: OutcomeKind::Deterministic(Sign::Minus),
                value: Sign::Minus,
                post_group: group.clone(),
            },
            Membership::NotMember => {
                let value = draw(mode);
                let kind = match mode {
                    MeasureMode::BranchAgnostic => OutcomeKind::Deterministic(Sign::Plus),
                    _ => OutcomeKind::Random,
                };
                let mut ops = gens.to_vec();
                ops.push(value.apply(m));
                MeasurementOutcome {
                    kind,
                    value,
                    post_group: finish(StabilizerGroup::new(group.n(), ops)?),
                }
            }
        });
    };

    let value = draw(mode);
    let s1 = gens[first].clone();
    let mut ops = Vec::with_capacity(gens.len());
    for (i, g) in gens.iter().enumerate() {
        if i == first {
            ops.push(value.apply(m));
        } else if g.anticommutes(m) {
            ops.push(g.multiply(&s1)?);
        } else {
            ops.push(g.clone());
        }
    }
    Ok(MeasurementOutcome {
        kind: OutcomeKind::Random,
        value,
        post_group: finish(StabilizerGroup::new(group.n(), ops)?),
    })
}

/// Complete commuting set of `{A,B}`-local operators on the traced qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceOutPlan {
    pub part: Bipartition,
    pub traced: QubitSet,
    pub kept: QubitSet,
    pub ops: Vec<PauliOperator>,
}

fn check_plan_ops(part: &Bipartition, traced: &QubitSet, ops: &[PauliOperator]) -> Result<()> {
    let kept = traced.complement();
    let mut ech = PauliEchelon::new(traced.n());
    for (i, op) in ops.iter().enumerate() {
        if op.n() != traced.n() {
            return Err(Error::DimensionMismatch {
                expected: traced.n(),
                found: op.n(),
            });
        }
        if !op.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        if !op.trivial_on_mask(kept.mask()) {
            return Err(Error::InvalidPlan(format!(
                "operator {op} acts outside the traced qubits"
            )));
        }
        if !part.is_local(op) {
            return Err(Error::InvalidPlan(format!(
                "operator {op} straddles the A/B cut"
            )));
        }
        if op.is_identity() || matches!(ech.insert(op), Insert::Dependent(_)) {
            return Err(Error::InvalidPlan(format!("operator {op} is dependent")));
        }
        if let Some(j) = (0..i).find(|&j| ops[j].anticommutes(op)) {
            return Err(Error::InvalidPlan(format!(
                "operators {} and {op} anticommute",
                ops[j]
            )));
        }
    }
    Ok(())
}

impl TraceOutPlan {
    /// Checks every invariant, including completeness.
    pub fn validate(&self) -> Result<()> {
        check_plan_ops(&self.part, &self.traced, &self.ops)?;
        if self.ops.len() != self.traced.len() {
            return Err(Error::InvalidPlan(format!(
                "{} operators for {} traced qubits",
                self.ops.len(),
                self.traced.len()
            )));
        }
        Ok(())
    }
}

/// Extends `seed_ops` to a complete local commuting set on `traced`:
/// single-qubit `Z` then `X` in ascending qubit order, then any remaining
/// local commutant elements.
pub fn build_trace_out_plan(
    group: &StabilizerGroup,
    part: &Bipartition,
    traced: &QubitSet,
    seed_ops: &[PauliOperator],
) -> Result<TraceOutPlan> {
    let n = group.n();
    for (what, m) in [("partition", part.n()), ("traced set", traced.n())] {
        if m != n {
            return Err(Error::InvalidPlan(format!(
                "{what} is for {m} qubits, group has {n}"
            )));
        }
    }
    check_plan_ops(part, traced, seed_ops)?;
    let mut ops = seed_ops.to_vec();
    let mut ech = PauliEchelon::new(n);
    for op in &ops {
        ech.insert(op);
    }
    let target = traced.len();
    'greedy: for &q in traced.iter() {
        for kind in [Pauli1::Z, Pauli1::X] {
            if ops.len() == target {
                break 'greedy;
            }
            let c = PauliOperator::single(n, q, kind);
            if ops.iter().any(|o| o.anticommutes(&c)) {
                continue;
            }
            if let Insert::Independent = ech.insert(&c) {
                ops.push(c);
            }
        }
    }
    for side in [part.a().intersection(traced), part.b().intersection(traced)] {
        while ops.len() < target {
            let candidate = commutant_on(&ops, &side)
                .into_iter()
                .find(|c| !ech.in_span(c));
            let Some(c) = candidate else { break };
            ech.insert(&c);
            ops.push(c);
        }
    }
    let plan = TraceOutPlan {
        part: part.clone(),
        traced: traced.clone(),
        kept: traced.complement(),
        ops,
    };
    plan.validate()?;
    Ok(plan)
}

fn check_plan_group(group: &StabilizerGroup, plan: &TraceOutPlan) -> Result<()> {
    if plan.traced.n() != group.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            found: plan.traced.n(),
        });
    }
    plan.validate()
}

/// Subgroup of `g` acting trivially on `traced`, restricted to `kept`, with
/// exact signs.
fn kept_restriction(g: &StabilizerGroup, plan: &TraceOutPlan) -> Result<StabilizerGroup> {
    let kernel = trivial_subgroup(g, &plan.traced)?;
    let ops = kernel
        .generators()
        .iter()
        .map(|p| p.restrict_keep_sign(&plan.kept))
        .collect::<Result<Vec<_>>>()?;
    StabilizerGroup::new(plan.kept.len(), ops)
}

/// Group on the full register after measuring every plan operator with all
/// outcomes `+1`.
pub fn measure_plan(group: &StabilizerGroup, plan: &TraceOutPlan) -> Result<StabilizerGroup> {
    check_plan_group(group, plan)?;
    let mut g = group.clone();
    for op in &plan.ops {
        g = measure(&g, op, MeasureMode::BranchAgnostic)?.post_group;
    }
    Ok(g)
}

/// The group shared (up to signs) by every branch state on the kept qubits,
/// with phases dropped. Qubits are relabelled in ascending order of `kept`.
pub fn trace_out(group: &StabilizerGroup, plan: &TraceOutPlan) -> Result<StabilizerGroup> {
    let g = measure_plan(group, plan)?;
    Ok(kept_restriction(&g, plan)?.phase_agnostic())
}

/// Exact group of the kept-qubit branch state for the given outcomes, or
/// `None` when a deterministic outcome contradicts the request.
pub fn trace_out_branch(
    group: &StabilizerGroup,
    plan: &TraceOutPlan,
    outcomes: &[Sign],
) -> Result<Option<StabilizerGroup>> {
    check_plan_group(group, plan)?;
    if outcomes.len() != plan.ops.len() {
        return Err(Error::InvalidPlan(format!(
            "{} outcomes for {} operators",
            outcomes.len(),
            plan.ops.len()
        )));
    }
    let mut g = group.clone();
    for (op, &want) in plan.ops.iter().zip(outcomes) {
        let out = measure(&g, op, MeasureMode::Forced(want))?;
        if out.value != want {
            return Ok(None);
        }
        g = out.post_group;
    }
    Ok(Some(kept_restriction(&g, plan)?))
}

/// Every branch with nonzero probability; branches are equally likely.
pub fn branches(group: &StabilizerGroup, plan: &TraceOutPlan) -> Result<Vec<StabilizerGroup>> {
    let k = plan.ops.len();
    if k > 20 {
        return Err(Error::OracleLimit {
            what: "branch enumeration",
            n: k,
            max: 20,
        });
    }
    let mut out = Vec::new();
    for bits in 0u32..(1 << k) {
        let outcomes: Vec<Sign> = (0..k)
            .map(|i| {
                if bits >> i & 1 == 1 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            })
            .collect();
        if let Some(g) = trace_out_branch(group, plan, &outcomes)? {
            out.push(g);
        }
    }
    Ok(out)
}
