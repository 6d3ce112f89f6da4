//! Stabilizer-state entanglement toolkit.
//!
//! Pauli operators and stabilizer groups over GF(2), bipartite entanglement
//! ranks, Pauli measurements, and a constructive check of strong
//! super-additivity of the entanglement of formation for stabilizer states.
//! A dense state-vector oracle (small `n`) cross-checks the symbolic results.

pub mod bipartite;
pub mod cli;
pub mod codec;
pub mod error;
pub mod gf2;
pub mod measurement;
pub mod oracle;
pub mod pauli;
pub mod rng;
pub mod stab_group;
pub mod superadditivity;

pub use bipartite::{
    center_and_pairs, commutant_on, decompose, entanglement_rank, local_subgroup, pair_count,
    restricted_gram, restricted_rank, trivial_subgroup, Bipartition, CenterPairForm,
    EntanglementDecomposition, EntanglementRank,
};
pub use error::{Error, Result};
pub use measurement::{
    branches, build_trace_out_plan, measure, measure_plan, trace_out, trace_out_branch,
    MeasureMode, MeasurementOutcome, OutcomeKind, Sign, TraceOutPlan,
};
pub use pauli::{Pauli1, PauliOperator, QubitSet};
pub use stab_group::{group_product, random_stabilizer, Membership, StabilizerGroup};
pub use superadditivity::{
    complete_to_maximal, ef_code_projector, project_p1, project_p2, refine_local,
    select_measurement_ops, verify_ssa, verify_ssa_mixed, CodeProjector, EfResult,
    FourWayPartition, LocalRefinement, Side, SsaReport, TracedPart,
};
