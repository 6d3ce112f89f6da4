use proptest::prelude::*;
use rand::Rng;

use stabsplit::cli::random_fourway;
use stabsplit::codec::{format_stab_file, parse_stab_file};
use stabsplit::oracle::{
    code_projector_matrix, dense_measure, max_abs_diff, schmidt_entropy, statevector,
    witness_mixture,
};
use stabsplit::rng::rng_for;
use stabsplit::superadditivity::select_measurement_ops;
use stabsplit::{
    branches, build_trace_out_plan, center_and_pairs, complete_to_maximal, decompose,
    entanglement_rank, measure, pair_count, random_stabilizer, restricted_gram, restricted_rank,
    verify_ssa, Bipartition, MeasureMode, Membership, OutcomeKind, Pauli1, PauliOperator, QubitSet,
    Sign, StabilizerGroup, TracedPart,
};

const KINDS: [Pauli1; 4] = [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z];

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    (prop::collection::vec(0usize..4, n), 0u8..4).prop_map(|(f, k)| {
        let factors: Vec<Pauli1> = f.into_iter().map(|i| KINDS[i]).collect();
        PauliOperator::from_factors(&factors, false).times_i_pow(k)
    })
}

fn arb_pauli_triple() -> impl Strategy<Value = (PauliOperator, PauliOperator, PauliOperator)> {
    (1usize..80).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
}

fn arb_group(max_n: usize) -> impl Strategy<Value = (StabilizerGroup, u64)> {
    (1usize..=max_n, any::<u64>()).prop_map(|(n, s)| (random_stabilizer(n, s).unwrap(), s))
}

/// A group together with a Hermitian Pauli (either sign) on the same qubits.
fn arb_group_and_observable(
    max_n: usize,
) -> impl Strategy<Value = (StabilizerGroup, PauliOperator)> {
    (1usize..=max_n).prop_flat_map(|n| {
        (
            any::<u64>(),
            prop::collection::vec(0usize..4, n),
            any::<bool>(),
        )
            .prop_map(move |(s, f, neg)| {
                let factors: Vec<Pauli1> = f.into_iter().map(|i| KINDS[i]).collect();
                (
                    random_stabilizer(n, s).unwrap(),
                    PauliOperator::from_factors(&factors, neg),
                )
            })
    })
}

fn cut(n: usize, mask: u64) -> Bipartition {
    Bipartition::with_a(n, (0..n).filter(|q| mask >> q & 1 == 1).collect()).unwrap()
}

fn same_string(a: &PauliOperator, b: &PauliOperator) -> bool {
    a.x_bits() == b.x_bits() && a.z_bits() == b.z_bits()
}

fn random_local(part: &Bipartition, rng: &mut impl Rng) -> Option<PauliOperator> {
    let side = if rng.random_bool(0.5) {
        part.a()
    } else {
        part.b()
    };
    let mut p = PauliOperator::identity(part.n());
    for &q in side.iter() {
        p.set(q, KINDS[rng.random_range(0..4)]);
    }
    (!p.is_identity()).then_some(p)
}

proptest! {
    #[test]
    fn symplectic_product_is_symmetric_and_fixes_commutation_phase((p, q, _) in arb_pauli_triple()) {
        let s = p.symplectic_product(&q).unwrap();
        prop_assert_eq!(s, q.symplectic_product(&p).unwrap());
        let pq = p.multiply(&q).unwrap();
        let qp = q.multiply(&p).unwrap();
        prop_assert_eq!(pq, if s == 1 { qp.negated() } else { qp });
    }

    #[test]
    fn multiplication_is_associative((p, q, r) in arb_pauli_triple()) {
        let left = p.multiply(&q).unwrap().multiply(&r).unwrap();
        let right = p.multiply(&q.multiply(&r).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn restriction_is_multiplicative_up_to_phase((p, q, _) in arb_pauli_triple(), mask in any::<u64>()) {
        let n = p.n();
        let s = QubitSet::new(n, (0..n).filter(|i| mask >> (i % 64) & 1 == 1)).unwrap();
        let lhs = p.multiply(&q).unwrap().restrict(&s).unwrap();
        let rhs = p.restrict(&s).unwrap().multiply(&q.restrict(&s).unwrap()).unwrap();
        prop_assert!(same_string(&lhs, &rhs));
    }

    #[test]
    fn pauli_strings_round_trip((p, _, _) in arb_pauli_triple()) {
        prop_assert_eq!(p.to_string().parse::<PauliOperator>().unwrap(), p);
    }

    #[test]
    fn random_groups_are_valid((g, _) in arb_group(40)) {
        let gens = g.generators();
        prop_assert!(g.is_maximal());
        for (i, a) in gens.iter().enumerate() {
            prop_assert!(a.is_hermitian());
            for b in &gens[i + 1..] {
                prop_assert!(!a.anticommutes(b));
            }
        }
        prop_assert_eq!(StabilizerGroup::generated_by(g.n(), gens).unwrap().rank(), gens.len());
    }

    #[test]
    fn canonical_basis_ignores_generating_set((g, seed) in arb_group(20)) {
        let mut rng = rng_for(seed, 1);
        let mut gens = g.generators().to_vec();
        for _ in 0..3 * gens.len() {
            let i = rng.random_range(0..gens.len());
            let j = rng.random_range(0..gens.len());
            if i != j {
                let gj = gens[j].clone();
                gens[i].mul_assign(&gj);
            }
        }
        let h = StabilizerGroup::new(g.n(), gens).unwrap();
        prop_assert_eq!(h.canonical_basis(), g.canonical_basis());
        let again = StabilizerGroup::new(g.n(), h.canonical_basis().to_vec()).unwrap();
        prop_assert_eq!(again.canonical_basis(), g.canonical_basis());
    }

    #[test]
    fn subset_products_are_members((g, seed) in arb_group(30)) {
        let mut rng = rng_for(seed, 2);
        let mut p = PauliOperator::identity(g.n());
        for gen in g.generators() {
            if rng.random_bool(0.5) {
                p.mul_assign(gen);
            }
        }
        prop_assert_eq!(g.contains(&p).unwrap(), Membership::MemberPlus);
        if !p.is_identity() {
            prop_assert_eq!(g.contains(&p.negated()).unwrap(), Membership::MemberMinus);
        }
    }

    #[test]
    fn stab_files_round_trip((g, _) in arb_group(30)) {
        let back = parse_stab_file(&format_stab_file(&g)).unwrap();
        prop_assert_eq!(back.canonical_basis(), g.canonical_basis());
    }

    #[test]
    fn decomposition_accounts_for_the_group((g, seed) in arb_group(30)) {
        let part = cut(g.n(), seed);
        let d = decompose(&g, &part).unwrap();
        prop_assert_eq!(d.e_ab % 2, 0);
        prop_assert_eq!(d.s_a.rank() + d.s_b.rank(), g.n() - d.e_ab);
        prop_assert_eq!(d.s_ab.rank(), d.e_ab);
        let all: Vec<PauliOperator> = d.s_a.generators().iter()
            .chain(d.s_b.generators())
            .chain(d.s_ab.generators())
            .cloned()
            .collect();
        let regen = StabilizerGroup::new(g.n(), all).unwrap();
        prop_assert_eq!(regen.canonical_basis(), g.canonical_basis());
        prop_assert_eq!(entanglement_rank(&g, &part).unwrap().e_ab, d.e_ab);
    }

    #[test]
    fn pair_count_ignores_basis_and_side((g, seed) in arb_group(16), k in 0usize..16) {
        let n = g.n();
        let k = k % (n + 1);
        let h = StabilizerGroup::new(n, g.generators()[..k].to_vec()).unwrap();
        let part = cut(n, seed);
        let p = pair_count(&h, &part).unwrap();
        prop_assert_eq!(p, pair_count(&h, &part.swapped()).unwrap());
        let rebased = StabilizerGroup::new(n, h.canonical_basis().to_vec()).unwrap();
        prop_assert_eq!(p, pair_count(&rebased, &part).unwrap());
        prop_assert!(2 * p <= k);
    }

    #[test]
    fn center_pair_form_is_symplectic((g, seed) in arb_group(16)) {
        let n = g.n();
        let part = cut(n, seed);
        let all = QubitSet::all(n);
        let mut ops: Vec<PauliOperator> = Vec::new();
        for x in g.generators() {
            let r = x.mask_to(part.a());
            let mut trial = ops.clone();
            trial.push(r.clone());
            if restricted_rank(&trial, &all) == trial.len() {
                ops.push(r);
            }
        }
        let form = center_and_pairs(&ops).unwrap();
        let out: Vec<PauliOperator> = form.operators().cloned().collect();
        prop_assert_eq!(out.len(), ops.len());
        let both: Vec<PauliOperator> = ops.iter().chain(&out).cloned().collect();
        prop_assert_eq!(restricted_rank(&both, &all), ops.len());
        prop_assert_eq!(form.pair_count() * 2, restricted_gram(&ops, &all).rank());
        for c in &form.center {
            for o in &out {
                prop_assert!(!c.anticommutes(o));
            }
        }
        for (i, (u, v)) in form.pairs.iter().enumerate() {
            prop_assert!(u.anticommutes(v));
            for (u2, v2) in &form.pairs[i + 1..] {
                prop_assert!(!u.anticommutes(u2) && !u.anticommutes(v2));
                prop_assert!(!v.anticommutes(u2) && !v.anticommutes(v2));
            }
        }
    }

    #[test]
    fn local_measurements_never_raise_entanglement((g, seed) in arb_group(24)) {
        let part = cut(g.n(), seed);
        let mut rng = rng_for(seed, 3);
        if let Some(m) = random_local(&part, &mut rng) {
            let pre = entanglement_rank(&g, &part).unwrap().e_ab;
            let post = measure(&g, &m, MeasureMode::Sampled { seed }).unwrap().post_group;
            prop_assert!(entanglement_rank(&post, &part).unwrap().e_ab <= pre);
        }
    }

    #[test]
    fn measurement_matches_dense_projection((g, m) in arb_group_and_observable(8)) {
        prop_assume!(!m.is_identity());
        let psi = statevector(&g).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let out = measure(&g, &m, MeasureMode::Forced(sign)).unwrap();
            let dense = dense_measure(&psi, &m, sign).unwrap();
            match dense {
                Some(d) => {
                    prop_assert_eq!(out.value, sign);
                    let s = statevector(&out.post_group).unwrap();
                    prop_assert!(s.equal_up_to_phase(&d, 1e-10));
                }
                None => {
                    prop_assert!(matches!(out.kind, OutcomeKind::Deterministic(_)));
                    prop_assert_ne!(out.value, sign);
                }
            }
        }
    }

    #[test]
    fn branches_share_entanglement((g, seed) in arb_group(8)) {
        let n = g.n();
        prop_assume!(n >= 2);
        let part = cut(n, seed);
        let traced = QubitSet::new(n, (0..n).filter(|q| (seed >> (8 + q)) & 1 == 1)).unwrap();
        prop_assume!(!traced.is_empty() && traced.len() < n);
        let plan = build_trace_out_plan(&g, &part, &traced, &[]).unwrap();
        let kept = traced.complement();
        let kept_a: Vec<usize> = kept.iter().enumerate()
            .filter(|(_, q)| part.a().contains(**q)).map(|(i, _)| i).collect();
        let kept_part = Bipartition::with_a(kept.len(), kept_a).unwrap();
        let bs = branches(&g, &plan).unwrap();
        let e0 = entanglement_rank(&bs[0], &kept_part).unwrap().e_ab;
        for b in &bs {
            prop_assert!(b.same_up_to_phases(&bs[0]));
            prop_assert_eq!(entanglement_rank(b, &kept_part).unwrap().e_ab, e0);
        }
    }

    #[test]
    fn entropy_matches_dense_oracle((g, seed) in arb_group(9)) {
        let part = cut(g.n(), seed);
        let s = schmidt_entropy(&statevector(&g).unwrap(), &part).unwrap();
        prop_assert!((s - entanglement_rank(&g, &part).unwrap().entropy_ebits).abs() < 1e-9);
    }

    #[test]
    fn witness_completes_with_local_operators((g, seed) in arb_group(7), k in 0usize..7) {
        let n = g.n();
        let k = k % n;
        let h = StabilizerGroup::new(n, g.generators()[..k].to_vec()).unwrap();
        let part = cut(n, seed);
        let w = complete_to_maximal(&h, &part).unwrap();
        let p = pair_count(&h, &part).unwrap();
        prop_assert_eq!(entanglement_rank(&w, &part).unwrap().e_ab, 2 * p);
        for extra in &w.generators()[k..] {
            prop_assert!(part.is_local(extra));
        }
        let mix = witness_mixture(&h, &w, &part).unwrap();
        let rho = code_projector_matrix(&h).unwrap().to_matrix();
        prop_assert!(max_abs_diff(&mix.rho, &rho) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn superadditivity_holds_with_every_bound(n in 4usize..=20, seed in any::<u64>()) {
        let g = random_stabilizer(n, seed).unwrap();
        let fw = random_fourway(n, &mut rng_for(seed, 9));
        let r = verify_ssa(&g, &fw).unwrap();
        prop_assert!(r.holds);
        for b in &r.bounds {
            prop_assert!(b.holds, "{} failed: {} vs {}", b.name, b.lhs, b.rhs);
        }
        let part = fw.bipartition();
        for traced in [TracedPart::Part1, TracedPart::Part2] {
            let sel = select_measurement_ops(&g, &fw, traced).unwrap();
            prop_assert_eq!(sel.ops.len(), fw.traced(traced).len());
            for op in &sel.ops {
                prop_assert!(part.is_local(op));
                prop_assert!(op.acts_trivially_on(fw.kept(traced)).unwrap());
            }
        }
    }
}
