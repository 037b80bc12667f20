//! Seeded sweeps and property-based checks tying the fast algorithms to the
//! brute-force oracles and to each other on corpora of small instances.

mod common;

use std::collections::BTreeSet;

use common::*;
use hrht::forced_edges::{prune, PruneOutcome};
use hrht::minsum::minsum_augment_with_order;
use hrht::oracle::{all_strongly_stable, all_strongly_stable_search, enumerate_matchings};
use hrht::stability::{blocking_pairs, solve_strong_with_order};
use hrht::{
    brute_min_cost, brute_min_ell, brute_minsum, brute_minsum_fe, decode_cap12_assignment,
    decode_mincost_assignment, gen_cap12_instance, gen_mincost_instance, gen_random_instance,
    minmax_bt, minsum_augment, minsum_fe, parse_instance, parse_matching, sat_solutions,
    serialize_instance, serialize_matching, solve_strong, verify_certificates, BlockingNotion,
    FeOutcome, FeasibilityMode, ForcedEdges, HId, Instance, Matching, Mono3SatFormula,
    OracleConfig, RId, RandomParams, SatMode, SearchBox,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn serialization_round_trips_field_for_field(
        residents in 1u32..=8,
        hospitals in 1u32..=5,
        density in 0u32..=100,
        max_tie in 1u32..=4,
        quota_max in 1u32..=3,
        seed in any::<u64>(),
    ) {
        let inst = gen_random_instance(&RandomParams {
            residents,
            hospitals,
            density: f64::from(density) / 100.0,
            max_tie,
            quota_max,
            seed,
        });
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).expect("serializer output parses");
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }
}

#[test]
fn forced_pairs_and_costs_survive_the_round_trip() {
    let inst = fixture(FIX_C);
    let back = parse_instance(&serialize_instance(&inst)).expect("round trip");
    assert_eq!(back, inst);
    assert_eq!(back.forced_pairs().len(), 1);

    let f = hrht::parse_sat(FIX_E_SAT).expect("fixture formula parses");
    let g = gen_mincost_instance(&f).expect("occurrence bound holds");
    let back = parse_instance(&serialize_instance(&g.instance)).expect("round trip");
    assert_eq!(back, g.instance);
    let w1 = back.hospital_by_name("w1").expect("clause hospital exists");
    assert_eq!(back.cost(w1), Some(1));
}

#[test]
fn matching_serialization_round_trips() {
    for inst in small_corpus(40, 6, 4, 14, 3, 2) {
        let quotas = inst.quota_vector();
        let mut load = vec![0u32; inst.num_hospitals()];
        let mut m = Matching::unmatched(inst.num_residents());
        for r in inst.residents() {
            for &h in inst.resident_pref(r) {
                if load[h.idx()] < quotas[h] {
                    load[h.idx()] += 1;
                    m.set(r, Some(h));
                    break;
                }
            }
        }
        let text = serialize_matching(&inst, &quotas, &m);
        let (q2, m2) = parse_matching(&inst, &text).expect("round trip");
        assert_eq!(q2, quotas);
        assert_eq!(m2, m);
    }
}

#[test]
fn preference_structures_stay_mutual() {
    for inst in small_corpus(60, 6, 4, 24, 3, 2) {
        let mut from_residents = BTreeSet::new();
        for r in inst.residents() {
            let pref = inst.resident_pref(r);
            let unique: BTreeSet<_> = pref.iter().copied().collect();
            assert_eq!(unique.len(), pref.len(), "duplicate entry in a resident list");
            for &h in pref {
                assert!(inst.hospital_rank(h, r).is_some(), "edge missing on the hospital side");
                from_residents.insert((r, h));
            }
        }
        let mut from_hospitals = BTreeSet::new();
        for h in inst.hospitals() {
            for group in inst.hospital_groups(h) {
                assert!(!group.is_empty(), "empty rank group");
                for &r in group {
                    assert!(inst.resident_rank(r, h).is_some(), "edge missing on the resident side");
                    from_hospitals.insert((r, h));
                }
            }
        }
        assert_eq!(from_residents, from_hospitals);
        assert_eq!(inst.num_edges(), from_residents.len());
        let listed: BTreeSet<_> = inst.edges().collect();
        assert_eq!(listed, from_residents);
    }
}

#[test]
fn blocking_notions_nest_on_enumerated_matchings() {
    for inst in small_corpus(30, 6, 4, 12, 3, 2) {
        let quotas = inst.quota_vector();
        let matchings = enumerate_matchings(&inst, &quotas, 16).expect("within the cap");
        let step = (matchings.len() / 24).max(1);
        for m in matchings.iter().step_by(step) {
            let pair_set = |notion| {
                blocking_pairs(&inst, &quotas, m, notion)
                    .expect("enumerated matching is valid")
                    .pairs
                    .iter()
                    .map(|p| (p.resident, p.hospital))
                    .collect::<BTreeSet<_>>()
            };
            let weak = pair_set(BlockingNotion::Weak);
            let strong = pair_set(BlockingNotion::Strong);
            let sup = pair_set(BlockingNotion::Super);
            assert!(weak.is_subset(&strong), "a weakly blocking pair must block strongly");
            assert!(strong.is_subset(&sup), "a strongly blocking pair must block in the super sense");
            // Strict resident lists collapse the super notion onto the strong one.
            assert_eq!(strong, sup);
        }
    }
}

#[test]
fn solver_existence_and_optimality_match_the_search() {
    for inst in small_corpus(60, 6, 4, 12, 3, 2) {
        for quotas in degree_box_vectors(&inst) {
            let all = all_strongly_stable_search(&inst, &quotas);
            match solve_strong(&inst, &quotas) {
                Some(m) => {
                    assert!(blocking_pairs(&inst, &quotas, &m, BlockingNotion::Strong)
                        .expect("solver output is valid")
                        .is_stable());
                    assert!(all.contains(&m), "solver output missing from the stable set");
                    for other in &all {
                        assert!(
                            pointwise_at_least(&inst, &m, other),
                            "solver output is not resident-optimal"
                        );
                    }
                }
                None => assert!(all.is_empty(), "solver missed a strongly stable matching"),
            }
        }
    }
}

#[test]
fn pruned_search_agrees_with_exhaustive_enumeration() {
    let corpora = [small_corpus(12, 6, 4, 12, 3, 2), small_corpus(20, 5, 4, 9, 3, 2)];
    for inst in corpora.into_iter().flatten() {
        for quotas in degree_box_vectors(&inst) {
            let mut enumerated = all_strongly_stable(&inst, &quotas, 16).expect("within the cap");
            enumerated.sort_unstable();
            assert_eq!(all_strongly_stable_search(&inst, &quotas), enumerated);
        }
    }
}

#[test]
fn proposal_order_never_changes_the_matching() {
    for (i, inst) in small_corpus(40, 6, 4, 16, 3, 2).into_iter().enumerate() {
        let quotas = inst.quota_vector();
        let base = solve_strong(&inst, &quotas);
        for s in 0..8u64 {
            let order = shuffled(inst.residents(), s.wrapping_mul(0x9e37_79b9) + i as u64);
            assert_eq!(solve_strong_with_order(&inst, &quotas, &order), base);
        }
    }
}

#[test]
fn minsum_matches_the_oracle_and_ignores_scheduling_order() {
    let cfg = OracleConfig { mode: FeasibilityMode::Fast, ..OracleConfig::default() };
    for (i, inst) in small_corpus(80, 6, 4, 12, 3, 2).into_iter().enumerate() {
        let sol = minsum_augment(&inst);
        assert!(blocking_pairs(&inst, &sol.quotas, &sol.matching, BlockingNotion::Strong)
            .expect("solution is a valid matching")
            .is_stable());
        assert!(sol.total_increase <= first_choice_excess(&inst));
        let brute = brute_minsum(&inst, &cfg).expect("box within budget");
        assert_eq!(brute.optimum, Some(sol.total_increase));

        let base_loads = loads(&inst, &sol.matching);
        for s in 0..6u64 {
            let order = shuffled(inst.hospitals(), s * 131 + i as u64);
            let again = minsum_augment_with_order(&inst, &order);
            assert_eq!(again.total_increase, sol.total_increase);
            assert_eq!(again.matched_residents, sol.matched_residents);
            assert_eq!(again.under_hospitals, sol.under_hospitals);
            let other_loads = loads(&inst, &again.matching);
            for &h in &sol.under_hospitals {
                assert_eq!(other_loads[h.idx()], base_loads[h.idx()]);
            }
        }
    }
}

#[test]
fn residents_matched_by_minsum_do_no_worse_in_any_augmentation() {
    for inst in small_corpus(30, 5, 4, 10, 3, 2) {
        let sol = minsum_augment(&inst);
        let matched: Vec<(RId, u32)> = sol
            .matching
            .iter()
            .filter_map(|(r, h)| {
                h.map(|h| (r, inst.resident_rank(r, h).expect("matched along an edge")))
            })
            .collect();
        // Quotas past a hospital's degree change nothing, so the degree box
        // covers every augmentation up to equivalence.
        for quotas in degree_box_vectors(&inst) {
            for alt in all_strongly_stable_search(&inst, &quotas) {
                for &(r, here) in &matched {
                    assert!(
                        rank_or_worst(&inst, r, &alt) <= here,
                        "a resident the greedy pass matches must do at least as well \
                         in every augmentation that admits a stable matching"
                    );
                }
            }
        }
    }
}

fn pick_forced(inst: &Instance, index: usize) -> Option<ForcedEdges> {
    let edges = edge_list(inst);
    if edges.is_empty() {
        return None;
    }
    let (r0, h0) = edges[index % edges.len()];
    let mut picks = vec![(r0, h0)];
    if index % 2 == 1 {
        if let Some(&(r1, h1)) = edges.iter().rev().find(|&&(r, _)| r != r0) {
            picks.push((r1, h1));
        }
    }
    ForcedEdges::new(inst, picks).ok()
}

#[test]
fn forced_pipeline_agrees_with_the_oracle() {
    let cfg = OracleConfig::default();
    let mut solutions = 0usize;
    let mut infeasibles = 0usize;
    for (i, inst) in small_corpus(35, 6, 4, 12, 3, 2).into_iter().enumerate() {
        let Some(forced) = pick_forced(&inst, i) else { continue };
        let brute = brute_minsum_fe(&inst, &forced, &cfg).expect("within the cap");
        match minsum_fe(&inst, &forced).expect("output verification holds") {
            FeOutcome::Solution(s) => {
                solutions += 1;
                assert_eq!(brute.optimum, Some(s.total_increase));
                for &(r, h) in forced.edges() {
                    assert_eq!(s.matching.assignment(r), Some(h));
                }
                assert!(blocking_pairs(&inst, &s.quotas, &s.matching, BlockingNotion::Strong)
                    .expect("solution is valid")
                    .is_stable());
            }
            FeOutcome::Infeasible(_) => {
                infeasibles += 1;
                assert_eq!(brute.optimum, None, "declared infeasible but the oracle found a vector");
            }
        }
    }
    assert!(solutions >= 5, "corpus exercises too few solvable cases: {solutions}");
    assert!(infeasibles >= 3, "corpus exercises too few infeasible cases: {infeasibles}");
}

#[test]
fn pruning_only_deletes_edges_no_stable_solution_uses() {
    for (i, inst) in small_corpus(15, 5, 4, 10, 3, 2).into_iter().enumerate() {
        let Some(forced) = pick_forced(&inst, i) else { continue };
        let PruneOutcome::Pruned(pr) = prune(&inst, &forced) else { continue };
        let q: BTreeSet<(RId, HId)> = forced.edges().iter().copied().collect();
        for quotas in degree_box_vectors(&inst) {
            for m in all_strongly_stable_search(&inst, &quotas) {
                if !q.iter().all(|&(r, h)| m.assignment(r) == Some(h)) {
                    continue;
                }
                let used: BTreeSet<(RId, HId)> = m
                    .iter()
                    .filter_map(|(r, h)| h.map(|h| (r, h)))
                    .filter(|pair| pr.deleted.contains(pair))
                    .collect();
                assert_eq!(
                    used, q,
                    "a stable solution through the forced set uses a pruned edge"
                );
            }
        }
    }
}

#[test]
fn budget_solver_dominates_every_stable_matching_in_its_box() {
    for ell in [1u32, 2] {
        let mut boundary = 0usize;
        for inst in small_corpus(40, 6, 4, 12, ell + 1, 2) {
            if inst.max_tie_length() == ell + 1 {
                boundary += 1;
            }
            let sol = minmax_bt(&inst, ell).expect("tie lengths satisfy the budget");
            assert_eq!(sol.ell, ell);
            assert!(sol.max_increase <= ell);
            for h in inst.hospitals() {
                assert!(sol.quotas[h] >= inst.quota(h));
                assert!(sol.quotas[h] - inst.quota(h) <= ell);
            }
            assert!(blocking_pairs(&inst, &sol.quotas, &sol.matching, BlockingNotion::Strong)
                .expect("solution is valid")
                .is_stable());
            for quotas in SearchBox::ell_capped(&inst, ell).collect_vectors() {
                for alt in all_strongly_stable_search(&inst, &quotas) {
                    assert!(
                        pointwise_at_least(&inst, &sol.matching, &alt),
                        "budget solver output must weakly beat every stable matching in its box"
                    );
                    assert!(sol.matching.matched_count() >= alt.matched_count());
                }
            }
        }
        assert!(boundary >= 5, "corpus never reaches the tie bound: {boundary}");
    }
}

#[test]
fn oracle_modes_agree_and_the_degree_cap_is_sound() {
    let base = OracleConfig::default();
    let fast = OracleConfig { mode: FeasibilityMode::Fast, ..base };
    let slack = OracleConfig { extra_upper: 1, ..base };
    for inst in small_corpus(30, 5, 4, 10, 3, 2) {
        let vi = brute_minsum(&inst, &base).expect("within budget");
        let vf = brute_minsum(&inst, &fast).expect("within budget");
        assert!(vi.independent && !vf.independent);
        assert_eq!(vi.optimum, vf.optimum);
        assert_eq!(vi.witnesses, vf.witnesses);

        let vs = brute_minsum(&inst, &slack).expect("within budget");
        assert_eq!(
            vs.optimum, vi.optimum,
            "extra headroom above the degree cap must not find a cheaper augmentation"
        );

        for w in &vi.witnesses {
            for m in &w.matchings {
                assert!(blocking_pairs(&inst, &w.quotas, m, BlockingNotion::Strong)
                    .expect("witness is valid")
                    .is_stable());
            }
        }

        let ei = brute_min_ell(&inst, &base).expect("within budget");
        let ef = brute_min_ell(&inst, &fast).expect("within budget");
        assert_eq!(ei.optimum, ef.optimum);
        assert_eq!(ei.witnesses, ef.witnesses);
    }
}

fn multisets(n_types: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    'outer: loop {
        out.push(cur.clone());
        let mut j = k;
        while j > 0 {
            j -= 1;
            if cur[j] + 1 < n_types {
                let v = cur[j] + 1;
                for slot in &mut cur[j..] {
                    *slot = v;
                }
                continue 'outer;
            }
        }
        return out;
    }
}

/// Every monotone formula with at most 4 variables, at most 4 clauses over
/// distinct variable triples, and at most 3 occurrences per variable.
fn small_formula_family() -> Vec<Mono3SatFormula> {
    let mut formulas = Vec::new();
    for num_vars in [3u32, 4] {
        let types: Vec<[u32; 3]> = if num_vars == 3 {
            vec![[1, 2, 3]]
        } else {
            vec![[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]
        };
        for k in 1..=4usize {
            for pick in multisets(types.len(), k) {
                let clauses: Vec<[u32; 3]> = pick.iter().map(|&i| types[i]).collect();
                let f = Mono3SatFormula::new(num_vars, clauses).expect("well-formed clauses");
                if (1..=num_vars).all(|v| f.occurrences(v) <= 3) {
                    formulas.push(f);
                }
            }
        }
    }
    formulas
}

#[test]
fn weighted_reduction_tracks_one_in_three_satisfiability() {
    let fast = OracleConfig {
        mode: FeasibilityMode::Fast,
        max_checks: 1 << 21,
        ..OracleConfig::default()
    };
    let formulas = small_formula_family();
    assert!(formulas.len() >= 38, "family too small: {}", formulas.len());

    let mut sat_count = 0usize;
    let mut unsat_count = 0usize;
    for f in &formulas {
        let g = gen_mincost_instance(f).expect("occurrence bound holds");
        let inst = &g.instance;
        assert!(verify_certificates(&g).expect("certificates present").all_pass());
        assert!(
            solve_strong(inst, &inst.quota_vector()).is_none(),
            "no gadget admits a stable matching before augmentation"
        );
        let verdict = brute_min_cost(inst, &inst.costs_or(1), &fast).expect("within budget");
        let solutions = sat_solutions(f, SatMode::OneInThree).expect("few variables");
        if solutions.is_empty() {
            unsat_count += 1;
            assert_ne!(
                verdict.optimum,
                Some(0),
                "zero-cost augmentation of an unsatisfiable formula"
            );
        } else {
            sat_count += 1;
            assert_eq!(verdict.optimum, Some(0));
            for w in &verdict.witnesses {
                for m in &w.matchings {
                    let assign = decode_mincost_assignment(&g, f, m).expect("witness decodes");
                    assert!(solutions.contains(&assign), "decoded assignment is not valid");
                }
            }
        }
    }
    assert!(
        sat_count >= 10 && unsat_count >= 1,
        "family must exercise both directions: {sat_count} satisfiable, {unsat_count} not"
    );

    // Cross-check the smallest gadgets in the slower independent mode.
    let ind = OracleConfig { max_checks: 1 << 21, ..OracleConfig::default() };
    for f in formulas.iter().filter(|f| f.clauses().len() <= 2) {
        let g = gen_mincost_instance(f).expect("occurrence bound holds");
        let costs = g.instance.costs_or(1);
        let vi = brute_min_cost(&g.instance, &costs, &ind).expect("within budget");
        let vf = brute_min_cost(&g.instance, &costs, &fast).expect("within budget");
        assert_eq!(vi.optimum, vf.optimum);
        assert_eq!(vi.witnesses, vf.witnesses);
    }
}

#[test]
fn capacity_reduction_certifies_not_all_equal_instances() {
    let fast = OracleConfig {
        mode: FeasibilityMode::Fast,
        max_checks: 1 << 17,
        ..OracleConfig::default()
    };
    let variants: Vec<Vec<[u32; 3]>> = vec![
        vec![[1, 2, 3], [1, 2, 3], [1, 2, 3], [1, 2, 3]],
        vec![[1, 2, 3], [2, 3, 1], [3, 1, 2], [1, 2, 3]],
        vec![[1, 2, 3], [1, 3, 2], [2, 1, 3], [3, 2, 1]],
    ];
    for (i, clauses) in variants.into_iter().enumerate() {
        let f = Mono3SatFormula::new(3, clauses).expect("well-formed clauses");
        let solutions = sat_solutions(&f, SatMode::Nae).expect("few variables");
        assert!(!solutions.is_empty());
        for rp in [false, true] {
            if rp && i > 0 {
                continue; // one resident-perfect run keeps the sweep quick
            }
            let g = gen_cap12_instance(&f, rp).expect("every variable occurs four times");
            let inst = &g.instance;
            assert!(verify_certificates(&g).expect("certificates present").all_pass());
            assert!(solve_strong(inst, &inst.quota_vector()).is_none());

            let verdict = brute_min_ell(inst, &fast).expect("within budget");
            assert_eq!(
                verdict.optimum,
                Some(1),
                "raising single caps by one must suffice for a satisfiable formula"
            );
            assert!(verdict.feasibility_checks <= 1 << 16);
            assert!(!verdict.witnesses.is_empty());
            for w in &verdict.witnesses {
                let assign = decode_cap12_assignment(&g, &f, &w.quotas).expect("witness decodes");
                assert!(solutions.contains(&assign), "decoded assignment is not not-all-equal");
                if rp {
                    for m in &w.matchings {
                        assert_eq!(
                            m.matched_count(),
                            inst.num_residents(),
                            "the resident-perfect variant must match everyone"
                        );
                    }
                }
            }
        }
    }
}
