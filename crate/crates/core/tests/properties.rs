mod common;

use std::collections::BTreeSet;

use cyberseg_core::ilp::{build_model, expected_row_count, expected_variable_count, validate_assignment, Assignment, IlpMode};
use cyberseg_core::{
    enumerate_candidates, remove_devices, score, score_bruteforce, solve_direct, solve_greedy_traced, solve_oracle,
    AttackSet, DeviceId, Graph, GreedyConfig, ObjectiveMode, SolveConfig,
};
use itertools::Itertools;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(DeviceId, DeviceId)> = (0..n as DeviceId).tuple_combinations().collect();
        let len = pairs.len();
        proptest::collection::vec(proptest::bool::weighted(0.35), len).prop_map(move |mask| {
            let conns = pairs.iter().zip(&mask).filter(|(_, &on)| on).map(|(&p, _)| p);
            Graph::from_ids(0..n as DeviceId, conns).unwrap()
        })
    })
}

fn instance_strategy(max_n: usize, max_a: usize) -> impl Strategy<Value = (Graph, AttackSet)> {
    graph_strategy(max_n).prop_flat_map(move |g| {
        let ids: Vec<DeviceId> = g.ids().collect();
        let cap = max_a.min(ids.len());
        (Just(g), proptest::sample::subsequence(ids, 0..=cap).prop_map(AttackSet::new))
    })
}

fn subset_of(g: &Graph) -> impl Strategy<Value = Vec<DeviceId>> {
    let ids: Vec<DeviceId> = g.ids().collect();
    let n = ids.len();
    proptest::sample::subsequence(ids, 0..=n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn component_score_matches_pairwise((g, a) in instance_strategy(10, 10)) {
        let n0 = g.device_count() as u64;
        prop_assert_eq!(score(&g, &a, n0).unwrap(), score_bruteforce(&g, &a, n0).unwrap());
    }

    #[test]
    fn pair_counts_partition_connected_pairs((g, a) in instance_strategy(10, 10)) {
        let r = score(&g, &a, g.device_count() as u64).unwrap();
        let total: u64 = cyberseg_core::components(&g, &a).iter().map(|c| c.summary.size * (c.summary.size - 1) / 2).sum();
        prop_assert_eq!(r.vulnerability + r.healthiness, total);
    }

    #[test]
    fn fewer_vulnerable_pairs_means_smaller_phi(
        ((g, a), seed) in (instance_strategy(9, 4), any::<u64>())
    ) {
        let n0 = g.device_count() as u64;
        let ids: Vec<DeviceId> = g.ids().collect();
        let mut rng = common::rng(seed);
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<DeviceId> {
            use rand::Rng;
            ids.iter().copied().filter(|_| rng.gen_bool(0.3)).collect()
        };
        let (c1, c2) = (pick(&mut rng), pick(&mut rng));
        let s = |c: &[DeviceId]| {
            let r = remove_devices(&g, c).unwrap();
            score(&r, &a.restricted_to(&r), n0).unwrap()
        };
        let (s1, s2) = (s(&c1), s(&c2));
        if s1.vulnerability < s2.vulnerability {
            prop_assert!(s1.phi < s2.phi);
        }
        prop_assert_eq!(s1.lexicographic_cmp(&s2), s1.phi.cmp(&s2.phi));
    }

    #[test]
    fn removing_healthy_device_never_raises_healthiness(
        ((g, a), pick) in (instance_strategy(10, 4), any::<prop::sample::Index>())
    ) {
        let healthy: Vec<DeviceId> = g.ids().filter(|&id| !a.contains(id)).collect();
        prop_assume!(!healthy.is_empty());
        let v = *pick.get(&healthy);
        let n0 = g.device_count() as u64;
        let before = score(&g, &a, n0).unwrap();
        let residual = remove_devices(&g, &[v]).unwrap();
        let after = score(&residual, &a, n0).unwrap();
        prop_assert!(after.healthiness <= before.healthiness);
    }

    #[test]
    fn batched_removal_composes(
        (g, c1, c2) in graph_strategy(10).prop_flat_map(|g| {
            let (s1, s2) = (subset_of(&g), subset_of(&g));
            (Just(g), s1, s2)
        })
    ) {
        let c2: Vec<DeviceId> = c2.into_iter().filter(|id| !c1.contains(id)).collect();
        let step = remove_devices(&remove_devices(&g, &c1).unwrap(), &c2).unwrap();
        let union: Vec<DeviceId> = c1.iter().chain(&c2).copied().collect();
        prop_assert_eq!(step, remove_devices(&g, &union).unwrap());
    }

    #[test]
    fn candidate_stream_is_ordered_binomial_family(n in 0usize..9, k in 0usize..5) {
        let eligible: Vec<DeviceId> = (0..n as DeviceId).map(|i| i * 3 + 1).collect();
        let got: Vec<Vec<DeviceId>> = enumerate_candidates(&eligible, k).collect();
        let expected: Vec<Vec<DeviceId>> = (0..=k.min(n))
            .flat_map(|s| eligible.iter().copied().combinations(s))
            .collect();
        let unique: BTreeSet<_> = got.iter().cloned().collect();
        prop_assert_eq!(unique.len(), got.len());
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn objective_never_grows_with_budget((g, a) in instance_strategy(9, 4)) {
        let mut last = i128::MAX;
        for k in 0..=4 {
            let sol = solve_direct(&g, &a, &SolveConfig::new(k)).unwrap();
            prop_assert!(sol.report.phi <= last);
            last = sol.report.phi;
        }
    }

    #[test]
    fn parallelism_does_not_change_the_answer((g, a) in instance_strategy(9, 4), k in 0usize..4) {
        let base = solve_direct(&g, &a, &SolveConfig::new(k).with_parallelism(1)).unwrap();
        for workers in [2, 4] {
            let other = solve_direct(&g, &a, &SolveConfig::new(k).with_parallelism(workers)).unwrap();
            prop_assert_eq!(&other.chosen, &base.chosen);
            prop_assert_eq!(other.report, base.report);
        }
    }

    #[test]
    fn empty_attack_set_deletes_nothing(g in graph_strategy(6), k in 0usize..4) {
        let a = AttackSet::empty();
        let oracle = solve_oracle(&g, &a, k, ObjectiveMode::Snpv).unwrap();
        prop_assert!(oracle.chosen.is_empty());
        let n0 = g.device_count() as u64;
        prop_assert_eq!(oracle.report, score(&g, &a, n0).unwrap());
    }

    #[test]
    fn budget_covering_attack_reaches_zero((g, a) in instance_strategy(8, 3)) {
        let oracle = solve_oracle(&g, &a, a.len(), ObjectiveMode::Snpv).unwrap();
        prop_assert_eq!(oracle.report.vulnerability, 0);
    }

    #[test]
    fn greedy_vulnerability_drops_monotonically((g, a) in instance_strategy(9, 4), k in 0usize..6, x in 1usize..3) {
        let (sol, trace) = solve_greedy_traced(&g, &a, &GreedyConfig::new(k, x)).unwrap();
        prop_assert!(sol.chosen.len() <= k);
        let baseline = score(&g, &a, g.device_count() as u64).unwrap().vulnerability;
        let mut last = baseline;
        for step in &trace {
            prop_assert!(step.vulnerability_after <= last);
            last = step.vulnerability_after;
        }
        prop_assert_eq!(sol.report.vulnerability, last);
        let evaluated: u64 = trace.iter().map(|s| s.subsets_evaluated).sum();
        prop_assert_eq!(sol.subsets_evaluated, evaluated);
    }

    #[test]
    fn greedy_candidate_accounting((g, a) in instance_strategy(9, 4), k in 0usize..6) {
        // each chunk evaluates sum_{i<=b} C(|eligible|, i) candidates
        let (_, trace) = solve_greedy_traced(&g, &a, &GreedyConfig::new(k, 2)).unwrap();
        let mut residual = g.clone();
        for step in &trace {
            let ra = a.restricted_to(&residual);
            let m = residual.device_count() - cyberseg_core::excludable_devices(&residual, &ra).len();
            let expected: u64 = (0..=step.budget.min(m)).map(|i| (0..m).combinations(i).count() as u64).sum();
            prop_assert_eq!(step.subsets_evaluated, expected);
            residual = remove_devices(&residual, &step.added).unwrap();
        }
    }

    #[test]
    fn direct_solution_certifies_against_ilp((g, a) in instance_strategy(7, 3), k in 0usize..4) {
        let sol = solve_direct(&g, &a, &SolveConfig::new(k)).unwrap();
        let model = build_model(&g, &a, k, IlpMode::Lexicographic).unwrap();
        prop_assert_eq!(model.row_count() as u64, expected_row_count(g.device_count() as u64, g.connection_count() as u64));
        prop_assert_eq!(model.variable_count() as u64, expected_variable_count(g.device_count() as u64));
        let asg = Assignment::from_cut_with_pairs(&g, &sol.chosen).unwrap();
        let report = validate_assignment(&model, &asg, &g, &a).unwrap();
        prop_assert!(report.violated_constraints.is_empty(), "{:?}", report.violated_constraints);
        prop_assert_eq!(report.objective_gap, 0);
        prop_assert_eq!(report.recomputed, sol.report);
    }
}

/// Minimum of the vulnerability-only model over every binary assignment.
fn exhaustive_ilp_minimum(g: &Graph, a: &AttackSet, k: usize) -> i128 {
    let model = build_model(g, a, k, IlpMode::VulnerabilityOnly).unwrap();
    let ids: Vec<DeviceId> = g.ids().collect();
    let pairs: Vec<(DeviceId, DeviceId)> = ids.iter().copied().tuple_combinations().collect();
    let vars = ids.len() + pairs.len();
    let mut best = i128::MAX;
    for bits in 0u64..(1 << vars) {
        let asg = Assignment {
            node_values: ids.iter().enumerate().map(|(i, &id)| (id, bits >> i & 1 == 1)).collect(),
            pair_values: Some(
                pairs
                    .iter()
                    .enumerate()
                    .map(|(p, &pair)| (pair, bits >> (ids.len() + p) & 1 == 1))
                    .collect(),
            ),
        };
        let report = validate_assignment(&model, &asg, g, a).unwrap();
        if report.violated_constraints.is_empty() {
            best = best.min(report.model_objective);
        }
    }
    best
}

#[test]
fn vulnerability_only_model_matches_cnpv_oracle() {
    let mut rng = common::rng(11);
    for _ in 0..40 {
        let (g, a, k) = common::random_instance(&mut rng, 4, 3, 3);
        let oracle = solve_oracle(&g, &a, k, ObjectiveMode::Cnpv).unwrap();
        assert_eq!(exhaustive_ilp_minimum(&g, &a, k), oracle.report.vulnerability as i128);
    }
}

#[test]
fn vulnerability_only_model_over_cut_assignments() {
    let mut rng = common::rng(12);
    for _ in 0..150 {
        let (g, a, k) = common::random_instance(&mut rng, 6, 4, 3);
        let model = build_model(&g, &a, k, IlpMode::VulnerabilityOnly).unwrap();
        let ids: Vec<DeviceId> = g.ids().collect();
        let mut best = i128::MAX;
        for size in 0..=k.min(ids.len()) {
            for cut in ids.iter().copied().combinations(size) {
                let r = validate_assignment(&model, &Assignment::from_cut(&g, &cut), &g, &a).unwrap();
                assert!(r.is_certified());
                best = best.min(r.model_objective);
            }
        }
        let oracle = solve_oracle(&g, &a, k, ObjectiveMode::Cnpv).unwrap();
        assert_eq!(best, oracle.report.vulnerability as i128);
    }
}

#[test]
fn over_budget_cut_violates_budget_row() {
    let g = Graph::from_ids(0..4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let a = AttackSet::new([0, 3]);
    let model = build_model(&g, &a, 1, IlpMode::Lexicographic).unwrap();
    let r = validate_assignment(&model, &Assignment::from_cut(&g, &[0, 3]), &g, &a).unwrap();
    assert_eq!(r.violated_constraints.len(), 1);
    assert_eq!(r.violated_constraints[0].row, "c1");
    assert_eq!(r.objective_gap, 0);
}
