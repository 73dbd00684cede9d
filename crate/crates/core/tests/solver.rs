mod common;

use common::{graph, random_graph, random_instance, strict_gap_fixture};
use lineage_ilp::solve::{
    check_selection, extract_lineage, formulate, solve_bruteforce, solve_exact, solve_greedy, EndReason, ExactConfig,
    Selection, Status,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn exact_matches_brute_force_on_random_programs() {
    for i in 0..200 {
        let inst = random_instance(11, i);
        let a = solve_exact(&inst, &ExactConfig::default()).unwrap();
        let b = solve_bruteforce(&inst).unwrap();
        assert_eq!(
            a.status == Status::Infeasible,
            b.status == Status::Infeasible,
            "instance {i}"
        );
        if b.status != Status::Infeasible {
            assert_eq!(a.objective, b.objective, "instance {i}: {inst:?}");
            assert!(inst.violations(&a.assignment).is_empty());
            assert_eq!(a.status, Status::Optimal);
        }
    }
}

#[test]
fn graph_solutions_pass_the_checker_and_greedy_never_wins() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let g = random_graph(&mut rng);
        let inst = formulate(&g);
        let exact = solve_exact(&inst, &ExactConfig::default()).unwrap();
        let greedy = solve_greedy(&g);
        for sol in [&exact, &greedy] {
            let sel = Selection::from_assignment(&g, &sol.assignment).unwrap();
            assert!(check_selection(&g, &sel).is_empty(), "{:?}", check_selection(&g, &sel));
            assert!(inst.violations(&sol.assignment).is_empty());
            let forest = extract_lineage(&g, &sel).unwrap();
            assert_eq!(forest.num_proposals(), sel.nodes.len());
        }
        assert!(greedy.objective >= exact.objective);
    }
}

#[test]
fn strict_gap() {
    let g = strict_gap_fixture();
    let inst = formulate(&g);
    let exact = solve_exact(&inst, &ExactConfig::default()).unwrap();
    let brute = solve_bruteforce(&inst).unwrap();
    let greedy = solve_greedy(&g);
    assert_eq!(exact.objective, -42.0);
    assert_eq!(brute.objective, -42.0);
    assert_eq!(greedy.objective, -39.0);
}

#[test]
fn greedy_equals_exact_on_a_single_track() {
    let g = graph(
        &[(0, 0, -3.0), (1, 1, -3.0), (2, 2, -3.0), (3, 1, 2.0)],
        1.0,
        1.0,
        &[(0, 1, -2.0), (1, 2, -2.0), (0, 3, 1.0), (3, 2, 1.0)],
        &[],
        &[],
    );
    let exact = solve_exact(&formulate(&g), &ExactConfig::default()).unwrap();
    assert_eq!(solve_greedy(&g).objective, exact.objective);
    let sel = Selection::from_assignment(&g, &exact.assignment).unwrap();
    let forest = extract_lineage(&g, &sel).unwrap();
    assert_eq!(forest.tracks.len(), 1);
    assert_eq!(forest.tracks[0].proposals, vec![0, 1, 2]);
    assert_eq!(
        (forest.tracks[0].parent, forest.tracks[0].end),
        (None, EndReason::SequenceEnd)
    );
}

#[test]
fn greedy_divides_selected_parent() {
    let g = graph(
        &[(0, 0, -5.0), (1, 1, -5.0), (2, 2, -5.0), (3, 2, -5.0)],
        2.0,
        1.0,
        &[(0, 1, -3.0)],
        &[(1, 2, 3, -2.0)],
        &[],
    );
    let exact = solve_exact(&formulate(&g), &ExactConfig::default()).unwrap();
    let greedy = solve_greedy(&g);
    assert_eq!(exact.objective, -23.0);
    assert_eq!(greedy.objective, exact.objective);
    let sel = Selection::from_assignment(&g, &greedy.assignment).unwrap();
    let forest = extract_lineage(&g, &sel).unwrap();
    assert_eq!(forest.tracks.len(), 3);
    assert_eq!(forest.tracks[0].proposals, vec![0, 1]);
    assert_eq!(forest.tracks[0].end, EndReason::Division);
    assert_eq!(forest.tracks[1].parent, Some(1));
    assert_eq!(forest.tracks[2].parent, Some(1));
    assert_eq!(forest.tracks[1].proposals, vec![2]);
}

#[test]
fn empty_graph_everything_empty() {
    let g = graph(&[], 1.0, 1.0, &[], &[], &[]);
    assert_eq!(solve_greedy(&g).objective, 0.0);
    let s = solve_exact(&formulate(&g), &ExactConfig::default()).unwrap();
    assert_eq!(s.objective, 0.0);
    let forest = extract_lineage(&g, &Selection::default()).unwrap();
    assert!(forest.tracks.is_empty());
}

#[test]
fn infeasible_selection_is_rejected() {
    let g = strict_gap_fixture();
    let mut sel = Selection::default();
    sel.nodes.insert(0);
    assert!(!check_selection(&g, &sel).is_empty());
    assert!(extract_lineage(&g, &sel).is_err());
}

#[test]
fn exact_is_deterministic() {
    for i in 0..20 {
        let inst = random_instance(3, i);
        let a = solve_exact(&inst, &ExactConfig::default()).unwrap();
        let b = lineage_ilp::par::sequential(|| solve_exact(&inst, &ExactConfig::default()).unwrap());
        assert_eq!(a, b);
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
    #[test]
    fn exact_never_worse_than_greedy_or_brute(seed in 0u64..u64::MAX) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng);
        let inst = formulate(&g);
        let exact = solve_exact(&inst, &ExactConfig::default()).unwrap();
        proptest::prop_assert!(solve_greedy(&g).objective >= exact.objective);
        if inst.num_vars() <= 24 {
            proptest::prop_assert_eq!(solve_bruteforce(&inst).unwrap().objective, exact.objective);
        }
    }
}
