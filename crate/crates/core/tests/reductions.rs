use gapcover::formulas::{max_sat, random_3sat5, Sat5Formula};
use gapcover::projection_games::{
    best_value, plant_satisfying_labeling, random_biregular_game, ProjectionGame,
};
use gapcover::proof_systems::{balanced_code, clause_variable_game, strategies_from_assignment, KProverGame};
use gapcover::reductions::*;
use gapcover::set_systems::{special_from_universal, PartitionSystem, SpecialSetSystem};
use gapcover::setcover::{exact_cover, greedy_cover, verify_cover};
use gapcover::Fraction;

fn satisfiable(n: usize, seed: u64) -> (Sat5Formula, gapcover::formulas::Assignment) {
    let f = random_3sat5(n, seed).unwrap();
    let ms = max_sat(f.formula()).unwrap();
    assert_eq!(ms.best_count, f.num_clauses(), "seed {seed} not satisfiable");
    (f, ms.witness)
}

#[test]
fn ly_universe_size() {
    let (f, _) = satisfiable(3, 0);
    let sss = special_from_universal(2, 2, 1).unwrap();
    assert_eq!(sss.universe_size, 4);
    let map = ly_reduce(&clause_variable_game(&f).unwrap(), &sss).unwrap();
    assert_eq!(map.instance.universe_size, 60);
    assert_eq!(map.instance.subsets.len(), 5 * 8 + 3 * 2);
    assert!(map.unanswered_seeds.is_empty());
    for i in 0..map.instance.subsets.len() {
        let (p, q, a) = map.set_key(i);
        assert_eq!(map.set_index(p, q, a), i);
    }
}

#[test]
fn ly_completeness_and_block_checks() {
    let sss = special_from_universal(2, 2, 1).unwrap();
    for seed in 0..4 {
        let (f, asg) = satisfiable(3, seed);
        let game = clause_variable_game(&f).unwrap();
        let map = ly_reduce(&game, &sss).unwrap();
        let (s1, s2) = strategies_from_assignment(&f, &asg);
        let w = map.witness(&s1, &s2);
        assert_eq!(w.len(), 8);
        assert_eq!(verify_cover(&map.instance, &w).unwrap(), None);
        let ex = exact_cover(&map.instance, None).unwrap();
        assert!(ex.optimal);
        assert_eq!(ex.cover.len(), 8);
        assert_eq!(check_cover_seed(&map, &game).unwrap(), None);
        assert_eq!(check_set_contain(&map, &game, 2).unwrap(), None);

        let diag = ly_cost_diagnostic(&map, &game, &ex.cover, 2).unwrap();
        assert!(diag.holds, "{diag:?}");
        let g = greedy_cover(&map.instance).unwrap();
        assert!(ly_cost_diagnostic(&map, &game, &g, 2).unwrap().holds);
    }
}

#[test]
fn ly_witness_diagnostic_is_tight() {
    let sss = special_from_universal(2, 2, 1).unwrap();
    let (f, asg) = satisfiable(3, 5);
    let game = clause_variable_game(&f).unwrap();
    let map = ly_reduce(&game, &sss).unwrap();
    let (s1, s2) = strategies_from_assignment(&f, &asg);
    let diag = ly_cost_diagnostic(&map, &game, &map.witness(&s1, &s2), 2).unwrap();
    assert_eq!(diag.good_fraction, Fraction::new(1, 1));
    assert_eq!(diag.best_acceptance, Fraction::new(1, 1));
    assert_eq!(diag.bound, Fraction::new(1, 4));
}

#[test]
fn ly_detects_weak_special_system() {
    // C_0 = C_1, so C_0 together with the complement of C_1 covers B.
    let sss = SpecialSetSystem::new(4, vec![vec![0, 1], vec![0, 1]], 2).unwrap();
    let (f, _) = satisfiable(3, 0);
    let game = clause_variable_game(&f).unwrap();
    let map = ly_reduce(&game, &sss).unwrap();
    assert_eq!(check_cover_seed(&map, &game).unwrap(), None);
    let bad = check_set_contain(&map, &game, 2).unwrap().unwrap();
    assert_eq!(bad.seed, 0);
    assert_eq!(bad.sets.len(), 2);
}

#[test]
fn ly_rejects_alphabet_mismatch() {
    let (f, _) = satisfiable(3, 0);
    let sss = special_from_universal(3, 2, 1).unwrap();
    assert!(ly_reduce(&clause_variable_game(&f).unwrap(), &sss).is_err());
}

fn feige_game(seed: u64) -> (KProverGame, gapcover::formulas::Assignment) {
    let (f, asg) = satisfiable(3, seed);
    (KProverGame::new(f, balanced_code(2, 2, seed).unwrap()).unwrap(), asg)
}

#[test]
fn feige_completeness() {
    let (kg, asg) = feige_game(0);
    assert_eq!(kg.query_count(0), 15);
    assert_eq!(kg.query_count(1), 15);
    let map = feige_reduce(&kg, 7, 4, 2, 3).unwrap();
    assert_eq!(map.num_seeds(), 225);
    assert_eq!(map.instance.universe_size, map.partition_systems.iter().map(|p| p.m).sum::<usize>());
    let w = feige_witness(&map, &kg, &asg);
    assert_eq!(w.len(), 30);
    assert_eq!(verify_cover(&map.instance, &w).unwrap(), None);
    assert!(map.seed_costs(&kg, &w).iter().all(|&c| c == 2));
    let diag = feige_cost_diagnostic(&map, &kg, &w).unwrap();
    assert_eq!(diag.good_fraction, Fraction::new(1, 1));
    assert_eq!(diag.weak_acceptance, 1.0);
    let g = greedy_cover(&map.instance).unwrap();
    assert!(feige_cost_diagnostic(&map, &kg, &g).unwrap().holds);
}

#[test]
fn feige_is_reproducible_and_checks_parameters() {
    let (kg, _) = feige_game(1);
    let a = feige_reduce(&kg, 3, 4, 2, 3).unwrap();
    assert_eq!(a, feige_reduce(&kg, 3, 4, 2, 3).unwrap());
    assert!(feige_reduce(&kg, 3, 8, 2, 3).is_err());
    assert!(feige_reduce(&kg, 3, 4, 3, 3).is_err());
    for i in 0..a.instance.subsets.len() {
        let (q, ans, p) = a.set_key(i);
        assert_eq!(a.set_index(q, ans, p), i);
    }
}

fn tiny_pg(seed: u64) -> ProjectionGame {
    random_biregular_game(3, 3, 2, 2, 3, 2, seed).unwrap()
}

#[test]
fn moshkovitz_completeness_and_size() {
    let ps = PartitionSystem::full_product(2, 2).unwrap();
    for seed in 0..10 {
        let (pg, lab) = plant_satisfying_labeling(&tiny_pg(seed), seed + 100);
        let map = moshkovitz_reduce(&pg, &ps).unwrap();
        assert_eq!(map.instance.universe_size, ps.m * pg.b_count);
        let w = map.witness(&lab);
        assert_eq!(w.len(), pg.a_count);
        assert_eq!(verify_cover(&map.instance, &w).unwrap(), None);
        assert_eq!(exact_cover(&map.instance, None).unwrap().cover.len(), pg.a_count);
    }
}

#[test]
fn moshkovitz_unsatisfiable_needs_more_sets() {
    let ps = PartitionSystem::full_product(2, 2).unwrap();
    let mut found = 0;
    for seed in 0..200 {
        let pg = tiny_pg(seed);
        if best_value(&pg).unwrap().value == Fraction::new(1, 1) {
            continue;
        }
        let Ok(map) = moshkovitz_reduce(&pg, &ps) else { continue };
        let ex = exact_cover(&map.instance, None).unwrap();
        assert!(ex.optimal);
        assert!(ex.cover.len() > pg.a_count, "seed {seed}");
        found += 1;
    }
    assert!(found >= 2);
}

#[test]
fn moshkovitz_diagnostic_on_simple_graphs() {
    let ps = PartitionSystem::full_product(2, 2).unwrap();
    for seed in 0..40 {
        let pg = tiny_pg(seed);
        let Ok(map) = moshkovitz_reduce(&pg, &ps) else { continue };
        let ex = exact_cover(&map.instance, None).unwrap();
        let d = moshkovitz_cost_diagnostic(&map, &pg, &ex.cover).unwrap();
        if d.simple {
            assert!(d.violations.is_empty(), "seed {seed}: {d:?}");
        }
    }
}

#[test]
fn moshkovitz_padding_and_parameter_checks() {
    let ps = PartitionSystem::full_product(2, 2).unwrap();
    let (pg, lab) = plant_satisfying_labeling(&tiny_pg(0), 1);
    let map = moshkovitz_reduce_padded(&pg, &ps, 3).unwrap();
    assert_eq!(map.instance.universe_size, 3 * ps.m * pg.b_count);
    assert_eq!(verify_cover(&map.instance, &map.witness(&lab)).unwrap(), None);
    assert!(moshkovitz_reduce(&pg, &PartitionSystem::full_product(3, 2).unwrap()).is_err());
    assert!(moshkovitz_reduce(&pg, &PartitionSystem::full_product(2, 3).unwrap()).is_err());
}

#[test]
fn gap_reports() {
    let sss = special_from_universal(2, 2, 1).unwrap();
    let run = |seed: u64| {
        let (f, asg) = satisfiable(3, seed);
        let game = clause_variable_game(&f).unwrap();
        let map = ly_reduce(&game, &sss).unwrap();
        let (s1, s2) = strategies_from_assignment(&f, &asg);
        gap_report(&map, Some(&map.witness(&s1, &s2)), true, SolveMode::default()).unwrap()
    };
    let batch: Vec<GapReport> = (0..5).map(run).collect();
    assert_eq!(batch, (0..5).map(run).collect::<Vec<_>>());
    for r in &batch {
        assert_eq!(r.ratio_exact_witness, Some(1.0));
        assert_eq!(r.witness_verified, Some(true));
        assert_eq!(r.reduction, "lund-yannakakis");
    }

    let (kg, asg) = feige_game(0);
    let map = feige_reduce(&kg, 7, 4, 2, 3).unwrap();
    let w = feige_witness(&map, &kg, &asg);
    let r = gap_report(&map, Some(&w), true, SolveMode::GreedyOnly).unwrap();
    assert!(r.greedy_only);
    assert_eq!(r.exact_size, None);
    assert_eq!(r.ratio_exact_witness, None);
    assert_eq!(r.witness_size, Some(30));
}
