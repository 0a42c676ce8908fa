//! Acceptance suite. Each criterion prints one PASS or FAIL line with its
//! wall time; the process exits non-zero if any criterion fails or runs
//! past its limit.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gapcover::formulas::{max_sat, random_3sat5, Assignment, CnfFormula, Sat5Formula};
use gapcover::harness::{from_jsonl, run_pipeline, to_jsonl, verify_artifact, PipelineConfig};
use gapcover::projection_games::{
    agreement_soundness, best_value, list_agreement_soundness, plant_satisfying_labeling, random_biregular_game,
    ProjectionGame,
};
use gapcover::proof_systems::{
    balanced_code, clause_variable_game, game_value_exact, parallel_repeat, strategies_from_assignment, KProverGame,
    TwoProverGame,
};
use gapcover::reductions::{
    check_cover_seed, check_set_contain, feige_reduce, feige_witness, ly_reduce, moshkovitz_reduce, LyInstanceMap,
};
use gapcover::set_systems::{
    build_anti_universal, build_universal, partition_from_anti_universal, special_from_universal,
    verify_anti_universal, verify_partition, verify_special, verify_universal, PartitionSystem,
};
use gapcover::setcover::{
    exact_cover, greedy_cover, random_instance, verify_cover, within_greedy_bound, SetCoverInstance,
};
use gapcover::Fraction;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn satisfiable_formulas() -> Result<Vec<(Sat5Formula, Assignment)>, String> {
    let mut out = Vec::new();
    for n in [3, 6] {
        for seed in 0..12 {
            let f = ok(random_3sat5(n, seed))?;
            let ms = ok(max_sat(f.formula()))?;
            if ms.best_count == f.num_clauses() {
                out.push((f, ms.witness));
            }
        }
    }
    Ok(out)
}

fn ly_instances() -> Result<Vec<(Sat5Formula, TwoProverGame, LyInstanceMap)>, String> {
    let sss = ok(special_from_universal(2, 2, 1))?;
    satisfiable_formulas()?
        .into_iter()
        .map(|(f, _)| {
            let game = ok(clause_variable_game(&f))?;
            let map = ok(ly_reduce(&game, &sss))?;
            Ok((f, game, map))
        })
        .collect()
}

fn ly_completeness() -> Result<String, String> {
    let all = satisfiable_formulas()?;
    ensure!(all.len() >= 20, "only {} satisfiable formulas", all.len());
    let sss = ok(special_from_universal(2, 2, 1))?;
    for (f, asg) in &all {
        let game = ok(clause_variable_game(f))?;
        let map = ok(ly_reduce(&game, &sss))?;
        let target = f.num_clauses() + f.num_vars();
        let ex = ok(exact_cover(&map.instance, None))?;
        ensure!(ex.optimal, "exact search did not finish");
        ensure!(ex.cover.len() == target, "OPT {} != |Q1|+|Q2| = {target}", ex.cover.len());
        let (s1, s2) = strategies_from_assignment(f, asg);
        let w = map.witness(&s1, &s2);
        ensure!(w.len() == target && ok(verify_cover(&map.instance, &w))?.is_none(), "witness does not cover");
    }
    Ok(format!("{} instances, OPT = |Q1|+|Q2|", all.len()))
}

fn ly_block_checks() -> Result<String, String> {
    let all = ly_instances()?;
    for (_, game, map) in &all {
        if let Some((r, a1)) = ok(check_cover_seed(map, game))? {
            return Err(format!("seed {r} is covered by S(q1, {a1}) and a single Q2 set"));
        }
        if let Some(cx) = ok(check_set_contain(map, game, 2))? {
            return Err(format!("block of seed {} covered by {:?}", cx.seed, cx.sets));
        }
    }
    Ok(format!("{} instances, d = 2", all.len()))
}

fn special_universal() -> Result<String, String> {
    for (m, d) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
        ensure!(ok(verify_universal(&ok(build_universal(m, d, 11))?))?.is_none(), "universal ({m},{d}) fails");
        let sys = ok(special_from_universal(m, d, 11))?;
        ensure!(ok(verify_special(&sys, d))?.is_none(), "special ({m},{d}) fails");
        for e in 0..sys.universe_size {
            ensure!(
                ok(verify_special(&sys.without_element(e), d))?.is_some(),
                "({m},{d}): deleting element {e} leaves the system special"
            );
        }
    }
    Ok("4 parameter pairs, every deletion caught".into())
}

fn anti_universal_partitions() -> Result<String, String> {
    for (n, k, b) in [(3, 2, 3), (4, 2, 2), (4, 3, 3)] {
        let fam = ok(build_anti_universal(n, k, b, 3))?;
        ensure!(ok(verify_anti_universal(&fam))?.is_none(), "anti-universal ({n},{k},{b}) fails");
    }
    for (l, k, d) in [(2, 2, 2), (4, 2, 3)] {
        let ps = ok(partition_from_anti_universal(l, k, d, 3))?;
        ensure!(ps.certified_d == d && ps.l() == l && ps.k == k, "partition ({l},{k},{d}) has wrong shape");
        ensure!(ok(verify_partition(&ps))?.is_none(), "partition ({l},{k},{d}) fails");
    }
    Ok("3 anti-universal families, 2 partition systems".into())
}

fn feige_completeness() -> Result<String, String> {
    let code = ok(balanced_code(2, 2, 1))?;
    let mut count = 0;
    for seed in 0..40u64 {
        if count == 10 {
            break;
        }
        let f = ok(random_3sat5(3, seed))?;
        let ms = ok(max_sat(f.formula()))?;
        if ms.best_count != f.num_clauses() {
            continue;
        }
        let kg = ok(KProverGame::new(f, code.clone()))?;
        let map = ok(feige_reduce(&kg, seed, 4, 2, 3))?;
        let w = feige_witness(&map, &kg, &ms.witness);
        let q = kg.query_count(0);
        ensure!(w.len() == 2 * q && w.len() == 30, "witness has {} sets, kQ = {}", w.len(), 2 * q);
        ensure!(ok(verify_cover(&map.instance, &w))?.is_none(), "witness does not cover (formula {seed})");
        let costs = map.seed_costs(&kg, &w);
        ensure!(costs.iter().all(|&c| c == 2), "a seed block meets {:?} sets", costs.iter().find(|&&c| c != 2));
        count += 1;
    }
    ensure!(count == 10, "only {count} satisfiable formulas");
    Ok("10 formulas, kQ = 30, every block meets k = 2 sets".into())
}

fn moshkovitz_games() -> Result<Vec<ProjectionGame>, String> {
    let mut games = Vec::new();
    for seed in 0..24u64 {
        let (a, sa) = if seed % 3 == 0 { (2, 2) } else { (3, 3) };
        let pg = ok(random_biregular_game(a, a, 2, 2, sa, 2, seed))?;
        games.push(if seed % 2 == 0 { plant_satisfying_labeling(&pg, seed + 1000).0 } else { pg });
    }
    Ok(games)
}

fn moshkovitz_completeness() -> Result<String, String> {
    let ps = ok(PartitionSystem::full_product(2, 2))?;
    let games = moshkovitz_games()?;
    let mut satisfiable = 0;
    for (i, pg) in games.iter().enumerate() {
        let ag = ok(agreement_soundness(pg))?.value;
        let la = ok(list_agreement_soundness(pg, 2))?.value;
        ensure!(la <= ag * Fraction::from(4), "game {i}: la(2) = {la} > 4 * {ag}");
        let best = ok(best_value(pg))?;
        if best.value != Fraction::from(1) {
            continue;
        }
        satisfiable += 1;
        let map = ok(moshkovitz_reduce(pg, &ps))?;
        let w = map.witness(&best.witness);
        ensure!(w.len() == pg.a_count, "game {i}: witness has {} sets", w.len());
        ensure!(ok(verify_cover(&map.instance, &w))?.is_none(), "game {i}: witness does not cover");
        let ex = ok(exact_cover(&map.instance, None))?;
        ensure!(ex.optimal && ex.cover.len() <= pg.a_count, "game {i}: exact cover {}", ex.cover.len());
    }
    ensure!(satisfiable >= 12, "only {satisfiable} satisfiable games");
    Ok(format!("{} games ({satisfiable} satisfiable), la(2) <= 4 ag", games.len()))
}

/// Acceptance bitmask (bit `(r·2 + a1)·|A2| + a2`), `|A2|`, `v`, `v(G²)`.
/// Both values come from a full enumeration of both provers' tables.
type Ratio = (u64, u64);

const REPETITION_GAMES: [(u64, usize, Ratio, Ratio); 10] = [
    (0x52e6, 2, (3, 4), (5, 8)),
    (0xc5c, 2, (3, 4), (9, 16)),
    (0x128b, 2, (3, 4), (9, 16)),
    (0x1818, 2, (1, 2), (1, 4)),
    (0xed9, 2, (3, 4), (9, 16)),
    (0x81e7, 2, (3, 4), (9, 16)),
    (0x99950, 3, (3, 4), (9, 16)),
    (0x1600a3, 3, (1, 2), (3, 8)),
    (0x11e20b, 3, (3, 4), (9, 16)),
    (0x3d9c17, 3, (3, 4), (5, 8)),
];

fn repetition_sandwich() -> Result<String, String> {
    for &(mask, a2n, (vn, vd), (wn, wd)) in &REPETITION_GAMES {
        let g = ok(TwoProverGame::from_predicate(
            vec![[0, 0], [0, 1], [1, 0], [1, 1]],
            [2, 2],
            [2, a2n],
            |r, a1, a2| mask >> ((r * 2 + a1) * a2n + a2) & 1 == 1,
        ))?;
        let v = ok(game_value_exact(&g))?.value;
        let v2 = ok(game_value_exact(&ok(parallel_repeat(&g, 2))?))?.value;
        ensure!(v < Fraction::from(1), "game {mask:#x} has value 1");
        ensure!(v * v <= v2 && v2 <= v, "game {mask:#x}: v = {v}, v(G^2) = {v2}");
        ensure!(v == Fraction::new(vn, vd) && v2 == Fraction::new(wn, wd), "game {mask:#x}: {v}, {v2} differ from reference");
    }
    Ok("10 games, v^2 <= v(G^2) <= v".into())
}

fn greedy_bound() -> Result<String, String> {
    let mut checked = 0;
    let mut check = |inst: &SetCoverInstance| -> Result<(), String> {
        let g = ok(greedy_cover(inst))?;
        let ex = ok(exact_cover(inst, None))?;
        ensure!(ex.optimal, "exact search did not finish");
        ensure!(ok(verify_cover(inst, &g))?.is_none(), "greedy cover does not cover");
        ensure!(
            within_greedy_bound(g.len(), ex.cover.len(), inst.universe_size),
            "greedy {} > H({}) * {}",
            g.len(),
            inst.universe_size,
            ex.cover.len()
        );
        checked += 1;
        Ok(())
    };
    for i in 0..200u64 {
        let n = 4 + (i % 17) as usize;
        let density = 0.15 + 0.05 * (i % 5) as f64;
        check(&ok(random_instance(n, n + (i % 7) as usize, density, i))?)?;
    }
    for (_, _, map) in ly_instances()? {
        check(&map.instance)?;
    }
    let ps = ok(PartitionSystem::full_product(2, 2))?;
    for pg in moshkovitz_games()? {
        if let Ok(map) = moshkovitz_reduce(&pg, &ps) {
            check(&map.instance)?;
        }
    }
    Ok(format!("{checked} instances (200 random, rest from LY and Moshkovitz)"))
}

/// Unsatisfiable 3SAT-5 formulas found by local search; MAX-SAT values from
/// an exhaustive count over all assignments.
const UNSAT_9: [[i64; 3]; 15] = [
    [1, 7, 8], [-8, 6, 9], [-3, 1, -8], [-2, -4, -5], [9, 3, 8], [6, 3, -7], [-1, 7, 2], [-9, -8, 6],
    [-1, -2, 4], [-9, 5, -4], [-7, 4, -3], [2, -7, -5], [9, 5, -4], [2, 5, -6], [3, 1, -6],
];
const UNSAT_12: [[i64; 3]; 20] = [
    [-3, -8, 11], [6, 3, -12], [1, -8, 10], [-2, 11, -12], [-1, -5, 10], [9, -12, -11], [6, -9, -7],
    [-2, -4, -5], [-2, 12, 9], [-10, 3, -8], [5, 4, 7], [4, 6, 2], [-3, -6, -7], [1, 8, -4], [-10, -11, -9],
    [11, -1, 8], [9, 12, 2], [-7, -6, 3], [-5, 1, 4], [10, 7, 5],
];

fn clause_variable_value() -> Result<String, String> {
    let fixture = |n: usize, clauses: &[[i64; 3]]| -> Result<Sat5Formula, String> {
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        ok(Sat5Formula::new(ok(CnfFormula::from_dimacs_clauses(n, &refs))?))
    };
    let mut cases: Vec<(Sat5Formula, Option<usize>)> =
        (0..10).map(|s| ok(random_3sat5(3, s)).map(|f| (f, None))).collect::<Result<_, _>>()?;
    cases.push((fixture(9, &UNSAT_9)?, Some(14)));
    cases.push((fixture(12, &UNSAT_12)?, Some(19)));
    let mut deficits = 0;
    for (f, expected_best) in &cases {
        let ms = ok(max_sat(f.formula()))?;
        if let Some(b) = expected_best {
            ensure!(ms.best_count == *b, "MAX-SAT {} differs from reference {b}", ms.best_count);
        }
        let m = f.num_clauses() as u64;
        let eps = Fraction::new(m - ms.best_count as u64, m);
        let target = Fraction::from(1) - eps / Fraction::from(3);
        let game = ok(clause_variable_game(f))?;
        let (s1, s2) = strategies_from_assignment(f, &ms.witness);
        ensure!(ok(game.acceptance(&s1, &s2))? == target, "assignment strategy misses 1 - eps/3");
        match game_value_exact(&game) {
            Ok(v) => ensure!(v.value == target, "n = {}: value {} != {target}", f.num_vars(), v.value),
            Err(gapcover::Error::BudgetExceeded { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
        deficits += usize::from(eps > Fraction::from(0));
    }
    Ok(format!("{} formulas ({deficits} with positive deficit), value = 1 - eps/3", cases.len()))
}

fn pipeline_configs(dir: &Path) -> Vec<(&'static str, String)> {
    let d = |name: &str| dir.join(name).display().to_string();
    vec![
        ("ly", format!("pipeline = \"ly\"\noutput_dir = \"{}\"\nseeds = [0, 1, 2]\n\n[ly]\nn = 3\nd = 2\ngadget_seed = 1\n", d("ly"))),
        (
            "feige",
            format!(
                "pipeline = \"feige\"\noutput_dir = \"{}\"\nseeds = [0]\nsolve = \"greedy\"\n\n[feige]\nn = 3\nrho = 2\nk = 2\nd = 3\ncode_seed = 1\nps_seed = 2\n",
                d("feige")
            ),
        ),
        (
            "moshkovitz",
            format!(
                "pipeline = \"moshkovitz\"\noutput_dir = \"{}\"\nseeds = [0, 1]\n\n[moshkovitz]\na_count = 3\nb_count = 3\nd_a = 2\nd_b = 2\nsigma_a = 3\nsigma_b = 2\nplant = true\n",
                d("moshkovitz")
            ),
        ),
    ]
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism_round_trip() -> Result<String, String> {
    let tmp = ok(tempfile::tempdir())?;
    let mut artifacts = 0;
    for (name, toml) in pipeline_configs(tmp.path()) {
        let cfg = ok(PipelineConfig::from_toml(&toml))?;
        let first = ok(run_pipeline(&cfg))?;
        ensure!(first.passed(), "{name}: {:?}", first.failures);
        let before = snapshot(&cfg.output_dir);
        ok(fs::remove_dir_all(&cfg.output_dir))?;
        ensure!(ok(run_pipeline(&cfg))?.passed(), "{name}: rerun failed");
        ensure!(before == snapshot(&cfg.output_dir), "{name}: rerun differs");
        for path in first.artifacts.iter().filter(|p| p.extension().is_some_and(|e| e == "jsonl")) {
            let text = ok(fs::read_to_string(path))?;
            ensure!(ok(to_jsonl(&ok(from_jsonl(&text))?))? == text, "{} does not round-trip", path.display());
            let v = ok(verify_artifact(path))?;
            ensure!(v.ok, "{}: {}", path.display(), v.detail);
            artifacts += 1;
        }
    }
    Ok(format!("3 pipelines byte-identical, {artifacts} artifacts round-trip and verify"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, u64); 10] = [
        ("LY completeness", ly_completeness, 60),
        ("LY coverseed / setcontain", ly_block_checks, 30),
        ("special / universal equivalence", special_universal, 30),
        ("anti-universal and partition gadgets", anti_universal_partitions, 60),
        ("Feige completeness", feige_completeness, 120),
        ("Moshkovitz completeness and list agreement", moshkovitz_completeness, 60),
        ("repetition sandwich", repetition_sandwich, 120),
        ("greedy H(n) bound", greedy_bound, 60),
        ("clause/variable game value", clause_variable_value, 300),
        ("determinism and round trip", determinism_round_trip, 30),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > Duration::from_secs(limit) => Err(format!("over the {limit}s limit")),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!("criterion {:>2} {tag} {name} ({:.2}s / {limit}s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
