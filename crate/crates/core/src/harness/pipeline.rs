//! Config-driven runs: generate → build → reduce → solve → verify → report.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::artifact::{verify_artifact, write_artifact, Artifact, Payload};
use super::report::write_csv;
use crate::error::{invalid, Error, Result};
use crate::formulas::{emit_dimacs, max_sat, random_3sat5, Sat5Formula};
use crate::projection_games::{best_value, plant_satisfying_labeling, random_biregular_game, Labeling};
use crate::proof_systems::{balanced_code, clause_variable_game, strategies_from_assignment, KProverGame};
use crate::reductions::{
    check_cover_seed, check_set_contain, feige_reduce, feige_witness, gap_report, ly_reduce, moshkovitz_reduce_padded,
    GapReport, ReducedInstance, SolveMode,
};
use crate::set_systems::{partition_from_anti_universal, special_from_universal, PartitionSystem};
use crate::setcover::{exact_cover_with_budget, greedy_cover, verify_cover, Cover, NODE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Ly,
    Feige,
    Moshkovitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveKind {
    #[default]
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyParams {
    pub n: usize,
    /// Special-set cover bound.
    pub d: usize,
    pub gadget_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeigeParams {
    pub n: usize,
    pub rho: usize,
    pub k: usize,
    pub d: usize,
    pub code_seed: u64,
    pub ps_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    #[default]
    FullProduct,
    AntiUniversal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoshkovitzParams {
    pub a_count: usize,
    pub b_count: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub sigma_a: usize,
    pub sigma_b: usize,
    #[serde(default)]
    pub plant: bool,
    #[serde(default = "one")]
    pub duplication: usize,
    #[serde(default)]
    pub gadget: GadgetKind,
    /// Certified size for the anti-universal gadget.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub gadget_seed: u64,
}

fn one() -> usize {
    1
}

fn node_budget_default() -> u64 {
    NODE_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub pipeline: PipelineKind,
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solve: SolveKind,
    #[serde(default = "node_budget_default")]
    pub node_budget: u64,
    pub ly: Option<LyParams>,
    pub feige: Option<FeigeParams>,
    pub moshkovitz: Option<MoshkovitzParams>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    fn mode(&self) -> SolveMode {
        match self.solve {
            SolveKind::Exact => SolveMode::Exact { node_budget: self.node_budget },
            SolveKind::Greedy => SolveMode::GreedyOnly,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub report_csv: PathBuf,
    pub report_jsonl: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub reports: Vec<GapReport>,
    /// Failed completeness assertions; empty on success.
    pub failures: Vec<String>,
}

impl PipelineOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn staged<T>(stage: &'static str, path: &Path, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| Error::Stage { stage, path: path.display().to_string(), source: Box::new(e) })
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    dir: &'a Path,
    artifacts: Vec<PathBuf>,
    reports: Vec<GapReport>,
    failures: Vec<String>,
}

impl Run<'_> {
    /// Persists and immediately re-verifies.
    fn persist(&mut self, stage: &'static str, name: &str, artifact: Artifact) -> Result<PathBuf> {
        let path = self.dir.join(name);
        staged(stage, &path, || write_artifact(&path, &artifact))?;
        let v = staged("verify", &path, || verify_artifact(&path))?;
        if !v.ok {
            return Err(Error::Stage {
                stage: "verify",
                path: path.display().to_string(),
                source: Box::new(Error::Artifact(v.detail)),
            });
        }
        self.artifacts.push(path.clone());
        Ok(path)
    }

    fn fail(&mut self, seed: u64, msg: impl Into<String>) {
        self.failures.push(format!("seed {seed}: {}", msg.into()));
    }

    /// Solve, persist the instance with its covers, and report.
    fn solve_and_report(
        &mut self,
        seed: u64,
        map: &dyn ReducedInstance,
        witness: Option<&Cover>,
        satisfiable: bool,
    ) -> Result<GapReport> {
        let name = format!("instance_s{seed}.jsonl");
        let path = self.dir.join(&name);
        let inst = map.instance().clone().with_provenance("seed", seed);
        let (cover, optimal) = staged("solve", &path, || match self.cfg.mode() {
            SolveMode::Exact { node_budget } => {
                let ex = exact_cover_with_budget(&inst, None, node_budget)?;
                Ok((ex.cover, Some(ex.optimal)))
            }
            SolveMode::GreedyOnly => Ok((greedy_cover(&inst)?, None)),
        })?;
        let uncovered = staged("verify", &path, || verify_cover(&inst, &cover))?;
        if let Some(e) = uncovered {
            self.fail(seed, format!("solver cover misses element {e}"));
        }
        let report = staged("report", &path, || gap_report(&inst, witness, satisfiable, self.cfg.mode()))?;
        self.persist(
            "reduce",
            &name,
            Artifact::new(Payload::Instance {
                instance: inst,
                cover: Some(cover),
                cover_optimal: optimal,
                witness: witness.cloned(),
            }),
        )?;
        Ok(report)
    }

    fn formula(&mut self, n: usize, seed: u64) -> Result<Sat5Formula> {
        let name = format!("formula_s{seed}.jsonl");
        let f = staged("formulas", &self.dir.join(&name), || random_3sat5(n, seed))?;
        self.persist(
            "formulas",
            &name,
            Artifact::new(Payload::Formula(f.formula().clone())).with_provenance("seed", seed).with_provenance("n", n),
        )?;
        let cnf = self.dir.join(format!("formula_s{seed}.cnf"));
        staged("formulas", &cnf, || Ok(fs::write(&cnf, emit_dimacs(f.formula(), Some(seed)))?))?;
        self.artifacts.push(cnf);
        Ok(f)
    }

    fn ly(&mut self, p: &LyParams) -> Result<()> {
        let gadget_path = self.dir.join("gadget.jsonl");
        let sss = staged("gadget", &gadget_path, || special_from_universal(2, p.d, p.gadget_seed))?;
        self.persist(
            "gadget",
            "gadget.jsonl",
            Artifact::new(Payload::Special(sss.clone())).with_provenance("seed", p.gadget_seed),
        )?;
        for &seed in &self.cfg.seeds {
            let f = self.formula(p.n, seed)?;
            let game_name = format!("game_s{seed}.jsonl");
            let game = staged("game", &self.dir.join(&game_name), || clause_variable_game(&f))?;
            self.persist("game", &game_name, Artifact::new(Payload::TwoProverGame(game.clone())).with_provenance("seed", seed))?;
            let ms = staged("game", &self.dir.join(&game_name), || max_sat(f.formula()))?;
            let satisfiable = ms.best_count == f.num_clauses();
            let inst_path = self.dir.join(format!("instance_s{seed}.jsonl"));
            let map = staged("reduce", &inst_path, || ly_reduce(&game, &sss))?;
            let witness = satisfiable.then(|| {
                let (s1, s2) = strategies_from_assignment(&f, &ms.witness);
                map.witness(&s1, &s2)
            });
            if let Some(bad) = staged("verify", &inst_path, || check_cover_seed(&map, &game))? {
                self.fail(seed, format!("designated pair for seed/answer {bad:?} misses its block"));
            }
            if let Some(bad) = staged("verify", &inst_path, || check_set_contain(&map, &game, sss.certified_d))? {
                self.fail(seed, format!("block {} covered without a designated pair", bad.seed));
            }
            let report = self.solve_and_report(seed, &map, witness.as_ref(), satisfiable)?;
            if satisfiable {
                let target = map.query_counts[0] + map.query_counts[1];
                if report.witness_verified != Some(true) || report.witness_size != Some(target) {
                    self.fail(seed, "strategy witness is not a |Q1|+|Q2| cover");
                }
                if report.exact_optimal == Some(true) && report.exact_size != Some(target) {
                    self.fail(seed, format!("OPT is {:?}, expected {target}", report.exact_size));
                }
            }
            self.reports.push(report);
        }
        Ok(())
    }

    fn feige(&mut self, p: &FeigeParams) -> Result<()> {
        for &seed in &self.cfg.seeds {
            let f = self.formula(p.n, seed)?;
            let game_name = format!("game_s{seed}.jsonl");
            let game_path = self.dir.join(&game_name);
            let code = staged("game", &game_path, || balanced_code(p.k, p.rho, p.code_seed))?;
            let kg = staged("game", &game_path, || KProverGame::new(f.clone(), code.clone()))?;
            self.persist(
                "game",
                &game_name,
                Artifact::new(Payload::KProverGame { formula: f.formula().clone(), code })
                    .with_provenance("seed", seed)
                    .with_provenance("code_seed", p.code_seed),
            )?;
            let ms = staged("game", &game_path, || max_sat(f.formula()))?;
            let satisfiable = ms.best_count == f.num_clauses();
            let ps_seed = crate::rng::derive_seed(p.ps_seed, seed);
            let inst_path = self.dir.join(format!("instance_s{seed}.jsonl"));
            let l = 1usize.checked_shl(p.rho as u32).unwrap_or(0);
            let map = staged("reduce", &inst_path, || feige_reduce(&kg, ps_seed, l, p.k, p.d))?;
            self.persist(
                "gadget",
                &format!("gadget_s{seed}.jsonl"),
                Artifact::new(Payload::PartitionFamily(map.partition_systems.clone())).with_provenance("ps_seed", ps_seed),
            )?;
            let witness = satisfiable.then(|| feige_witness(&map, &kg, &ms.witness));
            let report = self.solve_and_report(seed, &map, witness.as_ref(), satisfiable)?;
            if let Some(w) = &witness {
                let kq: usize = map.query_counts.iter().sum();
                if report.witness_verified != Some(true) || w.len() != kq {
                    self.fail(seed, "honest witness is not a kQ cover");
                }
                if map.seed_costs(&kg, w).iter().any(|&c| c != p.k) {
                    self.fail(seed, "some seed block does not meet exactly k witness sets");
                }
            }
            self.reports.push(report);
        }
        Ok(())
    }

    fn moshkovitz(&mut self, p: &MoshkovitzParams) -> Result<()> {
        let gadget_path = self.dir.join("gadget.jsonl");
        let ps: PartitionSystem = staged("gadget", &gadget_path, || match p.gadget {
            GadgetKind::FullProduct => PartitionSystem::full_product(p.sigma_b, p.d_b),
            GadgetKind::AntiUniversal => {
                let d = p.d.ok_or_else(|| invalid("anti-universal gadget needs `d`"))?;
                partition_from_anti_universal(p.sigma_b, p.d_b, d, p.gadget_seed)
            }
        })?;
        self.persist("gadget", "gadget.jsonl", Artifact::new(Payload::Partition(ps.clone())).with_provenance("seed", p.gadget_seed))?;
        for &seed in &self.cfg.seeds {
            let name = format!("game_s{seed}.jsonl");
            let (pg, planted) = staged("game", &self.dir.join(&name), || {
                let g = random_biregular_game(p.a_count, p.b_count, p.d_a, p.d_b, p.sigma_a, p.sigma_b, seed)?;
                Ok(if p.plant {
                    let (g, l) = plant_satisfying_labeling(&g, crate::rng::derive_seed(seed, 1));
                    (g, Some(l))
                } else {
                    (g, None)
                })
            })?;
            self.persist(
                "game",
                &name,
                Artifact::new(Payload::ProjectionGame(pg.clone())).with_provenance("seed", seed).with_provenance("planted", p.plant),
            )?;
            let labeling: Option<Labeling> = match planted {
                Some(l) => Some(l),
                None => match best_value(&pg) {
                    Ok(b) if b.value == 1.into() => Some(b.witness),
                    Ok(_) | Err(Error::BudgetExceeded { .. }) => None,
                    Err(e) => return Err(e),
                },
            };
            let inst_path = self.dir.join(format!("instance_s{seed}.jsonl"));
            let map = staged("reduce", &inst_path, || moshkovitz_reduce_padded(&pg, &ps, p.duplication))?;
            let witness = labeling.as_ref().map(|l| map.witness(l));
            let report = self.solve_and_report(seed, &map, witness.as_ref(), witness.is_some())?;
            if witness.is_some() {
                if report.witness_verified != Some(true) || report.witness_size != Some(pg.a_count) {
                    self.fail(seed, "labeling witness is not an |A| cover");
                }
                if report.exact_optimal == Some(true) && report.exact_size != Some(pg.a_count) {
                    self.fail(seed, format!("OPT is {:?}, expected {}", report.exact_size, pg.a_count));
                }
            }
            self.reports.push(report);
        }
        Ok(())
    }
}

/// Runs the configured pipeline into `output_dir`. Stage failures abort
/// with the stage name and artifact path; failed completeness assertions
/// are collected in the outcome.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let dir = cfg.output_dir.as_path();
    staged("setup", dir, || Ok(fs::create_dir_all(dir)?))?;
    let mut run = Run { cfg, dir, artifacts: Vec::new(), reports: Vec::new(), failures: Vec::new() };
    let missing = |name: &str| Error::Stage {
        stage: "setup",
        path: dir.display().to_string(),
        source: Box::new(invalid(format!("config lacks a [{name}] table"))),
    };
    match cfg.pipeline {
        PipelineKind::Ly => run.ly(cfg.ly.as_ref().ok_or_else(|| missing("ly"))?)?,
        PipelineKind::Feige => run.feige(cfg.feige.as_ref().ok_or_else(|| missing("feige"))?)?,
        PipelineKind::Moshkovitz => run.moshkovitz(cfg.moshkovitz.as_ref().ok_or_else(|| missing("moshkovitz"))?)?,
    }
    let report_csv = dir.join("report.csv");
    staged("report", &report_csv, || write_csv(&report_csv, &run.reports))?;
    let report_jsonl = run.persist("report", "report.jsonl", Artifact::new(Payload::Report(run.reports.clone())))?;
    Ok(PipelineOutcome {
        report_csv,
        report_jsonl,
        artifacts: run.artifacts,
        reports: run.reports,
        failures: run.failures,
    })
}
