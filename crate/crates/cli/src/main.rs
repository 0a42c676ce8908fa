use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gapcover::formulas::{emit_dimacs, max_sat, parse_dimacs, random_3sat5, CnfFormula, Sat5Formula};
use gapcover::harness::{
    read_artifact, run_pipeline, verify_artifact, write_artifact, write_csv, Artifact, Payload, PipelineConfig,
};
use gapcover::projection_games::{best_value, plant_satisfying_labeling, random_biregular_game};
use gapcover::proof_systems::{balanced_code, clause_variable_game, strategies_from_assignment, KProverGame};
use gapcover::reductions::{
    feige_reduce, feige_witness, gap_report, ly_reduce, moshkovitz_reduce_padded, SolveMode,
};
use gapcover::set_systems::{
    build_anti_universal, build_universal, partition_from_anti_universal, special_from_universal, PartitionSystem,
};
use gapcover::setcover::{exact_cover_with_budget, greedy_cover, Cover, SetCoverInstance, NODE_BUDGET};

/// Gap reductions to Set Cover: generate, build, reduce, solve, verify, report.
#[derive(Parser)]
#[command(name = "gapcover", version)]
struct Cli {
    /// error, warn, info, debug or trace
    #[arg(long, default_value = "warn", global = true)]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random 3SAT-5 formula.
    GenFormula {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write DIMACS text here.
        #[arg(long)]
        dimacs: Option<PathBuf>,
    },
    /// Two-prover, k-prover or projection game.
    BuildGame(BuildGame),
    /// Universal, special, anti-universal or partition set system.
    BuildGadget(BuildGadget),
    /// Reduce a game and gadget to a Set Cover instance.
    Reduce(Reduce),
    /// Solve an instance and store the cover in it.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        greedy_only: bool,
        #[arg(long, default_value_t = NODE_BUDGET)]
        node_budget: u64,
        #[arg(long)]
        upper_bound: Option<usize>,
    },
    /// Re-run the verifier for each artifact's kind.
    Verify {
        #[arg(long = "artifact", required = true)]
        artifacts: Vec<PathBuf>,
    },
    /// Gap report over instance artifacts (CSV, plus JSON-lines if asked).
    Report {
        #[arg(long = "instance", required = true)]
        instances: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jsonl: Option<PathBuf>,
        #[arg(long)]
        greedy_only: bool,
        #[arg(long, default_value_t = NODE_BUDGET)]
        node_budget: u64,
    },
    /// Run a TOML-configured pipeline; exits non-zero if completeness fails.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GameKind {
    ClauseVariable,
    KProver,
    Projection,
}

#[derive(Args)]
struct BuildGame {
    #[arg(long, value_enum)]
    kind: GameKind,
    #[arg(long)]
    out: PathBuf,
    /// Formula artifact or DIMACS file (clause-variable, k-prover).
    #[arg(long)]
    formula: Option<PathBuf>,
    /// Required for the randomized kinds (k-prover code, projection game).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long)]
    a_count: Option<usize>,
    #[arg(long)]
    b_count: Option<usize>,
    #[arg(long)]
    d_a: Option<usize>,
    #[arg(long)]
    d_b: Option<usize>,
    #[arg(long)]
    sigma_a: Option<usize>,
    #[arg(long)]
    sigma_b: Option<usize>,
    /// Rewrite projections so a random labeling satisfies every edge.
    #[arg(long)]
    plant: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetKind {
    Universal,
    Special,
    AntiUniversal,
    Partition,
    FullProduct,
}

#[derive(Args)]
struct BuildGadget {
    #[arg(long, value_enum)]
    kind: GadgetKind,
    #[arg(long)]
    out: PathBuf,
    /// Required except for full-product.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionKind {
    Ly,
    Feige,
    Moshkovitz,
}

#[derive(Args)]
struct Reduce {
    #[arg(long, value_enum)]
    reduction: ReductionKind,
    #[arg(long)]
    game: PathBuf,
    /// Special (ly) or partition (moshkovitz) system artifact.
    #[arg(long)]
    gadget: Option<PathBuf>,
    /// Formula behind a two-prover game, used for the completeness witness.
    #[arg(long)]
    formula: Option<PathBuf>,
    /// Seed for the per-seed partition systems (feige).
    #[arg(long)]
    ps_seed: Option<u64>,
    /// Certified cover size of the partition systems (feige).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    duplication: usize,
    #[arg(long)]
    out: PathBuf,
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("--{flag} is required here"))
}

fn load(path: &Path) -> Result<Artifact> {
    read_artifact(path).with_context(|| format!("reading {}", path.display()))
}

fn save(path: &Path, artifact: &Artifact) -> Result<()> {
    write_artifact(path, artifact).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Formula artifact, or DIMACS text.
fn load_formula(path: &Path) -> Result<CnfFormula> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.first() == Some(&b'{') {
        match load(path)?.payload {
            Payload::Formula(f) => Ok(f),
            _ => bail!("{} is not a formula artifact", path.display()),
        }
    } else {
        Ok(parse_dimacs(&bytes)?)
    }
}

fn gen_formula(n: usize, seed: u64, out: &Path, dimacs: Option<&Path>) -> Result<()> {
    let f = random_3sat5(n, seed)?;
    save(out, &Artifact::new(Payload::Formula(f.formula().clone())).with_provenance("seed", seed).with_provenance("n", n))?;
    if let Some(p) = dimacs {
        fs::write(p, emit_dimacs(f.formula(), Some(seed)))?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn build_game(a: BuildGame) -> Result<()> {
    let artifact = match a.kind {
        GameKind::ClauseVariable => {
            let f = Sat5Formula::new(load_formula(&need(a.formula, "formula")?)?)?;
            Artifact::new(Payload::TwoProverGame(clause_variable_game(&f)?)).with_provenance("game", "clause_variable")
        }
        GameKind::KProver => {
            let seed = need(a.seed, "seed")?;
            let f = Sat5Formula::new(load_formula(&need(a.formula, "formula")?)?)?;
            let code = balanced_code(need(a.k, "k")?, need(a.rho, "rho")?, seed)?;
            KProverGame::new(f.clone(), code.clone())?;
            Artifact::new(Payload::KProverGame { formula: f.formula().clone(), code }).with_provenance("code_seed", seed)
        }
        GameKind::Projection => {
            let seed = need(a.seed, "seed")?;
            let mut g = random_biregular_game(
                need(a.a_count, "a-count")?,
                need(a.b_count, "b-count")?,
                need(a.d_a, "d-a")?,
                need(a.d_b, "d-b")?,
                need(a.sigma_a, "sigma-a")?,
                need(a.sigma_b, "sigma-b")?,
                seed,
            )?;
            if a.plant {
                g = plant_satisfying_labeling(&g, gapcover::rng::derive_seed(seed, 1)).0;
            }
            Artifact::new(Payload::ProjectionGame(g)).with_provenance("seed", seed).with_provenance("planted", a.plant)
        }
    };
    save(&a.out, &artifact)
}

fn build_gadget(a: BuildGadget) -> Result<()> {
    let payload = match a.kind {
        GadgetKind::FullProduct => Payload::Partition(PartitionSystem::full_product(need(a.l, "l")?, need(a.k, "k")?)?),
        kind => {
            let seed = need(a.seed, "seed")?;
            match kind {
                GadgetKind::Universal => Payload::Universal(build_universal(need(a.n, "n")?, need(a.k, "k")?, seed)?),
                GadgetKind::Special => Payload::Special(special_from_universal(need(a.m, "m")?, need(a.d, "d")?, seed)?),
                GadgetKind::AntiUniversal => {
                    Payload::AntiUniversal(build_anti_universal(need(a.n, "n")?, need(a.k, "k")?, need(a.b, "b")?, seed)?)
                }
                _ => Payload::Partition(partition_from_anti_universal(need(a.l, "l")?, need(a.k, "k")?, need(a.d, "d")?, seed)?),
            }
        }
    };
    let mut artifact = Artifact::new(payload);
    if let Some(s) = a.seed {
        artifact = artifact.with_provenance("seed", s);
    }
    save(&a.out, &artifact)
}

fn reduce(a: Reduce) -> Result<()> {
    let game = load(&a.game)?.payload;
    let gadget = a.gadget.as_deref().map(load).transpose()?.map(|g| g.payload);
    let (instance, witness): (SetCoverInstance, Option<Cover>) = match (a.reduction, game) {
        (ReductionKind::Ly, Payload::TwoProverGame(g)) => {
            let Some(Payload::Special(sss)) = gadget else { bail!("ly needs --gadget with a special set system") };
            let map = ly_reduce(&g, &sss)?;
            let witness = match a.formula {
                Some(p) => {
                    let f = Sat5Formula::new(load_formula(&p)?)?;
                    let ms = max_sat(f.formula())?;
                    (ms.best_count == f.num_clauses()).then(|| {
                        let (s1, s2) = strategies_from_assignment(&f, &ms.witness);
                        map.witness(&s1, &s2)
                    })
                }
                None => None,
            };
            (map.instance, witness)
        }
        (ReductionKind::Feige, Payload::KProverGame { formula, code }) => {
            let kg = KProverGame::new(Sat5Formula::new(formula.clone())?, code)?;
            let ps_seed = need(a.ps_seed, "ps-seed")?;
            let map = feige_reduce(&kg, ps_seed, 1 << kg.rho(), kg.k(), need(a.d, "d")?)?;
            let ms = max_sat(&formula)?;
            let witness = (ms.best_count == formula.num_clauses()).then(|| feige_witness(&map, &kg, &ms.witness));
            (map.instance, witness)
        }
        (ReductionKind::Moshkovitz, Payload::ProjectionGame(pg)) => {
            let Some(Payload::Partition(ps)) = gadget else { bail!("moshkovitz needs --gadget with a partition system") };
            let map = moshkovitz_reduce_padded(&pg, &ps, a.duplication)?;
            let witness = match best_value(&pg) {
                Ok(b) if b.value == 1.into() => Some(map.witness(&b.witness)),
                _ => None,
            };
            (map.instance, witness)
        }
        _ => bail!("game artifact does not match the reduction"),
    };
    save(&a.out, &Artifact::new(Payload::Instance { instance, cover: None, cover_optimal: None, witness }))
}

fn solve(path: &Path, out: &Path, greedy_only: bool, node_budget: u64, upper_bound: Option<usize>) -> Result<()> {
    let Payload::Instance { instance, witness, .. } = load(path)?.payload else {
        bail!("{} is not an instance artifact", path.display())
    };
    let (cover, optimal) = if greedy_only {
        (greedy_cover(&instance)?, None)
    } else {
        let ex = exact_cover_with_budget(&instance, upper_bound, node_budget)?;
        (ex.cover, Some(ex.optimal))
    };
    println!("cover size {} optimal {}", cover.len(), optimal.map_or("n/a".into(), |o| o.to_string()));
    save(out, &Artifact::new(Payload::Instance { instance, cover: Some(cover), cover_optimal: optimal, witness }))
}

fn verify(paths: &[PathBuf]) -> Result<bool> {
    let mut all = true;
    for p in paths {
        let v = verify_artifact(p).with_context(|| format!("verifying {}", p.display()))?;
        println!("{}\t{:?}/{}\t{}\t{}", p.display(), v.kind, v.variant, if v.ok { "ok" } else { "FAIL" }, v.detail);
        all &= v.ok;
    }
    Ok(all)
}

fn report(paths: &[PathBuf], out: &Path, jsonl: Option<&Path>, mode: SolveMode) -> Result<()> {
    let mut reports = Vec::new();
    for p in paths {
        let Payload::Instance { instance, witness, .. } = load(p)?.payload else {
            bail!("{} is not an instance artifact", p.display())
        };
        reports.push(gap_report(&instance, witness.as_ref(), witness.is_some(), mode)?);
    }
    write_csv(out, &reports)?;
    println!("wrote {}", out.display());
    if let Some(j) = jsonl {
        save(j, &Artifact::new(Payload::Report(reports)))?;
    }
    Ok(())
}

fn pipeline(config: &Path, output_dir: Option<PathBuf>) -> Result<bool> {
    let mut cfg = PipelineConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(d) = output_dir {
        cfg.output_dir = d;
    }
    let outcome = run_pipeline(&cfg)?;
    println!("{} artifacts, report {}", outcome.artifacts.len(), outcome.report_csv.display());
    for f in &outcome.failures {
        println!("FAIL {f}");
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.log_level).init();
    let mode = |greedy_only: bool, node_budget: u64| {
        if greedy_only {
            SolveMode::GreedyOnly
        } else {
            SolveMode::Exact { node_budget }
        }
    };
    let result = match cli.command {
        Command::GenFormula { n, seed, out, dimacs } => gen_formula(n, seed, &out, dimacs.as_deref()).map(|_| true),
        Command::BuildGame(a) => build_game(a).map(|_| true),
        Command::BuildGadget(a) => build_gadget(a).map(|_| true),
        Command::Reduce(a) => reduce(a).map(|_| true),
        Command::Solve { instance, out, greedy_only, node_budget, upper_bound } => {
            solve(&instance, &out, greedy_only, node_budget, upper_bound).map(|_| true)
        }
        Command::Verify { artifacts } => verify(&artifacts),
        Command::Report { instances, out, jsonl, greedy_only, node_budget } => {
            report(&instances, &out, jsonl.as_deref(), mode(greedy_only, node_budget)).map(|_| true)
        }
        Command::Pipeline { config, output_dir } => pipeline(&config, output_dir),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
