//! Versioned JSON-lines artifacts: one header record, then body records.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::formulas::{CnfFormula, Sat5Formula};
use crate::projection_games::ProjectionGame;
use crate::proof_systems::{BalancedCode, KProverGame, TwoProverGame};
use crate::reductions::GapReport;
use crate::set_systems::{
    verify_anti_universal, verify_partition, verify_special, verify_universal, AntiUniversalSet, PartitionSystem,
    SpecialSetSystem, UniversalSet,
};
use crate::setcover::{verify_cover, Cover, SetCoverInstance};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Formula,
    Game,
    SetSystem,
    ProjectionGame,
    Instance,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub kind: ArtifactKind,
    pub schema_version: u32,
    pub variant: String,
    pub provenance: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub meta: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Formula(CnfFormula),
    TwoProverGame(TwoProverGame),
    KProverGame { formula: CnfFormula, code: BalancedCode },
    Universal(UniversalSet),
    Special(SpecialSetSystem),
    AntiUniversal(AntiUniversalSet),
    Partition(PartitionSystem),
    /// One partition system per verifier seed.
    PartitionFamily(Vec<PartitionSystem>),
    ProjectionGame(ProjectionGame),
    /// The instance's own provenance is the artifact provenance.
    Instance {
        instance: SetCoverInstance,
        cover: Option<Cover>,
        cover_optimal: Option<bool>,
        witness: Option<Cover>,
    },
    Report(Vec<GapReport>),
}

impl Payload {
    pub fn kind(&self) -> ArtifactKind {
        match self {
            Payload::Formula(_) => ArtifactKind::Formula,
            Payload::TwoProverGame(_) | Payload::KProverGame { .. } => ArtifactKind::Game,
            Payload::Universal(_)
            | Payload::Special(_)
            | Payload::AntiUniversal(_)
            | Payload::Partition(_)
            | Payload::PartitionFamily(_) => ArtifactKind::SetSystem,
            Payload::ProjectionGame(_) => ArtifactKind::ProjectionGame,
            Payload::Instance { .. } => ArtifactKind::Instance,
            Payload::Report(_) => ArtifactKind::Report,
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            Payload::Formula(_) => "cnf",
            Payload::TwoProverGame(_) => "two_prover",
            Payload::KProverGame { .. } => "k_prover",
            Payload::Universal(_) => "universal",
            Payload::Special(_) => "special",
            Payload::AntiUniversal(_) => "anti_universal",
            Payload::Partition(_) => "partition",
            Payload::PartitionFamily(_) => "partition_family",
            Payload::ProjectionGame(_) => "projection",
            Payload::Instance { .. } => "set_cover",
            Payload::Report(_) => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub provenance: BTreeMap<String, String>,
    pub payload: Payload,
}

impl Artifact {
    pub fn new(payload: Payload) -> Self {
        let provenance = match &payload {
            Payload::Instance { instance, .. } => instance.provenance.clone(),
            _ => BTreeMap::new(),
        };
        Artifact { provenance, payload }
    }

    pub fn with_provenance(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.provenance.insert(key.into(), value.to_string());
        self
    }

    pub fn kind(&self) -> ArtifactKind {
        self.payload.kind()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KProverRecord {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
    code: BalancedCode,
}

fn dimacs_clauses(f: &CnfFormula) -> Vec<Vec<i64>> {
    f.clauses().iter().map(|c| c.iter().map(|l| l.to_dimacs()).collect()).collect()
}

fn formula_from(num_vars: usize, clauses: &[Vec<i64>]) -> Result<CnfFormula> {
    let refs: Vec<&[i64]> = clauses.iter().map(Vec::as_slice).collect();
    CnfFormula::from_dimacs_clauses(num_vars, &refs)
}

fn line<T: Serialize>(out: &mut String, value: &T) -> Result<()> {
    out.push_str(&serde_json::to_string(value)?);
    out.push('\n');
    Ok(())
}

/// Serializes to JSON-lines text. Output is a pure function of the artifact.
pub fn to_jsonl(artifact: &Artifact) -> Result<String> {
    let p = &artifact.payload;
    let mut meta = Map::new();
    let mut body = String::new();
    match p {
        Payload::Formula(f) => {
            meta.insert("num_vars".into(), f.num_vars().into());
            meta.insert("num_clauses".into(), f.num_clauses().into());
            for c in dimacs_clauses(f) {
                line(&mut body, &c)?;
            }
        }
        Payload::TwoProverGame(g) => line(&mut body, g)?,
        Payload::KProverGame { formula, code } => line(
            &mut body,
            &KProverRecord {
                num_vars: formula.num_vars(),
                clauses: dimacs_clauses(formula),
                code: code.clone(),
            },
        )?,
        Payload::Universal(x) => line(&mut body, x)?,
        Payload::Special(x) => line(&mut body, x)?,
        Payload::AntiUniversal(x) => line(&mut body, x)?,
        Payload::Partition(x) => line(&mut body, x)?,
        Payload::PartitionFamily(xs) => {
            for x in xs {
                line(&mut body, x)?;
            }
        }
        Payload::ProjectionGame(x) => line(&mut body, x)?,
        Payload::Instance { instance, cover, cover_optimal, witness } => {
            meta.insert("n".into(), instance.universe_size.into());
            meta.insert("subset_count".into(), instance.subsets.len().into());
            if let Some(c) = cover {
                meta.insert("cover".into(), serde_json::to_value(&c.chosen)?);
            }
            if let Some(o) = cover_optimal {
                meta.insert("cover_optimal".into(), (*o).into());
            }
            if let Some(w) = witness {
                meta.insert("witness".into(), serde_json::to_value(&w.chosen)?);
            }
            for s in &instance.subsets {
                line(&mut body, s)?;
            }
        }
        Payload::Report(rs) => {
            for r in rs {
                line(&mut body, r)?;
            }
        }
    }
    let provenance = match p {
        Payload::Instance { instance, .. } => instance.provenance.clone(),
        _ => artifact.provenance.clone(),
    };
    let header = Header {
        kind: p.kind(),
        schema_version: SCHEMA_VERSION,
        variant: p.variant().into(),
        provenance,
        meta,
    };
    let mut out = String::new();
    line(&mut out, &header)?;
    out.push_str(&body);
    Ok(out)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Artifact(msg.into())
}

fn meta_get<T: DeserializeOwned>(h: &Header, key: &str) -> Result<Option<T>> {
    h.meta.get(key).map(|v| serde_json::from_value(v.clone())).transpose().map_err(Error::from)
}

fn meta_req<T: DeserializeOwned>(h: &Header, key: &str) -> Result<T> {
    meta_get(h, key)?.ok_or_else(|| bad(format!("header lacks `{key}`")))
}

fn single<T: DeserializeOwned>(body: &[&str]) -> Result<T> {
    match body {
        [one] => Ok(serde_json::from_str(one)?),
        _ => Err(bad(format!("expected one body record, found {}", body.len()))),
    }
}

fn each<T: DeserializeOwned>(body: &[&str]) -> Result<Vec<T>> {
    body.iter().map(|l| serde_json::from_str(l).map_err(Error::from)).collect()
}

pub fn parse_header(text: &str) -> Result<Header> {
    let first = text.lines().next().ok_or_else(|| bad("empty artifact"))?;
    let h: Header = serde_json::from_str(first)?;
    if h.schema_version != SCHEMA_VERSION {
        return Err(bad(format!(
            "schema version {} is not the supported version {SCHEMA_VERSION}",
            h.schema_version
        )));
    }
    Ok(h)
}

/// Parses JSON-lines text. Structural invariants are not re-checked here;
/// that is [`verify_artifact`]'s job.
pub fn from_jsonl(text: &str) -> Result<Artifact> {
    let h = parse_header(text)?;
    let body: Vec<&str> = text.lines().skip(1).collect();
    use ArtifactKind as K;
    let payload = match (h.kind, h.variant.as_str()) {
        (K::Formula, "cnf") => {
            let clauses: Vec<Vec<i64>> = each(&body)?;
            let f = formula_from(meta_req(&h, "num_vars")?, &clauses)?;
            if f.num_clauses() != meta_req::<usize>(&h, "num_clauses")? {
                return Err(bad("clause count disagrees with the header"));
            }
            Payload::Formula(f)
        }
        (K::Game, "two_prover") => Payload::TwoProverGame(single(&body)?),
        (K::Game, "k_prover") => {
            let r: KProverRecord = single(&body)?;
            Payload::KProverGame { formula: formula_from(r.num_vars, &r.clauses)?, code: r.code }
        }
        (K::SetSystem, "universal") => Payload::Universal(single(&body)?),
        (K::SetSystem, "special") => Payload::Special(single(&body)?),
        (K::SetSystem, "anti_universal") => Payload::AntiUniversal(single(&body)?),
        (K::SetSystem, "partition") => Payload::Partition(single(&body)?),
        (K::SetSystem, "partition_family") => Payload::PartitionFamily(each(&body)?),
        (K::ProjectionGame, "projection") => Payload::ProjectionGame(single(&body)?),
        (K::Instance, "set_cover") => {
            let subsets: Vec<Vec<usize>> = each(&body)?;
            if subsets.len() != meta_req::<usize>(&h, "subset_count")? {
                return Err(bad("subset count disagrees with the header"));
            }
            let instance = SetCoverInstance {
                universe_size: meta_req(&h, "n")?,
                subsets,
                provenance: h.provenance.clone(),
            };
            Payload::Instance {
                instance,
                cover: meta_get(&h, "cover")?.map(|chosen| Cover { chosen }),
                cover_optimal: meta_get(&h, "cover_optimal")?,
                witness: meta_get(&h, "witness")?.map(|chosen| Cover { chosen }),
            }
        }
        (K::Report, "gap") => Payload::Report(each(&body)?),
        (kind, v) => return Err(bad(format!("unknown variant `{v}` for kind {kind:?}"))),
    };
    Ok(Artifact { provenance: h.provenance, payload })
}

pub fn write_artifact(path: &Path, artifact: &Artifact) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_jsonl(artifact)?)?;
    Ok(())
}

pub fn read_artifact(path: &Path) -> Result<Artifact> {
    from_jsonl(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: ArtifactKind,
    pub variant: String,
    pub ok: bool,
    pub detail: String,
}

fn verdict(a: &Artifact, result: Result<Option<String>>) -> Result<Verdict> {
    let (ok, detail) = match result {
        Ok(None) => (true, "ok".to_string()),
        Ok(Some(d)) => (false, d),
        // A broken invariant is a failed verdict, not an I/O failure.
        Err(e @ (Error::InvalidParameter(_)
        | Error::IndexOutOfRange { .. }
        | Error::UncoverableElement(_)
        | Error::Dimacs { .. })) => (false, e.to_string()),
        Err(e) => return Err(e),
    };
    Ok(Verdict { kind: a.kind(), variant: a.payload.variant().into(), ok, detail })
}

/// Re-runs the defining verifier of the artifact's kind.
pub fn verify_loaded(a: &Artifact) -> Result<Verdict> {
    let result: Result<Option<String>> = (|| {
        Ok(match &a.payload {
            Payload::Formula(f) => {
                Sat5Formula::new(f.clone())?;
                None
            }
            Payload::TwoProverGame(g) => {
                g.validate()?;
                None
            }
            Payload::KProverGame { formula, code } => {
                let code = BalancedCode::new(code.rho(), code.words().to_vec())?;
                KProverGame::new(Sat5Formula::new(formula.clone())?, code)?;
                None
            }
            Payload::Universal(u) => {
                UniversalSet::new(u.n, u.k, u.strings.clone())?;
                verify_universal(u)?.map(|m| format!("missing pattern {:?} on window {:?}", m.pattern, m.window))
            }
            Payload::Special(s) => {
                SpecialSetSystem::new(s.universe_size, s.sets.clone(), s.certified_d)?;
                verify_special(s, s.certified_d)?
                    .map(|c| format!("sets {:?} (complemented {:?}) cover B", c.indices, c.complemented))
            }
            Payload::AntiUniversal(f) => {
                AntiUniversalSet::new(f.n, f.k, f.b, f.functions.clone())?;
                verify_anti_universal(f)?.map(|c| format!("positions {:?} with targets {:?} are hit by every map", c.u, c.v))
            }
            Payload::Partition(ps) => verify_partition(ps)?.map(|c| format!("{c:?}")),
            Payload::PartitionFamily(pss) => {
                let mut found = None;
                for (r, ps) in pss.iter().enumerate() {
                    if let Some(c) = verify_partition(ps)? {
                        found = Some(format!("block {r}: {c:?}"));
                        break;
                    }
                }
                found
            }
            Payload::ProjectionGame(g) => {
                ProjectionGame::with_slots(
                    g.a_count,
                    g.b_count,
                    g.sigma_a,
                    g.sigma_b,
                    g.edges.clone(),
                    g.projections.clone(),
                    g.edge_slot.clone(),
                )?;
                None
            }
            Payload::Instance { instance, cover, witness, .. } => {
                instance.check()?;
                let mut found = None;
                for (name, c) in [("cover", cover), ("witness", witness)] {
                    if let Some(c) = c {
                        if let Some(e) = verify_cover(instance, c)? {
                            found = Some(format!("{name} leaves element {e} uncovered"));
                            break;
                        }
                    }
                }
                found
            }
            Payload::Report(rs) => rs
                .iter()
                .position(|r| r.witness_verified == Some(false))
                .map(|i| format!("record {i} has an unverified witness")),
        })
    })();
    verdict(a, result)
}

pub fn verify_artifact(path: &Path) -> Result<Verdict> {
    verify_loaded(&read_artifact(path)?)
}
