use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::ReducedInstance;
use crate::error::{check_budget, invalid, Error, Result};
use crate::formulas::Assignment;
use crate::proof_systems::KProverGame;
use crate::set_systems::{partition_from_anti_universal, PartitionSystem};
use crate::setcover::{Cover, SetCoverInstance};
use crate::{par, rng, Fraction};

/// Cap on answer tuples enumerated per seed by the weak-acceptance diagnostic.
pub const TUPLE_BUDGET: u128 = 1 << 20;

/// Seed `r` owns the block starting at `block_offsets[r]`, holding the
/// universe of its partition system `β_r`. Subsets are prover-major, then
/// query, then answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeigeInstanceMap {
    pub instance: SetCoverInstance,
    pub partition_systems: Vec<PartitionSystem>,
    pub block_offsets: Vec<usize>,
    pub k: usize,
    pub query_counts: Vec<usize>,
    pub answer_count: usize,
}

impl FeigeInstanceMap {
    fn prover_offset(&self, prover: usize) -> usize {
        self.query_counts[..prover].iter().sum::<usize>() * self.answer_count
    }

    pub fn set_index(&self, query: usize, answer: usize, prover: usize) -> usize {
        self.prover_offset(prover) + query * self.answer_count + answer
    }

    /// `(query, answer, prover)` of a set index.
    pub fn set_key(&self, index: usize) -> (usize, usize, usize) {
        let mut i = index;
        for (p, &q) in self.query_counts.iter().enumerate() {
            if i < q * self.answer_count {
                return (i / self.answer_count, i % self.answer_count, p);
            }
            i -= q * self.answer_count;
        }
        panic!("set index {index} out of range")
    }

    pub fn block(&self, seed: usize) -> Range<usize> {
        let start = self.block_offsets[seed];
        start..start + self.partition_systems[seed].m
    }

    pub fn num_seeds(&self) -> usize {
        self.partition_systems.len()
    }

    /// `c(q, i)` per prover.
    pub fn query_costs(&self, cover: &Cover) -> Vec<Vec<usize>> {
        let mut costs: Vec<Vec<usize>> = self.query_counts.iter().map(|&q| vec![0; q]).collect();
        for &i in &cover.chosen {
            let (q, _, p) = self.set_key(i);
            costs[p][q] += 1;
        }
        costs
    }

    /// `c(r) = Σ_i c(q(r,i), i)` per seed.
    pub fn seed_costs(&self, kgame: &KProverGame, cover: &Cover) -> Vec<usize> {
        let costs = self.query_costs(cover);
        (0..self.num_seeds())
            .map(|r| (0..self.k).map(|i| costs[i][kgame.query(r, i)]).sum())
            .collect()
    }
}

impl ReducedInstance for FeigeInstanceMap {
    fn instance(&self) -> &SetCoverInstance {
        &self.instance
    }
}

/// `S_{q,a,i}` is the union over seeds `r` with `q(r,i) = q` of part `i` of
/// the partition of `β_r` indexed by the distinguished-variable string `a`
/// induces under `r`. `β_r` is built from `derive_seed(ps_seed, r)`.
pub fn feige_reduce(kgame: &KProverGame, ps_seed: u64, l: usize, k: usize, d: usize) -> Result<FeigeInstanceMap> {
    let rho = kgame.rho();
    if rho >= usize::BITS as usize || l != 1 << rho {
        return Err(invalid(format!("need L = 2^rho = {}, got {l}", 1u128 << rho.min(127))));
    }
    if k != kgame.k() {
        return Err(invalid(format!("need k = {} provers, got {k}", kgame.k())));
    }
    let seeds = kgame.num_seeds();
    let systems: Vec<Result<PartitionSystem>> = par::map_collect(0..seeds as u64, |r| {
        partition_from_anti_universal(l, k, d, rng::derive_seed(ps_seed, r))
    });
    let systems: Vec<PartitionSystem> = systems.into_iter().collect::<Result<_>>()?;
    let mut block_offsets = Vec::with_capacity(seeds);
    let mut universe = 0;
    for ps in &systems {
        block_offsets.push(universe);
        universe += ps.m;
    }
    let answer_count = 1usize << kgame.answer_bits();
    let query_counts: Vec<usize> = (0..k).map(|i| kgame.query_count(i)).collect();
    let mut map = FeigeInstanceMap {
        instance: SetCoverInstance {
            universe_size: universe,
            subsets: Vec::new(),
            provenance: Default::default(),
        },
        partition_systems: Vec::new(),
        block_offsets,
        k,
        query_counts,
        answer_count,
    };
    let mut subsets = vec![Vec::new(); map.query_counts.iter().sum::<usize>() * answer_count];
    for (r, ps) in systems.iter().enumerate() {
        let base = map.block_offsets[r];
        for i in 0..k {
            let q = kgame.query(r, i);
            for a in 0..answer_count {
                let p = kgame.distinguished_assignment(r, i, a as u64) as usize;
                subsets[map.set_index(q, a, i)].extend(ps.part(p, i).iter().map(|&x| base + x));
            }
        }
    }
    let (m_min, m_max) = systems.iter().fold((usize::MAX, 0), |(lo, hi), ps| (lo.min(ps.m), hi.max(ps.m)));
    map.instance = SetCoverInstance::new(universe, subsets)?
        .with_provenance("reduction", "feige")
        .with_provenance("k", k)
        .with_provenance("rho", rho)
        .with_provenance("L", l)
        .with_provenance("d", d)
        .with_provenance("ps_seed", ps_seed)
        .with_provenance("seeds", seeds)
        .with_provenance("block_m", if m_min == m_max { m_min.to_string() } else { format!("{m_min}..{m_max}") })
        .with_provenance("code", (0..k).map(|i| kgame.code().word_string(i)).collect::<Vec<_>>().join(","));
    map.partition_systems = systems;
    Ok(map)
}

/// The `kQ` sets chosen by honest provers answering from `assignment`.
pub fn feige_witness(map: &FeigeInstanceMap, kgame: &KProverGame, assignment: &Assignment) -> Cover {
    let mut chosen = Vec::new();
    for i in 0..map.k {
        let s = kgame.honest_strategy(i, assignment);
        chosen.extend((0..map.query_counts[i]).map(|q| map.set_index(q, s.answer(q), i)));
    }
    Cover { chosen }
}

/// Seed-cost analysis of a cover. A seed is good when `c(r)` is below the
/// certified cover size of `β_r`; a good block is then covered using two
/// parts of one partition, that is by two provers whose answers agree on
/// the distinguished variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeigeCostDiagnostic {
    pub good_fraction: Fraction,
    /// Exact weak-acceptance probability of provers answering uniformly
    /// from their chosen answers (answer 0 when they chose none).
    pub weak_acceptance: f64,
    /// `good_fraction · 4 / d²` with `d` the largest certified size.
    pub bound: f64,
    pub holds: bool,
}

pub fn feige_cost_diagnostic(map: &FeigeInstanceMap, kgame: &KProverGame, cover: &Cover) -> Result<FeigeCostDiagnostic> {
    if let Some(&i) = cover.chosen.iter().find(|&&i| i >= map.instance.subsets.len()) {
        return Err(Error::IndexOutOfRange { index: i, limit: map.instance.subsets.len() });
    }
    let costs = map.seed_costs(kgame, cover);
    let good = (0..map.num_seeds())
        .filter(|&r| costs[r] < map.partition_systems[r].certified_d)
        .count();
    let mut lists: Vec<Vec<Vec<u64>>> = map.query_counts.iter().map(|&q| vec![Vec::new(); q]).collect();
    for &i in &cover.chosen {
        let (q, a, p) = map.set_key(i);
        lists[p][q].push(a as u64);
    }
    for l in lists.iter_mut().flatten() {
        l.sort_unstable();
        l.dedup();
    }
    let mut total = 0.0;
    for r in 0..map.num_seeds() {
        let views: Vec<Vec<u64>> = (0..map.k)
            .map(|i| {
                let l = &lists[i][kgame.query(r, i)];
                let answers: &[u64] = if l.is_empty() { &[0] } else { l };
                answers.iter().map(|&a| kgame.distinguished_assignment(r, i, a)).collect()
            })
            .collect();
        let tuples: u128 = views.iter().map(|v| v.len() as u128).product();
        check_budget("weak-acceptance tuples", tuples, TUPLE_BUDGET)?;
        let mut weak = 0u64;
        let mut idx = vec![0usize; map.k];
        'outer: loop {
            let consistent = (0..map.k).any(|i| (i + 1..map.k).any(|j| views[i][idx[i]] == views[j][idx[j]]));
            weak += consistent as u64;
            for t in (0..map.k).rev() {
                idx[t] += 1;
                if idx[t] < views[t].len() {
                    continue 'outer;
                }
                idx[t] = 0;
            }
            break;
        }
        total += weak as f64 / tuples as f64;
    }
    let weak_acceptance = total / map.num_seeds() as f64;
    let d = map.partition_systems.iter().map(|ps| ps.certified_d).max().unwrap_or(1) as f64;
    let good_fraction = Fraction::new(good as u64, map.num_seeds() as u64);
    let bound = good as f64 / map.num_seeds() as f64 * 4.0 / (d * d);
    Ok(FeigeCostDiagnostic {
        good_fraction,
        weak_acceptance,
        bound,
        holds: weak_acceptance + 1e-12 >= bound,
    })
}
