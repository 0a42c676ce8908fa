use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::ReducedInstance;
use crate::bits::BitSet;
use crate::combin::combinations;
use crate::error::{invalid, Error, Result};
use crate::proof_systems::{ProverStrategy, TwoProverGame};
use crate::set_systems::SpecialSetSystem;
use crate::setcover::{Cover, SetCoverInstance};
use crate::Fraction;

/// Universe `R × B` with element `(r, b)` at `r·|B| + b`. Subsets list all
/// `S_{q1,a1}` (query-major) and then all `S_{q2,a2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LyInstanceMap {
    pub instance: SetCoverInstance,
    pub block_size: usize,
    pub num_seeds: usize,
    pub query_counts: [usize; 2],
    pub answer_counts: [usize; 2],
    /// Seeds where no first-prover answer has a functional partner.
    pub unanswered_seeds: Vec<usize>,
}

impl LyInstanceMap {
    pub fn set_index(&self, prover: usize, query: usize, answer: usize) -> usize {
        match prover {
            0 => query * self.answer_counts[0] + answer,
            _ => self.query_counts[0] * self.answer_counts[0] + query * self.answer_counts[1] + answer,
        }
    }

    /// Inverse of [`Self::set_index`].
    pub fn set_key(&self, index: usize) -> (usize, usize, usize) {
        let first = self.query_counts[0] * self.answer_counts[0];
        if index < first {
            (0, index / self.answer_counts[0], index % self.answer_counts[0])
        } else {
            let i = index - first;
            (1, i / self.answer_counts[1], i % self.answer_counts[1])
        }
    }

    pub fn block(&self, seed: usize) -> Range<usize> {
        seed * self.block_size..(seed + 1) * self.block_size
    }

    /// One set per query: `S_{q, s(q)}` for both strategies.
    pub fn witness(&self, s1: &ProverStrategy, s2: &ProverStrategy) -> Cover {
        let mut chosen: Vec<usize> = (0..self.query_counts[0])
            .map(|q| self.set_index(0, q, s1.answer(q)))
            .collect();
        chosen.extend((0..self.query_counts[1]).map(|q| self.set_index(1, q, s2.answer(q))));
        Cover { chosen }
    }

    /// `c(q)` per prover: chosen sets whose query is `q`.
    pub fn query_costs(&self, cover: &Cover) -> [Vec<usize>; 2] {
        let mut costs = [vec![0; self.query_counts[0]], vec![0; self.query_counts[1]]];
        for &i in &cover.chosen {
            let (p, q, _) = self.set_key(i);
            costs[p][q] += 1;
        }
        costs
    }
}

impl ReducedInstance for LyInstanceMap {
    fn instance(&self) -> &SetCoverInstance {
        &self.instance
    }
}

fn check_inputs(game: &TwoProverGame, sss: &SpecialSetSystem) -> Result<()> {
    if !game.has_functional_answer() {
        return Err(invalid("the game must carry a functional answer map"));
    }
    if game.answer_count(1) != sss.m() {
        return Err(invalid(format!(
            "second-prover alphabet has {} answers but the special set system has {} sets",
            game.answer_count(1),
            sss.m()
        )));
    }
    Ok(())
}

/// `S_{q1,a1}` holds `(r, b)` with `q(r,1) = q1`, `a2 = f(r, a1)` defined
/// and `b ∉ C_{a2}`; `S_{q2,a2}` holds `(r, b)` with `q(r,2) = q2` and
/// `b ∈ C_{a2}`.
pub fn ly_reduce(game: &TwoProverGame, sss: &SpecialSetSystem) -> Result<LyInstanceMap> {
    check_inputs(game, sss)?;
    let bsize = sss.universe_size;
    let query_counts = [game.query_count(0), game.query_count(1)];
    let answer_counts = [game.answer_count(0), game.answer_count(1)];
    let mut map = LyInstanceMap {
        instance: SetCoverInstance {
            universe_size: game.num_seeds() * bsize,
            subsets: Vec::new(),
            provenance: Default::default(),
        },
        block_size: bsize,
        num_seeds: game.num_seeds(),
        query_counts,
        answer_counts,
        unanswered_seeds: Vec::new(),
    };
    let mut subsets = vec![Vec::new(); query_counts[0] * answer_counts[0] + query_counts[1] * answer_counts[1]];
    let members: Vec<BitSet> = (0..sss.m()).map(|a| sss.set_bits(a)).collect();
    for r in 0..game.num_seeds() {
        let base = r * bsize;
        let (q1, q2) = (game.query(r, 0), game.query(r, 1));
        let mut answered = false;
        for a1 in 0..answer_counts[0] {
            if let Some(a2) = game.functional_answer(r, a1) {
                answered = true;
                subsets[map.set_index(0, q1, a1)].extend((0..bsize).filter(|&b| !members[a2].contains(b)).map(|b| base + b));
            }
        }
        for (a2, c) in members.iter().enumerate() {
            subsets[map.set_index(1, q2, a2)].extend(c.iter().map(|b| base + b));
        }
        if !answered {
            map.unanswered_seeds.push(r);
        }
    }
    let instance = SetCoverInstance::new(map.instance.universe_size, subsets)?
        .with_provenance("reduction", "lund-yannakakis")
        .with_provenance("seeds", game.num_seeds())
        .with_provenance("queries", format!("{}+{}", query_counts[0], query_counts[1]))
        .with_provenance("answers", format!("{}+{}", answer_counts[0], answer_counts[1]))
        .with_provenance("special_m", sss.m())
        .with_provenance("special_d", sss.certified_d)
        .with_provenance("block_size", bsize)
        .with_provenance("unanswered_seeds", map.unanswered_seeds.len());
    map.instance = instance;
    Ok(map)
}

fn restricted(map: &LyInstanceMap, set: usize, seed: usize) -> BitSet {
    let block = map.block(seed);
    BitSet::from_indices(
        map.block_size,
        map.instance.subsets[set]
            .iter()
            .filter(|e| block.contains(e))
            .map(|e| e - block.start),
    )
}

/// First `(seed, a1)` whose designated pair `S_{q(r,1),a1}`,
/// `S_{q(r,2),f(r,a1)}` leaves block `r` uncovered.
pub fn check_cover_seed(map: &LyInstanceMap, game: &TwoProverGame) -> Result<Option<(usize, usize)>> {
    for r in 0..map.num_seeds {
        for a1 in 0..map.answer_counts[0] {
            let Some(a2) = game.functional_answer(r, a1) else { continue };
            let mut u = restricted(map, map.set_index(0, game.query(r, 0), a1), r);
            u.union_with(&restricted(map, map.set_index(1, game.query(r, 1), a2), r));
            if !u.is_full() {
                return Ok(Some((r, a1)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCounterexample {
    pub seed: usize,
    /// Set indices covering the block without a designated pair.
    pub sets: Vec<usize>,
}

/// Every cover of a block by at most `d` of the sets touching it must hold
/// a pair `S_{q(r,1),a1}`, `S_{q(r,2),f(r,a1)}`. Exhaustive per block.
pub fn check_set_contain(map: &LyInstanceMap, game: &TwoProverGame, d: usize) -> Result<Option<BlockCounterexample>> {
    if game.num_seeds() != map.num_seeds {
        return Err(invalid("game does not match the instance"));
    }
    for r in 0..map.num_seeds {
        let (q1, q2) = (game.query(r, 0), game.query(r, 1));
        let mut touching: Vec<(usize, BitSet)> = Vec::new();
        for a1 in 0..map.answer_counts[0] {
            let i = map.set_index(0, q1, a1);
            touching.push((i, restricted(map, i, r)));
        }
        for a2 in 0..map.answer_counts[1] {
            let i = map.set_index(1, q2, a2);
            touching.push((i, restricted(map, i, r)));
        }
        touching.retain(|(_, s)| !s.is_empty());
        for size in 1..=d.min(touching.len()) {
            for combo in combinations(touching.len(), size) {
                let mut u = BitSet::new(map.block_size);
                for &c in &combo {
                    u.union_with(&touching[c].1);
                }
                if !u.is_full() {
                    continue;
                }
                let keys: Vec<(usize, usize, usize)> = combo.iter().map(|&c| map.set_key(touching[c].0)).collect();
                let paired = keys.iter().any(|&(p, _, a1)| {
                    p == 0
                        && game
                            .functional_answer(r, a1)
                            .is_some_and(|a2| keys.iter().any(|&(p2, _, b)| p2 == 1 && b == a2))
                });
                if !paired {
                    return Ok(Some(BlockCounterexample {
                        seed: r,
                        sets: combo.iter().map(|&c| touching[c].0).collect(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Good-edge analysis of a cover. An edge `e_r` is good when
/// `c(q(r,1)) + c(q(r,2)) ≤ d`. Strategy `j` of a prover answers query `q`
/// with the `j`-th smallest answer chosen for `q` (answer 0 if none).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LyCostDiagnostic {
    pub d: usize,
    pub good_fraction: Fraction,
    pub best_acceptance: Fraction,
    pub mean_acceptance: Fraction,
    /// `δ / d²`
    pub bound: Fraction,
    pub holds: bool,
}

pub fn ly_cost_diagnostic(
    map: &LyInstanceMap,
    game: &TwoProverGame,
    cover: &Cover,
    d: usize,
) -> Result<LyCostDiagnostic> {
    if d == 0 {
        return Err(invalid("threshold d must be positive"));
    }
    if let Some(&i) = cover.chosen.iter().find(|&&i| i >= map.instance.subsets.len()) {
        return Err(Error::IndexOutOfRange { index: i, limit: map.instance.subsets.len() });
    }
    let costs = map.query_costs(cover);
    let good = (0..map.num_seeds)
        .filter(|&r| costs[0][game.query(r, 0)] + costs[1][game.query(r, 1)] <= d)
        .count();
    let mut lists = [vec![Vec::new(); map.query_counts[0]], vec![Vec::new(); map.query_counts[1]]];
    for &i in &cover.chosen {
        let (p, q, a) = map.set_key(i);
        lists[p][q].push(a as u32);
    }
    for l in lists.iter_mut().flatten() {
        l.sort_unstable();
        l.dedup();
    }
    let strategy = |p: usize, j: usize| {
        ProverStrategy::new(lists[p].iter().map(|l| l.get(j).copied().unwrap_or(0)).collect())
    };
    let mut best = Fraction::new(0, 1);
    let mut total = Fraction::new(0, 1);
    for i in 0..d {
        for j in 0..d {
            let v = game.acceptance(&strategy(0, i), &strategy(1, j))?;
            best = best.max(v);
            total += v;
        }
    }
    let good_fraction = Fraction::new(good as u64, map.num_seeds as u64);
    let d2 = (d * d) as u64;
    let bound = good_fraction / d2;
    let mean = total / d2;
    Ok(LyCostDiagnostic {
        d,
        good_fraction,
        best_acceptance: best,
        mean_acceptance: mean,
        bound,
        holds: mean >= bound,
    })
}
