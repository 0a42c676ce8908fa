//! Set Cover instances, the greedy approximation, an exact branch-and-bound
//! solver and the cover verifier.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Default branch-node budget of [`exact_cover`].
pub const NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCoverInstance {
    pub universe_size: usize,
    /// Sorted, duplicate-free element lists. Identical subsets may repeat.
    pub subsets: Vec<Vec<usize>>,
    pub provenance: BTreeMap<String, String>,
}

impl SetCoverInstance {
    /// Sorts each subset and checks that every element is coverable.
    pub fn new(universe_size: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let inst = SetCoverInstance {
            universe_size,
            subsets: subsets
                .into_iter()
                .map(|mut s| {
                    s.sort_unstable();
                    s.dedup();
                    s
                })
                .collect(),
            provenance: BTreeMap::new(),
        };
        inst.check()?;
        Ok(inst)
    }

    pub fn with_provenance(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.provenance.insert(key.into(), value.to_string());
        self
    }

    /// Invariant scan: indices in range, subsets sorted, no orphan element.
    pub fn check(&self) -> Result<()> {
        for (i, s) in self.subsets.iter().enumerate() {
            if s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!("subset {i} is not sorted and duplicate-free")));
            }
            if let Some(&e) = s.iter().find(|&&e| e >= self.universe_size) {
                return Err(Error::IndexOutOfRange { index: e, limit: self.universe_size });
            }
        }
        let mut union = BitSet::new(self.universe_size);
        for s in &self.subsets {
            for &e in s {
                union.insert(e);
            }
        }
        match union.first_missing() {
            Some(e) => Err(Error::UncoverableElement(e)),
            None => Ok(()),
        }
    }

    pub fn num_subsets(&self) -> usize {
        self.subsets.len()
    }

    fn bitsets(&self) -> Vec<BitSet> {
        self.subsets
            .iter()
            .map(|s| BitSet::from_indices(self.universe_size, s.iter().copied()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub chosen: Vec<usize>,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

/// `None` when the chosen subsets cover the universe, otherwise the first
/// uncovered element.
pub fn verify_cover(inst: &SetCoverInstance, cover: &Cover) -> Result<Option<usize>> {
    let mut covered = BitSet::new(inst.universe_size);
    for &i in &cover.chosen {
        let s = inst
            .subsets
            .get(i)
            .ok_or(Error::IndexOutOfRange { index: i, limit: inst.subsets.len() })?;
        for &e in s {
            if e >= inst.universe_size {
                return Err(Error::IndexOutOfRange { index: e, limit: inst.universe_size });
            }
            covered.insert(e);
        }
    }
    Ok(covered.first_missing())
}

/// Repeatedly takes the subset covering most uncovered elements, lowest
/// index on ties. Chosen indices are in selection order.
pub fn greedy_cover(inst: &SetCoverInstance) -> Result<Cover> {
    inst.check()?;
    let sets = inst.bitsets();
    let mut uncovered = BitSet::full(inst.universe_size);
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let (best, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.intersection_count(&uncovered)))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        debug_assert!(gain > 0);
        uncovered.difference_with(&sets[best]);
        chosen.push(best);
    }
    Ok(Cover { chosen })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOutcome {
    /// Chosen indices in ascending order.
    pub cover: Cover,
    /// False when the node budget ran out or `upper_bound` cut the search
    /// below every cover; `cover` is then the best incumbent.
    pub optimal: bool,
    pub nodes: u64,
}

pub fn exact_cover(inst: &SetCoverInstance, upper_bound: Option<usize>) -> Result<ExactOutcome> {
    exact_cover_with_budget(inst, upper_bound, NODE_BUDGET)
}

/// Branch and bound on the lowest uncovered element over the subsets that
/// contain it. The greedy cover is the first incumbent. The bound is the
/// larger of `⌈uncovered / max gain⌉` and a packing of uncovered elements
/// that share no containing subset. Identical and dominated subsets are
/// dropped first; the witness uses original (lowest) indices.
pub fn exact_cover_with_budget(
    inst: &SetCoverInstance,
    upper_bound: Option<usize>,
    node_budget: u64,
) -> Result<ExactOutcome> {
    let greedy = greedy_cover(inst)?;
    let all = inst.bitsets();

    // Keep a subset unless an earlier identical one or a strict superset exists.
    let keep: Vec<usize> = (0..all.len())
        .filter(|&i| {
            !all.iter().enumerate().any(|(j, s)| {
                j != i && all[i].is_subset(s) && (j < i || all[i] != *s)
            })
        })
        .collect();
    let sets: Vec<BitSet> = keep.iter().map(|&i| all[i].clone()).collect();
    let mut containing = vec![BitSet::new(sets.len()); inst.universe_size];
    for (i, s) in sets.iter().enumerate() {
        for e in s.iter() {
            containing[e].insert(i);
        }
    }

    let mut search = Search {
        sets: &sets,
        containing: &containing,
        best: greedy.chosen.clone(),
        best_from_search: false,
        limit: upper_bound.map_or(greedy.len(), |ub| greedy.len().min(ub + 1)),
        nodes: 0,
        budget: node_budget,
        stack: Vec::new(),
    };
    let limit = search.limit;
    let complete = search.run(BitSet::full(inst.universe_size));

    let mut chosen: Vec<usize> = if search.best_from_search {
        search.best.iter().map(|&i| keep[i]).collect()
    } else {
        greedy.chosen.clone()
    };
    chosen.sort_unstable();
    // Exhausting the tree proves nothing below `limit` exists.
    let optimal = complete && (search.best_from_search || greedy.len() <= limit);
    Ok(ExactOutcome {
        cover: Cover { chosen },
        optimal,
        nodes: search.nodes,
    })
}

struct Search<'a> {
    sets: &'a [BitSet],
    containing: &'a [BitSet],
    best: Vec<usize>,
    best_from_search: bool,
    /// Only covers strictly smaller than this are of interest.
    limit: usize,
    nodes: u64,
    budget: u64,
    stack: Vec<usize>,
}

impl Search<'_> {
    /// True when no cover extending the stack can beat `limit`.
    fn prune(&self, uncovered: &BitSet) -> bool {
        let left = uncovered.count();
        if left == 0 {
            return false;
        }
        let gain = self.sets.iter().map(|s| s.intersection_count(uncovered)).max().unwrap_or(0);
        if self.stack.len() + left.div_ceil(gain.max(1)) >= self.limit {
            return true;
        }
        let mut used = BitSet::new(self.sets.len());
        let mut packing = 0;
        for e in uncovered.iter() {
            if !self.containing[e].intersects(&used) {
                used.union_with(&self.containing[e]);
                packing += 1;
                if self.stack.len() + packing >= self.limit {
                    return true;
                }
            }
        }
        false
    }

    /// False when the node budget ran out.
    fn run(&mut self, uncovered: BitSet) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let Some(e) = uncovered.first() else {
            if self.stack.len() < self.limit {
                self.best = self.stack.clone();
                self.best_from_search = true;
                self.limit = self.stack.len();
            }
            return true;
        };
        if self.prune(&uncovered) {
            return true;
        }
        let mut branches: Vec<(usize, usize)> = self.containing[e]
            .iter()
            .map(|i| (i, self.sets[i].intersection_count(&uncovered)))
            .collect();
        branches.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (i, _) in branches {
            let mut next = uncovered.clone();
            next.difference_with(&self.sets[i]);
            self.stack.push(i);
            let ok = self.run(next);
            self.stack.pop();
            if !ok {
                return false;
            }
            if self.stack.len() + 1 >= self.limit {
                break;
            }
        }
        true
    }
}

/// `H(n) = Σ_{i=1..n} 1/i`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// `greedy ≤ H(n)·exact`. `H(n)` is not an integer for `n > 1`, so the
/// floating comparison has no boundary case.
pub fn within_greedy_bound(greedy: usize, exact: usize, n: usize) -> bool {
    greedy as f64 <= harmonic(n) * exact as f64 + 1e-9
}

/// Random instance: each element joins each subset with probability
/// `density`, then every orphan joins a uniformly chosen subset.
pub fn random_instance(n: usize, subsets: usize, density: f64, seed: u64) -> Result<SetCoverInstance> {
    if subsets == 0 && n > 0 {
        return Err(invalid("a non-empty universe needs at least one subset"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(invalid("density must lie in [0, 1]"));
    }
    let mut rng = rng::seeded(seed);
    let mut sets: Vec<Vec<usize>> = (0..subsets)
        .map(|_| (0..n).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    for e in 0..n {
        if !sets.iter().any(|s| s.contains(&e)) {
            let i = rng.gen_range(0..subsets);
            sets[i].push(e);
        }
    }
    Ok(SetCoverInstance::new(n, sets)?
        .with_provenance("generator", "random_instance")
        .with_provenance("seed", seed)
        .with_provenance("density", density))
}
