use serde::{Deserialize, Serialize};

use super::{build_anti_universal, verify_anti_universal, AntiUniversalSet, VERIFY_BUDGET};
use crate::bits::BitSet;
use crate::combin::{combinations, digits};
use crate::error::{binomial, check_budget, invalid, sat_pow, Result};
use crate::par;

/// `L` partitions of a universe of `m` elements into `k` parts each, such
/// that covering the universe with parts from pairwise distinct partitions
/// takes at least `certified_d` parts.
///
/// `partitions[j][i]` lists the elements of part `i` of partition `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSystem {
    pub m: usize,
    pub k: usize,
    pub partitions: Vec<Vec<Vec<usize>>>,
    pub certified_d: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionCounterexample {
    /// Partition `partition` is not a partition into `k` parts; `element`
    /// is missing, duplicated, or out of range.
    Malformed { partition: usize, element: usize },
    /// Fewer than `certified_d` parts, one per listed partition, cover the universe.
    Covering { selection: Vec<(usize, usize)> },
}

impl PartitionSystem {
    pub fn l(&self) -> usize {
        self.partitions.len()
    }

    pub fn part(&self, partition: usize, index: usize) -> &[usize] {
        &self.partitions[partition][index]
    }

    /// Partition `j` groups the family's members by their value at `j`.
    pub fn from_anti_universal(fam: &AntiUniversalSet, certified_d: usize) -> Self {
        let partitions = (0..fam.n)
            .map(|j| {
                let mut parts = vec![Vec::new(); fam.b];
                for (t, f) in fam.functions.iter().enumerate() {
                    parts[f[j] as usize].push(t);
                }
                parts
            })
            .collect();
        PartitionSystem {
            m: fam.functions.len(),
            k: fam.b,
            partitions,
            certified_d,
        }
    }

    /// Universe of all `k^L` maps `[L] → [k]`: a cover by parts of distinct
    /// partitions is impossible, so `certified_d = L + 1`.
    pub fn full_product(l: usize, k: usize) -> Result<Self> {
        let m = sat_pow(k as u128, l as u64);
        check_budget("full product partition universe", m, 1 << 20)?;
        let functions = (0..m as u64)
            .map(|x| digits(x, k, l).into_iter().map(|v| v as u8).collect())
            .collect();
        let fam = AntiUniversalSet::new(l, l, k, functions)?;
        Ok(Self::from_anti_universal(&fam, l + 1))
    }

    /// Copy with element `e` removed and later elements shifted down.
    pub fn without_element(&self, e: usize) -> PartitionSystem {
        let partitions = self
            .partitions
            .iter()
            .map(|p| {
                p.iter()
                    .map(|part| {
                        part.iter()
                            .filter(|&&x| x != e)
                            .map(|&x| if x > e { x - 1 } else { x })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        PartitionSystem {
            m: self.m - 1,
            k: self.k,
            partitions,
            certified_d: self.certified_d,
        }
    }

    fn well_formed(&self) -> Option<PartitionCounterexample> {
        for (j, p) in self.partitions.iter().enumerate() {
            if p.len() != self.k {
                return Some(PartitionCounterexample::Malformed {
                    partition: j,
                    element: self.m,
                });
            }
            let mut seen = vec![false; self.m];
            for &e in p.iter().flatten() {
                if e >= self.m || seen[e] {
                    return Some(PartitionCounterexample::Malformed {
                        partition: j,
                        element: e,
                    });
                }
                seen[e] = true;
            }
            if let Some(e) = seen.iter().position(|s| !s) {
                return Some(PartitionCounterexample::Malformed {
                    partition: j,
                    element: e,
                });
            }
        }
        None
    }
}

/// Builds an anti-universal family with domain `[L]` (partition indices)
/// and range `[k]` (part indices) and groups it into partitions.
///
/// The family has strength `min(d, L)`, which rules out every cover by
/// fewer than `d` parts from distinct partitions.
pub fn partition_from_anti_universal(l: usize, k: usize, d: usize, seed: u64) -> Result<PartitionSystem> {
    if k < 2 {
        return Err(invalid(format!("parts per partition must be at least 2, got {k}")));
    }
    if d < 1 {
        return Err(invalid("certified cover size must be at least 1"));
    }
    let fam = build_anti_universal(l, d.min(l), k, seed)?;
    debug_assert!(verify_anti_universal(&fam)?.is_none());
    let ps = PartitionSystem::from_anti_universal(&fam, d);
    let m = ps.m as f64;
    if m > std::f64::consts::E && (k as f64) >= m.ln() / (3.0 * m.ln().ln()) {
        log::debug!("partition system: k = {k} is outside k < ln m / (3 ln ln m) for m = {}", ps.m);
    }
    Ok(ps)
}

/// Checks partition well-formedness, then that no selection of fewer than
/// `certified_d` parts from pairwise distinct partitions covers the
/// universe. Selections are scanned by size, then partition combination in
/// lexicographic order, then part choice.
pub fn verify_partition(ps: &PartitionSystem) -> Result<Option<PartitionCounterexample>> {
    if let Some(cx) = ps.well_formed() {
        return Ok(Some(cx));
    }
    let l = ps.l();
    let max_sel = ps.certified_d.saturating_sub(1).min(l);
    let work: u128 = (0..=max_sel as u64)
        .map(|j| binomial(l as u64, j).saturating_mul(sat_pow(ps.k as u128, j)))
        .sum();
    check_budget("partition verification", work, VERIFY_BUDGET)?;

    let parts: Vec<Vec<BitSet>> = ps
        .partitions
        .iter()
        .map(|p| {
            p.iter()
                .map(|part| BitSet::from_indices(ps.m, part.iter().copied()))
                .collect()
        })
        .collect();

    if ps.certified_d >= 1 && ps.m == 0 {
        return Ok(Some(PartitionCounterexample::Covering { selection: vec![] }));
    }
    for j in 1..=max_sel {
        let combos = combinations(l, j);
        let choices = sat_pow(ps.k as u128, j as u64) as u64;
        let hit = par::find_first(0..combos.len() as u64 * choices, |x| {
            let combo = &combos[(x / choices) as usize];
            let pick = digits(x % choices, ps.k, j);
            let mut acc = BitSet::new(ps.m);
            for (&p, &i) in combo.iter().zip(&pick) {
                acc.union_with(&parts[p][i]);
            }
            acc.is_full().then(|| PartitionCounterexample::Covering {
                selection: combo.iter().copied().zip(pick).collect(),
            })
        });
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}
