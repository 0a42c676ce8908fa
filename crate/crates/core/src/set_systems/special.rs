use serde::{Deserialize, Serialize};

use super::{build_universal, VERIFY_BUDGET};
use crate::bits::BitSet;
use crate::combin::{combinations, digits};
use crate::error::{binomial, check_budget, invalid, sat_pow, Result};
use crate::par;

/// Sets `C_1..C_m` over a universe `B` such that no union of at most
/// `certified_d` of them, each taken as itself or its complement with
/// distinct indices, covers `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialSetSystem {
    pub universe_size: usize,
    pub sets: Vec<Vec<usize>>,
    pub certified_d: usize,
    /// Bit-string payload of each universe element when built from a
    /// universal set; diagnostics only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strings: Option<Vec<u64>>,
}

impl SpecialSetSystem {
    pub fn new(universe_size: usize, sets: Vec<Vec<usize>>, certified_d: usize) -> Result<Self> {
        for (i, s) in sets.iter().enumerate() {
            if let Some(&e) = s.iter().find(|&&e| e >= universe_size) {
                return Err(invalid(format!("set {i} contains element {e} outside the universe")));
            }
        }
        Ok(SpecialSetSystem {
            universe_size,
            sets,
            certified_d,
            strings: None,
        })
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn set_bits(&self, index: usize) -> BitSet {
        BitSet::from_indices(self.universe_size, self.sets[index].iter().copied())
    }

    /// Copy with universe element `e` deleted and later elements shifted down.
    pub fn without_element(&self, e: usize) -> SpecialSetSystem {
        let sets = self
            .sets
            .iter()
            .map(|s| {
                s.iter()
                    .filter(|&&x| x != e)
                    .map(|&x| if x > e { x - 1 } else { x })
                    .collect()
            })
            .collect();
        let strings = self.strings.as_ref().map(|s| {
            let mut s = s.clone();
            s.remove(e);
            s
        });
        SpecialSetSystem {
            universe_size: self.universe_size - 1,
            sets,
            certified_d: self.certified_d,
            strings,
        }
    }
}

/// Indices with orientations (`true` = complement) whose union covers `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialCounterexample {
    pub indices: Vec<usize>,
    pub complemented: Vec<bool>,
}

/// `(d + d ln m + 2)·2^d`
pub fn randomized_special_bound(m: usize, d: usize) -> f64 {
    let d_f = d as f64;
    (d_f + d_f * (m.max(1) as f64).ln() + 2.0) * (1u64 << d) as f64
}

/// `B` is an `(m, d)`-universal set and `C_i` holds the strings with bit `i` set.
pub fn special_from_universal(m: usize, d: usize, seed: u64) -> Result<SpecialSetSystem> {
    if d > m {
        return Err(invalid(format!("d = {d} exceeds m = {m}")));
    }
    let base = build_universal(m, d, seed)?;
    let bound = randomized_special_bound(m, d);
    if base.strings.len() as f64 > bound {
        log::warn!(
            "special set system (m={m}, d={d}) has |B| = {} above the randomized bound {bound:.1}",
            base.strings.len()
        );
    }
    let sets = (0..m)
        .map(|i| {
            (0..base.strings.len())
                .filter(|&b| base.bit(b, i))
                .collect()
        })
        .collect();
    let mut sys = SpecialSetSystem::new(base.strings.len(), sets, d)?;
    sys.strings = Some(base.strings);
    Ok(sys)
}

/// Exhaustive check of the special property for collections of at most `d`
/// sets. A second pass restates it over families of oriented sets: every
/// covering family of at most `d` members must hold some set together with
/// its complement.
pub fn verify_special(sys: &SpecialSetSystem, d: usize) -> Result<Option<SpecialCounterexample>> {
    let m = sys.m();
    let d = d.min(m);
    let work: u128 = (0..=d as u64)
        .map(|j| binomial(m as u64, j).saturating_mul(sat_pow(2, j)))
        .sum::<u128>()
        .max((0..=d as u64).map(|j| binomial(2 * m as u64, j)).sum());
    check_budget("special-set verification", work, VERIFY_BUDGET)?;

    let plain: Vec<BitSet> = (0..m).map(|i| sys.set_bits(i)).collect();
    let oriented: Vec<BitSet> = plain
        .iter()
        .cloned()
        .chain(plain.iter().map(BitSet::complement))
        .collect();
    let n = sys.universe_size;

    // pass 1: distinct indices, each with an orientation
    for j in 0..=d {
        let combos = combinations(m, j);
        let orientations = 1u64 << j;
        let hit = par::find_first(0..combos.len() as u64 * orientations, |x| {
            let idx = &combos[(x / orientations) as usize];
            let o = digits(x % orientations, 2, j);
            let mut acc = BitSet::new(n);
            for (t, &i) in idx.iter().enumerate() {
                acc.union_with(&oriented[i + o[t] * m]);
            }
            acc.is_full().then(|| SpecialCounterexample {
                indices: idx.clone(),
                complemented: o.iter().map(|&b| b == 1).collect(),
            })
        });
        if hit.is_some() {
            return Ok(hit);
        }
    }

    // pass 2: families drawn from all 2m oriented sets
    for j in 0..=d {
        let families = combinations(2 * m, j);
        let hit = par::find_first(0..families.len() as u64, |x| {
            let fam = &families[x as usize];
            let mut acc = BitSet::new(n);
            for &s in fam {
                acc.union_with(&oriented[s]);
            }
            let paired = fam.iter().any(|&s| s < m && fam.contains(&(s + m)));
            (acc.is_full() && !paired).then(|| SpecialCounterexample {
                indices: fam.iter().map(|&s| s % m).collect(),
                complemented: fam.iter().map(|&s| s >= m).collect(),
            })
        });
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}
