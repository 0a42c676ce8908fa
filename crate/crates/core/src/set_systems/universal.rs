use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{MAX_DOUBLINGS, SAMPLES_PER_SIZE, VERIFY_BUDGET};
use crate::combin::combinations;
use crate::error::{binomial, check_budget, invalid, sat_pow, Error, Result};
use crate::{par, rng};

/// Bit strings of length `n` (bit `i` of each word is position `i`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalSet {
    pub n: usize,
    pub k: usize,
    pub strings: Vec<u64>,
}

impl UniversalSet {
    pub fn new(n: usize, k: usize, strings: Vec<u64>) -> Result<Self> {
        if n > 64 {
            return Err(invalid(format!("string length {n} exceeds 64")));
        }
        if n < 64 {
            if let Some(s) = strings.iter().find(|&&s| s >> n != 0) {
                return Err(invalid(format!("string {s:#b} is longer than {n} bits")));
            }
        }
        Ok(UniversalSet { n, k, strings })
    }

    pub fn bit(&self, string: usize, pos: usize) -> bool {
        self.strings[string] >> pos & 1 == 1
    }

    pub fn string_repr(&self, string: usize) -> String {
        (0..self.n)
            .map(|p| if self.bit(string, p) { '1' } else { '0' })
            .collect()
    }
}

/// A window of positions and the pattern (in window order) it never shows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingPattern {
    pub window: Vec<usize>,
    pub pattern: Vec<bool>,
}

/// `⌈2^k (k ln n + ln C(n,k) + 2)⌉`
pub fn universal_target(n: usize, k: usize) -> usize {
    let ln_n = (n.max(1) as f64).ln();
    let ln_binom = (binomial(n as u64, k as u64) as f64).ln();
    ((1u64 << k) as f64 * (k as f64 * ln_n + ln_binom + 2.0)).ceil() as usize
}

/// Checks that every `k`-window of positions shows all `2^k` patterns.
/// Windows are scanned lexicographically and patterns in lexicographic
/// string order; the first gap is returned.
pub fn verify_universal(set: &UniversalSet) -> Result<Option<MissingPattern>> {
    let (n, k) = (set.n, set.k);
    if k > n {
        return Err(invalid(format!("strength {k} exceeds length {n}")));
    }
    if k > 20 {
        return Err(invalid(format!("strength {k} too large to enumerate")));
    }
    let work = binomial(n as u64, k as u64)
        .saturating_mul(sat_pow(2, k as u64).max(set.strings.len() as u128));
    check_budget("universal-set verification", work, VERIFY_BUDGET)?;

    let windows = combinations(n, k);
    Ok(par::find_first(0..windows.len() as u64, |w| {
        let window = &windows[w as usize];
        let mut seen = vec![false; 1 << k];
        for &s in &set.strings {
            let p = window
                .iter()
                .fold(0usize, |acc, &pos| acc << 1 | (s >> pos & 1) as usize);
            seen[p] = true;
        }
        seen.iter().position(|&x| !x).map(|p| MissingPattern {
            window: window.clone(),
            pattern: (0..k).map(|t| p >> (k - 1 - t) & 1 == 1).collect(),
        })
    }))
}

/// Samples, verifies, deduplicates, then prunes to an inclusion-minimal
/// universal set (strings are dropped in order while the property holds).
pub fn build_universal(n: usize, k: usize, seed: u64) -> Result<UniversalSet> {
    if k > n {
        return Err(invalid(format!("strength {k} exceeds length {n}")));
    }
    if n > 64 {
        return Err(invalid(format!("string length {n} exceeds 64")));
    }
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = rng::seeded(seed);
    let mut size = universal_target(n, k);
    let mut attempts = 0;
    for _ in 0..=MAX_DOUBLINGS {
        for _ in 0..SAMPLES_PER_SIZE {
            attempts += 1;
            let mut strings: Vec<u64> = (0..size).map(|_| rng.gen::<u64>() & mask).collect();
            strings.sort_unstable();
            strings.dedup();
            let candidate = UniversalSet::new(n, k, strings)?;
            if verify_universal(&candidate)?.is_none() {
                return minimize(candidate);
            }
        }
        size *= 2;
    }
    Err(Error::RetriesExhausted {
        what: "universal set construction",
        attempts,
    })
}

fn minimize(mut set: UniversalSet) -> Result<UniversalSet> {
    let mut i = 0;
    while i < set.strings.len() {
        let removed = set.strings.remove(i);
        if verify_universal(&set)?.is_some() {
            set.strings.insert(i, removed);
            i += 1;
        }
    }
    Ok(set)
}
