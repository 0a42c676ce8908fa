use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{MAX_DOUBLINGS, SAMPLES_PER_SIZE, VERIFY_BUDGET};
use crate::combin::{arrangements, digits};
use crate::error::{check_budget, invalid, sat_pow, Error, Result};
use crate::{par, rng};

/// Family of maps `[n] → [b]`; `functions[t][i]` is the image of `i` under member `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntiUniversalSet {
    pub n: usize,
    pub k: usize,
    pub b: usize,
    pub functions: Vec<Vec<u8>>,
}

impl AntiUniversalSet {
    pub fn new(n: usize, k: usize, b: usize, functions: Vec<Vec<u8>>) -> Result<Self> {
        if b == 0 || b > 256 {
            return Err(invalid(format!("range size must be in 1..=256, got {b}")));
        }
        for (t, f) in functions.iter().enumerate() {
            if f.len() != n {
                return Err(invalid(format!("member {t} has domain {} instead of {n}", f.len())));
            }
            if let Some(&v) = f.iter().find(|&&v| v as usize >= b) {
                return Err(invalid(format!("member {t} maps to {v} outside [{b}]")));
            }
        }
        Ok(AntiUniversalSet { n, k, b, functions })
    }
}

/// Distinct coordinates `u` and targets `v` that no member avoids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntiUniversalCounterexample {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

/// `⌈(b/(b−1))^k (k ln n + k ln b + 2)⌉`
pub fn anti_universal_target(n: usize, k: usize, b: usize) -> usize {
    let ratio = b as f64 / (b as f64 - 1.0);
    let k_f = k as f64;
    (ratio.powi(k as i32) * (k_f * (n.max(1) as f64).ln() + k_f * (b as f64).ln() + 2.0)).ceil()
        as usize
}

fn verification_work(n: usize, k: usize, b: usize, members: usize) -> u128 {
    sat_pow(n as u128, k as u64)
        .saturating_mul(sat_pow(b as u128, k as u64))
        .saturating_mul(members as u128)
}

/// Checks every ordered tuple `u` of `k` distinct coordinates against every
/// `v ∈ [b]^k`. Tuples with repeated coordinates are excluded; `k = 0` and
/// `k > n` hold vacuously.
pub fn verify_anti_universal(fam: &AntiUniversalSet) -> Result<Option<AntiUniversalCounterexample>> {
    let (n, k, b) = (fam.n, fam.k, fam.b);
    if k == 0 || k > n {
        return Ok(None);
    }
    check_budget(
        "anti-universal verification",
        verification_work(n, k, b, fam.functions.len()),
        VERIFY_BUDGET,
    )?;
    let tuples = arrangements(n, k);
    let targets = sat_pow(b as u128, k as u64) as u64;
    Ok(par::find_first(0..tuples.len() as u64, |x| {
        let u = &tuples[x as usize];
        (0..targets).find_map(|vi| {
            let v = digits(vi, b, k);
            let avoided = fam
                .functions
                .iter()
                .any(|f| u.iter().zip(&v).all(|(&i, &vv)| f[i] as usize != vv));
            (!avoided).then(|| AntiUniversalCounterexample {
                u: u.clone(),
                v,
            })
        })
    }))
}

/// Samples uniformly random maps until the family verifies, keeping the
/// sampled multiset as is.
pub fn build_anti_universal(n: usize, k: usize, b: usize, seed: u64) -> Result<AntiUniversalSet> {
    if b < 2 {
        return Err(invalid(format!("range size must be at least 2, got {b}")));
    }
    if b > 256 {
        return Err(invalid(format!("range size {b} exceeds 256")));
    }
    let mut size = anti_universal_target(n, k, b).max(1);
    check_budget(
        "anti-universal verification",
        verification_work(n, k.min(n), b, size),
        VERIFY_BUDGET,
    )?;
    let mut rng = rng::seeded(seed);
    let mut attempts = 0;
    for _ in 0..=MAX_DOUBLINGS {
        for _ in 0..SAMPLES_PER_SIZE {
            attempts += 1;
            let functions = (0..size)
                .map(|_| (0..n).map(|_| rng.gen_range(0..b) as u8).collect())
                .collect();
            let fam = AntiUniversalSet::new(n, k, b, functions)?;
            if verify_anti_universal(&fam)?.is_none() {
                return Ok(fam);
            }
        }
        size *= 2;
    }
    Err(Error::RetriesExhausted {
        what: "anti-universal construction",
        attempts,
    })
}
