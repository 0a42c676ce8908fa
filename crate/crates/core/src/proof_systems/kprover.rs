use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ProverStrategy;
use crate::error::{binomial, check_budget, invalid, sat_pow, Error, Result};
use crate::formulas::{Assignment, Sat5Formula};
use crate::{par, rng};

/// Seeds a k-prover game may enumerate.
pub const SEED_BUDGET: u128 = 1 << 24;
const CODE_RESTARTS: usize = 64;
const CODE_WORD_BUDGET: u128 = 1 << 22;

/// `k` words of even length `rho`, each of weight `rho/2`, pairwise at
/// Hamming distance at least `rho/3`. Bit `j` of a word is coordinate `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedCode {
    rho: usize,
    words: Vec<u64>,
}

impl BalancedCode {
    pub fn new(rho: usize, words: Vec<u64>) -> Result<Self> {
        if rho == 0 || !rho.is_multiple_of(2) || rho > 64 {
            return Err(invalid(format!("code length must be even and in 2..=64, got {rho}")));
        }
        for (i, &w) in words.iter().enumerate() {
            if rho < 64 && w >> rho != 0 {
                return Err(invalid(format!("word {i} is longer than {rho} bits")));
            }
            if w.count_ones() as usize != rho / 2 {
                return Err(invalid(format!(
                    "word {i} has weight {}, expected {}",
                    w.count_ones(),
                    rho / 2
                )));
            }
        }
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                let d = (words[i] ^ words[j]).count_ones() as usize;
                if 3 * d < rho {
                    return Err(invalid(format!("words {i} and {j} are at distance {d}")));
                }
            }
        }
        Ok(BalancedCode { rho, words })
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn k(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn bit(&self, word: usize, coord: usize) -> bool {
        self.words[word] >> coord & 1 == 1
    }

    /// Word as a string of `0`/`1`, coordinate 0 first.
    pub fn word_string(&self, word: usize) -> String {
        (0..self.rho)
            .map(|j| if self.bit(word, j) { '1' } else { '0' })
            .collect()
    }
}

/// Greedy pick over a shuffled list of all weight-`rho/2` words, restarting
/// with a fresh shuffle when the greedy pass stalls.
pub fn balanced_code(k: usize, rho: usize, seed: u64) -> Result<BalancedCode> {
    if rho == 0 || !rho.is_multiple_of(2) {
        return Err(invalid(format!("code length must be even and positive, got {rho}")));
    }
    let available = binomial(rho as u64, rho as u64 / 2);
    if available < k as u128 {
        return Err(invalid(format!(
            "only {available} words of length {rho} have weight {}, need {k}",
            rho / 2
        )));
    }
    check_budget("balanced code candidates", available, CODE_WORD_BUDGET)?;

    let mut candidates: Vec<u64> = (0u64..1 << rho)
        .filter(|w| w.count_ones() as usize == rho / 2)
        .collect();
    let mut rng = rng::seeded(seed);
    for _ in 0..CODE_RESTARTS {
        candidates.shuffle(&mut rng);
        let mut picked: Vec<u64> = Vec::with_capacity(k);
        for &w in &candidates {
            if picked.len() == k {
                break;
            }
            if picked.iter().all(|&p| 3 * (p ^ w).count_ones() as usize >= rho) {
                picked.push(w);
            }
        }
        if picked.len() == k {
            return BalancedCode::new(rho, picked);
        }
    }
    Err(Error::RetriesExhausted {
        what: "balanced code search",
        attempts: CODE_RESTARTS,
    })
}

/// One coordinate of a k-prover query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryItem {
    Clause(usize),
    Variable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Reject,
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceCounts {
    pub strong: usize,
    pub weak: usize,
    pub reject: usize,
}

/// The k-prover protocol for 3SAT-5 driven by a balanced code.
///
/// A seed picks `rho` (clause, position) pairs; coordinate values are
/// `3·clause + position` in `0..5n`, combined in mixed radix with coordinate
/// 0 most significant. Prover `i` receives the clause at coordinates where
/// its word has a 1 and the distinguished variable where it has a 0.
///
/// An answer is a `2·rho`-bit string (bit `t` is position `t`): first the
/// `rho/2` distinguished-variable bits, then `rho/2` clause triples, each
/// group in coordinate order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KProverGame {
    formula: Sat5Formula,
    code: BalancedCode,
    num_seeds: usize,
    var_coords: Vec<Vec<usize>>,
    clause_coords: Vec<Vec<usize>>,
}

impl KProverGame {
    pub fn new(formula: Sat5Formula, code: BalancedCode) -> Result<Self> {
        if code.k() < 2 {
            return Err(invalid("need at least two provers"));
        }
        let rho = code.rho();
        let seeds = sat_pow(5 * formula.num_vars() as u128, rho as u64);
        check_budget("k-prover seeds", seeds, SEED_BUDGET)?;
        let var_coords = (0..code.k())
            .map(|i| (0..rho).filter(|&j| !code.bit(i, j)).collect())
            .collect();
        let clause_coords = (0..code.k())
            .map(|i| (0..rho).filter(|&j| code.bit(i, j)).collect())
            .collect();
        Ok(KProverGame {
            formula,
            code,
            num_seeds: seeds as usize,
            var_coords,
            clause_coords,
        })
    }

    pub fn formula(&self) -> &Sat5Formula {
        &self.formula
    }

    pub fn code(&self) -> &BalancedCode {
        &self.code
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    pub fn rho(&self) -> usize {
        self.code.rho()
    }

    pub fn num_seeds(&self) -> usize {
        self.num_seeds
    }

    pub fn answer_bits(&self) -> usize {
        2 * self.rho()
    }

    /// `(clause, position)` per coordinate.
    pub fn seed_coords(&self, seed: usize) -> Vec<(usize, usize)> {
        let base = 5 * self.formula.num_vars();
        let mut out = vec![(0, 0); self.rho()];
        let mut x = seed;
        for slot in out.iter_mut().rev() {
            let c = x % base;
            x /= base;
            *slot = (c / 3, c % 3);
        }
        out
    }

    fn item_radix(&self, prover: usize, coord: usize) -> usize {
        if self.code.bit(prover, coord) {
            self.formula.num_clauses()
        } else {
            self.formula.num_vars()
        }
    }

    pub fn query_count(&self, prover: usize) -> usize {
        (0..self.rho())
            .map(|j| self.item_radix(prover, j))
            .product()
    }

    pub fn query(&self, seed: usize, prover: usize) -> usize {
        self.seed_coords(seed)
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &(clause, pos))| {
                let item = if self.code.bit(prover, j) {
                    clause
                } else {
                    self.formula.clause(clause)[pos].var
                };
                acc * self.item_radix(prover, j) + item
            })
    }

    pub fn decode_query(&self, prover: usize, mut query: usize) -> Vec<QueryItem> {
        let mut items = vec![QueryItem::Clause(0); self.rho()];
        for j in (0..self.rho()).rev() {
            let radix = self.item_radix(prover, j);
            let v = query % radix;
            query /= radix;
            items[j] = if self.code.bit(prover, j) {
                QueryItem::Clause(v)
            } else {
                QueryItem::Variable(v)
            };
        }
        items
    }

    /// Values the prover's answer assigns to each coordinate's distinguished
    /// variable under `seed`, as a `rho`-bit string (bit `j` = coordinate `j`).
    pub fn distinguished_assignment(&self, seed: usize, prover: usize, answer: u64) -> u64 {
        let coords = self.seed_coords(seed);
        let half = self.rho() / 2;
        let mut out = 0u64;
        for (t, &j) in self.var_coords[prover].iter().enumerate() {
            out |= (answer >> t & 1) << j;
        }
        for (t, &j) in self.clause_coords[prover].iter().enumerate() {
            let pos = coords[j].1;
            out |= (answer >> (half + 3 * t + pos) & 1) << j;
        }
        out
    }

    /// Every prover answers from one global assignment.
    pub fn honest_strategy(&self, prover: usize, assignment: &Assignment) -> ProverStrategy {
        let half = self.rho() / 2;
        let answers = (0..self.query_count(prover))
            .map(|q| {
                let items = self.decode_query(prover, q);
                let mut ans = 0u32;
                let (mut vt, mut ct) = (0, 0);
                for item in items {
                    match item {
                        QueryItem::Variable(v) => {
                            ans |= (assignment.get(v) as u32) << vt;
                            vt += 1;
                        }
                        QueryItem::Clause(c) => {
                            for (p, l) in self.formula.clause(c).iter().enumerate() {
                                ans |= (assignment.get(l.var) as u32) << (half + 3 * ct + p);
                            }
                            ct += 1;
                        }
                    }
                }
                ans
            })
            .collect();
        ProverStrategy::new(answers)
    }

    fn check_strategies(&self, strategies: &[ProverStrategy]) -> Result<()> {
        if strategies.len() != self.k() {
            return Err(invalid(format!(
                "{} strategies supplied for {} provers",
                strategies.len(),
                self.k()
            )));
        }
        for (i, s) in strategies.iter().enumerate() {
            if s.len() < self.query_count(i) {
                return Err(Error::MissingAnswer {
                    prover: i,
                    query: s.len(),
                });
            }
        }
        Ok(())
    }

    /// Strong if every prover pair is consistent on the distinguished
    /// variables, Weak if at least one pair is, Reject otherwise.
    pub fn evaluate_acceptance(&self, strategies: &[ProverStrategy], seed: usize) -> Result<Verdict> {
        self.check_strategies(strategies)?;
        if seed >= self.num_seeds {
            return Err(Error::IndexOutOfRange {
                index: seed,
                limit: self.num_seeds,
            });
        }
        Ok(self.verdict_unchecked(strategies, seed))
    }

    fn verdict_unchecked(&self, strategies: &[ProverStrategy], seed: usize) -> Verdict {
        let views: Vec<u64> = (0..self.k())
            .map(|i| {
                let a = strategies[i].answer(self.query(seed, i)) as u64;
                self.distinguished_assignment(seed, i, a)
            })
            .collect();
        let mut all = true;
        let mut any = false;
        for i in 0..views.len() {
            for j in i + 1..views.len() {
                if views[i] == views[j] {
                    any = true;
                } else {
                    all = false;
                }
            }
        }
        match (all, any) {
            (true, _) => Verdict::Strong,
            (false, true) => Verdict::Weak,
            _ => Verdict::Reject,
        }
    }

    /// Verdict counts over every seed.
    pub fn acceptance_counts(&self, strategies: &[ProverStrategy]) -> Result<AcceptanceCounts> {
        self.check_strategies(strategies)?;
        Ok(par::map_reduce(
            0..self.num_seeds as u64,
            AcceptanceCounts::default,
            |s| {
                let mut c = AcceptanceCounts::default();
                match self.verdict_unchecked(strategies, s as usize) {
                    Verdict::Strong => c.strong += 1,
                    Verdict::Weak => c.weak += 1,
                    Verdict::Reject => c.reject += 1,
                }
                c
            },
            |a, b| AcceptanceCounts {
                strong: a.strong + b.strong,
                weak: a.weak + b.weak,
                reject: a.reject + b.reject,
            },
        ))
    }
}
