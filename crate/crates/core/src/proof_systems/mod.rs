//! One-round multi-prover games: the two-prover model with exact and sampled
//! values, the clause/variable game, parallel repetition, balanced codes, and
//! the k-prover 3SAT-5 protocol.

mod clause_variable;
mod kprover;
mod repetition;

pub use clause_variable::{clause_variable_game, strategies_from_assignment};
pub use kprover::{balanced_code, AcceptanceCounts, BalancedCode, KProverGame, QueryItem, Verdict};
pub use repetition::parallel_repeat;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, invalid, Error, Result};
use crate::{par, rng, Fraction};

/// Cap on accept-table cells (seed × answer × answer) a game may hold.
pub const TABLE_BUDGET: u128 = 1 << 28;
/// Cap on predicate evaluations for [`game_value_exact`].
pub const VALUE_BUDGET: u128 = 1 << 28;

const NO_ANSWER: u32 = u32::MAX;

/// Two-prover one-round game with a dense acceptance table.
///
/// Queries and answers are indices: prover `i` is asked `query(r, i)` in
/// `0..query_count(i)` and answers in `0..answer_count(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoProverGame {
    num_seeds: usize,
    queries: Vec<[u32; 2]>,
    query_counts: [usize; 2],
    answer_counts: [usize; 2],
    accept: Vec<u64>,
    functional: Option<Vec<u32>>,
}

impl TwoProverGame {
    /// Tabulates `predicate(seed, a1, a2)`. Every query index must be the
    /// image of some seed.
    pub fn from_predicate(
        queries: Vec<[u32; 2]>,
        query_counts: [usize; 2],
        answer_counts: [usize; 2],
        predicate: impl Fn(usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let num_seeds = queries.len();
        if num_seeds == 0 {
            return Err(invalid("a game needs at least one seed"));
        }
        if answer_counts.contains(&0) {
            return Err(invalid("answer alphabets must be non-empty"));
        }
        let cells = num_seeds as u128 * answer_counts[0] as u128 * answer_counts[1] as u128;
        check_budget("game table", cells, TABLE_BUDGET)?;

        for p in 0..2 {
            let mut seen = vec![false; query_counts[p]];
            for q in &queries {
                let qi = q[p] as usize;
                if qi >= query_counts[p] {
                    return Err(Error::IndexOutOfRange {
                        index: qi,
                        limit: query_counts[p],
                    });
                }
                seen[qi] = true;
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(invalid(format!(
                    "query {missing} of prover {} is never asked",
                    p + 1
                )));
            }
        }

        let mut accept = vec![0u64; (cells as usize).div_ceil(64)];
        let [a1n, a2n] = answer_counts;
        for r in 0..num_seeds {
            for a1 in 0..a1n {
                for a2 in 0..a2n {
                    if predicate(r, a1, a2) {
                        let i = (r * a1n + a1) * a2n + a2;
                        accept[i / 64] |= 1 << (i % 64);
                    }
                }
            }
        }
        Ok(TwoProverGame {
            num_seeds,
            queries,
            query_counts,
            answer_counts,
            accept,
            functional: None,
        })
    }

    /// Attaches the functional-answer map: for each `(seed, a1)` the unique
    /// accepting `a2`, if any. Fails when some `(seed, a1)` admits two.
    pub fn with_functional_answer(mut self) -> Result<Self> {
        let [a1n, a2n] = self.answer_counts;
        let mut table = Vec::with_capacity(self.num_seeds * a1n);
        for r in 0..self.num_seeds {
            for a1 in 0..a1n {
                let mut found = NO_ANSWER;
                for a2 in 0..a2n {
                    if self.accepts(r, a1, a2) {
                        if found != NO_ANSWER {
                            return Err(invalid(format!(
                                "seed {r}, answer {a1}: answers {found} and {a2} both accept"
                            )));
                        }
                        found = a2 as u32;
                    }
                }
                table.push(found);
            }
        }
        self.functional = Some(table);
        Ok(self)
    }

    pub fn num_seeds(&self) -> usize {
        self.num_seeds
    }

    /// Query sent to `prover` (0 or 1) under `seed`.
    #[inline]
    pub fn query(&self, seed: usize, prover: usize) -> usize {
        self.queries[seed][prover] as usize
    }

    pub fn query_count(&self, prover: usize) -> usize {
        self.query_counts[prover]
    }

    pub fn answer_count(&self, prover: usize) -> usize {
        self.answer_counts[prover]
    }

    #[inline]
    pub fn accepts(&self, seed: usize, a1: usize, a2: usize) -> bool {
        let [a1n, a2n] = self.answer_counts;
        let i = (seed * a1n + a1) * a2n + a2;
        self.accept[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn has_functional_answer(&self) -> bool {
        self.functional.is_some()
    }

    /// The unique accepting second answer for `(seed, a1)`, or `None`.
    ///
    /// Panics if the game was built without [`Self::with_functional_answer`].
    pub fn functional_answer(&self, seed: usize, a1: usize) -> Option<usize> {
        let table = self
            .functional
            .as_ref()
            .expect("game has no functional answer map");
        match table[seed * self.answer_counts[0] + a1] {
            NO_ANSWER => None,
            a2 => Some(a2 as usize),
        }
    }

    /// Number of seeds accepted under a pair of deterministic strategies.
    pub fn accepting_seeds(&self, s1: &ProverStrategy, s2: &ProverStrategy) -> Result<usize> {
        self.check_strategy(0, s1)?;
        self.check_strategy(1, s2)?;
        Ok((0..self.num_seeds)
            .filter(|&r| {
                self.accepts(
                    r,
                    s1.answer(self.query(r, 0)),
                    s2.answer(self.query(r, 1)),
                )
            })
            .count())
    }

    pub fn acceptance(&self, s1: &ProverStrategy, s2: &ProverStrategy) -> Result<Fraction> {
        Ok(Fraction::new(
            self.accepting_seeds(s1, s2)? as u64,
            self.num_seeds as u64,
        ))
    }

    pub(crate) fn check_strategy(&self, prover: usize, s: &ProverStrategy) -> Result<()> {
        if s.len() < self.query_counts[prover] {
            return Err(Error::MissingAnswer {
                prover,
                query: s.len(),
            });
        }
        if let Some(q) = s
            .answers
            .iter()
            .position(|&a| a as usize >= self.answer_counts[prover])
        {
            return Err(invalid(format!(
                "prover {prover} answers query {q} outside its alphabet"
            )));
        }
        Ok(())
    }

    /// Re-checks a game obtained without its constructor (e.g. deserialized):
    /// table sizes, query ranges and coverage, and the functional map.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = TwoProverGame::from_predicate(self.queries.clone(), self.query_counts, self.answer_counts, |_, _, _| false)?;
        if self.num_seeds != self.queries.len() || self.accept.len() != rebuilt.accept.len() {
            return Err(invalid("acceptance table has the wrong size"));
        }
        if let Some(f) = &self.functional {
            let mut expected = self.clone();
            expected.functional = None;
            if expected.with_functional_answer()?.functional.as_ref() != Some(f) {
                return Err(invalid("functional answer map disagrees with the acceptance table"));
            }
        }
        Ok(())
    }

    pub(crate) fn raw_parts(&self) -> (&[[u32; 2]], [usize; 2], [usize; 2]) {
        (&self.queries, self.query_counts, self.answer_counts)
    }
}

/// Deterministic prover: one answer index per query index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProverStrategy {
    answers: Vec<u32>,
}

impl ProverStrategy {
    pub fn new(answers: Vec<u32>) -> Self {
        ProverStrategy { answers }
    }

    pub fn constant(queries: usize, answer: u32) -> Self {
        ProverStrategy {
            answers: vec![answer; queries],
        }
    }

    /// Strategy number `index` in lexicographic order over answer tables,
    /// query 0 being the most significant position.
    pub fn from_index(queries: usize, alphabet: usize, mut index: u64) -> Self {
        let mut answers = vec![0u32; queries];
        for slot in answers.iter_mut().rev() {
            *slot = (index % alphabet as u64) as u32;
            index /= alphabet as u64;
        }
        ProverStrategy { answers }
    }

    #[inline]
    pub fn answer(&self, query: usize) -> usize {
        self.answers[query] as usize
    }

    pub fn get(&self, query: usize) -> Option<usize> {
        self.answers.get(query).map(|&a| a as usize)
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn answers(&self) -> &[u32] {
        &self.answers
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameValue {
    pub value: Fraction,
    pub accepting_seeds: usize,
    pub strategies: (ProverStrategy, ProverStrategy),
}

/// Exact game value: the maximum over deterministic strategy pairs of the
/// accepting-seed fraction.
///
/// One prover's tables are enumerated lexicographically and the other side
/// plays its per-query best response, which is exact because the other
/// prover's answer to query `q` only affects seeds that ask `q`. The
/// enumerated side is whichever has fewer tables.
pub fn game_value_exact(game: &TwoProverGame) -> Result<GameValue> {
    game_value_exact_with_budget(game, VALUE_BUDGET)
}

pub fn game_value_exact_with_budget(game: &TwoProverGame, budget: u128) -> Result<GameValue> {
    let tables = |p: usize| {
        crate::error::sat_pow(game.answer_count(p) as u128, game.query_count(p) as u64)
    };
    let (fixed, free) = if tables(0) <= tables(1) { (0, 1) } else { (1, 0) };
    let work = tables(fixed)
        .saturating_mul(game.num_seeds() as u128)
        .saturating_mul(game.answer_count(free) as u128);
    check_budget("game value enumeration", work, budget)?;
    let count = tables(fixed) as u64;

    let mut seeds_by_query = vec![Vec::new(); game.query_count(free)];
    for r in 0..game.num_seeds() {
        seeds_by_query[game.query(r, free)].push(r);
    }
    let fixed_q = game.query_count(fixed);
    let fixed_a = game.answer_count(fixed);
    let free_a = game.answer_count(free);

    let accepts = |r: usize, a_fixed: usize, a_free: usize| {
        if fixed == 0 {
            game.accepts(r, a_fixed, a_free)
        } else {
            game.accepts(r, a_free, a_fixed)
        }
    };
    let score = |t: u64| -> usize {
        let s = ProverStrategy::from_index(fixed_q, fixed_a, t);
        seeds_by_query
            .iter()
            .map(|seeds| {
                (0..free_a)
                    .map(|a| {
                        seeds
                            .iter()
                            .filter(|&&r| accepts(r, s.answer(game.query(r, fixed)), a))
                            .count()
                    })
                    .max()
                    .unwrap_or(0)
            })
            .sum()
    };
    let better = |a: (usize, u64), b: (usize, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (best, t) = par::map_reduce(0..count, || (0, u64::MAX), |t| (score(t), t), better);

    let s_fixed = ProverStrategy::from_index(fixed_q, fixed_a, t);
    let s_free = ProverStrategy::new(
        seeds_by_query
            .iter()
            .map(|seeds| {
                let mut best_a = 0;
                let mut best_c = 0;
                for a in 0..free_a {
                    let c = seeds
                        .iter()
                        .filter(|&&r| accepts(r, s_fixed.answer(game.query(r, fixed)), a))
                        .count();
                    if c > best_c {
                        best_c = c;
                        best_a = a;
                    }
                }
                best_a as u32
            })
            .collect(),
    );
    let strategies = if fixed == 0 {
        (s_fixed, s_free)
    } else {
        (s_free, s_fixed)
    };
    Ok(GameValue {
        value: Fraction::new(best as u64, game.num_seeds() as u64),
        accepting_seeds: best,
        strategies,
    })
}

/// Monte Carlo acceptance estimate over uniformly sampled seeds.
pub fn game_value_sampled(
    game: &TwoProverGame,
    s1: &ProverStrategy,
    s2: &ProverStrategy,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    game.check_strategy(0, s1)?;
    game.check_strategy(1, s2)?;
    let mut rng = rng::seeded(seed);
    let hits = (0..samples)
        .filter(|_| {
            let r = rng.gen_range(0..game.num_seeds());
            game.accepts(r, s1.answer(game.query(r, 0)), s2.answer(game.query(r, 1)))
        })
        .count();
    Ok(hits as f64 / samples as f64)
}
