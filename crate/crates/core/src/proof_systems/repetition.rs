use super::{TwoProverGame, TABLE_BUDGET};
use crate::error::{check_budget, invalid, sat_pow, Result};

/// `ell`-fold parallel repetition. Seeds, queries and answers become
/// `ell`-tuples encoded in mixed radix with the first coordinate most
/// significant; the predicate accepts iff every coordinate accepts.
pub fn parallel_repeat(game: &TwoProverGame, ell: usize) -> Result<TwoProverGame> {
    if ell == 0 {
        return Err(invalid("repetition count must be at least 1"));
    }
    let (queries, qc, ac) = game.raw_parts();
    let r = game.num_seeds();
    let e = ell as u64;
    let cells = sat_pow(r as u128, e)
        .saturating_mul(sat_pow(ac[0] as u128, e))
        .saturating_mul(sat_pow(ac[1] as u128, e));
    check_budget("repeated game table", cells, TABLE_BUDGET)?;

    let seeds = r.pow(ell as u32);
    let digits = |mut x: usize, base: usize| {
        let mut d = vec![0usize; ell];
        for slot in d.iter_mut().rev() {
            *slot = x % base;
            x /= base;
        }
        d
    };
    let encode = |d: &[usize], base: usize| d.iter().fold(0usize, |acc, &x| acc * base + x);

    let rep_queries: Vec<[u32; 2]> = (0..seeds)
        .map(|s| {
            let coords = digits(s, r);
            let mut out = [0u32; 2];
            for (p, slot) in out.iter_mut().enumerate() {
                let qs: Vec<usize> = coords.iter().map(|&c| queries[c][p] as usize).collect();
                *slot = encode(&qs, qc[p]) as u32;
            }
            out
        })
        .collect();
    let rep_qc = [qc[0].pow(ell as u32), qc[1].pow(ell as u32)];
    let rep_ac = [ac[0].pow(ell as u32), ac[1].pow(ell as u32)];

    let repeated = TwoProverGame::from_predicate(rep_queries, rep_qc, rep_ac, |s, a1, a2| {
        let seeds = digits(s, r);
        let a1s = digits(a1, ac[0]);
        let a2s = digits(a2, ac[1]);
        (0..ell).all(|c| game.accepts(seeds[c], a1s[c], a2s[c]))
    })?;
    if game.has_functional_answer() {
        repeated.with_functional_answer()
    } else {
        Ok(repeated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::random_3sat5;
    use crate::proof_systems::{clause_variable_game, game_value_exact};

    #[test]
    fn single_repetition_is_identity() {
        let f = random_3sat5(3, 5).unwrap();
        let g = clause_variable_game(&f).unwrap();
        assert_eq!(parallel_repeat(&g, 1).unwrap(), g);
    }

    #[test]
    fn squared_seed_count() {
        let f = random_3sat5(3, 5).unwrap();
        let g = clause_variable_game(&f).unwrap();
        let g2 = parallel_repeat(&g, 2).unwrap();
        assert_eq!(g2.num_seeds(), 225);
        assert_eq!(g2.query_count(0), 25);
        assert_eq!(g2.answer_count(0), 64);
        assert!(g2.has_functional_answer());
    }

    #[test]
    fn value_sandwich_on_chsh() {
        let g = TwoProverGame::from_predicate(
            vec![[0, 0], [0, 1], [1, 0], [1, 1]],
            [2, 2],
            [2, 2],
            |r, a1, a2| (a1 ^ a2) == ((r >> 1) & r & 1),
        )
        .unwrap();
        let v = game_value_exact(&g).unwrap().value;
        let v2 = game_value_exact(&parallel_repeat(&g, 2).unwrap()).unwrap().value;
        assert!(v2 <= v && v2 >= v * v);
    }

    #[test]
    fn rejects_zero_and_oversized() {
        let f = random_3sat5(3, 5).unwrap();
        let g = clause_variable_game(&f).unwrap();
        assert!(parallel_repeat(&g, 0).is_err());
        assert!(parallel_repeat(&g, 4).is_err());
    }
}
