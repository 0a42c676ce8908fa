use super::{ProverStrategy, TwoProverGame};
use crate::formulas::{Assignment, Sat5Formula};
use crate::error::Result;

/// The clause/variable game: seed `r = 3·clause + position`. Prover 1 gets
/// the clause and answers a 3-bit assignment (bit `p` for the variable at
/// position `p`); prover 2 gets the variable at the chosen position and
/// answers one bit. Accept iff the triple satisfies the clause and the two
/// provers agree on the queried variable.
pub fn clause_variable_game(formula: &Sat5Formula) -> Result<TwoProverGame> {
    let m = formula.num_clauses();
    let queries = (0..3 * m)
        .map(|r| [(r / 3) as u32, formula.clause(r / 3)[r % 3].var as u32])
        .collect();
    TwoProverGame::from_predicate(queries, [m, formula.num_vars()], [8, 2], |r, a1, a2| {
        let clause = formula.clause(r / 3);
        let pos = r % 3;
        let satisfies = clause
            .iter()
            .enumerate()
            .any(|(p, l)| l.eval(a1 >> p & 1 == 1));
        satisfies && (a1 >> pos & 1) == a2
    })?
    .with_functional_answer()
}

/// Both provers answer according to one global assignment. On a clause the
/// assignment falsifies, prover 1 flips the first variable so its answer
/// satisfies the clause, and only one of the clause's three seeds rejects.
pub fn strategies_from_assignment(
    formula: &Sat5Formula,
    assignment: &Assignment,
) -> (ProverStrategy, ProverStrategy) {
    let p1 = (0..formula.num_clauses())
        .map(|c| {
            let clause = formula.clause(c);
            let bits = clause
                .iter()
                .enumerate()
                .fold(0u32, |acc, (p, l)| acc | (assignment.get(l.var) as u32) << p);
            let satisfied = clause.iter().any(|l| l.eval(assignment.get(l.var)));
            if satisfied { bits } else { bits ^ 1 }
        })
        .collect();
    let p2 = assignment.values().iter().map(|&v| v as u32).collect();
    (ProverStrategy::new(p1), ProverStrategy::new(p2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{max_sat, random_3sat5};
    use crate::proof_systems::game_value_exact;
    use crate::Fraction;

    #[test]
    fn shape_for_three_variables() {
        let f = random_3sat5(3, 11).unwrap();
        let g = clause_variable_game(&f).unwrap();
        assert_eq!(g.num_seeds(), 15);
        assert_eq!(g.query_count(0), 5);
        assert_eq!(g.query_count(1), 3);
    }

    #[test]
    fn unsatisfying_triple_has_no_functional_answer() {
        let f = random_3sat5(3, 2).unwrap();
        let g = clause_variable_game(&f).unwrap();
        let clause = f.clause(0);
        // the unique falsifying triple sets every literal false
        let bad = clause
            .iter()
            .enumerate()
            .fold(0usize, |acc, (p, l)| acc | (!l.positive as usize) << p);
        for pos in 0..3 {
            assert_eq!(g.functional_answer(pos, bad), None);
            assert_eq!(g.functional_answer(pos, bad ^ 1), Some((bad ^ 1) >> pos & 1));
        }
    }

    #[test]
    fn honest_strategies_accept_everything_when_satisfiable() {
        for seed in 0..20 {
            let f = random_3sat5(3, seed).unwrap();
            let ms = max_sat(f.formula()).unwrap();
            if ms.best_count != f.num_clauses() {
                continue;
            }
            let g = clause_variable_game(&f).unwrap();
            let (s1, s2) = strategies_from_assignment(&f, &ms.witness);
            assert_eq!(g.acceptance(&s1, &s2).unwrap(), Fraction::new(1, 1));
            assert_eq!(game_value_exact(&g).unwrap().value, Fraction::new(1, 1));
        }
    }
}
