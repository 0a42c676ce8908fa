//! CNF formulas, DIMACS I/O, 3SAT-5 generation, and the exhaustive MAX-SAT oracle.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, invalid, Error, Result};
use crate::{par, rng};

/// Default cap on variables for exhaustive enumeration.
pub const MAX_SAT_BUDGET_VARS: usize = 24;

const REPAIR_ATTEMPTS: usize = 1000;
const RESEED_ROUNDS: u64 = 8;

/// A literal over a 0-based variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn new(var: usize, positive: bool) -> Self {
        Lit { var, positive }
    }

    /// From the signed 1-based DIMACS form. `0` is not a literal.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        Some(Lit {
            var: value.unsigned_abs() as usize - 1,
            positive: value > 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    #[inline]
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Self> {
        for (ci, clause) in clauses.iter().enumerate() {
            if let Some(l) = clause.iter().find(|l| l.var >= num_vars) {
                return Err(invalid(format!(
                    "clause {ci} references variable {} but the formula has {num_vars}",
                    l.var + 1
                )));
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Builds from signed 1-based literals.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self> {
        let clauses = clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&v| Lit::from_dimacs(v).ok_or_else(|| invalid("literal 0 inside clause")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> &[Lit] {
        &self.clauses[index]
    }

    pub fn satisfied_count(&self, assignment: &Assignment) -> usize {
        assert_eq!(assignment.len(), self.num_vars, "assignment length mismatch");
        self.clauses
            .iter()
            .filter(|c| c.iter().any(|l| l.eval(assignment.get(l.var))))
            .count()
    }

    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.satisfied_count(assignment) == self.clauses.len()
    }

    /// Copy with clause `index` removed.
    pub fn without_clause(&self, index: usize) -> CnfFormula {
        let mut clauses = self.clauses.clone();
        clauses.remove(index);
        CnfFormula {
            num_vars: self.num_vars,
            clauses,
        }
    }

    /// Occurrence count per variable.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.num_vars];
        for l in self.clauses.iter().flatten() {
            occ[l.var] += 1;
        }
        occ
    }
}

/// A 3CNF formula in which every variable occurs in exactly five clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sat5Formula {
    base: CnfFormula,
}

impl Sat5Formula {
    pub fn new(base: CnfFormula) -> Result<Self> {
        let n = base.num_vars();
        if n == 0 || !n.is_multiple_of(3) {
            return Err(invalid(format!("3SAT-5 needs a positive multiple of 3 variables, got {n}")));
        }
        if base.num_clauses() * 3 != 5 * n {
            return Err(invalid(format!(
                "3SAT-5 on {n} variables needs {} clauses, got {}",
                5 * n / 3,
                base.num_clauses()
            )));
        }
        for (ci, c) in base.clauses().iter().enumerate() {
            if c.len() != 3 {
                return Err(invalid(format!("clause {ci} has {} literals", c.len())));
            }
            if c[0].var == c[1].var || c[0].var == c[2].var || c[1].var == c[2].var {
                return Err(invalid(format!("clause {ci} repeats a variable")));
            }
        }
        if let Some((v, &k)) = base.occurrences().iter().enumerate().find(|(_, &k)| k != 5) {
            return Err(invalid(format!("variable {} occurs {k} times", v + 1)));
        }
        Ok(Sat5Formula { base })
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.base
    }

    pub fn num_vars(&self) -> usize {
        self.base.num_vars()
    }

    pub fn num_clauses(&self) -> usize {
        self.base.num_clauses()
    }

    pub fn clause(&self, index: usize) -> [Lit; 3] {
        let c = self.base.clause(index);
        [c[0], c[1], c[2]]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Variable `i` takes bit `i` of `bits`.
    pub fn from_bits(num_vars: usize, bits: u64) -> Self {
        Assignment {
            values: (0..num_vars).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn to_bits(&self) -> u64 {
        self.values
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | (v as u64) << i)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, var: usize) -> bool {
        self.values[var]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

pub fn parse_dimacs(text: &[u8]) -> Result<CnfFormula> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Dimacs {
        line: 0,
        msg: format!("not utf-8: {e}"),
    })?;
    let err = |line: usize, msg: String| Error::Dimacs { line, msg };

    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, "duplicate header".into()));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(lineno, format!("malformed header `{trimmed}`")));
            }
            let vars = parts[2]
                .parse()
                .map_err(|_| err(lineno, format!("bad variable count `{}`", parts[2])))?;
            let count = parts[3]
                .parse()
                .map_err(|_| err(lineno, format!("bad clause count `{}`", parts[3])))?;
            header = Some((vars, count));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(err(lineno, "clause before `p cnf` header".into()));
        };
        for tok in trimmed.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("bad literal `{tok}`")))?;
            match Lit::from_dimacs(v) {
                None => clauses.push(std::mem::take(&mut current)),
                Some(l) if l.var >= vars => {
                    return Err(err(
                        lineno,
                        format!("literal {v} exceeds the declared {vars} variables"),
                    ))
                }
                Some(l) => current.push(l),
            }
        }
    }

    let Some((vars, count)) = header else {
        return Err(err(last_line, "missing `p cnf` header".into()));
    };
    if !current.is_empty() {
        return Err(err(last_line, "last clause is not 0-terminated".into()));
    }
    if clauses.len() != count {
        return Err(err(
            last_line,
            format!("header declares {count} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(vars, clauses)
}

/// DIMACS text; a `c seed <n>` comment is written first when `seed` is given.
pub fn emit_dimacs(formula: &CnfFormula, seed: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(s) = seed {
        let _ = writeln!(out, "c seed {s}");
    }
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        for l in clause {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

/// Random 3SAT-5 formula by the configuration model: five copies of every
/// variable are shuffled and cut into triples, repeated variables inside a
/// triple are repaired by random transpositions, and polarities are uniform.
pub fn random_3sat5(num_vars: usize, seed: u64) -> Result<Sat5Formula> {
    if num_vars < 3 || !num_vars.is_multiple_of(3) {
        return Err(invalid(format!(
            "3SAT-5 needs num_vars >= 3 and divisible by 3, got {num_vars}"
        )));
    }
    for round in 0..RESEED_ROUNDS {
        let round_seed = if round == 0 {
            seed
        } else {
            rng::derive_seed(seed, round)
        };
        let mut rng = rng::seeded(round_seed);
        let Some(slots) = configuration_triples(num_vars, &mut rng) else {
            log::debug!("3SAT-5 repair failed for seed {round_seed}, reseeding");
            continue;
        };
        let clauses = slots
            .chunks(3)
            .map(|t| t.iter().map(|&v| Lit::new(v, rng.gen_bool(0.5))).collect())
            .collect();
        return Sat5Formula::new(CnfFormula::new(num_vars, clauses)?);
    }
    Err(Error::RetriesExhausted {
        what: "3SAT-5 generation",
        attempts: RESEED_ROUNDS as usize,
    })
}

fn configuration_triples(num_vars: usize, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let mut slots: Vec<usize> = (0..num_vars).flat_map(|v| [v; 5]).collect();
    slots.shuffle(rng);
    let len = slots.len();
    let has_dup = |s: &[usize], t: usize| {
        let b = 3 * t;
        s[b] == s[b + 1] || s[b] == s[b + 2] || s[b + 1] == s[b + 2]
    };

    let mut attempts = 0;
    while let Some(t) = (0..len / 3).find(|&t| has_dup(&slots, t)) {
        // position inside the bad triple that duplicates an earlier one
        let b = 3 * t;
        let i = if slots[b + 1] == slots[b] { b + 1 } else { b + 2 };
        loop {
            attempts += 1;
            if attempts > REPAIR_ATTEMPTS {
                return None;
            }
            let j = rng.gen_range(0..len);
            if j / 3 == t {
                continue;
            }
            let (vi, vj) = (slots[i], slots[j]);
            let u = j / 3;
            let u_has_vi = (0..3).any(|o| 3 * u + o != j && slots[3 * u + o] == vi);
            let t_has_vj = (0..3).any(|o| b + o != i && slots[b + o] == vj);
            if !u_has_vi && !t_has_vj {
                slots.swap(i, j);
                break;
            }
        }
    }
    Some(slots)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSat {
    pub best_count: usize,
    pub witness: Assignment,
}

/// Exhaustive MAX-SAT over all `2^num_vars` assignments. Ties go to the
/// numerically smallest assignment (variable `i` is bit `i`).
pub fn max_sat(formula: &CnfFormula) -> Result<MaxSat> {
    max_sat_with_budget(formula, MAX_SAT_BUDGET_VARS)
}

pub fn max_sat_with_budget(formula: &CnfFormula, max_vars: usize) -> Result<MaxSat> {
    let n = formula.num_vars();
    check_budget("max-sat variables", n as u128, max_vars.min(63) as u128)?;
    let masks: Vec<(u64, u64)> = formula
        .clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u64, 0u64), |(p, q), l| {
                if l.positive {
                    (p | 1 << l.var, q)
                } else {
                    (p, q | 1 << l.var)
                }
            })
        })
        .collect();
    let score = |x: u64| {
        masks
            .iter()
            .filter(|&&(p, q)| x & p != 0 || !x & q != 0)
            .count()
    };

    let total = 1u64 << n;
    let chunk = 1u64 << n.min(12);
    let chunks = total / chunk;
    let better = |a: (usize, u64), b: (usize, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (best_count, bits) = par::map_reduce(
        0..chunks,
        || (0, u64::MAX),
        |c| {
            (c * chunk..(c + 1) * chunk).fold((0, u64::MAX), |acc, x| better(acc, (score(x), x)))
        },
        better,
    );
    Ok(MaxSat {
        best_count,
        witness: Assignment::from_bits(n, bits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(v: &[i64]) -> Vec<Lit> {
        v.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect()
    }

    #[test]
    fn parse_unit_pair() {
        let f = parse_dimacs(b"p cnf 1 2\n1 0\n-1 0\n").unwrap();
        assert_eq!(f.num_vars(), 1);
        assert_eq!(f.clauses(), &[lits(&[1]), lits(&[-1])]);
    }

    #[test]
    fn parse_preserves_literal_order() {
        let f = parse_dimacs(b"p cnf 3 1\n1 -2 3 0\n").unwrap();
        assert_eq!(f.clauses(), &[lits(&[1, -2, 3])]);
    }

    #[test]
    fn parse_clause_spanning_lines_and_comments() {
        let f = parse_dimacs(b"c hello\np cnf 3 2\n1 -2\n 3 0 2 0\n").unwrap();
        assert_eq!(f.clauses(), &[lits(&[1, -2, 3]), lits(&[2])]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_dimacs(b"p cnf 1 1\n2 0\n"),
            Err(Error::Dimacs { line: 2, .. })
        ));
        assert!(parse_dimacs(b"p cnf 2 1\n1 2\n").is_err());
        assert!(parse_dimacs(b"p cnf x 1\n1 0\n").is_err());
        assert!(parse_dimacs(b"p dnf 1 1\n1 0\n").is_err());
        assert!(parse_dimacs(b"1 0\n").is_err());
        assert!(parse_dimacs(b"p cnf 2 2\n1 0\n").is_err());
    }

    #[test]
    fn emit_writes_seed_comment() {
        let f = parse_dimacs(b"p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(emit_dimacs(&f, Some(9)), "c seed 9\np cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn sat5_shapes() {
        let f = random_3sat5(3, 0).unwrap();
        assert_eq!(f.num_clauses(), 5);
        assert!(matches!(random_3sat5(4, 0), Err(Error::InvalidParameter(_))));
        assert!(random_3sat5(0, 0).is_err());

        let f = random_3sat5(6, 1).unwrap();
        assert_eq!(f.num_clauses(), 10);
        assert_eq!(f.formula().occurrences(), vec![5; 6]);
    }

    #[test]
    fn sat5_is_deterministic() {
        assert_eq!(random_3sat5(9, 42).unwrap(), random_3sat5(9, 42).unwrap());
    }

    #[test]
    fn sat5_validation_rejects_repeats() {
        let f = CnfFormula::from_dimacs_clauses(
            3,
            &[&[1, 1, 2], &[1, 2, 3], &[1, 2, 3], &[1, 2, 3], &[2, 3, 3]],
        )
        .unwrap();
        assert!(Sat5Formula::new(f).is_err());
    }

    #[test]
    fn max_sat_complementary_units() {
        let f = parse_dimacs(b"p cnf 1 2\n1 0\n-1 0\n").unwrap();
        let r = max_sat(&f).unwrap();
        assert_eq!(r.best_count, 1);
        // both assignments score 1; smallest pattern wins
        assert_eq!(r.witness.to_bits(), 0);
    }

    #[test]
    fn max_sat_satisfiable_reaches_clause_count() {
        let f = parse_dimacs(b"p cnf 3 2\n1 2 0\n-1 3 0\n").unwrap();
        let r = max_sat(&f).unwrap();
        assert_eq!(r.best_count, 2);
        assert!(f.is_satisfied_by(&r.witness));
        assert_eq!(r.witness.to_bits(), 2);
    }

    #[test]
    fn max_sat_budget() {
        let f = CnfFormula::new(25, vec![]).unwrap();
        assert!(matches!(max_sat(&f), Err(Error::BudgetExceeded { .. })));
        assert_eq!(max_sat(&CnfFormula::new(0, vec![]).unwrap()).unwrap().best_count, 0);
    }
}
