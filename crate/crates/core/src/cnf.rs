//! CNF formulas, DIMACS input, model counting and the brute-force deciders
//! for E-MajSAT, E-MinSAT and E-ExaSAT.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of variables the brute-force routines accept.
pub const DEFAULT_VAR_CAP: usize = 30;

/// A literal over variable `var` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: usize,
    positive: bool,
}

impl Literal {
    pub fn new(var: usize, positive: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, positive }
    }

    pub fn var(self) -> usize {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }
}

/// A nonempty disjunction of literals, sorted and free of duplicates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.0.binary_search(&lit).is_ok()
    }
}

/// A CNF formula over variables `1..=num_vars`.
///
/// Construction enforces that every variable occurs, no clause is empty and
/// no clause holds a variable in both polarities.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    /// Builds a formula from DIMACS-style signed literals.
    pub fn new(num_vars: usize, clauses: &[Vec<i64>]) -> Result<Self> {
        let mut built = Vec::with_capacity(clauses.len());
        for (j, raw) in clauses.iter().enumerate() {
            built.push(make_clause(num_vars, raw).map_err(|msg| {
                Error::InvalidFormula(format!("clause {}: {msg}", j + 1))
            })?);
        }
        Self::from_clauses(num_vars, built).map_err(Error::InvalidFormula)
    }

    fn from_clauses(num_vars: usize, clauses: Vec<Clause>) -> std::result::Result<Self, String> {
        if num_vars == 0 {
            return Err("a formula needs at least one variable".into());
        }
        let mut seen = vec![false; num_vars + 1];
        for c in &clauses {
            for l in c.literals() {
                seen[l.var] = true;
            }
        }
        if let Some(v) = (1..=num_vars).find(|&v| !seen[v]) {
            return Err(format!("variable {v} does not occur in any clause"));
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Evaluates the formula; `assignment[v - 1]` is the value of `x_v`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.literals()
                .iter()
                .any(|l| assignment[l.var - 1] == l.positive)
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c.literals() {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    /// Clauses as (positive mask, negative mask) over bit `v - 1`.
    fn masks(&self) -> Vec<(u64, u64)> {
        self.clauses
            .iter()
            .map(|c| {
                let mut pos = 0u64;
                let mut neg = 0u64;
                for l in c.literals() {
                    if l.positive {
                        pos |= 1 << (l.var - 1);
                    } else {
                        neg |= 1 << (l.var - 1);
                    }
                }
                (pos, neg)
            })
            .collect()
    }
}

impl fmt::Debug for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<Vec<i64>> = self
            .clauses
            .iter()
            .map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect())
            .collect();
        write!(f, "CnfFormula(n={}, {:?})", self.num_vars, clauses)
    }
}

fn make_clause(num_vars: usize, raw: &[i64]) -> std::result::Result<Clause, String> {
    if raw.is_empty() {
        return Err("empty clause".into());
    }
    let mut lits = Vec::with_capacity(raw.len());
    for &x in raw {
        let var = x.unsigned_abs() as usize;
        if x == 0 || var > num_vars {
            return Err(format!("literal {x} out of range 1..={num_vars}"));
        }
        lits.push(Literal::new(var, x > 0));
    }
    lits.sort();
    lits.dedup();
    if lits.windows(2).any(|p| p[0].var == p[1].var) {
        return Err("clause contains a variable in both polarities".into());
    }
    Ok(Clause(lits))
}

/// Parses DIMACS CNF text.
///
/// Comment lines start with `c`; a line starting with `%` ends the input.
/// Clauses may span lines and must each end with `0`.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let err = |line: usize, message: String| Error::Dimacs { line, message };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, "duplicate problem line".into()));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", n, m] => n.parse::<usize>().ok().zip(m.parse::<usize>().ok()),
                _ => None,
            };
            let Some((n, m)) = parsed else {
                return Err(err(lineno, format!("malformed header `{trimmed}`")));
            };
            if n == 0 {
                return Err(err(lineno, "header declares zero variables".into()));
            }
            header = Some((n, m, lineno));
            continue;
        }
        let Some((n, _, _)) = header else {
            return Err(err(lineno, "clause before the `p cnf` header".into()));
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("invalid token `{tok}`")))?;
            if current.is_empty() {
                current_line = lineno;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(err(lineno, "empty clause".into()));
                }
                let clause = make_clause(n, &current).map_err(|msg| err(current_line, msg))?;
                clauses.push(clause);
                current.clear();
            } else if lit.unsigned_abs() as usize > n {
                return Err(err(lineno, format!("literal {lit} out of range 1..={n}")));
            } else {
                current.push(lit);
            }
        }
    }

    let Some((n, m, header_line)) = header else {
        return Err(err(0, "missing `p cnf` header".into()));
    };
    if !current.is_empty() {
        return Err(err(current_line, "clause not terminated by 0".into()));
    }
    if clauses.len() != m {
        return Err(err(
            header_line,
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::from_clauses(n, clauses).map_err(|msg| err(header_line, msg))
}

/// Values for `x_1..x_k`, in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialAssignment(pub Vec<bool>);

impl PartialAssignment {
    pub fn empty() -> Self {
        PartialAssignment(Vec::new())
    }

    /// The `index`-th prefix of length `k` in lexicographic order
    /// (false before true, `x_1` most significant).
    pub fn nth(k: usize, index: u64) -> Self {
        PartialAssignment((0..k).map(|i| index >> (k - 1 - i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

fn check_vars(formula: &CnfFormula, cap: usize) -> Result<()> {
    if formula.num_vars > cap.min(63) {
        return Err(Error::TooManyVariables {
            vars: formula.num_vars,
            cap: cap.min(63),
        });
    }
    Ok(())
}

fn count_extensions(masks: &[(u64, u64)], n: usize, prefix: &[bool]) -> u64 {
    let k = prefix.len();
    let mut fixed = 0u64;
    for (i, &b) in prefix.iter().enumerate() {
        if b {
            fixed |= 1 << i;
        }
    }
    let prefix_mask = (1u64 << k) - 1;
    // Clauses still open after the prefix, restricted to the free variables.
    let mut open = Vec::with_capacity(masks.len());
    for &(pos, neg) in masks {
        if pos & fixed != 0 || neg & !fixed & prefix_mask != 0 {
            continue;
        }
        let (p, q) = (pos >> k, neg >> k);
        if p | q == 0 {
            return 0;
        }
        open.push((p, q));
    }
    let free = n - k;
    let mut count = 0u64;
    for a in 0..1u64 << free {
        if open.iter().all(|&(p, q)| a & p != 0 || !a & q != 0) {
            count += 1;
        }
    }
    count
}

/// Number of full assignments extending `prefix` that satisfy `formula`.
pub fn count_models(formula: &CnfFormula, prefix: &PartialAssignment) -> Result<BigUint> {
    check_vars(formula, DEFAULT_VAR_CAP)?;
    if prefix.len() > formula.num_vars {
        return Err(Error::Parameter(format!(
            "prefix of length {} exceeds {} variables",
            prefix.len(),
            formula.num_vars
        )));
    }
    Ok(BigUint::from(count_extensions(
        &formula.masks(),
        formula.num_vars,
        prefix.values(),
    )))
}

/// Outcome of a quantified counting query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatDecision {
    #[serde(with = "yes_no")]
    pub answer: bool,
    /// First prefix (lexicographic order) meeting the condition.
    pub witness: Option<PartialAssignment>,
    /// Number of satisfying extensions of the witness.
    #[serde(with = "crate::game::decimal::option")]
    pub witness_count: Option<BigUint>,
}

mod yes_no {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(if *v { "yes" } else { "no" })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match String::deserialize(d)?.as_str() {
            "yes" => Ok(true),
            "no" => Ok(false),
            other => Err(serde::de::Error::custom(format!("expected yes or no, got `{other}`"))),
        }
    }
}

/// Runs `accept(count)` over all prefixes of length `k` and returns the first
/// accepted one.
pub fn decide_prefix<F>(formula: &CnfFormula, k: usize, accept: F) -> Result<SatDecision>
where
    F: Fn(u64) -> bool + Sync,
{
    check_vars(formula, DEFAULT_VAR_CAP)?;
    if k > formula.num_vars {
        return Err(Error::Parameter(format!(
            "k = {k} outside 0..={}",
            formula.num_vars
        )));
    }
    let masks = formula.masks();
    let n = formula.num_vars;
    let found = (0..1u64 << k).into_par_iter().find_map_first(|i| {
        let prefix = PartialAssignment::nth(k, i);
        let c = count_extensions(&masks, n, prefix.values());
        accept(c).then_some((prefix, c))
    });
    Ok(match found {
        Some((prefix, c)) => SatDecision {
            answer: true,
            witness: Some(prefix),
            witness_count: Some(BigUint::from(c)),
        },
        None => SatDecision {
            answer: false,
            witness: None,
            witness_count: None,
        },
    })
}

/// Is there a prefix with strictly more than `2^(n-k-1)` satisfying extensions?
pub fn decide_emajsat(formula: &CnfFormula, k: usize) -> Result<SatDecision> {
    let free = formula.num_vars.saturating_sub(k) as u32;
    decide_prefix(formula, k, |c| 2 * c as u128 > 1u128 << free)
}

/// Is there a prefix with at most `2^(n-k-1)` satisfying extensions?
pub fn decide_eminsat(formula: &CnfFormula, k: usize) -> Result<SatDecision> {
    let free = formula.num_vars.saturating_sub(k) as u32;
    decide_prefix(formula, k, |c| 2 * c as u128 <= 1u128 << free)
}

/// Is there a prefix with exactly `ell` satisfying extensions?
pub fn decide_eexasat(formula: &CnfFormula, k: usize, ell: &BigUint) -> Result<SatDecision> {
    let target = ell.clone();
    decide_prefix(formula, k, move |c| BigUint::from(c) == target)
}

/// Every formula with `1..=max_vars` variables and `1..=max_clauses`
/// distinct clauses in which each variable occurs. Clause sets are listed
/// once, in canonical order, grouped by variable count.
pub fn seed_suite(max_vars: usize, max_clauses: usize) -> Vec<CnfFormula> {
    let mut out = Vec::new();
    for n in 1..=max_vars {
        let mut clauses: Vec<Clause> = Vec::new();
        for code in 1..3usize.pow(n as u32) {
            let mut lits = Vec::new();
            let mut c = code;
            for v in 1..=n {
                match c % 3 {
                    1 => lits.push(Literal::new(v, true)),
                    2 => lits.push(Literal::new(v, false)),
                    _ => {}
                }
                c /= 3;
            }
            clauses.push(Clause(lits));
        }
        clauses.sort();
        let mut pick = Vec::new();
        choose(&clauses, max_clauses, 0, &mut pick, &mut |set| {
            if let Ok(f) = CnfFormula::from_clauses(n, set.to_vec()) {
                out.push(f);
            }
        });
    }
    out
}

fn choose<F: FnMut(&[Clause])>(
    pool: &[Clause],
    max: usize,
    from: usize,
    pick: &mut Vec<Clause>,
    emit: &mut F,
) {
    for i in from..pool.len() {
        pick.push(pool[i].clone());
        emit(pick);
        if pick.len() < max {
            choose(pool, max, i + 1, pick, emit);
        }
        pick.pop();
    }
}

/// `2^(n-k)`, the number of extensions of a length-`k` prefix.
pub fn extension_space(formula: &CnfFormula, k: usize) -> BigUint {
    BigUint::one() << formula.num_vars.saturating_sub(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn or2() -> CnfFormula {
        parse_dimacs("p cnf 2 1\n1 2 0").unwrap()
    }

    fn and2() -> CnfFormula {
        parse_dimacs("p cnf 2 2\n1 0\n2 0\n").unwrap()
    }

    #[test]
    fn parses_and_rejects() {
        let f = or2();
        assert_eq!((f.num_vars(), f.num_clauses()), (2, 1));
        let parse = |s: &str| parse_dimacs(s).unwrap_err().to_string();
        assert!(parse("p cnf 1 1\n1 -1 0").contains("both polarities"));
        assert!(parse("p cnf 3 1\n1 2 0").contains("variable 3 does not occur"));
        assert!(parse("p cnf 2 1\n1 3 0").contains("out of range"));
        assert!(parse("p cnf x 1\n1 0").contains("malformed header"));
        assert!(parse("p cnf 1 1\n0\n1 0").contains("empty clause"));
        assert!(parse("p cnf 1 1\n1").contains("not terminated"));
        assert!(parse("p cnf 1 2\n1 0").contains("declares 2 clauses"));
        assert!(parse("1 0").contains("before"));
        let f = parse_dimacs("c hello\np cnf 2 1\n1 1\n 2 0\n%\n0\n").unwrap();
        assert_eq!(f.clauses()[0].literals().len(), 2);
    }

    #[test]
    fn model_counts() {
        let f = or2();
        let c = |p: &[bool]| count_models(&f, &PartialAssignment(p.to_vec())).unwrap();
        assert_eq!(c(&[]), BigUint::from(3u32));
        assert_eq!(c(&[true]), BigUint::from(2u32));
        let g = and2();
        assert_eq!(
            count_models(&g, &PartialAssignment(vec![false])).unwrap(),
            BigUint::from(0u32)
        );
    }

    #[test]
    fn deciders() {
        let f = or2();
        let d = decide_emajsat(&f, 1).unwrap();
        assert!(d.answer);
        assert_eq!(d.witness, Some(PartialAssignment(vec![true])));
        assert!(!decide_emajsat(&and2(), 1).unwrap().answer);
        assert!(decide_emajsat(&and2(), 2).unwrap().answer);

        let d = decide_eminsat(&and2(), 1).unwrap();
        assert_eq!(d.witness, Some(PartialAssignment(vec![false])));
        let d = decide_eminsat(&f, 1).unwrap();
        assert_eq!(d.witness, Some(PartialAssignment(vec![false])));

        let e = |l: u32| decide_eexasat(&f, 1, &BigUint::from(l)).unwrap();
        assert_eq!(e(2).witness, Some(PartialAssignment(vec![true])));
        assert_eq!(e(1).witness, Some(PartialAssignment(vec![false])));
        assert!(!e(4).answer);
        assert!(!e(0).answer);
        assert!(decide_emajsat(&f, 3).is_err());
    }

    #[test]
    fn dimacs_round_trip() {
        let f = parse_dimacs("p cnf 3 2\n-1 2 0\n3 -2 0\n").unwrap();
        assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }
}
