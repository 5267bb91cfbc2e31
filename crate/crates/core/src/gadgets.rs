//! Digit-separated gadget weights that encode satisfying assignments.
//!
//! Every weight is a sum of powers of ten placed in disjoint digit blocks:
//! one block per variable (the leading part), one per clause (counting true
//! literals) and, for sets 2 and 4, a second clause block that records the
//! complement of that count. No block can carry into the next, so a
//! coalition hits the quota target exactly when it picks one literal per
//! variable and completes every clause counter.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cnf::{self, CnfFormula, PartialAssignment};
use crate::counting;
use crate::error::{Error, Result};
use crate::game::{Coalition, Weight};

/// The four gadget weight systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightSet {
    One,
    Two,
    Three,
    Four,
}

impl WeightSet {
    pub const ALL: [WeightSet; 4] = [
        WeightSet::One,
        WeightSet::Two,
        WeightSet::Three,
        WeightSet::Four,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(WeightSet::One),
            2 => Ok(WeightSet::Two),
            3 => Ok(WeightSet::Three),
            4 => Ok(WeightSet::Four),
            _ => Err(Error::Parameter(format!("weight set must be 1..=4, got {id}"))),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            WeightSet::One => 1,
            WeightSet::Two => 2,
            WeightSet::Three => 3,
            WeightSet::Four => 4,
        }
    }

    /// Sets 2 and 4 carry the complementary clause block `C'`.
    pub fn has_complement(self) -> bool {
        matches!(self, WeightSet::Two | WeightSet::Four)
    }

    /// Sets 3 and 4 add 1 to every literal weight and space variable blocks
    /// two digits apart.
    pub fn has_unit_offset(self) -> bool {
        matches!(self, WeightSet::Three | WeightSet::Four)
    }
}

impl fmt::Display for WeightSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GadgetPlayer {
    pub label: String,
    pub weight: Weight,
}

/// One built weight system together with its quota target.
#[derive(Clone, Debug)]
pub struct GadgetWeights {
    formula: CnfFormula,
    set: WeightSet,
    k: usize,
    c: u32,
    t: u32,
    t_prime: Option<u32>,
    q_target: BigUint,
    /// `a_1..a_k, b_1..b_k`.
    m_players: Vec<GadgetPlayer>,
    /// `a_{k+1}..a_n, b_{k+1}..b_n`.
    a_players: Vec<GadgetPlayer>,
    /// `c_{1,0}..c_{m,r}`.
    c_players: Vec<GadgetPlayer>,
    /// `c'_{1,0}..c'_{m,r}` (sets 2 and 4 only).
    c_prime_players: Vec<GadgetPlayer>,
}

pub(crate) fn pow10(e: u32) -> BigUint {
    BigUint::from(10u32).pow(e)
}

pub(crate) fn pow2(e: u32) -> BigUint {
    BigUint::one() << e
}

/// Smallest `t >= 1` with `10^t > bound`.
pub(crate) fn min_exponent_above(bound: &BigUint) -> u32 {
    let mut t = 1;
    let mut p = BigUint::from(10u32);
    while &p <= bound {
        p *= 10u32;
        t += 1;
    }
    t
}

/// `ceil(log2 n)` for `n >= 1`.
pub(crate) fn ceil_log2(n: usize) -> u32 {
    usize::BITS - (n - 1).leading_zeros()
}

pub fn build_weight_set(
    formula: &CnfFormula,
    k: usize,
    set: WeightSet,
    min_t: Option<&BigUint>,
    min_t_prime: Option<&BigUint>,
) -> Result<GadgetWeights> {
    let n = formula.num_vars();
    if n < 2 || k < 1 || k >= n {
        return Err(Error::Parameter(format!(
            "gadget weights need n >= 2 and 1 <= k < n (n = {n}, k = {k})"
        )));
    }
    GadgetWeights::build(formula, k, set, min_t, min_t_prime)
}

impl GadgetWeights {
    /// Builder shared with the reductions; accepts `1 <= k <= n`.
    pub(crate) fn build(
        formula: &CnfFormula,
        k: usize,
        set: WeightSet,
        min_t: Option<&BigUint>,
        min_t_prime: Option<&BigUint>,
    ) -> Result<Self> {
        let n = formula.num_vars();
        let m = formula.num_clauses() as u32;
        if n < 2 || k < 1 || k > n {
            return Err(Error::Parameter(format!(
                "gadget weights need n >= 2 and 1 <= k <= n (n = {n}, k = {k})"
            )));
        }
        let c = ceil_log2(n);
        let r = c - 1;
        let two_c1 = pow2(c + 1);

        let t_prime = if set.has_complement() {
            let bound = match min_t_prime {
                Some(b) if *b > two_c1 => b.clone(),
                _ => two_c1.clone(),
            };
            Some(min_exponent_above(&bound))
        } else {
            None
        };
        let mut t_bound = two_c1.clone();
        if let Some(tp) = t_prime {
            let spread: BigUint = (1..=m).map(|l| pow10(l * tp)).sum();
            let need = pow10(tp) + &two_c1 * spread;
            t_bound = t_bound.max(need);
        }
        if let Some(b) = min_t {
            t_bound = t_bound.max(b.clone());
        }
        let t = min_exponent_above(&t_bound);

        let lead = |i: usize| -> BigUint {
            if set.has_unit_offset() {
                pow10(t * (m + 1) + 2 * i as u32)
            } else {
                pow10(t * (m + 1) + i as u32)
            }
        };
        let literal_weight = |i: usize, positive: bool| -> BigUint {
            let mut w = lead(i);
            if set.has_unit_offset() {
                w += 1u32;
            }
            for (j, clause) in formula.clauses().iter().enumerate() {
                if clause.contains(cnf::Literal::new(i, positive)) {
                    w += pow10(t * (j as u32 + 1));
                }
            }
            w
        };
        let player = |label: String, w: BigUint| GadgetPlayer {
            label,
            weight: Weight::new(w),
        };

        let mut m_players = Vec::with_capacity(2 * k);
        let mut a_players = Vec::with_capacity(2 * (n - k));
        for i in 1..=k {
            m_players.push(player(format!("a_{i}"), literal_weight(i, true)));
        }
        for i in 1..=k {
            m_players.push(player(format!("b_{i}"), literal_weight(i, false)));
        }
        for i in k + 1..=n {
            a_players.push(player(format!("a_{i}"), literal_weight(i, true)));
        }
        for i in k + 1..=n {
            a_players.push(player(format!("b_{i}"), literal_weight(i, false)));
        }

        let mut c_players = Vec::new();
        let mut c_prime_players = Vec::new();
        for j in 1..=m {
            for s in 0..=r {
                let prime = t_prime.map(|tp| pow2(s) * pow10(tp * j));
                let mut w = pow2(s) * pow10(t * j);
                if let Some(p) = &prime {
                    w += p;
                }
                c_players.push(player(format!("c_{j}_{s}"), w));
                if let Some(p) = prime {
                    c_prime_players.push(player(format!("cp_{j}_{s}"), p));
                }
            }
        }

        let mut q_target: BigUint = (1..=n).map(lead).sum();
        if set.has_unit_offset() {
            q_target += n;
        }
        q_target += pow2(c) * (1..=m).map(|j| pow10(t * j)).sum::<BigUint>();
        if let Some(tp) = t_prime {
            q_target += (pow2(c) - 1u32) * (1..=m).map(|j| pow10(tp * j)).sum::<BigUint>();
        }

        let gw = GadgetWeights {
            formula: formula.clone(),
            set,
            k,
            c,
            t,
            t_prime,
            q_target,
            m_players,
            a_players,
            c_players,
            c_prime_players,
        };
        gw.check_digit_bounds()?;
        Ok(gw)
    }

    /// Re-checks that no digit block can overflow into the next one.
    fn check_digit_bounds(&self) -> Result<()> {
        let two_c1 = pow2(self.c + 1);
        let ten_t = pow10(self.t);
        if ten_t <= two_c1 {
            return Err(Error::Infeasible("10^t must exceed 2^(c+1)".into()));
        }
        if let Some(tp) = self.t_prime {
            let ten_tp = pow10(tp);
            let prime_total: BigUint = self.c_prime_players.iter().map(|p| p.weight.value()).sum();
            if ten_tp <= two_c1 || &ten_tp + 2u32 * prime_total >= ten_t {
                return Err(Error::Infeasible("complement block overflows".into()));
            }
        }
        let top = pow10(self.t * (self.num_clauses() as u32 + 1));
        let low: BigUint = self.players().map(|p| p.weight.value() % &top).sum();
        if low >= top {
            return Err(Error::Infeasible("clause blocks overflow into variable blocks".into()));
        }
        Ok(())
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn set(&self) -> WeightSet {
        self.set
    }

    pub fn n(&self) -> usize {
        self.formula.num_vars()
    }

    pub fn m(&self) -> usize {
        self.formula.num_clauses()
    }

    fn num_clauses(&self) -> usize {
        self.formula.num_clauses()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `r = ceil(log2 n) - 1`; clause counters use bits `0..=r`.
    pub fn r(&self) -> u32 {
        self.c - 1
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn t_prime(&self) -> Option<u32> {
        self.t_prime
    }

    pub fn q_target(&self) -> &BigUint {
        &self.q_target
    }

    pub fn m_players(&self) -> &[GadgetPlayer] {
        &self.m_players
    }

    pub fn a_players(&self) -> &[GadgetPlayer] {
        &self.a_players
    }

    pub fn c_players(&self) -> &[GadgetPlayer] {
        &self.c_players
    }

    pub fn c_prime_players(&self) -> &[GadgetPlayer] {
        &self.c_prime_players
    }

    /// All players in the order `M, A, C, C'`; coalitions index this order.
    pub fn players(&self) -> impl Iterator<Item = &GadgetPlayer> {
        self.m_players
            .iter()
            .chain(&self.a_players)
            .chain(&self.c_players)
            .chain(&self.c_prime_players)
    }

    pub fn num_players(&self) -> usize {
        self.m_players.len() + self.a_players.len() + self.c_players.len() + self.c_prime_players.len()
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.players().map(|p| p.weight.clone()).collect()
    }

    pub fn w_m(&self) -> BigUint {
        sum(&self.m_players)
    }

    pub fn w_a(&self) -> BigUint {
        sum(&self.a_players)
    }

    pub fn w_c(&self) -> BigUint {
        sum(&self.c_players)
    }

    pub fn w_c_prime(&self) -> BigUint {
        sum(&self.c_prime_players)
    }

    /// The leading power of ten of variable `i` (1-based).
    pub fn lead(&self, i: usize) -> BigUint {
        let m1 = self.num_clauses() as u32 + 1;
        if self.set.has_unit_offset() {
            pow10(self.t * m1 + 2 * i as u32)
        } else {
            pow10(self.t * m1 + i as u32)
        }
    }

    fn pos_literal(&self, i: usize, positive: bool) -> usize {
        let (n, k) = (self.n(), self.k);
        match (i <= k, positive) {
            (true, true) => i - 1,
            (true, false) => k + i - 1,
            (false, true) => 2 * k + (i - k - 1),
            (false, false) => 2 * k + (n - k) + (i - k - 1),
        }
    }

    fn pos_clause(&self, j: usize, s: u32, prime: bool) -> usize {
        let width = self.c as usize;
        let base = 2 * self.n() + if prime { self.num_clauses() * width } else { 0 };
        base + (j - 1) * width + s as usize
    }

    /// The coalition of weight `q_target` encoding a satisfying assignment.
    pub fn assignment_to_coalition(&self, assignment: &[bool]) -> Result<Coalition> {
        let n = self.n();
        if assignment.len() != n {
            return Err(Error::Parameter(format!(
                "assignment has {} values, formula has {n} variables",
                assignment.len()
            )));
        }
        if !self.formula.eval(assignment) {
            return Err(Error::Parameter("assignment does not satisfy the formula".into()));
        }
        let mut coalition = Coalition::new();
        for (i, &value) in assignment.iter().enumerate() {
            coalition.insert(self.pos_literal(i + 1, value));
        }
        let full = 1usize << self.c;
        for (j, clause) in self.formula.clauses().iter().enumerate() {
            let p = clause
                .literals()
                .iter()
                .filter(|l| assignment[l.var() - 1] == l.is_positive())
                .count();
            let fill = full - p;
            for s in 0..self.c {
                if fill >> s & 1 == 1 {
                    coalition.insert(self.pos_clause(j + 1, s, false));
                }
            }
            if self.set.has_complement() {
                for s in 0..self.c {
                    if (p - 1) >> s & 1 == 1 {
                        coalition.insert(self.pos_clause(j + 1, s, true));
                    }
                }
            }
        }
        Ok(coalition)
    }

    /// Reads the assignment back from a coalition of weight `q_target`.
    pub fn coalition_to_assignment(&self, coalition: &Coalition) -> Result<Vec<bool>> {
        let weights = self.weights();
        let mut total = BigUint::zero();
        for p in coalition.members() {
            let w = weights.get(p).ok_or(Error::PlayerOutOfRange {
                player: p,
                players: weights.len(),
            })?;
            total += w.value();
        }
        if total != self.q_target {
            return Err(Error::NotGadgetCoalition(format!(
                "weight {total} differs from the target {}",
                self.q_target
            )));
        }
        let mut assignment = Vec::with_capacity(self.n());
        for i in 1..=self.n() {
            let a = coalition.contains(self.pos_literal(i, true));
            let b = coalition.contains(self.pos_literal(i, false));
            if a == b {
                return Err(Error::NotGadgetCoalition(format!(
                    "variable {i} must be chosen exactly once"
                )));
            }
            assignment.push(a);
        }
        if !self.formula.eval(&assignment) {
            return Err(Error::NotGadgetCoalition(
                "decoded assignment does not satisfy the formula".into(),
            ));
        }
        Ok(assignment)
    }

    /// Exhaustively checks the coalition/assignment correspondence.
    /// `cap` bounds the number of gadget players that may be enumerated.
    pub fn verify_bijection(&self, cap: usize) -> Result<BijectionReport> {
        let hits = counting::enumerate_subsets_with_sum(&self.weights(), &self.q_target, cap)?;
        let models = cnf::count_models(&self.formula, &PartialAssignment::empty())?;
        let mut round_trips = true;
        let mut decoded = Vec::with_capacity(hits.len());
        for &mask in &hits {
            let coalition: Coalition = (0..64).filter(|b| mask >> b & 1 == 1).collect();
            match self.coalition_to_assignment(&coalition) {
                Ok(assignment) => {
                    let back = self.assignment_to_coalition(&assignment)?;
                    round_trips &= back == coalition;
                    decoded.push(assignment);
                }
                Err(_) => round_trips = false,
            }
        }
        decoded.sort();
        decoded.dedup();
        round_trips &= decoded.len() == hits.len();
        let subsets = BigUint::from(hits.len());
        Ok(BijectionReport {
            equal: round_trips && subsets == models,
            subsets,
            models,
            round_trips,
        })
    }
}

fn sum(players: &[GadgetPlayer]) -> BigUint {
    players.iter().map(|p| p.weight.value()).sum()
}

/// Result of an exhaustive bijection check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BijectionReport {
    /// Number of coalitions whose weight equals the quota target.
    #[serde(serialize_with = "crate::game::decimal::serialize")]
    pub subsets: BigUint,
    /// Number of satisfying assignments.
    #[serde(serialize_with = "crate::game::decimal::serialize")]
    pub models: BigUint,
    /// Every coalition decodes to a distinct model and encodes back to itself.
    pub round_trips: bool,
    pub equal: bool,
}

impl Serialize for GadgetWeights {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Groups<'a> {
            #[serde(rename = "M")]
            m: &'a [GadgetPlayer],
            #[serde(rename = "A")]
            a: &'a [GadgetPlayer],
            #[serde(rename = "C")]
            c: &'a [GadgetPlayer],
            #[serde(rename = "C_prime")]
            c_prime: &'a [GadgetPlayer],
        }
        let mut s = serializer.serialize_struct("GadgetWeights", 9)?;
        s.serialize_field("set", &self.set.id())?;
        s.serialize_field("n", &self.n())?;
        s.serialize_field("m", &self.m())?;
        s.serialize_field("k", &self.k)?;
        s.serialize_field("r", &self.r())?;
        s.serialize_field("t", &self.t)?;
        s.serialize_field("t_prime", &self.t_prime)?;
        s.serialize_field("q_target", &self.q_target.to_string())?;
        s.serialize_field(
            "players",
            &Groups {
                m: &self.m_players,
                a: &self.a_players,
                c: &self.c_players,
                c_prime: &self.c_prime_players,
            },
        )?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;

    fn or2() -> CnfFormula {
        parse_dimacs("p cnf 2 1\n1 2 0").unwrap()
    }

    fn w(gw: &GadgetWeights, label: &str) -> String {
        gw.players()
            .find(|p| p.label == label)
            .unwrap()
            .weight
            .to_string()
    }

    #[test]
    fn set_one_and_three_values() {
        let gw = build_weight_set(&or2(), 1, WeightSet::One, None, None).unwrap();
        assert_eq!((gw.t(), gw.r()), (1, 0));
        assert_eq!(w(&gw, "a_1"), "1010");
        assert_eq!(w(&gw, "b_1"), "1000");
        assert_eq!(w(&gw, "a_2"), "10010");
        assert_eq!(w(&gw, "b_2"), "10000");
        assert_eq!(w(&gw, "c_1_0"), "10");
        assert_eq!(gw.q_target().to_string(), "11020");

        let gw = build_weight_set(&or2(), 1, WeightSet::Three, None, None).unwrap();
        assert_eq!(w(&gw, "a_1"), "10011");
        assert_eq!(w(&gw, "b_1"), "10001");
        assert_eq!(w(&gw, "a_2"), "1000011");
        assert_eq!(w(&gw, "b_2"), "1000001");
        assert_eq!(gw.q_target().to_string(), "1010022");

        assert!(build_weight_set(&or2(), 2, WeightSet::One, None, None).is_err());
        assert!(build_weight_set(&or2(), 0, WeightSet::One, None, None).is_err());
    }

    #[test]
    fn coalition_maps() {
        let gw = build_weight_set(&or2(), 1, WeightSet::One, None, None).unwrap();
        let labels = |c: &Coalition| -> Vec<String> {
            let all: Vec<_> = gw.players().collect();
            c.members().map(|p| all[p].label.clone()).collect()
        };
        let c = gw.assignment_to_coalition(&[true, false]).unwrap();
        assert_eq!(labels(&c), ["a_1", "b_2", "c_1_0"]);
        let c = gw.assignment_to_coalition(&[true, true]).unwrap();
        assert_eq!(labels(&c), ["a_1", "a_2"]);
        assert!(gw.assignment_to_coalition(&[false, false]).is_err());
        // {b_1, b_2} weighs 11000, not the target.
        let bad: Coalition = [1, 3].into_iter().collect();
        assert!(matches!(
            gw.coalition_to_assignment(&bad),
            Err(Error::NotGadgetCoalition(_))
        ));
    }

    #[test]
    fn bijection_small() {
        let cases = [
            ("p cnf 2 1\n1 2 0", 3u32),
            ("p cnf 2 2\n1 0\n2 0", 1),
            ("p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0", 0),
        ];
        for (text, models) in cases {
            let f = parse_dimacs(text).unwrap();
            for set in WeightSet::ALL {
                let gw = build_weight_set(&f, 1, set, None, None).unwrap();
                let report = gw.verify_bijection(26).unwrap();
                assert!(report.equal, "{text} set {set}");
                assert_eq!(report.subsets, BigUint::from(models));
            }
        }
    }

    #[test]
    fn exponents_respect_bounds() {
        let gw =
            build_weight_set(&or2(), 1, WeightSet::Two, Some(&BigUint::from(999u32)), None).unwrap();
        assert_eq!(gw.t(), 3);
        let gw = build_weight_set(&or2(), 1, WeightSet::Two, None, Some(&BigUint::from(100u32)))
            .unwrap();
        assert_eq!(gw.t_prime(), Some(3));
        assert!(gw.t() > 3);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(
            [1, 2, 3, 4, 5, 8, 9].map(ceil_log2),
            [0, 1, 2, 2, 3, 3, 4]
        );
    }
}
